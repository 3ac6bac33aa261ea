use super::{ElementId, IndependenceBuilder, Matroid};

/// U(k, n): a set is independent iff it has at most `k` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformMatroid {
    ground_size: usize,
    capacity: usize,
}

impl UniformMatroid {
    pub fn new(ground_size: usize, capacity: usize) -> Self {
        UniformMatroid { ground_size, capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[derive(Clone)]
struct CountingBuilder {
    remaining: usize,
}

impl IndependenceBuilder for CountingBuilder {
    fn try_insert(&mut self, _e: ElementId) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        true
    }

    fn fork(&self) -> Box<dyn IndependenceBuilder + '_> {
        Box::new(self.clone())
    }
}

impl Matroid for UniformMatroid {
    fn id_bound(&self) -> usize {
        self.ground_size
    }

    fn contains(&self, e: ElementId) -> bool {
        e.index() < self.ground_size
    }

    fn builder(&self) -> Box<dyn IndependenceBuilder + '_> {
        Box::new(CountingBuilder { remaining: self.capacity })
    }

    fn uniform_capacity(&self) -> Option<usize> {
        Some(self.capacity)
    }

    fn ground_size(&self) -> usize {
        self.ground_size
    }
}
