use super::{check_domain, dedup, ElementId, IndependenceBuilder, Matroid, MatroidError};

/// `M|S`: same independence, ground set cut down to `S`. Ids are preserved.
pub struct Restriction<'a> {
    inner: &'a dyn Matroid,
    members: Vec<bool>,
}

/// `M \ S` for independent `S`: `T` is independent iff `T ∪ S` is
/// independent in `M`. The ground set is `V \ S`.
pub struct Contraction<'a> {
    inner: &'a dyn Matroid,
    contracted: Vec<ElementId>,
    removed: Vec<bool>,
}

pub fn restrict<'a>(m: &'a dyn Matroid, s: &[ElementId]) -> Result<Restriction<'a>, MatroidError> {
    check_domain(m, s)?;
    let mut members = vec![false; m.id_bound()];
    for e in s {
        members[e.index()] = true;
    }
    Ok(Restriction { inner: m, members })
}

pub fn contract<'a>(m: &'a dyn Matroid, s: &[ElementId]) -> Result<Contraction<'a>, MatroidError> {
    check_domain(m, s)?;
    let contracted = dedup(s);
    let mut b = m.builder();
    if !contracted.iter().all(|&e| b.try_insert(e)) {
        return Err(MatroidError::Contract("contracted set is dependent".into()));
    }
    let mut removed = vec![false; m.id_bound()];
    for e in &contracted {
        removed[e.index()] = true;
    }
    Ok(Contraction { inner: m, contracted, removed })
}

impl Matroid for Restriction<'_> {
    fn id_bound(&self) -> usize {
        self.members.len()
    }

    fn contains(&self, e: ElementId) -> bool {
        self.members.get(e.index()).copied().unwrap_or(false)
    }

    fn builder(&self) -> Box<dyn IndependenceBuilder + '_> {
        self.inner.builder()
    }

    fn uniform_capacity(&self) -> Option<usize> {
        self.inner.uniform_capacity()
    }
}

impl Matroid for Contraction<'_> {
    fn id_bound(&self) -> usize {
        self.removed.len()
    }

    fn contains(&self, e: ElementId) -> bool {
        self.inner.contains(e) && !self.removed[e.index()]
    }

    fn builder(&self) -> Box<dyn IndependenceBuilder + '_> {
        let mut b = self.inner.builder();
        for &e in &self.contracted {
            let ok = b.try_insert(e);
            debug_assert!(ok, "contracted set was checked independent");
        }
        b
    }

    fn uniform_capacity(&self) -> Option<usize> {
        self.inner
            .uniform_capacity()
            .map(|k| k.saturating_sub(self.contracted.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{is_independent, rank, GraphicMatroid, UniformMatroid};

    const E01: ElementId = ElementId(0);
    const E02: ElementId = ElementId(1);
    const E12: ElementId = ElementId(2);

    /// Every subset of the ground set (as element lists), for small matroids.
    fn subsets(m: &dyn Matroid) -> Vec<Vec<ElementId>> {
        let ground = m.elements();
        (0u32..1 << ground.len())
            .map(|mask| {
                ground
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn restriction_of_triangle_is_free() {
        let k3 = GraphicMatroid::complete(3);
        let r = restrict(&k3, &[E01, E12]).unwrap();
        assert_eq!(r.elements(), vec![E01, E12]);
        assert!(is_independent(&r, &[E01, E12]).unwrap());
        assert!(is_independent(&r, &[E02]).is_err());
        let empty = restrict(&k3, &[]).unwrap();
        assert_eq!(rank(&empty, &[]).unwrap(), 0);
        assert_eq!(empty.ground_size(), 0);
    }

    #[test]
    fn contraction_merges_endpoints() {
        let k3 = GraphicMatroid::complete(3);
        let c = contract(&k3, &[E01]).unwrap();
        assert_eq!(c.elements(), vec![E02, E12]);
        assert!(!is_independent(&c, &[E12, E02]).unwrap());
        assert!(is_independent(&c, &[E12]).unwrap());
        assert!(contract(&k3, &[E01, E02, E12]).is_err());
    }

    #[test]
    fn empty_contraction_is_identity() {
        let k4 = GraphicMatroid::complete(4);
        let c = contract(&k4, &[]).unwrap();
        for s in subsets(&k4) {
            assert_eq!(is_independent(&c, &s), is_independent(&k4, &s));
        }
    }

    #[test]
    fn restriction_composes_as_intersection() {
        let k4 = GraphicMatroid::complete(4);
        let ground = k4.elements();
        // A = even ids plus e1, B = ids < 4.
        let a: Vec<_> = ground.iter().copied().filter(|e| e.0 % 2 == 0 || e.0 == 1).collect();
        let b: Vec<_> = ground.iter().copied().filter(|e| e.0 < 4).collect();
        let ab: Vec<_> = a.iter().copied().filter(|e| b.contains(e)).collect();
        let ra = restrict(&k4, &a).unwrap();
        let rab = restrict(&ra, &ab).unwrap();
        let direct = restrict(&k4, &ab).unwrap();
        assert_eq!(rab.elements(), direct.elements());
        for s in subsets(&k4) {
            assert_eq!(is_independent(&rab, &s), is_independent(&direct, &s), "{s:?}");
        }
    }

    #[test]
    fn contraction_rank_drops_by_contracted_size() {
        let k4 = GraphicMatroid::complete(4);
        let full = rank(&k4, &k4.elements()).unwrap();
        for s in subsets(&k4) {
            if !is_independent(&k4, &s).unwrap() {
                continue;
            }
            let c = contract(&k4, &s).unwrap();
            assert_eq!(rank(&c, &c.elements()).unwrap(), full - s.len());
        }
    }

    #[test]
    fn contractions_compose() {
        let k4 = GraphicMatroid::complete(4);
        for a in subsets(&k4) {
            for b in subsets(&k4) {
                if a.iter().any(|e| b.contains(e)) {
                    continue;
                }
                let mut ab = a.clone();
                ab.extend(&b);
                if !is_independent(&k4, &ab).unwrap() {
                    continue;
                }
                let once = contract(&k4, &ab).unwrap();
                let ca = contract(&k4, &a).unwrap();
                let twice = contract(&ca, &b).unwrap();
                assert_eq!(once.elements(), twice.elements());
                for s in subsets(&once) {
                    assert_eq!(is_independent(&once, &s), is_independent(&twice, &s));
                }
            }
        }
    }

    #[test]
    fn uniform_minors_stay_uniform() {
        let u = UniformMatroid::new(6, 3);
        let c = contract(&u, &[ElementId(0), ElementId(5)]).unwrap();
        assert_eq!(c.uniform_capacity(), Some(1));
        assert_eq!(rank(&c, &c.elements()).unwrap(), 1);
        let r = restrict(&u, &[ElementId(1), ElementId(2)]).unwrap();
        assert_eq!(rank(&r, &r.elements()).unwrap(), 2);
    }
}
