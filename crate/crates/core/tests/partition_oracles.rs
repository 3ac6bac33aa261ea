//! Partition validity, the broom optimum, degrees and the convex bound
//! against exhaustive oracles.

use msplab::engine::{Stream, TrialSeed};
use msplab::matroid::{max_weight_basis, ElementId, GraphicMatroid};
use msplab::partition::{
    convex_extremum, count_low_degree, edge_degree, korula_pal_partition, plant_broom, validate_partition_bruteforce,
    validate_partition_triangles, EdgePartition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn edges_of(n: usize) -> Vec<(u32, u32)> {
    GraphicMatroid::complete(n).edges().to_vec()
}

fn acyclic(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for &(u, v) in edges {
        let (a, b) = (root(&mut parent, u as usize), root(&mut parent, v as usize));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Valid iff every choice of at most one edge per part is a forest.
fn valid_by_definition(n: usize, labels: &[u32]) -> bool {
    let edges = edges_of(n);
    let m = edges.len();
    'masks: for mask in 0u32..1 << m {
        let mut used = Vec::new();
        let mut chosen = Vec::new();
        for i in (0..m).filter(|i| mask >> i & 1 == 1) {
            if used.contains(&labels[i]) {
                continue 'masks;
            }
            used.push(labels[i]);
            chosen.push(edges[i]);
        }
        if !acyclic(n, &chosen) {
            return false;
        }
    }
    true
}

/// Restricted growth strings of length `len`: each set partition once.
fn set_partitions(len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32]];
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                let top = *s.iter().max().unwrap();
                (0..=top + 1).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn check_all_agree(n: usize, labels: Vec<u32>) -> bool {
    let by_definition = valid_by_definition(n, &labels);
    let p = EdgePartition::new(n, labels.clone()).unwrap();
    assert_eq!(validate_partition_triangles(&p), by_definition, "K_{n} {labels:?}");
    assert_eq!(validate_partition_bruteforce(&p).unwrap(), by_definition, "K_{n} {labels:?}");
    by_definition
}

#[test]
fn every_partition_of_k4() {
    let all = set_partitions(6);
    assert_eq!(all.len(), 203);
    let valid = all.into_iter().filter(|l| check_all_agree(4, l.clone())).count();
    assert!(valid > 0 && valid < 203);
}

#[test]
fn random_partitions_of_k5_and_k6() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in [5usize, 6] {
        let m = n * (n - 1) / 2;
        let mut valid = 0;
        for _ in 0..1000 {
            let parts = rng.gen_range(1..=n as u32);
            let labels: Vec<u32> = (0..m).map(|_| rng.gen_range(0..parts)).collect();
            valid += usize::from(check_all_agree(n, labels));
        }
        assert!(valid > 50 && valid < 1000, "K_{n}: {valid} valid");
    }
}

#[test]
fn korula_pal_samples_are_valid() {
    for n in 2..=32 {
        for t in 0..10 {
            let p = korula_pal_partition(n, &mut TrialSeed::new(6, t).rng(Stream::Instance)).unwrap();
            assert!(validate_partition_triangles(&p), "n = {n}");
            if n <= 6 {
                assert!(valid_by_definition(n, p.labels()));
            }
        }
    }
}

/// Spanning trees of `K_n` decoded from every Prüfer sequence.
fn spanning_trees(n: usize) -> impl Iterator<Item = Vec<(u32, u32)>> {
    let count = (n as u64).pow(n as u32 - 2);
    (0..count).map(move |mut code| {
        let seq: Vec<usize> = (0..n - 2)
            .map(|_| {
                let d = (code % n as u64) as usize;
                code /= n as u64;
                d
            })
            .collect();
        let mut degree = vec![1usize; n];
        for &x in &seq {
            degree[x] += 1;
        }
        let mut tree = Vec::with_capacity(n - 1);
        for &x in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            tree.push((leaf.min(x) as u32, leaf.max(x) as u32));
            degree[leaf] -= 1;
            degree[x] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        tree.push((rest[0] as u32, rest[1] as u32));
        tree
    })
}

#[test]
fn broom_optimum_against_every_spanning_tree() {
    let n = 8;
    let edges = edges_of(n);
    let g = GraphicMatroid::complete(n);
    for t in 0..3 {
        let (w, broom) = plant_broom(n, &mut TrialSeed::new(12, t).rng(Stream::Instance)).unwrap();
        let weight_of = |tree: &[(u32, u32)]| -> u64 {
            tree.iter().map(|uv| w.get(ElementId::from(edges.iter().position(|e| e == uv).unwrap()))).sum()
        };
        let best = spanning_trees(n).map(|tree| weight_of(&tree)).max().unwrap();
        assert_eq!(best, (n - 2) as u64);
        let mwb = max_weight_basis(&g, &w);
        assert_eq!(w.total(&mwb), u128::from(best));
        assert!(broom.legs.iter().all(|l| mwb.contains(l)));
    }
    assert_eq!(spanning_trees(4).count(), 16);
}

#[test]
fn degrees_by_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [4usize, 7, 12] {
        let p = korula_pal_partition(n, &mut rng).unwrap();
        let edges = edges_of(n);
        for (i, &(a, b)) in edges.iter().enumerate() {
            let part = p.part_of(ElementId::from(i));
            // Edges of the same part sharing an endpoint, plus the edge itself.
            let touching = edges
                .iter()
                .enumerate()
                .filter(|&(j, &(x, y))| p.part_of(ElementId::from(j)) == part && (x == a || x == b || y == a || y == b))
                .count();
            assert_eq!(edge_degree(&p, ElementId::from(i)), touching as u32);
        }
    }
}

#[test]
fn low_degree_counts_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [32usize, 64, 128] {
        let parts = [korula_pal_partition(n, &mut rng).unwrap(), EdgePartition::single_part(n).unwrap()];
        for p in &parts {
            for eps in [0.125, 0.25, 0.375] {
                let nf = n as f64;
                assert!(count_low_degree(p, nf.powf(eps / 3.0)) as f64 <= nf.powf(1.5 + eps));
            }
        }
    }
}

/// Largest `Σ x_i^{1+a}` over integer partitions of `n` with parts at most
/// `cap`.
fn best_partition_sum(n: u64, cap: u64, a: f64) -> f64 {
    fn go(left: u64, largest: u64, a: f64) -> f64 {
        if left == 0 {
            return 0.0;
        }
        (1..=largest.min(left)).map(|x| (x as f64).powf(1.0 + a) + go(left - x, x, a)).fold(f64::MIN, f64::max)
    }
    go(n, cap, a)
}

#[test]
fn convex_extremum_against_integer_partitions() {
    let mut checked = 0;
    for n in 2..=12u64 {
        for small in 1..n {
            let gamma = small as f64 / n as f64;
            if gamma >= 0.5 {
                continue;
            }
            for a in [0.125 / 3.0, 0.125, 0.25, 0.5, 0.9] {
                let expected = best_partition_sum(n, n - small, a);
                let got = convex_extremum(n, gamma, a).unwrap();
                assert!((got - expected).abs() <= 1e-9 * expected, "n={n} gamma={gamma} a={a}: {got} vs {expected}");
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}
