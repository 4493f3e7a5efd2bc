//! Seeded random resolution graphs.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dualgraph::{Branch, Vertex, WeightedDualGraph};
use crate::exactalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// `w(v) = -(deg(v) + 1 + r)` with `r` uniform in `0..=3`, so `-I` is
    /// strictly diagonally dominant.
    Dominant,
    /// Weights uniform in `-4..=-2`, redrawn until Sylvester's criterion
    /// holds.
    RejectSample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenOptions {
    pub vertices: usize,
    pub branches: RangeInclusive<usize>,
    pub weights: WeightMode,
    /// Extra random edges on top of the spanning tree; nonzero values give
    /// non-arborescent graphs.
    pub extra_edges: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { vertices: 6, branches: 1..=5, weights: WeightMode::Dominant, extra_edges: 0 }
    }
}

impl GenOptions {
    pub fn with_vertices(n: usize) -> Self {
        GenOptions { vertices: n, ..Default::default() }
    }
}

/// Derives independent per-instance seeds from one run seed (splitmix64).
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `A, B, ..., Z, A1, B1, ...`.
pub fn branch_name(i: usize) -> String {
    let letter = char::from(b'A' + (i % 26) as u8);
    match i / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

/// A random graph on `v0, v1, ...`: vertex `i` hangs off a uniformly chosen
/// earlier vertex, then `extra_edges` further edges are added.
pub fn random_tree(seed: u64, opts: &GenOptions) -> WeightedDualGraph {
    assert!(opts.vertices >= 1, "need at least one vertex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = opts.vertices;
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    if n >= 2 {
        for _ in 0..opts.extra_edges {
            let u = rng.gen_range(0..n);
            let v = (u + rng.gen_range(1..n)) % n;
            edges.push((u.min(v), u.max(v)));
        }
    }
    let mut degree = vec![0i64; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edge_list: Vec<(String, String, u64)> =
        edges.iter().map(|&(u, v)| (names[u].clone(), names[v].clone(), 1)).collect();
    let build = |weights: &[i64], branches: Vec<Branch>| {
        let vertices = names
            .iter()
            .zip(weights)
            .map(|(name, &weight)| Vertex { name: name.clone(), weight, genus: None })
            .collect();
        WeightedDualGraph::new(vertices, edge_list.clone(), branches).expect("generated graph is valid")
    };
    let dominant = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        degree.iter().map(|&d| (-(d + 1 + rng.gen_range(0..=3))).min(-2)).collect()
    };
    let weights = match opts.weights {
        WeightMode::Dominant => dominant(&mut rng),
        WeightMode::RejectSample => {
            let mut found = None;
            for _ in 0..1000 {
                let w: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=-2)).collect();
                let m = build(&w, Vec::new()).intersection_matrix();
                if exactalg::is_negative_definite(&m).expect("symmetric") {
                    found = Some(w);
                    break;
                }
            }
            found.unwrap_or_else(|| dominant(&mut rng))
        }
    };
    let k = rng.gen_range(opts.branches.clone());
    let branches = (0..k)
        .map(|i| Branch { name: branch_name(i), at: names[rng.gen_range(0..n)].clone() })
        .collect();
    build(&weights, branches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let opts = GenOptions::with_vertices(9);
        assert_eq!(random_tree(7, &opts), random_tree(7, &opts));
        assert_ne!(random_tree(7, &opts), random_tree(8, &opts));
    }

    #[test]
    fn single_vertex() {
        for seed in 0..20 {
            let g = random_tree(seed, &GenOptions::with_vertices(1));
            assert_eq!(g.len(), 1);
            assert!(g.weight_at(0) <= -2);
        }
    }

    #[test]
    fn outputs_are_negative_definite_trees() {
        for mode in [WeightMode::Dominant, WeightMode::RejectSample] {
            for seed in 0..50 {
                let opts = GenOptions { vertices: 1 + seed as usize % 12, weights: mode, ..Default::default() };
                let g = random_tree(seed, &opts);
                assert!(g.is_arborescent());
                assert!(exactalg::is_negative_definite(&g.intersection_matrix()).unwrap());
                assert!((1..=5).contains(&g.branches().len()));
            }
        }
    }

    #[test]
    fn extra_edges_make_cycles() {
        let opts = GenOptions { vertices: 5, extra_edges: 3, ..Default::default() };
        let g = random_tree(3, &opts);
        assert!(!g.is_arborescent());
        assert!(exactalg::is_negative_definite(&g.intersection_matrix()).unwrap());
    }

    #[test]
    fn names() {
        assert_eq!(branch_name(0), "A");
        assert_eq!(branch_name(25), "Z");
        assert_eq!(branch_name(27), "B1");
        assert_ne!(instance_seed(42, 0), instance_seed(42, 1));
    }
}
