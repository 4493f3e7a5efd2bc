//! Small worked graphs shipped with the crate, used by tests and examples.

use crate::dualgraph::{parse_graph, WeightedDualGraph};

pub const SIXTREE: &str = include_str!("../data/sixtree.graph");
pub const TWOVAL: &str = include_str!("../data/twoval.graph");
pub const CYCLIC: &str = include_str!("../data/cyclic.graph");
pub const NONMETRIC: &str = include_str!("../data/nonmetric.graph");
pub const A1: &str = include_str!("../data/a1.graph");

fn load(text: &str) -> WeightedDualGraph {
    parse_graph(text).expect("bundled graph is valid")
}

/// Tree on `a..f` with weights `-2` except `f = -3`; `det(S) = 4`.
pub fn sixtree() -> WeightedDualGraph {
    load(SIXTREE)
}

/// [`sixtree`] with base branch `L` at `a` and branches `A..F` at `a..f`.
pub fn twoval() -> WeightedDualGraph {
    load(TWOVAL)
}

/// Four vertices with multiple edges; `det(S) = 56`.
pub fn cyclic() -> WeightedDualGraph {
    load(CYCLIC)
}

/// Four `-5` vertices on a 4-cycle with one chord; `det(S) = 480`.
pub fn nonmetric() -> WeightedDualGraph {
    load(NONMETRIC)
}

/// A single `-2` curve.
pub fn a1() -> WeightedDualGraph {
    load(A1)
}

/// Labels and distance matrix of a five-point ultrametric with three
/// nested non-trivial balls.
pub fn constree() -> (Vec<&'static str>, Vec<Vec<i64>>) {
    (
        vec!["u", "v", "x", "y", "z"],
        vec![
            vec![0, 1, 1, 2, 3],
            vec![1, 0, 1, 2, 3],
            vec![1, 1, 0, 2, 3],
            vec![2, 2, 2, 0, 3],
            vec![3, 3, 3, 3, 0],
        ],
    )
}
