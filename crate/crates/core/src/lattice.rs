//! The exceptional lattice: intersection form, Lipman dual basis, Mumford
//! intersection numbers of branches, exceptional transforms and the
//! fundamental cycle.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dualgraph::WeightedDualGraph;
use crate::error::{Error, Result};
use crate::exactalg::{self, rat_json, IntMatrix, RatMatrix};

/// A rational combination of the exceptional curves `E_u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalCycle {
    labels: Vec<String>,
    coeffs: Vec<BigRational>,
}

impl ExceptionalCycle {
    pub fn new(labels: Vec<String>, coeffs: Vec<BigRational>) -> Result<Self> {
        if labels.len() != coeffs.len() {
            return Err(Error::DimensionMismatch);
        }
        Ok(ExceptionalCycle { labels, coeffs })
    }

    pub fn zero(labels: Vec<String>) -> Self {
        let coeffs = vec![BigRational::zero(); labels.len()];
        ExceptionalCycle { labels, coeffs }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, name: &str) -> Result<&BigRational> {
        self.labels
            .iter()
            .position(|l| l == name)
            .map(|i| &self.coeffs[i])
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(BigRational::is_integer)
    }

    pub fn add(&self, other: &ExceptionalCycle) -> ExceptionalCycle {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        ExceptionalCycle { labels: self.labels.clone(), coeffs }
    }

    pub fn scale(&self, k: &BigRational) -> ExceptionalCycle {
        ExceptionalCycle { labels: self.labels.clone(), coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn neg(&self) -> ExceptionalCycle {
        self.scale(&-BigRational::one())
    }

    /// `{vertex: "p/q"}`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> =
            self.labels.iter().zip(&self.coeffs).map(|(l, c)| (l.clone(), rat_json(c).into())).collect();
        serde_json::Value::Object(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeFlags {
    pub effective: bool,
    pub anti_nef: bool,
}

#[derive(Debug, Clone)]
pub struct IntersectionLattice {
    graph: WeightedDualGraph,
    intersection: IntMatrix,
    dual: RatMatrix,
    det_s: BigInt,
}

/// Checks negative definiteness and inverts the intersection matrix.
pub fn build_lattice(g: &WeightedDualGraph) -> Result<IntersectionLattice> {
    let intersection = g.intersection_matrix();
    exactalg::require_negative_definite(&intersection)?;
    let det_s = exactalg::determinant(&intersection.negated());
    let dual = exactalg::inverse(&intersection)?;
    Ok(IntersectionLattice { graph: g.clone(), intersection, dual, det_s })
}

impl IntersectionLattice {
    pub fn graph(&self) -> &WeightedDualGraph {
        &self.graph
    }

    pub fn intersection(&self) -> &IntMatrix {
        &self.intersection
    }

    /// The matrix `(E_u* . E_v*)`.
    pub fn dual(&self) -> &RatMatrix {
        &self.dual
    }

    pub fn det_s(&self) -> &BigInt {
        &self.det_s
    }

    pub fn labels(&self) -> &[String] {
        self.intersection.labels()
    }

    pub fn len(&self) -> usize {
        self.intersection.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dual_pairing_at(&self, i: usize, j: usize) -> &BigRational {
        self.dual.get(i, j)
    }

    /// `E_u* . E_v*`; strictly negative.
    pub fn dual_pairing(&self, u: &str, v: &str) -> Result<BigRational> {
        let (i, j) = (self.graph.index_of(u)?, self.graph.index_of(v)?);
        Ok(self.dual.get(i, j).clone())
    }

    /// `A . B = -E_{u(A)}* . E_{u(B)}*` for distinct branches.
    pub fn mumford_intersection(&self, a: &str, b: &str) -> Result<BigRational> {
        let ia = self.graph.attachment(a)?;
        let ib = self.graph.attachment(b)?;
        if a == b {
            return Err(Error::IdenticalBranches(a.to_string()));
        }
        Ok(-self.dual.get(ia, ib))
    }

    /// `E_u` as a cycle.
    pub fn unit_cycle(&self, u: usize) -> ExceptionalCycle {
        let mut z = ExceptionalCycle::zero(self.labels().to_vec());
        z.coeffs[u] = BigRational::one();
        z
    }

    /// `E_u*` expanded in the basis `(E_w)`; its coefficients are row `u` of
    /// the dual matrix.
    pub fn dual_cycle(&self, u: usize) -> ExceptionalCycle {
        ExceptionalCycle { labels: self.labels().to_vec(), coeffs: self.dual.rows()[u].clone() }
    }

    /// `D . E_u`.
    pub fn dot_unit(&self, d: &ExceptionalCycle, u: usize) -> BigRational {
        d.coeffs
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (w, c)| acc + c * BigRational::from(self.intersection.get(w, u).clone()))
    }

    /// `D . D'` through the intersection matrix.
    pub fn dot(&self, d: &ExceptionalCycle, e: &ExceptionalCycle) -> BigRational {
        (0..self.len()).fold(BigRational::zero(), |acc, u| acc + &e.coeffs[u] * self.dot_unit(d, u))
    }

    /// `D = -Σ deg(u) E_u*` for the strict transform meeting each `E_u` in
    /// `deg(u)` points.
    pub fn exceptional_transform(&self, degrees: &BTreeMap<String, u64>) -> Result<ExceptionalCycle> {
        let n = self.len();
        let mut deg = vec![0u64; n];
        for (name, &d) in degrees {
            deg[self.graph.index_of(name)?] = d;
        }
        if deg.iter().all(|&d| d == 0) {
            return Err(Error::ZeroDegrees);
        }
        let coeffs = (0..n)
            .map(|w| {
                -(0..n).fold(BigRational::zero(), |acc, u| {
                    acc + BigRational::from(BigInt::from(deg[u])) * self.dual.get(u, w)
                })
            })
            .collect();
        Ok(ExceptionalCycle { labels: self.labels().to_vec(), coeffs })
    }

    pub fn cone_membership(&self, d: &ExceptionalCycle) -> ConeFlags {
        ConeFlags {
            effective: d.coeffs.iter().all(|c| !c.is_negative()),
            anti_nef: (0..self.len()).all(|u| !self.dot_unit(d, u).is_positive()),
        }
    }

    /// Laufer's sequence: start from `Σ E_u` and add `E_u` for the
    /// smallest-named `u` with `Z . E_u > 0` until none is left.
    pub fn fundamental_cycle(&self) -> ExceptionalCycle {
        let labels = self.labels().to_vec();
        let mut by_name: Vec<usize> = (0..self.len()).collect();
        by_name.sort_by(|&i, &j| labels[i].cmp(&labels[j]));
        let mut z = ExceptionalCycle::new(labels, vec![BigRational::one(); self.len()]).expect("sizes agree");
        while let Some(&u) = by_name.iter().find(|&&u| self.dot_unit(&z, u).is_positive()) {
            z.coeffs[u] += BigRational::one();
        }
        z
    }

    /// The vertex `u` with `Z_f = -E_u*`, if there is one.
    pub fn generic_hyperplane_vertex(&self) -> Option<String> {
        let zf = self.fundamental_cycle();
        (0..self.len())
            .find(|&u| self.dual_cycle(u).neg() == zf)
            .map(|u| self.labels()[u].clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels(),
            "detS": self.det_s.to_string(),
            "intersection": self.intersection.to_json(),
            "dual": self.dual.to_json(),
        })
    }
}

/// Brute force over integral cycles with coefficients in `0..=bound`:
/// the nonzero anti-nef ones that are minimal coefficient-wise. Exponential;
/// only for checking [`IntersectionLattice::fundamental_cycle`] on small
/// graphs.
pub fn anti_nef_box_search(lat: &IntersectionLattice, bound: u32) -> Vec<Vec<u32>> {
    let n = lat.len();
    let mut found: Vec<Vec<u32>> = Vec::new();
    let mut z = vec![0u32; n];
    loop {
        let mut k = 0;
        loop {
            if k == n {
                return minimal_elements(found);
            }
            if z[k] < bound {
                z[k] += 1;
                break;
            }
            z[k] = 0;
            k += 1;
        }
        let cycle = ExceptionalCycle {
            labels: lat.labels().to_vec(),
            coeffs: z.iter().map(|&c| BigRational::from(BigInt::from(c))).collect(),
        };
        if lat.cone_membership(&cycle).anti_nef {
            found.push(z.clone());
        }
    }
}

fn minimal_elements(all: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let le = |a: &[u32], b: &[u32]| a.iter().zip(b).all(|(x, y)| x <= y);
    all.iter()
        .filter(|a| !all.iter().any(|b| b != *a && le(b, a)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualgraph::parse_graph;
    use crate::fixtures;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn ints(z: &ExceptionalCycle) -> Vec<i64> {
        z.coeffs().iter().map(|c| i64::try_from(c.to_integer()).unwrap()).collect()
    }

    #[test]
    fn sixtree_dual_matrix_is_det_products_over_det() {
        let lat = build_lattice(&fixtures::sixtree()).unwrap();
        assert_eq!(lat.det_s(), &BigInt::from(4));
        let p = [
            [28, 24, 14, 14, 12, 8],
            [24, 24, 12, 12, 12, 8],
            [14, 12, 9, 7, 6, 4],
            [14, 12, 7, 9, 6, 4],
            [12, 12, 6, 6, 8, 4],
            [8, 8, 4, 4, 4, 4],
        ];
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(lat.dual_pairing_at(i, j), &rat(-v, 4));
            }
        }
        assert_eq!(lat.dual_pairing("a", "b").unwrap(), rat(-6, 1));
        assert_eq!(lat.dual_pairing("f", "f").unwrap(), rat(-1, 1));
    }

    #[test]
    fn single_vertex_lattice() {
        let lat = build_lattice(&fixtures::a1()).unwrap();
        assert_eq!(lat.det_s(), &BigInt::from(2));
        assert_eq!(lat.dual_cycle(0).coeffs(), &[rat(-1, 2)]);
    }

    #[test]
    fn x1_and_x3_dual_pairings() {
        let lat = build_lattice(&fixtures::cyclic()).unwrap();
        assert_eq!(lat.dual_pairing("a", "l").unwrap(), rat(-114, 56));
        assert_eq!(lat.mumford_intersection("A", "B").unwrap(), rat(98, 56));
        let lat3 = build_lattice(&fixtures::nonmetric()).unwrap();
        let scaled = |u, v| -lat3.dual_pairing(u, v).unwrap() * BigRational::from(lat3.det_s().clone());
        assert_eq!(scaled("a", "l"), rat(30, 1));
        assert_eq!(scaled("a", "b"), rat(12, 1));
        assert_eq!(scaled("l", "c"), rat(35, 1));
    }

    #[test]
    fn not_negative_definite_is_reported() {
        let g = parse_graph("vertex a -1\nvertex b -1\nedge a b\n").unwrap();
        assert!(matches!(build_lattice(&g), Err(Error::NotNegativeDefinite { order: 2, .. })));
    }

    #[test]
    fn mumford_numbers() {
        let g = fixtures::twoval();
        let lat = build_lattice(&g).unwrap();
        assert_eq!(lat.mumford_intersection("A", "B").unwrap(), rat(6, 1));
        assert_eq!(lat.mumford_intersection("A", "L").unwrap(), rat(7, 1));
        assert_eq!(lat.mumford_intersection("A", "A"), Err(Error::IdenticalBranches("A".into())));
        assert!(matches!(lat.mumford_intersection("A", "Q"), Err(Error::UnknownBranch(_))));
    }

    #[test]
    fn exceptional_transforms() {
        let lat = build_lattice(&fixtures::sixtree()).unwrap();
        let d = lat.exceptional_transform(&BTreeMap::from([("a".to_string(), 1)])).unwrap();
        assert_eq!(d, lat.dual_cycle(0).neg());
        let d3 = lat.exceptional_transform(&BTreeMap::from([("e".to_string(), 3)])).unwrap();
        assert_eq!(d3, lat.dual_cycle(4).scale(&rat(-3, 1)));
        assert_eq!(lat.exceptional_transform(&BTreeMap::new()), Err(Error::ZeroDegrees));
        assert_eq!(
            lat.exceptional_transform(&BTreeMap::from([("a".to_string(), 0)])),
            Err(Error::ZeroDegrees)
        );
        assert_eq!(lat.cone_membership(&d), ConeFlags { effective: true, anti_nef: true });
    }

    #[test]
    fn cone_flags_on_basis_and_zero() {
        let lat = build_lattice(&fixtures::sixtree()).unwrap();
        let zero = ExceptionalCycle::zero(lat.labels().to_vec());
        assert_eq!(lat.cone_membership(&zero), ConeFlags { effective: true, anti_nef: true });
        for u in 0..lat.len() {
            let flags = lat.cone_membership(&lat.unit_cycle(u));
            // E_u . E_v is the row of the intersection matrix.
            let row_nonpos = (0..lat.len()).all(|v| !lat.intersection().get(u, v).is_positive());
            assert!(flags.effective);
            assert_eq!(flags.anti_nef, row_nonpos);
        }
    }

    #[test]
    fn fundamental_cycles() {
        let a1 = build_lattice(&fixtures::a1()).unwrap();
        assert_eq!(ints(&a1.fundamental_cycle()), vec![1]);
        assert_eq!(a1.generic_hyperplane_vertex(), None);

        let star = parse_graph(
            "vertex c -3\nvertex x -2\nvertex y -2\nvertex z -2\nedge c x\nedge c y\nedge c z\n",
        )
        .unwrap();
        let lat = build_lattice(&star).unwrap();
        let zf = ints(&lat.fundamental_cycle());
        assert_eq!(zf, vec![1, 1, 1, 1]);
        assert_eq!(anti_nef_box_search(&lat, 3), vec![vec![1, 1, 1, 1]]);

        let lat = build_lattice(&fixtures::sixtree()).unwrap();
        assert_eq!(ints(&lat.fundamental_cycle()), vec![2, 2, 1, 1, 1, 1]);
        assert_eq!(anti_nef_box_search(&lat, 3), vec![vec![2, 2, 1, 1, 1, 1]]);

        let d4 = parse_graph(
            "vertex c -2\nvertex x -2\nvertex y -2\nvertex z -2\nedge c x\nedge c y\nedge c z\n",
        )
        .unwrap();
        let lat = build_lattice(&d4).unwrap();
        assert_eq!(ints(&lat.fundamental_cycle()), vec![2, 1, 1, 1]);
        assert_eq!(lat.generic_hyperplane_vertex().as_deref(), Some("c"));
    }

    #[test]
    fn generic_vertex_oracle_on_bundled_graphs() {
        for g in [fixtures::sixtree(), fixtures::cyclic(), fixtures::nonmetric()] {
            let lat = build_lattice(&g).unwrap();
            let zf = lat.fundamental_cycle();
            let direct: Vec<String> = (0..lat.len())
                .filter(|&u| {
                    let e = lat.dual_cycle(u);
                    e.coeffs().iter().zip(zf.coeffs()).all(|(x, z)| -x == *z)
                })
                .map(|u| lat.labels()[u].clone())
                .collect();
            assert_eq!(lat.generic_hyperplane_vertex(), direct.first().cloned());
        }
    }

    fn random_tree() -> impl Strategy<Value = WeightedDualGraph> {
        (1usize..8)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(any::<proptest::sample::Index>(), n),
                    proptest::collection::vec(0i64..3, n),
                )
            })
            .prop_map(|(parents, extra)| {
                let n = parents.len();
                let mut deg = vec![0i64; n];
                let mut edges = Vec::new();
                for i in 1..n {
                    let j = parents[i].index(i);
                    deg[i] += 1;
                    deg[j] += 1;
                    edges.push((format!("v{j}"), format!("v{i}"), 1));
                }
                let vertices = (0..n)
                    .map(|i| crate::dualgraph::Vertex {
                        name: format!("v{i}"),
                        weight: -(deg[i] + 1 + extra[i]),
                        genus: None,
                    })
                    .collect();
                WeightedDualGraph::new(vertices, edges, Vec::new()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn dual_matrix_is_inverse_and_negative(g in random_tree()) {
            let lat = build_lattice(&g).unwrap();
            let prod = lat.intersection().to_rational().mul(lat.dual()).unwrap();
            prop_assert!(prod.is_identity());
            for row in lat.dual().rows() {
                for x in row {
                    prop_assert!(x.is_negative());
                }
            }
            prop_assert!(lat.det_s().is_positive());
        }

        #[test]
        fn transform_degrees(g in random_tree(), seed in proptest::collection::vec(0u64..3, 8)) {
            let lat = build_lattice(&g).unwrap();
            let degrees: BTreeMap<String, u64> =
                lat.labels().iter().zip(&seed).map(|(l, &d)| (l.clone(), d)).collect();
            prop_assume!(degrees.values().any(|&d| d > 0));
            let d = lat.exceptional_transform(&degrees).unwrap();
            for (u, l) in lat.labels().iter().enumerate() {
                prop_assert_eq!(lat.dot_unit(&d, u), rat(-(degrees[l] as i64), 1));
                prop_assert!(d.coeffs()[u].is_positive());
            }
        }

        #[test]
        fn nef_cycles_have_negative_coefficients(
            g in random_tree(),
            lambda in proptest::collection::vec(0i64..4, 8),
        ) {
            let lat = build_lattice(&g).unwrap();
            let mut d = ExceptionalCycle::zero(lat.labels().to_vec());
            for (u, &l) in lambda.iter().take(lat.len()).enumerate() {
                d = d.add(&lat.dual_cycle(u).scale(&rat(l, 1)));
            }
            prop_assume!(!d.is_zero());
            for u in 0..lat.len() {
                prop_assert!(!lat.dot_unit(&d, u).is_negative());
                prop_assert!(d.coeffs()[u].is_negative());
            }
        }

        #[test]
        fn fundamental_cycle_is_minimal(g in random_tree()) {
            let lat = build_lattice(&g).unwrap();
            let zf = lat.fundamental_cycle();
            prop_assert!(zf.is_integral());
            let flags = lat.cone_membership(&zf);
            prop_assert!(flags.effective && flags.anti_nef && !zf.is_zero());
            if lat.len() <= 5 {
                let max = zf.coeffs().iter().map(|c| c.to_integer()).max().unwrap();
                let bound = u32::try_from(max).unwrap() + 1;
                let want: Vec<u32> = zf.coeffs().iter().map(|c| u32::try_from(c.to_integer()).unwrap()).collect();
                prop_assert_eq!(anti_nef_box_search(&lat, bound), vec![want]);
            }
        }
    }
}
