//! The branch function `U_L(A, B) = (L·A)(L·B)/(A·B)` and its multiplicity
//! analogue `U_O`, with exact (ultra)metric verification.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::detprod::DetProductTable;
use crate::error::{Error, Result};
use crate::exactalg::{rat_compact, rat_json};
use crate::lattice::IntersectionLattice;

/// A finite set with a symmetric, exact, positive distance vanishing exactly
/// on the diagonal. Neither the triangle nor the ultrametric inequality is
/// assumed; see [`verify_metric`] and [`verify_ultrametric`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltrametricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<BigRational>>,
}

impl UltrametricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDistance("matrix size does not match labels".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidDistance(format!("label `{l}` repeated")));
            }
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidDistance(format!("nonzero diagonal at `{}`", labels[i])));
            }
            for j in 0..i {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidDistance(format!("asymmetric at ({}, {})", labels[i], labels[j])));
                }
                if !dist[i][j].is_positive() {
                    return Err(Error::InvalidDistance(format!(
                        "nonpositive distance at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(UltrametricSpace { labels, dist })
    }

    pub fn from_i64(labels: &[&str], dist: &[Vec<i64>]) -> Result<Self> {
        Self::new(
            labels.iter().map(|s| s.to_string()).collect(),
            dist.iter().map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect()).collect(),
        )
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> &BigRational {
        &self.dist[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, a: &str, b: &str) -> Result<&BigRational> {
        let ia = self.index_of(a).ok_or_else(|| Error::UnknownBranch(a.to_string()))?;
        let ib = self.index_of(b).ok_or_else(|| Error::UnknownBranch(b.to_string()))?;
        Ok(&self.dist[ia][ib])
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.dist
    }

    /// The same space with every distance multiplied by `k > 0`.
    pub fn scaled(&self, k: &BigRational) -> UltrametricSpace {
        UltrametricSpace {
            labels: self.labels.clone(),
            dist: self.dist.iter().map(|r| r.iter().map(|x| x * k).collect()).collect(),
        }
    }

    /// Restriction to the listed labels, in the given order.
    pub fn restrict(&self, keep: &[String]) -> Result<UltrametricSpace> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|l| self.index_of(l).ok_or_else(|| Error::UnknownBranch(l.clone())))
            .collect::<Result<_>>()?;
        Ok(UltrametricSpace {
            labels: keep.to_vec(),
            dist: idx.iter().map(|&i| idx.iter().map(|&j| self.dist[i][j].clone()).collect()).collect(),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels,
            "dist": self.dist.iter().map(|r| r.iter().map(rat_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Aligned text matrix with compact rationals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.dist.iter().map(|r| r.iter().map(rat_compact).collect()).collect();
        let width = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain(self.labels.iter().map(String::len))
            .max()
            .unwrap_or(1);
        let mut out = format!("{:>width$}", "");
        for l in &self.labels {
            out.push_str(&format!(" {l:>width$}"));
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&cells) {
            out.push_str(&format!("{l:>width$}"));
            for c in row {
                out.push_str(&format!(" {c:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

fn validate_family(lat: &IntersectionLattice, base: &str, family: &[String]) -> Result<()> {
    lat.graph().branch(base)?;
    let mut seen = HashSet::new();
    for a in family {
        lat.graph().branch(a)?;
        if a == base {
            return Err(Error::BaseInFamily(a.clone()));
        }
        if !seen.insert(a) {
            return Err(Error::DuplicateBranch(a.clone()));
        }
    }
    Ok(())
}

/// `U_L` on `family` from Mumford numbers `A·B = -E_{u(A)}*·E_{u(B)}*`.
/// Works on any negative definite graph; on trees it agrees with the
/// determinant product formulas checked by [`formula_crosscheck`].
pub fn ultrametric_ul(lat: &IntersectionLattice, base: &str, family: &[String]) -> Result<UltrametricSpace> {
    validate_family(lat, base, family)?;
    let n = family.len();
    let with_base: Vec<BigRational> =
        family.iter().map(|a| lat.mumford_intersection(base, a)).collect::<Result<_>>()?;
    let mut dist = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let ab = lat.mumford_intersection(&family[i], &family[j])?;
            let u = &with_base[i] * &with_base[j] / ab;
            dist[i][j] = u.clone();
            dist[j][i] = u;
        }
    }
    UltrametricSpace::new(family.to_vec(), dist)
}

/// The three tree expressions for `U_L(A, B)`:
///
/// 1. `p(l,a) p(l,b) / (p(a,b) det)`
/// 2. `p(l,c)² / (p(c,c) det)` with `c = a ∧_l b`
/// 3. `p(l,l)/det · q(l,c)`
///
/// Returns them after checking they coincide.
pub fn formula_crosscheck(
    lat: &IntersectionLattice,
    table: &DetProductTable,
    base: &str,
    a: &str,
    b: &str,
) -> Result<[BigRational; 3]> {
    let g = lat.graph();
    if !g.is_arborescent() {
        return Err(Error::NotATree("tree formulas for U_L are".into()));
    }
    let (l, ia, ib) = (g.attachment(base)?, g.attachment(a)?, g.attachment(b)?);
    let c = g.infimum_index(l, ia, ib);
    let det = BigRational::from(table.det_s().clone());
    let r = |x: &BigInt| BigRational::from(x.clone());
    let f1 = r(&(table.at(l, ia) * table.at(l, ib))) / (r(table.at(ia, ib)) * &det);
    let f2 = r(&(table.at(l, c) * table.at(l, c))) / (r(table.at(c, c)) * &det);
    let f3 = r(table.at(l, l)) / &det * table.affinity_at(l, c).0;
    if f1 != f2 || f1 != f3 {
        return Err(Error::CrossCheck(format!(
            "U_L({a}, {b}) formulas disagree: {}, {}, {}",
            rat_compact(&f1),
            rat_compact(&f2),
            rat_compact(&f3)
        )));
    }
    Ok([f1, f2, f3])
}

/// Lexicographically first triple `(i < j < k)` in label order whose two
/// largest distances differ.
pub fn verify_ultrametric(u: &UltrametricSpace) -> Option<[String; 3]> {
    first_triple(u, |ab, ac, bc| {
        let mut v = [ab, ac, bc];
        v.sort();
        v[1] == v[2]
    })
}

/// Lexicographically first triple violating a triangle inequality.
pub fn verify_metric(u: &UltrametricSpace) -> Option<[String; 3]> {
    first_triple(u, |ab, ac, bc| ab <= &(ac + bc) && ac <= &(ab + bc) && bc <= &(ab + ac))
}

fn first_triple(
    u: &UltrametricSpace,
    ok: impl Fn(&BigRational, &BigRational, &BigRational) -> bool,
) -> Option<[String; 3]> {
    let n = u.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if !ok(u.at(i, j), u.at(i, k), u.at(j, k)) {
                    return Some([i, j, k].map(|x| u.labels[x].clone()));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Ultrametric,
    MetricOnly { witness: [String; 3] },
    NotMetric { witness: [String; 3] },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Ultrametric => "ultrametric",
            Classification::MetricOnly { .. } => "metric-only",
            Classification::NotMetric { .. } => "not-metric",
        }
    }

    pub fn witness(&self) -> Option<&[String; 3]> {
        match self {
            Classification::Ultrametric => None,
            Classification::MetricOnly { witness } | Classification::NotMetric { witness } => Some(witness),
        }
    }
}

pub fn classify(u: &UltrametricSpace) -> Classification {
    match (verify_metric(u), verify_ultrametric(u)) {
        (Some(witness), _) => Classification::NotMetric { witness },
        (None, Some(witness)) => Classification::MetricOnly { witness },
        (None, None) => Classification::Ultrametric,
    }
}

/// Human-readable explanation of a witness triple `(a, b, c)`.
pub fn describe_witness(u: &UltrametricSpace, c: &Classification) -> Option<String> {
    let w = c.witness()?;
    let d = |x: &str, y: &str| u.dist(x, y).expect("witness labels belong to the space").clone();
    let (ab, ac, bc) = (d(&w[0], &w[1]), d(&w[0], &w[2]), d(&w[1], &w[2]));
    let name = |x: &str, y: &str| format!("U({x},{y})");
    let pairs = [
        (name(&w[0], &w[1]), ab.clone(), name(&w[0], &w[2]), ac.clone(), name(&w[1], &w[2]), bc.clone()),
        (name(&w[0], &w[2]), ac.clone(), name(&w[0], &w[1]), ab.clone(), name(&w[1], &w[2]), bc.clone()),
        (name(&w[1], &w[2]), bc, name(&w[0], &w[1]), ab, name(&w[0], &w[2]), ac),
    ];
    match c {
        Classification::NotMetric { .. } => pairs.iter().find(|p| p.1 > &p.3 + &p.5).map(|p| {
            format!(
                "{} = {} > {} + {} = {}",
                p.0,
                rat_compact(&p.1),
                p.2,
                p.4,
                rat_compact(&(&p.3 + &p.5))
            )
        }),
        Classification::MetricOnly { .. } => Some(format!(
            "{} = {}, {} = {}, {} = {} (the two largest differ)",
            pairs[0].0,
            rat_compact(&pairs[0].1),
            pairs[1].0,
            rat_compact(&pairs[1].1),
            pairs[2].0,
            rat_compact(&pairs[2].1)
        )),
        Classification::Ultrametric => None,
    }
}

/// `-E_l*·E_l* = p(l,l)/det(S)`.
pub fn ul_upper_bound(lat: &IntersectionLattice, base: &str) -> Result<BigRational> {
    let l = lat.graph().attachment(base)?;
    Ok(-lat.dual_pairing_at(l, l))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub value: BigRational,
    pub bound: BigRational,
    /// `l` lies on the geodesic `[u(A) u(B)]`.
    pub tight: bool,
}

pub fn check_bound(lat: &IntersectionLattice, base: &str, a: &str, b: &str) -> Result<BoundCheck> {
    let g = lat.graph();
    if !g.is_arborescent() {
        return Err(Error::NotATree("the upper bound on U_L is".into()));
    }
    let u = ultrametric_ul(lat, base, &[a.to_string(), b.to_string()])?;
    let (l, ia, ib) = (g.attachment(base)?, g.attachment(a)?, g.attachment(b)?);
    let tight = g.geodesic_indices(ia, ib).contains(&l);
    Ok(BoundCheck { value: u.at(0, 1).clone(), bound: ul_upper_bound(lat, base)?, tight })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UoResult {
    pub space: UltrametricSpace,
    /// The vertex `u` with `Z_f = -E_u*`.
    pub vertex: String,
    /// `m_O(A)` for each member of the family.
    pub multiplicities: Vec<BigRational>,
}

/// `U_O(A, B) = m_O(A) m_O(B) / (A·B)` with `m_O(A) = -Z_f · D_A`.
///
/// Refuses graphs with no vertex `u` satisfying `Z_f = -E_u*`. The result
/// is compared against `U_L` for a virtual branch attached at `u`.
pub fn ultrametric_uo(lat: &IntersectionLattice, family: &[String]) -> Result<UoResult> {
    let vertex = lat.generic_hyperplane_vertex().ok_or(Error::ReducibleHyperplaneSection)?;
    let g = lat.graph();
    let mut seen = HashSet::new();
    for a in family {
        g.branch(a)?;
        if !seen.insert(a) {
            return Err(Error::DuplicateBranch(a.clone()));
        }
    }
    let zf = lat.fundamental_cycle();
    let multiplicities: Vec<BigRational> = family
        .iter()
        .map(|a| {
            let d_a = lat.dual_cycle(g.attachment(a)?).neg();
            Ok(-lat.dot(&zf, &d_a))
        })
        .collect::<Result<_>>()?;
    let n = family.len();
    let mut dist = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = &multiplicities[i] * &multiplicities[j] / lat.mumford_intersection(&family[i], &family[j])?;
            dist[i][j] = v.clone();
            dist[j][i] = v;
        }
    }
    let space = UltrametricSpace::new(family.to_vec(), dist)?;

    let virtual_name = g.fresh_name("L");
    let with_l = g.with_branch(&virtual_name, &vertex)?;
    let lat_l = crate::lattice::build_lattice(&with_l)?;
    let reference = ultrametric_ul(&lat_l, &virtual_name, family)?;
    if reference != space {
        return Err(Error::CrossCheck("U_O differs from U_L for the generic hyperplane branch".into()));
    }
    Ok(UoResult { space, vertex, multiplicities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detprod::build_table;
    use crate::dualgraph::parse_graph;
    use crate::fixtures;
    use crate::lattice::build_lattice;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn twoval_matrix() {
        let lat = build_lattice(&fixtures::twoval()).unwrap();
        let fam = names(&["A", "B", "C", "D", "E", "F"]);
        let u = ultrametric_ul(&lat, "L", &fam).unwrap();
        let six = ["B", "E", "F"];
        for (i, x) in fam.iter().enumerate() {
            for (j, y) in fam.iter().enumerate() {
                let want = if i == j {
                    0
                } else if six.contains(&x.as_str()) && six.contains(&y.as_str()) {
                    6
                } else {
                    7
                };
                assert_eq!(u.at(i, j), &rat(want, 1), "{x}{y}");
            }
        }
        assert_eq!(verify_ultrametric(&u), None);
        assert_eq!(classify(&u), Classification::Ultrametric);
    }

    #[test]
    fn family_errors() {
        let lat = build_lattice(&fixtures::twoval()).unwrap();
        assert_eq!(ultrametric_ul(&lat, "L", &names(&["A", "L"])), Err(Error::BaseInFamily("L".into())));
        assert_eq!(ultrametric_ul(&lat, "L", &names(&["A", "A"])), Err(Error::DuplicateBranch("A".into())));
        assert!(matches!(ultrametric_ul(&lat, "Q", &names(&["A"])), Err(Error::UnknownBranch(_))));
    }

    #[test]
    fn x1_values_and_verdicts() {
        let lat = build_lattice(&fixtures::cyclic()).unwrap();
        let u = ultrametric_ul(&lat, "L", &names(&["A", "B", "C"])).unwrap();
        let scaled = u.scaled(&rat(56, 1));
        assert_eq!(scaled.at(0, 1), &rat(114 * 70, 98));
        assert_eq!(scaled.at(0, 2), &rat(114 * 64, 92));
        assert_eq!(scaled.at(1, 2), &rat(70 * 64, 56));
        assert_eq!(verify_ultrametric(&u), Some(names(&["A", "B", "C"]).try_into().unwrap()));
        assert_eq!(verify_metric(&u), None);
        assert_eq!(classify(&u).name(), "metric-only");
    }

    #[test]
    fn x3_values_and_verdicts() {
        let lat = build_lattice(&fixtures::nonmetric()).unwrap();
        let u = ultrametric_ul(&lat, "L", &names(&["A", "B", "C"])).unwrap();
        let scaled = u.scaled(&rat(480, 1));
        assert_eq!(scaled.at(0, 1), &rat(75, 1));
        assert_eq!(scaled.at(0, 2), &rat(35, 1));
        assert_eq!(scaled.at(1, 2), &rat(35, 1));
        let c = classify(&u);
        assert_eq!(c.name(), "not-metric");
        let text = describe_witness(&scaled, &classify(&scaled)).unwrap();
        assert_eq!(text, "U(A,B) = 75 > U(A,C) + U(B,C) = 70");
    }

    #[test]
    fn small_spaces() {
        let two = UltrametricSpace::from_i64(&["x", "y"], &[vec![0, 3], vec![3, 0]]).unwrap();
        assert_eq!(verify_ultrametric(&two), None);
        assert_eq!(verify_metric(&two), None);
        assert!(UltrametricSpace::from_i64(&["x", "y"], &[vec![0, 3], vec![2, 0]]).is_err());
        assert!(UltrametricSpace::from_i64(&["x", "y"], &[vec![0, 0], vec![0, 0]]).is_err());
        assert!(UltrametricSpace::from_i64(&["x"], &[vec![1]]).is_err());
    }

    #[test]
    fn crosscheck_formulas_on_twoval() {
        let g = fixtures::twoval();
        let lat = build_lattice(&g).unwrap();
        let t = build_table(&g, true).unwrap();
        assert_eq!(formula_crosscheck(&lat, &t, "A", "B", "E").unwrap(), [rat(6, 1), rat(6, 1), rat(6, 1)]);
        // Branches sharing an attachment v: the infimum is v itself.
        let g2 = g.with_branch("B2", "b").unwrap();
        let lat2 = build_lattice(&g2).unwrap();
        let want = rat(24 * 24, 24 * 4);
        assert_eq!(formula_crosscheck(&lat2, &t, "L", "B", "B2").unwrap()[0], want);
    }

    #[test]
    fn bounds_on_twoval() {
        let lat = build_lattice(&fixtures::twoval()).unwrap();
        assert_eq!(ul_upper_bound(&lat, "L").unwrap(), rat(7, 1));
        let cd = check_bound(&lat, "L", "C", "D").unwrap();
        assert_eq!(cd, BoundCheck { value: rat(7, 1), bound: rat(7, 1), tight: true });
        let be = check_bound(&lat, "L", "B", "E").unwrap();
        assert_eq!(be, BoundCheck { value: rat(6, 1), bound: rat(7, 1), tight: false });
        let ab = check_bound(&lat, "L", "A", "B").unwrap();
        assert!(ab.tight && ab.value == ab.bound);
    }

    #[test]
    fn uo_gate() {
        let a1 = parse_graph("vertex a -2\nbranch A at a\nbranch B at a\n").unwrap();
        let lat = build_lattice(&a1).unwrap();
        assert_eq!(ultrametric_uo(&lat, &names(&["A", "B"])), Err(Error::ReducibleHyperplaneSection));

        let d4 = parse_graph(
            "vertex c -2\nvertex x -2\nvertex y -2\nvertex z -2\nedge c x\nedge c y\nedge c z\n\
             branch A at x\nbranch B at y\nbranch C at z\nbranch D at c\n",
        )
        .unwrap();
        let lat = build_lattice(&d4).unwrap();
        let r = ultrametric_uo(&lat, &names(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(r.vertex, "c");
        assert_eq!(verify_ultrametric(&r.space), None);
        // m_O(A) = -Z_f·D_A equals the Mumford number with the hyperplane branch.
        let virt = build_lattice(&d4.with_branch("H", "c").unwrap()).unwrap();
        for (a, m) in ["A", "B", "C", "D"].iter().zip(&r.multiplicities) {
            assert_eq!(&virt.mumford_intersection("H", a).unwrap(), m);
        }
    }

    #[test]
    fn text_rendering() {
        let u = UltrametricSpace::from_i64(&["A", "B"], &[vec![0, 12], vec![12, 0]]).unwrap();
        assert_eq!(u.to_text(), "    A  B\n A  0 12\n B 12  0\n");
        assert_eq!(u.to_json()["dist"][0][1], "12/1");
    }
}
