//! Determinant products on trees.
//!
//! For an edge `e` at `u`, the edge determinant is `det(-I)` of the subtree
//! hanging off `u` through `e`. The determinant product `p(v, w)` multiplies,
//! over every vertex `x` of the geodesic `[vw]`, the edge determinants at `x`
//! in the directions leaving the geodesic. On a tree it equals the adjugate
//! entry `adj(-I)(v, w)`, which serves as the cross-check.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dualgraph::WeightedDualGraph;
use crate::error::{Error, Result};
use crate::exactalg::{self, IntMatrix};

fn require_tree(g: &WeightedDualGraph) -> Result<()> {
    if g.is_arborescent() {
        Ok(())
    } else {
        Err(Error::NotATree("determinant products".into()))
    }
}

/// `det_{u,e}` for the edge `e = {u, toward}`.
pub fn edge_determinant(g: &WeightedDualGraph, u: &str, toward: &str) -> Result<BigInt> {
    require_tree(g)?;
    let sub = g.subtree_in_direction(u, toward)?;
    Ok(exactalg::determinant(&sub.intersection_matrix().negated()))
}

/// Edge determinants for every directed edge `(u, toward)`, by index.
fn all_edge_determinants(g: &WeightedDualGraph) -> HashMap<(usize, usize), BigInt> {
    let mut out = HashMap::new();
    for u in 0..g.len() {
        for &t in g.neighbors_at(u) {
            let sub = g.induced(&g.direction_indices(u, t));
            out.insert((u, t), exactalg::determinant(&sub.intersection_matrix().negated()));
        }
    }
    out
}

fn product_along(g: &WeightedDualGraph, dets: &HashMap<(usize, usize), BigInt>, v: usize, w: usize) -> BigInt {
    let path = g.geodesic_indices(v, w);
    let mut p = BigInt::one();
    for (k, &x) in path.iter().enumerate() {
        let prev = k.checked_sub(1).map(|k| path[k]);
        let next = path.get(k + 1).copied();
        for &y in g.neighbors_at(x) {
            if Some(y) != prev && Some(y) != next {
                p *= &dets[&(x, y)];
            }
        }
    }
    p
}

/// `p(v, w)` from edge determinants. An empty product counts as 1.
pub fn determinant_product(g: &WeightedDualGraph, v: &str, w: &str) -> Result<BigInt> {
    require_tree(g)?;
    let (iv, iw) = (g.index_of(v)?, g.index_of(w)?);
    let dets = all_edge_determinants(g);
    Ok(product_along(g, &dets, iv, iw))
}

/// Continued fraction and determinant of the tree rooted at `root`, by the
/// recursion `cf(u) = -w(u) - Σ 1/cf(child)`,
/// `det(u) = cf(u) · Π det(child)`.
pub fn duchon_det(g: &WeightedDualGraph, root: &str) -> Result<(BigRational, BigInt)> {
    require_tree(g)?;
    let r = g.index_of(root)?;
    let parent = g.parents_from(r);
    // BFS order from the root; reversed it is a valid post-order.
    let mut order = vec![r];
    let mut k = 0;
    while k < order.len() {
        let u = order[k];
        order.extend(g.neighbors_at(u).iter().copied().filter(|&w| parent[w] == Some(u)));
        k += 1;
    }
    let n = g.len();
    let mut cf: Vec<Option<BigRational>> = vec![None; n];
    let mut det: Vec<BigInt> = vec![BigInt::zero(); n];
    for &u in order.iter().rev() {
        let mut c = BigRational::from(BigInt::from(-g.weight_at(u)));
        let mut d = BigInt::one();
        for &w in g.neighbors_at(u) {
            if parent[w] == Some(u) {
                let child = cf[w].as_ref().expect("children precede parents");
                c -= child.recip();
                d *= &det[w];
            }
        }
        if !c.is_positive() {
            return Err(Error::NonPositiveContinuedFraction(g.name(u).to_string()));
        }
        let total = &c * BigRational::from(d);
        debug_assert!(total.is_integer());
        det[u] = total.to_integer();
        cf[u] = Some(c);
    }
    Ok((cf[r].take().expect("root visited"), det[r].clone()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetProductTable {
    labels: Vec<String>,
    p: Vec<Vec<BigInt>>,
    det_s: BigInt,
}

/// Computes every `p(v, w)` from edge determinants. With `crosscheck`, the
/// result is compared entrywise with `adj(-I)` before returning.
pub fn build_table(g: &WeightedDualGraph, crosscheck: bool) -> Result<DetProductTable> {
    require_tree(g)?;
    let minus_i = g.intersection_matrix().negated();
    if let Some((order, minor)) = exactalg::first_nonpositive_leading_minor(&minus_i) {
        return Err(Error::NotNegativeDefinite { order, minor: minor.to_string() });
    }
    let n = g.len();
    let dets = all_edge_determinants(g);
    let mut p = vec![vec![BigInt::zero(); n]; n];
    for v in 0..n {
        for w in v..n {
            let x = product_along(g, &dets, v, w);
            p[w][v] = x.clone();
            p[v][w] = x;
        }
    }
    let table = DetProductTable { labels: g.vertex_names(), p, det_s: exactalg::determinant(&minus_i) };
    if crosscheck {
        table.crosscheck_adjugate(&exactalg::adjugate(&minus_i))?;
    }
    Ok(table)
}

impl DetProductTable {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn det_s(&self) -> &BigInt {
        &self.det_s
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.p[i][j]
    }

    pub fn p(&self, u: &str, v: &str) -> Result<&BigInt> {
        let idx = |x: &str| {
            self.labels.iter().position(|l| l == x).ok_or_else(|| Error::UnknownVertex(x.to_string()))
        };
        Ok(&self.p[idx(u)?][idx(v)?])
    }

    /// Overwrites one entry symmetrically. Exists so that test harnesses can
    /// corrupt a table and watch the checks fail.
    #[doc(hidden)]
    pub fn corrupt(&mut self, i: usize, j: usize, value: BigInt) {
        self.p[i][j] = value.clone();
        self.p[j][i] = value;
    }

    /// Entrywise comparison with `adj(-I)`.
    pub fn crosscheck_adjugate(&self, adj: &IntMatrix) -> Result<()> {
        for i in 0..self.len() {
            for j in 0..self.len() {
                if &self.p[i][j] != adj.get(i, j) {
                    return Err(Error::CrossCheck(format!(
                        "p({}, {}) = {} but adj(-I) has {}",
                        self.labels[i],
                        self.labels[j],
                        self.p[i][j],
                        adj.get(i, j)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn affinity_at(&self, i: usize, j: usize) -> Affinity {
        let num = &self.p[i][j] * &self.p[i][j];
        let den = &self.p[i][i] * &self.p[j][j];
        Affinity(BigRational::new(num, den))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels,
            "detS": self.det_s.to_string(),
            "p": self.p.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// `q(u, v) = p(u, v)² / (p(u, u) p(v, v))`, an exact stand-in for the
/// determinant distance `d = -½ log q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Affinity(pub BigRational);

impl Affinity {
    pub fn value(&self) -> &BigRational {
        &self.0
    }

    /// Floating-point distance, for display only.
    pub fn distance_f64(&self) -> f64 {
        let q = self.0.numer().to_f64().unwrap_or(f64::NAN) / self.0.denom().to_f64().unwrap_or(f64::NAN);
        -0.5 * q.ln()
    }
}

pub fn affinity(t: &DetProductTable, u: &str, v: &str) -> Result<Affinity> {
    let idx = |x: &str| t.labels.iter().position(|l| l == x).ok_or_else(|| Error::UnknownVertex(x.to_string()));
    Ok(t.affinity_at(idx(u)?, idx(v)?))
}

/// Vertex sets of all geodesics of a tree, as bitsets.
pub(crate) struct Geodesics {
    words: usize,
    masks: Vec<Vec<Vec<u64>>>,
}

impl Geodesics {
    pub(crate) fn new(g: &WeightedDualGraph) -> Self {
        let n = g.len();
        let words = n.div_ceil(64);
        let mut masks = vec![vec![vec![0u64; words]; n]; n];
        for u in 0..n {
            let parent = g.parents_from(u);
            for v in 0..n {
                let mut cur = Some(v);
                while let Some(x) = cur {
                    masks[u][v][x / 64] |= 1 << (x % 64);
                    cur = parent[x];
                }
            }
        }
        Geodesics { words, masks }
    }

    pub(crate) fn contains(&self, u: usize, v: usize, x: usize) -> bool {
        self.masks[u][v][x / 64] & (1 << (x % 64)) != 0
    }

    pub(crate) fn meet(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        let (ma, mb) = (&self.masks[a.0][a.1], &self.masks[b.0][b.1]);
        (0..self.words).any(|k| ma[k] & mb[k] != 0)
    }
}

/// First triple `(u, v, w)` with `v ∈ [uw]` and
/// `p(u,v) p(v,w) != p(v,v) p(u,w)`.
pub fn en_identity_witness(g: &WeightedDualGraph, t: &DetProductTable) -> Option<(String, String, String)> {
    let geo = Geodesics::new(g);
    let n = g.len();
    for u in 0..n {
        for w in 0..n {
            for v in 0..n {
                if geo.contains(u, w, v) && t.at(u, v) * t.at(v, w) != t.at(v, v) * t.at(u, w) {
                    return Some((t.labels[u].clone(), t.labels[v].clone(), t.labels[w].clone()));
                }
            }
        }
    }
    None
}

/// First pair `u != v` with `p(u,u) p(v,v) <= p(u,v)²`.
pub fn cauchy_schwarz_witness(t: &DetProductTable) -> Option<(String, String)> {
    let n = t.len();
    (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .find(|&(u, v)| u != v && t.at(u, u) * t.at(v, v) <= t.at(u, v) * t.at(u, v))
        .map(|(u, v)| (t.labels[u].clone(), t.labels[v].clone()))
}

/// First quadruple `(l, u, v, w)` violating
/// `p(l,v)p(u,w) <= p(l,u)p(v,w) ⇔ [lv] ∩ [uw] ≠ ∅`, with equality exactly
/// when also `[lu] ∩ [vw] ≠ ∅`.
pub fn refine_law_witness(g: &WeightedDualGraph, t: &DetProductTable) -> Option<[String; 4]> {
    let geo = Geodesics::new(g);
    let n = g.len();
    for l in 0..n {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let lhs = t.at(l, v) * t.at(u, w);
                    let rhs = t.at(l, u) * t.at(v, w);
                    let meets = geo.meet((l, v), (u, w));
                    let ok = if meets {
                        lhs <= rhs && ((lhs == rhs) == geo.meet((l, u), (v, w)))
                    } else {
                        lhs > rhs
                    };
                    if !ok {
                        return Some([l, u, v, w].map(|i| t.labels[i].clone()));
                    }
                }
            }
        }
    }
    None
}

/// First quadruple violating
/// `p(l,u) p(v,w) >= min(p(l,v) p(u,w), p(l,w) p(u,v))`.
pub fn multiplicative_four_point_witness(t: &DetProductTable) -> Option<[String; 4]> {
    let n = t.len();
    for l in 0..n {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let lhs = t.at(l, u) * t.at(v, w);
                    let a = t.at(l, v) * t.at(u, w);
                    let b = t.at(l, w) * t.at(u, v);
                    if lhs < a.min(b) {
                        return Some([l, u, v, w].map(|i| t.labels[i].clone()));
                    }
                }
            }
        }
    }
    None
}
