//! Valuations normalized by a base branch `L`: the divisorial orders
//! `ord_v^L` and the intersection semivaluations `int_A^L`, their partial
//! order decided by determinant products, and the tree it forms.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::detprod::{build_table, DetProductTable};
use crate::dualgraph::WeightedDualGraph;
use crate::error::{Error, Result};
use crate::exactalg::rat_compact;
use crate::lattice::{ExceptionalCycle, IntersectionLattice};
use crate::treekit::{self, CanonOptions, RootedTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemivalValue {
    Finite(BigRational),
    Infinite,
}

impl fmt::Display for SemivalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemivalValue::Finite(r) => f.write_str(&rat_compact(r)),
            SemivalValue::Infinite => f.write_str("+inf"),
        }
    }
}

fn require_transform(lat: &IntersectionLattice, d: &ExceptionalCycle) -> Result<()> {
    let flags = lat.cone_membership(d);
    if d.labels() != lat.labels() || d.is_zero() || !flags.effective || !flags.anti_nef {
        return Err(Error::NotExceptionalTransform);
    }
    Ok(())
}

/// `ord_v^L` on a function whose exceptional transform is `d`:
/// `(E_v*·D) / (-E_v*·E_l*)`.
pub fn eval_ord(lat: &IntersectionLattice, base: &str, v: &str, d: &ExceptionalCycle) -> Result<BigRational> {
    require_transform(lat, d)?;
    let l = lat.graph().attachment(base)?;
    let iv = lat.graph().index_of(v)?;
    let pairing = lat.dot(&lat.dual_cycle(iv), d);
    Ok(pairing / -lat.dual_pairing_at(iv, l))
}

/// `int_A^L`: `(E_a*·D) / (-E_a*·E_l*)` with `a = u(A)`, or `+inf` when `A`
/// is a component of the function's zero locus.
pub fn eval_int(
    lat: &IntersectionLattice,
    base: &str,
    branch: &str,
    d: &ExceptionalCycle,
    a_not_component: bool,
) -> Result<SemivalValue> {
    require_transform(lat, d)?;
    let l = lat.graph().attachment(base)?;
    let a = lat.graph().attachment(branch)?;
    if !a_not_component {
        return Ok(SemivalValue::Infinite);
    }
    let pairing = lat.dot(&lat.dual_cycle(a), d);
    Ok(SemivalValue::Finite(pairing / -lat.dual_pairing_at(a, l)))
}

/// A point of the valuation poset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValKey {
    /// `ord_v^L` for a vertex.
    Ord(String),
    /// `int_A^L` for a branch.
    Int(String),
}

impl ValKey {
    pub fn name(&self) -> &str {
        match self {
            ValKey::Ord(s) | ValKey::Int(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeOrder {
    /// `x ⪯_L y`, `x ≠ y`.
    Below,
    /// `y ⪯_L x`, `x ≠ y`.
    Above,
    Incomparable,
    Equal,
}

impl TreeOrder {
    pub fn symbol(self) -> &'static str {
        match self {
            TreeOrder::Below => "<",
            TreeOrder::Above => ">",
            TreeOrder::Incomparable => "|",
            TreeOrder::Equal => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValCompare {
    Order(TreeOrder),
    /// Two intersection semivaluations of distinct branches.
    Unsupported,
}

impl ValCompare {
    pub fn symbol(self) -> &'static str {
        match self {
            ValCompare::Order(o) => o.symbol(),
            ValCompare::Unsupported => "?",
        }
    }
}

/// The order of two vertices or branches in `Γ̂` rooted at the leaf of `L`.
pub fn tree_order(g: &WeightedDualGraph, base: &str, x: &str, y: &str) -> Result<TreeOrder> {
    let family: Vec<String> = g.branch_names().into_iter().filter(|b| b != base).collect();
    let t = if family.is_empty() {
        treekit::full_dual_tree(&g.with_branch(&g.fresh_name("X"), &g.branch(base)?.at)?, base, &[g.fresh_name("X")])?
    } else {
        treekit::full_dual_tree(g, base, &family)?
    };
    let find = |s: &str| {
        t.find_label(s).ok_or_else(|| {
            if g.has_vertex(s) {
                Error::UnknownVertex(s.to_string())
            } else {
                Error::UnknownBranch(s.to_string())
            }
        })
    };
    let (ix, iy) = (find(x)?, find(y)?);
    Ok(if ix == iy {
        TreeOrder::Equal
    } else if t.precedes(ix, iy) {
        TreeOrder::Below
    } else if t.precedes(iy, ix) {
        TreeOrder::Above
    } else {
        TreeOrder::Incomparable
    })
}

/// Determinant products of a tree together with a base branch, for
/// deciding the valuative order.
#[derive(Debug, Clone)]
pub struct ValuationContext {
    graph: WeightedDualGraph,
    table: DetProductTable,
    l: usize,
}

impl ValuationContext {
    pub fn new(g: &WeightedDualGraph, base: &str) -> Result<Self> {
        let table = build_table(g, false)?;
        Self::with_table(g, table, base)
    }

    pub fn with_table(g: &WeightedDualGraph, table: DetProductTable, base: &str) -> Result<Self> {
        let l = g.attachment(base)?;
        Ok(ValuationContext { graph: g.clone(), table, l })
    }

    fn p(&self, a: usize, b: usize) -> &BigInt {
        self.table.at(a, b)
    }

    /// `∀w: p(l,v) p(u,w) <= p(l,u) p(v,w)`.
    fn criterion(&self, u: usize, v: usize) -> bool {
        let l = self.l;
        (0..self.graph.len()).all(|w| self.p(l, v) * self.p(u, w) <= self.p(l, u) * self.p(v, w))
    }

    /// `ord_u^L <= ord_v^L`.
    pub fn ord_le(&self, u: &str, v: &str) -> Result<bool> {
        Ok(self.criterion(self.graph.index_of(u)?, self.graph.index_of(v)?))
    }

    /// `ord_u^L <= int_A^L`.
    pub fn ord_le_int(&self, u: &str, branch: &str) -> Result<bool> {
        Ok(self.criterion(self.graph.index_of(u)?, self.graph.attachment(branch)?))
    }

    pub fn compare(&self, x: &ValKey, y: &ValKey) -> Result<ValCompare> {
        use TreeOrder::*;
        let order = |le: bool, ge: bool| {
            ValCompare::Order(match (le, ge) {
                (true, true) => Equal,
                (true, false) => Below,
                (false, true) => Above,
                (false, false) => Incomparable,
            })
        };
        Ok(match (x, y) {
            (ValKey::Ord(u), ValKey::Ord(v)) => order(self.ord_le(u, v)?, self.ord_le(v, u)?),
            // int_A takes the value +inf on functions vanishing on A, so it
            // is never below a divisorial valuation.
            (ValKey::Ord(u), ValKey::Int(a)) => order(self.ord_le_int(u, a)?, false),
            (ValKey::Int(a), ValKey::Ord(u)) => order(false, self.ord_le_int(u, a)?),
            (ValKey::Int(a), ValKey::Int(b)) => {
                self.graph.branch(a)?;
                self.graph.branch(b)?;
                if a == b {
                    ValCompare::Order(Equal)
                } else {
                    ValCompare::Unsupported
                }
            }
        })
    }

    /// The Hasse diagram of `{ord_u} ∪ {int_A : A ∈ family}` with a new root
    /// labelled by the base branch. Distinct intersection semivaluations
    /// count as incomparable.
    pub fn valuation_tree(&self, base: &str, family: &[String]) -> Result<RootedTree> {
        let mut keys: Vec<ValKey> = self.graph.vertex_names().into_iter().map(ValKey::Ord).collect();
        keys.extend(family.iter().map(|a| ValKey::Int(a.clone())));
        let n = keys.len();
        let mut below = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    below[i][j] = matches!(self.compare(&keys[i], &keys[j])?, ValCompare::Order(TreeOrder::Below));
                }
            }
        }
        let mut parent = vec![None; n];
        let mut minimal = Vec::new();
        for j in 0..n {
            let preds: Vec<usize> = (0..n).filter(|&i| below[i][j]).collect();
            for &a in &preds {
                for &b in &preds {
                    if a != b && !below[a][b] && !below[b][a] {
                        return Err(Error::CrossCheck(format!(
                            "valuations below {} are not totally ordered",
                            keys[j].name()
                        )));
                    }
                }
            }
            match preds.iter().copied().find(|&a| preds.iter().all(|&b| b == a || below[b][a])) {
                Some(p) => parent[j] = Some(p),
                None => minimal.push(j),
            }
        }
        if minimal.len() != 1 {
            return Err(Error::CrossCheck(format!("valuation poset has {} minimal elements", minimal.len())));
        }
        let mut t = RootedTree::new(Some(base.to_string()));
        let mut id = vec![usize::MAX; n];
        id[minimal[0]] = t.add_child(0, Some(keys[minimal[0]].name().to_string()));
        let mut stack = vec![minimal[0]];
        while let Some(x) = stack.pop() {
            for j in 0..n {
                if parent[j] == Some(x) {
                    id[j] = t.add_child(id[x], Some(keys[j].name().to_string()));
                    stack.push(j);
                }
            }
        }
        Ok(t)
    }
}

/// Free-function form of [`ValuationContext::ord_le`].
pub fn val_order_divisorial(g: &WeightedDualGraph, base: &str, u: &str, v: &str) -> Result<bool> {
    ValuationContext::new(g, base)?.ord_le(u, v)
}

/// Free-function form of [`ValuationContext::ord_le_int`].
pub fn val_order_intersection(g: &WeightedDualGraph, base: &str, u: &str, branch: &str) -> Result<bool> {
    if branch == base {
        return Err(Error::BaseInFamily(branch.to_string()));
    }
    ValuationContext::new(g, base)?.ord_le_int(u, branch)
}

pub fn valuation_tree(g: &WeightedDualGraph, base: &str, family: &[String]) -> Result<RootedTree> {
    ValuationContext::new(g, base)?.valuation_tree(base, family)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValTreeReport {
    /// Labelled equality with all of `Γ̂` rooted at `L`.
    pub full: bool,
    /// Equality with the geodesic union after pruning to the family.
    pub pruned: bool,
    pub mismatches: Vec<String>,
}

impl ValTreeReport {
    pub fn is_ok(&self) -> bool {
        self.full && self.pruned
    }
}

/// Compares the valuation tree with the dual trees of the graph.
pub fn compare_valuation_tree(
    ctx: &ValuationContext,
    base: &str,
    family: &[String],
) -> Result<ValTreeReport> {
    let vt = ctx.valuation_tree(base, family)?;
    let full = treekit::full_dual_tree(&ctx.graph, base, family)?;
    let mut mismatches = Vec::new();
    let a = treekit::canonical_form(&vt, CanonOptions::LABELLED);
    let b = treekit::canonical_form(&full, CanonOptions::LABELLED);
    let full_ok = a == b;
    if !full_ok {
        mismatches.push(format!("full: {a} vs {b}"));
    }
    let keep: BTreeSet<String> = family.iter().cloned().collect();
    let a = treekit::canonical_form(&vt.restrict_to_leaves(&keep), CanonOptions::TOPOLOGY);
    let b = treekit::canonical_form(&treekit::embedded_dual_tree(&ctx.graph, base, family)?, CanonOptions::TOPOLOGY);
    let pruned_ok = a == b;
    if !pruned_ok {
        mismatches.push(format!("pruned: {a} vs {b}"));
    }
    Ok(ValTreeReport { full: full_ok, pruned: pruned_ok, mismatches })
}

/// Pairwise comparisons over all vertices followed by `family`.
pub fn order_matrix(ctx: &ValuationContext, family: &[String]) -> Result<(Vec<ValKey>, Vec<Vec<ValCompare>>)> {
    let mut keys: Vec<ValKey> = ctx.graph.vertex_names().into_iter().map(ValKey::Ord).collect();
    keys.extend(family.iter().map(|a| ValKey::Int(a.clone())));
    let rows = keys
        .iter()
        .map(|x| keys.iter().map(|y| ctx.compare(x, y)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((keys, rows))
}
