//! Rooted trees, hierarchies and the passage between finite ultrametrics and
//! depth-decorated trees. Also builds the dual trees of a resolution seen
//! from a base branch and compares them with the trees of `U_L`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::detprod::DetProductTable;
use crate::dualgraph::WeightedDualGraph;
use crate::error::{Error, Result};
use crate::exactalg::{rat_compact, rat_json};
use crate::lattice::IntersectionLattice;
use crate::ultra::{self, UltrametricSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Leaves carry the label of the point they represent. Interior nodes
    /// may carry a name as well (a vertex name for dual trees).
    pub label: Option<String>,
    pub decoration: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    nodes: Vec<TreeNode>,
}

impl Default for RootedTree {
    fn default() -> Self {
        Self::new(None)
    }
}

impl RootedTree {
    /// A tree with a single node, the root, which has id 0.
    pub fn new(root_label: Option<String>) -> Self {
        RootedTree { nodes: vec![TreeNode { parent: None, children: Vec::new(), label: root_label, decoration: None }] }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Result<&TreeNode> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn add_child(&mut self, parent: usize, label: Option<String>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { parent: Some(parent), children: Vec::new(), label, decoration: None });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn set_decoration(&mut self, id: usize, value: Option<BigRational>) {
        self.nodes[id].decoration = value;
    }

    /// A node without children; the root counts only in a one-node tree.
    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty() && (id != self.root() || self.nodes.len() == 1)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.label.as_deref() == Some(label))
    }

    /// Nodes from `id` up to the root, inclusive.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// The infimum of two nodes for the root order.
    pub fn meet(&self, a: usize, b: usize) -> usize {
        let up: BTreeSet<usize> = self.ancestors(a).into_iter().collect();
        self.ancestors(b).into_iter().find(|x| up.contains(x)).expect("shared root")
    }

    /// `x ⪯ y`: `x` lies on the path from the root to `y`.
    pub fn precedes(&self, x: usize, y: usize) -> bool {
        self.ancestors(y).contains(&x)
    }

    /// Preorder listing of the subtree at `id`.
    fn subtree(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend(self.nodes[x].children.iter().rev());
        }
        out
    }

    /// The cluster of `id`: labels of the leaves weakly above it.
    pub fn cluster(&self, id: usize) -> Result<BTreeSet<String>> {
        self.node(id)?;
        Ok(self
            .subtree(id)
            .into_iter()
            .filter(|&x| self.is_leaf(x))
            .filter_map(|x| self.nodes[x].label.clone())
            .collect())
    }

    /// Adds a new root above the current one. Ids shift by one.
    pub fn extended(&self, root_label: Option<String>) -> RootedTree {
        let mut nodes = vec![TreeNode { parent: None, children: vec![1], label: root_label, decoration: None }];
        nodes.extend(self.nodes.iter().map(|n| TreeNode {
            parent: Some(n.parent.map_or(0, |p| p + 1)),
            children: n.children.iter().map(|c| c + 1).collect(),
            label: n.label.clone(),
            decoration: n.decoration.clone(),
        }));
        RootedTree { nodes }
    }

    /// Keeps the root and every node whose subtree contains a leaf labelled
    /// in `keep`.
    pub fn restrict_to_leaves(&self, keep: &BTreeSet<String>) -> RootedTree {
        let n = self.len();
        let mut alive = vec![false; n];
        for x in self.leaves() {
            if self.nodes[x].label.as_ref().is_some_and(|l| keep.contains(l)) {
                for a in self.ancestors(x) {
                    alive[a] = true;
                }
            }
        }
        alive[self.root()] = true;
        let mut out = RootedTree::new(self.nodes[0].label.clone());
        out.nodes[0].decoration = self.nodes[0].decoration.clone();
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((old, new)) = stack.pop() {
            for &c in &self.nodes[old].children {
                if alive[c] {
                    let id = out.add_child(new, self.nodes[c].label.clone());
                    out.nodes[id].decoration = self.nodes[c].decoration.clone();
                    stack.push((c, id));
                }
            }
        }
        out
    }

    /// Graphviz rendering: boxed leaves, interior nodes showing their
    /// decoration (or name, when undecorated).
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let text = match (&n.decoration, &n.label) {
                (Some(d), _) if !self.is_leaf(i) => rat_compact(d),
                (_, Some(l)) => l.clone(),
                _ => String::new(),
            };
            let shape = if self.is_leaf(i) { "box" } else { "ellipse" };
            writeln!(out, "  n{i} [shape={shape}, label=\"{}\"];", text.replace('"', "\\\"")).unwrap();
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for c in &n.children {
                writeln!(out, "  n{i} -> n{c};").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let mut obj = serde_json::Map::new();
                obj.insert("id".into(), i.into());
                obj.insert("parent".into(), n.parent.map_or(serde_json::Value::Null, Into::into));
                if let Some(l) = &n.label {
                    obj.insert("label".into(), l.clone().into());
                }
                if let Some(d) = &n.decoration {
                    obj.insert("decoration".into(), rat_json(d).into());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "nodes": nodes })
    }
}

/// A laminar family of nonempty subsets of `X` containing `X` and all
/// singletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    labels: Vec<String>,
    clusters: Vec<BTreeSet<String>>,
}

impl Hierarchy {
    pub fn new(labels: Vec<String>, clusters: Vec<BTreeSet<String>>) -> Result<Self> {
        let all: BTreeSet<String> = labels.iter().cloned().collect();
        if all.is_empty() || all.len() != labels.len() {
            return Err(Error::InvalidHierarchy("labels must be nonempty and distinct".into()));
        }
        let mut set: BTreeSet<BTreeSet<String>> = BTreeSet::new();
        for c in clusters {
            if c.is_empty() {
                return Err(Error::InvalidHierarchy("empty cluster".into()));
            }
            if !c.is_subset(&all) {
                return Err(Error::InvalidHierarchy(format!("cluster {c:?} has unknown labels")));
            }
            set.insert(c);
        }
        if !set.contains(&all) {
            return Err(Error::InvalidHierarchy("the full set is missing".into()));
        }
        for l in &labels {
            if !set.contains(&BTreeSet::from([l.clone()])) {
                return Err(Error::InvalidHierarchy(format!("singleton {{{l}}} is missing")));
            }
        }
        for a in &set {
            for b in &set {
                if !(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a)) {
                    return Err(Error::InvalidHierarchy(format!("{a:?} and {b:?} overlap")));
                }
            }
        }
        let mut clusters: Vec<BTreeSet<String>> = set.into_iter().collect();
        clusters.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(Hierarchy { labels, clusters })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Clusters ordered by size, then lexicographically.
    pub fn clusters(&self) -> &[BTreeSet<String>] {
        &self.clusters
    }

    /// Clusters with at least two elements.
    pub fn nontrivial(&self) -> impl Iterator<Item = &BTreeSet<String>> {
        self.clusters.iter().filter(|c| c.len() > 1)
    }
}

pub type Diameters = BTreeMap<BTreeSet<String>, BigRational>;

/// The closed balls of an ultrametric, with their diameters.
pub fn closed_balls(u: &UltrametricSpace) -> Result<(Hierarchy, Diameters)> {
    if let Some(w) = ultra::verify_ultrametric(u) {
        return Err(Error::NotUltrametric(format!("triple ({}, {}, {})", w[0], w[1], w[2])));
    }
    let n = u.len();
    let labels = u.labels();
    let mut diam = Diameters::new();
    for a in 0..n {
        for r in 0..n {
            let radius = u.at(a, r);
            let members: Vec<usize> = (0..n).filter(|&b| u.at(a, b) <= radius).collect();
            let d = members
                .iter()
                .flat_map(|&x| members.iter().map(move |&y| (x, y)))
                .map(|(x, y)| u.at(x, y).clone())
                .max()
                .unwrap_or_else(BigRational::zero);
            diam.insert(members.iter().map(|&i| labels[i].clone()).collect(), d);
        }
    }
    let h = Hierarchy::new(labels.to_vec(), diam.keys().cloned().collect())?;
    Ok((h, diam))
}

/// The Hasse tree of `h` under inclusion, rooted at `X` (interior-rooted),
/// and its extension by a new root below `X` (end-rooted). Non-singleton
/// clusters are decorated with their diameter.
pub fn hierarchy_to_trees(h: &Hierarchy, diameters: &Diameters) -> Result<(RootedTree, RootedTree)> {
    let clusters = h.clusters();
    let top = clusters.len() - 1;
    let mut tree = RootedTree::new(None);
    let mut id_of: HashMap<usize, usize> = HashMap::from([(top, 0)]);
    // Larger clusters come later; walk downwards so parents exist first.
    for i in (0..top).rev() {
        let parent = (i + 1..clusters.len())
            .find(|&j| clusters[i].is_subset(&clusters[j]))
            .expect("the full set contains every cluster");
        let label = (clusters[i].len() == 1).then(|| clusters[i].iter().next().unwrap().clone());
        let id = tree.add_child(id_of[&parent], label);
        id_of.insert(i, id);
    }
    if clusters[top].len() == 1 {
        tree.nodes[0].label = clusters[top].iter().next().cloned();
    }
    for (i, c) in clusters.iter().enumerate() {
        if c.len() > 1 {
            let d = diameters
                .get(c)
                .ok_or_else(|| Error::InvalidHierarchy(format!("no diameter for {c:?}")))?;
            tree.set_decoration(id_of[&i], Some(d.clone()));
        }
    }
    sort_children_by_cluster(&mut tree);
    check_monotone(&tree)?;
    let end = tree.extended(None);
    Ok((tree, end))
}

fn sort_children_by_cluster(t: &mut RootedTree) {
    let keys: Vec<Vec<String>> =
        (0..t.len()).map(|i| t.cluster(i).expect("valid id").into_iter().collect()).collect();
    for n in &mut t.nodes {
        n.children.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
    }
}

fn check_monotone(t: &RootedTree) -> Result<()> {
    for (i, n) in t.nodes.iter().enumerate() {
        let Some(d) = &n.decoration else { continue };
        if !d.is_positive() {
            return Err(Error::NonMonotoneDecoration(format!("node {i} has value {}", rat_compact(d))));
        }
        let above = t.ancestors(i).into_iter().skip(1).find_map(|a| t.nodes[a].decoration.clone());
        if let Some(p) = above {
            if *d >= p {
                return Err(Error::NonMonotoneDecoration(format!(
                    "node {i} has value {} but an ancestor has {}",
                    rat_compact(d),
                    rat_compact(&p)
                )));
            }
        }
    }
    Ok(())
}

/// `U(a, b) = δ(a ∧ b)` for a tree whose branching nodes carry a strictly
/// decreasing positive decoration. Labels come out sorted.
pub fn ultrametric_from_depth(t: &RootedTree) -> Result<UltrametricSpace> {
    check_monotone(t)?;
    let mut leaves = t.leaves();
    leaves.sort_by(|&a, &b| t.nodes[a].label.cmp(&t.nodes[b].label));
    let labels: Vec<String> = leaves
        .iter()
        .map(|&x| t.nodes[x].label.clone().ok_or_else(|| Error::InvalidHierarchy(format!("leaf {x} has no label"))))
        .collect::<Result<_>>()?;
    let n = leaves.len();
    let mut dist = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let m = t.meet(leaves[i], leaves[j]);
            let d = t.nodes[m]
                .decoration
                .clone()
                .ok_or_else(|| Error::NonMonotoneDecoration(format!("branching node {m} is undecorated")))?;
            dist[i][j] = d.clone();
            dist[j][i] = d;
        }
    }
    UltrametricSpace::new(labels, dist)
}

/// The cluster map `K(v)`.
pub fn cluster_map(t: &RootedTree, v: usize) -> Result<BTreeSet<String>> {
    t.cluster(v)
}

/// First quadruple `(l, u, v, w)` with
/// `d(l,u) + d(v,w) > max(d(l,v) + d(u,w), d(l,w) + d(u,v))`.
pub fn four_point_check_additive(labels: &[String], d: &[Vec<BigRational>]) -> Option<[String; 4]> {
    let n = labels.len();
    for l in 0..n {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let lhs = &d[l][u] + &d[v][w];
                    let a = &d[l][v] + &d[u][w];
                    let b = &d[l][w] + &d[u][v];
                    if lhs > a.max(b) {
                        return Some([l, u, v, w].map(|i| labels[i].clone()));
                    }
                }
            }
        }
    }
    None
}

/// The four-point condition for `d = -½ log q` evaluated exactly on the
/// affinities: `q(l,u) q(v,w) >= min(q(l,v) q(u,w), q(l,w) q(u,v))`.
///
/// All three products have denominator `p(l,l) p(u,u) p(v,v) p(w,w)`, so
/// only the squared numerators are compared.
pub fn four_point_check_affinity(t: &DetProductTable) -> Option<[String; 4]> {
    let n = t.len();
    let num: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let q = t.affinity_at(i, j).0;
                    q.numer() * (t.at(i, i) * t.at(j, j)) / q.denom()
                })
                .collect()
        })
        .collect();
    for l in 0..n {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let lhs = &num[l][u] * &num[v][w];
                    let a = &num[l][v] * &num[u][w];
                    let b = &num[l][w] * &num[u][v];
                    if lhs < a.min(b) {
                        return Some([l, u, v, w].map(|i| t.labels()[i].clone()));
                    }
                }
            }
        }
    }
    None
}

fn check_family(g: &WeightedDualGraph, base: &str, family: &[String]) -> Result<()> {
    if !g.is_arborescent() {
        return Err(Error::NotATree("dual trees are".into()));
    }
    g.branch(base)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut seen = BTreeSet::new();
    for a in family {
        g.branch(a)?;
        if a == base {
            return Err(Error::BaseInFamily(a.clone()));
        }
        if !seen.insert(a) {
            return Err(Error::DuplicateBranch(a.clone()));
        }
    }
    Ok(())
}

/// Builds the part of `Γ̂` spanned by the vertex set `keep`, rooted at a
/// leaf labelled `base` hanging off `root`, with a leaf for every branch in
/// `family`. Vertex nodes are labelled by vertex name.
fn rooted_dual(g: &WeightedDualGraph, base: &str, root: usize, keep: &[bool], family: &[String]) -> Result<RootedTree> {
    let mut t = RootedTree::new(Some(base.to_string()));
    let mut node_of = vec![usize::MAX; g.len()];
    node_of[root] = t.add_child(0, Some(g.name(root).to_string()));
    let mut queue = std::collections::VecDeque::from([root]);
    let mut order = Vec::new();
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &y in g.neighbors_at(x) {
            if keep[y] && node_of[y] == usize::MAX {
                node_of[y] = t.add_child(node_of[x], Some(g.name(y).to_string()));
                queue.push_back(y);
            }
        }
    }
    for a in family {
        let at = g.attachment(a)?;
        t.add_child(node_of[at], Some(a.clone()));
    }
    Ok(t)
}

/// `Γ̂` restricted to the union of the geodesics from `L` to the members of
/// `family`, rooted at the leaf of `L`.
pub fn embedded_dual_tree(g: &WeightedDualGraph, base: &str, family: &[String]) -> Result<RootedTree> {
    check_family(g, base, family)?;
    let l = g.attachment(base)?;
    let mut keep = vec![false; g.len()];
    for a in family {
        for x in g.geodesic_indices(l, g.attachment(a)?) {
            keep[x] = true;
        }
    }
    rooted_dual(g, base, l, &keep, family)
}

/// All of `Γ` plus leaves for `family`, rooted at the leaf of `L`.
pub fn full_dual_tree(g: &WeightedDualGraph, base: &str, family: &[String]) -> Result<RootedTree> {
    check_family(g, base, family)?;
    let l = g.attachment(base)?;
    rooted_dual(g, base, l, &vec![true; g.len()], family)
}

/// The convex hull of the leaves of `family` in `Γ̂`, rooted at the point
/// where the geodesic from `L` first meets it. Returns the tree and the
/// index of that vertex (`None` when `family` has one member and the hull is
/// a single leaf).
pub fn convex_hull_tree(
    g: &WeightedDualGraph,
    base: &str,
    family: &[String],
) -> Result<(RootedTree, Option<usize>)> {
    check_family(g, base, family)?;
    if family.len() == 1 {
        return Ok((RootedTree::new(Some(family[0].clone())), None));
    }
    let at: Vec<usize> = family.iter().map(|a| g.attachment(a)).collect::<Result<_>>()?;
    let mut keep = vec![false; g.len()];
    for &x in &at {
        for &y in &at {
            for v in g.geodesic_indices(x, y) {
                keep[v] = true;
            }
        }
    }
    let l = g.attachment(base)?;
    let proj = g.geodesic_indices(l, at[0]).into_iter().find(|&x| keep[x]).expect("hull meets the path");
    let with_base = rooted_dual(g, base, proj, &keep, family)?;
    // Drop the base leaf: the hull's root is the projection vertex itself.
    let mut t = RootedTree::new(Some(g.name(proj).to_string()));
    let mut stack = vec![(1usize, 0usize)];
    while let Some((old, new)) = stack.pop() {
        for &c in &with_base.nodes[old].children {
            let id = t.add_child(new, with_base.nodes[c].label.clone());
            stack.push((c, id));
        }
    }
    Ok((t, Some(proj)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonOptions {
    /// Splice out non-root nodes with exactly one child.
    pub suppress_unary: bool,
    /// Include labels of non-leaf nodes.
    pub internal_labels: bool,
    /// Include decorations of non-leaf nodes.
    pub decorations: bool,
}

impl CanonOptions {
    /// Leaf-labelled topology with unary nodes spliced out.
    pub const TOPOLOGY: CanonOptions = CanonOptions { suppress_unary: true, internal_labels: false, decorations: false };
    /// As [`CanonOptions::TOPOLOGY`] but keeping decorations.
    pub const DECORATED: CanonOptions = CanonOptions { suppress_unary: true, internal_labels: false, decorations: true };
    /// Every node and every label.
    pub const LABELLED: CanonOptions = CanonOptions { suppress_unary: false, internal_labels: true, decorations: false };
}

/// A string that two leaf-labelled rooted trees share exactly when they are
/// isomorphic (under the chosen options). Children are ordered by their
/// sorted cluster label lists.
pub fn canonical_form(t: &RootedTree, opts: CanonOptions) -> String {
    let clusters: Vec<Vec<String>> =
        (0..t.len()).map(|i| t.cluster(i).expect("valid id").into_iter().collect()).collect();
    fn render(t: &RootedTree, clusters: &[Vec<String>], id: usize, opts: CanonOptions) -> String {
        let node = &t.nodes[id];
        if t.is_leaf(id) {
            return node.label.clone().unwrap_or_else(|| "?".into());
        }
        let mut kids: Vec<usize> = node.children.clone();
        if opts.suppress_unary {
            kids = kids
                .into_iter()
                .map(|mut c| {
                    while t.nodes[c].children.len() == 1 {
                        c = t.nodes[c].children[0];
                    }
                    c
                })
                .collect();
        }
        let mut parts: Vec<(Vec<String>, String)> =
            kids.iter().map(|&c| (clusters[c].clone(), render(t, clusters, c, opts))).collect();
        parts.sort();
        let mut out = String::new();
        if opts.internal_labels {
            out.push_str(node.label.as_deref().unwrap_or(""));
        }
        out.push('(');
        out.push_str(&parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join(","));
        out.push(')');
        if opts.decorations {
            if let Some(d) = &node.decoration {
                out.push(':');
                out.push_str(&rat_compact(d));
            }
        }
        out
    }
    render(t, &clusters, t.root(), opts)
}

/// `(p(l,l)/det(S)) · q(l, x)`: the depth of vertex `x` seen from `l`.
pub fn depth_from_affinity(table: &DetProductTable, l: usize, x: usize) -> BigRational {
    let r = |v: &BigInt| BigRational::from(v.clone());
    r(table.at(l, l)) / r(table.det_s()) * table.affinity_at(l, x).0
}

/// Sets the decoration of every vertex node from [`depth_from_affinity`].
fn decorate_with_depth(t: &mut RootedTree, g: &WeightedDualGraph, table: &DetProductTable, l: usize) {
    for i in 0..t.len() {
        if t.is_leaf(i) || i == t.root() {
            continue;
        }
        if let Some(x) = t.nodes[i].label.as_ref().and_then(|name| g.index_of(name).ok()) {
            t.nodes[i].decoration = Some(depth_from_affinity(table, l, x));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopintReport {
    /// End-rooted tree of `U_L` against the geodesic union rooted at `L`.
    pub end_tree: bool,
    /// Interior-rooted tree of `U_L` against the convex hull of the family.
    pub interior_tree: bool,
    /// Decorations of the end-rooted trees agree as well.
    pub decorations: bool,
    pub mismatches: Vec<String>,
}

impl TopintReport {
    pub fn is_ok(&self) -> bool {
        self.end_tree && self.interior_tree && self.decorations
    }
}

/// Compares the trees of `U_L` on `family` with the dual-graph trees.
pub fn topint_isomorphism(
    lat: &IntersectionLattice,
    table: &DetProductTable,
    base: &str,
    family: &[String],
) -> Result<TopintReport> {
    let g = lat.graph();
    let u = ultra::ultrametric_ul(lat, base, family)?;
    let (h, diam) = closed_balls(&u)?;
    let (interior, end) = hierarchy_to_trees(&h, &diam)?;
    let mut graph_end = embedded_dual_tree(g, base, family)?;
    let (hull, _) = convex_hull_tree(g, base, family)?;
    let mut report = TopintReport::default();

    let a = canonical_form(&end, CanonOptions::TOPOLOGY);
    let b = canonical_form(&graph_end, CanonOptions::TOPOLOGY);
    report.end_tree = a == b;
    if !report.end_tree {
        report.mismatches.push(format!("end-rooted: {a} vs {b}"));
    }
    let a = canonical_form(&interior, CanonOptions::TOPOLOGY);
    let b = canonical_form(&hull, CanonOptions::TOPOLOGY);
    report.interior_tree = a == b;
    if !report.interior_tree {
        report.mismatches.push(format!("interior-rooted: {a} vs {b}"));
    }
    decorate_with_depth(&mut graph_end, g, table, g.attachment(base)?);
    let a = canonical_form(&end, CanonOptions::DECORATED);
    let b = canonical_form(&graph_end, CanonOptions::DECORATED);
    report.decorations = a == b;
    if !report.decorations {
        report.mismatches.push(format!("decorated: {a} vs {b}"));
    }
    Ok(report)
}
