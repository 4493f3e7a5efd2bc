//! Weighted dual graphs of good resolutions.
//!
//! A graph carries named vertices weighted by self-intersection numbers, a
//! multiset of edges (the multiplicity of `{u, v}` is `E_u . E_v`) and named
//! branches, each recorded by the single vertex its strict transform meets.
//! Everything is addressed by name so that strict transforms keep their
//! identity across blow-ups.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    /// Self-intersection `E_v . E_v`; always negative.
    pub weight: i64,
    /// Accepted for round-tripping files, never used in computations.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub genus: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    /// The vertex `u(A)` whose component meets the strict transform.
    pub at: String,
}

/// The unique simple path between two vertices of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreePath(pub Vec<String>);

impl TreePath {
    pub fn vertices(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.iter().any(|x| x == v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Where a point is blown up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowUpSite {
    /// A point of `E_v` lying on no other component and on no branch.
    FreePoint(String),
    /// One of the intersection points of `E_u` and `E_v`.
    IntersectionPoint(String, String),
    /// The point where the named branch meets the exceptional divisor.
    BranchPoint(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedDualGraph {
    vertices: Vec<Vertex>,
    /// Keyed by index pairs `(i, j)` with `i < j`.
    edges: BTreeMap<(usize, usize), u64>,
    branches: Vec<Branch>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, u64)>,
    branches: Vec<Branch>,
}

impl GraphBuilder {
    pub fn vertex(mut self, name: &str, weight: i64) -> Self {
        self.vertices.push(Vertex { name: name.to_string(), weight, genus: None });
        self
    }

    pub fn edge(self, u: &str, v: &str) -> Self {
        self.multi_edge(u, v, 1)
    }

    pub fn multi_edge(mut self, u: &str, v: &str, multiplicity: u64) -> Self {
        self.edges.push((u.to_string(), v.to_string(), multiplicity));
        self
    }

    pub fn branch(mut self, name: &str, at: &str) -> Self {
        self.branches.push(Branch { name: name.to_string(), at: at.to_string() });
        self
    }

    pub fn build(self) -> Result<WeightedDualGraph> {
        WeightedDualGraph::new(self.vertices, self.edges, self.branches)
    }
}

impl WeightedDualGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    /// Validates and assembles a graph. Repeated edge entries accumulate.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<(String, String, u64)>,
        branches: Vec<Branch>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateName(v.name.clone()));
            }
            if v.weight >= 0 {
                return Err(Error::NonNegativeWeight { name: v.name.clone(), weight: v.weight });
            }
        }
        let mut edge_map: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (u, v, m) in edges {
            if u == v {
                return Err(Error::LoopEdge(u));
            }
            let iu = *index.get(&u).ok_or_else(|| Error::UnknownVertex(u.clone()))?;
            let iv = *index.get(&v).ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            if m == 0 {
                continue;
            }
            *edge_map.entry((iu.min(iv), iu.max(iv))).or_insert(0) += m;
        }
        let mut names: HashSet<&str> = index.keys().map(String::as_str).collect();
        for b in &branches {
            if !names.insert(b.name.as_str()) {
                return Err(Error::DuplicateName(b.name.clone()));
            }
            if !index.contains_key(&b.at) {
                return Err(Error::UnknownVertex(b.at.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for &(i, j) in edge_map.keys() {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        let g = WeightedDualGraph { vertices, edges: edge_map, branches, index, adjacency };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertices.len()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_names(&self) -> Vec<String> {
        self.vertices.iter().map(|v| v.name.clone()).collect()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch_names(&self) -> Vec<String> {
        self.branches.iter().map(|b| b.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.vertices[i].name
    }

    pub fn has_vertex(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn weight(&self, name: &str) -> Result<i64> {
        Ok(self.vertices[self.index_of(name)?].weight)
    }

    pub fn weight_at(&self, i: usize) -> i64 {
        self.vertices[i].weight
    }

    /// `E_u . E_v` for `u != v`, i.e. the edge multiplicity (0 when absent).
    pub fn multiplicity(&self, u: &str, v: &str) -> Result<u64> {
        let (i, j) = (self.index_of(u)?, self.index_of(v)?);
        Ok(self.multiplicity_at(i, j))
    }

    pub fn multiplicity_at(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return 0;
        }
        self.edges.get(&(i.min(j), i.max(j))).copied().unwrap_or(0)
    }

    /// Edges as `(u, v, multiplicity)` with `u` before `v` in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.edges.iter().map(|(&(i, j), &m)| (self.name(i), self.name(j), m))
    }

    pub fn total_edge_multiplicity(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Distinct neighbours of vertex `i`, ascending by index.
    pub fn neighbors_at(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn neighbors(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index_of(name)?;
        Ok(self.adjacency[i].iter().map(|&j| self.name(j)).collect())
    }

    /// Valency counted with multiplicity.
    pub fn degree_at(&self, i: usize) -> u64 {
        self.adjacency[i].iter().map(|&j| self.multiplicity_at(i, j)).sum()
    }

    pub fn branch(&self, name: &str) -> Result<&Branch> {
        self.branches
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownBranch(name.to_string()))
    }

    /// Index of the attachment vertex `u(A)`.
    pub fn attachment(&self, branch: &str) -> Result<usize> {
        let b = self.branch(branch)?;
        self.index_of(&b.at)
    }

    /// The intersection matrix `(E_u . E_v)` in vertex order.
    pub fn intersection_matrix(&self) -> IntMatrix {
        let n = self.len();
        let mut rows = vec![vec![BigInt::from(0); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = BigInt::from(self.vertices[i].weight);
        }
        for (&(i, j), &m) in &self.edges {
            rows[i][j] = BigInt::from(m);
            rows[j][i] = BigInt::from(m);
        }
        IntMatrix::from_rows(self.vertex_names(), rows).expect("square by construction")
    }

    /// True iff the multigraph is a tree: `|V| - 1` edges counted with
    /// multiplicity and no multiple edges.
    pub fn is_arborescent(&self) -> bool {
        self.total_edge_multiplicity() + 1 == self.len() as u64 && self.edges.values().all(|&m| m == 1)
    }

    fn require_tree(&self, what: &str) -> Result<()> {
        if self.is_arborescent() {
            Ok(())
        } else {
            Err(Error::NotATree(what.to_string()))
        }
    }

    /// BFS parents from `root`; valid as a path oracle only on trees.
    pub(crate) fn parents_from(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Vertex indices of the geodesic from `u` to `v`, both included.
    pub(crate) fn geodesic_indices(&self, u: usize, v: usize) -> Vec<usize> {
        let parent = self.parents_from(u);
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn geodesic(&self, u: &str, v: &str) -> Result<TreePath> {
        self.require_tree("geodesics are")?;
        let (iu, iv) = (self.index_of(u)?, self.index_of(v)?);
        let path = self.geodesic_indices(iu, iv);
        Ok(TreePath(path.into_iter().map(|i| self.name(i).to_string()).collect()))
    }

    pub(crate) fn infimum_index(&self, root: usize, a: usize, b: usize) -> usize {
        let pa = self.geodesic_indices(root, a);
        let pb = self.geodesic_indices(root, b);
        let mut last = root;
        for (x, y) in pa.iter().zip(&pb) {
            if x != y {
                break;
            }
            last = *x;
        }
        last
    }

    /// `a ∧_root b`: the last vertex shared by the geodesics from `root`.
    pub fn infimum(&self, root: &str, a: &str, b: &str) -> Result<String> {
        self.require_tree("infima are")?;
        let (r, ia, ib) = (self.index_of(root)?, self.index_of(a)?, self.index_of(b)?);
        Ok(self.name(self.infimum_index(r, ia, ib)).to_string())
    }

    /// Vertices seen from `u` through the edge towards `toward`.
    pub(crate) fn direction_indices(&self, u: usize, toward: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        seen[u] = true;
        seen[toward] = true;
        let mut out = vec![toward];
        let mut queue = VecDeque::from([toward]);
        while let Some(x) = queue.pop_front() {
            for &w in &self.adjacency[x] {
                if !seen[w] {
                    seen[w] = true;
                    out.push(w);
                    queue.push_back(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The full weighted subtree `Γ_{u,e}` for the edge `e = {u, toward}`.
    /// Branches are dropped.
    pub fn subtree_in_direction(&self, u: &str, toward: &str) -> Result<WeightedDualGraph> {
        self.require_tree("directional subtrees are")?;
        let (iu, it) = (self.index_of(u)?, self.index_of(toward)?);
        if self.multiplicity_at(iu, it) == 0 {
            return Err(Error::EdgeNotIncident { vertex: u.to_string(), other: toward.to_string() });
        }
        Ok(self.induced(&self.direction_indices(iu, it)))
    }

    /// Full subgraph on the given (sorted) vertex indices, without branches.
    pub(crate) fn induced(&self, keep: &[usize]) -> WeightedDualGraph {
        let set: HashSet<usize> = keep.iter().copied().collect();
        let vertices = keep.iter().map(|&i| self.vertices[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|((i, j), _)| set.contains(i) && set.contains(j))
            .map(|(&(i, j), &m)| (self.name(i).to_string(), self.name(j).to_string(), m))
            .collect();
        WeightedDualGraph::new(vertices, edges, Vec::new()).expect("induced subgraph of a connected piece")
    }

    /// A name not used by any vertex or branch: `n`, `n1`, `n2`, ...
    pub fn fresh_name(&self, stem: &str) -> String {
        let taken = |s: &str| self.index.contains_key(s) || self.branches.iter().any(|b| b.name == s);
        if !taken(stem) {
            return stem.to_string();
        }
        (1..).map(|k| format!("{stem}{k}")).find(|s| !taken(s)).expect("unbounded search")
    }

    /// Blows up one point of the exceptional divisor. Returns the new graph
    /// and the name of the new `(-1)`-vertex.
    pub fn blow_up(&self, site: &BlowUpSite) -> Result<(WeightedDualGraph, String)> {
        let new = self.fresh_name("n");
        let mut vertices = self.vertices.clone();
        let mut edges: Vec<(String, String, u64)> =
            self.edges().map(|(u, v, m)| (u.to_string(), v.to_string(), m)).collect();
        let mut branches = self.branches.clone();
        match site {
            BlowUpSite::FreePoint(v) => {
                let i = self.index_of(v)?;
                vertices[i].weight -= 1;
                edges.push((new.clone(), v.clone(), 1));
            }
            BlowUpSite::IntersectionPoint(u, v) => {
                let (iu, iv) = (self.index_of(u)?, self.index_of(v)?);
                if self.multiplicity_at(iu, iv) == 0 {
                    return Err(Error::MissingEdge(u.clone(), v.clone()));
                }
                vertices[iu].weight -= 1;
                vertices[iv].weight -= 1;
                let e = edges
                    .iter_mut()
                    .find(|(a, b, _)| (a == u && b == v) || (a == v && b == u))
                    .expect("edge present");
                e.2 -= 1;
                edges.push((new.clone(), u.clone(), 1));
                edges.push((new.clone(), v.clone(), 1));
            }
            BlowUpSite::BranchPoint(a) => {
                let i = self.attachment(a)?;
                vertices[i].weight -= 1;
                edges.push((new.clone(), self.name(i).to_string(), 1));
                for b in &mut branches {
                    if &b.name == a {
                        b.at = new.clone();
                    }
                }
            }
        }
        vertices.push(Vertex { name: new.clone(), weight: -1, genus: None });
        Ok((WeightedDualGraph::new(vertices, edges, branches)?, new))
    }

    /// Returns a copy with one more branch attached at `at`.
    pub fn with_branch(&self, name: &str, at: &str) -> Result<WeightedDualGraph> {
        let mut branches = self.branches.clone();
        branches.push(Branch { name: name.to_string(), at: at.to_string() });
        WeightedDualGraph::new(
            self.vertices.clone(),
            self.edges().map(|(u, v, m)| (u.to_string(), v.to_string(), m)).collect(),
            branches,
        )
    }

    /// Serializes into the line-oriented graph file format.
    pub fn to_graph_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            match v.genus {
                Some(g) => writeln!(out, "vertex {} {} genus {}", v.name, v.weight, g),
                None => writeln!(out, "vertex {} {}", v.name, v.weight),
            }
            .unwrap();
        }
        for (u, v, m) in self.edges() {
            if m == 1 {
                writeln!(out, "edge {u} {v}").unwrap();
            } else {
                writeln!(out, "edge {u} {v} {m}").unwrap();
            }
        }
        for b in &self.branches {
            writeln!(out, "branch {} at {}", b.name, b.at).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<_> = self
            .edges()
            .map(|(u, v, m)| serde_json::json!({ "u": u, "v": v, "multiplicity": m }))
            .collect();
        serde_json::json!({
            "vertices": self.vertices,
            "edges": edges,
            "branches": self.branches,
        })
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, message: message.into() }
}

/// Parses the graph file format:
///
/// ```text
/// vertex <name> <weight> [genus <g>]
/// edge <name> <name> [<multiplicity>]
/// branch <name> at <vertex>
/// ```
///
/// `#` starts a comment. Edges and branches may refer to vertices declared
/// later in the file.
pub fn parse_graph(text: &str) -> Result<WeightedDualGraph> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut branches = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, args)) = tokens.split_first() else { continue };
        match keyword {
            "vertex" => {
                let (name, weight, genus) = match args {
                    [name, weight] => (name, weight, None),
                    [name, weight, "genus", g] => (name, weight, Some(g)),
                    _ => return Err(syntax(line, "expected `vertex <name> <weight> [genus <g>]`")),
                };
                let weight: i64 =
                    weight.parse().map_err(|_| syntax(line, format!("invalid weight `{weight}`")))?;
                let genus = genus
                    .map(|g| g.parse::<u64>().map_err(|_| syntax(line, format!("invalid genus `{g}`"))))
                    .transpose()?;
                vertices.push(Vertex { name: name.to_string(), weight, genus });
            }
            "edge" => {
                let (u, v, m) = match args {
                    [u, v] => (u, v, 1),
                    [u, v, m] => {
                        let m: u64 = m
                            .parse()
                            .ok()
                            .filter(|&m| m >= 1)
                            .ok_or_else(|| syntax(line, format!("invalid multiplicity `{m}`")))?;
                        (u, v, m)
                    }
                    _ => return Err(syntax(line, "expected `edge <name> <name> [<multiplicity>]`")),
                };
                edges.push((u.to_string(), v.to_string(), m));
            }
            "branch" => match args {
                [name, "at", at] => branches.push(Branch { name: name.to_string(), at: at.to_string() }),
                _ => return Err(syntax(line, "expected `branch <name> at <vertex>`")),
            },
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    WeightedDualGraph::new(vertices, edges, branches)
}
