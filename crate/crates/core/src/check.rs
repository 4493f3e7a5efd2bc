//! Seeded property runner over generated resolution graphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detprod;
use crate::dualgraph::{BlowUpSite, WeightedDualGraph};
use crate::exactalg;
use crate::generate::{branch_name, instance_seed, random_tree, GenOptions, WeightMode};
use crate::lattice::{build_lattice, IntersectionLattice};
use crate::treekit;
use crate::ultra::{self, Classification};
use crate::valord::{self, TreeOrder, ValuationContext};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub count: usize,
    pub max_vertices: usize,
    /// Skip the independent oracle routes (adjugate, continued fractions).
    pub skip_crosscheck: bool,
    pub reject_sample: bool,
    /// Generate graphs with cycles and report (ultra)metric witnesses
    /// instead of checking tree properties.
    pub non_arborescent: bool,
    /// Corrupt one determinant product per instance before checking.
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            count: 200,
            max_vertices: 12,
            skip_crosscheck: false,
            reject_sample: false,
            non_arborescent: false,
            inject_fault: false,
        }
    }
}

/// Property names in report order.
pub const PROPERTIES: &[&str] = &[
    "adjugate-oracle",
    "duchon-det",
    "lattice",
    "en-identity",
    "cauchy-schwarz",
    "refine-law",
    "four-point",
    "ultrametric",
    "upper-bound",
    "tree-formulas",
    "topint",
    "valuative-order",
    "valuation-tree",
    "monotone-sandwich",
    "blow-up",
    "hierarchy-round-trip",
    "uo-gate",
];

#[derive(Debug, Clone)]
struct Witness {
    base: String,
    class: &'static str,
    text: String,
}

#[derive(Debug, Clone)]
struct Instance {
    index: usize,
    seed: u64,
    graph: WeightedDualGraph,
    checked: Vec<&'static str>,
    failures: Vec<(&'static str, String)>,
    classes: BTreeMap<&'static str, usize>,
    witnesses: Vec<Witness>,
}

impl Instance {
    fn run(&mut self, prop: &'static str, f: impl FnOnce() -> Result<bool, String>) {
        match f() {
            Ok(true) => self.checked.push(prop),
            Ok(false) => {}
            Err(msg) => {
                self.checked.push(prop);
                self.failures.push((prop, msg));
            }
        }
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

fn lib<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Outcome of a run; [`CheckReport::render`] is byte-deterministic in the
/// configuration.
#[derive(Debug, Clone)]
pub struct CheckReport {
    config: RunConfig,
    instances: Vec<Instance>,
}

pub fn run_check(config: &RunConfig) -> CheckReport {
    let mut instances: Vec<Instance> =
        (0..config.count).into_par_iter().map(|i| check_instance(config, i)).collect();
    instances.sort_by_key(|x| x.index);
    CheckReport { config: config.clone(), instances }
}

fn generate(config: &RunConfig, index: usize) -> (u64, WeightedDualGraph, ChaCha8Rng) {
    let seed = instance_seed(config.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FF_EE00_D15E_A5E5);
    let max = config.max_vertices.max(1);
    let (lo, extra) = if config.non_arborescent && max >= 2 { (2, rng.gen_range(1..=3)) } else { (1, 0) };
    let opts = GenOptions {
        vertices: rng.gen_range(lo..=max),
        branches: 1..=5,
        weights: if config.reject_sample { WeightMode::RejectSample } else { WeightMode::Dominant },
        extra_edges: extra,
    };
    let mut g = random_tree(seed, &opts);
    // Triples of branches plus a base need four of them.
    let mut k = g.branches().len();
    while g.branches().len() < 4 {
        let at = g.name(rng.gen_range(0..g.len())).to_string();
        g = g.with_branch(&branch_name(k), &at).expect("fresh branch name");
        k += 1;
    }
    (seed, g, rng)
}

fn check_instance(config: &RunConfig, index: usize) -> Instance {
    let (seed, graph, mut rng) = generate(config, index);
    let mut inst = Instance {
        index,
        seed,
        graph: graph.clone(),
        checked: Vec::new(),
        failures: Vec::new(),
        classes: BTreeMap::new(),
        witnesses: Vec::new(),
    };
    let g = &graph;
    let lat = match build_lattice(g) {
        Ok(l) => l,
        Err(e) => {
            inst.failures.push(("lattice", e.to_string()));
            return inst;
        }
    };
    inst.run("lattice", || lattice_invariants(&lat));
    if config.non_arborescent || !g.is_arborescent() {
        classify_all(&mut inst, &lat);
        inst.run("uo-gate", || uo_gate(&lat));
        return inst;
    }

    let mut table = match detprod::build_table(g, false) {
        Ok(t) => t,
        Err(e) => {
            inst.failures.push(("adjugate-oracle", e.to_string()));
            return inst;
        }
    };
    if config.inject_fault {
        let (i, j) = if g.len() > 1 { (0, 1) } else { (0, 0) };
        let v = table.at(i, j) + BigInt::one();
        table.corrupt(i, j, v);
    }
    let minus_i = g.intersection_matrix().negated();
    let bases = g.branch_names();

    if !config.skip_crosscheck {
        inst.run("adjugate-oracle", || {
            lib(table.crosscheck_adjugate(&exactalg::adjugate(&minus_i)))?;
            if table.det_s() != &exactalg::determinant_rational(&minus_i) {
                return fail("Bareiss and rational determinants differ");
            }
            Ok(true)
        });
        inst.run("duchon-det", || {
            let det = exactalg::determinant_rational(&minus_i);
            for root in g.vertex_names() {
                let (_, d) = lib(detprod::duchon_det(g, &root))?;
                if d != det {
                    return fail(format!("continued fraction at {root} gives {d}, determinant is {det}"));
                }
            }
            Ok(true)
        });
    }
    inst.run("en-identity", || match detprod::en_identity_witness(g, &table) {
        Some((u, v, w)) => fail(format!("p({u},{v}) p({v},{w}) != p({v},{v}) p({u},{w})")),
        None => Ok(true),
    });
    inst.run("cauchy-schwarz", || match detprod::cauchy_schwarz_witness(&table) {
        Some((u, v)) => fail(format!("p({u},{v})^2 > p({u},{u}) p({v},{v})")),
        None => Ok(true),
    });
    inst.run("refine-law", || match detprod::refine_law_witness(g, &table) {
        Some(w) => fail(format!("refine law fails on {w:?}")),
        None => Ok(true),
    });
    inst.run("four-point", || {
        if let Some(w) = detprod::multiplicative_four_point_witness(&table) {
            return fail(format!("multiplicative four-point condition fails on {w:?}"));
        }
        if let Some(w) = treekit::four_point_check_affinity(&table) {
            return fail(format!("affinity four-point condition fails on {w:?}"));
        }
        Ok(true)
    });
    inst.run("ultrametric", || {
        for base in &bases {
            let u = lib(ultra::ultrametric_ul(&lat, base, &others(&bases, base)))?;
            if let Some(w) = ultra::verify_ultrametric(&u) {
                return fail(format!("base {base}: U_L not ultrametric on {w:?}"));
            }
        }
        Ok(true)
    });
    inst.run("upper-bound", || upper_bound(&lat, &bases));
    inst.run("tree-formulas", || {
        for base in &bases {
            let fam = others(&bases, base);
            let u = lib(ultra::ultrametric_ul(&lat, base, &fam))?;
            for i in 0..fam.len() {
                for j in 0..i {
                    let f = lib(ultra::formula_crosscheck(&lat, &table, base, &fam[i], &fam[j]))?;
                    if &f[0] != u.at(i, j) {
                        return fail(format!("base {base}: tree formula for U({},{}) differs from lattice", fam[i], fam[j]));
                    }
                }
            }
        }
        Ok(true)
    });
    inst.run("topint", || {
        for base in &bases {
            let r = lib(treekit::topint_isomorphism(&lat, &table, base, &others(&bases, base)))?;
            if !r.is_ok() {
                return fail(format!("base {base}: {}", r.mismatches.join("; ")));
            }
        }
        Ok(true)
    });
    let base = &bases[0];
    let fam = others(&bases, base);
    let ctx = ValuationContext::with_table(g, table.clone(), base);
    inst.run("valuative-order", || {
        let ctx = lib(ctx.clone())?;
        for u in g.vertex_names() {
            for v in g.vertex_names() {
                let t = lib(valord::tree_order(g, base, &u, &v))?;
                if lib(ctx.ord_le(&u, &v))? != matches!(t, TreeOrder::Below | TreeOrder::Equal) {
                    return fail(format!("ord_{u} vs ord_{v}: criterion disagrees with tree order {t:?}"));
                }
            }
            for a in &fam {
                let t = lib(valord::tree_order(g, base, &u, a))?;
                if lib(ctx.ord_le_int(&u, a))? != (t == TreeOrder::Below) {
                    return fail(format!("ord_{u} vs int_{a}: criterion disagrees with tree order {t:?}"));
                }
            }
        }
        Ok(true)
    });
    inst.run("valuation-tree", || {
        let r = lib(valord::compare_valuation_tree(&lib(ctx.clone())?, base, &fam))?;
        if r.is_ok() {
            Ok(true)
        } else {
            fail(r.mismatches.join("; "))
        }
    });
    let degrees: BTreeMap<String, u64> = g.vertex_names().into_iter().map(|v| (v, rng.gen_range(0..=3))).collect();
    inst.run("monotone-sandwich", || {
        if degrees.values().all(|&d| d == 0) {
            return Ok(false);
        }
        let d = lib(lat.exceptional_transform(&degrees))?;
        let names = g.vertex_names();
        let vals: Vec<BigRational> =
            names.iter().map(|v| lib(valord::eval_ord(&lat, base, v, &d))).collect::<Result<_, _>>()?;
        let t = lib(treekit::full_dual_tree(g, base, &fam))?;
        let node: Vec<usize> = names.iter().map(|v| t.find_label(v).expect("vertex node")).collect();
        for (i, u) in names.iter().enumerate() {
            if lat.dot(&lat.dual_cycle(i), &d) != d.coeffs()[i] {
                return fail(format!("E_{u}*·D differs from the coefficient of E_{u}"));
            }
            for (j, v) in names.iter().enumerate() {
                if t.precedes(node[i], node[j]) && vals[i] > vals[j] {
                    return fail(format!("{u} below {v} but ord_{u}(D) > ord_{v}(D)"));
                }
            }
        }
        Ok(true)
    });
    let site = random_site(g, &mut rng);
    inst.run("blow-up", || blow_up_invariance(&lat, &site, base, &fam));
    inst.run("hierarchy-round-trip", || {
        let u = lib(ultra::ultrametric_ul(&lat, base, &fam))?;
        let (h, diam) = lib(treekit::closed_balls(&u))?;
        let (interior, end) = lib(treekit::hierarchy_to_trees(&h, &diam))?;
        if lib(treekit::ultrametric_from_depth(&interior))? != u || lib(treekit::ultrametric_from_depth(&end))? != u {
            return fail("tree depths do not reproduce U_L");
        }
        Ok(true)
    });
    let tower = smooth_point_tower(&mut rng, config.max_vertices);
    inst.run("uo-gate", || {
        uo_gate(&lat)?;
        // Blow-ups of a smooth point always pass the gate, at the first curve.
        let lat_t = lib(build_lattice(&tower))?;
        if lat_t.generic_hyperplane_vertex().as_deref() != Some("v0") {
            return fail(format!("gate fails on a blown-up smooth point:\n{}", tower.to_graph_text()));
        }
        uo_gate(&lat_t)
    });
    inst
}

/// `v0` with weight -1 and four branches, blown up at random points.
fn smooth_point_tower(rng: &mut ChaCha8Rng, max_vertices: usize) -> WeightedDualGraph {
    let mut b = WeightedDualGraph::builder().vertex("v0", -1);
    for i in 0..4 {
        b = b.branch(&branch_name(i), "v0");
    }
    let mut g = b.build().expect("valid seed graph");
    for _ in 1..rng.gen_range(1..=max_vertices.max(1)) {
        let site = random_site(&g, rng);
        g = g.blow_up(&site).expect("site taken from the graph").0;
    }
    g
}

fn others(bases: &[String], base: &str) -> Vec<String> {
    bases.iter().filter(|b| *b != base).cloned().collect()
}

fn lattice_invariants(lat: &IntersectionLattice) -> Result<bool, String> {
    if !lat.det_s().is_positive() {
        return fail(format!("det(S) = {} is not positive", lat.det_s()));
    }
    let product = lib(lat.intersection().to_rational().mul(lat.dual()))?;
    if !product.is_identity() {
        return fail("I times its computed inverse is not the identity");
    }
    let n = lat.len();
    for i in 0..n {
        for j in 0..n {
            if !lat.dual_pairing_at(i, j).is_negative() {
                return fail(format!("E_{}*·E_{}* is not negative", lat.labels()[i], lat.labels()[j]));
            }
        }
    }
    let z = lat.fundamental_cycle();
    let flags = lat.cone_membership(&z);
    if !(flags.effective && flags.anti_nef && z.is_integral()) {
        return fail("fundamental cycle is not an integral anti-nef effective cycle");
    }
    Ok(true)
}

fn upper_bound(lat: &IntersectionLattice, bases: &[String]) -> Result<bool, String> {
    for base in bases {
        let fam = others(bases, base);
        for i in 0..fam.len() {
            for j in 0..i {
                let c = lib(ultra::check_bound(lat, base, &fam[i], &fam[j]))?;
                if c.value > c.bound || (c.value == c.bound) != c.tight {
                    return fail(format!(
                        "base {base}: U({},{}) = {} against bound {} (tight: {})",
                        fam[i],
                        fam[j],
                        exactalg::rat_compact(&c.value),
                        exactalg::rat_compact(&c.bound),
                        c.tight
                    ));
                }
            }
        }
    }
    Ok(true)
}

fn random_site(g: &WeightedDualGraph, rng: &mut ChaCha8Rng) -> BlowUpSite {
    let edges: Vec<(String, String)> = g.edges().map(|(u, v, _)| (u.to_string(), v.to_string())).collect();
    match rng.gen_range(0..3) {
        1 if !edges.is_empty() => {
            let (u, v) = edges[rng.gen_range(0..edges.len())].clone();
            BlowUpSite::IntersectionPoint(u, v)
        }
        2 => BlowUpSite::BranchPoint(g.branches()[rng.gen_range(0..g.branches().len())].name.clone()),
        _ => BlowUpSite::FreePoint(g.name(rng.gen_range(0..g.len())).to_string()),
    }
}

fn blow_up_invariance(lat: &IntersectionLattice, site: &BlowUpSite, base: &str, fam: &[String]) -> Result<bool, String> {
    let g = lat.graph();
    let (g2, new) = lib(g.blow_up(site))?;
    let lat2 = lib(build_lattice(&g2))?;
    if lat2.det_s() != lat.det_s() {
        return fail(format!("{site:?}: det(S) changes from {} to {}", lat.det_s(), lat2.det_s()));
    }
    for u in g.vertex_names() {
        for v in g.vertex_names() {
            if lib(lat.dual_pairing(&u, &v))? != lib(lat2.dual_pairing(&u, &v))? {
                return fail(format!("{site:?} (new vertex {new}): E_{u}*·E_{v}* changes"));
            }
        }
    }
    let before = lib(ultra::ultrametric_ul(lat, base, fam))?;
    let after = lib(ultra::ultrametric_ul(&lat2, base, fam))?;
    if before != after {
        return fail(format!("{site:?}: U_L changes"));
    }
    Ok(true)
}

fn uo_gate(lat: &IntersectionLattice) -> Result<bool, String> {
    let Some(u) = lat.generic_hyperplane_vertex() else {
        return Ok(false);
    };
    let g = lat.graph();
    let fam = g.branch_names();
    let uo = lib(ultra::ultrametric_uo(lat, &fam))?;
    let virt = g.fresh_name("L");
    let lat_l = lib(build_lattice(&lib(g.with_branch(&virt, &u))?))?;
    if lib(ultra::ultrametric_ul(&lat_l, &virt, &fam))? != uo.space {
        return fail(format!("U_O differs from U_L with a virtual branch at {u}"));
    }
    Ok(true)
}

fn classify_all(inst: &mut Instance, lat: &IntersectionLattice) {
    let bases = lat.graph().branch_names();
    for base in &bases {
        let u = match ultra::ultrametric_ul(lat, base, &others(&bases, base)) {
            Ok(u) => u,
            Err(e) => {
                inst.failures.push(("ultrametric", e.to_string()));
                return;
            }
        };
        let c = ultra::classify(&u);
        *inst.classes.entry(c.name()).or_default() += 1;
        if !matches!(c, Classification::Ultrametric) {
            let text = ultra::describe_witness(&u, &c).unwrap_or_default();
            inst.witnesses.push(Witness { base: base.clone(), class: c.name(), text });
        }
    }
}

impl CheckReport {
    pub fn failed(&self) -> bool {
        self.instances.iter().any(|i| !i.failures.is_empty())
    }

    /// 0 on success, 5 on any property failure.
    pub fn exit_code(&self) -> i32 {
        if self.failed() {
            5
        } else {
            0
        }
    }

    /// Number of instances on which `property` ran, and how many failed.
    pub fn tally(&self, property: &str) -> (usize, usize) {
        let checked = self.instances.iter().filter(|i| i.checked.contains(&property)).count();
        let failed = self.instances.iter().filter(|i| i.failures.iter().any(|f| f.0 == property)).count();
        (checked, failed)
    }

    /// Counts of `U_L` classes over (instance, base) pairs.
    pub fn classes(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for i in &self.instances {
            for (k, v) in &i.classes {
                *out.entry(*k).or_default() += v;
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let mode = if c.non_arborescent { "non-arborescent" } else { "tree" };
        let weights = if c.reject_sample { "reject-sample" } else { "dominant" };
        let _ = writeln!(
            s,
            "check seed={} count={} max-vertices={} mode={mode} weights={weights}{}",
            c.seed,
            c.count,
            c.max_vertices,
            if c.skip_crosscheck { " skip-crosscheck" } else { "" }
        );
        let _ = writeln!(s, "{:<22}{:>9}{:>8}", "property", "checked", "failed");
        for p in PROPERTIES {
            let (checked, failed) = self.tally(p);
            if checked > 0 || failed > 0 {
                let _ = writeln!(s, "{p:<22}{checked:>9}{failed:>8}");
            }
        }
        if c.non_arborescent {
            let classes = self.classes();
            let _ = writeln!(
                s,
                "U_L classes: ultrametric {}, metric-only {}, not-metric {}",
                classes.get("ultrametric").unwrap_or(&0),
                classes.get("metric-only").unwrap_or(&0),
                classes.get("not-metric").unwrap_or(&0)
            );
            for class in ["metric-only", "not-metric"] {
                let first = self
                    .instances
                    .iter()
                    .find_map(|i| i.witnesses.iter().find(|w| w.class == class).map(|w| (i, w)));
                if let Some((i, w)) = first {
                    let _ = writeln!(s, "first {class} witness: instance {} base {}: {}", i.index, w.base, w.text);
                }
            }
        }
        let failing: Vec<&Instance> = self.instances.iter().filter(|i| !i.failures.is_empty()).collect();
        for inst in failing.iter().take(3) {
            for (p, msg) in &inst.failures {
                let _ = writeln!(s, "FAIL instance {} seed {:#018x}: {p}: {msg}", inst.index, inst.seed);
            }
            let _ = writeln!(s, "reproducer:");
            for line in inst.graph.to_graph_text().lines() {
                let _ = writeln!(s, "  {line}");
            }
        }
        if failing.len() > 3 {
            let _ = writeln!(s, "... {} more failing instances", failing.len() - 3);
        }
        let _ = writeln!(
            s,
            "result: {} ({} instances, {} failing)",
            if failing.is_empty() { "PASS" } else { "FAIL" },
            self.instances.len(),
            failing.len()
        );
        s
    }
}

/// The graph generated for instance `index` of a run.
pub fn instance_graph(config: &RunConfig, index: usize) -> WeightedDualGraph {
    generate(config, index).1
}
