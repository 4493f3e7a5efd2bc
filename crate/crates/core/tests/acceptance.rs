#![allow(clippy::needless_range_loop)]

//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};

use branchspace::check::{run_check, RunConfig};
use branchspace::detprod::{build_table, determinant_product, duchon_det, edge_determinant};
use branchspace::dualgraph::{BlowUpSite, WeightedDualGraph};
use branchspace::exactalg::{adjugate, determinant, IntMatrix};
use branchspace::fixtures;
use branchspace::generate::{instance_seed, random_tree, GenOptions, WeightMode};
use branchspace::lattice::build_lattice;
use branchspace::treekit::{self, CanonOptions};
use branchspace::ultra::{self, UltrametricSpace};
use branchspace::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(int(p), int(q))
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn adj_entry(adj: &IntMatrix, u: &str, v: &str) -> BigInt {
    let i = adj.labels().iter().position(|l| l == u).unwrap();
    let j = adj.labels().iter().position(|l| l == v).unwrap();
    adj.get(i, j).clone()
}

fn sixtree_golden() -> Outcome {
    let g = fixtures::sixtree();
    let want: [[i64; 6]; 6] = [
        [28, 24, 14, 14, 12, 8],
        [24, 24, 12, 12, 12, 8],
        [14, 12, 9, 7, 6, 4],
        [14, 12, 7, 9, 6, 4],
        [12, 12, 6, 6, 8, 4],
        [8, 8, 4, 4, 4, 4],
    ];
    let t = build_table(&g, true).map_err(s)?;
    ensure(t.labels() == names(&["a", "b", "c", "d", "e", "f"]).as_slice(), || "label order".into())?;
    for i in 0..6 {
        for j in 0..6 {
            ensure(t.at(i, j) == &int(want[i][j]), || format!("p at ({i},{j}) is {}", t.at(i, j)))?;
        }
    }
    ensure(t.det_s() == &int(4), || format!("det(S) = {}", t.det_s()))?;
    let edges = [
        ("c", "a", 9),
        ("a", "c", 2),
        ("a", "d", 2),
        ("d", "a", 9),
        ("a", "b", 7),
        ("b", "a", 4),
        ("b", "e", 2),
        ("b", "f", 3),
        ("e", "b", 8),
        ("f", "b", 4),
    ];
    for (u, toward, v) in edges {
        let d = edge_determinant(&g, u, toward).map_err(s)?;
        ensure(d == int(v), || format!("det at {u} toward {toward} is {d}, want {v}"))?;
    }
    let pab = determinant_product(&g, "a", "b").map_err(s)?;
    ensure(pab == int(24), || format!("p(a,b) = {pab}"))
}

fn twoval_golden() -> Outcome {
    let g = fixtures::twoval();
    let lat = build_lattice(&g).map_err(s)?;
    let fam = names(&["A", "B", "C", "D", "E", "F"]);
    let u = ultra::ultrametric_ul(&lat, "L", &fam).map_err(s)?;
    let close = ["B", "E", "F"];
    for (i, x) in fam.iter().enumerate() {
        for (j, y) in fam.iter().enumerate() {
            let want = if i == j {
                0
            } else if close.contains(&x.as_str()) && close.contains(&y.as_str()) {
                6
            } else {
                7
            };
            ensure(u.at(i, j) == &frac(want, 1), || format!("U({x},{y}) = {}", u.at(i, j)))?;
        }
    }
    ensure(ultra::verify_ultrametric(&u).is_none(), || "not ultrametric".into())?;
    let bound = ultra::ul_upper_bound(&lat, "L").map_err(s)?;
    let t = build_table(&g, false).map_err(s)?;
    let a = g.index_of("a").map_err(s)?;
    ensure(bound == BigRational::new(t.at(a, a).clone(), t.det_s().clone()), || "bound is not p(a,a)/det".into())?;
    ensure(bound == frac(7, 1), || format!("bound = {bound}"))?;
    for (i, x) in fam.iter().enumerate() {
        for y in &fam[..i] {
            let (ix, iy) = (g.attachment(x).map_err(s)?, g.attachment(y).map_err(s)?);
            let on_geodesic = g.geodesic(g.name(ix), g.name(iy)).map_err(s)?.0.contains(&"a".to_string());
            let value = u.dist(x, y).map_err(s)?;
            ensure(value <= &bound, || format!("U({x},{y}) above the bound"))?;
            ensure((value == &bound) == on_geodesic, || format!("U({x},{y}) tightness"))?;
            let c = ultra::check_bound(&lat, "L", x, y).map_err(s)?;
            ensure(c.tight == on_geodesic && &c.value == value, || format!("check_bound on ({x},{y})"))?;
        }
    }
    Ok(())
}

fn constree_golden() -> Outcome {
    let (labels, rows) = fixtures::constree();
    let u = UltrametricSpace::from_i64(&labels, &rows).map_err(s)?;
    let (h, diam) = treekit::closed_balls(&u).map_err(s)?;
    let set = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<std::collections::BTreeSet<_>>();
    let mut want = vec![set(&["u"]), set(&["v"]), set(&["x"]), set(&["y"]), set(&["z"])];
    want.extend([set(&["u", "v", "x"]), set(&["u", "v", "x", "y"]), set(&["u", "v", "x", "y", "z"])]);
    ensure(h.clusters() == want.as_slice(), || format!("hierarchy {:?}", h.clusters()))?;
    let (interior, end) = treekit::hierarchy_to_trees(&h, &diam).map_err(s)?;
    let form = treekit::canonical_form(&interior, CanonOptions::DECORATED);
    ensure(form == "(((u,v,x):1,y):2,z):3", || format!("tree {form}"))?;
    ensure(treekit::ultrametric_from_depth(&interior).map_err(s)? == u, || "interior round trip".into())?;
    ensure(treekit::ultrametric_from_depth(&end).map_err(s)? == u, || "end round trip".into())
}

fn counterexamples() -> Outcome {
    let g = fixtures::cyclic();
    let m = g.intersection_matrix().negated();
    let det = determinant(&m);
    ensure(det == int(56), || format!("cyclic det(S) = {det}"))?;
    let adj = adjugate(&m);
    for (u, v, want) in [("a", "l", 114), ("a", "c", 92), ("c", "b", 56), ("l", "b", 70), ("a", "b", 98), ("l", "c", 64)] {
        let got = adj_entry(&adj, u, v);
        ensure(got == int(want), || format!("cyclic adjugate at ({u},{v}) = {got}"))?;
    }
    let lat = build_lattice(&g).map_err(s)?;
    let u = ultra::ultrametric_ul(&lat, "L", &names(&["A", "B", "C"])).map_err(s)?;
    let scaled = u.scaled(&BigRational::from(int(56)));
    for (x, y, num, den) in [("A", "B", 114 * 70, 98), ("A", "C", 114 * 64, 92), ("B", "C", 70 * 64, 56)] {
        let got = scaled.dist(x, y).map_err(s)?;
        ensure(got == &frac(num, den), || format!("cyclic det·U({x},{y}) = {got}"))?;
    }
    ensure(ultra::verify_ultrametric(&u).is_some(), || "cyclic should not be ultrametric".into())?;
    ensure(ultra::verify_metric(&u).is_none(), || "cyclic should be a metric".into())?;

    let g = fixtures::nonmetric();
    let m = g.intersection_matrix().negated();
    let adj = adjugate(&m);
    for (u, v, want) in [("a", "l", 30), ("l", "b", 30), ("b", "c", 30), ("c", "a", 30), ("a", "b", 12), ("l", "c", 35)] {
        let got = adj_entry(&adj, u, v);
        ensure(got == int(want), || format!("nonmetric adjugate at ({u},{v}) = {got}"))?;
    }
    let lat = build_lattice(&g).map_err(s)?;
    let u = ultra::ultrametric_ul(&lat, "L", &names(&["A", "B", "C"])).map_err(s)?;
    let scaled = u.scaled(&BigRational::from(lat.det_s().clone()));
    for (x, y, want) in [("A", "B", 75), ("A", "C", 35), ("B", "C", 35)] {
        let got = scaled.dist(x, y).map_err(s)?;
        ensure(got == &frac(want, 1), || format!("nonmetric det·U({x},{y}) = {got}"))?;
    }
    let w = ultra::verify_metric(&u).ok_or("nonmetric should violate the triangle inequality")?;
    ensure(w == ["A", "B", "C"].map(String::from), || format!("nonmetric witness {w:?}"))?;
    let ab = scaled.dist("A", "B").map_err(s)?;
    let sum = scaled.dist("A", "C").map_err(s)? + scaled.dist("B", "C").map_err(s)?;
    ensure(ab > &sum, || "75 > 35 + 35 fails".into())
}

fn oracle_equivalence() -> Outcome {
    let mut count = 0;
    for i in 0..240u64 {
        let n = 1 + (i as usize % 12);
        let weights = if i % 2 == 0 { WeightMode::Dominant } else { WeightMode::RejectSample };
        let g = random_tree(instance_seed(5, i), &GenOptions { vertices: n, weights, ..Default::default() });
        let m = g.intersection_matrix().negated();
        let t = build_table(&g, false).map_err(s)?;
        let adj = adjugate(&m);
        for r in 0..n {
            for c in 0..n {
                ensure(t.at(r, c) == adj.get(r, c), || format!("instance {i}: p differs from adj(-I) at ({r},{c})"))?;
            }
        }
        let det = determinant(&m);
        for root in g.vertex_names() {
            let (_, d) = duchon_det(&g, &root).map_err(s)?;
            ensure(d == det, || format!("instance {i}: continued fraction at {root} gives {d}, Bareiss {det}"))?;
        }
        count += 1;
    }
    ensure(count >= 200, || format!("only {count} instances"))
}

fn property_suites() -> Outcome {
    let report = run_check(&RunConfig { seed: 6, count: 200, max_vertices: 12, ..Default::default() });
    for p in [
        "en-identity",
        "ultrametric",
        "upper-bound",
        "topint",
        "valuative-order",
        "valuation-tree",
        "blow-up",
    ] {
        let (checked, failed) = report.tally(p);
        ensure(checked == 200 && failed == 0, || format!("{p}: {checked} checked, {failed} failed"))?;
    }
    ensure(!report.failed(), || report.render())
}

fn uo_gate() -> Outcome {
    let lat = build_lattice(&fixtures::a1()).map_err(s)?;
    match ultra::ultrametric_uo(&lat, &[]) {
        Err(Error::ReducibleHyperplaneSection) => {}
        other => return Err(format!("A1 not rejected: {other:?}")),
    }
    let mut gated = 0;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(7, i));
        let g = if i % 2 == 0 {
            let opts = GenOptions { vertices: rng.gen_range(1..=8), weights: WeightMode::RejectSample, ..Default::default() };
            random_tree(instance_seed(7, i), &opts)
        } else {
            blown_up_smooth_point(&mut rng)
        };
        let lat = build_lattice(&g).map_err(s)?;
        let Some(u) = lat.generic_hyperplane_vertex() else { continue };
        gated += 1;
        let fam = g.branch_names();
        let uo = ultra::ultrametric_uo(&lat, &fam).map_err(s)?;
        let virt = g.fresh_name("L");
        let with_l = g.with_branch(&virt, &u).map_err(s)?;
        let ul = ultra::ultrametric_ul(&build_lattice(&with_l).map_err(s)?, &virt, &fam).map_err(s)?;
        ensure(uo.space == ul, || format!("instance {i}: U_O differs from U_L at {u}"))?;
    }
    ensure(gated >= 100, || format!("gate held on only {gated} graphs"))
}

fn blown_up_smooth_point(rng: &mut ChaCha8Rng) -> WeightedDualGraph {
    let mut g = WeightedDualGraph::builder()
        .vertex("e0", -1)
        .branch("A", "e0")
        .branch("B", "e0")
        .branch("C", "e0")
        .build()
        .unwrap();
    for _ in 0..rng.gen_range(0..8) {
        let site = match rng.gen_range(0..3) {
            0 => BlowUpSite::FreePoint(g.name(rng.gen_range(0..g.len())).to_string()),
            1 if g.len() > 1 => {
                let edges: Vec<(String, String)> = g.edges().map(|(u, v, _)| (u.into(), v.into())).collect();
                let (u, v) = edges[rng.gen_range(0..edges.len())].clone();
                BlowUpSite::IntersectionPoint(u, v)
            }
            _ => BlowUpSite::BranchPoint(["A", "B", "C"][rng.gen_range(0..3)].to_string()),
        };
        g = g.blow_up(&site).unwrap().0;
    }
    g
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_branchspace"))
            .args(["check", "--seed", "42", "--count", "200"])
            .env("BRANCHSPACE_COLOR", "0")
            .output()
            .map_err(s)
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.code() == Some(0), || format!("exit {:?}", a.status.code()))?;
    ensure(a.stdout == b.stdout && b.status.code() == Some(0), || "outputs differ".into())?;
    ensure(String::from_utf8_lossy(&a.stdout).contains("result: PASS"), || "no PASS line".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("six-vertex tree: determinant products, edge determinants, det(S)", sixtree_golden),
        ("two-valued U_L, ultrametricity, upper bound and tightness", twoval_golden),
        ("closed balls, dated tree, round trip", constree_golden),
        ("non-arborescent and non-metric counterexamples", counterexamples),
        ("determinant products equal adj(-I), continued fractions equal det", oracle_equivalence),
        ("property suites on 200 seeded trees", property_suites),
        ("U_O gate and reduction to U_L", uo_gate),
        ("check --seed 42 --count 200 is byte-deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(()) => println!("PASS {}: {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {name}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
