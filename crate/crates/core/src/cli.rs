//! Command-line front end. [`run`] is the whole program minus process
//! plumbing, so it can be driven from tests.

use std::io::{self, Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::check::{run_check, RunConfig};
use crate::detprod::build_table;
use crate::dualgraph::{parse_graph, WeightedDualGraph};
use crate::error::{Error, ErrorKind};
use crate::exactalg::{rat_compact, rat_json};
use crate::generate::{random_tree, GenOptions, WeightMode};
use crate::lattice::build_lattice;
use crate::treekit::{self, CanonOptions};
use crate::ultra;
use crate::valord::{self, ValKey, ValuationContext};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_CROSSCHECK: i32 = 4;
pub const EXIT_PROPERTY: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "branchspace", version, about = "Exact invariants of branches on resolution graphs")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph file, or `-` for standard input.
    path: String,
}

#[derive(Debug, Args)]
struct BranchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Base branch L.
    #[arg(long)]
    base: String,
    /// Comma-separated branch family (default: every other branch).
    #[arg(long, value_delimiter = ',')]
    family: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a graph: connectivity, negative definiteness, arborescence.
    Validate(GraphArgs),
    /// Intersection matrix I.
    Matrix(GraphArgs),
    /// Dual matrix I^-1 (the pairings E_u*·E_v*).
    Dual(GraphArgs),
    /// Determinant products p(u,v) of a tree.
    Detprod {
        #[command(flatten)]
        graph: GraphArgs,
        /// Skip the comparison with the adjugate.
        #[arg(long)]
        skip_crosscheck: bool,
    },
    /// The function U_L on a branch family.
    Ultrametric(BranchArgs),
    /// Trees of U_L and their comparison with the dual graph.
    Tree(BranchArgs),
    /// Valuative order matrix and valuation tree.
    Valorder(BranchArgs),
    /// U_O for the branches of the graph.
    Uo {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',')]
        family: Option<Vec<String>>,
    },
    /// Run the property suite on seeded random graphs.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
        max_vertices: u64,
        #[arg(long)]
        skip_crosscheck: bool,
        /// Draw weights uniformly and filter by Sylvester's criterion.
        #[arg(long)]
        reject_sample: bool,
        /// Generate graphs with cycles and report witnesses instead.
        #[arg(long)]
        non_arborescent: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Print a seeded random tree.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        vertices: u64,
        #[arg(long)]
        reject_sample: bool,
    },
}

/// Everything a command writes. Keeps I/O out of the command bodies.
struct Ctx<'a> {
    out: &'a mut dyn Write,
    format: Format,
    color: bool,
}

enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = if color { e.render().ansi().to_string() } else { e.render().to_string() };
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut ctx = Ctx { out, format: cli.format, color };
    match dispatch(&mut ctx, cli.command) {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Lib(e) => {
                    let code = match e.kind() {
                        ErrorKind::Input => EXIT_INPUT,
                        ErrorKind::Hypothesis => EXIT_HYPOTHESIS,
                        ErrorKind::CrossCheck => EXIT_CROSSCHECK,
                    };
                    (code, e.to_string())
                }
                Failure::Io(m) | Failure::Usage(m) => (EXIT_INPUT, m),
            };
            let prefix = if color { "\x1b[31merror\x1b[0m" } else { "error" };
            let _ = writeln!(err, "{prefix}: {msg}");
            code
        }
    }
}

fn load(path: &str) -> Result<WeightedDualGraph, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?
    };
    Ok(parse_graph(&text)?)
}

fn family_of(g: &WeightedDualGraph, base: &str, family: Option<Vec<String>>) -> Result<Vec<String>, Failure> {
    g.branch(base)?;
    let fam = family.unwrap_or_else(|| g.branch_names().into_iter().filter(|b| b != base).collect());
    if fam.is_empty() {
        return Err(Error::EmptyFamily.into());
    }
    Ok(fam)
}

fn require_format(ctx: &Ctx, allowed: &[Format]) -> Result<(), Failure> {
    if allowed.contains(&ctx.format) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("format {:?} is not available for this command", ctx.format).to_lowercase()))
    }
}

fn emit_json(ctx: &mut Ctx, v: serde_json::Value) -> CmdResult {
    writeln!(ctx.out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
    Ok(EXIT_OK)
}

/// Right-aligned grid with row and column labels.
fn grid(labels: &[String], cells: &[Vec<String>]) -> String {
    let width = cells.iter().flatten().chain(labels).map(|s| s.chars().count()).max().unwrap_or(1);
    let mut s = format!("{:>width$}", "");
    for l in labels {
        s.push_str(&format!(" {l:>width$}"));
    }
    s.push('\n');
    for (l, row) in labels.iter().zip(cells) {
        s.push_str(&format!("{l:>width$}"));
        for c in row {
            s.push_str(&format!(" {c:>width$}"));
        }
        s.push('\n');
    }
    s
}

fn dispatch(ctx: &mut Ctx, cmd: Command) -> CmdResult {
    match cmd {
        Command::Validate(a) => validate(ctx, &load(&a.path)?),
        Command::Matrix(a) => matrix(ctx, &load(&a.path)?),
        Command::Dual(a) => dual(ctx, &load(&a.path)?),
        Command::Detprod { graph, skip_crosscheck } => detprod(ctx, &load(&graph.path)?, !skip_crosscheck),
        Command::Ultrametric(a) => {
            let g = load(&a.graph.path)?;
            let fam = family_of(&g, &a.base, a.family)?;
            ultrametric(ctx, &g, &a.base, &fam)
        }
        Command::Tree(a) => {
            let g = load(&a.graph.path)?;
            let fam = family_of(&g, &a.base, a.family)?;
            tree(ctx, &g, &a.base, &fam)
        }
        Command::Valorder(a) => {
            let g = load(&a.graph.path)?;
            let fam = family_of(&g, &a.base, a.family)?;
            valorder(ctx, &g, &a.base, &fam)
        }
        Command::Uo { graph, family } => {
            let g = load(&graph.path)?;
            let fam = family.unwrap_or_else(|| g.branch_names());
            uo(ctx, &g, &fam)
        }
        Command::Check { seed, count, max_vertices, skip_crosscheck, reject_sample, non_arborescent, inject_fault } => {
            require_format(ctx, &[Format::Text])?;
            let config = RunConfig {
                seed,
                count,
                max_vertices: max_vertices as usize,
                skip_crosscheck,
                reject_sample,
                non_arborescent,
                inject_fault,
            };
            let report = run_check(&config);
            let text = report.render();
            if ctx.color {
                let text = text
                    .replace("result: PASS", "result: \x1b[32mPASS\x1b[0m")
                    .replace("result: FAIL", "result: \x1b[31mFAIL\x1b[0m");
                write!(ctx.out, "{text}")?;
            } else {
                write!(ctx.out, "{text}")?;
            }
            Ok(if report.failed() { EXIT_PROPERTY } else { EXIT_OK })
        }
        Command::Gen { seed, vertices, reject_sample } => {
            require_format(ctx, &[Format::Text, Format::Json])?;
            let opts = GenOptions {
                vertices: vertices as usize,
                weights: if reject_sample { WeightMode::RejectSample } else { WeightMode::Dominant },
                ..Default::default()
            };
            let g = random_tree(seed, &opts);
            match ctx.format {
                Format::Json => emit_json(ctx, g.to_json()),
                _ => {
                    write!(ctx.out, "{}", g.to_graph_text())?;
                    Ok(EXIT_OK)
                }
            }
        }
    }
}

fn validate(ctx: &mut Ctx, g: &WeightedDualGraph) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let lat = build_lattice(g)?;
    let arborescent = g.is_arborescent();
    if ctx.format == Format::Json {
        return emit_json(
            ctx,
            json!({
                "arborescent": arborescent,
                "negativeDefinite": true,
                "detS": lat.det_s().to_string(),
                "vertices": g.len(),
                "branches": g.branch_names(),
            }),
        );
    }
    let kind = if arborescent { "arborescent" } else { "non-arborescent" };
    writeln!(ctx.out, "{kind}, negative definite, det(S)={}", lat.det_s())?;
    Ok(EXIT_OK)
}

fn matrix(ctx: &mut Ctx, g: &WeightedDualGraph) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let m = g.intersection_matrix();
    if ctx.format == Format::Json {
        return emit_json(ctx, m.to_json());
    }
    let cells: Vec<Vec<String>> = m.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    write!(ctx.out, "{}", grid(m.labels(), &cells))?;
    Ok(EXIT_OK)
}

fn dual(ctx: &mut Ctx, g: &WeightedDualGraph) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let lat = build_lattice(g)?;
    if ctx.format == Format::Json {
        return emit_json(ctx, lat.to_json());
    }
    writeln!(ctx.out, "det(S) = {}", lat.det_s())?;
    let cells: Vec<Vec<String>> = lat.dual().rows().iter().map(|r| r.iter().map(rat_compact).collect()).collect();
    write!(ctx.out, "{}", grid(lat.labels(), &cells))?;
    Ok(EXIT_OK)
}

fn detprod(ctx: &mut Ctx, g: &WeightedDualGraph, crosscheck: bool) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let t = build_table(g, crosscheck)?;
    if ctx.format == Format::Json {
        return emit_json(ctx, t.to_json());
    }
    writeln!(ctx.out, "det(S) = {}", t.det_s())?;
    let n = t.len();
    let cells: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| t.at(i, j).to_string()).collect()).collect();
    write!(ctx.out, "{}", grid(t.labels(), &cells))?;
    Ok(EXIT_OK)
}

fn ultrametric(ctx: &mut Ctx, g: &WeightedDualGraph, base: &str, fam: &[String]) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let lat = build_lattice(g)?;
    let u = ultra::ultrametric_ul(&lat, base, fam)?;
    let class = ultra::classify(&u);
    let witness = ultra::describe_witness(&u, &class);
    if ctx.format == Format::Json {
        let mut v = u.to_json();
        v["base"] = json!(base);
        v["classification"] = json!(class.name());
        v["witness"] = json!(class.witness());
        return emit_json(ctx, v);
    }
    writeln!(ctx.out, "U_{base}")?;
    write!(ctx.out, "{}", u.to_text())?;
    match witness {
        Some(w) => writeln!(ctx.out, "{}: {w}", class.name())?,
        None => writeln!(ctx.out, "{}", class.name())?,
    }
    Ok(EXIT_OK)
}

fn tree(ctx: &mut Ctx, g: &WeightedDualGraph, base: &str, fam: &[String]) -> CmdResult {
    let lat = build_lattice(g)?;
    let u = ultra::ultrametric_ul(&lat, base, fam)?;
    if let Some(w) = ultra::verify_ultrametric(&u) {
        return Err(Error::NotUltrametric(format!("U_{base} fails on ({}, {}, {})", w[0], w[1], w[2])).into());
    }
    let (h, diam) = treekit::closed_balls(&u)?;
    let (interior, end) = treekit::hierarchy_to_trees(&h, &diam)?;
    let topint = if g.is_arborescent() {
        let table = build_table(g, false)?;
        Some(treekit::topint_isomorphism(&lat, &table, base, fam)?)
    } else {
        None
    };
    match ctx.format {
        Format::Dot => {
            write!(ctx.out, "{}", end.to_dot("end_tree"))?;
            Ok(EXIT_OK)
        }
        Format::Json => emit_json(
            ctx,
            json!({
                "base": base,
                "endTree": end.to_json(),
                "interiorTree": interior.to_json(),
                "hierarchy": h.clusters(),
                "diameters": diam.iter().map(|(c, d)| json!({"cluster": c, "diameter": rat_json(d)})).collect::<Vec<_>>(),
                "topint": topint.as_ref().map(|r| r.is_ok()),
            }),
        ),
        Format::Text => {
            writeln!(ctx.out, "end tree:      {}", treekit::canonical_form(&end, CanonOptions::DECORATED))?;
            writeln!(ctx.out, "interior tree: {}", treekit::canonical_form(&interior, CanonOptions::DECORATED))?;
            match &topint {
                Some(r) if r.is_ok() => writeln!(ctx.out, "dual graph: isomorphic")?,
                Some(r) => writeln!(ctx.out, "dual graph: MISMATCH {}", r.mismatches.join("; "))?,
                None => writeln!(ctx.out, "dual graph: not a tree, comparison skipped")?,
            }
            Ok(match &topint {
                Some(r) if !r.is_ok() => EXIT_CROSSCHECK,
                _ => EXIT_OK,
            })
        }
    }
}

fn key_name(k: &ValKey) -> String {
    match k {
        ValKey::Ord(v) => format!("ord_{v}"),
        ValKey::Int(a) => format!("int_{a}"),
    }
}

fn valorder(ctx: &mut Ctx, g: &WeightedDualGraph, base: &str, fam: &[String]) -> CmdResult {
    let vc = ValuationContext::new(g, base)?;
    let (keys, rows) = valord::order_matrix(&vc, fam)?;
    let tree = vc.valuation_tree(base, fam)?;
    let report = valord::compare_valuation_tree(&vc, base, fam)?;
    match ctx.format {
        Format::Dot => write!(ctx.out, "{}", tree.to_dot("valuation_tree"))?,
        Format::Json => {
            emit_json(
                ctx,
                json!({
                    "base": base,
                    "keys": keys.iter().map(key_name).collect::<Vec<_>>(),
                    "order": rows.iter().map(|r| r.iter().map(|c| c.symbol()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "tree": tree.to_json(),
                    "matchesDualTree": report.is_ok(),
                }),
            )?;
        }
        Format::Text => {
            let labels: Vec<String> = keys.iter().map(key_name).collect();
            let cells: Vec<Vec<String>> =
                rows.iter().map(|r| r.iter().map(|c| c.symbol().to_string()).collect()).collect();
            write!(ctx.out, "{}", grid(&labels, &cells))?;
            writeln!(ctx.out, "tree: {}", treekit::canonical_form(&tree, CanonOptions::LABELLED))?;
            if report.is_ok() {
                writeln!(ctx.out, "dual graph: isomorphic")?;
            } else {
                writeln!(ctx.out, "dual graph: MISMATCH {}", report.mismatches.join("; "))?;
            }
        }
    }
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_CROSSCHECK })
}

fn uo(ctx: &mut Ctx, g: &WeightedDualGraph, fam: &[String]) -> CmdResult {
    require_format(ctx, &[Format::Text, Format::Json])?;
    let lat = build_lattice(g)?;
    let r = ultra::ultrametric_uo(&lat, fam)?;
    if fam.is_empty() {
        return Err(Error::EmptyFamily.into());
    }
    let zf = lat.fundamental_cycle();
    let note = "combinatorial criterion only";
    if ctx.format == Format::Json {
        let mut v = r.space.to_json();
        v["note"] = json!(note);
        v["vertex"] = json!(r.vertex);
        v["fundamentalCycle"] = zf.to_json();
        v["multiplicities"] = json!(r.multiplicities.iter().map(rat_json).collect::<Vec<_>>());
        v["classification"] = json!(ultra::classify(&r.space).name());
        return emit_json(ctx, v);
    }
    writeln!(ctx.out, "note: {note}: Z_f = -E_{}*", r.vertex)?;
    let z: Vec<String> = lat.labels().iter().zip(zf.coeffs()).map(|(l, c)| format!("{l}:{}", rat_compact(c))).collect();
    writeln!(ctx.out, "Z_f = {}", z.join(" "))?;
    let m: Vec<String> = fam.iter().zip(&r.multiplicities).map(|(a, m)| format!("{a}:{}", rat_compact(m))).collect();
    writeln!(ctx.out, "m_O = {}", m.join(" "))?;
    writeln!(ctx.out, "U_O")?;
    write!(ctx.out, "{}", r.space.to_text())?;
    let class = ultra::classify(&r.space);
    match ultra::describe_witness(&r.space, &class) {
        Some(w) => writeln!(ctx.out, "{}: {w}", class.name())?,
        None => writeln!(ctx.out, "{}", class.name())?,
    }
    Ok(EXIT_OK)
}
