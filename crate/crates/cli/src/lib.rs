//! The `topiso` command line. [`run`] does all the work so that tests can
//! drive it in-process; `main` only wires it to the real streams.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topiso::closure::{closure_of, find_initial_set, InitialSetResult};
use topiso::decompose::{tree_decomposition, DecompositionOutcome};
use topiso::format::{graph_from_json, parse_graph, serialize_coloring};
use topiso::generate::Family;
use topiso::iso::{automorphism_group, isomorphisms_with_stats, IsoOutcome, IsoParams, Side};
use topiso::oracle::{brute_iso, has_topological_kh, reference_refine, OracleBudget};
use topiso::refine::wl;
use topiso::report::{bench, bench_table, outcome_name, BenchSpec, ReportParams, RunReport, Timings};
use topiso::{ColoredGraph, IsoError, Permutation, TupleColoring};

pub const EXIT_ISOMORPHIC: i32 = 0;
pub const EXIT_NON_ISOMORPHIC: i32 = 1;
pub const EXIT_DETECTED: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
/// Malformed or unsupported input data.
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "topiso", version, about = "Isomorphism testing for graphs excluding a topological clique")]
struct Cli {
    /// Emit one JSON report per line instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice (bench corpora).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    /// Order of the excluded topological clique.
    #[arg(long)]
    h: usize,
    /// Closure threshold; defaults to 144 * adeg^2 * h^5.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, default_value_t = 2)]
    adeg: u64,
    /// Node budget for the search.
    #[arg(long)]
    budget: Option<u64>,
}

impl EngineArgs {
    fn params(&self) -> IsoParams {
        let mut p = IsoParams::new(self.h);
        p.closure.a_deg = self.adeg;
        if let Some(t) = self.t {
            p = p.with_t(t);
        }
        if let Some(b) = self.budget {
            p = p.with_budget(b);
        }
        p
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DecomposeFormat {
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stable coloring of Color Refinement (k = 1) or k-WL.
    Refine {
        graph: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        k: u8,
        /// Print the full tuple coloring.
        #[arg(long)]
        full: bool,
    },
    /// The t-closure of a vertex set.
    Closure {
        graph: PathBuf,
        #[arg(long)]
        t: u64,
        #[arg(long, value_delimiter = ',')]
        individualize: Vec<usize>,
    },
    /// The initial color class X, or DETECTED.
    InitialSet {
        graph: PathBuf,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long, default_value_t = 2)]
        adeg: u64,
        /// Check X inside cl(v) for every v in X.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Isomorphisms between two graphs. Exit code 0 isomorphic, 1 not,
    /// 2 topological clique detected, 3 budget exhausted.
    Iso {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Print one isomorphism as an image list.
        #[arg(long)]
        witness: bool,
        /// Print generators and order of the automorphism group of the first graph.
        #[arg(long)]
        aut: bool,
    },
    /// Automorphism group generators and order.
    Aut {
        graph: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Tree decomposition read off the recursion.
    Decompose {
        graph: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, value_enum, default_value_t = DecomposeFormat::Json)]
        format: DecomposeFormat,
    },
    /// Runs the isomorphism test on permuted copies from generator families.
    Bench {
        /// Family descriptor such as `random_max_degree(20,3)`; repeatable.
        #[arg(long = "family", value_parser = parse_family)]
        families: Vec<Family>,
        /// Instances per family.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Slow reference implementations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Backtracking isomorphism search.
    Iso { first: PathBuf, second: PathBuf },
    /// Whether the graph contains a subdivision of K_h (h <= 5).
    Topo {
        graph: PathBuf,
        #[arg(long)]
        h: usize,
    },
    /// Naive refinement.
    Refine {
        graph: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        k: u8,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).map_err(|e| e.to_string())
}

/// A failed command: exit code and message for standard error.
struct Failure(i32, String);

impl From<IsoError> for Failure {
    fn from(e: IsoError) -> Self {
        match e {
            IsoError::Budget(_) => Failure(EXIT_BUDGET, e.to_string()),
            IsoError::Internal(_) => Failure(EXIT_INTERNAL, e.to_string()),
            _ => Failure(EXIT_DATA, e.to_string()),
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure(EXIT_DATA, e.to_string())
}

/// Reads a graph in the text format, or JSON when the file starts with `{`.
fn load(path: &Path) -> Result<ColoredGraph, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))?;
    let json = bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
    let parsed = if json { graph_from_json(&bytes) } else { parse_graph(&bytes) };
    parsed.map_err(|e| Failure(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn images(p: &Permutation) -> String {
    p.images().iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Exit code for an isomorphism outcome.
pub fn outcome_code(o: &IsoOutcome) -> i32 {
    match o {
        IsoOutcome::Isomorphic(_) => EXIT_ISOMORPHIC,
        IsoOutcome::NonIsomorphic => EXIT_NON_ISOMORPHIC,
        IsoOutcome::Detected(_) => EXIT_DETECTED,
    }
}

struct Output {
    report: RunReport,
    /// Text lines for the human-readable mode.
    text: Vec<String>,
    code: i32,
    /// Print `text` even in JSON mode; bench emits its own reports.
    text_only: bool,
}

impl Output {
    fn new(report: RunReport) -> Self {
        Output { report, text: Vec::new(), code: 0, text_only: false }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }
}

fn class_summary(c: &TupleColoring, out: &mut Output) {
    let mut sizes = c.class_sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    out.line(format!("{} classes", c.num_colors()));
    out.line(format!("class sizes: {}", list(&sizes)));
    out.report.outcome = format!("{} classes", c.num_colors());
    out.report.detail("classes", c.num_colors());
    out.report.detail("class_sizes", list(&sizes));
    out.report.peak_classes = c.num_colors();
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Refine { graph, k, full } => {
            let g = load(graph)?;
            let c = wl(&g, *k as usize).map_err(data)?;
            let mut out = Output::new(RunReport::new("refine"));
            out.report.inputs = vec![name(graph)];
            out.report.params.k = Some(*k as usize);
            class_summary(&c, &mut out);
            out.report.detail("rounds", c.rounds());
            if *full {
                let text = serialize_coloring(&c);
                out.report.detail("coloring", text.trim_end());
                out.line(text.trim_end().to_string());
            }
            out
        }
        Command::Closure { graph, t, individualize } => {
            let g = load(graph)?;
            let mut x = individualize.clone();
            x.sort_unstable();
            x.dedup();
            let cl = closure_of(&g, *t, &x).map_err(data)?;
            let mut out = Output::new(RunReport::new("closure"));
            out.report.inputs = vec![name(graph)];
            out.report.params.t = Some(*t);
            out.report.outcome = format!("{} vertices", cl.len());
            out.report.detail("closure", list(&cl));
            out.line(format!("closure ({} vertices): {}", cl.len(), list(&cl)));
            out
        }
        Command::InitialSet { graph, h, t, adeg, exhaustive } => {
            let g = load(graph)?;
            let mut params = IsoParams::new(*h).closure;
            params.a_deg = *adeg;
            params.exhaustive_check = *exhaustive;
            if let Some(t) = t {
                params = params.with_t(*t);
            }
            let found = find_initial_set(&g, &params).map_err(data)?;
            let mut out = Output::new(RunReport::new("initial-set"));
            out.report.inputs = vec![name(graph)];
            out.report.params =
                ReportParams { h: Some(*h), t: Some(params.t()), a_deg: Some(*adeg), ..ReportParams::default() };
            match found {
                InitialSetResult::Found { x, c0, .. } => {
                    out.report.outcome = "found".into();
                    out.report.detail("c0", c0);
                    out.report.detail("size", x.len());
                    out.report.detail("x", list(&x));
                    out.line(format!("c0 {c0}"));
                    out.line(format!("|X| {}", x.len()));
                    out.line(format!("X {}", list(&x)));
                }
                InitialSetResult::Detected => {
                    out.report.outcome = "detected".into();
                    out.line("DETECTED");
                    out.code = EXIT_DETECTED;
                }
            }
            out
        }
        Command::Iso { first, second, engine, witness, aut } => {
            let (g1, g2) = (load(first)?, load(second)?);
            let params = engine.params();
            let mut out = Output::new(RunReport::new("iso"));
            out.report.inputs = vec![name(first), name(second)];
            out.report.params = ReportParams::of_iso(&params, Some(cli.seed));
            match isomorphisms_with_stats(&g1, &g2, &params) {
                Ok((outcome, stats)) => {
                    out.code = outcome_code(&outcome);
                    out.report.outcome = outcome_name(&outcome);
                    out.report.nodes = stats.nodes;
                    out.report.peak_classes = stats.peak_classes;
                    out.report.detail("max_depth", stats.max_depth);
                    out.report.timings = Timings::from_stats(&stats, start.elapsed());
                    match &outcome {
                        IsoOutcome::Isomorphic(c) => {
                            out.line("isomorphic");
                            out.report.detail("isomorphisms", c.size());
                            out.line(format!("isomorphisms: {}", c.size()));
                            if *witness {
                                let rep = c.representative().expect("non-empty coset");
                                out.report.detail("witness", images(rep));
                                out.line(format!("witness: {}", images(rep)));
                            }
                            if *aut {
                                let group = c.group();
                                out.report.detail("aut_order", group.order());
                                out.line(format!("aut order: {}", group.order()));
                                for g in group.generators() {
                                    out.report.detail("generator", g.to_cycle_string());
                                    out.line(format!("generator: {}", g.to_cycle_string()));
                                }
                            }
                        }
                        IsoOutcome::NonIsomorphic => out.line("non-isomorphic"),
                        IsoOutcome::Detected(side) => {
                            let which = if *side == Side::First { "first" } else { "second" };
                            out.line(format!("detected: the {which} graph contains a topological K_{}", engine.h));
                        }
                    }
                }
                Err(IsoError::Budget(b)) => {
                    out.code = EXIT_BUDGET;
                    out.report.outcome = "budget".into();
                    out.report.detail("budget", b);
                    out.line(format!("budget of {b} nodes exhausted"));
                }
                Err(e) => return Err(e.into()),
            }
            out
        }
        Command::Aut { graph, engine } => {
            let g = load(graph)?;
            let params = engine.params();
            let group = automorphism_group(&g, &params)?;
            let mut out = Output::new(RunReport::new("aut"));
            out.report.inputs = vec![name(graph)];
            out.report.params = ReportParams::of_iso(&params, Some(cli.seed));
            out.report.outcome = group.order().to_string();
            out.line(format!("order: {}", group.order()));
            out.report.detail("order", group.order());
            for p in group.generators() {
                out.report.detail("generator", p.to_cycle_string());
                out.line(format!("generator: {}", p.to_cycle_string()));
            }
            out
        }
        Command::Decompose { graph, engine, format } => {
            let g = load(graph)?;
            let params = engine.params();
            let mut out = Output::new(RunReport::new("decompose"));
            out.report.inputs = vec![name(graph)];
            out.report.params = ReportParams::of_iso(&params, Some(cli.seed));
            match tree_decomposition(&g, &params)? {
                DecompositionOutcome::Tree(root) => {
                    out.report.outcome = "tree".into();
                    out.report.detail("nodes", root.nodes().len());
                    out.report.detail("adhesion", root.adhesion_width());
                    let text = match format {
                        DecomposeFormat::Json => root.to_json(),
                        DecomposeFormat::Dot => root.to_dot(),
                    };
                    out.report.detail("tree", text.trim_end());
                    out.line(text.trim_end().to_string());
                }
                DecompositionOutcome::Detected => {
                    out.code = EXIT_DETECTED;
                    out.report.outcome = "detected".into();
                    out.line("DETECTED");
                }
            }
            out
        }
        Command::Bench { families, count, engine } => {
            let spec = BenchSpec { families: families.clone(), count: *count, seed: cli.seed };
            let reports = bench(&spec, &engine.params()).map_err(data)?;
            let mut out = Output::new(RunReport::new("bench"));
            out.report.outcome = format!("{} instances", reports.len());
            if cli.json {
                out.text = reports.iter().map(RunReport::to_json).collect();
            } else if !reports.is_empty() {
                out.line(bench_table(&reports).trim_end().to_string());
            }
            out.text_only = true;
            out
        }
        Command::Oracle(cmd) => match cmd {
            OracleCommand::Iso { first, second } => {
                let (g1, g2) = (load(first)?, load(second)?);
                let c = brute_iso(&g1, &g2, &OracleBudget::iso()).map_err(data)?;
                let mut out = Output::new(RunReport::new("oracle iso"));
                out.report.inputs = vec![name(first), name(second)];
                if c.is_empty() {
                    out.report.outcome = "non-isomorphic".into();
                    out.line("non-isomorphic");
                    out.code = EXIT_NON_ISOMORPHIC;
                } else {
                    out.report.outcome = "isomorphic".into();
                    out.report.detail("isomorphisms", c.size());
                    out.line("isomorphic");
                    out.line(format!("isomorphisms: {}", c.size()));
                }
                out
            }
            OracleCommand::Topo { graph, h } => {
                let g = load(graph)?;
                let found = has_topological_kh(&g, *h, &OracleBudget::topo()).map_err(data)?;
                let mut out = Output::new(RunReport::new("oracle topo"));
                out.report.inputs = vec![name(graph)];
                out.report.params.h = Some(*h);
                out.report.outcome = if found { "present" } else { "absent" }.into();
                out.line(format!("topological K_{h}: {}", out.report.outcome));
                out
            }
            OracleCommand::Refine { graph, k } => {
                let g = load(graph)?;
                let c = reference_refine(&g, *k as usize).map_err(data)?;
                let mut out = Output::new(RunReport::new("oracle refine"));
                out.report.inputs = vec![name(graph)];
                out.report.params.k = Some(*k as usize);
                class_summary(&c, &mut out);
                out
            }
        },
    };
    if out.report.timings.total_us == 0 {
        out.report.timings.total_us = start.elapsed().as_micros().min(u64::MAX as u128) as u64;
    }
    Ok(out)
}

/// Runs the command line `args` (without the program name) and returns the
/// exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("topiso")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if cli.json && !out.text_only {
                let _ = writeln!(stdout, "{}", out.report.to_json());
            } else {
                for line in &out.text {
                    let _ = writeln!(stdout, "{line}");
                }
            }
            out.code
        }
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "topiso: {msg}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn outcome_codes() {
        assert_eq!(outcome_code(&IsoOutcome::NonIsomorphic), 1);
        assert_eq!(outcome_code(&IsoOutcome::Detected(Side::Second)), 2);
        assert_eq!(Failure::from(IsoError::Budget(5)).0, EXIT_BUDGET);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["refine", "--bogus", "x"]).0, EXIT_USAGE);
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["refine", "--k", "4", "x"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn missing_file_is_io_error() {
        let (code, _, err) = run_str(&["refine", "/nonexistent/graph.grf"]);
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("/nonexistent/graph.grf"));
    }

    #[test]
    fn empty_bench_prints_nothing() {
        let (code, out, _) = run_str(&["bench", "--h", "5"]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
    }
}
