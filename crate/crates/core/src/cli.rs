//! Command-line surface: `transform`, `verify` and `check`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;

use crate::constraint::{ConstraintSet, LinearConstraint};
use crate::driver::{
    replay_sequence, transform_to_admissible, DriverOptions, TraceStatus, TransformationTrace,
};
use crate::error::{Error, Result};
use crate::expression::LogicExpression;
use crate::marking_set::{
    admissible_by_exploration, admissible_within, bounded_universe, expression_members,
    set_equivalence, Equivalence, Side, DEFAULT_ORACLE_NODES, DEFAULT_UNIVERSE_LIMIT,
};
use crate::net::{Marking, PetriNet, TransitionId};
use crate::netfile::{parse_constraint, parse_net, render_net, NetFile};
use crate::orbit::{uncontrollable_explore, ExploreCaps, ExploreVerdict};
use crate::render::{render_expression, render_trace_text, trace_report, Style, VerdictJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNFINISHED: i32 = 2;
pub const EXIT_UNSATISFIABLE: i32 = 3;
pub const EXIT_COUNTEREXAMPLE: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "admissify",
    version,
    about = "Transform linear marking constraints into admissible logic expressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transform a constraint until no uncontrollable transition can escape it.
    Transform(TransformArgs),
    /// Transform (or take `--against`) and compare with a brute-force oracle.
    Verify(VerifyArgs),
    /// Parse a net file and print it back in canonical form.
    Check {
        #[arg(long)]
        net: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Net description file.
    #[arg(long)]
    net: PathBuf,
    /// Name of a constraint in the net file, or an inline `1 p1 + 2 p2 <= 3`.
    #[arg(long)]
    constraint: String,
    /// Comma-separated transitions to apply instead of the selection rules.
    #[arg(long, value_delimiter = ',')]
    sequence: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    lookahead: usize,
    #[arg(long, default_value_t = 100)]
    max_steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    transform: TransformArgs,
    /// Per-place token bound: `N` for every place, or `p1=N,p2=M,...` naming each place.
    #[arg(long)]
    bound: String,
    /// Check this expression instead of the transformation result; repeat
    /// for a disjunction.
    #[arg(long)]
    against: Vec<String>,
    /// Total markings the shared reachability graph of the oracle may hold.
    #[arg(long, default_value_t = DEFAULT_ORACLE_NODES)]
    node_cap: usize,
    /// Markings one per-marking search may visit (`--exhaustive`).
    #[arg(long, default_value_t = 200_000)]
    state_cap: usize,
    /// Depth limit of the per-marking search used by `--exhaustive`.
    #[arg(long, default_value_t = 10_000)]
    depth_cap: usize,
    /// Decide every marking with its own breadth-first search.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = DEFAULT_UNIVERSE_LIMIT)]
    universe_limit: u128,
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let style = Style {
        color: std::env::var("ADMISSIFY_COLOR").is_ok_and(|v| v == "1"),
    };
    let result = match cli.command {
        Command::Transform(a) => cmd_transform(&a, &style, out),
        Command::Verify(a) => cmd_verify(&a, &style, out),
        Command::Check { net } => load(&net).map(|f| {
            let _ = write!(out, "{}", render_net(&f));
            EXIT_OK
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(path: &PathBuf) -> Result<NetFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_net(&text)
}

/// A named constraint of the file, or an inline one.
fn resolve_constraint(file: &NetFile, spec: &str) -> Result<LinearConstraint> {
    match file.constraints.get(spec.trim()) {
        Some(c) => Ok(c.clone()),
        None if spec.contains("<=") => parse_constraint(&file.net, spec),
        None => Err(Error::Usage(format!("no constraint named `{spec}`"))),
    }
}

fn run_transform(file: &NetFile, a: &TransformArgs) -> Result<TransformationTrace> {
    let c = resolve_constraint(file, &a.constraint)?;
    match &a.sequence {
        Some(names) => {
            let sigma = names
                .iter()
                .map(|n| file.net.transition_id(n.trim()))
                .collect::<Result<Vec<TransitionId>>>()?;
            replay_sequence(&file.net, &c, &sigma)
        }
        None => transform_to_admissible(
            &file.net,
            &c,
            DriverOptions {
                lookahead: a.lookahead,
                max_steps: a.max_steps,
            },
        ),
    }
}

fn status_exit(status: &TraceStatus) -> i32 {
    match status {
        TraceStatus::Complete | TraceStatus::CompleteWithBlocks => EXIT_OK,
        TraceStatus::Unsatisfiable(_) => EXIT_UNSATISFIABLE,
        TraceStatus::StepLimit | TraceStatus::OpenWithBlocks(_) | TraceStatus::Incomplete(_) => {
            EXIT_UNFINISHED
        }
    }
}

fn cmd_transform(a: &TransformArgs, style: &Style, out: &mut dyn Write) -> Result<i32> {
    let file = load(&a.net)?;
    let trace = run_transform(&file, a)?;
    match a.format {
        Format::Text => {
            let _ = write!(out, "{}", render_trace_text(&file.net, &trace, style));
        }
        Format::Json => {
            let report = trace_report(&file.net, &trace);
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
    }
    Ok(status_exit(&trace.status))
}

/// Per-place bounds from `N` or `p=N,...`.
pub fn parse_bounds(net: &PetriNet, spec: &str) -> Result<Vec<u32>> {
    let spec = spec.trim();
    if let Ok(n) = spec.parse::<u32>() {
        return Ok(vec![n; net.place_count()]);
    }
    let mut bounds: Vec<Option<u32>> = vec![None; net.place_count()];
    for item in spec.split(',') {
        let (place, value) = item.split_once('=').ok_or_else(|| {
            Error::Usage(format!("bad bound `{item}`; expected `N` or `place=N`"))
        })?;
        let p = net.place_id(place.trim())?;
        let v = value
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad bound value `{value}`")))?;
        bounds[p.0] = Some(v);
    }
    bounds
        .iter()
        .enumerate()
        .map(|(p, b)| {
            b.ok_or_else(|| {
                Error::Usage(format!("no bound given for place {}", net.place_names()[p]))
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Caps of the per-marking search; also used to recheck counterexamples.
    pub caps: ExploreCaps,
    /// Decide each marking with its own search instead of one shared graph.
    pub exhaustive: bool,
    pub node_cap: usize,
    pub universe_limit: u128,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            caps: ExploreCaps::default(),
            exhaustive: false,
            node_cap: DEFAULT_ORACLE_NODES,
            universe_limit: DEFAULT_UNIVERSE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    /// `admissible` tells which way the expression is wrong at `marking`.
    Counterexample {
        marking: Marking,
        admissible: bool,
    },
    Inconclusive,
}

/// Compares `expr` with the admissible set of `legal` inside the universe
/// given by `bounds`. A counterexample is checked again with an independent
/// search before it is returned.
pub fn verify_expression(
    net: &PetriNet,
    legal: &LinearConstraint,
    expr: &LogicExpression,
    bounds: &[u32],
    oracle: OracleOptions,
) -> Result<(Verdict, usize)> {
    let caps = oracle.caps;
    let universe = bounded_universe(bounds, oracle.universe_limit)?;
    let oracle = if oracle.exhaustive {
        admissible_by_exploration(net, legal, &universe, caps)
    } else {
        admissible_within(net, legal, &universe, oracle.node_cap)
    };
    let oracle = match oracle {
        Ok(set) => set,
        Err(Error::Inconclusive) => return Ok((Verdict::Inconclusive, universe.len())),
        Err(e) => return Err(e),
    };
    let members = expression_members(expr, &universe);
    let verdict = match set_equivalence(&oracle, &members) {
        Equivalence::Equal => Verdict::Equal,
        Equivalence::Counterexample { marking, side } => {
            let in_expr = expr.evaluate(&marking)?;
            let admissible = match uncontrollable_explore(net, &marking, |m| !legal.holds(m), caps)?
            {
                ExploreVerdict::Admissible => true,
                ExploreVerdict::WeaklyForbidden { .. } => false,
                ExploreVerdict::Inconclusive => return Ok((Verdict::Inconclusive, universe.len())),
            };
            let expected = side == Side::Left;
            if admissible != expected || in_expr == admissible {
                return Err(Error::Usage(format!(
                    "oracle disagreement at {marking}: recheck did not confirm the counterexample"
                )));
            }
            Verdict::Counterexample {
                marking,
                admissible,
            }
        }
    };
    Ok((verdict, universe.len()))
}

fn cmd_verify(a: &VerifyArgs, style: &Style, out: &mut dyn Write) -> Result<i32> {
    let file = load(&a.transform.net)?;
    let net = &file.net;
    let legal = resolve_constraint(&file, &a.transform.constraint)?;
    let bounds = parse_bounds(net, &a.bound)?;

    let (trace, expr) = if a.against.is_empty() {
        let trace = run_transform(&file, &a.transform)?;
        if let TraceStatus::Unsatisfiable(_) = trace.status {
            let _ = write!(out, "{}", render_trace_text(net, &trace, style));
            return Ok(EXIT_UNSATISFIABLE);
        }
        let expr = trace.final_expression();
        (Some(trace), expr)
    } else {
        let w = a
            .against
            .iter()
            .map(|s| resolve_constraint(&file, s))
            .collect::<Result<ConstraintSet>>()?;
        (
            None,
            LogicExpression::from_constraints(net.place_count(), &w),
        )
    };

    let options = OracleOptions {
        caps: ExploreCaps {
            states: a.state_cap,
            depth: a.depth_cap,
        },
        exhaustive: a.exhaustive,
        node_cap: a.node_cap,
        universe_limit: a.universe_limit,
    };
    let (verdict, universe_size) = verify_expression(net, &legal, &expr, &bounds, options)?;
    let code = match verdict {
        Verdict::Equal => EXIT_OK,
        Verdict::Counterexample { .. } => EXIT_COUNTEREXAMPLE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    };
    let bound_map: IndexMap<String, u32> = net
        .place_names()
        .iter()
        .cloned()
        .zip(bounds.iter().copied())
        .collect();

    match a.transform.format {
        Format::Text => {
            match &trace {
                Some(trace) => {
                    let _ = write!(out, "{}", render_trace_text(net, trace, style));
                }
                None => {
                    let _ = writeln!(
                        out,
                        "expression\n  {}",
                        render_expression(net, &expr).replace('\n', "\n  ")
                    );
                }
            }
            let bounds_text: Vec<String> =
                bound_map.iter().map(|(p, b)| format!("{p}={b}")).collect();
            let detail = match &verdict {
                Verdict::Equal => "equal".to_string(),
                Verdict::Counterexample {
                    marking,
                    admissible: true,
                } => {
                    format!("counterexample {marking}: admissible but rejected by the expression")
                }
                Verdict::Counterexample {
                    marking,
                    admissible: false,
                } => {
                    format!(
                        "counterexample {marking}: accepted by the expression but not admissible"
                    )
                }
                Verdict::Inconclusive => "inconclusive (exploration cap reached)".to_string(),
            };
            let _ = writeln!(
                out,
                "{} {detail}\n  universe {universe_size} markings, bounds {}, node cap {}, state cap {}",
                if style.color { "\x1b[1mverdict\x1b[0m" } else { "verdict" },
                bounds_text.join(","),
                a.node_cap,
                a.state_cap
            );
        }
        Format::Json => {
            let mut report = match &trace {
                Some(trace) => trace_report(net, trace),
                None => {
                    let empty = TransformationTrace {
                        initial: legal.clone(),
                        steps: Vec::new(),
                        status: TraceStatus::Complete,
                    };
                    let mut r = trace_report(net, &empty);
                    r.final_expression = crate::render::expression_json(net, &expr);
                    r.status = "given";
                    r
                }
            };
            let (result, marking, side) = match &verdict {
                Verdict::Equal => ("equal", None, None),
                Verdict::Counterexample {
                    marking,
                    admissible,
                } => (
                    "counterexample",
                    Some(
                        net.place_names()
                            .iter()
                            .cloned()
                            .zip(marking.0.iter().copied())
                            .collect(),
                    ),
                    Some(if *admissible { "missing" } else { "extra" }),
                ),
                Verdict::Inconclusive => ("inconclusive", None, None),
            };
            report.verdict = Some(VerdictJson {
                result,
                marking,
                side,
                bounds: bound_map,
                universe_size,
                node_cap: a.node_cap,
                state_cap: a.state_cap,
            });
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
    }
    Ok(code)
}
