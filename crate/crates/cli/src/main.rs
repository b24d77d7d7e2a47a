//! `hors`: parse, evaluate, analyze and transform higher-order recursion schemes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hors::typesys::render_environment;
use hors::{
    bar_scheme, derive, evaluate_from, evaluate_traced, label_scheme, parse, parse_term, render,
    self_correct, EvalBudget, Policy, Scheme, Semantics, SizeReport, Term,
};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "hors",
    version,
    about = "Higher-order recursion scheme toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a scheme.
    Check(Common),
    /// Print one derivation as a step dump.
    Derive(EvalArgs),
    /// Print a depth-truncated prefix of the value tree.
    Valuetree(EvalArgs),
    /// Print the greatest fixpoint of the type environment.
    Analyze(Common),
    /// Transform a scheme between evaluation policies.
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Scheme file.
    input: PathBuf,
    /// Write results here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = PolicyArg::Any)]
    policy: PolicyArg,
    /// Truncation depth of the value tree.
    #[arg(long, default_value_t = 5)]
    depth: usize,
    /// Maximum number of rewrite steps.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Maximum size of an intermediate term.
    #[arg(long = "max-term", default_value_t = 100_000)]
    max_term: usize,
    /// Start from this closed ground term instead of the start symbol.
    #[arg(long, value_name = "TERM")]
    start: Option<String>,
    /// Also emit the derivation dump (to standard error for `valuetree`).
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    common: Common,
    /// Target evaluation policy.
    #[arg(long, value_enum)]
    to: Target,
    /// Write the size report of `--to oi` here instead of standard error.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Drop rules unreachable from the start symbol.
    #[arg(long)]
    prune: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Oi,
    Io,
    Any,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Oi => Policy::Oi,
            PolicyArg::Io => Policy::Io,
            PolicyArg::Any => Policy::Unrestricted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Io,
    Oi,
}

/// A domain failure: reported on standard error, exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Terms and trees are processed recursively; give deep ones room.
    let worker = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(move || run(cli))
        .expect("spawn worker thread");
    match worker.join() {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check(c) => check(&c),
        Command::Derive(a) => derive_cmd(&a),
        Command::Valuetree(a) => valuetree(&a),
        Command::Analyze(c) => analyze(&c),
        Command::Transform(a) => transform(&a),
    }
}

fn load(path: &Path) -> Result<Scheme, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let g = parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    if let Err(diags) = g.validate() {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Failure(format!(
            "{}: invalid scheme\n  {}",
            path.display(),
            lines.join("\n  ")
        )));
    }
    Ok(g)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, mut v: Value) -> Outcome {
    v["version"] = json!(FORMAT_VERSION);
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    emit(out, &text)
}

fn check(c: &Common) -> Outcome {
    let g = load(&c.input)?;
    let active = g
        .nonterminals()
        .iter()
        .filter(|n| !g.is_inert(n.name()))
        .count();
    match c.format {
        Format::Text => emit(
            c.out.as_deref(),
            &format!("ok: order {}, {} nonterminals\n", g.order(), active),
        ),
        Format::Structured => emit_json(
            c.out.as_deref(),
            json!({
                "command": "check",
                "order": g.order(),
                "nonterminals": g.nonterminals().iter().map(|n| json!({
                    "name": n.name(),
                    "type": n.ty().to_string(),
                    "inert": g.is_inert(n.name()),
                })).collect::<Vec<_>>(),
                "rules": g.rules().len(),
            }),
        ),
    }
}

fn start_term(g: &Scheme, a: &EvalArgs) -> Result<Term, Failure> {
    match &a.start {
        Some(s) => Ok(parse_term(g, s).map_err(|e| Failure(format!("--start: {e}")))?),
        None => Ok(g.start_term()),
    }
}

fn budget(a: &EvalArgs) -> EvalBudget {
    EvalBudget::new(a.steps, a.max_term, a.depth)
}

fn warn_exhausted(exhausted: bool) {
    if exhausted {
        eprintln!("warning: evaluation budget exhausted; the result is a lower bound");
    }
}

fn derive_cmd(a: &EvalArgs) -> Outcome {
    let g = load(&a.common.input)?;
    let t = start_term(&g, a)?;
    let trace = derive(&g, &t, a.policy.into(), &budget(a), None)?;
    warn_exhausted(trace.exhausted_budget);
    match a.common.format {
        Format::Text => {
            let mut text = trace.dump();
            text.push_str(&format!("final: {}\n", trace.final_term()));
            emit(a.common.out.as_deref(), &text)
        }
        Format::Structured => emit_json(
            a.common.out.as_deref(),
            json!({
                "command": "derive",
                "policy": Policy::from(a.policy).to_string(),
                "start": trace.start.to_string(),
                "steps": trace.steps.iter().map(|s| json!({
                    "position": s.redex.position.to_string(),
                    "nonterminal": s.redex.nonterminal.name(),
                    "oi": s.redex.is_oi,
                    "io": s.redex.is_io,
                    "result": s.after.to_string(),
                })).collect::<Vec<_>>(),
                "final": trace.final_term().to_string(),
                "exhausted_budget": trace.exhausted_budget,
            }),
        ),
    }
}

fn valuetree(a: &EvalArgs) -> Outcome {
    let g = load(&a.common.input)?;
    let t = start_term(&g, a)?;
    let report = if a.trace {
        let (report, trace) = evaluate_traced(&g, &t, a.policy.into(), &budget(a))?;
        eprint!("{}", trace.dump());
        report
    } else {
        evaluate_from(&g, &t, a.policy.into(), &budget(a))?
    };
    warn_exhausted(report.exhausted_budget);
    match a.common.format {
        Format::Text => emit(a.common.out.as_deref(), &report.tree.render_indented()),
        Format::Structured => emit_json(
            a.common.out.as_deref(),
            json!({
                "command": "valuetree",
                "policy": Policy::from(a.policy).to_string(),
                "depth": a.depth,
                "steps": report.steps,
                "exhausted_budget": report.exhausted_budget,
                "tree": report.tree.to_record(),
            }),
        ),
    }
}

fn analyze(c: &Common) -> Outcome {
    let g = load(&c.input)?;
    let sem = Semantics::new(&g)?;
    let theta = sem.theta_star();
    match c.format {
        Format::Text => emit(c.out.as_deref(), &render_environment(&g, &theta.env)),
        Format::Structured => {
            let env: Vec<Value> = g
                .nonterminals()
                .iter()
                .filter_map(|n| {
                    theta.env.get(n.name()).map(|conj| {
                        json!({
                            "nonterminal": n.name(),
                            "atoms": conj.atoms().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                        })
                    })
                })
                .collect();
            emit_json(
                c.out.as_deref(),
                json!({
                    "command": "analyze",
                    "iterations": theta.iterations,
                    "environment": env,
                }),
            )
        }
    }
}

fn transform(a: &TransformArgs) -> Outcome {
    let g = load(&a.common.input)?;
    let (result, report) = match a.to {
        Target::Io => (bar_scheme(&g)?, None),
        Target::Oi => {
            let labelled = label_scheme(&g)?;
            let corrected = self_correct(&labelled);
            let report = SizeReport::new(&labelled, &corrected)?;
            (corrected, Some(report))
        }
    };
    let result = if a.prune {
        result.prune_unreachable()
    } else {
        result
    };
    if let Some(r) = &report {
        match &a.report {
            Some(p) => emit(Some(p), &r.render())?,
            None => eprint!("{}", r.render()),
        }
    }
    match a.common.format {
        Format::Text => emit(a.common.out.as_deref(), &render(&result)),
        Format::Structured => emit_json(
            a.common.out.as_deref(),
            json!({
                "command": "transform",
                "to": match a.to { Target::Io => "io", Target::Oi => "oi" },
                "scheme": render(&result),
                "report": report.as_ref().map(|r| json!({
                    "rules_before": r.rules_before,
                    "rules_after": r.rules_after,
                    "nonterminals_before": r.nonterminals_before,
                    "nonterminals_after": r.nonterminals_after,
                    "nbvar": r.nbvar.iter().map(|(t, n)| json!({"type": t.to_string(), "count": n})).collect::<Vec<_>>(),
                    "voided": r.voided,
                })),
            }),
        ),
    }
}
