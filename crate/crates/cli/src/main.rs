//! `corec`: classify, transform, emit and evaluate corecursive programs.
//!
//! Exit status: 0 on success, 1 when a requested check comes out negative
//! or undecided, 2 on usage, input or parse errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corec_core::analysis::{analyze, Analysis};
use corec_core::ast::{Decl, Program};
use corec_core::emit::{emit_program, emit_report};
use corec_core::eval::{check_equation, Bisim, Decision, EquationVerdict, EvalError, InfiniteVerdict, Machine, Sem, Value};
use corec_core::guard::{StructuralVerdict, Verdict};
use corec_core::pretty;
use corec_core::syntax::{parse_args, parse_closed, parse_observation, parse_program};
use corec_core::transform::{PreBranch, TransformArtifacts};
use serde_json::json;

#[derive(Parser)]
#[command(name = "corec", version, about = "Guardedness analysis and transformation of corecursive definitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Program source file.
    file: PathBuf,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct Budget {
    /// Evaluation fuel: clause selections allowed.
    #[arg(long, env = "COREC_FUEL", default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    fuel: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every definition.
    Check {
        #[command(flatten)]
        input: Input,
        /// Fail when any definition is rejected.
        #[arg(long)]
        strict: bool,
    },
    /// Show the components generated for transformable definitions.
    Transform {
        #[command(flatten)]
        input: Input,
        /// Only this definition.
        #[arg(long)]
        fun: Option<String>,
    },
    /// Write the proof-assistant script and its JSON report.
    Emit {
        #[command(flatten)]
        input: Input,
        /// Script path; defaults to the input with a `.v` suffix.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the script instead of writing files.
        #[arg(long)]
        stdout: bool,
    },
    /// Evaluate `nth(N, E)`, `fetch([L,R,..], E)`, `take(N, E)` or a value.
    Run {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Decide whether the first guarded step is reachable.
    Eventually {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        fun: String,
        /// Comma separated arguments.
        #[arg(long, default_value = "")]
        args: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Check productivity for a bounded number of steps.
    Infinite {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        fun: String,
        #[arg(long, default_value = "")]
        args: String,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        /// Fuel for each step.
        #[command(flatten)]
        budget: Budget,
    },
    /// Compare two codata values to a bounded depth.
    Bisim {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compare a transformed definition with its defining clauses.
    Eqcheck {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        fun: String,
        #[arg(long, default_value = "")]
        args: String,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        budget: Budget,
    },
}

/// Why a command did not succeed.
enum Failure {
    /// A negative or undecided answer to a requested check.
    Negative,
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load(path: &Path) -> Result<(Program, Analysis), Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let prog = parse_program(&src).map_err(|d| usage(format!("{}:\n{d}", path.display())))?;
    let analysis = analyze(&prog);
    Ok((prog, analysis))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Check { input, strict } => check(&input, strict),
        Command::Transform { input, fun } => transform(&input, fun.as_deref()),
        Command::Emit { input, output, stdout } => emit(&input, output, stdout),
        Command::Run { input, expr, budget } => observe(&input, &expr, budget.fuel),
        Command::Eventually { input, fun, args, budget } => eventually(&input, &fun, &args, budget.fuel),
        Command::Infinite { input, fun, args, steps, budget } => infinite(&input, &fun, &args, steps as usize, budget.fuel),
        Command::Bisim { input, lhs, rhs, depth, budget } => bisim(&input, &lhs, &rhs, depth as usize, budget.fuel),
        Command::Eqcheck { input, fun, args, depth, budget } => eqcheck(&input, &fun, &args, depth as usize, budget.fuel),
    }
}

/// Prints a verdict line or its JSON form; `ok` decides the exit status.
fn verdict(json: bool, label: &str, text: &str, ok: bool) -> Outcome {
    if json {
        println!("{}", serde_json::to_string_pretty(&json!({"verdict": label, "detail": text})).unwrap());
    } else {
        println!("{text}");
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn check(input: &Input, strict: bool) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let mut rejected = false;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for d in &prog.decls {
        match d {
            Decl::Fun(f) => {
                let c = &analysis.classifications[&f.name];
                rejected |= c.verdict.is_rejected();
                rows.push((f.name.clone(), f.kind.to_string(), c.verdict.to_string()));
                notes.extend(c.diagnostics.iter().cloned());
            }
            Decl::Rec(r) => {
                let v = &analysis.structural[&r.name];
                let label = match v {
                    StructuralVerdict::Accepted { .. } => "Accepted",
                    StructuralVerdict::Rejected { reason, .. } => {
                        rejected = true;
                        notes.push(reason.clone());
                        "Rejected"
                    }
                };
                rows.push((r.name.clone(), "rec".into(), label.into()));
            }
            _ => {}
        }
    }
    if input.json {
        println!("{}", emit_report(&prog, &analysis));
    } else {
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (name, kind, v) in &rows {
            println!("{name:width$}  {kind:5}  {v}");
        }
        if !notes.is_empty() {
            println!();
            for n in &notes {
                println!("{n}");
            }
        }
    }
    if strict && rejected {
        Err(Failure::Negative)
    } else {
        Ok(())
    }
}

fn artifact_json(art: &TransformArtifacts) -> serde_json::Value {
    let clauses: Vec<_> = art
        .pre
        .clauses
        .iter()
        .zip(&art.eventually.ctors)
        .map(|(c, ev)| {
            let step = art.lemmas.steps.iter().find(|s| s.cond.clause == c.cond.clause).map(|s| s.name.clone());
            match &c.branch {
                PreBranch::Produce(head) => json!({
                    "clause": c.cond.clause + 1,
                    "eventually_ctor": ev.name,
                    "kind": "produce",
                    "head": head.shape(),
                    "step_lemma": step,
                }),
                PreBranch::Recurse { inversion, .. } => json!({
                    "clause": c.cond.clause + 1,
                    "eventually_ctor": ev.name,
                    "kind": "recurse",
                    "inversion": inversion,
                    "step_lemma": step,
                }),
            }
        })
        .collect();
    json!({
        "name": art.fun,
        "verdict": art.verdict,
        "artifact_names": art.names(),
        "counts": art.counts(),
        "clauses": clauses,
    })
}

fn transform(input: &Input, only: Option<&str>) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    if let Some(f) = only {
        match analysis.verdict(f) {
            None => return Err(usage(format!("no fun or cofun named `{f}`"))),
            Some(v) if analysis.artifacts(f).is_none() => return Err(usage(format!("`{f}` is {v} and cannot be transformed"))),
            _ => {}
        }
    }
    let selected: Vec<&TransformArtifacts> = prog
        .funs()
        .filter(|f| only.is_none_or(|o| o == f.name))
        .filter(|f| only.is_some() || analysis.verdict(&f.name) == Some(Verdict::TransformableUnguarded))
        .filter_map(|f| analysis.artifacts(&f.name))
        .collect();
    if input.json {
        let all: Vec<_> = selected.iter().map(|a| artifact_json(a)).collect();
        println!("{}", serde_json::to_string_pretty(&json!({ "transformed": all })).unwrap());
        return Ok(());
    }
    for (i, art) in selected.iter().enumerate() {
        if i > 0 {
            println!();
        }
        let c = art.counts();
        println!("{}: {}", art.fun, art.verdict);
        println!("  {} ({} constructors)", art.eventually.name, c.eventually_ctors);
        for (pc, ev) in art.pre.clauses.iter().zip(&art.eventually.ctors) {
            let what = match &pc.branch {
                PreBranch::Produce(head) => format!("produces {}", head.shape()),
                PreBranch::Recurse { inversion, .. } => format!("recurses via {inversion}"),
            };
            println!("    {}: clause {}, {what}", ev.name, pc.cond.clause + 1);
        }
        println!("  {} (self calls: {})", art.pre.name, c.pre_self_calls);
        println!("  {} ({})", art.infinite.name, art.infinite.ctor);
        println!("  {}, evidence erased:", art.guarded.name);
        let erased = art.guarded.erased();
        for ((clause, _), c) in art.guarded.branches.iter().zip(&erased.clauses) {
            println!("    clause {}: {}", clause + 1, pretty::co_named(&c.body, Some(&art.guarded.name)));
        }
        let l = &art.lemmas;
        let mut lemmas = vec![l.infinite_eventually.clone(), l.infinite_always.clone(), l.pre_irrelevant.clone(), l.fun_irrelevant.clone()];
        lemmas.extend(l.steps.iter().map(|s| s.name.clone()));
        lemmas.push(l.equation.clone());
        println!("  lemmas: {}", lemmas.join(", "));
    }
    Ok(())
}

fn emit(input: &Input, output: Option<PathBuf>, stdout: bool) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let script = emit_program(&prog, &analysis);
    let report = emit_report(&prog, &analysis);
    if stdout {
        print!("{script}");
        if input.json {
            println!("{report}");
        }
        return Ok(());
    }
    let out = output.unwrap_or_else(|| input.file.with_extension("v"));
    std::fs::write(&out, &script).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    if input.json {
        println!("{report}");
        eprintln!("wrote {}", out.display());
    } else {
        let sidecar = out.with_extension("report.json");
        std::fs::write(&sidecar, format!("{report}\n")).map_err(|e| usage(format!("{}: {e}", sidecar.display())))?;
        println!("wrote {} and {}", out.display(), sidecar.display());
    }
    Ok(())
}

/// Maps an evaluation failure to its exit status: definitive failures and
/// fuel exhaustion are negative answers, unknown names are usage errors.
fn eval_failure(json: bool, e: EvalError) -> Failure {
    match e {
        EvalError::Unknown(_) | EvalError::NotTransformable(_) => usage(e),
        EvalError::FuelExhausted => verdict(json, "Unknown", "Unknown (fuel exhausted)", false).unwrap_err(),
        other => verdict(json, "Error", &other.to_string(), false).unwrap_err(),
    }
}

fn observe(input: &Input, expr: &str, fuel: u64) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let obs = parse_observation(&prog, expr).map_err(usage)?;
    let m = Machine::new(&prog, &analysis, fuel);
    let shown = m.observe(&obs, Sem::Transformed, 10);
    match shown {
        Ok(s) => verdict(input.json, "Value", &s, true),
        Err(e) => Err(eval_failure(input.json, e)),
    }
}

fn call_args(prog: &Program, m: &Machine, fun: &str, args: &str) -> Result<Vec<Value>, Failure> {
    if prog.fun(fun).is_none() {
        return Err(usage(format!("no fun or cofun named `{fun}`")));
    }
    let parsed = parse_args(prog, fun, args).map_err(usage)?;
    m.closed_args(&parsed, Sem::Transformed).map_err(usage)
}

fn eventually(input: &Input, fun: &str, args: &str, fuel: u64) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let m = Machine::new(&prog, &analysis, fuel);
    let vals = call_args(&prog, &m, fun, args)?;
    let d = m.decide_eventually(fun, vals).map_err(|e| eval_failure(input.json, e))?;
    verdict(input.json, d.label(), &d.to_string(), matches!(d, Decision::Holds(_)))
}

fn infinite(input: &Input, fun: &str, args: &str, steps: usize, fuel: u64) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let m = Machine::new(&prog, &analysis, fuel);
    let vals = call_args(&prog, &m, fun, args)?;
    let v = m.check_infinite(fun, vals, steps, fuel).map_err(|e| eval_failure(input.json, e))?;
    let label = match v {
        InfiniteVerdict::BoundedVerified(_) => "BoundedVerified",
        InfiniteVerdict::DefinitelyNotProductive { .. } => "DefinitelyNotProductive",
        InfiniteVerdict::Unknown { .. } => "Unknown",
    };
    verdict(input.json, label, &v.to_string(), matches!(v, InfiniteVerdict::BoundedVerified(_)))
}

fn bisim(input: &Input, lhs: &str, rhs: &str, depth: usize, fuel: u64) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    let m = Machine::new(&prog, &analysis, fuel);
    let side = |src: &str| -> Result<_, Failure> {
        let c = parse_closed(&prog, src).map_err(usage)?;
        let ty = c.ty(&prog);
        let v = m.closed(&c, Sem::Transformed).map_err(usage)?;
        match v {
            Value::Co(l) => Ok((l, ty)),
            _ => Err(usage(format!("`{src}` is not a codata value"))),
        }
    };
    let (a, ta) = side(lhs)?;
    let (b, tb) = side(rhs)?;
    if ta != tb {
        return Err(usage(format!("cannot compare {ta} with {tb}")));
    }
    let r = m.bisimilar_to_depth(&a, &b, depth);
    let label = match &r {
        Bisim::Equal => "Bisimilar",
        Bisim::Differ { .. } => "NotBisimilar",
        Bisim::Error { error: EvalError::FuelExhausted, .. } => "Unknown",
        Bisim::Error { .. } => "Error",
    };
    verdict(input.json, label, &r.to_string(), r == Bisim::Equal)
}

fn eqcheck(input: &Input, fun: &str, args: &str, depth: usize, fuel: u64) -> Outcome {
    let (prog, analysis) = load(&input.file)?;
    if prog.fun(fun).is_none() {
        return Err(usage(format!("no fun or cofun named `{fun}`")));
    }
    let parsed = parse_args(&prog, fun, args).map_err(usage)?;
    let v = check_equation(&prog, &analysis, fun, &parsed, depth, fuel).map_err(|e| eval_failure(input.json, e))?;
    let label = match v {
        EquationVerdict::Bisimilar => "Bisimilar",
        EquationVerdict::Counterexample { .. } => "Counterexample",
        EquationVerdict::Unknown(_) => "Unknown",
    };
    verdict(input.json, label, &v.to_string(), v == EquationVerdict::Bisimilar)
}
