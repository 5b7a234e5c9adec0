//! Command-line front end: word and normal-form utilities, folding with DOT
//! output, the embedding verification suite, the bounded length-inequality
//! search, and the stage simulator. Suite commands emit versioned JSON
//! reports and use stable exit codes:
//!
//! * 0 – all checks pass / search absence
//! * 1 – a mathematical check failed (witness emitted)
//! * 2 – input error
//! * 3 – enumeration budget exceeded
//!
//! `WORDFORGE_THREADS` caps worker parallelism; output is canonical and
//! independent of scheduling.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use wordforge_core::construction::{PhiMap, SplitSpec};
use wordforge_core::error::Error;
use wordforge_core::free_product::FactorSpec;
use wordforge_core::length_descent::{
    search_counterexample, ScenarioSpec, SearchBounds, SearchOptions,
};
use wordforge_core::report::VerificationReport;
use wordforge_core::stages::{abelianization_ledger, check_invariants, run as run_plan, StagePlan};
use wordforge_core::subgroup::CoreGraph;
use wordforge_core::words::{Alphabet, ReducedWord};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "wordforge",
    version,
    about = "Free-group word calculus, folded subgroup graphs, and finite verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format (text or json)
    #[arg(long, value_parser = ["text", "json"])]
    format: Option<String>,
    /// Write the JSON report to a file (stdout then carries a summary line)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Freely reduce a word
    Reduce {
        /// Word in text format, e.g. "a a^-1 b"
        word: String,
        /// Space-separated generator names (inferred from the word if omitted)
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Normalize a free-product element
    Normalform {
        /// Element in syllable format, e.g. "0:y^-1 | 1:t0"
        element: String,
        /// Space-separated generator names of factor 0
        #[arg(long)]
        factor0: String,
        /// Space-separated generator names of factor 1
        #[arg(long)]
        factor1: String,
    },
    /// Fold a generating set into its subgroup graph
    Fold {
        /// File with one generator word per line
        words_file: PathBuf,
        /// Space-separated generator names (inferred from the file if omitted)
        #[arg(long)]
        alphabet: Option<String>,
        /// Emit the graph in DOT format
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Test membership of a word in the subgroup generated by a file of words
    Member {
        words_file: PathBuf,
        word: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Run the embedding verification suite for a split description
    VerifyConstruction {
        /// JSON file: {"x": [...], "y": ["y", ...], "N": 6}
        spec_file: PathBuf,
        /// Override the truncation N from the file
        #[arg(long = "N")]
        truncation: Option<usize>,
        /// Sample count for the commutator checks
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Seed for the randomized checks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fault injection: replace one image, e.g. --sabotage t0=y
        #[arg(long)]
        sabotage: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive bounded search for a length-inequality counterexample
    SearchLemma4 {
        /// JSON scenario file naming the factor alphabets and y, t0, t1
        scenario_file: PathBuf,
        /// Bound S on the syllable count
        #[arg(long, default_value_t = 6)]
        syllables: usize,
        /// Bound W on the reduced length of each syllable
        #[arg(long = "syllable-len", default_value_t = 2)]
        syllable_len: usize,
        /// Hard cap on the enumeration size
        #[arg(long = "max-candidates", default_value_t = 1_000_000_000)]
        max_candidates: u64,
        /// Fault injection: drop side condition (c1)
        #[arg(long = "disable-c1")]
        disable_c1: bool,
        /// Recorded in the report (the search itself is deterministic)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replay a stage plan and audit the construction invariants
    Simulate {
        /// JSON plan file: {"r0": 3, "stages": [...]}
        plan_file: PathBuf,
        /// Sample count per stage pair for the commutator checks
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("WORDFORGE_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BudgetExceeded { .. } => 3,
        _ => 2,
    }
}

fn dispatch(command: Command) -> Result<u8, Error> {
    match command {
        Command::Reduce { word, alphabet } => {
            let alphabet = alphabet_for(&alphabet, std::iter::once(word.as_str()))?;
            let reduced = alphabet.parse_word(&word)?;
            println!("{reduced}");
            Ok(0)
        }
        Command::Normalform {
            element,
            factor0,
            factor1,
        } => {
            let spec = FactorSpec::new(
                Alphabet::new(factor0.split_whitespace().map(String::from))?,
                Alphabet::new(factor1.split_whitespace().map(String::from))?,
            )?;
            let nf = spec.parse(&element)?;
            println!("{nf}");
            println!("length: {}", nf.len());
            Ok(0)
        }
        Command::Fold {
            words_file,
            alphabet,
            dot,
            output,
        } => {
            let (graph, _, _) = fold_file(&words_file, &alphabet)?;
            let basis = graph.basis();
            let basis_text: Vec<String> =
                basis.basis_words().iter().map(|w| w.to_string()).collect();
            let format = output.format.as_deref().unwrap_or("text");
            if format == "json" {
                let report = json!({
                    "schema": SCHEMA_VERSION,
                    "command": "fold",
                    "alphabet": graph.alphabet().names(),
                    "vertices": graph.vertex_count(),
                    "edges": graph.edge_count(),
                    "rank": graph.rank(),
                    "basis": basis_text,
                    "dot": if dot { Value::String(graph.to_dot()) } else { Value::Null },
                });
                emit(&output, &report)?;
            } else if dot {
                print!("{}", graph.to_dot());
            } else {
                println!("rank: {}", graph.rank());
                for w in &basis_text {
                    println!("basis: {w}");
                }
            }
            Ok(0)
        }
        Command::Member {
            words_file,
            word,
            alphabet,
        } => {
            let (graph, _, alphabet) = fold_file(&words_file, &alphabet)?;
            let w = alphabet.parse_word(&word)?;
            println!("{}", graph.contains(&w)?);
            Ok(0)
        }
        Command::VerifyConstruction {
            spec_file,
            truncation,
            samples,
            seed,
            sabotage,
            output,
        } => {
            let text = read(&spec_file)?;
            let parsed: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Invalid(format!("spec file: {e}")))?;
            let x: Vec<String> = string_list(&parsed, "x")?.unwrap_or_default();
            let y: Vec<String> = string_list(&parsed, "y")?
                .ok_or_else(|| Error::Invalid("spec file needs a y-family".into()))?;
            let n = truncation
                .or_else(|| parsed.get("N").and_then(Value::as_u64).map(|v| v as usize))
                .ok_or_else(|| Error::Invalid("spec file needs a truncation N".into()))?;
            let mut phi: PhiMap = SplitSpec::new(x, y, n).phi()?;
            if let Some(s) = &sabotage {
                let (gen, image) = s
                    .split_once('=')
                    .ok_or_else(|| Error::Invalid("sabotage must look like gen=word".into()))?;
                let word = phi.codomain().parse_word(image)?;
                phi.set_image(gen.trim(), word)?;
            }
            let reports = phi.verify_all(samples, seed)?;
            let pass = reports.iter().all(|r| r.pass);
            let report = json!({
                "schema": SCHEMA_VERSION,
                "command": "verify-construction",
                "seed": seed,
                "params": { "N": n, "x": phi.x_names(), "y": phi.y_names(), "samples": samples, "sabotage": sabotage },
                "pass": pass,
                "reports": reports,
            });
            render_suite(&output, &report, &reports)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::SearchLemma4 {
            scenario_file,
            syllables,
            syllable_len,
            max_candidates,
            disable_c1,
            seed,
            output,
        } => {
            let text = read(&scenario_file)?;
            let spec: ScenarioSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Invalid(format!("scenario file: {e}")))?;
            let scenario = spec.build()?;
            let options = SearchOptions {
                bounds: SearchBounds {
                    max_syllables: syllables,
                    max_syllable_len: syllable_len,
                },
                max_candidates,
                disable_c1,
            };
            let outcome = search_counterexample(&scenario, &options)?;
            let witness = outcome.witness.as_ref().map(|w| {
                json!({
                    "z1": w.z1.to_string(),
                    "verdict": w.verdict.to_json(),
                })
            });
            let found = witness.is_some();
            let report = json!({
                "schema": SCHEMA_VERSION,
                "command": "search-lemma4",
                "seed": seed,
                "params": {
                    "syllables": syllables,
                    "syllable_len": syllable_len,
                    "max_candidates": max_candidates,
                    "disable_c1": disable_c1,
                },
                "candidates": outcome.candidates,
                "c1_passes": outcome.c1_passes,
                "survivors": outcome.survivors,
                "inequality_failures": outcome.inequality_failures,
                "witness": witness,
                "absent": !found,
            });
            let format = output.format.as_deref().unwrap_or("json");
            if format == "text" {
                println!(
                    "{}: {} candidates, {} survivors",
                    if found { "WITNESS" } else { "absent" },
                    outcome.candidates,
                    outcome.survivors
                );
                if let Some(w) = &outcome.witness {
                    println!("z1 = {}", w.z1);
                    println!("z0 = {}", w.verdict.z0);
                }
                if let Some(path) = &output.out {
                    write_file(path, &to_pretty(&report))?;
                }
            } else {
                emit(&output, &report)?;
            }
            Ok(if found { 1 } else { 0 })
        }
        Command::Simulate {
            plan_file,
            samples,
            seed,
            output,
        } => {
            let text = read(&plan_file)?;
            let plan: StagePlan =
                serde_json::from_str(&text).map_err(|e| Error::Plan(format!("plan file: {e}")))?;
            let trace = run_plan(&plan)?;
            let mut reports = check_invariants(&trace, samples, seed)?;
            let ledger = abelianization_ledger(&trace)?;
            reports.push(ledger.to_report());
            let pass = reports.iter().all(|r| r.pass);
            let report = json!({
                "schema": SCHEMA_VERSION,
                "command": "simulate",
                "seed": seed,
                "params": { "samples": samples, "stages": plan.stages.len(), "r0": plan.r0 },
                "pass": pass,
                "trace": trace.to_json(),
                "reports": reports,
            });
            render_suite(&output, &report, &reports)?;
            Ok(if pass { 0 } else { 1 })
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), Error> {
    fs::write(path, content).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(output: &OutputArgs, report: &Value) -> Result<(), Error> {
    let text = to_pretty(report);
    match &output.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("report written to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn render_suite(
    output: &OutputArgs,
    report: &Value,
    reports: &[VerificationReport],
) -> Result<(), Error> {
    let format = output.format.as_deref().unwrap_or("json");
    if format == "text" {
        for r in reports {
            if r.pass {
                println!("PASS {}", r.check);
            } else {
                println!("FAIL {} witnesses={}", r.check, r.witnesses);
            }
        }
        if let Some(path) = &output.out {
            write_file(path, &to_pretty(report))?;
        }
        Ok(())
    } else {
        emit(output, report)
    }
}

fn string_list(v: &Value, key: &str) -> Result<Option<Vec<String>>, Error> {
    match v.get(key) {
        None => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| {
                i.as_str()
                    .map(String::from)
                    .ok_or_else(|| Error::Invalid(format!("{key} entries must be strings")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some),
        Some(_) => Err(Error::Invalid(format!("{key} must be an array of strings"))),
    }
}

/// Reads a words file (one word per line, `#` comments and blank lines
/// skipped) and folds it. The alphabet is either given explicitly or
/// inferred from the words in order of first appearance.
fn fold_file(
    path: &PathBuf,
    alphabet: &Option<String>,
) -> Result<(CoreGraph, Vec<ReducedWord>, Alphabet), Error> {
    let text = read(path)?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let alphabet = alphabet_for(alphabet, lines.iter().copied())?;
    let words = lines
        .iter()
        .map(|l| alphabet.parse_word(l))
        .collect::<Result<Vec<_>, _>>()?;
    let graph = CoreGraph::fold(&alphabet, &words)?;
    Ok((graph, words, alphabet))
}

fn alphabet_for<'a>(
    explicit: &Option<String>,
    texts: impl Iterator<Item = &'a str>,
) -> Result<Alphabet, Error> {
    match explicit {
        Some(names) => Alphabet::new(names.split_whitespace().map(String::from)),
        None => {
            let mut names: Vec<String> = Vec::new();
            for text in texts {
                for token in text.split_whitespace() {
                    if token == "1" {
                        continue;
                    }
                    let name = token.strip_suffix("^-1").unwrap_or(token);
                    if !names.iter().any(|n| n == name) {
                        names.push(name.to_string());
                    }
                }
            }
            Alphabet::new(names)
        }
    }
}
