//! Command-line driver: corpus generation, theorem verification runs, and
//! eigenvalue-curve export.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use specflow::corpus::{generate, CorpusCase, CorpusClass};
use specflow::flow::{flow_report, OperatorPath};
use specflow::verify::{run_case, summarize, CaseResult, Status, TheoremReport, THEOREMS};
use specflow::Op64;

#[derive(Parser)]
#[command(name = "specflow", version, about = "Spectral flow and index computations for banded lattice operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassArg {
    Shift,
    Polar,
    Perturbed,
    Odd,
}

impl std::fmt::Display for ClassArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .fmt(f)
    }
}

impl From<ClassArg> for CorpusClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Shift => CorpusClass::Shift,
            ClassArg::Polar => CorpusClass::Polar,
            ClassArg::Perturbed => CorpusClass::Perturbed,
            ClassArg::Odd => CorpusClass::Odd,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TheoremArg {
    T31,
    T71,
    T43,
    T44,
    Z2pair,
    Kramers,
    Secondproof,
    All,
}

impl TheoremArg {
    fn names(self) -> Vec<&'static str> {
        match self {
            TheoremArg::T31 => vec!["t31"],
            TheoremArg::T71 => vec!["t71"],
            TheoremArg::T43 => vec!["t43"],
            TheoremArg::T44 => vec!["t44"],
            TheoremArg::Z2pair => vec!["z2pair"],
            TheoremArg::Kramers => vec!["kramers"],
            TheoremArg::Secondproof => vec!["secondproof"],
            TheoremArg::All => THEOREMS.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathKind {
    Canonical,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic corpus of cases as JSON.
    Gen(GenArgs),
    /// Verify one theorem (or all) against a corpus.
    Verify(VerifyArgs),
    /// Export the eigenvalue curves of one case's path as CSV.
    Curves(CurvesArgs),
    /// Run every theorem over a corpus and write an aggregate summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of cases to generate.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Master seed; the corpus is a pure function of (count, seed, classes).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Case classes to cycle through.
    #[arg(long, value_delimiter = ',', default_values_t = [ClassArg::Shift, ClassArg::Polar, ClassArg::Perturbed, ClassArg::Odd])]
    classes: Vec<ClassArg>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Corpus JSON produced by `gen`.
    #[arg(long)]
    corpus: PathBuf,
    /// Theorem to verify.
    #[arg(long)]
    theorem: TheoremArg,
    /// Report file (per-case lines always go to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    /// Corpus JSON produced by `gen`.
    #[arg(long)]
    corpus: PathBuf,
    /// Case id, e.g. `case-0003`.
    #[arg(long)]
    case: String,
    /// Path through the involutions: the canonical linear one or a random
    /// finite bump of it.
    #[arg(long, value_enum, default_value_t = PathKind::Canonical)]
    path: PathKind,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Corpus JSON produced by `gen`.
    #[arg(long)]
    corpus: PathBuf,
    /// Output JSON file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_corpus(path: &PathBuf) -> Result<Vec<CorpusCase>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Exit contract: 0 all pass, 1 some case fails its identity, 2 engine error.
fn exit_for(reports: &[TheoremReport]) -> ExitCode {
    if reports.iter().any(|r| r.errored > 0) {
        ExitCode::from(2)
    } else if reports.iter().any(|r| r.failed > 0) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn print_results(results: &[CaseResult]) {
    for r in results {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
            Status::Skipped => "SKIP",
        };
        println!("{:5} {} {}: {}", tag, r.theorem, r.id, r.detail);
    }
}

/// Run one theorem over the corpus in parallel, reassembled in case order.
fn run_parallel(theorem: &str, corpus: &[CorpusCase]) -> TheoremReport {
    let mut results: Vec<CaseResult> = corpus.par_iter().map(|c| run_case(theorem, c)).collect();
    results.sort_by(|a, b| a.id.cmp(&b.id));
    summarize(theorem, results)
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let classes: Vec<CorpusClass> = args.classes.iter().copied().map(Into::into).collect();
    if classes.is_empty() {
        bail!("at least one class is required");
    }
    let corpus = generate(args.count, args.seed, &classes);
    write_out(&args.out, &serde_json::to_string_pretty(&corpus)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let corpus = load_corpus(&args.corpus)?;
    if corpus.is_empty() {
        eprintln!("warning: empty corpus, passing vacuously");
    }
    let reports: Vec<TheoremReport> = args
        .theorem
        .names()
        .into_iter()
        .map(|name| run_parallel(name, &corpus))
        .collect();
    for rep in &reports {
        print_results(&rep.results);
        println!(
            "{}: {} passed, {} failed, {} errored, {} skipped",
            rep.theorem, rep.passed, rep.failed, rep.errored, rep.skipped
        );
    }
    if let Some(out) = &args.out {
        fs::write(out, serde_json::to_string_pretty(&reports)?)
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(exit_for(&reports))
}

fn case_path(case: &CorpusCase, kind: PathKind) -> Result<OperatorPath<f64>> {
    let u = case.build_dilation()?;
    let f = Op64::standard_symmetry(case.base.fiber_dim());
    Ok(match kind {
        PathKind::Canonical => OperatorPath::canonical(&f, &u)?,
        PathKind::Random => OperatorPath::with_random_bump(&f, &u, case.seed ^ 0xc3a5c85c97cb3127)?,
    })
}

fn cmd_curves(args: CurvesArgs) -> Result<ExitCode> {
    let corpus = load_corpus(&args.corpus)?;
    let case = corpus
        .iter()
        .find(|c| c.id == args.case)
        .ok_or_else(|| anyhow!("unknown case id `{}`", args.case))?;
    let rep = flow_report(&case_path(case, args.path)?)?;
    let width = rep
        .curves
        .iter()
        .map(|n| n.eigenvalues.len())
        .max()
        .unwrap_or(0);
    let mut csv = String::from("s");
    for k in 1..=width {
        csv.push_str(&format!(",lambda_{k}"));
    }
    csv.push('\n');
    for node in &rep.curves {
        csv.push_str(&format!("{}", node.s));
        for k in 0..width {
            match node.eigenvalues.get(k) {
                Some(v) => csv.push_str(&format!(",{v}")),
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{}: flow = {}, {} grid nodes written",
        case.id,
        rep.flow,
        rep.curves.len()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    cases: usize,
    theorems: Vec<TheoremReport>,
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode> {
    let corpus = load_corpus(&args.corpus)?;
    if corpus.is_empty() {
        eprintln!("warning: empty corpus, passing vacuously");
    }
    let theorems: Vec<TheoremReport> = THEOREMS
        .iter()
        .map(|name| run_parallel(name, &corpus))
        .collect();
    for rep in &theorems {
        println!(
            "{}: {} passed, {} failed, {} errored, {} skipped",
            rep.theorem, rep.passed, rep.failed, rep.errored, rep.skipped
        );
    }
    let summary = Summary {
        schema_version: 1,
        cases: corpus.len(),
        theorems,
    };
    write_out(&args.out, &serde_json::to_string_pretty(&summary)?)?;
    Ok(exit_for(&summary.theorems))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
