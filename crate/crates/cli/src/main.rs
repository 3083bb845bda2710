//! `fuzzrev`: query, revise and conformance-check fuzzy belief bases.
//!
//! Exit codes: 0 success, 1 a postulate check failed, 2 usage or input error,
//! 3 the revised base is inconsistent.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use fuzzrev::logics::{degree_literals, Logic, LogicSelector};
use fuzzrev::postulates::{
    self, CheckConfig, CheckMode, PartialMeet, PostulateError, PostulateReport, RevisionOracle, TableOracle,
};
use fuzzrev::revision::{self, RevisionError, SelectionStrategy, DEFAULT_ENUM_CAP};
use fuzzrev::{BaseError, DeductionSystem, Formula, FuzzyBase, GradedFormula, LogicError};

const CAP_VAR: &str = "FUZZREV_ENUM_CAP";

#[derive(Parser)]
#[command(name = "fuzzrev", version, about = "Partial meet revision of fuzzy belief bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the degree to which the base entails a formula.
    Deduce {
        #[command(flatten)]
        common: Common,
        /// Formula to query.
        #[arg(long)]
        query: String,
    },
    /// Decide whether the base is consistent.
    Consistent {
        #[command(flatten)]
        common: Common,
    },
    /// List the maximal sub-bases consistent with the input.
    Remainders {
        #[command(flatten)]
        common: Common,
        /// Graded input, `"<formula> : <degree>"`.
        #[arg(long)]
        input: String,
    },
    /// Revise the base by the input.
    Revise {
        #[command(flatten)]
        common: Common,
        /// Graded input, `"<formula> : <degree>"`.
        #[arg(long)]
        input: String,
        /// full-meet | degree-priority | maxichoice | rank:<file> | pred:<constraints>
        #[arg(long)]
        strategy: String,
    },
    /// Check the revision postulates for a strategy or an operator table.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        operator: Operator,
        #[command(flatten)]
        mode: Mode,
        /// Write counterexamples to this file in base-file format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Recover a selection function from an operator and replay it.
    Extract {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        operator: Operator,
        #[command(flatten)]
        mode: Mode,
    },
}

#[derive(Args)]
struct Common {
    /// crisp | luk:k=<k> | nec[:k=<k>] | prob[:k=<k>] | table:<file>
    #[arg(long)]
    logic: String,
    /// Base file, one `<formula> : <degree>` entry per line.
    #[arg(long)]
    base: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args)]
struct Operator {
    /// Graded input to probe; repeatable. Defaults to a probe set derived
    /// from the base (or the oracle file's inputs).
    #[arg(long = "input")]
    inputs: Vec<String>,
    /// Selection strategy defining the operator.
    #[arg(long, conflicts_with = "oracle")]
    strategy: Option<String>,
    /// Operator table: `> <input>` lines, each followed by its output base.
    #[arg(long)]
    oracle: Option<PathBuf>,
}

#[derive(Args)]
struct Mode {
    /// Decide every postulate over the whole finite instance (default).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Search this many seeded random candidates instead.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "samples")]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Annotated output; degrees also shown in decimal.
    Human,
    /// Bare output; degrees in fraction form.
    Lines,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Base { path: String, source: BaseError },
    #[error("{flag}: {source}")]
    Flag { flag: &'static str, source: BaseError },
    #[error("--query: {0}")]
    Query(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Revision(#[from] RevisionError),
    #[error(transparent)]
    Postulate(#[from] PostulateError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn enum_cap() -> Result<u128, CliError> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{CAP_VAR}: expected a non-negative integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

/// Degree literal of a `formula : degree` flag value.
fn input_degree(text: &str) -> Option<&str> {
    text.rsplit_once(':').map(|(_, d)| d)
}

/// Degree literals of a `pred:` strategy.
fn strategy_degrees(strategy: &str) -> Vec<&str> {
    match strategy.strip_prefix("pred:") {
        Some(spec) => spec.split(',').filter_map(|c| c.rsplit_once('=').map(|(_, d)| d)).collect(),
        None => Vec::new(),
    }
}

/// The loaded deduction system and base.
struct Loaded {
    system: DeductionSystem,
    base: FuzzyBase,
}

fn load(common: &Common, extra_degrees: &[&str]) -> Result<Loaded, CliError> {
    let selector: LogicSelector = common.logic.parse()?;
    let text = read(&common.base)?;
    let degrees = degree_literals(&text).chain(extra_degrees.iter().copied());
    let system = selector.build(degrees, |p| fs::read_to_string(p).map_err(|e| e.to_string()))?;
    let base = system.parse_base(&text).map_err(|source| CliError::Base {
        path: common.base.display().to_string(),
        source,
    })?;
    Ok(Loaded { system, base })
}

fn parse_input(system: &DeductionSystem, text: &str) -> Result<GradedFormula, CliError> {
    system
        .parse_input(text)
        .map_err(|source| CliError::Flag { flag: "--input", source })
}

fn strategy(system: &DeductionSystem, selector: &str) -> Result<SelectionStrategy, CliError> {
    Ok(SelectionStrategy::from_selector(selector, system.lattice(), |p| {
        fs::read_to_string(p).map_err(|e| e.to_string())
    })?)
}

fn render(base: &FuzzyBase, format: Format) -> String {
    match format {
        Format::Lines => base.render(),
        Format::Human => {
            let mut s = String::new();
            for (f, d) in base.entries() {
                let human = d.human();
                match human.split_once(" (") {
                    Some((exact, decimal)) => {
                        let _ = writeln!(s, "{f} : {exact}  # {}", decimal.trim_end_matches(')'));
                    }
                    None => {
                        let _ = writeln!(s, "{f} : {human}");
                    }
                }
            }
            s
        }
    }
}

struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Deduce { common, query } => {
            let phi = Formula::parse(&query).map_err(|e| CliError::Query(e.to_string()))?;
            let Loaded { system, base } = load(&common, &[])?;
            let d = system.deduce(&base, &phi)?;
            Ok(Outcome::ok(match common.format {
                Format::Lines => format!("{d}\n"),
                Format::Human => {
                    let mut s = format!("D(u)({phi}) = {}\n", d.human());
                    if matches!(system.logic(), Logic::Probability) {
                        if let Some(exact) = system.lower_envelope(&base, &phi)? {
                            if exact.to_string() != d.to_string() {
                                let _ = writeln!(s, "lower envelope = {exact} (rounded down onto the chain)");
                            }
                        }
                    }
                    s
                }
            }))
        }
        Command::Consistent { common } => {
            let Loaded { system, base } = load(&common, &[])?;
            let verdict = system.consistent(&base)?;
            let word = if verdict.consistent { "consistent" } else { "inconsistent" };
            Ok(Outcome::ok(match (common.format, &verdict.witness) {
                (Format::Human, Some(w)) => format!("{word}\nwitness: {w}\n"),
                _ => format!("{word}\n"),
            }))
        }
        Command::Remainders { common, input } => {
            let Loaded { system, base } = load(&common, &input_degree(&input).into_iter().collect::<Vec<_>>())?;
            let g = parse_input(&system, &input)?;
            let r = revision::remainders(&system, &base, &g)?;
            let mut out = String::new();
            if r.is_empty() && common.format == Format::Human {
                out.push_str("# no remainders: the input is inconsistent\n");
            }
            for (i, e) in r.elements().iter().enumerate() {
                if i > 0 {
                    out.push_str("---\n");
                }
                if common.format == Format::Human {
                    let _ = writeln!(out, "# remainder {} of {}", i + 1, r.len());
                }
                out.push_str(&render(e, common.format));
            }
            Ok(Outcome::ok(out))
        }
        Command::Revise {
            common,
            input,
            strategy: selector,
        } => {
            let mut degrees: Vec<&str> = input_degree(&input).into_iter().collect();
            degrees.extend(strategy_degrees(&selector));
            let Loaded { system, base } = load(&common, &degrees)?;
            let g = parse_input(&system, &input)?;
            let gamma = strategy(&system, &selector)?;
            let outcome = revision::revise_detailed(&system, &gamma, &base, &g)?;
            let mut out = String::new();
            if common.format == Format::Human {
                let _ = writeln!(
                    out,
                    "# selected {} of {} remainders",
                    if outcome.remainders.is_empty() { 0 } else { outcome.selected.len() },
                    outcome.remainders.len()
                );
            }
            out.push_str(&render(&outcome.result, common.format));
            let code = if system.is_consistent(&outcome.result)? {
                0
            } else {
                eprintln!("fuzzrev: warning: the revised base is inconsistent (the input is inconsistent)");
                3
            };
            Ok(Outcome { stdout: out, code })
        }
        Command::Check {
            common,
            operator,
            mode,
            dump,
        } => {
            let session = Session::open(&common, &operator, &mode)?;
            let reports = session.with_oracle(|op| -> Result<Vec<PostulateReport>, PostulateError> {
                let (s, u, inputs, config) = (&session.system, &session.base, &session.inputs, &session.config);
                let mut reports = postulates::check(s, u, op, inputs, config)?;
                reports.extend(postulates::check_derived(s, u, op, inputs, config)?);
                Ok(reports)
            })?;
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(out, "{r}");
            }
            let failed: Vec<&PostulateReport> = reports.iter().filter(|r| r.failed()).collect();
            if common.format == Format::Human {
                let _ = writeln!(
                    out,
                    "# {} inputs, {} of {} checks failed",
                    session.inputs.len(),
                    failed.len(),
                    reports.len()
                );
            }
            if let Some(path) = dump {
                let mut text = String::new();
                for (i, r) in failed.iter().enumerate() {
                    if i > 0 {
                        text.push_str("===\n");
                    }
                    text.push_str(&r.counterexample().expect("failed report").dump());
                }
                fs::write(&path, text).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            Ok(Outcome {
                stdout: out,
                code: if failed.is_empty() { 0 } else { 1 },
            })
        }
        Command::Extract { common, operator, mode } => {
            let session = Session::open(&common, &operator, &mode)?;
            let (s, u, inputs) = (&session.system, &session.base, &session.inputs);
            let extracted = match session.with_oracle(|op| postulates::extract_selection(s, u, op, inputs, &session.config)) {
                Ok(e) => e,
                Err(PostulateError::PreconditionFailed(p)) => {
                    return Ok(Outcome {
                        stdout: format!("extraction: FAIL (operator violates {p})\n"),
                        code: 1,
                    })
                }
                Err(e) => return Err(e.into()),
            };
            let mut out = String::new();
            for (g, chosen) in extracted.entries() {
                let _ = writeln!(out, "> {g}");
                if chosen.is_empty() {
                    out.push_str("# empty remainder set: the base itself is selected\n");
                }
                for (i, b) in chosen.iter().enumerate() {
                    if i > 0 {
                        out.push_str("---\n");
                    }
                    out.push_str(&render(b, common.format));
                }
            }
            let report = session.with_oracle(|op| postulates::check_round_trip(s, u, op, &extracted, inputs))?;
            let _ = writeln!(out, "{report}");
            Ok(Outcome {
                stdout: out,
                code: if report.failed() { 1 } else { 0 },
            })
        }
    }
}

/// Everything `check` and `extract` share.
struct Session {
    system: DeductionSystem,
    base: FuzzyBase,
    inputs: Vec<GradedFormula>,
    config: CheckConfig,
    op: Op,
}

enum Op {
    Strategy(SelectionStrategy),
    Table(TableOracle),
}

impl Session {
    fn open(common: &Common, operator: &Operator, mode: &Mode) -> Result<Self, CliError> {
        let oracle = operator.oracle.as_deref().map(read).transpose()?;
        let mut degrees: Vec<&str> = operator.inputs.iter().filter_map(|i| input_degree(i)).collect();
        let selector = operator.strategy.as_deref().unwrap_or("full-meet");
        degrees.extend(strategy_degrees(selector));
        if let Some(text) = &oracle {
            degrees.extend(degree_literals(text));
        }
        let Loaded { system, base } = load(common, &degrees)?;
        let config = CheckConfig {
            mode: match mode.samples {
                Some(samples) if !mode.exhaustive => CheckMode::Sampled {
                    samples,
                    seed: mode.seed,
                },
                _ => CheckMode::Exhaustive,
            },
            cap: enum_cap()?,
        };
        let mut inputs = operator
            .inputs
            .iter()
            .map(|i| parse_input(&system, i))
            .collect::<Result<Vec<_>, _>>()?;
        let op = match (&oracle, &operator.oracle) {
            (Some(text), Some(path)) => Op::Table(TableOracle::parse(text, &system).map_err(|e| match e {
                PostulateError::Parse { line, message } => {
                    CliError::Usage(format!("{}: line {line}: {message}", path.display()))
                }
                other => other.into(),
            })?),
            _ => Op::Strategy(strategy(&system, selector)?),
        };
        if inputs.is_empty() {
            inputs = match &op {
                Op::Table(t) => t.inputs().cloned().collect(),
                Op::Strategy(_) => postulates::probe_inputs(&system, &base),
            };
        }
        Ok(Session {
            system,
            base,
            inputs,
            config,
            op,
        })
    }

    fn with_oracle<R>(&self, f: impl FnOnce(&dyn RevisionOracle) -> R) -> R {
        match &self.op {
            Op::Strategy(gamma) => f(&PartialMeet {
                system: &self.system,
                selection: gamma,
                base: &self.base,
            }),
            Op::Table(t) => f(t),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("fuzzrev: error: {e}");
            ExitCode::from(2)
        }
    }
}
