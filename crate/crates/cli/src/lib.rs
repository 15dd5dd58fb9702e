//! Command-line front end: parse, translate, simulate, monitor, evaluate
//! and statistically check contracts against a model.
//!
//! Exit codes: 0 holds or success, 1 violated, 2 error, 3 undecided.

pub mod report;

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gcsl_core::bltl::{check_with, parse_formula, CheckOptions, Formula};
use gcsl_core::gcsl::{parse_contracts, parse_pattern, parse_property, Contract};
use gcsl_core::model::{load_model, read_trace, write_trace};
use gcsl_core::ocl::{parse_expr, Evaluator, RunContext};
use gcsl_core::sim::{simulate, SimConfig};
use gcsl_core::smc::{verify_contract, Decision, Mode, Relation, SmcConfig};
use gcsl_core::translate::{translate_contract, TranslateOptions};
use gcsl_core::{Error, SosModel, TimeSpan};

use report::Summary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gcsl", version, about = "Contract checking for stochastic systems of systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a document and print it in canonical form.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Contracts)]
        kind: Kind,
    },
    /// Print the bounded LTL formula of each contract.
    Translate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        contract: PathBuf,
        #[arg(long, value_parser = span)]
        time_bound: TimeSpan,
        #[command(flatten)]
        options: TranslateFlags,
    },
    /// Simulate one run and write its trace as JSON lines.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = span)]
        horizon: TimeSpan,
        #[arg(long, env = "GCSL_SEED", default_value_t = 0)]
        seed: u64,
        /// Output file; standard output by default.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check one trace against a formula or the contracts of a file.
    Monitor {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// File holding a formula in text form.
        #[arg(long, conflicts_with = "contract", required_unless_present = "contract")]
        formula: Option<PathBuf>,
        #[arg(long, requires = "time_bound")]
        contract: Option<PathBuf>,
        #[arg(long, value_parser = span)]
        time_bound: Option<TimeSpan>,
        #[command(flatten)]
        options: TranslateFlags,
        #[arg(long)]
        standard_weak_until: bool,
    },
    /// Evaluate an OCL expression on the initial state or a trace sample.
    Eval {
        #[arg(long)]
        model: PathBuf,
        expr: String,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Time of the sample to evaluate on, in model units.
        #[arg(long, requires = "trace")]
        at: Option<f64>,
    },
    /// Estimate each contract's satisfaction probability by simulation.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Contracts,
    Property,
    Pattern,
    Formula,
    Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct TranslateFlags {
    /// Read the split pattern as an existential cut point.
    #[arg(long)]
    pub split_reading: bool,
    /// Leave OCL iterators over instances unexpanded.
    #[arg(long)]
    pub keep_ocl_quantifiers: bool,
    /// Drop `X[<=0]` wrappers.
    #[arg(long)]
    pub simplify: bool,
}

impl From<TranslateFlags> for TranslateOptions {
    fn from(f: TranslateFlags) -> Self {
        TranslateOptions {
            split_reading: f.split_reading,
            keep_ocl_quantifiers: f.keep_ocl_quantifiers,
            simplify: f.simplify,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub contract: PathBuf,
    #[arg(long, value_parser = span)]
    pub time_bound: Option<TimeSpan>,
    /// Simulation length; by default the time bound, or longer if a formula needs it.
    #[arg(long, value_parser = span)]
    pub horizon: Option<TimeSpan>,
    /// `fixed:N` or `chernoff:EPSILON,DELTA`.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, env = "GCSL_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_parser = relation)]
    pub relation: Option<Relation>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: TranslateFlags,
}

/// Defaults for `check`, overridden by flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CheckConfig {
    pub time_bound: Option<String>,
    pub horizon: Option<String>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub relation: Option<String>,
    pub format: Option<Format>,
}

fn span(text: &str) -> Result<TimeSpan, String> {
    TimeSpan::parse(text).map_err(|e| e.to_string())
}

fn relation(text: &str) -> Result<Relation, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Error },
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::File {
        path: path.to_owned(),
        source: e.into(),
    })
}

fn in_file<T>(path: &Path, r: gcsl_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::File {
        path: path.to_owned(),
        source,
    })
}

fn model(path: &Path) -> Result<SosModel, CliError> {
    in_file(path, load_model(&read(path)?))
}

fn contracts(path: &Path) -> Result<Vec<Contract>, CliError> {
    in_file(path, parse_contracts(&read(path)?))
}

/// Runs a command, writing results to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Parse { file, kind } => {
            let text = read(&file)?;
            let printed = match kind {
                Kind::Contracts => in_file(&file, parse_contracts(&text))?
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("\n"),
                Kind::Property => in_file(&file, parse_property(&text))?.to_string(),
                Kind::Pattern => in_file(&file, parse_pattern(&text))?.to_string(),
                Kind::Formula => in_file(&file, parse_formula(&text))?.to_string(),
                Kind::Expr => in_file(&file, parse_expr(&text))?.to_string(),
            };
            writeln!(out, "{}", printed.trim_end())?;
            Ok(EXIT_OK)
        }
        Command::Translate {
            model: m,
            contract,
            time_bound,
            options,
        } => {
            let model = model(&m)?;
            let all = contracts(&contract)?;
            for (i, c) in all.iter().enumerate() {
                let f = translate_contract(c, &model, time_bound, options.into())?;
                if all.len() > 1 {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    writeln!(out, "-- {}", c.name)?;
                }
                writeln!(out, "{f}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Simulate {
            model: m,
            horizon,
            seed,
            output,
        } => {
            let model = model(&m)?;
            let trace = simulate(&model, &SimConfig::new(seed, horizon))?;
            match output {
                Some(path) => {
                    let mut file = io::BufWriter::new(fs::File::create(&path)?);
                    write_trace(&model, &trace, &mut file)?;
                    file.flush()?;
                }
                None => write_trace(&model, &trace, &mut *out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Monitor {
            model: m,
            trace,
            formula,
            contract,
            time_bound,
            options,
            standard_weak_until,
        } => {
            let model = model(&m)?;
            let file = fs::File::open(&trace).map_err(|e| CliError::File {
                path: trace.clone(),
                source: e.into(),
            })?;
            let tr = in_file(&trace, read_trace(&model, BufReader::new(file)))?;
            let formulas: Vec<(String, Formula)> = match (formula, contract) {
                (Some(path), _) => vec![(String::new(), in_file(&path, parse_formula(&read(&path)?))?)],
                (None, Some(path)) => {
                    let k = time_bound.expect("clap requires --time-bound");
                    contracts(&path)?
                        .iter()
                        .map(|c| Ok((c.name.clone(), translate_contract(c, &model, k, options.into())?)))
                        .collect::<Result<_, Error>>()?
                }
                (None, None) => unreachable!("clap requires --formula or --contract"),
            };
            let check = CheckOptions { standard_weak_until };
            let mut code = EXIT_OK;
            for (name, f) in &formulas {
                let verdict = check_with(f, &tr, &model, check)?;
                let label = if name.is_empty() { String::new() } else { format!("{name}: ") };
                if verdict.holds {
                    writeln!(out, "{label}holds")?;
                } else {
                    code = EXIT_VIOLATED;
                    writeln!(out, "{label}violated")?;
                    if let Some(d) = verdict.diagnostic {
                        writeln!(out, "  {d}")?;
                    }
                }
            }
            Ok(code)
        }
        Command::Eval {
            model: m,
            expr,
            trace,
            at,
        } => {
            let model = model(&m)?;
            let e = parse_expr(&expr)?;
            let value = match trace {
                None => Evaluator::new(&model, model.initial_state()).eval(&e)?,
                Some(path) => {
                    let file = fs::File::open(&path)?;
                    let tr = in_file(&path, read_trace(&model, BufReader::new(file)))?;
                    let start = tr.index_at(at.unwrap_or(tr.start()))?;
                    Evaluator::new(&model, &tr.samples()[start])
                        .with_run(RunContext { trace: &tr, start })
                        .eval(&e)?
                }
            };
            writeln!(out, "{}", value.display(&model))?;
            Ok(EXIT_OK)
        }
        Command::Check(args) => check(args, out),
    }
}

fn check(args: CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config: CheckConfig = match &args.config {
        Some(path) => toml::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => CheckConfig::default(),
    };
    let from_config = |v: &Option<String>, name: &str| -> Result<Option<TimeSpan>, CliError> {
        v.as_deref()
            .map(|t| span(t).map_err(|e| CliError::Usage(format!("config `{name}`: {e}"))))
            .transpose()
    };
    let time_bound = match args.time_bound {
        Some(k) => k,
        None => from_config(&config.time_bound, "time-bound")?.ok_or_else(|| {
            CliError::Usage("missing --time-bound (or `time-bound` in the config file)".into())
        })?,
    };
    let horizon = match args.horizon {
        Some(h) => Some(h),
        None => from_config(&config.horizon, "horizon")?,
    };
    let mode = match args.mode {
        Some(m) => m,
        None => match &config.mode {
            Some(m) => m.parse()?,
            None => Mode::Chernoff { epsilon: 0.01, delta: 0.05 },
        },
    };
    let relation = match args.relation {
        Some(r) => r,
        None => match &config.relation {
            Some(r) => r.parse()?,
            None => Relation::AtLeast,
        },
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let format = args.format.or(config.format).unwrap_or(Format::Text);

    let model = model(&args.model)?;
    let mut smc = SmcConfig::new(seed, mode);
    smc.jobs = args.jobs.or(config.jobs).unwrap_or(0);
    smc.horizon = horizon;

    let mut decisions = Vec::new();
    for (i, c) in contracts(&args.contract)?.iter().enumerate() {
        let report = verify_contract(c, &model, time_bound, args.options.into(), relation, &smc)?;
        let summary = Summary::new(&report, seed);
        if i > 0 {
            writeln!(out)?;
        }
        match format {
            Format::Text => write!(out, "{}", summary.text())?,
            Format::Records => write!(out, "{summary}")?,
        }
        decisions.push(report.decision);
    }
    Ok(if decisions.contains(&Decision::Violated) {
        EXIT_VIOLATED
    } else if decisions.contains(&Decision::Undecided) {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    })
}
