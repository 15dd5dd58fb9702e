//! Statistical model checking by Monte Carlo estimation.
//!
//! Each run simulates the model with its own seed, monitors the formula on
//! the resulting trace and counts a success when it holds. The estimate is
//! the success ratio. In Chernoff mode the number of runs is chosen so that
//! the estimate is within `epsilon` of the true probability with
//! probability at least `1 - delta`.

use std::fmt;

use rayon::prelude::*;

use crate::bltl::{check_with, CheckOptions, Formula};
use crate::error::{Error, Result};
use crate::gcsl::Contract;
use crate::model::SosModel;
use crate::sim::{run_seed, simulate, SimConfig};
use crate::time::TimeSpan;
use crate::translate::{translate_contract, TranslateOptions};

/// Comparison between the satisfaction probability and the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    AtMost,
    /// Within `epsilon` of the threshold. Needs Chernoff mode.
    Equal,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
            Relation::Equal => "=",
        })
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            ">=" | "ge" => Ok(Relation::AtLeast),
            "<=" | "le" => Ok(Relation::AtMost),
            "=" | "eq" => Ok(Relation::Equal),
            _ => Err(Error::Statistics(format!("unknown relation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Fixed(u64),
    Chernoff { epsilon: f64, delta: f64 },
}

impl Mode {
    pub fn runs(self) -> Result<u64> {
        match self {
            Mode::Fixed(0) => Err(Error::Statistics("the number of runs must be positive".into())),
            Mode::Fixed(n) => Ok(n),
            Mode::Chernoff { epsilon, delta } => chernoff_sample_size(epsilon, delta),
        }
    }

    fn epsilon(self) -> Option<f64> {
        match self {
            Mode::Fixed(_) => None,
            Mode::Chernoff { epsilon, .. } => Some(epsilon),
        }
    }
}

/// `fixed:N` or `chernoff:EPSILON,DELTA`.
impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Fixed(n) => write!(f, "fixed:{n}"),
            Mode::Chernoff { epsilon, delta } => write!(f, "chernoff:{epsilon},{delta}"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Statistics(format!("`{s}` is not `fixed:N` or `chernoff:EPSILON,DELTA`"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "fixed" => Ok(Mode::Fixed(args.trim().parse().map_err(|_| bad())?)),
            "chernoff" => {
                let (e, d) = args.split_once(',').ok_or_else(bad)?;
                let epsilon = e.trim().parse().map_err(|_| bad())?;
                let delta = d.trim().parse().map_err(|_| bad())?;
                Ok(Mode::Chernoff { epsilon, delta })
            }
            _ => Err(bad()),
        }
    }
}

/// Smallest `N` with `2 exp(-2 N epsilon^2) <= delta`.
pub fn chernoff_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Statistics(format!("epsilon must be in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Statistics(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    pub seed: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub runs: u64,
    /// In run order.
    pub outcomes: Vec<RunOutcome>,
}

impl Estimate {
    pub fn p_hat(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }
}

/// Runs `trial` on `runs` derived seeds using `jobs` worker threads
/// (0 picks the number of cores). Results do not depend on `jobs`.
pub fn monte_carlo<F>(runs: u64, seed: u64, jobs: usize, trial: F) -> Result<Estimate>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Statistics(e.to_string()))?;
    let outcomes = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|i| {
                let seed = run_seed(seed, i);
                trial(seed)
                    .map(|holds| RunOutcome { seed, holds })
                    .map_err(|e| Error::Run {
                        seed,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Estimate {
        successes: outcomes.iter().filter(|o| o.holds).count() as u64,
        runs,
        outcomes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Holds,
    Violated,
    Undecided,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Holds => "holds",
            Decision::Violated => "violated",
            Decision::Undecided => "undecided",
        })
    }
}

/// Compares `p_hat` with the threshold. With an `epsilon`, estimates closer
/// than that to the threshold are undecided.
pub fn decide(p_hat: f64, relation: Relation, threshold: f64, epsilon: Option<f64>) -> Result<Decision> {
    let margin = epsilon.unwrap_or(0.0);
    let close = (p_hat - threshold).abs() < margin;
    Ok(match relation {
        Relation::Equal => {
            let Some(eps) = epsilon else {
                return Err(Error::Statistics("the `=` relation needs epsilon and delta".into()));
            };
            if (p_hat - threshold).abs() <= eps {
                Decision::Holds
            } else {
                Decision::Violated
            }
        }
        _ if close => Decision::Undecided,
        Relation::AtLeast if p_hat >= threshold => Decision::Holds,
        Relation::AtMost if p_hat <= threshold => Decision::Holds,
        _ => Decision::Violated,
    })
}

#[derive(Debug, Clone)]
pub struct SmcConfig {
    pub seed: u64,
    pub mode: Mode,
    pub jobs: usize,
    /// Simulation length; defaults to what the formula needs.
    pub horizon: Option<TimeSpan>,
    pub max_samples: usize,
    pub check: CheckOptions,
}

impl SmcConfig {
    pub fn new(seed: u64, mode: Mode) -> Self {
        Self {
            seed,
            mode,
            jobs: 0,
            horizon: None,
            max_samples: 1_000_000,
            check: CheckOptions::default(),
        }
    }
}

/// Estimates the probability that a simulated run satisfies `formula`.
pub fn estimate(formula: &Formula, model: &SosModel, config: &SmcConfig) -> Result<Estimate> {
    let runs = config.mode.runs()?;
    let required = formula.required_length();
    let horizon = match config.horizon {
        Some(h) => h,
        None => TimeSpan::new(required.max(1.0), model.time_unit),
    };
    monte_carlo(runs, config.seed, config.jobs, |seed| {
        let sim = SimConfig {
            seed,
            horizon,
            max_samples: config.max_samples,
        };
        let trace = simulate(model, &sim)?;
        Ok(check_with(formula, &trace, model, config.check)?.holds)
    })
}

#[derive(Debug, Clone)]
pub struct Report {
    pub contract: String,
    pub formula: Formula,
    pub relation: Relation,
    pub threshold: f64,
    pub mode: Mode,
    pub estimate: Estimate,
    pub decision: Decision,
}

/// Translates the contract with time bound `k` and checks that its
/// satisfaction probability meets the confidence level. Without an explicit
/// horizon each run lasts `k`, or longer if the formula needs it.
pub fn verify_contract(
    contract: &Contract,
    model: &SosModel,
    k: TimeSpan,
    options: TranslateOptions,
    relation: Relation,
    config: &SmcConfig,
) -> Result<Report> {
    let formula = translate_contract(contract, model, k, options)?;
    let threshold = contract.confidence.probability();
    let mut config = config.clone();
    if config.horizon.is_none() {
        let needed = TimeSpan::new(formula.required_length(), model.time_unit);
        config.horizon = Some(if needed > k { needed } else { k });
    }
    let estimate = estimate(&formula, model, &config)?;
    let decision = decide(estimate.p_hat(), relation, threshold, config.mode.epsilon())?;
    Ok(Report {
        contract: contract.name.clone(),
        formula,
        relation,
        threshold,
        mode: config.mode,
        estimate,
        decision,
    })
}
