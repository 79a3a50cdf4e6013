//! Experiment configuration: a single strict JSON document plus command-line
//! overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use sem_core::engine::{FiringProcessSpec, FiringSchedule, SemModel};
use sem_core::law::{em_law, EmLaw, Flavor, PreferenceMatrix, RateVector};
use sem_core::population::{AnimalRoster, PopulationCounts};
use sem_core::table::DEFAULT_STATE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// The raw document. Unknown fields are rejected so that a typo like "P"
/// versus "pi" cannot silently change the experiment.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub k: Option<usize>,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub flavor: Flavor,
    #[serde(default)]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub pi: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub schedule: Option<PathBuf>,
    #[serde(default)]
    pub t: Option<Vec<f64>>,
    #[serde(default)]
    pub runs: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replication count override.
    #[arg(long)]
    pub runs: Option<u64>,
    /// Time grid override (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Tolerance override (classification bands, verification significance).
    #[arg(long)]
    pub tol: Option<f64>,
}

/// A fully validated experiment, ready to execute.
#[derive(Debug)]
pub struct Experiment {
    pub population: PopulationCounts,
    pub flavor: Flavor,
    pub preferences: PreferenceMatrix,
    pub rates: RateVector,
    pub law: EmLaw,
    pub preferences_definite: bool,
    pub schedule: Option<FiringSchedule>,
    pub t_grid: Vec<f64>,
    pub runs: Option<u64>,
    pub seed: u64,
    /// Explicit tolerance override; commands fall back to their own default.
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub state_cap: usize,
}

fn config_error(msg: impl Into<String>) -> String {
    msg.into()
}

/// Realize a bare law matrix as preferences plus rates that induce it; the
/// pattern process depends on the parameters only through the law, so any
/// valid factorization serves.
fn realize_from_pi(flavor: Flavor, pi: &EmLaw) -> Result<(PreferenceMatrix, RateVector), String> {
    let k = pi.k();
    match flavor {
        Flavor::Poisson => {
            let beta: Vec<f64> = (0..k)
                .map(|j| (0..k).map(|i| pi.get(i, j)).fold(0.0, f64::max))
                .collect();
            let p: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| pi.get(i, j) / beta[j]).collect())
                .collect();
            let prefs = PreferenceMatrix::new(p).map_err(|e| config_error(e.to_string()))?;
            let rates = RateVector::new(Flavor::Poisson, vec![0.0; k], beta)
                .map_err(|e| config_error(e.to_string()))?;
            Ok((prefs, rates))
        }
        Flavor::Bernoulli => {
            let prefs = PreferenceMatrix::new(pi.rows())
                .map_err(|e| config_error(e.to_string()))?;
            let rates = RateVector::new(Flavor::Bernoulli, vec![1.0; k], vec![0.0; k])
                .map_err(|e| config_error(e.to_string()))?;
            Ok((prefs, rates))
        }
    }
}

pub fn load_experiment(args: &CommonArgs) -> Result<Experiment, String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| config_error(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| config_error(format!("{}: {e}", args.config.display())))?;
    resolve(cfg, args)
}

fn resolve(cfg: ExperimentConfig, args: &CommonArgs) -> Result<Experiment, String> {
    let population = PopulationCounts::new(cfg.x.clone(), cfg.y.clone())
        .map_err(|e| config_error(e.to_string()))?;
    if let Some(k) = cfg.k {
        if k != population.k() {
            return Err(config_error(format!(
                "k = {k} does not match the length {} of x and y",
                population.k()
            )));
        }
    }
    let flavor = cfg.flavor;

    let direct = (cfg.p.is_some(), cfg.alpha.is_some(), cfg.beta.is_some());
    let (preferences, rates, law) = match (&cfg.pi, direct) {
        (Some(pi), (false, false, false)) => {
            let law = EmLaw::from_pi(flavor, pi.clone())
                .map_err(|e| config_error(e.to_string()))?;
            let (preferences, rates) = realize_from_pi(flavor, &law)?;
            (preferences, rates, law)
        }
        (None, (true, true, true)) => {
            let preferences = PreferenceMatrix::new(cfg.p.clone().unwrap())
                .map_err(|e| config_error(e.to_string()))?;
            let rates = RateVector::new(flavor, cfg.alpha.clone().unwrap(), cfg.beta.unwrap())
                .map_err(|e| config_error(e.to_string()))?;
            let law = em_law(&preferences, &rates).map_err(|e| config_error(e.to_string()))?;
            (preferences, rates, law)
        }
        _ => {
            return Err(config_error(
                "supply either pi, or all three of p, alpha, beta",
            ))
        }
    };
    if law.k() != population.k() {
        return Err(config_error(format!(
            "law dimension {} does not match population dimension {}",
            law.k(),
            population.k()
        )));
    }

    let schedule = match &cfg.schedule {
        Some(path) => Some(load_schedule(path, population.n() as usize)?),
        None => None,
    };

    let preferences_definite = preferences.is_definite();
    Ok(Experiment {
        population,
        flavor,
        preferences,
        rates,
        law,
        preferences_definite,
        schedule,
        t_grid: args.t.clone().or(cfg.t).unwrap_or_default(),
        runs: args.runs.or(cfg.runs),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        tol: args.tol.or(cfg.tol),
        out: args.out.clone().or(cfg.out),
        format: args.format.or(cfg.format).unwrap_or(OutputFormat::Csv),
        state_cap: state_cap_from_env()?,
    })
}

fn load_schedule(path: &Path, n: usize) -> Result<FiringSchedule, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    FiringSchedule::parse(&text, n)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn state_cap_from_env() -> Result<usize, String> {
    match std::env::var("SEM_STATE_CAP") {
        Ok(raw) => raw
            .parse::<usize>()
            .map_err(|_| config_error(format!("SEM_STATE_CAP must be an integer, got {raw:?}"))),
        Err(_) => Ok(DEFAULT_STATE_CAP),
    }
}

impl Experiment {
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// Build the simulation model: the explicit schedule takes precedence
    /// over sampled firing processes when both are present.
    pub fn model(&self) -> Result<SemModel, sem_core::SemError> {
        let roster = AnimalRoster::canonical(&self.population);
        let firing = match &self.schedule {
            Some(s) => FiringProcessSpec::explicit(s.clone()),
            None => match self.flavor {
                Flavor::Poisson => FiringProcessSpec::poisson(self.rates.clone())?,
                Flavor::Bernoulli => FiringProcessSpec::bernoulli(self.rates.clone())?,
            },
        };
        SemModel::new(
            self.population.clone(),
            roster,
            self.preferences.clone(),
            firing,
        )
    }
}
