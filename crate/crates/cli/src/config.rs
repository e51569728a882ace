use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use voi_core::{Error, InsuranceParams, RegimeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Which convex body a command analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BodyKind {
    /// Decision problem read from `--input`.
    Problem,
    /// Quadratic scoring rule on `--states` states.
    Quadratic,
    /// Insurance action set sampled on an indemnity grid.
    InsuranceGrid,
    /// Closed-form insurance value function.
    Insurance,
}

/// Effective settings of a run. Loaded from `--config`, overridden by flags,
/// and echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub body: BodyKind,
    pub states: usize,
    pub prior: Option<Vec<f64>>,
    /// Distance threshold for the confident-regime lower bound.
    pub epsilon: f64,
    /// Step of the symmetric two-atom split used when no information is given.
    pub split: Option<f64>,
    /// Belief-grid pitch; command specific default when absent.
    pub grid_pitch: Option<f64>,
    pub seed: u64,
    pub insurance: InsuranceParams,
    pub regime: RegimeConfig,
    pub nodes: usize,
    pub n_max: usize,
    pub band: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            format: None,
            body: BodyKind::Problem,
            states: 2,
            prior: None,
            epsilon: 0.01,
            split: None,
            grid_pitch: None,
            seed: 0,
            insurance: InsuranceParams::reference(),
            regime: RegimeConfig::default(),
            nodes: 64,
            n_max: 4,
            band: 0.1,
        }
    }
}

/// Flags shared by all subcommands.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Problem file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file (a directory for `insurance`); stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; CSV for `value` and `table2`, JSON otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Convex body to analyse.
    #[arg(long, global = true, value_enum)]
    pub body: Option<BodyKind>,
    /// Number of states for the quadratic body.
    #[arg(long, global = true)]
    pub states: Option<usize>,
    /// Prior: one number (probability of the second of two states) or a
    /// comma-separated distribution.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub prior: Option<String>,
    /// Distance threshold of the confident lower bound.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Use the symmetric two-atom split of this step around the prior.
    #[arg(long, global = true)]
    pub split: Option<f64>,
    /// Belief-grid pitch.
    #[arg(long, global = true)]
    pub grid_pitch: Option<f64>,
    /// Seed recorded in the metadata of randomized runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Insurance loading factor.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Insurance fixed fee.
    #[arg(long, global = true)]
    pub fee: Option<f64>,
    /// Value of the insured good.
    #[arg(long, global = true)]
    pub wealth: Option<f64>,
    /// Absolute risk aversion.
    #[arg(long, global = true)]
    pub risk_aversion: Option<f64>,
    /// Gauss-Hermite nodes for the Brownian family.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Largest Poisson count kept before lumping the tail.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Slope band for the marginal classification.
    #[arg(long, global = true)]
    pub band: Option<f64>,
}

pub fn parse_prior(text: &str) -> voi_core::Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: 1,
                column: 1,
                message: format!("prior entry {s:?}: {e}"),
            })
        })
        .collect::<voi_core::Result<Vec<f64>>>()?;
    Ok(match values.as_slice() {
        [p] => vec![1.0 - p, *p],
        _ => values,
    })
}

impl RunConfig {
    pub fn load(args: &CommonArgs) -> voi_core::Result<Self> {
        let mut config = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                })?
            }
            None => Self::default(),
        };
        macro_rules! take {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = args.$field.clone() { $target = v; })*
            };
        }
        take!(
            body => config.body,
            states => config.states,
            epsilon => config.epsilon,
            seed => config.seed,
            alpha => config.insurance.alpha,
            fee => config.insurance.fee,
            wealth => config.insurance.wealth,
            risk_aversion => config.insurance.risk_aversion,
            nodes => config.nodes,
            n_max => config.n_max,
            band => config.band,
        );
        if args.input.is_some() {
            config.input = args.input.clone();
        }
        if args.output.is_some() {
            config.output = args.output.clone();
        }
        if args.format.is_some() {
            config.format = args.format;
        }
        if args.split.is_some() {
            config.split = args.split;
        }
        if args.grid_pitch.is_some() {
            config.grid_pitch = args.grid_pitch;
        }
        if let Some(p) = &args.prior {
            config.prior = Some(parse_prior(p)?);
        }
        Ok(config)
    }
}
