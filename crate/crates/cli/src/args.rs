use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use tipfold_core::{grazing_mu, SystemConfig, SystemKind};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tipfold", version, about = "Tipping and cyclic folds of a forced non-smooth fold")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario; writes a trajectory CSV and a summary JSON.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Time budget; without it the run continues until tipping.
        #[arg(long)]
        tmax: Option<f64>,
        /// Number of sample intervals in the trajectory CSV.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cyclic fold and grazing values for one frequency or the reference table.
    Fold {
        #[command(flatten)]
        config: ConfigArgs,
        /// Emit all reference-table frequencies (A = 1).
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tipping value along one parameter axis.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// `start:stop:count`, or `logstart:logstop:countL` for a log10 grid.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tipping value over an eps x omega grid and the transition curve.
    Surface {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        eps_grid: String,
        #[arg(long)]
        omega_grid: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Low-frequency phase analysis.
    Phase {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form estimates for one configuration.
    Estimate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Periodic orbits sampled over one forcing period.
    Orbit {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated control values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        mus: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Omega,
    Eps,
    Alpha,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    #[value(name = "non_smooth_pwl", alias = "pwl")]
    NonSmoothPwl,
    #[value(name = "smoothed_nsf", alias = "smoothed")]
    SmoothedNsf,
    Snb,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::NonSmoothPwl => SystemKind::NonSmoothPwl,
            KindArg::SmoothedNsf => SystemKind::SmoothedNsf,
            KindArg::Snb => SystemKind::Snb,
        }
    }
}

/// Scenario flags. Flags override values from `--config`; both override the
/// defaults of [`SystemConfig`].
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with (some of) the configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Set `mu0 = m mu_G(omega)`; `x0` becomes `-mu0/2` unless given.
    #[arg(long = "mu0-mult")]
    pub mu0_mult: Option<f64>,
    /// Also write the resolved configuration as JSON to this path.
    #[arg(long)]
    pub write_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name stem; defaults to the command name.
    #[arg(long)]
    pub prefix: Option<String>,
}

/// Configuration file contents; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigPatch {
    mu0: Option<f64>,
    eps: Option<f64>,
    #[serde(rename = "A")]
    amplitude: Option<f64>,
    omega: Option<f64>,
    phase: Option<f64>,
    alpha: Option<f64>,
    #[serde(rename = "K")]
    threshold: Option<f64>,
    x0: Option<f64>,
    kind: Option<SystemKind>,
}

impl ConfigArgs {
    /// The scenario after applying the file, then the flags, then `--mu0-mult`.
    /// Not validated.
    pub fn resolve(&self) -> Result<SystemConfig, CliError> {
        let patch = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<ConfigPatch>(&text)
                    .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?
            }
            None => ConfigPatch::default(),
        };
        let d = SystemConfig::default();
        let mut cfg = SystemConfig {
            mu0: self.mu0.or(patch.mu0).unwrap_or(d.mu0),
            eps: self.eps.or(patch.eps).unwrap_or(d.eps),
            amplitude: self.amplitude.or(patch.amplitude).unwrap_or(d.amplitude),
            omega: self.omega.or(patch.omega).unwrap_or(d.omega),
            phase: self.phase.or(patch.phase).unwrap_or(d.phase),
            alpha: self.alpha.or(patch.alpha).unwrap_or(d.alpha),
            threshold: self.threshold.or(patch.threshold).unwrap_or(d.threshold),
            x0: self.x0.or(patch.x0).unwrap_or(d.x0),
            kind: self.kind.map(SystemKind::from).or(patch.kind).unwrap_or(d.kind),
        };
        if let Some(m) = self.mu0_mult {
            cfg.mu0 = m * grazing_mu(cfg.amplitude, cfg.omega);
            if self.x0.is_none() {
                cfg.x0 = -cfg.mu0 / 2.0;
            }
        }
        // a positive alpha on its own selects the smoothed system
        if cfg.alpha > 0.0 && cfg.kind == SystemKind::NonSmoothPwl && self.kind.is_none() && patch.kind.is_none() {
            cfg.kind = SystemKind::SmoothedNsf;
        }
        Ok(cfg)
    }

    /// [`Self::resolve`] followed by validation.
    pub fn resolve_valid(&self) -> Result<SystemConfig, CliError> {
        let cfg = self.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse `start:stop:count` or `logstart:logstop:countL`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Config(format!("grid spec '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(bad("expected start:stop:count"));
    };
    let (count, log) = match count.strip_suffix('L') {
        Some(c) => (c, true),
        None => (count, false),
    };
    let start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let n: usize = count.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
    if n == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad("count must be positive and bounds finite"));
    }
    if n > 1 && stop <= start {
        return Err(bad("stop must exceed start"));
    }
    let lin = |i: usize| {
        if n == 1 {
            start
        } else if i == n - 1 {
            stop
        } else {
            start + (stop - start) * i as f64 / (n - 1) as f64
        }
    };
    Ok((0..n)
        .map(|i| if log { 10f64.powf(lin(i)) } else { lin(i) })
        .collect())
}
