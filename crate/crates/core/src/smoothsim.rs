//! Adaptive integration of the smoothed non-smooth fold and the saddle-node
//! reference system, with threshold tipping detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactsim::default_t_max;
use crate::model::{SystemConfig, SystemKind};
use crate::ode::{Dp45, Flow};

/// Smallest smoothing scale that is integrated directly; below it the exact
/// non-smooth simulator is the reference.
pub const ALPHA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha < alpha0`: tipping as in the non-smooth system.
    NonSmoothLike,
    /// `alpha0 <= alpha < alpha1`: classical saddle-node delay.
    SnbLike,
    /// `alpha >= alpha1`: the threshold is reached before the quadratic regime matters.
    ThresholdLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `eps (ln(2K/eps) / 2)^3`.
    pub alpha0: f64,
    /// `K^(3/2) eps^(-1/2)`.
    pub alpha1: f64,
}

impl Thresholds {
    pub fn new(eps: f64, k: f64) -> Self {
        Thresholds {
            alpha0: eps * ((2.0 * k / eps).ln() / 2.0).powi(3),
            alpha1: k.powf(1.5) / eps.sqrt(),
        }
    }

    pub fn classify(&self, alpha: f64) -> Regime {
        if alpha < self.alpha0 {
            Regime::NonSmoothLike
        } else if alpha < self.alpha1 {
            Regime::SnbLike
        } else {
            Regime::ThresholdLimited
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothTipResult {
    pub alpha: f64,
    pub t_tp: f64,
    pub mu_tp: f64,
    pub regime: Regime,
    pub thresholds: Thresholds,
}

/// Result of an integration that may or may not tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothRun {
    /// `(t, x)` at the requested output times, up to the tip or `t_max`.
    pub samples: Vec<(f64, f64)>,
    pub t_tp: Option<f64>,
    pub mu_tp: Option<f64>,
    pub t_end: f64,
    pub x_end: f64,
    pub steps: usize,
}

/// Integration settings; the defaults are `rtol = 1e-10`, `atol = 1e-12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Output spacing for [`SmoothRun::samples`]; `None` records nothing.
    pub sample_dt: Option<f64>,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        SmoothOptions {
            rtol: 1e-10,
            atol: 1e-12,
            sample_dt: None,
        }
    }
}

fn check_smooth(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    match cfg.kind {
        SystemKind::SmoothedNsf | SystemKind::Snb => {}
        SystemKind::NonSmoothPwl => {
            return Err(Error::KindMismatch {
                expected: "smoothed_nsf or snb",
                found: cfg.kind.name(),
            })
        }
    }
    if cfg.kind == SystemKind::SmoothedNsf && cfg.alpha < ALPHA_FLOOR {
        return Err(Error::Domain(format!(
            "alpha = {} is below the integration floor {ALPHA_FLOOR:e}",
            cfg.alpha
        )));
    }
    Ok(())
}

/// Integrate a smooth system (`SmoothedNsf` or `Snb`) up to `t_max` or the
/// first upward crossing of `K`.
pub fn run(cfg: &SystemConfig, t_max: f64, opts: SmoothOptions) -> Result<SmoothRun> {
    check_smooth(cfg)?;
    let k = cfg.threshold;
    let solver = Dp45 {
        x_cap: 10.0 * k,
        h_max: 1.0,
        ..Dp45::with_tolerances(opts.rtol, opts.atol)
    };
    let mut samples = Vec::new();
    let mut next_sample = 0.0;
    let mut n_sample = 0u64;
    if let Some(dt) = opts.sample_dt {
        samples.push((0.0, cfg.x0));
        n_sample = 1;
        next_sample = dt;
    }
    let mut tip = None;
    let out = solver.integrate(
        |t, x| cfg.rhs(t, x),
        0.0,
        cfg.x0,
        t_max,
        |step| {
            let t_hit = step.crossing(k, 1e-12).filter(|_| step.x0 < k);
            let t_stop = t_hit.unwrap_or(step.t1);
            if let Some(dt) = opts.sample_dt {
                while next_sample <= t_stop {
                    samples.push((next_sample, step.eval(next_sample)));
                    n_sample += 1;
                    next_sample = dt * n_sample as f64;
                }
            }
            match t_hit {
                Some(t) => {
                    tip = Some(t);
                    Flow::Stop
                }
                None => Flow::Continue,
            }
        },
    )?;
    let (t_end, x_end) = match tip {
        Some(t) => (t, k),
        None => (out.t, out.x),
    };
    if opts.sample_dt.is_some() && samples.last().map(|s| s.0) != Some(t_end) {
        samples.push((t_end, x_end));
    }
    Ok(SmoothRun {
        samples,
        t_tp: tip,
        mu_tp: tip.map(|t| cfg.mu_at(t)),
        t_end,
        x_end,
        steps: out.steps,
    })
}

fn tip_result(cfg: &SystemConfig, t_max: f64) -> Result<SmoothTipResult> {
    let r = run(cfg, t_max, SmoothOptions::default())?;
    match (r.t_tp, r.mu_tp) {
        (Some(t_tp), Some(mu_tp)) => {
            let thresholds = Thresholds::new(cfg.eps, cfg.threshold);
            Ok(SmoothTipResult {
                alpha: cfg.alpha,
                t_tp,
                mu_tp,
                regime: thresholds.classify(cfg.alpha),
                thresholds,
            })
        }
        _ => Err(Error::NoTipWithinBudget { t_max }),
    }
}

/// Tipping of `dx/dt = 2 sqrt(x^2 + alpha^2) - 2 alpha - mu(t) + f(t)`.
/// A non-positive `t_max` selects the default budget.
pub fn integrate_smoothed(cfg: &SystemConfig, t_max: f64) -> Result<SmoothTipResult> {
    cfg.require_kind(SystemKind::SmoothedNsf)?;
    let t_max = if t_max > 0.0 { t_max } else { default_t_max(cfg) };
    tip_result(cfg, t_max)
}

/// Tipping of the saddle-node system `dx/dt = x^2 / alpha - mu(t) + f(t)`.
/// A non-positive `t_max` selects the default budget.
pub fn integrate_snb(cfg: &SystemConfig, t_max: f64) -> Result<SmoothTipResult> {
    cfg.require_kind(SystemKind::Snb)?;
    let t_max = if t_max > 0.0 { t_max } else { default_t_max(cfg) };
    tip_result(cfg, t_max)
}

/// [`integrate_smoothed`] for each `alpha`, in the given order.
pub fn alpha_sweep(base: &SystemConfig, alphas: &[f64]) -> Vec<Result<SmoothTipResult>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = base.with_kind(SystemKind::SmoothedNsf, alpha);
            integrate_smoothed(&cfg, 0.0)
        })
        .collect()
}
