//! Closed-form asymptotic estimates and the phase analysis of tipping under
//! slow drift with low-frequency forcing.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::orbit::grazing_mu;
use crate::roots::scan_roots;

/// First zero of `Ai(-x)`.
pub const C0: f64 = 2.33810741;
/// Empirical correction coefficient of the large-frequency fold estimate.
pub const L_FOLD: f64 = 0.7;

/// `C0 (pi/2)^(1/3)`, the coefficient of the large-frequency delay term.
pub fn m_coeff() -> f64 {
    C0 * (PI / 2.0).cbrt()
}

/// Tipping value of the unforced system under slow drift:
/// `-eps/2 - (eps/2) ln(2K/eps) - (eps^2/8K) ln(2K/eps)`.
pub fn mu_eps(eps: f64, k: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    let lg = (2.0 * k / eps).ln();
    -eps / 2.0 - eps / 2.0 * lg - eps * eps / (8.0 * k) * lg
}

/// `4A/(pi omega) (1 - L/omega^2)`.
pub fn mu_cf_large_omega(a: f64, omega: f64, l: f64) -> f64 {
    4.0 * a / (PI * omega) * (1.0 - l / (omega * omega))
}

/// `A / (1 + omega^2/4)`.
pub fn mu_cf_small_omega(a: f64, omega: f64) -> f64 {
    a / (1.0 + omega * omega / 4.0)
}

/// `4A/(pi omega) - M (A eps^2 / omega)^(1/3)`.
pub fn mu_tp_large_omega(a: f64, omega: f64, eps: f64) -> f64 {
    4.0 * a / (PI * omega) - m_coeff() * (a * eps * eps / omega).cbrt()
}

/// Saddle-node tipping estimate `-C0 alpha^(1/3) eps^(2/3)`.
pub fn snb_mu_tp(alpha: f64, eps: f64) -> f64 {
    -C0 * alpha.cbrt() * (eps * eps).cbrt()
}

/// True when the drift is fast enough that `x_P` stays negative for all `t > 0`:
/// `eps > 2 mu0 + 2A / sqrt(1 + omega^2/4)`.
pub fn lemma5_smooth_surface(eps: f64, mu0: f64, a: f64, omega: f64) -> bool {
    eps > 2.0 * mu0 + 2.0 * grazing_mu(a, omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c0: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

/// Every closed-form estimate for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub mu_eps: f64,
    pub mu_g: f64,
    /// Absent at `omega = 0`.
    pub mu_cf_large: Option<f64>,
    pub mu_cf_small: f64,
    pub mu_tp_large_omega: Option<f64>,
    /// Absent when `alpha = 0`.
    pub snb_mu_tp: Option<f64>,
    pub constants: Constants,
}

pub fn estimate_set(cfg: &SystemConfig) -> EstimateSet {
    let a = cfg.amplitude;
    let w = cfg.omega;
    EstimateSet {
        mu_eps: mu_eps(cfg.eps, cfg.threshold),
        mu_g: grazing_mu(a, w),
        mu_cf_large: (w > 0.0).then(|| mu_cf_large_omega(a, w, L_FOLD)),
        mu_cf_small: mu_cf_small_omega(a, w),
        mu_tp_large_omega: (w > 0.0).then(|| mu_tp_large_omega(a, w, cfg.eps)),
        snb_mu_tp: (cfg.alpha > 0.0).then(|| snb_mu_tp(cfg.alpha, cfg.eps)),
        constants: Constants {
            c0: C0,
            l: L_FOLD,
            m: m_coeff(),
        },
    }
}

/// A root `mu_r` of `g(mu) = -mu + A cos(Omega (mu0 - mu))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRoot {
    pub mu_r: f64,
    /// Sign of `g'(mu_r)`: -1, 0 or 1.
    pub derivative_sign: i8,
    /// `d mu_r / d Omega`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnalysis {
    /// Rescaled frequency `omega / eps`.
    #[serde(rename = "Omega")]
    pub big_omega: f64,
    pub roots: Vec<PhaseRoot>,
    pub omega_star: Option<f64>,
    pub n_max: Option<u32>,
    /// `(lower, upper)` interval for the tipping value.
    pub bounds: Option<(f64, f64)>,
    pub jump_scale: Option<f64>,
}

/// `g(mu) = -mu + A cos(Omega (mu0 - mu))`.
pub fn g_phase(mu: f64, mu0: f64, a: f64, big_omega: f64) -> f64 {
    -mu + a * (big_omega * (mu0 - mu)).cos()
}

pub fn g_phase_derivative(mu: f64, mu0: f64, a: f64, big_omega: f64) -> f64 {
    -1.0 + big_omega * a * (big_omega * (mu0 - mu)).sin()
}

/// Interval scanned for phase roots: `[-A - 1, min(mu0, A)]`.
pub fn phase_range(mu0: f64, a: f64) -> (f64, f64) {
    (-a - 1.0, mu0.min(a))
}

fn root_slope(mu_r: f64, mu0: f64, a: f64, big_omega: f64) -> f64 {
    let s = (big_omega * (mu0 - mu_r)).sin();
    -((mu0 - mu_r) * a * s) / (1.0 - big_omega * a * s)
}

/// All roots of [`g_phase`] on [`phase_range`], by sign scan and bisection.
pub fn phase_root_list(mu0: f64, a: f64, big_omega: f64) -> Vec<PhaseRoot> {
    let (lo, hi) = phase_range(mu0, a);
    if hi < lo {
        return Vec::new();
    }
    let step = if big_omega > 0.0 {
        PI / (10.0 * big_omega)
    } else {
        f64::INFINITY
    };
    let n = ((hi - lo) / step).ceil().clamp(1000.0, 5.0e6) as usize;
    scan_roots(|m| g_phase(m, mu0, a, big_omega), lo, hi, n, 1e-15)
        .into_iter()
        .map(|mu_r| {
            let d = g_phase_derivative(mu_r, mu0, a, big_omega);
            PhaseRoot {
                mu_r,
                derivative_sign: if d > 0.0 {
                    1
                } else if d < 0.0 {
                    -1
                } else {
                    0
                },
                slope: root_slope(mu_r, mu0, a, big_omega),
            }
        })
        .collect()
}

/// Estimate of the frequency of the first sharp transition,
/// `eps acos(1 + mu_eps/A) / (mu0 - A - mu_eps)`.
pub fn omega_star(eps: f64, mu0: f64, a: f64, k: f64) -> Option<f64> {
    let me = mu_eps(eps, k);
    let denom = mu0 - a - me;
    if a <= 0.0 || denom <= 0.0 {
        return None;
    }
    let arg = 1.0 + me / a;
    (-1.0..=1.0).contains(&arg).then(|| eps * arg.acos() / denom)
}

/// Interval `(A + mu_eps - 2 pi eps/omega, A + mu_eps)` bracketing the tipping value.
pub fn tp_bounds(eps: f64, a: f64, omega: f64, k: f64) -> Option<(f64, f64)> {
    (omega > 0.0).then(|| {
        let upper = a + mu_eps(eps, k);
        (upper - 2.0 * PI * eps / omega, upper)
    })
}

/// Typical jump size `2 pi eps / omega` between plateaus.
pub fn jump_scale(eps: f64, omega: f64) -> Option<f64> {
    (omega > 0.0).then(|| 2.0 * PI * eps / omega)
}

/// Number of sharp transitions below `omega`: the largest `n` with
/// `omega - 2 n pi eps / (mu0 - A - mu_eps) > 0`.
///
/// `mu0_fn` gives the initial value as a function of frequency; the largest
/// value over `[0, omega]` is used in the denominator.
pub fn n_max<F: Fn(f64) -> f64>(omega: f64, eps: f64, a: f64, k: f64, mu0_fn: F) -> Result<u32> {
    if !(eps > 0.0) || omega < 0.0 {
        return Err(Error::Domain("n_max requires eps > 0 and omega >= 0".into()));
    }
    const SAMPLES: usize = 200;
    let mu0 = (0..=SAMPLES)
        .map(|i| mu0_fn(omega * i as f64 / SAMPLES as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    let denom = mu0 - a - mu_eps(eps, k);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "mu0 = {mu0} must exceed A + mu_eps = {}",
            a + mu_eps(eps, k)
        )));
    }
    let v = omega * denom / (2.0 * PI * eps);
    Ok((v.ceil() - 1.0).max(0.0) as u32)
}

/// Phase analysis with a frequency-dependent initial value `mu0_fn`
/// (used only for `n_max`; the roots use `cfg.mu0`).
pub fn phase_analysis<F: Fn(f64) -> f64>(cfg: &SystemConfig, mu0_fn: F) -> Result<PhaseAnalysis> {
    if !(cfg.eps > 0.0) {
        return Err(Error::Domain("phase analysis requires eps > 0".into()));
    }
    let a = cfg.amplitude;
    let big_omega = cfg.omega / cfg.eps;
    Ok(PhaseAnalysis {
        big_omega,
        roots: phase_root_list(cfg.mu0, a, big_omega),
        omega_star: omega_star(cfg.eps, cfg.mu0, a, cfg.threshold),
        n_max: n_max(cfg.omega, cfg.eps, a, cfg.threshold, mu0_fn).ok(),
        bounds: tp_bounds(cfg.eps, a, cfg.omega, cfg.threshold),
        jump_scale: jump_scale(cfg.eps, cfg.omega),
    })
}

/// Phase analysis with the constant initial value `cfg.mu0`.
pub fn phase_roots(cfg: &SystemConfig) -> Result<PhaseAnalysis> {
    let mu0 = cfg.mu0;
    phase_analysis(cfg, |_| mu0)
}
