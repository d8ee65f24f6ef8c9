//! Scenario configuration, forcing and the closed-form solutions of the
//! piecewise-linear system
//!
//! ```text
//! dx/dt = 2|x| - mu(t) + f(t),   mu(t) = mu0 - eps t,   f(t) = A cos(omega t - phase)
//! ```
//!
//! On either side of the switching set `x = 0` the equation is linear, so every
//! piece of a trajectory is `C exp(+-2 (t - t_ref)) + particular(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error};

/// Which right-hand side a [`SystemConfig`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `2|x| - mu + f`, integrated exactly.
    NonSmoothPwl,
    /// `2 sqrt(x^2 + alpha^2) - 2 alpha - mu + f`.
    SmoothedNsf,
    /// Saddle-node reference `x^2 / alpha - mu + f`.
    Snb,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::NonSmoothPwl => "non_smooth_pwl",
            SystemKind::SmoothedNsf => "smoothed_nsf",
            SystemKind::Snb => "snb",
        }
    }
}

/// Full parameterization of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Initial control value `mu(0)`.
    pub mu0: f64,
    /// Drift rate, `mu(t) = mu0 - eps t`.
    pub eps: f64,
    /// Forcing amplitude.
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// Forcing angular frequency.
    pub omega: f64,
    /// Forcing phase offset in radians; `f(t) = A cos(omega t - phase)`.
    #[serde(default)]
    pub phase: f64,
    /// Smoothing scale (0 for the exact non-smooth system).
    #[serde(default)]
    pub alpha: f64,
    /// Tipping threshold.
    #[serde(rename = "K")]
    pub threshold: f64,
    /// Initial state `x(0)`.
    pub x0: f64,
    pub kind: SystemKind,
}

impl Default for SystemConfig {
    /// The reference scenario: `mu0 = 1`, `x0 = -1/2`, `eps = 0.1`, `A = 1`,
    /// `omega = 1`, `K = 10`, non-smooth.
    fn default() -> Self {
        SystemConfig {
            mu0: 1.0,
            eps: 0.1,
            amplitude: 1.0,
            omega: 1.0,
            phase: 0.0,
            alpha: 0.0,
            threshold: 10.0,
            x0: -0.5,
            kind: SystemKind::NonSmoothPwl,
        }
    }
}

impl SystemConfig {
    /// Non-smooth scenario with the given drift/forcing and defaults elsewhere.
    pub fn non_smooth(mu0: f64, x0: f64, eps: f64, amplitude: f64, omega: f64, threshold: f64) -> Self {
        SystemConfig {
            mu0,
            eps,
            amplitude,
            omega,
            phase: 0.0,
            alpha: 0.0,
            threshold,
            x0,
            kind: SystemKind::NonSmoothPwl,
        }
    }

    pub fn with_kind(mut self, kind: SystemKind, alpha: f64) -> Self {
        self.kind = kind;
        self.alpha = alpha;
        self
    }

    /// Check every structural invariant, naming the first one violated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            ("mu0", self.mu0),
            ("eps", self.eps),
            ("A", self.amplitude),
            ("omega", self.omega),
            ("phase", self.phase),
            ("alpha", self.alpha),
            ("K", self.threshold),
            ("x0", self.x0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(ConfigError::new(name, format!("{name} must be finite")));
            }
        }
        if self.eps < 0.0 {
            return Err(ConfigError::new("eps", "eps >= 0"));
        }
        if self.amplitude < 0.0 {
            return Err(ConfigError::new("A", "A >= 0"));
        }
        if self.omega < 0.0 {
            return Err(ConfigError::new("omega", "omega >= 0"));
        }
        if self.threshold <= 0.0 {
            return Err(ConfigError::new("K", "K > 0"));
        }
        if self.x0 >= self.threshold {
            return Err(ConfigError::new("x0", "x0 < K"));
        }
        if self.alpha < 0.0 {
            return Err(ConfigError::new("alpha", "alpha >= 0"));
        }
        match self.kind {
            SystemKind::NonSmoothPwl if self.alpha != 0.0 => Err(ConfigError::new(
                "kind",
                "kind = non_smooth_pwl requires alpha = 0",
            )),
            SystemKind::SmoothedNsf | SystemKind::Snb if self.alpha <= 0.0 => Err(ConfigError::new(
                "kind",
                format!("kind = {} requires alpha > 0", self.kind.name()),
            )),
            _ => Ok(()),
        }
    }

    pub(crate) fn require_kind(&self, kind: SystemKind) -> Result<(), Error> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.name(),
                found: self.kind.name(),
            });
        }
        Ok(())
    }

    /// Control value at time `t`.
    #[inline]
    pub fn mu_at(&self, t: f64) -> f64 {
        self.mu0 - self.eps * t
    }

    /// Right-hand side of whichever system `kind` selects.
    pub fn rhs(&self, t: f64, x: f64) -> f64 {
        let drive = -self.mu_at(t) + forcing(self, t);
        match self.kind {
            SystemKind::NonSmoothPwl => 2.0 * x.abs() + drive,
            SystemKind::SmoothedNsf => smoothed_abs(x, self.alpha) + drive,
            SystemKind::Snb => x * x / self.alpha + drive,
        }
    }
}

/// `2 sqrt(x^2 + alpha^2) - 2 alpha`, written to avoid cancellation for small `|x|`.
#[inline]
pub fn smoothed_abs(x: f64, alpha: f64) -> f64 {
    let x2 = x * x;
    2.0 * x2 / ((x2 + alpha * alpha).sqrt() + alpha)
}

/// `f(t) = A cos(omega t - phase)`.
#[inline]
pub fn forcing(cfg: &SystemConfig, t: f64) -> f64 {
    cfg.amplitude * (cfg.omega * t - cfg.phase).cos()
}

/// Side of the switching set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Negative,
    Positive,
}

impl Region {
    /// +1 for `x > 0`, -1 for `x < 0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Region::Negative => -1.0,
            Region::Positive => 1.0,
        }
    }

    pub fn flip(self) -> Region {
        match self {
            Region::Negative => Region::Positive,
            Region::Positive => Region::Negative,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Negative => "negative",
            Region::Positive => "positive",
        }
    }
}

/// Drift and forcing parameters shared by every segment of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub mu0: f64,
    pub eps: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl From<&SystemConfig> for Drive {
    fn from(cfg: &SystemConfig) -> Self {
        Drive {
            mu0: cfg.mu0,
            eps: cfg.eps,
            amplitude: cfg.amplitude,
            omega: cfg.omega,
            phase: cfg.phase,
        }
    }
}

impl Drive {
    #[inline]
    pub fn mu(&self, t: f64) -> f64 {
        self.mu0 - self.eps * t
    }

    #[inline]
    pub fn forcing(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t - self.phase).cos()
    }

    /// Periodic part of the particular solution in `region`:
    /// `A / (4 + omega^2) * (omega sin(theta) -+ 2 cos(theta))` with `theta = omega t - phase`.
    #[inline]
    pub fn periodic_part(&self, region: Region, t: f64) -> f64 {
        let theta = self.omega * t - self.phase;
        let k = self.amplitude / (4.0 + self.omega * self.omega);
        k * (self.omega * theta.sin() - region.sign() * 2.0 * theta.cos())
    }

    /// Exponential-free solution of the linear equation valid in `region`.
    #[inline]
    pub fn particular(&self, region: Region, t: f64) -> f64 {
        region.sign() * self.mu(t) / 2.0 - self.eps / 4.0 + self.periodic_part(region, t)
    }

    /// Linear right-hand side used inside `region`.
    #[inline]
    pub fn linear_rhs(&self, region: Region, t: f64, x: f64) -> f64 {
        2.0 * region.sign() * x - self.mu(t) + self.forcing(t)
    }
}

/// Particular solution `x_P(t)` of the positive-region equation.
pub fn x_particular(cfg: &SystemConfig, t: f64) -> f64 {
    Drive::from(cfg).particular(Region::Positive, t)
}

/// One closed-form piece `C exp(+-2 (t - t_ref)) + particular(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSolution {
    pub region: Region,
    pub t_ref: f64,
    pub coeff: f64,
    pub drive: Drive,
}

impl SegmentSolution {
    /// Segment through `(t_ref, x_ref)` in `region`.
    pub fn through(drive: Drive, region: Region, t_ref: f64, x_ref: f64) -> Self {
        let coeff = x_ref - drive.particular(region, t_ref);
        SegmentSolution {
            region,
            t_ref,
            coeff,
            drive,
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let rate = 2.0 * self.region.sign();
        self.coeff * (rate * (t - self.t_ref)).exp() + self.drive.particular(self.region, t)
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        self.drive.linear_rhs(self.region, t, self.value(t))
    }
}

/// Closed-form value of a segment; see [`SegmentSolution::value`].
pub fn segment_value(seg: &SegmentSolution, t: f64) -> f64 {
    seg.value(t)
}
