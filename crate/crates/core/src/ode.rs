//! Adaptive Dormand–Prince 5(4) integration of scalar ODEs `x' = f(t, x)`.
//!
//! Every accepted step is handed to a caller-supplied hook together with a
//! cubic Hermite interpolant, which is what the event locators work on.

use crate::error::{Error, Result};
use crate::roots::bisect;

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dp45 {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step tried before giving up with [`Error::StepFloorReached`].
    pub h_min: f64,
    pub h_max: f64,
    /// Steps whose end value exceeds this magnitude are rejected and retried smaller.
    pub x_cap: f64,
    pub max_steps: usize,
}

impl Default for Dp45 {
    fn default() -> Self {
        Dp45 {
            rtol: 1e-10,
            atol: 1e-12,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            x_cap: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted step with its end values and slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t0: f64,
    pub x0: f64,
    pub f0: f64,
    pub t1: f64,
    pub x1: f64,
    pub f1: f64,
}

impl Step {
    /// Cubic Hermite interpolant of the step.
    pub fn eval(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.x0;
        }
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.x0 + h10 * h * self.f0 + h01 * self.x1 + h11 * h * self.f1
    }

    /// First time in the step where the interpolant crosses `level`, if the end
    /// values bracket it.
    pub fn crossing(&self, level: f64, tol: f64) -> Option<f64> {
        let g0 = self.x0 - level;
        let g1 = self.x1 - level;
        if g0 == 0.0 || ((g0 > 0.0) == (g1 > 0.0) && g1 != 0.0) {
            return None;
        }
        Some(bisect(|t| self.eval(t) - level, self.t0, self.t1, tol))
    }
}

/// What the step hook wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    /// Time and state at the end of the last accepted step.
    pub t: f64,
    pub x: f64,
    pub steps: usize,
    pub rejected: usize,
    /// True if the hook asked to stop before `t_end`.
    pub stopped: bool,
}

impl Dp45 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Dp45 {
            rtol,
            atol,
            ..Dp45::default()
        }
    }

    fn initial_step<F: FnMut(f64, f64) -> f64>(&self, f: &mut F, t0: f64, x0: f64, f0: f64, span: f64) -> f64 {
        let sc = self.atol + self.rtol * x0.abs();
        let d0 = x0.abs() / sc;
        let d1 = f0.abs() / sc;
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let x1 = x0 + h0 * f0;
        let d2 = (f(t0 + h0, x1) - f0).abs() / sc / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.h_max)
    }

    /// Integrate from `(t0, x0)` to `t_end`, calling `on_step` after every
    /// accepted step.
    pub fn integrate<F, H>(&self, mut f: F, t0: f64, x0: f64, t_end: f64, mut on_step: H) -> Result<Outcome>
    where
        F: FnMut(f64, f64) -> f64,
        H: FnMut(&Step) -> Flow,
    {
        let mut t = t0;
        let mut x = x0;
        let mut out = Outcome {
            t,
            x,
            steps: 0,
            rejected: 0,
            stopped: false,
        };
        if t_end <= t0 {
            return Ok(out);
        }
        let mut k1 = f(t, x);
        let mut h = self.initial_step(&mut f, t, x, k1, t_end - t0);
        while t < t_end {
            if out.steps >= self.max_steps {
                return Err(Error::StepFloorReached { t, h_min: h });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            let k2 = f(t + C2 * h, x + h * A21 * k1);
            let k3 = f(t + C3 * h, x + h * (A31 * k1 + A32 * k2));
            let k4 = f(t + C4 * h, x + h * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(t + C5 * h, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            let k6 = f(t + h, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
            let x_new = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(t + h, x_new);
            let err_est = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let sc = self.atol + self.rtol * x.abs().max(x_new.abs());
            let err = (err_est / sc).abs();

            if !x_new.is_finite() || !k7.is_finite() || x_new.abs() > self.x_cap || !err.is_finite() {
                out.rejected += 1;
                h *= 0.5;
                if h < self.h_min {
                    return Err(Error::StepFloorReached { t, h_min: self.h_min });
                }
                continue;
            }

            if err <= 1.0 {
                let t_new = if last { t_end } else { t + h };
                let step = Step {
                    t0: t,
                    x0: x,
                    f0: k1,
                    t1: t_new,
                    x1: x_new,
                    f1: k7,
                };
                t = t_new;
                x = x_new;
                k1 = k7;
                out.steps += 1;
                out.t = t;
                out.x = x;
                if on_step(&step) == Flow::Stop {
                    out.stopped = true;
                    return Ok(out);
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * fac).min(self.h_max);
            } else {
                out.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.h_min {
                    return Err(Error::StepFloorReached { t, h_min: self.h_min });
                }
            }
        }
        Ok(out)
    }
}
