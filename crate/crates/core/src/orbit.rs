//! Periodic orbits of the non-smooth system at fixed `mu` (no drift) that cross
//! the switching set once per forcing period, their continuation in `mu` from
//! the grazing orbit down to the cyclic fold.
//!
//! With scaled phase `s = omega t`, an orbit is positive on `[a, b]` and
//! negative on `[b, a + 2 pi]`:
//!
//! ```text
//! x+(t) = C+ exp(2 (t - a/omega)) + mu/2 + Q+(omega t)
//! x-(t) = C- exp(-2 (t - b/omega)) - mu/2 + Q-(omega t)
//! Q+-(s) = A/(4 + omega^2) (omega sin s -+ 2 cos s)
//! ```
//!
//! and the four unknowns `(a, b, C+, C-)` are fixed by requiring both pieces
//! to vanish at both ends.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 50;
const MAX_HALVINGS: usize = 8;
const PHYS_GRID: usize = 512;
const MIN_STEP: f64 = 1e-8;
const JUMP_GUARD: f64 = 0.5;

/// `mu_G = A / sqrt(1 + omega^2/4)`, below which the negative-region orbit
/// touches zero.
pub fn grazing_mu(a: f64, omega: f64) -> f64 {
    a / (1.0 + omega * omega / 4.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub mu: f64,
    pub omega: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// Scaled phase where the orbit enters `x > 0`.
    pub a: f64,
    /// Scaled phase where the orbit leaves `x > 0`.
    pub b: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Max-norm of the four compatibility residuals.
    pub residual: f64,
    pub mean_x: f64,
}

#[derive(Clone, Copy)]
struct Params {
    mu: f64,
    omega: f64,
    k: f64,
}

impl Params {
    fn new(mu: f64, omega: f64, a: f64) -> Self {
        Params {
            mu,
            omega,
            k: a / (4.0 + omega * omega),
        }
    }

    fn q_plus(&self, s: f64) -> f64 {
        self.k * (self.omega * s.sin() - 2.0 * s.cos())
    }

    fn q_minus(&self, s: f64) -> f64 {
        self.k * (self.omega * s.sin() + 2.0 * s.cos())
    }

    fn e1(&self, a: f64, b: f64) -> f64 {
        (2.0 * (b - a) / self.omega).exp()
    }

    fn e2(&self, a: f64, b: f64) -> f64 {
        (-2.0 * (2.0 * PI + a - b) / self.omega).exp()
    }

    fn residual(&self, z: &Vector4<f64>) -> Vector4<f64> {
        let (a, b, cp, cm) = (z[0], z[1], z[2], z[3]);
        let h = self.mu / 2.0;
        Vector4::new(
            h + cp + self.q_plus(a),
            h + cp * self.e1(a, b) + self.q_plus(b),
            -h + cm + self.q_minus(b),
            -h + cm * self.e2(a, b) + self.q_minus(a),
        )
    }

    fn jacobian(&self, z: &Vector4<f64>) -> Matrix4<f64> {
        let (a, b, cp, cm) = (z[0], z[1], z[2], z[3]);
        let (w, k) = (self.omega, self.k);
        let e1 = self.e1(a, b);
        let e2 = self.e2(a, b);
        let dqp = |s: f64| k * (w * s.cos() + 2.0 * s.sin());
        let dqm = |s: f64| k * (w * s.cos() - 2.0 * s.sin());
        Matrix4::new(
            dqp(a),
            0.0,
            1.0,
            0.0,
            -2.0 * cp * e1 / w,
            2.0 * cp * e1 / w + dqp(b),
            e1,
            0.0,
            0.0,
            dqm(b),
            0.0,
            1.0,
            -2.0 * cm * e2 / w + dqm(a),
            2.0 * cm * e2 / w,
            0.0,
            e2,
        )
    }
}

fn max_norm(v: &Vector4<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

impl PeriodicOrbit {
    fn params(&self) -> Params {
        Params::new(self.mu, self.omega, self.amplitude)
    }

    fn state(&self) -> Vector4<f64> {
        Vector4::new(self.a, self.b, self.c_plus, self.c_minus)
    }

    fn from_state(mu: f64, omega: f64, amplitude: f64, z: &Vector4<f64>) -> Self {
        let p = Params::new(mu, omega, amplitude);
        let mut orbit = PeriodicOrbit {
            mu,
            omega,
            amplitude,
            a: z[0],
            b: z[1],
            c_plus: z[2],
            c_minus: z[3],
            residual: max_norm(&p.residual(z)),
            mean_x: 0.0,
        };
        orbit.mean_x = mean_x(&orbit);
        orbit
    }

    /// Orbit value at scaled phase `s` (any real; reduced modulo `2 pi`).
    pub fn value_at_phase(&self, s: f64) -> f64 {
        if self.omega == 0.0 {
            return (self.amplitude - self.mu) / 2.0;
        }
        let p = self.params();
        let s = self.a + (s - self.a).rem_euclid(2.0 * PI);
        if s <= self.b {
            self.c_plus * (2.0 * (s - self.a) / self.omega).exp() + self.mu / 2.0 + p.q_plus(s)
        } else {
            self.c_minus * (-2.0 * (s - self.b) / self.omega).exp() - self.mu / 2.0 + p.q_minus(s)
        }
    }

    /// Orbit value at time `t`.
    pub fn value(&self, t: f64) -> f64 {
        self.value_at_phase(self.omega * t)
    }

    /// Forcing period `2 pi / omega` (infinite at `omega = 0`).
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `n` samples `(t, x)` over `t` in `[0, 2 pi/omega)`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        if self.omega == 0.0 {
            return (0..n).map(|i| (i as f64, self.value_at_phase(0.0))).collect();
        }
        let period = self.period();
        (0..n)
            .map(|i| {
                let t = period * i as f64 / n as f64;
                (t, self.value(t))
            })
            .collect()
    }

    /// Fraction of the period spent in `x > 0`.
    pub fn positive_fraction(&self) -> f64 {
        (self.b - self.a) / (2.0 * PI)
    }

    /// Whether both pieces keep their sign strictly inside their intervals.
    pub fn is_physical(&self) -> bool {
        let width = self.b - self.a;
        if !(0.0..2.0 * PI).contains(&width) {
            return false;
        }
        let p = self.params();
        let tol = 1e-10;
        for i in 1..PHYS_GRID {
            let f = i as f64 / PHYS_GRID as f64;
            if width > 0.0 {
                let s = self.a + f * width;
                let x = self.c_plus * (2.0 * (s - self.a) / self.omega).exp() + self.mu / 2.0 + p.q_plus(s);
                if x < -tol {
                    return false;
                }
            }
            let s = self.b + f * (2.0 * PI - width);
            let x = self.c_minus * (-2.0 * (s - self.b) / self.omega).exp() - self.mu / 2.0 + p.q_minus(s);
            if x > tol {
                return false;
            }
        }
        true
    }
}

/// Orbit at `mu = mu_G` that stays in `x <= 0` and touches zero once per period.
pub fn grazing_orbit(a: f64, omega: f64) -> PeriodicOrbit {
    let mu = grazing_mu(a, omega);
    let phi = omega.atan2(2.0);
    let p = Params::new(mu, omega, a);
    let z = Vector4::new(phi, phi, -mu / 2.0 - p.q_plus(phi), 0.0);
    if omega == 0.0 {
        return PeriodicOrbit {
            mu,
            omega,
            amplitude: a,
            a: phi,
            b: phi,
            c_plus: z[2],
            c_minus: 0.0,
            residual: 0.0,
            mean_x: (a - mu) / 2.0,
        };
    }
    PeriodicOrbit::from_state(mu, omega, a, &z)
}

/// Newton solve of the compatibility conditions at `mu`, starting from `guess`.
pub fn solve_orbit(mu: f64, omega: f64, a: f64, guess: &PeriodicOrbit) -> Result<PeriodicOrbit> {
    if !(omega > 0.0) {
        return Err(Error::Domain("orbit equations need omega > 0".into()));
    }
    let p = Params::new(mu, omega, a);
    let mut z = guess.state();
    let mut r = p.residual(&z);
    let mut norm = max_norm(&r);
    let mut iter = 0;
    while !(norm < RESIDUAL_TOL) {
        if iter == MAX_NEWTON || !norm.is_finite() {
            return Err(Error::NewtonDiverged { mu, residual: norm });
        }
        iter += 1;
        let delta = match p.jacobian(&z).lu().solve(&(-r)) {
            Some(d) if d.iter().all(|v| v.is_finite()) && max_norm(&d) < 1e3 => d,
            _ => return Err(Error::NewtonDiverged { mu, residual: norm }),
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let z_try = z + delta * lambda;
            let r_try = p.residual(&z_try);
            let n_try = max_norm(&r_try);
            if n_try < norm {
                accepted = Some((z_try, r_try, n_try));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((z_new, r_new, n_new)) => {
                z = z_new;
                r = r_new;
                norm = n_new;
            }
            None => return Err(Error::NewtonDiverged { mu, residual: norm }),
        }
    }
    let orbit = PeriodicOrbit::from_state(mu, omega, a, &z);
    if !orbit.is_physical() {
        return Err(Error::Unphysical { mu });
    }
    Ok(orbit)
}

/// Exact period average of the orbit.
pub fn mean_x(orbit: &PeriodicOrbit) -> f64 {
    let (w, mu) = (orbit.omega, orbit.mu);
    if w == 0.0 {
        return (orbit.amplitude - mu) / 2.0;
    }
    let p = orbit.params();
    let (a, b) = (orbit.a, orbit.b);
    let k = p.k;
    let e1 = p.e1(a, b);
    let e2 = p.e2(a, b);
    let prim_plus = |s: f64| -w * s.cos() - 2.0 * s.sin();
    let prim_minus = |s: f64| -w * s.cos() + 2.0 * s.sin();
    let positive = mu / 2.0 * (b - a) / w
        + orbit.c_plus * (e1 - 1.0) / 2.0
        + k / w * (prim_plus(b) - prim_plus(a));
    let negative = -mu / 2.0 * (2.0 * PI + a - b) / w
        + orbit.c_minus * (1.0 - e2) / 2.0
        + k / w * (prim_minus(a + 2.0 * PI) - prim_minus(b));
    (positive + negative) * w / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The step fell to the floor with the branch turning (fold signature present).
    FoldDetected,
    /// The step fell to the floor without a recognizable fold.
    StepFloor,
    /// Not even the first step off the grazing orbit converged.
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationBranch {
    pub points: Vec<PeriodicOrbit>,
    /// Fold value: `mu` of the orbit with `b - a = pi` when that solve succeeds,
    /// else the parabola-refined estimate, else the last converged `mu`.
    pub mu_cf: f64,
    /// Smallest `mu` at which an orbit converged.
    pub mu_last: f64,
    pub fold_orbit: PeriodicOrbit,
    pub termination: Termination,
}

/// Default continuation step, `1e-3 mu_G`.
pub fn default_step(a: f64, omega: f64) -> f64 {
    1e-3 * grazing_mu(a, omega)
}

fn first_guess(mu: f64, omega: f64, a: f64) -> PeriodicOrbit {
    let mu_g = grazing_mu(a, omega);
    let phi = omega.atan2(2.0);
    let theta = (mu / mu_g).clamp(-1.0, 1.0).acos();
    let p = Params::new(mu, omega, a);
    let (sa, sb) = (phi - theta, phi + theta);
    let z = Vector4::new(sa, sb, -mu / 2.0 - p.q_plus(sa), mu / 2.0 - p.q_minus(sb));
    PeriodicOrbit::from_state(mu, omega, a, &z)
}

fn with_state(template: &PeriodicOrbit, mu: f64, z: Vector4<f64>) -> PeriodicOrbit {
    PeriodicOrbit {
        mu,
        a: z[0],
        b: z[1],
        c_plus: z[2],
        c_minus: z[3],
        ..*template
    }
}

/// Vertex of the least-squares parabola `mu = c0 + c1 a + c2 a^2` through the
/// last points, if it describes a minimum just below the last point.
fn refine_fold(points: &[PeriodicOrbit]) -> Option<f64> {
    if points.len() < 5 {
        return None;
    }
    let tail = &points[points.len() - 5..];
    let last = tail[4];
    let scale = tail.iter().fold(0.0f64, |m, o| m.max((o.a - last.a).abs()));
    if !(scale > 0.0) {
        return None;
    }
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for o in tail {
        let u = (o.a - last.a) / scale;
        let row = Vector3::new(1.0, u, u * u);
        ata += row * row.transpose();
        aty += row * (o.mu - last.mu);
    }
    let c = ata.lu().solve(&aty)?;
    if !(c[2] > 0.0) {
        return None;
    }
    let u_star = -c[1] / (2.0 * c[2]);
    let mu_star = last.mu + c[0] - c[1] * c[1] / (4.0 * c[2]);
    let drop = last.mu - mu_star;
    ((0.0..1e-3).contains(&drop) && u_star.abs() < 10.0 && mu_star.is_finite()).then_some(mu_star)
}

/// Newton solve at fixed crossing width `b - a = width` with `mu` free.
fn solve_at_width(omega: f64, amp: f64, width: f64, guess: &PeriodicOrbit) -> Option<PeriodicOrbit> {
    let mut y = Vector4::new(guess.a, guess.c_plus, guess.c_minus, guess.mu);
    let state = |y: &Vector4<f64>| Vector4::new(y[0], y[0] + width, y[1], y[2]);
    let resid = |y: &Vector4<f64>| Params::new(y[3], omega, amp).residual(&state(y));
    let mut r = resid(&y);
    let mut norm = max_norm(&r);
    for _ in 0..MAX_NEWTON {
        if norm < RESIDUAL_TOL {
            let orbit = PeriodicOrbit::from_state(y[3], omega, amp, &state(&y));
            return orbit.is_physical().then_some(orbit);
        }
        let j = Params::new(y[3], omega, amp).jacobian(&state(&y));
        let jw = Matrix4::from_columns(&[
            j.column(0) + j.column(1),
            j.column(2).into(),
            j.column(3).into(),
            Vector4::new(0.5, 0.5, -0.5, -0.5),
        ]);
        let delta = jw.lu().solve(&(-r))?;
        if !delta.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..=MAX_HALVINGS {
            let y_try = y + delta * lambda;
            let r_try = resid(&y_try);
            let n_try = max_norm(&r_try);
            if n_try < norm {
                y = y_try;
                r = r_try;
                norm = n_try;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// Orbit at the cyclic fold, reached by continuing in the crossing width from
/// `seed` up to `b - a = pi`.
///
/// The vector field is continuous across `x = 0`, so the Floquet multiplier of
/// a crossing orbit is `exp(4 (b - a - pi) / omega)` and the fold, where it
/// equals one, sits exactly at `b - a = pi`.
pub fn solve_fold(omega: f64, amp: f64, seed: &PeriodicOrbit) -> Result<PeriodicOrbit> {
    if !(omega > 0.0) {
        return Err(Error::Domain("orbit equations need omega > 0".into()));
    }
    let mut cur = *seed;
    let mut width = seed.b - seed.a;
    let mut step = (PI - width) / 16.0;
    while width < PI {
        let target = (width + step).min(PI);
        match solve_at_width(omega, amp, target, &cur) {
            Some(o) => {
                cur = o;
                width = target;
                step *= 1.5;
            }
            None => {
                step /= 2.0;
                if step < MIN_STEP {
                    return Err(Error::NewtonDiverged {
                        mu: cur.mu,
                        residual: cur.residual,
                    });
                }
            }
        }
    }
    Ok(cur)
}

/// Follow the crossing-orbit branch from `mu_G` downward until Newton fails
/// with step below `1e-8`, then locate the fold with [`solve_fold`];
/// `step0 <= 0` selects [`default_step`].
pub fn continue_to_fold(omega: f64, a: f64, step0: f64) -> Result<ContinuationBranch> {
    if !(a > 0.0) || !(omega >= 0.0) {
        return Err(Error::Domain("continuation needs A > 0 and omega >= 0".into()));
    }
    let graze = grazing_orbit(a, omega);
    if omega == 0.0 {
        // constant forcing: the branch degenerates and the fold sits at mu_G = A
        return Ok(ContinuationBranch {
            points: vec![graze],
            mu_cf: graze.mu,
            mu_last: graze.mu,
            fold_orbit: graze,
            termination: Termination::FoldDetected,
        });
    }
    let step0 = if step0 > 0.0 { step0 } else { default_step(a, omega) };
    let mut points = vec![graze];
    let mut step = step0;
    let mut prev_step = step0;

    while step >= MIN_STEP {
        let cur = *points.last().unwrap();
        let mu_try = cur.mu - step;
        if mu_try <= 0.0 {
            break;
        }
        let mut guesses = Vec::with_capacity(2);
        if points.len() >= 3 {
            let prev = points[points.len() - 2];
            let z = cur.state() + (cur.state() - prev.state()) * (step / prev_step);
            guesses.push(with_state(&cur, mu_try, z));
            guesses.push(with_state(&cur, mu_try, cur.state()));
        } else {
            guesses.push(first_guess(mu_try, omega, a));
            if points.len() == 2 {
                guesses.push(with_state(&cur, mu_try, cur.state()));
            }
        }
        let solved = guesses.iter().find_map(|g| {
            solve_orbit(mu_try, omega, a, g)
                .ok()
                .filter(|o| points.len() < 2 || ((o.a - cur.a).abs() < JUMP_GUARD && (o.b - cur.b).abs() < JUMP_GUARD))
        });
        match solved {
            Some(o) => {
                points.push(o);
                prev_step = step;
                step = (step * 2.0).min(step0);
            }
            None => step /= 2.0,
        }
    }

    if points.len() < 2 {
        return Err(Error::ContinuationDiverged(format!(
            "no crossing orbit converged below mu_G = {} at omega = {omega}",
            graze.mu
        )));
    }
    let last = *points.last().unwrap();
    let (mu_cf, fold_orbit, termination) = match solve_fold(omega, a, &last) {
        Ok(fold) if fold.mu <= last.mu + 1e-9 => (fold.mu, fold, Termination::FoldDetected),
        _ => match refine_fold(&points) {
            Some(mu) => (mu, last, Termination::FoldDetected),
            None => (last.mu, last, Termination::StepFloor),
        },
    };
    Ok(ContinuationBranch {
        mu_cf,
        mu_last: last.mu,
        points,
        fold_orbit,
        termination,
    })
}

/// Crossing orbit at `mu` in `[mu_CF, mu_G]`, found by bisection on the
/// crossing width between the branch points that bracket `mu`.
///
/// Near the fold the Jacobian at fixed `mu` is nearly singular, while `mu` is a
/// regular, decreasing function of the width all the way to `b - a = pi`.
pub fn orbit_on_branch(branch: &ContinuationBranch, omega: f64, amp: f64, mu: f64) -> Result<PeriodicOrbit> {
    let mut nodes: Vec<PeriodicOrbit> = branch.points.clone();
    nodes.push(branch.fold_orbit);
    nodes.sort_by(|x, y| (x.b - x.a).total_cmp(&(y.b - y.a)));
    let pair = nodes.windows(2).find(|w| w[0].mu >= mu && w[1].mu <= mu);
    let Some(&[mut lo, mut hi]) = pair else {
        return Err(Error::Domain(format!(
            "mu = {mu} is outside the crossing branch [{}, {}]",
            branch.mu_cf,
            branch.points[0].mu
        )));
    };
    for _ in 0..100 {
        if (lo.mu - mu).abs() <= 1e-12 {
            return Ok(lo);
        }
        if (hi.mu - mu).abs() <= 1e-12 {
            return Ok(hi);
        }
        let (wl, wh) = (lo.b - lo.a, hi.b - hi.a);
        if wh - wl < 1e-14 {
            break;
        }
        let mid = 0.5 * (wl + wh);
        let seed = if (lo.mu - mu).abs() < (hi.mu - mu).abs() { lo } else { hi };
        let o = solve_at_width(omega, amp, mid, &seed).ok_or(Error::NewtonDiverged {
            mu,
            residual: f64::NAN,
        })?;
        if o.mu >= mu {
            lo = o;
        } else {
            hi = o;
        }
    }
    Ok(if (lo.mu - mu).abs() < (hi.mu - mu).abs() { lo } else { hi })
}

/// Leading-order large-frequency fold curve `mu(a) = 4A/(pi omega) (a sin a + cos a)`.
pub fn a_of_mu_curve(omega: f64, a: f64, a_grid: &[f64]) -> Vec<(f64, f64)> {
    a_grid
        .iter()
        .map(|&s| (4.0 * a / (PI * omega) * (s * s.sin() + s.cos()), s))
        .collect()
}
