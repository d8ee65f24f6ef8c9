#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tipfold_core::ode::{Dp45, Flow};
use tipfold_core::SystemConfig;

/// Fold value of the crossing orbit family in closed form. The field is
/// continuous across `x = 0`, so the Floquet multiplier is
/// `exp(4 (b - a - pi) / omega)` and the fold sits at `b - a = pi`; solving the
/// crossing conditions there gives this expression.
pub fn fold_closed_form(a: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        return a;
    }
    a / (PI / omega).tanh() / (1.0 + omega * omega / 4.0)
}

/// Region-wise linear field, `s = +1` for `x > 0`.
fn linear(cfg: &SystemConfig, s: f64, t: f64, x: f64) -> f64 {
    2.0 * s * x - cfg.mu_at(t) + cfg.amplitude * (cfg.omega * t - cfg.phase).cos()
}

/// Which side a trajectory leaving `x = 0` at `t` enters.
fn side_at_zero(cfg: &SystemConfig, t: f64) -> f64 {
    let v = linear(cfg, 1.0, t, 0.0);
    if v != 0.0 {
        return v.signum();
    }
    // d/dt of the field at x = 0
    let acc = cfg.eps - cfg.amplitude * cfg.omega * (cfg.omega * t - cfg.phase).sin();
    if acc >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Brute-force tipping value: an embedded Runge-Kutta pair on the smooth
/// field of the current region, restarted on every crossing of `x = 0`.
pub fn rk_oracle_mu_tp(cfg: &SystemConfig, t_max: f64) -> Option<f64> {
    let solver = Dp45 {
        h_max: 0.05,
        x_cap: 10.0 * cfg.threshold,
        max_steps: 50_000_000,
        ..Dp45::with_tolerances(1e-12, 1e-13)
    };
    let k = cfg.threshold;
    let mut t = 0.0;
    let mut x = cfg.x0;
    let mut s = if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        side_at_zero(cfg, 0.0)
    };
    for _ in 0..100_000 {
        let mut hit: Option<(f64, bool)> = None;
        let out = solver
            .integrate(
                |tt, xx| linear(cfg, s, tt, xx),
                t,
                x,
                t_max,
                |step| {
                    if let Some(tk) = step.crossing(k, 1e-13).filter(|_| step.x0 < k) {
                        hit = Some((tk, true));
                        return Flow::Stop;
                    }
                    if step.x0 != 0.0 {
                        if let Some(tz) = step.crossing(0.0, 1e-13) {
                            hit = Some((tz, false));
                            return Flow::Stop;
                        }
                    }
                    Flow::Continue
                },
            )
            .ok()?;
        match hit {
            Some((tk, true)) => return Some(cfg.mu_at(tk)),
            Some((tz, false)) => {
                t = tz;
                x = 0.0;
                s = side_at_zero(cfg, tz);
            }
            None => {
                let _ = out;
                return None;
            }
        }
    }
    None
}

/// Seeded configurations with `eps` in `[0.02, 0.5]`, `omega` in `[0.1, 10]`
/// and `A` in `{0, 1}`.
pub fn random_configs(n: usize, seed: u64) -> Vec<SystemConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let eps = rng.gen_range(0.02..=0.5);
            let omega = rng.gen_range(0.1..=10.0);
            let a = (i % 2) as f64;
            let mu0 = rng.gen_range(0.5..=2.0);
            SystemConfig::non_smooth(mu0, -mu0 / 2.0, eps, a, omega, 10.0)
        })
        .collect()
}

/// All sign changes of `f` on a uniform `n`-point grid, refined by bisection.
pub fn dense_scan<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..n {
        let x1 = if i == n - 1 { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || b - a < 1e-15 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}
