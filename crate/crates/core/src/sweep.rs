//! Parameter sweeps of the tipping value with sharp-transition detection.
//!
//! Grid points are evaluated in parallel and gathered in grid order, so results
//! do not depend on scheduling. Points that fail are kept as `None`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exactsim::{tip_trajectory, EventKind};
use crate::model::{SystemConfig, SystemKind};
use crate::orbit::{continue_to_fold, grazing_mu, orbit_on_branch, ContinuationBranch};
use crate::smoothsim::{integrate_smoothed, integrate_snb};

/// Initial control value, either fixed or tied to the grazing value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu0Spec {
    Literal(f64),
    /// `m * mu_G(omega)`.
    GrazingMultiple(f64),
}

/// Initial state, either fixed or `-mu0/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Spec {
    Literal(f64),
    NegHalfMu0,
}

/// A configuration template for sweeps; `mu0` and `x0` are resolved per point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub config: SystemConfig,
    pub mu0: Mu0Spec,
    pub x0: X0Spec,
}

impl SweepBase {
    /// Template that uses `cfg.mu0` and `cfg.x0` as given.
    pub fn literal(cfg: SystemConfig) -> Self {
        SweepBase {
            config: cfg,
            mu0: Mu0Spec::Literal(cfg.mu0),
            x0: X0Spec::Literal(cfg.x0),
        }
    }

    /// `mu0 = m mu_G(omega)`, `x0 = -mu0/2`.
    pub fn grazing_multiple(cfg: SystemConfig, m: f64) -> Self {
        SweepBase {
            config: cfg,
            mu0: Mu0Spec::GrazingMultiple(m),
            x0: X0Spec::NegHalfMu0,
        }
    }

    pub fn mu0_at(&self, omega: f64) -> f64 {
        match self.mu0 {
            Mu0Spec::Literal(v) => v,
            Mu0Spec::GrazingMultiple(m) => m * grazing_mu(self.config.amplitude, omega),
        }
    }

    /// The concrete configuration at `(omega, eps, alpha)`.
    pub fn resolve(&self, omega: f64, eps: f64, alpha: f64) -> SystemConfig {
        let mut cfg = self.config;
        cfg.omega = omega;
        cfg.eps = eps;
        cfg.alpha = alpha;
        if alpha > 0.0 && cfg.kind == SystemKind::NonSmoothPwl {
            cfg.kind = SystemKind::SmoothedNsf;
        }
        cfg.mu0 = self.mu0_at(omega);
        cfg.x0 = match self.x0 {
            X0Spec::Literal(v) => v,
            X0Spec::NegHalfMu0 => -cfg.mu0 / 2.0,
        };
        cfg
    }
}

/// Outcome at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipPoint {
    pub t_tp: f64,
    pub mu_tp: f64,
    /// Upward zero crossings before tipping (exact simulator only).
    pub crossups: Option<usize>,
}

/// Tipping of one configuration with the solver its `kind` selects.
pub fn tip_point(cfg: &SystemConfig) -> Result<TipPoint> {
    match cfg.kind {
        SystemKind::NonSmoothPwl => {
            let traj = tip_trajectory(cfg)?;
            Ok(TipPoint {
                t_tp: traj.t_tp.unwrap_or(f64::NAN),
                mu_tp: traj.mu_tp.unwrap_or(f64::NAN),
                crossups: Some(traj.count(EventKind::CrossUp)),
            })
        }
        SystemKind::SmoothedNsf => integrate_smoothed(cfg, 0.0).map(|r| TipPoint {
            t_tp: r.t_tp,
            mu_tp: r.mu_tp,
            crossups: None,
        }),
        SystemKind::Snb => integrate_snb(cfg, 0.0).map(|r| TipPoint {
            t_tp: r.t_tp,
            mu_tp: r.mu_tp,
            crossups: None,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Omega,
    Eps,
    Alpha,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Omega => "omega",
            Axis::Eps => "eps",
            Axis::Alpha => "alpha",
        }
    }
}

/// A sharp change of the tipping value between neighboring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Refined abscissa of the jump.
    pub location: f64,
    /// Signed change of `mu_TP` across the flagged grid cell.
    pub drop: f64,
    /// Index of the left end of the flagged cell.
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub mu_tp: Vec<Option<f64>>,
    pub t_tp: Vec<Option<f64>>,
    pub crossups: Vec<Option<usize>>,
    pub mu_cf: Option<Vec<Option<f64>>>,
    pub mu_g: Option<Vec<f64>>,
    pub transitions: Vec<Transition>,
    /// Error message per failed point.
    pub errors: Vec<Option<String>>,
}

impl SweepResult {
    pub fn success_fraction(&self) -> f64 {
        if self.grid.is_empty() {
            return 1.0;
        }
        self.mu_tp.iter().filter(|v| v.is_some()).count() as f64 / self.grid.len() as f64
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("sweep grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sweep grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Grid cells whose first difference exceeds five times the median absolute
/// difference, consecutive flagged cells merged (the largest one kept).
pub fn flag_cells(values: &[Option<f64>]) -> Vec<(usize, f64)> {
    let diffs: Vec<Option<f64>> = values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        })
        .collect();
    let present: Vec<f64> = diffs.iter().flatten().map(|d| d.abs()).collect();
    let med = median(present);
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let floor = 1e-3 * (hi - lo).max(0.0) + 1e-9;
    let mut flagged: Vec<(usize, f64)> = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, d) in diffs.iter().enumerate() {
        let Some(d) = *d else {
            prev = None;
            continue;
        };
        if d.abs() > 5.0 * med && d.abs() > floor {
            match (prev, flagged.last_mut()) {
                (Some(p), Some(last)) if p + 1 == i => {
                    if d.abs() > last.1.abs() {
                        *last = (i, d);
                    }
                }
                _ => flagged.push((i, d)),
            }
            prev = Some(i);
        } else {
            prev = None;
        }
    }
    flagged
}

/// Shrink the cell `[x0, x1]` three times, keeping the half with the larger
/// change of `f`, and return the final midpoint.
pub fn refine_location<F: Fn(f64) -> Option<f64>>(f: F, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (mut a, mut b, mut ya, mut yb) = (x0, x1, y0, y1);
    for _ in 0..3 {
        let m = 0.5 * (a + b);
        let Some(ym) = f(m) else { break };
        if (ym - ya).abs() >= (yb - ym).abs() {
            b = m;
            yb = ym;
        } else {
            a = m;
            ya = ym;
        }
    }
    0.5 * (a + b)
}

fn detect<F: Fn(f64) -> Option<f64>>(grid: &[f64], values: &[Option<f64>], f: F) -> Vec<Transition> {
    flag_cells(values)
        .into_iter()
        .map(|(i, d)| Transition {
            location: refine_location(&f, grid[i], grid[i + 1], values[i].unwrap(), values[i + 1].unwrap()),
            drop: d,
            cell: i,
        })
        .collect()
}

fn evaluate(cfgs: &[SystemConfig]) -> Vec<Result<TipPoint>> {
    cfgs.par_iter().map(tip_point).collect()
}

fn fold_value(omega: f64, a: f64) -> Option<f64> {
    (a > 0.0).then(|| continue_to_fold(omega, a, 0.0).ok().map(|b| b.mu_cf)).flatten()
}

fn assemble(
    axis: Axis,
    grid: &[f64],
    results: Vec<Result<TipPoint>>,
    mu_cf: Option<Vec<Option<f64>>>,
    mu_g: Option<Vec<f64>>,
    resolve: impl Fn(f64) -> SystemConfig,
) -> SweepResult {
    let mu_tp: Vec<Option<f64>> = results.iter().map(|r| r.as_ref().ok().map(|p| p.mu_tp)).collect();
    let transitions = detect(grid, &mu_tp, |x| tip_point(&resolve(x)).ok().map(|p| p.mu_tp));
    SweepResult {
        axis,
        grid: grid.to_vec(),
        t_tp: results.iter().map(|r| r.as_ref().ok().map(|p| p.t_tp)).collect(),
        crossups: results.iter().map(|r| r.as_ref().ok().and_then(|p| p.crossups)).collect(),
        errors: results.iter().map(|r| r.as_ref().err().map(|e| e.to_string())).collect(),
        mu_tp,
        mu_cf,
        mu_g,
        transitions,
    }
}

/// Tipping value against forcing frequency, with `mu_CF` and `mu_G` per point.
pub fn sweep_omega(base: &SweepBase, grid: &[f64]) -> Result<SweepResult> {
    check_grid(grid)?;
    let c = base.config;
    let resolve = |w: f64| base.resolve(w, c.eps, c.alpha);
    let cfgs: Vec<SystemConfig> = grid.iter().map(|&w| resolve(w)).collect();
    let results = evaluate(&cfgs);
    let mu_cf: Vec<Option<f64>> = grid.par_iter().map(|&w| fold_value(w, c.amplitude)).collect();
    let mu_g = grid.iter().map(|&w| grazing_mu(c.amplitude, w)).collect();
    Ok(assemble(Axis::Omega, grid, results, Some(mu_cf), Some(mu_g), resolve))
}

/// Tipping value against drift rate; `mu_CF` and `mu_G` are constant along it.
pub fn sweep_eps(base: &SweepBase, grid: &[f64]) -> Result<SweepResult> {
    check_grid(grid)?;
    if grid[0] <= 0.0 {
        return Err(Error::Domain("eps grid must be positive".into()));
    }
    let c = base.config;
    let resolve = |e: f64| base.resolve(c.omega, e, c.alpha);
    let cfgs: Vec<SystemConfig> = grid.iter().map(|&e| resolve(e)).collect();
    let results = evaluate(&cfgs);
    let cf = fold_value(c.omega, c.amplitude);
    let g = grazing_mu(c.amplitude, c.omega);
    Ok(assemble(
        Axis::Eps,
        grid,
        results,
        Some(vec![cf; grid.len()]),
        Some(vec![g; grid.len()]),
        resolve,
    ))
}

/// Tipping value of the smoothed system against the smoothing scale.
pub fn sweep_alpha(base: &SweepBase, grid: &[f64]) -> Result<SweepResult> {
    check_grid(grid)?;
    if grid[0] <= 0.0 {
        return Err(Error::Domain("alpha grid must be positive".into()));
    }
    let c = base.config;
    let resolve = |a: f64| base.resolve(c.omega, c.eps, a);
    let cfgs: Vec<SystemConfig> = grid.iter().map(|&a| resolve(a)).collect();
    let results = evaluate(&cfgs);
    Ok(assemble(Axis::Alpha, grid, results, None, None, resolve))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub eps_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    /// Row `i` holds the values at `eps_grid[i]`.
    pub mu_tp: Vec<Vec<Option<f64>>>,
    pub crossups: Vec<Vec<Option<usize>>>,
    /// Largest transition per row, as `(eps, omega_T)`.
    pub t_curve: Vec<(f64, f64)>,
    /// Transition at the largest `eps` row that has one.
    pub terminus: Option<(f64, f64)>,
}

/// Tipping value over an `eps x omega` grid and the transition curve.
pub fn surface(base: &SweepBase, eps_grid: &[f64], omega_grid: &[f64]) -> Result<Surface> {
    check_grid(eps_grid)?;
    check_grid(omega_grid)?;
    let c = base.config;
    let cells: Vec<SystemConfig> = eps_grid
        .iter()
        .flat_map(|&e| omega_grid.iter().map(move |&w| base.resolve(w, e, c.alpha)))
        .collect();
    let results = evaluate(&cells);
    let n = omega_grid.len();
    let mut mu_tp = Vec::with_capacity(eps_grid.len());
    let mut crossups = Vec::with_capacity(eps_grid.len());
    let mut t_curve = Vec::new();
    for (row, &eps) in eps_grid.iter().enumerate() {
        let slice = &results[row * n..(row + 1) * n];
        let values: Vec<Option<f64>> = slice.iter().map(|r| r.as_ref().ok().map(|p| p.mu_tp)).collect();
        let ups = slice.iter().map(|r| r.as_ref().ok().and_then(|p| p.crossups)).collect();
        let best = flag_cells(&values)
            .into_iter()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
        if let Some((i, _)) = best {
            let f = |w: f64| tip_point(&base.resolve(w, eps, c.alpha)).ok().map(|p| p.mu_tp);
            let loc = refine_location(
                f,
                omega_grid[i],
                omega_grid[i + 1],
                values[i].unwrap(),
                values[i + 1].unwrap(),
            );
            t_curve.push((eps, loc));
        }
        mu_tp.push(values);
        crossups.push(ups);
    }
    let terminus = t_curve.last().copied();
    Ok(Surface {
        eps_grid: eps_grid.to_vec(),
        omega_grid: omega_grid.to_vec(),
        mu_tp,
        crossups,
        t_curve,
        terminus,
    })
}

/// One row of the fold table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub omega: f64,
    pub mu_cf: Option<f64>,
    pub mu_g: f64,
}

/// The forcing frequencies of the reference fold table.
pub const TABLE_OMEGAS: [f64; 23] = [
    20.0, 15.0, 10.0, 8.0, 5.0, 4.0, 3.0, 2.5, 2.0, 1.9, 1.8, 1.7, 1.6, 1.5, 1.4, 1.2, 1.0, 0.8, 0.5, 0.3, 0.2,
    0.1, 0.0,
];

/// Fold and grazing values (`A = 1`) for each frequency, in the given order.
pub fn appendix_table(omega_rows: &[f64]) -> Vec<FoldRow> {
    omega_rows
        .par_iter()
        .map(|&omega| FoldRow {
            omega,
            mu_cf: fold_value(omega, 1.0),
            mu_g: grazing_mu(1.0, omega),
        })
        .collect()
}

/// A sampled periodic orbit for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSnapshot {
    /// Requested parameter value.
    pub mu: f64,
    /// Parameter value of the orbit actually sampled.
    pub mu_used: f64,
    pub samples: Vec<(f64, f64)>,
    pub mean_x: f64,
    pub positive_fraction: f64,
    /// True if the orbit never enters `x > 0`.
    pub negative_only: bool,
}

const SNAPSHOT_SAMPLES: usize = 1024;
const SNAPSHOT_CLAMP: f64 = 1e-3;

/// Periodic orbits at each `mu`, sampled over one forcing period.
///
/// For `mu >= mu_G` this is the orbit that stays in `x <= 0`. Values below the
/// computed fold by less than `1e-3` are clamped to the fold orbit.
pub fn fig_orbit_snapshots(omega: f64, a: f64, mus: &[f64]) -> Result<Vec<OrbitSnapshot>> {
    if !(omega > 0.0) || !(a > 0.0) {
        return Err(Error::Domain("orbit snapshots need omega > 0 and A > 0".into()));
    }
    let mu_g = grazing_mu(a, omega);
    let branch: Option<ContinuationBranch> = if mus.iter().any(|&m| m < mu_g) {
        Some(continue_to_fold(omega, a, 0.0)?)
    } else {
        None
    };
    let period = 2.0 * PI / omega;
    mus.iter()
        .map(|&mu| {
            if mu >= mu_g {
                let amp = a / (4.0 + omega * omega).sqrt();
                let phi = omega.atan2(2.0);
                let samples = (0..SNAPSHOT_SAMPLES)
                    .map(|i| {
                        let t = period * i as f64 / SNAPSHOT_SAMPLES as f64;
                        (t, -mu / 2.0 + amp * (omega * t - phi).cos())
                    })
                    .collect();
                return Ok(OrbitSnapshot {
                    mu,
                    mu_used: mu,
                    samples,
                    mean_x: -mu / 2.0,
                    positive_fraction: 0.0,
                    negative_only: true,
                });
            }
            let br = branch.as_ref().expect("branch computed when some mu < mu_G");
            let orbit = if mu <= br.mu_cf {
                if br.mu_cf - mu > SNAPSHOT_CLAMP {
                    return Err(Error::Domain(format!(
                        "mu = {mu} is below the cyclic fold {}",
                        br.mu_cf
                    )));
                }
                br.fold_orbit
            } else {
                orbit_on_branch(br, omega, a, mu)?
            };
            Ok(OrbitSnapshot {
                mu,
                mu_used: orbit.mu,
                samples: orbit.sample(SNAPSHOT_SAMPLES),
                mean_x: orbit.mean_x,
                positive_fraction: orbit.positive_fraction(),
                negative_only: false,
            })
        })
        .collect()
}
