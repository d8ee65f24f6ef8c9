//! Event-driven exact simulation of the non-smooth system.
//!
//! A trajectory is a chain of closed-form segments. Each segment is scanned on
//! a fixed sampling grid for the first time it leaves its region (or reaches
//! the threshold `K`), the crossing is bisected, and a new segment is started
//! through the crossing point on the other side.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Drive, Region, SegmentSolution, SystemConfig, SystemKind};
use crate::roots::bisect;

/// Time offset used to decide which side a trajectory leaves a crossing on.
pub const TANGENCY_PROBE: f64 = 1e-8;
const TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `x` crosses zero from below.
    CrossUp,
    /// `x` crosses zero from above.
    CrossDown,
    /// `x` reaches the threshold `K` while increasing.
    Tip,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::CrossUp => "cross_up",
            EventKind::CrossDown => "cross_down",
            EventKind::Tip => "tip",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub kind: EventKind,
}

/// A segment together with the time interval on which it is the solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub solution: SegmentSolution,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: SystemConfig,
    pub segments: Vec<Piece>,
    pub events: Vec<Event>,
    pub tipped: bool,
    pub t_tp: Option<f64>,
    pub mu_tp: Option<f64>,
    /// Final time covered (the tipping time or `t_max`).
    pub t_end: f64,
}

impl Trajectory {
    fn piece_at(&self, t: f64) -> Option<&Piece> {
        if t < 0.0 || t > self.t_end {
            return None;
        }
        let idx = self.segments.partition_point(|p| p.t_end < t);
        self.segments.get(idx.min(self.segments.len().saturating_sub(1)))
    }

    /// State at time `t`, or `None` outside `[0, t_end]`.
    pub fn value(&self, t: f64) -> Option<f64> {
        self.piece_at(t).map(|p| p.solution.value(t))
    }

    pub fn region_at(&self, t: f64) -> Option<Region> {
        self.piece_at(t).map(|p| p.solution.region)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// `n + 1` equally spaced samples `(t, x, region)` over `[0, t_end]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64, Region)> {
        let n = n.max(1);
        let h = self.t_end / n as f64;
        let mut out = Vec::with_capacity(n + 1);
        let mut k = 0;
        for i in 0..=n {
            let t = if i == n { self.t_end } else { h * i as f64 };
            while k + 1 < self.segments.len() && self.segments[k].t_end < t {
                k += 1;
            }
            let p = &self.segments[k];
            out.push((t, p.solution.value(t), p.solution.region));
        }
        out
    }
}

/// Limits for [`simulate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_max: f64,
    pub max_events: usize,
}

impl SimOptions {
    pub fn new(t_max: f64) -> Self {
        SimOptions {
            t_max,
            max_events: 10_000,
        }
    }
}

/// Default time budget: long enough for `mu` to fall 20 units below zero.
pub fn default_t_max(cfg: &SystemConfig) -> f64 {
    (cfg.mu0.abs() + 20.0) / cfg.eps.max(1e-6)
}

fn sample_step(omega: f64) -> f64 {
    if omega > 0.0 {
        (PI / (4.0 * omega)).min(0.1)
    } else {
        0.1
    }
}

/// Signed distance to an exit surface, positive while the trajectory is inside.
#[derive(Clone, Copy)]
struct Gate {
    level: f64,
    inside: f64,
}

impl Gate {
    fn g(&self, seg: &SegmentSolution, t: f64) -> f64 {
        self.inside * (seg.value(t) - self.level)
    }

    fn dg(&self, seg: &SegmentSolution, t: f64) -> f64 {
        self.inside * seg.derivative(t)
    }

    /// First exit through this gate in `[t0, t1]`, allowing for one interior
    /// extremum of the segment.
    fn first_exit(&self, seg: &SegmentSolution, t0: f64, t1: f64) -> Option<f64> {
        let g0 = self.g(seg, t0);
        if g0 <= 0.0 {
            return Some(t0);
        }
        let d0 = self.dg(seg, t0);
        let d1 = self.dg(seg, t1);
        let mut pieces = [(t0, t1), (t1, t1)];
        if d0 < 0.0 && d1 > 0.0 {
            let te = bisect(|t| self.dg(seg, t), t0, t1, TIME_TOL);
            pieces = [(t0, te), (te, t1)];
        }
        for (p, q) in pieces {
            if q <= p {
                continue;
            }
            if self.g(seg, q) <= 0.0 {
                return Some(bisect(|t| self.g(seg, t), p, q, TIME_TOL));
            }
        }
        None
    }
}

enum Exit {
    Switch(f64),
    Tip(f64),
    Budget,
}

fn scan_segment(seg: &SegmentSolution, start: f64, t_max: f64, h: f64, threshold: f64) -> Exit {
    let zero = Gate {
        level: 0.0,
        inside: seg.region.sign(),
    };
    let tip = Gate {
        level: threshold,
        inside: -1.0,
    };
    let mut k = 0u64;
    loop {
        let t0 = start + h * k as f64;
        if t0 >= t_max {
            return Exit::Budget;
        }
        let t1 = (start + h * (k + 1) as f64).min(t_max);
        let cross = zero.first_exit(seg, t0, t1);
        let hit = match seg.region {
            Region::Positive => tip.first_exit(seg, t0, cross.unwrap_or(t1)),
            Region::Negative => None,
        };
        match (cross, hit) {
            (_, Some(tt)) => return Exit::Tip(tt),
            (Some(tc), None) => return Exit::Switch(tc),
            (None, None) => {}
        }
        k += 1;
    }
}

fn initial_region(cfg: &SystemConfig) -> Region {
    // at x0 = 0 the sign of the velocity decides; a tie goes to the stable side
    let up = cfg.x0 > 0.0 || (cfg.x0 == 0.0 && -cfg.mu0 + crate::model::forcing(cfg, 0.0) > 0.0);
    if up {
        Region::Positive
    } else {
        Region::Negative
    }
}

/// Simulate up to `t_max` with the default event cap.
pub fn simulate(cfg: &SystemConfig, t_max: f64) -> Result<Trajectory> {
    simulate_with(cfg, SimOptions::new(t_max))
}

pub fn simulate_with(cfg: &SystemConfig, opts: SimOptions) -> Result<Trajectory> {
    cfg.validate()?;
    cfg.require_kind(SystemKind::NonSmoothPwl)?;
    if !(opts.t_max > 0.0) {
        return Err(Error::Domain(format!("t_max must be positive, got {}", opts.t_max)));
    }
    let drive = Drive::from(cfg);
    let h = sample_step(cfg.omega);
    let mut region = initial_region(cfg);
    let mut seg = SegmentSolution::through(drive, region, 0.0, cfg.x0);
    let mut seg_start = 0.0;
    let mut scan_from = 0.0;
    let mut segments = Vec::new();
    let mut events: Vec<Event> = Vec::new();

    loop {
        match scan_segment(&seg, scan_from, opts.t_max, h, cfg.threshold) {
            Exit::Budget => {
                segments.push(Piece {
                    solution: seg,
                    t_start: seg_start,
                    t_end: opts.t_max,
                });
                return Ok(Trajectory {
                    config: *cfg,
                    segments,
                    events,
                    tipped: false,
                    t_tp: None,
                    mu_tp: None,
                    t_end: opts.t_max,
                });
            }
            Exit::Tip(t) => {
                segments.push(Piece {
                    solution: seg,
                    t_start: seg_start,
                    t_end: t,
                });
                events.push(Event {
                    t,
                    x: cfg.threshold,
                    kind: EventKind::Tip,
                });
                return Ok(Trajectory {
                    config: *cfg,
                    segments,
                    events,
                    tipped: true,
                    t_tp: Some(t),
                    mu_tp: Some(cfg.mu0 - cfg.eps * t),
                    t_end: t,
                });
            }
            Exit::Switch(t) => {
                let next = region.flip();
                let candidate = SegmentSolution::through(drive, next, t, 0.0);
                let probe = candidate.value(t + TANGENCY_PROBE);
                if probe * next.sign() > 0.0 {
                    segments.push(Piece {
                        solution: seg,
                        t_start: seg_start,
                        t_end: t,
                    });
                    let kind = match next {
                        Region::Positive => EventKind::CrossUp,
                        Region::Negative => EventKind::CrossDown,
                    };
                    events.push(Event { t, x: 0.0, kind });
                    if events.len() > opts.max_events {
                        return Err(Error::MaxEventsExceeded {
                            cap: opts.max_events,
                            t,
                        });
                    }
                    seg = candidate;
                    region = next;
                    seg_start = t;
                } else {
                    // touch without crossing: restart in the same region
                    segments.push(Piece {
                        solution: seg,
                        t_start: seg_start,
                        t_end: t,
                    });
                    seg = SegmentSolution::through(drive, region, t, 0.0);
                    seg_start = t;
                    if segments.len() > 4 * opts.max_events {
                        return Err(Error::MaxEventsExceeded {
                            cap: opts.max_events,
                            t,
                        });
                    }
                }
                scan_from = t + TANGENCY_PROBE;
            }
        }
    }
}

/// Simulate until the first tip, doubling the time budget (starting from
/// [`default_t_max`]) up to three times.
pub fn tip_trajectory(cfg: &SystemConfig) -> Result<Trajectory> {
    if !(cfg.eps > 0.0) {
        return Err(Error::Domain("tipping requires eps > 0".into()));
    }
    let mut t_max = default_t_max(cfg);
    for _ in 0..4 {
        let traj = simulate(cfg, t_max)?;
        if traj.tipped {
            return Ok(traj);
        }
        t_max *= 2.0;
    }
    Err(Error::NoTipWithinBudget { t_max: t_max / 2.0 })
}

/// First tipping time and value `(t_tp, mu_tp)`.
pub fn tipping_point(cfg: &SystemConfig) -> Result<(f64, f64)> {
    let traj = tip_trajectory(cfg)?;
    match (traj.t_tp, traj.mu_tp) {
        (Some(t), Some(mu)) => Ok((t, mu)),
        _ => unreachable!("tip_trajectory only returns tipped trajectories"),
    }
}

/// Coefficient `C+` of the positive segment entered at an upward crossing at `t_cross`.
pub fn exit_coefficient(cfg: &SystemConfig, t_cross: f64) -> f64 {
    -Drive::from(cfg).particular(Region::Positive, t_cross)
}
