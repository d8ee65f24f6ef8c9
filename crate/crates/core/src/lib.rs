//! Tipping of a non-smooth fold under slow parameter drift and periodic forcing.
//!
//! The model is `dx/dt = 2|x| - mu(t) + A cos(omega t - phase)` with
//! `mu(t) = mu0 - eps t`, together with its smoothed variant and the classical
//! saddle-node reference. The crate provides
//!
//! * [`exactsim`]: exact event-driven simulation of the piecewise-linear system,
//! * [`orbit`]: periodic orbits, the grazing value `mu_G` and the cyclic fold `mu_CF`,
//! * [`asym`]: closed-form estimates and the low-frequency phase analysis,
//! * [`smoothsim`]: adaptive integration of the smooth systems,
//! * [`sweep`]: parameter sweeps with transition detection.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN on purpose

pub mod asym;
pub mod error;
pub mod exactsim;
pub mod model;
pub mod ode;
pub mod orbit;
pub mod roots;
pub mod smoothsim;
pub mod sweep;

pub use error::{ConfigError, Error, Result};
pub use exactsim::{simulate, tipping_point, Event, EventKind, Trajectory};
pub use model::{forcing, segment_value, x_particular, Region, SegmentSolution, SystemConfig, SystemKind};
pub use orbit::{continue_to_fold, grazing_mu, grazing_orbit, ContinuationBranch, PeriodicOrbit, Termination};
pub use asym::{EstimateSet, PhaseAnalysis, PhaseRoot};
pub use smoothsim::{Regime, SmoothTipResult, Thresholds};
pub use sweep::{Axis, Surface, SweepBase, SweepResult, Transition};
