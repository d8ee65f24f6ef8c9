use serde::Serialize;
use serde_json::{json, Value};
use tipfold_core::asym::{estimate_set, mu_cf_large_omega, mu_cf_small_omega, mu_eps, mu_tp_large_omega, n_max, L_FOLD};
use tipfold_core::exactsim::{default_t_max, simulate, tip_trajectory, Event, EventKind};
use tipfold_core::smoothsim::{run, SmoothOptions};
use tipfold_core::sweep::{
    appendix_table, fig_orbit_snapshots, surface, sweep_alpha, sweep_eps, sweep_omega, Axis, FoldRow, SweepBase,
    SweepResult, TABLE_OMEGAS,
};
use tipfold_core::{asym, continue_to_fold, grazing_mu, Error, SystemConfig, SystemKind};

use crate::args::{parse_grid, AxisArg, ConfigArgs, OutputArgs};
use crate::error::CliError;
use crate::output::{num, opt, Run};

/// Summary printed to stdout and written next to the data.
pub type Summary = Value;

fn start(command: &'static str, args: &ConfigArgs, out: &OutputArgs) -> Result<(Run, SystemConfig), CliError> {
    let cfg = args.resolve_valid()?;
    let mut run = Run::new(command, out)?;
    run.add_config(cfg);
    if let Some(path) = &args.write_config {
        run.config_file(path, &cfg)?;
    }
    Ok((run, cfg))
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    config: &'a SystemConfig,
    tipped: bool,
    t_tp: Option<f64>,
    mu_tp: Option<f64>,
    t_end: f64,
    events: &'a [Event],
}

fn event_region(kind: EventKind) -> &'static str {
    match kind {
        EventKind::CrossDown => "negative",
        EventKind::CrossUp | EventKind::Tip => "positive",
    }
}

pub fn simulate_cmd(args: &ConfigArgs, tmax: Option<f64>, samples: usize, out: &OutputArgs) -> Result<Summary, CliError> {
    let (mut run_out, cfg) = start("simulate", args, out)?;
    if let Some(t) = tmax {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tmax must be positive, got {t}")));
        }
    }
    let samples = samples.max(1);
    let (rows, summary) = match cfg.kind {
        SystemKind::NonSmoothPwl => {
            let traj = match tmax {
                Some(t) => simulate(&cfg, t)?,
                None if cfg.eps > 0.0 => tip_trajectory(&cfg)?,
                None => simulate(&cfg, default_t_max(&cfg))?,
            };
            let mut rows: Vec<(f64, Vec<String>)> = traj
                .sample(samples)
                .into_iter()
                .map(|(t, x, r)| (t, vec![num(t), num(x), num(cfg.mu_at(t)), r.name().into(), String::new()]))
                .collect();
            for ev in &traj.events {
                rows.push((
                    ev.t,
                    vec![
                        num(ev.t),
                        num(ev.x),
                        num(cfg.mu_at(ev.t)),
                        event_region(ev.kind).into(),
                        ev.kind.name().into(),
                    ],
                ));
            }
            rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            let summary = serde_json::to_value(SimulateSummary {
                config: &cfg,
                tipped: traj.tipped,
                t_tp: traj.t_tp,
                mu_tp: traj.mu_tp,
                t_end: traj.t_end,
                events: &traj.events,
            })?;
            (rows, summary)
        }
        SystemKind::SmoothedNsf | SystemKind::Snb => {
            let budget = tmax.unwrap_or_else(|| default_t_max(&cfg));
            // first pass finds the end time, second samples it evenly
            let first = run(&cfg, budget, SmoothOptions::default())?;
            if tmax.is_none() && cfg.eps > 0.0 && first.t_tp.is_none() {
                return Err(Error::NoTipWithinBudget { t_max: budget }.into());
            }
            let opts = SmoothOptions {
                sample_dt: Some(first.t_end / samples as f64),
                ..SmoothOptions::default()
            };
            let r = run(&cfg, first.t_end, opts)?;
            let mut rows: Vec<(f64, Vec<String>)> = r
                .samples
                .iter()
                .map(|&(t, x)| {
                    let region = if x > 0.0 { "positive" } else { "negative" };
                    (t, vec![num(t), num(x), num(cfg.mu_at(t)), region.into(), String::new()])
                })
                .collect();
            let mut events = Vec::new();
            if let Some(t) = first.t_tp {
                if let Some(last) = rows.last_mut() {
                    last.1[4] = EventKind::Tip.name().into();
                }
                events.push(Event {
                    t,
                    x: cfg.threshold,
                    kind: EventKind::Tip,
                });
            }
            let summary = serde_json::to_value(SimulateSummary {
                config: &cfg,
                tipped: first.t_tp.is_some(),
                t_tp: first.t_tp,
                mu_tp: first.mu_tp,
                t_end: first.t_end,
                events: &events,
            })?;
            (rows, summary)
        }
    };
    let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r.1).collect();
    run_out.csv(".csv", &["t", "x", "mu", "region", "event_kind"], &rows)?;
    run_out.json(".json", &summary)?;
    run_out.finish()?;
    Ok(summary)
}

fn fold_row(row: &FoldRow, a: f64) -> Vec<String> {
    let w = row.omega;
    vec![
        num(w),
        opt(row.mu_cf),
        num(row.mu_g),
        opt((w > 0.0).then(|| mu_cf_large_omega(a, w, L_FOLD))),
        num(mu_cf_small_omega(a, w)),
    ]
}

const FOLD_HEADER: [&str; 5] = ["omega", "mu_cf", "mu_g", "mu_cf_large_est", "mu_cf_small_est"];

pub fn fold_cmd(args: &ConfigArgs, table: bool, out: &OutputArgs) -> Result<Summary, CliError> {
    let (mut run_out, cfg) = start("fold", args, out)?;
    let (rows, a) = if table {
        (appendix_table(&TABLE_OMEGAS), 1.0)
    } else {
        let a = cfg.amplitude;
        if !(a > 0.0) {
            return Err(CliError::Config("fold needs A > 0".into()));
        }
        let branch = continue_to_fold(cfg.omega, a, 0.0)?;
        let row = FoldRow {
            omega: cfg.omega,
            mu_cf: Some(branch.mu_cf),
            mu_g: grazing_mu(a, cfg.omega),
        };
        (vec![row], a)
    };
    let csv_rows: Vec<Vec<String>> = rows.iter().map(|r| fold_row(r, a)).collect();
    run_out.csv(".csv", &FOLD_HEADER, &csv_rows)?;
    let summary = serde_json::to_value(&rows)?;
    run_out.finish()?;
    if let Some(bad) = rows.iter().find(|r| r.mu_cf.is_none()) {
        return Err(Error::ContinuationDiverged(format!("no fold found at omega = {}", bad.omega)).into());
    }
    Ok(summary)
}

fn sweep_rows(res: &SweepResult, base: &SweepBase) -> Vec<Vec<String>> {
    let c = base.config;
    res.grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cfg = match res.axis {
                Axis::Omega => base.resolve(x, c.eps, c.alpha),
                Axis::Eps => base.resolve(c.omega, x, c.alpha),
                Axis::Alpha => base.resolve(c.omega, c.eps, x),
            };
            vec![
                num(x),
                opt(res.mu_tp[i]),
                opt(res.t_tp[i]),
                res.crossups[i].map(|n| n.to_string()).unwrap_or_default(),
                opt(res.mu_cf.as_ref().and_then(|v| v[i])),
                opt(res.mu_g.as_ref().map(|v| v[i])),
                num(cfg.mu0),
                num(mu_eps(cfg.eps, cfg.threshold)),
                opt((cfg.omega > 0.0).then(|| mu_tp_large_omega(cfg.amplitude, cfg.omega, cfg.eps))),
                res.errors[i].clone().unwrap_or_default(),
            ]
        })
        .collect()
}

pub fn sweep_cmd(args: &ConfigArgs, axis: AxisArg, grid: &str, out: &OutputArgs) -> Result<Summary, CliError> {
    let grid = parse_grid(grid)?;
    let (mut run_out, cfg) = start("sweep", args, out)?;
    let base = match args.mu0_mult {
        Some(m) => SweepBase::grazing_multiple(cfg, m),
        None => SweepBase::literal(cfg),
    };
    let res = match axis {
        AxisArg::Omega => sweep_omega(&base, &grid)?,
        AxisArg::Eps => sweep_eps(&base, &grid)?,
        AxisArg::Alpha => sweep_alpha(&base, &grid)?,
    };
    let name = res.axis.name();
    let header = [
        name,
        "mu_tp",
        "t_tp",
        "crossups",
        "mu_cf",
        "mu_g",
        "mu0",
        "mu_eps",
        "mu_tp_large_est",
        "error",
    ];
    run_out.csv(".csv", &header, &sweep_rows(&res, &base))?;
    let succeeded = res.mu_tp.iter().filter(|v| v.is_some()).count();
    let summary = json!({
        "axis": name,
        "points": res.grid.len(),
        "succeeded": succeeded,
        "success_fraction": res.success_fraction(),
        "transitions": res.transitions,
    });
    run_out.json(".transitions.json", &summary)?;
    run_out.finish()?;
    if res.success_fraction() < 0.9 {
        return Err(CliError::Degraded {
            succeeded,
            total: res.grid.len(),
        });
    }
    Ok(summary)
}

pub fn surface_cmd(args: &ConfigArgs, eps_grid: &str, omega_grid: &str, out: &OutputArgs) -> Result<Summary, CliError> {
    let eps_grid = parse_grid(eps_grid)?;
    let omega_grid = parse_grid(omega_grid)?;
    let (mut run_out, cfg) = start("surface", args, out)?;
    let base = match args.mu0_mult {
        Some(m) => SweepBase::grazing_multiple(cfg, m),
        None => SweepBase::literal(cfg),
    };
    let s = surface(&base, &eps_grid, &omega_grid)?;
    let mut rows = Vec::new();
    let mut ok = 0;
    for (i, &eps) in s.eps_grid.iter().enumerate() {
        for (j, &w) in s.omega_grid.iter().enumerate() {
            ok += s.mu_tp[i][j].is_some() as usize;
            rows.push(vec![
                num(eps),
                num(w),
                opt(s.mu_tp[i][j]),
                s.crossups[i][j].map(|n| n.to_string()).unwrap_or_default(),
            ]);
        }
    }
    run_out.csv(".csv", &["eps", "omega", "mu_tp", "crossups"], &rows)?;
    let total = rows.len();
    let summary = json!({
        "points": total,
        "succeeded": ok,
        "t_curve": s.t_curve,
        "terminus": s.terminus,
    });
    run_out.json(".transitions.json", &summary)?;
    run_out.finish()?;
    if (ok as f64) < 0.9 * total as f64 {
        return Err(CliError::Degraded { succeeded: ok, total });
    }
    Ok(summary)
}

pub fn phase_cmd(args: &ConfigArgs, out: &OutputArgs) -> Result<Summary, CliError> {
    let (mut run_out, cfg) = start("phase", args, out)?;
    let a = cfg.amplitude;
    let mu0 = cfg.mu0;
    let mu0_fn = |w: f64| match args.mu0_mult {
        Some(m) => m * grazing_mu(a, w),
        None => mu0,
    };
    let n = n_max(cfg.omega, cfg.eps, a, cfg.threshold, mu0_fn)?;
    let mut analysis = asym::phase_analysis(&cfg, mu0_fn)?;
    analysis.n_max = Some(n);
    let summary = serde_json::to_value(&analysis)?;
    run_out.json(".json", &summary)?;
    run_out.finish()?;
    Ok(summary)
}

pub fn estimate_cmd(args: &ConfigArgs, out: &OutputArgs) -> Result<Summary, CliError> {
    let (mut run_out, cfg) = start("estimate", args, out)?;
    let summary = serde_json::to_value(estimate_set(&cfg))?;
    run_out.json(".json", &summary)?;
    run_out.finish()?;
    Ok(summary)
}

pub fn orbit_cmd(args: &ConfigArgs, mus: &[f64], out: &OutputArgs) -> Result<Summary, CliError> {
    let (mut run_out, cfg) = start("orbit", args, out)?;
    let snaps = fig_orbit_snapshots(cfg.omega, cfg.amplitude, mus)?;
    let mut rows = Vec::new();
    for s in &snaps {
        for &(t, x) in &s.samples {
            rows.push(vec![num(s.mu), num(s.mu_used), num(t), num(x)]);
        }
    }
    run_out.csv(".csv", &["mu", "mu_used", "t", "x"], &rows)?;
    let meta: Vec<Value> = snaps
        .iter()
        .map(|s| {
            json!({
                "mu": s.mu,
                "mu_used": s.mu_used,
                "mean_x": s.mean_x,
                "positive_fraction": s.positive_fraction,
                "negative_only": s.negative_only,
            })
        })
        .collect();
    let summary = Value::Array(meta);
    run_out.json(".json", &summary)?;
    run_out.finish()?;
    Ok(summary)
}
