//! Trajectories from the initial data and the search over `d`.

use std::io::Write;

use serde::Serialize;

use crate::basis::{HermiteIndex, TensorGrid};
use crate::error::{Error, Result};
use crate::profile::{Params, Profile};

use super::integrator::{Integrator, QForce, SpectralState, Terms};
use super::trap::{decompose, va_check, Constraint, QDecomposition, VAReport};
use super::build_initial;

/// The `q_{i,j}` written to trajectory logs.
pub const LOGGED: [(usize, usize); 10] =
    [(0, 0), (2, 0), (2, 2), (4, 0), (4, 2), (4, 4), (6, 0), (6, 2), (6, 4), (6, 6)];

/// One logged time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub dec: QDecomposition,
    pub report: VAReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub params: Params,
    pub points: Vec<TrajectoryPoint>,
    /// First time outside `V_A(s)` and the constraint that failed.
    pub exit: Option<(f64, Constraint)>,
    /// Sign of the failing component at the exit.
    pub exit_sign: f64,
    /// Set when the integration stopped on an error (overflow).
    pub stopped: Option<String>,
}

impl Trajectory {
    /// Length of the time interval spent inside `V_A(s)`.
    pub fn trapped_window(&self) -> f64 {
        let s0 = self.params.s0;
        match self.exit {
            Some((s, _)) => s - s0,
            None => self.points.last().map_or(0.0, |p| p.dec.s - s0),
        }
    }

    /// CSV with columns `s`, the logged `q_{i,j}`, `q_minus`, `sup_w` and
    /// every margin.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let cons = Constraint::all();
        let mut head = vec!["s".to_string()];
        head.extend(LOGGED.iter().map(|&(i, j)| format!("q{i}{j}")));
        head.push("q_minus".into());
        head.push("sup_w".into());
        head.extend(cons.iter().map(|c| format!("margin_{c}")));
        writeln!(out, "{}", head.join(","))?;
        for pt in &self.points {
            let mut row = vec![fmt17(pt.dec.s)];
            row.extend(LOGGED.iter().map(|&(i, j)| fmt17(pt.dec.get(i, j))));
            row.push(fmt17(pt.dec.q_minus_norm));
            row.push(fmt17(pt.dec.sup_w));
            row.extend(cons.iter().map(|c| fmt17(pt.report.margin(*c))));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// How far to integrate and when to stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub window: f64,
    pub ds: f64,
    /// Stop at the first exit from `V_A(s)`.
    pub stop_on_exit: bool,
    pub terms: Terms,
}

/// Integrates `q` from `build_initial` over `[s0, s0 + window]`, checking
/// `V_A(s)` after every step.
pub fn evolve(params: &Params, grid: &TensorGrid, spec: RunSpec) -> Result<Trajectory> {
    let profile = Profile::new(params);
    let state = build_initial(params, grid)?;
    evolve_from(params, grid, state, spec, &profile)
}

pub fn evolve_from(
    params: &Params,
    grid: &TensorGrid,
    state: SpectralState,
    spec: RunSpec,
    profile: &Profile,
) -> Result<Trajectory> {
    let integ = Integrator::new(grid, QForce::new(params, grid, spec.terms), spec.ds)?;
    let mut traj =
        Trajectory { params: *params, points: Vec::new(), exit: None, exit_sign: 0.0, stopped: None };
    let record = |st: &SpectralState, traj: &mut Trajectory| -> Result<bool> {
        let dec = decompose(st, grid, profile)?;
        let report = va_check(&dec, params);
        if traj.exit.is_none() {
            if let Some(c) = report.exit_constraint(params) {
                let v = c.value(&dec);
                traj.exit = Some((st.s, c));
                traj.exit_sign = if v >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        let go_on = !(spec.stop_on_exit && traj.exit.is_some());
        traj.points.push(TrajectoryPoint { dec, report });
        Ok(go_on)
    };
    if !record(&state, &mut traj)? {
        return Ok(traj);
    }
    let n = (spec.window / spec.ds).round() as usize;
    let mut st = state;
    for _ in 0..n {
        st = match integ.step(&st) {
            Ok(next) => next,
            Err(e @ Error::Overflow { .. }) => {
                traj.stopped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        if !record(&st, &mut traj)? {
            break;
        }
    }
    Ok(traj)
}

/// One candidate of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootTrial {
    pub d: [f64; 5],
    pub window: f64,
    pub exit: Option<(f64, Constraint)>,
    pub exit_sign: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootResult {
    pub best_d: [f64; 5],
    pub window: f64,
    pub best: Trajectory,
    pub trials: Vec<ShootTrial>,
    /// Why the search ended.
    pub reason: String,
}

impl ShootResult {
    pub fn exit_components(&self) -> Vec<Constraint> {
        self.trials.iter().filter_map(|t| t.exit.map(|e| e.1)).collect()
    }
}

/// Smallest trial-interval width; below it the bisection has converged.
const COLLAPSE: f64 = 1e-14;

/// Deterministic bisection over `d in [-2, 2]^5`: every trial sits at the
/// centre of the current box; an exit through the face steered by `d_k`
/// halves the `k`-th interval on the side opposite to the exit sign.
/// Returns the trial with the longest trapped window.
pub fn shoot(params: &Params, grid: &TensorGrid, window: f64, budget: usize, ds: f64) -> Result<ShootResult> {
    shoot_with(params, grid, window, budget, ds, Terms::FULL)
}

/// `shoot` with a chosen set of active terms.
pub fn shoot_with(
    params: &Params,
    grid: &TensorGrid,
    window: f64,
    budget: usize,
    ds: f64,
    terms: Terms,
) -> Result<ShootResult> {
    if !(window >= 0.0 && window <= 6.0) {
        return Err(Error::Precondition(format!("window {window} outside [0, 6]")));
    }
    if budget < 100 {
        return Err(Error::Precondition(format!("budget {budget} below 100")));
    }
    let spec = RunSpec { window, ds, stop_on_exit: true, terms };
    let mut lo = [-2.0; 5];
    let mut hi = [2.0; 5];
    let mut trials = Vec::new();
    let mut best: Option<(Trajectory, [f64; 5])> = None;
    let mut reason = format!("budget of {budget} trials exhausted");
    for _ in 0..budget {
        let mut d = [0.0; 5];
        for k in 0..5 {
            d[k] = 0.5 * (lo[k] + hi[k]);
        }
        let pr = params.with_d(d);
        let traj = match evolve(&pr, grid, spec) {
            Ok(t) => t,
            Err(Error::NonpositiveBracket { .. }) => {
                reason = format!("initial data undefined at d = {d:?}");
                break;
            }
            Err(e) => return Err(e),
        };
        let w = traj.trapped_window();
        trials.push(ShootTrial { d, window: w, exit: traj.exit, exit_sign: traj.exit_sign });
        let better = best.as_ref().map_or(true, |(b, _)| w > b.trapped_window());
        let exit = traj.exit;
        let sign = traj.exit_sign;
        if better {
            best = Some((traj, d));
        }
        let Some((_, c)) = exit else {
            reason = "trapped over the whole window".into();
            break;
        };
        let Some(k) = c.d_slot() else {
            reason = format!("exit through {c}, which no parameter steers");
            break;
        };
        if sign > 0.0 {
            hi[k] = d[k];
        } else {
            lo[k] = d[k];
        }
        if hi[k] - lo[k] < COLLAPSE {
            reason = format!("interval for d[{k}] collapsed at exit through {c}");
            break;
        }
    }
    let (best, best_d) = best.expect("at least one trial");
    Ok(ShootResult { best_d, window: best.trapped_window(), best, trials, reason })
}

/// Components of `q` at the outgoing representatives, for reporting.
pub fn outgoing_indices() -> [HermiteIndex; 5] {
    [(0, 0), (2, 0), (4, 0), (4, 2), (6, 0)].map(|(i, j)| HermiteIndex::new(i, j))
}
