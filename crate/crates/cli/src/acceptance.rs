//! The twelve acceptance criteria, run at the reference parameters
//! `p = 2, delta = 100, A = 20, s0 = 12` on the default grid.

use std::time::Instant;

use blowup_core::constants::DESCENT_M;
use blowup_core::dynamics::{shoot, Constraint, DynConfig};
use blowup_core::profile::Params;
use blowup_core::scenarios::*;
use blowup_core::series::expand::certify;
use blowup_core::series::scalar::Scalar;
use blowup_core::Result;
use serde::Serialize;

use crate::checks;

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const TITLES: [&str; 12] = [
    "exact remainder certificate",
    "exact profile certificate",
    "basis suite",
    "semigroup suite",
    "profile certification",
    "dynamics linear suite",
    "trapping demonstration",
    "boundary-flow signs",
    "stability probes",
    "descent and handoff",
    "final profile",
    "intermediate profile trend",
];

/// Shooting budget and window of the trapping experiment.
pub const SHOOT_BUDGET: usize = 2000;
pub const SHOOT_WINDOW: f64 = 3.0;
/// Amplitude of the supplementary shooting run reported with criterion 7.
pub const SUPPLEMENT_A: f64 = 400.0;
/// Boundary-flow evaluation point: `s` and `A`.
pub const FLOW_S: f64 = 12.0;
pub const FLOW_A: f64 = 1000.0;

type Outcome = Result<(bool, String)>;

fn series_criterion(which: &str) -> Outcome {
    let t = Instant::now();
    let cert = certify(2, &Scalar::gamma())?;
    let checks: Vec<_> = cert.checks.iter().filter(|c| c.series == which).collect();
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("c{} {}", c.order, c.label)).collect();
    let secs = t.elapsed().as_secs_f64();
    let pass = failed.is_empty() && secs < 10.0;
    Ok((pass, format!("{} identities, failed {:?}", checks.len(), failed)))
}

fn basis_criterion() -> Outcome {
    let err = checks::orthogonality_error(48)?;
    let prod = checks::h2_squared()?;
    let want = vec![(0, "8".to_string()), (2, "8".to_string()), (4, "1".to_string())];
    let pass = err <= 1e-10 && prod == want;
    Ok((pass, format!("orthogonality rel err {err:.3e}; h2h2 = {prod:?}")))
}

fn semigroup_criterion() -> Outcome {
    let t = Instant::now();
    let grid = DynConfig::default().grid()?;
    let rep = checks::kernel_check(&grid)?;
    let secs = t.elapsed().as_secs_f64();
    let pass = rep.passed() && secs < 60.0;
    Ok((
        pass,
        format!("eigen-decay err {:.3e}, composition err {:.3e}", rep.worst_decay(), rep.composition_err),
    ))
}

fn profile_criterion(params: &Params) -> Outcome {
    let t = Instant::now();
    let rep = checks::profile_check(params, &[10.0, 12.0, 14.0])?;
    let secs = t.elapsed().as_secs_f64();
    let min_e = rep.rows.iter().map(|r| r.min_e).fold(f64::INFINITY, f64::min);
    Ok((
        rep.passed() && secs < 60.0,
        format!(
            "min E {min_e:.4}, excess growth {:.3}, gradient growth {:.3}, axis ok {}",
            rep.excess_growth(),
            rep.grad_growth(),
            rep.axis_ok()
        ),
    ))
}

fn linear_criterion(params: &Params) -> Outcome {
    let grid = DynConfig::default().grid()?;
    let rep = checks::linear_check(params, &grid, 3.0)?;
    Ok((
        rep.passed(),
        format!("eigen rate err {:.3e}, psi sup err {:.3e}, order {:.3}", rep.eigen_err, rep.psi_err, rep.order),
    ))
}

fn names(cs: &[Constraint]) -> String {
    let mut v: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
    v.dedup();
    v.join(" ")
}

/// Returns the best `d` for criterion 12 alongside the verdict.
fn trapping_criterion(params: &Params) -> Result<(bool, String, [f64; 5])> {
    let cfg = DynConfig::default();
    let grid = cfg.grid()?;
    let t = Instant::now();
    let res = shoot(params, &grid, SHOOT_WINDOW, SHOOT_BUDGET, cfg.ds)?;
    let exits = res.exit_components();
    let all_out = exits.iter().all(|c| c.is_outgoing());
    let pass = res.window >= SHOOT_WINDOW - 1e-9 && all_out && t.elapsed().as_secs_f64() < 1800.0;
    let sup = shoot(&Params { amp: SUPPLEMENT_A, ..*params }, &grid, SHOOT_WINDOW, SHOOT_BUDGET, cfg.ds)?;
    let sup_out = sup.exit_components().iter().all(|c| c.is_outgoing());
    let detail = format!(
        "A = {}: window {:.4} after {} trials, exits [{}] ({}); A = {SUPPLEMENT_A}: window {:.4} after {} trials, all exits outgoing {sup_out}",
        params.amp,
        res.window,
        res.trials.len(),
        names(&exits),
        res.reason,
        sup.window,
        sup.trials.len(),
    );
    Ok((pass, detail, res.best_d))
}

fn flow_criterion(params: &Params) -> Outcome {
    let grid = DynConfig::default().grid()?;
    let pr = Params { amp: FLOW_A, ..*params };
    let rows = checks::boundary_signs(&pr, &grid, FLOW_S)?;
    let margins: Vec<f64> = (1..=4).map(|k| checks::item_margin(&rows, k)).collect();
    let pass = margins.iter().all(|&m| m >= 0.1);
    Ok((
        pass,
        format!(
            "s = {FLOW_S}, A = {FLOW_A}: margins (i) {:.3} (ii) {:.3} (iii) {:.3} (iv) {:.3}",
            margins[0], margins[1], margins[2], margins[3]
        ),
    ))
}

fn probe_criterion(params: &Params) -> Outcome {
    let cfg = DynConfig::default();
    let rep = checks::probes(params, &cfg.grid()?, cfg.ds)?;
    let worst = rep.psi.iter().fold(0.0f64, |m, r| m.max(r.2));
    let ex: Vec<String> = rep.exponents.iter().map(|(p, e)| format!("p={p}: {e:.4}")).collect();
    Ok((rep.exponents_ok() && rep.psi_ok(), format!("exponents [{}], worst psi ratio {worst:.4}", ex.join(", "))))
}

fn descent_criterion(params: &Params) -> Outcome {
    let cfg = DynConfig::default();
    let grid = cfg.grid()?;
    let pr = Params { s0: DESCENT_S0, ..*params };
    let mut env = true;
    let mut hand = true;
    let mut bounded = true;
    let mut worst_env: f64 = 0.0;
    let mut worst_hand: f64 = 0.0;
    for (k, l) in DESCENT_SWEEP {
        let rep = descent_check(k, l, DEFAULT_ETA_STAR, DESCENT_M_SMALL, &pr, &grid, cfg.ds)?;
        env &= rep.envelope_holds(DESCENT_M);
        hand &= rep.handoff_ok();
        worst_env = worst_env.max(rep.worst_ratio());
        worst_hand = worst_hand.max(rep.handoff_distance / rep.handoff_tolerance);
        bounded &= handoff(&rep, 5.0, &pr, &grid, cfg.ds)?.bounded(&pr);
    }
    Ok((
        env && hand && bounded,
        format!(
            "s0 = {DESCENT_S0}: envelope ratio {worst_env:.4} (M = {DESCENT_M:.4}), handoff distance / tolerance {worst_hand:.3}, post-handoff norm <= 1.5 kappa {bounded}"
        ),
    ))
}

fn final_criterion(params: &Params) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        for k0 in [0.5, 1.0, 5.0] {
            worst = worst.max(final_profile_ode(k0, 1.3, 1.0, p)?.rel_err);
        }
    }
    let mut worst_u: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let pr = Params { p, ..*params };
        for a in [(0.1, 0.2), (0.3, 0.05), (0.2, 0.2)] {
            worst_u = worst_u.max(final_vs_u_star(a, 1.0, 5.0, &pr)?);
        }
    }
    Ok((worst <= 1e-8 && worst_u <= 1e-8, format!("closed-form rel err {worst:.3e}, u* gap {worst_u:.3e}")))
}

fn intermediate_criterion(params: &Params, best_d: [f64; 5]) -> Outcome {
    let cfg = DynConfig::default();
    let grid = cfg.grid()?;
    let pr = params.with_d(best_d);
    let s: Vec<f64> = (0..4).map(|k| pr.s0 + k as f64).collect();
    let states = sample_trajectory(&pr, &grid, cfg.ds, &s)?;
    let rep = intermediate_profile_check(1.0, &states, &pr, &grid)?;
    let errs: Vec<String> = rep.rows.iter().map(|r| format!("{:.3e}", r.sup_error)).collect();
    Ok((rep.strictly_decreasing(), format!("d = {best_d:?}: sup errors [{}]", errs.join(", "))))
}

fn finish(id: usize, t: Instant, out: Outcome) -> Criterion {
    let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    Criterion { id, title: TITLES[id - 1], pass, detail, seconds: t.elapsed().as_secs_f64() }
}

/// Runs one criterion. Criterion 12 needs the best `d` of criterion 7 and
/// runs the search itself when called alone.
pub fn run_one(id: usize) -> Criterion {
    let params = Params::default();
    let t = Instant::now();
    let out = match id {
        1 => series_criterion("remainder"),
        2 => series_criterion("profile"),
        3 => basis_criterion(),
        4 => semigroup_criterion(),
        5 => profile_criterion(&params),
        6 => linear_criterion(&params),
        7 => trapping_criterion(&params).map(|(p, d, _)| (p, d)),
        8 => flow_criterion(&params),
        9 => probe_criterion(&params),
        10 => descent_criterion(&params),
        11 => final_criterion(&params),
        12 => trapping_criterion(&params).and_then(|(_, _, d)| intermediate_criterion(&params, d)),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    finish(id, t, out)
}

/// Runs all twelve criteria, calling `report` as each one finishes.
pub fn run_all(mut report: impl FnMut(&Criterion)) -> Vec<Criterion> {
    let params = Params::default();
    let mut out = Vec::new();
    let mut best_d = None;
    for id in 1..=12 {
        let c = match id {
            7 => {
                let t = Instant::now();
                let r = trapping_criterion(&params);
                best_d = r.as_ref().ok().map(|x| x.2);
                finish(7, t, r.map(|(p, d, _)| (p, d)))
            }
            12 => {
                let t = Instant::now();
                let r = match best_d {
                    Some(d) => intermediate_criterion(&params, d),
                    None => Ok((false, "no shooting trajectory from criterion 7".into())),
                };
                finish(12, t, r)
            }
            _ => run_one(id),
        };
        report(&c);
        out.push(c);
    }
    out
}

/// One line per criterion: `criterion  7 FAIL trapping demonstration: ...`.
pub fn line(c: &Criterion) -> String {
    format!(
        "criterion {:>2} {} {}: {} [{:.1} s]",
        c.id,
        if c.pass { "PASS" } else { "FAIL" },
        c.title,
        c.detail,
        c.seconds
    )
}
