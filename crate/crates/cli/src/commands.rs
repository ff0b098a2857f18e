//! One function per subcommand. Each writes its files through `Output` and
//! returns the verdict with the lines to print.

use std::collections::BTreeMap;

use blowup_core::dynamics::{evolve, shoot, Constraint, RunSpec, Terms};
use blowup_core::profile::phi_vs_big_phi;
use blowup_core::scenarios::*;
use blowup_core::series::expand::certify;
use blowup_core::series::scalar::Scalar;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{f17, Output};
use crate::{acceptance, checks, CliError};

pub struct Report {
    pub pass: bool,
    pub lines: Vec<String>,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn done(out: Output, name: &str, cfg: &RunConfig, pass: bool, mut lines: Vec<String>) -> Result<Report, CliError> {
    let dir = out.dir().display().to_string();
    out.finish(name, cfg, pass)?;
    lines.push(format!("{name}: {} (outputs in {dir})", verdict(pass)));
    Ok(Report { pass, lines })
}

/// Exact series identities up to `order`; `tamper_gamma` adds 1 to gamma.
pub fn expand(cfg: &RunConfig, order: usize, tamper_gamma: bool) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let gamma = if tamper_gamma { Scalar::gamma().add(&Scalar::one()) } else { Scalar::gamma() };
    let cert = certify(order, &gamma)?;
    out.text("certificate.txt", &cert.render())?;
    out.json("certificate.json", &cert)?;
    let mut lines: Vec<String> = cert.render().lines().filter(|l| l.starts_with('[')).map(String::from).collect();
    let counted = |series: &str| {
        cert.checks.iter().filter(|c| c.series == series && c.order == order && c.label != "no other modes").count()
    };
    lines.push(format!(
        "order {order}: {} remainder + {} profile coefficient identities",
        counted("remainder"),
        counted("profile")
    ));
    done(out, "expand", cfg, cert.passed(), lines)
}

pub fn profile_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let rep = checks::profile_check(&cfg.params, &[10.0, 12.0, 14.0])?;
    out.csv(
        "profile.csv",
        &["s", "radius", "min_e", "sup_phi_excess", "sup_grad", "axis_unimodal", "axis_far"],
        rep.rows.iter().map(|r| {
            vec![
                f17(r.s),
                f17(r.radius),
                f17(r.min_e),
                f17(r.sup_phi_excess),
                f17(r.sup_grad),
                r.axis_unimodal.to_string(),
                f17(r.axis_far),
            ]
        }),
    )?;
    let s_list = [10.0, 14.0, 18.0, 22.0];
    let errs = s_list.iter().map(|&s| phi_vs_big_phi(&cfg.params, s, 1.0, 120)).collect::<Result<Vec<f64>, _>>()?;
    out.csv("phi_vs_big_phi.csv", &["s", "sup_error"], s_list.iter().zip(&errs).map(|(s, e)| vec![f17(*s), f17(*e)]))?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let lines = vec![
        format!("min E >= 1/2: {}", rep.min_e_ok()),
        format!("(sup phi - kappa) e^(s/3) growth {}", f17(rep.excess_growth())),
        format!("sup |grad phi| e^(s/6) growth {}", f17(rep.grad_growth())),
        format!("axis decay below 0.05 kappa: {}", rep.axis_ok()),
        format!("|phi - Phi| decreasing over s = 10, 14, 18, 22: {decreasing}"),
    ];
    done(out, "profile-check", cfg, rep.passed() && decreasing, lines)
}

pub fn kernel_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let rep = checks::kernel_check(&cfg.grid()?)?;
    out.csv(
        "kernel.csv",
        &["n1", "n2", "s", "rel_err"],
        rep.rows.iter().map(|r| vec![r.n1.to_string(), r.n2.to_string(), f17(r.s), f17(r.rel_err)]),
    )?;
    let lines = vec![
        format!("worst eigen-decay error {}", f17(rep.worst_decay())),
        format!("worst composition error {}", f17(rep.composition_err)),
    ];
    done(out, "kernel-check", cfg, rep.passed(), lines)
}

#[derive(Serialize)]
struct EvolveSummary {
    d: [f64; 5],
    trapped_window: f64,
    exit_s: Option<f64>,
    exit_constraint: Option<String>,
    exit_sign: f64,
    stopped: Option<String>,
}

/// Trajectory from `build_initial` with the configured `d`; passes when it
/// stays in `V_A(s)` over the whole window.
pub fn evolve_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let grid = cfg.grid()?;
    let spec = RunSpec { window: cfg.window, ds: cfg.ds, stop_on_exit: false, terms: Terms::FULL };
    let traj = evolve(&cfg.params, &grid, spec)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    out.text("trajectory.csv", &String::from_utf8_lossy(&buf))?;
    let summary = EvolveSummary {
        d: cfg.params.d,
        trapped_window: traj.trapped_window(),
        exit_s: traj.exit.map(|e| e.0),
        exit_constraint: traj.exit.map(|e| e.1.to_string()),
        exit_sign: traj.exit_sign,
        stopped: traj.stopped.clone(),
    };
    out.json("evolve.json", &summary)?;
    let mut lines = vec![format!("trapped window {}", f17(summary.trapped_window))];
    if let Some((s, c)) = traj.exit {
        lines.push(format!("left V_A(s) at s = {} through {c}", f17(s)));
    }
    if let Some(why) = &traj.stopped {
        lines.push(format!("stopped: {why}"));
    }
    let pass = traj.exit.is_none() && traj.stopped.is_none();
    done(out, "evolve", cfg, pass, lines)
}

fn fmt_d(d: &[f64; 5]) -> String {
    d.iter().map(|x| f17(*x)).collect::<Vec<_>>().join(",")
}

/// Bisection search over `d`; passes when the best trial is trapped over the
/// requested window and every exit was through an outgoing face.
pub fn shoot_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let grid = cfg.grid()?;
    let res = shoot(&cfg.params, &grid, cfg.window, cfg.budget, cfg.ds)?;
    out.csv(
        "trials.csv",
        &["trial", "d00", "d20", "d40", "d42", "d60", "window", "exit_s", "exit_constraint", "exit_sign"],
        res.trials.iter().enumerate().map(|(k, t)| {
            let mut row = vec![k.to_string()];
            row.extend(t.d.iter().map(|x| f17(*x)));
            row.push(f17(t.window));
            row.push(t.exit.map_or(String::new(), |e| f17(e.0)));
            row.push(t.exit.map_or(String::new(), |e| e.1.to_string()));
            row.push(f17(t.exit_sign));
            row
        }),
    )?;
    let mut buf = Vec::new();
    res.best.write_csv(&mut buf)?;
    out.text("best_trajectory.csv", &String::from_utf8_lossy(&buf))?;
    let exits = res.exit_components();
    let all_out = exits.iter().all(Constraint::is_outgoing);
    #[derive(Serialize)]
    struct Summary<'a> {
        best_d: [f64; 5],
        window: f64,
        trials: usize,
        reason: &'a str,
        exits: Vec<String>,
        all_exits_outgoing: bool,
    }
    out.json(
        "shoot.json",
        &Summary {
            best_d: res.best_d,
            window: res.window,
            trials: res.trials.len(),
            reason: &res.reason,
            exits: exits.iter().map(|c| c.to_string()).collect(),
            all_exits_outgoing: all_out,
        },
    )?;
    let lines = vec![
        format!("best d = {}", fmt_d(&res.best_d)),
        format!("trapped window {} after {} trials ({})", f17(res.window), res.trials.len(), res.reason),
        format!("every exit through an outgoing component: {all_out}"),
    ];
    let pass = res.window >= cfg.window - 1e-9 && all_out;
    done(out, "shoot", cfg, pass, lines)
}

/// Polar sweep of `a`: 13 directions in the first quadrant times the
/// `G0 e^(s0)` levels of the region calibration, plus the origin.
pub fn regions(cfg: &RunConfig, m: f64, big_m: f64) -> Result<Report, CliError> {
    let p = &cfg.params;
    assert_big_m(big_m, p.p)?;
    let mut out = Output::new(&cfg.output_dir)?;
    let mut reports = vec![region_size_check((0.0, 0.0), p, m, big_m)?];
    for it in 0..=12 {
        let th = std::f64::consts::FRAC_PI_2 * it as f64 / 12.0;
        for lv in REGION_SWEEP_LEVELS {
            let a = ray_point((th.cos(), th.sin()), lv * (-p.s0).exp(), p);
            reports.push(region_size_check(a, p, m, big_m)?);
        }
    }
    out.csv(
        "regions.csv",
        &["a1", "a2", "g0", "labels", "w0", "pass"],
        reports.iter().map(|r| {
            let labels: Vec<String> = r.label.labels.iter().map(|x| x.to_string()).collect();
            vec![f17(r.a.0), f17(r.a.1), f17(r.label.g0), labels.join("+"), f17(r.w0), r.passed().to_string()]
        }),
    )?;
    #[derive(Serialize, Default)]
    struct Cert {
        points: usize,
        passed: usize,
        lowest_w0: Option<f64>,
        highest_w0: Option<f64>,
        lower_bound: Option<f64>,
        upper_bound: Option<f64>,
    }
    let mut certs: BTreeMap<String, Cert> = BTreeMap::new();
    for r in &reports {
        for c in &r.checks {
            let e = certs.entry(c.region.to_string()).or_default();
            e.points += 1;
            e.passed += c.pass as usize;
            e.lowest_w0 = Some(e.lowest_w0.map_or(r.w0, |x| x.min(r.w0)));
            e.highest_w0 = Some(e.highest_w0.map_or(r.w0, |x| x.max(r.w0)));
            e.lower_bound = Some(e.lower_bound.map_or(c.lower, |x| x.min(c.lower)));
            e.upper_bound = Some(e.upper_bound.map_or(c.upper, |x| x.max(c.upper)));
        }
    }
    out.json("region_certificates.json", &certs)?;
    let lines =
        certs.iter().map(|(k, c)| format!("{k}: {}/{} points within the size bounds", c.passed, c.points)).collect();
    let pass = reports.iter().all(|r| r.passed());
    done(out, "regions", cfg, pass, lines)
}

/// `u' = u^p` from `t*` to `T` with `T - t* = tmt`.
pub fn final_profile(cfg: &RunConfig, k0: f64, tmt: f64) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let fp = final_profile_ode(k0, tmt, 0.0, cfg.params.p)?;
    out.json("final_profile.json", &fp)?;
    let pass = fp.rel_err <= 1e-8;
    let lines = vec![
        format!("u(t*) = {}", f17(fp.u_start)),
        format!("u(T) = {}", f17(fp.u_end)),
        format!("closed form {} (relative error {})", f17(fp.exact), f17(fp.rel_err)),
    ];
    done(out, "final-profile", cfg, pass, lines)
}

/// All twelve acceptance criteria; lines are printed as they finish.
pub fn reproduce_all(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut out = Output::new(&cfg.output_dir)?;
    let results = acceptance::run_all(|c| println!("{}", acceptance::line(c)));
    out.csv(
        "acceptance.csv",
        &["criterion", "title", "pass", "detail"],
        results.iter().map(|c| vec![c.id.to_string(), c.title.into(), c.pass.to_string(), c.detail.clone()]),
    )?;
    for c in &results {
        out.timing(&format!("criterion {}", c.id), c.seconds);
    }
    let passed = results.iter().filter(|c| c.pass).count();
    let lines = vec![format!("{passed}/12 criteria pass")];
    done(out, "reproduce-all", cfg, passed == 12, lines)
}
