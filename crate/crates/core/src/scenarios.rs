//! Control of the recentered solutions `w_a`: the three regions of initial
//! size, stability probes around `0` and `psi`, the descent from `kappa` to
//! `kappa - eta*`, the final-profile ODE and the intermediate profile.

use std::collections::BTreeSet;
use std::fmt;

use ode_solvers::{Dop853, System, Vector1};
use serde::Serialize;

use crate::basis::TensorGrid;
use crate::constants::{DESCENT_M, M0, M1, PROBE_SUP_RADIUS, REGION_C};
use crate::dynamics::{recenter_closed, Integrator, QForce, SpectralState, Terms, WForce};
use crate::error::{Error, Result};
use crate::operator::SpectralField;
use crate::profile::{eval_g0, eval_psi, eval_u_star, kappa_of, psi_inverse, psi_prime, Params, Profile};

/// `epsilon_0 = 0.05 kappa`, the size of data the zero probe accepts.
pub fn eps0(p: f64) -> f64 {
    0.05 * kappa_of(p)
}

/// Default `m` of the regions.
pub const DEFAULT_M_SMALL: f64 = 0.05;
/// Default `M` of the regions; `assert_big_m` checks it against `eps0`, `M0`.
pub const DEFAULT_M_BIG: f64 = 10.0;
/// Default `eta*` of the descent.
pub const DEFAULT_ETA_STAR: f64 = 0.05;
/// Relative tolerance under which `G0(a)` sits on a region boundary.
pub const BOUNDARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Region {
    R1,
    R2,
    R3,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::R1 => "R1",
            Region::R2 => "R2",
            Region::R3 => "R3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionLabel {
    pub labels: BTreeSet<Region>,
    pub m: f64,
    pub big_m: f64,
    pub g0: f64,
}

impl RegionLabel {
    pub fn contains(&self, r: Region) -> bool {
        self.labels.contains(&r)
    }
}

/// `kappa (1 + M)^(-1/(p-1)) <= max(eps0/2, kappa/(2 M0))`.
pub fn big_m_admissible(big_m: f64, p: f64) -> bool {
    let k = kappa_of(p);
    k * (1.0 + big_m).powf(-1.0 / (p - 1.0)) <= (eps0(p) / 2.0).max(k / (2.0 * M0))
}

/// Rejects an `M` that violates the admissibility condition.
pub fn assert_big_m(big_m: f64, p: f64) -> Result<()> {
    if big_m_admissible(big_m, p) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("M = {big_m} too small for eps0 and M0 at p = {p}")))
    }
}

fn check_m(m: f64, big_m: f64) -> Result<()> {
    if !(m > 0.0 && m < 1.0 && big_m >= 1.0) {
        return Err(Error::Precondition(format!("need 0 < m < 1 <= M, got m = {m}, M = {big_m}")));
    }
    Ok(())
}

/// Region membership of `a` from `G0(a)` against `m e^(-s0)`, `M e^(-s0)`.
pub fn classify(a: (f64, f64), s0: f64, m: f64, big_m: f64, params: &Params) -> Result<RegionLabel> {
    check_m(m, big_m)?;
    let g0 = eval_g0(a.0, a.1, params);
    let lo = m * (-s0).exp();
    let hi = big_m * (-s0).exp();
    let near = |t: f64| (g0 - t).abs() <= BOUNDARY_RTOL * t;
    let mut labels = BTreeSet::new();
    if g0 >= hi || near(hi) {
        labels.insert(Region::R1);
    }
    if (g0 >= lo || near(lo)) && (g0 <= hi || near(hi)) {
        labels.insert(Region::R2);
    }
    if g0 <= lo || near(lo) {
        labels.insert(Region::R3);
    }
    Ok(RegionLabel { labels, m, big_m, g0 })
}

/// Bounds on `w0(a e^(s0/2), s0)` without the `C e^(-s0/3)` allowance:
/// `(lower, upper, lower carries the allowance)`.
fn region_bounds(r: Region, m: f64, big_m: f64, p: f64) -> (f64, f64, bool) {
    let k = kappa_of(p);
    let e = -1.0 / (p - 1.0);
    match r {
        Region::R1 => (0.0, k * (1.0 + big_m).powf(e), false),
        Region::R2 => (k * (1.0 + big_m).powf(e), k * (1.0 + m).powf(e), true),
        Region::R3 => (k * (1.0 + m).powf(e), k, true),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCheck {
    pub region: Region,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSizeReport {
    pub a: (f64, f64),
    pub label: RegionLabel,
    pub w0: f64,
    pub checks: Vec<RegionCheck>,
}

impl RegionSizeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `C e^(-s0/3)` allowance needed at one point (0 when the bare bounds hold;
/// infinite when `w0 < 0` in R1).
fn needed_c(w0: f64, label: &RegionLabel, p: f64, s0: f64) -> f64 {
    let mut need: f64 = 0.0;
    for &r in &label.labels {
        let (lo, hi, soft_lo) = region_bounds(r, label.m, label.big_m, p);
        if w0 < lo {
            need = if soft_lo { need.max(lo - w0) } else { f64::INFINITY };
        }
        need = need.max(w0 - hi);
    }
    need * (s0 / 3.0).exp()
}

/// Two-sided size bounds of `w0(a e^(s0/2), s0)` in every region containing
/// `a`, with the frozen allowance `REGION_C e^(-s0/3)`.
pub fn region_size_check(a: (f64, f64), params: &Params, m: f64, big_m: f64) -> Result<RegionSizeReport> {
    region_size_check_with(a, params, m, big_m, REGION_C)
}

pub fn region_size_check_with(a: (f64, f64), params: &Params, m: f64, big_m: f64, c: f64) -> Result<RegionSizeReport> {
    let s0 = params.s0;
    let label = classify(a, s0, m, big_m, params)?;
    let sc = (s0 / 2.0).exp();
    let w0 = Profile::new(params).w0(a.0 * sc, a.1 * sc)?;
    let allow = c * (-s0 / 3.0).exp();
    let checks = label
        .labels
        .iter()
        .map(|&r| {
            let (lo, hi, soft_lo) = region_bounds(r, m, big_m, params.p);
            let lower = if soft_lo { lo - allow } else { lo };
            let upper = hi + allow;
            RegionCheck { region: r, lower, upper, pass: w0 >= lower && w0 <= upper }
        })
        .collect();
    Ok(RegionSizeReport { a, label, w0, checks })
}

/// Point `r u` on the ray `u` with `G0(r u) = target`, by bisection
/// (`G0` increases along rays).
pub fn ray_point(dir: (f64, f64), target: f64, params: &Params) -> (f64, f64) {
    let n = dir.0.hypot(dir.1);
    let u = (dir.0 / n, dir.1 / n);
    let g = |r: f64| eval_g0(r * u.0, r * u.1, params);
    let mut hi = 1.0;
    while g(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    (r * u.0, r * u.1)
}

/// Calibration sweep of the region bounds: `s0` values, `d` values, and
/// `G0 e^(s0)` levels on nine rays of the first quadrant.
pub const REGION_SWEEP_S0: [f64; 4] = [10.0, 12.0, 14.0, 16.0];
pub const REGION_SWEEP_D: [[f64; 5]; 2] = [[0.0; 5], [0.5, -0.5, 0.5, -0.5, 0.5]];
pub const REGION_SWEEP_LEVELS: [f64; 9] = [1e-3, 1e-2, 0.05, 0.2, 1.0, 5.0, 10.0, 1e2, 1e3];

/// Smallest `C` with every sweep point inside its region bounds (m = 0.05,
/// M = 10, p = 2, delta = 100).
pub fn calibrate_region_c(base: &Params) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s0 in REGION_SWEEP_S0 {
        for d in REGION_SWEEP_D {
            let params = Params { s0, d, ..*base };
            let prof = Profile::new(&params);
            let mut pts = vec![(0.0, 0.0)];
            for it in 0..=8 {
                let th = std::f64::consts::FRAC_PI_2 * it as f64 / 8.0;
                for lv in REGION_SWEEP_LEVELS {
                    pts.push(ray_point((th.cos(), th.sin()), lv * (-s0).exp(), &params));
                }
            }
            let sc = (s0 / 2.0).exp();
            for a in pts {
                let label = classify(a, s0, DEFAULT_M_SMALL, DEFAULT_M_BIG, &params)?;
                let w0 = prof.w0(a.0 * sc, a.1 * sc)?;
                worst = worst.max(needed_c(w0, &label, params.p, s0));
            }
        }
    }
    Ok(worst)
}

/// `||f||_{L2 rho}` of a field's samples.
fn norm(grid: &TensorGrid, v: &[f64]) -> f64 {
    grid.l2_norm(v)
}

fn core_sup(grid: &TensorGrid, v: &[f64]) -> f64 {
    (0..grid.len())
        .filter(|&k| {
            let (a, b) = grid.point(k);
            a.hypot(b) <= PROBE_SUP_RADIUS
        })
        .fold(0.0f64, |m, k| m.max(v[k].abs()))
}

/// Integrates the `w` equation with the a priori bound `|w| <= 2 kappa`
/// imposed, recording `(s, samples)` after every step.
fn run_w(
    grid: &TensorGrid,
    p: f64,
    start: SpectralState,
    window: f64,
    ds: f64,
    mut observe: impl FnMut(&SpectralState),
) -> Result<SpectralState> {
    let integ = Integrator::new(grid, WForce::saturated(p, 2.0 * kappa_of(p)), ds)?;
    observe(&start);
    let end = start.s + window;
    integ.run(start, end, |st| {
        observe(st);
        true
    })
}

fn state_of(grid: &TensorGrid, s: f64, samples: Vec<f64>) -> SpectralState {
    let coeffs = grid.project_all(&samples);
    let field = SpectralField::from_coeffs(grid.nmax, coeffs).with_samples(grid);
    SpectralState { s, field }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub s: Vec<f64>,
    pub norms: Vec<f64>,
    /// `||w(s)|| e^((s - s1)/(p-1)) / ||w(s1)||`.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// Least-squares decay rate of `log ||w(s)||`; `None` for zero data.
    pub exponent: Option<f64>,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Evolves `w(s1) = eps shape` (with `s1 = 0`) and reports the decay of
/// `||w(s)||` against `e^(-(s-s1)/(p-1))`.
///
/// Requires `||eps shape|| <= eps0` and `|eps shape| <= 2 kappa` on the disc
/// `|y| <= PROBE_SUP_RADIUS`.
pub fn probe_zero_stability(
    eps: f64,
    shape: &SpectralField,
    window: f64,
    p: f64,
    grid: &TensorGrid,
    ds: f64,
) -> Result<DecayReport> {
    let k = kappa_of(p);
    let w: Vec<f64> = grid.synthesize(&shape.coeffs).iter().map(|v| eps * v).collect();
    let n0 = norm(grid, &w);
    if n0 > eps0(p) * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("||eps shape|| = {n0} above eps0 = {}", eps0(p))));
    }
    if core_sup(grid, &w) > 2.0 * k {
        return Err(Error::Precondition("sup |eps shape| above 2 kappa".into()));
    }
    let mut s = Vec::new();
    let mut norms = Vec::new();
    run_w(grid, p, state_of(grid, 0.0, w), window, ds, |st| {
        s.push(st.s);
        norms.push(norm(grid, st.samples()));
    })?;
    let ratios: Vec<f64> = s
        .iter()
        .zip(&norms)
        .map(|(si, ni)| if n0 == 0.0 { 1.0 } else { ni * (si / (p - 1.0)).exp() / n0 })
        .collect();
    let sup_ratio = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
    let exponent = (n0 > 0.0).then(|| -slope(&s, &norms.iter().map(|v| v.ln()).collect::<Vec<_>>()));
    Ok(DecayReport { s, norms, ratios, sup_ratio, exponent })
}

/// Calibration of `M0`: unit-norm shapes at the largest admissible size
/// `eps0` over a window of 4.
pub const M0_SHAPES: [&[(usize, usize)]; 6] = [&[(0, 0)], &[(2, 0)], &[(2, 0), (0, 2)], &[(2, 2)], &[(4, 0)], &[(4, 4)]];

/// Unit `L2 rho` field with equal coefficients on the given modes.
pub fn unit_shape(nmax: usize, modes: &[(usize, usize)]) -> SpectralField {
    let mut f = SpectralField::zero(nmax);
    for &(a, b) in modes {
        f.set(a, b, 1.0);
    }
    let n = f.l2_norm_spectral();
    for &(a, b) in modes {
        f.set(a, b, 1.0 / n);
    }
    f
}

pub fn calibrate_m0(p: f64, grid: &TensorGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for modes in M0_SHAPES {
        let shape = unit_shape(grid.nmax, modes);
        for sign in [1.0, -1.0] {
            let rep = probe_zero_stability(sign * eps0(p), &shape, 4.0, p, grid, 0.01)?;
            worst = worst.max(rep.sup_ratio);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport {
    pub sigma1: f64,
    pub s: Vec<f64>,
    /// `||w(s) - psi(s + sigma1)||`.
    pub distances: Vec<f64>,
    /// `distance |psi'(sigma1)| / (distance(0) |psi'(s + sigma1)|)`; 0 when
    /// the initial distance is 0.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// Largest `||w(s)||` over the window.
    pub sup_norm: f64,
}

/// `||w(0) - psi(sigma1)|| <= |psi'(sigma1)| / M1`.
pub fn psi_precondition(distance: f64, sigma1: f64, params: &Params) -> bool {
    distance <= psi_prime(sigma1, params).abs() / M1
}

/// Evolves `w` from `start` (at `s = start.s`) and compares with
/// `psi(s - start.s + sigma1)`. Requires `psi_precondition`.
pub fn psi_stability_from(
    sigma1: f64,
    start: SpectralState,
    window: f64,
    params: &Params,
    grid: &TensorGrid,
    ds: f64,
) -> Result<PsiReport> {
    psi_track(sigma1, start, window, params, grid, ds, true, None)
}

fn psi_track(
    sigma1: f64,
    start: SpectralState,
    window: f64,
    params: &Params,
    grid: &TensorGrid,
    ds: f64,
    enforce: bool,
    initial: Option<f64>,
) -> Result<PsiReport> {
    let s_start = start.s;
    let dist = |st: &SpectralState| {
        let psi = eval_psi(st.s - s_start + sigma1, params);
        let d: Vec<f64> = st.samples().iter().map(|v| v - psi).collect();
        norm(grid, &d)
    };
    let d0 = initial.unwrap_or_else(|| dist(&start));
    if enforce && !psi_precondition(d0, sigma1, params) {
        return Err(Error::Precondition(format!(
            "||w - psi(sigma1)|| = {d0} above |psi'(sigma1)|/M1 = {}",
            psi_prime(sigma1, params).abs() / M1
        )));
    }
    let dp0 = psi_prime(sigma1, params).abs();
    let mut s = Vec::new();
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut sup_norm: f64 = 0.0;
    run_w(grid, params.p, start, window, ds, |st| {
        let d = dist(st);
        let t = st.s - s_start;
        s.push(t);
        distances.push(d);
        ratios.push(if d0 == 0.0 { 0.0 } else { d * dp0 / (d0 * psi_prime(t + sigma1, params).abs()) });
        sup_norm = sup_norm.max(norm(grid, st.samples()));
    })?;
    let sup_ratio = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
    Ok(PsiReport { sigma1, s, distances, ratios, sup_ratio, sup_norm })
}

/// Evolves `w(0) = psi(sigma1) + eps shape`.
///
/// Requires `||eps shape|| <= |psi'(sigma1)|/M1` and `|w(0)| <= 2 kappa` on
/// the disc `|y| <= PROBE_SUP_RADIUS`.
pub fn probe_psi_stability(
    sigma1: f64,
    eps: f64,
    shape: &SpectralField,
    window: f64,
    params: &Params,
    grid: &TensorGrid,
    ds: f64,
) -> Result<PsiReport> {
    let psi = eval_psi(sigma1, params);
    let w: Vec<f64> = grid.synthesize(&shape.coeffs).iter().map(|v| psi + eps * v).collect();
    if core_sup(grid, &w) > 2.0 * params.kappa() {
        return Err(Error::Precondition("sup |w(0)| above 2 kappa".into()));
    }
    // the initial distance is the size of the perturbation itself
    let d0 = eps.abs() * shape.l2_norm_spectral();
    psi_track(sigma1, state_of(grid, 0.0, w), window, params, grid, ds, true, Some(d0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentRow {
    pub s: f64,
    /// Coefficient of `h0 h0`.
    pub h00: f64,
    /// `||w_a(s) - (kappa - e^(s-s0) iota)||`.
    pub distance: f64,
    /// `(eta* + 1/A) e^(s-s0) iota + e^(-s0/3)`.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    pub k: f64,
    pub l: f64,
    pub iota: f64,
    pub eta_star: f64,
    pub s_star: f64,
    pub rows: Vec<DescentRow>,
    /// `psi(sigma*) = kappa - eta*`.
    pub sigma_star: f64,
    /// `||w_a(s*) - psi(sigma*)||`.
    pub handoff_distance: f64,
    /// `|psi'(sigma*)| / M1`.
    pub handoff_tolerance: f64,
    #[serde(skip)]
    pub terminal: SpectralState,
}

impl DescentReport {
    /// Largest `distance / scale` on `[s0, s*]`.
    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.distance / r.scale))
    }

    pub fn envelope_holds(&self, big_m: f64) -> bool {
        self.worst_ratio() <= big_m
    }

    pub fn handoff_ok(&self) -> bool {
        self.handoff_distance <= self.handoff_tolerance
    }

    pub fn h00_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].h00 < w[0].h00)
    }
}

/// Integrates `w_a`, `a = (K, L) e^(-s0/2)`, from `s0` to `s*` with
/// `e^(s*-s0) iota = eta*`, recording the distance to `kappa - e^(s-s0) iota`.
///
/// Requires `K, L >= 0`, `K + L >= A`, `0 < m < eta* (p-1)/kappa` and `a`
/// in R3 for `m`.
pub fn descent_check(k: f64, l: f64, eta_star: f64, m: f64, params: &Params, grid: &TensorGrid, ds: f64) -> Result<DescentReport> {
    let kap = params.kappa();
    let p = params.p;
    if !(k >= 0.0 && l >= 0.0 && k + l >= params.amp) {
        return Err(Error::Precondition(format!("need K, L >= 0 and K + L >= A, got ({k}, {l})")));
    }
    if !(eta_star > 0.0 && eta_star < kap) {
        return Err(Error::Precondition(format!("eta* = {eta_star} outside (0, kappa)")));
    }
    if !(m > 0.0 && m < eta_star * (p - 1.0) / kap) {
        return Err(Error::Precondition(format!("m = {m} outside (0, eta* (p-1)/kappa)")));
    }
    let s0 = params.s0;
    let sc = (-s0 / 2.0).exp();
    let a = (k * sc, l * sc);
    if !classify(a, s0, m, DEFAULT_M_BIG.max(1.0), params)?.contains(Region::R3) {
        return Err(Error::Precondition(format!("a = ({k}, {l}) e^(-s0/2) is not in R3 for m = {m}")));
    }
    let iota = crate::dynamics::iota(k, l, params);
    let s_star = s0 + (eta_star / iota).ln();
    let prof = Profile::new(params);
    let start = state_of(grid, s0, recenter_closed(&prof, a, grid)?);
    let mut rows = Vec::new();
    let inv_a = 1.0 / params.amp;
    let last = run_w(grid, p, start, s_star - s0, ds, |st| {
        let g = (st.s - s0).exp() * iota;
        let d: Vec<f64> = st.samples().iter().map(|v| v - (kap - g)).collect();
        rows.push(DescentRow {
            s: st.s,
            h00: st.coeff(0, 0),
            distance: norm(grid, &d),
            scale: (eta_star + inv_a) * g + (-s0 / 3.0).exp(),
        });
    })?;
    let sigma_star = psi_inverse(kap - eta_star, params)?;
    let d: Vec<f64> = last.samples().iter().map(|v| v - (kap - eta_star)).collect();
    Ok(DescentReport {
        k,
        l,
        iota,
        eta_star,
        s_star,
        rows,
        sigma_star,
        handoff_distance: norm(grid, &d),
        handoff_tolerance: psi_prime(sigma_star, params).abs() / M1,
        terminal: last,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandoffReport {
    /// The terminal state meets the `psi` probe's precondition at `sigma*`.
    pub precondition: bool,
    /// Comparison with `psi(s - s* + sigma*)` after `s*`.
    pub psi: PsiReport,
}

impl HandoffReport {
    /// `||w_a(s)|| <= 1.5 kappa` after `s*`.
    pub fn bounded(&self, params: &Params) -> bool {
        self.psi.sup_norm <= 1.5 * params.kappa()
    }
}

/// Continues a descent from `s*` as a `psi` probe at `sigma*`; the run goes
/// on even when the precondition fails, so the later norm is still reported.
pub fn handoff(desc: &DescentReport, window: f64, params: &Params, grid: &TensorGrid, ds: f64) -> Result<HandoffReport> {
    let psi = psi_track(desc.sigma_star, desc.terminal.clone(), window, params, grid, ds, false, None)?;
    Ok(HandoffReport { precondition: desc.handoff_ok(), psi })
}

/// Calibration sweep of the descent constant: `(K, L)` on `K + L = A`
/// at `s0 = 14`, A = 20, eta* = 0.05, m = 0.04.
pub const DESCENT_SWEEP: [(f64, f64); 4] = [(0.0, 20.0), (5.0, 15.0), (8.0, 12.0), (10.0, 10.0)];
pub const DESCENT_S0: f64 = 14.0;
pub const DESCENT_M_SMALL: f64 = 0.04;

pub fn calibrate_descent_m(base: &Params, grid: &TensorGrid) -> Result<f64> {
    let params = Params { s0: DESCENT_S0, ..*base };
    let mut worst: f64 = 0.0;
    for (k, l) in DESCENT_SWEEP {
        let rep = descent_check(k, l, DEFAULT_ETA_STAR, DESCENT_M_SMALL, &params, grid, 0.01)?;
        worst = worst.max(rep.worst_ratio());
    }
    Ok(worst)
}

/// Whether `rep` stays inside the frozen descent envelope.
pub fn descent_passes(rep: &DescentReport) -> bool {
    rep.envelope_holds(DESCENT_M)
}

/// Flat solution `w(s) = psi(s + sigma)` evolved by the integrator, read
/// back as `u(t) = (T-t)^(-1/(p-1)) w`: largest relative residual of
/// `du/dt = u^p` (`= w/(p-1) + w' - w^p` relative to `w^p`), with `w'` by
/// fourth-order central differences of the computed trajectory.
pub fn flat_ode_residual(sigma: f64, window: f64, params: &Params, grid: &TensorGrid, ds: f64) -> Result<f64> {
    let p = params.p;
    let w0 = vec![eval_psi(sigma, params); grid.len()];
    let mut vals = Vec::new();
    run_w(grid, p, state_of(grid, 0.0, w0), window, ds, |st| vals.push(st.coeff(0, 0)))?;
    let mut worst: f64 = 0.0;
    for k in 2..vals.len() - 2 {
        let w = vals[k];
        let dw = (vals[k - 2] - 8.0 * vals[k - 1] + 8.0 * vals[k + 1] - vals[k + 2]) / (12.0 * ds);
        worst = worst.max(((w / (p - 1.0) + dw - w.powf(p)) / w.powf(p)).abs());
    }
    Ok(worst)
}

struct PowerOde {
    p: f64,
}

impl System<f64, Vector1<f64>> for PowerOde {
    fn system(&self, _t: f64, u: &Vector1<f64>, du: &mut Vector1<f64>) {
        du[0] = u[0].powf(self.p);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalProfile {
    pub u_start: f64,
    pub u_end: f64,
    pub exact: f64,
    pub rel_err: f64,
}

/// Integrates `u' = u^p` from `u(t*) = u_start` to `T` (Dormand-Prince 8(5,3)).
/// Fails when the exact solution blows up before `T`.
pub fn integrate_power_ode(u_start: f64, t_star: f64, t_end: f64, p: f64) -> Result<f64> {
    if !(u_start > 0.0 && t_end > t_star && p > 1.0) {
        return Err(Error::Precondition(format!("need u > 0, T > t*, p > 1 (u = {u_start}, p = {p})")));
    }
    // u^(1-p) = u_start^(1-p) - (p-1)(t - t*)
    let t_blowup = t_star + u_start.powf(1.0 - p) / (p - 1.0);
    if t_blowup <= t_end {
        return Err(Error::BlowupBeforeEnd { t_blowup, t_end });
    }
    // dense output every tau/1000 keeps the interpolated endpoint at full accuracy
    let dx = (t_end - t_star) / 1000.0;
    let mut solver = Dop853::new(PowerOde { p }, t_star, t_end, dx, Vector1::new(u_start), 1e-13, 1e-14 * u_start);
    solver.integrate().map_err(|e| Error::Precondition(format!("ODE integration: {e}")))?;
    Ok(solver.y_out().last().expect("integrator output")[0])
}

/// `u(t*) = kappa [(1 + K0)(T - t*)]^(-1/(p-1))` integrated to `T`, against
/// `kappa [K0 (T - t*)]^(-1/(p-1))`.
pub fn final_profile_ode(k0: f64, t_end: f64, t_star: f64, p: f64) -> Result<FinalProfile> {
    if !(k0 > 0.0 && t_star >= 0.0 && t_star < t_end) {
        return Err(Error::Precondition(format!("need K0 > 0 and 0 <= t* < T, got K0 = {k0}, t* = {t_star}, T = {t_end}")));
    }
    let kap = kappa_of(p);
    let tau = t_end - t_star;
    let u_start = kap * ((1.0 + k0) * tau).powf(-1.0 / (p - 1.0));
    let exact = kap * (k0 * tau).powf(-1.0 / (p - 1.0));
    let u_end = integrate_power_ode(u_start, t_star, t_end, p)?;
    Ok(FinalProfile { u_start, u_end, exact, rel_err: (u_end / exact - 1.0).abs() })
}

/// `t*(a)` solving `a1^2 a2^2 + delta (a1^6 + a2^6) = K0 kappa (T - t*)/(p-1)`.
pub fn t_star_of(a: (f64, f64), k0: f64, t_end: f64, params: &Params) -> f64 {
    t_end - eval_g0(a.0, a.1, params) / k0
}

/// `u(T)` from `t*(a)` against `u*(a)`: relative gap.
pub fn final_vs_u_star(a: (f64, f64), k0: f64, t_end: f64, params: &Params) -> Result<f64> {
    let t_star = t_star_of(a, k0, t_end, params);
    let fp = final_profile_ode(k0, t_end, t_star, params.p)?;
    Ok((fp.u_end / eval_u_star(a.0, a.1, params)? - 1.0).abs())
}

/// States of `q` (full flow from `build_initial`) at the requested times.
pub fn sample_trajectory(params: &Params, grid: &TensorGrid, ds: f64, s_list: &[f64]) -> Result<Vec<SpectralState>> {
    let integ = Integrator::new(grid, QForce::new(params, grid, Terms::FULL), ds)?;
    let mut st = crate::dynamics::build_initial(params, grid)?;
    let mut out = Vec::new();
    for &s in s_list {
        st = integ.run(st, s, |_| true)?;
        out.push(st.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntermediateRow {
    pub s: f64,
    pub sup_error: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntermediateReport {
    pub k: f64,
    pub rows: Vec<IntermediateRow>,
}

impl IntermediateReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }
}

/// Sup over grid nodes with `e^(-s) y1^2 y2^2 + delta e^(-2s)(y1^6 + y2^6) < K`
/// of `|w - Phi|`, `w = q + phi`, for each recorded state.
pub fn intermediate_profile_check(k: f64, states: &[SpectralState], params: &Params, grid: &TensorGrid) -> Result<IntermediateReport> {
    if states.is_empty() {
        return Err(Error::MissingTrajectory);
    }
    let prof = Profile::new(params);
    let mut rows = Vec::new();
    for st in states {
        let s = st.s;
        let q = st.samples();
        let mut sup: f64 = 0.0;
        let mut nodes = 0;
        for (idx, &qv) in q.iter().enumerate() {
            let (a, b) = grid.point(idx);
            let z = (-s).exp() * a * a * b * b + params.delta * (-2.0 * s).exp() * (a.powi(6) + b.powi(6));
            if z < k {
                nodes += 1;
                sup = sup.max((qv + prof.phi(a, b, s)? - prof.big_phi(a, b, s)).abs());
            }
        }
        rows.push(IntermediateRow { s, sup_error: sup, nodes });
    }
    Ok(IntermediateReport { k, rows })
}
