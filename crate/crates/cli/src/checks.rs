//! Verification routines shared by the subcommands and the acceptance run.

use blowup_core::basis::{hermite_eval, hermite_norm_sq, make_quad, product_in_basis, TensorGrid};
use blowup_core::constants::{M1, RESOLVED_RADIUS};
use blowup_core::dynamics::*;
use blowup_core::operator::{exp_l_spectral, mehler_apply, random_family, SpectralField};
use blowup_core::profile::*;
use blowup_core::scenarios::*;
use blowup_core::Result;
use serde::Serialize;

fn rel_l2(grid: &TensorGrid, a: &SpectralField, b: &SpectralField, scale: f64) -> f64 {
    let sa = a.samples.as_ref().expect("samples");
    let sb = b.samples.as_ref().expect("samples");
    let d: Vec<f64> = sa.iter().zip(sb).map(|(x, y)| x - y).collect();
    grid.l2_norm(&d) / scale
}

/// Worst relative error of `int h_m h_n rho1` against `2^m m! delta_mn`,
/// `m, n <= 12`, at the given quadrature order.
pub fn orthogonality_error(order: usize) -> Result<f64> {
    let q = make_quad(order)?;
    let mut worst: f64 = 0.0;
    for m in 0..=12 {
        for n in 0..=12 {
            let got = q.integrate(|x| hermite_eval(m, x) * hermite_eval(n, x));
            let want = if m == n { hermite_norm_sq(m) } else { 0.0 };
            worst = worst.max((got - want).abs() / hermite_norm_sq(m));
        }
    }
    Ok(worst)
}

/// `h2 h2` in the basis as `(degree, coefficient)` strings.
pub fn h2_squared() -> Result<Vec<(usize, String)>> {
    Ok(product_in_basis(2, 2)?.into_iter().map(|(k, c)| (k, c.to_string())).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub n1: usize,
    pub n2: usize,
    pub s: f64,
    /// `||mehler - e^(lambda s) h|| / ||h||`.
    pub rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    /// Worst `||e^(s2 L) e^(s1 L) f - e^((s1+s2) L) f||` relative to
    /// `e^(s1+s2) ||f||` over a seeded family.
    pub composition_err: f64,
}

impl KernelReport {
    pub fn worst_decay(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.rel_err))
    }

    pub fn passed(&self) -> bool {
        self.worst_decay() <= 1e-6 && self.composition_err <= 1e-6
    }
}

/// Mehler quadrature against the eigen-decay for `i + j <= 8`,
/// `s in {0.5, 1, 2}`, and semigroup composition on random polynomials.
pub fn kernel_check(grid: &TensorGrid) -> Result<KernelReport> {
    let nmax = grid.nmax;
    let mut rows = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        for i in 0..=8usize.min(nmax) {
            for j in 0..=i {
                let (n1, n2) = (i - j, j);
                let f = SpectralField::mode(nmax, n1, n2, 1.0).with_samples(grid);
                let want = exp_l_spectral(&f, s).with_samples(grid);
                let got = mehler_apply(&f, grid, s)?;
                rows.push(KernelRow { n1, n2, s, rel_err: rel_l2(grid, &got, &want, f.l2_norm_spectral()) });
            }
        }
    }
    let mut composition_err: f64 = 0.0;
    for f in random_family(nmax, 8.min(nmax), 4, 5) {
        let f = f.with_samples(grid);
        let norm = f.l2_norm_spectral();
        for s1 in [0.5, 1.0] {
            for s2 in [0.5, 1.0] {
                let twice = mehler_apply(&mehler_apply(&f, grid, s1)?, grid, s2)?;
                let once = mehler_apply(&f, grid, s1 + s2)?;
                composition_err = composition_err.max(rel_l2(grid, &twice, &once, norm * (s1 + s2).exp()));
            }
        }
    }
    Ok(KernelReport { rows, composition_err })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub radius: f64,
    pub min_e: f64,
    pub sup_phi_excess: f64,
    pub sup_grad: f64,
    pub axis_unimodal: bool,
    pub axis_far: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub kappa: f64,
    pub rows: Vec<ProfileRow>,
}

/// Largest ratio of consecutive values (infinite if some value is not
/// positive).
fn growth(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    if v.iter().any(|&x| !(x > 0.0)) {
        return f64::INFINITY;
    }
    v.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}

impl ProfileReport {
    pub fn min_e_ok(&self) -> bool {
        self.rows.iter().all(|r| r.min_e >= 0.5)
    }

    /// Largest growth factor of `(sup phi - kappa) e^(s/3)` between
    /// consecutive `s`.
    pub fn excess_growth(&self) -> f64 {
        growth(self.rows.iter().map(|r| r.sup_phi_excess))
    }

    /// Largest growth factor of `sup |grad phi| e^(s/6)`.
    pub fn grad_growth(&self) -> f64 {
        growth(self.rows.iter().map(|r| r.sup_grad))
    }

    pub fn axis_ok(&self) -> bool {
        self.rows.iter().all(|r| r.axis_unimodal && r.axis_far < 0.05 * self.kappa)
    }

    pub fn passed(&self) -> bool {
        self.min_e_ok() && self.excess_growth() <= 2.0 && self.grad_growth() <= 2.0 && self.axis_ok()
    }
}

/// Scans `phi(., s)` for each `s` on the radius `30 e^(s/6)`.
pub fn profile_check(params: &Params, s_list: &[f64]) -> Result<ProfileReport> {
    let mut rows = Vec::new();
    for &s in s_list {
        let radius = 30.0 * (s / 6.0).exp();
        let rep = certify_lemphi(params, s, radius)?;
        let (axis_unimodal, _, axis_far) = axis_decay(params, s, radius, 4000)?;
        rows.push(ProfileRow {
            s,
            radius,
            min_e: rep.min_e,
            sup_phi_excess: rep.sup_phi_excess,
            sup_grad: rep.sup_grad,
            axis_unimodal,
            axis_far,
        });
    }
    Ok(ProfileReport { kappa: params.kappa(), rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearReport {
    /// Worst `|rate/lambda - 1|` (absolute rate for `lambda = 0`).
    pub eigen_err: f64,
    /// Sup of `|w - psi|` on `|y| <= RESOLVED_RADIUS` over the window.
    pub psi_err: f64,
    /// `log2` of the error ratio between `ds = 0.02` and `ds = 0.01`.
    pub order: f64,
}

impl LinearReport {
    pub fn passed(&self) -> bool {
        self.eigen_err <= 0.01 && self.psi_err <= 1e-4 && self.order >= 1.8
    }
}

fn psi_start<'a>(g: &'a TensorGrid, p: &Params, ds: f64) -> Result<(Integrator<'a, QForce>, SpectralState)> {
    let integ = Integrator::new(g, QForce::new(p, g, Terms::FULL), ds)?;
    let prof = Profile::new(p);
    let psi = eval_psi(p.s0, p);
    let samples = (0..g.len())
        .map(|k| {
            let (a, b) = g.point(k);
            Ok(psi - prof.phi(a, b, p.s0)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut st = integ.state_from_samples(p.s0, samples);
    st.field.symmetric = true;
    Ok((integ, st))
}

/// Linear eigen-decay over unit windows, psi tracking over `window` from
/// `s0` and the measured integrator order.
pub fn linear_check(params: &Params, grid: &TensorGrid, window: f64) -> Result<LinearReport> {
    let integ = Integrator::new(grid, LinearOnly, 0.01)?;
    let mut eigen_err: f64 = 0.0;
    for n1 in 0..=8 {
        for n2 in 0..=8 - n1 {
            let mut f = SpectralField::zero(grid.nmax);
            f.set(n1, n2, 1.0);
            let st = SpectralState { s: 0.0, field: f.with_samples(grid) };
            let rate = integ.run(st, 1.0, |_| true)?.coeff(n1, n2).ln();
            let lam = blowup_core::basis::eigenvalue(n1, n2);
            eigen_err = eigen_err.max(if lam == 0.0 { rate.abs() } else { (rate / lam - 1.0).abs() });
        }
    }

    let (integ, st) = psi_start(grid, params, 0.01)?;
    let frame = QForce::new(params, grid, Terms::FULL);
    let core: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let (a, b) = grid.point(k);
            a.hypot(b) <= RESOLVED_RADIUS
        })
        .collect();
    let mut psi_err: f64 = 0.0;
    let mut failure = None;
    let mut check = |st: &SpectralState| match frame.frame(st.s) {
        Ok(fr) => {
            let psi = eval_psi(st.s, params);
            let q = st.samples();
            for &k in &core {
                psi_err = psi_err.max((q[k] + fr[k].0 - psi).abs());
            }
        }
        Err(e) => failure = Some(e),
    };
    check(&st);
    integ.run(st, params.s0 + window, |s| {
        check(s);
        true
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let end = |ds: f64| -> Result<SpectralState> {
        let (integ, st) = psi_start(grid, params, ds)?;
        integ.run(st, params.s0 + 1.0, |_| true)
    };
    let reference = end(0.0025)?;
    let err = |st: &SpectralState| {
        let d: Vec<f64> = st.samples().iter().zip(reference.samples()).map(|(a, b)| a - b).collect();
        grid.l2_norm(&d)
    };
    let order = (err(&end(0.02)?) / err(&end(0.01)?)).log2();
    Ok(LinearReport { eigen_err, psi_err, order })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowRow {
    pub face: String,
    /// Which of the four conclusions the face belongs to.
    pub item: usize,
    pub theta: f64,
    pub outgoing_expected: bool,
    pub outgoing: bool,
    pub margin: f64,
}

/// Item of the four boundary conclusions: (1) `q_{i,j}`, `i <= 4`,
/// outgoing; (2) `q_{6,0}`, `q_{6,6}` outgoing; (3) `q_{6,2}`, `q_{6,4}`
/// ingoing; (4) `q_-` ingoing.
pub fn flow_item(c: Constraint) -> Option<usize> {
    match c {
        Constraint::IjCore(_) => Some(1),
        Constraint::SixCorner(_) => Some(2),
        Constraint::SixMid(_) => Some(3),
        Constraint::Minus => Some(4),
        Constraint::Linf => None,
    }
}

/// Flow direction on every face of `V_A(s)` from the constructed boundary
/// states, both signs where the face has one.
pub fn boundary_signs(params: &Params, grid: &TensorGrid, s: f64) -> Result<Vec<FlowRow>> {
    let prof = Profile::new(params);
    let mut rows = Vec::new();
    for face in Constraint::all() {
        let Some(item) = flow_item(face) else { continue };
        let thetas: &[f64] = if face == Constraint::Minus { &[1.0] } else { &[1.0, -1.0] };
        for &theta in thetas {
            let st = boundary_state(face, theta, s, params, grid);
            let force = QForce::new(params, grid, Terms::FULL).without_guard();
            let flow = boundary_flow(&st, grid, force, &prof, params, 0.01)?;
            let f = flow[&face];
            rows.push(FlowRow {
                face: face.to_string(),
                item,
                theta,
                outgoing_expected: face.is_outgoing(),
                outgoing: f.outgoing,
                margin: f.margin,
            });
        }
    }
    Ok(rows)
}

/// Smallest margin of an item, negative when some sign is wrong.
pub fn item_margin(rows: &[FlowRow], item: usize) -> f64 {
    rows.iter()
        .filter(|r| r.item == item)
        .map(|r| if r.outgoing == r.outgoing_expected { r.margin } else { -r.margin.abs() })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    /// `(p, measured exponent)` of the flat zero-solution probe.
    pub exponents: Vec<(f64, f64)>,
    /// `(sigma1, eps, sup ratio)` of the psi probe.
    pub psi: Vec<(f64, f64, f64)>,
}

impl ProbeSummary {
    pub fn exponents_ok(&self) -> bool {
        self.exponents.iter().all(|&(p, e)| (e * (p - 1.0) - 1.0).abs() <= 0.05)
    }

    pub fn psi_ok(&self) -> bool {
        self.psi.iter().all(|&(_, _, r)| r.is_finite() && r <= M1)
    }
}

/// Flat `h0 h0` probes of the zero solution for `p in {1.5, 2, 3}` and of
/// psi at `sigma1 in {-3, 0, 2}` with `eps = +-|psi'(sigma1)|/(2 M1)`.
pub fn probes(params: &Params, grid: &TensorGrid, ds: f64) -> Result<ProbeSummary> {
    let flat = unit_shape(grid.nmax, &[(0, 0)]);
    let mut exponents = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let rep = probe_zero_stability(0.01, &flat, 4.0, p, grid, ds)?;
        exponents.push((p, rep.exponent.unwrap_or(f64::NAN)));
    }
    let mut psi = Vec::new();
    for sigma in [-3.0, 0.0, 2.0] {
        let eps = 0.5 * psi_prime(sigma, params).abs() / M1;
        for e in [eps, -eps] {
            let rep = probe_psi_stability(sigma, e, &flat, 5.0, params, grid, ds)?;
            psi.push((sigma, e, rep.sup_ratio));
        }
    }
    Ok(ProbeSummary { exponents, psi })
}
