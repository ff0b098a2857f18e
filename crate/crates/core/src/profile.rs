//! Floating-point evaluation of the explicit functions of the construction:
//! `P`, `Q`, `E`, `D`, the profile `phi` and its derivatives, the intermediate
//! profile `Phi`, the heteroclinic orbit `psi`, the initial data `w0`, `G0`
//! and `u*`.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::basis::{hermite_coeffs, hermite_eval};
use crate::error::{Error, Result};

/// Scalar configuration of an experiment.
///
/// `kappa` and `gamma` are derived from `p` on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub p: f64,
    pub delta: f64,
    /// Shrinking-set amplitude `A`.
    pub amp: f64,
    pub s0: f64,
    /// `(d00, d20, d40, d42, d60)`.
    pub d: [f64; 5],
}

impl Default for Params {
    fn default() -> Self {
        Self { p: 2.0, delta: 100.0, amp: 20.0, s0: 12.0, d: [0.0; 5] }
    }
}

pub fn kappa_of(p: f64) -> f64 {
    (-(p - 1.0).ln() / (p - 1.0)).exp()
}

impl Params {
    pub fn new(p: f64, delta: f64, amp: f64, s0: f64, d: [f64; 5]) -> Result<Self> {
        let out = Self { p, delta, amp, s0, d };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParam(format!("p = {} must exceed 1", self.p)));
        }
        if !(self.delta >= 1.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParam(format!("delta = {} must be >= 1", self.delta)));
        }
        if !(self.amp >= 1.0) || !self.amp.is_finite() {
            return Err(Error::InvalidParam(format!("A = {} must be >= 1", self.amp)));
        }
        if !self.s0.is_finite() {
            return Err(Error::InvalidParam(format!("s0 = {} is not finite", self.s0)));
        }
        for (k, v) in self.d.iter().enumerate() {
            if !(v.abs() <= 2.0) {
                return Err(Error::InvalidParam(format!("d[{k}] = {v} outside [-2, 2]")));
            }
        }
        Ok(())
    }

    pub fn with_d(mut self, d: [f64; 5]) -> Self {
        self.d = d;
        self
    }

    pub fn kappa(&self) -> f64 {
        kappa_of(self.p)
    }

    pub fn gamma(&self) -> f64 {
        (6.0 * self.p - 2.0) / self.kappa()
    }
}

/// `x^(1/(p-1))` for `x > 0`.
pub(crate) fn root(x: f64, p: f64) -> f64 {
    (x.ln() / (p - 1.0)).exp()
}

const DMAX: usize = 12;
const STRIDE: usize = DMAX + 1;

/// Dense bivariate polynomial of total degree at most 12, `c[a * 13 + b]` on
/// `y1^a y2^b`.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    c: Vec<f64>,
}

impl Dense {
    fn zero() -> Self {
        Self { c: vec![0.0; STRIDE * STRIDE] }
    }

    fn mono(a: usize, b: usize, v: f64) -> Self {
        let mut out = Self::zero();
        out.c[a * STRIDE + b] = v;
        out
    }

    fn hermite(n: usize, var: usize) -> Self {
        let mut out = Self::zero();
        for (k, c) in hermite_coeffs(n).iter().enumerate() {
            let v = c.to_f64().unwrap();
            if var == 0 {
                out.c[k * STRIDE] = v;
            } else {
                out.c[k] = v;
            }
        }
        out
    }

    fn add(&self, o: &Self) -> Self {
        Self { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    fn scale(&self, f: f64) -> Self {
        Self { c: self.c.iter().map(|a| a * f).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for a1 in 0..STRIDE {
            for b1 in 0..STRIDE {
                let x = self.c[a1 * STRIDE + b1];
                if x == 0.0 {
                    continue;
                }
                for a2 in 0..STRIDE {
                    for b2 in 0..STRIDE {
                        let y = o.c[a2 * STRIDE + b2];
                        if y == 0.0 {
                            continue;
                        }
                        assert!(a1 + a2 <= DMAX && b1 + b2 <= DMAX, "dense degree overflow");
                        out.c[(a1 + a2) * STRIDE + b1 + b2] += x * y;
                    }
                }
            }
        }
        out
    }

    fn diff(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for a in 0..STRIDE {
            for b in 0..STRIDE {
                let x = self.c[a * STRIDE + b];
                if var == 0 && a > 0 {
                    out.c[(a - 1) * STRIDE + b] += a as f64 * x;
                } else if var == 1 && b > 0 {
                    out.c[a * STRIDE + b - 1] += b as f64 * x;
                }
            }
        }
        out
    }

    fn eval(&self, y1: f64, y2: f64) -> f64 {
        let mut acc = 0.0;
        for a in (0..STRIDE).rev() {
            let row = &self.c[a * STRIDE..(a + 1) * STRIDE];
            let mut r = 0.0;
            for b in (0..STRIDE).rev() {
                r = r * y2 + row[b];
            }
            acc = acc * y1 + r;
        }
        acc
    }
}

/// A polynomial with its gradient and Laplacian.
#[derive(Debug, Clone)]
struct WithDerivs {
    f: Dense,
    d1: Dense,
    d2: Dense,
    lap: Dense,
}

impl WithDerivs {
    fn new(f: Dense) -> Self {
        let d1 = f.diff(0);
        let d2 = f.diff(1);
        let lap = d1.diff(0).add(&d2.diff(1));
        Self { f, d1, d2, lap }
    }
}

/// `P`, `Q`, their gradients and Laplacians at one point.
#[derive(Debug, Clone, Copy)]
pub struct PolyValues {
    pub p: f64,
    pub p_grad: [f64; 2],
    pub p_lap: f64,
    pub q: f64,
    pub q_grad: [f64; 2],
    pub q_lap: f64,
}

/// Values of `E`, `D` and their derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct EdPoint {
    pub e: f64,
    pub d: f64,
    pub grad_e: [f64; 2],
    pub grad_d: [f64; 2],
    pub lap_e: f64,
    pub lap_d: f64,
    pub e_s: f64,
    pub d_s: f64,
    /// `(p-1) E - D`, assembled without cancellation of the `p-1` terms.
    pub excess: f64,
}

/// Profile, potential and remainder at one point.
#[derive(Debug, Clone, Copy)]
pub struct Local {
    pub phi: f64,
    pub grad: [f64; 2],
    pub lap: f64,
    pub phi_s: f64,
    /// `p phi^(p-1) - p/(p-1)`
    pub v: f64,
    /// `-phi_s + (L-1) phi - phi/(p-1) + phi^p`
    pub r: f64,
}

/// `P`, `Q` and their derivatives precomputed for one parameter set.
#[derive(Debug, Clone)]
pub struct Profile {
    pub params: Params,
    kappa: f64,
    pp: WithDerivs,
    qq: WithDerivs,
}

impl Profile {
    pub fn new(params: &Params) -> Self {
        let p = params.p;
        let kappa = params.kappa();
        let gamma = params.gamma();
        let delta = params.delta;
        let c = (p - 1.0) / kappa;
        let h = |n, v| Dense::hermite(n, v);
        let y1sq_y2sq = Dense::mono(2, 2, 1.0);
        let pp = y1sq_y2sq.add(&h(2, 0).mul(&h(2, 1)).scale(-1.0)).scale(c);
        let inner = pp
            .mul(&y1sq_y2sq)
            .scale(1.0 / (p - 1.0))
            .add(&pp.mul(&pp).scale(kappa * (p - 2.0) / (2.0 * (p - 1.0).powi(2))))
            .add(&Dense::mono(6, 0, 1.0).add(&h(6, 0).scale(-1.0)).scale(delta))
            .add(&Dense::mono(0, 6, 1.0).add(&h(6, 1).scale(-1.0)).scale(delta))
            .add(&h(4, 0).mul(&h(4, 1)).add(&Dense::mono(4, 4, -1.0)).scale(p / (2.0 * kappa)))
            .add(&h(4, 0).mul(&h(2, 1)).add(&h(2, 0).mul(&h(4, 1))).scale(gamma));
        let qq = inner.scale(c);
        Self { params: *params, kappa, pp: WithDerivs::new(pp), qq: WithDerivs::new(qq) }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `P` in its defining form `((p-1)/kappa)(y1^2 y2^2 - h2 h2)`.
    pub fn p_def(&self, y1: f64, y2: f64) -> f64 {
        let c = (self.params.p - 1.0) / self.kappa;
        c * (y1 * y1 * y2 * y2 - hermite_eval(2, y1) * hermite_eval(2, y2))
    }

    /// `P` in the simplified form `2(p-1)/kappa (y1^2 + y2^2 - 2)`.
    pub fn p_simple(&self, y1: f64, y2: f64) -> f64 {
        2.0 * (self.params.p - 1.0) / self.kappa * (y1 * y1 + y2 * y2 - 2.0)
    }

    pub fn q(&self, y1: f64, y2: f64) -> f64 {
        self.qq.f.eval(y1, y2)
    }

    pub fn grad_q(&self, y1: f64, y2: f64) -> [f64; 2] {
        [self.qq.d1.eval(y1, y2), self.qq.d2.eval(y1, y2)]
    }

    pub fn e(&self, y1: f64, y2: f64, s: f64) -> f64 {
        let eps = (-s).exp();
        1.0 + eps * self.p_simple(y1, y2) + eps * eps * self.q(y1, y2)
    }

    pub fn d(&self, y1: f64, y2: f64, s: f64) -> f64 {
        let p = self.params.p;
        let eps = (-s).exp();
        let cross = y1 * y1 * y2 * y2;
        let six = y1.powi(6) + y2.powi(6);
        let d = p - 1.0 + (p - 1.0).powi(2) / self.kappa * (eps * cross + self.params.delta * eps * eps * six);
        debug_assert!(d >= p - 1.0);
        d
    }

    /// `P`, `Q` and their derivatives at a point; independent of `s`.
    pub fn poly_values(&self, y1: f64, y2: f64) -> PolyValues {
        PolyValues {
            p: self.pp.f.eval(y1, y2),
            p_grad: [self.pp.d1.eval(y1, y2), self.pp.d2.eval(y1, y2)],
            p_lap: self.pp.lap.eval(y1, y2),
            q: self.qq.f.eval(y1, y2),
            q_grad: [self.qq.d1.eval(y1, y2), self.qq.d2.eval(y1, y2)],
            q_lap: self.qq.lap.eval(y1, y2),
        }
    }

    /// `E`, `D` and all first/second derivatives needed by the dynamics.
    pub fn ed_point(&self, y1: f64, y2: f64, s: f64) -> EdPoint {
        self.ed_point_with(y1, y2, &self.poly_values(y1, y2), s)
    }

    pub fn ed_point_with(&self, y1: f64, y2: f64, pv: &PolyValues, s: f64) -> EdPoint {
        let p = self.params.p;
        let delta = self.params.delta;
        let eps = (-s).exp();
        let eps2 = eps * eps;
        let e = 1.0 + eps * pv.p + eps2 * pv.q;
        let grad_e = [
            eps * pv.p_grad[0] + eps2 * pv.q_grad[0],
            eps * pv.p_grad[1] + eps2 * pv.q_grad[1],
        ];
        let lap_e = eps * pv.p_lap + eps2 * pv.q_lap;
        let e_s = -eps * pv.p - 2.0 * eps2 * pv.q;

        let k = (p - 1.0).powi(2) / self.kappa;
        let (a, b) = (y1 * y1, y2 * y2);
        let cross = a * b;
        let six = a * a * a + b * b * b;
        let bump = k * (eps * cross + delta * eps2 * six);
        let d = p - 1.0 + bump;
        debug_assert!(d >= p - 1.0);
        let grad_d = [
            k * (eps * 2.0 * y1 * b + delta * eps2 * 6.0 * y1.powi(5)),
            k * (eps * 2.0 * y2 * a + delta * eps2 * 6.0 * y2.powi(5)),
        ];
        let lap_d = k * (eps * 2.0 * (a + b) + delta * eps2 * 30.0 * (a * a + b * b));
        let d_s = -k * (eps * cross + 2.0 * delta * eps2 * six);
        let excess = (p - 1.0) * (eps * pv.p + eps2 * pv.q) - bump;
        EdPoint { e, d, grad_e, grad_d, lap_e, lap_d, e_s, d_s, excess }
    }

    fn checked(&self, y1: f64, y2: f64, s: f64) -> Result<EdPoint> {
        let pt = self.ed_point(y1, y2, s);
        if !(pt.e > 0.0) {
            return Err(Error::NonpositiveE { y1, y2, s, value: pt.e });
        }
        Ok(pt)
    }

    /// `phi = (E/D)^(1/(p-1))`.
    pub fn phi(&self, y1: f64, y2: f64, s: f64) -> Result<f64> {
        let e = self.e(y1, y2, s);
        if !(e > 0.0) {
            return Err(Error::NonpositiveE { y1, y2, s, value: e });
        }
        Ok(root(e / self.d(y1, y2, s), self.params.p))
    }

    /// Logarithmic-derivative gradient `phi/(p-1) (grad E/E - grad D/D)`.
    pub fn grad_phi(&self, y1: f64, y2: f64, s: f64) -> Result<[f64; 2]> {
        let pt = self.checked(y1, y2, s)?;
        let phi = root(pt.e / pt.d, self.params.p);
        let f = phi / (self.params.p - 1.0);
        Ok([
            f * (pt.grad_e[0] / pt.e - pt.grad_d[0] / pt.d),
            f * (pt.grad_e[1] / pt.e - pt.grad_d[1] / pt.d),
        ])
    }

    /// Profile, derivatives, potential and remainder, all analytic.
    ///
    /// With `g = log phi`, `grad phi = phi grad g` and
    /// `Delta phi = phi (Delta g + |grad g|^2)`; `R / phi` is then assembled
    /// from `g` so that the `O(e^-s)` pieces cancel before multiplying by
    /// `phi`.
    pub fn local(&self, y1: f64, y2: f64, s: f64) -> Result<Local> {
        self.local_with(y1, y2, &self.poly_values(y1, y2), s)
    }

    pub fn local_with(&self, y1: f64, y2: f64, pv: &PolyValues, s: f64) -> Result<Local> {
        let p = self.params.p;
        let pt = self.ed_point_with(y1, y2, pv, s);
        if !(pt.e > 0.0) {
            return Err(Error::NonpositiveE { y1, y2, s, value: pt.e });
        }
        let phi = root(pt.e / pt.d, p);
        let inv = 1.0 / (p - 1.0);
        let g1 = inv * (pt.grad_e[0] / pt.e - pt.grad_d[0] / pt.d);
        let g2 = inv * (pt.grad_e[1] / pt.e - pt.grad_d[1] / pt.d);
        let ge2 = (pt.grad_e[0].powi(2) + pt.grad_e[1].powi(2)) / (pt.e * pt.e);
        let gd2 = (pt.grad_d[0].powi(2) + pt.grad_d[1].powi(2)) / (pt.d * pt.d);
        let lap_g = inv * (pt.lap_e / pt.e - ge2 - pt.lap_d / pt.d + gd2);
        let g_s = inv * (pt.e_s / pt.e - pt.d_s / pt.d);
        let grad_sq = g1 * g1 + g2 * g2;
        // phi^p - phi/(p-1) = phi ((p-1)E - D)/((p-1)D)
        let react = pt.excess / ((p - 1.0) * pt.d);
        let r_over = -g_s + lap_g + grad_sq - 0.5 * (y1 * g1 + y2 * g2) + react;
        Ok(Local {
            phi,
            grad: [phi * g1, phi * g2],
            lap: phi * (lap_g + grad_sq),
            phi_s: phi * g_s,
            v: p * react,
            r: phi * r_over,
        })
    }

    /// Intermediate profile `Phi`.
    pub fn big_phi(&self, y1: f64, y2: f64, s: f64) -> f64 {
        big_phi_raw(&self.params, y1, y2, s)
    }

    /// `S` and `S-bar` of the initial data.
    pub fn s_parts(&self, y1: f64, y2: f64) -> (f64, f64) {
        let d = self.params.d;
        let (a2, b2) = (hermite_eval(2, y1), hermite_eval(2, y2));
        let s = d[0]
            + d[1] * (a2 + b2)
            + d[2] * (hermite_eval(4, y1) + hermite_eval(4, y2))
            + d[3] * a2 * b2;
        let sbar = d[4] * (hermite_eval(6, y1) + hermite_eval(6, y2));
        (s, sbar)
    }

    /// `E + (p-1)/(kappa D) (A e^(-2 s0) S + A s0^2 e^(-3 s0) S-bar)` at `s0`.
    pub fn w0_bracket(&self, y1: f64, y2: f64) -> f64 {
        let pr = &self.params;
        let s0 = pr.s0;
        let e = self.e(y1, y2, s0);
        let d = self.d(y1, y2, s0);
        let (s, sbar) = self.s_parts(y1, y2);
        let pert = pr.amp * (-2.0 * s0).exp() * s + pr.amp * s0 * s0 * (-3.0 * s0).exp() * sbar;
        e + (pr.p - 1.0) / (self.kappa * d) * pert
    }

    /// Initial data `w0(y, s0)`; equals `phi(y, s0)` exactly when `d = 0`.
    pub fn w0(&self, y1: f64, y2: f64) -> Result<f64> {
        let ebar = self.w0_bracket(y1, y2);
        if !(ebar > 0.0) {
            return Err(Error::NonpositiveBracket { y1, y2, value: ebar });
        }
        Ok(root(ebar / self.d(y1, y2, self.params.s0), self.params.p))
    }
}

fn big_phi_raw(pr: &Params, y1: f64, y2: f64, s: f64) -> f64 {
    let p = pr.p;
    let eps = (-s).exp();
    let bracket = p - 1.0
        + (p - 1.0).powi(2) / pr.kappa()
            * (eps * y1 * y1 * y2 * y2 + pr.delta * eps * eps * (y1.powi(6) + y2.powi(6)));
    (-bracket.ln() / (p - 1.0)).exp()
}

pub fn eval_p_poly(y1: f64, y2: f64, params: &Params) -> f64 {
    Profile::new(params).p_simple(y1, y2)
}

pub fn eval_q_poly(y1: f64, y2: f64, params: &Params) -> f64 {
    Profile::new(params).q(y1, y2)
}

pub fn eval_phi(y1: f64, y2: f64, s: f64, params: &Params) -> Result<f64> {
    Profile::new(params).phi(y1, y2, s)
}

pub fn eval_grad_phi(y1: f64, y2: f64, s: f64, params: &Params) -> Result<[f64; 2]> {
    Profile::new(params).grad_phi(y1, y2, s)
}

pub fn eval_big_phi(y1: f64, y2: f64, s: f64, params: &Params) -> f64 {
    big_phi_raw(params, y1, y2, s)
}

/// `log(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s > 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `psi(s) = kappa (1 + e^s)^(-1/(p-1))`.
pub fn eval_psi(s: f64, params: &Params) -> f64 {
    params.kappa() * (-softplus(s) / (params.p - 1.0)).exp()
}

pub fn psi_prime(s: f64, params: &Params) -> f64 {
    -eval_psi(s, params) / (params.p - 1.0) * sigmoid(s)
}

/// `psi' + psi/(p-1) - psi^p`.
pub fn psi_residual(s: f64, params: &Params) -> f64 {
    let psi = eval_psi(s, params);
    psi_prime(s, params) + psi / (params.p - 1.0) - psi.powf(params.p)
}

/// Solves `psi(sigma) = value` for `0 < value < kappa`.
pub fn psi_inverse(value: f64, params: &Params) -> Result<f64> {
    let k = params.kappa();
    if !(value > 0.0 && value < k) {
        return Err(Error::Precondition(format!("psi^-1 needs 0 < {value} < kappa")));
    }
    // (k/value)^(p-1) = 1 + e^sigma
    let t = ((k / value).ln() * (params.p - 1.0)).exp_m1();
    Ok(t.ln())
}

pub fn eval_w0_init(y1: f64, y2: f64, params: &Params) -> Result<f64> {
    Profile::new(params).w0(y1, y2)
}

/// `G0(a) = ((p-1)/kappa)(a1^2 a2^2 + delta (a1^6 + a2^6))`.
pub fn eval_g0(a1: f64, a2: f64, params: &Params) -> f64 {
    (params.p - 1.0) / params.kappa() * (a1 * a1 * a2 * a2 + params.delta * (a1.powi(6) + a2.powi(6)))
}

pub fn eval_u_star(a1: f64, a2: f64, params: &Params) -> Result<f64> {
    if a1 == 0.0 && a2 == 0.0 {
        return Err(Error::DivergesAtOrigin);
    }
    let p = params.p;
    let x = (p - 1.0) * eval_g0(a1, a2, params);
    Ok((-x.ln() / (p - 1.0)).exp())
}

/// Scan summary for the boundedness and decay properties of `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemphiReport {
    pub s: f64,
    pub radius: f64,
    pub min_e: f64,
    /// `(sup phi - kappa) e^(s/3)`
    pub sup_phi_excess: f64,
    /// `sup |grad phi| e^(s/6)`
    pub sup_grad: f64,
    /// `sup phi` on the outer boundary of the scan.
    pub tail_value: f64,
    pub tail_tolerance: f64,
}

impl LemphiReport {
    pub fn min_e_ok(&self) -> bool {
        self.min_e >= 0.5
    }

    pub fn tail_ok(&self) -> bool {
        self.tail_value <= self.tail_tolerance
    }

    pub fn passed(&self) -> bool {
        self.min_e_ok() && self.tail_ok() && self.sup_phi_excess.is_finite() && self.sup_grad.is_finite()
    }
}

/// Tail tolerance at radius `r`: twice the large-`|y|` axis asymptote
/// `kappa (30/r^2)^(1/(p-1))`, capped at `kappa`.
pub fn tail_tolerance(radius: f64, params: &Params) -> f64 {
    let k = params.kappa();
    k * root((60.0 / (radius * radius)).min(1.0), params.p)
}

/// 1-D scan coordinates: uniform core on `[0, 10]`, then geometric to `radius`.
pub fn graded_axis(radius: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    let mut x = 10.0;
    while x < radius {
        x *= 1.04;
        xs.push(x.min(radius));
    }
    xs
}

/// Scans the closed first quadrant (the profile is even in each variable).
pub fn certify_lemphi(params: &Params, s: f64, radius: f64) -> Result<LemphiReport> {
    if !(radius >= 10.0) {
        return Err(Error::Precondition(format!("grid radius {radius} < 10")));
    }
    use rayon::prelude::*;
    let prof = Profile::new(params);
    let k = prof.kappa();
    let xs = graded_axis(radius);
    let rows: Vec<(f64, f64, f64, f64)> = xs
        .par_iter()
        .map(|&y1| {
            let mut min_e = f64::INFINITY;
            let mut sup_phi = f64::NEG_INFINITY;
            let mut sup_grad: f64 = 0.0;
            let mut tail: f64 = 0.0;
            for &y2 in &xs {
                let e = prof.e(y1, y2, s);
                min_e = min_e.min(e);
                if let (Ok(phi), Ok(g)) = (prof.phi(y1, y2, s), prof.grad_phi(y1, y2, s)) {
                    sup_phi = sup_phi.max(phi);
                    sup_grad = sup_grad.max(g[0].hypot(g[1]));
                    if y1 >= radius || y2 >= radius {
                        tail = tail.max(phi);
                    }
                }
            }
            (min_e, sup_phi, sup_grad, tail)
        })
        .collect();
    let min_e = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let sup_phi = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let sup_grad = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let tail = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(LemphiReport {
        s,
        radius,
        min_e,
        sup_phi_excess: (sup_phi - k) * (s / 3.0).exp(),
        sup_grad: sup_grad * (s / 6.0).exp(),
        tail_value: tail,
        tail_tolerance: tail_tolerance(radius, params),
    })
}

/// Smallest `delta` in `{1, 2, 5, 10, 20, 50, 100}` with `min E >= 1/2`.
pub fn delta_threshold(params: &Params, s: f64, radius: f64) -> Result<Option<f64>> {
    for delta in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
        let pr = Params { delta, ..*params };
        if certify_lemphi(&pr, s, radius)?.min_e_ok() {
            return Ok(Some(delta));
        }
    }
    Ok(None)
}

/// Smallest scanned radius `R0` beyond which
/// `Q >= 15 delta (p-1)/kappa (y1^4 + y2^4)` holds on every scanned ring up
/// to `r_max`.
pub fn low_q_radius(params: &Params, r_max: f64) -> f64 {
    let prof = Profile::new(params);
    let c = 15.0 * params.delta * (params.p - 1.0) / prof.kappa();
    let dr = 0.05;
    let nr = (r_max / dr).ceil() as usize;
    let mut last_fail = 0.0;
    for k in 0..=nr {
        let r = k as f64 * dr;
        let ok = (0..=180).all(|t| {
            let th = t as f64 * std::f64::consts::FRAC_PI_2 / 180.0;
            let (y1, y2) = (r * th.cos(), r * th.sin());
            prof.q(y1, y2) >= c * (y1.powi(4) + y2.powi(4))
        });
        if !ok {
            last_fail = r;
        }
    }
    last_fail + dr
}

/// Along the degenerate axis `y2 = 0`: returns `(unimodal, peak, phi at the
/// far radius)`, where `unimodal` means nondecreasing up to the peak and
/// nonincreasing after it on a uniform sweep of `[0, radius]`.
pub fn axis_decay(params: &Params, s: f64, radius: f64, n: usize) -> Result<(bool, f64, f64)> {
    let prof = Profile::new(params);
    let vals: Vec<f64> = (0..=n)
        .map(|k| prof.phi(radius * k as f64 / n as f64, 0.0, s))
        .collect::<Result<_>>()?;
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let up = vals[..=imax].windows(2).all(|w| w[1] >= w[0]);
    let down = vals[imax..].windows(2).all(|w| w[1] <= w[0]);
    Ok((up && down, radius * imax as f64 / n as f64, vals[n]))
}

/// `sup |phi - Phi|` over `{e^-s y1^2 y2^2 + delta e^-2s (y1^6 + y2^6) <= k}`.
pub fn phi_vs_big_phi(params: &Params, s: f64, k: f64, n: usize) -> Result<f64> {
    let prof = Profile::new(params);
    let eps = (-s).exp();
    let rmax = (k / params.delta).powf(1.0 / 6.0) * (s / 3.0).exp();
    let mut sup: f64 = 0.0;
    for a in 0..=n {
        for b in 0..=n {
            let (y1, y2) = (rmax * a as f64 / n as f64, rmax * b as f64 / n as f64);
            let g = eps * y1 * y1 * y2 * y2 + params.delta * eps * eps * (y1.powi(6) + y2.powi(6));
            if g > k {
                continue;
            }
            sup = sup.max((prof.phi(y1, y2, s)? - prof.big_phi(y1, y2, s)).abs());
        }
    }
    Ok(sup)
}
