//! Decomposition of `q`, membership in `V_A(s)` and the flow on its boundary.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::basis::{hermite_norm_sq, HermiteIndex, TensorGrid};
use crate::error::Result;
use crate::profile::{Params, Profile};

use super::integrator::{Force, Integrator, SpectralState};

/// `q = sum_{i <= 7} q_{i,j} h_{i-j} h_j + q_-`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QDecomposition {
    pub qij: BTreeMap<HermiteIndex, f64>,
    pub q_minus_norm: f64,
    pub s: f64,
    /// Largest node value of `|q + phi|`, carried for the sup constraint.
    pub sup_w: f64,
}

impl QDecomposition {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.qij.get(&HermiteIndex::new(i, j)).copied().unwrap_or(0.0)
    }
}

/// One constraint of `V_A(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Constraint {
    /// `|q_{i,j}| <= A e^(-2s)`, `i <= 4`.
    IjCore(HermiteIndex),
    /// `|q_{6,0}|, |q_{6,6}| <= A s^2 e^(-3s)`.
    SixCorner(HermiteIndex),
    /// `|q_{6,2}|, |q_{6,4}| <= A s e^(-2s)`.
    SixMid(HermiteIndex),
    /// `||q_-|| <= A^2 s^2 e^(-3s)`.
    Minus,
    /// `||q + phi||_inf <= 2 kappa`.
    Linf,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::IjCore(h) => write!(f, "ij_core({},{})", h.i, h.j),
            Constraint::SixCorner(h) => write!(f, "six_corner({},{})", h.i, h.j),
            Constraint::SixMid(h) => write!(f, "six_mid({},{})", h.i, h.j),
            Constraint::Minus => write!(f, "minus"),
            Constraint::Linf => write!(f, "linf"),
        }
    }
}

impl Constraint {
    /// All constraints in a fixed order.
    pub fn all() -> Vec<Constraint> {
        let h = HermiteIndex::new;
        let mut out: Vec<Constraint> = [(0, 0), (2, 0), (2, 2), (4, 0), (4, 2), (4, 4)]
            .into_iter()
            .map(|(i, j)| Constraint::IjCore(h(i, j)))
            .collect();
        out.push(Constraint::SixCorner(h(6, 0)));
        out.push(Constraint::SixCorner(h(6, 6)));
        out.push(Constraint::SixMid(h(6, 2)));
        out.push(Constraint::SixMid(h(6, 4)));
        out.push(Constraint::Minus);
        out.push(Constraint::Linf);
        out
    }

    /// Bound at time `s` and its derivative in `s` (`Linf` has a constant bound).
    pub fn bound(&self, s: f64, params: &Params) -> (f64, f64) {
        let a = params.amp;
        let e2 = (-2.0 * s).exp();
        let e3 = (-3.0 * s).exp();
        match self {
            Constraint::IjCore(_) => (a * e2, -2.0 * a * e2),
            Constraint::SixCorner(_) => (a * s * s * e3, a * (2.0 * s - 3.0 * s * s) * e3),
            Constraint::SixMid(_) => (a * s * e2, a * (1.0 - 2.0 * s) * e2),
            Constraint::Minus => (a * a * s * s * e3, a * a * (2.0 * s - 3.0 * s * s) * e3),
            Constraint::Linf => (2.0 * params.kappa(), 0.0),
        }
    }

    /// The flow leaves through this face (the five unstable directions and their
    /// symmetric partners).
    pub fn is_outgoing(&self) -> bool {
        matches!(self, Constraint::IjCore(_) | Constraint::SixCorner(_))
    }

    /// Slot in `d = (d00, d20, d40, d42, d60)` steering this constraint.
    pub fn d_slot(&self) -> Option<usize> {
        let (i, j) = match self {
            Constraint::IjCore(h) | Constraint::SixCorner(h) => (h.i, h.j),
            _ => return None,
        };
        match (i, j) {
            (0, 0) => Some(0),
            (2, 0) | (2, 2) => Some(1),
            (4, 0) | (4, 4) => Some(2),
            (4, 2) => Some(3),
            (6, 0) | (6, 6) => Some(4),
            _ => None,
        }
    }

    /// Representative index among `{(0,0),(2,0),(4,0),(4,2),(6,0)}`.
    pub fn canonical(&self) -> Option<HermiteIndex> {
        const REPS: [(usize, usize); 5] = [(0, 0), (2, 0), (4, 0), (4, 2), (6, 0)];
        self.d_slot().map(|k| HermiteIndex::new(REPS[k].0, REPS[k].1))
    }

    /// Component value the constraint reads from a decomposition.
    pub fn value(&self, dec: &QDecomposition) -> f64 {
        match self {
            Constraint::IjCore(h) | Constraint::SixCorner(h) | Constraint::SixMid(h) => dec.get(h.i, h.j),
            Constraint::Minus => dec.q_minus_norm,
            Constraint::Linf => dec.sup_w,
        }
    }
}

/// Margins (bound minus size; positive means inside) of every constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VAReport {
    pub s: f64,
    pub margins: BTreeMap<Constraint, f64>,
}

impl VAReport {
    pub fn inside(&self) -> bool {
        self.margins.values().all(|&m| m >= 0.0)
    }

    /// Most violated constraint, relative to its own bound.
    pub fn exit_constraint(&self, params: &Params) -> Option<Constraint> {
        self.margins
            .iter()
            .filter(|(_, &m)| m < 0.0)
            .map(|(c, &m)| (*c, m / c.bound(self.s, params).0))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }

    pub fn margin(&self, c: Constraint) -> f64 {
        self.margins[&c]
    }
}

/// Projections `q_{i,j}` for `i <= 7` and the `L2_rho` norm of the rest.
pub fn decompose(state: &SpectralState, grid: &TensorGrid, profile: &Profile) -> Result<QDecomposition> {
    let f = &state.field;
    let mut qij = BTreeMap::new();
    let mut low = 0.0;
    for i in 0..=7usize.min(f.nmax) {
        for j in 0..=i {
            let c = f.get(i - j, j);
            qij.insert(HermiteIndex::new(i, j), c);
            low += c * c * hermite_norm_sq(i - j) * hermite_norm_sq(j);
        }
    }
    let total = f.l2_norm_spectral().powi(2);
    let rest = total - low;
    let q_minus_norm = if rest > 0.0 { rest.sqrt() } else { 0.0 };
    let mut sup_w: f64 = 0.0;
    let samples = state.samples();
    for (k, &q) in samples.iter().enumerate() {
        let (a, b) = grid.point(k);
        sup_w = sup_w.max((q + profile.phi(a, b, state.s)?).abs());
    }
    sup_w = sup_w.max(phi_tail_sup(profile, grid.radius(), state.s)?);
    Ok(QDecomposition { qij, q_minus_norm, s: state.s, sup_w })
}

/// Largest `phi` on rays in the first quadrant beyond the quadrature hull;
/// `q` is not resolved there and the profile stands in for `w`.
pub fn phi_tail_sup(profile: &Profile, radius: f64, s: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for k in 0..=16 {
        let th = std::f64::consts::FRAC_PI_2 * k as f64 / 16.0;
        let mut r = radius;
        while r <= 20.0 * radius {
            sup = sup.max(profile.phi(r * th.cos(), r * th.sin(), s)?);
            r *= 1.1;
        }
    }
    Ok(sup)
}

pub fn va_check(dec: &QDecomposition, params: &Params) -> VAReport {
    let margins = Constraint::all()
        .into_iter()
        .map(|c| (c, c.bound(dec.s, params).0 - c.value(dec).abs()))
        .collect();
    VAReport { s: dec.s, margins }
}

/// Rates compared on one face of `V_A(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSign {
    /// `d/ds` of the signed component (or of the norm for `q_-`).
    pub rate: f64,
    pub bound_rate: f64,
    /// Sign of the component (1 for norms).
    pub theta: f64,
    /// `theta rate > bound_rate`.
    pub outgoing: bool,
    /// Relative separation in the direction the face predicts:
    /// `(theta rate - bound_rate)/|bound_rate|` on outgoing faces, the
    /// opposite on ingoing ones.
    pub margin: f64,
}

/// Derivative of every constraint's component along the flow: forward
/// differences over `h/2` and `h` (steps of `h/2`), combined as
/// `2 D(h/2) - D(h)` to cancel the first-order error.
pub fn boundary_flow<F: Force>(
    state: &SpectralState,
    grid: &TensorGrid,
    force: F,
    profile: &Profile,
    params: &Params,
    h: f64,
) -> Result<BTreeMap<Constraint, FlowSign>> {
    let d0 = decompose(state, grid, profile)?;
    let integ = Integrator::new(grid, force, h / 2.0)?;
    let one = integ.step(state)?;
    let two = integ.step(&one)?;
    let d_half = decompose(&one, grid, profile)?;
    let d_full = decompose(&two, grid, profile)?;
    let mut out = BTreeMap::new();
    for c in Constraint::all() {
        if c == Constraint::Linf {
            continue;
        }
        let v0 = c.value(&d0);
        let r_half = (c.value(&d_half) - v0) / (h / 2.0);
        let r_full = (c.value(&d_full) - v0) / h;
        let rate = 2.0 * r_half - r_full;
        let theta = if c == Constraint::Minus || v0 >= 0.0 { 1.0 } else { -1.0 };
        let (_, bound_rate) = c.bound(state.s, params);
        let sep = (theta * rate - bound_rate) / bound_rate.abs();
        let outgoing = theta * rate > bound_rate;
        let margin = if c.is_outgoing() { sep } else { -sep };
        out.insert(c, FlowSign { rate, bound_rate, theta, outgoing, margin });
    }
    Ok(out)
}

/// Symmetric state sitting on one face of `V_A(s)` with every other
/// component zero: the face's component and its partner at `theta` times
/// the bound, or for `q_-` the combination `h8 h0 + h0 h8` scaled to the
/// bound.
pub fn boundary_state(face: Constraint, theta: f64, s: f64, params: &Params, grid: &TensorGrid) -> SpectralState {
    let nmax = grid.nmax;
    let mut f = crate::operator::SpectralField::zero(nmax);
    let (b, _) = face.bound(s, params);
    match face {
        Constraint::IjCore(h) | Constraint::SixCorner(h) | Constraint::SixMid(h) => {
            f.set(h.deg1(), h.deg2(), theta * b);
            f.set(h.deg2(), h.deg1(), theta * b);
        }
        Constraint::Minus => {
            let n = (2.0 * hermite_norm_sq(8)).sqrt();
            f.set(8, 0, b / n);
            f.set(0, 8, b / n);
        }
        Constraint::Linf => {}
    }
    f.symmetric = true;
    let samples = grid.synthesize(&f.coeffs);
    f.samples = Some(samples);
    SpectralState { s, field: f }
}
