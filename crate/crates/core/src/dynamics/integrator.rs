//! Exponential Strang splitting on tensor-Hermite coefficients.

use crate::basis::{eigenvalue, TensorGrid};
use crate::error::{Error, Result};
use crate::operator::SpectralField;
use crate::profile::{Params, PolyValues, Profile};

/// Numerical configuration shared by every trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynConfig {
    pub quad_order: usize,
    pub nmax: usize,
    pub ds: f64,
}

impl Default for DynConfig {
    fn default() -> Self {
        Self { quad_order: 48, nmax: 16, ds: 0.01 }
    }
}

impl DynConfig {
    pub fn grid(&self) -> Result<TensorGrid> {
        TensorGrid::new(self.quad_order, self.nmax)
    }
}

/// A field with coefficients and node samples at time `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub s: f64,
    pub field: SpectralField,
}

impl SpectralState {
    pub fn samples(&self) -> &[f64] {
        self.field.samples.as_deref().expect("state carries samples")
    }

    pub fn coeff(&self, n1: usize, n2: usize) -> f64 {
        self.field.get(n1, n2)
    }
}

/// Right-hand side `d/ds v = (L + shift) v + rhs(s, v)`.
pub trait Force: Sync {
    /// Constant added to `L` and integrated exactly with it.
    fn shift(&self) -> f64 {
        0.0
    }

    /// Pointwise part at the nodes. Errors stop the integration.
    fn rhs(&self, s: f64, v: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Only the linear part: `d/ds v = L v`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearOnly;

impl Force for LinearOnly {
    fn rhs(&self, _s: f64, _v: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = 0.0);
        Ok(())
    }
}

/// `B = |phi+q|^(p-1)(phi+q) - phi^p - p phi^(p-1) q`, by its binomial series
/// when `|q/phi| < 1e-3`.
pub fn nonlinear_b(phi: f64, q: f64, p: f64) -> f64 {
    let t = q / phi;
    if phi > 0.0 && t.abs() < 1e-3 {
        // phi^p sum_{k>=2} C(p,k) t^k
        let mut c = p * (p - 1.0) / 2.0;
        let mut tk = t * t;
        let mut acc = c * tk;
        for k in 3..=8 {
            c *= (p - (k as f64 - 1.0)) / k as f64;
            tk *= t;
            acc += c * tk;
        }
        return phi.powf(p) * acc;
    }
    let w = phi + q;
    w.abs().powf(p - 1.0) * w - phi.powf(p) - p * phi.powf(p - 1.0) * q
}

/// Which terms of `(L + V) q + B + R` are active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms {
    pub potential: bool,
    pub nonlinear: bool,
    pub remainder: bool,
}

impl Terms {
    pub const FULL: Terms = Terms { potential: true, nonlinear: true, remainder: true };
    pub const LINEAR: Terms = Terms { potential: false, nonlinear: false, remainder: false };
}

/// Sup-norm guard: `sup |q + phi| > GUARD * kappa` on the nodes aborts.
pub const OVERFLOW_GUARD: f64 = 10.0;

/// Forcing of the perturbation equation around the profile `phi`.
pub struct QForce {
    pub profile: Profile,
    pub terms: Terms,
    /// Overflow check on `sup |q + phi|`; off for single-step probes.
    pub guard: bool,
    nodes: Vec<(f64, f64)>,
    polys: Vec<PolyValues>,
}

impl QForce {
    pub fn new(params: &Params, grid: &TensorGrid, terms: Terms) -> Self {
        let profile = Profile::new(params);
        let nodes: Vec<(f64, f64)> = (0..grid.len()).map(|k| grid.point(k)).collect();
        let polys = nodes.iter().map(|&(a, b)| profile.poly_values(a, b)).collect();
        Self { profile, terms, guard: true, nodes, polys }
    }

    pub fn without_guard(mut self) -> Self {
        self.guard = false;
        self
    }

    /// `(phi, V, R)` at every node.
    pub fn frame(&self, s: f64) -> Result<Vec<(f64, f64, f64)>> {
        self.nodes
            .iter()
            .zip(&self.polys)
            .map(|(&(a, b), pv)| self.profile.local_with(a, b, pv, s).map(|l| (l.phi, l.v, l.r)))
            .collect()
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }
}

impl Force for QForce {
    fn rhs(&self, s: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        let p = self.profile.params.p;
        let guard = OVERFLOW_GUARD * self.profile.kappa();
        let mut sup: f64 = 0.0;
        for (k, (&(a, b), pv)) in self.nodes.iter().zip(&self.polys).enumerate() {
            let l = self.profile.local_with(a, b, pv, s)?;
            let q = v[k];
            sup = sup.max((q + l.phi).abs());
            let mut f = 0.0;
            if self.terms.potential {
                f += l.v * q;
            }
            if self.terms.nonlinear {
                f += nonlinear_b(l.phi, q, p);
            }
            if self.terms.remainder {
                f += l.r;
            }
            out[k] = f;
        }
        if self.guard && !(sup <= guard) {
            return Err(Error::Overflow { s, sup });
        }
        Ok(())
    }
}

/// The self-similar equation for `w` itself:
/// `d/ds w = (L - p/(p-1)) w + |w|^(p-1) w`.
#[derive(Debug, Clone, Copy)]
pub struct WForce {
    pub p: f64,
    pub kappa: f64,
    /// When set, the nonlinearity sees `w` clamped to `[-cap, cap]`: the
    /// a priori bound `|w| <= cap` is imposed instead of checked.
    pub cap: Option<f64>,
}

impl WForce {
    pub fn new(p: f64) -> Self {
        Self { p, kappa: crate::profile::kappa_of(p), cap: None }
    }

    pub fn saturated(p: f64, cap: f64) -> Self {
        Self { cap: Some(cap), ..Self::new(p) }
    }
}

impl Force for WForce {
    fn shift(&self) -> f64 {
        -self.p / (self.p - 1.0)
    }

    fn rhs(&self, s: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        if let Some(cap) = self.cap {
            for (o, &w) in out.iter_mut().zip(v) {
                let w = w.clamp(-cap, cap);
                *o = w.abs().powf(self.p - 1.0) * w;
            }
            return Ok(());
        }
        let guard = OVERFLOW_GUARD * self.kappa;
        let mut sup: f64 = 0.0;
        for (o, &w) in out.iter_mut().zip(v) {
            sup = sup.max(w.abs());
            *o = w.abs().powf(self.p - 1.0) * w;
        }
        if !(sup <= guard) {
            return Err(Error::Overflow { s, sup });
        }
        Ok(())
    }
}

/// Strang splitting: half step of `e^((L+shift) ds/2)` on the coefficients,
/// a midpoint step of the pointwise forcing on the samples (projected back
/// onto the truncation), then the second half step.
pub struct Integrator<'a, F: Force> {
    pub grid: &'a TensorGrid,
    pub force: F,
    pub ds: f64,
    half: Vec<f64>,
}

impl<'a, F: Force> Integrator<'a, F> {
    pub fn new(grid: &'a TensorGrid, force: F, ds: f64) -> Result<Self> {
        if !(ds > 0.0 && ds <= 0.1) {
            return Err(Error::Precondition(format!("ds = {ds} outside (0, 0.1]")));
        }
        let m = grid.nmax + 1;
        let mut half = vec![0.0; m * m];
        for n1 in 0..m {
            for n2 in 0..m - n1 {
                half[n1 * m + n2] = ((eigenvalue(n1, n2) + force.shift()) * ds / 2.0).exp();
            }
        }
        Ok(Self { grid, force, ds, half })
    }

    /// State from node samples (projected, then resynthesized).
    pub fn state_from_samples(&self, s: f64, samples: Vec<f64>) -> SpectralState {
        let coeffs = self.grid.project_all(&samples);
        self.state_from_coeffs(s, coeffs)
    }

    pub fn state_from_coeffs(&self, s: f64, coeffs: Vec<f64>) -> SpectralState {
        let field = SpectralField::from_coeffs(self.grid.nmax, coeffs).with_samples(self.grid);
        SpectralState { s, field }
    }

    fn forcing_coeffs(&self, s: f64, coeffs: &[f64]) -> Result<Vec<f64>> {
        let v = self.grid.synthesize(coeffs);
        let mut f = vec![0.0; v.len()];
        self.force.rhs(s, &v, &mut f)?;
        Ok(self.grid.project_all(&f))
    }

    /// One step of length `ds` from `state.s`.
    pub fn step(&self, state: &SpectralState) -> Result<SpectralState> {
        let s = state.s;
        let ds = self.ds;
        let mut c: Vec<f64> = state.field.coeffs.iter().zip(&self.half).map(|(a, h)| a * h).collect();
        let k1 = self.forcing_coeffs(s, &c)?;
        let mid: Vec<f64> = c.iter().zip(&k1).map(|(a, k)| a + 0.5 * ds * k).collect();
        let k2 = self.forcing_coeffs(s + 0.5 * ds, &mid)?;
        for ((a, k), h) in c.iter_mut().zip(&k2).zip(&self.half) {
            *a = (*a + ds * k) * h;
        }
        let mut out = self.state_from_coeffs(s + ds, c);
        out.field.symmetric = state.field.symmetric;
        Ok(out)
    }

    /// Steps until `s_end` (within half a step), calling `observe` after each
    /// step; `observe` returning `false` stops early.
    pub fn run(
        &self,
        mut state: SpectralState,
        s_end: f64,
        mut observe: impl FnMut(&SpectralState) -> bool,
    ) -> Result<SpectralState> {
        let n = ((s_end - state.s) / self.ds).round().max(0.0) as usize;
        for _ in 0..n {
            state = self.step(&state)?;
            if !observe(&state) {
                break;
            }
        }
        Ok(state)
    }
}
