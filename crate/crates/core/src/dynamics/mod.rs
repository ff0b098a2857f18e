//! Pseudo-spectral evolution of the perturbation `q = w - phi`, its
//! decomposition, the shrinking set `V_A(s)` and the shooting search over `d`.

mod integrator;
mod recenter;
mod shoot;
mod trap;

pub use integrator::*;
pub use recenter::*;
pub use shoot::*;
pub use trap::*;

use crate::basis::TensorGrid;
use crate::error::Result;
use crate::profile::{Params, Profile};

/// `q(s0) = w0(., s0) - phi(., s0)` at the nodes, with its projection.
pub fn build_initial(params: &Params, grid: &TensorGrid) -> Result<SpectralState> {
    let prof = Profile::new(params);
    let s0 = params.s0;
    let samples = (0..grid.len())
        .map(|k| {
            let (a, b) = grid.point(k);
            Ok(prof.w0(a, b)? - prof.phi(a, b, s0)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let coeffs = grid.project_all(&samples);
    let mut field = crate::operator::SpectralField::from_coeffs(grid.nmax, coeffs);
    field.samples = Some(samples);
    field.symmetric = true;
    Ok(SpectralState { s: s0, field })
}

/// Potential `V = p phi^(p-1) - p/(p-1)`.
pub fn eval_v(y1: f64, y2: f64, s: f64, params: &Params) -> Result<f64> {
    Ok(Profile::new(params).local(y1, y2, s)?.v)
}

/// Nonlinear term at one point for a given perturbation value.
pub fn eval_b(y1: f64, y2: f64, s: f64, q: f64, params: &Params) -> Result<f64> {
    let phi = Profile::new(params).phi(y1, y2, s)?;
    Ok(nonlinear_b(phi, q, params.p))
}

/// Remainder `R = -phi_s + (L-1) phi - phi/(p-1) + phi^p`.
pub fn eval_r(y1: f64, y2: f64, s: f64, params: &Params) -> Result<f64> {
    Ok(Profile::new(params).local(y1, y2, s)?.r)
}
