//! Exact truncated-series engine in `eps = e^(-s)` over the scalar ring
//! `Q(p, delta) kappa^Z`.

pub mod eps;
pub mod expand;
pub mod poly;
pub mod ratfn;
pub mod scalar;

pub use eps::{EpsSeries, SPoly};
pub use expand::{
    certify, expand_profile, expand_profile_with_gamma, expand_remainder, expand_remainder_with_gamma,
    SeriesCertificate,
};
pub use poly::{Coef, HermiteMap, Poly2};
pub use ratfn::RatFn;
pub use scalar::Scalar;

/// `kappa^(p-1) -> 1/(p-1)`; see [`Scalar::reduce_kappa`].
pub fn reduce_kappa(x: &Scalar) -> Scalar {
    x.reduce_kappa()
}
