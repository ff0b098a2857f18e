//! Verification laboratory for a cross-shaped single-point blow-up solution of
//! `u_t = Δu + |u|^(p-1) u` in two space dimensions.

pub mod basis;
pub mod series;
pub mod profile;
pub mod operator;
pub mod dynamics;
pub mod scenarios;
pub mod constants;
pub mod error;

pub use error::{Error, Result};
