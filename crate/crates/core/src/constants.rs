//! Calibrated constants, each fitted once on a fixed reference sweep and
//! frozen here. The owning module's integration tests recompute every value.

/// Regularizing constant `C(2, 4)` for `e^(sL)` from `L^2 rho` to `L^4 rho`.
///
/// Max of `ratio / shape` over `operator::random_family(16, 8, 64, 2024)`
/// (degree <= 8, unit `L^2 rho` norm) and `s in {1.2, 1.5, 2, 3, 4, 6}`, on
/// the order-48 grid. The worst case sits at `s = 3`.
pub const REGULARIZING_C_2_4: f64 = 2.585_451_365_706_902_3e-1;

/// Seed and size of the calibration family for [`REGULARIZING_C_2_4`].
pub const REGULARIZING_SEED: u64 = 2024;
pub const REGULARIZING_FAMILY: usize = 64;
pub const REGULARIZING_SWEEP: [f64; 6] = [1.2, 1.5, 2.0, 3.0, 4.0, 6.0];

/// Flatness constant: max of `||w_a(., s0) - w_0(a e^(s0/2), s0)|| e^(s0/6)`
/// over `dynamics::calibrate_flatness` (p = 2, delta = 100, d = 0, s0 in
/// {10, 12, 14, 16}, `|a| e^(s0/2)` in {0, 5, ..., 60}, nine directions),
/// order-48 grid. The worst case sits at s0 = 10.
pub const FLATNESS_C: f64 = 6.313_306_001_048_372e-1;

/// Expansion constant: max residual ratio of `wa_expansion_check` over
/// `dynamics::WA_SWEEP` at p = 2, delta = 100, A = 20, s0 = 14, m = 0.05.
/// The worst row is `h0h1` at (K, L) = (0, 20).
pub const WA_C: f64 = 5.447_854_719_309_055;
pub const WA_S0: f64 = 14.0;
pub const WA_M: f64 = 0.05;

/// Radius of the disc where `rho` is above machine precision
/// (`e^(-R^2/4) = e^(-36)`); pointwise tracking errors are measured there.
pub const RESOLVED_RADIUS: f64 = 12.0;

/// Sup-norm preconditions of the stability probes are read on `|y| <= 6`
/// (outside it `rho` carries a fraction `e^(-9)` of its mass); beyond it the
/// probes impose `|w| <= 2 kappa` on the nonlinearity.
pub const PROBE_SUP_RADIUS: f64 = 6.0;

/// `M1` of the heteroclinic probe.
pub const M1: f64 = 10.0;

/// `M0` of the zero probe: max of `||w(s)|| e^(s/(p-1)) / ||w(0)||` over
/// `scenarios::calibrate_m0` (p = 2, unit shapes `scenarios::M0_SHAPES` at
/// size `+-eps0`, window 4, ds = 0.01, order-48 grid).
pub const M0: f64 = 1.051_617_609_619_174_9;

/// Allowance `C` of the region size bounds `+- C e^(-s0/3)`: smallest value
/// covering `scenarios::calibrate_region_c` (p = 2, delta = 100, m = 0.05,
/// M = 10, s0 in {10, 12, 14, 16}, two `d`, nine rays, nine `G0` levels).
pub const REGION_C: f64 = 2.142_086_175_528_611_6;

/// Descent envelope constant: max over `[s0, s*]` of
/// `||w_a - (kappa - e^(s-s0) iota)|| / ((eta* + 1/A) e^(s-s0) iota + e^(-s0/3))`
/// over `scenarios::calibrate_descent_m` (p = 2, delta = 100, A = 20,
/// s0 = 14, eta* = 0.05, m = 0.04, K + L = A). The worst case is (K, L) = (5, 15).
pub const DESCENT_M: f64 = 5.788_901_688_592_614e-1;
