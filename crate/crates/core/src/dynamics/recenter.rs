//! The recentered solutions `w_a(y, s) = w_0(y + a e^(s/2), s)` and the
//! expansion of `w_a(., s0)` for large `a`.

use serde::Serialize;

use crate::basis::TensorGrid;
use crate::error::{Error, Result};
use crate::profile::{Params, Profile};

/// Samples of a field on a uniform square lattice, read back by local
/// tensor Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct UniformField {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
}

/// Interpolation stencil width per direction.
pub const STENCIL: usize = 8;

impl UniformField {
    /// Lattice covering `center ± half_width` in each direction.
    pub fn from_fn(
        center: (f64, f64),
        half_width: f64,
        h: f64,
        f: impl Fn(f64, f64) -> Result<f64> + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let n = (2.0 * half_width / h).ceil() as usize + 1;
        let x0 = center.0 - half_width;
        let y0 = center.1 - half_width;
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| f(x0 + (k / n) as f64 * h, y0 + (k % n) as f64 * h))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { x0, y0, h, nx: n, ny: n, values })
    }

    /// Value at lattice node `(a, b)`.
    pub fn node(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.ny + b]
    }

    fn stencil(origin: f64, h: f64, n: usize, x: f64) -> Option<(usize, [f64; STENCIL])> {
        let t = (x - origin) / h;
        let half = (STENCIL / 2) as f64;
        let start = (t.floor() - (half - 1.0)) as i64;
        if !t.is_finite() || start < 0 || start as usize + STENCIL > n {
            return None;
        }
        let start = start as usize;
        let mut w = [0.0; STENCIL];
        for (k, wk) in w.iter_mut().enumerate() {
            let tk = (start + k) as f64;
            let mut acc = 1.0;
            for m in 0..STENCIL {
                if m != k {
                    let tm = (start + m) as f64;
                    acc *= (t - tm) / (tk - tm);
                }
            }
            *wk = acc;
        }
        Some((start, w))
    }

    pub fn interp(&self, x: f64, y: f64) -> Result<f64> {
        let out = || Error::OutOfHull { y1: x, y2: y };
        let (sa, wa) = Self::stencil(self.x0, self.h, self.nx, x).ok_or_else(out)?;
        let (sb, wb) = Self::stencil(self.y0, self.h, self.ny, y).ok_or_else(out)?;
        let mut acc = 0.0;
        for (i, wi) in wa.iter().enumerate() {
            let row: f64 = wb.iter().enumerate().map(|(j, wj)| wj * self.node(sa + i, sb + j)).sum();
            acc += wi * row;
        }
        Ok(acc)
    }
}

/// `w_a` at the grid nodes, interpolated from a lattice of `w_0(., s)`.
pub fn recenter(field: &UniformField, a: (f64, f64), s: f64, grid: &TensorGrid) -> Result<Vec<f64>> {
    let sc = (s / 2.0).exp();
    (0..grid.len())
        .map(|k| {
            let (y1, y2) = grid.point(k);
            field.interp(y1 + a.0 * sc, y2 + a.1 * sc)
        })
        .collect()
}

/// `w_a(., s0)` at the grid nodes straight from the closed form of `w_0`.
pub fn recenter_closed(profile: &Profile, a: (f64, f64), grid: &TensorGrid) -> Result<Vec<f64>> {
    let sc = (profile.params.s0 / 2.0).exp();
    (0..grid.len())
        .map(|k| {
            let (y1, y2) = grid.point(k);
            profile.w0(y1 + a.0 * sc, y2 + a.1 * sc)
        })
        .collect()
}

/// Lattice of `w_0(., s0)` wide enough to recenter at `a` on `grid`.
pub fn w0_lattice(profile: &Profile, a: (f64, f64), grid: &TensorGrid, h: f64) -> Result<UniformField> {
    let sc = (profile.params.s0 / 2.0).exp();
    let half = grid.radius() + STENCIL as f64 * h;
    UniformField::from_fn((a.0 * sc, a.1 * sc), half, h, |x, y| profile.w0(x, y))
}

/// `||w_a(., s0) - w_0(a e^(s0/2), s0)||_{L2_rho}`.
pub fn flatness(profile: &Profile, a: (f64, f64), grid: &TensorGrid) -> Result<f64> {
    let wa = recenter_closed(profile, a, grid)?;
    let sc = (profile.params.s0 / 2.0).exp();
    let center = profile.w0(a.0 * sc, a.1 * sc)?;
    let diff: Vec<f64> = wa.iter().map(|v| v - center).collect();
    Ok(grid.l2_norm(&diff))
}

/// `iota = e^(-s0) K^2 L^2 + delta e^(-2 s0) (K^6 + L^6)`.
pub fn iota(k: f64, l: f64, params: &Params) -> f64 {
    let e = (-params.s0).exp();
    e * k * k * l * l + params.delta * e * e * (k.powi(6) + l.powi(6))
}

/// One row of the expansion table: degrees `(n1, n2)`, projection, predicted
/// value and the residual against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeResidual {
    pub n1: usize,
    pub n2: usize,
    pub measured: f64,
    pub expected: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaExpansion {
    pub k: f64,
    pub l: f64,
    pub iota: f64,
    /// `iota / A + iota^2`, the size the residuals are measured against.
    pub scale: f64,
    pub rows: Vec<ModeResidual>,
}

impl WaExpansion {
    pub fn row(&self, n1: usize, n2: usize) -> &ModeResidual {
        self.rows.iter().find(|r| r.n1 == n1 && r.n2 == n2).expect("row in table")
    }

    /// Largest `residual / scale` over the table.
    pub fn worst_ratio(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.residual / self.scale))
    }

    pub fn passes(&self, c: f64) -> bool {
        self.worst_ratio() <= c
    }
}

/// Predicted coefficient of `h_{n1} h_{n2}` in `w_a(., s0)`, from
/// `kappa - iota - e^(-s0){2KL^2 h1h0 + 2K^2L h0h1 + L^2 h2h0 + 4KL h1h1
/// + K^2 h0h2 + 2L h2h1 + 2K h1h2 + h2h2}`. The `K^2 L` term is placed on
/// `h0h1`; the other slot already carries `2KL^2`.
pub fn wa_predicted(n1: usize, n2: usize, k: f64, l: f64, params: &Params) -> f64 {
    let e = (-params.s0).exp();
    let c = match (n1, n2) {
        (0, 0) => return params.kappa() - iota(k, l, params),
        (1, 0) => 2.0 * k * l * l,
        (0, 1) => 2.0 * k * k * l,
        (2, 0) => l * l,
        (1, 1) => 4.0 * k * l,
        (0, 2) => k * k,
        (2, 1) => 2.0 * l,
        (1, 2) => 2.0 * k,
        (2, 2) => 1.0,
        _ => 0.0,
    };
    -e * c
}

/// Projects `w_a(., s0)` with `a = (K, L) e^(-s0/2)` on the modes
/// `h_{n1} h_{n2}`, `n1, n2 <= 2`, and compares with the predicted expansion.
///
/// Requires `K, L >= 0`, `K + L >= A` and `a` in the region where
/// `G0(a) <= m e^(-s0)`.
pub fn wa_expansion_check(k: f64, l: f64, m: f64, params: &Params, grid: &TensorGrid) -> Result<WaExpansion> {
    if !(k >= 0.0 && l >= 0.0) {
        return Err(Error::Precondition(format!("K = {k}, L = {l} must be nonnegative")));
    }
    if !(k + l >= params.amp) {
        return Err(Error::Precondition(format!("K + L = {} below A = {}", k + l, params.amp)));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Precondition(format!("m = {m} outside (0, 1)")));
    }
    let io = iota(k, l, params);
    // G0(a) = ((p-1)/kappa) e^(-s0) iota
    let g0_scaled = (params.p - 1.0) / params.kappa() * io;
    if g0_scaled > m {
        return Err(Error::Precondition(format!(
            "a = (K, L) e^(-s0/2) outside the inner region: G0 e^s0 = {g0_scaled} > m = {m}"
        )));
    }
    let profile = Profile::new(params);
    let sc = (-params.s0 / 2.0).exp();
    let wa = recenter_closed(&profile, (k * sc, l * sc), grid)?;
    let c = grid.project_all(&wa);
    let mm = grid.nmax + 1;
    let mut rows = Vec::new();
    for n1 in 0..=2 {
        for n2 in 0..=2 {
            let measured = c[n1 * mm + n2];
            let expected = wa_predicted(n1, n2, k, l, params);
            rows.push(ModeResidual { n1, n2, measured, expected, residual: (measured - expected).abs() });
        }
    }
    Ok(WaExpansion { k, l, iota: io, scale: io / params.amp + io * io, rows })
}

/// Flatness sweep: `s0` values and the `(K, L)` lattice `|a| e^(s0/2)` in
/// `{0, 5, ..., 60}` times nine directions of the first quadrant.
pub const FLATNESS_S0: [f64; 4] = [10.0, 12.0, 14.0, 16.0];

/// Largest `||w_a(., s0) - w_0(a e^(s0/2), s0)|| e^(s0/6)` over the sweep.
pub fn calibrate_flatness(base: &Params, grid: &TensorGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s0 in FLATNESS_S0 {
        let params = Params { s0, ..*base };
        let prof = Profile::new(&params);
        let sc = (-s0 / 2.0).exp();
        for ir in 0..=12 {
            for it in 0..=8 {
                let r = 5.0 * ir as f64;
                let th = std::f64::consts::FRAC_PI_2 * it as f64 / 8.0;
                let a = (r * th.cos() * sc, r * th.sin() * sc);
                worst = worst.max(flatness(&prof, a, grid)? * (s0 / 6.0).exp());
            }
        }
    }
    Ok(worst)
}

/// `(K, L)` pairs of the expansion sweep (all with `K + L >= 20`).
pub const WA_SWEEP: [(f64, f64); 7] =
    [(0.0, 20.0), (5.0, 15.0), (10.0, 10.0), (0.0, 25.0), (8.0, 16.0), (3.0, 20.0), (12.0, 12.0)];

/// Largest residual ratio of `wa_expansion_check` over `WA_SWEEP`.
pub fn calibrate_wa(params: &Params, m: f64, grid: &TensorGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, l) in WA_SWEEP {
        worst = worst.max(wa_expansion_check(k, l, m, params, grid)?.worst_ratio());
    }
    Ok(worst)
}
