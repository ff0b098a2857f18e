//! The operator `L = Delta - (1/2) y . grad + 1`, its spectral action and the
//! Mehler semigroup `e^(sL)`.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{eigenvalue, hermite_all, hermite_norm_sq, HermiteIndex, TensorGrid};
use crate::error::{Error, Result};
use crate::series::Poly2;

/// A field on R^2 as dense tensor-Hermite coefficients
/// `c[n1 * (nmax+1) + n2]` (`n1 + n2 <= nmax`) with optional node samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub nmax: usize,
    pub coeffs: Vec<f64>,
    pub samples: Option<Vec<f64>>,
    /// Even in each variable and symmetric under `y1 <-> y2`.
    pub symmetric: bool,
}

impl SpectralField {
    pub fn zero(nmax: usize) -> Self {
        Self { nmax, coeffs: vec![0.0; (nmax + 1) * (nmax + 1)], samples: None, symmetric: true }
    }

    /// Single mode `c h_{n1}(y1) h_{n2}(y2)`.
    pub fn mode(nmax: usize, n1: usize, n2: usize, c: f64) -> Self {
        let mut f = Self::zero(nmax);
        f.set(n1, n2, c);
        f.symmetric = false;
        f
    }

    pub fn from_coeffs(nmax: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), (nmax + 1) * (nmax + 1));
        Self { nmax, coeffs, samples: None, symmetric: false }
    }

    /// Projects node samples on the grid's truncation.
    pub fn from_samples(grid: &TensorGrid, samples: Vec<f64>) -> Self {
        let coeffs = grid.project_all(&samples);
        Self { nmax: grid.nmax, coeffs, samples: Some(samples), symmetric: false }
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        if n1 + n2 > self.nmax {
            return 0.0;
        }
        self.coeffs[n1 * (self.nmax + 1) + n2]
    }

    pub fn set(&mut self, n1: usize, n2: usize, v: f64) {
        assert!(n1 + n2 <= self.nmax, "mode ({n1},{n2}) beyond nmax {}", self.nmax);
        self.coeffs[n1 * (self.nmax + 1) + n2] = v;
    }

    pub fn at(&self, idx: HermiteIndex) -> f64 {
        self.get(idx.deg1(), idx.deg2())
    }

    /// Fills `samples` from the coefficients.
    pub fn with_samples(mut self, grid: &TensorGrid) -> Self {
        assert_eq!(grid.nmax, self.nmax);
        self.samples = Some(grid.synthesize(&self.coeffs));
        self
    }

    pub fn l2_norm_spectral(&self) -> f64 {
        let m = self.nmax + 1;
        let mut acc = 0.0;
        for n1 in 0..m {
            for n2 in 0..m - n1 {
                acc += self.get(n1, n2).powi(2) * hermite_norm_sq(n1) * hermite_norm_sq(n2);
            }
        }
        acc.sqrt()
    }

    /// Whether the coefficients satisfy the symmetric-subspace constraints
    /// within `tol` (relative to the largest coefficient magnitude).
    pub fn check_symmetric(&self, tol: f64) -> bool {
        let scale = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(f64::MIN_POSITIVE);
        let m = self.nmax + 1;
        for n1 in 0..m {
            for n2 in 0..m - n1 {
                let c = self.get(n1, n2);
                if (n1 % 2 == 1 || n2 % 2 == 1) && c.abs() > tol * scale {
                    return false;
                }
                if (c - self.get(n2, n1)).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    fn map_modes(&self, f: impl Fn(usize, usize) -> f64) -> Self {
        let m = self.nmax + 1;
        let mut out = self.clone();
        out.samples = None;
        for n1 in 0..m {
            for n2 in 0..m - n1 {
                out.coeffs[n1 * m + n2] *= f(n1, n2);
            }
        }
        out
    }
}

/// Multiplies each coefficient by `lambda = 1 - (n1+n2)/2`.
pub fn apply_l_spectral(f: &SpectralField) -> SpectralField {
    f.map_modes(eigenvalue)
}

/// `e^(sL)` on the coefficients: each mode scales by `e^(lambda s)`.
pub fn exp_l_spectral(f: &SpectralField, s: f64) -> SpectralField {
    f.map_modes(|a, b| (eigenvalue(a, b) * s).exp())
}

/// `Delta q - (1/2) y . grad q + q` on exact polynomials.
pub fn apply_l_poly(q: &Poly2<BigRational>) -> Poly2<BigRational> {
    q.apply_l()
}

fn check_time(s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("Mehler time s = {s} must be positive")));
    }
    if s < 1e-3 {
        return Err(Error::Precondition(format!(
            "Mehler time s = {s} < 1e-3: kernel nearly singular, use the spectral route"
        )));
    }
    Ok(())
}

/// 1-D kernel matrix `M[a][b]` with
/// `int k_s(y_a, x) g(x) dx ~ sum_b M[a][b] g(x_b)`.
///
/// The kernel `k_s(y, x) = exp(-(y e^(-s/2) - x)^2 / (4c)) / sqrt(4 pi c)`,
/// `c = 1 - e^(-s)`, is divided by `rho1(x)` so that the Gauss rule for `rho1`
/// applies: `M[a][b] = w_b k_s(y_a, x_b) / rho1(x_b)`. All entries are
/// positive.
fn kernel_matrix(grid: &TensorGrid, s: f64) -> Vec<f64> {
    let nodes = &grid.rule.nodes;
    let w = &grid.rule.weights;
    let n = nodes.len();
    let c = -(-s).exp_m1();
    let shrink = (-0.5 * s).exp();
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        let ya = nodes[a] * shrink;
        for b in 0..n {
            let x = nodes[b];
            let expo = -(ya - x).powi(2) / (4.0 * c) + x * x / 4.0;
            m[a * n + b] = w[b] * expo.exp() / c.sqrt();
        }
    }
    m
}

/// `e^(sL) f` from node samples by quadrature of the Mehler kernel,
/// `e^s / (4 pi (1 - e^-s)) int exp(-|y e^(-s/2) - x|^2 / (4 (1 - e^-s))) f(x) dx`.
///
/// The kernel factors over the two coordinates, so the 2-D quadrature is
/// `e^s M F M^T` with the 1-D matrix of `kernel_matrix`. Positive samples
/// stay positive.
pub fn mehler_apply(f: &SpectralField, grid: &TensorGrid, s: f64) -> Result<SpectralField> {
    check_time(s)?;
    let samples = f
        .samples
        .as_ref()
        .ok_or_else(|| Error::Precondition("mehler_apply needs node samples".into()))?;
    let n = grid.n1d();
    if samples.len() != n * n {
        return Err(Error::Precondition("samples do not match the grid".into()));
    }
    let m = kernel_matrix(grid, s);
    let es = s.exp();
    // t = F M^T, out = M t
    let t: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / n, k % n);
            let row = &samples[a * n..(a + 1) * n];
            let mr = &m[b * n..(b + 1) * n];
            row.iter().zip(mr).map(|(x, y)| x * y).sum()
        })
        .collect();
    let out: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / n, k % n);
            es * (0..n).map(|c| m[a * n + c] * t[c * n + b]).sum::<f64>()
        })
        .collect();
    let mut res = SpectralField::from_samples(grid, out);
    res.symmetric = f.symmetric;
    Ok(res)
}

/// `e^(sL) f` for a field trusted as the polynomial its coefficients define.
///
/// Substituting `x = y e^(-s/2) + sqrt(c) z` turns the kernel into `rho1(z)`,
/// so `e^(sL)[h_{n1} h_{n2}](y) = e^s g_{n1}(y1) g_{n2}(y2)` with
/// `g_n(y) = int h_n(y e^(-s/2) + sqrt(c) z) rho1(z) dz`, exact by Gauss
/// quadrature for `n < 2 * order`.
pub fn mehler_apply_closure(f: &SpectralField, grid: &TensorGrid, s: f64) -> Result<SpectralField> {
    check_time(s)?;
    let nodes = &grid.rule.nodes;
    let w = &grid.rule.weights;
    let n = nodes.len();
    let nmax = f.nmax;
    let c = -(-s).exp_m1();
    let shrink = (-0.5 * s).exp();
    // g[k * n + a] = g_k(y_a)
    let mut g = vec![0.0; (nmax + 1) * n];
    let mut buf = vec![0.0; nmax + 1];
    for a in 0..n {
        for b in 0..n {
            hermite_all(nmax, nodes[a] * shrink + c.sqrt() * nodes[b], &mut buf);
            for k in 0..=nmax {
                g[k * n + a] += w[b] * buf[k];
            }
        }
    }
    let es = s.exp();
    let mut out = vec![0.0; n * n];
    for n1 in 0..=nmax {
        for n2 in 0..=nmax - n1 {
            let cc = f.get(n1, n2);
            if cc == 0.0 {
                continue;
            }
            for a in 0..n {
                let ga = es * cc * g[n1 * n + a];
                let row = &mut out[a * n..(a + 1) * n];
                for (b, o) in row.iter_mut().enumerate() {
                    *o += ga * g[n2 * n + b];
                }
            }
        }
    }
    let mut res = SpectralField::from_samples(grid, out);
    res.symmetric = f.symmetric;
    Ok(res)
}

/// `||e^(sL) f||_{L^rbar rho} / ||f||_{L^r rho}` against the bound shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizingCheck {
    pub r: f64,
    pub r_bar: f64,
    pub s: f64,
    pub ratio: f64,
    /// `e^s / ((1-e^-s)^(1/r) (r-1-e^-s (rbar-1))^(1/rbar))` for N = 2.
    pub shape: f64,
    pub c: f64,
    pub pass: bool,
}

/// Lower end of the validity window `max(0, -log((r-1)/(rbar-1)))`.
pub fn regularizing_window(r: f64, r_bar: f64) -> f64 {
    (-((r - 1.0) / (r_bar - 1.0)).ln()).max(0.0)
}

pub fn regularizing_shape(r: f64, r_bar: f64, s: f64) -> f64 {
    let e = (-s).exp();
    s.exp() / ((1.0 - e).powf(1.0 / r) * (r - 1.0 - e * (r_bar - 1.0)).powf(1.0 / r_bar))
}

fn check_regularizing_args(r: f64, r_bar: f64, s: f64) -> Result<()> {
    if !(r >= 2.0 && r_bar > r) {
        return Err(Error::Precondition(format!("need r >= 2 and rbar > r, got ({r}, {r_bar})")));
    }
    let lo = regularizing_window(r, r_bar);
    if !(s > lo) {
        return Err(Error::Precondition(format!("s = {s} outside the window s > {lo}")));
    }
    Ok(())
}

/// Measured norm ratio for `f` at time `s`.
pub fn regularizing_ratio(r: f64, r_bar: f64, s: f64, f: &SpectralField, grid: &TensorGrid) -> Result<f64> {
    check_regularizing_args(r, r_bar, s)?;
    let f = if f.samples.is_some() { f.clone() } else { f.clone().with_samples(grid) };
    let g = mehler_apply(&f, grid, s)?;
    let num = grid.lr_norm(g.samples.as_ref().unwrap(), r_bar);
    let den = grid.lr_norm(f.samples.as_ref().unwrap(), r);
    Ok(num / den)
}

/// Compares the ratio with `c * shape`.
pub fn check_regularizing(
    r: f64,
    r_bar: f64,
    s: f64,
    f: &SpectralField,
    grid: &TensorGrid,
    c: f64,
) -> Result<RegularizingCheck> {
    let ratio = regularizing_ratio(r, r_bar, s, f, grid)?;
    let shape = regularizing_shape(r, r_bar, s);
    Ok(RegularizingCheck { r, r_bar, s, ratio, shape, c, pass: ratio.is_finite() && ratio <= c * shape })
}

/// Seeded family of polynomials of total degree at most `degree` with
/// `||f||_{L^2 rho} = 1`. Each mode gets a uniform draw in `[-1, 1]` divided
/// by its norm, so every degree contributes comparably.
pub fn random_family(nmax: usize, degree: usize, count: usize, seed: u64) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut f = SpectralField::zero(nmax);
            f.symmetric = false;
            for n1 in 0..=degree {
                for n2 in 0..=degree - n1 {
                    let norm = (hermite_norm_sq(n1) * hermite_norm_sq(n2)).sqrt();
                    f.set(n1, n2, rng.gen_range(-1.0..1.0) / norm);
                }
            }
            let l2 = f.l2_norm_spectral();
            f.coeffs.iter_mut().for_each(|c| *c /= l2);
            f
        })
        .collect()
}

/// `max ratio / shape` over the family at time `s`.
pub fn calibrate_regularizing(
    r: f64,
    r_bar: f64,
    s: f64,
    family: &[SpectralField],
    grid: &TensorGrid,
) -> Result<f64> {
    let shape = regularizing_shape(r, r_bar, s);
    let mut worst: f64 = 0.0;
    for f in family {
        worst = worst.max(regularizing_ratio(r, r_bar, s, f, grid)? / shape);
    }
    Ok(worst)
}
