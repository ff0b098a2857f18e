//! Rescaled Hermite polynomials, the Gaussian weight and tensor quadrature.
//!
//! The weight is `rho(y) = exp(-|y|^2/4) / (4 pi)` on R^2, a product of the
//! 1-D densities `rho1(x) = exp(-x^2/4) / sqrt(4 pi)`. The polynomials
//! `h_n(x) = sum_i n!/(i!(n-2i)!) (-1)^i x^(n-2i)` are orthogonal for `rho1`
//! with `||h_n||^2 = 2^n n!`.
//!
//! Two-dimensional indices follow the `(total degree, second slot)` layout:
//! `HermiteIndex { i, j }` is the mode `h_{i-j}(y1) h_j(y2)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree evaluated from the explicit coefficient list.
pub const EXPLICIT_DEGREE_MAX: usize = 20;
/// Largest supported 1-D quadrature order.
pub const QUAD_ORDER_CAP: usize = 128;
/// Largest factor degree accepted by [`product_in_basis`].
pub const PRODUCT_DEGREE_CAP: usize = 64;
/// Default 1-D quadrature order.
pub const DEFAULT_QUAD_ORDER: usize = 48;

/// Mode `h_{i-j}(y1) h_j(y2)`; `i` is the total degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HermiteIndex {
    pub i: usize,
    pub j: usize,
}

impl HermiteIndex {
    /// Panics if `j > i`.
    pub fn new(i: usize, j: usize) -> Self {
        assert!(j <= i, "second slot {j} exceeds total degree {i}");
        Self { i, j }
    }

    pub fn from_degrees(n1: usize, n2: usize) -> Self {
        Self { i: n1 + n2, j: n2 }
    }

    pub fn deg1(&self) -> usize {
        self.i - self.j
    }

    pub fn deg2(&self) -> usize {
        self.j
    }

    pub fn eigenvalue(&self) -> f64 {
        eigenvalue(self.deg1(), self.deg2())
    }

    /// All indices of total degree at most `imax`, ordered by `(i, j)`.
    pub fn all_up_to(imax: usize) -> Vec<Self> {
        (0..=imax)
            .flat_map(|i| (0..=i).map(move |j| Self { i, j }))
            .collect()
    }
}

impl std::fmt::Display for HermiteIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}{}", self.i, self.j)
    }
}

/// `1 - (n1 + n2)/2`, the eigenvalue of `L` on `h_{n1} h_{n2}`.
pub fn eigenvalue(n1: usize, n2: usize) -> f64 {
    1.0 - (n1 + n2) as f64 / 2.0
}

fn factorial_big(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Power-basis coefficients of `h_n`, lowest degree first.
pub fn hermite_coeffs(n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n + 1];
    let nf = factorial_big(n);
    for i in 0..=n / 2 {
        let mag = &nf / (factorial_big(i) * factorial_big(n - 2 * i));
        c[n - 2 * i] = if i % 2 == 0 { mag } else { -mag };
    }
    c
}

/// Expansion `x^n = sum_k a_k h_k(x)` as `(k, a_k)` pairs.
pub fn monomial_in_hermite(n: usize) -> Vec<(usize, BigInt)> {
    let nf = factorial_big(n);
    (0..=n / 2)
        .map(|i| (n - 2 * i, &nf / (factorial_big(i) * factorial_big(n - 2 * i))))
        .collect()
}

fn explicit_table() -> &'static Vec<Vec<f64>> {
    static TABLE: std::sync::OnceLock<Vec<Vec<f64>>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=EXPLICIT_DEGREE_MAX)
            .map(|n| {
                hermite_coeffs(n)
                    .iter()
                    .map(|c| c.to_string().parse::<f64>().expect("integer coefficient"))
                    .collect()
            })
            .collect()
    })
}

/// `h_n(x)`; compensated Horner on the exact coefficients for `n <= 20`,
/// recurrence above.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    if n <= EXPLICIT_DEGREE_MAX {
        compensated_horner(&explicit_table()[n], x)
    } else {
        hermite_eval_recurrence(n, x)
    }
}

/// Horner with error-free transformations (Graillat, Langlois, Louvet); the
/// result is as accurate as plain Horner in twice the working precision.
fn compensated_horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0f64;
    let mut err = 0.0f64;
    for &c in coeffs.iter().rev() {
        let prod = acc * x;
        let prod_err = acc.mul_add(x, -prod);
        let sum = prod + c;
        let bb = sum - prod;
        let sum_err = (prod - (sum - bb)) + (c - bb);
        acc = sum;
        err = err * x + (prod_err + sum_err);
    }
    acc + err
}

/// `h_n(x)` via `h_{k+1} = x h_k - 2k h_{k-1}`.
pub fn hermite_eval_recurrence(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `sum_k |c_k| |x|^k`, the scale against which evaluation error is measured.
pub fn hermite_abs_scale(n: usize, x: f64) -> f64 {
    hermite_coeffs(n)
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs().to_string().parse::<f64>().unwrap_or(f64::INFINITY) * x.abs().powi(k as i32))
        .sum()
}

/// Fills `out[k] = h_k(x)` for `k <= nmax`.
pub fn hermite_all(nmax: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if nmax >= 1 {
        out[1] = x;
    }
    for k in 1..nmax {
        out[k + 1] = x * out[k] - 2.0 * k as f64 * out[k - 1];
    }
}

/// `||h_n||^2 = 2^n n!` under `rho1`.
pub fn hermite_norm_sq(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * 2.0 * k as f64)
}

pub fn hermite_norm_sq_exact(n: usize) -> BigInt {
    factorial_big(n) << n
}

pub fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let next = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - next) + t;
        } else {
            comp += (t - next) + sum;
        }
        sum = next;
    }
    sum + comp
}

/// 1-D Gauss rule for `rho1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadRule {
    /// `sum w_a f(x_a)` with Neumaier-compensated summation.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }
}

#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd(s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let Dd(s, e) = Dd::two_sum(self.0, o.0);
        let e = e + self.1 + o.1;
        Dd::two_sum(s, e)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p) + (self.0 * o.1 + self.1 * o.0);
        Dd::two_sum(p, e)
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn sqrt_of(x: f64) -> Dd {
        let s = x.sqrt();
        let r = (-s).mul_add(s, x);
        Dd::two_sum(s, r / (2.0 * s))
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.add(o.mul(Dd(q1, 0.0)).neg());
        let q2 = r.0 / o.0;
        Dd::two_sum(q1, q2)
    }
}

/// Orthonormal Hermite polynomials of `exp(-z^2)`, scaled so `p_0 = 1`, in
/// double-double: returns `(p_{n-1}(z), p_n(z), sum_{k<n} p_k(z)^2)`.
fn orthonormal_dd(zz: Dd, n: usize) -> (Dd, Dd, Dd) {
    let mut pm1 = Dd(0.0, 0.0);
    let mut p0 = Dd(1.0, 0.0);
    let mut sum = Dd(0.0, 0.0);
    for k in 1..=n {
        sum = sum.add(p0.mul(p0));
        let kf = k as f64;
        let sk = Dd::sqrt_of(kf);
        let a = Dd::sqrt_of(2.0).div(sk);
        let mut p1 = zz.mul(a).mul(p0);
        if k > 1 {
            let b = Dd::sqrt_of(kf - 1.0).div(sk);
            p1 = p1.add(b.mul(pm1).neg());
        }
        pm1 = p0;
        p0 = p1;
    }
    (pm1, p0, sum)
}

/// Polishes a node in double-double and returns `(node, rho1 weight)`; the
/// weight is the reciprocal Christoffel sum at the polished node.
fn polish_node(z: f64, n: usize) -> (f64, f64) {
    let mut zz = Dd(z, 0.0);
    for _ in 0..2 {
        let (pm1, pn, _) = orthonormal_dd(zz, n);
        let deriv = Dd::sqrt_of(2.0 * n as f64).mul(pm1);
        zz = zz.add(pn.div(deriv).neg());
    }
    let (_, _, sum) = orthonormal_dd(zz, n);
    (zz.0 + zz.1, 1.0 / (sum.0 + sum.1))
}

/// Gauss rule of the given order for `rho1`.
///
/// Built from the classical Gauss-Hermite rule for `exp(-x^2)` (Newton on the
/// orthonormal recurrence), mapped by `xi = 2x`; weights come from the
/// Christoffel function, already normalized to `rho1`.
pub fn make_quad(order: usize) -> Result<QuadRule> {
    if order == 0 || order > QUAD_ORDER_CAP {
        return Err(Error::QuadOrder { order, cap: QUAD_ORDER_CAP });
    }
    let n = order;
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            let pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (zp, wp) = polish_node(z, n);
        x[i] = zp;
        x[n - 1 - i] = -zp;
        w[i] = wp;
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let mut nodes: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let mut weights = w;
    // ascending order
    nodes.reverse();
    weights.reverse();
    Ok(QuadRule { nodes, weights, order })
}

/// Tensor product of a 1-D rule with cached Hermite tables up to `nmax`.
///
/// Samples are stored row-major: entry `a * n + b` is the value at
/// `(nodes[a], nodes[b])`.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    pub rule: QuadRule,
    pub nmax: usize,
    /// `h[k * n + a] = h_k(x_a)`
    h: Vec<f64>,
    /// `kw[k * n + a] = w_a h_k(x_a) / ||h_k||^2`
    kw: Vec<f64>,
}

impl TensorGrid {
    pub fn new(order: usize, nmax: usize) -> Result<Self> {
        let rule = make_quad(order)?;
        if nmax >= order {
            return Err(Error::IndexOutOfRange { i: nmax, j: 0, order });
        }
        let n = rule.nodes.len();
        let mut h = vec![0.0; (nmax + 1) * n];
        let mut kw = vec![0.0; (nmax + 1) * n];
        let mut buf = vec![0.0; nmax + 1];
        for a in 0..n {
            hermite_all(nmax, rule.nodes[a], &mut buf);
            for k in 0..=nmax {
                h[k * n + a] = buf[k];
                kw[k * n + a] = rule.weights[a] * buf[k] / hermite_norm_sq(k);
            }
        }
        Ok(Self { rule, nmax, h, kw })
    }

    pub fn n1d(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.n1d() * self.n1d()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.n1d();
        (self.rule.nodes[idx / n], self.rule.nodes[idx % n])
    }

    pub fn weight(&self, idx: usize) -> f64 {
        let n = self.n1d();
        self.rule.weights[idx / n] * self.rule.weights[idx % n]
    }

    /// Largest absolute node.
    pub fn radius(&self) -> f64 {
        self.rule.nodes.last().copied().unwrap_or(0.0)
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(|k| {
            let (y1, y2) = self.point(k);
            f(y1, y2)
        }).collect()
    }

    pub fn h_table(&self, k: usize) -> &[f64] {
        let n = self.n1d();
        &self.h[k * n..(k + 1) * n]
    }

    /// `int v rho` by quadrature.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        let n = self.n1d();
        let w = &self.rule.weights;
        (0..n)
            .map(|a| w[a] * (0..n).map(|b| w[b] * samples[a * n + b]).sum::<f64>())
            .sum()
    }

    /// `(int |v|^r rho)^(1/r)`.
    pub fn lr_norm(&self, samples: &[f64], r: f64) -> f64 {
        let n = self.n1d();
        let w = &self.rule.weights;
        let s: f64 = (0..n)
            .map(|a| w[a] * (0..n).map(|b| w[b] * samples[a * n + b].abs().powf(r)).sum::<f64>())
            .sum();
        s.powf(1.0 / r)
    }

    pub fn l2_norm(&self, samples: &[f64]) -> f64 {
        let n = self.n1d();
        let w = &self.rule.weights;
        (0..n)
            .map(|a| w[a] * (0..n).map(|b| w[b] * samples[a * n + b].powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// All coefficients `c[n1 * (nmax+1) + n2]` with `n1 + n2 <= nmax`; the
    /// rest of the square is zero.
    pub fn project_all(&self, samples: &[f64]) -> Vec<f64> {
        let n = self.n1d();
        let m = self.nmax + 1;
        // t[n2][a] = sum_b kw[n2][b] v[a][b]
        let mut t = vec![0.0; m * n];
        for n2 in 0..m {
            let kb = &self.kw[n2 * n..(n2 + 1) * n];
            for a in 0..n {
                let row = &samples[a * n..(a + 1) * n];
                t[n2 * n + a] = row.iter().zip(kb).map(|(v, k)| v * k).sum();
            }
        }
        let mut c = vec![0.0; m * m];
        for n1 in 0..m {
            let ka = &self.kw[n1 * n..(n1 + 1) * n];
            for n2 in 0..m - n1 {
                let tt = &t[n2 * n..(n2 + 1) * n];
                c[n1 * m + n2] = ka.iter().zip(tt).map(|(k, v)| k * v).sum();
            }
        }
        c
    }

    /// Samples of `sum c[n1][n2] h_{n1}(y1) h_{n2}(y2)`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n1d();
        let m = self.nmax + 1;
        // t[n1][b] = sum_n2 c[n1][n2] h[n2][b]
        let mut t = vec![0.0; m * n];
        for n1 in 0..m {
            for n2 in 0..m - n1 {
                let c = coeffs[n1 * m + n2];
                if c == 0.0 {
                    continue;
                }
                let hb = &self.h[n2 * n..(n2 + 1) * n];
                let row = &mut t[n1 * n..(n1 + 1) * n];
                for (r, h) in row.iter_mut().zip(hb) {
                    *r += c * h;
                }
            }
        }
        let mut out = vec![0.0; n * n];
        for n1 in 0..m {
            let ha = &self.h[n1 * n..(n1 + 1) * n];
            let tb = &t[n1 * n..(n1 + 1) * n];
            for a in 0..n {
                let f = ha[a];
                let row = &mut out[a * n..(a + 1) * n];
                for (o, v) in row.iter_mut().zip(tb) {
                    *o += f * v;
                }
            }
        }
        out
    }
}

/// Coordinate of `samples` along `h_{i-j}(y1) h_j(y2)`, i.e.
/// `int v k_{i-j} k_j rho` with `k_n = h_n / ||h_n||^2`.
pub fn project(grid: &TensorGrid, samples: &[f64], idx: HermiteIndex) -> Result<f64> {
    let order = grid.rule.order;
    if idx.j > idx.i || idx.deg1() >= order || idx.deg2() >= order {
        return Err(Error::IndexOutOfRange { i: idx.i, j: idx.j, order });
    }
    let n = grid.n1d();
    let nodes = &grid.rule.nodes;
    let w = &grid.rule.weights;
    let k1: Vec<f64> = (0..n)
        .map(|a| w[a] * hermite_eval(idx.deg1(), nodes[a]) / hermite_norm_sq(idx.deg1()))
        .collect();
    let k2: Vec<f64> = (0..n)
        .map(|b| w[b] * hermite_eval(idx.deg2(), nodes[b]) / hermite_norm_sq(idx.deg2()))
        .collect();
    Ok((0..n)
        .map(|a| k1[a] * (0..n).map(|b| k2[b] * samples[a * n + b]).sum::<f64>())
        .sum())
}

/// Rewrites power-basis coefficients (lowest first) in the Hermite basis.
pub fn power_to_hermite(power: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); power.len()];
    for (k, c) in power.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (deg, a) in monomial_in_hermite(k) {
            out[deg] += c * a;
        }
    }
    out
}

/// Exact linearization `h_m h_n = sum_k c_k h_k`; zero coefficients omitted.
pub fn product_in_basis(m: usize, n: usize) -> Result<BTreeMap<usize, BigInt>> {
    for d in [m, n] {
        if d > PRODUCT_DEGREE_CAP {
            return Err(Error::DegreeCap { degree: d, cap: PRODUCT_DEGREE_CAP });
        }
    }
    let a = hermite_coeffs(m);
    let b = hermite_coeffs(n);
    let mut prod = vec![BigInt::zero(); m + n + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    // peel the leading monic term repeatedly
    let mut out = BTreeMap::new();
    for k in (0..prod.len()).rev() {
        let c = prod[k].clone();
        if c.is_zero() {
            continue;
        }
        for (deg, hc) in hermite_coeffs(k).iter().enumerate() {
            prod[deg] -= &c * hc;
        }
        out.insert(k, c);
    }
    Ok(out)
}
