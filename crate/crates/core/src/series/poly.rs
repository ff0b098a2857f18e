//! Sparse bivariate polynomials in `(y1, y2)` over an exact coefficient ring.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::scalar::Scalar;
use crate::basis::{hermite_coeffs, monomial_in_hermite};

/// Exact coefficient ring for [`Poly2`].
pub trait Coef: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &BigRational) -> Self;
}

impl Coef for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &BigRational) -> Self {
        self * c
    }
}

impl Coef for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn scale(&self, c: &BigRational) -> Self {
        Scalar::scale(self, c)
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `sum c[(a, b)] y1^a y2^b`, zero coefficients removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<C: Coef> {
    terms: BTreeMap<(u32, u32), C>,
}

/// Coefficients in the tensor Hermite basis, keyed by degrees `(n1, n2)`.
pub type HermiteMap<C> = BTreeMap<(u32, u32), C>;

impl<C: Coef> Poly2<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn monomial(a: u32, b: u32, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    pub fn y1() -> Self {
        Self::monomial(1, 0, C::one())
    }

    pub fn y2() -> Self {
        Self::monomial(0, 1, C::one())
    }

    /// `h_n(y1)` (`var = 0`) or `h_n(y2)` (`var = 1`).
    pub fn hermite(n: usize, var: usize) -> Self {
        let mut out = Self::zero();
        for (k, c) in hermite_coeffs(n).iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cc = C::one().scale(&BigRational::from_integer(c.clone()));
            let (a, b) = if var == 0 { (k as u32, 0) } else { (0, k as u32) };
            out = out.add(&Self::monomial(a, b, cc));
        }
        out
    }

    /// `h_{n1}(y1) h_{n2}(y2)`.
    pub fn hermite2(n1: usize, n2: usize) -> Self {
        Self::hermite(n1, 0).mul(&Self::hermite(n2, 1))
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), C> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn coeff(&self, a: u32, b: u32) -> C {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(C::zero)
    }

    fn insert_add(terms: &mut BTreeMap<(u32, u32), C>, key: (u32, u32), c: &C) {
        let v = match terms.get(&key) {
            Some(x) => x.add(c),
            None => c.clone(),
        };
        if v.is_zero() {
            terms.remove(&key);
        } else {
            terms.insert(key, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            Self::insert_add(&mut terms, *k, c);
        }
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                Self::insert_add(&mut terms, (a1 + a2, b1 + b2), &c1.mul(c2));
            }
        }
        Self { terms }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let x = v.mul(c);
            if !x.is_zero() {
                terms.insert(*k, x);
            }
        }
        Self { terms }
    }

    pub fn scale_rat(&self, c: &BigRational) -> Self {
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let x = v.scale(c);
            if !x.is_zero() {
                terms.insert(*k, x);
            }
        }
        Self { terms }
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let x = f(v);
            if !x.is_zero() {
                terms.insert(*k, x);
            }
        }
        Self { terms }
    }

    /// Partial derivative in `y1` (`var = 0`) or `y2` (`var = 1`).
    pub fn diff(&self, var: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            let e = if var == 0 { a } else { b };
            if e == 0 {
                continue;
            }
            let key = if var == 0 { (a - 1, b) } else { (a, b - 1) };
            Self::insert_add(&mut terms, key, &c.scale(&rat(e as i64)));
        }
        Self { terms }
    }

    pub fn laplacian(&self) -> Self {
        self.diff(0).diff(0).add(&self.diff(1).diff(1))
    }

    /// `Delta q - (1/2) y . grad q + q`, term by term.
    pub fn apply_l(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            if a >= 2 {
                Self::insert_add(&mut terms, (a - 2, b), &c.scale(&rat((a * (a - 1)) as i64)));
            }
            if b >= 2 {
                Self::insert_add(&mut terms, (a, b - 2), &c.scale(&rat((b * (b - 1)) as i64)));
            }
            // -(a+b)/2 + 1
            let f = BigRational::new(BigInt::from(2 - (a + b) as i64), BigInt::from(2));
            Self::insert_add(&mut terms, (a, b), &c.scale(&f));
        }
        Self { terms }
    }

    /// Rewrites the polynomial in the tensor Hermite basis.
    pub fn to_hermite(&self) -> HermiteMap<C> {
        let mut out: HermiteMap<C> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            for (ka, ca) in monomial_in_hermite(a as usize) {
                for (kb, cb) in monomial_in_hermite(b as usize) {
                    let f = BigRational::from_integer(ca.clone() * cb);
                    let key = (ka as u32, kb as u32);
                    let v = match out.get(&key) {
                        Some(x) => x.add(&c.scale(&f)),
                        None => c.scale(&f),
                    };
                    if v.is_zero() {
                        out.remove(&key);
                    } else {
                        out.insert(key, v);
                    }
                }
            }
        }
        out
    }

    pub fn from_hermite(map: &HermiteMap<C>) -> Self {
        let mut out = Self::zero();
        for (&(n1, n2), c) in map {
            out = out.add(&Self::hermite2(n1 as usize, n2 as usize).scale(c));
        }
        out
    }

    /// Evaluates with a numeric reading of the coefficients.
    pub fn eval_with(&self, y1: f64, y2: f64, coef: impl Fn(&C) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| coef(c) * y1.powi(a as i32) * y2.powi(b as i32))
            .sum()
    }
}

impl Poly2<BigRational> {
    pub fn eval(&self, y1: f64, y2: f64) -> f64 {
        self.eval_with(y1, y2, |c| c.to_f64().unwrap_or(f64::NAN))
    }
}

impl Poly2<Scalar> {
    pub fn eval(&self, y1: f64, y2: f64, p: f64, delta: f64) -> f64 {
        self.eval_with(y1, y2, |c| c.eval(p, delta))
    }

    pub fn reduce_kappa(&self) -> Self {
        self.map_coeffs(|c| c.reduce_kappa())
    }
}
