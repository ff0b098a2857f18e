//! Finite sums `sum r(p, delta) kappa^(m + n(p-1))`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use super::ratfn::RatFn;

/// A finite sum of `r(p, delta) * kappa^(m + n (p-1))` terms keyed by `(m, n)`.
///
/// Terms with `n != 0` arise from raising `kappa` to the power `p`; they are
/// rewritten with `kappa^(p-1) = 1/(p-1)` only by [`Scalar::reduce_kappa`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    terms: BTreeMap<(i32, i32), RatFn>,
}

impl Scalar {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_ratfn(RatFn::one())
    }

    pub fn int(n: i64) -> Self {
        Self::from_ratfn(RatFn::int(n))
    }

    pub fn rational(c: BigRational) -> Self {
        Self::from_ratfn(RatFn::constant(c))
    }

    pub fn from_ratfn(r: RatFn) -> Self {
        Self::term(r, 0, 0)
    }

    /// `r * kappa^(m + n(p-1))`.
    pub fn term(r: RatFn, m: i32, n: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert((m, n), r);
        }
        Self { terms }
    }

    pub fn p() -> Self {
        Self::from_ratfn(RatFn::p())
    }

    pub fn delta() -> Self {
        Self::from_ratfn(RatFn::delta())
    }

    /// `kappa^m`.
    pub fn kappa_pow(m: i32) -> Self {
        Self::term(RatFn::one(), m, 0)
    }

    /// `kappa^p`, unreduced.
    pub fn kappa_to_p() -> Self {
        Self::term(RatFn::one(), 1, 1)
    }

    /// `gamma = (6p - 2)/kappa`.
    pub fn gamma() -> Self {
        Self::term(RatFn::int(6).mul(&RatFn::p()).sub(&RatFn::int(2)), -1, 0)
    }

    pub fn terms(&self) -> &BTreeMap<(i32, i32), RatFn> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient when the scalar is free of `kappa`.
    pub fn as_ratfn(&self) -> Option<RatFn> {
        match self.terms.len() {
            0 => Some(RatFn::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, r) in &o.terms {
            let v = terms.get(k).map(|x| x.add(r)).unwrap_or_else(|| r.clone());
            if v.is_zero() {
                terms.remove(k);
            } else {
                terms.insert(*k, v);
            }
        }
        Self { terms }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, r)| (*k, r.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (&(m1, n1), r1) in &self.terms {
            for (&(m2, n2), r2) in &o.terms {
                out = out.add(&Self::term(r1.mul(r2), m1 + m2, n1 + n2));
            }
        }
        out
    }

    pub fn mul_ratfn(&self, r: &RatFn) -> Self {
        let mut out = Self::zero();
        for (&(m, n), c) in &self.terms {
            out = out.add(&Self::term(c.mul(r), m, n));
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        self.mul_ratfn(&RatFn::constant(c.clone()))
    }

    /// Applies `kappa^(p-1) = 1/(p-1)`: `kappa^(m + n(p-1)) -> (p-1)^(-n) kappa^m`.
    pub fn reduce_kappa(&self) -> Self {
        let mut out = Self::zero();
        for (&(m, n), r) in &self.terms {
            out = out.add(&Self::term(r.mul_pm1_pow(-n), m, 0));
        }
        out
    }

    pub fn eval(&self, p: f64, delta: f64) -> f64 {
        let ln_kappa = -(p - 1.0).ln() / (p - 1.0);
        self.terms
            .iter()
            .map(|(&(m, n), r)| r.eval(p, delta) * (ln_kappa * (m as f64 + n as f64 * (p - 1.0))).exp())
            .sum()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(m, n), r)| {
                let k = match (m, n) {
                    (0, 0) => String::new(),
                    (m, 0) => format!(" kappa^{m}"),
                    (m, n) => format!(" kappa^({m}+{n}(p-1))"),
                };
                let body = r.to_string();
                if k.is_empty() {
                    body
                } else {
                    format!("({body}){k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        // kappa^p -> kappa/(p-1)
        let a = Scalar::kappa_to_p().reduce_kappa();
        assert_eq!(a, Scalar::term(RatFn::pm1_pow(-1), 1, 0));
        // kappa^(p-2) -> 1/((p-1) kappa)
        let b = Scalar::term(RatFn::one(), -1, 1).reduce_kappa();
        assert_eq!(b, Scalar::term(RatFn::pm1_pow(-1), -1, 0));
        // kappa^0 -> 1
        assert_eq!(Scalar::kappa_pow(0).reduce_kappa(), Scalar::one());
    }

    #[test]
    fn reduce_is_not_implicit() {
        let a = Scalar::kappa_to_p();
        assert_ne!(a, Scalar::term(RatFn::pm1_pow(-1), 1, 0));
    }

    #[test]
    fn numeric_kappa() {
        // p = 3: kappa = 2^(-1/2)
        let k = Scalar::kappa_pow(1).eval(3.0, 1.0);
        assert!((k - 0.5f64.sqrt()).abs() < 1e-15);
        let kp = Scalar::kappa_to_p();
        assert!((kp.eval(3.0, 1.0) - kp.reduce_kappa().eval(3.0, 1.0)).abs() < 1e-15);
    }
}
