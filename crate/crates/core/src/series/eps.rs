//! Truncated series in `eps = e^(-s)` with polynomial coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::poly::Poly2;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Hard cap on the truncation order.
pub const ORDER_CAP: usize = 3;
/// Largest total `y`-degree any coefficient may reach.
pub const DEGREE_CAP: u32 = 4 + 6 * ORDER_CAP as u32;

pub type SPoly = Poly2<Scalar>;

/// `sum_{k <= order} c_k(y) eps^k + O(eps^(order+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSeries {
    order: usize,
    coeffs: Vec<SPoly>,
}

fn check_order(order: usize) -> Result<()> {
    if order > ORDER_CAP {
        return Err(Error::SeriesOrder { order, cap: ORDER_CAP });
    }
    Ok(())
}

fn check_degree(c: &SPoly) -> Result<()> {
    let d = c.degree();
    if d > DEGREE_CAP {
        return Err(Error::DegreeCap { degree: d as usize, cap: DEGREE_CAP as usize });
    }
    Ok(())
}

impl EpsSeries {
    /// Coefficients beyond `order` are dropped; missing ones are zero.
    pub fn new(order: usize, mut coeffs: Vec<SPoly>) -> Result<Self> {
        check_order(order)?;
        coeffs.resize(order + 1, SPoly::zero());
        for c in &coeffs {
            check_degree(c)?;
        }
        Ok(Self { order, coeffs })
    }

    pub fn constant(order: usize, c: SPoly) -> Result<Self> {
        Self::new(order, vec![c])
    }

    pub fn one(order: usize) -> Result<Self> {
        Self::constant(order, SPoly::one())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, k: usize) -> &SPoly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[SPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let coeffs = (0..=order).map(|k| self.coeffs[k].add(&o.coeffs[k])).collect();
        Self { order, coeffs }
    }

    pub fn neg(&self) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let order = self.order.min(o.order);
        let mut coeffs = vec![SPoly::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        for c in &coeffs {
            check_degree(c)?;
        }
        Ok(Self { order, coeffs })
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn map(&self, f: impl Fn(&SPoly) -> SPoly) -> Result<Self> {
        Self::new(self.order, self.coeffs.iter().map(f).collect())
    }

    /// `d/ds`, acting as `eps^k -> -k eps^k`.
    pub fn d_ds(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.scale_rat(&BigRational::from_integer(BigInt::from(-(k as i64)))))
            .collect();
        Self { order: self.order, coeffs }
    }

    pub fn reduce_kappa(&self) -> Self {
        Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c.reduce_kappa()).collect() }
    }

    /// Binomial series `(1 + u)^alpha`, `u = self - 1`, exact in `alpha`.
    ///
    /// `alpha` must be free of `kappa` (e.g. `p`, `1/(p-1)`, `-1/(p-1)`).
    pub fn pow(&self, alpha: &Scalar) -> Result<Self> {
        let alpha = alpha.as_ratfn().ok_or(Error::KappaInExponent)?;
        if self.coeffs[0] != SPoly::one() {
            return Err(Error::NonunitConstant);
        }
        let mut u = self.clone();
        u.coeffs[0] = SPoly::zero();
        let mut out = Self::one(self.order)?;
        let mut upow = Self::one(self.order)?;
        let mut binom = super::ratfn::RatFn::one();
        for k in 1..=self.order {
            // C(alpha, k) = C(alpha, k-1) (alpha - k + 1) / k
            binom = binom
                .mul(&alpha.sub(&super::ratfn::RatFn::int(k as i64 - 1)))
                .mul(&super::ratfn::RatFn::frac(1, k as i64));
            upow = upow.mul(&u)?;
            out = out.add(&upow.scale(&Scalar::from_ratfn(binom.clone())));
        }
        Ok(out)
    }

    /// Numeric value of the truncated sum.
    pub fn eval(&self, y1: f64, y2: f64, s: f64, p: f64, delta: f64) -> f64 {
        let eps = (-s).exp();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.eval(y1, y2, p, delta) * eps.powi(k as i32))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::super::ratfn::RatFn;
    use super::*;

    #[test]
    fn difference_of_squares() {
        let y1 = SPoly::y1();
        let a = EpsSeries::new(2, vec![SPoly::one(), y1.clone()]).unwrap();
        let b = EpsSeries::new(2, vec![SPoly::one(), y1.neg()]).unwrap();
        let want = EpsSeries::new(2, vec![SPoly::one(), SPoly::zero(), y1.mul(&y1).neg()]).unwrap();
        assert_eq!(a.mul(&b).unwrap(), want);
    }

    #[test]
    fn times_zero() {
        let a = EpsSeries::new(2, vec![SPoly::one(), SPoly::y2()]).unwrap();
        let z = EpsSeries::new(2, vec![]).unwrap();
        assert!(a.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn pow_examples() {
        let one = EpsSeries::one(3).unwrap();
        assert_eq!(one.pow(&Scalar::p()).unwrap(), one);
        let h22 = SPoly::hermite2(2, 2);
        let base = EpsSeries::new(1, vec![SPoly::one(), h22.clone()]).unwrap();
        let want = EpsSeries::new(1, vec![SPoly::one(), h22.scale(&Scalar::p())]).unwrap();
        assert_eq!(base.pow(&Scalar::p()).unwrap(), want);
    }

    #[test]
    fn pow_rejects_bad_input() {
        let base = EpsSeries::new(1, vec![SPoly::constant(Scalar::int(2))]).unwrap();
        assert_eq!(base.pow(&Scalar::p()), Err(Error::NonunitConstant));
        let one = EpsSeries::one(1).unwrap();
        assert_eq!(one.pow(&Scalar::kappa_pow(1)), Err(Error::KappaInExponent));
        assert!(EpsSeries::new(4, vec![]).is_err());
    }

    #[test]
    fn second_order_binomial_coefficient() {
        // (1+u)^a with u = u1 eps + u2 eps^2: eps^2 coefficient a(a-1)/2 u1^2 + a u2
        let a = Scalar::from_ratfn(RatFn::pm1_pow(-1).neg());
        let u1 = SPoly::y1();
        let u2 = SPoly::y2().mul(&SPoly::y2());
        let base = EpsSeries::new(2, vec![SPoly::one(), u1.clone(), u2.clone()]).unwrap();
        let got = base.pow(&a).unwrap();
        let half = Scalar::rational(BigRational::new(1.into(), 2.into()));
        let want = u1.mul(&u1).scale(&a.mul(&a.sub(&Scalar::one())).mul(&half)).add(&u2.scale(&a));
        assert_eq!(got.coeff(2), &want);
    }
}
