//! Rational functions of the formal symbols `p` and `delta` whose
//! denominators are powers of `p - 1`.
//!
//! Every scalar that occurs in the profile and remainder expansions lives in
//! this ring: the binomial coefficients of `1/(p-1)`, `-1/(p-1)` and `p`
//! only ever divide by integers and by `p - 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `num(p, delta) / (p - 1)^den`, kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFn {
    /// `(p exponent, delta exponent) -> coefficient`, zero entries removed
    num: BTreeMap<(u32, u32), BigRational>,
    den: u32,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RatFn {
    pub fn zero() -> Self {
        Self { num: BTreeMap::new(), den: 0 }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut num = BTreeMap::new();
        if !c.is_zero() {
            num.insert((0, 0), c);
        }
        Self { num, den: 0 }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::constant(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// The symbol `p`.
    pub fn p() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    /// The symbol `delta`.
    pub fn delta() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    /// `p - 1`.
    pub fn pm1() -> Self {
        Self::p().sub(&Self::one())
    }

    /// `(p - 1)^k` for any integer `k`.
    pub fn pm1_pow(k: i32) -> Self {
        if k >= 0 {
            (0..k).fold(Self::one(), |acc, _| acc.mul(&Self::pm1()))
        } else {
            Self { num: Self::one().num, den: (-k) as u32 }
        }
    }

    pub fn monomial(pe: u32, de: u32, c: BigRational) -> Self {
        let mut num = BTreeMap::new();
        if !c.is_zero() {
            num.insert((pe, de), c);
        }
        Self { num, den: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// Power of `p - 1` in the denominator after reduction.
    pub fn den_power(&self) -> u32 {
        self.den
    }

    pub fn numerator(&self) -> &BTreeMap<(u32, u32), BigRational> {
        &self.num
    }

    fn from_parts(num: BTreeMap<(u32, u32), BigRational>, den: u32) -> Self {
        let mut r = Self { num, den };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        self.num.retain(|_, c| !c.is_zero());
        if self.num.is_empty() {
            self.den = 0;
            return;
        }
        while self.den > 0 {
            match divide_by_pm1(&self.num) {
                Some(q) => {
                    self.num = q;
                    self.den -= 1;
                }
                None => break,
            }
        }
    }

    fn num_times_pm1_pow(num: &BTreeMap<(u32, u32), BigRational>, k: u32) -> BTreeMap<(u32, u32), BigRational> {
        let mut out = num.clone();
        for _ in 0..k {
            let mut next: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
            for (&(pe, de), c) in &out {
                *next.entry((pe + 1, de)).or_insert_with(BigRational::zero) += c;
                *next.entry((pe, de)).or_insert_with(BigRational::zero) -= c;
            }
            next.retain(|_, c| !c.is_zero());
            out = next;
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let den = self.den.max(o.den);
        let mut num = Self::num_times_pm1_pow(&self.num, den - self.den);
        for (k, c) in Self::num_times_pm1_pow(&o.num, den - o.den) {
            *num.entry(k).or_insert_with(BigRational::zero) += c;
        }
        Self::from_parts(num, den)
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.iter().map(|(k, c)| (*k, -c)).collect(), den: self.den }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut num: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
        for (&(a1, b1), c1) in &self.num {
            for (&(a2, b2), c2) in &o.num {
                *num.entry((a1 + a2, b1 + b2)).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        Self::from_parts(num, self.den + o.den)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_parts(self.num.iter().map(|(k, v)| (*k, v * c)).collect(), self.den)
    }

    /// Multiplies by `(p - 1)^k`.
    pub fn mul_pm1_pow(&self, k: i32) -> Self {
        if k >= 0 {
            Self::from_parts(Self::num_times_pm1_pow(&self.num, k as u32), self.den)
        } else {
            Self::from_parts(self.num.clone(), self.den + (-k) as u32)
        }
    }

    pub fn eval(&self, p: f64, delta: f64) -> f64 {
        let n: f64 = self
            .num
            .iter()
            .map(|(&(pe, de), c)| c.to_f64().unwrap_or(f64::NAN) * p.powi(pe as i32) * delta.powi(de as i32))
            .sum();
        n / (p - 1.0).powi(self.den as i32)
    }

    /// Exact value at rational `p != 1` and `delta`.
    pub fn eval_exact(&self, p: &BigRational, delta: &BigRational) -> BigRational {
        let mut n = BigRational::zero();
        for (&(pe, de), c) in &self.num {
            n += c * num_traits::pow(p.clone(), pe as usize) * num_traits::pow(delta.clone(), de as usize);
        }
        n / num_traits::pow(p - BigRational::one(), self.den as usize)
    }
}

/// `num / (p - 1)` if exact, treating `num` as a polynomial in `p` with
/// coefficients in `Q[delta]`.
fn divide_by_pm1(num: &BTreeMap<(u32, u32), BigRational>) -> Option<BTreeMap<(u32, u32), BigRational>> {
    let mut by_delta: BTreeMap<u32, BTreeMap<u32, BigRational>> = BTreeMap::new();
    for (&(pe, de), c) in num {
        by_delta.entry(de).or_default().insert(pe, c.clone());
    }
    let mut out = BTreeMap::new();
    for (de, coeffs) in by_delta {
        let deg = *coeffs.keys().next_back().expect("nonempty");
        let total: BigRational = coeffs.values().cloned().sum();
        if !total.is_zero() {
            return None;
        }
        // synthetic division by (p - 1), top down
        let mut carry = BigRational::zero();
        for k in (1..=deg).rev() {
            carry += coeffs.get(&k).cloned().unwrap_or_else(BigRational::zero);
            if !carry.is_zero() {
                out.insert((k - 1, de), carry.clone());
            }
        }
    }
    Some(out)
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.to_integer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (&(pe, de), c) in self.num.iter().rev() {
            let mut s = String::new();
            let sym = |e: u32, name: &str| match e {
                0 => String::new(),
                1 => name.to_string(),
                _ => format!("{name}^{e}"),
            };
            let syms: Vec<String> = [sym(pe, "p"), sym(de, "delta")].into_iter().filter(|x| !x.is_empty()).collect();
            let mag = c.abs();
            if syms.is_empty() || !mag.is_one() {
                s.push_str(&fmt_rational(&mag));
                if !syms.is_empty() {
                    s.push('*');
                }
            }
            s.push_str(&syms.join("*"));
            parts.push((c.is_negative(), s));
        }
        let mut out = String::new();
        for (k, (neg, s)) in parts.iter().enumerate() {
            if k == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(s);
        }
        if self.den > 0 {
            if parts.len() > 1 {
                out = format!("({out})");
            }
            out.push_str(&format!("/(p-1)^{}", self.den));
        }
        write!(f, "{out}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_common_factor() {
        // (p^2 - 1)/(p - 1) = p + 1
        let x = RatFn::p().mul(&RatFn::p()).sub(&RatFn::one()).mul_pm1_pow(-1);
        assert_eq!(x, RatFn::p().add(&RatFn::one()));
        assert_eq!(x.den_power(), 0);
    }

    #[test]
    fn inverse_cancels() {
        let a = RatFn::pm1_pow(-3).mul(&RatFn::pm1_pow(3));
        assert!(a.is_one());
        let b = RatFn::pm1_pow(-2).add(&RatFn::pm1_pow(-2).neg());
        assert!(b.is_zero());
    }

    #[test]
    fn display_is_readable() {
        let x = RatFn::int(32).mul(&RatFn::p());
        assert_eq!(x.to_string(), "32*p");
        let y = RatFn::delta().neg().mul_pm1_pow(-1);
        assert_eq!(y.to_string(), "-delta/(p-1)^1");
    }

    #[test]
    fn eval_matches_exact() {
        let x = RatFn::p().mul(&RatFn::delta()).add(&RatFn::int(3)).mul_pm1_pow(-2);
        let p = BigRational::new(BigInt::from(5), BigInt::from(2));
        let d = BigRational::from_integer(BigInt::from(7));
        let exact = x.eval_exact(&p, &d);
        assert_eq!(exact, BigRational::new(BigInt::from(82), BigInt::from(9)));
        assert!((x.eval(2.5, 7.0) - 82.0 / 9.0).abs() < 1e-13);
    }
}
