use blowup_core::series::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

type RP = Poly2<BigRational>;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn kappa_free_at(poly: &SPoly, p: &BigRational, delta: &BigRational) -> RP {
    let mut out = RP::zero();
    for (&(a, b), c) in poly.terms() {
        let r = c.as_ratfn().expect("kappa-free coefficient");
        out = out.add(&RP::monomial(a, b, r.eval_exact(p, delta)));
    }
    out
}

fn truncated_mul(a: &[RP], b: &[RP], order: usize) -> Vec<RP> {
    let mut out = vec![RP::zero(); order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
        }
    }
    out
}

#[test]
fn profile_leading_coefficients() {
    let phi = expand_profile(2).unwrap();
    assert_eq!(phi.coeff(0), &SPoly::constant(Scalar::kappa_pow(1)));
    let c1 = phi.coeff(1).to_hermite();
    assert_eq!(c1.get(&(2, 2)), Some(&Scalar::int(-1)));
    assert_eq!(c1.len(), 1);
    let c2 = phi.coeff(2).to_hermite();
    assert_eq!(c2[&(4, 4)], Scalar::term(RatFn::p().mul(&RatFn::frac(1, 2)), -1, 0));
    assert_eq!(c2[&(6, 0)], Scalar::delta().neg());
    assert_eq!(c2[&(0, 6)], Scalar::delta().neg());
}

#[test]
fn remainder_vanishes_below_second_order() {
    let r = expand_remainder(2).unwrap();
    assert!(r.coeff(0).is_zero());
    assert!(r.coeff(1).is_zero());
    let c2 = r.coeff(2).to_hermite();
    let four_p_over_kappa = Scalar::term(RatFn::p().mul(&RatFn::int(4)), -1, 0);
    assert_eq!(c2[&(4, 2)], four_p_over_kappa);
    assert!(expand_remainder(3).is_err());
}

#[test]
fn full_certificate_passes() {
    let t = std::time::Instant::now();
    let cert = certify(2, &Scalar::gamma()).unwrap();
    assert!(cert.passed(), "{}", cert.render());
    assert_eq!(cert.checks.iter().filter(|c| c.order == 2 && c.label != "no other modes").count(), 8);
    assert!(t.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn order_zero_certificate_only_checks_constants() {
    let cert = certify(0, &Scalar::gamma()).unwrap();
    assert!(cert.passed());
    assert!(cert.checks.iter().all(|c| c.order == 0));
}

#[test]
fn tampered_gamma_fails_only_on_cross_terms() {
    let cert = certify(2, &Scalar::gamma().add(&Scalar::one())).unwrap();
    let fails = cert.failures();
    assert_eq!(fails.len(), 1);
    assert_eq!(fails[0].label, "gamma (h4h2 + h2h4)");
    // in the power basis the y1^4 y2^2 terms of Q no longer cancel
    let q = blowup_core::series::expand::poly_q(&Scalar::gamma());
    assert!(q.coeff(4, 2).is_zero());
    let tampered = blowup_core::series::expand::poly_q(&Scalar::gamma().add(&Scalar::one()));
    assert!(!tampered.coeff(4, 2).is_zero());
}

#[test]
fn p_simplifies_to_quadratic() {
    // P = 2(p-1)/kappa (y1^2 + y2^2 - 2)
    let p = blowup_core::series::expand::poly_p();
    let c = Scalar::term(RatFn::pm1().mul(&RatFn::int(2)), -1, 0);
    let y1 = SPoly::y1();
    let y2 = SPoly::y2();
    let want = y1.mul(&y1).add(&y2.mul(&y2)).sub(&SPoly::constant(Scalar::int(2))).scale(&c);
    assert_eq!(p, want);
}

#[test]
fn square_of_one_plus_eps_p() {
    let pp = blowup_core::series::expand::poly_p();
    let a = EpsSeries::new(2, vec![SPoly::one(), pp.clone()]).unwrap();
    let sq = a.mul(&a).unwrap();
    // direct expansion: 1 + 2 eps P + eps^2 P^2
    assert_eq!(sq.coeff(0), &SPoly::one());
    assert_eq!(sq.coeff(1), &pp.add(&pp));
    assert_eq!(sq.coeff(2), &pp.mul(&pp));
}

#[test]
fn negative_inverse_power_recovers_reciprocal() {
    // (1+u)^(-1/(p-1)) raised to the (p-1)-fold product equals 1/(1+u)
    let u1 = SPoly::y1().mul(&SPoly::y2()).add(&SPoly::constant(Scalar::int(3)));
    let u2 = SPoly::hermite2(2, 0).scale(&Scalar::delta());
    let u3 = SPoly::y2();
    let base = EpsSeries::new(3, vec![SPoly::one(), u1, u2, u3]).unwrap();
    let alpha = Scalar::from_ratfn(RatFn::pm1_pow(-1).neg());
    let root = base.pow(&alpha).unwrap();
    let delta = BigRational::new(7.into(), 3.into());
    for pint in 2..=6i64 {
        let p = q(pint);
        let r: Vec<RP> = root.coeffs().iter().map(|c| kappa_free_at(c, &p, &delta)).collect();
        let mut prod = vec![RP::one(), RP::zero(), RP::zero(), RP::zero()];
        for _ in 0..(pint - 1) {
            prod = truncated_mul(&prod, &r, 3);
        }
        // reciprocal by the recursion b_k = -sum_j u_j b_(k-j)
        let u: Vec<RP> = base.coeffs().iter().map(|c| kappa_free_at(c, &p, &delta)).collect();
        let mut want = vec![RP::one()];
        for k in 1..=3 {
            let mut b = RP::zero();
            for j in 1..=k {
                b = b.sub(&u[j].mul(&want[k - j]));
            }
            want.push(b);
        }
        assert_eq!(prod, want, "p = {pint}");
    }
}

#[test]
fn reduce_kappa_examples() {
    assert_eq!(reduce_kappa(&Scalar::kappa_to_p()), Scalar::term(RatFn::pm1_pow(-1), 1, 0));
    assert_eq!(reduce_kappa(&Scalar::term(RatFn::one(), -1, 1)), Scalar::term(RatFn::pm1_pow(-1), -1, 0));
    assert_eq!(reduce_kappa(&Scalar::kappa_pow(0)), Scalar::one());
    // pure integer powers untouched
    assert_eq!(reduce_kappa(&Scalar::kappa_pow(3)), Scalar::kappa_pow(3));
}

#[test]
fn remainder_rate_numeric_cross_check() {
    // the truncated remainder series scales like e^(-2s)
    let r = expand_remainder(2).unwrap();
    for &(y1, y2) in &[(0.0, 0.0), (1.0, 0.5), (2.0, -1.5)] {
        let a = r.eval(y1, y2, 12.0, 2.0, 100.0);
        let b = r.eval(y1, y2, 14.0, 2.0, 100.0);
        assert!(((a / b).ln() / 2.0 - 2.0).abs() < 1e-9);
    }
}

fn small_poly() -> impl Strategy<Value = SPoly> {
    prop::collection::vec((0u32..3, 0u32..3, -5i64..5), 0..4).prop_map(|terms| {
        terms.into_iter().fold(SPoly::zero(), |acc, (a, b, c)| {
            acc.add(&SPoly::monomial(a, b, Scalar::int(c).mul(&Scalar::p())))
        })
    })
}

fn small_series() -> impl Strategy<Value = EpsSeries> {
    prop::collection::vec(small_poly(), 3).prop_map(|c| EpsSeries::new(2, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mul_commutes(a in small_series(), b in small_series()) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn mul_associates(a in small_series(), b in small_series(), c in small_series()) {
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn distributes(a in small_series(), b in small_series(), c in small_series()) {
        let lhs = a.mul(&b.add(&c)).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn l_commutes_with_hermite_route(n1 in 0usize..8, n2 in 0usize..8) {
        let h = SPoly::hermite2(n1, n2);
        let lam = BigRational::new(BigInt::from(2 - (n1 + n2) as i64), BigInt::from(2));
        prop_assert_eq!(h.apply_l(), h.scale_rat(&lam));
    }
}
