use blowup_core::basis::{eigenvalue, TensorGrid};
use blowup_core::constants::*;
use blowup_core::operator::*;
use blowup_core::series::Poly2;
use num_bigint::BigInt;
use num_rational::BigRational;

type RP = Poly2<BigRational>;

fn grid() -> TensorGrid {
    TensorGrid::new(48, 16).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rel_l2(grid: &TensorGrid, a: &SpectralField, b: &SpectralField, scale: f64) -> f64 {
    let d: Vec<f64> = a.samples.as_ref().unwrap().iter().zip(b.samples.as_ref().unwrap()).map(|(x, y)| x - y).collect();
    grid.l2_norm(&d) / scale
}

#[test]
fn spectral_l_examples() {
    let f = SpectralField::mode(16, 4, 2, 1.0);
    assert_eq!(apply_l_spectral(&f).get(4, 2), -2.0);
    assert_eq!(apply_l_spectral(&SpectralField::mode(16, 2, 0, 3.0)).get(2, 0), 0.0);
    assert_eq!(apply_l_spectral(&SpectralField::mode(16, 0, 0, 1.5)).get(0, 0), 1.5);
}

#[test]
fn poly_l_examples() {
    assert_eq!(apply_l_poly(&RP::one()), RP::one());
    let y1sq = RP::y1().mul(&RP::y1());
    assert_eq!(apply_l_poly(&y1sq), RP::constant(rat(2, 1)));
    // same through the Hermite route: y1^2 = h2 + 2 h0
    let via = RP::hermite(2, 0).scale(&rat(0, 1)).add(&RP::constant(rat(2, 1)));
    assert_eq!(apply_l_poly(&y1sq), via);
    let h6 = RP::hermite(6, 0);
    assert_eq!(apply_l_poly(&h6), h6.scale(&rat(-2, 1)));
}

#[test]
fn poly_and_spectral_routes_agree_exactly() {
    for i in 0..=12usize {
        for j in 0..=i {
            let (n1, n2) = (i - j, j);
            let lam = rat(2 - i as i64, 2);
            let h = RP::hermite2(n1, n2);
            assert_eq!(apply_l_poly(&h), h.scale(&lam), "({n1},{n2})");
            assert_eq!(eigenvalue(n1, n2), 1.0 - i as f64 / 2.0);
        }
    }
}

#[test]
fn mehler_examples() {
    let g = grid();
    let one = SpectralField::mode(16, 0, 0, 1.0).with_samples(&g);
    let out = mehler_apply(&one, &g, 1.0).unwrap();
    for v in out.samples.as_ref().unwrap() {
        assert!((v - 1f64.exp()).abs() <= 1e-8);
    }
    let h22 = SpectralField::mode(16, 2, 2, 1.0).with_samples(&g);
    let out = mehler_apply(&h22, &g, 1.0).unwrap();
    assert!((out.get(2, 2) - (-1f64).exp()).abs() <= 1e-6 * (-1f64).exp());
    let h10 = SpectralField::mode(16, 1, 0, 1.0).with_samples(&g);
    let out = mehler_apply(&h10, &g, 2.0).unwrap();
    assert!((out.get(1, 0) - 1f64.exp()).abs() <= 1e-6 * 1f64.exp());
}

#[test]
fn mehler_rejects_bad_times() {
    let g = grid();
    let f = SpectralField::mode(16, 0, 0, 1.0).with_samples(&g);
    assert!(mehler_apply(&f, &g, 0.0).is_err());
    assert!(mehler_apply(&f, &g, -1.0).is_err());
    assert!(mehler_apply(&f, &g, 5e-4).is_err());
    assert!(mehler_apply(&SpectralField::mode(16, 0, 0, 1.0), &g, 1.0).is_err());
}

#[test]
fn eigen_decay_both_routes() {
    let g = grid();
    for s in [0.5, 1.0, 2.0] {
        for i in 0..=8usize {
            for j in 0..=i {
                let (n1, n2) = (i - j, j);
                let f = SpectralField::mode(16, n1, n2, 1.0).with_samples(&g);
                let want = exp_l_spectral(&f, s).with_samples(&g);
                let norm = f.l2_norm_spectral();
                let a = mehler_apply(&f, &g, s).unwrap();
                let b = mehler_apply_closure(&f, &g, s).unwrap();
                assert!(rel_l2(&g, &a, &want, norm) <= 1e-6, "quad ({n1},{n2}) s={s}");
                assert!(rel_l2(&g, &b, &want, norm) <= 1e-6, "closure ({n1},{n2}) s={s}");
            }
        }
    }
}

#[test]
fn semigroup_composition() {
    let g = grid();
    let fam = random_family(16, 8, 4, 5);
    for f in fam {
        let f = f.with_samples(&g);
        let norm = f.l2_norm_spectral();
        for s1 in [0.5, 1.0] {
            for s2 in [0.5, 1.0] {
                let twice = mehler_apply(&mehler_apply(&f, &g, s1).unwrap(), &g, s2).unwrap();
                let once = mehler_apply(&f, &g, s1 + s2).unwrap();
                let scale = norm * (s1 + s2 as f64).exp();
                assert!(rel_l2(&g, &twice, &once, scale) <= 1e-6);
            }
        }
    }
}

#[test]
fn mehler_preserves_positivity() {
    let g = grid();
    // a nonnegative non-polynomial field
    let samples = g.sample(|a, b| (a - 1.0).powi(2) * (-(b * b) / 3.0).exp() + (a * b).sin().abs());
    let f = SpectralField::from_samples(&g, samples);
    for s in [0.01, 0.5, 3.0] {
        let out = mehler_apply(&f, &g, s).unwrap();
        assert!(out.samples.unwrap().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn samples_and_coeffs_agree_for_polynomials() {
    let g = grid();
    for f in random_family(16, 16, 3, 9) {
        let back = SpectralField::from_samples(&g, f.clone().with_samples(&g).samples.unwrap());
        for (a, b) in back.coeffs.iter().zip(&f.coeffs) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn regularizing_constant_recomputes() {
    let g = grid();
    let fam = random_family(16, 8, REGULARIZING_FAMILY, REGULARIZING_SEED);
    let mut c: f64 = 0.0;
    for s in REGULARIZING_SWEEP {
        c = c.max(calibrate_regularizing(2.0, 4.0, s, &fam, &g).unwrap());
    }
    assert!((c - REGULARIZING_C_2_4).abs() <= 1e-12 * c, "{c:e}");
}

#[test]
fn regularizing_bound_shape_holds_off_the_sweep() {
    let g = grid();
    let fam = random_family(16, 8, REGULARIZING_FAMILY, REGULARIZING_SEED);
    for s in [1.3, 2.5, 5.0, 10.0] {
        for f in &fam {
            let chk = check_regularizing(2.0, 4.0, s, f, &g, REGULARIZING_C_2_4).unwrap();
            assert!(chk.pass, "{chk:?}");
        }
    }
}

#[test]
fn regularizing_examples() {
    let g = grid();
    let f = &random_family(16, 8, 1, 77)[0];
    let r = regularizing_ratio(2.0, 4.0, 1.2, f, &g).unwrap();
    assert!(r.is_finite() && r > 0.0);
    let c = SpectralField::mode(16, 0, 0, 0.7);
    for s in [1.2, 2.0] {
        let r = regularizing_ratio(2.0, 4.0, s, &c, &g).unwrap();
        assert!((r / s.exp() - 1.0).abs() < 1e-12);
    }
    let mut prev = f64::INFINITY;
    for s in [1.2, 1.5, 2.0, 3.0] {
        let r = regularizing_ratio(2.0, 4.0, s, f, &g).unwrap() / s.exp();
        assert!(r <= prev);
        prev = r;
    }
    assert!(regularizing_ratio(2.0, 4.0, 1.0, f, &g).is_err());
    assert!(regularizing_ratio(1.5, 4.0, 2.0, f, &g).is_err());
    assert!(regularizing_ratio(3.0, 3.0, 2.0, f, &g).is_err());
}

#[test]
fn symmetric_flag_check() {
    let mut f = SpectralField::zero(16);
    f.set(2, 4, 1.0);
    f.set(4, 2, 1.0);
    assert!(f.check_symmetric(1e-12));
    f.set(1, 0, 1e-3);
    assert!(!f.check_symmetric(1e-12));
}
