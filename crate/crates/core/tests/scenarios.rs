use blowup_core::basis::TensorGrid;
use blowup_core::constants::{DESCENT_M, M0, M1, REGION_C};
use blowup_core::dynamics::DynConfig;
use blowup_core::profile::*;
use blowup_core::scenarios::*;
use blowup_core::Error;

fn grid() -> TensorGrid {
    DynConfig::default().grid().unwrap()
}

fn wp() -> Params {
    Params::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn origin_is_in_r3() {
    let l = classify((0.0, 0.0), 12.0, 0.05, 10.0, &wp()).unwrap();
    assert_eq!(l.labels.iter().copied().collect::<Vec<_>>(), vec![Region::R3]);
    assert_eq!(l.g0, 0.0);
}

#[test]
fn boundary_carries_two_labels() {
    let p = wp();
    let s0: f64 = 12.0;
    // G0(t, t) = t^4 + 200 t^6 at p = 2, delta = 100
    let target = 10.0 * (-s0 as f64).exp();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let t = 0.5 * (lo + hi);
        if t.powi(4) + 200.0 * t.powi(6) < target {
            lo = t;
        } else {
            hi = t;
        }
    }
    let t = 0.5 * (lo + hi);
    let l = classify((t, t), s0, 0.05, 10.0, &p).unwrap();
    assert!(l.contains(Region::R1) && l.contains(Region::R2), "{l:?}");
    assert!(!l.contains(Region::R3));
    let a = ray_point((1.0, 0.0), 0.05 * (-s0).exp(), &p);
    let l = classify(a, s0, 0.05, 10.0, &p).unwrap();
    assert!(l.contains(Region::R2) && l.contains(Region::R3), "{l:?}");
}

#[test]
fn classification_is_a_partition() {
    let p = wp();
    let s0: f64 = 12.0;
    for it in 0..=16 {
        let th = std::f64::consts::FRAC_PI_2 * it as f64 / 16.0;
        for k in -40..=40 {
            let lv = 10f64.powf(k as f64 / 10.0) * (-s0 as f64).exp();
            let a = ray_point((th.cos(), th.sin()), lv, &p);
            let l = classify(a, s0, 0.05, 10.0, &p).unwrap();
            assert!(!l.labels.is_empty());
            assert!(!(l.contains(Region::R1) && l.contains(Region::R3)));
        }
    }
}

#[test]
fn classify_preconditions() {
    let p = wp();
    assert!(classify((0.0, 0.0), 12.0, 0.0, 10.0, &p).is_err());
    assert!(classify((0.0, 0.0), 12.0, 1.0, 10.0, &p).is_err());
    assert!(classify((0.0, 0.0), 12.0, 0.05, 0.5, &p).is_err());
}

#[test]
fn region_constant_recomputes() {
    let c = calibrate_region_c(&wp()).unwrap();
    assert!((c - REGION_C).abs() <= 1e-12 * c, "{c:.17e}");
}

#[test]
fn default_big_m_is_admissible() {
    assert!(big_m_admissible(DEFAULT_M_BIG, 2.0));
    assert!(assert_big_m(DEFAULT_M_BIG, 2.0).is_ok());
    // kappa/(1+M) <= max(eps0/2, kappa/(2 M0)) fails for M close to 0
    assert!(assert_big_m(0.1, 2.0).is_err());
}

#[test]
fn region_size_at_origin() {
    let p = wp();
    let r = region_size_check((0.0, 0.0), &p, 0.05, 10.0).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!((r.w0 - eval_phi(0.0, 0.0, p.s0, &p).unwrap()).abs() < 1e-15);
    assert!(rel(r.w0, p.kappa()) < 1e-3);
}

#[test]
fn region_size_deep_r1() {
    let p = wp();
    let big_m = 10.0;
    let a = ray_point((1.0, 2.0), 100.0 * big_m * (-p.s0).exp(), &p);
    let r = region_size_check(a, &p, 0.05, big_m).unwrap();
    assert_eq!(r.label.labels.iter().copied().collect::<Vec<_>>(), vec![Region::R1]);
    assert!(r.passed());
    assert!(r.w0 <= p.kappa() * (1.0 + big_m).powf(-1.0) * 1.1, "{}", r.w0);
}

#[test]
fn region_size_holds_off_the_sweep() {
    for s0 in [11.0, 13.0, 15.0] {
        let p = Params { s0, d: [0.3, 0.2, -0.4, 0.1, -0.2], ..wp() };
        for it in 0..=6 {
            let th = 0.1 + 1.3 * it as f64 / 6.0;
            for lv in [3e-3, 0.03, 0.3, 3.0, 30.0, 300.0] {
                let a = ray_point((th.cos(), th.sin()), lv * (-s0).exp(), &p);
                let r = region_size_check(a, &p, 0.05, 10.0).unwrap();
                assert!(r.passed(), "s0 = {s0}, level {lv}: {r:?}");
            }
        }
    }
}

#[test]
fn w0_decreases_along_the_diagonal() {
    let p = wp();
    let prof = Profile::new(&p);
    let mut prev = f64::INFINITY;
    for k in 0..=400 {
        let t = 0.25 * k as f64;
        let v = prof.w0(t, t).unwrap();
        assert!(v <= prev, "t = {t}");
        prev = v;
    }
}

#[test]
fn zero_probe_with_zero_data() {
    let g = grid();
    let shape = unit_shape(g.nmax, &[(0, 0)]);
    let r = probe_zero_stability(0.0, &shape, 1.0, 2.0, &g, 0.01).unwrap();
    assert!(r.ratios.iter().all(|&x| x == 1.0));
    assert!(r.exponent.is_none());
}

#[test]
fn zero_probe_flat_exponent() {
    let g = grid();
    for p in [1.5, 2.0, 3.0] {
        let shape = unit_shape(g.nmax, &[(0, 0)]);
        let r = probe_zero_stability(0.01, &shape, 4.0, p, &g, 0.01).unwrap();
        let e = r.exponent.unwrap();
        assert!(rel(e, 1.0 / (p - 1.0)) < 0.05, "p = {p}: {e}");
        if p == 2.0 {
            assert!(r.sup_ratio <= M0, "{}", r.sup_ratio);
        }
    }
}

#[test]
fn zero_probe_h2h2_decays_faster_than_flat() {
    let g = grid();
    let flat = probe_zero_stability(0.01, &unit_shape(g.nmax, &[(0, 0)]), 4.0, 2.0, &g, 0.01).unwrap();
    let h22 = probe_zero_stability(0.01, &unit_shape(g.nmax, &[(2, 2)]), 4.0, 2.0, &g, 0.01).unwrap();
    for (a, b) in h22.ratios.iter().zip(&flat.ratios).skip(1) {
        assert!(a <= b, "{a} vs {b}");
    }
}

#[test]
fn zero_probe_preconditions() {
    let g = grid();
    let shape = unit_shape(g.nmax, &[(0, 0)]);
    assert!(matches!(probe_zero_stability(0.2, &shape, 1.0, 2.0, &g, 0.01), Err(Error::Precondition(_))));
    assert!(matches!(probe_zero_stability(-0.2, &shape, 1.0, 2.0, &g, 0.01), Err(Error::Precondition(_))));
}

#[test]
fn m0_recomputes() {
    let g = grid();
    let c = calibrate_m0(2.0, &g).unwrap();
    assert!((c - M0).abs() <= 1e-12 * c, "{c:.17e}");
}

#[test]
fn psi_probe_with_zero_perturbation() {
    let g = grid();
    let p = wp();
    let r = probe_psi_stability(0.0, 0.0, &unit_shape(g.nmax, &[(0, 0)]), 2.0, &p, &g, 0.01).unwrap();
    assert!(r.ratios.iter().all(|&x| x == 0.0));
    assert!(r.distances.iter().all(|&d| d < 1e-4), "{:e}", r.distances.iter().fold(0.0f64, |m, d| m.max(*d)));
}

#[test]
fn psi_probe_bounded_by_m1() {
    let g = grid();
    let p = wp();
    let shape = unit_shape(g.nmax, &[(0, 0)]);
    for sigma in [-3.0, 0.0, 2.0] {
        let eps = 0.5 * psi_prime(sigma, &p).abs() / M1;
        for sign in [1.0, -1.0] {
            let r = probe_psi_stability(sigma, sign * eps, &shape, 5.0, &p, &g, 0.01).unwrap();
            assert!(r.sup_ratio <= M1, "sigma = {sigma}: {}", r.sup_ratio);
            assert!(r.sup_ratio.is_finite());
        }
    }
}

#[test]
fn psi_probe_non_flat_shape() {
    let g = grid();
    let p = wp();
    let shape = unit_shape(g.nmax, &[(2, 0), (0, 2)]);
    let eps = 0.5 * psi_prime(0.0, &p).abs() / M1;
    let r = probe_psi_stability(0.0, eps, &shape, 5.0, &p, &g, 0.01).unwrap();
    assert!(r.sup_ratio <= M1, "{}", r.sup_ratio);
}

#[test]
fn psi_probe_precondition() {
    let g = grid();
    let p = wp();
    let shape = unit_shape(g.nmax, &[(0, 0)]);
    // at sigma = -3, eps must be below |psi'(-3)|/M1 ~ 4.5e-3
    let big = 2.0 * psi_prime(-3.0, &p).abs() / M1;
    assert!(matches!(probe_psi_stability(-3.0, big, &shape, 1.0, &p, &g, 0.01), Err(Error::Precondition(_))));
    let e = (-3.0f64).exp();
    assert!(rel(psi_prime(-3.0, &p).abs(), e / (1.0 + e).powi(2)) < 1e-14);
}

#[test]
fn psi_probe_sup_guard() {
    let g = grid();
    let p = wp();
    // |y| <= 6 sup of this unit shape is about 24
    let shape = unit_shape(g.nmax, &[(12, 4)]);
    let r = probe_psi_stability(-5.0, 0.2, &shape, 1.0, &p, &g, 0.01);
    assert!(matches!(r, Err(Error::Precondition(m)) if m.contains("2 kappa")));
}

#[test]
fn flat_solution_satisfies_the_ode() {
    let g = grid();
    for sigma in [-2.0, 0.0, 1.5] {
        let r = flat_ode_residual(sigma, 3.0, &wp(), &g, 0.01).unwrap();
        assert!(r < 1e-4, "sigma = {sigma}: {r:e}");
    }
}

fn descent_params() -> Params {
    Params { s0: DESCENT_S0, ..wp() }
}

#[test]
fn descent_constant_recomputes() {
    let c = calibrate_descent_m(&wp(), &grid()).unwrap();
    assert!((c - DESCENT_M).abs() <= 1e-12 * c, "{c:.17e}");
}

#[test]
fn descent_time_and_monotone_h00() {
    let g = grid();
    let p = descent_params();
    let r = descent_check(2.0, 18.0, DEFAULT_ETA_STAR, DESCENT_M_SMALL, &p, &g, 0.01).unwrap();
    assert!(r.s_star >= p.s0);
    assert!(rel((r.s_star - p.s0).exp() * r.iota, DEFAULT_ETA_STAR) < 1e-12);
    assert!(r.h00_decreasing());
    assert!(descent_passes(&r), "{}", r.worst_ratio());
}

#[test]
fn descent_preconditions() {
    let g = grid();
    let p = descent_params();
    // K + L below A
    assert!(descent_check(0.0, 10.0, 0.05, 0.04, &p, &g, 0.01).is_err());
    // m not below eta* (p-1)/kappa
    assert!(descent_check(0.0, 20.0, 0.05, 0.05, &p, &g, 0.01).is_err());
    // outside R3
    assert!(descent_check(0.0, 40.0, 0.05, 0.04, &p, &g, 0.01).is_err());
    // s0 = 12: no point with K + L >= 20 is in R3
    assert!(descent_check(10.0, 10.0, 0.05, 0.04, &wp(), &g, 0.01).is_err());
}

#[test]
fn descent_hands_off_to_psi() {
    let g = grid();
    let p = descent_params();
    let r = descent_check(7.0, 13.0, DEFAULT_ETA_STAR, DESCENT_M_SMALL, &p, &g, 0.01).unwrap();
    assert!(rel(eval_psi(r.sigma_star, &p), p.kappa() - DEFAULT_ETA_STAR) < 1e-12);
    let h = handoff(&r, 5.0, &p, &g, 0.01).unwrap();
    assert!(h.bounded(&p), "{}", h.psi.sup_norm);
    assert!(h.precondition, "{} > {}", r.handoff_distance, r.handoff_tolerance);
}

#[test]
fn final_profile_closed_form() {
    let f = final_profile_ode(1.0, 0.1, 0.0, 2.0).unwrap();
    assert!(rel(f.u_start, 5.0) < 1e-14);
    assert!(rel(f.u_end, 10.0) < 1e-8, "{}", f.u_end);
    for p in [1.5, 2.0, 3.0] {
        for k0 in [0.5, 1.0, 5.0] {
            let f = final_profile_ode(k0, 1.3, 1.0, p).unwrap();
            assert!(f.rel_err < 1e-8, "p = {p}, K0 = {k0}: {:e}", f.rel_err);
        }
    }
}

#[test]
fn final_profile_large_k0() {
    let f = final_profile_ode(1e6, 1.0, 0.5, 2.0).unwrap();
    assert!(rel(f.u_end / f.u_start, 1.0) < 2e-6);
}

#[test]
fn final_profile_matches_u_star() {
    for p in [1.5, 2.0, 3.0] {
        let params = Params { p, ..wp() };
        for a in [(0.1, 0.2), (0.3, 0.05), (0.2, 0.2)] {
            let gap = final_vs_u_star(a, 1.0, 5.0, &params).unwrap();
            assert!(gap < 1e-8, "p = {p}, a = {a:?}: {gap:e}");
        }
    }
}

#[test]
fn final_profile_errors() {
    assert!(final_profile_ode(0.0, 1.0, 0.5, 2.0).is_err());
    assert!(final_profile_ode(1.0, 1.0, 1.0, 2.0).is_err());
    assert!(matches!(integrate_power_ode(10.0, 0.0, 1.0, 2.0), Err(Error::BlowupBeforeEnd { .. })));
}

#[test]
fn intermediate_profile_needs_a_trajectory() {
    let g = grid();
    assert!(matches!(intermediate_profile_check(1.0, &[], &wp(), &g), Err(Error::MissingTrajectory)));
}

#[test]
fn intermediate_profile_at_s0() {
    let g = grid();
    let p = wp();
    let st = sample_trajectory(&p, &g, 0.01, &[p.s0]).unwrap();
    let r = intermediate_profile_check(1.0, &st, &p, &g).unwrap();
    let prof = Profile::new(&p);
    let mut direct: f64 = 0.0;
    for k in 0..g.len() {
        let (a, b) = g.point(k);
        let z = (-p.s0).exp() * a * a * b * b + p.delta * (-2.0 * p.s0).exp() * (a.powi(6) + b.powi(6));
        if z < 1.0 {
            direct = direct.max((prof.phi(a, b, p.s0).unwrap() - prof.big_phi(a, b, p.s0)).abs());
        }
    }
    assert!((r.rows[0].sup_error - direct).abs() < 1e-12, "{} vs {direct}", r.rows[0].sup_error);
    // at the origin Phi = kappa
    assert!((prof.big_phi(0.0, 0.0, p.s0) - p.kappa()).abs() < 1e-15);
}

#[test]
fn intermediate_profile_trend() {
    let g = grid();
    let p = wp();
    let s: Vec<f64> = (0..4).map(|k| p.s0 + k as f64).collect();
    let st = sample_trajectory(&p, &g, 0.01, &s).unwrap();
    let r = intermediate_profile_check(1.0, &st, &p, &g).unwrap();
    assert!(r.strictly_decreasing(), "{:?}", r.rows);
}
