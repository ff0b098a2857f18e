use blowup_core::basis::{eigenvalue, hermite_norm_sq, HermiteIndex, TensorGrid};
use blowup_core::constants::{FLATNESS_C, RESOLVED_RADIUS, WA_C, WA_M, WA_S0};
use blowup_core::dynamics::*;
use blowup_core::operator::SpectralField;
use blowup_core::profile::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> TensorGrid {
    DynConfig::default().grid().unwrap()
}

fn wp() -> Params {
    Params::default()
}

fn mode_state(g: &TensorGrid, s: f64, modes: &[(usize, usize, f64)]) -> SpectralState {
    let mut f = SpectralField::zero(g.nmax);
    for &(a, b, c) in modes {
        f.set(a, b, c);
    }
    SpectralState { s, field: f.with_samples(g) }
}

/// `q(s0) = psi(s0) - phi(., s0)`, the flat solution written as a perturbation.
fn psi_state<'a>(g: &'a TensorGrid, p: &Params, ds: f64) -> (Integrator<'a, QForce>, SpectralState) {
    let integ = Integrator::new(g, QForce::new(p, g, Terms::FULL), ds).unwrap();
    let prof = Profile::new(p);
    let psi = eval_psi(p.s0, p);
    let samples = (0..g.len())
        .map(|k| {
            let (a, b) = g.point(k);
            psi - prof.phi(a, b, p.s0).unwrap()
        })
        .collect();
    let mut st = integ.state_from_samples(p.s0, samples);
    st.field.symmetric = true;
    (integ, st)
}

#[test]
fn zero_state_stays_zero_without_forcing() {
    let g = grid();
    let integ = Integrator::new(&g, QForce::new(&wp(), &g, Terms::LINEAR), 0.01).unwrap();
    let st = mode_state(&g, 12.0, &[]);
    let end = integ.run(st, 13.0, |_| true).unwrap();
    assert!(end.field.coeffs.iter().all(|&c| c == 0.0));
    assert!((end.s - 13.0).abs() < 1e-9);
}

#[test]
fn step_rejects_bad_ds() {
    let g = grid();
    assert!(Integrator::new(&g, LinearOnly, 0.0).is_err());
    assert!(Integrator::new(&g, LinearOnly, 0.2).is_err());
    assert!(Integrator::new(&g, LinearOnly, 0.1).is_ok());
}

#[test]
fn h6h0_decays_like_its_eigenvalue() {
    let g = grid();
    let integ = Integrator::new(&g, LinearOnly, 0.01).unwrap();
    let end = integ.run(mode_state(&g, 12.0, &[(6, 0, 1.0)]), 13.0, |_| true).unwrap();
    let ratio = end.coeff(6, 0) / (-2.0f64).exp();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn linear_eigen_decay_all_low_modes() {
    let g = grid();
    let integ = Integrator::new(&g, LinearOnly, 0.01).unwrap();
    for n1 in 0..=8 {
        for n2 in 0..=8 - n1 {
            let st = mode_state(&g, 0.0, &[(n1, n2, 1.0)]);
            let end = integ.run(st, 1.0, |_| true).unwrap();
            let rate = end.coeff(n1, n2).ln();
            let lam = eigenvalue(n1, n2);
            let err = if lam == 0.0 { rate.abs() } else { (rate / lam - 1.0).abs() };
            assert!(err < 0.01, "({n1},{n2}) rate {rate} vs {lam}");
        }
    }
}

#[test]
fn flat_solution_is_tracked_in_the_resolved_core() {
    let g = grid();
    let p = wp();
    let (integ, st) = psi_state(&g, &p, 0.01);
    let frame = QForce::new(&p, &g, Terms::FULL);
    let core: Vec<usize> = (0..g.len())
        .filter(|&k| {
            let (a, b) = g.point(k);
            a.hypot(b) <= RESOLVED_RADIUS
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut check = |st: &SpectralState| {
        let fr = frame.frame(st.s).unwrap();
        let psi = eval_psi(st.s, &p);
        let q = st.samples();
        for &k in &core {
            worst = worst.max((q[k] + fr[k].0 - psi).abs());
        }
    };
    check(&st);
    integ
        .run(st, p.s0 + 3.0, |s| {
            check(s);
            true
        })
        .unwrap();
    assert!(worst <= 1e-4, "sup error {worst:e}");
}

#[test]
fn integrator_is_second_order() {
    let g = grid();
    let p = wp();
    let end = |ds: f64| {
        let (integ, st) = psi_state(&g, &p, ds);
        integ.run(st, p.s0 + 1.0, |_| true).unwrap()
    };
    let reference = end(0.0025);
    let err = |st: &SpectralState| {
        let d: Vec<f64> = st.samples().iter().zip(reference.samples()).map(|(a, b)| a - b).collect();
        g.l2_norm(&d)
    };
    let e1 = err(&end(0.02));
    let e2 = err(&end(0.01));
    let ratio = e1 / e2;
    assert!(ratio >= 3.5, "{e1:e} / {e2:e} = {ratio}");
}

#[test]
fn odd_modes_stay_zero() {
    let g = grid();
    let p = wp();
    let (integ, st) = psi_state(&g, &p, 0.01);
    let m = g.nmax + 1;
    let mut worst: f64 = 0.0;
    integ
        .run(st, p.s0 + 1.0, |s| {
            for n1 in 0..m {
                for n2 in 0..m - n1 {
                    if n1 % 2 == 1 || n2 % 2 == 1 {
                        worst = worst.max(s.coeff(n1, n2).abs());
                    }
                }
            }
            true
        })
        .unwrap();
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn initial_data_with_zero_d_is_zero() {
    let g = grid();
    let st = build_initial(&wp(), &g).unwrap();
    assert!(g.l2_norm(st.samples()) <= 1e-12);
    assert!(st.field.symmetric);
}

#[test]
fn initial_q00_carries_d00() {
    let g = grid();
    let p = wp().with_d([1.0, 0.0, 0.0, 0.0, 0.0]);
    let st = build_initial(&p, &g).unwrap();
    let ratio = st.coeff(0, 0) / (p.amp * (-2.0 * p.s0).exp());
    assert!((ratio - 1.0).abs() <= 10.0 * (-p.s0).exp(), "{ratio}");
}

#[test]
fn initial_q60_carries_d60() {
    let g = grid();
    let p = wp().with_d([0.0, 0.0, 0.0, 0.0, 1.0]);
    let st = build_initial(&p, &g).unwrap();
    let s0 = p.s0;
    let ratio = st.coeff(6, 0) / (p.amp * s0 * s0 * (-3.0 * s0).exp());
    assert!((ratio - 1.0).abs() <= 10.0 * (-s0).exp(), "{ratio}");
}

#[test]
fn initial_data_errors_propagate() {
    let g = grid();
    let p = wp().with_d([0.0, 0.0, 0.0, 0.0, -1e9]);
    assert!(build_initial(&p, &g).is_err());
}

#[test]
fn potential_vanishes_at_origin_for_large_s() {
    let p = wp();
    let v: Vec<f64> = [8.0, 12.0, 16.0, 20.0].iter().map(|&s| eval_v(0.0, 0.0, s, &p).unwrap().abs()).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    assert!(v[3] < 1e-6);
}

#[test]
fn nonlinear_term_vanishes_at_zero() {
    let p = wp();
    for (a, b) in [(0.0, 0.0), (1.0, 2.0), (5.0, 0.0)] {
        assert_eq!(eval_b(a, b, 12.0, 0.0, &p).unwrap(), 0.0);
    }
    // p = 2: B = q^2 exactly
    let b = eval_b(1.0, 1.0, 12.0, 1e-2, &p).unwrap();
    assert!((b - 1e-4).abs() < 1e-16);
    assert!((nonlinear_b(0.7, 0.3, 3.0) - (1.0 - 0.343 - 3.0 * 0.49 * 0.3)).abs() < 1e-14);
}

#[test]
fn remainder_norm_converges_to_leading_term() {
    let g = grid();
    let p = wp();
    let terms = [(0, 0, 32.0), (2, 0, 32.0), (0, 2, 32.0), (4, 0, 4.0), (0, 4, 4.0), (2, 2, 32.0), (4, 2, 4.0), (2, 4, 4.0)];
    let lead = (p.p / p.kappa())
        * terms.iter().map(|&(a, b, c): &(usize, usize, f64)| c * c * hermite_norm_sq(a) * hermite_norm_sq(b)).sum::<f64>().sqrt();
    let gaps: Vec<f64> = [10.0, 12.0, 14.0]
        .iter()
        .map(|&s| {
            let r: Vec<f64> = (0..g.len())
                .map(|k| {
                    let (a, b) = g.point(k);
                    eval_r(a, b, s, &p).unwrap()
                })
                .collect();
            let v = g.l2_norm(&r) * (2.0 * s).exp();
            assert!(v <= 3.0 * lead, "s = {s}: {v}");
            (v / lead - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 0.02, "{gaps:?}");
}

#[test]
fn zero_perturbation_is_inside() {
    let g = grid();
    let p = wp();
    let dec = decompose(&build_initial(&p, &g).unwrap(), &g, &Profile::new(&p)).unwrap();
    let rep = va_check(&dec, &p);
    assert!(rep.inside());
    assert!(rep.margins.values().all(|&m| m > 0.0));
    assert_eq!(rep.exit_constraint(&p), None);
}

#[test]
fn constructed_violation_exits_through_q20() {
    let g = grid();
    let p = wp();
    let s = 12.0;
    let st = mode_state(&g, s, &[(2, 0, 2.0 * p.amp * (-2.0 * s).exp())]);
    let dec = decompose(&st, &g, &Profile::new(&p)).unwrap();
    let rep = va_check(&dec, &p);
    assert!(!rep.inside());
    assert_eq!(rep.exit_constraint(&p), Some(Constraint::IjCore(HermiteIndex::new(2, 0))));
}

#[test]
fn decomposition_norm_identity_and_symmetry() {
    let g = grid();
    let p = wp().with_d([0.5, -0.5, 0.3, 0.2, -0.4]);
    let st = build_initial(&p, &g).unwrap();
    let dec = decompose(&st, &g, &Profile::new(&p)).unwrap();
    let low: f64 = dec.qij.iter().map(|(h, c)| c * c * hermite_norm_sq(h.deg1()) * hermite_norm_sq(h.deg2())).sum();
    let total = st.field.l2_norm_spectral();
    assert!((low + dec.q_minus_norm.powi(2) - total * total).abs() <= 1e-10 * total * total);
    let big = dec.qij.values().fold(0.0f64, |m, c| m.max(c.abs()));
    for (h, c) in &dec.qij {
        if h.deg1() % 2 == 1 || h.deg2() % 2 == 1 {
            assert!(c.abs() <= 1e-10 * big, "{h:?}: {c:e}");
        }
    }
}

/// Random states inside `V_A(s)`: every constraint drawn uniformly within
/// its bound, `q_-` along `h8 h0 + h0 h8`.
fn random_inside(g: &TensorGrid, p: &Params, s: f64, rng: &mut ChaCha8Rng) -> SpectralState {
    let mut f = SpectralField::zero(g.nmax);
    for c in Constraint::all() {
        let (b, _) = c.bound(s, p);
        match c {
            Constraint::IjCore(h) | Constraint::SixCorner(h) | Constraint::SixMid(h) => {
                let v = b * rng.gen_range(-1.0..1.0);
                f.set(h.deg1(), h.deg2(), v);
                f.set(h.deg2(), h.deg1(), v);
            }
            Constraint::Minus => {
                let v = b * rng.gen_range(0.0..1.0) / (2.0 * hermite_norm_sq(8)).sqrt();
                f.set(8, 0, v);
                f.set(0, 8, v);
            }
            Constraint::Linf => {}
        }
    }
    f.symmetric = true;
    SpectralState { s, field: f.with_samples(g) }
}

#[test]
fn inside_states_are_small() {
    let g = grid();
    let p = wp();
    let s = 12.0;
    let prof = Profile::new(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let scale = p.amp * s * (-2.0 * s).exp();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let st = random_inside(&g, &p, s, &mut rng);
        let dec = decompose(&st, &g, &prof).unwrap();
        assert!(va_check(&dec, &p).inside());
        worst = worst.max(st.field.l2_norm_spectral() / scale);
    }
    assert!(worst <= 10.0, "||q|| / (A s e^(-2s)) reaches {worst}");
}

#[test]
fn q00_face_is_outgoing() {
    let g = grid();
    let p = wp();
    let s = 12.0;
    let face = Constraint::IjCore(HermiteIndex::new(0, 0));
    let st = boundary_state(face, 1.0, s, &p, &g);
    let force = QForce::new(&p, &g, Terms::FULL).without_guard();
    let flow = boundary_flow(&st, &g, force, &Profile::new(&p), &p, 0.01).unwrap();
    let f = flow[&face];
    assert!(f.rate > f.bound_rate, "{f:?}");
    assert!(f.outgoing);
}

#[test]
fn minus_face_is_ingoing() {
    let g = grid();
    let p = Params { amp: 1000.0, ..wp() };
    let st = boundary_state(Constraint::Minus, 1.0, 12.0, &p, &g);
    let force = QForce::new(&p, &g, Terms::FULL).without_guard();
    let flow = boundary_flow(&st, &g, force, &Profile::new(&p), &p, 0.01).unwrap();
    let f = flow[&Constraint::Minus];
    assert!(f.rate < f.bound_rate, "{f:?}");
    assert!(!f.outgoing);
}

#[test]
fn linear_q42_face_is_outgoing() {
    let g = grid();
    let p = wp();
    let s = 12.0;
    let face = Constraint::IjCore(HermiteIndex::new(4, 2));
    let st = boundary_state(face, 1.0, s, &p, &g);
    let flow = boundary_flow(&st, &g, LinearOnly, &Profile::new(&p), &p, 0.01).unwrap();
    let f = flow[&face];
    let b = face.bound(s, &p).0;
    assert!((f.rate / b + 1.0).abs() < 1e-4, "{}", f.rate / b);
    assert!((f.bound_rate / b + 2.0).abs() < 1e-12);
    assert!(f.outgoing);
}

#[test]
fn constraint_table() {
    let all = Constraint::all();
    assert_eq!(all.len(), 12);
    let outgoing: Vec<String> = all.iter().filter(|c| c.is_outgoing()).map(|c| c.to_string()).collect();
    assert_eq!(outgoing.len(), 8);
    let slots: Vec<Option<usize>> = all.iter().map(|c| c.d_slot()).collect();
    assert_eq!(slots.iter().flatten().count(), 8);
    assert_eq!(Constraint::Minus.d_slot(), None);
    assert_eq!(Constraint::SixMid(HermiteIndex::new(6, 2)).d_slot(), None);
}

#[test]
fn zero_window_is_trivially_trapped() {
    let g = grid();
    let res = shoot(&wp(), &g, 0.0, 100, 0.01).unwrap();
    assert_eq!(res.trials.len(), 1);
    assert_eq!(res.window, 0.0);
    assert!(res.best.exit.is_none());
    assert!(shoot(&wp(), &g, 7.0, 100, 0.01).is_err());
    assert!(shoot(&wp(), &g, 1.0, 99, 0.01).is_err());
}

#[test]
fn linear_toy_exits_only_through_outgoing_faces() {
    let g = grid();
    let p = wp();
    let spec = RunSpec { window: 3.0, ds: 0.01, stop_on_exit: true, terms: Terms::LINEAR };
    let traj = evolve(&p.with_d([2.0, 0.0, 0.0, 0.0, 0.0]), &g, spec).unwrap();
    assert_eq!(traj.exit.map(|e| e.1), Some(Constraint::IjCore(HermiteIndex::new(0, 0))));
    let probes = [
        [-2.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -2.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 2.0],
        [1.0, -1.0, 1.0, -1.0, 1.0],
        [0.01, 0.3, -0.7, 1.5, -2.0],
    ];
    for d in probes {
        // start inside V_A(s0) so the exit comes from the flow
        let d = d.map(|x| 0.45 * x);
        let traj = evolve(&p.with_d(d), &g, spec).unwrap();
        assert!(traj.exit.map_or(true, |e| e.0 > p.s0), "d = {d:?}");
        let (_, c) = traj.exit.expect("linear growth leaves V_A");
        assert!(c.is_outgoing(), "d = {d:?}: {c}");
    }
    // the centre of the search box has q = 0, which the linear flow keeps
    let res = shoot_with(&p, &g, 3.0, 100, 0.01, Terms::LINEAR).unwrap();
    assert!(res.best.exit.is_none());
    assert!(res.exit_components().iter().all(|c| c.is_outgoing()));
}

/// Larger A, where the remainder's high modes fit inside the `q_-` bound.
#[test]
fn shooting_traps_for_large_a() {
    let g = grid();
    let p = Params { amp: 400.0, ..wp() };
    let res = shoot(&p, &g, 3.0, 100, 0.01).unwrap();
    assert!(res.window >= 3.0 - 1e-9, "{} ({})", res.window, res.reason);
    assert!(res.exit_components().iter().all(|c| c.is_outgoing()));
    // q_- margin never hits zero after s0 while every other constraint holds
    for pt in res.best.points.iter().skip(1) {
        let others_ok = pt.report.margins.iter().all(|(c, &m)| *c == Constraint::Minus || m >= 0.0);
        if others_ok {
            assert!(pt.report.margin(Constraint::Minus) > 0.0, "s = {}", pt.dec.s);
        }
    }
    let mut csv = Vec::new();
    res.best.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), res.best.points.len() + 1);
    assert!(text.starts_with("s,q00,q20,q22,q40,q42,q44,q60,q62,q64,q66,q_minus,sup_w,"));
}

#[test]
fn remainder_drives_growth_with_expected_signs() {
    let g = grid();
    let p = wp();
    let spec = RunSpec { window: 3.0, ds: 0.01, stop_on_exit: false, terms: Terms::FULL };
    let traj = evolve(&p, &g, spec).unwrap();
    let last = traj.points.last().unwrap();
    let s = last.dec.s;
    let scale = (2.0 * s).exp() * p.kappa() / p.p;
    for ((i, j), target) in [((2, 0), -16.0), ((4, 0), -4.0), ((4, 2), -32.0f64)] {
        let v = last.dec.get(i, j) * scale;
        assert!(v.signum() == target.signum(), "q{i}{j} e^(2s) kappa/p = {v}");
        assert!(v / target <= 2.0 && v / target >= 0.5, "q{i}{j}: {v} vs {target}");
    }
}

#[test]
fn nonlinear_term_is_at_least_quadratic_on_trajectories() {
    let g = grid();
    let p = wp().with_d([0.5, -0.5, 0.5, 0.5, 0.5]);
    let integ = Integrator::new(&g, QForce::new(&p, &g, Terms::FULL), 0.01).unwrap();
    let frame = QForce::new(&p, &g, Terms::FULL);
    let mut pts = Vec::new();
    let mut n = 0;
    integ
        .run(build_initial(&p, &g).unwrap(), p.s0 + 2.0, |st| {
            n += 1;
            if n % 10 == 0 {
                let fr = frame.frame(st.s).unwrap();
                let q = st.samples();
                let sq = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let sb = q.iter().zip(&fr).fold(0.0f64, |m, (v, f)| m.max(nonlinear_b(f.0, *v, p.p).abs()));
                pts.push((sq.ln(), sb.ln()));
            }
            true
        })
        .unwrap();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|x| x.0).sum::<f64>() / n;
    let my = pts.iter().map(|x| x.1).sum::<f64>() / n;
    let slope = pts.iter().map(|x| (x.0 - mx) * (x.1 - my)).sum::<f64>() / pts.iter().map(|x| (x.0 - mx).powi(2)).sum::<f64>();
    let p_bar = p.p.min(2.0);
    assert!(slope >= p_bar - 0.1, "{slope}");
}

#[test]
fn recenter_at_zero_is_identity() {
    let g = grid();
    let prof = Profile::new(&wp());
    let direct: Vec<f64> = (0..g.len())
        .map(|k| {
            let (a, b) = g.point(k);
            prof.w0(a, b).unwrap()
        })
        .collect();
    assert_eq!(recenter_closed(&prof, (0.0, 0.0), &g).unwrap(), direct);
    let lat = w0_lattice(&prof, (0.0, 0.0), &g, 0.05).unwrap();
    let interp = recenter(&lat, (0.0, 0.0), wp().s0, &g).unwrap();
    let err = interp.iter().zip(&direct).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn recenter_routes_agree() {
    let g = grid();
    let p = wp().with_d([0.3, -0.2, 0.1, 0.4, -0.3]);
    let prof = Profile::new(&p);
    let sc = (-p.s0 / 2.0).exp();
    for (k, l) in [(3.0, 1.0), (10.0, 10.0), (0.0, 25.0), (40.0, 7.0)] {
        let a = (k * sc, l * sc);
        let lat = w0_lattice(&prof, a, &g, 0.05).unwrap();
        let x = recenter(&lat, a, p.s0, &g).unwrap();
        let y = recenter_closed(&prof, a, &g).unwrap();
        let err = x.iter().zip(&y).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(err <= 1e-10, "(K, L) = ({k}, {l}): {err:e}");
    }
}

#[test]
fn recenter_outside_lattice_is_reported() {
    let g = grid();
    let prof = Profile::new(&wp());
    let lat = w0_lattice(&prof, (0.0, 0.0), &g, 0.05).unwrap();
    let far = (1.0, 0.0);
    assert!(matches!(recenter(&lat, far, wp().s0, &g), Err(blowup_core::Error::OutOfHull { .. })));
}

#[test]
fn flatness_constant_recomputes() {
    let g = grid();
    let c = calibrate_flatness(&wp(), &g).unwrap();
    assert!((c - FLATNESS_C).abs() <= 1e-12 * c, "{c:.17e}");
}

#[test]
fn flatness_holds_off_the_sweep() {
    let g = grid();
    for s0 in [11.0, 13.0, 15.0] {
        let p = Params { s0, ..wp() };
        let prof = Profile::new(&p);
        let sc = (-s0 / 2.0).exp();
        for (k, l) in [(2.5, 7.5), (17.0, 33.0), (44.0, 2.0), (52.0, 52.0)] {
            let f = flatness(&prof, (k * sc, l * sc), &g).unwrap();
            assert!(f <= FLATNESS_C * (-s0 / 6.0).exp(), "s0 = {s0}, ({k}, {l}): {f}");
        }
    }
}

fn wa_params() -> Params {
    Params { s0: WA_S0, ..wp() }
}

#[test]
fn expansion_constant_recomputes() {
    let g = grid();
    let c = calibrate_wa(&wa_params(), WA_M, &g).unwrap();
    assert!((c - WA_C).abs() <= 1e-12 * c, "{c:.17e}");
}

#[test]
fn expansion_on_the_axis() {
    let g = grid();
    let p = wa_params();
    let t = wa_expansion_check(0.0, p.amp, WA_M, &p, &g).unwrap();
    let h02 = t.row(0, 2);
    assert!(h02.residual <= WA_C * t.scale, "{h02:?}");
    let h20 = t.row(2, 0);
    assert!((h20.measured + p.amp * p.amp * (-p.s0).exp()).abs() <= WA_C * t.iota / p.amp, "{h20:?}");
    assert!(t.row(0, 0).residual <= WA_C * t.scale);
}

#[test]
fn expansion_h0h0_across_held_out_points() {
    let g = grid();
    let p = wa_params();
    for (k, l) in [(2.0, 19.0), (7.0, 14.0), (11.0, 11.0), (1.0, 24.0)] {
        let t = wa_expansion_check(k, l, WA_M, &p, &g).unwrap();
        let r = t.row(0, 0);
        assert!(r.residual <= WA_C * t.scale, "({k}, {l}): {r:?}");
    }
}

#[test]
fn expansion_swap_transposes_the_table() {
    let g = grid();
    let p = wa_params();
    let a = wa_expansion_check(5.0, 15.0, WA_M, &p, &g).unwrap();
    let b = wa_expansion_check(15.0, 5.0, WA_M, &p, &g).unwrap();
    for r in &a.rows {
        let t = b.row(r.n2, r.n1);
        // projections of an O(kappa) field: equal up to quadrature rounding
        assert!((r.measured - t.measured).abs() <= 1e-14 * p.kappa(), "{r:?} vs {t:?}");
    }
}

#[test]
fn expansion_preconditions() {
    let g = grid();
    let p = wa_params();
    assert!(wa_expansion_check(0.0, 0.0, WA_M, &p, &g).is_err());
    assert!(wa_expansion_check(-1.0, 25.0, WA_M, &p, &g).is_err());
    assert!(wa_expansion_check(0.0, 30.0, WA_M, &p, &g).is_err());
    assert!(wa_expansion_check(5.0, 15.0, 1.5, &p, &g).is_err());
    // at s0 = 12 no K + L >= A fits in the inner region for m = 0.05
    assert!(wa_expansion_check(0.0, 20.0, WA_M, &wp(), &g).is_err());
}
