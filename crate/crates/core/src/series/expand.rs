//! Exact expansions of the profile and of its remainder, and the coefficient
//! certificates built on them.

use serde::Serialize;

use super::eps::{EpsSeries, SPoly};
use super::poly::HermiteMap;
use super::ratfn::RatFn;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Largest order accepted by [`expand_remainder`].
pub const REMAINDER_ORDER_CAP: usize = 2;

fn y2(var: usize) -> SPoly {
    let y = if var == 0 { SPoly::y1() } else { SPoly::y2() };
    y.mul(&y)
}

fn pm1_over_kappa() -> Scalar {
    Scalar::term(RatFn::pm1(), -1, 0)
}

/// `y1^2 y2^2`.
fn cross() -> SPoly {
    y2(0).mul(&y2(1))
}

/// `P = ((p-1)/kappa)(y1^2 y2^2 - h2 h2)`, built as written.
pub fn poly_p() -> SPoly {
    cross().sub(&SPoly::hermite2(2, 2)).scale(&pm1_over_kappa())
}

/// `Q` with the given `gamma`.
pub fn poly_q(gamma: &Scalar) -> SPoly {
    let p = Scalar::p();
    let delta = Scalar::delta();
    let pp = poly_p();
    let y6 = |var: usize| y2(var).mul(&y2(var)).mul(&y2(var));
    let t1 = pp.mul(&cross()).scale(&Scalar::from_ratfn(RatFn::pm1_pow(-1)));
    // kappa (p-2) / (2 (p-1)^2)
    let c2 = Scalar::term(RatFn::p().sub(&RatFn::int(2)).mul(&RatFn::frac(1, 2)).mul_pm1_pow(-2), 1, 0);
    let t2 = pp.mul(&pp).scale(&c2);
    let t3 = y6(0)
        .sub(&SPoly::hermite(6, 0))
        .add(&y6(1).sub(&SPoly::hermite(6, 1)))
        .scale(&delta);
    let p_over_2k = p.mul(&Scalar::term(RatFn::frac(1, 2), -1, 0));
    let t4 = SPoly::hermite2(4, 4).sub(&cross().mul(&cross())).scale(&p_over_2k);
    let t5 = SPoly::hermite2(4, 2).add(&SPoly::hermite2(2, 4)).scale(gamma);
    t1.add(&t2).add(&t3).add(&t4).add(&t5).scale(&pm1_over_kappa())
}

/// `E = 1 + eps P + eps^2 Q`.
pub fn series_e(order: usize, gamma: &Scalar) -> Result<EpsSeries> {
    EpsSeries::new(order, vec![SPoly::one(), poly_p(), poly_q(gamma)])
}

/// `D / (p-1) = 1 + ((p-1)/kappa)(eps y1^2 y2^2 + delta eps^2 (y1^6 + y2^6))`.
pub fn series_d_reduced(order: usize) -> Result<EpsSeries> {
    let y6 = y2(0).mul(&y2(0)).mul(&y2(0)).add(&y2(1).mul(&y2(1)).mul(&y2(1)));
    EpsSeries::new(
        order,
        vec![
            SPoly::one(),
            cross().scale(&pm1_over_kappa()),
            y6.scale(&pm1_over_kappa().mul(&Scalar::delta())),
        ],
    )
}

/// `(E / D')^(1/(p-1))`, the profile divided by `kappa`.
fn profile_ratio(order: usize, gamma: &Scalar) -> Result<EpsSeries> {
    let inv = Scalar::from_ratfn(RatFn::pm1_pow(-1));
    let e = series_e(order, gamma)?.pow(&inv)?;
    let d = series_d_reduced(order)?.pow(&inv.neg())?;
    e.mul(&d)
}

/// Expansion of `phi = kappa (E/D')^(1/(p-1))` with `gamma = (6p-2)/kappa`.
pub fn expand_profile(order: usize) -> Result<EpsSeries> {
    expand_profile_with_gamma(order, &Scalar::gamma())
}

pub fn expand_profile_with_gamma(order: usize, gamma: &Scalar) -> Result<EpsSeries> {
    Ok(profile_ratio(order, gamma)?.scale(&Scalar::kappa_pow(1)).reduce_kappa())
}

/// `R = -d_s phi + (L - 1) phi - phi/(p-1) + phi^p`.
pub fn expand_remainder(order: usize) -> Result<EpsSeries> {
    expand_remainder_with_gamma(order, &Scalar::gamma())
}

pub fn expand_remainder_with_gamma(order: usize, gamma: &Scalar) -> Result<EpsSeries> {
    if order > REMAINDER_ORDER_CAP {
        return Err(Error::SeriesOrder { order, cap: REMAINDER_ORDER_CAP });
    }
    let f = profile_ratio(order, gamma)?;
    let phi = f.scale(&Scalar::kappa_pow(1));
    let lphi = phi.map(|c| c.apply_l())?;
    let phi_p = f.pow(&Scalar::p())?.scale(&Scalar::kappa_to_p());
    let r = phi
        .d_ds()
        .neg()
        .add(&lphi.sub(&phi))
        .sub(&phi.scale(&Scalar::from_ratfn(RatFn::pm1_pow(-1))))
        .add(&phi_p);
    Ok(r.reduce_kappa())
}

fn hmap(entries: &[((u32, u32), Scalar)]) -> HermiteMap<Scalar> {
    entries.iter().cloned().collect()
}

/// Expected Hermite form of the profile's `eps^1` coefficient: `-h2 h2`.
pub fn expected_profile_c1() -> HermiteMap<Scalar> {
    hmap(&[((2, 2), Scalar::int(-1))])
}

/// `-delta(h6h0 + h0h6) + gamma(h4h2 + h2h4) + p/(2 kappa) h4h4`.
pub fn expected_profile_c2() -> HermiteMap<Scalar> {
    let g = Scalar::gamma();
    let c44 = Scalar::term(RatFn::p().mul(&RatFn::frac(1, 2)), -1, 0);
    hmap(&[
        ((6, 0), Scalar::delta().neg()),
        ((0, 6), Scalar::delta().neg()),
        ((4, 2), g.clone()),
        ((2, 4), g),
        ((4, 4), c44),
    ])
}

/// `(p/kappa){32 h0h0 + 32(h2h0+h0h2) + 4(h4h0+h0h4) + 32 h2h2 + 4(h4h2+h2h4)}`.
pub fn expected_remainder_c2() -> HermiteMap<Scalar> {
    let pk = |c: i64| Scalar::term(RatFn::p().mul(&RatFn::int(c)), -1, 0);
    hmap(&[
        ((0, 0), pk(32)),
        ((2, 0), pk(32)),
        ((0, 2), pk(32)),
        ((4, 0), pk(4)),
        ((0, 4), pk(4)),
        ((2, 2), pk(32)),
        ((4, 2), pk(4)),
        ((2, 4), pk(4)),
    ])
}

/// One verified identity: a group of Hermite modes compared exactly.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub series: String,
    pub order: usize,
    pub label: String,
    /// `(n1, n2, expected, obtained)` per mode
    pub modes: Vec<(u32, u32, String, String)>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCertificate {
    pub order: usize,
    pub gamma: String,
    pub checks: Vec<IdentityCheck>,
}

impl SeriesCertificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Plain-text listing, one identity per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "[{}] {} c{}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.series,
                c.order,
                c.label
            ));
            for (n1, n2, e, o) in &c.modes {
                s.push_str(&format!("    h{n1}h{n2}: expected {e}; obtained {o}\n"));
            }
        }
        s
    }
}

fn group_check(
    series: &str,
    order: usize,
    label: &str,
    modes: &[(u32, u32)],
    expected: &HermiteMap<Scalar>,
    obtained: &HermiteMap<Scalar>,
) -> IdentityCheck {
    let mut rows = Vec::new();
    let mut pass = true;
    for &(n1, n2) in modes {
        let e = expected.get(&(n1, n2)).cloned().unwrap_or_else(Scalar::zero);
        let o = obtained.get(&(n1, n2)).cloned().unwrap_or_else(Scalar::zero);
        pass &= e == o;
        rows.push((n1, n2, e.to_string(), o.to_string()));
    }
    IdentityCheck { series: series.into(), order, label: label.into(), modes: rows, pass }
}

fn rest_check(
    series: &str,
    order: usize,
    covered: &[(u32, u32)],
    expected: &HermiteMap<Scalar>,
    obtained: &HermiteMap<Scalar>,
) -> IdentityCheck {
    let mut rows = Vec::new();
    let mut pass = true;
    for (k, o) in obtained {
        if covered.contains(k) {
            continue;
        }
        let e = expected.get(k).cloned().unwrap_or_else(Scalar::zero);
        if e != *o {
            pass = false;
            rows.push((k.0, k.1, e.to_string(), o.to_string()));
        }
    }
    IdentityCheck {
        series: series.into(),
        order,
        label: "no other modes".into(),
        modes: rows,
        pass,
    }
}

/// Runs every profile and remainder identity available at `order`
/// (0, 1 or 2), using the given `gamma`.
pub fn certify(order: usize, gamma: &Scalar) -> Result<SeriesCertificate> {
    if order > REMAINDER_ORDER_CAP {
        return Err(Error::SeriesOrder { order, cap: REMAINDER_ORDER_CAP });
    }
    let phi = expand_profile_with_gamma(order, gamma)?;
    let r = expand_remainder_with_gamma(order, gamma)?;
    let mut checks = Vec::new();

    let kappa_map = hmap(&[((0, 0), Scalar::kappa_pow(1))]);
    let empty = HermiteMap::new();
    let ph0 = phi.coeff(0).to_hermite();
    checks.push(group_check("profile", 0, "kappa", &[(0, 0)], &kappa_map, &ph0));
    checks.push(rest_check("profile", 0, &[(0, 0)], &kappa_map, &ph0));
    let r0 = r.coeff(0).to_hermite();
    checks.push(rest_check("remainder", 0, &[], &empty, &r0));

    if order >= 1 {
        let ph1 = phi.coeff(1).to_hermite();
        let exp1 = expected_profile_c1();
        checks.push(group_check("profile", 1, "-h2h2", &[(2, 2)], &exp1, &ph1));
        checks.push(rest_check("profile", 1, &[(2, 2)], &exp1, &ph1));
        let r1 = r.coeff(1).to_hermite();
        checks.push(rest_check("remainder", 1, &[], &empty, &r1));
    }
    if order >= 2 {
        let ph2 = phi.coeff(2).to_hermite();
        let exp2 = expected_profile_c2();
        let groups: [(&str, &[(u32, u32)]); 3] = [
            ("-delta (h6h0 + h0h6)", &[(6, 0), (0, 6)]),
            ("gamma (h4h2 + h2h4)", &[(4, 2), (2, 4)]),
            ("p/(2 kappa) h4h4", &[(4, 4)]),
        ];
        let mut covered = Vec::new();
        for (label, modes) in groups {
            checks.push(group_check("profile", 2, label, modes, &exp2, &ph2));
            covered.extend_from_slice(modes);
        }
        checks.push(rest_check("profile", 2, &covered, &exp2, &ph2));

        let r2 = r.coeff(2).to_hermite();
        let expr = expected_remainder_c2();
        let groups: [(&str, &[(u32, u32)]); 5] = [
            ("(p/kappa) 32 h0h0", &[(0, 0)]),
            ("(p/kappa) 32 (h2h0 + h0h2)", &[(2, 0), (0, 2)]),
            ("(p/kappa) 4 (h4h0 + h0h4)", &[(4, 0), (0, 4)]),
            ("(p/kappa) 32 h2h2", &[(2, 2)]),
            ("(p/kappa) 4 (h4h2 + h2h4)", &[(4, 2), (2, 4)]),
        ];
        let mut covered = Vec::new();
        for (label, modes) in groups {
            checks.push(group_check("remainder", 2, label, modes, &expr, &r2));
            covered.extend_from_slice(modes);
        }
        checks.push(rest_check("remainder", 2, &covered, &expr, &r2));
    }
    Ok(SeriesCertificate { order, gamma: gamma.to_string(), checks })
}
