//! Wiener-Hopf factor S₊ of the modified kernel S(k) = w/(w + a).
//!
//! S₊ is analytic and zero-free in the upper half plane, tends to 1 at
//! infinity, and S(k) = S₊(k) S₊(-k) on the real axis (the outgoing side
//! limit w = -i sqrt(k0^2 - k^2) on |k| < k0).

use crate::error::{Error, Result};
use crate::model::ReducedParams;
use crate::quadrature::{extrapolate_to_zero, integrate, QuadratureSpec};
use crate::specfun::{dilog, ti2_side, Ti2Side};
use crate::{ComplexSample, ComplexValue as C};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorMethod {
    ClosedForm,
    JIntegral,
}

/// S₊ at a point, with the route used to obtain it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorValue {
    pub k: C,
    pub splus: C,
    pub method: FactorMethod,
    pub err_est: f64,
}

const I: C = C::new(0.0, 1.0);

/// Closed form with possibly complex k0 and K:
/// sqrt((k+k0)/(k+K)) exp(-(Ti₂(z₁) - Ti₂(z₂))/π), z₁,₂ = (s ± ia)/(K+k),
/// s = sqrt(k0^2 - k^2). The exponent is even in s.
pub(crate) fn splus_closed(k: C, a: f64, k0: C, kk: C) -> C {
    let s = (k0 * k0 - k * k).sqrt();
    let d = kk + k;
    let z1 = (s + I * a) / d;
    let z2 = (s - I * a) / d;
    let t = ti2_side(z1, Ti2Side::Right) - ti2_side(z2, Ti2Side::Right);
    ((k + k0) / (k + kk)).sqrt() * (-t / PI).exp()
}

/// sqrt(k^2 - k0^2) on the real axis with the outgoing side limit; even in k.
pub(crate) fn w_outgoing(k: f64, k0: f64) -> C {
    let d = (k.abs() - k0) * (k.abs() + k0);
    if d >= 0.0 {
        C::new(d.sqrt(), 0.0)
    } else {
        C::new(0.0, -(-d).sqrt())
    }
}

/// S₊(k) for Im k >= 0.
///
/// Real k < 0 is evaluated as S(k)/S₊(-k). The confluence points k = ±K are
/// rejected; use [`splus_at_k`] or [`splus_at_minus_k`].
pub fn splus(k: C, rp: &ReducedParams) -> Result<C> {
    rp.check()?;
    if k.im < 0.0 || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::Domain("splus needs Im k >= 0".into()));
    }
    let kk = rp.k_big;
    if k.im == 0.0 {
        if k.re.abs() == kk {
            return Err(Error::Confluence(k.re));
        }
        if k.re == -rp.k0 {
            return Err(Error::BranchPoint(k.re));
        }
        if k.re < 0.0 {
            let w = w_outgoing(k.re, rp.k0);
            let s = w / (w + rp.a);
            return Ok(s / splus_closed(-k, rp.a, C::new(rp.k0, 0.0), C::new(kk, 0.0)));
        }
    }
    Ok(splus_closed(k, rp.a, C::new(rp.k0, 0.0), C::new(kk, 0.0)))
}

/// S₊(K) = sqrt((K+k0)/(2K)) exp[(i/2π)(Li₂(-a/K) - Li₂(a/K))].
pub fn splus_at_k(rp: &ReducedParams) -> C {
    let (a, k0, kk) = (rp.a, rp.k0, rp.k_big);
    let x = C::new(a / kk, 0.0);
    let ph = (dilog(-x) - dilog(x)).re / (2.0 * PI);
    C::from_polar(((kk + k0) / (2.0 * kk)).sqrt(), ph)
}

/// S₊(-K) from the product identity S₊(K) S₊(-K) = 1/2.
pub fn splus_at_minus_k(rp: &ReducedParams) -> C {
    0.5 / splus_at_k(rp)
}

/// Limit of the closed form at k → K ± 0 from above, by polynomial
/// extrapolation of S₊(±K + iδ) over δ = h 2^-j.
pub fn splus_limit_from_above(k_real: f64, rp: &ReducedParams) -> Result<(C, f64)> {
    rp.check()?;
    // the branch point -k0 sits at distance K - k0 from -K
    let h0 = 0.25 * (rp.a * rp.a / (rp.k_big + rp.k0)).min(1.0);
    let hs: Vec<f64> = (0..8).map(|j| h0 * 0.5f64.powi(j)).collect();
    let vals: Vec<C> = hs
        .iter()
        .map(|&h| splus(C::new(k_real, h), rp))
        .collect::<Result<_>>()?;
    Ok(extrapolate_to_zero(&hs, &vals))
}

/// Residuals of S₊(K)S₊(-K) = 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductIdentity {
    /// With S₊(-K) taken from the real-axis relation S₊(-K) = S(K)/S₊(K).
    pub via_real_axis: f64,
    /// With S₊(-K) the closed form's limit at -K + i0.
    pub via_limit: f64,
    pub limit_err: f64,
}

/// |S₊(K) S₊(-K) - 1/2|, the larger of the two evaluations in
/// [`product_identity`].
pub fn splus_product_identity(rp: &ReducedParams) -> Result<f64> {
    let p = product_identity(rp)?;
    Ok(p.via_real_axis.max(p.via_limit))
}

pub fn product_identity(rp: &ReducedParams) -> Result<ProductIdentity> {
    rp.check()?;
    let sk = splus_at_k(rp);
    let w = C::new(rp.a, 0.0);
    let s_of_k = w / (w + rp.a);
    let via_real_axis = (sk * (s_of_k / sk) - 0.5).norm();
    let (lim, limit_err) = splus_limit_from_above(-rp.k_big, rp)?;
    Ok(ProductIdentity {
        via_real_axis,
        via_limit: (sk * lim - 0.5).norm(),
        limit_err,
    })
}

/// σ⁺(k) = S₊(k) (k+K)/(k+k0), the plus factor of σ.
pub fn sigma_plus(k: C, rp: &ReducedParams) -> Result<C> {
    rp.check()?;
    let kk = rp.k_big;
    if k.im == 0.0 && (k.re == -kk || k.re == -rp.k0) {
        return Err(Error::Domain(format!(
            "sigma_plus has a pole or branch point at k = {}",
            k.re
        )));
    }
    let s = if k.im == 0.0 && k.re == kk {
        splus_at_k(rp)
    } else {
        splus(k, rp)?
    };
    Ok(s * (k + kk) / (k + rp.k0))
}

/// Evaluates S₊ by the requested route.
pub fn factor(k: C, rp: &ReducedParams, method: FactorMethod, tol: f64) -> Result<FactorValue> {
    match method {
        FactorMethod::ClosedForm => {
            let s = if k.im == 0.0 && k.re == rp.k_big {
                splus_at_k(rp)
            } else {
                splus(k, rp)?
            };
            Ok(FactorValue {
                k,
                splus: s,
                method,
                err_est: 1e-14 * s.norm(),
            })
        }
        FactorMethod::JIntegral => {
            let j = j_direct(k, rp, tol)?;
            let s = (-j.value).exp();
            Ok(FactorValue {
                k,
                splus: s,
                method,
                err_est: j.err_est * s.norm(),
            })
        }
    }
}

fn j_upper(k: C, rp: &ReducedParams, tol: f64) -> Result<ComplexSample> {
    let (a, k0) = (rp.a, rp.k0);
    let mk = -k;
    let ang = mk.arg();
    let beta = if (ang + FRAC_PI_2).abs() < 0.3 {
        FRAC_PI_4
    } else {
        FRAC_PI_2
    };
    let e = C::from_polar(1.0, -beta);
    let vertical = beta == FRAC_PI_2;
    let f = |s: f64| {
        let u = e * s;
        let w = if vertical {
            C::new(0.0, -s.hypot(k0))
        } else {
            (u * u - k0 * k0).sqrt()
        };
        (1.0 + a / w).ln() * e / (u * u - k * k)
    };
    let scale = k.norm() / PI;
    let spec = QuadratureSpec::ray(0.0, 1.0, 1.0 / (k.norm() + k0))
        .breakpoints(&[k0, k.norm()])
        .tol(tol / scale.max(1e-300))
        .max_subdivisions(5000);
    let r = integrate(f, &spec)?.require(tol / scale.max(1e-300))?;
    let mut value = k / (PI * I) * r.value;
    if -beta < ang && ang < 0.0 {
        value += (1.0 + a / (mk * mk - k0 * k0).sqrt()).ln();
    }
    Ok(ComplexSample {
        value,
        err_est: r.err_est * scale,
    })
}

/// The exponent J(k) with S₊(k) = exp(-J(k)), by direct quadrature of the
/// Cauchy integral rotated onto a ray in the fourth quadrant.
///
/// Real k is handled as the limit from above with δ = 1e-6 and one
/// Richardson step.
pub fn j_direct(k: C, rp: &ReducedParams, tol: f64) -> Result<ComplexSample> {
    rp.check()?;
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be positive".into()));
    }
    if k.im < 0.0 {
        return Err(Error::Domain("j_direct needs Im k >= 0".into()));
    }
    if k.im > 0.0 {
        return j_upper(k, rp, tol);
    }
    let d = 1e-6;
    let j1 = j_upper(k + I * d, rp, tol)?;
    let j2 = j_upper(k + I * (2.0 * d), rp, tol)?;
    let value = j1.value * 2.0 - j2.value;
    Ok(ComplexSample {
        value,
        err_est: 3.0 * (j1.err_est + j2.err_est) + (j1.value - j2.value).norm() * 1e-6,
    })
}

/// Cauchy integral along the real axis, (k/πi) ∫₀^∞ Log(1 + a/w(u)) du/(u² - k²),
/// with the outgoing real-axis root. Slow; kept as a validation path.
pub fn j_real_axis(k: C, rp: &ReducedParams, tol: f64) -> Result<ComplexSample> {
    rp.check()?;
    if !(k.im > 0.0) {
        return Err(Error::Domain("j_real_axis needs Im k > 0".into()));
    }
    let (a, k0) = (rp.a, rp.k0);
    let f = |u: f64| (1.0 + a / w_outgoing(u, k0)).ln() / (u * u - k * k);
    let scale = k.norm() / PI;
    let itol = tol / scale;
    let seg = integrate(
        f,
        &QuadratureSpec::finite(0.0, k0)
            .singularity(k0, -0.5)
            .breakpoints(&[k.re.abs()])
            .tol(itol / 3.0)
            .max_subdivisions(5000),
    )?
    .require(itol / 3.0)?;
    let mid = integrate(
        f,
        &QuadratureSpec::finite(k0, 2.0 * k0 + k.norm())
            .singularity(k0, -0.5)
            .breakpoints(&[k.re.abs()])
            .tol(itol / 3.0)
            .max_subdivisions(5000),
    )?
    .require(itol / 3.0)?;
    let tail = integrate(
        f,
        &QuadratureSpec::ray(2.0 * k0 + k.norm(), 1.0, 1.0 / (k0 + k.norm())).tol(itol / 3.0),
    )?
    .require(itol / 3.0)?;
    Ok(ComplexSample {
        value: k / (PI * I) * (seg.value + mid.value + tail.value),
        err_est: scale * (seg.err_est + mid.err_est + tail.err_est),
    })
}

/// ∫₀^∞ Log(s² + c²)/(s² + 1) ds by quadrature, and its tabulated value
/// π Log(1 + c). Requires Re c > 0.
pub fn log_table_check(c: C, tol: f64) -> Result<(ComplexSample, C)> {
    if !(c.re > 0.0) {
        return Err(Error::Domain("log_table_check needs Re c > 0".into()));
    }
    let f = |s: f64| (s * s + c * c).ln() / (s * s + 1.0);
    let r = integrate(
        f,
        &QuadratureSpec::ray(0.0, 1.0, 1.0)
            .breakpoints(&[c.norm()])
            .tol(tol),
    )?
    .require(tol)?;
    Ok((
        ComplexSample {
            value: r.value,
            err_est: r.err_est,
        },
        PI * (1.0 + c).ln(),
    ))
}

/// Closed form of ∫₀^∞ Log(sqrt(x² + c²) + α)/(x² + 1) dx for c >= 1, |α| <= c.
pub fn log_root_integral_closed(c: f64, alpha: f64) -> Result<f64> {
    if !(c >= 1.0) || !(alpha.abs() <= c) {
        return Err(Error::Domain(format!(
            "need c >= 1 and |alpha| <= c; got c={c}, alpha={alpha}"
        )));
    }
    let r = (c * c - alpha * alpha).sqrt();
    let q = (c * c - 1.0).sqrt();
    let t1 = ti2_side(C::new((q + alpha) / (r + 1.0), 0.0), Ti2Side::Right).re;
    let t2 = ti2_side(C::new((alpha - q) / (1.0 + r), 0.0), Ti2Side::Right).re;
    Ok(FRAC_PI_2 * (1.0 + r).ln() + t1 + t2)
}

/// The same integral by quadrature.
pub fn log_root_integral_quadrature(c: f64, alpha: f64, tol: f64) -> Result<ComplexSample> {
    if !(c >= 1.0) || !(alpha.abs() <= c) {
        return Err(Error::Domain(format!(
            "need c >= 1 and |alpha| <= c; got c={c}, alpha={alpha}"
        )));
    }
    let f = |x: f64| C::new(((x.hypot(c)) + alpha).ln() / (x * x + 1.0), 0.0);
    let r = integrate(
        f,
        &QuadratureSpec::ray(0.0, 1.0, 1.0)
            .breakpoints(&[1.0, c])
            .tol(tol),
    )?
    .require(tol)?;
    Ok(ComplexSample {
        value: r.value,
        err_est: r.err_est,
    })
}

/// |LHS - RHS| of
/// ∫₀^b arctan(√(x²+1-a²)/a)/√(x²+1-a²) dx = Ti₂((s+b)/(1+a)) - Ti₂((s-b)/(1+a)),
/// s = √(b²+1-a²), for 0 < a < 1, b >= 0.
pub fn arctan_root_identity_check(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) || !(b >= 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < a < 1 and b >= 0; got a={a}, b={b}"
        )));
    }
    let g = 1.0 - a * a;
    let f = |x: f64| {
        let r = (x * x + g).sqrt();
        C::new((r / a).atan() / r, 0.0)
    };
    let lhs = if b == 0.0 {
        0.0
    } else {
        integrate(f, &QuadratureSpec::finite(0.0, b).tol(1e-13))?
            .require(1e-13)?
            .value
            .re
    };
    let s = (b * b + g).sqrt();
    let t = |x: f64| ti2_side(C::new(x, 0.0), Ti2Side::Right).re;
    let rhs = t((s + b) / (1.0 + a)) - t((s - b) / (1.0 + a));
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rp() -> ReducedParams {
        ReducedParams::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn closed_form_at_infinity_and_k() {
        let r = rp();
        assert!((splus(C::new(0.0, 1e7), &r).unwrap() - 1.0).norm() < 1e-6);
        assert!((splus(C::new(3e7, 1.0), &r).unwrap() - 1.0).norm() < 1e-6);
        let sk = splus_at_k(&r);
        assert!((sk.norm() - 0.973_248_989_467_730_2).abs() < 1e-13);
        assert!((sk - C::new(0.962_927_032_709_869, -0.141_368_756_012_361_7)).norm() < 1e-12);
        let (lim, err) = splus_limit_from_above(r.k_big, &r).unwrap();
        assert!((lim - sk).norm() < 1e-9 && err < 1e-9, "{lim} {sk} {err}");
        for d in [1e-2, 1e-3, 1e-4] {
            let v = splus(C::new(r.k_big, d), &r).unwrap();
            assert!((v - sk).norm() < 2.0 * d);
        }
        assert!(matches!(
            splus(C::new(r.k_big, 0.0), &r),
            Err(Error::Confluence(_))
        ));
        assert!(splus(C::new(1.0, -0.1), &r).is_err());
    }

    #[test]
    fn free_limit() {
        let r = ReducedParams::new(1e-3, 2.0).unwrap();
        assert!((splus_at_k(&r) - 1.0).norm() < 1e-3);
        let p = product_identity(&r).unwrap();
        assert!(p.via_limit < 1e-6, "{p:?}");
    }

    #[test]
    fn oracle_at_sample_points() {
        let r = rp();
        for k in [
            C::new(1.0, 1.0),
            C::new(-3.0, 0.5),
            C::new(0.0, 2.0),
            C::new(-1.0, 5.0),
            C::new(-0.01, 2.0),
            C::new(3.0, 0.1),
        ] {
            let c = splus(k, &r).unwrap();
            let j = j_direct(k, &r, 1e-11).unwrap();
            let o = (-j.value).exp();
            assert!((c - o).norm() < 1e-8 * c.norm(), "k={k}: {c} vs {o}");
        }
    }

    #[test]
    fn rotated_ray_matches_real_axis_cauchy_integral() {
        let r = rp();
        for k in [C::new(1.0, 1.0), C::new(-3.0, 0.5)] {
            let a = j_direct(k, &r, 1e-10).unwrap();
            let b = j_real_axis(k, &r, 1e-9).unwrap();
            assert!(
                (a.value - b.value).norm() < 1e-8,
                "{k}: {} {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn k_zero_and_real_axis() {
        let r = rp();
        let s0 = splus(C::new(0.0, 0.0), &r).unwrap();
        let j = j_direct(C::new(0.0, 0.0), &r, 1e-11).unwrap();
        assert!((s0 - (-j.value).exp()).norm() < 1e-7);
        let direct = (r.k0 / r.k_big).sqrt()
            * (-(ti2_side((C::new(r.k0, r.a)) / r.k_big, Ti2Side::Right)
                - ti2_side(C::new(r.k0, -r.a) / r.k_big, Ti2Side::Right))
                / PI)
                .exp();
        assert!((s0 - direct).norm() < 1e-14);
        // real-axis factorisation S(k) = S₊(k) S₊(-k)
        for x in [0.5, 1.5, 3.0, 7.0] {
            let w = w_outgoing(x, r.k0);
            let s = w / (w + r.a);
            let p = splus(C::new(x, 0.0), &r).unwrap() * splus(C::new(-x, 0.0), &r).unwrap();
            assert!((p - s).norm() < 1e-13);
            let lim = splus(C::new(-x, 1e-9), &r).unwrap();
            assert!(
                (lim - splus(C::new(-x, 0.0), &r).unwrap()).norm() < 1e-7,
                "x={x}"
            );
        }
    }

    #[test]
    fn log_table() {
        let (q, closed) = log_table_check(C::new(1.0, 0.0), 1e-12).unwrap();
        assert!((closed.re - PI * 2f64.ln()).abs() < 1e-15);
        assert!((q.value - closed).norm() < 1e-10);
        let (q, closed) = log_table_check(C::new(0.7, 0.4), 1e-12).unwrap();
        assert!((q.value - closed).norm() < 1e-10);
    }

    #[test]
    fn log_root_integral_examples() {
        assert!(
            (log_root_integral_closed(1.0, 0.0).unwrap() - FRAC_PI_2 * 2f64.ln()).abs() < 1e-14
        );
        for (c, al) in [(2.0, 1.0), (3.0, 0.0), (1.5, -0.75)] {
            let q = log_root_integral_quadrature(c, al, 1e-12).unwrap();
            let v = log_root_integral_closed(c, al).unwrap();
            assert!(
                (q.value.re - v).abs() < 1e-9,
                "c={c} alpha={al}: {} vs {v}",
                q.value.re
            );
        }
        assert!(log_root_integral_closed(0.5, 0.0).is_err());
        assert!(log_root_integral_closed(2.0, 3.0).is_err());
    }

    #[test]
    fn arctan_root_examples() {
        assert!(arctan_root_identity_check(0.5, 0.0).unwrap() < 1e-15);
        assert!(arctan_root_identity_check(0.5, 1.0).unwrap() < 1e-9);
        assert!(arctan_root_identity_check(0.9, 3.0).unwrap() < 1e-9);
        assert!(arctan_root_identity_check(1.5, 3.0).is_err());
    }

    #[test]
    fn coefficient_identities() {
        let r = rp();
        let (a, k0, kk) = (r.a, r.k0, r.k_big);
        let sp = sigma_plus(C::new(kk, 0.0), &r).unwrap();
        let sk = splus_at_k(&r);
        let lhs = a * a * sp * sp / (2.0 * kk * kk);
        let rhs = 2.0 * (kk - k0) / (kk + k0) * sk * sk;
        assert!((lhs - rhs).norm() < 1e-14);
        assert!((rhs.norm_sqr() - crate::model::reflection(&r)).abs() < 1e-14);
        assert!((sigma_plus(C::new(0.0, 1e8), &r).unwrap() - 1.0).norm() < 1e-6);
        assert!(sigma_plus(C::new(-k0, 0.0), &r).is_err());
    }

    fn params() -> impl Strategy<Value = ReducedParams> {
        (0.1..5.0f64, 0.1..5.0f64).prop_map(|(a, k0)| ReducedParams::new(a, k0).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn product_identity_holds(r in params()) {
            let p = product_identity(&r).unwrap();
            prop_assert!(p.via_limit < 1e-9, "{:?}", p);
            prop_assert!(p.via_real_axis < 1e-14);
        }

        #[test]
        fn modulus_at_k(r in params()) {
            let s = splus_at_k(&r);
            prop_assert!((s.norm_sqr() - (r.k_big + r.k0) / (2.0 * r.k_big)).abs() < 1e-14);
        }

        #[test]
        fn zero_free_and_bounded(x in -6.0..6.0f64, y in 0.01..6.0f64, r in params()) {
            let s = splus(C::new(x, y), &r).unwrap();
            prop_assert!(s.norm() > 0.0 && s.norm().is_finite());
        }

        #[test]
        fn upper_limit_matches_real_axis(x in 0.05..6.0f64, r in params()) {
            prop_assume!((x - r.k0).abs() > 0.05 && (x - r.k_big).abs() > 0.05);
            let v0 = splus(C::new(-x, 0.0), &r).unwrap();
            let v1 = splus(C::new(-x, 1e-10), &r).unwrap();
            prop_assert!((v0 - v1).norm() < 1e-6);
        }
    }
}
