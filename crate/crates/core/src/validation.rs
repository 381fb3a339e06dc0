//! Invariant suite shared by the `validate` command and the tests.

use crate::model::{kernel_s, kernel_s_rational, reflection, ReducedParams};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::specfun::{dilog, ti2, CATALAN};
use crate::wavefunction::{
    evaluate, far_field, free_vertical_leg, phi_integral, psi_atom, psi_unified_extrapolated,
    reflected_coefficient, unified_eps_set, EvalOptions, FreeRegionTable, Method, UnifiedSetup,
};
use crate::wiener_hopf::{
    j_direct, log_root_integral_closed, log_root_integral_quadrature, product_identity, sigma_plus,
    splus, splus_at_k,
};
use crate::{ComplexValue as C, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Module names accepted by [`ValidationOptions::only`].
pub const MODULES: [&str; 5] = [
    "specfun",
    "model",
    "quadrature",
    "wiener_hopf",
    "wavefunction",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(module: &'static str, name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self {
            module,
            name: name.into(),
            residual,
            threshold,
            passed: residual.is_finite() && residual < threshold,
        }
    }

    fn from_result(module: &'static str, name: &str, r: Result<f64>, threshold: f64) -> Self {
        match r {
            Ok(v) => Self::new(module, name, v, threshold),
            Err(e) => Self {
                module,
                name: format!("{name} ({e})"),
                residual: f64::NAN,
                threshold,
                passed: false,
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationOptions {
    /// Restrict to one module.
    pub only: Option<String>,
    /// Negative control: evaluate the regional routes with the wrong side
    /// limit of the root on the cut.
    pub inject_wrong_branch: bool,
}

/// Deterministic points in (lo, hi)² from a fixed linear congruential sequence.
pub fn sample_points(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut s = seed;
    let mut next = || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        lo + (hi - lo) * ((s >> 11) as f64 / (1u64 << 53) as f64)
    };
    (0..n).map(|_| (next(), next())).collect()
}

/// Runs the suite.
pub fn run(opts: &ValidationOptions) -> Vec<CheckResult> {
    let want = |m: &str| opts.only.as_deref().is_none_or(|o| o == m);
    let mut out = Vec::new();
    if want("specfun") {
        out.extend(specfun_checks());
    }
    if want("model") {
        out.extend(model_checks());
    }
    if want("quadrature") {
        out.extend(quadrature_checks());
    }
    if want("wiener_hopf") {
        out.extend(wiener_hopf_checks());
    }
    if want("wavefunction") {
        out.extend(wavefunction_checks(opts.inject_wrong_branch));
    }
    out
}

fn specfun_checks() -> Vec<CheckResult> {
    const M: &str = "specfun";
    let one = C::new(1.0, 0.0);
    let mut v = vec![
        CheckResult::new(
            M,
            "Li2(1) = pi^2/6",
            (dilog(one).re - PI * PI / 6.0).abs(),
            1e-12,
        ),
        CheckResult::from_result(
            M,
            "Ti2(1) = Catalan",
            ti2(one).map(|t| (t.re - CATALAN).abs()),
            1e-12,
        ),
    ];
    let pts = sample_points(100, -2.0, 2.0, 7);
    let odd = pts
        .iter()
        .map(|&(x, y)| {
            let z = C::new(x, y);
            match (ti2(z), ti2(-z)) {
                (Ok(a), Ok(b)) => (a + b).norm(),
                _ => f64::NAN,
            }
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(M, "Ti2 odd, 100 points", odd, 1e-11));
    let refl = sample_points(100, -2.0, 2.0, 11)
        .iter()
        .map(|&(x, y)| {
            let z = C::new(x, y.abs() + 0.05);
            let rhs = PI * PI / 6.0 - z.ln() * (1.0 - z).ln();
            (dilog(z) + dilog(1.0 - z) - rhs).norm()
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "Li2 reflection, 100 points",
        refl,
        1e-11,
    ));
    v
}

fn model_checks() -> Vec<CheckResult> {
    const M: &str = "model";
    let rp = ReducedParams::new(1.0, 2.0).unwrap();
    let mut v = vec![
        CheckResult::new(
            M,
            "reflection(1, 2) = (sqrt5-2)^2/5",
            (reflection(&rp) - (5f64.sqrt() - 2.0).powi(2) / 5.0).abs(),
            1e-15,
        ),
        CheckResult::new(
            M,
            "total reflection as k0 -> 0",
            1.0 - reflection(&ReducedParams::new(1.0, 1e-6).unwrap()),
            1e-5,
        ),
    ];
    let dev = sample_points(50, -4.0, 4.0, 3)
        .iter()
        .map(|&(x, y)| {
            let k = C::new(x, y.abs() + 0.01);
            match (kernel_s(k, &rp), kernel_s_rational(k, &rp)) {
                (Ok(a), Ok(b)) => (a - b).norm(),
                _ => f64::NAN,
            }
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "two forms of S agree, 50 points",
        dev,
        1e-12,
    ));
    v
}

fn quadrature_checks() -> Vec<CheckResult> {
    const M: &str = "quadrature";
    let sing = integrate(
        |x| C::new(1.0 / x.sqrt(), 0.0),
        &QuadratureSpec::finite(0.0, 1.0)
            .singularity(0.0, -0.5)
            .tol(1e-12),
    )
    .map(|r| (r.value.re - 2.0).abs());
    let ray = integrate(
        |x| C::from_polar((-x).exp(), 5.0 * x),
        &QuadratureSpec::ray(0.0, 1.0, 1.0)
            .oscillation(2.0 * PI / 5.0)
            .tol(1e-12),
    )
    .map(|r| (r.value - 1.0 / C::new(1.0, -5.0)).norm());
    vec![
        CheckResult::from_result(M, "int_0^1 x^-1/2 = 2", sing, 1e-10),
        CheckResult::from_result(M, "int_0^inf e^{(-1+5i)x} = 1/(1-5i)", ray, 1e-10),
    ]
}

fn wiener_hopf_checks() -> Vec<CheckResult> {
    const M: &str = "wiener_hopf";
    let mut v = Vec::new();
    let worst = sample_points(20, 0.1, 5.0, 42)
        .iter()
        .map(|&(a, k0)| {
            product_identity(&ReducedParams::new(a, k0).unwrap())
                .map(|p| p.via_real_axis.max(p.via_limit))
                .unwrap_or(f64::NAN)
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "S+(K) S+(-K) = 1/2, 20 parameter sets",
        worst,
        1e-9,
    ));
    let rp = ReducedParams::new(1.0, 2.0).unwrap();
    let sk = splus_at_k(&rp);
    v.push(CheckResult::new(
        M,
        "|S+(K)|^2 = (K+k0)/(2K)",
        (sk.norm_sqr() - (rp.k_big + rp.k0) / (2.0 * rp.k_big)).abs(),
        1e-12,
    ));
    let oracle = [
        C::new(0.5, 0.5),
        C::new(-1.0, 2.0),
        C::new(3.0, 0.1),
        C::new(0.0, 4.0),
    ]
    .iter()
    .map(|&k| match (splus(k, &rp), j_direct(k, &rp, 1e-12)) {
        (Ok(s), Ok(j)) => (s - (-j.value).exp()).norm() / s.norm(),
        _ => f64::NAN,
    })
    .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "closed form vs exp(-J) oracle",
        oracle,
        1e-6,
    ));
    let b = log_root_integral_closed(1.0, 0.0).map(|c| (c - 0.5 * PI * 2f64.ln()).abs());
    v.push(CheckResult::from_result(
        M,
        "arctangent-log integral at c=1, alpha=0",
        b,
        1e-10,
    ));
    let bq = [(1.5, 0.5), (2.0, -1.0), (3.0, 2.5)]
        .iter()
        .map(|&(c, al)| {
            match (
                log_root_integral_closed(c, al),
                log_root_integral_quadrature(c, al, 1e-12),
            ) {
                (Ok(x), Ok(q)) => (x - q.value.re).abs() / x.abs(),
                _ => f64::NAN,
            }
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "arctangent-log closed form vs quadrature",
        bq,
        1e-7,
    ));
    let coef = sample_points(10, 0.2, 4.0, 5)
        .iter()
        .map(|&(a, k0)| {
            let rp = ReducedParams::new(a, k0).unwrap();
            let kk = C::new(rp.k_big, 0.0);
            match sigma_plus(kk, &rp) {
                Ok(sp) => {
                    let lhs = a * a * sp * sp / (2.0 * rp.k_big * rp.k_big);
                    let s = splus_at_k(&rp);
                    let rhs = 2.0 * (rp.k_big - rp.k0) / (rp.k_big + rp.k0) * s * s;
                    (lhs - rhs).norm()
                }
                Err(_) => f64::NAN,
            }
        })
        .fold(0.0, f64::max);
    v.push(CheckResult::new(
        M,
        "reflected coefficient, two factorizations",
        coef,
        1e-10,
    ));
    v
}

fn wavefunction_checks(wrong_branch: bool) -> Vec<CheckResult> {
    const M: &str = "wavefunction";
    let rp = ReducedParams::new(1.0, 2.0).unwrap();
    let mut v = Vec::new();
    let regional = EvalOptions {
        method: Method::RegionalWithVerticalLeg,
        tol: 1e-10,
        eps: 1e-3,
        wrong_branch,
    };
    let route = [(-5.0, 0.0), (-5.0, 2.0), (3.0, 1.0)]
        .iter()
        .map(|&(r, y)| -> Result<f64> {
            let a = evaluate(r, y, &rp, &regional)?;
            let u = psi_unified_extrapolated(r, y, &rp, &unified_eps_set(1e-3), 1e-10)?;
            Ok((a.psi - u.psi).norm() / a.psi.norm())
        })
        .try_fold(0.0, |m: f64, x| x.map(|x| m.max(x)));
    v.push(CheckResult::from_result(
        M,
        "route equivalence, 3 points",
        route,
        1e-4,
    ));
    let sym = [(-3.0, 1.5), (2.0, 0.7)]
        .iter()
        .map(|&(r, y)| -> Result<f64> {
            let a = evaluate(r, y, &rp, &regional)?;
            let b = evaluate(r, -y, &rp, &regional)?;
            Ok((a.psi - b.psi).norm())
        })
        .try_fold(0.0, |m: f64, x| x.map(|x| m.max(x)));
    v.push(CheckResult::from_result(
        M,
        "psi(R, y) = psi(R, -y)",
        sym,
        1e-15,
    ));
    let flux = reflected_coefficient(&rp).map(|c| (c.norm_sqr() - reflection(&rp)).abs());
    v.push(CheckResult::from_result(
        M,
        "reflected flux = reflection",
        flux,
        1e-10,
    ));
    let inc = UnifiedSetup::new(&rp, 1e-3).map(|u| (u.incident_coefficient(&rp) - 1.0).norm());
    v.push(CheckResult::from_result(
        M,
        "unit incident amplitude from residue",
        inc,
        1e-6,
    ));
    let atom = (|| -> Result<f64> {
        let s = psi_atom(2.0, 40.0, &rp, 1e-12)?;
        Ok((s.psi + phi_integral(2.0, 40.0, &rp, 1e-12)?.value).norm())
    })();
    v.push(CheckResult::from_result(
        M,
        "psi = -Phi far from the axis",
        atom,
        1e-15,
    ));
    // far-field modulus spread over y in [0, 0.05|R|]
    let spread = FreeRegionTable::new(-200.0, 10.0, &rp).and_then(|t| {
        let m: Vec<f64> = (0..=40)
            .map(|i| {
                t.sample(0.25 * i as f64, Method::RegionalWithVerticalLeg)
                    .map(|s| s.psi.norm())
            })
            .collect::<Result<_>>()?;
        let hi = m.iter().cloned().fold(f64::MIN, f64::max);
        let lo = m.iter().cloned().fold(f64::MAX, f64::min);
        Ok((hi - lo) / hi)
    });
    v.push(CheckResult::from_result(
        M,
        "modulus y-independent at R=-200, |y|<10",
        spread,
        0.02,
    ));
    let ff = far_field(-200.0, 0.0, &rp)
        .and_then(|f| Ok(((far_field(-200.0, 1.0, &rp)?.psi / f.psi).arg() + 2.0).abs()));
    v.push(CheckResult::from_result(
        M,
        "far-field phase advance k0 per unit y",
        ff,
        1e-9,
    ));
    // exponential decay would make the ratio e^{-3 k0}-small
    let leg = (|| -> Result<f64> {
        let l1 = free_vertical_leg(-1.0, 0.0, &rp, 1e-12)?.value.norm();
        let l4 = free_vertical_leg(-4.0, 0.0, &rp, 1e-12)?.value.norm();
        Ok(l4 / l1)
    })();
    v.push(CheckResult::from_result(
        M,
        "vertical leg |L(-4)|/|L(-1)| below e^{-3}",
        leg,
        (-3.0f64).exp(),
    ));
    v
}
