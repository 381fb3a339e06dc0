//! Model parameters, kernels and the branched square root.

use crate::error::{Error, Result};
use crate::ComplexValue as C;
use serde::Serialize;

/// Physical inputs in a consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Total mass.
    pub m: f64,
    /// Reduced mass.
    pub mu: f64,
    /// Strength of the binding delta potential.
    pub lam: f64,
    /// Incident energy.
    pub e: f64,
    pub hbar: f64,
}

/// Reduced wavenumbers `a`, `k0` and `K = sqrt(k0^2 + a^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedParams {
    /// Inverse decay length of the bound pair.
    pub a: f64,
    /// Centre-of-mass wavenumber.
    pub k0: f64,
    /// Shifted wavenumber.
    #[serde(rename = "K")]
    pub k_big: f64,
}

impl ReducedParams {
    /// Builds the reduced set from `a` and `k0`.
    ///
    /// `a = 0` is the free case. The wave-function routines need `k0 > 0`.
    pub fn new(a: f64, k0: f64) -> Result<Self> {
        if !(a.is_finite() && k0.is_finite()) || a < 0.0 || k0 < 0.0 {
            return Err(Error::Domain(format!(
                "need a >= 0, k0 >= 0; got a={a}, k0={k0}"
            )));
        }
        Ok(Self {
            a,
            k0,
            k_big: a.hypot(k0),
        })
    }

    fn require_interacting(&self) -> Result<()> {
        if self.a > 0.0 && self.k0 > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(
                "this operation needs a > 0 and k0 > 0".into(),
            ))
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        self.require_interacting()
    }
}

/// Reduced variables: k0 = sqrt(2 M E)/hbar, a = sqrt(M mu) lam / hbar^2.
pub fn reduce(p: &PhysicalParams) -> Result<ReducedParams> {
    let ok = p.m > 0.0 && p.mu > 0.0 && p.lam >= 0.0 && p.e > 0.0 && p.hbar > 0.0;
    if !ok || p.mu > p.m / 2.0 {
        return Err(Error::Domain(format!("invalid physical parameters {p:?}")));
    }
    let k0 = (2.0 * p.m * p.e).sqrt() / p.hbar;
    let a = (p.m * p.mu).sqrt() * p.lam / (p.hbar * p.hbar);
    ReducedParams::new(a, k0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchConvention {
    /// Re w >= 0 in the closed upper half plane so that exp(-|y| w) decays.
    DecayAtInfinity,
}

/// A value of sqrt(k^2 - k0^2) and the convention that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchedRoot {
    pub value: C,
    pub convention: BranchConvention,
}

/// sqrt(k^2 - k0^2) on the decaying sheet.
///
/// The cuts run from the branch points along the real axis to the origin and
/// then up the imaginary axis. Points on the real segment take the limit
/// from above: `+i sqrt(k0^2-k^2)` for `0 <= k < k0` and `-i sqrt(k0^2-k^2)`
/// for `-k0 < k < 0`. Points on the imaginary axis take the limit from the
/// right. The result is continuous in the open first and second quadrants.
pub fn branch_sqrt(k: C, rp: &ReducedParams) -> Result<BranchedRoot> {
    let k0 = rp.k0;
    if k.im < 0.0 {
        return Err(Error::Domain("branch_sqrt takes Im k >= 0".into()));
    }
    if k.im == 0.0 && k.re.abs() == k0 {
        return Err(Error::BranchPoint(k.re));
    }
    let value = if k.im == 0.0 && k.re.abs() < k0 {
        let q = ((k0 - k.re) * (k0 + k.re)).sqrt();
        if k.re >= 0.0 {
            C::new(0.0, q)
        } else {
            C::new(0.0, -q)
        }
    } else if k.re == 0.0 {
        C::new(0.0, k.im.hypot(k0))
    } else {
        ((k - k0) * (k + k0)).sqrt()
    };
    Ok(BranchedRoot {
        value,
        convention: BranchConvention::DecayAtInfinity,
    })
}

fn root(k: C, rp: &ReducedParams) -> Result<C> {
    branch_sqrt(k, rp).map(|b| b.value)
}

/// σ(k) = 1 - a / sqrt(k^2 - k0^2).
pub fn kernel_sigma(k: C, rp: &ReducedParams) -> Result<C> {
    Ok(1.0 - rp.a / root(k, rp)?)
}

/// S(k) = w / (w + a) with w = sqrt(k^2 - k0^2).
///
/// This equals (k^2-k0^2)/(k^2-K^2) σ(k) and is finite (= 1/2) at k = ±K.
pub fn kernel_s(k: C, rp: &ReducedParams) -> Result<C> {
    let w = root(k, rp)?;
    Ok(w / (w + rp.a))
}

/// S(k) in the rational form (k^2-k0^2)/(k^2-K^2) σ(k). Undefined at ±K.
pub fn kernel_s_rational(k: C, rp: &ReducedParams) -> Result<C> {
    let kk = rp.k_big;
    let den = k * k - kk * kk;
    if den.norm() == 0.0 {
        return Err(Error::Confluence(k.re));
    }
    Ok((k * k - rp.k0 * rp.k0) / den * kernel_sigma(k, rp)?)
}

/// Probability that the bound pair is reflected intact, (K-k0)^2 / K^2.
pub fn reflection(rp: &ReducedParams) -> f64 {
    let (a, k0, kk) = (rp.a, rp.k0, rp.k_big);
    if kk == 0.0 {
        return 0.0;
    }
    // K - k0 = a^2 / (K + k0) avoids cancellation for small a.
    let d = a * a / (kk + k0);
    (d / kk).powi(2)
}

/// Free Green function in momentum space, 1 / (2 sqrt(k^2 - k0^2)).
pub fn green0(k: C, rp: &ReducedParams) -> Result<C> {
    Ok(0.5 / root(k, rp)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rp() -> ReducedParams {
        ReducedParams::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let p = PhysicalParams {
            m: 2.0,
            mu: 0.5,
            lam: 1.0,
            e: 1.0,
            hbar: 1.0,
        };
        let r = reduce(&p).unwrap();
        assert!((r.a - 1.0).abs() < 1e-15 && (r.k0 - 2.0).abs() < 1e-15);
        assert!((r.k_big - 5f64.sqrt()).abs() < 1e-15);
        let p = PhysicalParams {
            m: 1.0,
            mu: 0.25,
            lam: 0.0,
            e: 0.5,
            hbar: 1.0,
        };
        let r = reduce(&p).unwrap();
        assert_eq!(r.a, 0.0);
        assert_eq!(r.k_big, r.k0);
        let bad = PhysicalParams { e: -1.0, ..p };
        assert!(reduce(&bad).is_err());
        assert!(reduce(&PhysicalParams { hbar: 0.0, ..p }).is_err());
    }

    #[test]
    fn branch_sqrt_anchors() {
        let r = rp();
        assert!((root(C::new(3.0, 0.0), &r).unwrap() - 5f64.sqrt()).norm() < 1e-15);
        assert!((root(C::new(1.0, 0.0), &r).unwrap() - C::new(0.0, 3f64.sqrt())).norm() < 1e-15);
        assert!(matches!(
            branch_sqrt(C::new(2.0, 0.0), &r),
            Err(Error::BranchPoint(_))
        ));
        assert!(matches!(
            branch_sqrt(C::new(-2.0, 0.0), &r),
            Err(Error::BranchPoint(_))
        ));
    }

    #[test]
    fn branch_sqrt_continuation_to_imaginary_axis() {
        // Track the root along the quarter circle |k| = 3 from k = 3 to near k = 3i,
        // then down the imaginary axis to 2i, choosing the continuous sign each step.
        let r = rp();
        let f = |k: C| (k * k - 4.0).sqrt();
        let mut prev = C::new(5f64.sqrt(), 0.0);
        let n = 2000;
        let mut path: Vec<C> = (1..=n)
            .map(|i| C::from_polar(3.0, 0.5 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        path.extend((1..=n).map(|i| C::new(1e-9, 3.0 - i as f64 / n as f64)));
        for k in path {
            let v = f(k);
            prev = if (v - prev).norm() < (v + prev).norm() {
                v
            } else {
                -v
            };
        }
        let w = root(C::new(0.0, 2.0), &r).unwrap();
        assert!((w - prev).norm() < 1e-6, "{w} vs {prev}");
        assert!((w.norm() - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kernels() {
        let r = rp();
        let s3 = kernel_sigma(C::new(3.0, 0.0), &r).unwrap();
        assert!((s3.re - (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-15);
        assert!(kernel_sigma(C::new(r.k_big, 0.0), &r).unwrap().norm() < 1e-15);
        let big = kernel_sigma(C::new(1e9, 0.0), &r).unwrap();
        assert!((big - 1.0).norm() < 1e-8);
        let s = kernel_s(C::new(3.0, 0.0), &r).unwrap();
        assert!((s.re - 1.25 * (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-15);
        assert!((kernel_s(C::new(r.k_big, 0.0), &r).unwrap() - 0.5).norm() < 1e-15);
        assert!(kernel_s_rational(C::new(r.k_big, 0.0), &r).is_err());
        let g = green0(C::new(1.0, 0.0), &r).unwrap();
        assert!((g - C::new(0.0, -0.5 / 3f64.sqrt())).norm() < 1e-15);
        assert!((green0(C::new(3.0, 0.0), &r).unwrap().re - 0.5 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reflection_values() {
        assert!((reflection(&rp()) - 0.011_145_618).abs() < 1e-9);
        let small = ReducedParams::new(1.0, 1e-6).unwrap();
        assert!(reflection(&small) > 1.0 - 1e-5);
        assert_eq!(reflection(&ReducedParams::new(0.0, 2.0).unwrap()), 0.0);
        let mut last = 0.0;
        for i in 0..40 {
            let k0 = 10.0 * 0.7f64.powi(i);
            let r = reflection(&ReducedParams::new(1.0, k0).unwrap());
            assert!((0.0..=1.0).contains(&r) && r > last);
            last = r;
        }
    }

    fn uhp() -> impl Strategy<Value = C> {
        (-6.0..6.0f64, 1e-3..6.0f64).prop_map(|(x, y)| C::new(x, y))
    }

    fn params() -> impl Strategy<Value = ReducedParams> {
        (0.05..5.0f64, 0.05..5.0f64).prop_map(|(a, k0)| ReducedParams::new(a, k0).unwrap())
    }

    proptest! {
        #[test]
        fn k_exceeds_k0_and_a(r in params()) {
            prop_assert!(r.k_big > r.k0 && r.k_big > r.a);
            prop_assert!((r.k_big * r.k_big - r.k0 * r.k0 - r.a * r.a).abs() <= 4.0 * f64::EPSILON * r.k_big * r.k_big);
            let x = reflection(&r);
            prop_assert!((0.0..=1.0).contains(&x));
        }

        #[test]
        fn kernel_forms_agree(k in uhp(), r in params()) {
            let s1 = kernel_s(k, &r).unwrap();
            let s2 = kernel_s_rational(k, &r).unwrap();
            prop_assert!((s1 - s2).norm() < 1e-12 * (1.0 + s1.norm()));
            let g = green0(k, &r).unwrap();
            let sig = kernel_sigma(k, &r).unwrap();
            prop_assert!((1.0 - 2.0 * r.a * g - sig).norm() < 1e-12);
        }

        #[test]
        fn root_decays_and_squares(k in uhp(), r in params()) {
            let w = root(k, &r).unwrap();
            prop_assert!(w.re >= 0.0);
            prop_assert!((w * w - (k * k - r.k0 * r.k0)).norm() < 1e-12 * (1.0 + k.norm_sqr()));
        }

        #[test]
        fn root_is_continuous_along_paths(x0 in -5.0..5.0f64, y0 in 0.05..5.0f64, x1 in -5.0..5.0f64, y1 in 0.05..5.0f64) {
            // Straight UHP segments that do not cross the imaginary axis.
            prop_assume!(x0 * x1 > 0.0);
            let r = rp();
            let a = C::new(x0, y0);
            let b = C::new(x1, y1);
            let n = 400;
            let mut prev = root(a, &r).unwrap();
            for i in 1..=n {
                let k = a + (b - a) * (i as f64 / n as f64);
                let w = root(k, &r).unwrap();
                let step = (b - a).norm() / n as f64;
                // |dw/dk| = |k/w| is bounded by |k| / sqrt(|Im k^2 ...|); use a loose Lipschitz bound
                let bound = 4.0 * step * k.norm() / w.norm().max(1e-3);
                prop_assert!((w - prev).norm() <= bound + 1e-12);
                prev = w;
            }
        }

        #[test]
        fn kernel_s_tends_to_one(t in 0.0..std::f64::consts::PI, r in params()) {
            let k = C::from_polar(1e8, t);
            prop_assume!(k.re != 0.0);
            prop_assert!((kernel_s(k, &r).unwrap() - 1.0).norm() < 1e-6);
        }
    }
}
