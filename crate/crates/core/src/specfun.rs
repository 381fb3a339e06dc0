//! Complex dilogarithm and inverse tangent integral.
//!
//! `dilog` uses the defining power series for |z| <= 1/2. Elsewhere the
//! argument is mapped by inversion (z -> 1/z), reflection (z -> 1 - z) or the
//! z -> z/(z-1) pair so that u = -log(1 - w) is small, and the Bernoulli
//! series in u is summed. On the cut [1, inf) the value is the limit from
//! below unless a side is requested.

use crate::error::{Error, Result};
use crate::ComplexValue as C;
use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

/// Catalan's constant, Ti₂(1).
pub const CATALAN: f64 = 0.915_965_594_177_219_015_05;

/// Which side of the dilogarithm cut [1, inf) a real argument is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilogSide {
    Above,
    Below,
}

/// Which side of an imaginary-axis cut of `ti2` a point is approached from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ti2Side {
    /// Re z -> 0+
    Right,
    /// Re z -> 0-
    Left,
}

// B_{2m} / (2m+1)! for m = 1..11, coefficients of u^{2m+1}.
const BERNOULLI: [f64; 11] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211680.0,
    -1.0 / 10886400.0,
    1.0 / 526901760.0,
    -4.064761645144225526e-11,
    8.921691020456452555e-13,
    -1.993929586072107569e-14,
    4.518980029619918192e-16,
    -174611.0 / 330.0 / 51090942171709440000.0,
    854513.0 / 138.0 / 25852016738884976640000.0,
];

fn bernoulli_series(u: C) -> C {
    let u2 = u * u;
    let mut acc = C::new(0.0, 0.0);
    for &b in BERNOULLI.iter().rev() {
        acc = acc * u2 + b;
    }
    u + u2 * (-0.25 + u * acc)
}

fn power_series(z: C) -> C {
    let mut sum = C::new(0.0, 0.0);
    let mut zn = z;
    for n in 1..200 {
        let nf = n as f64;
        let term = zn / (nf * nf);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
        zn *= z;
    }
    sum
}

fn dilog_real_above_one(x: f64, side: DilogSide) -> C {
    let l = x.ln();
    let re = 2.0 * PI2_6 - 0.5 * l * l - dilog(C::new(1.0 / x, 0.0)).re;
    let im = match side {
        DilogSide::Above => PI * l,
        DilogSide::Below => -PI * l,
    };
    C::new(re, im)
}

/// Dilogarithm Li₂(z) = -∫₀^z log(1-u)/u du, principal branch.
///
/// Real arguments above 1 return the limit from below the cut.
pub fn dilog(z: C) -> C {
    dilog_side(z, DilogSide::Below)
}

/// Dilogarithm with an explicit side for real arguments on the cut.
/// `side` is ignored off the cut.
pub fn dilog_side(z: C, side: DilogSide) -> C {
    if z.im == 0.0 {
        if z.re == 1.0 {
            return C::new(PI2_6, 0.0);
        }
        if z.re > 1.0 {
            return dilog_real_above_one(z.re, side);
        }
    }
    let nz = z.norm_sqr();
    if nz <= 0.25 {
        return power_series(z);
    }
    let rz = z.re;
    let one = C::new(1.0, 0.0);
    let v = if rz <= 0.5 {
        if nz > 1.0 {
            let u = -(one - one / z).ln();
            let l = (-z).ln();
            -bernoulli_series(u) - 0.5 * l * l - PI2_6
        } else {
            bernoulli_series(-(one - z).ln())
        }
    } else if nz <= 2.0 * rz {
        let u = -z.ln();
        -bernoulli_series(u) + u * (one - z).ln() + PI2_6
    } else {
        let u = -(one - one / z).ln();
        let l = (-z).ln();
        -bernoulli_series(u) - 0.5 * l * l - PI2_6
    };
    if z.im == 0.0 {
        C::new(v.re, 0.0)
    } else {
        v
    }
}

fn on_ti2_cut(z: C) -> bool {
    z.re == 0.0 && z.im.abs() > 1.0
}

/// Inverse tangent integral Ti₂(z) = ∫₀^z arctan(u)/u du.
///
/// Fails with [`Error::OnBranchCut`] for z on the imaginary axis with |Im z| > 1.
pub fn ti2(z: C) -> Result<C> {
    if on_ti2_cut(z) {
        return Err(Error::OnBranchCut { re: z.re, im: z.im });
    }
    Ok(ti2_unchecked(z, Ti2Side::Right))
}

/// `ti2` with the side of the imaginary-axis cuts fixed by `side`.
pub fn ti2_side(z: C, side: Ti2Side) -> C {
    ti2_unchecked(z, side)
}

fn ti2_unchecked(z: C, side: Ti2Side) -> C {
    let iz = C::new(-z.im, z.re);
    let (s_plus, s_minus) = match side {
        Ti2Side::Right => (DilogSide::Above, DilogSide::Below),
        Ti2Side::Left => (DilogSide::Below, DilogSide::Above),
    };
    let d = dilog_side(iz, s_plus) - dilog_side(-iz, s_minus);
    let v = C::new(d.im / 2.0, -d.re / 2.0);
    if z.im == 0.0 {
        C::new(v.re, 0.0)
    } else {
        v
    }
}

/// Imaginary part of [`ti2`].
pub fn im_ti2(z: C) -> Result<f64> {
    ti2(z).map(|v| v.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Gauss-Legendre on the straight path [0, z], split into panels.
    fn path_integral(z: C, f: impl Fn(C) -> C) -> C {
        let (x, w) = gl20();
        let n = 64;
        let mut s = C::new(0.0, 0.0);
        for p in 0..n {
            let a = p as f64 / n as f64;
            let b = (p + 1) as f64 / n as f64;
            for i in 0..x.len() {
                let t = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
                s += f(z * t) * z * (0.5 * (b - a) * w[i]);
            }
        }
        s
    }

    fn gl20() -> (Vec<f64>, Vec<f64>) {
        // Newton iteration on Legendre P_20.
        let n = 20;
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for i in 1..=n {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            xs.push(x);
            ws.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        (xs, ws)
    }

    fn li2_oracle(z: C) -> C {
        let one = C::new(1.0, 0.0);
        path_integral(z, |u| {
            if u.norm() == 0.0 {
                one
            } else {
                -(one - u).ln() / u
            }
        })
    }

    fn ti2_oracle(z: C) -> C {
        path_integral(z, |u| {
            if u.norm() == 0.0 {
                C::new(1.0, 0.0)
            } else {
                u.atan() / u
            }
        })
    }

    #[test]
    fn dilog_known_values() {
        assert_eq!(dilog(C::new(0.0, 0.0)), C::new(0.0, 0.0));
        assert!((dilog(C::new(1.0, 0.0)).re - PI2_6).abs() < 1e-15);
        let half = PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2);
        assert!((dilog(C::new(0.5, 0.0)) - half).norm() < 1e-15);
        assert!((dilog(C::new(-1.0, 0.0)).re + PI * PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn dilog_matches_path_quadrature() {
        let pts = [
            C::new(0.3, 0.4),
            C::new(0.9, 0.2),
            C::new(-3.0, 1.0),
            C::new(2.0, -1.5),
            C::new(0.6, -0.7),
            C::new(-0.2, 6.0),
            C::new(7.0, 7.0),
            C::new(1.0, 0.3),
        ];
        for z in pts {
            let d = (dilog(z) - li2_oracle(z)).norm();
            assert!(d < 1e-13, "z = {z}, diff {d:e}");
        }
    }

    #[test]
    fn dilog_cut_sides() {
        let x = 3.0;
        let below = dilog(C::new(x, 0.0));
        let above = dilog_side(C::new(x, 0.0), DilogSide::Above);
        let near_below = dilog(C::new(x, -1e-12));
        let near_above = dilog(C::new(x, 1e-12));
        assert!((below - near_below).norm() < 1e-10);
        assert!((above - near_above).norm() < 1e-10);
        assert!((above.im - PI * x.ln()).abs() < 1e-14);
    }

    #[test]
    fn ti2_known_values() {
        assert_eq!(ti2(C::new(0.0, 0.0)).unwrap(), C::new(0.0, 0.0));
        assert!((ti2(C::new(1.0, 0.0)).unwrap().re - CATALAN).abs() < 1e-15);
        let z = C::new(2.0, 1.0) / 5f64.sqrt();
        assert!((ti2(z).unwrap() - ti2_oracle(z)).norm() < 1e-13);
        let z = C::new(0.0, 0.5);
        assert!((im_ti2(z).unwrap() - ti2_oracle(z).im).abs() < 1e-13);
        assert_eq!(im_ti2(C::new(2.7, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn ti2_cut_requires_side() {
        let z = C::new(0.0, 2.0);
        assert!(matches!(ti2(z), Err(Error::OnBranchCut { .. })));
        let r = ti2_side(z, Ti2Side::Right);
        let l = ti2_side(z, Ti2Side::Left);
        assert!((r - ti2(C::new(1e-13, 2.0)).unwrap()).norm() < 1e-9);
        assert!((l - ti2(C::new(-1e-13, 2.0)).unwrap()).norm() < 1e-9);
        assert!((r - l).norm() > 1.0);
    }

    fn unit_disk() -> impl Strategy<Value = C> {
        (0.0..0.99f64, -PI..PI).prop_map(|(r, t)| C::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ti2_is_odd(re in -1.4..1.4f64, im in -1.4..1.4f64) {
            let z = C::new(re, im);
            prop_assume!(!on_ti2_cut(z));
            let s = ti2(z).unwrap() + ti2(-z).unwrap();
            prop_assert!(s.norm() < 1e-12);
        }

        #[test]
        fn dilog_reflection(z in unit_disk()) {
            prop_assume!(z.norm() > 1e-3);
            let one = C::new(1.0, 0.0);
            let lhs = dilog(z) + dilog(one - z);
            let rhs = PI2_6 - z.ln() * (one - z).ln();
            prop_assert!((lhs - rhs).norm() < 1e-11);
        }

        #[test]
        fn ti2_matches_series(r in 0.0..0.5f64, t in -PI..PI) {
            let z = C::from_polar(r, t);
            let mut s = C::new(0.0, 0.0);
            let mut zp = z;
            for n in 0..60 {
                let d = (2 * n + 1) as f64;
                s += zp * (if n % 2 == 0 { 1.0 } else { -1.0 }) / (d * d);
                zp *= z * z;
            }
            prop_assert!((ti2(z).unwrap() - s).norm() < 1e-12);
        }

        #[test]
        fn dilog_matches_power_series(r in 0.0..0.5f64, t in -PI..PI) {
            let z = C::from_polar(r, t);
            let mut s = C::new(0.0, 0.0);
            let mut zp = z;
            for n in 1..80 {
                s += zp / ((n * n) as f64);
                zp *= z;
            }
            prop_assert!((dilog(z) - s).norm() < 1e-13);
        }

        #[test]
        fn dilog_inversion(r in 1.05..10.0f64, t in 0.01..3.1f64) {
            // Li2(z) + Li2(1/z) = -pi^2/6 - log(-z)^2 / 2 off the real axis
            let z = C::from_polar(r, t);
            let l = (-z).ln();
            let lhs = dilog(z) + dilog(C::new(1.0, 0.0) / z);
            prop_assert!((lhs + PI2_6 + 0.5 * l * l).norm() < 1e-12);
        }
    }
}
