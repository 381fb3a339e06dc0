//! Two-particle wave function ψ(R, y) on both sides of the interaction line.
//!
//! For R < 0 (free region) ψ is the integral around the cut of
//! sqrt((k0+k)/(k0-k)) / (S₊(k)(k²-K²)) that runs from k0 to the origin and
//! down the imaginary axis. For R > 0 (atom region) ψ is the incident and
//! reflected bound pair minus the integral Φ around the cut from -k0.
//! The single shifted-line integral with a complex k0 is an independent
//! route valid in both regions.

use crate::error::{Error, Result};
use crate::model::ReducedParams;
use crate::quadrature::{extrapolate_to_zero, integrate, PanelRule, QuadratureSpec};
use crate::specfun::{dilog, ti2_side, Ti2Side};
use crate::wiener_hopf::{splus, splus_at_k, splus_closed};
use crate::{ComplexSample, ComplexValue as C};
use serde::Serialize;
use std::f64::consts::{FRAC_1_PI, PI};

const I: C = C::new(0.0, 1.0);

/// How a sample was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    /// Both sides of the real cut segment, no imaginary-axis leg (R < 0);
    /// the exact contour (R > 0).
    Regional,
    /// The complete contour in either region.
    RegionalWithVerticalLeg,
    /// The shifted-line integral with complex k0, extrapolated in eps.
    UnifiedA7,
    /// Far-field closed form for R → -∞.
    FarField32,
    /// Steepest-descent closed form for Φ, R → +∞.
    Steepest35,
    /// Upper side of the real cut segment only (R < 0).
    Approx31,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Regional,
        Method::RegionalWithVerticalLeg,
        Method::UnifiedA7,
        Method::FarField32,
        Method::Steepest35,
        Method::Approx31,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Regional => "REGIONAL",
            Method::RegionalWithVerticalLeg => "REGIONAL_WITH_VERTICAL_LEG",
            Method::UnifiedA7 => "UNIFIED_A7",
            Method::FarField32 => "FAR_FIELD_32",
            Method::Steepest35 => "STEEPEST_35",
            Method::Approx31 => "APPROX_31",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One value of ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSample {
    #[serde(rename = "R")]
    pub r: f64,
    pub y: f64,
    pub psi: C,
    /// Quadrature error estimate.
    pub err_est: f64,
    pub method: Method,
    pub converged: bool,
    /// Size of the contour pieces dropped by an approximate method
    /// (zero for exact routes and closed forms).
    pub neglected: f64,
}

/// ψ on a rectangular (R, y) grid, stored R-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveGrid {
    pub params: ReducedParams,
    pub r_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub samples: Vec<WaveSample>,
    pub method: Method,
    pub tol: f64,
}

impl WaveGrid {
    /// Assembles a grid from samples listed R-major.
    pub fn from_samples(
        params: ReducedParams,
        r_values: Vec<f64>,
        y_values: Vec<f64>,
        samples: Vec<WaveSample>,
        method: Method,
        tol: f64,
    ) -> Result<Self> {
        if samples.len() != r_values.len() * y_values.len()
            || r_values.is_empty()
            || y_values.is_empty()
        {
            return Err(Error::Domain(
                "grid dimensions do not match the sample count".into(),
            ));
        }
        Ok(Self {
            params,
            r_values,
            y_values,
            samples,
            method,
            tol,
        })
    }

    /// Evaluates every grid point in order.
    pub fn compute(
        params: &ReducedParams,
        r_values: &[f64],
        y_values: &[f64],
        opts: &EvalOptions,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(r_values.len() * y_values.len());
        for &r in r_values {
            for &y in y_values {
                samples.push(evaluate(r, y, params, opts)?);
            }
        }
        Self::from_samples(
            *params,
            r_values.to_vec(),
            y_values.to_vec(),
            samples,
            opts.method,
            opts.tol,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> &WaveSample {
        &self.samples[i * self.y_values.len() + j]
    }

    pub fn non_converged(&self) -> usize {
        self.samples.iter().filter(|s| !s.converged).count()
    }
}

/// Phases of the two asymptotic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPhases {
    /// (2/π) Im Ti₂((k0 + ia)/K).
    pub phi_minus: f64,
    /// ½Li₂(a²/K²) - 2Li₂(a/K) - Im Ti₂((k0ξ + ia)/(K - k0 + ½k0ξ²)).
    pub phi_plus: f64,
    pub xi: f64,
}

impl AsymptoticPhases {
    pub fn new(rp: &ReducedParams, xi: f64) -> Self {
        let (a, k0, kk) = (rp.a, rp.k0, rp.k_big);
        let phi_minus = 2.0 * FRAC_1_PI * ti2_side(C::new(k0, a) / kk, Ti2Side::Right).im;
        let li = |x: f64| dilog(C::new(x, 0.0)).re;
        let z = C::new(k0 * xi, a) / (kk - k0 + 0.5 * k0 * xi * xi);
        let phi_plus =
            0.5 * li(a * a / (kk * kk)) - 2.0 * li(a / kk) - ti2_side(z, Ti2Side::Right).im;
        Self {
            phi_minus,
            phi_plus,
            xi,
        }
    }
}

/// Evaluation settings for [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub method: Method,
    pub tol: f64,
    /// Smallest eps of the unified route; see [`unified_eps_set`].
    pub eps: f64,
    /// Negative control: take the wrong side limit of the root on the cut.
    pub wrong_branch: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            method: Method::RegionalWithVerticalLeg,
            tol: 1e-8,
            eps: 1e-3,
            wrong_branch: false,
        }
    }
}

impl EvalOptions {
    pub fn method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Default absolute tolerance at (R, y).
pub fn default_tol(r: f64, y: f64) -> f64 {
    if r.abs() > 100.0 || y.abs() > 100.0 {
        1e-6
    } else {
        1e-8
    }
}

#[derive(Debug, Clone, Copy)]
struct Setup {
    a: f64,
    k0: f64,
    kk: f64,
    sk: C,
    c0: C,
}

impl Setup {
    fn new(rp: &ReducedParams) -> Result<Self> {
        rp.check()?;
        let (a, k0, kk) = (rp.a, rp.k0, rp.k_big);
        let sk = splus_at_k(rp);
        Ok(Self {
            a,
            k0,
            kk,
            sk,
            c0: 2.0 * a * kk * sk / (kk + k0),
        })
    }

    fn rp(&self) -> ReducedParams {
        ReducedParams {
            a: self.a,
            k0: self.k0,
            k_big: self.kk,
        }
    }

    fn splus_real(&self, k: f64) -> C {
        splus(C::new(k, 0.0), &self.rp()).expect("S+ on the real segment")
    }

    fn splus_imag(&self, t: f64) -> C {
        splus(C::new(0.0, t), &self.rp()).expect("S+ on the imaginary axis")
    }

    // k = k0 - t^2 on (0, k0): 2 sqrt(2k0-t^2) e^{-ikR} / ((K^2-k^2) S₊(k)), and q.
    fn free_seg(&self, t: f64, r: f64) -> (C, f64) {
        let k0 = self.k0;
        let g = (2.0 * k0 - t * t).max(0.0).sqrt();
        let k = k0 - t * t;
        let q = t * g;
        let base = 2.0 * g * C::from_polar(1.0, -k * r)
            / ((self.kk * self.kk - k * k) * self.splus_real(k));
        (base, q)
    }

    // k = it: 2 e^{iθ} e^{tR} / ((t^2+K^2) S₊(it)), and Ω.
    fn free_leg(&self, t: f64, r: f64) -> (C, f64) {
        let th = t.atan2(self.k0);
        let base = 2.0 * C::from_polar((t * r).exp(), th)
            / ((t * t + self.kk * self.kk) * self.splus_imag(t));
        (base, t.hypot(self.k0))
    }

    // k = -k0 + t^2 on (-k0, 0): 2t^2/sqrt(2k0-t^2) S₊(-k) e^{-ikR} / (k^2-K^2), and q.
    fn atom_seg(&self, t: f64, r: f64) -> (C, f64) {
        let k0 = self.k0;
        let g = (2.0 * k0 - t * t).max(0.0).sqrt();
        let k = -k0 + t * t;
        let base = 2.0 * t * t / g * self.splus_real(-k) * C::from_polar(1.0, -k * r)
            / (k * k - self.kk * self.kk);
        (base, t * g)
    }

    // k = -it: 2 e^{-iθ} S₊(it) e^{-tR} / (t^2+K^2), and Ω.
    fn atom_leg(&self, t: f64, r: f64) -> (C, f64) {
        let th = t.atan2(self.k0);
        let base = 2.0 * C::from_polar((-t * r).exp(), -th) * self.splus_imag(t)
            / (t * t + self.kk * self.kk);
        (base, t.hypot(self.k0))
    }

    fn seg_wavelength(&self, r: f64, y: f64) -> Option<f64> {
        let rate = 2.0 * self.k0.sqrt() * r.abs() + (2.0 * self.k0).sqrt() * y.abs();
        (rate > 0.0).then(|| 2.0 * PI / rate)
    }
}

// sin(y q)/q, finite at q = 0
fn sinc_mul(y: f64, q: f64) -> f64 {
    let x = y * q;
    if x.abs() < 1e-4 {
        y * (1.0 - x * x / 6.0)
    } else {
        x.sin() / q
    }
}

fn seg_spec(st: &Setup, r: f64, y: f64, tol: f64) -> QuadratureSpec {
    let mut s = QuadratureSpec::finite(0.0, st.k0.sqrt())
        .tol(tol)
        .max_subdivisions(20000);
    if let Some(w) = st.seg_wavelength(r, y) {
        s = s.oscillation(w);
    }
    s
}

fn leg_spec(r: f64, y: f64, tol: f64) -> QuadratureSpec {
    let mut s = QuadratureSpec::ray(0.0, 1.0, r.abs())
        .tol(tol)
        .max_subdivisions(20000);
    if y != 0.0 {
        s = s.oscillation(2.0 * PI / y.abs());
    }
    s
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain("tol must be positive".into()))
    }
}

/// ψ for R < 0.
///
/// Without the vertical leg this is the upper-side segment integral
/// (method `APPROX_31`), and `neglected` holds the magnitude of the rest of
/// the contour. With it, the complete contour is evaluated
/// (`REGIONAL_WITH_VERTICAL_LEG`).
pub fn psi_free(
    r: f64,
    y: f64,
    rp: &ReducedParams,
    tol: f64,
    include_vertical_leg: bool,
) -> Result<WaveSample> {
    if include_vertical_leg {
        psi_free_exact(r, y, rp, tol, false)
    } else {
        psi_approx31(r, y, rp, tol)
    }
}

fn free_region_guard(r: f64) -> Result<()> {
    if r == 0.0 {
        Err(Error::RegionBoundary)
    } else if r > 0.0 {
        Err(Error::Domain("the free-region formula needs R < 0".into()))
    } else {
        Ok(())
    }
}

fn psi_approx31(r: f64, y: f64, rp: &ReducedParams, tol: f64) -> Result<WaveSample> {
    free_region_guard(r)?;
    check_tol(tol)?;
    let st = Setup::new(rp)?;
    let y = y.abs();
    let pre = st.c0 / (2.0 * PI);
    let itol = tol / (3.0 * pre.norm());
    let up = integrate(
        |t| {
            let (b, q) = st.free_seg(t, r);
            b * C::from_polar(1.0, -y * q)
        },
        &seg_spec(&st, r, y, itol),
    )?;
    let lo = integrate(
        |t| {
            let (b, q) = st.free_seg(t, r);
            b * C::from_polar(1.0, y * q)
        },
        &seg_spec(&st, r, y, itol),
    )?;
    let leg = integrate(
        |t| {
            let (b, om) = st.free_leg(t, r);
            b * (y * om).cos()
        },
        &leg_spec(r, y, itol),
    )?;
    let psi = pre * up.value;
    let rest = pre * lo.value - pre * I * leg.value;
    Ok(WaveSample {
        r,
        y,
        psi,
        err_est: pre.norm() * up.err_est,
        method: Method::Approx31,
        converged: up.converged && lo.converged && leg.converged,
        neglected: rest.norm(),
    })
}

fn psi_free_exact(
    r: f64,
    y: f64,
    rp: &ReducedParams,
    tol: f64,
    wrong_branch: bool,
) -> Result<WaveSample> {
    free_region_guard(r)?;
    check_tol(tol)?;
    let st = Setup::new(rp)?;
    let y = y.abs();
    let pre = st.c0 / (2.0 * PI);
    let itol = tol / (2.0 * pre.norm());
    // jump across the cut: 2cos on the physical sheet, -2i sin on the wrong one
    let jump = |x: f64| {
        if wrong_branch {
            C::new(0.0, -2.0 * x.sin())
        } else {
            C::new(2.0 * x.cos(), 0.0)
        }
    };
    let seg = integrate(
        |t| {
            let (b, q) = st.free_seg(t, r);
            b * jump(y * q)
        },
        &seg_spec(&st, r, y, itol),
    )?;
    let leg = integrate(
        |t| {
            let (b, om) = st.free_leg(t, r);
            b * jump(y * om)
        },
        &leg_spec(r, y, itol),
    )?;
    let psi = pre * seg.value - pre * 0.5 * I * leg.value;
    Ok(WaveSample {
        r,
        y,
        psi,
        err_est: pre.norm() * (seg.err_est + 0.5 * leg.err_est),
        method: Method::RegionalWithVerticalLeg,
        converged: seg.converged && leg.converged,
        neglected: 0.0,
    })
}

/// Both sides of the real segment, without the imaginary-axis leg (R < 0).
pub fn psi_free_segment(r: f64, y: f64, rp: &ReducedParams, tol: f64) -> Result<WaveSample> {
    free_region_guard(r)?;
    check_tol(tol)?;
    let st = Setup::new(rp)?;
    let y = y.abs();
    let pre = st.c0 / PI;
    let itol = tol / pre.norm();
    let seg = integrate(
        |t| {
            let (b, q) = st.free_seg(t, r);
            b * (y * q).cos()
        },
        &seg_spec(&st, r, y, itol),
    )?;
    let leg = free_vertical_leg(r, y, rp, tol)?;
    Ok(WaveSample {
        r,
        y,
        psi: pre * seg.value,
        err_est: pre.norm() * seg.err_est,
        method: Method::Regional,
        converged: seg.converged,
        neglected: leg.value.norm(),
    })
}

/// Contribution of the imaginary-axis leg to ψ for R < 0.
pub fn free_vertical_leg(r: f64, y: f64, rp: &ReducedParams, tol: f64) -> Result<ComplexSample> {
    free_region_guard(r)?;
    check_tol(tol)?;
    let st = Setup::new(rp)?;
    let y = y.abs();
    let pre = -st.c0 / (2.0 * PI) * I;
    let leg = integrate(
        |t| {
            let (b, om) = st.free_leg(t, r);
            b * (y * om).cos()
        },
        &leg_spec(r, y, tol / pre.norm()),
    )?
    .require(tol / pre.norm())?;
    Ok(ComplexSample {
        value: pre * leg.value,
        err_est: pre.norm() * leg.err_est,
    })
}

/// Φ(R, y) for R > 0: the integral around the cut from -k0 into the lower
/// half plane, entering ψ with a minus sign.
pub fn phi_integral(r: f64, y: f64, rp: &ReducedParams, tol: f64) -> Result<ComplexSample> {
    phi_with_branch(r, y, rp, tol, false)
}

fn phi_with_branch(
    r: f64,
    y: f64,
    rp: &ReducedParams,
    tol: f64,
    wrong_branch: bool,
) -> Result<ComplexSample> {
    if r == 0.0 {
        return Err(Error::RegionBoundary);
    }
    if r < 0.0 {
        return Err(Error::Domain("Φ is defined for R > 0".into()));
    }
    check_tol(tol)?;
    let st = Setup::new(rp)?;
    let y = y.abs();
    let a = st.a;
    let sgn = if wrong_branch { -1.0 } else { 1.0 };
    let bracket = |om: f64| 2.0 * ((y * om).cos() - sgn * a * sinc_mul(y, om));
    let pre = st.c0 / (2.0 * PI);
    let itol = tol / (2.0 * pre.norm());
    let seg = integrate(
        |t| {
            let (b, q) = st.atom_seg(t, r);
            b * bracket(q)
        },
        &seg_spec(&st, r, y, itol),
    )?;
    let leg = integrate(
        |t| {
            let (b, om) = st.atom_leg(t, r);
            b * (0.5 * bracket(om))
        },
        &leg_spec(r, y, itol / 2.0),
    )?;
    let value = pre * (seg.value + I * leg.value);
    let err_est = pre.norm() * (seg.err_est + leg.err_est);
    if !(seg.converged && leg.converged) {
        return Err(Error::NonConvergence {
            achieved: err_est,
            tol,
        });
    }
    Ok(ComplexSample { value, err_est })
}

/// Incident plus reflected bound pair, e^{-iKR-a|y|} + 2(K-k0)/(K+k0) S₊(K)² e^{iKR-a|y|}.
pub fn bound_terms(r: f64, y: f64, rp: &ReducedParams) -> Result<C> {
    let st = Setup::new(rp)?;
    let damp = (-st.a * y.abs()).exp();
    let refl = reflected_coefficient(rp)?;
    Ok(C::from_polar(damp, -st.kk * r) + refl * C::from_polar(damp, st.kk * r))
}

/// Coefficient 2(K-k0)/(K+k0) S₊(K)² of the reflected bound pair.
pub fn reflected_coefficient(rp: &ReducedParams) -> Result<C> {
    let st = Setup::new(rp)?;
    // K - k0 = a^2/(K + k0)
    Ok(2.0 * st.a * st.a / ((st.kk + st.k0) * (st.kk + st.k0)) * st.sk * st.sk)
}

/// ψ for R > 0.
pub fn psi_atom(r: f64, y: f64, rp: &ReducedParams, tol: f64) -> Result<WaveSample> {
    atom_with_branch(r, y, rp, tol, false)
}

fn atom_with_branch(
    r: f64,
    y: f64,
    rp: &ReducedParams,
    tol: f64,
    wrong_branch: bool,
) -> Result<WaveSample> {
    let phi = phi_with_branch(r, y, rp, tol, wrong_branch)?;
    let psi = bound_terms(r, y, rp)? - phi.value;
    Ok(WaveSample {
        r,
        y,
        psi,
        err_est: phi.err_est,
        method: Method::Regional,
        converged: true,
        neglected: 0.0,
    })
}

/// Parameters of the shifted-line route for a given eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnifiedSetup {
    pub eps: f64,
    pub k0c: C,
    pub kc: C,
    /// Height of the integration line.
    pub c: f64,
    pub alpha: C,
    pub splus_kc: C,
}

impl UnifiedSetup {
    pub fn new(rp: &ReducedParams, eps: f64) -> Result<Self> {
        rp.check()?;
        if !(eps > 0.0) {
            return Err(Error::Domain("eps must be positive".into()));
        }
        let k0c = C::new(rp.k0, eps);
        let kc = (k0c * k0c + rp.a * rp.a).sqrt();
        let c = 0.5 * (kc.im + eps);
        if c - kc.im < 1e-9 * rp.k_big {
            return Err(Error::EpsTooSmall(eps));
        }
        let splus_kc = splus_closed(kc, rp.a, k0c, kc);
        let alpha = -2.0 * I * kc * splus_kc / (kc + k0c);
        Ok(Self {
            eps,
            k0c,
            kc,
            c,
            alpha,
            splus_kc,
        })
    }

    fn p(&self, k: C) -> C {
        ((self.k0c + k) / (self.k0c - k)).sqrt()
    }

    fn kernel(&self, k: C, a: f64) -> C {
        self.p(k) / ((k * k - self.kc * self.kc) * splus_closed(k, a, self.k0c, self.kc))
    }

    /// Coefficient of e^{-iKR-a|y|} produced by the pole at K when the line
    /// is closed downwards, from a numerical residue. Equals 1 when α is
    /// consistent with the branch of the integrand.
    pub fn incident_coefficient(&self, rp: &ReducedParams) -> C {
        let rad = 0.4 * (self.c - self.kc.im).min((self.kc - self.k0c).norm());
        let n = 64;
        let mut s = C::new(0.0, 0.0);
        for j in 0..n {
            let e = C::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64);
            let k = self.kc + rad * e;
            s += self.kernel(k, rp.a) * rad * e;
        }
        let res = s / n as f64;
        let pref = rp.a * self.alpha / (2.0 * PI * I);
        pref * (-2.0 * PI * I) * res
    }
}

/// ψ by the shifted-line integral at one eps (no extrapolation).
pub fn psi_unified(r: f64, y: f64, rp: &ReducedParams, eps: f64, tol: f64) -> Result<WaveSample> {
    if r == 0.0 {
        return Err(Error::RegionBoundary);
    }
    check_tol(tol)?;
    let u = UnifiedSetup::new(rp, eps)?;
    let a = rp.a;
    let y = y.abs();
    let c = u.c;
    let g = |x: f64| {
        // integrand without the e^{-ixR} oscillation
        let k = C::new(x, c);
        let w = (k * k - u.k0c * u.k0c).sqrt();
        u.kernel(k, a) * (c * r - y * w).exp()
    };
    let f = |x: f64| g(x) * C::from_polar(1.0, -x * r);
    let pref = a * u.alpha / (2.0 * PI * I);
    let itol = tol / (4.0 * pref.norm());
    let big = 50.0 * rp.k_big.max(1.0);
    let cut = if y > 0.0 {
        big.min(rp.k_big + 40.0 / y)
    } else {
        big
    };
    let d = c - u.kc.im;
    let mut pts = vec![-rp.k0, rp.k0, -rp.k_big, rp.k_big, 0.0];
    for &x0 in &[rp.k0, rp.k_big] {
        for m in [1.0, 4.0, 16.0, 64.0, 256.0] {
            for s in [-1.0, 1.0] {
                pts.push(x0 + s * m * d);
                pts.push(-x0 + s * m * d);
            }
        }
    }
    let spec = QuadratureSpec::finite(-cut, cut)
        .breakpoints(&pts)
        .oscillation(2.0 * PI / r.abs().max(1e-3))
        .tol(itol)
        .max_subdivisions(50000);
    let mid = integrate(f, &spec)?;
    // tails by repeated integration by parts: ∫_L^∞ g e^{-iRx} dx = e^{-iRL} Σ g^(n)(L)/(iR)^(n+1)
    let mut tails = C::new(0.0, 0.0);
    let mut tail_err = 0.0;
    if y * (cut - rp.k_big) < 40.0 {
        let ir = I * r;
        let h = 0.02 * cut;
        for (l, sgn) in [(cut, 1.0), (-cut, -1.0)] {
            let g0 = g(l);
            let gp = (g(l + h) - g(l - h)) / (2.0 * h);
            let gpp = (g(l + h) - 2.0 * g0 + g(l - h)) / (h * h);
            let terms = [g0 / ir, gp / (ir * ir), gpp / (ir * ir * ir)];
            let sum: C = terms.iter().sum();
            tails += sgn * C::from_polar(1.0, -r * l) * sum;
            tail_err += terms[2].norm() + (gpp * h * h / 6.0).norm() / (r * r).max(1e-30);
        }
    }
    let value = pref * (mid.value + tails);
    let err_est = pref.norm() * (mid.err_est + tail_err);
    Ok(WaveSample {
        r,
        y,
        psi: value,
        err_est,
        method: Method::UnifiedA7,
        converged: mid.converged && err_est <= tol.max(1e-3 * value.norm()),
        neglected: 0.0,
    })
}

/// The eps values {4eps, 2eps, eps} used by [`evaluate`] for `UNIFIED_A7`.
pub fn unified_eps_set(eps: f64) -> [f64; 3] {
    [4.0 * eps, 2.0 * eps, eps]
}

/// ψ by the shifted-line route at each eps in `eps`, extrapolated to eps = 0.
pub fn psi_unified_extrapolated(
    r: f64,
    y: f64,
    rp: &ReducedParams,
    eps: &[f64],
    tol: f64,
) -> Result<WaveSample> {
    if eps.is_empty() {
        return Err(Error::Domain("need at least one eps".into()));
    }
    let samples: Vec<WaveSample> = eps
        .iter()
        .map(|&e| psi_unified(r, y, rp, e, tol))
        .collect::<Result<_>>()?;
    let vals: Vec<C> = samples.iter().map(|s| s.psi).collect();
    let (v, change) = extrapolate_to_zero(eps, &vals);
    let qerr: f64 = samples.iter().map(|s| s.err_est).fold(0.0, f64::max);
    let last = eps.len() - 1;
    // the extrapolation error is bounded by the size of the last correction scaled by the eps ratio
    let xerr = if eps.len() > 1 {
        change * eps[last] / eps[last - 1]
    } else {
        f64::INFINITY
    };
    Ok(WaveSample {
        r,
        y,
        psi: v,
        err_est: qerr * 10.0 + xerr,
        method: Method::UnifiedA7,
        converged: samples.iter().all(|s| s.converged),
        neglected: 0.0,
    })
}

/// Far-field form for R → -∞:
/// a/(iπK²R sqrt(2k0(K+k0))) e^{-i(k0|y| + φ₋)}.
pub fn far_field(r: f64, y: f64, rp: &ReducedParams) -> Result<WaveSample> {
    free_region_guard(r)?;
    let st = Setup::new(rp)?;
    let ph = AsymptoticPhases::new(rp, 0.0);
    let amp = st.a / (I * PI * st.kk * st.kk * r * (2.0 * st.k0 * (st.kk + st.k0)).sqrt());
    let psi = amp * C::from_polar(1.0, -(st.k0 * y.abs() + ph.phi_minus));
    Ok(WaveSample {
        r,
        y,
        psi,
        err_est: 0.0,
        method: Method::FarField32,
        converged: true,
        neglected: 0.0,
    })
}

/// Steepest-descent form of Φ for R → +∞ at ξ = y/R, |ξ| < 1.
pub fn steepest_descent(r: f64, y: f64, rp: &ReducedParams) -> Result<C> {
    if !(r > 0.0) {
        return Err(Error::Domain("steepest descent needs R > 0".into()));
    }
    let st = Setup::new(rp)?;
    let xi = y.abs() / r;
    if xi >= 1.0 {
        return Err(Error::Domain(format!("|xi| = {xi} must be below 1")));
    }
    let (a, k0, kk) = (st.a, st.k0, st.kk);
    let ph = AsymptoticPhases::new(rp, xi);
    let i32 = C::from_polar(1.0, 0.75 * PI);
    let amp = k0 * a / (4.0 * PI.sqrt() * (k0 * r).sqrt()) * xi * xi / (a * a + kk * kk * xi * xi)
        * ((k0 / kk) * (kk + k0) / (kk + 0.5 * k0 * xi * xi)).sqrt();
    let phase = k0 * r * (1.0 - 0.5 * xi * xi) + 2.0 * FRAC_1_PI * ph.phi_plus;
    Ok(i32 * amp * C::from_polar(1.0, phase))
}

/// Leading stationary-phase value of Φ for R > 0, |y| > 0: the saddle of
/// e^{-ikR-|y|w} on the lower side of the cut, k_s = -k0 R/ρ.
pub fn phi_stationary_phase(r: f64, y: f64, rp: &ReducedParams) -> Result<C> {
    if !(r > 0.0) || y == 0.0 {
        return Err(Error::Domain(
            "stationary phase needs R > 0 and y != 0".into(),
        ));
    }
    let st = Setup::new(rp)?;
    let (k0, kk) = (st.k0, st.kk);
    let y = y.abs();
    let rho = r.hypot(y);
    let ks = -k0 * r / rho;
    let p = ((k0 + ks) / (k0 - ks)).sqrt();
    let g = p / ((ks * ks - kk * kk) * st.splus_real(ks));
    let curv = rho.powi(3) / (k0 * y * y);
    let pref = -st.c0 / (2.0 * PI);
    Ok(-pref * g * C::from_polar((2.0 * PI / curv).sqrt(), k0 * rho - 0.25 * PI))
}

/// Evaluates ψ(R, y) with the chosen method.
pub fn evaluate(r: f64, y: f64, rp: &ReducedParams, opts: &EvalOptions) -> Result<WaveSample> {
    if r == 0.0 {
        return Err(Error::RegionBoundary);
    }
    let tol = opts.tol;
    if r > 0.0 {
        return match opts.method {
            Method::UnifiedA7 => {
                psi_unified_extrapolated(r, y, rp, &unified_eps_set(opts.eps), tol)
            }
            Method::Steepest35 => {
                let phi = steepest_descent(r, y, rp)?;
                let psi = bound_terms(r, y, rp)? - phi;
                Ok(WaveSample {
                    r,
                    y,
                    psi,
                    err_est: 0.0,
                    method: Method::Steepest35,
                    converged: true,
                    neglected: 0.0,
                })
            }
            Method::FarField32 | Method::Approx31 => Err(Error::Domain(format!(
                "{} applies to R < 0 only",
                opts.method
            ))),
            Method::Regional | Method::RegionalWithVerticalLeg => {
                let mut s = atom_with_branch(r, y, rp, tol, opts.wrong_branch)?;
                s.method = opts.method;
                Ok(s)
            }
        };
    }
    match opts.method {
        Method::Regional => psi_free_segment(r, y, rp, tol),
        Method::RegionalWithVerticalLeg => psi_free_exact(r, y, rp, tol, opts.wrong_branch),
        Method::Approx31 => psi_approx31(r, y, rp, tol),
        Method::UnifiedA7 => psi_unified_extrapolated(r, y, rp, &unified_eps_set(opts.eps), tol),
        Method::FarField32 => far_field(r, y, rp),
        Method::Steepest35 => Err(Error::Domain("STEEPEST_35 applies to R > 0 only".into())),
    }
}

/// Precomputed y-independent parts of the free-region integrals at fixed
/// R < 0, for fast scans in y up to `y_max`.
#[derive(Debug, Clone)]
pub struct FreeRegionTable {
    r: f64,
    y_max: f64,
    pre: C,
    seg_rule: PanelRule,
    seg_base: Vec<C>,
    seg_q: Vec<f64>,
    leg_rule: PanelRule,
    leg_base: Vec<C>,
    leg_om: Vec<f64>,
}

impl FreeRegionTable {
    pub fn new(r: f64, y_max: f64, rp: &ReducedParams) -> Result<Self> {
        free_region_guard(r)?;
        let st = Setup::new(rp)?;
        let y_max = y_max.abs().max(1.0);
        let tmax = st.k0.sqrt();
        // two panels per shortest wavelength, at least 16
        let wl = st.seg_wavelength(r, y_max).unwrap_or(tmax);
        let n_seg = ((2.0 * tmax / wl).ceil() as usize).max(16);
        let seg_rule = PanelRule::uniform(0.0, tmax, n_seg);
        let (seg_base, seg_q): (Vec<C>, Vec<f64>) =
            seg_rule.nodes.iter().map(|&t| st.free_seg(t, r)).unzip();
        // the leg integrand carries e^{tR}; beyond 40/|R| it is below e^-40
        let t_end = 40.0 / r.abs();
        let n_leg = ((2.0 * t_end * y_max / (2.0 * PI)).ceil() as usize).max(16);
        let leg_rule = PanelRule::uniform(0.0, t_end, n_leg);
        let (leg_base, leg_om): (Vec<C>, Vec<f64>) =
            leg_rule.nodes.iter().map(|&t| st.free_leg(t, r)).unzip();
        Ok(Self {
            r,
            y_max,
            pre: st.c0 / (2.0 * PI),
            seg_rule,
            seg_base,
            seg_q,
            leg_rule,
            leg_base,
            leg_om,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    fn sum(rule: &PanelRule, base: &[C], ph: &[f64], f: impl Fn(f64) -> C) -> (C, f64) {
        let vals: Vec<C> = base.iter().zip(ph).map(|(b, &p)| b * f(p)).collect();
        rule.apply(&vals)
    }

    /// ψ(R, y) with the method `Approx31`, `Regional` or
    /// `RegionalWithVerticalLeg`.
    pub fn sample(&self, y: f64, method: Method) -> Result<WaveSample> {
        let y = y.abs();
        if y > self.y_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "y = {y} beyond the table range {}",
                self.y_max
            )));
        }
        let pre = self.pre;
        let (psi, err, neglected) = match method {
            Method::Approx31 => {
                let (v, e) = Self::sum(&self.seg_rule, &self.seg_base, &self.seg_q, |q| {
                    C::from_polar(1.0, -y * q)
                });
                (pre * v, pre.norm() * e, 0.0)
            }
            Method::Regional => {
                let (v, e) = Self::sum(&self.seg_rule, &self.seg_base, &self.seg_q, |q| {
                    C::new(2.0 * (y * q).cos(), 0.0)
                });
                (pre * v, pre.norm() * e, 0.0)
            }
            Method::RegionalWithVerticalLeg => {
                let (v, e) = Self::sum(&self.seg_rule, &self.seg_base, &self.seg_q, |q| {
                    C::new(2.0 * (y * q).cos(), 0.0)
                });
                let (l, el) = Self::sum(&self.leg_rule, &self.leg_base, &self.leg_om, |o| {
                    C::new((y * o).cos(), 0.0)
                });
                (pre * (v - I * l), pre.norm() * (e + el), 0.0)
            }
            m => return Err(Error::Domain(format!("{m} is not tabulated"))),
        };
        Ok(WaveSample {
            r: self.r,
            y,
            psi,
            err_est: err,
            method,
            converged: true,
            neglected,
        })
    }
}

/// Y_Λ(R) at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Displacement {
    pub cutoff: f64,
    /// ∫_{-Λ}^{Λ} |y| |ψ|² dy
    pub numerator: f64,
    /// ∫_{-Λ}^{Λ} |ψ|² dy
    pub denominator: f64,
    pub y_mean: f64,
    pub err_est: f64,
}

/// Y_Λ(R) = ∫|y||ψ|²/∫|ψ|² over |y| < Λ for each cutoff.
///
/// Nothing here claims convergence in Λ; the sequence is returned so that
/// the behaviour can be inspected. `rel_tol` controls the y quadrature.
pub fn expected_displacement(
    r: f64,
    rp: &ReducedParams,
    cutoffs: &[f64],
    method: Method,
    rel_tol: f64,
) -> Result<Vec<Displacement>> {
    if r == 0.0 {
        return Err(Error::RegionBoundary);
    }
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| !(w[1] > w[0])) || !(cutoffs[0] > 0.0) {
        return Err(Error::Domain(
            "cutoffs must be positive and increasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut num = 0.0;
    let mut den = 0.0;
    let mut err = 0.0;
    let mut lo = 0.0;
    for &cut in cutoffs {
        let piece = if r < 0.0
            && matches!(
                method,
                Method::Approx31 | Method::Regional | Method::RegionalWithVerticalLeg
            ) {
            let table = FreeRegionTable::new(r, cut, rp)?;
            band_integral(|y| table.sample(y, method).map(|s| s.psi), lo, cut, rel_tol)?
        } else {
            let opts = EvalOptions {
                method,
                tol: 1e-9,
                ..EvalOptions::default()
            };
            band_integral(
                |y| evaluate(r, y, rp, &opts).map(|s| s.psi),
                lo,
                cut,
                rel_tol,
            )?
        };
        num += 2.0 * piece.value.re;
        den += 2.0 * piece.value.im;
        err += 2.0 * piece.err_est;
        out.push(Displacement {
            cutoff: cut,
            numerator: num,
            denominator: den,
            y_mean: num / den,
            err_est: err,
        });
        lo = cut;
    }
    Ok(out)
}

// ∫ (y|ψ|² + i|ψ|²) dy over [lo, hi]
fn band_integral(
    psi: impl Fn(f64) -> Result<C>,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<ComplexSample> {
    let failure = std::cell::Cell::new(None);
    let f = |y: f64| match psi(y) {
        Ok(p) => {
            let m = p.norm_sqr();
            C::new(y * m, m)
        }
        Err(e) => {
            failure.set(Some(e));
            C::new(0.0, 0.0)
        }
    };
    let spec = QuadratureSpec::finite(lo, hi)
        .tol(1e-300)
        .rel_tol(rel_tol)
        .max_subdivisions(100_000);
    let res = integrate(f, &spec)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(ComplexSample {
        value: res.value,
        err_est: res.err_est,
    })
}

/// Least-squares fit of log v against log y through the local maxima of v.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub maxima: Vec<(f64, f64)>,
}

/// Fits the envelope of an oscillating positive sequence `v(y)`.
pub fn envelope_slope(ys: &[f64], vs: &[f64], min_maxima: usize) -> Result<EnvelopeFit> {
    let mut maxima = Vec::new();
    for i in 1..vs.len().saturating_sub(1) {
        if vs[i] > vs[i - 1] && vs[i] >= vs[i + 1] && vs[i] > 0.0 {
            maxima.push((ys[i], vs[i]));
        }
    }
    if maxima.len() < min_maxima.max(3) {
        return Err(Error::InsufficientMaxima {
            found: maxima.len(),
            needed: min_maxima.max(3),
        });
    }
    let n = maxima.len() as f64;
    let xs: Vec<f64> = maxima.iter().map(|m| m.0.ln()).collect();
    let zs: Vec<f64> = maxima.iter().map(|m| m.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let mz = zs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mx) * (z - mz)).sum();
    let slope = sxz / sxx;
    let icpt = mz - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&zs)
        .map(|(x, z)| (z - icpt - slope * x).powi(2))
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(EnvelopeFit {
        slope,
        stderr,
        maxima,
    })
}

/// Samples |ψ(R, y)|² on a log-spaced y grid fine enough to resolve the
/// oscillation (spacing at most `step` at the top of the range).
pub fn free_scan(
    r: f64,
    rp: &ReducedParams,
    y_range: (f64, f64),
    method: Method,
    step: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (y0, y1) = y_range;
    if !(y0 > 0.0 && y1 > y0) {
        return Err(Error::Domain("need 0 < y0 < y1".into()));
    }
    let table = FreeRegionTable::new(r, y1, rp)?;
    let ratio = 1.0 + step / y1;
    let n = ((y1 / y0).ln() / ratio.ln()).ceil() as usize + 1;
    let ys: Vec<f64> = (0..n)
        .map(|i| y0 * (y1 / y0).powf(i as f64 / (n - 1) as f64))
        .collect();
    let vs = ys
        .iter()
        .map(|&y| table.sample(y, method).map(|s| s.psi.norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    Ok((ys, vs))
}

/// Envelope slope of log|ψ(R, y)|² against log y over `y_range` (R < 0).
pub fn tail_exponent(
    r: f64,
    rp: &ReducedParams,
    y_range: (f64, f64),
    method: Method,
) -> Result<(f64, f64)> {
    let fit = tail_fit(r, rp, y_range, method)?;
    Ok((fit.slope, fit.stderr))
}

/// As [`tail_exponent`], returning the maxima used.
pub fn tail_fit(
    r: f64,
    rp: &ReducedParams,
    y_range: (f64, f64),
    method: Method,
) -> Result<EnvelopeFit> {
    let (ys, vs) = free_scan(r, rp, y_range, method, 0.02)?;
    envelope_slope(&ys, &vs, 8)
}
