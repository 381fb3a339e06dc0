//! Exactly solvable two-body scattering off a surface in one dimension.
//!
//! The crate evaluates the Wiener-Hopf factor of the scattering kernel in
//! closed form, the two-particle wave function on both sides of the
//! interaction line by branch-cut contour integrals, and the asymptotic forms
//! of the outgoing waves. Every closed form has an independent quadrature
//! check.
//!
//! ```
//! use twobody_core::{model::ReducedParams, wiener_hopf};
//!
//! let rp = ReducedParams::new(1.0, 2.0).unwrap();
//! let s = wiener_hopf::splus_at_k(&rp);
//! assert!((s.norm() - 0.973_249).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod model;
pub mod quadrature;
pub mod specfun;
pub mod validation;
pub mod wavefunction;
pub mod wiener_hopf;

pub use error::{Error, Result};
pub use model::{BranchConvention, BranchedRoot, PhysicalParams, ReducedParams};
pub use quadrature::{QuadResult, QuadratureSpec};
pub use wavefunction::{AsymptoticPhases, EvalOptions, Method, WaveGrid, WaveSample};
pub use wiener_hopf::{FactorMethod, FactorValue};

/// Complex values throughout the crate.
pub type ComplexValue = num_complex::Complex64;

/// A complex value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ComplexSample {
    pub value: ComplexValue,
    pub err_est: f64,
}
