use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("branch point at k = {0}")]
    BranchPoint(f64),
    #[error("argument {re} + {im}i lies on a branch cut; specify a side")]
    OnBranchCut { re: f64, im: f64 },
    #[error("confluence of singularities at k = {0}; use splus_at_k")]
    Confluence(f64),
    #[error("quadrature did not converge: achieved {achieved:e}, requested {tol:e}")]
    NonConvergence { achieved: f64, tol: f64 },
    #[error("R = 0 is the region boundary; sample at R = +/- delta")]
    RegionBoundary,
    #[error("found {found} envelope maxima, need at least {needed}")]
    InsufficientMaxima { found: usize, needed: usize },
    #[error("eps = {0:e} is too small for the quadrature resolution")]
    EpsTooSmall(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
