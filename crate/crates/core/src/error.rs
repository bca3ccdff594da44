use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("rho_M not bracketed near hint {hint}")]
    RhoMNotBracketed { hint: f64 },
    #[error("normalization Q(1)=1 infeasible: rho_M = {rho_m} <= 1")]
    NormalizationInfeasible { rho_m: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("too many steps ({steps}) before reaching t = {t}")]
    StepLimit { steps: usize, t: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{what}: mismatch {value:e} exceeds tolerance {tol:e}")]
    Inconsistency { what: String, value: f64, tol: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("series truncation estimate {estimate:e} exceeds tolerance {tol:e}")]
    Truncation { estimate: f64, tol: f64 },
    #[error("point {0} lies at the edge of the grid")]
    GridEdge(f64),
    #[error("diagonal band: use diag_coeff + PV quadrature rule (|xi - eta| = {gap:e} < {band:e})")]
    DiagonalBand { gap: f64, band: f64 },
    #[error("CFL violation: |dt| = {dt:e} exceeds {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite field at t = {t} (blow-up suspected)")]
    NonFinite { t: f64 },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
}
