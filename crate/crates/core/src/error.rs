use alloc::string::String;

use crate::region::Divisor;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("uncertified result: {0}")]
    Uncertified(String),
    #[error("derivative of order {order} requested but no closed-form rule exists and fallback is disabled")]
    UnsupportedDerivative { order: u32 },
    #[error("all sample points were rejected")]
    InsufficientSamples,
    #[error("subdivision budget exhausted after {cells} cells")]
    UncertifiedDivisor { cells: usize, partial: Divisor },
    #[error("circle |z| = {radius} stays too close to divisor points after all perturbations")]
    BoundaryDegeneracy { radius: f64 },
    #[error("targets {0} and {1} coincide numerically on the circle")]
    DegenerateTargets(usize, usize),
    #[error("target {index} is not in the kernel of the operator (max residual {residual:e})")]
    InvalidTarget { index: usize, residual: f64 },
    #[error("function lies in the kernel of the operator (max residual {residual:e})")]
    InKernel { residual: f64 },
    #[error("window of {window} radii does not fit a schedule of {schedule}")]
    InvalidWindow { window: usize, schedule: usize },
    #[error("invalid synthetic model: {0}")]
    InvalidModel(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
