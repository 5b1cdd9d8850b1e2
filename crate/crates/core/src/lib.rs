//! Numerical value-distribution theory for meromorphic functions.
//!
//! The crate evaluates the Nevanlinna proximity, counting and characteristic
//! functions of concrete meromorphic functions, applies general linear
//! operators (derivatives, shifts, q-scalings and weighted sums of them), and
//! evaluates every term of second-main-theorem type inequalities together
//! with finite-radius deficiency estimates.
//!
//! Everything here is `no_std` with `alloc`; IO, scenario files and the CLI
//! live in the companion `nevlab` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod characteristic;
pub mod deficiency;
pub mod divisor;
pub mod elliptic;
mod error;
pub mod function;
pub mod laurent;
pub mod mcmillan;
pub mod operators;
pub mod poly;
pub mod quadrature;
pub mod region;
pub mod smt;
mod sum;

// Float math goes through `num_traits::Float` (libm). When std is linked,
// its inherent methods shadow the trait and the imports look unused.

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

pub use characteristic::{
    characteristic, counting, jensen_check, proximity, CharacteristicSample, CharacteristicTable,
    JensenReport, RadiusSchedule,
};
pub use deficiency::{
    deficiencies, deficiency_sum, picard_check, synthetic_valiron, CandidateReport, CandidateStatus,
    DeficiencyEstimate, DeficiencySum, DeficiencyTarget, DeficiencyWindow, PicardReport, PicardVerdict,
    SyntheticDivisorModel, ValironCheck,
};
pub use divisor::{
    count_in_disc, integrate_counting, joint_count, DivisorTable, EngineOptions, SubdivisionStats,
};
pub use function::{
    combine, compose_affine, identity, make_constant, make_exp_poly, make_jacobi_sn, make_rational,
    make_rational_from_roots, CombineOp, Family, FunctionHandle, GrowthMeta,
};
pub use laurent::{ilc, Ilc};
pub use mcmillan::{McMillan, McMillanCheck};
pub use operators::{
    apply, kernel_check, linearity_probe, logderiv_proximity, Applicability, ApplyOptions,
    OperatorExpr, Requirement, ResidualReport, SampleSpec, KERNEL_TOL,
};
pub use quadrature::{circle_average, circle_average_many, log_plus, CircleAverage, QuadratureConfig};
pub use region::{Divisor, DivisorPoint, PointKind, Region};
pub use smt::{
    pointwise_check, remainder, verify_linear_smt, verify_thm21, LinearSmtReport, PointwiseReport,
    RemainderBreakdown, SmtReport, Thm21Setup,
};
