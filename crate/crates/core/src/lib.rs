//! Numerical toolkit for nonlocal Hilfer fractional integro-differential
//! equations: special functions, weighted fractional quadrature,
//! subordinated solution operators, a Picard solver for mild solutions and
//! well-posedness certificates.

pub mod certificates;
pub mod error;
pub mod frac_ops;
pub mod operators;
pub mod quadrature;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use certificates::{CertificateReport, ConditionConstants, EstimateOptions, GammaFactor};
pub use frac_ops::{Grid, PsiFunction, PsiKind, Trajectory};
pub use operators::{Generator, SubordinationControl};
pub use solver::{KernelFn, NonlocalFn, ProblemSpec, SolveReport, SourceFn};
pub use specfun::SeriesControl;
