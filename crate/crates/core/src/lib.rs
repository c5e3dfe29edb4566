//! Numerical variational solver for the planar logarithmic Choquard equation
//! `-Lap u + a(x) u + (log|.| * u^2) u = 0`.

pub mod barycenter;
pub mod convolution;
pub mod error;
pub mod field;
pub mod functionals;
pub mod logkernel;
pub mod metric;
pub mod resample;
pub mod solver;
pub mod symmetry;

pub use error::{Error, Result};
pub use field::{Field, Grid, NormReport};
pub use barycenter::BarycenterMap;
pub use functionals::{EnergyBreakdown, NehariClass, NehariKind, Potential};
pub use logkernel::{Kernel, KernelTable};
pub use metric::MetricContext;
pub use solver::{Problem, SolveConfig, SolveResult, StartFamily};
pub use symmetry::{ActionKind, GroupAction, InvarianceCertificate, Motion};
