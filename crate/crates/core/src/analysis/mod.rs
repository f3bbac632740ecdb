//! Manufactured solutions, interpolation, error norms, convergence studies
//! and verification suites.

pub mod cases;
pub mod interpolation;
pub mod norms;
pub mod study;
pub mod verify;

pub use cases::{case_lshape2d, case_smooth2d, case_smooth3d, ExactSolution, ManufacturedCase};
pub use interpolation::{canonical_interpolate, quasi_interpolate, BoundaryTreatment};
pub use norms::broken_norms;
pub use study::{convergence_study, solve_level, ErrorReport, LevelResult, StudyOptions};
pub use verify::VerificationReport;
