//! Convergence studies, vanishing-viscosity studies and randomized property
//! suites, with their report files.

mod fit;
mod properties;
mod study;

pub use fit::{fit_rate, theorem_floor};
pub use properties::{run_property_suite, PropertyReport, PropertySuite, EXPLICIT_GAP_TOL, IMPLICIT_GAP_TOL};
pub use study::{
    run_convergence, run_viscosity_study, ConvergenceReport, GridRun, StudyPlan, ViscosityReport, VISCOSITY_MIN_SLOPE,
};
