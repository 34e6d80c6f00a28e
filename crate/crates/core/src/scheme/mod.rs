//! Semi-discrete operator, time integration and monitored evolution.

mod evolve;
mod integrator;
mod op;

pub use evolve::{
    contraction_test, default_tolerance, evolve, Checkpoints, Contraction, MonitorFlags, MonitorRecord, MonitorReport,
    Trajectory, HARD_FAILURE_FACTOR,
};
pub use integrator::{step, IntegratorConfig, Method, Stepper};
pub use op::{AccretivityProbe, SemiDiscreteOp, Workspace};
