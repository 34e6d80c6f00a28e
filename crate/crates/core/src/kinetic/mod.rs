//! Kinetic-formulation machinery: χ functions, mollifiers, regularized
//! contraction functionals, discrete chain rules, dissipation densities and
//! entropy residuals.

mod chi;
mod context;
mod dissipation;
mod entropy;
mod kernel;
mod suite;

pub use chi::{chi, q, Mollifier};
pub use context::{Inverse, KineticContext};
pub use dissipation::{chain_rule_defect, continuous_diss_density, discrete_diss_density, flux_diss_density};
pub use entropy::{
    entropy_pair, entropy_residual, entropy_residuals, trajectory_from_fields, BumpTestFunction, EntropyPair,
    EntropyResidual, MIN_RESIDUAL_CHECKPOINTS,
};
pub use kernel::{KernelShape, MollifierKernel, CDF_NODES};
pub use suite::{abs_diff_terms, run_kinetic_suite, save_lemma_records, write_lemma_records, LemmaRecord, SuiteSizes};
