//! Problem definitions: fluxes, diffusion, viscosity and the test catalog.

mod catalog;
mod flux;
mod scalar_fn;

pub use catalog::{
    advection_1d, barenblatt_m2, burgers_riemann, catalog, cosine_bump, degenerate_1d, degenerate_2d, heat_1d, heat_2d,
    heat_kernel, porous_medium_1d, problem_by_name, smooth_bump, InitialData, ReferencePolicy, SpaceTimeFn, TestProblem,
};
pub use flux::{eo_split, lax_friedrichs_split, monotonicity_check, MonotonicityReport, SplitFlux};
pub use scalar_fn::{CustomFn, ScalarFn};

use crate::error::{Error, Result};

/// `∂ₜu + Σᵢ ∂ᵢ fⁱ(u) = Δ A^η(u)` with split numerical fluxes per axis.
#[derive(Debug, Clone)]
pub struct Model {
    fluxes: Vec<SplitFlux>,
    diffusion: ScalarFn,
    eta: f64,
}

impl Model {
    pub fn new(fluxes: Vec<SplitFlux>, diffusion: ScalarFn, eta: f64) -> Result<Self> {
        if fluxes.is_empty() {
            return Err(Error::InvalidArgument("model needs at least one flux component".into()));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidArgument(format!("viscosity must be >= 0, got {eta}")));
        }
        let a0 = diffusion.eval(0.0);
        if a0.abs() > 1e-14 {
            return Err(Error::InvalidArgument(format!("diffusion must satisfy A(0) = 0, got {a0}")));
        }
        Ok(Model {
            fluxes,
            diffusion,
            eta,
        })
    }

    /// Same flux `f` on every axis, Engquist–Osher split on `[lo, hi]`.
    pub fn isotropic_eo(dim: usize, flux: &ScalarFn, diffusion: ScalarFn, eta: f64, lo: f64, hi: f64) -> Result<Self> {
        let split = eo_split(flux, lo, hi)?;
        Model::new(vec![split; dim], diffusion, eta)
    }

    pub fn dim(&self) -> usize {
        self.fluxes.len()
    }

    pub fn fluxes(&self) -> &[SplitFlux] {
        &self.fluxes
    }

    pub fn diffusion(&self) -> &ScalarFn {
        &self.diffusion
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Model::new(self.fluxes.clone(), self.diffusion.clone(), eta)
    }

    /// Sampled check that `A` is nondecreasing on `[lo, hi]`; returns `min A'`.
    pub fn min_diffusion_slope(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let a = &self.diffusion;
        (0..n.max(2))
            .map(|k| a.deriv(lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `A^η(u) = A(u) + ηu`.
pub fn effective_diffusion(m: &Model) -> ScalarFn {
    if m.eta == 0.0 {
        m.diffusion.clone()
    } else {
        m.diffusion.clone().plus(ScalarFn::Linear(m.eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_diffusion_examples() {
        let m = Model::isotropic_eo(1, &ScalarFn::HalfSquare, ScalarFn::Cubic(1.0 / 3.0), 0.0, -1.0, 1.0).unwrap();
        let a = effective_diffusion(&m);
        for u in [-1.0, 0.2, 2.0] {
            assert!((a.eval(u) - u * u * u / 3.0).abs() <= 1e-15 * (1.0 + u.abs().powi(3)));
        }
        let m = Model::isotropic_eo(1, &ScalarFn::zero(), ScalarFn::zero(), 1.0, -1.0, 1.0).unwrap();
        let a = effective_diffusion(&m);
        assert_eq!(a.eval(0.37), 0.37);
        assert_eq!(a.deriv(-5.0), 1.0);

        let m = Model::isotropic_eo(1, &ScalarFn::zero(), ScalarFn::Cubic(1.0 / 3.0), 0.1, -1.0, 1.0).unwrap();
        let a = effective_diffusion(&m);
        assert!((a.eval(2.0) - (8.0 / 3.0 + 0.2)).abs() < 1e-15);
    }

    #[test]
    fn effective_slope_at_least_eta() {
        let m = Model::isotropic_eo(
            1,
            &ScalarFn::HalfSquare,
            ScalarFn::Ramp {
                scale: 0.1,
                threshold: 0.5,
            },
            0.05,
            -1.0,
            1.0,
        )
        .unwrap();
        let a = effective_diffusion(&m);
        for k in 0..=1000 {
            let u = -3.0 + 6.0 * k as f64 / 1000.0;
            assert!(a.deriv(u) >= 0.05 - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(Model::new(vec![], ScalarFn::zero(), 0.0).is_err());
        let s = eo_split(&ScalarFn::identity(), -1.0, 1.0).unwrap();
        assert!(Model::new(vec![s.clone()], ScalarFn::Const(1.0), 0.0).is_err());
        assert!(Model::new(vec![s], ScalarFn::zero(), -0.1).is_err());
    }
}
