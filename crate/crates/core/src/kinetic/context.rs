//! Model data transformed to the `ζ = A^η(u)` variable.

use super::chi::Mollifier;
use super::kernel::MollifierKernel;
use crate::error::{Error, Result};
use crate::model::{effective_diffusion, Model, ScalarFn};

/// Inverse of a nondecreasing function by bracketing bisection.
#[derive(Debug, Clone)]
pub struct Inverse {
    a: ScalarFn,
}

impl Inverse {
    pub fn new(a: ScalarFn) -> Self {
        Inverse { a }
    }

    /// `B(ζ)` with `A(B(ζ)) = ζ`, to `1e-13` times the bracket width.
    pub fn eval(&self, zeta: f64) -> f64 {
        let a = &self.a;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut grow = 0;
        while a.eval(lo) > zeta && grow < 2000 {
            lo = 2.0 * lo - 1.0;
            grow += 1;
        }
        while a.eval(hi) < zeta && grow < 2000 {
            hi = 2.0 * hi + 1.0;
            grow += 1;
        }
        let tol = 1e-13 * (hi - lo);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if a.eval(mid) < zeta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `B'(ζ) = 1/A'(B(ζ))`.
    pub fn deriv(&self, zeta: f64) -> f64 {
        1.0 / self.a.deriv(self.eval(zeta))
    }
}

/// Everything the kinetic identities need: the model, `A^η`, its inverse
/// `B`, and the mollifier.
#[derive(Debug, Clone)]
pub struct KineticContext {
    model: Model,
    diffusion: ScalarFn,
    inverse: Inverse,
    mollifier: Mollifier,
}

impl KineticContext {
    pub fn new(model: Model, kernel: MollifierKernel, eps: f64) -> Result<Self> {
        let mollifier = Mollifier::new(kernel, eps)?;
        let diffusion = effective_diffusion(&model);
        Ok(KineticContext {
            inverse: Inverse::new(diffusion.clone()),
            model,
            diffusion,
            mollifier,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// `A^η`.
    pub fn diffusion(&self) -> &ScalarFn {
        &self.diffusion
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn eps(&self) -> f64 {
        self.mollifier.eps()
    }

    pub fn inverse(&self) -> &Inverse {
        &self.inverse
    }

    /// Lower bound on `(A^η)'` over `[lo, hi]` from samples and the viscosity.
    pub fn min_slope(&self, lo: f64, hi: f64) -> f64 {
        self.model.min_diffusion_slope(lo, hi, 2001) + self.model.eta()
    }

    /// Fails unless `A^η` is strictly increasing on `[lo, hi]`, which the
    /// inverse-based quantities require.
    pub fn require_invertible(&self, lo: f64, hi: f64) -> Result<()> {
        if self.min_slope(lo, hi) > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "A^η is not strictly increasing on [{lo}, {hi}]; set a positive viscosity"
            )))
        }
    }

    pub fn b(&self, zeta: f64) -> f64 {
        self.inverse.eval(zeta)
    }

    pub fn b_prime(&self, zeta: f64) -> f64 {
        self.inverse.deriv(zeta)
    }

    /// `g = f∘B` on `axis`, so that `g(A^η(z)) = f(z)`.
    pub fn g(&self, axis: usize, zeta: f64) -> f64 {
        self.model.fluxes()[axis].flux.eval(self.b(zeta))
    }

    /// `g'(ζ) = f'(B(ζ)) B'(ζ)`.
    pub fn g_prime(&self, axis: usize, zeta: f64) -> f64 {
        let z = self.b(zeta);
        self.model.fluxes()[axis].flux.deriv(z) / self.diffusion.deriv(z)
    }

    /// `G₁ = F₁∘B`.
    pub fn g1(&self, axis: usize, zeta: f64) -> f64 {
        self.model.fluxes()[axis].f1.eval(self.b(zeta))
    }

    /// `G₂ = F₂∘B`.
    pub fn g2(&self, axis: usize, zeta: f64) -> f64 {
        self.model.fluxes()[axis].f2.eval(self.b(zeta))
    }

    /// Images under `A^η` of the kinks of `A^η`, where `B'` is not smooth.
    pub fn zeta_kinks(&self) -> Vec<f64> {
        self.diffusion.kinks().into_iter().map(|k| self.diffusion.eval(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(eta: f64) -> KineticContext {
        let m = Model::isotropic_eo(1, &ScalarFn::Sin, ScalarFn::Cubic(1.0 / 3.0), eta, -2.0, 2.0).unwrap();
        KineticContext::new(m, MollifierKernel::bump(), 1e-2).unwrap()
    }

    #[test]
    fn inverse_round_trips() {
        let c = ctx(0.1);
        for k in 0..=40 {
            let z = -3.0 + 0.15 * k as f64;
            assert!((c.diffusion().eval(c.b(z)) - z).abs() < 1e-10, "{z}");
            let u = -1.5 + 0.075 * k as f64;
            assert!((c.g(0, c.diffusion().eval(u)) - u.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_handles_large_arguments() {
        let c = ctx(1.0);
        let z = 1e6;
        assert!((c.diffusion().eval(c.b(z)) - z).abs() < 1e-10 * z);
    }

    #[test]
    fn derivative_of_inverse() {
        let c = ctx(0.1);
        for &z in &[-0.7, 0.0, 0.2, 1.3] {
            let h = 1e-6;
            let fd = (c.b(z + h) - c.b(z - h)) / (2.0 * h);
            assert!((fd - c.b_prime(z)).abs() < 1e-5 * c.b_prime(z).abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_diffusion_is_not_invertible() {
        let m = Model::isotropic_eo(
            1,
            &ScalarFn::HalfSquare,
            ScalarFn::Ramp {
                scale: 0.1,
                threshold: 0.5,
            },
            0.0,
            -1.0,
            1.0,
        )
        .unwrap();
        let c = KineticContext::new(m.clone(), MollifierKernel::bump(), 0.1).unwrap();
        assert!(c.require_invertible(0.0, 1.0).is_err());
        let c = KineticContext::new(m.with_eta(1e-2).unwrap(), MollifierKernel::bump(), 0.1).unwrap();
        assert!(c.require_invertible(0.0, 1.0).is_ok());
    }
}
