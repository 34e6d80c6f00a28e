//! The χ function, its mollified versions and the integrals built from them.

use super::kernel::MollifierKernel;
use crate::error::{Error, Result};
use crate::model::ScalarFn;
use crate::quadrature::{integrate, QuadTol};

/// `χ(u; ξ)`: 1 on `0 < ξ ≤ u`, −1 on `u ≤ ξ < 0`, 0 otherwise.
pub fn chi(u: f64, xi: f64) -> f64 {
    if 0.0 < xi && xi <= u {
        1.0
    } else if u <= xi && xi < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `Q(u, v; ξ) = sign(ξ)χ(u;ξ) + sign(ξ)χ(v;ξ) − 2χ(u;ξ)χ(v;ξ)`, whose
/// ξ-integral is `|u − v|`.
pub fn q(u: f64, v: f64, xi: f64) -> f64 {
    let (cu, cv) = (chi(u, xi), chi(v, xi));
    sign(xi) * (cu + cv) - 2.0 * cu * cv
}

/// A kernel scaled to width `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    kernel: MollifierKernel,
    eps: f64,
}

impl Mollifier {
    pub fn new(kernel: MollifierKernel, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!("mollification width must be positive, got {eps}")));
        }
        Ok(Mollifier { kernel, eps })
    }

    pub fn kernel(&self) -> MollifierKernel {
        self.kernel
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `J_ε(x)`.
    pub fn j(&self, x: f64) -> f64 {
        self.kernel.density_eps(x, self.eps)
    }

    /// `χ_ε(u; ξ) = ∫ χ(u; ζ) J_ε(ξ − ζ) dζ = K_ε(ξ) − K_ε(ξ − u)`.
    pub fn chi_eps(&self, u: f64, xi: f64) -> f64 {
        self.kernel.cdf_eps(xi, self.eps) - self.kernel.cdf_eps(xi - u, self.eps)
    }

    /// `sign_ε(ξ) = 2 ∫₀^ξ J_ε = 2K_ε(ξ) − 1`.
    pub fn sign_eps(&self, xi: f64) -> f64 {
        2.0 * self.kernel.cdf_eps(xi, self.eps) - 1.0
    }

    /// `Q_ε(u, v; ξ)`.
    pub fn q_eps(&self, u: f64, v: f64, xi: f64) -> f64 {
        let s = self.sign_eps(xi);
        let (cu, cv) = (self.chi_eps(u, xi), self.chi_eps(v, xi));
        s * cu + s * cv - 2.0 * cu * cv
    }

    /// Points where mollified χ-expressions in `u` and `v` lose smoothness.
    fn breaks(&self, values: &[f64]) -> Vec<f64> {
        let e = self.eps;
        let mut b = vec![-e, 0.0, e];
        for &x in values {
            b.extend_from_slice(&[x - e, x, x + e]);
        }
        b
    }

    /// `∫ Q_ε(u, v; ξ) w(ξ) dξ` over `[min(0,u,v) − ε, max(0,u,v) + ε]`.
    /// `extra_breaks` lists kinks of the weight.
    pub fn integral_q_eps(
        &self,
        u: f64,
        v: f64,
        weight: Option<&dyn Fn(f64) -> f64>,
        extra_breaks: &[f64],
    ) -> Result<f64> {
        let lo = 0f64.min(u).min(v) - self.eps;
        let hi = 0f64.max(u).max(v) + self.eps;
        let mut breaks = self.breaks(&[u, v]);
        breaks.extend_from_slice(extra_breaks);
        let r = match weight {
            Some(w) => integrate(|x| self.q_eps(u, v, x) * w(x), lo, hi, &breaks, QuadTol::default())?,
            None => integrate(|x| self.q_eps(u, v, x), lo, hi, &breaks, QuadTol::default())?,
        };
        Ok(r.value)
    }

    /// `∫ |χ_ε(u; ξ) − χ(u; ξ)| dξ`, supported on `(−ε, ε) ∪ (u − ε, u + ε)`.
    pub fn chi_eps_l1_defect(&self, u: f64) -> Result<f64> {
        let e = self.eps;
        let lo = 0f64.min(u) - e;
        let hi = 0f64.max(u) + e;
        let mut breaks = self.breaks(&[u]);
        breaks.retain(|b| *b > lo && *b < hi);
        // Only the mollification zones contribute; skip the flat middle.
        let mut total = 0.0;
        let mut zones = vec![(-e, e), (u - e, u + e)];
        zones.sort_by(|a, b| a.0.total_cmp(&b.0));
        if zones[1].0 < zones[0].1 {
            zones = vec![(zones[0].0, zones[0].1.max(zones[1].1))];
        }
        for (a, b) in zones {
            total += integrate(|x| (self.chi_eps(u, x) - chi(u, x)).abs(), a, b, &breaks, QuadTol::default())?.value;
        }
        Ok(total)
    }

    /// `R^f_ε(u, ζ) = ∫₀ᵘ (f(σ) − f(ζ)) J_ε(σ − ζ) dσ`, integrated over
    /// `[0, u] ∩ [ζ − ε, ζ + ε]`.
    pub fn r_f_eps(&self, f: &ScalarFn, u: f64, zeta: f64) -> Result<f64> {
        let lo = 0f64.min(u).max(zeta - self.eps);
        let hi = 0f64.max(u).min(zeta + self.eps);
        if lo >= hi {
            return Ok(0.0);
        }
        let fz = f.eval(zeta);
        let mut breaks = f.kinks();
        breaks.push(zeta);
        let v = integrate(
            |s| (f.eval(s) - fz) * self.j(s - zeta),
            lo,
            hi,
            &breaks,
            QuadTol::default(),
        )?
        .value;
        Ok(if u < 0.0 { -v } else { v })
    }

    /// Kernel values at the mean-value points of the discrete chain rule:
    /// `J_ε(ζ − θ) = (1/(b−a)) ∫_a^b J_ε(ζ − ξ) dξ` and
    /// `J_ε(ζ − τ) = (2/(b−a)²) ∫_a^b J_ε(ζ − ξ)(b − ξ) dξ`, both equal to
    /// `J_ε(ζ − a)` when `a = b`.
    pub fn theta_tau_kernel_values(&self, a: f64, b: f64, zeta: f64) -> Result<(f64, f64)> {
        let h = b - a;
        if h == 0.0 {
            let v = self.j(zeta - a);
            return Ok((v, v));
        }
        // ξ = a + h·s for s ∈ [0, 1]; the kernel is nonzero for |ζ − ξ| < ε.
        let s1 = (zeta - self.eps - a) / h;
        let s2 = (zeta + self.eps - a) / h;
        let lo = s1.min(s2).max(0.0);
        let hi = s1.max(s2).min(1.0);
        if lo >= hi {
            return Ok((0.0, 0.0));
        }
        let mid = (zeta - a) / h;
        let theta = integrate(|s| self.j(zeta - a - h * s), lo, hi, &[mid], QuadTol::default())?.value;
        let tau = integrate(
            |s| 2.0 * self.j(zeta - a - h * s) * (1.0 - s),
            lo,
            hi,
            &[mid],
            QuadTol::default(),
        )?
        .value;
        Ok((theta, tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_value;

    fn moll(eps: f64) -> Mollifier {
        Mollifier::new(MollifierKernel::bump(), eps).unwrap()
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(2.0, 1.0), 1.0);
        assert_eq!(chi(-2.0, -1.0), -1.0);
        assert_eq!(chi(2.0, 3.0), 0.0);
        for u in [-3.0, 0.0, 0.5, 7.0] {
            assert_eq!(chi(u, 0.0), 0.0);
        }
        assert_eq!(chi(2.0, 2.0), 1.0);
        assert_eq!(chi(-2.0, -2.0), -1.0);
    }

    #[test]
    fn q_integrates_to_distance() {
        let v = integrate_value(|x| q(3.0, 1.0, x), -1.0, 4.0, &[0.0, 1.0, 3.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_value(|x| q(-1.5, 0.5, x), -2.0, 1.0, &[-1.5, 0.0, 0.5]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mollified_matches_exact_away_from_zones() {
        let m = moll(0.1);
        for &(u, xi) in &[(1.0, 0.5), (1.0, 1.5), (-1.0, -0.5), (-1.0, 0.4), (0.5, -0.3)] {
            assert_eq!(m.chi_eps(u, xi), chi(u, xi));
        }
        assert_eq!(m.sign_eps(0.1), 1.0);
        assert_eq!(m.sign_eps(-0.1), -1.0);
    }

    #[test]
    fn sign_identity_holds() {
        let m = moll(0.2);
        for &(u, xi) in &[(0.3, 0.1), (-0.7, -0.65), (0.05, 0.0), (1.0, 0.95)] {
            let lhs = m.sign_eps(xi) - 2.0 * m.chi_eps(u, xi);
            assert!((lhs - m.sign_eps(xi - u)).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_eps_matches_convolution_quadrature() {
        let m = moll(0.05);
        for &(u, xi) in &[(0.3, 0.02), (0.3, 0.29), (-0.2, -0.23), (0.01, 0.0)] {
            let lo = 0f64.min(u);
            let hi = 0f64.max(u);
            let conv = integrate_value(|z| chi(u, z) * m.j(xi - z), lo, hi, &[xi - 0.05, xi + 0.05]).unwrap();
            assert!((m.chi_eps(u, xi) - conv).abs() < 1e-11, "{u} {xi}");
        }
    }

    #[test]
    fn theta_tau_degenerate_interval() {
        let m = moll(0.1);
        let (t, s) = m.theta_tau_kernel_values(0.3, 0.3, 0.35).unwrap();
        assert_eq!(t, m.j(0.35 - 0.3));
        assert_eq!(s, t);
        let (t, s) = m.theta_tau_kernel_values(0.0, 1.0, 5.0).unwrap();
        assert_eq!((t, s), (0.0, 0.0));
    }

    #[test]
    fn commutator_vanishes_for_constant_flux_and_far_points() {
        let m = moll(0.1);
        assert_eq!(m.r_f_eps(&ScalarFn::Const(2.0), 1.0, 0.5).unwrap(), 0.0);
        assert_eq!(m.r_f_eps(&ScalarFn::Sin, 1.0, 1.5).unwrap(), 0.0);
        assert_eq!(m.r_f_eps(&ScalarFn::Sin, 1.0, -0.2).unwrap(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(Mollifier::new(MollifierKernel::bump(), 0.0).is_err());
    }
}
