//! Cellwise dissipation densities of the semi-discrete kinetic formulation.

use super::chi::chi;
use super::context::KineticContext;
use crate::error::Result;
use crate::grid::Field;

fn a_values(u: &Field, ctx: &KineticContext) -> Field {
    let a = ctx.diffusion();
    u.map(|v| a.eval(v))
}

/// `½ Σᵢ [J_ε(ζ − τ⁺ᵢ)(D₊ⁱA)² + J_ε(ζ − τ⁻ᵢ)(D₋ⁱA)²]` with `A = A^η(u)` and
/// `τ±ᵢ` the mean-value points between `A(u_α)` and `A(u_{α±eᵢ})`.
pub fn discrete_diss_density(u: &Field, ctx: &KineticContext, zeta: f64) -> Result<Field> {
    let a = a_values(u, ctx);
    let spec = u.spec();
    let dx = spec.dx();
    let m = ctx.mollifier();
    let mut out = vec![0.0; u.len()];
    for (lin, o) in out.iter_mut().enumerate() {
        let here = a.values()[lin];
        let mut acc = 0.0;
        for axis in 0..spec.dim() {
            for step in [1isize, -1] {
                let there = a.read(lin, axis, step);
                if there == here {
                    continue;
                }
                let (_, j_tau) = m.theta_tau_kernel_values(here, there, zeta)?;
                let d = (there - here) / dx;
                acc += j_tau * d * d;
            }
        }
        *o = 0.5 * acc;
    }
    Ok(Field::from_parts_unchecked(spec.clone(), out, u.time()))
}

/// `m_F(ξ) = Σᵢ [(F₁ⁱ(ξ) − F₁ⁱ(u_{α−eᵢ})) D₋ⁱχ(u_α; ξ) + (F₂ⁱ(ξ) − F₂ⁱ(u_{α+eᵢ})) D₊ⁱχ(u_α; ξ)]`.
pub fn flux_diss_density(u: &Field, ctx: &KineticContext, xi: f64) -> Result<Field> {
    let spec = u.spec();
    let dx = spec.dx();
    let fluxes = ctx.model().fluxes();
    let mut out = vec![0.0; u.len()];
    for (lin, o) in out.iter_mut().enumerate() {
        let here = u.values()[lin];
        let c_here = chi(here, xi);
        let mut acc = 0.0;
        for (axis, s) in fluxes.iter().enumerate().take(spec.dim()) {
            let left = u.read(lin, axis, -1);
            let right = u.read(lin, axis, 1);
            let dm = (c_here - chi(left, xi)) / dx;
            let dp = (chi(right, xi) - c_here) / dx;
            if dm != 0.0 {
                acc += (s.f1.eval(xi) - s.f1.eval(left)) * dm;
            }
            if dp != 0.0 {
                acc += (s.f2.eval(xi) - s.f2.eval(right)) * dp;
            }
        }
        *o = acc;
    }
    Ok(Field::from_parts_unchecked(spec.clone(), out, u.time()))
}

/// `J_ε(ζ − A(u_α)) |D₊A(u)|²_α`, the mollified parabolic dissipation with a
/// forward-difference gradient.
pub fn continuous_diss_density(u: &Field, ctx: &KineticContext, zeta: f64) -> Result<Field> {
    let a = a_values(u, ctx);
    let spec = u.spec();
    let dx = spec.dx();
    let m = ctx.mollifier();
    let out = (0..u.len())
        .map(|lin| {
            let here = a.values()[lin];
            let grad2: f64 = (0..spec.dim())
                .map(|axis| {
                    let d = (a.read(lin, axis, 1) - here) / dx;
                    d * d
                })
                .sum();
            m.j(zeta - here) * grad2
        })
        .collect();
    Ok(Field::from_parts_unchecked(spec.clone(), out, u.time()))
}

/// Largest defect of the discrete chain rule
/// `D±ⁱχ_ε(A(u); ζ) = J_ε(ζ − θ±ᵢ) D±ⁱA(u)` over cells, axes and directions,
/// measured relative to `max(1, |terms|)`.
pub fn chain_rule_defect(u: &Field, ctx: &KineticContext, zeta: f64) -> Result<f64> {
    let a = a_values(u, ctx);
    let spec = u.spec();
    let dx = spec.dx();
    let m = ctx.mollifier();
    let mut worst: f64 = 0.0;
    for lin in 0..u.len() {
        let here = a.values()[lin];
        for axis in 0..spec.dim() {
            for step in [1isize, -1] {
                let there = a.read(lin, axis, step);
                let s = step as f64;
                let lhs = s * (m.chi_eps(there, zeta) - m.chi_eps(here, zeta)) / dx;
                let (j_theta, _) = m.theta_tau_kernel_values(here, there, zeta)?;
                let rhs = j_theta * s * (there - here) / dx;
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok(worst)
}
