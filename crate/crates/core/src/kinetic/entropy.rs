//! Entropy-flux pairs in the `ζ = A(u)` variable and Kružkov entropy
//! residuals of computed trajectories.

use super::context::{Inverse, KineticContext};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{effective_diffusion, Model, ScalarFn};
use crate::quadrature::{integrate, QuadTol, GAUSS3_NODES, GAUSS3_WEIGHTS};
use crate::scheme::Trajectory;

/// `ψ_A(u) = ∫₀^{A(u)} S'(ζ)B'(ζ) dζ` and `q_A(u) = ∫₀^{A(u)} S'(ζ)g'(ζ) dζ`
/// per axis, with `A = A^η`.
#[derive(Debug, Clone)]
pub struct EntropyPair {
    pub psi_a: ScalarFn,
    pub q_a: Vec<ScalarFn>,
    /// Largest relative finite-difference mismatch found by the self-check.
    pub derivative_mismatch: f64,
}

fn zeta_integral(
    integrand: impl Fn(f64) -> f64,
    upper: f64,
    breaks: &[f64],
) -> f64 {
    let tol = QuadTol {
        rel: 1e-12,
        ..QuadTol::default()
    };
    // A failed integral shows up as NaN and is caught by the derivative check.
    integrate(integrand, 0.0, upper, breaks, tol).map(|r| r.value).unwrap_or(f64::NAN)
}

/// Builds the pair for entropy `S` and checks `ψ_A' = S'∘A` and
/// `q_A' = (S'∘A) f'` by central differences on `[lo, hi]`.
pub fn entropy_pair(s: &ScalarFn, ctx: &KineticContext, lo: f64, hi: f64) -> Result<EntropyPair> {
    ctx.require_invertible(lo, hi)?;
    let a = ctx.diffusion().clone();
    let inv = ctx.inverse().clone();
    let breaks = ctx.zeta_kinks();

    let psi_a = {
        let (a, inv, s, s2, breaks) = (a.clone(), inv.clone(), s.clone(), s.clone(), breaks.clone());
        let a2 = a.clone();
        ScalarFn::custom(
            "psi_A",
            move |u| zeta_integral(|z| s.deriv(z) * inv.deriv(z), a.eval(u), &breaks),
            move |u| s2.deriv(a2.eval(u)),
        )
    };
    let q_a: Vec<ScalarFn> = ctx
        .model()
        .fluxes()
        .iter()
        .map(|split| {
            let f = split.flux.clone();
            let (a, inv, s, breaks) = (a.clone(), inv.clone(), s.clone(), breaks.clone());
            let (f2, a2, s2) = (f.clone(), a.clone(), s.clone());
            let g_prime = move |inv: &Inverse, a: &ScalarFn, z: f64| {
                let b = inv.eval(z);
                f.deriv(b) / a.deriv(b)
            };
            ScalarFn::custom(
                "q_A",
                move |u| zeta_integral(|z| s.deriv(z) * g_prime(&inv, &a, z), a.eval(u), &breaks),
                move |u| s2.deriv(a2.eval(u)) * f2.deriv(u),
            )
        })
        .collect();

    let mut worst: f64 = 0.0;
    let n = 24;
    for k in 0..=n {
        let u = lo + (hi - lo) * (k as f64 + 0.37) / (n as f64 + 1.0);
        let h = 1e-4 * (1.0 + u.abs());
        for func in std::iter::once(&psi_a).chain(q_a.iter()) {
            let fd = (func.eval(u + h) - func.eval(u - h)) / (2.0 * h);
            let exact = func.deriv(u);
            let err = (fd - exact).abs() / exact.abs().max(1.0);
            if !err.is_finite() {
                return Err(Error::Quadrature {
                    lo: 0.0,
                    hi: a.eval(u),
                    achieved: f64::NAN,
                    requested: 1e-12,
                });
            }
            worst = worst.max(err);
        }
    }
    if worst > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "entropy pair derivative check failed: mismatch {worst:e}"
        )));
    }
    Ok(EntropyPair {
        psi_a,
        q_a,
        derivative_mismatch: worst,
    })
}

/// Separable test function `φ(t, x) = ψ(t) ρ(x)` with smooth bumps
/// `ψ(t) = exp(1 − 1/(1 − ((t − t_c)/w)²))` and
/// `ρ(x) = exp(1 − 1/(1 − |x − c|²/R²))`, both equal to 1 at their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpTestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Derivatives of `b(s) = exp(1 − 1/(1 − s))` for `s ∈ [0, 1)`.
fn bump_s(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 - s;
    let b = (1.0 - 1.0 / w).exp();
    let b1 = -b / (w * w);
    let b2 = b / (w * w * w * w) - 2.0 * b / (w * w * w);
    (b, b1, b2)
}

impl BumpTestFunction {
    /// Time profile centered at `t = 0` with radius `horizon`, so `φ(0, ·) = ρ`
    /// and `φ` vanishes smoothly at the horizon.
    pub fn from_start(horizon: f64, center: Vec<f64>, radius: f64) -> Self {
        BumpTestFunction {
            t_center: 0.0,
            t_radius: horizon,
            center,
            radius,
        }
    }

    /// `(ψ, ψ', ψ'')`.
    pub fn time_factor(&self, t: f64) -> (f64, f64, f64) {
        let y = (t - self.t_center) / self.t_radius;
        let (b, b1, b2) = bump_s(y * y);
        let dy = 1.0 / self.t_radius;
        // d/dt b(y²) = b'(y²)·2y·dy; d²/dt² = (b''·4y² + 2b')·dy².
        (b, b1 * 2.0 * y * dy, (b2 * 4.0 * y * y + 2.0 * b1) * dy * dy)
    }

    /// `(ρ, ∇ρ, Δρ)` at `x`.
    pub fn space_factor(&self, x: &[f64]) -> (f64, Vec<f64>, f64) {
        let r2 = self.radius * self.radius;
        let s: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / r2;
        let (b, b1, b2) = bump_s(s);
        let grad: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| b1 * 2.0 * (a - c) / r2).collect();
        let d = x.len() as f64;
        let lap = b2 * 4.0 * s / r2 + b1 * 2.0 * d / r2;
        (b, grad, lap)
    }

    /// Sup norms of the radial profile derivatives on a fine sample:
    /// `(‖ρ‖, ‖∇ρ‖, ‖∇²ρ‖, ‖Δρ‖, ‖∇Δρ‖)`.
    fn space_bounds(&self, dim: usize) -> [f64; 5] {
        let n = 4000;
        let r = self.radius;
        let d = dim as f64;
        let profile = |rho: f64| {
            let s = (rho / r).powi(2);
            let (b, b1, b2) = bump_s(s);
            let p1 = b1 * 2.0 * rho / (r * r);
            let p2 = b2 * (2.0 * rho / (r * r)).powi(2) + b1 * 2.0 / (r * r);
            let lap = b2 * 4.0 * s / (r * r) + b1 * 2.0 * d / (r * r);
            (b, p1, p2, lap)
        };
        let mut out = [0.0f64; 5];
        let h = r / n as f64;
        for k in 0..n {
            let rho = (k as f64 + 0.5) * h;
            let (b, p1, p2, lap) = profile(rho);
            let (_, _, _, lap_next) = profile(rho + 0.5 * h);
            let (_, _, _, lap_prev) = profile((rho - 0.5 * h).max(0.0));
            out[0] = out[0].max(b.abs());
            out[1] = out[1].max(p1.abs());
            out[2] = out[2].max(p2.abs().max((p1 / rho).abs()));
            out[3] = out[3].max(lap.abs());
            out[4] = out[4].max(((lap_next - lap_prev) / h).abs());
        }
        out
    }

    /// `(‖ψ‖, ‖ψ'‖, ‖ψ''‖)` over `[0, horizon]`.
    fn time_bounds(&self, horizon: f64) -> [f64; 3] {
        let n = 4000;
        let mut out = [0.0f64; 3];
        for k in 0..=n {
            let (a, b, c) = self.time_factor(horizon * k as f64 / n as f64);
            out[0] = out[0].max(a.abs());
            out[1] = out[1].max(b.abs());
            out[2] = out[2].max(c.abs());
        }
        out
    }

    fn support_volume(&self, dim: usize) -> f64 {
        (2.0 * self.radius).powi(dim as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyResidual {
    pub c: f64,
    pub value: f64,
    /// `C_φ (Δx + Δt)` with `Δt` the time resolution of the quadrature.
    pub tol: f64,
    pub c_phi: f64,
    pub dx: f64,
    pub dt: f64,
}

impl EntropyResidual {
    pub fn pass(&self) -> bool {
        self.value >= -self.tol
    }
}

/// Minimum number of stored checkpoints (besides the initial field).
pub const MIN_RESIDUAL_CHECKPOINTS: usize = 20;

/// Kružkov entropy residual
/// `∬ |u−c|φₜ + sign(u−c)(f(u)−f(c))·∇φ + |A(u)−A(c)|Δφ + ∫|u₀−c|φ(0,·)`.
///
/// Each stored field stands for the time slab between the midpoints to its
/// neighbors. The `φₜ` term is integrated exactly in time over each slab, the
/// other terms with three-point Gauss in time; space uses cell centers.
pub fn entropy_residual(traj: &Trajectory, c: f64, phi: &BumpTestFunction, model: &Model) -> Result<EntropyResidual> {
    let fields = &traj.fields;
    if fields.len() < MIN_RESIDUAL_CHECKPOINTS + 1 {
        return Err(Error::InvalidArgument(format!(
            "entropy residual needs at least {MIN_RESIDUAL_CHECKPOINTS} checkpoints, trajectory has {}",
            fields.len().saturating_sub(1)
        )));
    }
    let spec = fields[0].spec();
    let dim = spec.dim();
    if phi.center.len() != dim {
        return Err(Error::Mismatch("test function dimension differs from the grid".into()));
    }
    let upper = spec.upper();
    for (i, &cx) in phi.center.iter().enumerate() {
        if cx - phi.radius < spec.origin()[i] || cx + phi.radius > upper[i] {
            return Err(Error::Domain("test function support leaves the computational box".into()));
        }
    }
    let t0 = fields[0].time();
    let t_end = fields[fields.len() - 1].time();
    if phi.t_center < t0 || phi.t_center + phi.t_radius > t_end + 1e-12 {
        return Err(Error::Domain("test function support leaves the time window".into()));
    }

    let a = effective_diffusion(model);
    let fluxes: Vec<&ScalarFn> = model.fluxes().iter().map(|s| &s.flux).collect();
    let vol = spec.cell_volume();
    let centers: Vec<Vec<f64>> = (0..spec.len()).map(|lin| spec.cell_center(lin)).collect();
    let space: Vec<(f64, Vec<f64>, f64)> = centers.iter().map(|x| phi.space_factor(x)).collect();

    let times: Vec<f64> = fields.iter().map(|f| f.time()).collect();
    let n = fields.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(t0);
    for k in 1..n {
        edges.push(0.5 * (times[k - 1] + times[k]));
    }
    edges.push(t_end);

    let ac = a.eval(c);
    let fc: Vec<f64> = fluxes.iter().map(|f| f.eval(c)).collect();
    let sgn = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    };

    let mut total = 0.0;
    let mut dt_max: f64 = 0.0;
    let mut u_dev: f64 = 0.0;
    let mut lo_u = f64::INFINITY;
    let mut hi_u = f64::NEG_INFINITY;
    for (k, field) in fields.iter().enumerate() {
        let (e0, e1) = (edges[k], edges[k + 1]);
        dt_max = dt_max.max(e1 - e0);
        let dpsi = phi.time_factor(e1).0 - phi.time_factor(e0).0;
        let half = 0.5 * (e1 - e0);
        let mid = 0.5 * (e0 + e1);
        let psi_int: f64 = GAUSS3_NODES
            .iter()
            .zip(GAUSS3_WEIGHTS)
            .map(|(&x, w)| w * half * phi.time_factor(mid + half * x).0)
            .sum();
        let mut s_time = 0.0;
        let mut s_rest = 0.0;
        for (lin, &u) in field.values().iter().enumerate() {
            let (rho, grad, lap) = &space[lin];
            if *rho == 0.0 && *lap == 0.0 {
                continue;
            }
            let dev = u - c;
            s_time += dev.abs() * rho;
            let sg = sgn(dev);
            let conv: f64 = fluxes.iter().zip(&fc).zip(grad).map(|((f, fcv), g)| sg * (f.eval(u) - fcv) * g).sum();
            s_rest += conv + (a.eval(u) - ac).abs() * lap;
            u_dev = u_dev.max(dev.abs());
            lo_u = lo_u.min(u);
            hi_u = hi_u.max(u);
        }
        total += vol * (dpsi * s_time + psi_int * s_rest);
    }
    let (psi0, _, _) = phi.time_factor(t0);
    let initial: f64 = fields[0]
        .values()
        .iter()
        .zip(&space)
        .map(|(u, (rho, _, _))| (u - c).abs() * rho)
        .sum::<f64>()
        * vol
        * psi0;
    total += initial;

    // Error scale: slab and cell quadrature errors plus the O(Δx) defect of
    // a monotone scheme's cell entropy inequality, each bounded by one more
    // derivative of φ than the term it perturbs.
    let (lo_u, hi_u) = if lo_u <= hi_u { (lo_u.min(c), hi_u.max(c)) } else { (c, c) };
    let lip_f: f64 = fluxes.iter().map(|f| f.lipschitz_on(lo_u, hi_u)).sum();
    let lip_a = a.lipschitz_on(lo_u, hi_u);
    let [r0, r1, r2, rlap, rlap1] = phi.space_bounds(dim);
    let [p0, p1, p2] = phi.time_bounds(t_end - t0);
    let time_span = (t_end - t0).min(2.0 * phi.t_radius);
    let c_phi = time_span
        * phi.support_volume(dim)
        * u_dev.max(1e-300)
        * (p2 * r0 + p1 * r1 + lip_f * (p1 * r1 + p0 * r2) + lip_a * (p1 * rlap + p0 * rlap1));
    let dx = spec.dx();
    Ok(EntropyResidual {
        c,
        value: total,
        tol: c_phi * (dx + dt_max),
        c_phi,
        dx,
        dt: dt_max,
    })
}

/// Convenience wrapper returning the residual for several constants.
pub fn entropy_residuals(
    traj: &Trajectory,
    constants: &[f64],
    phi: &BumpTestFunction,
    model: &Model,
) -> Result<Vec<EntropyResidual>> {
    constants.iter().map(|&c| entropy_residual(traj, c, phi, model)).collect()
}

/// A trajectory holding `fields`, for residual evaluation of externally produced data.
pub fn trajectory_from_fields(fields: Vec<Field>) -> Trajectory {
    let times = fields.iter().map(|f| f.time()).collect();
    Trajectory {
        fields,
        times,
        steps: 0,
        dt: 0.0,
    }
}
