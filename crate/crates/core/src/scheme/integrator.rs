//! Time integrators for `du/dt = rhs(u)`.
//!
//! The explicit methods are Shu–Osher convex combinations of forward Euler
//! steps, so each inherits the monotonicity of forward Euler under the
//! step-size rule. Implicit Euler solves `w − u − Δt·rhs(w) = 0` with damped
//! Newton iterations whose linear systems are handled by restarted GMRES on
//! finite-difference Jacobian-vector products.

use std::fmt;
use std::str::FromStr;

use super::op::{SemiDiscreteOp, Workspace};
use crate::error::{Error, Result};
use crate::grid::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExplicitEuler,
    SspRk2,
    SspRk3,
    ImplicitEuler,
}

impl Method {
    pub fn is_explicit(self) -> bool {
        !matches!(self, Method::ImplicitEuler)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExplicitEuler => "explicit-euler",
            Method::SspRk2 => "ssp-rk2",
            Method::SspRk3 => "ssp-rk3",
            Method::ImplicitEuler => "implicit-euler",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "explicit-euler" | "euler" => Ok(Method::ExplicitEuler),
            "ssp-rk2" | "rk2" => Ok(Method::SspRk2),
            "ssp-rk3" | "rk3" => Ok(Method::SspRk3),
            "implicit-euler" | "backward-euler" => Ok(Method::ImplicitEuler),
            other => Err(Error::Parse(format!("unknown integrator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub cfl_safety: f64,
    pub dt_override: Option<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::SspRk2,
            cfl_safety: 0.45,
            dt_override: None,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        }
    }
}

impl IntegratorConfig {
    pub fn with_method(method: Method) -> Self {
        IntegratorConfig {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if let Some(dt) = self.dt_override {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidArgument(format!("dt_override must be positive, got {dt}")));
            }
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::InvalidArgument("newton tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Owns the scratch space for repeated steps on one grid.
pub struct Stepper<'a> {
    op: &'a SemiDiscreteOp,
    cfg: IntegratorConfig,
    ws: Workspace,
    k: Vec<f64>,
    stage: Vec<f64>,
    stage2: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(op: &'a SemiDiscreteOp, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let n = op.spec().len();
        Ok(Stepper {
            op,
            cfg,
            ws: Workspace::default(),
            k: vec![0.0; n],
            stage: vec![0.0; n],
            stage2: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// Forward Euler from `src` into `dst`.
    fn euler(&mut self, src: &[f64], dst: &mut [f64], dt: f64) -> Result<()> {
        self.op.rhs_into(src, &mut self.k, &mut self.ws)?;
        for ((d, s), k) in dst.iter_mut().zip(src).zip(&self.k) {
            *d = s + dt * k;
        }
        Ok(())
    }

    /// Advances `u` in place by `dt`.
    pub fn step_in_place(&mut self, u: &mut [f64], dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        match self.cfg.method {
            Method::ExplicitEuler => {
                let src = u.to_vec();
                self.euler(&src, u, dt)
            }
            Method::SspRk2 => {
                let mut s1 = std::mem::take(&mut self.stage);
                let mut s2 = std::mem::take(&mut self.stage2);
                self.euler(u, &mut s1, dt)?;
                self.euler(&s1, &mut s2, dt)?;
                for (x, y) in u.iter_mut().zip(&s2) {
                    *x = 0.5 * *x + 0.5 * y;
                }
                self.stage = s1;
                self.stage2 = s2;
                Ok(())
            }
            Method::SspRk3 => {
                let mut s1 = std::mem::take(&mut self.stage);
                let mut s2 = std::mem::take(&mut self.stage2);
                self.euler(u, &mut s1, dt)?;
                self.euler(&s1, &mut s2, dt)?;
                for (y, x) in s2.iter_mut().zip(u.iter()) {
                    *y = x + 0.25 * (*y - x);
                }
                self.euler(&s2, &mut s1, dt)?;
                for (x, y) in u.iter_mut().zip(&s1) {
                    *x += 2.0 / 3.0 * (y - *x);
                }
                self.stage = s1;
                self.stage2 = s2;
                Ok(())
            }
            Method::ImplicitEuler => {
                let next = self.implicit_solve(u, dt)?;
                u.copy_from_slice(&next);
                Ok(())
            }
        }
    }

    fn l1(&self, v: &[f64]) -> f64 {
        self.op.spec().cell_volume() * v.iter().map(|x| x.abs()).sum::<f64>()
    }

    /// `G(w) = w − u − Δt·rhs(w)`.
    fn residual(&mut self, w: &[f64], u: &[f64], dt: f64, out: &mut [f64]) -> Result<()> {
        self.op.rhs_into(w, &mut self.k, &mut self.ws)?;
        for i in 0..w.len() {
            out[i] = w[i] - u[i] - dt * self.k[i];
        }
        Ok(())
    }

    fn implicit_solve(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>> {
        let n = u.len();
        let target = self.cfg.newton_tol * (1.0 + self.l1(u));
        let mut w = u.to_vec();
        let mut g = vec![0.0; n];
        self.residual(&w, u, dt, &mut g)?;
        let mut norm = self.l1(&g);
        let mut history = vec![norm];
        let mut trial = vec![0.0; n];
        let mut g_trial = vec![0.0; n];
        let mut newton_ok = true;

        for _ in 0..self.cfg.newton_max_iter {
            if norm <= target {
                return Ok(w);
            }
            let jac = StencilJacobian::new(self.op, &w, dt);
            let rhs_vec: Vec<f64> = g.iter().map(|x| -x).collect();
            let delta = gmres(
                |v: &[f64], out: &mut [f64]| {
                    jac.apply(v, out);
                    Ok(())
                },
                &jac.diag,
                &rhs_vec,
                1e-10,
                50,
                400,
            )?;

            // Backtracking on the ℓ¹ residual.
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda >= 1.0 / 1024.0 {
                for i in 0..n {
                    trial[i] = w[i] + lambda * delta[i];
                }
                self.residual(&trial, u, dt, &mut g_trial)?;
                let t_norm = self.l1(&g_trial);
                if t_norm < (1.0 - 1e-4 * lambda) * norm || t_norm <= target {
                    std::mem::swap(&mut w, &mut trial);
                    std::mem::swap(&mut g, &mut g_trial);
                    norm = t_norm;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            history.push(norm);
            if !accepted {
                newton_ok = false;
                break;
            }
        }
        if norm <= target {
            return Ok(w);
        }
        log::debug!("newton stalled (ok = {newton_ok}); falling back to fixed-point iteration");

        // Fixed-point fallback: w ← u + Δt·rhs(w).
        for _ in 0..10 * self.cfg.newton_max_iter {
            self.op.rhs_into(&w, &mut self.k, &mut self.ws)?;
            for i in 0..n {
                w[i] = u[i] + dt * self.k[i];
            }
            self.residual(&w, u, dt, &mut g)?;
            norm = self.l1(&g);
            history.push(norm);
            if norm <= target {
                return Ok(w);
            }
            if !norm.is_finite() {
                break;
            }
        }
        Err(Error::Integrator {
            iterations: history.len(),
            history,
        })
    }
}

/// `∂G/∂w = I − Δt·∂rhs/∂w` assembled on the stencil. At kinks of `F₁`,
/// `F₂` or `A^η` the one-sided derivatives give an element of the
/// generalized Jacobian, which keeps Newton convergent on piecewise-smooth data.
struct StencilJacobian {
    dt: f64,
    /// Diagonal of `∂G/∂w`.
    diag: Vec<f64>,
    /// Per axis: `∂rhs_α/∂w_{α−e}` as a function of the left neighbor's value.
    from_left: Vec<Vec<f64>>,
    /// Per axis: `∂rhs_α/∂w_{α+e}` as a function of the right neighbor's value.
    from_right: Vec<Vec<f64>>,
    /// Per axis: left and right neighbor indices, `None` for ghost cells.
    neighbors: Vec<Vec<(Option<usize>, Option<usize>)>>,
}

impl StencilJacobian {
    fn new(op: &SemiDiscreteOp, w: &[f64], dt: f64) -> Self {
        let spec = op.spec();
        let d = spec.dim();
        let inv_dx = 1.0 / spec.dx();
        let inv_dx2 = inv_dx * inv_dx;
        let a_prime: Vec<f64> = w.iter().map(|&v| op.diffusion().deriv(v) * inv_dx2).collect();
        let mut diag: Vec<f64> = a_prime.iter().map(|ap| 1.0 + dt * 2.0 * d as f64 * ap).collect();
        let mut from_left = Vec::with_capacity(d);
        let mut from_right = Vec::with_capacity(d);
        let mut neighbors = Vec::with_capacity(d);
        for (axis, split) in op.model().fluxes().iter().enumerate() {
            let f1: Vec<f64> = w.iter().map(|&v| split.f1.deriv(v) * inv_dx).collect();
            let f2: Vec<f64> = w.iter().map(|&v| split.f2.deriv(v) * inv_dx).collect();
            for i in 0..w.len() {
                diag[i] += dt * (f1[i] - f2[i]);
            }
            from_left.push(f1.iter().zip(&a_prime).map(|(f, a)| f + a).collect());
            from_right.push(f2.iter().zip(&a_prime).map(|(f, a)| a - f).collect());
            neighbors.push(
                (0..w.len())
                    .map(|i| (spec.neighbor(i, axis, -1), spec.neighbor(i, axis, 1)))
                    .collect(),
            );
        }
        StencilJacobian {
            dt,
            diag,
            from_left,
            from_right,
            neighbors,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.diag[i] * v[i];
        }
        for axis in 0..self.neighbors.len() {
            let (left, right) = (&self.from_left[axis], &self.from_right[axis]);
            for (i, &(l, r)) in self.neighbors[axis].iter().enumerate() {
                let mut off = 0.0;
                if let Some(l) = l {
                    off += left[l] * v[l];
                }
                if let Some(r) = r {
                    off += right[r] * v[r];
                }
                out[i] -= self.dt * off;
            }
        }
    }
}

/// Right-preconditioned restarted GMRES for `J x = b` with a Jacobi
/// preconditioner `diag`, starting from `x = 0`.
fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    diag: &[f64],
    b: &[f64],
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = b.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let norm = |a: &[f64]| dot(a, a).sqrt();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut work = vec![0.0; n];
    let mut precond = vec![0.0; n];
    let mut total = 0;
    while total < max_iter {
        let beta = norm(&r);
        if beta <= rel_tol * b_norm {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut gvec = vec![beta];
        let mut k_used = 0;
        for j in 0..restart {
            total += 1;
            for i in 0..n {
                precond[i] = basis[j][i] / diag[i];
            }
            apply(&precond, &mut work)?;
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                h[i] = dot(&work, v);
                for (w, vv) in work.iter_mut().zip(v) {
                    *w -= h[i] * vv;
                }
            }
            h[j + 1] = norm(&work);
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = h[j].hypot(h[j + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[j] / denom, h[j + 1] / denom) };
            let next_basis = if h[j + 1] > 0.0 {
                Some(work.iter().map(|w| w / h[j + 1]).collect::<Vec<f64>>())
            } else {
                None
            };
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            gvec.push(-s * gvec[j]);
            gvec[j] *= c;
            hess.push(h);
            k_used = j + 1;
            let resid = gvec[j + 1].abs();
            match next_basis {
                Some(v) if resid > rel_tol * b_norm && total < max_iter => basis.push(v),
                _ => break,
            }
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = gvec[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= hess[jj][i] * yj;
            }
            y[i] = s / hess[i][i];
        }
        for i in 0..n {
            let mut acc = 0.0;
            for (jj, yj) in y.iter().enumerate() {
                acc += yj * basis[jj][i];
            }
            x[i] += acc / diag[i];
        }
        apply(&x, &mut work)?;
        for i in 0..n {
            r[i] = b[i] - work[i];
        }
    }
    Ok(x)
}

/// One step of `cfg.method` from `u`.
pub fn step(op: &SemiDiscreteOp, u: &Field, dt: f64, cfg: &IntegratorConfig) -> Result<Field> {
    op.check(u)?;
    let mut stepper = Stepper::new(op, *cfg)?;
    let mut values = u.values().to_vec();
    stepper.step_in_place(&mut values, dt)?;
    Ok(Field::from_parts_unchecked(op.spec().clone(), values, u.time() + dt))
}
