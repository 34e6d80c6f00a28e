//! Time stepping checked against independent computations.

use degencd_core::grid::{bv_seminorm, l1_norm, Boundary, Field, GridSpec};
use degencd_core::model::{burgers_riemann, heat_1d, Model, ScalarFn};
use degencd_core::scheme::{evolve, step, IntegratorConfig, Method, MonitorFlags, SemiDiscreteOp};
use nalgebra::{DMatrix, DVector};

/// `L u` for `uₜ + a uₓ = k uₓₓ` with upwinding, assembled entry by entry.
fn linear_matrix(spec: &GridSpec, a: f64, k: f64) -> DMatrix<f64> {
    let n = spec.len();
    let d = spec.dim();
    let dx = spec.dx();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] -= 2.0 * d as f64 * k / (dx * dx) + d as f64 * a.abs() / dx;
        for axis in 0..d {
            for step in [-1isize, 1] {
                if let Some(j) = spec.neighbor(i, axis, step) {
                    // Upwind: with a > 0 the left neighbor feeds in, with a < 0 the right one.
                    let upwind = if (step < 0) == (a > 0.0) { a.abs() / dx } else { 0.0 };
                    m[(i, j)] += k / (dx * dx) + upwind;
                }
            }
        }
    }
    m
}

fn check_against_dense(spec: GridSpec, a: f64, k: f64) {
    let model = Model::isotropic_eo(spec.dim(), &ScalarFn::Linear(a), ScalarFn::Linear(k), 0.0, -2.0, 2.0).unwrap();
    let op = SemiDiscreteOp::new(model, spec.clone()).unwrap();
    let values: Vec<f64> = (0..spec.len()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
    let u = Field::new(spec.clone(), values.clone(), 0.0).unwrap();
    // Well beyond the explicit limit.
    let dt = 8.0 * op.stable_dt(&u, 1.0, f64::INFINITY).unwrap();
    let cfg = IntegratorConfig::with_method(Method::ImplicitEuler);
    let w = step(&op, &u, dt, &cfg).unwrap();

    let l = linear_matrix(&spec, a, k);
    let system = DMatrix::identity(spec.len(), spec.len()) - l * dt;
    let expect = system.lu().solve(&DVector::from_vec(values)).unwrap();
    let scale = expect.amax().max(1.0);
    for (x, y) in w.values().iter().zip(expect.iter()) {
        assert!((x - y).abs() <= 1e-10 * scale, "{x} vs {y}");
    }
}

#[test]
fn implicit_euler_matches_dense_solve_1d() {
    for b in [Boundary::Periodic, Boundary::ZeroExtension] {
        for a in [0.7, -0.4] {
            check_against_dense(GridSpec::cube(1, 0.0, 1.0, 16, b).unwrap(), a, 0.3);
        }
    }
}

#[test]
fn implicit_euler_matches_dense_solve_2d() {
    for b in [Boundary::Periodic, Boundary::ZeroExtension] {
        check_against_dense(GridSpec::cube(2, 0.0, 1.0, 4, b).unwrap(), 0.5, 0.2);
    }
}

#[test]
fn implicit_euler_solves_nonlinear_degenerate_step() {
    let spec = GridSpec::cube(1, -1.0, 1.0, 16, Boundary::ZeroExtension).unwrap();
    let diffusion = ScalarFn::Ramp {
        scale: 0.1,
        threshold: 0.5,
    };
    let model = Model::isotropic_eo(1, &ScalarFn::HalfSquare, diffusion, 0.0, -2.0, 2.0).unwrap();
    let op = SemiDiscreteOp::new(model, spec.clone()).unwrap();
    let values: Vec<f64> = (0..16).map(|i| if (4..10).contains(&i) { 1.0 } else { -0.3 }).collect();
    let u = Field::new(spec, values, 0.0).unwrap();
    let dt = 10.0 * op.stable_dt(&u, 1.0, f64::INFINITY).unwrap();
    let w = step(&op, &u, dt, &IntegratorConfig::with_method(Method::ImplicitEuler)).unwrap();
    let r = op.rhs(&w).unwrap();
    for ((wi, ui), ri) in w.values().iter().zip(u.values()).zip(r.values()) {
        assert!((wi - ui - dt * ri).abs() <= 1e-11, "residual {}", wi - ui - dt * ri);
    }
    // The implicit step is monotone, so the range cannot grow.
    assert!(w.max() <= 1.0 + 1e-12 && w.min() >= -0.3 - 1e-12);
}

#[test]
fn heat_preserves_mass_until_it_reaches_the_boundary() {
    let p = heat_1d().unwrap();
    let spec = p.grid(128).unwrap();
    let u0 = p.initial_field(&spec).unwrap();
    let op = SemiDiscreteOp::new(p.model.clone(), spec).unwrap();
    let (traj, report) = evolve(&op, &u0, p.horizon, &IntegratorConfig::default(), &MonitorFlags::default()).unwrap();
    assert!(report.pass());
    // The kernel has mass 1 and is negligible at |x| = 6 up to t = 0.3.
    let mass = |f: &Field| f.spec().cell_volume() * f.values().iter().sum::<f64>();
    assert!((mass(&u0) - 1.0).abs() < 1e-10);
    assert!((mass(traj.final_field()) - 1.0).abs() < 1e-8);
}

#[test]
fn burgers_riemann_with_implicit_euler_keeps_variation_bounded() {
    let p = burgers_riemann().unwrap();
    let spec = p.grid(128).unwrap();
    let u0 = p.initial_field(&spec).unwrap();
    let op = SemiDiscreteOp::new(p.model.clone(), spec).unwrap();
    let cfg = IntegratorConfig {
        cfl_safety: 0.9,
        ..IntegratorConfig::with_method(Method::ImplicitEuler)
    };
    let (traj, report) = evolve(&op, &u0, 0.5, &cfg, &MonitorFlags::default()).unwrap();
    assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
    for f in &traj.fields {
        // Jumps from 0 up to 1 and back down: variation 2 including the ghost cells.
        assert!(bv_seminorm(f) <= 2.0 + 1e-8);
        assert!(f.max() <= 1.0 + 1e-8 && f.min() >= -1e-8);
    }
    assert!(l1_norm(traj.final_field()) <= l1_norm(&u0) + 1e-8);
}
