use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{Model, ScalarFn};
use crate::error::{Error, Result};
use crate::grid::{cell_average_init, Boundary, Field, GridSpec};

pub type InitialData = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Where a convergence study gets its reference solution from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    Exact,
    /// Same scheme on a grid refined by this factor relative to the finest study grid.
    FineGrid(usize),
}

#[derive(Clone)]
pub struct TestProblem {
    pub name: String,
    pub model: Model,
    pub u0: InitialData,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub horizon: f64,
    pub exact: Option<SpaceTimeFn>,
    pub reference: ReferencePolicy,
    pub boundary: Boundary,
    /// Default radius of the error ball `B(0, R)`.
    pub ball_radius: f64,
    pub default_grids: Vec<usize>,
}

impl fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("horizon", &self.horizon)
            .field("reference", &self.reference)
            .finish()
    }
}

impl TestProblem {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Grid with `n` cells on the first axis; other axes get the count that
    /// keeps `dx` uniform.
    pub fn grid(&self, n: usize) -> Result<GridSpec> {
        let dx = (self.upper[0] - self.lower[0]) / n as f64;
        let cells: Vec<usize> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| ((u - l) / dx).round() as usize)
            .collect();
        GridSpec::from_box(&self.lower, &self.upper, &cells, self.boundary)
    }

    pub fn initial_field(&self, spec: &GridSpec) -> Result<Field> {
        let u0 = self.u0.clone();
        cell_average_init(move |x| u0(x), spec)
    }

    pub fn exact_at(&self, t: f64, x: &[f64]) -> Option<f64> {
        self.exact.as_ref().map(|e| e(t, x))
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Ok(TestProblem {
            model: self.model.with_eta(eta)?,
            ..self.clone()
        })
    }
}

/// `height · exp(1 − 1/(1 − r²))` for `r = |x − center|/radius < 1`, else 0.
pub fn smooth_bump(center: Vec<f64>, radius: f64, height: f64) -> InitialData {
    Arc::new(move |x: &[f64]| {
        let r2: f64 = x
            .iter()
            .zip(&center)
            .map(|(a, c)| ((a - c) / radius).powi(2))
            .sum();
        if r2 < 1.0 {
            height * (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

/// `height · cos²(π r / 2)` for `r = |x − center|/radius < 1`, else 0.
pub fn cosine_bump(center: Vec<f64>, radius: f64, height: f64) -> InitialData {
    Arc::new(move |x: &[f64]| {
        let r2: f64 = x
            .iter()
            .zip(&center)
            .map(|(a, c)| ((a - c) / radius).powi(2))
            .sum();
        if r2 < 1.0 {
            height * (0.5 * PI * r2.sqrt()).cos().powi(2)
        } else {
            0.0
        }
    })
}

/// Heat kernel `(4πt)^{-d/2} exp(−|x|²/(4t))`.
pub fn heat_kernel(t: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// Barenblatt source solution of `uₜ = (u²)ₓₓ` in one dimension.
pub fn barenblatt_m2(t: f64, x: f64, c: f64) -> f64 {
    let s = t.powf(-1.0 / 3.0);
    s * (c - x * x * s * s / 12.0).max(0.0)
}

fn degenerate_diffusion() -> ScalarFn {
    ScalarFn::Ramp {
        scale: 0.1,
        threshold: 0.5,
    }
}

pub fn advection_1d() -> Result<TestProblem> {
    let model = Model::isotropic_eo(1, &ScalarFn::identity(), ScalarFn::zero(), 0.0, 0.0, 1.0)?;
    let u0 = cosine_bump(vec![-0.5], 0.5, 1.0);
    let u0e = u0.clone();
    Ok(TestProblem {
        name: "advection-1d".into(),
        model,
        u0,
        lower: vec![-2.0],
        upper: vec![2.0],
        horizon: 1.0,
        exact: Some(Arc::new(move |t, x| u0e(&[x[0] - t]))),
        reference: ReferencePolicy::Exact,
        boundary: Boundary::ZeroExtension,
        ball_radius: 2.0,
        default_grids: vec![64, 128, 256, 512],
    })
}

fn heat(dim: usize) -> Result<TestProblem> {
    const T0: f64 = 0.1;
    let model = Model::isotropic_eo(dim, &ScalarFn::zero(), ScalarFn::identity(), 0.0, 0.0, 1.0)?;
    Ok(TestProblem {
        name: format!("heat-{dim}d"),
        model,
        u0: Arc::new(|x: &[f64]| heat_kernel(T0, x)),
        lower: vec![-6.0; dim],
        upper: vec![6.0; dim],
        horizon: 0.2,
        exact: Some(Arc::new(|t, x| heat_kernel(T0 + t, x))),
        reference: ReferencePolicy::Exact,
        boundary: Boundary::ZeroExtension,
        ball_radius: 6.0,
        default_grids: if dim == 1 {
            vec![64, 128, 256, 512]
        } else {
            vec![32, 64, 128, 256]
        },
    })
}

pub fn heat_1d() -> Result<TestProblem> {
    heat(1)
}

pub fn heat_2d() -> Result<TestProblem> {
    heat(2)
}

/// Burgers with `u0 = 1_{x<0}` on `[−2, 2]`. With zero ghost reads the
/// left edge emits a rarefaction fan `(x+2)/t`; the shock moves at 1/2.
pub fn burgers_riemann() -> Result<TestProblem> {
    let model = Model::isotropic_eo(1, &ScalarFn::HalfSquare, ScalarFn::zero(), 0.0, 0.0, 1.0)?;
    Ok(TestProblem {
        name: "burgers-riemann".into(),
        model,
        u0: Arc::new(|x: &[f64]| if x[0] < 0.0 { 1.0 } else { 0.0 }),
        lower: vec![-2.0],
        upper: vec![2.0],
        horizon: 1.0,
        exact: Some(Arc::new(|t, x| {
            let x = x[0];
            if x >= 0.5 * t {
                0.0
            } else if t > 0.0 && x < -2.0 + t {
                ((x + 2.0) / t).clamp(0.0, 1.0)
            } else if x < -2.0 {
                0.0
            } else {
                1.0
            }
        })),
        reference: ReferencePolicy::FineGrid(8),
        boundary: Boundary::ZeroExtension,
        ball_radius: 2.0,
        default_grids: vec![64, 128, 256, 512],
    })
}

pub fn degenerate_1d() -> Result<TestProblem> {
    let model = Model::isotropic_eo(1, &ScalarFn::HalfSquare, degenerate_diffusion(), 0.0, 0.0, 1.0)?;
    Ok(TestProblem {
        name: "degenerate-1d".into(),
        model,
        u0: smooth_bump(vec![-0.5], 0.75, 1.0),
        lower: vec![-2.0],
        upper: vec![2.0],
        horizon: 1.0,
        exact: None,
        reference: ReferencePolicy::FineGrid(8),
        boundary: Boundary::ZeroExtension,
        ball_radius: 2.0,
        default_grids: vec![64, 128, 256, 512],
    })
}

pub fn degenerate_2d() -> Result<TestProblem> {
    let model = Model::isotropic_eo(2, &ScalarFn::HalfSquare, degenerate_diffusion(), 0.0, 0.0, 1.0)?;
    Ok(TestProblem {
        name: "degenerate-2d".into(),
        model,
        u0: smooth_bump(vec![-0.3, -0.3], 0.45, 1.0),
        lower: vec![-1.0, -1.0],
        upper: vec![1.0, 1.0],
        horizon: 0.4,
        exact: None,
        reference: ReferencePolicy::FineGrid(4),
        boundary: Boundary::ZeroExtension,
        ball_radius: 1.5,
        default_grids: vec![32, 64, 128],
    })
}

pub fn porous_medium_1d() -> Result<TestProblem> {
    const T0: f64 = 1.0;
    const C: f64 = 0.25;
    let model = Model::isotropic_eo(1, &ScalarFn::zero(), ScalarFn::SignedSquare(1.0), 0.0, 0.0, C)?;
    Ok(TestProblem {
        name: "porous-medium-1d".into(),
        model,
        u0: Arc::new(|x: &[f64]| barenblatt_m2(T0, x[0], C)),
        lower: vec![-4.0],
        upper: vec![4.0],
        horizon: 1.0,
        exact: Some(Arc::new(|t, x| barenblatt_m2(T0 + t, x[0], C))),
        reference: ReferencePolicy::Exact,
        boundary: Boundary::ZeroExtension,
        ball_radius: 4.0,
        default_grids: vec![64, 128, 256, 512],
    })
}

/// Every built-in problem.
pub fn catalog() -> Vec<TestProblem> {
    [
        advection_1d(),
        heat_1d(),
        heat_2d(),
        burgers_riemann(),
        degenerate_1d(),
        degenerate_2d(),
        porous_medium_1d(),
    ]
    .into_iter()
    .map(|p| p.expect("catalog problems are well-formed"))
    .collect()
}

pub fn problem_by_name(name: &str) -> Result<TestProblem> {
    let key = name.trim().to_ascii_lowercase();
    let alias = match key.as_str() {
        "p1" => "advection-1d",
        "p2" => "heat-1d",
        "p3" => "burgers-riemann",
        "p4" => "degenerate-1d",
        "p5" => "degenerate-2d",
        "p6" => "porous-medium-1d",
        other => other,
    };
    catalog()
        .into_iter()
        .find(|p| p.name == alias)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}
