//! Grid-refinement and vanishing-viscosity studies.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::fit::{fit_rate, theorem_floor};
use crate::error::{Error, Result};
use crate::grid::{l1_error_on_ball, restrict_average, Field, Reference};
use crate::model::{ReferencePolicy, TestProblem};
use crate::scheme::{evolve, IntegratorConfig, MonitorFlags, SemiDiscreteOp};

/// Smallest slope of log error against log η that a viscosity study accepts.
pub const VISCOSITY_MIN_SLOPE: f64 = 0.4;

#[derive(Debug, Clone)]
pub struct StudyPlan {
    pub problem: TestProblem,
    /// Cell counts along the first axis, strictly increasing.
    pub grids: Vec<usize>,
    pub integrator: IntegratorConfig,
    /// Radius of the error ball.
    pub radius: f64,
    /// Center of the error ball; the origin by default.
    pub center: Vec<f64>,
    pub t_eval: f64,
    /// Viscosities for [`run_viscosity_study`], strictly decreasing.
    pub eta_list: Vec<f64>,
    /// Rate a convergence study must reach; defaults to [`theorem_floor`].
    pub floor: f64,
    /// Keep the final field of every grid run in the report.
    pub snapshots: bool,
}

impl StudyPlan {
    /// The problem's default grids and ball, evaluated at half the horizon.
    pub fn new(problem: TestProblem) -> Self {
        let d = problem.dim();
        StudyPlan {
            grids: problem.default_grids.clone(),
            radius: problem.ball_radius,
            center: vec![0.0; d],
            t_eval: 0.5 * problem.horizon,
            floor: theorem_floor(d),
            integrator: IntegratorConfig::default(),
            eta_list: Vec::new(),
            snapshots: false,
            problem,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grids.is_empty() {
            return Err(Error::InvalidArgument("a study needs at least one grid".into()));
        }
        if self.grids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "grids must be strictly increasing, got {:?}",
                self.grids
            )));
        }
        if !(self.t_eval > 0.0 && self.t_eval <= self.problem.horizon) {
            return Err(Error::InvalidArgument(format!(
                "t_eval {} must lie in (0, {}]",
                self.t_eval, self.problem.horizon
            )));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {}", self.radius)));
        }
        if self.center.len() != self.problem.dim() {
            return Err(Error::InvalidArgument("ball center has wrong dimension".into()));
        }
        self.integrator.validate()
    }
}

/// One solve of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub cells: usize,
    pub dx: f64,
    /// `NaN` when the study aborted before the error could be measured.
    pub error: f64,
    pub runtime_s: f64,
    pub steps: usize,
    pub monitors_pass: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub problem: String,
    pub dim: usize,
    pub method: String,
    pub t_eval: f64,
    pub radius: f64,
    /// `exact`, or `fine-grid` with the reference resolution.
    pub reference: String,
    pub rows: Vec<GridRun>,
    pub fitted_rate: f64,
    pub theorem_floor: f64,
    /// The floor actually applied, [`theorem_floor`] unless configured otherwise.
    pub floor: f64,
    pub pass: bool,
    pub monitors_pass: bool,
    /// Why the study stopped early; rows hold whatever finished.
    pub aborted: Option<String>,
    /// Final fields per grid when snapshots were requested.
    pub fields: Vec<Field>,
}

struct Solve {
    field: Field,
    run: GridRun,
}

fn solve_on(problem: &TestProblem, cells: usize, t_eval: f64, cfg: &IntegratorConfig) -> Result<Solve> {
    let start = Instant::now();
    let spec = problem.grid(cells)?;
    let dx = spec.dx();
    let u0 = problem.initial_field(&spec)?;
    let op = SemiDiscreteOp::new(problem.model.clone(), spec)?;
    let flags = MonitorFlags {
        store_fields: false,
        ..MonitorFlags::default()
    };
    let (traj, report) = evolve(&op, &u0, t_eval, cfg, &flags)?;
    let field = traj.final_field().clone();
    Ok(Solve {
        field,
        run: GridRun {
            cells,
            dx,
            error: f64::NAN,
            runtime_s: start.elapsed().as_secs_f64(),
            steps: traj.steps,
            monitors_pass: report.pass(),
        },
    })
}

/// Solves on every grid of the plan and fits the rate of the ball-restricted
/// ℓ¹ error at `t_eval`. Grid runs (and the fine reference) run in parallel.
///
/// Solver failures do not raise: the report comes back with `aborted` set
/// and the rows that completed.
pub fn run_convergence(plan: &StudyPlan) -> Result<ConvergenceReport> {
    plan.validate()?;
    let p = &plan.problem;
    let finest = *plan.grids.last().expect("validated nonempty");
    let (reference_name, ref_cells) = match p.reference {
        ReferencePolicy::Exact => {
            if p.exact.is_none() {
                return Err(Error::InvalidArgument(format!("problem {} has no exact solution", p.name)));
            }
            ("exact".to_string(), None)
        }
        ReferencePolicy::FineGrid(k) => {
            if k < 4 {
                return Err(Error::InvalidArgument(format!(
                    "fine-grid reference needs at least 4x refinement, got {k}"
                )));
            }
            (format!("fine-grid {} cells", k * finest), Some(k * finest))
        }
    };

    let (runs, reference) = rayon::join(
        || {
            plan.grids
                .par_iter()
                .map(|&n| solve_on(p, n, plan.t_eval, &plan.integrator))
                .collect::<Vec<_>>()
        },
        || ref_cells.map(|n| solve_on(p, n, plan.t_eval, &reference_config(&plan.integrator, n / finest))),
    );

    let mut report = ConvergenceReport {
        problem: p.name.clone(),
        dim: p.dim(),
        method: plan.integrator.method.to_string(),
        t_eval: plan.t_eval,
        radius: plan.radius,
        reference: reference_name,
        rows: Vec::new(),
        fitted_rate: f64::NAN,
        theorem_floor: theorem_floor(p.dim()),
        floor: plan.floor,
        pass: false,
        monitors_pass: true,
        aborted: None,
        fields: Vec::new(),
    };

    let mut solves = Vec::new();
    for (r, &n) in runs.into_iter().zip(&plan.grids) {
        match r {
            Ok(s) => solves.push(s),
            Err(e) => {
                report.aborted.get_or_insert(format!("grid {n}: {e}"));
            }
        }
    }
    let reference = match reference {
        Some(Ok(s)) => Some(s.field),
        Some(Err(e)) => {
            report.aborted.get_or_insert(format!("reference: {e}"));
            None
        }
        None => None,
    };

    for s in &mut solves {
        let err = match (&p.reference, &reference) {
            (ReferencePolicy::Exact, _) => {
                let exact = p.exact.as_ref().expect("checked above");
                let t = plan.t_eval;
                let f = |x: &[f64]| exact(t, x);
                Some(l1_error_on_ball(&s.field, Reference::Function(&f), plan.radius, &plan.center))
            }
            (ReferencePolicy::FineGrid(_), Some(r)) => Some(
                restrict_average(r, s.field.spec())
                    .and_then(|c| l1_error_on_ball(&s.field, Reference::Field(&c), plan.radius, &plan.center)),
            ),
            (ReferencePolicy::FineGrid(_), None) => None,
        };
        match err {
            Some(Ok(e)) => s.run.error = e,
            Some(Err(e)) => {
                report.aborted.get_or_insert(format!("grid {}: {e}", s.run.cells));
            }
            None => {}
        }
    }

    report.monitors_pass = solves.iter().all(|s| s.run.monitors_pass);
    report.rows = solves.iter().map(|s| s.run.clone()).collect();
    if plan.snapshots {
        report.fields = solves.into_iter().map(|s| s.field).collect();
    }
    if report.aborted.is_none() {
        let pairs: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.dx, r.error)).collect();
        match fit_rate(&pairs) {
            Ok(rate) => {
                report.fitted_rate = rate;
                report.pass = rate >= report.floor;
            }
            Err(e) => report.aborted = Some(e.to_string()),
        }
    }
    Ok(report)
}

/// The study's integrator for a grid refined `k` times. A fixed explicit
/// step falls back to the step-size rule; a fixed implicit step shrinks by `k`.
fn reference_config(cfg: &IntegratorConfig, k: usize) -> IntegratorConfig {
    let mut c = *cfg;
    c.dt_override = match cfg.dt_override {
        Some(dt) if !cfg.method.is_explicit() => Some(dt / k as f64),
        _ => None,
    };
    c
}

fn join<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(",")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(body.as_bytes())?;
    w.flush()?;
    Ok(())
}

impl ConvergenceReport {
    /// `dx,error,runtime_s` rows, then a blank line and `key,value` trailer
    /// lines. Without runtimes the output is reproducible byte for byte.
    pub fn table(&self, with_runtime: bool) -> String {
        let mut s = String::new();
        s.push_str(if with_runtime { "dx,error,runtime_s\n" } else { "dx,error\n" });
        for r in &self.rows {
            let _ = write!(s, "{:.12e},{:.12e}", r.dx, r.error);
            if with_runtime {
                let _ = write!(s, ",{:.6}", r.runtime_s);
            }
            s.push('\n');
        }
        s.push('\n');
        let _ = writeln!(s, "fitted_rate,{:.12e}", self.fitted_rate);
        let _ = writeln!(s, "theorem_floor,{:.12e}", self.theorem_floor);
        let _ = writeln!(s, "floor,{:.12e}", self.floor);
        let _ = writeln!(s, "monitors_pass,{}", self.monitors_pass);
        let _ = writeln!(s, "pass,{}", self.pass);
        s
    }

    /// `key = value` lines mirroring the report; runtimes are left out so the
    /// file is reproducible.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem);
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "method = {}", self.method);
        let _ = writeln!(s, "t_eval = {}", self.t_eval);
        let _ = writeln!(s, "radius = {}", self.radius);
        let _ = writeln!(s, "reference = {}", self.reference);
        let _ = writeln!(s, "grids = {}", join(&self.rows, |r| r.cells.to_string()));
        let _ = writeln!(s, "dx = {}", join(&self.rows, |r| format!("{:.12e}", r.dx)));
        let _ = writeln!(s, "errors = {}", join(&self.rows, |r| format!("{:.12e}", r.error)));
        let _ = writeln!(s, "steps = {}", join(&self.rows, |r| r.steps.to_string()));
        let _ = writeln!(s, "fitted_rate = {:.12e}", self.fitted_rate);
        let _ = writeln!(s, "theorem_floor = {:.12e}", self.theorem_floor);
        let _ = writeln!(s, "floor = {:.12e}", self.floor);
        let _ = writeln!(s, "monitors_pass = {}", self.monitors_pass);
        let _ = writeln!(s, "pass = {}", self.pass);
        if let Some(a) = &self.aborted {
            let _ = writeln!(s, "aborted = {a}");
        }
        s
    }

    /// Writes `report.csv`, `summary.txt` and, if present, `fields/grid_<n>.field`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("report.csv"), &self.table(true))?;
        write_file(&dir.join("summary.txt"), &self.summary())?;
        save_fields(dir, &self.fields)
    }
}

fn save_fields(dir: &Path, fields: &[Field]) -> Result<()> {
    if fields.is_empty() {
        return Ok(());
    }
    let fdir = dir.join("fields");
    fs::create_dir_all(&fdir)?;
    for f in fields {
        let mut w = BufWriter::new(fs::File::create(fdir.join(format!("grid_{}.field", f.spec().extents()[0])))?);
        f.write_snapshot(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ViscosityReport {
    pub problem: String,
    pub cells: usize,
    pub t_eval: f64,
    pub radius: f64,
    pub etas: Vec<f64>,
    /// Distance to the `η = 0` solution on the same grid, per η.
    pub errors: Vec<f64>,
    pub runtimes: Vec<f64>,
    pub fitted_slope: f64,
    pub min_slope: f64,
    /// Errors never grow as η decreases.
    pub monotone: bool,
    pub pass: bool,
}

/// Solves the plan's problem on its finest grid for every η in `eta_list`
/// and for η = 0, and fits the slope of log error against log η.
pub fn run_viscosity_study(plan: &StudyPlan) -> Result<ViscosityReport> {
    plan.validate()?;
    let etas = &plan.eta_list;
    if etas.len() < 3 {
        return Err(Error::InvalidArgument("a viscosity study needs at least 3 values of eta".into()));
    }
    if etas.windows(2).any(|w| w[0] <= w[1]) || etas.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "eta_list must be nonnegative and strictly decreasing, got {etas:?}"
        )));
    }
    let cells = *plan.grids.last().expect("validated nonempty");
    let base = &plan.problem;
    let mut all: Vec<f64> = etas.clone();
    all.push(0.0);
    let solves: Vec<Result<Solve>> = all
        .par_iter()
        .map(|&eta| solve_on(&base.with_eta(eta)?, cells, plan.t_eval, &plan.integrator))
        .collect();
    let mut solves = solves.into_iter().collect::<Result<Vec<_>>>()?;
    let baseline = solves.pop().expect("baseline solve").field;
    let mut errors = Vec::with_capacity(etas.len());
    for s in &solves {
        errors.push(l1_error_on_ball(
            &s.field,
            Reference::Field(&baseline),
            plan.radius,
            &plan.center,
        )?);
    }
    let pairs: Vec<(f64, f64)> = etas.iter().copied().zip(errors.iter().copied()).collect();
    let fitted_slope = fit_rate(&pairs)?;
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    Ok(ViscosityReport {
        problem: base.name.clone(),
        cells,
        t_eval: plan.t_eval,
        radius: plan.radius,
        etas: etas.clone(),
        errors,
        runtimes: solves.iter().map(|s| s.run.runtime_s).collect(),
        fitted_slope,
        min_slope: VISCOSITY_MIN_SLOPE,
        monotone,
        pass: monotone && fitted_slope >= VISCOSITY_MIN_SLOPE,
    })
}

impl ViscosityReport {
    /// `eta,error,runtime_s` rows followed by a `key,value` trailer.
    pub fn table(&self, with_runtime: bool) -> String {
        let mut s = String::new();
        s.push_str(if with_runtime { "eta,error,runtime_s\n" } else { "eta,error\n" });
        for (k, (eta, err)) in self.etas.iter().zip(&self.errors).enumerate() {
            let _ = write!(s, "{eta:.12e},{err:.12e}");
            if with_runtime {
                let _ = write!(s, ",{:.6}", self.runtimes[k]);
            }
            s.push('\n');
        }
        s.push('\n');
        let _ = writeln!(s, "fitted_slope,{:.12e}", self.fitted_slope);
        let _ = writeln!(s, "min_slope,{:.12e}", self.min_slope);
        let _ = writeln!(s, "monotone,{}", self.monotone);
        let _ = writeln!(s, "pass,{}", self.pass);
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem);
        let _ = writeln!(s, "cells = {}", self.cells);
        let _ = writeln!(s, "t_eval = {}", self.t_eval);
        let _ = writeln!(s, "radius = {}", self.radius);
        let _ = writeln!(s, "etas = {}", join(&self.etas, |e| format!("{e:.12e}")));
        let _ = writeln!(s, "errors = {}", join(&self.errors, |e| format!("{e:.12e}")));
        let _ = writeln!(s, "fitted_slope = {:.12e}", self.fitted_slope);
        let _ = writeln!(s, "min_slope = {:.12e}", self.min_slope);
        let _ = writeln!(s, "monotone = {}", self.monotone);
        let _ = writeln!(s, "pass = {}", self.pass);
        s
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("report.csv"), &self.table(true))?;
        write_file(&dir.join("summary.txt"), &self.summary())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{advection_1d, heat_1d};

    #[test]
    fn plan_validation() {
        let mut plan = StudyPlan::new(heat_1d().unwrap());
        assert!(plan.validate().is_ok());
        plan.grids = vec![64, 32];
        assert!(plan.validate().is_err());
        plan.grids = vec![32, 64];
        plan.t_eval = 0.0;
        assert!(plan.validate().is_err());
        plan.t_eval = 10.0;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn small_advection_study() {
        let mut plan = StudyPlan::new(advection_1d().unwrap());
        plan.grids = vec![32, 64, 128];
        let r = run_convergence(&plan).unwrap();
        assert!(r.aborted.is_none(), "{:?}", r.aborted);
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.windows(2).all(|w| w[1].error < w[0].error));
        assert!(r.fitted_rate > 0.3 && r.fitted_rate < 1.5, "{}", r.fitted_rate);
        assert_eq!(r.theorem_floor, 0.1);
        let table = r.table(false);
        assert!(table.starts_with("dx,error\n"));
        assert!(table.contains("\nfitted_rate,"));
    }

    #[test]
    fn viscosity_list_must_decrease() {
        let mut plan = StudyPlan::new(heat_1d().unwrap());
        plan.eta_list = vec![1e-2, 1e-1, 1e-3];
        assert!(run_viscosity_study(&plan).is_err());
        plan.eta_list = vec![1e-1, 1e-2];
        assert!(run_viscosity_study(&plan).is_err());
    }
}
