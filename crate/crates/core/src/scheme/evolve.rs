//! Time loops with checkpointed monitoring of the a priori bounds.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::integrator::{IntegratorConfig, Method, Stepper};
use super::op::SemiDiscreteOp;
use crate::error::{Error, Result};
use crate::grid::{bv_seminorm, l1_norm, Field};

/// Where the time loop stops to record monitors and snapshots.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoints {
    /// `n` evenly spaced times after the start, the last one at `t_end`.
    Even(usize),
    /// Explicit increasing times in `(t0, t_end]`; `t_end` is appended if missing.
    Times(Vec<f64>),
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Even(10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorFlags {
    pub l1: bool,
    pub max_principle: bool,
    pub bv: bool,
    pub time_lipschitz: bool,
    pub checkpoints: Checkpoints,
    /// Defaults to 1e-6 for explicit methods and 1e-8 for implicit Euler.
    pub tol: Option<f64>,
    /// Keep every checkpoint field in the trajectory (the initial field is always kept).
    pub store_fields: bool,
}

impl Default for MonitorFlags {
    fn default() -> Self {
        MonitorFlags {
            l1: true,
            max_principle: true,
            bv: true,
            time_lipschitz: true,
            checkpoints: Checkpoints::default(),
            tol: None,
            store_fields: true,
        }
    }
}

impl MonitorFlags {
    pub fn none() -> Self {
        MonitorFlags {
            l1: false,
            max_principle: false,
            bv: false,
            time_lipschitz: false,
            ..Self::default()
        }
    }

    pub fn tolerance(&self, method: Method) -> f64 {
        self.tol.unwrap_or(default_tolerance(method))
    }
}

pub fn default_tolerance(method: Method) -> f64 {
    if method.is_explicit() {
        1e-6
    } else {
        1e-8
    }
}

/// Hard failures abort once a monitor exceeds its bound by this many tolerances.
pub const HARD_FAILURE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord {
    pub name: String,
    pub time: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonitorReport {
    pub tol: f64,
    pub records: Vec<MonitorRecord>,
}

impl MonitorReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MonitorRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn by_name<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a MonitorRecord> + 'a {
        self.records.iter().filter(move |r| r.name == name)
    }

    /// Upper-bound check: records `value ≤ bound + tol`, returns how far past `bound` the value is.
    fn push_upper(&mut self, name: &str, time: f64, value: f64, bound: f64) -> f64 {
        let excess = value - bound;
        self.records.push(MonitorRecord {
            name: name.to_string(),
            time,
            value,
            bound,
            pass: excess <= self.tol,
        });
        excess
    }

    /// One record per line: `name,time,value,bound,pass`.
    pub fn write_records<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "name,time,value,bound,pass")?;
        for r in &self.records {
            writeln!(w, "{},{:.12e},{:.12e},{:.12e},{}", r.name, r.time, r.value, r.bound, r.pass)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_records(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// The initial field followed by the stored checkpoints.
    pub fields: Vec<Field>,
    pub times: Vec<f64>,
    pub steps: usize,
    /// Largest step size used.
    pub dt: f64,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.fields.last().expect("trajectory always holds the initial field")
    }

    /// Writes one snapshot file per stored field into `dir`.
    pub fn write_snapshots(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (k, f) in self.fields.iter().enumerate() {
            let path = dir.join(format!("{stem}_{k:04}.field"));
            let mut w = BufWriter::new(fs::File::create(path)?);
            f.write_snapshot(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn checkpoint_times(t0: f64, t_end: f64, cp: &Checkpoints) -> Result<Vec<f64>> {
    let mut times = match cp {
        Checkpoints::Even(n) => {
            let n = (*n).max(1);
            (1..=n)
                .map(|k| if k == n { t_end } else { t0 + (t_end - t0) * k as f64 / n as f64 })
                .collect::<Vec<_>>()
        }
        Checkpoints::Times(ts) => ts.clone(),
    };
    if times.last().is_none_or(|&t| t < t_end) {
        times.push(t_end);
    }
    let mut prev = t0;
    for &t in &times {
        if !(t > prev) || t > t_end {
            return Err(Error::InvalidArgument(format!(
                "checkpoint times must increase within ({t0}, {t_end}], got {t}"
            )));
        }
        prev = t;
    }
    Ok(times)
}

/// Step size for data in `[lo, hi]`: the override if set, else the step-size rule.
fn base_dt(op: &SemiDiscreteOp, cfg: &IntegratorConfig, lo: f64, hi: f64, span: f64) -> Result<f64> {
    match cfg.dt_override {
        Some(dt) => {
            if cfg.method.is_explicit() {
                let limit = op.stable_dt_range(lo, hi, 1.0, f64::INFINITY)?;
                if dt > limit * (1.0 + 1e-12) {
                    return Err(Error::InvalidArgument(format!(
                        "dt_override {dt} exceeds the explicit stability limit {limit}"
                    )));
                }
            }
            Ok(dt)
        }
        None => op.stable_dt_range(lo, hi, cfg.cfl_safety, span),
    }
}

fn hard_fail(name: &str, time: f64, value: f64, bound: f64, u: &Field) -> Error {
    Error::MonitorFailure {
        name: name.to_string(),
        time,
        value,
        bound,
        snapshot: Box::new(u.clone()),
    }
}

/// Integrates from `u0.time()` to `t_end`, checking at each checkpoint
/// `‖u‖₁ ≤ ‖u₀‖₁`, `min u₀ ≤ u ≤ max u₀`, `|u|_BV ≤ |u₀|_BV` and
/// `‖u(t+h) − u(t)‖₁/h ≤ ‖𝒜(u₀)‖₁` for the checkpoint spacing `h`.
///
/// Each interval between checkpoints is split into equal steps no larger than
/// the stable step size for the initial range, which the scheme preserves.
/// Under zero extension the ghost value 0 belongs to the range.
pub fn evolve(
    op: &SemiDiscreteOp,
    u0: &Field,
    t_end: f64,
    cfg: &IntegratorConfig,
    flags: &MonitorFlags,
) -> Result<(Trajectory, MonitorReport)> {
    op.check(u0)?;
    let t0 = u0.time();
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end {t_end} must exceed start time {t0}")));
    }
    let times = checkpoint_times(t0, t_end, &flags.checkpoints)?;
    let (lo, hi) = op.read_range(u0.min(), u0.max());
    let dt_max = base_dt(op, cfg, lo, hi, t_end - t0)?;

    let tol = flags.tolerance(cfg.method);
    let hard = HARD_FAILURE_FACTOR * tol;
    let mut report = MonitorReport {
        tol,
        records: Vec::new(),
    };
    let l1_0 = l1_norm(u0);
    let bv_0 = bv_seminorm(u0);
    let a_0 = if flags.time_lipschitz {
        l1_norm(&op.apply(u0)?)
    } else {
        0.0
    };

    let mut stepper = Stepper::new(op, *cfg)?;
    let mut values = u0.values().to_vec();
    let mut prev = values.clone();
    let mut t = t0;
    let mut steps = 0;
    let mut dt_used: f64 = 0.0;
    let mut traj = Trajectory {
        fields: vec![u0.clone()],
        times: vec![t0],
        steps: 0,
        dt: 0.0,
    };
    let vol = op.spec().cell_volume();

    for &tc in &times {
        let span = tc - t;
        let m = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / m as f64;
        for k in 0..m {
            stepper.step_in_place(&mut values, dt).map_err(|e| match e {
                Error::Blowup { index, .. } => Error::Blowup {
                    index,
                    time: t + k as f64 * dt,
                },
                other => other,
            })?;
        }
        steps += m;
        dt_used = dt_used.max(dt);
        let h = span;
        t = tc;
        let u = Field::new(op.spec().clone(), values.clone(), t).map_err(|_| {
            let bad = values.iter().position(|v| !v.is_finite()).unwrap_or(0);
            Error::Blowup {
                index: op.spec().multi_index(bad),
                time: t,
            }
        })?;

        if flags.l1 {
            let v = l1_norm(&u);
            if report.push_upper("l1", t, v, l1_0) > hard {
                return Err(hard_fail("l1", t, v, l1_0, &u));
            }
        }
        if flags.max_principle {
            let (umax, umin) = (u.max(), u.min());
            if report.push_upper("max", t, umax, hi) > hard {
                return Err(hard_fail("max", t, umax, hi, &u));
            }
            // Lower bound stored as an upper bound on −min u.
            if report.push_upper("neg_min", t, -umin, -lo) > hard {
                return Err(hard_fail("neg_min", t, -umin, -lo, &u));
            }
        }
        if flags.bv {
            let v = bv_seminorm(&u);
            if report.push_upper("bv", t, v, bv_0) > hard {
                return Err(hard_fail("bv", t, v, bv_0, &u));
            }
        }
        if flags.time_lipschitz {
            let diff: f64 = vol * values.iter().zip(&prev).map(|(a, b)| (a - b).abs()).sum::<f64>();
            let q = diff / h;
            if report.push_upper("time_lipschitz", t, q, a_0) > hard {
                return Err(hard_fail("time_lipschitz", t, q, a_0, &u));
            }
        }
        prev.copy_from_slice(&values);
        traj.times.push(t);
        if flags.store_fields || tc == t_end {
            traj.fields.push(u);
        }
    }
    if !flags.store_fields {
        traj.times = vec![t0, t_end];
    }
    traj.steps = steps;
    traj.dt = dt_used;
    Ok((traj, report))
}

/// Outcome of co-evolving two fields with one step sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    /// `max_t ‖u(t) − v(t)‖₁ − ‖u₀ − v₀‖₁` over the checkpoints.
    pub gap: f64,
    /// When `u₀ ≥ v₀` cellwise (or `≤`): whether that order held at every checkpoint.
    pub order_preserved: Option<bool>,
    pub steps: usize,
}

/// Co-evolves `u0` and `v0` with a common step size taken from the union of
/// their ranges and reports the ℓ¹ contraction gap.
pub fn contraction_test(
    op: &SemiDiscreteOp,
    u0: &Field,
    v0: &Field,
    t_end: f64,
    cfg: &IntegratorConfig,
    checkpoints: &Checkpoints,
) -> Result<Contraction> {
    op.check(u0)?;
    op.check(v0)?;
    let t0 = u0.time();
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end {t_end} must exceed start time {t0}")));
    }
    let times = checkpoint_times(t0, t_end, checkpoints)?;
    let (lo, hi) = op.read_range(u0.min().min(v0.min()), u0.max().max(v0.max()));
    let dt_max = base_dt(op, cfg, lo, hi, t_end - t0)?;
    let vol = op.spec().cell_volume();
    let dist = |a: &[f64], b: &[f64]| vol * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();

    let mut su = Stepper::new(op, *cfg)?;
    let mut sv = Stepper::new(op, *cfg)?;
    let mut u = u0.values().to_vec();
    let mut v = v0.values().to_vec();
    let d0 = dist(&u, &v);
    let sign = if u.iter().zip(&v).all(|(a, b)| a >= b) {
        Some(1.0)
    } else if u.iter().zip(&v).all(|(a, b)| a <= b) {
        Some(-1.0)
    } else {
        None
    };
    let mut ordered = true;
    let mut gap = f64::NEG_INFINITY;
    let mut t = t0;
    let mut steps = 0;
    for &tc in &times {
        let span = tc - t;
        let m = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / m as f64;
        for _ in 0..m {
            su.step_in_place(&mut u, dt)?;
            sv.step_in_place(&mut v, dt)?;
        }
        steps += m;
        t = tc;
        gap = gap.max(dist(&u, &v) - d0);
        if let Some(s) = sign {
            ordered &= u.iter().zip(&v).all(|(a, b)| s * (a - b) >= 0.0);
        }
    }
    Ok(Contraction {
        gap,
        order_preserved: sign.map(|_| ordered),
        steps,
    })
}
