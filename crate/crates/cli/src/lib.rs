//! Command-line driver: configuration parsing and command dispatch.

pub mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use degencd_core::grid::{l1_error_on_ball, l1_norm, Reference};
use degencd_core::harness::{run_convergence, run_property_suite, run_viscosity_study, PropertySuite, StudyPlan};
use degencd_core::kinetic::{run_kinetic_suite, save_lemma_records, LemmaRecord, MollifierKernel};
use degencd_core::scheme::{evolve, Checkpoints, MonitorFlags, SemiDiscreteOp};

pub use config::{parse_config, Command, ConfigError, RunConfig};

/// How a command ended.
#[derive(Debug)]
pub enum Outcome {
    /// Every checked property held.
    Pass,
    /// Reports were written but some check failed.
    Fail(String),
}

fn write_text(path: &Path, text: &str) -> degencd_core::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn study_plan(cfg: &RunConfig) -> Result<StudyPlan, String> {
    let mut plan = StudyPlan::new(cfg.problem()?);
    if let Some(g) = &cfg.grids {
        plan.grids = g.clone();
    }
    if let Some(r) = cfg.radius {
        plan.radius = r;
    }
    if let Some(t) = cfg.t_eval {
        plan.t_eval = t;
    }
    if let Some(f) = cfg.floor {
        plan.floor = f;
    }
    plan.integrator = cfg.integrator;
    plan.eta_list = cfg.eta_list.clone();
    plan.snapshots = cfg.snapshots;
    Ok(plan)
}

/// Runs the configured command, writing its reports under `cfg.out_dir`.
/// Errors are solver, quadrature or I/O failures.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, String> {
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let command = cfg.command.ok_or("no command given")?;
    log::info!("running {command} into {}", out.display());
    match command {
        Command::Solve => solve(cfg),
        Command::Convergence => {
            let report = run_convergence(&study_plan(cfg)?).map_err(|e| e.to_string())?;
            report.save(out).map_err(|e| e.to_string())?;
            if let Some(a) = &report.aborted {
                return Ok(Outcome::Fail(format!("study aborted: {a}")));
            }
            if !report.monitors_pass {
                return Ok(Outcome::Fail("a priori monitors failed on some grid".into()));
            }
            if report.pass {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!(
                    "fitted rate {:.4} below floor {:.4}",
                    report.fitted_rate, report.floor
                )))
            }
        }
        Command::Viscosity => {
            let report = run_viscosity_study(&study_plan(cfg)?).map_err(|e| e.to_string())?;
            report.save(out).map_err(|e| e.to_string())?;
            if report.pass {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!(
                    "viscosity study failed: slope {:.4} (min {}), monotone {}",
                    report.fitted_slope, report.min_slope, report.monotone
                )))
            }
        }
        Command::KineticCheck => {
            let records = run_kinetic_suite(cfg.seed, MollifierKernel::new(cfg.kernel), cfg.kinetic)
                .map_err(|e| e.to_string())?;
            save_lemma_records(&records, &out.join("lemmas.csv")).map_err(|e| e.to_string())?;
            finish_records(out, "kinetic-check", cfg.seed, &records)
        }
        Command::Properties => {
            let suite = PropertySuite {
                seed: cfg.seed,
                pairs: cfg.property_pairs,
                cells_1d: cfg.property_cells_1d,
                cells_2d: cfg.property_cells_2d,
                t_end: cfg.property_t_end,
                kinetic: Some(cfg.kinetic),
                ..PropertySuite::default()
            };
            let report = run_property_suite(&suite).map_err(|e| e.to_string())?;
            report.save(&out.join("lemmas.csv")).map_err(|e| e.to_string())?;
            finish_records(out, "properties", cfg.seed, &report.records)
        }
    }
}

fn finish_records(out: &Path, command: &str, seed: u64, records: &[LemmaRecord]) -> Result<Outcome, String> {
    let failed: Vec<&LemmaRecord> = records.iter().filter(|r| !r.pass).collect();
    let mut s = format!(
        "command = {command}\nseed = {seed}\nrecords = {}\nfailed = {}\npass = {}\n",
        records.len(),
        failed.len(),
        failed.is_empty()
    );
    for r in &failed {
        s.push_str(&format!("failure = {} [{}]\n", r.lemma, r.params));
    }
    write_text(&out.join("summary.txt"), &s).map_err(|e| e.to_string())?;
    if failed.is_empty() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(format!("{} of {} records failed", failed.len(), records.len())))
    }
}

fn solve(cfg: &RunConfig) -> Result<Outcome, String> {
    let out = &cfg.out_dir;
    let p = cfg.problem()?;
    let cells = cfg.cells.unwrap_or(p.default_grids[0]);
    let spec = p.grid(cells).map_err(|e| e.to_string())?;
    let u0 = p.initial_field(&spec).map_err(|e| e.to_string())?;
    let op = SemiDiscreteOp::new(p.model.clone(), spec).map_err(|e| e.to_string())?;
    let flags = MonitorFlags {
        checkpoints: Checkpoints::Even(cfg.checkpoints),
        store_fields: cfg.snapshots,
        ..MonitorFlags::default()
    };
    let (traj, monitors) = match evolve(&op, &u0, p.horizon, &cfg.integrator, &flags) {
        Ok(r) => r,
        Err(degencd_core::Error::MonitorFailure {
            name,
            time,
            value,
            bound,
            snapshot,
        }) => {
            let dir = out.join("fields");
            fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let mut w = BufWriter::new(fs::File::create(dir.join("failure.field")).map_err(|e| e.to_string())?);
            snapshot.write_snapshot(&mut w).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())?;
            return Ok(Outcome::Fail(format!(
                "monitor {name} failed hard at t = {time}: {value} > {bound}; snapshot in fields/failure.field"
            )));
        }
        Err(e) => return Err(e.to_string()),
    };
    monitors.save(&out.join("report.csv")).map_err(|e| e.to_string())?;
    if cfg.snapshots {
        traj.write_snapshots(&out.join("fields"), "solution").map_err(|e| e.to_string())?;
    }
    let last = traj.final_field();
    let mut s = format!(
        "problem = {}\ndim = {}\ncells = {}\nmethod = {}\nt_end = {}\nsteps = {}\ndt = {:.12e}\nl1 = {:.12e}\nmin = {:.12e}\nmax = {:.12e}\n",
        p.name,
        p.dim(),
        cells,
        cfg.integrator.method,
        p.horizon,
        traj.steps,
        traj.dt,
        l1_norm(last),
        last.min(),
        last.max()
    );
    if let Some(exact) = &p.exact {
        let t = p.horizon;
        let f = |x: &[f64]| exact(t, x);
        let center = vec![0.0; p.dim()];
        let radius = cfg.radius.unwrap_or(p.ball_radius);
        let e = l1_error_on_ball(last, Reference::Function(&f), radius, &center).map_err(|e| e.to_string())?;
        s.push_str(&format!("l1_error = {e:.12e}\n"));
    }
    s.push_str(&format!("monitors_pass = {}\n", monitors.pass()));
    write_text(&out.join("summary.txt"), &s).map_err(|e| e.to_string())?;
    if monitors.pass() {
        Ok(Outcome::Pass)
    } else {
        let names: Vec<String> = monitors.failures().map(|r| format!("{}@{}", r.name, r.time)).collect();
        Ok(Outcome::Fail(format!("monitors failed: {}", names.join(", "))))
    }
}
