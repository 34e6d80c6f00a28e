//! Randomized checks of the discrete well-posedness properties, aggregated
//! with the kinetic checks into one record list.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{Boundary, Field, GridSpec};
use crate::kinetic::{run_kinetic_suite, save_lemma_records, LemmaRecord, MollifierKernel, SuiteSizes};
use crate::model::{monotonicity_check, Model, ScalarFn};
use crate::scheme::{
    contraction_test, evolve, AccretivityProbe, Checkpoints, IntegratorConfig, Method, MonitorFlags, SemiDiscreteOp,
};

/// Contraction gap allowed for explicit methods.
pub const EXPLICIT_GAP_TOL: f64 = 1e-6;
/// Contraction gap allowed for implicit Euler.
pub const IMPLICIT_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PropertySuite {
    pub seed: u64,
    /// Random field pairs per grid.
    pub pairs: usize,
    pub cells_1d: usize,
    /// Cells per axis of the two-dimensional grid.
    pub cells_2d: usize,
    pub t_end: f64,
    /// Field values are drawn from `[−amplitude, amplitude]`.
    pub amplitude: f64,
    /// Model to probe, on grids of its own dimension only. By default the
    /// Burgers flux with the thresholded linear diffusion, in one and two
    /// dimensions.
    pub model: Option<Model>,
    /// Sizes for the kinetic checks; `None` skips them.
    pub kinetic: Option<SuiteSizes>,
}

impl Default for PropertySuite {
    fn default() -> Self {
        PropertySuite {
            seed: 0,
            pairs: 200,
            cells_1d: 64,
            cells_2d: 16,
            t_end: 0.02,
            amplitude: 1.0,
            model: None,
            kinetic: Some(SuiteSizes::default()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PropertyReport {
    /// Worst case per check and grid.
    pub records: Vec<LemmaRecord>,
}

impl PropertyReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_lemma_records(&self.records, path)
    }
}

/// Keeps the record with the smallest margin per `(check, params)`; a
/// failing record (including NaN values) always wins.
#[derive(Default)]
struct Worst {
    by_key: BTreeMap<(String, String), (usize, LemmaRecord)>,
    order: usize,
}

impl Worst {
    fn push(&mut self, rec: LemmaRecord) {
        let key = (rec.lemma.clone(), rec.params.clone());
        let order = self.order;
        self.order += 1;
        match self.by_key.get_mut(&key) {
            Some((_, cur)) => {
                let worse = (!rec.pass && cur.pass) || (rec.pass == cur.pass && rec.margin() < cur.margin());
                if worse {
                    *cur = rec;
                }
            }
            None => {
                self.by_key.insert(key, (order, rec));
            }
        }
    }

    fn fail(&mut self, check: &str, params: &str, err: crate::error::Error) {
        log::warn!("{check} [{params}] failed: {err}");
        self.push(LemmaRecord::new(check, params, f64::NAN, 0.0));
    }

    fn into_records(self) -> Vec<LemmaRecord> {
        let mut v: Vec<_> = self.by_key.into_values().collect();
        v.sort_by_key(|(o, _)| *o);
        v.into_iter().map(|(_, r)| r).collect()
    }
}

fn default_model(dim: usize) -> Result<Model> {
    let diffusion = ScalarFn::Ramp {
        scale: 0.1,
        threshold: 0.5,
    };
    Model::isotropic_eo(dim, &ScalarFn::HalfSquare, diffusion, 0.0, -1.0, 1.0)
}

fn random_field(spec: &GridSpec, amp: f64, rng: &mut ChaCha8Rng) -> Result<Field> {
    let values = (0..spec.len())
        .map(|_| if amp > 0.0 { rng.gen_range(-amp..=amp) } else { 0.0 })
        .collect();
    Field::new(spec.clone(), values, 0.0)
}

fn probe_model(
    model: &Model,
    n: usize,
    suite: &PropertySuite,
    rng: &mut ChaCha8Rng,
    worst: &mut Worst,
) -> Result<()> {
    let d = model.dim();
    let spec = GridSpec::cube(d, 0.0, 1.0, n, Boundary::Periodic)?;
    let op = SemiDiscreteOp::new(model.clone(), spec.clone())?;
    let params = format!("d={d};n={n};pairs={}", suite.pairs);
    let amp = suite.amplitude;
    let (lo, hi) = op.read_range(-amp, amp);
    for (axis, s) in model.fluxes().iter().enumerate() {
        let m = monotonicity_check(s, lo.min(-1.0), hi.max(1.0), 401)?;
        let defect = (-m.min_f1_deriv).max(m.max_f2_deriv).max(0.0);
        worst.push(LemmaRecord::new("flux_monotone", format!("{params};axis={axis}"), defect, 1e-12));
    }

    let explicit = IntegratorConfig::with_method(Method::SspRk2);
    let implicit = IntegratorConfig::with_method(Method::ImplicitEuler);
    let checkpoints = Checkpoints::Even(4);
    let flags = MonitorFlags {
        checkpoints: checkpoints.clone(),
        store_fields: false,
        ..MonitorFlags::default()
    };

    for k in 0..suite.pairs {
        let u = random_field(&spec, amp, rng)?;
        // Every other pair is ordered, so order preservation gets exercised.
        let v = if k % 2 == 1 {
            let shift = rng.gen_range(0.0..0.5) * amp;
            u.map(|x| x + shift)
        } else {
            random_field(&spec, amp, rng)?
        };

        match op.accretivity_probe(&u, &v) {
            Ok(p) => worst.push(LemmaRecord::new(
                "accretivity",
                params.as_str(),
                -p.value,
                AccretivityProbe::REL_TOL * p.scale,
            )),
            Err(e) => worst.fail("accretivity", &params, e),
        }

        for (name, cfg, tol) in [
            ("contraction_ssp_rk2", &explicit, EXPLICIT_GAP_TOL),
            ("contraction_implicit_euler", &implicit, IMPLICIT_GAP_TOL),
        ] {
            match contraction_test(&op, &u, &v, suite.t_end, cfg, &checkpoints) {
                Ok(c) => {
                    worst.push(LemmaRecord::new(name, params.as_str(), c.gap, tol));
                    if let Some(ordered) = c.order_preserved {
                        let value = if ordered { 0.0 } else { 1.0 };
                        worst.push(LemmaRecord::new(&format!("{name}_order"), params.as_str(), value, 0.0));
                    }
                }
                Err(e) => worst.fail(name, &params, e),
            }
        }

        match evolve(&op, &u, suite.t_end, &explicit, &flags) {
            Ok((_, report)) => {
                let mut excess: BTreeMap<&str, f64> = BTreeMap::new();
                for r in &report.records {
                    let e = excess.entry(r.name.as_str()).or_insert(f64::NEG_INFINITY);
                    *e = e.max(r.value - r.bound);
                }
                for (name, e) in excess {
                    worst.push(LemmaRecord::new(&format!("monitor_{name}"), params.as_str(), e, report.tol));
                }
            }
            Err(e) => worst.fail("monitors", &params, e),
        }
    }
    Ok(())
}

/// Runs the scheme probes on seeded random field pairs and, if requested,
/// the kinetic checks. Check failures become failing records; only invalid
/// suite parameters raise.
pub fn run_property_suite(suite: &PropertySuite) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let mut worst = Worst::default();
    let models = match &suite.model {
        Some(m) => vec![m.clone()],
        None => vec![default_model(1)?, default_model(2)?],
    };
    for m in &models {
        let n = if m.dim() == 1 { suite.cells_1d } else { suite.cells_2d };
        probe_model(m, n, suite, &mut rng, &mut worst)?;
    }
    let mut records = worst.into_records();
    if let Some(sizes) = suite.kinetic {
        match run_kinetic_suite(suite.seed, MollifierKernel::bump(), sizes) {
            Ok(r) => records.extend(r),
            Err(e) => {
                log::warn!("kinetic checks failed: {e}");
                records.push(LemmaRecord::new("kinetic_suite", "", f64::NAN, 0.0));
            }
        }
    }
    Ok(PropertyReport { records })
}
