//! Flat INI-style run configuration.
//!
//! ```text
//! command = convergence
//! seed = 7
//!
//! [problem]
//! name = degenerate-1d
//!
//! [study]
//! grids = 64, 128, 256, 512
//! ```
//!
//! Keys before the first section header belong to `[run]`. Comments start
//! with `#` or `;`. Unknown sections and keys are errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use degencd_core::grid::Boundary;
use degencd_core::kinetic::{KernelShape, SuiteSizes};
use degencd_core::model::{
    cosine_bump, problem_by_name, smooth_bump, InitialData, Model, ReferencePolicy, ScalarFn, TestProblem,
};
use degencd_core::scheme::{IntegratorConfig, Method};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    /// 1-based line in the config text; `None` for command-line overrides
    /// and whole-config checks.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn err<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Viscosity,
    KineticCheck,
    Properties,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Command::Solve),
            "convergence" => Ok(Command::Convergence),
            "viscosity" => Ok(Command::Viscosity),
            "kinetic-check" => Ok(Command::KineticCheck),
            "properties" => Ok(Command::Properties),
            other => Err(format!(
                "unknown command `{other}` (expected solve, convergence, viscosity, kinetic-check or properties)"
            )),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::Viscosity => "viscosity",
            Command::KineticCheck => "kinetic-check",
            Command::Properties => "properties",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxChoice {
    Linear,
    Burgers,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionChoice {
    None,
    Linear,
    Cubic,
    DegenerateThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialChoice {
    SmoothBump,
    CosineBump,
    Step,
}

/// A problem assembled from named building blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct InlineProblem {
    pub flux: FluxChoice,
    pub diffusion: DiffusionChoice,
    pub diffusion_scale: f64,
    pub diffusion_threshold: f64,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub horizon: f64,
    pub initial: InitialChoice,
    pub initial_center: f64,
    pub initial_radius: f64,
    pub initial_height: f64,
}

impl Default for InlineProblem {
    fn default() -> Self {
        InlineProblem {
            flux: FluxChoice::Burgers,
            diffusion: DiffusionChoice::None,
            diffusion_scale: 0.1,
            diffusion_threshold: 0.5,
            dim: 1,
            lower: -2.0,
            upper: 2.0,
            horizon: 1.0,
            initial: InitialChoice::SmoothBump,
            initial_center: -0.5,
            initial_radius: 0.75,
            initial_height: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Unset,
    Named(String),
    Inline(InlineProblem),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub problem: ProblemSource,
    /// Viscosity added to the problem's diffusion.
    pub eta: Option<f64>,
    /// Overrides the problem's final time.
    pub horizon: Option<f64>,
    pub cells: Option<usize>,
    pub boundary: Option<Boundary>,
    pub integrator: IntegratorConfig,
    pub grids: Option<Vec<usize>>,
    pub radius: Option<f64>,
    pub t_eval: Option<f64>,
    pub eta_list: Vec<f64>,
    pub floor: Option<f64>,
    pub reference_factor: Option<usize>,
    pub out_dir: PathBuf,
    pub snapshots: bool,
    pub checkpoints: usize,
    pub kernel: KernelShape,
    pub kinetic: SuiteSizes,
    pub property_pairs: usize,
    pub property_cells_1d: usize,
    pub property_cells_2d: usize,
    pub property_t_end: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: 0,
            problem: ProblemSource::Unset,
            eta: None,
            horizon: None,
            cells: None,
            boundary: None,
            integrator: IntegratorConfig::default(),
            grids: None,
            radius: None,
            t_eval: None,
            eta_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
            floor: None,
            reference_factor: None,
            out_dir: PathBuf::from("degencd-out"),
            snapshots: false,
            checkpoints: 10,
            kernel: KernelShape::Bump,
            kinetic: SuiteSizes::default(),
            property_pairs: 200,
            property_cells_1d: 64,
            property_cells_2d: 16,
            property_t_end: 0.02,
        }
    }
}

/// Every accepted `(section, key)`.
const KEYS: &[(&str, &[&str])] = &[
    ("run", &["command", "seed", "problem"]),
    (
        "problem",
        &[
            "name",
            "flux",
            "diffusion",
            "diffusion_scale",
            "diffusion_threshold",
            "eta",
            "dim",
            "lower",
            "upper",
            "horizon",
            "initial",
            "initial_center",
            "initial_radius",
            "initial_height",
        ],
    ),
    ("grid", &["cells", "boundary"]),
    (
        "integrator",
        &["method", "cfl_safety", "dt_override", "newton_tol", "newton_max_iter"],
    ),
    (
        "study",
        &["grids", "radius", "t_eval", "eta_list", "floor", "reference_factor"],
    ),
    ("output", &["directory", "snapshots", "checkpoints"]),
    ("kinetic", &["kernel", "pairs", "tuples", "fields"]),
    ("properties", &["pairs", "cells_1d", "cells_2d", "t_end"]),
];

const INLINE_KEYS: &[&str] = &[
    "flux",
    "diffusion",
    "diffusion_scale",
    "diffusion_threshold",
    "dim",
    "lower",
    "upper",
    "initial",
    "initial_center",
    "initial_radius",
    "initial_height",
];

/// One `key = value` assignment with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: Option<usize>,
}

fn check_key(section: &str, key: &str, line: Option<usize>) -> Result<(), ConfigError> {
    match KEYS.iter().find(|(s, _)| *s == section) {
        None => err(line, format!("unknown section [{section}]")),
        Some((_, keys)) if !keys.contains(&key) => {
            err(line, format!("unknown key `{key}` in section [{section}]"))
        }
        Some(_) => Ok(()),
    }
}

/// Splits config text into checked entries.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = "run".to_string();
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = Some(k + 1);
        let content = match raw.find(['#', ';']) {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, format!("malformed section header `{content}`"));
            };
            let name = name.trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return err(line, format!("unknown section [{name}]"));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return err(line, format!("expected `key = value`, got `{content}`"));
        };
        let key = key.trim();
        check_key(&section, key, line)?;
        out.push(Entry {
            section: section.clone(),
            key: key.to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

/// Parses a command-line override `section.key=value` (or `key=value` for `[run]`).
pub fn parse_override(text: &str) -> Result<Entry, ConfigError> {
    let Some((path, value)) = text.split_once('=') else {
        return err(None, format!("override `{text}` is not of the form section.key=value"));
    };
    let (section, key) = match path.trim().split_once('.') {
        Some((s, k)) => (s.trim(), k.trim()),
        None => ("run", path.trim()),
    };
    check_key(section, key, None)?;
    Ok(Entry {
        section: section.to_string(),
        key: key.to_string(),
        value: value.trim().to_string(),
        line: None,
    })
}

fn num<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().or_else(|_| {
        err(
            e.line,
            format!("{}.{}: cannot parse `{}` as a number", e.section, e.key, e.value),
        )
    })
}

fn list<T: FromStr>(e: &Entry) -> Result<Vec<T>, ConfigError> {
    e.value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().or_else(|_| {
                err(
                    e.line,
                    format!("{}.{}: cannot parse list item `{s}`", e.section, e.key),
                )
            })
        })
        .collect()
}

fn boolean(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => err(e.line, format!("{}.{}: expected true or false, got `{}`", e.section, e.key, e.value)),
    }
}

fn choice<T: Copy>(e: &Entry, options: &[(&str, T)]) -> Result<T, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == e.value.to_ascii_lowercase())
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            ConfigError {
                line: e.line,
                message: format!("{}.{}: `{}` is not one of {}", e.section, e.key, e.value, names.join(", ")),
            }
        })
}

fn bad<T>(e: &Entry, constraint: &str) -> Result<T, ConfigError> {
    err(e.line, format!("{}.{} = {} violates: {constraint}", e.section, e.key, e.value))
}

fn positive(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = num(e)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        bad(e, "must be positive")
    }
}

fn nonnegative(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = num(e)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        bad(e, "must be >= 0")
    }
}

fn at_least(e: &Entry, min: usize) -> Result<usize, ConfigError> {
    let v: usize = num(e)?;
    if v >= min {
        Ok(v)
    } else {
        bad(e, &format!("must be >= {min}"))
    }
}

impl RunConfig {
    /// Applies entries in order; later entries win.
    pub fn apply(&mut self, entries: &[Entry]) -> Result<(), ConfigError> {
        for e in entries {
            self.apply_one(e)?;
        }
        Ok(())
    }

    fn inline_mut(&mut self, e: &Entry) -> Result<&mut InlineProblem, ConfigError> {
        if let ProblemSource::Named(name) = &self.problem {
            return err(
                e.line,
                format!("problem.{} cannot be combined with the named problem `{name}`", e.key),
            );
        }
        if self.problem == ProblemSource::Unset {
            self.problem = ProblemSource::Inline(InlineProblem::default());
        }
        match &mut self.problem {
            ProblemSource::Inline(p) => Ok(p),
            _ => unreachable!("set above"),
        }
    }

    fn apply_one(&mut self, e: &Entry) -> Result<(), ConfigError> {
        match (e.section.as_str(), e.key.as_str()) {
            ("run", "command") => {
                self.command = Some(e.value.parse().or_else(|m: String| err(e.line, m))?);
            }
            ("run", "seed") => self.seed = num(e)?,
            ("run", "problem") | ("problem", "name") => {
                if let ProblemSource::Inline(_) = self.problem {
                    return err(e.line, "problem name cannot be combined with an inline problem definition");
                }
                problem_by_name(&e.value).or_else(|x| err(e.line, x.to_string()))?;
                self.problem = ProblemSource::Named(e.value.clone());
            }
            ("problem", "eta") => self.eta = Some(nonnegative(e)?),
            ("problem", "horizon") => self.horizon = Some(positive(e)?),
            ("problem", key) if INLINE_KEYS.contains(&key) => {
                let p = self.inline_mut(e)?;
                match key {
                    "flux" => p.flux = choice(e, &[("linear", FluxChoice::Linear), ("burgers", FluxChoice::Burgers)])?,
                    "diffusion" => {
                        p.diffusion = choice(
                            e,
                            &[
                                ("none", DiffusionChoice::None),
                                ("linear", DiffusionChoice::Linear),
                                ("cubic", DiffusionChoice::Cubic),
                                ("degenerate-threshold", DiffusionChoice::DegenerateThreshold),
                            ],
                        )?
                    }
                    "diffusion_scale" => p.diffusion_scale = positive(e)?,
                    "diffusion_threshold" => p.diffusion_threshold = nonnegative(e)?,
                    "dim" => {
                        p.dim = at_least(e, 1)?;
                        if p.dim > 3 {
                            return bad(e, "must be 1, 2 or 3");
                        }
                    }
                    "lower" => p.lower = num(e)?,
                    "upper" => p.upper = num(e)?,
                    "initial" => {
                        p.initial = choice(
                            e,
                            &[
                                ("smooth-bump", InitialChoice::SmoothBump),
                                ("cosine-bump", InitialChoice::CosineBump),
                                ("step", InitialChoice::Step),
                            ],
                        )?
                    }
                    "initial_center" => p.initial_center = num(e)?,
                    "initial_radius" => p.initial_radius = positive(e)?,
                    "initial_height" => p.initial_height = num(e)?,
                    _ => unreachable!("INLINE_KEYS covers these"),
                }
            }
            ("grid", "cells") => self.cells = Some(at_least(e, 3)?),
            ("grid", "boundary") => {
                self.boundary = Some(e.value.parse().or_else(|x: degencd_core::Error| err(e.line, x.to_string()))?)
            }
            ("integrator", "method") => {
                self.integrator.method =
                    e.value.parse::<Method>().or_else(|x| err(e.line, x.to_string()))?
            }
            ("integrator", "cfl_safety") => {
                let c = positive(e)?;
                if c > 1.0 {
                    return bad(e, "must lie in (0, 1]");
                }
                self.integrator.cfl_safety = c;
            }
            ("integrator", "dt_override") => {
                self.integrator.dt_override = if e.value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(positive(e)?)
                }
            }
            ("integrator", "newton_tol") => self.integrator.newton_tol = positive(e)?,
            ("integrator", "newton_max_iter") => self.integrator.newton_max_iter = at_least(e, 1)?,
            ("study", "grids") => {
                let g: Vec<usize> = list(e)?;
                if g.is_empty() || g.iter().any(|&n| n < 3) || g.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(e, "grids must be strictly increasing cell counts >= 3");
                }
                self.grids = Some(g);
            }
            ("study", "radius") => self.radius = Some(positive(e)?),
            ("study", "t_eval") => self.t_eval = Some(positive(e)?),
            ("study", "eta_list") => {
                let l: Vec<f64> = list(e)?;
                if l.len() < 3 || l.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || l.windows(2).any(|w| w[0] <= w[1]) {
                    return bad(e, "at least 3 nonnegative values, strictly decreasing");
                }
                self.eta_list = l;
            }
            ("study", "floor") => self.floor = Some(nonnegative(e)?),
            ("study", "reference_factor") => self.reference_factor = Some(at_least(e, 4)?),
            ("output", "directory") => {
                if e.value.is_empty() {
                    return bad(e, "must not be empty");
                }
                self.out_dir = PathBuf::from(&e.value)
            }
            ("output", "snapshots") => self.snapshots = boolean(e)?,
            ("output", "checkpoints") => self.checkpoints = at_least(e, 1)?,
            ("kinetic", "kernel") => {
                self.kernel = e.value.parse::<KernelShape>().or_else(|x| err(e.line, x.to_string()))?
            }
            ("kinetic", "pairs") => self.kinetic.pairs = at_least(e, 1)?,
            ("kinetic", "tuples") => self.kinetic.tuples = at_least(e, 1)?,
            ("kinetic", "fields") => self.kinetic.fields = at_least(e, 1)?,
            ("properties", "pairs") => self.property_pairs = at_least(e, 1)?,
            ("properties", "cells_1d") => self.property_cells_1d = at_least(e, 3)?,
            ("properties", "cells_2d") => self.property_cells_2d = at_least(e, 3)?,
            ("properties", "t_end") => self.property_t_end = positive(e)?,
            (s, k) => return err(e.line, format!("unknown key `{k}` in section [{s}]")),
        }
        Ok(())
    }

    /// Checks that need the whole config.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.command.is_none() {
            return err(None, "no command given");
        }
        if let ProblemSource::Inline(p) = &self.problem {
            if !(p.lower < p.upper) {
                return err(None, format!("problem.lower ({}) must be below problem.upper ({})", p.lower, p.upper));
            }
        }
        if matches!(self.command, Some(Command::Solve | Command::Convergence | Command::Viscosity)) {
            if self.problem == ProblemSource::Unset {
                return err(None, "this command needs a problem: set problem.name or an inline problem.flux");
            }
            let p = self.problem().map_err(|m| ConfigError { line: None, message: m })?;
            let horizon = p.horizon;
            if let Some(t) = self.t_eval {
                if t > horizon {
                    return err(None, format!("study.t_eval = {t} exceeds the horizon {horizon}"));
                }
            }
        }
        self.integrator
            .validate()
            .map_err(|e| ConfigError {
                line: None,
                message: e.to_string(),
            })
    }

    /// The configured problem with viscosity, horizon and boundary applied.
    pub fn problem(&self) -> Result<TestProblem, String> {
        let mut p = match &self.problem {
            ProblemSource::Unset => return Err("no problem configured".into()),
            ProblemSource::Named(name) => problem_by_name(name).map_err(|e| e.to_string())?,
            ProblemSource::Inline(ip) => build_inline(ip).map_err(|e| e.to_string())?,
        };
        if let Some(eta) = self.eta {
            p = p.with_eta(eta).map_err(|e| e.to_string())?;
        }
        if let Some(h) = self.horizon {
            p.horizon = h;
        }
        if let Some(b) = self.boundary {
            if b != p.boundary && p.exact.is_some() {
                // Exact solutions are only valid for the problem's own boundary treatment.
                p.exact = None;
                p.reference = ReferencePolicy::FineGrid(8);
            }
            p.boundary = b;
        }
        if let Some(k) = self.reference_factor {
            p.reference = ReferencePolicy::FineGrid(k);
        }
        Ok(p)
    }
}

fn build_inline(ip: &InlineProblem) -> degencd_core::Result<TestProblem> {
    let flux = match ip.flux {
        FluxChoice::Linear => ScalarFn::identity(),
        FluxChoice::Burgers => ScalarFn::HalfSquare,
    };
    let diffusion = match ip.diffusion {
        DiffusionChoice::None => ScalarFn::zero(),
        DiffusionChoice::Linear => ScalarFn::Linear(ip.diffusion_scale),
        DiffusionChoice::Cubic => ScalarFn::Cubic(ip.diffusion_scale),
        DiffusionChoice::DegenerateThreshold => ScalarFn::Ramp {
            scale: ip.diffusion_scale,
            threshold: ip.diffusion_threshold,
        },
    };
    let h = ip.initial_height.abs();
    let model = Model::isotropic_eo(ip.dim, &flux, diffusion, 0.0, -h - 1.0, h + 1.0)?;
    let mut center = vec![0.0; ip.dim];
    center[0] = ip.initial_center;
    let u0: InitialData = match ip.initial {
        InitialChoice::SmoothBump => smooth_bump(center, ip.initial_radius, ip.initial_height),
        InitialChoice::CosineBump => cosine_bump(center, ip.initial_radius, ip.initial_height),
        InitialChoice::Step => {
            let (c, height) = (ip.initial_center, ip.initial_height);
            Arc::new(move |x: &[f64]| if x[0] < c { height } else { 0.0 })
        }
    };
    Ok(TestProblem {
        name: "inline".into(),
        model,
        u0,
        lower: vec![ip.lower; ip.dim],
        upper: vec![ip.upper; ip.dim],
        horizon: ip.horizon,
        exact: None,
        reference: ReferencePolicy::FineGrid(8),
        boundary: Boundary::ZeroExtension,
        // Large enough to cover the box from the origin.
        ball_radius: (ip.upper.abs().max(ip.lower.abs())) * (ip.dim as f64).sqrt(),
        default_grids: vec![64, 128, 256, 512],
    })
}

/// Parses and validates a complete config.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    cfg.apply(&parse_entries(text)?)?;
    cfg.validate()?;
    Ok(cfg)
}
