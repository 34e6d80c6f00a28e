use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, ValueEnum};

use degencd::config::{parse_entries, parse_override, Entry};
use degencd::{execute, Outcome, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Solve,
    Convergence,
    Viscosity,
    KineticCheck,
    Properties,
}

impl CommandArg {
    fn name(self) -> &'static str {
        match self {
            CommandArg::Solve => "solve",
            CommandArg::Convergence => "convergence",
            CommandArg::Viscosity => "viscosity",
            CommandArg::KineticCheck => "kinetic-check",
            CommandArg::Properties => "properties",
        }
    }
}

/// Monotone schemes for degenerate convection-diffusion equations:
/// solves, convergence and viscosity studies, and property checks.
///
/// Exit status: 0 when every checked property holds, 1 when a check or
/// solve fails (reports are still written), 2 on usage or config errors.
#[derive(Debug, Parser)]
#[command(name = "degencd", version)]
struct Cli {
    command: CommandArg,
    /// INI-style config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Catalog problem name (problem.name).
    #[arg(long)]
    problem: Option<String>,
    /// Viscosity added to the diffusion (problem.eta).
    #[arg(long)]
    eta: Option<String>,
    /// Cells on the first axis for `solve` (grid.cells).
    #[arg(long)]
    cells: Option<String>,
    /// zero or periodic (grid.boundary).
    #[arg(long)]
    boundary: Option<String>,
    /// explicit-euler, ssp-rk2, ssp-rk3 or implicit-euler (integrator.method).
    #[arg(long)]
    method: Option<String>,
    /// Step-size safety factor (integrator.cfl_safety).
    #[arg(long)]
    cfl: Option<String>,
    /// Fixed step size (integrator.dt_override).
    #[arg(long)]
    dt: Option<String>,
    /// Comma-separated cell counts (study.grids).
    #[arg(long)]
    grids: Option<String>,
    /// Error-ball radius (study.radius).
    #[arg(long)]
    radius: Option<String>,
    /// Evaluation time (study.t_eval).
    #[arg(long)]
    t_eval: Option<String>,
    /// Comma-separated decreasing viscosities (study.eta_list).
    #[arg(long)]
    eta_list: Option<String>,
    /// Write field snapshots under fields/ (output.snapshots).
    #[arg(long)]
    snapshots: bool,
    /// Any config key, as section.key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// More log output on standard error; repeat for debug output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    eprintln!("{}", Cli::command().render_usage());
    ExitCode::from(2)
}

fn flag_entries(cli: &Cli) -> Vec<String> {
    let mut v = vec![format!("command={}", cli.command.name())];
    let mut push = |key: &str, value: Option<String>| {
        if let Some(x) = value {
            v.push(format!("{key}={x}"));
        }
    };
    push("seed", cli.seed.map(|s| s.to_string()));
    push("problem.name", cli.problem.clone());
    push("problem.eta", cli.eta.clone());
    push("grid.cells", cli.cells.clone());
    push("grid.boundary", cli.boundary.clone());
    push("integrator.method", cli.method.clone());
    push("integrator.cfl_safety", cli.cfl.clone());
    push("integrator.dt_override", cli.dt.clone());
    push("study.grids", cli.grids.clone());
    push("study.radius", cli.radius.clone());
    push("study.t_eval", cli.t_eval.clone());
    push("study.eta_list", cli.eta_list.clone());
    push("output.directory", cli.out.as_ref().map(|p| p.display().to_string()));
    if cli.snapshots {
        push("output.snapshots", Some("true".into()));
    }
    v.extend(cli.set.iter().cloned());
    v
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut entries: Vec<Entry> = Vec::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        entries = parse_entries(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for o in flag_entries(cli) {
        entries.push(parse_override(&o).map_err(|e| e.to_string())?);
    }
    let mut cfg = RunConfig::default();
    cfg.apply(&entries).map_err(|e| match &cli.config {
        Some(p) if e.line.is_some() => format!("{}: {e}", p.display()),
        _ => e.to_string(),
    })?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(m) => return usage_error(&m),
    };
    match execute(&cfg) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(why)) => {
            eprintln!("degencd {}: {why}", cli.command.name());
            ExitCode::from(1)
        }
        Err(why) => {
            eprintln!("degencd {}: {why}", cli.command.name());
            ExitCode::from(1)
        }
    }
}
