//! Batch command-line workflows.
//!
//! Every command that writes to `--out` leaves `summary.json` and
//! `manifest.json` there, plus `trace.csv` and `ledger.csv` where they apply.
//! Exit codes: 0 success, 1 output failure, 2 invalid input, 3 infeasible,
//! 4 solver failure, 5 no convergence within the iteration budget.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analytics::{
    emit_report, monotonicity_exceptions, normalized_objective, sweep_csv, sweep_penalty, trace_csv, OutputError,
    SweepMode, SweepRow,
};
use crate::lp::{export_mps, Backend, SolveOptions, SolverError};
use crate::model::{build_cem, build_subproblem, DispatchError, DispatchSolution};
use crate::obadmm::{run_admm, AdmmConfig, AdmmError, AdmmOutcome, AdmmStatus, DualStore, ExchangeLedger, StoppingRule, agents};
use crate::pea::{apply_ledger, apply_pea, pea_objective_report, PeaError, PeaReport};
use crate::scenario::{load_scenario, parse_raw_scenario, validate_scenario, NetworkScenario, ScenarioError};

/// Relative tolerance for equal totals before and after reallocation.
const TOTAL_TOL: f64 = 1e-6;
/// Largest consensus gap for which a ledger counts as network-consistent.
const CONSISTENT_GAP: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "gridmesh", version, about = "Energy management for networks of microgrids")]
pub struct Cli {
    /// Solver backend; overrides GRIDMESH_SOLVER.
    #[arg(long, global = true)]
    pub solver: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the centralized network MILP.
    SolveCem {
        scenario: PathBuf,
        /// Reallocate exchanges proportionally afterwards.
        #[arg(long)]
        pea: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the decentralized ADMM loop.
    SolveDem {
        scenario: PathBuf,
        #[command(flatten)]
        dem: DemArgs,
        #[arg(long)]
        pea: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both and report the normalized objective.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        dem: DemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Penalty sensitivity sweep.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-4, 1e-3, 1e-2, 0.1, 1.0])]
        rhos: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SweepKind::Reference)]
        mode: SweepKind,
        /// Iterations per point in fixed mode.
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0.1)]
        eps_th: f64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file and list every issue.
    Validate { scenario: PathBuf },
    /// Write a model in MPS format.
    ExportMps {
        scenario: PathBuf,
        /// `cem`, or `sub:<id>` for one microgrid's first ADMM subproblem.
        #[arg(long, default_value = "cem")]
        model: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DemArgs {
    #[arg(long, default_value_t = 0.001)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.001)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub ks: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Stop on the quality threshold alone.
    #[arg(long)]
    pub reference: bool,
    #[arg(long, default_value_t = 0.1)]
    pub eps_th: f64,
}

impl DemArgs {
    fn config(&self) -> AdmmConfig {
        AdmmConfig {
            rho: self.rho,
            beta: self.beta,
            k_s: self.ks,
            epsilon_th: self.eps_th,
            max_iters: self.max_iters,
            ..AdmmConfig::default()
        }
    }

    fn rule(&self) -> StoppingRule {
        if self.reference {
            StoppingRule::Threshold
        } else {
            StoppingRule::Combined
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Reference,
    Fixed,
    Obadmm,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Solver(String),
    #[error("no convergence after {0} iterations")]
    NotConverged(usize),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Invalid(_) | CliError::Scenario(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
            CliError::NotConverged(_) => 5,
        }
    }
}

impl From<DispatchError> for CliError {
    fn from(e: DispatchError) -> Self {
        match e {
            DispatchError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<AdmmError> for CliError {
    fn from(e: AdmmError) -> Self {
        match e {
            AdmmError::Config(c) => CliError::Invalid(c.to_string()),
            AdmmError::Agent {
                source: DispatchError::Infeasible(_),
                ..
            } => CliError::Infeasible(e.to_string()),
            AdmmError::Agent { .. } => CliError::Solver(e.to_string()),
        }
    }
}

impl From<PeaError> for CliError {
    fn from(e: PeaError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Unavailable(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

/// Provenance record written next to every result.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: String,
    pub scenario_sha256: String,
    pub config: serde_json::Value,
    pub backend: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<String>,
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let backend = match &cli.solver {
        Some(name) => name.parse::<Backend>()?,
        None => Backend::from_env()?,
    };
    match &cli.command {
        Command::SolveCem { scenario, pea, out } => cmd_solve_cem(scenario, *pea, out.as_deref(), backend),
        Command::SolveDem { scenario, dem, pea, out } => cmd_solve_dem(scenario, dem, *pea, out.as_deref(), backend),
        Command::Compare { scenario, dem, out } => cmd_compare(scenario, dem, out.as_deref(), backend),
        Command::Sweep {
            scenario,
            rhos,
            mode,
            iters,
            eps_th,
            max_iters,
            out,
        } => {
            let mode = match mode {
                SweepKind::Reference => SweepMode::Reference { epsilon_th: *eps_th },
                SweepKind::Fixed => SweepMode::FixedIters { iterations: *iters },
                SweepKind::Obadmm => SweepMode::Obadmm,
            };
            cmd_sweep(scenario, rhos, mode, *max_iters, out.as_deref(), backend)
        }
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::ExportMps { scenario, model, out } => cmd_export_mps(scenario, model, out.as_deref()),
    }
}

/// Per-microgrid objective line of a summary.
#[derive(Debug, Clone, Serialize)]
pub struct MicrogridObjective {
    pub id: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub status: String,
    pub objective: f64,
    pub microgrids: Vec<MicrogridObjective>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cem_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pea: Option<PeaReport>,
}

fn per_microgrid(s: &NetworkScenario, solutions: &[DispatchSolution]) -> Vec<MicrogridObjective> {
    solutions
        .iter()
        .map(|d| MicrogridObjective {
            id: s.microgrid(d.owner).id,
            objective: d.cost(s).total,
        })
        .collect()
}

fn ids(s: &NetworkScenario) -> Vec<usize> {
    s.microgrids.iter().map(|m| m.id).collect()
}

/// Collects output files and writes the manifest last.
struct OutputDir {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl OutputDir {
    fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(OutputError::from)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            std::fs::write(d.join(name), text).map_err(OutputError::from)?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            emit_report(value, d.join(name))?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    fn finish(
        mut self,
        command: &str,
        scenario: &Path,
        config: serde_json::Value,
        backend: Backend,
        started: u128,
    ) -> Result<(), CliError> {
        if self.dir.is_none() {
            return Ok(());
        }
        self.written.push("manifest.json".to_string());
        let manifest = RunManifest {
            command: command.to_string(),
            scenario: scenario.display().to_string(),
            scenario_sha256: file_sha256(scenario)?,
            config,
            backend: backend.id().to_string(),
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            outputs: self.written.clone(),
        };
        self.json("manifest.json", &manifest)
    }
}

fn config_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}

fn solve_cem(s: &NetworkScenario, backend: Backend) -> Result<Vec<DispatchSolution>, CliError> {
    let (solutions, _) = build_cem(s).solve(s.num_microgrids(), backend, &options(backend))?;
    Ok(solutions)
}

fn options(backend: Backend) -> SolveOptions {
    match backend {
        Backend::Highs => SolveOptions::external(),
        Backend::Mini => SolveOptions::default(),
    }
}

/// Proportional reallocation of `solutions`; totals are checked strictly
/// only when the input ledger is bilaterally consistent.
fn reallocate(
    s: &NetworkScenario,
    solutions: &[DispatchSolution],
) -> Result<(Vec<DispatchSolution>, ExchangeLedger, PeaReport), CliError> {
    let ledger = ExchangeLedger::from_solutions(solutions);
    let adjusted = apply_pea(&ledger)?;
    let after = apply_ledger(solutions, &adjusted);
    let strict = (ledger.max_consensus_gap() <= CONSISTENT_GAP).then_some(TOTAL_TOL);
    let report = pea_objective_report(s, solutions, &after, strict)?;
    Ok((after, adjusted, report))
}

fn print_table(report: &PeaReport) {
    println!("{:>6} {:>14} {:>14} {:>12}", "mg", "before", "after", "delta");
    for ((id, b), a) in report.ids.iter().zip(&report.before).zip(&report.after) {
        println!("{id:>6} {b:>14.6} {a:>14.6} {:>12.6}", a - b);
    }
    println!(
        "{:>6} {:>14.6} {:>14.6} {:>12.6}",
        "total",
        report.total_before,
        report.total_after,
        report.total_after - report.total_before
    );
}

pub fn cmd_solve_cem(path: &Path, pea: bool, out: Option<&Path>, backend: Backend) -> Result<(), CliError> {
    let started = unix_ms();
    let s = load_scenario(path)?;
    let solutions = solve_cem(&s, backend)?;
    let mut summary = Summary {
        command: "solve-cem".into(),
        status: "optimal".into(),
        objective: crate::model::total_cost(&solutions, &s),
        microgrids: per_microgrid(&s, &solutions),
        cem_objective: None,
        normalized_objective: None,
        iterations: None,
        epsilon: None,
        stop_reason: None,
        pea: None,
    };
    let mut ledger = ExchangeLedger::from_solutions(&solutions);
    if pea {
        let (after, adjusted, report) = reallocate(&s, &solutions)?;
        summary.microgrids = per_microgrid(&s, &after);
        print_table(&report);
        summary.pea = Some(report);
        ledger = adjusted;
    }
    println!("objective {:.6}", summary.objective);
    let mut dir = OutputDir::new(out)?;
    dir.json("summary.json", &summary)?;
    dir.write("ledger.csv", &ledger.to_csv(&ids(&s)))?;
    dir.finish("solve-cem", path, serde_json::json!({ "pea": pea }), backend, started)
}

fn run_dem(s: &NetworkScenario, dem: &DemArgs, backend: Backend) -> Result<AdmmOutcome, CliError> {
    Ok(run_admm(s, &dem.config(), backend, dem.rule())?)
}

fn dem_summary(command: &str, s: &NetworkScenario, out: &AdmmOutcome) -> Summary {
    Summary {
        command: command.into(),
        status: match out.status {
            AdmmStatus::Converged => "converged".into(),
            AdmmStatus::MaxIters => "max_iters".into(),
        },
        objective: out.objective(),
        microgrids: per_microgrid(s, &out.solutions),
        cem_objective: None,
        normalized_objective: None,
        iterations: Some(out.iterations()),
        epsilon: Some(out.epsilon()),
        stop_reason: out.trace.stop_reason.map(|r| format!("{r:?}")),
        pea: None,
    }
}

fn dem_config(dem: &DemArgs, pea: bool) -> serde_json::Value {
    serde_json::json!({
        "admm": config_json(&dem.config()),
        "rule": format!("{:?}", dem.rule()),
        "pea": pea,
    })
}

pub fn cmd_solve_dem(path: &Path, dem: &DemArgs, pea: bool, out: Option<&Path>, backend: Backend) -> Result<(), CliError> {
    let started = unix_ms();
    let s = load_scenario(path)?;
    dem.config().validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    let outcome = run_dem(&s, dem, backend)?;
    let mut summary = dem_summary("solve-dem", &s, &outcome);
    let mut ledger = outcome.ledger.clone();
    if pea {
        let (after, adjusted, report) = reallocate(&s, &outcome.solutions)?;
        summary.microgrids = per_microgrid(&s, &after);
        print_table(&report);
        summary.pea = Some(report);
        ledger = adjusted;
    }
    println!(
        "{} after {} iterations: objective {:.6}, epsilon {:.6}",
        summary.status,
        outcome.iterations(),
        outcome.objective(),
        outcome.epsilon()
    );
    let mut dir = OutputDir::new(out)?;
    dir.json("summary.json", &summary)?;
    dir.write("trace.csv", &trace_csv(&outcome.trace)?)?;
    dir.write("ledger.csv", &ledger.to_csv(&ids(&s)))?;
    dir.finish("solve-dem", path, dem_config(dem, pea), backend, started)?;
    match outcome.status {
        AdmmStatus::Converged => Ok(()),
        AdmmStatus::MaxIters => Err(CliError::NotConverged(outcome.iterations())),
    }
}

pub fn cmd_compare(path: &Path, dem: &DemArgs, out: Option<&Path>, backend: Backend) -> Result<(), CliError> {
    let started = unix_ms();
    let s = load_scenario(path)?;
    dem.config().validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    let cem = solve_cem(&s, backend)?;
    let cem_objective = crate::model::total_cost(&cem, &s);
    let mut outcome = run_dem(&s, dem, backend)?;
    outcome.trace.set_reference(cem_objective);
    let (after, adjusted, report) = reallocate(&s, &outcome.solutions)?;

    let mut summary = dem_summary("compare", &s, &outcome);
    summary.microgrids = per_microgrid(&s, &after);
    summary.cem_objective = Some(cem_objective);
    summary.normalized_objective = normalized_objective(report.total_after, cem_objective).ok();
    print_table(&report);
    println!("cem objective {cem_objective:.6}");
    match summary.normalized_objective {
        Some(n) => println!("normalized objective {n:.6}"),
        None => println!("normalized objective undefined (zero reference)"),
    }
    println!("epsilon {:.6} after {} iterations", outcome.epsilon(), outcome.iterations());
    summary.pea = Some(report);

    let mut dir = OutputDir::new(out)?;
    dir.json("summary.json", &summary)?;
    dir.write("trace.csv", &trace_csv(&outcome.trace)?)?;
    dir.write("ledger.csv", &adjusted.to_csv(&ids(&s)))?;
    dir.finish("compare", path, dem_config(dem, true), backend, started)?;
    match outcome.status {
        AdmmStatus::Converged => Ok(()),
        AdmmStatus::MaxIters => Err(CliError::NotConverged(outcome.iterations())),
    }
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    cem_objective: f64,
    rows: Vec<SweepRow>,
    /// Consecutive penalty pairs where the iteration count grew.
    monotonicity_exceptions: Vec<(f64, f64)>,
}

pub fn cmd_sweep(
    path: &Path,
    rhos: &[f64],
    mode: SweepMode,
    max_iters: usize,
    out: Option<&Path>,
    backend: Backend,
) -> Result<(), CliError> {
    let started = unix_ms();
    let s = load_scenario(path)?;
    if rhos.is_empty() || rhos.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(CliError::Invalid("--rhos needs positive values".into()));
    }
    let cem_objective = crate::model::total_cost(&solve_cem(&s, backend)?, &s);
    let base = AdmmConfig {
        max_iters,
        ..AdmmConfig::default()
    };
    let rows = sweep_penalty(&s, rhos, mode, &base, backend, cem_objective);
    let csv = sweep_csv(&rows)?;
    print!("{csv}");
    let summary = SweepSummary {
        cem_objective,
        monotonicity_exceptions: monotonicity_exceptions(&rows),
        rows,
    };
    let mut dir = OutputDir::new(out)?;
    dir.json("summary.json", &summary)?;
    dir.write("sweep.csv", &csv)?;
    let config = serde_json::json!({ "rhos": rhos, "mode": config_json(&mode), "base": config_json(&base) });
    dir.finish("sweep", path, config, backend, started)
}

pub fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let raw = parse_raw_scenario(&text)?;
    let report = validate_scenario(&raw);
    println!("{}", serde_json::to_string_pretty(&report).map_err(OutputError::from)?);
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{} validation error(s)", report.errors.len())))
    }
}

pub fn cmd_export_mps(path: &Path, which: &str, out: Option<&Path>) -> Result<(), CliError> {
    let s = load_scenario(path)?;
    let model = if which == "cem" {
        build_cem(&s).model
    } else if let Some(id) = which.strip_prefix("sub:") {
        let id: usize = id
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad microgrid id in `{which}`")))?;
        let m = s
            .microgrids
            .iter()
            .position(|mg| mg.id == id)
            .ok_or_else(|| CliError::Invalid(format!("no microgrid with id {id}")))?;
        let cfg = AdmmConfig::default();
        let agent = agents(&s, &cfg, Backend::Highs).swap_remove(m);
        let ctx = agent.context(
            &ExchangeLedger::zeros(s.num_microgrids(), s.horizon),
            &DualStore::zeros(s.num_microgrids(), s.horizon),
            cfg.rho,
        );
        build_subproblem(&ctx, &s, cfg.layout())
            .map_err(|e| CliError::Solver(e.to_string()))?
            .model
    } else {
        return Err(CliError::Invalid(format!("unknown model `{which}`; use cem or sub:<id>")));
    };
    let text = export_mps(&model);
    match out {
        Some(p) => std::fs::write(p, text).map_err(OutputError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}
