//! Objective-based ADMM for the decentralized model.
//!
//! Agents solve their subproblems one after another in ascending id order,
//! each seeing the values its lower-id neighbors produced earlier in the same
//! sweep (Gauss-Seidel). After a sweep the coordinator updates the consensus
//! multipliers and residuals, records the global operating cost, and applies
//! the stopping rule: a settled objective plus a solution-quality value below
//! its recent average.

mod agent;
mod ledger;
mod stopping;

pub use agent::{deliver, outbox, Agent, AgentReply, Direction, DualStore, ExchangeMessage, Refinement};
pub use ledger::{ordered_pairs, ExchangeLedger};
pub use stopping::{objective_rate, solution_quality, stopping_decision, trailing_mean, StopDecision};

use serde::{Deserialize, Serialize};

use crate::lp::{Backend, SolveOptions};
use crate::model::{DispatchError, DispatchSolution, PwlLayout, SubproblemContext};
use crate::scenario::NetworkScenario;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("penalty rho must be positive, got {0}")]
    Rho(f64),
    #[error("beta must be positive, got {0}")]
    Beta(f64),
    #[error("k_s must be at least 1")]
    Window,
    #[error("max_iters ({max_iters}) must be at least k_s ({k_s})")]
    MaxIters { max_iters: usize, k_s: usize },
    #[error("at least 2 tangent cuts are needed, got {0}")]
    Cuts(usize),
    #[error("epsilon threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("refinement tolerance must be non-negative, got {0}")]
    RefineTol(f64),
}

#[derive(Debug, thiserror::Error)]
pub enum AdmmError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("agent for microgrid {id} failed: {source}")]
    Agent {
        id: usize,
        #[source]
        source: DispatchError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyLayout {
    /// Tangent points spread evenly over each exchange variable's range.
    Uniform,
    /// Tangent points clustered around the neighbor's latest value.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub rho: f64,
    pub beta: f64,
    pub k_s: usize,
    /// Quality threshold for the reference (threshold-only) variant.
    pub epsilon_th: f64,
    pub max_iters: usize,
    pub pwl_cuts: usize,
    pub pwl_layout: PenaltyLayout,
    /// Smallest tangent offset from the center in the centered layout (kW).
    pub pwl_min_offset: f64,
    /// Extra solves per subproblem with tangents added where the envelope
    /// misses the penalty by more than `pwl_refine_tol` ($).
    pub pwl_refine_rounds: usize,
    pub pwl_refine_tol: f64,
    /// Relative MIP gap for each subproblem.
    pub subproblem_gap: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 0.001,
            beta: 0.001,
            k_s: 100,
            epsilon_th: 0.1,
            max_iters: 2000,
            pwl_cuts: 32,
            pwl_layout: PenaltyLayout::Centered,
            pwl_min_offset: 0.01,
            pwl_refine_rounds: 1,
            pwl_refine_tol: 1e-3,
            subproblem_gap: 1e-4,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.rho > 0.0) {
            return Err(ConfigError::Rho(self.rho));
        }
        if !(self.beta > 0.0) {
            return Err(ConfigError::Beta(self.beta));
        }
        if self.k_s == 0 {
            return Err(ConfigError::Window);
        }
        if self.max_iters < self.k_s {
            return Err(ConfigError::MaxIters {
                max_iters: self.max_iters,
                k_s: self.k_s,
            });
        }
        if self.pwl_cuts < 2 {
            return Err(ConfigError::Cuts(self.pwl_cuts));
        }
        if !(self.epsilon_th > 0.0) {
            return Err(ConfigError::Threshold(self.epsilon_th));
        }
        if !(self.pwl_refine_tol >= 0.0) {
            return Err(ConfigError::RefineTol(self.pwl_refine_tol));
        }
        Ok(())
    }

    pub fn layout(&self) -> PwlLayout {
        match self.pwl_layout {
            PenaltyLayout::Uniform => PwlLayout::Uniform { cuts: self.pwl_cuts },
            PenaltyLayout::Centered => PwlLayout::Centered {
                cuts: self.pwl_cuts,
                min_offset: self.pwl_min_offset,
            },
        }
    }
}

/// Which rule ends the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Objective rate below `beta` and quality below its `k_s` average.
    Combined,
    /// Quality at or below `epsilon_th`.
    Threshold,
    /// Run exactly `max_iters` iterations.
    FixedIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmmStatus {
    Converged,
    MaxIters,
}

/// One row of the convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub objective: f64,
    pub normalized_objective: Option<f64>,
    pub epsilon: f64,
    pub max_abs_r: f64,
    pub max_abs_s: f64,
    pub obj_rate_ma: Option<f64>,
    pub eps_ma: Option<f64>,
    pub stopped: bool,
}

/// Full residual and multiplier vectors after one iteration, over ordered
/// pairs (see [`ordered_pairs`]) then intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationVectors {
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdmmTrace {
    pub rows: Vec<TraceRow>,
    pub vectors: Vec<IterationVectors>,
    pub stop_reason: Option<StopDecision>,
}

impl AdmmTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Fills `normalized_objective` against a centralized optimum.
    pub fn set_reference(&mut self, cem_objective: f64) {
        for row in &mut self.rows {
            row.normalized_objective = Some(row.objective / cem_objective);
        }
    }
}

/// Coordinator state carried between iterations.
#[derive(Debug, Clone)]
pub struct AdmmState {
    /// Latest exchange values proposed by each agent.
    pub exchange: ExchangeLedger,
    pub duals: DualStore,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub schedules: Vec<Option<DispatchSolution>>,
    pub costs: Vec<f64>,
}

impl AdmmState {
    /// Zero exchanges and multipliers; residuals start at one so the initial
    /// quality is positive.
    pub fn new(num_microgrids: usize, horizon: usize) -> Self {
        let len = num_microgrids * num_microgrids.saturating_sub(1) * horizon;
        Self {
            exchange: ExchangeLedger::zeros(num_microgrids, horizon),
            duals: DualStore::zeros(num_microgrids, horizon),
            r: vec![1.0; len],
            s: vec![1.0; len],
            schedules: vec![None; num_microgrids],
            costs: vec![0.0; num_microgrids],
        }
    }

    pub fn epsilon(&self) -> f64 {
        solution_quality(&self.r, &self.s)
    }

    pub fn global_objective(&self) -> f64 {
        self.costs.iter().sum()
    }
}

pub fn agents(s: &NetworkScenario, cfg: &AdmmConfig, backend: Backend) -> Vec<Agent> {
    (0..s.num_microgrids())
        .map(|owner| {
            Agent::new(
                owner,
                cfg.layout(),
                SolveOptions::default().with_gap(cfg.subproblem_gap),
                backend,
            )
            .with_refinement(Refinement {
                rounds: cfg.pwl_refine_rounds,
                tol: cfg.pwl_refine_tol,
            })
        })
        .collect()
}

/// One Gauss-Seidel pass. Returns the context each agent solved with.
pub fn sweep_once(
    state: &mut AdmmState,
    s: &NetworkScenario,
    agents: &mut [Agent],
    rho: f64,
) -> Result<Vec<SubproblemContext>, AdmmError> {
    let mut contexts = Vec::with_capacity(agents.len());
    for agent in agents.iter_mut() {
        let ctx = agent.context(&state.exchange, &state.duals, rho);
        let reply = agent.solve(&ctx, s).map_err(|source| AdmmError::Agent {
            id: s.microgrid(agent.owner).id,
            source,
        })?;
        deliver(&mut state.exchange, &reply.messages);
        state.costs[agent.owner] = reply.cost;
        state.schedules[agent.owner] = Some(reply.schedule);
        contexts.push(ctx);
    }
    Ok(contexts)
}

/// New consensus residuals `r`, their change `s`, and `y += rho * r`.
pub fn update_duals(state: &mut AdmmState, rho: f64) {
    let gaps = state.exchange.consensus_gaps();
    let s: Vec<f64> = gaps.iter().zip(&state.r).map(|(new, old)| new - old).collect();
    let horizon = state.exchange.horizon();
    for (i, (m, n)) in state.exchange.pairs().into_iter().enumerate() {
        for t in 0..horizon {
            state.duals.add(m, n, t, rho * gaps[i * horizon + t]);
        }
    }
    state.r = gaps;
    state.s = s;
}

/// Sum of operating costs at each microgrid's own schedule.
pub fn global_objective(solutions: &[DispatchSolution], s: &NetworkScenario) -> f64 {
    crate::model::total_cost(solutions, s)
}

#[derive(Debug, Clone)]
pub struct AdmmOutcome {
    pub solutions: Vec<DispatchSolution>,
    pub ledger: ExchangeLedger,
    pub trace: AdmmTrace,
    pub status: AdmmStatus,
}

impl AdmmOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.rows.len()
    }

    pub fn objective(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.objective)
    }

    pub fn epsilon(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |r| r.epsilon)
    }
}

/// Objective-based ADMM with the combined stopping rule.
pub fn run_obadmm(s: &NetworkScenario, cfg: &AdmmConfig, backend: Backend) -> Result<AdmmOutcome, AdmmError> {
    run_admm(s, cfg, backend, StoppingRule::Combined)
}

/// Reference ADMM stopping as soon as the quality reaches `epsilon_th`.
pub fn run_reference_admm(s: &NetworkScenario, cfg: &AdmmConfig, backend: Backend) -> Result<AdmmOutcome, AdmmError> {
    run_admm(s, cfg, backend, StoppingRule::Threshold)
}

pub fn run_admm(
    s: &NetworkScenario,
    cfg: &AdmmConfig,
    backend: Backend,
    rule: StoppingRule,
) -> Result<AdmmOutcome, AdmmError> {
    run_admm_with(s, cfg, backend, rule, |_, _| {})
}

/// [`run_admm`] with a callback invoked after every iteration.
pub fn run_admm_with(
    s: &NetworkScenario,
    cfg: &AdmmConfig,
    backend: Backend,
    rule: StoppingRule,
    mut on_iteration: impl FnMut(&AdmmState, &TraceRow),
) -> Result<AdmmOutcome, AdmmError> {
    cfg.validate()?;
    let mut agents = agents(s, cfg, backend);
    let mut state = AdmmState::new(s.num_microgrids(), s.horizon);
    let mut trace = AdmmTrace::default();
    let mut objectives = Vec::new();
    let mut epsilons = Vec::new();
    let mut status = AdmmStatus::MaxIters;

    for k in 1..=cfg.max_iters {
        sweep_once(&mut state, s, &mut agents, cfg.rho)?;
        update_duals(&mut state, cfg.rho);
        let objective = state.global_objective();
        let epsilon = state.epsilon();
        objectives.push(objective);
        epsilons.push(epsilon);

        let decision = match rule {
            StoppingRule::Combined => stopping_decision(&objectives, &epsilons, cfg.k_s, cfg.beta),
            StoppingRule::Threshold if epsilon <= cfg.epsilon_th => StopDecision::Stop,
            StoppingRule::Threshold | StoppingRule::FixedIterations => StopDecision::WindowNotFull,
        };
        let stopped = decision.should_stop() || (rule == StoppingRule::FixedIterations && k == cfg.max_iters);
        let row = TraceRow {
            k,
            objective,
            normalized_objective: None,
            epsilon,
            max_abs_r: max_abs(&state.r),
            max_abs_s: max_abs(&state.s),
            obj_rate_ma: objective_rate(&objectives, cfg.k_s),
            eps_ma: trailing_mean(&epsilons, cfg.k_s),
            stopped,
        };
        on_iteration(&state, &row);
        trace.rows.push(row);
        trace.vectors.push(IterationVectors {
            r: state.r.clone(),
            s: state.s.clone(),
            y: state.duals.flatten(),
        });
        trace.stop_reason = Some(decision);
        if stopped {
            status = AdmmStatus::Converged;
            break;
        }
    }

    let solutions: Vec<DispatchSolution> = state.schedules.into_iter().map(|d| d.expect("every agent solved")).collect();
    let ledger = ExchangeLedger::from_solutions(&solutions);
    Ok(AdmmOutcome {
        solutions,
        ledger,
        trace,
        status,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}
