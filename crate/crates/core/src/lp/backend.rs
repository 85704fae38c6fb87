use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use super::{solve_exact_mini, solve_highs, MiniOptions, ModelError, ModelIR, FEAS_TOL};

/// Environment variable naming the default backend (`highs` or `mini`).
pub const SOLVER_ENV: &str = "GRIDMESH_SOLVER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or node limit hit; `values` holds the best incumbent if one exists.
    Limit,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Relative gap reported by the backend (0 for proven optimal LPs).
    pub gap: f64,
}

impl SolveResult {
    pub fn infeasible() -> Self {
        Self {
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            values: Vec::new(),
            gap: f64::INFINITY,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("node budget of {0} exceeded")]
    NodeBudget(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("backend `{0}` unavailable")]
    Unavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub time_limit: Option<Duration>,
    pub node_budget: usize,
}

impl SolveOptions {
    /// Options for the external backend (relative gap 1e-4).
    pub fn external() -> Self {
        Self {
            rel_gap: 1e-4,
            ..Self::default()
        }
    }

    pub fn with_gap(mut self, rel_gap: f64) -> Self {
        self.rel_gap = rel_gap;
        self
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_gap: 1e-6,
            abs_gap: 1e-9,
            time_limit: None,
            node_budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Highs,
    Mini,
}

impl Backend {
    /// Backend named by `GRIDMESH_SOLVER`, defaulting to HiGHS.
    pub fn from_env() -> Result<Self, SolverError> {
        match std::env::var(SOLVER_ENV) {
            Ok(name) if !name.trim().is_empty() => name.parse(),
            _ => Ok(Backend::Highs),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Backend::Highs => "highs",
            Backend::Mini => "mini",
        }
    }

    pub fn solve(self, model: &ModelIR, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
        model.validate()?;
        let result = match self {
            Backend::Highs => solve_highs(model, opts)?,
            Backend::Mini => solve_exact_mini(
                model,
                &MiniOptions {
                    node_budget: opts.node_budget,
                    rel_gap: opts.rel_gap,
                },
            )?,
        };
        if result.status == SolveStatus::Optimal {
            let viol = model.max_violation(&result.values);
            // HiGHS scales rows internally; allow a little slack on large coefficients.
            if viol > 1e3 * FEAS_TOL {
                return Err(SolverError::Numerical(format!(
                    "{} returned a point violating the model by {viol:e}",
                    self.id()
                )));
            }
        }
        Ok(result)
    }

    /// Solves the MILP, then re-solves the LP with every integer variable
    /// fixed at its incumbent value. The second solve lands on a clean vertex
    /// of the committed problem, removing tolerance-level slack flows.
    pub fn solve_polished(self, model: &ModelIR, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
        let first = self.solve(model, opts)?;
        if !first.is_optimal() || model.num_integer_vars() == 0 {
            return Ok(first);
        }
        let mut fixed = model.relaxed();
        for (j, v) in model.vars().iter().enumerate() {
            if v.kind.is_integral() {
                let x = first.values[j].round();
                fixed.set_bounds(super::VarId(j), x, x);
            }
        }
        let second = self.solve(&fixed, opts)?;
        if !second.is_optimal() || second.objective > first.objective + 1e-9 * first.objective.abs().max(1.0) {
            return Ok(first);
        }
        Ok(SolveResult {
            gap: first.gap,
            ..second
        })
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Backend {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "highs" => Ok(Backend::Highs),
            "mini" => Ok(Backend::Mini),
            other => Err(SolverError::Unavailable(other.to_string())),
        }
    }
}
