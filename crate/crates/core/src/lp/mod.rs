//! Solver-agnostic mixed-integer linear models.
//!
//! [`ModelIR`] is the only thing the model builders produce and the only thing
//! the solver backends consume. Variables are addressed by dense [`VarId`]s in
//! declaration order, which keeps every build of the same scenario identical
//! down to the MPS bytes.

mod backend;
mod highs_backend;
mod mini;
mod mps;
mod pwl;
mod simplex;

pub use backend::{Backend, SolveOptions, SolveResult, SolveStatus, SolverError};
pub use highs_backend::solve_highs;
pub use mini::{solve_exact_mini, MiniOptions};
pub use mps::export_mps;
pub use pwl::{add_pwl_quadratic, add_pwl_quadratic_at, add_pwl_quadratic_segments, centered_tangent_points, tangent_envelope, PwlBlock, PwlError};
pub use simplex::{solve_lp_relaxation, LpOutcome};

use std::fmt;

/// Feasibility tolerance shared by every backend and by [`ModelIR::max_violation`].
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            RowSense::Le => (lhs - self.rhs).max(0.0),
            RowSense::Ge => (self.rhs - lhs).max(0.0),
            RowSense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("constraint `{row}` references undeclared variable {var}")]
    UnknownVariable { row: String, var: VarId },
    #[error("integer variable `{0}` has an infinite bound")]
    UnboundedInteger(String),
    #[error("binary variable `{0}` has bounds outside [0, 1]")]
    BadBinaryBounds(String),
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    EmptyDomain { name: String, lower: f64, upper: f64 },
}

/// A minimization MILP: bounded variables, sparse linear rows, linear
/// objective plus a constant offset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelIR {
    pub name: String,
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    objective_constant: f64,
    pwl_blocks: Vec<PwlBlock>,
}

impl ModelIR {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            kind,
        });
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] += coef;
    }

    pub fn add_objective_constant(&mut self, value: f64) {
        self.objective_constant += value;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn pwl_blocks(&self) -> &[PwlBlock] {
        &self.pwl_blocks
    }

    pub(crate) fn push_pwl_block(&mut self, block: PwlBlock) {
        self.pwl_blocks.push(block);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_integer_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.kind.is_integral()).count()
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Largest bound, row or integrality violation of a candidate point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self.vars.iter().zip(values).map(|(v, &x)| {
            let mut viol = (v.lower - x).max(0.0).max(x - v.upper);
            if v.kind.is_integral() {
                viol = viol.max((x - x.round()).abs());
            }
            viol
        });
        let rows = self.constraints.iter().map(|c| c.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if v.lower > v.upper {
                return Err(ModelError::EmptyDomain {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            match v.kind {
                VarKind::Integer if !(v.lower.is_finite() && v.upper.is_finite()) => {
                    return Err(ModelError::UnboundedInteger(v.name.clone()))
                }
                VarKind::Binary if v.lower < 0.0 || v.upper > 1.0 => {
                    return Err(ModelError::BadBinaryBounds(v.name.clone()))
                }
                _ => {}
            }
        }
        for c in &self.constraints {
            if let Some(&(var, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(ModelError::UnknownVariable {
                    row: c.name.clone(),
                    var,
                });
            }
        }
        Ok(())
    }

    /// Same model with every integrality flag dropped.
    pub fn relaxed(&self) -> ModelIR {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.kind = VarKind::Continuous;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_bounds_are_clamped() {
        let mut m = ModelIR::new("t");
        let b = m.add_var("b", -3.0, 7.0, VarKind::Binary);
        assert_eq!((m.var(b).lower, m.var(b).upper), (0.0, 1.0));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validate_rejects_dangling_reference() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 1.0);
        m.add_constraint("c", vec![(x, 1.0), (VarId(9), 1.0)], RowSense::Le, 1.0);
        assert!(matches!(m.validate(), Err(ModelError::UnknownVariable { .. })));
    }

    #[test]
    fn validate_rejects_unbounded_integer() {
        let mut m = ModelIR::new("t");
        m.add_var("n", 0.0, f64::INFINITY, VarKind::Integer);
        assert_eq!(m.validate(), Err(ModelError::UnboundedInteger("n".into())));
    }

    #[test]
    fn violation_measures_rows_bounds_and_integrality() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        let b = m.add_binary("b");
        m.add_constraint("c", vec![(x, 1.0), (b, 2.0)], RowSense::Ge, 5.0);
        assert_eq!(m.max_violation(&[3.0, 1.0]), 0.0);
        assert!((m.max_violation(&[2.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!((m.max_violation(&[4.0, 0.5]) - 0.5).abs() < 1e-12);
        assert!((m.max_violation(&[11.0, 0.0]) - 1.0).abs() < 1e-12);
    }
}
