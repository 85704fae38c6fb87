//! Reference MILP backend: best-bound branch and bound over the dense simplex.
//!
//! Branches on the most fractional integer variable (lowest id on ties) and
//! always expands the open node with the lowest relaxation bound (oldest node
//! on ties), so results are fully deterministic. Intended for models with a
//! few dozen integer variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{solve_lp_relaxation, LpOutcome, ModelIR, SolveResult, SolveStatus, SolverError};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiniOptions {
    pub node_budget: usize,
    pub rel_gap: f64,
}

impl Default for MiniOptions {
    fn default() -> Self {
        Self {
            node_budget: 200_000,
            rel_gap: 1e-6,
        }
    }
}

struct Node {
    bound: f64,
    seq: usize,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: invert so the lowest bound (then oldest) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Proven-optimal solve of `model`, or [`SolverError::NodeBudget`].
pub fn solve_exact_mini(model: &ModelIR, opts: &MiniOptions) -> Result<SolveResult, SolverError> {
    model.validate()?;
    let root: Vec<(f64, f64)> = model.vars().iter().map(|v| (v.lower, v.upper)).collect();
    let integral: Vec<usize> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind.is_integral())
        .map(|(j, _)| j)
        .collect();

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut explored = 0usize;

    match solve_lp_relaxation(model, Some(&root))? {
        LpOutcome::Infeasible => return Ok(SolveResult::infeasible()),
        LpOutcome::Unbounded => {
            return Ok(SolveResult {
                status: SolveStatus::Unbounded,
                objective: f64::NEG_INFINITY,
                values: Vec::new(),
                gap: f64::INFINITY,
            })
        }
        LpOutcome::Optimal { objective, values } => {
            if let Some(node) = branch_or_accept(objective, values, root, &integral, &mut incumbent, &mut seq) {
                heap.extend(node);
            }
        }
    }

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if !improves(node.bound, *best, opts.rel_gap) {
                // Best-bound order: every remaining node is at least as bad.
                break;
            }
        }
        explored += 1;
        if explored > opts.node_budget {
            return Err(SolverError::NodeBudget(opts.node_budget));
        }
        match solve_lp_relaxation(model, Some(&node.bounds))? {
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => {
                return Err(SolverError::Numerical("unbounded relaxation below a bounded root".into()))
            }
            LpOutcome::Optimal { objective, values } => {
                if let Some((best, _)) = &incumbent {
                    if !improves(objective, *best, opts.rel_gap) {
                        continue;
                    }
                }
                if let Some(children) =
                    branch_or_accept(objective, values, node.bounds, &integral, &mut incumbent, &mut seq)
                {
                    heap.extend(children);
                }
            }
        }
    }

    match incumbent {
        None => Ok(SolveResult::infeasible()),
        Some((_, mut values)) => {
            for &j in &integral {
                values[j] = values[j].round();
            }
            Ok(SolveResult {
                status: SolveStatus::Optimal,
                objective: model.evaluate_objective(&values),
                values,
                gap: 0.0,
            })
        }
    }
}

fn improves(bound: f64, best: f64, rel_gap: f64) -> bool {
    bound < best - rel_gap.max(1e-12) * best.abs().max(1.0)
}

/// Either records an integral relaxation as the new incumbent or returns the
/// two children obtained by branching on the most fractional variable.
fn branch_or_accept(
    objective: f64,
    values: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    integral: &[usize],
    incumbent: &mut Option<(f64, Vec<f64>)>,
    seq: &mut usize,
) -> Option<[Node; 2]> {
    let mut pick: Option<(usize, f64)> = None;
    for &j in integral {
        let frac = (values[j] - values[j].floor()).min(values[j].ceil() - values[j]);
        if frac > INT_TOL && pick.map_or(true, |(_, f)| frac > f + 1e-12) {
            pick = Some((j, frac));
        }
    }
    let Some((j, _)) = pick else {
        if incumbent.as_ref().map_or(true, |(best, _)| objective < *best) {
            *incumbent = Some((objective, values));
        }
        return None;
    };
    let x = values[j];
    let mut down = bounds.clone();
    down[j].1 = x.floor();
    let mut up = bounds;
    up[j].0 = x.ceil();
    *seq += 2;
    Some([
        Node {
            bound: objective,
            seq: *seq - 2,
            bounds: down,
        },
        Node {
            bound: objective,
            seq: *seq - 1,
            bounds: up,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{RowSense, VarKind};

    #[test]
    fn knapsack_matches_enumeration() {
        // values 6, 5, 4; weights 3, 2, 2; cap 5 (minimize negated value)
        let values = [6.0, 5.0, 4.0];
        let weights = [3.0, 2.0, 2.0];
        let mut m = ModelIR::new("knap");
        let xs: Vec<_> = (0..3).map(|i| m.add_binary(format!("x{i}"))).collect();
        for (i, &x) in xs.iter().enumerate() {
            m.add_objective_term(x, -values[i]);
        }
        m.add_constraint(
            "cap",
            xs.iter().zip(weights).map(|(&x, w)| (x, w)).collect(),
            RowSense::Le,
            5.0,
        );
        let best = (0u32..8)
            .filter(|mask| (0..3).map(|i| weights[i] * ((mask >> i) & 1) as f64).sum::<f64>() <= 5.0)
            .map(|mask| -(0..3).map(|i| values[i] * ((mask >> i) & 1) as f64).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let r = solve_exact_mini(&m, &MiniOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - best).abs() < 1e-9);
        assert_eq!(best, -11.0);
    }

    #[test]
    fn fractional_optimum_gets_rounded_by_branching() {
        // max x + y s.t. 2x + 2y <= 3, integers in [0, 5]: LP gives 1.5, MILP 1
        let mut m = ModelIR::new("t");
        let x = m.add_var("x", 0.0, 5.0, VarKind::Integer);
        let y = m.add_var("y", 0.0, 5.0, VarKind::Integer);
        m.add_objective_term(x, -1.0);
        m.add_objective_term(y, -1.0);
        m.add_constraint("c", vec![(x, 2.0), (y, 2.0)], RowSense::Le, 3.0);
        let r = solve_exact_mini(&m, &MiniOptions::default()).unwrap();
        assert!((r.objective + 1.0).abs() < 1e-9);
        assert!(r.values.iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn pure_lp_equals_relaxation() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        m.add_objective_term(x, 1.0);
        m.add_constraint("c", vec![(x, 1.0)], RowSense::Ge, 3.0);
        let r = solve_exact_mini(&m, &MiniOptions::default()).unwrap();
        let LpOutcome::Optimal { objective, .. } = solve_lp_relaxation(&m, None).unwrap() else {
            panic!()
        };
        assert_eq!(r.objective, objective);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn node_budget_is_reported() {
        // Parity-style constraint: 2 * sum(x) = 2k + 1 is infeasible over integers
        // but every relaxation is feasible, forcing a deep tree.
        let mut m = ModelIR::new("t");
        let xs: Vec<_> = (0..12).map(|i| m.add_binary(format!("b{i}"))).collect();
        m.add_constraint("odd", xs.iter().map(|&x| (x, 2.0)).collect(), RowSense::Eq, 7.0);
        let r = solve_exact_mini(
            &m,
            &MiniOptions {
                node_budget: 10,
                rel_gap: 1e-6,
            },
        );
        assert_eq!(r.unwrap_err(), SolverError::NodeBudget(10));
    }

    #[test]
    fn infeasible_integer_model() {
        let mut m = ModelIR::new("t");
        let x = m.add_var("x", 0.0, 3.0, VarKind::Integer);
        m.add_constraint("lo", vec![(x, 1.0)], RowSense::Ge, 1.2);
        m.add_constraint("hi", vec![(x, 1.0)], RowSense::Le, 1.8);
        assert_eq!(
            solve_exact_mini(&m, &MiniOptions::default()).unwrap().status,
            SolveStatus::Infeasible
        );
    }
}
