//! HiGHS adapter.

use highs::{HighsModelStatus, RowProblem, Sense};

use super::{ModelIR, RowSense, SolveOptions, SolveResult, SolveStatus, SolverError};

pub fn solve_highs(model: &ModelIR, opts: &SolveOptions) -> Result<SolveResult, SolverError> {
    let mut pb = RowProblem::default();
    let cols: Vec<_> = model
        .vars()
        .iter()
        .zip(model.objective())
        .map(|(v, &c)| {
            if v.kind.is_integral() {
                pb.add_integer_column(c, v.lower..=v.upper)
            } else {
                pb.add_column(c, v.lower..=v.upper)
            }
        })
        .collect();
    for row in model.constraints() {
        let factors = row.terms.iter().map(|&(v, a)| (cols[v.0], a));
        match row.sense {
            RowSense::Le => pb.add_row(..=row.rhs, factors),
            RowSense::Ge => pb.add_row(row.rhs.., factors),
            RowSense::Eq => pb.add_row(row.rhs..=row.rhs, factors),
        }
    }

    let mut hm = pb
        .try_optimise(Sense::Minimise)
        .map_err(|s| SolverError::Numerical(format!("HiGHS rejected the model: {s:?}")))?;
    hm.make_quiet();
    hm.set_option("threads", 1);
    hm.set_option("random_seed", 0);
    hm.set_option("mip_rel_gap", opts.rel_gap);
    hm.set_option("mip_abs_gap", opts.abs_gap);
    hm.set_option("mip_feasibility_tolerance", 1e-7);
    hm.set_option("primal_feasibility_tolerance", 1e-8);
    // Sub-MIP heuristics dominate run time on the small dispatch models
    // without improving the final incumbent.
    hm.set_option("mip_heuristic_run_rens", false);
    hm.set_option("mip_heuristic_run_rins", false);
    hm.set_option("mip_heuristic_run_root_reduced_cost", false);
    if let Some(limit) = opts.time_limit {
        hm.set_option("time_limit", limit.as_secs_f64());
    }

    let solved = hm
        .try_solve()
        .map_err(|s| SolverError::Numerical(format!("HiGHS run failed: {s:?}")))?;
    let status = match solved.status() {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Unbounded,
        HighsModelStatus::ReachedTimeLimit
        | HighsModelStatus::ReachedIterationLimit
        | HighsModelStatus::ReachedSolutionLimit
        | HighsModelStatus::ReachedMemoryLimit
        | HighsModelStatus::ReachedInterrupt => SolveStatus::Limit,
        other => return Err(SolverError::Numerical(format!("HiGHS status {other:?}"))),
    };

    let has_point = status == SolveStatus::Optimal
        || (status == SolveStatus::Limit
            && solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible);
    if !has_point {
        return Ok(SolveResult {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            gap: f64::INFINITY,
        });
    }

    let mut values = solved.get_solution().columns().to_vec();
    // Snap integral columns; HiGHS returns them within its integrality tolerance.
    for (x, v) in values.iter_mut().zip(model.vars()) {
        if v.kind.is_integral() {
            *x = x.round();
        }
    }
    let gap = if model.num_integer_vars() == 0 {
        0.0
    } else {
        solved.mip_gap().max(0.0)
    };
    Ok(SolveResult {
        status,
        objective: model.evaluate_objective(&values),
        values,
        gap,
    })
}
