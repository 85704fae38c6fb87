//! Dense two-phase tableau simplex for the mini backend's LP relaxations.
//!
//! Only meant for test-scale models (a few hundred rows). Variables are
//! shifted onto `[0, inf)`; finite upper bounds become explicit rows.

use super::{ModelIR, RowSense, SolverError};

const PIVOT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 100_000;
/// Dantzig pricing switches to Bland's rule after this many degenerate pivots in a row.
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// How an original variable maps onto non-negative tableau columns.
#[derive(Debug, Clone)]
enum Mapping {
    Fixed(f64),
    /// `x = offset + sign * col`
    Shifted { col: usize, offset: f64, sign: f64 },
    /// `x = pos - neg`
    Free { pos: usize, neg: usize },
}

/// Solves the LP relaxation of `model`, optionally with replacement bounds.
pub fn solve_lp_relaxation(model: &ModelIR, bounds: Option<&[(f64, f64)]>) -> Result<LpOutcome, SolverError> {
    let n = model.num_vars();
    let bound = |j: usize| -> (f64, f64) {
        match bounds {
            Some(b) => b[j],
            None => (model.vars()[j].lower, model.vars()[j].upper),
        }
    };

    let mut ncols = 0usize;
    let mut maps = Vec::with_capacity(n);
    // Rows as (dense-ish sparse terms over columns, sense, rhs).
    let mut rows: Vec<(Vec<(usize, f64)>, RowSense, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = bound(j);
        if l > u + PIVOT_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        let map = if l.is_finite() && u.is_finite() && (u - l).abs() <= PIVOT_TOL {
            Mapping::Fixed(l)
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                rows.push((vec![(col, 1.0)], RowSense::Le, u - l));
            }
            Mapping::Shifted { col, offset: l, sign: 1.0 }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            Mapping::Shifted { col, offset: u, sign: -1.0 }
        } else {
            ncols += 2;
            Mapping::Free { pos: ncols - 2, neg: ncols - 1 }
        };
        maps.push(map);
    }

    for c in model.constraints() {
        let mut rhs = c.rhs;
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
        for &(v, a) in &c.terms {
            match maps[v.0] {
                Mapping::Fixed(x) => rhs -= a * x,
                Mapping::Shifted { col, offset, sign } => {
                    rhs -= a * offset;
                    terms.push((col, a * sign));
                }
                Mapping::Free { pos, neg } => {
                    terms.push((pos, a));
                    terms.push((neg, -a));
                }
            }
        }
        if terms.iter().all(|&(_, a)| a == 0.0) {
            let ok = match c.sense {
                RowSense::Le => 0.0 <= rhs + PHASE1_TOL,
                RowSense::Ge => 0.0 >= rhs - PHASE1_TOL,
                RowSense::Eq => rhs.abs() <= PHASE1_TOL,
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        rows.push((terms, c.sense, rhs));
    }

    let mut cost = vec![0.0; ncols];
    let mut cost_offset = model.objective_constant();
    for (j, &cj) in model.objective().iter().enumerate() {
        match maps[j] {
            Mapping::Fixed(x) => cost_offset += cj * x,
            Mapping::Shifted { col, offset, sign } => {
                cost_offset += cj * offset;
                cost[col] += cj * sign;
            }
            Mapping::Free { pos, neg } => {
                cost[pos] += cj;
                cost[neg] -= cj;
            }
        }
    }

    let mut tab = Tableau::build(ncols, &rows);
    match tab.run(&cost)? {
        Phase::Infeasible => return Ok(LpOutcome::Infeasible),
        Phase::Unbounded => return Ok(LpOutcome::Unbounded),
        Phase::Optimal => {}
    }

    let y = tab.primal(ncols);
    let values: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            Mapping::Fixed(x) => x,
            Mapping::Shifted { col, offset, sign } => offset + sign * y[col],
            Mapping::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = cost_offset + cost.iter().zip(&y).map(|(c, x)| c * x).sum::<f64>();
    Ok(LpOutcome::Optimal { objective, values })
}

enum Phase {
    Optimal,
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `m` rows of `width + 1` entries; the last entry is the rhs.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(ncols: usize, rows: &[(Vec<(usize, f64)>, RowSense, f64)]) -> Self {
        let n_slack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
        let first_artificial = ncols + n_slack;
        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut slack = ncols;
        let mut artificial = first_artificial;
        let mut needs_artificial = Vec::with_capacity(rows.len());
        for (terms, sense, rhs) in rows {
            let mut row = vec![0.0; first_artificial];
            for &(col, v) in terms {
                row[col] += v;
            }
            let mut slack_col = None;
            match sense {
                RowSense::Le => {
                    row[slack] = 1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                RowSense::Ge => {
                    row[slack] = -1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                RowSense::Eq => {}
            }
            let mut rhs = *rhs;
            if rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
            }
            match slack_col {
                Some(s) if row[s] > 0.0 => {
                    basis.push(s);
                    needs_artificial.push(false);
                }
                _ => {
                    basis.push(usize::MAX);
                    needs_artificial.push(true);
                }
            }
            row.push(rhs);
            a.push(row);
        }
        let n_art = needs_artificial.iter().filter(|&&b| b).count();
        let width = first_artificial + n_art;
        for (i, row) in a.iter_mut().enumerate() {
            let rhs = row.pop().unwrap();
            row.resize(width, 0.0);
            if needs_artificial[i] {
                row[artificial] = 1.0;
                basis[i] = artificial;
                artificial += 1;
            }
            row.push(rhs);
        }
        Self {
            a,
            basis,
            width,
            first_artificial,
        }
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase, SolverError> {
        if self.width > self.first_artificial {
            let mut c1 = vec![0.0; self.width];
            c1[self.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            self.optimize(&c1, self.width)?;
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.a)
                .filter(|(&b, _)| b >= self.first_artificial)
                .map(|(_, row)| row[self.width])
                .sum();
            if infeas > PHASE1_TOL {
                return Ok(Phase::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut c2 = vec![0.0; self.width];
        c2[..cost.len()].copy_from_slice(cost);
        if self.optimize(&c2, self.first_artificial)? {
            Ok(Phase::Optimal)
        } else {
            Ok(Phase::Unbounded)
        }
    }

    /// Pivots artificials out of the basis after phase 1; rows that cannot be
    /// pivoted are redundant and dropped.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| self.a[i][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.a.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    /// Minimizes `cost` over columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool, SolverError> {
        let mut streak = 0usize;
        for _ in 0..MAX_PIVOTS {
            let reduced = self.reduced_costs(cost, allowed);
            let bland = streak >= DEGENERATE_STREAK;
            let entering = if bland {
                reduced.iter().position(|&d| d < -PIVOT_TOL)
            } else {
                reduced
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d < -PIVOT_TOL)
                    .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                    .map(|(j, _)| j)
            };
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                let aij = row[j];
                if aij > PIVOT_TOL {
                    let ratio = row[self.width] / aij;
                    let better = match leave {
                        None => true,
                        Some((k, best)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((i, ratio)) = leave else {
                return Ok(false);
            };
            streak = if ratio.abs() <= 1e-12 { streak + 1 } else { 0 };
            self.pivot(i, j);
        }
        Err(SolverError::Numerical(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let mut d = cost[..allowed].to_vec();
        for (row, &b) in self.a.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (dj, aij) in d.iter_mut().zip(row) {
                    *dj -= cb * aij;
                }
            }
        }
        for &b in &self.basis {
            if b < allowed {
                d[b] = 0.0;
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        self.a[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn primal(&self, ncols: usize) -> Vec<f64> {
        let mut y = vec![0.0; ncols];
        for (row, &b) in self.a.iter().zip(&self.basis) {
            if b < ncols {
                y[b] = row[self.width].max(0.0);
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(out: LpOutcome) -> (f64, Vec<f64>) {
        match out {
            LpOutcome::Optimal { objective, values } => (objective, values),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, f64::INFINITY);
        let y = m.add_continuous("y", 0.0, f64::INFINITY);
        m.add_objective_term(x, -3.0);
        m.add_objective_term(y, -5.0);
        m.add_constraint("a", vec![(x, 1.0)], RowSense::Le, 4.0);
        m.add_constraint("b", vec![(y, 2.0)], RowSense::Le, 12.0);
        m.add_constraint("c", vec![(x, 3.0), (y, 2.0)], RowSense::Le, 18.0);
        let (obj, v) = optimum(solve_lp_relaxation(&m, None).unwrap());
        assert!((obj + 36.0).abs() < 1e-9);
        assert!((v[0] - 2.0).abs() < 1e-9 && (v[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_negative_bounds_and_free_vars() {
        // min x + 2y  s.t.  x + y = -1, x in [-5, 5], y free, y >= -3 via row
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", -5.0, 5.0);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY);
        m.add_objective_term(x, 1.0);
        m.add_objective_term(y, 2.0);
        m.add_constraint("e", vec![(x, 1.0), (y, 1.0)], RowSense::Eq, -1.0);
        m.add_constraint("g", vec![(y, 1.0)], RowSense::Ge, -3.0);
        let (obj, v) = optimum(solve_lp_relaxation(&m, None).unwrap());
        // y = -3, x = 2 -> 2 - 6 = -4
        assert!((obj + 4.0).abs() < 1e-9, "{obj} {v:?}");
    }

    #[test]
    fn upper_bounded_only() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", f64::NEG_INFINITY, 2.5);
        m.add_objective_term(x, -1.0);
        let (obj, v) = optimum(solve_lp_relaxation(&m, None).unwrap());
        assert_eq!(v, vec![2.5]);
        assert_eq!(obj, -2.5);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        m.add_constraint("a", vec![(x, 1.0)], RowSense::Le, 1.0);
        m.add_constraint("b", vec![(x, 1.0)], RowSense::Ge, 2.0);
        assert_eq!(solve_lp_relaxation(&m, None).unwrap(), LpOutcome::Infeasible);

        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, f64::INFINITY);
        m.add_objective_term(x, -1.0);
        assert_eq!(solve_lp_relaxation(&m, None).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        let y = m.add_continuous("y", 0.0, 10.0);
        m.add_objective_term(x, 1.0);
        m.add_constraint("a", vec![(x, 1.0), (y, 1.0)], RowSense::Eq, 4.0);
        m.add_constraint("b", vec![(x, 2.0), (y, 2.0)], RowSense::Eq, 8.0);
        let (obj, v) = optimum(solve_lp_relaxation(&m, None).unwrap());
        assert!(obj.abs() < 1e-9);
        assert!((v[1] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn bound_override_and_fixed_vars() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 10.0);
        let y = m.add_continuous("y", 0.0, 10.0);
        m.add_objective_term(x, 1.0);
        m.add_objective_term(y, 1.0);
        m.add_constraint("a", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 3.0);
        let (obj, v) = optimum(solve_lp_relaxation(&m, Some(&[(2.5, 2.5), (0.0, 10.0)])).unwrap());
        assert!((obj - 3.0).abs() < 1e-9);
        assert_eq!(v[0], 2.5);
        assert_eq!(
            solve_lp_relaxation(&m, Some(&[(0.0, 1.0), (0.0, 1.0)])).unwrap(),
            LpOutcome::Infeasible
        );
    }
}
