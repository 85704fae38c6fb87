//! Proportional exchange allocation.
//!
//! After a network solve, each microgrid's net position per interval is
//! fixed, but which peer it trades with is arbitrary. This step reassigns
//! counterparties so each importer receives from every exporter in
//! proportion to the two parties' needs. The short side of the market is
//! fully served by the network; the long side settles its remainder with
//! the main grid.

use serde::{Deserialize, Serialize};

use crate::model::DispatchSolution;
use crate::obadmm::ExchangeLedger;
use crate::scenario::NetworkScenario;

/// Net positions within this band are treated as zero.
pub const NEUTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Importer,
    Exporter,
    Neutral,
}

/// Role and magnitude of one microgrid's net exchange in one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetPosition {
    pub role: Role,
    /// Net import `E+` (zero unless importer).
    pub demand: f64,
    /// Net export `E-` (zero unless exporter).
    pub supply: f64,
}

pub fn classify(net_exchange: f64) -> NetPosition {
    if net_exchange > NEUTRAL_TOL {
        NetPosition {
            role: Role::Importer,
            demand: net_exchange,
            supply: 0.0,
        }
    } else if net_exchange < -NEUTRAL_TOL {
        NetPosition {
            role: Role::Exporter,
            demand: 0.0,
            supply: -net_exchange,
        }
    } else {
        NetPosition {
            role: Role::Neutral,
            demand: 0.0,
            supply: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeaError {
    #[error("microgrid position {m} at t={t}: {detail}")]
    RoleInconsistency { m: usize, t: usize, detail: String },
    #[error("objective total changed from {before} to {after}")]
    TotalMismatch { before: f64, after: f64 },
}

/// Reallocates every interval of `ledger` proportionally. Net exchanges are
/// preserved; the result is bilaterally consistent.
pub fn apply_pea(ledger: &ExchangeLedger) -> Result<ExchangeLedger, PeaError> {
    let count = ledger.num_microgrids();
    let horizon = ledger.horizon();
    let mut out = ExchangeLedger::zeros(count, horizon);
    for t in 0..horizon {
        let mut positions = Vec::with_capacity(count);
        for m in 0..count {
            check_flows(ledger, m, t)?;
            positions.push(classify(ledger.net_exchange(m, t)));
        }
        allocate_interval(&mut out, t, &positions);
    }
    Ok(out)
}

fn check_flows(ledger: &ExchangeLedger, m: usize, t: usize) -> Result<(), PeaError> {
    let mut flows = vec![("grid import", ledger.grid_import(m, t)), ("grid export", ledger.grid_export(m, t))];
    for n in (0..ledger.num_microgrids()).filter(|&n| n != m) {
        flows.push(("network import", ledger.import(m, n, t)));
        flows.push(("network export", ledger.export(m, n, t)));
    }
    match flows.into_iter().find(|(_, v)| !v.is_finite() || *v < -NEUTRAL_TOL) {
        Some((what, v)) => Err(PeaError::RoleInconsistency {
            m,
            t,
            detail: format!("{what} is {v}"),
        }),
        None => Ok(()),
    }
}

/// Writes the proportional allocation of one interval into `out`.
pub fn allocate_interval(out: &mut ExchangeLedger, t: usize, positions: &[NetPosition]) {
    let demand: f64 = positions.iter().map(|p| p.demand).sum();
    let supply: f64 = positions.iter().map(|p| p.supply).sum();
    let scale = demand.max(supply);
    let importers: Vec<usize> = (0..positions.len()).filter(|&m| positions[m].role == Role::Importer).collect();
    let exporters: Vec<usize> = (0..positions.len()).filter(|&m| positions[m].role == Role::Exporter).collect();

    let mut received = vec![0.0; positions.len()];
    let mut sent = vec![0.0; positions.len()];
    if scale > 0.0 {
        for &m in &importers {
            for &n in &exporters {
                // Deficit: E+_m / D of each exporter's supply. Surplus: E-_n / S of
                // each importer's demand. Both equal E+_m E-_n / max(D, S).
                let flow = positions[m].demand * positions[n].supply / scale;
                out.set_import(m, n, t, flow);
                out.set_export(n, m, t, flow);
                received[m] += flow;
                sent[n] += flow;
            }
        }
    }
    for (m, p) in positions.iter().enumerate() {
        let (grid_in, grid_out) = match p.role {
            Role::Importer if demand > supply => ((p.demand - received[m]).max(0.0), 0.0),
            Role::Exporter if supply > demand => (0.0, (p.supply - sent[m]).max(0.0)),
            _ => (0.0, 0.0),
        };
        out.set_grid(m, t, grid_in, grid_out);
    }
}

/// Applies an adjusted ledger to the schedules; device dispatch is untouched.
pub fn apply_ledger(solutions: &[DispatchSolution], ledger: &ExchangeLedger) -> Vec<DispatchSolution> {
    solutions
        .iter()
        .map(|d| {
            let mut d = d.clone();
            ledger.apply_to(&mut d);
            d
        })
        .collect()
}

/// Per-microgrid operating costs before and after reallocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeaReport {
    pub ids: Vec<usize>,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub total_before: f64,
    pub total_after: f64,
}

impl PeaReport {
    pub fn deltas(&self) -> Vec<f64> {
        self.after.iter().zip(&self.before).map(|(a, b)| a - b).collect()
    }
}

/// Per-microgrid and total costs. Requires equal totals within `tol` when
/// `strict` is set (both schedules network-consistent).
pub fn pea_objective_report(
    s: &NetworkScenario,
    before: &[DispatchSolution],
    after: &[DispatchSolution],
    strict: Option<f64>,
) -> Result<PeaReport, PeaError> {
    let b: Vec<f64> = before.iter().map(|d| d.cost(s).total).collect();
    let a: Vec<f64> = after.iter().map(|d| d.cost(s).total).collect();
    let report = PeaReport {
        ids: before.iter().map(|d| s.microgrid(d.owner).id).collect(),
        total_before: b.iter().sum(),
        total_after: a.iter().sum(),
        before: b,
        after: a,
    };
    if let Some(tol) = strict {
        if (report.total_before - report.total_after).abs() > tol * report.total_before.abs().max(1.0) {
            return Err(PeaError::TotalMismatch {
                before: report.total_before,
                after: report.total_after,
            });
        }
    }
    Ok(report)
}
