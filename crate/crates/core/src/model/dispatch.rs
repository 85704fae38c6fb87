//! Solved schedules and their operating cost.

use serde::{Deserialize, Serialize};

use super::MicrogridVars;
use crate::scenario::NetworkScenario;

/// One microgrid's schedule, indexed `[device][t]` or `[t]`.
///
/// `network_import[n][t]` is the power this microgrid draws from microgrid
/// position `n`; the row for the owner itself is all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub owner: usize,
    pub generation: Vec<Vec<f64>>,
    pub commitment: Vec<Vec<f64>>,
    pub startup: Vec<Vec<f64>>,
    pub charge: Vec<Vec<f64>>,
    pub discharge: Vec<Vec<f64>>,
    pub level: Vec<Vec<f64>>,
    pub grid_import: Vec<f64>,
    pub grid_export: Vec<f64>,
    pub net_exchange: Vec<f64>,
    pub import_flag: Vec<f64>,
    pub export_flag: Vec<f64>,
    pub network_import: Vec<Vec<f64>>,
    pub network_export: Vec<Vec<f64>>,
}

/// Operating cost split by source; network payments are positive for imports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub generation: f64,
    pub grid: f64,
    pub network: f64,
    pub total: f64,
}

impl DispatchSolution {
    pub fn extract(vars: &MicrogridVars, values: &[f64], num_microgrids: usize) -> Self {
        let read = |ids: &[crate::lp::VarId]| ids.iter().map(|v| values[v.0]).collect::<Vec<f64>>();
        let horizon = vars.grid_import.len();
        let mut network_import = vec![vec![0.0; horizon]; num_microgrids];
        let mut network_export = vec![vec![0.0; horizon]; num_microgrids];
        for e in &vars.exchanges {
            network_import[e.neighbor] = read(&e.import);
            network_export[e.neighbor] = read(&e.export);
        }
        Self {
            owner: vars.owner,
            generation: vars.generators.iter().map(|g| read(&g.power)).collect(),
            commitment: vars.generators.iter().map(|g| read(&g.on)).collect(),
            startup: vars.generators.iter().map(|g| read(&g.startup)).collect(),
            charge: vars.storage.iter().map(|b| read(&b.charge)).collect(),
            discharge: vars.storage.iter().map(|b| read(&b.discharge)).collect(),
            level: vars.storage.iter().map(|b| read(&b.level)).collect(),
            grid_import: read(&vars.grid_import),
            grid_export: read(&vars.grid_export),
            net_exchange: read(&vars.net_exchange),
            import_flag: read(&vars.import_flag),
            export_flag: read(&vars.export_flag),
            network_import,
            network_export,
        }
    }

    pub fn horizon(&self) -> usize {
        self.grid_import.len()
    }

    /// Total network import at `t` over all counterparties.
    pub fn total_network_import(&self, t: usize) -> f64 {
        self.network_import.iter().map(|row| row[t]).sum()
    }

    pub fn total_network_export(&self, t: usize) -> f64 {
        self.network_export.iter().map(|row| row[t]).sum()
    }

    /// Recomputes `P^E` and the import/export flags from the flow values.
    pub fn refresh_net_exchange(&mut self) {
        for t in 0..self.horizon() {
            let imports = self.grid_import[t] + self.total_network_import(t);
            let exports = self.grid_export[t] + self.total_network_export(t);
            self.net_exchange[t] = imports - exports;
            self.import_flag[t] = if imports > 0.0 { 1.0 } else { 0.0 };
            self.export_flag[t] = if exports > 0.0 { 1.0 } else { 0.0 };
        }
    }

    /// Operating cost evaluated directly from the schedule values.
    pub fn cost(&self, s: &NetworkScenario) -> CostBreakdown {
        let mg = s.microgrid(self.owner);
        let p = &s.prices;
        let mut out = CostBreakdown::default();
        for (g, spec) in mg.generators.iter().enumerate() {
            for t in 0..self.horizon() {
                out.generation += spec.startup_cost * self.startup[g][t]
                    + s.dt * (spec.noload_cost * self.commitment[g][t] + spec.cost * self.generation[g][t]);
            }
        }
        for t in 0..self.horizon() {
            out.grid += p.grid_buy[t] * self.grid_import[t] - p.grid_sell[t] * self.grid_export[t];
            out.network += p.network_price[t] * (self.total_network_import(t) - self.total_network_export(t));
        }
        out.total = out.generation + out.grid + out.network;
        out
    }
}

/// Sum of per-microgrid operating costs.
pub fn total_cost(solutions: &[DispatchSolution], s: &NetworkScenario) -> f64 {
    solutions.iter().map(|d| d.cost(s).total).sum()
}
