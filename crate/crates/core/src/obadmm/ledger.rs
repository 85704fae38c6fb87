use serde::{Deserialize, Serialize};

use crate::model::DispatchSolution;

/// Directed network exchanges and grid flows for every microgrid.
///
/// `import(m, n, t)` is what `m` draws from `n`, `export(m, n, t)` what `m`
/// sends to `n`. The two views of one trade are `import(m, n, t)` and
/// `export(n, m, t)`; they agree only once the network is consistent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeLedger {
    num_microgrids: usize,
    horizon: usize,
    import: Vec<f64>,
    export: Vec<f64>,
    grid_import: Vec<f64>,
    grid_export: Vec<f64>,
}

impl ExchangeLedger {
    pub fn zeros(num_microgrids: usize, horizon: usize) -> Self {
        let pairs = num_microgrids * num_microgrids * horizon;
        Self {
            num_microgrids,
            horizon,
            import: vec![0.0; pairs],
            export: vec![0.0; pairs],
            grid_import: vec![0.0; num_microgrids * horizon],
            grid_export: vec![0.0; num_microgrids * horizon],
        }
    }

    pub fn from_solutions(solutions: &[DispatchSolution]) -> Self {
        let horizon = solutions.first().map_or(0, |d| d.horizon());
        let mut ledger = Self::zeros(solutions.len(), horizon);
        for d in solutions {
            ledger.record(d);
        }
        ledger
    }

    /// Overwrites the rows owned by `d.owner` with the values in `d`.
    pub fn record(&mut self, d: &DispatchSolution) {
        let m = d.owner;
        for t in 0..self.horizon {
            for n in 0..self.num_microgrids {
                if n != m {
                    self.set_import(m, n, t, d.network_import[n][t]);
                    self.set_export(m, n, t, d.network_export[n][t]);
                }
            }
            self.grid_import[m * self.horizon + t] = d.grid_import[t];
            self.grid_export[m * self.horizon + t] = d.grid_export[t];
        }
    }

    /// Copies this ledger's flows for `d.owner` into `d` and refreshes its
    /// net exchange and flags.
    pub fn apply_to(&self, d: &mut DispatchSolution) {
        let m = d.owner;
        for t in 0..self.horizon {
            for n in 0..self.num_microgrids {
                d.network_import[n][t] = if n == m { 0.0 } else { self.import(m, n, t) };
                d.network_export[n][t] = if n == m { 0.0 } else { self.export(m, n, t) };
            }
            d.grid_import[t] = self.grid_import(m, t);
            d.grid_export[t] = self.grid_export(m, t);
        }
        d.refresh_net_exchange();
    }

    pub fn num_microgrids(&self) -> usize {
        self.num_microgrids
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn idx(&self, m: usize, n: usize, t: usize) -> usize {
        (m * self.num_microgrids + n) * self.horizon + t
    }

    pub fn import(&self, m: usize, n: usize, t: usize) -> f64 {
        self.import[self.idx(m, n, t)]
    }

    pub fn export(&self, m: usize, n: usize, t: usize) -> f64 {
        self.export[self.idx(m, n, t)]
    }

    pub fn set_import(&mut self, m: usize, n: usize, t: usize, value: f64) {
        let i = self.idx(m, n, t);
        self.import[i] = value;
    }

    pub fn set_export(&mut self, m: usize, n: usize, t: usize, value: f64) {
        let i = self.idx(m, n, t);
        self.export[i] = value;
    }

    pub fn grid_import(&self, m: usize, t: usize) -> f64 {
        self.grid_import[m * self.horizon + t]
    }

    pub fn grid_export(&self, m: usize, t: usize) -> f64 {
        self.grid_export[m * self.horizon + t]
    }

    pub fn set_grid(&mut self, m: usize, t: usize, import: f64, export: f64) {
        self.grid_import[m * self.horizon + t] = import;
        self.grid_export[m * self.horizon + t] = export;
    }

    /// Net power drawn by `m` at `t` from grid and network combined.
    pub fn net_exchange(&self, m: usize, t: usize) -> f64 {
        let mut net = self.grid_import(m, t) - self.grid_export(m, t);
        for n in (0..self.num_microgrids).filter(|&n| n != m) {
            net += self.import(m, n, t) - self.export(m, n, t);
        }
        net
    }

    /// Ordered pairs `(m, n)`, `m != n`, in the order residual vectors use.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        ordered_pairs(self.num_microgrids)
    }

    /// Consensus gaps `import(m, n, t) - export(n, m, t)` over all ordered
    /// pairs and intervals.
    pub fn consensus_gaps(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_microgrids * self.num_microgrids * self.horizon);
        for (m, n) in self.pairs() {
            for t in 0..self.horizon {
                out.push(self.import(m, n, t) - self.export(n, m, t));
            }
        }
        out
    }

    pub fn max_consensus_gap(&self) -> f64 {
        self.consensus_gaps().iter().fold(0.0, |a, g| a.max(g.abs()))
    }

    /// Smallest flow value in the ledger (negative only when corrupted).
    pub fn min_value(&self) -> f64 {
        self.import
            .iter()
            .chain(&self.export)
            .chain(&self.grid_import)
            .chain(&self.grid_export)
            .fold(f64::INFINITY, |a, &v| a.min(v))
    }

    /// One row per (t, owner, counterparty): `t,microgrid,counterparty,import,export`,
    /// with 1-based positions and `grid` as the grid counterparty.
    pub fn to_csv(&self, ids: &[usize]) -> String {
        let mut out = String::from("t,microgrid,counterparty,import,export\n");
        for t in 0..self.horizon {
            for m in 0..self.num_microgrids {
                out.push_str(&format!(
                    "{},{},grid,{},{}\n",
                    t + 1,
                    ids[m],
                    self.grid_import(m, t),
                    self.grid_export(m, t)
                ));
                for n in (0..self.num_microgrids).filter(|&n| n != m) {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        t + 1,
                        ids[m],
                        ids[n],
                        self.import(m, n, t),
                        self.export(m, n, t)
                    ));
                }
            }
        }
        out
    }
}

pub fn ordered_pairs(count: usize) -> Vec<(usize, usize)> {
    (0..count)
        .flat_map(|m| (0..count).filter(move |&n| n != m).map(move |n| (m, n)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_and_net_exchange() {
        let mut l = ExchangeLedger::zeros(2, 1);
        l.set_import(0, 1, 0, 10.0);
        l.set_export(1, 0, 0, 4.0);
        l.set_grid(1, 0, 0.0, 2.0);
        assert_eq!(l.consensus_gaps(), vec![6.0, 0.0]);
        assert_eq!(l.net_exchange(0, 0), 10.0);
        assert_eq!(l.net_exchange(1, 0), -6.0);
        assert_eq!(l.max_consensus_gap(), 6.0);
        assert_eq!(ordered_pairs(3), vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn csv_lists_grid_and_peers() {
        let l = ExchangeLedger::zeros(2, 1);
        let csv = l.to_csv(&[1, 2]);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("1,2,grid,0,0"));
    }
}
