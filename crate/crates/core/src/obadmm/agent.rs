//! The agent boundary.
//!
//! Agents never see each other's devices, loads or models. What crosses the
//! boundary is an [`ExchangeMessage`] per (pair, interval, direction); the
//! coordinator additionally receives each agent's scalar operating cost for
//! the stopping rule.

use serde::{Deserialize, Serialize};

use super::ExchangeLedger;
use crate::lp::{Backend, SolveOptions};
use crate::model::{build_subproblem, build_subproblem_refined, BuiltModel, DispatchError, DispatchSolution, NeighborTerms, PwlLayout, SubproblemContext};
use crate::scenario::NetworkScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `from` draws power from `to`.
    Import,
    /// `from` sends power to `to`.
    Export,
}

/// The only data agents share: one directed exchange value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeMessage {
    pub from: usize,
    pub to: usize,
    pub t: usize,
    pub direction: Direction,
    pub value: f64,
}

/// Messages describing every exchange value microgrid `m` proposes.
pub fn outbox(d: &DispatchSolution) -> Vec<ExchangeMessage> {
    let mut out = Vec::new();
    for (n, (imp, exp)) in d.network_import.iter().zip(&d.network_export).enumerate() {
        if n == d.owner {
            continue;
        }
        for t in 0..imp.len() {
            out.push(ExchangeMessage {
                from: d.owner,
                to: n,
                t,
                direction: Direction::Import,
                value: imp[t],
            });
            out.push(ExchangeMessage {
                from: d.owner,
                to: n,
                t,
                direction: Direction::Export,
                value: exp[t],
            });
        }
    }
    out
}

/// Writes a batch of messages into the coordinator's exchange store.
pub fn deliver(store: &mut ExchangeLedger, messages: &[ExchangeMessage]) {
    for msg in messages {
        match msg.direction {
            Direction::Import => store.set_import(msg.from, msg.to, msg.t, msg.value),
            Direction::Export => store.set_export(msg.from, msg.to, msg.t, msg.value),
        }
    }
}

/// What an agent returns after one local solve.
#[derive(Debug, Clone)]
pub struct AgentReply {
    pub messages: Vec<ExchangeMessage>,
    /// Operating cost at the agent's own schedule, sent to the coordinator only.
    pub cost: f64,
    /// Private schedule, kept by the agent.
    pub schedule: DispatchSolution,
}

/// Adaptive tangent refinement of the penalty blocks. After a solve, every
/// block whose weighted linearization error at the solution exceeds `tol`
/// gets a tangent at that point and the subproblem is solved again, at most
/// `rounds` extra times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub rounds: usize,
    pub tol: f64,
}

impl Refinement {
    pub const NONE: Refinement = Refinement { rounds: 0, tol: 0.0 };
}

/// One microgrid's optimizer.
#[derive(Debug, Clone)]
pub struct Agent {
    pub owner: usize,
    pub layout: PwlLayout,
    pub refinement: Refinement,
    pub options: SolveOptions,
    pub backend: Backend,
    /// Last context and reply. Solves are deterministic, so an unchanged
    /// context (the typical case once residuals reach zero) reuses the reply.
    last: Option<(SubproblemContext, AgentReply)>,
}

impl Agent {
    pub fn new(owner: usize, layout: PwlLayout, options: SolveOptions, backend: Backend) -> Self {
        Self {
            owner,
            layout,
            refinement: Refinement::NONE,
            options,
            backend,
            last: None,
        }
    }

    pub fn with_refinement(mut self, refinement: Refinement) -> Self {
        self.refinement = refinement;
        self
    }

    /// The subproblem context built from what the agent may know: neighbor
    /// exchange values and the multipliers on its own pairs.
    pub fn context(&self, store: &ExchangeLedger, duals: &DualStore, rho: f64) -> SubproblemContext {
        let neighbors = (0..store.num_microgrids())
            .filter(|&n| n != self.owner)
            .map(|n| {
                let h = store.horizon();
                NeighborTerms {
                    neighbor: n,
                    their_export: (0..h).map(|t| store.export(n, self.owner, t)).collect(),
                    their_import: (0..h).map(|t| store.import(n, self.owner, t)).collect(),
                    y_owner_import: (0..h).map(|t| duals.get(self.owner, n, t)).collect(),
                    y_neighbor_import: (0..h).map(|t| duals.get(n, self.owner, t)).collect(),
                }
            })
            .collect();
        SubproblemContext {
            owner: self.owner,
            rho,
            neighbors,
        }
    }

    pub fn build(&self, ctx: &SubproblemContext, s: &NetworkScenario) -> Result<BuiltModel, DispatchError> {
        Ok(build_subproblem(ctx, s, self.layout)?)
    }

    pub fn solve(&mut self, ctx: &SubproblemContext, s: &NetworkScenario) -> Result<AgentReply, DispatchError> {
        if let Some((prev, reply)) = &self.last {
            if prev == ctx {
                return Ok(reply.clone());
            }
        }
        let Refinement { rounds, tol } = self.refinement;
        let mut extra: Vec<Vec<f64>> = Vec::new();
        let mut round = 0;
        let mut schedule = loop {
            let built = build_subproblem_refined(ctx, s, self.layout, &extra)?;
            let (solutions, result) = built.solve(s.num_microgrids(), self.backend, &self.options)?;
            if round == rounds {
                break solutions;
            }
            let blocks = built.model.pwl_blocks();
            extra.resize(blocks.len(), Vec::new());
            let mut refined = false;
            for (pts, b) in extra.iter_mut().zip(blocks) {
                let x = result.values[b.x.0];
                if b.weight * ((x - b.center).powi(2) - b.envelope(x)) > tol {
                    pts.push(x);
                    refined = true;
                }
            }
            if !refined {
                break solutions;
            }
            round += 1;
        };
        let schedule = schedule.remove(0);
        let reply = AgentReply {
            messages: outbox(&schedule),
            cost: schedule.cost(s).total,
            schedule,
        };
        self.last = Some((ctx.clone(), reply.clone()));
        Ok(reply)
    }
}

/// Multipliers `y[m][n][t]` on the consensus gap `import(m, n, t) - export(n, m, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualStore {
    num_microgrids: usize,
    horizon: usize,
    values: Vec<f64>,
}

impl DualStore {
    pub fn zeros(num_microgrids: usize, horizon: usize) -> Self {
        Self {
            num_microgrids,
            horizon,
            values: vec![0.0; num_microgrids * num_microgrids * horizon],
        }
    }

    fn idx(&self, m: usize, n: usize, t: usize) -> usize {
        (m * self.num_microgrids + n) * self.horizon + t
    }

    pub fn get(&self, m: usize, n: usize, t: usize) -> f64 {
        self.values[self.idx(m, n, t)]
    }

    pub fn add(&mut self, m: usize, n: usize, t: usize, delta: f64) {
        let i = self.idx(m, n, t);
        self.values[i] += delta;
    }

    /// Values over ordered pairs in residual-vector order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (m, n) in super::ordered_pairs(self.num_microgrids) {
            for t in 0..self.horizon {
                out.push(self.get(m, n, t));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_schema_has_exchange_fields_only() {
        let msg = ExchangeMessage {
            from: 0,
            to: 1,
            t: 3,
            direction: Direction::Export,
            value: 12.5,
        };
        let json = serde_json::to_value(msg).unwrap();
        let mut keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["direction", "from", "t", "to", "value"]);
        let extra = r#"{"from":0,"to":1,"t":0,"direction":"import","value":1,"net_load":[1]}"#;
        assert!(serde_json::from_str::<ExchangeMessage>(extra).is_err());
    }

    #[test]
    fn deliver_writes_directed_values() {
        let mut store = ExchangeLedger::zeros(2, 2);
        deliver(
            &mut store,
            &[
                ExchangeMessage {
                    from: 1,
                    to: 0,
                    t: 1,
                    direction: Direction::Import,
                    value: 4.0,
                },
                ExchangeMessage {
                    from: 0,
                    to: 1,
                    t: 0,
                    direction: Direction::Export,
                    value: 2.0,
                },
            ],
        );
        assert_eq!(store.import(1, 0, 1), 4.0);
        assert_eq!(store.export(0, 1, 0), 2.0);
        assert_eq!(store.import(0, 1, 0), 0.0);
    }
}
