//! Scenario to [`ModelIR`] translation.
//!
//! Three model families share the same per-microgrid building blocks:
//! a standalone microgrid, the centralized network model, and the per-agent
//! ADMM subproblem whose objective is the owner's slice of the augmented
//! Lagrangian. Variable declaration order is fixed (microgrid, device, kind,
//! interval, then neighbor), so repeated builds are identical.

mod dispatch;

pub use dispatch::{total_cost, CostBreakdown, DispatchSolution};

use crate::lp::{
    add_pwl_quadratic, add_pwl_quadratic_at, add_pwl_quadratic_segments, centered_tangent_points, Backend, ModelIR, PwlError, RowSense,
    SolveOptions, SolveResult, SolveStatus, SolverError, VarId,
};
use crate::scenario::{MicrogridSpec, NetworkScenario};

#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("model `{0}` is infeasible")]
    Infeasible(String),
    #[error("model `{model}` stopped without a usable solution ({status:?})")]
    NoSolution { model: String, status: SolveStatus },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Pwl(#[from] PwlError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorVars {
    pub power: Vec<VarId>,
    pub on: Vec<VarId>,
    pub startup: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageVars {
    pub charge: Vec<VarId>,
    pub discharge: Vec<VarId>,
    pub charging: Vec<VarId>,
    pub discharging: Vec<VarId>,
    pub level: Vec<VarId>,
}

/// Directed exchange variables between the owner and one neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeVars {
    /// Zero-based position of the neighbor.
    pub neighbor: usize,
    /// Power imported by the owner from the neighbor.
    pub import: Vec<VarId>,
    /// Power exported by the owner to the neighbor.
    pub export: Vec<VarId>,
}

/// Variable ids of one microgrid inside a model.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridVars {
    pub owner: usize,
    pub generators: Vec<GeneratorVars>,
    pub storage: Vec<StorageVars>,
    pub grid_import: Vec<VarId>,
    pub grid_export: Vec<VarId>,
    pub net_exchange: Vec<VarId>,
    pub import_flag: Vec<VarId>,
    pub export_flag: Vec<VarId>,
    pub exchanges: Vec<ExchangeVars>,
}

impl MicrogridVars {
    /// Every variable id this microgrid owns, in declaration order.
    pub fn all_ids(&self) -> Vec<VarId> {
        let mut ids = Vec::new();
        for g in &self.generators {
            ids.extend(g.power.iter().chain(&g.on).chain(&g.startup));
        }
        for b in &self.storage {
            ids.extend(
                b.charge
                    .iter()
                    .chain(&b.discharge)
                    .chain(&b.charging)
                    .chain(&b.discharging)
                    .chain(&b.level),
            );
        }
        ids.extend(
            self.grid_import
                .iter()
                .chain(&self.grid_export)
                .chain(&self.net_exchange)
                .chain(&self.import_flag)
                .chain(&self.export_flag),
        );
        for e in &self.exchanges {
            ids.extend(e.import.iter().chain(&e.export));
        }
        ids
    }

    pub fn exchange_with(&self, neighbor: usize) -> Option<&ExchangeVars> {
        self.exchanges.iter().find(|e| e.neighbor == neighbor)
    }
}

/// Declares all variables of microgrid position `m`, with exchange variables
/// towards each entry of `neighbors`.
pub fn declare_microgrid_vars(model: &mut ModelIR, s: &NetworkScenario, m: usize, neighbors: &[usize]) -> MicrogridVars {
    let mg = s.microgrid(m);
    let horizon = s.horizon;
    let id = mg.id;
    let per_t = |model: &mut ModelIR, tag: &str, lo: f64, hi: f64, binary: bool| -> Vec<VarId> {
        (0..horizon)
            .map(|t| {
                let name = format!("m{id}_{tag}_t{}", t + 1);
                if binary {
                    model.add_binary(name)
                } else {
                    model.add_continuous(name, lo, hi)
                }
            })
            .collect()
    };

    let generators = mg
        .generators
        .iter()
        .enumerate()
        .map(|(g, spec)| GeneratorVars {
            power: per_t(model, &format!("pg{}", g + 1), 0.0, spec.p_max, false),
            on: per_t(model, &format!("ug{}", g + 1), 0.0, 1.0, true),
            startup: per_t(model, &format!("vg{}", g + 1), 0.0, 1.0, true),
        })
        .collect();
    let storage = mg
        .storage
        .iter()
        .enumerate()
        .map(|(b, spec)| StorageVars {
            charge: per_t(model, &format!("pc{}", b + 1), 0.0, spec.p_lim, false),
            discharge: per_t(model, &format!("pd{}", b + 1), 0.0, spec.p_lim, false),
            charging: per_t(model, &format!("ec{}", b + 1), 0.0, 1.0, true),
            discharging: per_t(model, &format!("ed{}", b + 1), 0.0, 1.0, true),
            level: per_t(model, &format!("el{}", b + 1), spec.el_min, spec.el_max, false),
        })
        .collect();
    let lim = mg.tie_limit;
    let grid_import = per_t(model, "gridin", 0.0, lim, false);
    let grid_export = per_t(model, "gridout", 0.0, lim, false);
    let net_exchange = per_t(model, "pe", -lim, lim, false);
    let import_flag = per_t(model, "fin", 0.0, 1.0, true);
    let export_flag = per_t(model, "fout", 0.0, 1.0, true);
    let exchanges = neighbors
        .iter()
        .map(|&n| {
            let nid = s.microgrid(n).id;
            ExchangeVars {
                neighbor: n,
                import: per_t(model, &format!("nin{nid}"), 0.0, lim, false),
                export: per_t(model, &format!("nout{nid}"), 0.0, lim, false),
            }
        })
        .collect();
    MicrogridVars {
        owner: m,
        generators,
        storage,
        grid_import,
        grid_export,
        net_exchange,
        import_flag,
        export_flag,
        exchanges,
    }
}

/// Generator limits gated by commitment, startup linking, storage limits
/// gated by charge/discharge status, exclusivity, and the energy recursion.
pub fn build_device_constraints(model: &mut ModelIR, vars: &MicrogridVars, mg: &MicrogridSpec, dt: f64) {
    let id = mg.id;
    for (g, (spec, gv)) in mg.generators.iter().zip(&vars.generators).enumerate() {
        for t in 0..gv.power.len() {
            let tag = format!("m{id}_g{}_t{}", g + 1, t + 1);
            model.add_constraint(
                format!("{tag}_pmin"),
                vec![(gv.power[t], 1.0), (gv.on[t], -spec.p_min)],
                RowSense::Ge,
                0.0,
            );
            model.add_constraint(
                format!("{tag}_pmax"),
                vec![(gv.power[t], 1.0), (gv.on[t], -spec.p_max)],
                RowSense::Le,
                0.0,
            );
            // Units are off before the horizon starts.
            let mut terms = vec![(gv.startup[t], 1.0), (gv.on[t], -1.0)];
            if t > 0 {
                terms.push((gv.on[t - 1], 1.0));
            }
            model.add_constraint(format!("{tag}_start"), terms, RowSense::Ge, 0.0);
        }
    }
    for (b, (spec, sv)) in mg.storage.iter().zip(&vars.storage).enumerate() {
        for t in 0..sv.level.len() {
            let tag = format!("m{id}_b{}_t{}", b + 1, t + 1);
            model.add_constraint(
                format!("{tag}_chg"),
                vec![(sv.charge[t], 1.0), (sv.charging[t], -spec.p_lim)],
                RowSense::Le,
                0.0,
            );
            model.add_constraint(
                format!("{tag}_dis"),
                vec![(sv.discharge[t], 1.0), (sv.discharging[t], -spec.p_lim)],
                RowSense::Le,
                0.0,
            );
            model.add_constraint(
                format!("{tag}_excl"),
                vec![(sv.charging[t], 1.0), (sv.discharging[t], 1.0)],
                RowSense::Le,
                1.0,
            );
            let mut terms = vec![
                (sv.level[t], 1.0),
                (sv.charge[t], -dt * spec.eta_c),
                (sv.discharge[t], dt / spec.eta_d),
            ];
            let rhs = if t == 0 {
                spec.initial_level()
            } else {
                terms.push((sv.level[t - 1], -1.0));
                0.0
            };
            model.add_constraint(format!("{tag}_level"), terms, RowSense::Eq, rhs);
        }
    }
}

/// Adds the microgrid operating cost to the model objective; network
/// payments at the network price are included when requested.
pub fn build_local_objective(
    model: &mut ModelIR,
    vars: &MicrogridVars,
    mg: &MicrogridSpec,
    s: &NetworkScenario,
    include_network_terms: bool,
) {
    let p = &s.prices;
    for (spec, gv) in mg.generators.iter().zip(&vars.generators) {
        for t in 0..s.horizon {
            model.add_objective_term(gv.startup[t], spec.startup_cost);
            model.add_objective_term(gv.on[t], s.dt * spec.noload_cost);
            model.add_objective_term(gv.power[t], s.dt * spec.cost);
        }
    }
    for t in 0..s.horizon {
        model.add_objective_term(vars.grid_import[t], p.grid_buy[t]);
        model.add_objective_term(vars.grid_export[t], -p.grid_sell[t]);
        if include_network_terms {
            for e in &vars.exchanges {
                model.add_objective_term(e.import[t], p.network_price[t]);
                model.add_objective_term(e.export[t], -p.network_price[t]);
            }
        }
    }
}

/// Power balance: local supply plus net imports meets the net load.
pub fn build_balance(model: &mut ModelIR, vars: &MicrogridVars, mg: &MicrogridSpec, networked: bool) {
    for t in 0..mg.net_load.len() {
        let mut terms: Vec<(VarId, f64)> = vars.generators.iter().map(|g| (g.power[t], 1.0)).collect();
        for b in &vars.storage {
            terms.push((b.discharge[t], 1.0));
            terms.push((b.charge[t], -1.0));
        }
        terms.push((vars.grid_import[t], 1.0));
        terms.push((vars.grid_export[t], -1.0));
        if networked {
            for e in &vars.exchanges {
                terms.push((e.import[t], 1.0));
                terms.push((e.export[t], -1.0));
            }
        }
        model.add_constraint(
            format!("m{}_t{}_balance", mg.id, t + 1),
            terms,
            RowSense::Eq,
            mg.net_load[t],
        );
    }
}

/// Net exchange definition, tie-line limit, and import/export gating with
/// big-M equal to the tie-line limit.
pub fn build_network_constraints(model: &mut ModelIR, vars: &MicrogridVars, mg: &MicrogridSpec) {
    let lim = mg.tie_limit;
    for t in 0..vars.net_exchange.len() {
        let tag = format!("m{}_t{}", mg.id, t + 1);
        let mut def = vec![
            (vars.net_exchange[t], 1.0),
            (vars.grid_import[t], -1.0),
            (vars.grid_export[t], 1.0),
        ];
        for e in &vars.exchanges {
            def.push((e.import[t], -1.0));
            def.push((e.export[t], 1.0));
        }
        // The +-lim range of P^E is carried by its variable bounds.
        model.add_constraint(format!("{tag}_pe"), def, RowSense::Eq, 0.0);
        for e in &vars.exchanges {
            model.add_constraint(
                format!("{tag}_nin{}", e.neighbor + 1),
                vec![(e.import[t], 1.0), (vars.import_flag[t], -lim)],
                RowSense::Le,
                0.0,
            );
            model.add_constraint(
                format!("{tag}_nout{}", e.neighbor + 1),
                vec![(e.export[t], 1.0), (vars.export_flag[t], -lim)],
                RowSense::Le,
                0.0,
            );
        }
        model.add_constraint(
            format!("{tag}_gridin"),
            vec![(vars.grid_import[t], 1.0), (vars.import_flag[t], -lim)],
            RowSense::Le,
            0.0,
        );
        model.add_constraint(
            format!("{tag}_gridout"),
            vec![(vars.grid_export[t], 1.0), (vars.export_flag[t], -lim)],
            RowSense::Le,
            0.0,
        );
        model.add_constraint(
            format!("{tag}_flags"),
            vec![(vars.import_flag[t], 1.0), (vars.export_flag[t], 1.0)],
            RowSense::Le,
            1.0,
        );
    }
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: ModelIR,
    /// One entry per microgrid present in the model.
    pub vars: Vec<MicrogridVars>,
}

/// One microgrid trading only with the main grid.
pub fn build_standalone(s: &NetworkScenario, m: usize) -> BuiltModel {
    let mg = s.microgrid(m);
    let mut model = ModelIR::new(format!("mg{}", mg.id));
    let vars = declare_microgrid_vars(&mut model, s, m, &[]);
    build_device_constraints(&mut model, &vars, mg, s.dt);
    build_balance(&mut model, &vars, mg, false);
    build_network_constraints(&mut model, &vars, mg);
    build_local_objective(&mut model, &vars, mg, s, false);
    BuiltModel {
        model,
        vars: vec![vars],
    }
}

/// The centralized model: every microgrid plus bilateral consistency of
/// all directed exchanges.
pub fn build_cem(s: &NetworkScenario) -> BuiltModel {
    let count = s.num_microgrids();
    let mut model = ModelIR::new("cem");
    let vars: Vec<MicrogridVars> = (0..count)
        .map(|m| {
            let neighbors: Vec<usize> = (0..count).filter(|&n| n != m).collect();
            declare_microgrid_vars(&mut model, s, m, &neighbors)
        })
        .collect();
    for (m, v) in vars.iter().enumerate() {
        let mg = s.microgrid(m);
        build_device_constraints(&mut model, v, mg, s.dt);
        build_balance(&mut model, v, mg, true);
        build_network_constraints(&mut model, v, mg);
        build_local_objective(&mut model, v, mg, s, true);
    }
    for m in 0..count {
        for e in &vars[m].exchanges {
            let n = e.neighbor;
            let back = vars[n].exchange_with(m).expect("complete exchange graph");
            for t in 0..s.horizon {
                model.add_constraint(
                    format!("m{}_m{}_t{}_node", m + 1, n + 1, t + 1),
                    vec![(e.import[t], 1.0), (back.export[t], -1.0)],
                    RowSense::Eq,
                    0.0,
                );
            }
        }
    }
    BuiltModel { model, vars }
}

impl BuiltModel {
    /// Solves the model (with an integer-fixed LP polish) and extracts one
    /// schedule per microgrid it contains.
    pub fn solve(
        &self,
        num_microgrids: usize,
        backend: Backend,
        opts: &SolveOptions,
    ) -> Result<(Vec<DispatchSolution>, SolveResult), DispatchError> {
        let result = backend.solve_polished(&self.model, opts)?;
        match result.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(DispatchError::Infeasible(self.model.name.clone())),
            status if !result.has_solution() => {
                return Err(DispatchError::NoSolution {
                    model: self.model.name.clone(),
                    status,
                })
            }
            _ => {}
        }
        let solutions = self
            .vars
            .iter()
            .map(|v| DispatchSolution::extract(v, &result.values, num_microgrids))
            .collect();
        Ok((solutions, result))
    }
}

/// How the quadratic consensus penalty is linearized.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PwlLayout {
    /// `cuts` tangent cuts spread evenly over the variable's bounds.
    Uniform { cuts: usize },
    /// `cuts` tangent points clustered geometrically around the neighbor's
    /// value, encoded as bounded segments. The neighbor's value is a kink of
    /// the envelope, so an agent that is nearly indifferent lands on it exactly.
    Centered { cuts: usize, min_offset: f64 },
}

impl PwlLayout {
    pub fn cuts(&self) -> usize {
        match *self {
            PwlLayout::Uniform { cuts } | PwlLayout::Centered { cuts, .. } => cuts,
        }
    }

    fn add(&self, model: &mut ModelIR, x: VarId, c: f64, weight: f64, extra: &[f64]) -> Result<Option<VarId>, PwlError> {
        match *self {
            PwlLayout::Uniform { cuts } if extra.is_empty() => add_pwl_quadratic(model, x, c, weight, cuts),
            PwlLayout::Uniform { cuts } => {
                let v = model.var(x);
                let h = (v.upper - v.lower) / (cuts.max(2) - 1) as f64;
                let mut points: Vec<f64> = (0..cuts.max(2)).map(|i| v.lower + i as f64 * h).collect();
                points.extend_from_slice(extra);
                add_pwl_quadratic_at(model, x, c, weight, &points)
            }
            PwlLayout::Centered { cuts, min_offset } => {
                let v = model.var(x);
                let mut points = centered_tangent_points(c, v.lower, v.upper, cuts, min_offset);
                points.extend_from_slice(extra);
                add_pwl_quadratic_segments(model, x, c, weight, &points)
            }
        }
    }
}

/// What agent `owner` knows about one neighbor when it solves its subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTerms {
    pub neighbor: usize,
    /// Neighbor's latest export towards the owner, per interval.
    pub their_export: Vec<f64>,
    /// Neighbor's latest import from the owner, per interval.
    pub their_import: Vec<f64>,
    /// Multiplier on `owner imports - neighbor exports`.
    pub y_owner_import: Vec<f64>,
    /// Multiplier on `neighbor imports - owner exports`.
    pub y_neighbor_import: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemContext {
    pub owner: usize,
    pub rho: f64,
    pub neighbors: Vec<NeighborTerms>,
}

/// The owner's augmented-Lagrangian subproblem. Contains only the owner's
/// variables; neighbor data enters as constants in the objective.
pub fn build_subproblem(ctx: &SubproblemContext, s: &NetworkScenario, layout: PwlLayout) -> Result<BuiltModel, PwlError> {
    build_subproblem_refined(ctx, s, layout, &[])
}

/// [`build_subproblem`] with additional tangent points per penalty block,
/// indexed in block order (neighbor, interval, import then export).
pub fn build_subproblem_refined(
    ctx: &SubproblemContext,
    s: &NetworkScenario,
    layout: PwlLayout,
    extra: &[Vec<f64>],
) -> Result<BuiltModel, PwlError> {
    let m = ctx.owner;
    let mg = s.microgrid(m);
    let neighbor_ids: Vec<usize> = ctx.neighbors.iter().map(|nt| nt.neighbor).collect();
    let mut model = ModelIR::new(format!("sub{}", mg.id));
    let vars = declare_microgrid_vars(&mut model, s, m, &neighbor_ids);
    build_device_constraints(&mut model, &vars, mg, s.dt);
    build_balance(&mut model, &vars, mg, true);
    build_network_constraints(&mut model, &vars, mg);
    build_local_objective(&mut model, &vars, mg, s, true);

    let weight = 0.5 * ctx.rho;
    let none: &[f64] = &[];
    let mut block = 0;
    let mut next_extra = || {
        let pts = extra.get(block).map_or(none, Vec::as_slice);
        block += 1;
        pts
    };
    for (nt, e) in ctx.neighbors.iter().zip(&vars.exchanges) {
        for t in 0..s.horizon {
            model.add_objective_term(e.import[t], nt.y_owner_import[t]);
            model.add_objective_term(e.export[t], -nt.y_neighbor_import[t]);
            // Neighbor values outside the owner's box are clamped for the cut layout;
            // the penalty center itself stays exact.
            layout.add(&mut model, e.import[t], nt.their_export[t], weight, next_extra())?;
            layout.add(&mut model, e.export[t], nt.their_import[t], weight, next_extra())?;
        }
    }
    Ok(BuiltModel {
        model,
        vars: vec![vars],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Backend, SolveOptions, SolveStatus};
    use crate::scenario::{GeneratorSpec, PriceSchedule, StorageSpec};

    fn gen(p_min: f64, p_max: f64) -> GeneratorSpec {
        GeneratorSpec {
            p_min,
            p_max,
            cost: 0.33,
            startup_cost: 15.0,
            noload_cost: 11.0,
        }
    }

    fn one_mg(net_load: Vec<f64>, generators: Vec<GeneratorSpec>, storage: Vec<StorageSpec>, tie: f64) -> NetworkScenario {
        let horizon = net_load.len();
        NetworkScenario {
            name: None,
            description: None,
            horizon,
            dt: 1.0,
            prices: PriceSchedule::flat(horizon, 0.5, 0.1, 0.3),
            microgrids: vec![crate::scenario::MicrogridSpec {
                id: 1,
                tie_limit: tie,
                net_load,
                generators,
                storage,
                components: None,
            }],
        }
    }

    fn solve(model: &ModelIR) -> crate::lp::SolveResult {
        Backend::Highs.solve(model, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn generator_gating() {
        let s = one_mg(vec![0.0], vec![gen(100.0, 650.0)], vec![], 1000.0);
        let b = build_standalone(&s, 0);
        let gv = &b.vars[0].generators[0];
        let mut m = b.model.clone();
        m.set_bounds(gv.on[0], 1.0, 1.0);
        m.set_bounds(gv.power[0], 50.0, 50.0);
        assert_eq!(solve(&m).status, SolveStatus::Infeasible);
        m.set_bounds(gv.power[0], 100.0, 650.0);
        assert_eq!(solve(&m).status, SolveStatus::Optimal);
        let mut m = b.model.clone();
        m.set_bounds(gv.on[0], 0.0, 0.0);
        m.set_bounds(gv.power[0], 1.0, 650.0);
        assert_eq!(solve(&m).status, SolveStatus::Infeasible);
    }

    #[test]
    fn cold_start_cost_of_one_hour_at_full_output() {
        // Net load 650 with expensive grid: run the unit, 15 + 11 + 0.33 * 650.
        let mut s = one_mg(vec![650.0], vec![gen(100.0, 650.0)], vec![], 1000.0);
        s.prices = PriceSchedule::flat(1, 10.0, 0.0, 1.0);
        let r = solve(&build_standalone(&s, 0).model);
        assert!((r.objective - 240.5).abs() < 1e-6, "{}", r.objective);
    }

    #[test]
    fn storage_energy_recursion() {
        let st = StorageSpec {
            p_lim: 200.0,
            el_min: 0.0,
            el_max: 1000.0,
            eta_c: 0.96,
            eta_d: 0.98,
            el_init: Some(500.0),
            comment: None,
        };
        let s = one_mg(vec![0.0], vec![], vec![st], 1000.0);
        let b = build_standalone(&s, 0);
        let sv = &b.vars[0].storage[0];
        let mut m = b.model.clone();
        m.set_bounds(sv.charge[0], 100.0, 100.0);
        let r = solve(&m);
        assert!((r.values[sv.level[0].0] - 596.0).abs() < 1e-6);
        let mut m = b.model.clone();
        m.set_bounds(sv.discharge[0], 98.0, 98.0);
        let r = solve(&m);
        assert!((r.values[sv.level[0].0] - 400.0).abs() < 1e-6);
    }

    #[test]
    fn balance_and_tie_limit() {
        let s = one_mg(vec![350.0], vec![gen(0.0, 650.0)], vec![], 1000.0);
        let b = build_standalone(&s, 0);
        let v = &b.vars[0];
        let mut m = b.model.clone();
        m.set_bounds(v.grid_import[0], 0.0, 0.0);
        let r = solve(&m);
        assert!((r.values[v.generators[0].power[0].0] - 350.0).abs() < 1e-6);

        let s = one_mg(vec![-20.0], vec![], vec![], 1000.0);
        let b = build_standalone(&s, 0);
        let r = solve(&b.model);
        assert!((r.values[b.vars[0].grid_export[0].0] - 20.0).abs() < 1e-6);

        let s = one_mg(vec![1200.0], vec![], vec![], 1000.0);
        assert_eq!(solve(&build_standalone(&s, 0).model).status, SolveStatus::Infeasible);
        let s = one_mg(vec![1200.0], vec![gen(0.0, 100.0)], vec![], 1000.0);
        assert_eq!(solve(&build_standalone(&s, 0).model).status, SolveStatus::Infeasible);
    }

    #[test]
    fn idle_microgrid_costs_nothing() {
        let s = one_mg(vec![0.0, 0.0], vec![gen(100.0, 650.0)], vec![], 1000.0);
        let r = solve(&build_standalone(&s, 0).model);
        assert!(r.objective.abs() < 1e-9);
    }

    #[test]
    fn variable_names_are_deterministic() {
        let s = one_mg(vec![1.0], vec![gen(0.0, 5.0)], vec![], 10.0);
        let a = build_standalone(&s, 0).model;
        let b = build_standalone(&s, 0).model;
        assert_eq!(a, b);
        assert_eq!(a.var(VarId(0)).name, "m1_pg1_t1");
    }
}
