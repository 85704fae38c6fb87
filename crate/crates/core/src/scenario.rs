//! Network-of-microgrids scenarios: data model, JSON loading and validation.
//!
//! A scenario file is a JSON document:
//!
//! ```text
//! { "horizon": 24, "dt": 1.0,
//!   "prices": { "grid_buy": [..], "grid_sell": [..], "network_price": [..] },
//!   "microgrids": [ { "id": 1, "tie_limit": 1000.0, "net_load": [..],
//!                     "generators": [ { "p_min", "p_max", "cost", "startup_cost", "noload_cost" } ],
//!                     "storage": [ { "p_lim", "el_min", "el_max", "eta_c", "eta_d", "el_init"? } ] } ] }
//! ```
//!
//! Net load is stored already netted (load minus solar minus wind) and may be
//! negative. Generators with `p_max == 0` are placeholder rows and are dropped
//! on load. Storage starts at `el_init`, or at `el_min` when omitted.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub p_min: f64,
    pub p_max: f64,
    /// Marginal cost, $/kWh.
    pub cost: f64,
    /// $ per start.
    pub startup_cost: f64,
    /// $/h while committed.
    pub noload_cost: f64,
}

impl GeneratorSpec {
    pub fn is_placeholder(&self) -> bool {
        self.p_max == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSpec {
    pub p_lim: f64,
    pub el_min: f64,
    pub el_max: f64,
    pub eta_c: f64,
    pub eta_d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub el_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl StorageSpec {
    pub fn initial_level(&self) -> f64 {
        self.el_init.unwrap_or(self.el_min)
    }
}

/// Optional provenance for a pre-netted load series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLoadComponents {
    pub load: Vec<f64>,
    #[serde(default)]
    pub solar: Vec<f64>,
    #[serde(default)]
    pub wind: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridSpec {
    pub id: usize,
    pub tie_limit: f64,
    pub net_load: Vec<f64>,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub storage: Vec<StorageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<NetLoadComponents>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSchedule {
    pub grid_buy: Vec<f64>,
    pub grid_sell: Vec<f64>,
    pub network_price: Vec<f64>,
}

impl PriceSchedule {
    pub fn flat(horizon: usize, grid_buy: f64, grid_sell: f64, network_price: f64) -> Self {
        Self {
            grid_buy: vec![grid_buy; horizon],
            grid_sell: vec![grid_sell; horizon],
            network_price: vec![network_price; horizon],
        }
    }
}

fn default_horizon() -> usize {
    24
}

fn default_dt() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub prices: PriceSchedule,
    pub microgrids: Vec<MicrogridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Issue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Issue {
            path: path.into(),
            message: message.into(),
        });
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Issue>),
    #[error("index out of range: microgrid {microgrid}, interval {t}")]
    OutOfRange { microgrid: usize, t: usize },
}

/// Reads, normalizes and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<NetworkScenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<NetworkScenario, ScenarioError> {
    parse_raw_scenario(text)?.into_canonical()
}

/// Parses without validating, so every issue can be reported at once.
pub fn parse_raw_scenario(text: &str) -> Result<NetworkScenario, ScenarioError> {
    Ok(serde_json::from_str(text)?)
}

pub fn save_scenario(s: &NetworkScenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, s.to_json()).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Checks every type invariant. Errors block solving; warnings do not.
pub fn validate_scenario(s: &NetworkScenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    let horizon = s.horizon;
    if horizon == 0 {
        r.error("horizon", "horizon must be at least 1");
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        r.error("dt", format!("interval length must be positive, got {}", s.dt));
    }

    let p = &s.prices;
    for (key, series) in [
        ("grid_buy", &p.grid_buy),
        ("grid_sell", &p.grid_sell),
        ("network_price", &p.network_price),
    ] {
        if series.len() != horizon {
            r.error(
                format!("prices.{key}"),
                format!("length mismatch: {} entries for horizon {horizon}", series.len()),
            );
        }
        if let Some(t) = series.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            r.error(format!("prices.{key}[{t}]"), "prices must be finite and non-negative");
        }
    }
    if p.grid_buy.len() == horizon && p.grid_sell.len() == horizon && p.network_price.len() == horizon {
        for t in 0..horizon {
            if p.network_price[t] > p.grid_buy[t] {
                r.warn(
                    format!("prices.network_price[{t}]"),
                    "network price above grid purchase price",
                );
            }
            if p.network_price[t] < p.grid_sell[t] {
                r.warn(
                    format!("prices.network_price[{t}]"),
                    "network price below grid selling price",
                );
            }
        }
    }

    if s.microgrids.is_empty() {
        r.error("microgrids", "a network needs at least one microgrid");
    }
    let mut ids: Vec<usize> = s.microgrids.iter().map(|m| m.id).collect();
    ids.sort_unstable();
    if ids.iter().enumerate().any(|(i, &id)| id != i + 1) {
        r.error("microgrids", format!("ids must be unique and dense 1..M, got {ids:?}"));
    }

    for (i, mg) in s.microgrids.iter().enumerate() {
        let base = format!("microgrids[{i}]");
        if !(mg.tie_limit > 0.0 && mg.tie_limit.is_finite()) {
            r.error(format!("{base}.tie_limit"), "tie-line limit must be positive");
        }
        if mg.net_load.len() != horizon {
            r.error(
                format!("{base}.net_load"),
                format!("length mismatch: {} entries for horizon {horizon}", mg.net_load.len()),
            );
        }
        if let Some(t) = mg.net_load.iter().position(|v| !v.is_finite()) {
            r.error(format!("{base}.net_load[{t}]"), "net load must be finite");
        }
        for (g, gen) in mg.generators.iter().enumerate() {
            let gp = format!("{base}.generators[{g}]");
            if !(0.0 <= gen.p_min && gen.p_min <= gen.p_max) {
                r.error(
                    gp.clone(),
                    format!("generator needs 0 <= p_min <= p_max, got p_min={} p_max={}", gen.p_min, gen.p_max),
                );
            }
            if gen.cost < 0.0 || gen.startup_cost < 0.0 || gen.noload_cost < 0.0 {
                r.error(gp, "generator costs must be non-negative");
            }
        }
        for (b, st) in mg.storage.iter().enumerate() {
            let sp = format!("{base}.storage[{b}]");
            if !(st.eta_c > 0.0 && st.eta_c <= 1.0) || !(st.eta_d > 0.0 && st.eta_d <= 1.0) {
                r.error(sp.clone(), "efficiencies must lie in (0, 1]");
            }
            if st.p_lim < 0.0 {
                r.error(sp.clone(), "power rating must be non-negative");
            }
            let init = st.initial_level();
            if !(0.0 <= st.el_min && st.el_min <= init && init <= st.el_max) {
                r.error(
                    sp,
                    format!(
                        "storage needs 0 <= el_min <= el_init <= el_max, got {} / {} / {}",
                        st.el_min, init, st.el_max
                    ),
                );
            }
        }
    }
    r
}

impl NetworkScenario {
    /// Sorts microgrids by id, drops placeholder generators and validates.
    pub fn into_canonical(mut self) -> Result<Self, ScenarioError> {
        self.microgrids.sort_by_key(|m| m.id);
        for mg in &mut self.microgrids {
            mg.generators.retain(|g| !g.is_placeholder());
        }
        let report = validate_scenario(&self);
        if !report.is_valid() {
            return Err(ScenarioError::Invalid(report.errors));
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn num_microgrids(&self) -> usize {
        self.microgrids.len()
    }

    /// Microgrid at zero-based position `m` (id `m + 1`).
    pub fn microgrid(&self, m: usize) -> &MicrogridSpec {
        &self.microgrids[m]
    }

    /// Stored net load `P^net` of microgrid position `m` at interval `t`.
    pub fn net_load(&self, m: usize, t: usize) -> Result<f64, ScenarioError> {
        self.microgrids
            .get(m)
            .and_then(|mg| mg.net_load.get(t))
            .copied()
            .ok_or(ScenarioError::OutOfRange { microgrid: m, t })
    }

    /// Restricts the scenario to microgrid positions `keep`, renumbering ids.
    pub fn subset(&self, keep: &[usize]) -> NetworkScenario {
        let mut out = self.clone();
        out.microgrids = keep
            .iter()
            .enumerate()
            .map(|(i, &m)| MicrogridSpec {
                id: i + 1,
                ..self.microgrids[m].clone()
            })
            .collect();
        out
    }

    /// Truncates every series to the first `horizon` intervals.
    pub fn truncated(&self, horizon: usize) -> NetworkScenario {
        let mut out = self.clone();
        out.horizon = horizon.min(self.horizon);
        let h = out.horizon;
        out.prices.grid_buy.truncate(h);
        out.prices.grid_sell.truncate(h);
        out.prices.network_price.truncate(h);
        for mg in &mut out.microgrids {
            mg.net_load.truncate(h);
            if let Some(c) = &mut mg.components {
                c.load.truncate(h);
                c.solar.truncate(h);
                c.wind.truncate(h);
            }
        }
        out
    }
}

/// Net load from its components: load minus solar minus wind.
pub fn compose_net_load(load: &[f64], solar: &[f64], wind: &[f64]) -> Vec<f64> {
    load.iter()
        .enumerate()
        .map(|(t, l)| l - solar.get(t).copied().unwrap_or(0.0) - wind.get(t).copied().unwrap_or(0.0))
        .collect()
}

/// The three appendix networks bundled with the crate.
pub fn bundled_case(case: usize) -> Option<NetworkScenario> {
    let text = match case {
        1 => include_str!("../../../cases/case1.json"),
        2 => include_str!("../../../cases/case2.json"),
        3 => include_str!("../../../cases/case3.json"),
        _ => return None,
    };
    Some(parse_scenario(text).expect("bundled cases are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NetworkScenario {
        NetworkScenario {
            name: None,
            description: None,
            horizon: 2,
            dt: 1.0,
            prices: PriceSchedule::flat(2, 0.30, 0.10, 0.20),
            microgrids: vec![MicrogridSpec {
                id: 1,
                tie_limit: 100.0,
                net_load: vec![10.0, -5.0],
                generators: vec![GeneratorSpec {
                    p_min: 0.0,
                    p_max: 50.0,
                    cost: 0.2,
                    startup_cost: 1.0,
                    noload_cost: 1.0,
                }],
                storage: vec![],
                components: None,
            }],
        }
    }

    #[test]
    fn ordered_prices_have_no_warnings() {
        let r = validate_scenario(&tiny());
        assert!(r.is_valid());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn network_price_above_grid_buy_warns() {
        let mut s = tiny();
        s.prices = PriceSchedule::flat(2, 0.30, 0.10, 0.40);
        let r = validate_scenario(&s);
        assert!(r.is_valid());
        assert_eq!(r.warnings.len(), 2);
        assert_eq!(r.warnings[0].message, "network price above grid purchase price");
    }

    #[test]
    fn short_series_is_a_length_mismatch() {
        let mut s = tiny();
        s.horizon = 24;
        s.prices = PriceSchedule::flat(24, 0.3, 0.1, 0.2);
        s.microgrids[0].net_load = vec![1.0; 23];
        let r = validate_scenario(&s);
        assert_eq!(r.errors.len(), 1);
        assert!(r.errors[0].message.starts_with("length mismatch"));
        assert_eq!(r.errors[0].path, "microgrids[0].net_load");
    }

    #[test]
    fn inverted_generator_bounds_name_the_generator() {
        let mut s = tiny();
        s.microgrids[0].generators[0].p_min = 700.0;
        s.microgrids[0].generators[0].p_max = 650.0;
        let err = s.into_canonical().unwrap_err();
        let ScenarioError::Invalid(issues) = err else { panic!() };
        assert_eq!(issues[0].path, "microgrids[0].generators[0]");
    }

    #[test]
    fn ids_must_be_dense() {
        let mut s = tiny();
        s.microgrids[0].id = 2;
        assert!(!validate_scenario(&s).is_valid());
    }

    #[test]
    fn storage_initial_level_defaults_to_minimum() {
        let st = StorageSpec {
            p_lim: 10.0,
            el_min: 3.0,
            el_max: 30.0,
            eta_c: 0.9,
            eta_d: 0.9,
            el_init: None,
            comment: None,
        };
        assert_eq!(st.initial_level(), 3.0);
    }

    #[test]
    fn net_load_composition_and_lookup() {
        assert_eq!(compose_net_load(&[500.0], &[100.0], &[50.0]), vec![350.0]);
        assert_eq!(compose_net_load(&[80.0], &[100.0], &[0.0]), vec![-20.0]);
        assert_eq!(compose_net_load(&[42.0], &[], &[]), vec![42.0]);
        let s = tiny();
        assert_eq!(s.net_load(0, 1).unwrap(), -5.0);
        assert!(matches!(s.net_load(0, 2), Err(ScenarioError::OutOfRange { .. })));
        assert!(matches!(s.net_load(3, 0), Err(ScenarioError::OutOfRange { .. })));
    }
}
