//! Convergence analytics: moving averages, normalized objectives, penalty
//! sweeps and trace/report files.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lp::Backend;
use crate::obadmm::{run_admm, AdmmConfig, AdmmOutcome, AdmmStatus, AdmmTrace, StoppingRule, TraceRow};
use crate::scenario::NetworkScenario;

/// Trailing moving average; entry `i` is the mean of `series[i..i + window]`.
/// Empty when `window` is zero or longer than the series.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || window > series.len() {
        return Vec::new();
    }
    series.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("normalization against a zero reference objective")]
pub struct ZeroReference;

pub fn normalized_objective(dem: f64, cem: f64) -> Result<f64, ZeroReference> {
    if cem == 0.0 {
        Err(ZeroReference)
    } else {
        Ok(dem / cem)
    }
}

/// How each sweep point is run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    /// Stop once quality reaches `epsilon_th`.
    Reference { epsilon_th: f64 },
    /// Run exactly `iterations` iterations.
    FixedIters { iterations: usize },
    /// The combined objective/quality rule.
    Obadmm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: Option<f64>,
    pub normalized_objective: Option<f64>,
    pub final_epsilon: Option<f64>,
    /// Mean quality over the last 100 iterations (fixed-iteration mode).
    pub trailing_epsilon: Option<f64>,
    pub error: Option<String>,
}

/// One independent run per penalty value; failures are recorded in the row.
pub fn sweep_penalty(
    s: &NetworkScenario,
    rhos: &[f64],
    mode: SweepMode,
    base: &AdmmConfig,
    backend: Backend,
    cem_objective: f64,
) -> Vec<SweepRow> {
    rhos.iter()
        .map(|&rho| {
            let mut cfg = AdmmConfig { rho, ..*base };
            let rule = match mode {
                SweepMode::Reference { epsilon_th } => {
                    cfg.epsilon_th = epsilon_th;
                    StoppingRule::Threshold
                }
                SweepMode::FixedIters { iterations } => {
                    cfg.max_iters = iterations;
                    cfg.k_s = cfg.k_s.min(iterations);
                    StoppingRule::FixedIterations
                }
                SweepMode::Obadmm => StoppingRule::Combined,
            };
            match run_admm(s, &cfg, backend, rule) {
                Ok(out) => sweep_row(rho, &out, mode, cem_objective),
                Err(e) => SweepRow {
                    rho,
                    iterations: 0,
                    converged: false,
                    objective: None,
                    normalized_objective: None,
                    final_epsilon: None,
                    trailing_epsilon: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn sweep_row(rho: f64, out: &AdmmOutcome, mode: SweepMode, cem: f64) -> SweepRow {
    let eps = out.trace.epsilons();
    let trailing = match mode {
        SweepMode::FixedIters { .. } => {
            let w = eps.len().min(100);
            moving_average(&eps[eps.len() - w..], w).first().copied()
        }
        _ => None,
    };
    SweepRow {
        rho,
        iterations: out.iterations(),
        converged: out.status == AdmmStatus::Converged,
        objective: Some(out.objective()),
        normalized_objective: normalized_objective(out.objective(), cem).ok(),
        final_epsilon: Some(out.epsilon()),
        trailing_epsilon: trailing,
        error: None,
    }
}

/// Pairs of consecutive rows (by ascending rho) where the iteration count grows.
pub fn monotonicity_exceptions(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    sorted
        .windows(2)
        .filter(|w| w[1].iterations > w[0].iterations)
        .map(|w| (w[0].rho, w[1].rho))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Columns of the convergence trace file.
pub const TRACE_COLUMNS: [&str; 9] = [
    "k",
    "objective",
    "normalized_objective",
    "epsilon",
    "max_abs_r",
    "max_abs_s",
    "obj_rate_ma",
    "eps_ma",
    "stopped",
];

/// Serializes the trace rows as CSV. Floats use the shortest representation
/// that reads back to the same value.
pub fn trace_csv(trace: &AdmmTrace) -> Result<String, OutputError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for row in &trace.rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_trace(trace: &AdmmTrace, path: impl AsRef<Path>) -> Result<(), OutputError> {
    std::fs::write(path, trace_csv(trace)?)?;
    Ok(())
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, OutputError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<TraceRow>, _>>()?)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>, OutputError> {
    parse_trace(&std::fs::read_to_string(path)?)
}

/// Writes any serializable summary as pretty JSON.
pub fn emit_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2), vec![1.5, 2.5, 3.5]);
        assert_eq!(moving_average(&[2.0; 5], 3), vec![2.0; 3]);
        assert_eq!(moving_average(&[1.0, 2.0, 6.0], 3), vec![3.0]);
        assert!(moving_average(&[1.0], 2).is_empty());
        assert!(moving_average(&[1.0], 0).is_empty());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalized_objective(5.0, 5.0), Ok(1.0));
        assert_eq!(normalized_objective(1.0, 0.0), Err(ZeroReference));
    }

    fn row(k: usize) -> TraceRow {
        TraceRow {
            k,
            objective: 3603.1 + 1.0 / 3.0 * k as f64,
            normalized_objective: if k > 1 { Some(1.000_13) } else { None },
            epsilon: 0.019_7 / k as f64,
            max_abs_r: 1e-12,
            max_abs_s: 0.0,
            obj_rate_ma: None,
            eps_ma: Some(0.1),
            stopped: k == 3,
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let text = trace_csv(&AdmmTrace::default()).unwrap();
        assert_eq!(text, format!("{}\n", TRACE_COLUMNS.join(",")));
        assert!(parse_trace(&text).unwrap().is_empty());
    }

    #[test]
    fn trace_round_trip() {
        let trace = AdmmTrace {
            rows: (1..=3).map(row).collect(),
            ..AdmmTrace::default()
        };
        let text = trace_csv(&trace).unwrap();
        assert_eq!(parse_trace(&text).unwrap(), trace.rows);
    }

    #[test]
    fn monotonicity_report() {
        let mk = |rho: f64, iterations: usize| SweepRow {
            rho,
            iterations,
            converged: true,
            objective: None,
            normalized_objective: None,
            final_epsilon: None,
            trailing_epsilon: None,
            error: None,
        };
        let rows = [mk(1.0, 3), mk(1e-3, 7), mk(1e-2, 9), mk(1e-4, 25)];
        assert_eq!(monotonicity_exceptions(&rows), vec![(1e-3, 1e-2)]);
    }
}
