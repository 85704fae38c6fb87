use serde::{Deserialize, Serialize};

/// Euclidean norm of the stacked primal and dual residuals.
pub fn solution_quality(r: &[f64], s: &[f64]) -> f64 {
    r.iter().chain(s).map(|v| v * v).sum::<f64>().sqrt()
}

/// Mean relative absolute change of the last `window` objective steps, or
/// `None` while fewer than `window + 1` values exist.
pub fn objective_rate(objectives: &[f64], window: usize) -> Option<f64> {
    let k = objectives.len();
    if window == 0 || k < window + 1 {
        return None;
    }
    let sum: f64 = (k - window..k)
        .map(|i| (objectives[i] - objectives[i - 1]).abs() / objectives[i - 1].abs().max(1e-12))
        .sum();
    Some(sum / window as f64)
}

/// Mean of the last `window` values, or `None` while fewer exist.
pub fn trailing_mean(values: &[f64], window: usize) -> Option<f64> {
    if window == 0 || values.len() < window {
        return None;
    }
    Some(values[values.len() - window..].iter().sum::<f64>() / window as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopDecision {
    /// Fewer than `k_s + 1` iterations recorded.
    WindowNotFull,
    /// The objective is still moving faster than `beta`.
    ObjectiveChanging,
    /// The objective has settled but the current quality is not below its recent mean.
    QualityAboveMean,
    Stop,
}

impl StopDecision {
    pub fn should_stop(self) -> bool {
        self == StopDecision::Stop
    }
}

/// Combined objective/quality stopping rule over histories ending at the
/// current iteration. A current quality of exactly zero always qualifies.
pub fn stopping_decision(objectives: &[f64], epsilons: &[f64], k_s: usize, beta: f64) -> StopDecision {
    let Some(rate) = objective_rate(objectives, k_s) else {
        return StopDecision::WindowNotFull;
    };
    if rate >= beta {
        return StopDecision::ObjectiveChanging;
    }
    let (Some(mean), Some(&current)) = (trailing_mean(epsilons, k_s), epsilons.last()) else {
        return StopDecision::WindowNotFull;
    };
    if current < mean || current == 0.0 {
        StopDecision::Stop
    } else {
        StopDecision::QualityAboveMean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quality_metric() {
        assert_eq!(solution_quality(&[3.0], &[4.0]), 5.0);
        assert_eq!(solution_quality(&[0.0; 4], &[0.0; 4]), 0.0);
        assert_eq!(solution_quality(&[], &[]), 0.0);
        assert_eq!(solution_quality(&[6.0], &[8.0]), 2.0 * solution_quality(&[3.0], &[4.0]));
    }

    #[test]
    fn rate_and_mean() {
        assert_eq!(objective_rate(&[100.0, 110.0, 99.0], 2), Some((0.1 + 0.1) / 2.0));
        assert_eq!(objective_rate(&[1.0, 2.0], 2), None);
        assert_eq!(trailing_mean(&[1.0, 2.0, 3.0, 4.0], 2), Some(3.5));
        assert_eq!(trailing_mean(&[1.0], 2), None);
    }

    #[test]
    fn three_branches() {
        let flat = vec![10.0; 6];
        let falling = [0.5, 0.4, 0.3, 0.2, 0.1, 0.05];
        assert_eq!(stopping_decision(&flat, &falling, 5, 1e-3), StopDecision::Stop);
        assert_eq!(stopping_decision(&flat[..4], &falling[..4], 5, 1e-3), StopDecision::WindowNotFull);
        let peak = [0.1, 0.1, 0.1, 0.1, 0.1, 0.9];
        assert_eq!(stopping_decision(&flat, &peak, 5, 1e-3), StopDecision::QualityAboveMean);
        let moving = [10.0, 11.0, 10.0, 11.0, 10.0, 11.0];
        assert_eq!(stopping_decision(&moving, &falling, 5, 1e-3), StopDecision::ObjectiveChanging);
    }
}
