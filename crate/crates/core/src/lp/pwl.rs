//! Epigraph tangent-cut approximation of `weight * (x - c)^2`.
//!
//! The block adds one variable `z` with objective coefficient `weight` and one
//! row `z >= (p - c)^2 + 2 (p - c)(x - p)` per tangent point `p`. The envelope
//! of the tangents under-approximates the parabola, touches it at every
//! tangent point, and with uniform spacing `h` misses it by at most `h^2 / 4`
//! (attained midway between neighbouring points).

use super::{ModelIR, RowSense, VarId};

#[derive(Debug, Clone, PartialEq)]
pub struct PwlBlock {
    pub x: VarId,
    pub z: VarId,
    pub center: f64,
    pub weight: f64,
    pub lower: f64,
    pub upper: f64,
    pub points: Vec<f64>,
}

impl PwlBlock {
    /// Value of the tangent envelope at `x`.
    pub fn envelope(&self, x: f64) -> f64 {
        tangent_envelope(&self.points, self.center, x)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PwlError {
    #[error("variable `{0}` needs finite bounds for a PWL block")]
    Unbounded(String),
    #[error("a PWL block needs at least 2 cuts, got {0}")]
    TooFewCuts(usize),
    #[error("negative penalty weight {0}")]
    NegativeWeight(f64),
}

/// Max over tangents of `(x - c)^2` taken at `points`.
pub fn tangent_envelope(points: &[f64], c: f64, x: f64) -> f64 {
    points
        .iter()
        .map(|&p| (p - c) * (p - c) + 2.0 * (p - c) * (x - p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Uniform layout: `cuts` tangent points `L + i (U - L) / (cuts - 1)`.
pub fn add_pwl_quadratic(
    model: &mut ModelIR,
    x: VarId,
    c: f64,
    weight: f64,
    cuts: usize,
) -> Result<Option<VarId>, PwlError> {
    if cuts < 2 {
        return Err(PwlError::TooFewCuts(cuts));
    }
    let (lo, hi) = finite_bounds(model, x)?;
    let h = (hi - lo) / (cuts - 1) as f64;
    let points: Vec<f64> = (0..cuts).map(|i| lo + i as f64 * h).collect();
    add_pwl_quadratic_at(model, x, c, weight, &points)
}

/// Adds `weight * envelope(x)` to the objective using explicit tangent points.
/// Returns the epigraph variable, or `None` when `weight == 0`.
pub fn add_pwl_quadratic_at(
    model: &mut ModelIR,
    x: VarId,
    c: f64,
    weight: f64,
    points: &[f64],
) -> Result<Option<VarId>, PwlError> {
    if weight < 0.0 {
        return Err(PwlError::NegativeWeight(weight));
    }
    if points.len() < 2 {
        return Err(PwlError::TooFewCuts(points.len()));
    }
    let (lo, hi) = finite_bounds(model, x)?;
    if weight == 0.0 {
        return Ok(None);
    }
    let base = model.var(x).name.clone();
    let (zlo, zhi) = envelope_range(points, c, lo, hi);
    let z = model.add_continuous(format!("pwl_{base}"), zlo, zhi);
    for (i, &p) in points.iter().enumerate() {
        // z - 2(p - c) x >= c^2 - p^2
        model.add_constraint(
            format!("pwl_{base}_{i}"),
            vec![(z, 1.0), (x, -2.0 * (p - c))],
            RowSense::Ge,
            c * c - p * p,
        );
    }
    model.add_objective_term(z, weight);
    model.push_pwl_block(PwlBlock {
        x,
        z,
        center: c,
        weight,
        lower: lo,
        upper: hi,
        points: points.to_vec(),
    });
    Ok(Some(z))
}

/// Same envelope as [`add_pwl_quadratic_at`], encoded with bounded segment
/// variables instead of one row per tangent.
///
/// `x = L + sum d_i` with `d_i` in `[0, len_i]` between consecutive kinks and
/// `z = envelope(L) + sum slope_i d_i`. Slopes increase, so any minimizer
/// fills segments in order and `z` equals the envelope at `x`. The block
/// costs two rows regardless of the number of tangent points.
pub fn add_pwl_quadratic_segments(
    model: &mut ModelIR,
    x: VarId,
    c: f64,
    weight: f64,
    points: &[f64],
) -> Result<Option<VarId>, PwlError> {
    if weight < 0.0 {
        return Err(PwlError::NegativeWeight(weight));
    }
    if points.len() < 2 {
        return Err(PwlError::TooFewCuts(points.len()));
    }
    let (lo, hi) = finite_bounds(model, x)?;
    if weight == 0.0 {
        return Ok(None);
    }
    let mut pts = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // Kinks of the envelope inside (lo, hi), each tangent owning the stretch
    // between its neighbouring kinks.
    let mut edges = vec![lo];
    let mut slopes = Vec::new();
    for (i, &p) in pts.iter().enumerate() {
        let right = pts.get(i + 1).map_or(hi, |&q| (0.5 * (p + q)).clamp(lo, hi));
        let left = *edges.last().unwrap();
        if right > left {
            edges.push(right);
            slopes.push(2.0 * (p - c));
        }
    }
    let base = model.var(x).name.clone();
    let (zlo, zhi) = envelope_range(&pts, c, lo, hi);
    let z = model.add_continuous(format!("pwl_{base}"), zlo, zhi);
    let mut fill = vec![(x, 1.0)];
    let mut value = vec![(z, 1.0)];
    for (i, (w, &slope)) in edges.windows(2).zip(&slopes).enumerate() {
        let d = model.add_continuous(format!("pwl_{base}_s{i}"), 0.0, w[1] - w[0]);
        fill.push((d, -1.0));
        value.push((d, -slope));
    }
    model.add_constraint(format!("pwl_{base}_fill"), fill, RowSense::Eq, lo);
    model.add_constraint(format!("pwl_{base}_value"), value, RowSense::Eq, tangent_envelope(&pts, c, lo));
    model.add_objective_term(z, weight);
    model.push_pwl_block(PwlBlock {
        x,
        z,
        center: c,
        weight,
        lower: lo,
        upper: hi,
        points: pts,
    });
    Ok(Some(z))
}

/// Tangent points clustered geometrically around `c`, for penalties whose
/// minimizer is expected near the center.
///
/// Each side of `c` inside `[lower, upper]` gets points at offsets growing
/// geometrically from `min_offset` to the distance to the bound, so `c` itself
/// is a breakpoint of the envelope and the error near `c` is at most
/// `min_offset^2`. Points are sorted and deduplicated.
pub fn centered_tangent_points(c: f64, lower: f64, upper: f64, count: usize, min_offset: f64) -> Vec<f64> {
    let c = c.clamp(lower, upper);
    let left = c - lower;
    let right = upper - c;
    let count = count.max(2);
    let (n_left, n_right) = match (left > min_offset, right > min_offset) {
        (true, true) => (count / 2, count - count / 2),
        (true, false) => (count, 0),
        (false, true) => (0, count),
        (false, false) => (0, 0),
    };
    let mut pts = Vec::with_capacity(count + 1);
    for (n, span, dir) in [(n_left, left, -1.0), (n_right, right, 1.0)] {
        if n == 0 {
            continue;
        }
        if n == 1 {
            pts.push(c + dir * span);
            continue;
        }
        let ratio = (span / min_offset).powf(1.0 / (n - 1) as f64);
        for j in 0..n {
            let d = if j + 1 == n { span } else { min_offset * ratio.powi(j as i32) };
            pts.push(c + dir * d);
        }
    }
    if pts.len() < 2 {
        // Degenerate interval: tangents at both ends still give a valid block.
        pts = vec![lower, upper];
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * (1.0 + a.abs()));
    if pts.len() < 2 {
        pts.push(pts[0]);
    }
    pts
}

fn finite_bounds(model: &ModelIR, x: VarId) -> Result<(f64, f64), PwlError> {
    let v = model.var(x);
    if v.lower.is_finite() && v.upper.is_finite() {
        Ok((v.lower, v.upper))
    } else {
        Err(PwlError::Unbounded(v.name.clone()))
    }
}

/// Bounds on `z` implied at the optimum: the envelope's range over `[lo, hi]`.
fn envelope_range(points: &[f64], c: f64, lo: f64, hi: f64) -> (f64, f64) {
    // Convex and piecewise linear: the max sits at an end of the interval and
    // the min at an end or at a kink, which for a parabola lies midway
    // between neighbouring tangent points.
    let top = tangent_envelope(points, c, lo).max(tangent_envelope(points, c, hi));
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let bottom = sorted
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .filter(|&k| k > lo && k < hi)
        .chain([lo, hi])
        .map(|x| tangent_envelope(points, c, x))
        .fold(f64::INFINITY, f64::min);
    let slack = 1e-9 * (1.0 + top.abs());
    (bottom - slack, top + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Backend, SolveOptions};

    fn max_gap(points: &[f64], c: f64, lo: f64, hi: f64) -> f64 {
        (0..=10_000)
            .map(|i| lo + (hi - lo) * i as f64 / 10_000.0)
            .map(|x| (x - c) * (x - c) - tangent_envelope(points, c, x))
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_tangents_on_unit_interval() {
        // Tangents at 0 (z >= 0) and 1 (z >= 2x - 1) meet at x = 0.5 with value 0.
        let pts = [0.0, 1.0];
        assert_eq!(tangent_envelope(&pts, 0.0, 0.5), 0.0);
        assert!((max_gap(&pts, 0.0, 0.0, 1.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn five_tangents_gap_is_h_squared_over_four() {
        let pts = [0.0, 0.25, 0.5, 0.75, 1.0];
        assert!((max_gap(&pts, 0.0, 0.0, 1.0) - 0.015625).abs() < 1e-9);
    }

    #[test]
    fn uniform_block_emits_cuts() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 1.0);
        let z = add_pwl_quadratic(&mut m, x, 0.0, 0.5, 5).unwrap().unwrap();
        assert_eq!(m.constraints().len(), 5);
        assert_eq!(m.objective()[z.0], 0.5);
        assert_eq!(m.pwl_blocks()[0].points, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn zero_weight_adds_nothing() {
        let mut m = ModelIR::new("t");
        let x = m.add_continuous("x", 0.0, 1.0);
        assert_eq!(add_pwl_quadratic(&mut m, x, 0.3, 0.0, 4).unwrap(), None);
        assert_eq!(m.num_vars(), 1);
        assert!(m.constraints().is_empty());
    }

    #[test]
    fn errors() {
        let mut m = ModelIR::new("t");
        let free = m.add_continuous("free", 0.0, f64::INFINITY);
        let x = m.add_continuous("x", 0.0, 1.0);
        assert_eq!(
            add_pwl_quadratic(&mut m, free, 0.0, 1.0, 4),
            Err(PwlError::Unbounded("free".into()))
        );
        assert_eq!(add_pwl_quadratic(&mut m, x, 0.0, 1.0, 1), Err(PwlError::TooFewCuts(1)));
    }

    #[test]
    fn pinned_variable_has_zero_penalty() {
        for cuts in [2, 3, 16] {
            let mut m = ModelIR::new("t");
            let x = m.add_continuous("x", 0.4, 0.4);
            add_pwl_quadratic(&mut m, x, 0.4, 1.0, cuts).unwrap();
            let r = Backend::Highs.solve(&m, &SolveOptions::default()).unwrap();
            assert!(r.objective.abs() < 1e-8, "cuts={cuts}: {}", r.objective);
        }
    }

    #[test]
    fn centered_points_make_center_a_breakpoint() {
        let pts = centered_tangent_points(300.0, 0.0, 1000.0, 16, 0.01);
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 1000.0);
        // Envelope at the center is within min_offset^2 of the parabola.
        assert!(tangent_envelope(&pts, 300.0, 300.0).abs() <= 1e-4 + 1e-12);
        assert!(max_gap(&pts, 300.0, 299.0, 301.0) < 0.5);

        let at_bound = centered_tangent_points(0.0, 0.0, 1000.0, 8, 0.01);
        assert_eq!(at_bound.len(), 8);
        assert!(at_bound.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn centered_points_degenerate_interval() {
        let pts = centered_tangent_points(5.0, 5.0, 5.0, 16, 0.01);
        assert_eq!(pts.len(), 2);
    }
}
