//! Greedy weighted Leja sequences adapted to the input density.
//!
//! The next node maximizes `sqrt(rho(y)) * prod_k |y - y_k|` over `[a, b]`,
//! where the `y_k` are the nodes already placed. The first node maximizes
//! `sqrt(rho)` alone. Maximization is deterministic: the objective is scanned
//! in log form on a fixed 10001-point grid, every local maximum is refined by
//! bisecting the sign change of the objective's derivative (value-comparison
//! searches stall at half the mantissa near a smooth peak; the derivative
//! keeps an O(1) slope through it, so its root carries full precision), and
//! near-ties (within `1e-12` in log units) are broken toward the right
//! endpoint for the first node and toward the smaller coordinate afterwards.
//! For a uniform density this reproduces the classical unweighted sequence
//! starting `b, a, midpoint, ...`.

use crate::dist::{BoundedDistribution, DistKind};
use crate::rules::RuleError;

/// Number of intervals in the scanning grid (10001 points).
const GRID_INTERVALS: usize = 10_000;
/// Near-tie window for competing maxima, in log-objective units.
const TIE_TOL: f64 = 1e-12;

/// Log of the Leja objective at `y` given the already-placed nodes:
/// `0.5 * ln(rho(y)) + sum_k ln|y - y_k|`. Minus infinity where the density
/// vanishes or `y` coincides with an existing node.
fn log_objective(dist: &BoundedDistribution, existing: &[f64], y: f64) -> f64 {
    let density = dist.pdf(y);
    if density <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut value = 0.5 * density.ln();
    for &node in existing {
        value += (y - node).abs().ln();
    }
    value
}

/// Derivative of `ln rho` where the density is positive: flat for the
/// uniform density; the two endpoint power terms for beta. Infinite at an
/// endpoint the beta density pins to zero (or spikes at), which the caller
/// uses as the correct "points inward/outward" signal.
fn log_pdf_derivative(dist: &BoundedDistribution, y: f64) -> f64 {
    match dist.kind() {
        DistKind::Uniform => 0.0,
        DistKind::Beta => {
            let (alpha, beta) = dist.shapes().expect("beta distributions carry shapes");
            (alpha - 1.0) / (y - dist.lower()) - (beta - 1.0) / (dist.upper() - y)
        }
    }
}

/// Derivative of the log objective:
/// `0.5 * (ln rho)'(y) + sum_k 1/(y - y_k)`.
fn log_objective_derivative(dist: &BoundedDistribution, existing: &[f64], y: f64) -> f64 {
    let mut slope = 0.5 * log_pdf_derivative(dist, y);
    for &node in existing {
        slope += 1.0 / (y - node);
    }
    slope
}

/// Bisect the derivative's sign change on `[lo, hi]` (`d(lo) > 0 > d(hi)`)
/// down to adjacent floats. A `(+, -)` bracket always closes in on a local
/// maximum, since immediately left of a minimum the derivative is negative.
fn bisect_derivative_root(d: impl Fn(f64) -> f64, lo0: f64, hi0: f64) -> f64 {
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            return mid;
        }
        let slope = d(mid);
        if slope == 0.0 {
            return mid;
        } else if slope > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Polish the grid-scan local maximum at grid index `idx`. A maximum on the
/// domain boundary (derivative pointing outward, or vanishing there) is
/// returned as the boundary grid point bitwise; an interior maximum is
/// refined on the grid cell the derivative points into.
fn refine_local_max(
    dist: &BoundedDistribution,
    existing: &[f64],
    grid_point: &impl Fn(usize) -> f64,
    idx: usize,
    last: usize,
) -> (f64, f64) {
    let objective = |y: f64| log_objective(dist, existing, y);
    let x = grid_point(idx);
    let slope = log_objective_derivative(dist, existing, x);
    // A NaN slope (0/0 at an endpoint a unit-shape beta neither pins nor
    // spikes) means the grid point already is the exact answer.
    let outward_at_left = idx == 0 && (slope.is_nan() || slope <= 0.0);
    let outward_at_right = idx == last && (slope.is_nan() || slope >= 0.0);
    if outward_at_left || outward_at_right || slope == 0.0 {
        return (x, objective(x));
    }
    let (lo, hi) = if slope > 0.0 {
        (x, grid_point(idx + 1))
    } else {
        (grid_point(idx - 1), x)
    };
    let d_lo = log_objective_derivative(dist, existing, lo);
    let d_hi = log_objective_derivative(dist, existing, hi);
    if d_lo > 0.0 && d_hi < 0.0 {
        let y = bisect_derivative_root(|t| log_objective_derivative(dist, existing, t), lo, hi);
        (y, objective(y))
    } else {
        // No sign change across the cell (several critical points crammed
        // between grid points); the grid value is the best safe answer.
        (x, objective(x))
    }
}

/// The next Leja node for the given density and existing nodes.
pub fn next_node(dist: &BoundedDistribution, existing: &[f64]) -> Result<f64, RuleError> {
    let (a, b) = (dist.lower(), dist.upper());
    let span = b - a;
    let n = GRID_INTERVALS;
    // Endpoints are represented exactly; interior points by linear blend.
    let grid_point = |j: usize| -> f64 {
        if j == 0 {
            a
        } else if j == n {
            b
        } else {
            a + span * (j as f64 / n as f64)
        }
    };
    let objective = |y: f64| log_objective(dist, existing, y);
    let values: Vec<f64> = (0..=n).map(|j| objective(grid_point(j))).collect();

    // The first node has no interpoint factors; ties there (e.g. a uniform
    // density, flat everywhere) resolve to the right endpoint. Later ties
    // (e.g. mirror-symmetric maxima) resolve to the smaller coordinate.
    let prefer_largest = existing.is_empty();

    // Locate every local-maximum plateau of the grid scan and refine each.
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let mut i = 0usize;
    while i <= n {
        let v = values[i];
        if !v.is_finite() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < n && values[j + 1] == v {
            j += 1;
        }
        let left_lower = i == 0 || values[i - 1] < v;
        let right_lower = j == n || values[j + 1] < v;
        if left_lower && right_lower {
            if j > i {
                // A flat plateau at grid resolution: the tie rule picks the
                // preferred end; refinement would only blur it.
                let idx = if prefer_largest { j } else { i };
                candidates.push((grid_point(idx), v));
            } else {
                candidates.push(refine_local_max(dist, existing, &grid_point, i, n));
            }
        }
        i = j + 1;
    }

    let best_value = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !best_value.is_finite() {
        return Err(RuleError::ObjectiveUnbounded);
    }
    let mut choice: Option<f64> = None;
    for &(y, v) in &candidates {
        if v >= best_value - TIE_TOL {
            choice = Some(match choice {
                None => y,
                Some(current) => {
                    if prefer_largest {
                        current.max(y)
                    } else {
                        current.min(y)
                    }
                }
            });
        }
    }
    Ok(choice.expect("finite best value implies at least one candidate"))
}
