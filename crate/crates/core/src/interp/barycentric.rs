//! Barycentric Lagrange interpolation in one dimension.
//!
//! The second (true) barycentric form is numerically stable for the node
//! counts used here and evaluates all cardinal polynomials at a point in
//! `O(m)`. Barycentric weights are computed with a capacity scaling
//! (differences multiplied by `4 / span`) so products of up to dozens of
//! node differences stay far from overflow and underflow on any interval.

use std::fmt;

/// Errors from interpolation preconditions.
#[derive(Debug, Clone, PartialEq)]
pub enum InterpError {
    /// Two interpolation nodes coincide (within `1e-15` of the node span).
    DuplicateNodes { position: f64 },
    /// `nodes` and `values` differ in length.
    LengthMismatch { nodes: usize, values: usize },
    /// No nodes supplied.
    Empty,
}

impl fmt::Display for InterpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterpError::DuplicateNodes { position } => {
                write!(f, "duplicate interpolation node at {position}")
            }
            InterpError::LengthMismatch { nodes, values } => {
                write!(f, "{nodes} nodes but {values} values")
            }
            InterpError::Empty => write!(f, "no interpolation nodes supplied"),
        }
    }
}

impl std::error::Error for InterpError {}

/// Relative tolerance (times the node span) below which an evaluation point
/// is treated as coinciding with a node.
const NODE_HIT_REL: f64 = 1e-15;

fn node_span(nodes: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in nodes {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    hi - lo
}

/// Barycentric weights `w_i = 1 / Π_{j≠i} (x_i - x_j)` of distinct nodes,
/// with all differences scaled by `4 / span` (a capacity normalization that
/// leaves the interpolant unchanged).
///
/// # Panics
/// Panics in debug builds if two nodes coincide.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    assert!(m >= 1, "need at least one node");
    if m == 1 {
        return vec![1.0];
    }
    let scale = 4.0 / node_span(nodes);
    let mut weights = vec![1.0; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let diff = (nodes[i] - nodes[j]) * scale;
                debug_assert!(diff != 0.0, "duplicate nodes at {}", nodes[i]);
                weights[i] /= diff;
            }
        }
    }
    weights
}

/// All `m` Lagrange cardinal polynomials of `nodes` evaluated at `x`,
/// written into `out`. `bary` must come from [`barycentric_weights`] for the
/// same nodes; `span` sets the node-coincidence tolerance (callers pass the
/// support width of the underlying interval).
pub fn basis_values(nodes: &[f64], bary: &[f64], x: f64, span: f64, out: &mut [f64]) {
    let m = nodes.len();
    debug_assert_eq!(bary.len(), m);
    debug_assert_eq!(out.len(), m);
    if m == 1 {
        out[0] = 1.0;
        return;
    }
    let tol = NODE_HIT_REL * span;
    for (i, &node) in nodes.iter().enumerate() {
        if (x - node).abs() <= tol {
            out.fill(0.0);
            out[i] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for i in 0..m {
        let d = bary[i] / (x - nodes[i]);
        out[i] = d;
        denom += d;
    }
    for v in out.iter_mut() {
        *v /= denom;
    }
}

/// The Lagrange interpolant through `(nodes, values)` evaluated at `y`. If
/// `y` coincides with a node (within `1e-15` of the node span) the stored
/// value is returned exactly.
pub fn barycentric_eval(nodes: &[f64], values: &[f64], y: f64) -> Result<f64, InterpError> {
    if nodes.is_empty() {
        return Err(InterpError::Empty);
    }
    if nodes.len() != values.len() {
        return Err(InterpError::LengthMismatch { nodes: nodes.len(), values: values.len() });
    }
    if nodes.len() == 1 {
        return Ok(values[0]);
    }
    let span = node_span(nodes);
    let tol = NODE_HIT_REL * span;
    for (i, &xi) in nodes.iter().enumerate() {
        for &xj in &nodes[i + 1..] {
            if (xi - xj).abs() <= tol {
                return Err(InterpError::DuplicateNodes { position: xi });
            }
        }
    }
    let bary = barycentric_weights(nodes);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &w), &v) in nodes.iter().zip(&bary).zip(values) {
        if (y - x).abs() <= tol {
            return Ok(v);
        }
        let d = w / (y - x);
        num += d * v;
        den += d;
    }
    Ok(num / den)
}
