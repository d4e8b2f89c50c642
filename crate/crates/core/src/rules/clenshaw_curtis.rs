//! Clenshaw-Curtis node construction on arbitrary bounded intervals.
//!
//! The level-`l` rule uses the `m(l)` Chebyshev extrema
//! `x_i = -cos(i * pi / (m - 1))`, `i = 0..m-1` (ascending), mapped onto
//! `[a, b]` by the affine change of variables
//! `y = (b - a)/2 * x + (a + b)/2`.
//!
//! With the doubling map `m(l) = 2^l + 1` the extrema are nested, and the
//! nesting here is *bitwise exact*: the angle `2i * pi / 2^(l+1)` evaluates
//! to the same float as `i * pi / 2^l` (multiplying and dividing by powers
//! of two is exact in IEEE arithmetic), and mirror-image nodes are produced
//! by negating a single cosine evaluation, so symmetry is exact too.

use crate::dist::BoundedDistribution;

/// Ascending Chebyshev-extrema nodes on `[-1, 1]` for the level-`level`
/// rule, with exact symmetry (`nodes[i] == -nodes[m-1-i]`, middle exactly 0).
pub fn nodes_standard(level: u32) -> Vec<f64> {
    if level == 0 {
        return vec![0.0];
    }
    let n = 1usize << level; // m - 1 intervals
    let mut nodes = vec![0.0; n + 1];
    for i in 0..n / 2 {
        let x = -((i as f64) * std::f64::consts::PI / (n as f64)).cos();
        nodes[i] = x;
        nodes[n - i] = -x;
    }
    nodes[n / 2] = 0.0;
    nodes
}

/// Affine map from the standard interval `[-1, 1]` onto `[a, b]`. The
/// endpoints and the midpoint are pinned so that `±1` land exactly on the
/// interval bounds (the generic affine expression can overshoot by an ulp,
/// which would put a node outside the distribution's support).
pub fn scale_node(x: f64, a: f64, b: f64) -> f64 {
    if x == -1.0 {
        a
    } else if x == 1.0 {
        b
    } else if x == 0.0 {
        0.5 * (a + b)
    } else {
        0.5 * (b - a) * x + 0.5 * (a + b)
    }
}

/// The nodes the level-`level` rule adds over the level-`level - 1` rule,
/// ascending, scaled to the distribution's interval. Level 0 contributes the
/// interval midpoint; level 1 the two endpoints; level `l >= 2` the
/// odd-position extrema of its ascending node array.
pub fn new_nodes_at_level(level: u32, dist: &BoundedDistribution) -> Vec<f64> {
    let (a, b) = (dist.lower(), dist.upper());
    let standard = nodes_standard(level);
    let new_standard: Vec<f64> = match level {
        0 => standard,
        1 => vec![standard[0], standard[2]],
        _ => standard.iter().copied().skip(1).step_by(2).collect(),
    };
    new_standard.into_iter().map(|x| scale_node(x, a, b)).collect()
}

/// For each ascending-sorted position `i` of the level-`level` node array,
/// the global (insertion-order) index of that node. Inverse lookup used to
/// present rules in sorted order while the sequence itself stays in
/// insertion order.
pub fn global_of_sorted(level: u32) -> Vec<usize> {
    let mut order = vec![0usize];
    for l in 1..=level {
        let m_prev = order.len();
        let m = if l == 1 { 3 } else { 2 * m_prev - 1 };
        let mut next = vec![0usize; m];
        if l == 1 {
            // Level 0's midpoint sits between the two new endpoints.
            next = vec![1, 0, 2];
        } else {
            for i in 0..m {
                next[i] = if i % 2 == 0 {
                    order[i / 2]
                } else {
                    m_prev + (i - 1) / 2
                };
            }
        }
        order = next;
    }
    order
}
