//! Full tensor-product grids, interpolation, and quadrature.
//!
//! These operators serve two roles: they are the building blocks the sparse
//! construction telescopes over, and they are the brute-force oracle that
//! sparse results are checked against on small full boxes (where the tensor
//! product is still affordable).

use crate::interp::barycentric::{barycentric_weights, basis_values};
use crate::multiindex::MultiIndex;
use crate::rules::UnivariateRule;

/// A full tensor grid at a level multi-index: every combination of the
/// per-dimension level node sets.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    /// Per-dimension rule levels.
    pub level: MultiIndex,
    /// `(node-index vector, coordinate vector)` pairs in lexicographic
    /// node-index order; node indices refer to the rules' global nested
    /// sequences.
    pub points: Vec<(Vec<u32>, Vec<f64>)>,
}

/// Iterate all index vectors of the box `Π [0, sizes[n])` in lexicographic
/// order (first dimension slowest).
pub(crate) fn for_each_box_point(sizes: &[usize], mut visit: impl FnMut(&[u32])) {
    let dim = sizes.len();
    if sizes.contains(&0) {
        return;
    }
    let mut idx = vec![0u32; dim];
    loop {
        visit(&idx);
        let mut n = dim;
        loop {
            if n == 0 {
                return;
            }
            n -= 1;
            idx[n] += 1;
            if (idx[n] as usize) < sizes[n] {
                break;
            }
            idx[n] = 0;
        }
    }
}

/// Assemble the full tensor grid of `level` from the rules' nested node
/// sequences. The rules must already be built to the requested levels.
pub fn tensor_grid(rules: &[UnivariateRule], level: &MultiIndex) -> TensorGrid {
    assert_eq!(rules.len(), level.dim(), "one rule per dimension");
    let sizes: Vec<usize> = rules
        .iter()
        .zip(level.levels())
        .map(|(rule, &l)| rule.family().level_to_nodes(l))
        .collect();
    let mut points = Vec::new();
    for_each_box_point(&sizes, |idx| {
        let coords: Vec<f64> =
            idx.iter().enumerate().map(|(n, &i)| rules[n].node(i as usize)).collect();
        points.push((idx.to_vec(), coords));
    });
    TensorGrid { level: level.clone(), points }
}

/// Evaluate the tensor-product interpolant of `level` at `y`.
///
/// `value_at` supplies the model value for a node-index vector; it is called
/// once per grid point. The evaluation collapses one dimension at a time
/// with univariate barycentric interpolation, which is algebraically the
/// tensor-product Lagrange interpolant.
pub fn tensor_interp_eval(
    rules: &[UnivariateRule],
    level: &MultiIndex,
    value_at: &mut dyn FnMut(&[u32]) -> f64,
    y: &[f64],
) -> f64 {
    let dim = rules.len();
    assert_eq!(level.dim(), dim);
    assert_eq!(y.len(), dim, "evaluation point has wrong dimension");
    let sizes: Vec<usize> = rules
        .iter()
        .zip(level.levels())
        .map(|(rule, &l)| rule.family().level_to_nodes(l))
        .collect();

    let mut values = Vec::with_capacity(sizes.iter().product());
    for_each_box_point(&sizes, |idx| values.push(value_at(idx)));

    // Collapse dimensions from the last (fastest-varying) to the first:
    // each pass replaces runs over one dimension by their interpolated
    // value at y[n].
    for n in (0..dim).rev() {
        let m = sizes[n];
        let nodes = rules[n].level_nodes_global(level.levels()[n]);
        let bary = barycentric_weights(nodes);
        let span = rules[n].dist().upper() - rules[n].dist().lower();
        let mut basis = vec![0.0; m];
        basis_values(nodes, &bary, y[n], span, &mut basis);
        let mut collapsed = Vec::with_capacity(values.len() / m);
        for chunk in values.chunks(m) {
            collapsed.push(chunk.iter().zip(&basis).map(|(v, b)| v * b).sum());
        }
        values = collapsed;
    }
    debug_assert_eq!(values.len(), 1);
    values[0]
}

/// The expectation of the tensor-product interpolant of `level`: the
/// product-weight quadrature `Σ_i q_i Π_n w_n[i_n]`.
pub fn tensor_quadrature(
    rules: &[UnivariateRule],
    level: &MultiIndex,
    value_at: &mut dyn FnMut(&[u32]) -> f64,
) -> f64 {
    let dim = rules.len();
    assert_eq!(level.dim(), dim);
    let sizes: Vec<usize> = rules
        .iter()
        .zip(level.levels())
        .map(|(rule, &l)| rule.family().level_to_nodes(l))
        .collect();
    let weights: Vec<Vec<f64>> = rules
        .iter()
        .zip(level.levels())
        .map(|(rule, &l)| rule.weights_global(l))
        .collect();
    let mut total = 0.0;
    for_each_box_point(&sizes, |idx| {
        let w: f64 =
            idx.iter().enumerate().map(|(n, &i)| weights[n][i as usize]).product();
        total += w * value_at(idx);
    });
    total
}
