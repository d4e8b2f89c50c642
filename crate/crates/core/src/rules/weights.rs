//! PDF-adapted interpolatory quadrature weights.
//!
//! The weight of node `y_i` is the integral of its Lagrange cardinal
//! polynomial against the input density, `w_i = ∫ l_i(y) ρ(y) dy`, so the
//! `n`-node rule integrates every polynomial of degree `n - 1` exactly
//! against ρ and the weights always sum to 1.
//!
//! The primary route ([`interpolatory_weights`]) integrates the barycentric
//! cardinal basis with the composite density-weighted quadrature of
//! [`crate::gauss`]; it works for any node configuration (Clenshaw-Curtis or
//! Leja) and any supported density. For Clenshaw-Curtis nodes an independent
//! second route ([`cc_weights_via_moments`]) expands the cardinal functions
//! in Chebyshev polynomials and pairs the expansion with Chebyshev moments
//! of the density; the two routes must agree and are cross-checked in tests.

use crate::dist::BoundedDistribution;
use crate::gauss::pdf_quadrature_points;
use crate::interp::barycentric::{barycentric_weights, basis_values};
use crate::rules::clenshaw_curtis;

/// Integrals of the Lagrange cardinal polynomials of `nodes` against the
/// density, in the same order as `nodes`.
pub fn interpolatory_weights(nodes: &[f64], dist: &BoundedDistribution) -> Vec<f64> {
    let m = nodes.len();
    assert!(m >= 1, "need at least one node");
    if m == 1 {
        return vec![1.0];
    }
    // Splitting the integral at the nodes keeps every panel's integrand
    // mild; the panel order grows with the polynomial degree.
    let panel_order = m.max(32);
    let points = pdf_quadrature_points(dist, nodes, panel_order);
    let bary = barycentric_weights(nodes);
    let span = dist.upper() - dist.lower();
    let mut weights = vec![0.0; m];
    let mut basis = vec![0.0; m];
    for &(y, omega) in &points {
        basis_values(nodes, &bary, y, span, &mut basis);
        for (w, l) in weights.iter_mut().zip(&basis) {
            *w += omega * l;
        }
    }
    weights
}

/// Chebyshev moments of the density: `γ_k = ∫ T_k(x̂(y)) ρ(y) dy` for
/// `k = 0..count-1`, where `x̂` maps the support onto `[-1, 1]`.
pub fn chebyshev_moments(dist: &BoundedDistribution, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    let (a, b) = (dist.lower(), dist.upper());
    let points = pdf_quadrature_points(dist, &[], count.max(32));
    let mut gamma = vec![0.0; count];
    for &(y, omega) in &points {
        let x = (2.0 * y - a - b) / (b - a);
        gamma[0] += omega;
        if count > 1 {
            gamma[1] += omega * x;
        }
        let (mut t_prev, mut t) = (1.0, x);
        for g in gamma.iter_mut().skip(2) {
            let t_next = 2.0 * x * t - t_prev;
            *g += omega * t_next;
            t_prev = t;
            t = t_next;
        }
    }
    gamma
}

/// Clenshaw-Curtis weights through the Chebyshev-moment identity, in global
/// (insertion) order — an independent cross-check of
/// [`interpolatory_weights`].
///
/// On the extrema `x_i = cos(iπ/n)` the cardinal polynomials have the exact
/// discrete-cosine expansion `l_i(x) = (2 p_i / n) Σ''_k T_k(x_i) T_k(x)`
/// with `p_i = 1/2` at the endpoints and the double prime halving the first
/// and last summand, so `w_i = (2 p_i / n) Σ''_k T_k(x_i) γ_k`.
pub fn cc_weights_via_moments(level: u32, dist: &BoundedDistribution) -> Vec<f64> {
    let m = crate::rules::RuleFamily::ClenshawCurtis.level_to_nodes(level);
    if m == 1 {
        return vec![1.0];
    }
    let n = m - 1;
    let gamma = chebyshev_moments(dist, m);
    let mut w_sorted = vec![0.0; m];
    for (i, w) in w_sorted.iter_mut().enumerate() {
        let p = if i == 0 || i == n { 0.5 } else { 1.0 };
        let mut sum = 0.0;
        for (k, g) in gamma.iter().enumerate() {
            let c = if k == 0 || k == n { 0.5 } else { 1.0 };
            // Ascending node i is cos((n - i)π/n), so T_k there is
            // cos(k (n - i) π / n).
            let t = ((k * (n - i)) as f64 * std::f64::consts::PI / n as f64).cos();
            sum += c * t * g;
        }
        *w = 2.0 * p * sum / n as f64;
    }
    let order = clenshaw_curtis::global_of_sorted(level);
    let mut w_global = vec![0.0; m];
    for (i_sorted, &g) in order.iter().enumerate() {
        w_global[g] = w_sorted[i_sorted];
    }
    w_global
}
