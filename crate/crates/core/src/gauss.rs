//! Gauss quadrature references and a density-weighted composite integrator.
//!
//! These routines serve as the internal integration oracle: they compute
//! `∫ f(y) ρ(y) dy` for a [`BoundedDistribution`] density ρ, either with a
//! single high-order Gauss-Legendre rule (the plain reference used by tests)
//! or with a composite rule split at caller-supplied breakpoints. The
//! composite rule dispatches the panels touching the interval endpoints to
//! Gauss-Jacobi rules whose weight function absorbs the beta density's
//! endpoint factors `(y-a)^(alpha-1)` and `(b-y)^(beta-1)` exactly, so
//! integrals of polynomials times a beta density are exact to machine
//! precision for any shape parameters.
//!
//! Gauss rules are an internal oracle only; the collocation rules exposed by
//! [`crate::rules`] are Clenshaw-Curtis and weighted Leja.

use crate::dist::{BoundedDistribution, DistKind};
use gauss_quad::{GaussJacobi, GaussLegendre};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(n).expect("Gauss-Legendre degree must be >= 2");
    let nodes: Vec<f64> = rule.nodes().copied().collect();
    let weights: Vec<f64> = rule.weights().copied().collect();
    (nodes, weights)
}

/// `∫_a^b f(y) dy` with an `n`-point Gauss-Legendre rule mapped onto `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        total += w * f(mid + half * x);
    }
    total * half
}

/// `∫ f(y) ρ(y) dy` with a single `n`-point Gauss-Legendre rule over the
/// support of `dist`. This is the plain high-order reference used by tests
/// (typically `n = 200`); it treats the density as part of the integrand.
pub fn integrate_pdf<F: Fn(f64) -> f64>(dist: &BoundedDistribution, f: F, n: usize) -> f64 {
    integrate_gl(|y| f(y) * dist.pdf(y), dist.lower(), dist.upper(), n)
}

/// Points and weights of a density-weighted composite quadrature rule:
/// `∫ f(y) ρ(y) dy ≈ Σ_q ω_q f(y_q)` for smooth `f`, with the density folded
/// into the returned weights.
///
/// The rule is split at `breakpoints` (entries outside the open support are
/// ignored). Interior panels use `n`-point Gauss-Legendre. For a beta
/// density the two panels touching the interval endpoints instead use
/// Gauss-Jacobi rules whose weight absorbs the algebraic endpoint factor
/// `(y-a)^(alpha-1)` or `(b-y)^(beta-1)`, which keeps full accuracy even
/// when the density's derivative is unbounded there (shape parameters below
/// 2); if no interior breakpoint is supplied, a midpoint split is inserted
/// so the two endpoint factors never share a panel. `f` is never evaluated
/// at the support endpoints.
pub fn pdf_quadrature_points(
    dist: &BoundedDistribution,
    breakpoints: &[f64],
    n: usize,
) -> Vec<(f64, f64)> {
    let (a, b) = (dist.lower(), dist.upper());
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&y| y > a && y < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    if cuts.is_empty() && dist.kind() == DistKind::Beta {
        cuts.push(0.5 * (a + b));
    }

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut points = Vec::new();
    for (panel, window) in edges.windows(2).enumerate() {
        let (lo, hi) = (window[0], window[1]);
        if hi <= lo {
            continue;
        }
        let touches_left = panel == 0;
        let touches_right = panel == edges.len() - 2;
        match dist.kind() {
            DistKind::Uniform => plain_panel_points(dist, lo, hi, n, &mut points),
            DistKind::Beta => {
                let (alpha, beta) = dist.shapes().expect("beta distribution has shapes");
                if touches_left && alpha != 1.0 {
                    beta_left_panel_points(dist, alpha, beta, lo, hi, n, &mut points);
                } else if touches_right && beta != 1.0 {
                    beta_right_panel_points(dist, alpha, beta, lo, hi, n, &mut points);
                } else {
                    plain_panel_points(dist, lo, hi, n, &mut points);
                }
            }
        }
    }
    points
}

/// `∫ f(y) ρ(y) dy` with the composite rule of [`pdf_quadrature_points`].
pub fn integrate_pdf_panels<F: Fn(f64) -> f64>(
    dist: &BoundedDistribution,
    breakpoints: &[f64],
    f: F,
    n: usize,
) -> f64 {
    pdf_quadrature_points(dist, breakpoints, n)
        .iter()
        .map(|&(y, w)| w * f(y))
        .sum()
}

/// Gauss-Legendre panel with the density folded into the weights.
fn plain_panel_points(
    dist: &BoundedDistribution,
    lo: f64,
    hi: f64,
    n: usize,
    points: &mut Vec<(f64, f64)>,
) {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);
    for (x, w) in nodes.iter().zip(&weights) {
        let y = mid + half * x;
        points.push((y, w * half * dist.pdf(y)));
    }
}

/// Log of the beta density's normalization constant over `[a, b]`:
/// `ρ(y) = exp(-log_norm) (y-a)^(alpha-1) (b-y)^(beta-1)`.
fn beta_log_norm(dist: &BoundedDistribution, alpha: f64, beta: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let span = dist.upper() - dist.lower();
    ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta) + (alpha + beta - 1.0) * span.ln()
}

/// Panel `[a, hi]` of a beta density: Gauss-Jacobi with `(1+x)^(alpha-1)`
/// absorbing the `(y-a)^(alpha-1)` factor. The remaining smooth part of the
/// density, `(b-y)^(beta-1)` and the normalization, goes into the weights.
fn beta_left_panel_points(
    dist: &BoundedDistribution,
    alpha: f64,
    beta: f64,
    lo: f64,
    hi: f64,
    n: usize,
    points: &mut Vec<(f64, f64)>,
) {
    let rule = GaussJacobi::new(n, 0.0, alpha - 1.0).expect("valid Gauss-Jacobi parameters");
    let half = 0.5 * (hi - lo);
    let log_norm = beta_log_norm(dist, alpha, beta);
    // Jacobian plus the (half)^(alpha-1) scaling of the absorbed factor,
    // folded into one exponential to avoid overflow for extreme shapes.
    let scale = ((alpha - 1.0) * half.ln() + half.ln() - log_norm).exp();
    let b_edge = dist.upper();
    for (x, w) in rule.nodes().zip(rule.weights()) {
        let y = lo + (x + 1.0) * half;
        points.push((y, w * scale * (b_edge - y).powf(beta - 1.0)));
    }
}

/// Panel `[lo, b]` of a beta density: Gauss-Jacobi with `(1-x)^(beta-1)`
/// absorbing the `(b-y)^(beta-1)` factor.
fn beta_right_panel_points(
    dist: &BoundedDistribution,
    alpha: f64,
    beta: f64,
    lo: f64,
    hi: f64,
    n: usize,
    points: &mut Vec<(f64, f64)>,
) {
    let rule = GaussJacobi::new(n, beta - 1.0, 0.0).expect("valid Gauss-Jacobi parameters");
    let half = 0.5 * (hi - lo);
    let log_norm = beta_log_norm(dist, alpha, beta);
    let scale = ((beta - 1.0) * half.ln() + half.ln() - log_norm).exp();
    let a_edge = dist.lower();
    for (x, w) in rule.nodes().zip(rule.weights()) {
        let y = lo + (x + 1.0) * half;
        points.push((y, w * scale * (y - a_edge).powf(alpha - 1.0)));
    }
}
