//! Bounded univariate input densities and independent joint densities.
//!
//! Supported marginals are the uniform density on `[a, b]` and the
//! four-parameter (shifted/scaled) beta density on `[a, b]` with shape
//! parameters `alpha, beta > 0`. A [`JointDistribution`] is an ordered list of
//! independent marginals; its PDF is the left-to-right product of the
//! marginal PDFs and its support is the corresponding hyper-rectangle.
//!
//! Sampling is deterministic and splittable: a study seed plus an explicit
//! stream index fully determine every draw, so concurrent consumers can pull
//! independent, reproducible sample sets from the same seed.

use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;
use std::fmt;

/// Errors from distribution construction and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionError {
    /// Construction rejected: bounds not strictly ordered, non-finite or
    /// non-positive shape parameters, and similar.
    InvalidParameters(String),
    /// A sample of zero vectors was requested.
    EmptySample,
    /// A point of the wrong dimension was passed to a joint density.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::InvalidParameters(msg) => {
                write!(f, "invalid distribution parameters: {msg}")
            }
            DistributionError::EmptySample => write!(f, "sample count must be at least 1"),
            DistributionError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for DistributionError {}

/// Family tag of a bounded marginal density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Uniform,
    Beta,
}

/// A univariate probability density on a finite interval `[a, b]`.
///
/// Invariants (enforced at construction):
/// - `a < b` strictly, both finite;
/// - the PDF integrates to 1 over `[a, b]`;
/// - the PDF is strictly positive on the open interval `(a, b)`.
///
/// Endpoint convention: the uniform density takes its interior value
/// `1/(b-a)` at the endpoints; the beta density is defined as exactly 0 at
/// and outside both endpoints for every shape parameter. Endpoint values
/// never affect integrals, but node-construction objectives rely on this
/// being consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpec", into = "DistSpec")]
pub struct BoundedDistribution {
    kind: DistKind,
    a: f64,
    b: f64,
    /// Beta shape parameters; stored as 1 for uniform where they are unused.
    alpha: f64,
    beta: f64,
}

/// Serialization schema: `kind`, `a`, `b` and, for beta, `alpha`/`beta`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DistSpec {
    kind: DistKind,
    a: f64,
    b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

impl TryFrom<DistSpec> for BoundedDistribution {
    type Error = DistributionError;

    fn try_from(spec: DistSpec) -> Result<Self, Self::Error> {
        match spec.kind {
            DistKind::Uniform => BoundedDistribution::uniform(spec.a, spec.b),
            DistKind::Beta => {
                let alpha = spec.alpha.ok_or_else(|| {
                    DistributionError::InvalidParameters("beta requires `alpha`".into())
                })?;
                let beta = spec.beta.ok_or_else(|| {
                    DistributionError::InvalidParameters("beta requires `beta`".into())
                })?;
                BoundedDistribution::beta(alpha, beta, spec.a, spec.b)
            }
        }
    }
}

impl From<BoundedDistribution> for DistSpec {
    fn from(d: BoundedDistribution) -> Self {
        let (alpha, beta) = match d.kind {
            DistKind::Uniform => (None, None),
            DistKind::Beta => (Some(d.alpha), Some(d.beta)),
        };
        DistSpec { kind: d.kind, a: d.a, b: d.b, alpha, beta }
    }
}

impl BoundedDistribution {
    /// Uniform density `1/(b-a)` on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self, DistributionError> {
        check_bounds(a, b)?;
        Ok(BoundedDistribution { kind: DistKind::Uniform, a, b, alpha: 1.0, beta: 1.0 })
    }

    /// Shifted/scaled beta density with shapes `alpha, beta > 0` on `[a, b]`.
    pub fn beta(alpha: f64, beta: f64, a: f64, b: f64) -> Result<Self, DistributionError> {
        check_bounds(a, b)?;
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(DistributionError::InvalidParameters(format!(
                "beta shapes must be finite and positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(BoundedDistribution { kind: DistKind::Beta, a, b, alpha, beta })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    /// Beta shape parameters, `None` for uniform.
    pub fn shapes(&self) -> Option<(f64, f64)> {
        match self.kind {
            DistKind::Uniform => None,
            DistKind::Beta => Some((self.alpha, self.beta)),
        }
    }

    /// Density value at `y`; 0 outside `[a, b]`.
    ///
    /// The beta normalization is evaluated through log-gamma so that large
    /// shape parameters neither overflow nor lose the normalization to 1.
    pub fn pdf(&self, y: f64) -> f64 {
        match self.kind {
            DistKind::Uniform => {
                if y >= self.a && y <= self.b {
                    1.0 / (self.b - self.a)
                } else {
                    0.0
                }
            }
            DistKind::Beta => {
                if y <= self.a || y >= self.b {
                    return 0.0;
                }
                let t = (y - self.a) / (self.b - self.a);
                let log_density = (self.alpha - 1.0) * t.ln() + (self.beta - 1.0) * (1.0 - t).ln()
                    - ln_beta(self.alpha, self.beta)
                    - (self.b - self.a).ln();
                log_density.exp()
            }
        }
    }

    /// Cumulative distribution function at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= self.a {
            return 0.0;
        }
        if y >= self.b {
            return 1.0;
        }
        let t = (y - self.a) / (self.b - self.a);
        match self.kind {
            DistKind::Uniform => t,
            DistKind::Beta => beta_reg(self.alpha, self.beta, t),
        }
    }

    /// Analytic mean: `(a+b)/2` for uniform, `a + (b-a)·alpha/(alpha+beta)`
    /// for beta.
    pub fn mean(&self) -> f64 {
        match self.kind {
            DistKind::Uniform => 0.5 * (self.a + self.b),
            DistKind::Beta => self.a + (self.b - self.a) * self.alpha / (self.alpha + self.beta),
        }
    }

    /// Analytic variance.
    pub fn variance(&self) -> f64 {
        let span = self.b - self.a;
        match self.kind {
            DistKind::Uniform => span * span / 12.0,
            DistKind::Beta => {
                let s = self.alpha + self.beta;
                span * span * self.alpha * self.beta / (s * s * (s + 1.0))
            }
        }
    }

    /// Analytic raw moment `E[y^k]`.
    ///
    /// Uniform: `(b^(k+1) - a^(k+1)) / ((k+1)(b-a))`. Beta: binomial
    /// expansion of `(a + (b-a) X)^k` with the standard-beta moments
    /// `E[X^j] = prod_{r<j} (alpha+r)/(alpha+beta+r)`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        match self.kind {
            DistKind::Uniform => {
                // Evaluate the symmetric form sum_{j<=k} a^j b^(k-j) / (k+1),
                // which is exact-cancellation-free for any sign of a, b.
                let mut sum = 0.0;
                for j in 0..=k {
                    sum += self.a.powi(j as i32) * self.b.powi((k - j) as i32);
                }
                sum / (k as f64 + 1.0)
            }
            DistKind::Beta => {
                let span = self.b - self.a;
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut std_moment = 1.0; // E[X^j], updated incrementally
                for j in 0..=k {
                    if j > 0 {
                        binom *= (k - j + 1) as f64 / j as f64;
                        std_moment *= (self.alpha + (j - 1) as f64)
                            / (self.alpha + self.beta + (j - 1) as f64);
                    }
                    total += binom
                        * self.a.powi((k - j) as i32)
                        * span.powi(j as i32)
                        * std_moment;
                }
                total
            }
        }
    }

    /// Draw one realization using the supplied generator.
    fn sample_one(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self.kind {
            DistKind::Uniform => rand::distr::Uniform::new_inclusive(self.a, self.b)
                .expect("validated bounds")
                .sample(rng),
            DistKind::Beta => {
                let x = rand_distr::Beta::new(self.alpha, self.beta)
                    .expect("validated shapes")
                    .sample(rng);
                self.a + (self.b - self.a) * x
            }
        }
    }
}

fn check_bounds(a: f64, b: f64) -> Result<(), DistributionError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(DistributionError::InvalidParameters(format!(
            "bounds must be finite with a < b, got a={a}, b={b}"
        )));
    }
    Ok(())
}

/// Natural logarithm of the Euler beta function `B(alpha, beta)`.
fn ln_beta(alpha: f64, beta: f64) -> f64 {
    ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta)
}

/// An independent product density on the hyper-rectangle
/// `[a_1,b_1] x ... x [a_N,b_N]`.
///
/// Immutable after construction and safe to share across threads. Sampling
/// takes an explicit stream index so that concurrent consumers obtain
/// deterministic, non-overlapping sample sequences from the same seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    marginals: Vec<BoundedDistribution>,
}

impl JointDistribution {
    pub fn new(marginals: Vec<BoundedDistribution>) -> Result<Self, DistributionError> {
        if marginals.is_empty() {
            return Err(DistributionError::InvalidParameters(
                "a joint distribution needs at least one marginal".into(),
            ));
        }
        Ok(JointDistribution { marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[BoundedDistribution] {
        &self.marginals
    }

    /// Per-dimension support bounds `(a_n, b_n)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.marginals.iter().map(|m| (m.lower(), m.upper())).collect()
    }

    /// Joint density: the left-to-right product of the marginal densities.
    pub fn pdf(&self, y: &[f64]) -> Result<f64, DistributionError> {
        if y.len() != self.dim() {
            return Err(DistributionError::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        let mut p = 1.0;
        for (marginal, &coord) in self.marginals.iter().zip(y) {
            p *= marginal.pdf(coord);
        }
        Ok(p)
    }

    /// Draw `count` i.i.d. parameter vectors on stream 0 of `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, DistributionError> {
        self.sample_stream(count, seed, 0)
    }

    /// Draw `count` i.i.d. parameter vectors from the given `(seed, stream)`
    /// pair. Distinct streams yield independent sequences; the same pair
    /// always reproduces the same vectors.
    pub fn sample_stream(
        &self,
        count: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Vec<Vec<f64>>, DistributionError> {
        if count == 0 {
            return Err(DistributionError::EmptySample);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut point = Vec::with_capacity(self.dim());
            for marginal in &self.marginals {
                point.push(marginal.sample_one(&mut rng));
            }
            out.push(point);
        }
        Ok(out)
    }
}
