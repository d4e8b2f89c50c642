//! Built-in parametric models: the semi-analytical dielectric-slab waveguide
//! reflection magnitude and analytic test functions for property tests.
//!
//! The waveguide quantity of interest is |S11| of a rectangular guide
//! operating in its fundamental TE10 mode, with a dielectric slab of length
//! `l` (relative permittivity `eps_r`, permeability `mu_r`) separated from
//! the reference ports by vacuum sections of length `d`, terminated
//! reflection-free. Above cutoff this reduces to single-mode
//! transmission-line theory: per-section propagation constants
//! `β_i = sqrt(ω² μ_i ε_i − (π/w)²)`, TE wave impedances `Z_i = ω μ_i / β_i`,
//! the slab transformed through `Z_in = Z₂ (Z₁ + j Z₂ tan β₂ l) /
//! (Z₂ + j Z₁ tan β₂ l)`, and `Γ = (Z_in − Z₁)/(Z_in + Z₁)`; the vacuum
//! offset only rotates the phase of Γ, so neither the guide height `h` nor
//! `d` affects the magnitude. Below cutoff the mode is evanescent and the
//! model reports an error instead of a value.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Speed of light in vacuum (m/s), exact.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Errors from model evaluation or lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// The TE10 mode does not propagate at the requested frequency.
    EvanescentMode { frequency: f64, cutoff: f64 },
    /// A parameter is outside the model's physical domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// The parameter vector has the wrong length.
    DimensionMismatch { expected: usize, got: usize },
    /// No registered model has the requested name.
    UnknownModel(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EvanescentMode { frequency, cutoff } => write!(
                f,
                "TE10 mode is evanescent: frequency {frequency} Hz is at or below cutoff {cutoff} Hz"
            ),
            ModelError::InvalidParameter { name, value } => {
                write!(f, "parameter {name} = {value} is outside the physical domain")
            }
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "model expects {expected} parameters, got {got}")
            }
            ModelError::UnknownModel(name) => write!(f, "unknown model '{name}'"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Shared evaluator closure of a [`ParametricModel`].
type EvalFn = Arc<dyn Fn(&[f64]) -> Result<f64, ModelError> + Send + Sync>;

/// A named scalar quantity of interest over a parameter vector. Evaluators
/// are pure and thread-safe; the same input always yields the same output.
#[derive(Clone)]
pub struct ParametricModel {
    name: String,
    dim: usize,
    eval: EvalFn,
}

impl fmt::Debug for ParametricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl ParametricModel {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[f64]) -> Result<f64, ModelError> + Send + Sync + 'static,
    ) -> Self {
        ParametricModel { name: name.into(), dim, eval: Arc::new(eval) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate the quantity of interest at `y`.
    pub fn eval(&self, y: &[f64]) -> Result<f64, ModelError> {
        if y.len() != self.dim {
            return Err(ModelError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        (self.eval)(y)
    }
}

/// Waveguide parameters in SI units; `(w, h, l, d, eps_r, mu_r)` is the
/// canonical parameter-vector order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideParams {
    /// Guide width (m); sets the TE10 cutoff.
    pub w: f64,
    /// Guide height (m); does not enter the TE10 |S11|.
    pub h: f64,
    /// Dielectric slab length (m).
    pub l: f64,
    /// Vacuum offset between each port and the slab (m).
    pub d: f64,
    /// Relative permittivity of the slab.
    pub eps_r: f64,
    /// Relative permeability of the slab.
    pub mu_r: f64,
    /// Operating frequency (Hz).
    pub f: f64,
}

impl WaveguideParams {
    /// Nominal benchmark geometry at 6 GHz.
    pub fn nominal() -> Self {
        WaveguideParams {
            w: 30.0e-3,
            h: 3.0e-3,
            l: 7.0e-3,
            d: 5.0e-3,
            eps_r: 2.0,
            mu_r: 2.4,
            f: 6.0e9,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [("w", self.w), ("h", self.h), ("l", self.l), ("f", self.f)] {
            if value.is_nan() || value <= 0.0 {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        if self.d.is_nan() || self.d < 0.0 {
            return Err(ModelError::InvalidParameter { name: "d", value: self.d });
        }
        if self.eps_r.is_nan() || self.eps_r < 1.0 {
            return Err(ModelError::InvalidParameter { name: "eps_r", value: self.eps_r });
        }
        if self.mu_r.is_nan() || self.mu_r < 1.0 {
            return Err(ModelError::InvalidParameter { name: "mu_r", value: self.mu_r });
        }
        Ok(())
    }
}

/// |S11| of the TE10 slab-loaded waveguide. See the module docs for the
/// formulas; the result lies in [0, 1] (lossless passive two-port).
pub fn waveguide_s11_mag(p: &WaveguideParams) -> Result<f64, ModelError> {
    p.validate()?;
    let omega = 2.0 * std::f64::consts::PI * p.f;
    let kc = std::f64::consts::PI / p.w;
    let k1_sq = (omega / C0).powi(2) - kc * kc;
    if k1_sq <= 0.0 {
        return Err(ModelError::EvanescentMode { frequency: p.f, cutoff: C0 / (2.0 * p.w) });
    }
    let k2_sq = (omega / C0).powi(2) * p.eps_r * p.mu_r - kc * kc;
    if k2_sq <= 0.0 {
        return Err(ModelError::EvanescentMode {
            frequency: p.f,
            cutoff: C0 / (2.0 * p.w * (p.eps_r * p.mu_r).sqrt()),
        });
    }
    let beta1 = k1_sq.sqrt();
    let beta2 = k2_sq.sqrt();
    let z1 = omega * MU0 / beta1;
    let z2 = omega * MU0 * p.mu_r / beta2;

    let t = (beta2 * p.l).tan();
    let z1c = Complex64::new(z1, 0.0);
    let z2c = Complex64::new(z2, 0.0);
    let z_in = z2c * (z1c + Complex64::new(0.0, z2 * t)) / (z2c + Complex64::new(0.0, z1 * t));
    let gamma_slab = (z_in - z1c) / (z_in + z1c);
    // Referencing the port a distance d down the vacuum guide only applies
    // a phase e^{-2jβ₁d}, which cannot change the magnitude.
    let gamma = gamma_slab * Complex64::new(0.0, -2.0 * beta1 * p.d).exp();
    Ok(gamma.norm())
}

/// The waveguide as a 6-parameter model `(w, h, l, d, eps_r, mu_r)` in SI
/// units at a fixed frequency.
pub fn waveguide_model(frequency_hz: f64) -> ParametricModel {
    ParametricModel::new("waveguide-s11", 6, move |y| {
        let p = WaveguideParams {
            w: y[0],
            h: y[1],
            l: y[2],
            d: y[3],
            eps_r: y[4],
            mu_r: y[5],
            f: frequency_hz,
        };
        waveguide_s11_mag(&p)
    })
}

/// A single-variable embedding of the waveguide: vary `w` (m), all other
/// parameters at their nominal values.
pub fn waveguide_width_model(frequency_hz: f64) -> ParametricModel {
    ParametricModel::new("waveguide-s11-width", 1, move |y| {
        let p = WaveguideParams { w: y[0], f: frequency_hz, ..WaveguideParams::nominal() };
        waveguide_s11_mag(&p)
    })
}

/// `q ≡ 3.7` in any dimension.
pub fn constant_model(dim: usize) -> ParametricModel {
    ParametricModel::new("constant", dim, |_| Ok(3.7))
}

/// `q(y) = Σ_n (n + 1) y_n` — additive and linear, so its variance
/// decomposition is exactly `V_n = (n + 1)² V[y_n]` with no interactions.
pub fn additive_linear_model(dim: usize) -> ParametricModel {
    ParametricModel::new("additive-linear", dim, |y| {
        Ok(y.iter().enumerate().map(|(n, v)| (n as f64 + 1.0) * v).sum())
    })
}

/// `q(y) = exp(Σ_n y_n / N)`; by independence its mean is the product of
/// one-dimensional integrals.
pub fn exp_sum_model(dim: usize) -> ParametricModel {
    let scale = 1.0 / dim as f64;
    ParametricModel::new("exp-sum", dim, move |y| {
        Ok((y.iter().sum::<f64>() * scale).exp())
    })
}

/// `q(y) = exp(y₁)` regardless of the remaining coordinates — the canonical
/// anisotropy test (only dimension 1 carries information).
pub fn exp_first_model(dim: usize) -> ParametricModel {
    ParametricModel::new("exp-y1", dim, |y| Ok(y[0].exp()))
}

/// The Ishigami function `sin y₁ + a sin² y₂ + b y₃⁴ sin y₁` with the
/// customary constants `a = 7`, `b = 0.1`; on U[−π, π]³ its variance
/// decomposition is known in closed form.
pub fn ishigami_model() -> ParametricModel {
    ParametricModel::new("ishigami", 3, |y| {
        let (a, b) = (7.0, 0.1);
        Ok(y[0].sin() + a * y[1].sin().powi(2) + b * y[2].powi(4) * y[0].sin())
    })
}

/// Closed-form variance decomposition of the Ishigami function on
/// U[−π, π]³: `(total variance, first-order indices, total-order indices)`.
pub fn ishigami_variance_decomposition() -> (f64, [f64; 3], [f64; 3]) {
    let (a, b) = (7.0f64, 0.1f64);
    let pi = std::f64::consts::PI;
    let v1 = 0.5 * (1.0 + b * pi.powi(4) / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = 8.0 * b * b * pi.powi(8) / 225.0;
    let total = v1 + v2 + v13;
    let first = [v1 / total, v2 / total, 0.0];
    let total_order = [(v1 + v13) / total, v2 / total, v13 / total];
    (total, first, total_order)
}

/// Look up a registered model by name. The waveguide uses its default
/// 6 GHz operating frequency here; construct it with [`waveguide_model`]
/// to choose another.
pub fn model_by_name(name: &str, dim: usize) -> Result<ParametricModel, ModelError> {
    match name {
        "constant" => Ok(constant_model(dim)),
        "additive-linear" => Ok(additive_linear_model(dim)),
        "exp-sum" => Ok(exp_sum_model(dim)),
        "exp-y1" => Ok(exp_first_model(dim)),
        "ishigami" => {
            if dim != 3 {
                return Err(ModelError::DimensionMismatch { expected: 3, got: dim });
            }
            Ok(ishigami_model())
        }
        "waveguide-s11" => {
            if dim != 6 {
                return Err(ModelError::DimensionMismatch { expected: 6, got: dim });
            }
            Ok(waveguide_model(6.0e9))
        }
        "waveguide-s11-width" => {
            if dim != 1 {
                return Err(ModelError::DimensionMismatch { expected: 1, got: dim });
            }
            Ok(waveguide_width_model(6.0e9))
        }
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}
