//! Sparse-grid surrogates over hierarchical surpluses.
//!
//! A [`SparseSurrogate`] represents `I_Λ[q] = Σ_{ℓ∈Λ} Δ_ℓ[q]` for a monotone
//! multi-index set Λ over nested univariate rules. Each term Δ_ℓ is stored
//! in surplus form: for every grid point the level-ℓ tensor grid adds over
//! all coarser grids, the surplus `s_ℓ^(i) = q(y_i) - I[q](y_i)` (model value
//! minus the prediction of the surrogate built so far), and
//! `Δ_ℓ[q](y) = Σ_i s_ℓ^(i) Π_n l_{ℓ_n,i_n}(y_n)` with `l` the Lagrange
//! cardinals of the full level-ℓ node sets. Nestedness makes the combined
//! operator interpolatory: the surrogate reproduces every stored model value.
//!
//! Grid points are identified by their integer node indices into the nested
//! sequences ([`PointKey`]), never by floating-point coordinates, so
//! deduplication across overlapping tensor grids is exact. For an index ℓ
//! whose lower neighbors are all present, the points it adds are exactly the
//! integer box `Π_n [m(ℓ_n - 1), m(ℓ_n))` (with `m(-1) = 0`); the boxes of
//! distinct indices are disjoint and partition the full grid, which makes
//! model-evaluation accounting exact.
//!
//! Alongside the surpluses the surrogate maintains one quadrature weight per
//! unique grid point, accumulated by expanding each Δ_ℓ into its signed
//! tensor rules (inclusion-exclusion over `ℓ - z`, `z ∈ {0,1}^N`); applying
//! the weights to the stored values integrates the sparse interpolant
//! against the input density exactly.
//!
//! Evaluation always sums terms in lexicographic index order, so results do
//! not depend on the order indices were inserted or on any concurrency in
//! the surrounding driver.

use crate::dist::{DistributionError, JointDistribution};
use crate::interp::barycentric::{barycentric_weights, basis_values};
use crate::interp::tensor::for_each_box_point;
use crate::multiindex::{IndexSetError, MultiIndex, MultiIndexSet};
use crate::rules::{RuleError, UnivariateRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Canonical grid-point identity: the per-dimension node indices within the
/// rules' nested sequences. Two points coincide geometrically iff their keys
/// are equal.
pub type PointKey = Vec<u32>;

/// Errors from sparse-surrogate construction.
#[derive(Debug, Clone, PartialEq)]
pub enum SparseError {
    /// An index or point has the wrong number of dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// The index already has a stored term.
    DuplicateIndex(MultiIndex),
    /// A lower neighbor required for the hierarchical update is missing.
    MissingLowerNeighbor { index: MultiIndex, missing: MultiIndex },
    /// The supplied model values do not cover the index's new points.
    WrongValueCount { index: MultiIndex, expected: usize, got: usize },
    /// Node construction failed while extending a univariate rule.
    Rule(RuleError),
    /// Index-set bookkeeping failed.
    Index(IndexSetError),
}

impl fmt::Display for SparseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparseError::DimensionMismatch { expected, got } => {
                write!(f, "expected dimension {expected}, got {got}")
            }
            SparseError::DuplicateIndex(index) => {
                write!(f, "index {index} already has a stored term")
            }
            SparseError::MissingLowerNeighbor { index, missing } => {
                write!(f, "index {index} requires lower neighbor {missing} first")
            }
            SparseError::WrongValueCount { index, expected, got } => {
                write!(f, "index {index} adds {expected} points but {got} values were supplied")
            }
            SparseError::Rule(e) => write!(f, "rule construction failed: {e}"),
            SparseError::Index(e) => write!(f, "index-set error: {e}"),
        }
    }
}

impl std::error::Error for SparseError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SparseError::Rule(e) => Some(e),
            SparseError::Index(e) => Some(e),
            _ => None,
        }
    }
}

impl From<RuleError> for SparseError {
    fn from(e: RuleError) -> Self {
        SparseError::Rule(e)
    }
}

impl From<IndexSetError> for SparseError {
    fn from(e: IndexSetError) -> Self {
        SparseError::Index(e)
    }
}

/// Summary returned when a term is inserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermStats {
    /// Mean absolute surplus over the new points: the refinement indicator.
    pub indicator: f64,
    /// Number of grid points (model evaluations) the index added.
    pub new_points: usize,
}

/// Hierarchical data of one multi-index: its new points and their surpluses.
#[derive(Debug, Clone, PartialEq)]
struct Term {
    keys: Vec<PointKey>,
    surpluses: Vec<f64>,
}

/// A unique grid point: coordinates and the stored model value.
#[derive(Debug, Clone, PartialEq)]
struct GridPoint {
    coords: Vec<f64>,
    value: f64,
}

/// Sparse-grid interpolant with hierarchical surpluses, an exact point
/// dedup, and per-point quadrature weights. See the module docs.
#[derive(Debug, Clone)]
pub struct SparseSurrogate {
    rules: Vec<UnivariateRule>,
    spans: Vec<f64>,
    /// Indices accepted into Λ (the margin keeps terms without acceptance).
    accepted: MultiIndexSet,
    terms: BTreeMap<MultiIndex, Term>,
    grid: BTreeMap<PointKey, GridPoint>,
    weights: BTreeMap<PointKey, f64>,
    /// Per dimension: level -> barycentric weights of the level node set.
    bary_cache: Vec<BTreeMap<u32, Vec<f64>>>,
    /// Per dimension: level -> univariate quadrature weights (global order).
    uni_weights: Vec<BTreeMap<u32, Vec<f64>>>,
}

impl SparseSurrogate {
    /// An empty surrogate over one rule per input dimension.
    pub fn new(rules: Vec<UnivariateRule>) -> Self {
        assert!(!rules.is_empty(), "need at least one dimension");
        let dim = rules.len();
        let spans = rules.iter().map(|r| r.dist().upper() - r.dist().lower()).collect();
        SparseSurrogate {
            rules,
            spans,
            accepted: MultiIndexSet::empty(dim),
            terms: BTreeMap::new(),
            grid: BTreeMap::new(),
            weights: BTreeMap::new(),
            bary_cache: vec![BTreeMap::new(); dim],
            uni_weights: vec![BTreeMap::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[UnivariateRule] {
        &self.rules
    }

    /// The accepted index set Λ.
    pub fn index_set(&self) -> &MultiIndexSet {
        &self.accepted
    }

    /// All indices with stored terms (accepted plus margin), ascending.
    pub fn term_indices(&self) -> impl Iterator<Item = &MultiIndex> {
        self.terms.keys()
    }

    pub fn contains_term(&self, index: &MultiIndex) -> bool {
        self.terms.contains_key(index)
    }

    /// Indices with terms that have not been accepted into Λ, ascending.
    pub fn margin_indices(&self) -> Vec<MultiIndex> {
        self.terms.keys().filter(|i| !self.accepted.contains(i)).cloned().collect()
    }

    /// Total unique grid points stored — the exact number of model
    /// evaluations consumed so far.
    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    /// The integer ranges of node indices the index adds per dimension.
    fn block_ranges(&self, index: &MultiIndex) -> Vec<(u32, usize)> {
        index
            .levels()
            .iter()
            .enumerate()
            .map(|(n, &l)| {
                let family = self.rules[n].family();
                let lo = if l == 0 { 0 } else { family.level_to_nodes(l - 1) as u32 };
                let hi = family.level_to_nodes(l) as u32;
                debug_assert!(hi > lo, "level-to-nodes map must be strictly increasing");
                (lo, (hi - lo) as usize)
            })
            .collect()
    }

    /// The node-index keys of the points `index` adds (its tensor grid minus
    /// all coarser grids), in lexicographic order. Disjoint across distinct
    /// indices.
    pub fn new_point_keys(&self, index: &MultiIndex) -> Vec<PointKey> {
        assert_eq!(index.dim(), self.dim());
        let ranges = self.block_ranges(index);
        let sizes: Vec<usize> = ranges.iter().map(|&(_, len)| len).collect();
        let mut keys = Vec::new();
        for_each_box_point(&sizes, |offset| {
            let key: PointKey =
                offset.iter().zip(&ranges).map(|(&o, &(lo, _))| lo + o).collect();
            keys.push(key);
        });
        keys
    }

    /// Extend the univariate rules for `index` and return the keys and
    /// coordinates of the points it would add. The caller evaluates the
    /// model there and passes the values to [`SparseSurrogate::insert_term`]
    /// in the same order.
    pub fn prepare_index(
        &mut self,
        index: &MultiIndex,
    ) -> Result<Vec<(PointKey, Vec<f64>)>, SparseError> {
        if index.dim() != self.dim() {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim(),
                got: index.dim(),
            });
        }
        for (n, &l) in index.levels().iter().enumerate() {
            self.rules[n].ensure_level(l)?;
        }
        Ok(self
            .new_point_keys(index)
            .into_iter()
            .map(|key| {
                let coords: Vec<f64> = key
                    .iter()
                    .enumerate()
                    .map(|(n, &i)| self.rules[n].node(i as usize))
                    .collect();
                (key, coords)
            })
            .collect())
    }

    /// Insert the hierarchical term of `index` from model values at its new
    /// points (in [`SparseSurrogate::new_point_keys`] order): computes
    /// surpluses against the current surrogate, stores the grid points, and
    /// accumulates the quadrature weights of Δ_index.
    ///
    /// All lower neighbors must already have terms; each index can be
    /// inserted once. The term joins Λ only via
    /// [`SparseSurrogate::accept_index`]; until then it is margin data
    /// (which the surrogate's evaluation already includes).
    pub fn insert_term(
        &mut self,
        index: MultiIndex,
        values: &[f64],
    ) -> Result<TermStats, SparseError> {
        if index.dim() != self.dim() {
            return Err(SparseError::DimensionMismatch {
                expected: self.dim(),
                got: index.dim(),
            });
        }
        if self.terms.contains_key(&index) {
            return Err(SparseError::DuplicateIndex(index));
        }
        for n in 0..self.dim() {
            if let Some(lower) = index.lower(n) {
                if !self.terms.contains_key(&lower) {
                    return Err(SparseError::MissingLowerNeighbor { index, missing: lower });
                }
            }
        }
        let points = self.prepare_index(&index)?;
        if values.len() != points.len() {
            return Err(SparseError::WrongValueCount {
                index,
                expected: points.len(),
                got: values.len(),
            });
        }
        self.ensure_caches(&index);

        let mut keys = Vec::with_capacity(points.len());
        let mut surpluses = Vec::with_capacity(points.len());
        let mut abs_sum = 0.0;
        for ((key, coords), &value) in points.into_iter().zip(values) {
            let surplus = value - self.eval_ref(&coords);
            abs_sum += surplus.abs();
            keys.push(key.clone());
            surpluses.push(surplus);
            let previous = self.grid.insert(key, GridPoint { coords, value });
            debug_assert!(previous.is_none(), "new-point boxes of distinct indices overlap");
        }
        let stats =
            TermStats { indicator: abs_sum / surpluses.len() as f64, new_points: surpluses.len() };
        self.accumulate_weights(&index);
        self.terms.insert(index, Term { keys, surpluses });
        Ok(stats)
    }

    /// Accept a previously inserted term into Λ.
    pub fn accept_index(&mut self, index: &MultiIndex) -> Result<(), SparseError> {
        if !self.terms.contains_key(index) {
            return Err(SparseError::MissingLowerNeighbor {
                index: index.clone(),
                missing: index.clone(),
            });
        }
        self.accepted.insert(index.clone())?;
        Ok(())
    }

    /// Make sure barycentric and univariate quadrature weights exist for
    /// every (dimension, level) the index touches.
    fn ensure_caches(&mut self, index: &MultiIndex) {
        for (n, &l) in index.levels().iter().enumerate() {
            let levels = if l == 0 { vec![0] } else { vec![l - 1, l] };
            for level in levels {
                let m = self.rules[n].family().level_to_nodes(level);
                self.bary_cache[n]
                    .entry(level)
                    .or_insert_with(|| barycentric_weights(&self.rules[n].sequence()[..m]));
                self.uni_weights[n]
                    .entry(level)
                    .or_insert_with(|| self.rules[n].weights_for_count(m));
            }
        }
    }

    /// Add Δ_index's contribution to the per-point quadrature weights:
    /// inclusion-exclusion over the signed tensor rules at `index - z`.
    fn accumulate_weights(&mut self, index: &MultiIndex) {
        let dim = self.dim();
        for z in 0u32..(1 << dim) {
            let mut k = Vec::with_capacity(dim);
            let mut sign = 1.0;
            let mut valid = true;
            for (n, &l) in index.levels().iter().enumerate() {
                if z & (1 << n) != 0 {
                    if l == 0 {
                        valid = false;
                        break;
                    }
                    k.push(l - 1);
                    sign = -sign;
                } else {
                    k.push(l);
                }
            }
            if !valid {
                continue;
            }
            let sizes: Vec<usize> =
                k.iter().enumerate().map(|(n, &l)| self.rules[n].family().level_to_nodes(l)).collect();
            let uni: Vec<&Vec<f64>> =
                k.iter().enumerate().map(|(n, &l)| &self.uni_weights[n][&l]).collect();
            for_each_box_point(&sizes, |idx| {
                let mut w = sign;
                for (n, &i) in idx.iter().enumerate() {
                    w *= uni[n][i as usize];
                }
                *self.weights.entry(idx.to_vec()).or_insert(0.0) += w;
            });
        }
    }

    /// Evaluate the surrogate at `y` (all stored terms, accepted and
    /// margin, in lexicographic index order).
    ///
    /// # Panics
    /// Panics if `y` has the wrong dimension.
    pub fn eval(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim(), "evaluation point has wrong dimension");
        self.eval_ref(y)
    }

    fn eval_ref(&self, y: &[f64]) -> f64 {
        let dim = self.dim();
        let mut basis: Vec<Vec<f64>> = vec![Vec::new(); dim];
        let mut total = 0.0;
        for (index, term) in &self.terms {
            for (n, &l) in index.levels().iter().enumerate() {
                let m = self.rules[n].family().level_to_nodes(l);
                let nodes = &self.rules[n].sequence()[..m];
                let bary = &self.bary_cache[n][&l];
                basis[n].resize(m, 0.0);
                basis_values(nodes, bary, y[n], self.spans[n], &mut basis[n]);
            }
            for (key, surplus) in term.keys.iter().zip(&term.surpluses) {
                let mut product = *surplus;
                for (n, &i) in key.iter().enumerate() {
                    product *= basis[n][i as usize];
                }
                total += product;
            }
        }
        total
    }

    /// Evaluate at many points concurrently; the output order matches the
    /// input order, so results are independent of the thread count.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<f64> {
        points.par_iter().map(|y| self.eval(y)).collect()
    }

    /// `(weight, model value)` per unique grid point in lexicographic key
    /// order. Applying the weights to the values integrates the sparse
    /// interpolant against the input density; the weights sum to 1.
    pub fn quadrature_table(&self) -> Vec<(f64, f64)> {
        self.weights
            .iter()
            .map(|(key, &w)| (w, self.grid[key].value))
            .collect()
    }

    /// `(coordinates, model value)` per unique grid point, lexicographic.
    pub fn stored_values(&self) -> Vec<(Vec<f64>, f64)> {
        self.grid.values().map(|p| (p.coords.clone(), p.value)).collect()
    }

    /// Expectation of the surrogate via the per-point quadrature weights.
    pub fn expectation(&self) -> f64 {
        self.quadrature_table().iter().map(|&(w, q)| w * q).sum()
    }

    /// Expectation through the surplus representation,
    /// `Σ_ℓ Σ_i s_ℓ^(i) Π_n w_{n,ℓ_n}[i_n]` — an algebraically equal but
    /// numerically independent route used to cross-check the weights.
    pub fn expectation_via_surpluses(&self) -> f64 {
        let mut total = 0.0;
        for (index, term) in &self.terms {
            let uni: Vec<&Vec<f64>> = index
                .levels()
                .iter()
                .enumerate()
                .map(|(n, &l)| &self.uni_weights[n][&l])
                .collect();
            for (key, surplus) in term.keys.iter().zip(&term.surpluses) {
                let mut w = *surplus;
                for (n, &i) in key.iter().enumerate() {
                    w *= uni[n][i as usize];
                }
                total += w;
            }
        }
        total
    }

    /// Serializable snapshot. Model values (not surpluses) are stored;
    /// reloading replays the hierarchical construction in lexicographic
    /// order, which reproduces the surpluses bitwise.
    pub fn to_doc(&self) -> SurrogateDoc {
        SurrogateDoc {
            rules: self.rules.clone(),
            accepted: self.accepted.iter().cloned().collect(),
            terms: self
                .terms
                .iter()
                .map(|(index, term)| TermDoc {
                    index: index.clone(),
                    values: term.keys.iter().map(|k| self.grid[k].value).collect(),
                })
                .collect(),
        }
    }

    /// Rebuild a surrogate from a snapshot (no model evaluations needed).
    pub fn from_doc(doc: SurrogateDoc) -> Result<Self, SparseError> {
        let mut surrogate = SparseSurrogate::new(doc.rules);
        let mut terms = doc.terms;
        terms.sort_by(|a, b| a.index.cmp(&b.index));
        for term in terms {
            surrogate.insert_term(term.index, &term.values)?;
        }
        for index in doc.accepted {
            surrogate.accept_index(&index)?;
        }
        Ok(surrogate)
    }

    /// Monte Carlo sample of the surrogate under `joint` (stream-seeded),
    /// evaluated concurrently with order-preserving output.
    pub fn sample_surrogate(
        &self,
        joint: &JointDistribution,
        count: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Vec<f64>, DistributionError> {
        let points = joint.sample_stream(count, seed, stream)?;
        Ok(self.eval_many(&points))
    }
}

impl Serialize for SparseSurrogate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseSurrogate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = SurrogateDoc::deserialize(deserializer)?;
        SparseSurrogate::from_doc(doc).map_err(serde::de::Error::custom)
    }
}

/// JSON-facing snapshot of a [`SparseSurrogate`]: rules (with their built
/// node sequences), the accepted index set, and per-index model values —
/// sufficient to reload and evaluate without re-running the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateDoc {
    pub rules: Vec<UnivariateRule>,
    pub accepted: Vec<MultiIndex>,
    pub terms: Vec<TermDoc>,
}

/// Model values at the new points of one index, in lexicographic key order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermDoc {
    pub index: MultiIndex,
    pub values: Vec<f64>,
}
