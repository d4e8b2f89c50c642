//! Monotone (downward-closed) multi-index set algebra.
//!
//! A multi-index `l = (l_1, ..., l_N)` assigns an approximation level to each
//! input dimension. A set of multi-indices is *monotone* (downward closed) if
//! for every member `l` and every dimension `n` with `l_n > 0` the backward
//! neighbor `l - e_n` is also a member. Sparse-grid difference operators
//! telescope correctly exactly on such sets, so every mutation here preserves
//! monotonicity by construction and validates it on insertion.
//!
//! Storage is an ordered set in lexicographic order, which makes iteration —
//! and therefore every downstream floating-point reduction — deterministic.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Errors from multi-index set construction and mutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexSetError {
    /// An operation mixed indices of different dimensionality.
    DimensionMismatch { expected: usize, got: usize },
    /// The index is already a member.
    Duplicate(MultiIndex),
    /// Adding (or keeping) the index would break downward closedness.
    NotDownwardClosed(MultiIndex),
}

impl fmt::Display for IndexSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSetError::DimensionMismatch { expected, got } => {
                write!(f, "multi-index dimension mismatch: expected {expected}, got {got}")
            }
            IndexSetError::Duplicate(idx) => write!(f, "duplicate multi-index {idx}"),
            IndexSetError::NotDownwardClosed(idx) => {
                write!(f, "adding {idx} would break downward closedness")
            }
        }
    }
}

impl std::error::Error for IndexSetError {}

/// A level multi-index: one approximation level per input dimension.
///
/// Ordering is lexicographic (derived from the underlying vector), which is
/// the canonical deterministic order used for set iteration and tie-breaking
/// throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex {
    levels: Vec<u32>,
}

impl MultiIndex {
    pub fn new(levels: Vec<u32>) -> Self {
        MultiIndex { levels }
    }

    /// The root index `(0, ..., 0)` in `dim` dimensions.
    pub fn root(dim: usize) -> Self {
        MultiIndex { levels: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> u32 {
        self.levels[n]
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Total level `|l| = sum_n l_n`.
    pub fn total(&self) -> u32 {
        self.levels.iter().sum()
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Forward neighbor `l + e_n`.
    pub fn bump(&self, n: usize) -> MultiIndex {
        let mut levels = self.levels.clone();
        levels[n] += 1;
        MultiIndex { levels }
    }

    /// Backward neighbor `l - e_n`, or `None` if `l_n = 0`.
    pub fn lower(&self, n: usize) -> Option<MultiIndex> {
        if self.levels[n] == 0 {
            return None;
        }
        let mut levels = self.levels.clone();
        levels[n] -= 1;
        Some(MultiIndex { levels })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A monotone (downward-closed) set of multi-indices with a fixed dimension.
///
/// Value-semantic: mutation goes through validating operations; iteration is
/// always in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    dim: usize,
    members: BTreeSet<MultiIndex>,
}

impl MultiIndexSet {
    /// The empty set in `dim` dimensions (monotone trivially).
    pub fn empty(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        MultiIndexSet { dim, members: BTreeSet::new() }
    }

    /// The singleton `{(0, ..., 0)}`.
    pub fn root(dim: usize) -> Self {
        let mut set = Self::empty(dim);
        set.members.insert(MultiIndex::root(dim));
        set
    }

    /// The isotropic total-level set `{ l : |l| <= total_level }`.
    pub fn isotropic(dim: usize, total_level: u32) -> Self {
        let mut set = Self::empty(dim);
        let mut current = vec![0u32; dim];
        enumerate_total_level(&mut current, 0, total_level, &mut set.members);
        set
    }

    /// The full box `{ l : l <= upper componentwise }`.
    pub fn full_box(upper: &MultiIndex) -> Self {
        let dim = upper.dim();
        let mut set = Self::empty(dim);
        let mut current = vec![0u32; dim];
        loop {
            set.members.insert(MultiIndex::new(current.clone()));
            let mut n = dim;
            loop {
                if n == 0 {
                    return set;
                }
                n -= 1;
                current[n] += 1;
                if current[n] <= upper.level(n) {
                    break;
                }
                current[n] = 0;
            }
        }
    }

    /// Build from arbitrary members, validating dimension agreement,
    /// duplicates, and downward closedness.
    pub fn from_members<I>(dim: usize, members: I) -> Result<Self, IndexSetError>
    where
        I: IntoIterator<Item = MultiIndex>,
    {
        let mut collected = BTreeSet::new();
        for idx in members {
            if idx.dim() != dim {
                return Err(IndexSetError::DimensionMismatch { expected: dim, got: idx.dim() });
            }
            if !collected.insert(idx.clone()) {
                return Err(IndexSetError::Duplicate(idx));
            }
        }
        for idx in &collected {
            for n in 0..dim {
                if let Some(lower) = idx.lower(n) {
                    if !collected.contains(&lower) {
                        return Err(IndexSetError::NotDownwardClosed(idx.clone()));
                    }
                }
            }
        }
        Ok(MultiIndexSet { dim, members: collected })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        self.members.contains(idx)
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// The refinement set: all forward neighbors `l + e_n` of members,
    /// duplicates removed (members themselves may appear; see
    /// [`MultiIndexSet::admissible_set`] for the filtered variant).
    pub fn refinement_set(&self) -> BTreeSet<MultiIndex> {
        let mut out = BTreeSet::new();
        for idx in &self.members {
            for n in 0..self.dim {
                out.insert(idx.bump(n));
            }
        }
        out
    }

    /// The admissible set: refinement-set members outside the set whose
    /// addition keeps it downward closed. For the empty set this is the root
    /// index, the only index that can start a monotone set.
    pub fn admissible_set(&self) -> Vec<MultiIndex> {
        if self.members.is_empty() {
            return vec![MultiIndex::root(self.dim)];
        }
        self.refinement_set()
            .into_iter()
            .filter(|idx| !self.contains(idx) && self.would_stay_monotone(idx))
            .collect()
    }

    /// Whether `idx` could be inserted without breaking downward closedness.
    pub fn would_stay_monotone(&self, idx: &MultiIndex) -> bool {
        if idx.dim() != self.dim {
            return false;
        }
        (0..self.dim).all(|n| match idx.lower(n) {
            Some(lower) => self.contains(&lower),
            None => true,
        })
    }

    /// Insert an admissible index, rejecting duplicates and insertions that
    /// would break monotonicity.
    pub fn insert(&mut self, idx: MultiIndex) -> Result<(), IndexSetError> {
        if idx.dim() != self.dim {
            return Err(IndexSetError::DimensionMismatch { expected: self.dim, got: idx.dim() });
        }
        if self.contains(&idx) {
            return Err(IndexSetError::Duplicate(idx));
        }
        if !self.would_stay_monotone(&idx) {
            return Err(IndexSetError::NotDownwardClosed(idx));
        }
        self.members.insert(idx);
        Ok(())
    }

    /// Definition-level monotonicity check (used by tests and debug
    /// assertions; insertion keeps this true by construction).
    pub fn is_monotone(&self) -> bool {
        self.members.iter().all(|idx| {
            (0..self.dim).all(|n| match idx.lower(n) {
                Some(lower) => self.contains(&lower),
                None => true,
            })
        })
    }
}

/// Recursive enumeration of `{ l : |l| <= remaining }` in lexicographic
/// order, writing into `out`.
fn enumerate_total_level(
    current: &mut Vec<u32>,
    dim: usize,
    remaining: u32,
    out: &mut BTreeSet<MultiIndex>,
) {
    if dim == current.len() {
        out.insert(MultiIndex::new(current.clone()));
        return;
    }
    for level in 0..=remaining {
        current[dim] = level;
        enumerate_total_level(current, dim + 1, remaining - level, out);
        current[dim] = 0;
    }
}
