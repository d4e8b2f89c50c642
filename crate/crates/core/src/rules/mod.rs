//! Nested univariate collocation rules and PDF-adapted quadrature weights.
//!
//! Two node families are provided, both *nested*: every level's node set
//! contains the previous level's, which makes hierarchical-surplus sparse
//! grids interpolatory and keeps model evaluations reusable across levels.
//!
//! - Clenshaw-Curtis ([`clenshaw_curtis`]): Chebyshev-extrema nodes with
//!   level-to-nodes map `m(0) = 1`, `m(l) = 2^l + 1`. Node positions depend
//!   only on the interval, not on the density.
//! - Weighted Leja ([`leja`]): a greedy sequence maximizing
//!   `sqrt(rho(y)) * prod_k |y - y_k|`, with the granular map `m(l) = l + 1`.
//!   Node positions adapt to the density.
//!
//! Quadrature weights for either family are the integrals of the Lagrange
//! cardinal polynomials against the input density ([`weights`]), so an
//! `n`-node rule integrates polynomials of degree `n - 1` exactly against
//! that density.
//!
//! A [`UnivariateRule`] stores the growing node sequence in *insertion
//! order*: the `g`-th entry is the `g`-th node ever added, and the level-`l`
//! node set is exactly the first `m(l)` entries. That global index `g` is the
//! node's identity across all tensor grids (no floating-point comparisons are
//! needed to deduplicate points).

pub mod clenshaw_curtis;
pub mod leja;
pub mod weights;

use crate::dist::BoundedDistribution;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Errors from rule construction.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleError {
    /// The Leja objective was nowhere finite (cannot happen for a valid
    /// density; guarded anyway).
    ObjectiveUnbounded,
    /// A new node landed within `1e-14 * (b - a)` of an existing one.
    NodeCollision { position: f64 },
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleError::ObjectiveUnbounded => {
                write!(f, "node-placement objective is nowhere finite")
            }
            RuleError::NodeCollision { position } => {
                write!(f, "new node at {position} collides with an existing node")
            }
        }
    }
}

impl std::error::Error for RuleError {}

/// The two supported nested node families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleFamily {
    ClenshawCurtis,
    Leja,
}

impl RuleFamily {
    /// The level-to-nodes map `m(l)`: number of nodes in the level-`l` rule.
    pub fn level_to_nodes(self, level: u32) -> usize {
        match self {
            RuleFamily::ClenshawCurtis => {
                if level == 0 {
                    1
                } else {
                    (1usize << level) + 1
                }
            }
            RuleFamily::Leja => level as usize + 1,
        }
    }

    /// Smallest level whose rule has at least `count` nodes.
    pub fn level_for_count(self, count: usize) -> u32 {
        let mut level = 0;
        while self.level_to_nodes(level) < count {
            level += 1;
        }
        level
    }
}

impl fmt::Display for RuleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleFamily::ClenshawCurtis => write!(f, "clenshaw-curtis"),
            RuleFamily::Leja => write!(f, "leja"),
        }
    }
}

/// One level of a quadrature rule: nodes with their PDF-adapted weights.
///
/// Invariants: the weights sum to 1 (the density integrates to 1) and the
/// `n`-node rule integrates polynomials of degree `n - 1` exactly against
/// the density. Nodes are listed in the family's display order: sorted
/// ascending for Clenshaw-Curtis, insertion order for Leja.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureLevel {
    pub level: u32,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// A growing nested node sequence for one input dimension.
///
/// Immutable through shared references; extension appends nodes without
/// moving existing ones, so previously handed-out global indices stay valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateRule {
    family: RuleFamily,
    dist: BoundedDistribution,
    /// Insertion-ordered node sequence; the level-`l` node set is the first
    /// `m(l)` entries.
    seq: Vec<f64>,
}

impl UnivariateRule {
    /// An empty rule; extend with [`UnivariateRule::ensure_level`].
    pub fn new(family: RuleFamily, dist: BoundedDistribution) -> Self {
        UnivariateRule { family, dist, seq: Vec::new() }
    }

    /// Construct and immediately build all nodes up to `level`.
    pub fn with_level(
        family: RuleFamily,
        dist: BoundedDistribution,
        level: u32,
    ) -> Result<Self, RuleError> {
        let mut rule = Self::new(family, dist);
        rule.ensure_level(level)?;
        Ok(rule)
    }

    pub fn family(&self) -> RuleFamily {
        self.family
    }

    pub fn dist(&self) -> &BoundedDistribution {
        &self.dist
    }

    /// Number of nodes built so far.
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// The node with global index `g` (insertion order).
    pub fn node(&self, g: usize) -> f64 {
        self.seq[g]
    }

    /// The full insertion-ordered sequence built so far.
    pub fn sequence(&self) -> &[f64] {
        &self.seq
    }

    /// The level-`l` node set in global (insertion) order. Panics if the
    /// rule has not been built to that level.
    pub fn level_nodes_global(&self, level: u32) -> &[f64] {
        let m = self.family.level_to_nodes(level);
        assert!(
            m <= self.seq.len(),
            "rule built to {} nodes, level {level} needs {m}",
            self.seq.len()
        );
        &self.seq[..m]
    }

    /// Extend the sequence so that the level-`level` rule is available.
    /// Existing nodes are never moved or recomputed.
    pub fn ensure_level(&mut self, level: u32) -> Result<(), RuleError> {
        self.ensure_count(self.family.level_to_nodes(level))
    }

    /// Extend the sequence to at least `count` nodes (rounded up to the next
    /// complete level for Clenshaw-Curtis).
    pub fn ensure_count(&mut self, count: usize) -> Result<(), RuleError> {
        if count <= self.seq.len() {
            return Ok(());
        }
        match self.family {
            RuleFamily::ClenshawCurtis => {
                let target_level = self.family.level_for_count(count);
                let mut level = self.built_cc_levels();
                while level <= target_level {
                    let new_nodes = clenshaw_curtis::new_nodes_at_level(level, &self.dist);
                    self.append_checked(new_nodes)?;
                    level += 1;
                }
                Ok(())
            }
            RuleFamily::Leja => {
                while self.seq.len() < count {
                    let next = leja::next_node(&self.dist, &self.seq)?;
                    self.append_checked(vec![next])?;
                }
                Ok(())
            }
        }
    }

    /// Number of complete Clenshaw-Curtis levels built (0 if empty).
    fn built_cc_levels(&self) -> u32 {
        let mut level = 0;
        while self.family.level_to_nodes(level) <= self.seq.len() {
            level += 1;
        }
        level
    }

    fn append_checked(&mut self, new_nodes: Vec<f64>) -> Result<(), RuleError> {
        let span = self.dist.upper() - self.dist.lower();
        for node in new_nodes {
            for &existing in &self.seq {
                if (node - existing).abs() <= 1e-14 * span {
                    return Err(RuleError::NodeCollision { position: node });
                }
            }
            debug_assert!(node >= self.dist.lower() && node <= self.dist.upper());
            self.seq.push(node);
        }
        Ok(())
    }

    /// PDF-adapted quadrature weights for the first `count` nodes, in global
    /// (insertion) order.
    pub fn weights_for_count(&self, count: usize) -> Vec<f64> {
        assert!(count >= 1 && count <= self.seq.len());
        weights::interpolatory_weights(&self.seq[..count], &self.dist)
    }

    /// Weights of the level-`level` rule in global order.
    pub fn weights_global(&self, level: u32) -> Vec<f64> {
        self.weights_for_count(self.family.level_to_nodes(level))
    }

    /// The level-`level` rule as nodes/weights in display order (sorted
    /// ascending for Clenshaw-Curtis, insertion order for Leja).
    pub fn quadrature_level(&self, level: u32) -> QuadratureLevel {
        let m = self.family.level_to_nodes(level);
        let nodes_global = self.level_nodes_global(level).to_vec();
        let weights_global = self.weights_for_count(m);
        match self.family {
            RuleFamily::Leja => {
                QuadratureLevel { level, nodes: nodes_global, weights: weights_global }
            }
            RuleFamily::ClenshawCurtis => {
                let order = clenshaw_curtis::global_of_sorted(level);
                let nodes = order.iter().map(|&g| nodes_global[g]).collect();
                let weights = order.iter().map(|&g| weights_global[g]).collect();
                QuadratureLevel { level, nodes, weights }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeSet;

    fn uniform(a: f64, b: f64) -> BoundedDistribution {
        BoundedDistribution::uniform(a, b).unwrap()
    }

    fn beta36(a: f64, b: f64) -> BoundedDistribution {
        BoundedDistribution::beta(3.0, 6.0, a, b).unwrap()
    }

    #[test]
    fn level_to_nodes_maps() {
        let cc = RuleFamily::ClenshawCurtis;
        assert_eq!(
            (0..5).map(|l| cc.level_to_nodes(l)).collect::<Vec<_>>(),
            vec![1, 3, 5, 9, 17]
        );
        let leja = RuleFamily::Leja;
        assert_eq!(
            (0..5).map(|l| leja.level_to_nodes(l)).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        assert_eq!(cc.level_for_count(6), 3);
        assert_eq!(cc.level_for_count(17), 4);
        assert_eq!(leja.level_for_count(17), 16);
    }

    #[test]
    fn nestedness_is_exact_for_both_families() {
        for family in [RuleFamily::ClenshawCurtis, RuleFamily::Leja] {
            for dist in [uniform(2.16, 2.64), beta36(2.16, 2.64)] {
                let max_level = match family {
                    RuleFamily::ClenshawCurtis => 4,
                    RuleFamily::Leja => 16,
                };
                let rule = UnivariateRule::with_level(family, dist, max_level).unwrap();
                for level in 1..=max_level {
                    let coarse: BTreeSet<u64> = rule
                        .level_nodes_global(level - 1)
                        .iter()
                        .map(|x| x.to_bits())
                        .collect();
                    let fine: BTreeSet<u64> =
                        rule.level_nodes_global(level).iter().map(|x| x.to_bits()).collect();
                    assert!(
                        coarse.is_subset(&fine),
                        "{family} level {level} not nested for {dist:?}"
                    );
                }
                // All nodes inside [a, b], pairwise distinct.
                let span = dist.upper() - dist.lower();
                let seq = rule.sequence();
                for (i, &x) in seq.iter().enumerate() {
                    assert!(x >= dist.lower() && x <= dist.upper());
                    for &y in &seq[..i] {
                        assert!((x - y).abs() > 1e-14 * span);
                    }
                }
            }
        }
    }

    #[test]
    fn extension_never_moves_existing_nodes() {
        let dist = beta36(-1.0, 1.0);
        let mut rule = UnivariateRule::new(RuleFamily::Leja, dist);
        rule.ensure_count(6).unwrap();
        let prefix: Vec<u64> = rule.sequence().iter().map(|x| x.to_bits()).collect();
        rule.ensure_count(17).unwrap();
        let extended: Vec<u64> = rule.sequence()[..6].iter().map(|x| x.to_bits()).collect();
        assert_eq!(prefix, extended, "Leja extension must preserve earlier nodes bitwise");
    }

    #[test]
    fn display_order_matches_family_convention() {
        let rule = UnivariateRule::with_level(
            RuleFamily::ClenshawCurtis,
            uniform(-1.0, 1.0),
            2,
        )
        .unwrap();
        let level = rule.quadrature_level(2);
        let mut sorted = level.nodes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(level.nodes, sorted, "Clenshaw-Curtis display order is ascending");

        let leja = UnivariateRule::with_level(RuleFamily::Leja, uniform(-1.0, 1.0), 2).unwrap();
        let level = leja.quadrature_level(2);
        assert_eq!(level.nodes, leja.sequence()[..3].to_vec(), "Leja display order is insertion");
    }

    #[test]
    fn quadrature_exactness_monomials() {
        // n-node interpolatory rules integrate y^k, k < n, exactly against
        // the density; compare with analytic raw moments.
        for family in [RuleFamily::ClenshawCurtis, RuleFamily::Leja] {
            for dist in [uniform(0.3, 2.1), beta36(0.3, 2.1), beta36(27.0, 33.0)] {
                let levels: Vec<u32> = match family {
                    RuleFamily::ClenshawCurtis => (0..=4).collect(),
                    RuleFamily::Leja => (0..=16).collect(),
                };
                let rule = UnivariateRule::with_level(family, dist, *levels.last().unwrap())
                    .unwrap();
                for &level in &levels {
                    let m = family.level_to_nodes(level);
                    let nodes = rule.level_nodes_global(level);
                    let weights = rule.weights_for_count(m);
                    let total: f64 = weights.iter().sum();
                    assert!(
                        (total - 1.0).abs() < 1e-12,
                        "{family} level {level} {dist:?}: weights sum to {total}"
                    );
                    for k in 0..m as u32 {
                        let quad: f64 = nodes
                            .iter()
                            .zip(&weights)
                            .map(|(y, w)| w * y.powi(k as i32))
                            .sum();
                        let exact = dist.raw_moment(k);
                        assert_relative_eq!(
                            quad,
                            exact,
                            max_relative = 1e-11,
                        );
                    }
                }
            }
        }
    }
}
