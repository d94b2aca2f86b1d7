//! Level-graded component towers and their ultrametric boundaries.
//!
//! A tower stores one node set per level value plus a total parent map from
//! each level into the next. The partial order this encodes is recovered by
//! parent walks: meets, order intervals, and branch boundaries never need an
//! abstract poset. The top level always has exactly one node, the finite
//! counterpart of upward directedness.

use std::collections::BTreeMap;

use crate::distance::Distance;
use crate::metric::{FiniteMetricSpace, MetricError};
use crate::morphisms::{MultiMap, OscillationTable};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TowerError {
    #[error("level set must be nonempty")]
    EmptyLevelSet,
    #[error("level values must be strictly increasing")]
    LevelsNotIncreasing,
    #[error("level {level} has no nodes")]
    EmptyLevel { level: usize },
    #[error("top level must have exactly one node, found {count}")]
    MultipleRoots { count: usize },
    #[error("duplicate node id {id:?} on level {level}")]
    DuplicateNodeId { level: usize, id: String },
    #[error("parent map shape mismatch on level {level}")]
    ParentShapeMismatch { level: usize },
    #[error("parent index out of range for node {node} on level {level}")]
    BadParentIndex { level: usize, node: usize },
    #[error("tower is not pruned: node {node} on level {level} has no children")]
    NotPruned { level: usize, node: usize },
    #[error("bad level pair: lambda={lambda} must be below l={l}")]
    BadLevelPair { lambda: usize, l: usize },
    #[error("kept level set must include the top level")]
    TopLevelDropped,
    #[error("level index {index} out of range")]
    LevelIndexOutOfRange { index: usize },
    #[error("space is not macro-connected at the top level value ({block_count} components)")]
    NotMacroConnectedAtTop { block_count: usize },
    #[error("tower does not match the canonical tower of the space at these levels")]
    TowerMismatch,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A graded tower: per-level nodes with upward parent maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    levels: Vec<Distance>,
    nodes: Vec<Vec<String>>,
    /// `parent[l][i]` is the index on level `l + 1` of the parent of node
    /// `i` on level `l`. One entry per non-top level.
    parent: Vec<Vec<usize>>,
}

/// A maximal chain through a pruned tower, one node index per level from
/// bottom to top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub node_per_level: Vec<usize>,
}

impl Branch {
    /// Index of the lowest level where both branches pass through the same
    /// node. Exists because the top level is a single node.
    pub fn meet_level(&self, other: &Branch) -> usize {
        self.node_per_level
            .iter()
            .zip(&other.node_per_level)
            .position(|(a, b)| a == b)
            .expect("branches meet at the root")
    }
}

impl Tower {
    pub fn new(
        levels: Vec<Distance>,
        nodes: Vec<Vec<String>>,
        parent: Vec<Vec<usize>>,
    ) -> Result<Self, TowerError> {
        if levels.is_empty() {
            return Err(TowerError::EmptyLevelSet);
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TowerError::LevelsNotIncreasing);
        }
        if nodes.len() != levels.len() || parent.len() + 1 != levels.len() {
            return Err(TowerError::ParentShapeMismatch { level: 0 });
        }
        for (l, ids) in nodes.iter().enumerate() {
            if ids.is_empty() {
                return Err(TowerError::EmptyLevel { level: l });
            }
            let mut seen = BTreeMap::new();
            for id in ids {
                if seen.insert(id, ()).is_some() {
                    return Err(TowerError::DuplicateNodeId {
                        level: l,
                        id: id.clone(),
                    });
                }
            }
        }
        let top = levels.len() - 1;
        if nodes[top].len() != 1 {
            return Err(TowerError::MultipleRoots {
                count: nodes[top].len(),
            });
        }
        for l in 0..top {
            if parent[l].len() != nodes[l].len() {
                return Err(TowerError::ParentShapeMismatch { level: l });
            }
            for (i, &p) in parent[l].iter().enumerate() {
                if p >= nodes[l + 1].len() {
                    return Err(TowerError::BadParentIndex { level: l, node: i });
                }
            }
        }
        Ok(Tower {
            levels,
            nodes,
            parent,
        })
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn level_values(&self) -> &[Distance] {
        &self.levels
    }

    pub fn level_value(&self, level: usize) -> &Distance {
        &self.levels[level]
    }

    pub fn node_count(&self, level: usize) -> usize {
        self.nodes[level].len()
    }

    pub fn node_ids(&self, level: usize) -> &[String] {
        &self.nodes[level]
    }

    pub fn node_id(&self, level: usize, node: usize) -> &str {
        &self.nodes[level][node]
    }

    pub fn parent_of(&self, level: usize, node: usize) -> usize {
        self.parent[level][node]
    }

    pub(crate) fn parent_maps(&self) -> &[Vec<usize>] {
        &self.parent
    }

    /// Walks parents from (`level`, `node`) up to `to_level`.
    pub fn ancestor(&self, level: usize, node: usize, to_level: usize) -> usize {
        let mut cur = node;
        for l in level..to_level {
            cur = self.parent[l][cur];
        }
        cur
    }

    /// Every non-bottom node has at least one child.
    pub fn is_pruned(&self) -> bool {
        for l in 0..self.levels.len() - 1 {
            let mut has_child = vec![false; self.nodes[l + 1].len()];
            for &p in &self.parent[l] {
                has_child[p] = true;
            }
            if has_child.iter().any(|h| !h) {
                return false;
            }
        }
        true
    }

    /// Min and max over level-`l` nodes of their number of level-`lambda`
    /// descendants.
    pub fn degrees(&self, lambda: usize, l: usize) -> Result<(u64, u64), TowerError> {
        if l >= self.levels.len() {
            return Err(TowerError::LevelIndexOutOfRange { index: l });
        }
        if lambda >= l {
            return Err(TowerError::BadLevelPair { lambda, l });
        }
        let mut counts = vec![0u64; self.nodes[l].len()];
        for i in 0..self.nodes[lambda].len() {
            counts[self.ancestor(lambda, i, l)] += 1;
        }
        let min = *counts.iter().min().expect("level is nonempty");
        let max = *counts.iter().max().expect("level is nonempty");
        Ok((min, max))
    }

    /// Equal min and max child counts between every consecutive level pair.
    pub fn is_homogeneous(&self) -> bool {
        (0..self.levels.len().saturating_sub(1)).all(|l| {
            let (min, max) = self.degrees(l, l + 1).expect("consecutive levels");
            min == max
        })
    }

    /// Restricts to the given level indices, composing parent maps across
    /// dropped levels. The kept set must contain the top level.
    pub fn level_subtower(&self, kept: &[usize]) -> Result<Tower, TowerError> {
        if kept.is_empty() {
            return Err(TowerError::EmptyLevelSet);
        }
        let mut kept = kept.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&l| l >= self.levels.len()) {
            return Err(TowerError::LevelIndexOutOfRange { index: bad });
        }
        if *kept.last().unwrap() != self.levels.len() - 1 {
            return Err(TowerError::TopLevelDropped);
        }
        let levels = kept.iter().map(|&l| self.levels[l].clone()).collect();
        let nodes = kept.iter().map(|&l| self.nodes[l].clone()).collect();
        let mut parent = Vec::new();
        for w in kept.windows(2) {
            let (from, to) = (w[0], w[1]);
            let map: Vec<usize> = (0..self.nodes[from].len())
                .map(|i| self.ancestor(from, i, to))
                .collect();
            parent.push(map);
        }
        Tower::new(levels, nodes, parent)
    }

    /// All maximal chains, indexed by bottom-level node. Requires a pruned
    /// tower, where branches and bottom nodes correspond bijectively.
    pub fn branches(&self) -> Result<Vec<Branch>, TowerError> {
        self.require_pruned()?;
        Ok((0..self.nodes[0].len())
            .map(|b| {
                let mut chain = Vec::with_capacity(self.levels.len());
                let mut cur = b;
                chain.push(cur);
                for l in 0..self.levels.len() - 1 {
                    cur = self.parent[l][cur];
                    chain.push(cur);
                }
                Branch {
                    node_per_level: chain,
                }
            })
            .collect())
    }

    fn require_pruned(&self) -> Result<(), TowerError> {
        for l in 0..self.levels.len() - 1 {
            let mut has_child = vec![false; self.nodes[l + 1].len()];
            for &p in &self.parent[l] {
                has_child[p] = true;
            }
            if let Some(node) = has_child.iter().position(|h| !h) {
                return Err(TowerError::NotPruned { level: l + 1, node });
            }
        }
        Ok(())
    }
}

/// Builds the canonical tower of a space over the given level values:
/// level-`lambda` nodes are the `lambda`-components, parents are component
/// inclusions, node ids the label of each block's smallest point.
pub fn canonical_tower(
    space: &FiniteMetricSpace,
    levels: &[Distance],
) -> Result<Tower, TowerError> {
    if levels.is_empty() {
        return Err(TowerError::EmptyLevelSet);
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TowerError::LevelsNotIncreasing);
    }
    let partitions: Vec<_> = levels
        .iter()
        .map(|eps| space.epsilon_components(eps))
        .collect();
    let top_blocks = partitions.last().unwrap().blocks.len();
    if top_blocks != 1 {
        return Err(TowerError::NotMacroConnectedAtTop {
            block_count: top_blocks,
        });
    }
    let nodes: Vec<Vec<String>> = partitions
        .iter()
        .map(|part| {
            part.blocks
                .iter()
                .map(|b| space.label(b[0]).to_string())
                .collect()
        })
        .collect();
    let mut parent = Vec::new();
    for w in partitions.windows(2) {
        let (fine, coarse) = (&w[0], &w[1]);
        let map: Vec<usize> = fine
            .blocks
            .iter()
            .map(|b| {
                coarse
                    .block_of(b[0])
                    .expect("coarser partition covers all points")
            })
            .collect();
        parent.push(map);
    }
    Tower::new(levels.to_vec(), nodes, parent)
}

/// Boundary of a pruned tower: branches with the meet-level ultrametric.
/// Points are labeled by their bottom node.
pub fn boundary_space(tower: &Tower) -> Result<FiniteMetricSpace, TowerError> {
    let branches = tower.branches()?;
    let labels: Vec<String> = (0..branches.len())
        .map(|b| tower.node_id(0, branches[b].node_per_level[0]).to_string())
        .collect();
    let n = branches.len();
    let zero = Distance::zero();
    let mut matrix = vec![vec![zero; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let meet = branches[i].meet_level(&branches[j]);
            let d = tower.level_value(meet).clone();
            matrix[i][j] = d.clone();
            matrix[j][i] = d;
        }
    }
    let space = FiniteMetricSpace::from_valid_matrix(labels, matrix);
    debug_assert!(space.is_ultrametric());
    Ok(space)
}

/// The canonical map of a space into the boundary of its canonical tower,
/// with oscillation tables at zero and every tower level.
#[derive(Debug, Clone)]
pub struct CanonicalMapCertificate {
    pub map: MultiMap,
    pub forward: OscillationTable,
    pub inverse: OscillationTable,
}

/// Sends each point to the branch of its components. The tower must be the
/// canonical tower of the space over its own level values.
pub fn canonical_map(
    space: &FiniteMetricSpace,
    tower: &Tower,
) -> Result<CanonicalMapCertificate, TowerError> {
    let rebuilt = canonical_tower(space, tower.level_values())?;
    if &rebuilt != tower {
        return Err(TowerError::TowerMismatch);
    }
    let boundary = boundary_space(tower)?;
    let bottom = space.epsilon_components(tower.level_value(0));
    let pairs: Vec<(usize, usize)> = (0..space.point_count())
        .map(|p| {
            let block = bottom.block_of(p).expect("partition covers all points");
            (p, block)
        })
        .collect();
    let map = MultiMap::new(space.clone(), boundary, pairs)
        .expect("canonical map pairs are always in range");
    let mut scales = vec![Distance::zero()];
    scales.extend(tower.level_values().iter().cloned());
    let forward = map.oscillation_table(&scales);
    let inverse = map.invert().oscillation_table(&scales);
    Ok(CanonicalMapCertificate {
        map,
        forward,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::KappaSpec;
    use crate::testutil::line_space;

    fn d(n: u64) -> Distance {
        Distance::from_int(n)
    }

    fn kappa(k: u64, n: u32) -> FiniteMetricSpace {
        FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(k, n), 1 << 20).unwrap()
    }

    #[test]
    fn canonical_tower_of_square() {
        let s = kappa(2, 2);
        let t = canonical_tower(&s, &[d(1), d(2)]).unwrap();
        assert_eq!(t.level_count(), 2);
        assert_eq!(t.node_count(0), 2);
        assert_eq!(t.node_count(1), 1);
        assert_eq!(t.parent_of(0, 0), 0);
        assert_eq!(t.parent_of(0, 1), 0);
        assert!(t.is_pruned());
        assert!(t.is_homogeneous());
    }

    #[test]
    fn canonical_tower_at_diameter_is_single_node() {
        let s = line_space(&[0, 3, 9]);
        let t = canonical_tower(&s, &[s.diameter()]).unwrap();
        assert_eq!(t.level_count(), 1);
        assert_eq!(t.node_count(0), 1);
    }

    #[test]
    fn canonical_tower_with_zero_bottom() {
        let s = line_space(&[0, 1, 2, 3]);
        let t = canonical_tower(&s, &[Distance::zero(), d(1)]).unwrap();
        assert_eq!(t.node_count(0), 4);
        assert_eq!(t.node_count(1), 1);
    }

    #[test]
    fn canonical_tower_requires_connected_top() {
        let s = kappa(2, 2);
        let err = canonical_tower(&s, &[d(1)]).unwrap_err();
        assert_eq!(err, TowerError::NotMacroConnectedAtTop { block_count: 2 });
    }

    #[test]
    fn boundary_of_square_tower() {
        let s = kappa(2, 2);
        let t = canonical_tower(&s, &[d(1), d(2)]).unwrap();
        let b = boundary_space(&t).unwrap();
        assert_eq!(b.point_count(), 2);
        assert_eq!(b.distance(0, 1), &d(2));
    }

    #[test]
    fn boundary_of_single_branch_tower() {
        let s = line_space(&[0, 5]);
        let t = canonical_tower(&s, &[d(5)]).unwrap();
        let b = boundary_space(&t).unwrap();
        assert_eq!(b.point_count(), 1);
    }

    #[test]
    fn boundary_of_fan_tower() {
        // Three singletons under one root: all meets at the root.
        let s = kappa(3, 1);
        let t = canonical_tower(&s, &[Distance::zero(), d(1)]).unwrap();
        let b = boundary_space(&t).unwrap();
        assert_eq!(b.point_count(), 3);
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_eq!(b.distance(i, j), &d(1));
            }
        }
    }

    #[test]
    fn degrees_on_generators() {
        let t = canonical_tower(&kappa(2, 2), &[d(1), d(2)]).unwrap();
        assert_eq!(t.degrees(0, 1).unwrap(), (2, 2));

        let t = canonical_tower(&kappa(3, 3), &[d(1), d(2), d(3)]).unwrap();
        assert_eq!(t.degrees(0, 1).unwrap(), (3, 3));
        assert_eq!(t.degrees(1, 2).unwrap(), (3, 3));
        assert_eq!(t.degrees(0, 2).unwrap(), (9, 9));

        assert_eq!(
            t.degrees(1, 1).unwrap_err(),
            TowerError::BadLevelPair { lambda: 1, l: 1 }
        );
    }

    #[test]
    fn chain_tower_degrees_are_one() {
        let s = line_space(&[0, 1]);
        let t = canonical_tower(&s, &[d(1), d(2), d(3)]).unwrap();
        assert_eq!(t.degrees(0, 1).unwrap(), (1, 1));
        assert_eq!(t.degrees(1, 2).unwrap(), (1, 1));
    }

    #[test]
    fn homogeneity_counterexample() {
        let t = Tower::new(
            vec![d(1), d(2), d(3)],
            vec![
                vec!["a".into(), "b".into(), "c".into()],
                vec!["u".into(), "v".into()],
                vec!["r".into()],
            ],
            vec![vec![0, 0, 1], vec![0, 0]],
        )
        .unwrap();
        assert!(t.is_pruned());
        assert!(!t.is_homogeneous());
        assert_eq!(t.degrees(0, 1).unwrap(), (1, 2));
    }

    #[test]
    fn single_node_tower_is_homogeneous_and_pruned() {
        let t = Tower::new(vec![d(1)], vec![vec!["r".into()]], vec![]).unwrap();
        assert!(t.is_pruned());
        assert!(t.is_homogeneous());
    }

    #[test]
    fn non_pruned_tower_has_no_branches() {
        let t = Tower::new(
            vec![d(1), d(2), d(3)],
            vec![
                vec!["a".into()],
                vec!["u".into(), "v".into()],
                vec!["r".into()],
            ],
            vec![vec![0], vec![0, 0]],
        )
        .unwrap();
        assert!(!t.is_pruned());
        assert_eq!(
            t.branches().unwrap_err(),
            TowerError::NotPruned { level: 1, node: 1 }
        );
        assert!(boundary_space(&t).is_err());
    }

    #[test]
    fn subtower_identity_and_composition() {
        let s = kappa(2, 3);
        let t = canonical_tower(&s, &[d(1), d(2), d(3)]).unwrap();

        let same = t.level_subtower(&[0, 1, 2]).unwrap();
        assert_eq!(same, t);

        let skip = t.level_subtower(&[0, 2]).unwrap();
        assert_eq!(skip.degrees(0, 1).unwrap(), (4, 4));

        let top = t.level_subtower(&[2]).unwrap();
        assert_eq!(top.level_count(), 1);
        assert_eq!(top.node_count(0), 1);

        assert_eq!(
            t.level_subtower(&[0, 1]).unwrap_err(),
            TowerError::TopLevelDropped
        );
    }

    #[test]
    fn subtower_agrees_with_canonical_on_sublevels() {
        let s = kappa(2, 3);
        let t = canonical_tower(&s, &[d(1), d(2), d(3)]).unwrap();
        let sub = t.level_subtower(&[1, 2]).unwrap();
        let direct = canonical_tower(&s, &[d(2), d(3)]).unwrap();
        assert_eq!(sub, direct);
    }

    #[test]
    fn canonical_map_oscillations() {
        let s = kappa(2, 2);
        let t = canonical_tower(&s, &[d(1), d(2)]).unwrap();
        let cert = canonical_map(&s, &t).unwrap();
        assert!(cert.map.is_total());
        assert!(cert.map.is_surjective());
        // Scale-1-close points share a branch; the inverse spreads a branch
        // over its bottom component.
        assert_eq!(cert.forward.value_at(&d(1)).unwrap(), &Distance::zero());
        assert_eq!(
            cert.inverse.value_at(&Distance::zero()).unwrap(),
            &d(1)
        );

        let t0 = canonical_tower(&s, &[Distance::zero(), d(1), d(2)]).unwrap();
        let cert0 = canonical_map(&s, &t0).unwrap();
        assert_eq!(
            cert0.inverse.value_at(&Distance::zero()).unwrap(),
            &Distance::zero()
        );

        let one = line_space(&[0]);
        let t1 = canonical_tower(&one, &[d(1)]).unwrap();
        let cert1 = canonical_map(&one, &t1).unwrap();
        assert!(cert1
            .forward
            .entries()
            .iter()
            .all(|e| e.omega == crate::morphisms::OscillationValue::Finite(Distance::zero())));
    }

    #[test]
    fn canonical_map_rejects_foreign_tower() {
        let s = kappa(2, 2);
        let other = canonical_tower(&kappa(2, 2), &[d(1), d(2)]).unwrap();
        let mut levels = other.level_values().to_vec();
        levels.push(d(3));
        let wrong = canonical_tower(&kappa(2, 3), &[d(1), d(2), d(3)]).unwrap();
        assert_eq!(
            canonical_map(&s, &wrong).unwrap_err(),
            TowerError::TowerMismatch
        );
        let _ = levels;
    }
}
