//! Multi-maps with oscillation certificates, and tower morphisms with the
//! constructive embedding and isomorphism builders.

use std::collections::BTreeSet;

use crate::distance::Distance;
use crate::metric::FiniteMetricSpace;
use crate::towers::{Tower, TowerError};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("relation has no pairs")]
    EmptyRelation,
    #[error("source of the second map must equal the target of the first")]
    SpaceMismatch,
    #[error("pair ({src}, {dst}) out of range")]
    PairOutOfRange { src: usize, dst: usize },
    #[error("tower is not pruned")]
    NotPruned,
    #[error("bad level map: {0}")]
    BadLevelMap(String),
    #[error("degree condition fails at source level {level}")]
    DegreeConditionViolated { level: usize },
    #[error("level map must be surjective onto the target levels")]
    LevelMapNotSurjective,
    #[error("invalid morphism: {0}")]
    InvalidMorphism(MorphismViolation),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// A relation between two finite metric spaces, stored as sorted index
/// pairs. Totality and surjectivity are computed predicates, not invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiMap {
    source: FiniteMetricSpace,
    target: FiniteMetricSpace,
    pairs: BTreeSet<(usize, usize)>,
}

impl MultiMap {
    pub fn new(
        source: FiniteMetricSpace,
        target: FiniteMetricSpace,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MorphismError> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        for &(src, dst) in &pairs {
            if src >= source.point_count() || dst >= target.point_count() {
                return Err(MorphismError::PairOutOfRange { src, dst });
            }
        }
        Ok(MultiMap {
            source,
            target,
            pairs,
        })
    }

    pub fn identity(space: &FiniteMetricSpace) -> Self {
        MultiMap {
            source: space.clone(),
            target: space.clone(),
            pairs: (0..space.point_count()).map(|p| (p, p)).collect(),
        }
    }

    pub fn source(&self) -> &FiniteMetricSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteMetricSpace {
        &self.target
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn image_of(&self, src: usize) -> Vec<usize> {
        self.pairs
            .range((src, 0)..=(src, usize::MAX))
            .map(|&(_, d)| d)
            .collect()
    }

    pub fn invert(&self) -> MultiMap {
        MultiMap {
            source: self.target.clone(),
            target: self.source.clone(),
            pairs: self.pairs.iter().map(|&(s, d)| (d, s)).collect(),
        }
    }

    pub fn is_total(&self) -> bool {
        let mut covered = vec![false; self.source.point_count()];
        for &(s, _) in &self.pairs {
            covered[s] = true;
        }
        covered.iter().all(|&c| c)
    }

    pub fn is_surjective(&self) -> bool {
        let mut covered = vec![false; self.target.point_count()];
        for &(_, d) in &self.pairs {
            covered[d] = true;
        }
        covered.iter().all(|&c| c)
    }

    /// Single-valued everywhere it is defined.
    pub fn is_single_valued(&self) -> bool {
        let mut last: Option<usize> = None;
        for &(s, _) in &self.pairs {
            if last == Some(s) {
                return false;
            }
            last = Some(s);
        }
        true
    }

    /// The graph of a bijective single-valued function.
    pub fn is_bijective_function(&self) -> bool {
        self.is_total()
            && self.is_surjective()
            && self.is_single_valued()
            && self.invert().is_single_valued()
    }

    /// Largest target distance between images of source points at distance
    /// at most `delta`. The supremum over subsets of diameter `<= delta`
    /// reduces to pairs because diameters are determined pairwise.
    pub fn oscillation_at(&self, delta: &Distance) -> Distance {
        let thr = self.source.threshold_rank(delta);
        let sources: Vec<usize> = {
            let mut v: Vec<usize> = self.pairs.iter().map(|&(s, _)| s).collect();
            v.dedup();
            v
        };
        let images: Vec<Vec<usize>> = sources.iter().map(|&s| self.image_of(s)).collect();
        let mut max_rank = 0u32;
        for (ai, &a) in sources.iter().enumerate() {
            for (bi, &b) in sources.iter().enumerate().skip(ai) {
                if (self.source.rank(a, b) as usize) >= thr {
                    continue;
                }
                for &y in &images[ai] {
                    for &z in &images[bi] {
                        max_rank = max_rank.max(self.target.rank(y, z));
                    }
                }
            }
        }
        self.target.value_at_rank(max_rank).clone()
    }

    /// Oscillation table at the given scales. Errors on an empty relation.
    pub fn oscillation(&self, scales: &[Distance]) -> Result<OscillationTable, MorphismError> {
        if self.pairs.is_empty() {
            return Err(MorphismError::EmptyRelation);
        }
        Ok(self.oscillation_table(scales))
    }

    pub(crate) fn oscillation_table(&self, scales: &[Distance]) -> OscillationTable {
        let mut scales = scales.to_vec();
        scales.sort();
        scales.dedup();
        OscillationTable {
            entries: scales
                .into_iter()
                .map(|delta| {
                    let omega = OscillationValue::Finite(self.oscillation_at(&delta));
                    OscillationEntry { delta, omega }
                })
                .collect(),
        }
    }
}

/// Relation composition: `compose(phi, psi)` applies `phi` first.
pub fn compose(phi: &MultiMap, psi: &MultiMap) -> Result<MultiMap, MorphismError> {
    if phi.target != psi.source {
        return Err(MorphismError::SpaceMismatch);
    }
    let mut pairs = BTreeSet::new();
    for &(x, y) in &phi.pairs {
        for z in psi.image_of(y) {
            pairs.insert((x, z));
        }
    }
    Ok(MultiMap {
        source: phi.source.clone(),
        target: psi.target.clone(),
        pairs,
    })
}

/// Oscillation at one scale: finite value, or the marker reserved for
/// relations over unbounded carriers (never produced for finite spaces).
/// Serializes as the value itself, with `"inf"` for the marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OscillationValue {
    Finite(Distance),
    Infinite,
}

impl serde::Serialize for OscillationValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            OscillationValue::Finite(d) => d.serialize(serializer),
            OscillationValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for OscillationValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        if value.as_str() == Some("inf") {
            return Ok(OscillationValue::Infinite);
        }
        let d: Distance = serde_json::from_value(value).map_err(serde::de::Error::custom)?;
        Ok(OscillationValue::Finite(d))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OscillationEntry {
    pub delta: Distance,
    pub omega: OscillationValue,
}

/// Oscillation sampled at an increasing list of scales. Values are exact
/// pointwise; nothing is interpolated between scales.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct OscillationTable {
    entries: Vec<OscillationEntry>,
}

impl OscillationTable {
    pub fn entries(&self) -> &[OscillationEntry] {
        &self.entries
    }

    pub(crate) fn from_entries(entries: Vec<OscillationEntry>) -> Self {
        OscillationTable { entries }
    }

    /// The finite value recorded at exactly this scale, if any.
    pub fn value_at(&self, delta: &Distance) -> Option<&Distance> {
        self.entries.iter().find_map(|e| {
            if &e.delta == delta {
                match &e.omega {
                    OscillationValue::Finite(d) => Some(d),
                    OscillationValue::Infinite => None,
                }
            } else {
                None
            }
        })
    }

    pub fn is_finite_everywhere(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e.omega, OscillationValue::Finite(_)))
    }
}

/// Result of checking a multi-map against the equivalence predicates and a
/// caller-supplied modulus table.
#[derive(Debug, Clone)]
pub struct EquivalenceCheck {
    pub is_total: bool,
    pub is_surjective: bool,
    pub forward: OscillationTable,
    pub inverse: OscillationTable,
    pub within_bound: bool,
}

/// Computes totality, surjectivity, and both oscillation tables at the given
/// scales; `within_bound` holds when every sampled value stays at or below
/// the modulus entry for its scale (missing entries count as exceeded).
pub fn check_equivalence(
    map: &MultiMap,
    scales: &[Distance],
    bound: &[(Distance, Distance)],
) -> EquivalenceCheck {
    let forward = map.oscillation_table(scales);
    let inverse = map.invert().oscillation_table(scales);
    let within = |table: &OscillationTable| {
        table.entries().iter().all(|e| {
            let limit = bound.iter().find(|(d, _)| d == &e.delta).map(|(_, b)| b);
            match (&e.omega, limit) {
                (OscillationValue::Finite(v), Some(b)) => v <= b,
                _ => false,
            }
        })
    };
    let within_bound = within(&forward) && within(&inverse);
    EquivalenceCheck {
        is_total: map.is_total(),
        is_surjective: map.is_surjective(),
        forward,
        inverse,
        within_bound,
    }
}

/// Why a tower morphism fails validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MorphismViolation {
    #[error("level map has {got} entries, expected {expected}")]
    LevelMapLengthMismatch { expected: usize, got: usize },
    #[error("level map sends level {source_level} to out-of-range {target_level}")]
    LevelMapOutOfRange {
        source_level: usize,
        target_level: usize,
    },
    #[error("level map is not strictly monotone between source levels {a} and {b}")]
    LevelMapNotStrictlyMonotone { a: usize, b: usize },
    #[error("node map on level {level} has the wrong shape")]
    NodeMapShapeMismatch { level: usize },
    #[error("node map sends node {node} on level {level} out of range")]
    NodeIndexOutOfRange { level: usize, node: usize },
    #[error("node map does not commute with parents at node {node} on level {level}")]
    ParentIncompatible { level: usize, node: usize },
}

/// A per-level node map together with an injective monotone level map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerMorphism {
    pub source: Tower,
    pub target: Tower,
    /// Target level index for each source level.
    pub level_map: Vec<usize>,
    /// `node_map[l][i]` is the target node index (on level `level_map[l]`)
    /// of source node `i` on level `l`.
    pub node_map: Vec<Vec<usize>>,
}

impl TowerMorphism {
    pub fn identity(tower: &Tower) -> Self {
        let level_map = (0..tower.level_count()).collect();
        let node_map = (0..tower.level_count())
            .map(|l| (0..tower.node_count(l)).collect())
            .collect();
        TowerMorphism {
            source: tower.clone(),
            target: tower.clone(),
            level_map,
            node_map,
        }
    }

    /// Checks monotonicity of the level map and parent-compatibility of the
    /// node map; returns the first violation found.
    pub fn validate(&self) -> Result<(), MorphismViolation> {
        let s_levels = self.source.level_count();
        if self.level_map.len() != s_levels {
            return Err(MorphismViolation::LevelMapLengthMismatch {
                expected: s_levels,
                got: self.level_map.len(),
            });
        }
        for (l, &fl) in self.level_map.iter().enumerate() {
            if fl >= self.target.level_count() {
                return Err(MorphismViolation::LevelMapOutOfRange {
                    source_level: l,
                    target_level: fl,
                });
            }
        }
        for l in 1..s_levels {
            if self.level_map[l - 1] >= self.level_map[l] {
                return Err(MorphismViolation::LevelMapNotStrictlyMonotone { a: l - 1, b: l });
            }
        }
        if self.node_map.len() != s_levels {
            return Err(MorphismViolation::NodeMapShapeMismatch {
                level: self.node_map.len(),
            });
        }
        for l in 0..s_levels {
            if self.node_map[l].len() != self.source.node_count(l) {
                return Err(MorphismViolation::NodeMapShapeMismatch { level: l });
            }
            for (i, &img) in self.node_map[l].iter().enumerate() {
                if img >= self.target.node_count(self.level_map[l]) {
                    return Err(MorphismViolation::NodeIndexOutOfRange { level: l, node: i });
                }
            }
        }
        for l in 0..s_levels.saturating_sub(1) {
            for i in 0..self.source.node_count(l) {
                let up_then_map = self.node_map[l + 1][self.source.parent_of(l, i)];
                let map_then_up =
                    self.target
                        .ancestor(self.level_map[l], self.node_map[l][i], self.level_map[l + 1]);
                if up_then_map != map_then_up {
                    return Err(MorphismViolation::ParentIncompatible { level: l, node: i });
                }
            }
        }
        Ok(())
    }

    pub fn is_injective(&self) -> bool {
        self.node_map.iter().all(|level| {
            let mut seen: Vec<usize> = level.clone();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn is_bijective(&self) -> bool {
        self.level_map.len() == self.target.level_count()
            && self.is_injective()
            && self
                .level_map
                .iter()
                .enumerate()
                .all(|(l, &fl)| l == fl && self.node_map[l].len() == self.target.node_count(fl))
    }

    /// Inverse of a bijective morphism.
    pub fn inverse(&self) -> Option<TowerMorphism> {
        if !self.is_bijective() {
            return None;
        }
        let node_map = self
            .node_map
            .iter()
            .map(|level| {
                let mut inv = vec![0usize; level.len()];
                for (i, &img) in level.iter().enumerate() {
                    inv[img] = i;
                }
                inv
            })
            .collect();
        Some(TowerMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            level_map: self.level_map.clone(),
            node_map,
        })
    }
}

/// Free-function form of [`TowerMorphism::validate`].
pub fn validate_morphism(morphism: &TowerMorphism) -> Result<(), MorphismViolation> {
    morphism.validate()
}

fn check_level_map(source: &Tower, target: &Tower, f: &[usize]) -> Result<(), MorphismError> {
    if f.len() != source.level_count() {
        return Err(MorphismError::BadLevelMap(format!(
            "expected {} entries, got {}",
            source.level_count(),
            f.len()
        )));
    }
    if f.iter().any(|&fl| fl >= target.level_count()) {
        return Err(MorphismError::BadLevelMap(
            "level map value out of range".into(),
        ));
    }
    if f.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MorphismError::BadLevelMap(
            "level map must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn require_pruned(tower: &Tower) -> Result<(), MorphismError> {
    if tower.branches().is_err() {
        return Err(MorphismError::NotPruned);
    }
    Ok(())
}

/// Nodes on `child_level` whose ancestor at `ancestor_level` is `node`,
/// sorted by node identifier.
fn descendants_sorted_by_id(
    tower: &Tower,
    ancestor_level: usize,
    node: usize,
    child_level: usize,
) -> Vec<usize> {
    let mut out: Vec<usize> = (0..tower.node_count(child_level))
        .filter(|&i| tower.ancestor(child_level, i, ancestor_level) == node)
        .collect();
    out.sort_by(|&a, &b| {
        tower
            .node_id(child_level, a)
            .cmp(tower.node_id(child_level, b))
    });
    out
}

/// Builds an injective monotone level-preserving morphism with level map
/// `f`, top-down: the root maps to the smallest-id node on its target
/// level, then children are assigned injectively to the image's
/// descendants, both sides ordered by node identifier.
///
/// Requires `Deg(S) <= deg(T)` between consecutive source levels under `f`,
/// which makes the greedy assignment always possible.
pub fn build_embedding(
    source: &Tower,
    target: &Tower,
    f: &[usize],
) -> Result<TowerMorphism, MorphismError> {
    require_pruned(source)?;
    require_pruned(target)?;
    check_level_map(source, target, f)?;
    for l in 0..source.level_count() - 1 {
        let (_, source_max) = source.degrees(l, l + 1)?;
        let (target_min, _) = target.degrees(f[l], f[l + 1])?;
        if source_max > target_min {
            return Err(MorphismError::DegreeConditionViolated { level: l });
        }
    }
    build_top_down(source, target, f)
}

/// Builds a bijective morphism. On top of the embedding hypotheses this
/// needs `deg(S) >= Deg(T)` at every consecutive level and a surjective
/// level map, which for strictly monotone maps means the identity.
pub fn build_isomorphism(
    source: &Tower,
    target: &Tower,
    f: &[usize],
) -> Result<TowerMorphism, MorphismError> {
    require_pruned(source)?;
    require_pruned(target)?;
    check_level_map(source, target, f)?;
    if f.len() != target.level_count() || f.iter().enumerate().any(|(l, &fl)| l != fl) {
        return Err(MorphismError::LevelMapNotSurjective);
    }
    for l in 0..source.level_count() - 1 {
        let (source_min, source_max) = source.degrees(l, l + 1)?;
        let (target_min, target_max) = target.degrees(f[l], f[l + 1])?;
        if source_max > target_min || source_min < target_max {
            return Err(MorphismError::DegreeConditionViolated { level: l });
        }
    }
    let morphism = build_top_down(source, target, f)?;
    debug_assert!(morphism.is_bijective());
    Ok(morphism)
}

fn build_top_down(
    source: &Tower,
    target: &Tower,
    f: &[usize],
) -> Result<TowerMorphism, MorphismError> {
    let s_levels = source.level_count();
    let top = s_levels - 1;
    let mut node_map: Vec<Vec<usize>> = (0..s_levels)
        .map(|l| vec![usize::MAX; source.node_count(l)])
        .collect();

    let top_candidates = {
        let mut all: Vec<usize> = (0..target.node_count(f[top])).collect();
        all.sort_by(|&a, &b| target.node_id(f[top], a).cmp(target.node_id(f[top], b)));
        all
    };
    node_map[top][0] = top_candidates[0];

    for l in (0..top).rev() {
        for v in 0..source.node_count(l + 1) {
            let mut children: Vec<usize> = (0..source.node_count(l))
                .filter(|&c| source.parent_of(l, c) == v)
                .collect();
            children.sort_by(|&a, &b| source.node_id(l, a).cmp(source.node_id(l, b)));
            let slots = descendants_sorted_by_id(target, f[l + 1], node_map[l + 1][v], f[l]);
            if children.len() > slots.len() {
                // The degree hypotheses rule this out.
                return Err(MorphismError::DegreeConditionViolated { level: l });
            }
            for (child, slot) in children.iter().zip(slots.iter()) {
                node_map[l][*child] = *slot;
            }
        }
    }

    let morphism = TowerMorphism {
        source: source.clone(),
        target: target.clone(),
        level_map: f.to_vec(),
        node_map,
    };
    debug_assert_eq!(morphism.validate(), Ok(()));
    debug_assert!(morphism.is_injective());
    Ok(morphism)
}

/// The induced relation between boundaries: a branch maps to every target
/// branch containing the image of its chain. For pruned towers this is the
/// set of target branches through the image of the bottom node, so the
/// relation is total with nonempty images.
pub fn boundary_multimap(morphism: &TowerMorphism) -> Result<MultiMap, MorphismError> {
    morphism
        .validate()
        .map_err(MorphismError::InvalidMorphism)?;
    let source_branches = morphism.source.branches()?;
    let target_branches = morphism.target.branches()?;
    let source_space = crate::towers::boundary_space(&morphism.source)?;
    let target_space = crate::towers::boundary_space(&morphism.target)?;
    let bottom_target_level = morphism.level_map[0];
    let mut pairs = Vec::new();
    for (si, sb) in source_branches.iter().enumerate() {
        let image_bottom = morphism.node_map[0][sb.node_per_level[0]];
        for (ti, tb) in target_branches.iter().enumerate() {
            if tb.node_per_level[bottom_target_level] == image_bottom {
                pairs.push((si, ti));
            }
        }
    }
    MultiMap::new(source_space, target_space, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::KappaSpec;
    use crate::testutil::line_space;
    use crate::towers::canonical_tower;

    fn d(n: u64) -> Distance {
        Distance::from_int(n)
    }

    fn kappa(k: u64, n: u32) -> FiniteMetricSpace {
        FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(k, n), 1 << 20).unwrap()
    }

    fn kappa_tower(k: u64, n: u32) -> Tower {
        let levels: Vec<Distance> = (1..=n as u64).map(Distance::from_int).collect();
        canonical_tower(&kappa(k, n), &levels).unwrap()
    }

    #[test]
    fn identity_oscillation_is_identity() {
        let s = kappa(2, 2);
        let id = MultiMap::identity(&s);
        let table = id
            .oscillation(&[Distance::zero(), d(1), d(2)])
            .unwrap();
        assert_eq!(table.value_at(&Distance::zero()).unwrap(), &Distance::zero());
        assert_eq!(table.value_at(&d(1)).unwrap(), &d(1));
        assert_eq!(table.value_at(&d(2)).unwrap(), &d(2));
    }

    #[test]
    fn constant_map_oscillation_is_zero() {
        let s = kappa(2, 2);
        let one = line_space(&[0]);
        let m = MultiMap::new(s.clone(), one, (0..4).map(|p| (p, 0))).unwrap();
        for delta in [Distance::zero(), d(1), d(2)] {
            assert_eq!(m.oscillation_at(&delta), Distance::zero());
        }
    }

    #[test]
    fn oscillation_zero_iff_single_valued() {
        let a = line_space(&[0, 1]);
        let b = line_space(&[0, 5]);
        let single = MultiMap::new(a.clone(), b.clone(), [(0, 0), (1, 1)]).unwrap();
        assert_eq!(single.oscillation_at(&Distance::zero()), Distance::zero());
        let multi = MultiMap::new(a, b, [(0, 0), (0, 1), (1, 1)]).unwrap();
        assert!(multi.oscillation_at(&Distance::zero()) > Distance::zero());
    }

    #[test]
    fn empty_relation_rejected() {
        let s = line_space(&[0, 1]);
        let m = MultiMap::new(s.clone(), s.clone(), []).unwrap();
        assert_eq!(
            m.oscillation(&[d(1)]).unwrap_err(),
            MorphismError::EmptyRelation
        );
    }

    #[test]
    fn compose_and_invert() {
        let a = line_space(&[0, 1]);
        let b = line_space(&[0, 2, 5]);
        let c = line_space(&[0, 9]);
        // phi relates a0 to two points; psi picks one of them up.
        let phi = MultiMap::new(a.clone(), b.clone(), [(0, 0), (0, 1), (1, 2)]).unwrap();
        let psi = MultiMap::new(b.clone(), c.clone(), [(1, 1)]).unwrap();
        let composed = compose(&phi, &psi).unwrap();
        assert_eq!(
            composed.pairs().iter().copied().collect::<Vec<_>>(),
            vec![(0, 1)]
        );

        assert_eq!(phi.invert().invert(), phi);

        let id_b = MultiMap::identity(&b);
        assert_eq!(compose(&phi, &id_b).unwrap(), phi);

        assert_eq!(
            compose(&phi, &MultiMap::identity(&c)).unwrap_err(),
            MorphismError::SpaceMismatch
        );
    }

    #[test]
    fn equivalence_check_flags() {
        let s = kappa(2, 2);
        let id = MultiMap::identity(&s);
        let scales = [Distance::zero(), d(1), d(2)];
        let bound: Vec<(Distance, Distance)> =
            scales.iter().map(|x| (x.clone(), x.clone())).collect();
        let check = check_equivalence(&id, &scales, &bound);
        assert!(check.is_total && check.is_surjective && check.within_bound);

        // Dropping a target point breaks surjectivity.
        let partial = MultiMap::new(s.clone(), s.clone(), (0..4).map(|p| (p, 0))).unwrap();
        let check = check_equivalence(&partial, &scales, &bound);
        assert!(check.is_total);
        assert!(!check.is_surjective);

        // A bound table missing a scale is not satisfied.
        let check = check_equivalence(&id, &scales, &bound[..1]);
        assert!(!check.within_bound);
    }

    #[test]
    fn identity_morphism_validates() {
        let t = kappa_tower(2, 2);
        let id = TowerMorphism::identity(&t);
        assert_eq!(id.validate(), Ok(()));
        assert!(id.is_bijective());
    }

    #[test]
    fn collapsing_level_map_is_invalid() {
        let t = kappa_tower(2, 3);
        let mut m = TowerMorphism::identity(&t);
        m.level_map = vec![0, 1, 1];
        assert_eq!(
            m.validate(),
            Err(MorphismViolation::LevelMapNotStrictlyMonotone { a: 1, b: 2 })
        );
    }

    #[test]
    fn parent_incompatible_node_map_detected() {
        let t = kappa_tower(2, 2);
        let mut m = TowerMorphism::identity(&t);
        // Swap the two bottom nodes' parents indirectly: map both bottom
        // nodes to node 0 but claim node 1 maps under a tampered chain.
        m.node_map[0] = vec![0, 0];
        assert_eq!(m.validate(), Ok(())); // both still sit under the root
        // Now break the chain on a three-level tower.
        let t3 = kappa_tower(2, 3);
        let mut m3 = TowerMorphism::identity(&t3);
        // Bottom node 0 sits under middle node 0; send it under middle 1.
        m3.node_map[0][0] = 3;
        let err = m3.validate().unwrap_err();
        assert_eq!(err, MorphismViolation::ParentIncompatible { level: 0, node: 0 });
    }

    #[test]
    fn embedding_into_wider_tower() {
        let s = kappa_tower(2, 2);
        let t = kappa_tower(4, 2);
        let m = build_embedding(&s, &t, &[0, 1]).unwrap();
        assert_eq!(m.validate(), Ok(()));
        assert!(m.is_injective());
        assert!(!m.is_bijective());
    }

    #[test]
    fn embedding_of_identity_shape() {
        let s = kappa_tower(3, 2);
        let m = build_embedding(&s, &s, &[0, 1]).unwrap();
        assert!(m.is_bijective());
    }

    #[test]
    fn embedding_rejects_narrow_target() {
        let s = kappa_tower(4, 2);
        let t = kappa_tower(2, 2);
        assert_eq!(
            build_embedding(&s, &t, &[0, 1]).unwrap_err(),
            MorphismError::DegreeConditionViolated { level: 0 }
        );
    }

    #[test]
    fn isomorphism_between_equal_generators() {
        let s = kappa_tower(3, 3);
        let t = kappa_tower(3, 3);
        let m = build_isomorphism(&s, &t, &[0, 1, 2]).unwrap();
        assert!(m.is_bijective());
        let inv = m.inverse().unwrap();
        assert_eq!(inv.validate(), Ok(()));
    }

    #[test]
    fn isomorphism_rejects_mismatched_width() {
        let s = kappa_tower(2, 2);
        let t = kappa_tower(3, 2);
        assert_eq!(
            build_isomorphism(&s, &t, &[0, 1]).unwrap_err(),
            MorphismError::DegreeConditionViolated { level: 0 }
        );
    }

    #[test]
    fn isomorphism_of_single_node_towers() {
        let a = line_space(&[0]);
        let t = canonical_tower(&a, &[d(1)]).unwrap();
        let m = build_isomorphism(&t, &t, &[0]).unwrap();
        assert!(m.is_bijective());
    }

    #[test]
    fn isomorphism_requires_surjective_level_map() {
        let s = kappa_tower(2, 2);
        let t = kappa_tower(2, 3);
        assert_eq!(
            build_isomorphism(&s, &t, &[0, 1]).unwrap_err(),
            MorphismError::LevelMapNotSurjective
        );
    }

    #[test]
    fn boundary_of_identity_is_identity() {
        let t = kappa_tower(2, 2);
        let id = TowerMorphism::identity(&t);
        let b = boundary_multimap(&id).unwrap();
        assert_eq!(b, MultiMap::identity(b.source()));
    }

    #[test]
    fn boundary_of_isomorphism_preserves_distances() {
        let s = kappa_tower(2, 2);
        let t = kappa_tower(2, 2);
        let m = build_isomorphism(&s, &t, &[0, 1]).unwrap();
        let b = boundary_multimap(&m).unwrap();
        assert!(b.is_bijective_function());
        for &(x, y) in b.pairs() {
            for &(x2, y2) in b.pairs() {
                assert_eq!(b.source().distance(x, x2), b.target().distance(y, y2));
            }
        }
    }

    #[test]
    fn boundary_of_embedding_is_injective_not_surjective() {
        let s = kappa_tower(2, 2);
        let t = kappa_tower(4, 2);
        let m = build_embedding(&s, &t, &[0, 1]).unwrap();
        let b = boundary_multimap(&m).unwrap();
        assert!(b.is_total());
        assert!(b.is_single_valued());
        assert!(b.invert().is_single_valued());
        assert!(!b.is_surjective());
    }
}
