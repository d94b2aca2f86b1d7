//! Certified constructions: scale schedules, the tower-route equivalence
//! onto a truncated coordinate space, the recursive separated embedding,
//! and the escape-chain surjection. Each returns a certificate whose
//! figures can be re-validated without re-running the search.

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::covers::{cov_profile, CoverError};
use crate::distance::Distance;
use crate::metric::{FiniteMetricSpace, KappaSpec, MetricError};
use crate::morphisms::{
    boundary_multimap, build_isomorphism, compose, MorphismError, MultiMap, OscillationTable,
    TowerMorphism,
};
use crate::towers::{canonical_map, canonical_tower, TowerError};

/// Point budget for internally generated coordinate spaces.
const TARGET_POINT_BUDGET: u64 = 4096;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient capacity: no admissible scale after step {step}")]
    InsufficientCapacity { step: usize },
    #[error(
        "tower is not homogeneous at schedule level {level}: degrees ({deg_min}, {deg_max})"
    )]
    NotHomogeneousAtSchedule {
        level: usize,
        deg_min: u64,
        deg_max: u64,
    },
    #[error("separated set around {center} at step {step} is too small")]
    SeparationShortfall { center: String, step: usize },
    #[error("embedding collapsed tuples {a} and {b}")]
    EmbeddingNotInjective { a: String, b: String },
    #[error(
        "no escape point outside the component of the base at scale {scale} \
         (captured {achieved} of {needed} shells)"
    )]
    MacroConnectedSource {
        scale: Distance,
        achieved: usize,
        needed: usize,
    },
    #[error("target space is empty")]
    EmptyTarget,
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    LevelSchedule,
    SeparationSchedule,
}

/// A strictly increasing list of scale values found by capacity search.
/// `gap_ok[i]` records whether the growth condition into value `i` holds:
/// for level schedules, `values[i] > values[i-1] + values[0]`; for
/// separation schedules, `6 * values[i-1] < values[i]`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ScaleSchedule {
    pub values: Vec<Distance>,
    pub kind: ScheduleKind,
    pub gap_ok: Vec<bool>,
}

impl ScaleSchedule {
    fn new(values: Vec<Distance>, kind: ScheduleKind) -> Self {
        let gap_ok = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if i == 0 {
                    true
                } else {
                    match kind {
                        ScheduleKind::LevelSchedule => *v > &values[i - 1] + &values[0],
                        ScheduleKind::SeparationSchedule => values[i - 1].scale_int(6) < *v,
                    }
                }
            })
            .collect();
        ScaleSchedule {
            values,
            kind,
            gap_ok,
        }
    }
}

/// Finds `depth` increasing realized scales, starting at the smallest
/// positive distance, such that the minimum ball capacity between
/// consecutive scales reaches `width_k`. Fails with the deepest achievable
/// depth when no candidate scale qualifies.
pub fn find_level_schedule(
    space: &FiniteMetricSpace,
    width_k: u64,
    depth: u32,
    effort_budget: u64,
) -> Result<ScaleSchedule, ConstructError> {
    if width_k < 1 {
        return Err(ConstructError::InvalidParameter(
            "width must be at least 1".into(),
        ));
    }
    if depth < 1 {
        return Err(ConstructError::InvalidParameter(
            "depth must be at least 1".into(),
        ));
    }
    let realized = space.realized_distances();
    let Some(first) = realized.first().cloned() else {
        return Err(ConstructError::InsufficientCapacity { step: 0 });
    };
    let mut values = vec![first];
    for step in 1..depth as usize {
        let prev = values[step - 1].clone();
        let found = realized
            .iter()
            .filter(|v| **v > prev)
            .find(|cand| {
                cov_profile(space, &prev, cand, effort_budget)
                    .min_over_centers
                    .lower
                    >= width_k
            })
            .cloned();
        match found {
            Some(v) => values.push(v),
            None => return Err(ConstructError::InsufficientCapacity { step }),
        }
    }
    Ok(ScaleSchedule::new(values, ScheduleKind::LevelSchedule))
}

/// Certificate for the tower-route equivalence: the composed multi-map, the
/// schedule it came from, and the tower isomorphism with both oscillation
/// tables.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate {
    pub width_k: u64,
    pub depth: u32,
    pub schedule: ScaleSchedule,
    /// Whether a zero level was prepended to the tower levels. That happens
    /// exactly when every bottom-scale component has `width_k` points, and
    /// makes the composed map single-valued.
    pub separating_bottom: bool,
    pub tower_levels: Vec<Distance>,
    pub tower_iso: TowerMorphism,
    pub multimap: MultiMap,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
}

/// Builds the equivalence of a space with the truncated width-`k` coordinate
/// space over a found schedule: canonical tower, degree check, tower
/// isomorphism, and the composite map through both boundaries.
pub fn baire_equivalence(
    space: &FiniteMetricSpace,
    width_k: u64,
    depth: u32,
    effort_budget: u64,
) -> Result<EquivalenceCertificate, ConstructError> {
    let schedule = find_level_schedule(space, width_k, depth, effort_budget)?;
    let levels = schedule.values.clone();

    let probe = canonical_tower(space, &levels)?;
    for l in 0..probe.level_count() - 1 {
        let (deg_min, deg_max) = probe.degrees(l, l + 1)?;
        if deg_min != width_k || deg_max != width_k {
            return Err(ConstructError::NotHomogeneousAtSchedule {
                level: l,
                deg_min,
                deg_max,
            });
        }
    }

    let bottom = space.epsilon_components(&levels[0]);
    let separating_bottom = bottom.blocks.iter().all(|b| b.len() as u64 == width_k);
    let mut tower_levels = Vec::new();
    if separating_bottom {
        tower_levels.push(Distance::zero());
    }
    tower_levels.extend(levels.iter().cloned());

    let source_tower = canonical_tower(space, &tower_levels)?;
    let target_spec = KappaSpec::with_levels(width_k, depth, levels.clone())?;
    let target = FiniteMetricSpace::gen_kappa_space(&target_spec, TARGET_POINT_BUDGET)?;
    let target_tower = canonical_tower(&target, &tower_levels)?;

    let f: Vec<usize> = (0..source_tower.level_count()).collect();
    let tower_iso = build_isomorphism(&source_tower, &target_tower, &f)?;
    let boundary_map = boundary_multimap(&tower_iso)?;

    let source_canonical = canonical_map(space, &source_tower)?;
    let target_canonical = canonical_map(&target, &target_tower)?;

    let to_target_boundary = compose(&source_canonical.map, &boundary_map)?;
    let multimap = compose(&to_target_boundary, &target_canonical.map.invert())?;

    let mut scales = vec![Distance::zero()];
    scales.extend(levels.iter().cloned());
    let oscillation_fwd = multimap.oscillation(&scales)?;
    let oscillation_bwd = multimap.invert().oscillation(&scales)?;

    Ok(EquivalenceCertificate {
        width_k,
        depth,
        schedule,
        separating_bottom,
        tower_levels,
        tower_iso,
        multimap,
        oscillation_fwd,
        oscillation_bwd,
    })
}

/// One pairwise separation figure of an embedding: the top index where the
/// tuples differ, the target separation `3 * eps_level`, the exact distance
/// realized, and the unconditional triangle-inequality floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationRecord {
    pub a: String,
    pub b: String,
    /// 1-based highest differing coordinate.
    pub level: u32,
    pub required: Distance,
    pub actual: Distance,
    pub meets_required: bool,
    pub floor: Distance,
}

#[derive(Debug, Clone)]
pub struct EmbeddingCertificate {
    pub width_k: u64,
    pub depth: u32,
    pub base_point: String,
    pub schedule: ScaleSchedule,
    /// Graph of the embedding, from the width-`k` depth-`depth` coordinate
    /// space into the host.
    pub multimap: MultiMap,
    pub separation: Vec<SeparationRecord>,
    pub containment_bound: Distance,
    pub max_base_distance: Distance,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
}

/// Embeds the width-`k` depth-`depth` coordinate space near `base_point`:
/// finds scales with six-fold capacity, extracts greedy separated subsets of
/// balls, and evaluates the coordinate recursion top index first.
pub fn embed_baire(
    space: &FiniteMetricSpace,
    width_k: u64,
    depth: u32,
    base_point: usize,
    effort_budget: u64,
) -> Result<EmbeddingCertificate, ConstructError> {
    if width_k < 2 {
        return Err(ConstructError::InvalidParameter(
            "width must be at least 2".into(),
        ));
    }
    if base_point >= space.point_count() {
        return Err(ConstructError::Metric(MetricError::UnknownPoint {
            label: format!("#{base_point}"),
        }));
    }

    let realized = space.realized_distances();
    // eps[j] plays the role of the (j+1)-th scale; the capacity condition
    // couples eps[j-1] (separation) with eps[j] (ball radius).
    let mut eps: Vec<Distance> = Vec::new();
    if depth > 0 || !realized.is_empty() {
        match realized.first() {
            Some(first) => eps.push(first.clone()),
            None => return Err(ConstructError::InsufficientCapacity { step: 0 }),
        }
    }
    for step in 1..=depth as usize {
        let prev = eps[step - 1].clone();
        let six_prev = prev.scale_int(6);
        let found = realized
            .iter()
            .filter(|v| **v > prev)
            .find(|cand| {
                cov_profile(space, &six_prev, cand, effort_budget)
                    .min_over_centers
                    .lower
                    >= width_k
            })
            .cloned();
        match found {
            Some(v) => eps.push(v),
            None => return Err(ConstructError::InsufficientCapacity { step }),
        }
    }
    let schedule = ScaleSchedule::new(eps.clone(), ScheduleKind::SeparationSchedule);

    let domain = if depth == 0 {
        FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(1, 1), TARGET_POINT_BUDGET)?
    } else {
        FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(width_k, depth), TARGET_POINT_BUDGET)?
    };

    // Greedy maximal separated subsets, memoized per (step, center). A
    // maximal 3e-separated subset of a ball covers it by sets of diameter
    // at most 6e, so its size is at least the certified capacity.
    let mut separated: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let k = width_k as usize;
    let mut pick = |step: usize, center: usize| -> Result<Vec<usize>, ConstructError> {
        if let Some(s) = separated.get(&(step, center)) {
            return Ok(s.clone());
        }
        let radius = &eps[step];
        let min_sep = eps[step - 1].scale_int(3);
        let ball = space.ball(center, radius);
        let mut chosen = vec![center];
        for p in ball {
            if p == center {
                continue;
            }
            if chosen.iter().all(|&s| space.distance(p, s) >= &min_sep) {
                chosen.push(p);
            }
        }
        if chosen.len() < k {
            return Err(ConstructError::SeparationShortfall {
                center: space.label(center).to_string(),
                step,
            });
        }
        chosen.truncate(k);
        separated.insert((step, center), chosen.clone());
        Ok(chosen)
    };

    let k_u64 = width_k;
    let coords = |q: usize| -> Vec<usize> {
        let mut c = Vec::with_capacity(depth as usize);
        let mut rest = q as u64;
        for _ in 0..depth {
            c.push((rest % k_u64) as usize);
            rest /= k_u64;
        }
        c
    };

    let mut image: Vec<usize> = Vec::with_capacity(domain.point_count());
    for q in 0..domain.point_count() {
        let tuple = coords(q);
        let mut x = base_point;
        for j in (1..=depth as usize).rev() {
            let set = pick(j, x)?;
            x = set[tuple[j - 1]];
        }
        image.push(x);
    }

    for a in 0..image.len() {
        for b in (a + 1)..image.len() {
            if image[a] == image[b] {
                return Err(ConstructError::EmbeddingNotInjective {
                    a: domain.label(a).to_string(),
                    b: domain.label(b).to_string(),
                });
            }
        }
    }

    let pairs: Vec<(usize, usize)> = image.iter().copied().enumerate().collect();
    let multimap = MultiMap::new(domain.clone(), space.clone(), pairs)?;

    let mut separation = Vec::new();
    for a in 0..image.len() {
        let ca = coords(a);
        for b in (a + 1)..image.len() {
            let cb = coords(b);
            let level = (1..=depth as usize)
                .rev()
                .find(|&j| ca[j - 1] != cb[j - 1])
                .expect("distinct tuples differ somewhere") as u32;
            let required = eps[level as usize - 1].scale_int(3);
            let actual = space.distance(image[a], image[b]).clone();
            // Unconditional floor: the two picks at `level` are 3e apart and
            // later steps drift by at most eps[1] + ... + eps[level-1] each.
            let drift: BigRational = (1..level as usize)
                .map(|m| eps[m].as_rational().clone())
                .sum();
            let floor_raw =
                required.as_rational() - BigRational::from_integer(2.into()) * drift;
            let floor = Distance::new(floor_raw).unwrap_or_else(|_| Distance::zero());
            debug_assert!(actual >= floor);
            separation.push(SeparationRecord {
                a: domain.label(a).to_string(),
                b: domain.label(b).to_string(),
                level,
                meets_required: actual >= required,
                required,
                actual,
                floor,
            });
        }
    }

    let containment_bound = (1..=depth as usize)
        .map(|m| eps[m].clone())
        .fold(Distance::zero(), |acc, v| acc + v);
    let max_base_distance = image
        .iter()
        .map(|&p| space.distance(base_point, p).clone())
        .max()
        .unwrap_or_else(Distance::zero);
    debug_assert!(max_base_distance <= containment_bound);

    let mut fwd_scales = vec![Distance::zero()];
    fwd_scales.extend(domain.realized_distances());
    let mut bwd_scales = vec![Distance::zero()];
    bwd_scales.extend(space.realized_distances());
    let oscillation_fwd = multimap.oscillation(&fwd_scales)?;
    let oscillation_bwd = multimap.invert().oscillation(&bwd_scales)?;

    Ok(EmbeddingCertificate {
        width_k,
        depth,
        base_point: space.label(base_point).to_string(),
        schedule,
        multimap,
        separation,
        containment_bound,
        max_base_distance,
        oscillation_fwd,
        oscillation_bwd,
    })
}

/// One step of the escape chain: the point that escaped the previous
/// component and the scale it fixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeStep {
    pub point: String,
    pub epsilon: Distance,
}

#[derive(Debug, Clone)]
pub struct SurjectionCertificate {
    pub base_point: String,
    pub escape_chain: Vec<EscapeStep>,
    /// Shell index (1-based) per source point; the recorded value is the
    /// squared index, the actual codomain of the shell assignment.
    pub assignment: Vec<(String, u64)>,
    /// Ball radius used on the target side: half its minimum positive
    /// distance, which keeps image blocks singletons.
    pub radius: Distance,
    pub multimap: MultiMap,
    pub oscillation_fwd: OscillationTable,
    pub oscillation_bwd: OscillationTable,
}

/// Builds a surjection onto `target` by capturing the source in growing
/// component shells around the base point: each escape point fixes the next
/// scale as the larger of the next realized value and its own distance to
/// the base, and every source point is assigned the first shell containing
/// it (the last shell when none does).
pub fn surjection_onto(
    source: &FiniteMetricSpace,
    target: &FiniteMetricSpace,
    base_point: usize,
    scales_budget: u64,
) -> Result<SurjectionCertificate, ConstructError> {
    if target.point_count() == 0 {
        return Err(ConstructError::EmptyTarget);
    }
    if base_point >= source.point_count() {
        return Err(ConstructError::Metric(MetricError::UnknownPoint {
            label: format!("#{base_point}"),
        }));
    }
    let m = target.point_count();
    let n = source.point_count();
    let radius = target
        .min_positive_distance()
        .map(|d| d.half())
        .unwrap_or_else(Distance::zero);

    let mut chain: Vec<(usize, Distance)> = Vec::new();
    if m >= 2 {
        if (m as u64 - 1) > scales_budget {
            return Err(ConstructError::InvalidParameter(format!(
                "chain needs {} escapes, budget is {scales_budget}",
                m - 1
            )));
        }
        let realized = source.realized_distances();
        let nearest = (0..n)
            .filter(|&p| p != base_point)
            .min_by_key(|&p| (source.rank(base_point, p), p));
        let Some(x1) = nearest else {
            return Err(ConstructError::MacroConnectedSource {
                scale: Distance::zero(),
                achieved: 0,
                needed: m - 1,
            });
        };
        let first_eps = realized[0]
            .clone()
            .max(source.distance(base_point, x1).clone());
        chain.push((x1, first_eps));
        while chain.len() < m {
            let i = chain.len();
            let eps_i = chain[i - 1].1.clone();
            let component = source.epsilon_components(&eps_i);
            let base_block = component
                .block_of(base_point)
                .expect("partition covers all points");
            let escape = (0..n)
                .filter(|&p| component.block_of(p) != Some(base_block))
                .min_by_key(|&p| (source.rank(base_point, p), p));
            let Some(x_next) = escape else {
                return Err(ConstructError::MacroConnectedSource {
                    scale: eps_i,
                    achieved: i,
                    needed: m - 1,
                });
            };
            let scheduled = realized.get(i).cloned().unwrap_or_else(Distance::zero);
            let eps_next = scheduled.max(source.distance(base_point, x_next).clone());
            chain.push((x_next, eps_next));
        }
    }

    // First shell containing each point; stragglers go to the last shell.
    let mut shell = vec![m as u64; n];
    for (i, (_, eps)) in chain.iter().enumerate().rev() {
        let component = source.epsilon_components(eps);
        let base_block = component
            .block_of(base_point)
            .expect("partition covers all points");
        for p in 0..n {
            if component.block_of(p) == Some(base_block) {
                shell[p] = i as u64 + 1;
            }
        }
    }
    if m == 1 {
        shell = vec![1; n];
    }

    let pairs: Vec<(usize, usize)> = (0..n).map(|p| (p, shell[p] as usize - 1)).collect();
    let multimap = MultiMap::new(source.clone(), target.clone(), pairs)?;

    let mut fwd_scales = vec![Distance::zero()];
    fwd_scales.extend(source.realized_distances());
    let mut bwd_scales = vec![Distance::zero()];
    bwd_scales.extend(target.realized_distances());
    let oscillation_fwd = multimap.oscillation(&fwd_scales)?;
    let oscillation_bwd = multimap.invert().oscillation(&bwd_scales)?;

    Ok(SurjectionCertificate {
        base_point: source.label(base_point).to_string(),
        escape_chain: chain
            .into_iter()
            .map(|(p, epsilon)| EscapeStep {
                point: source.label(p).to_string(),
                epsilon,
            })
            .collect(),
        assignment: shell
            .iter()
            .enumerate()
            .map(|(p, &s)| (source.label(p).to_string(), s * s))
            .collect(),
        radius,
        multimap,
        oscillation_fwd,
        oscillation_bwd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::line_space;

    fn d(n: u64) -> Distance {
        Distance::from_int(n)
    }

    fn kappa(k: u64, n: u32) -> FiniteMetricSpace {
        FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(k, n), 1 << 20).unwrap()
    }

    #[test]
    fn level_schedule_on_generator() {
        let s = kappa(3, 3);
        let sched = find_level_schedule(&s, 3, 3, 1 << 20).unwrap();
        assert_eq!(sched.values, vec![d(1), d(2), d(3)]);
        assert_eq!(sched.kind, ScheduleKind::LevelSchedule);
    }

    #[test]
    fn level_schedule_insufficient_on_binary() {
        let s = kappa(2, 3);
        assert_eq!(
            find_level_schedule(&s, 3, 3, 1 << 20).unwrap_err(),
            ConstructError::InsufficientCapacity { step: 1 }
        );
    }

    #[test]
    fn level_schedule_width_one_uses_sorted_values() {
        let s = line_space(&[0, 1, 2, 3]);
        let sched = find_level_schedule(&s, 1, 3, 1 << 20).unwrap();
        assert_eq!(sched.values, vec![d(1), d(2), d(3)]);
    }

    #[test]
    fn equivalence_on_cubic_generator() {
        let s = kappa(3, 3);
        let cert = baire_equivalence(&s, 3, 3, 1 << 20).unwrap();
        assert!(cert.separating_bottom);
        assert!(cert.multimap.is_bijective_function());
        // Distance preservation of the composite.
        let pairs: Vec<(usize, usize)> = cert.multimap.pairs().iter().copied().collect();
        for &(x, y) in &pairs {
            for &(x2, y2) in &pairs {
                assert_eq!(
                    cert.multimap.source().distance(x, x2),
                    cert.multimap.target().distance(y, y2)
                );
            }
        }
        assert!(cert.oscillation_fwd.is_finite_everywhere());
        assert!(cert.oscillation_bwd.is_finite_everywhere());
    }

    #[test]
    fn equivalence_rejects_inhomogeneous_space() {
        // Two coarse blocks with three fine blocks and four fine blocks, a
        // third with three, all fine blocks two points at distance 1.
        let mut labels = Vec::new();
        let mut paths = Vec::new();
        for (coarse, fine_count) in [(0u64, 3u64), (1, 4), (2, 3)] {
            for fine in 0..fine_count {
                for leaf in 0..2u64 {
                    labels.push(format!("x{coarse}-{fine}-{leaf}"));
                    paths.push((coarse, fine, leaf));
                }
            }
        }
        let n = labels.len();
        let mut matrix = vec![vec![Distance::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (c1, f1, _) = paths[i];
                let (c2, f2, _) = paths[j];
                let dist = if c1 != c2 {
                    d(4)
                } else if f1 != f2 {
                    d(2)
                } else {
                    d(1)
                };
                matrix[i][j] = dist;
            }
        }
        let s = FiniteMetricSpace::validate_metric(labels, matrix).unwrap();
        let err = baire_equivalence(&s, 3, 3, 1 << 20).unwrap_err();
        assert_eq!(
            err,
            ConstructError::NotHomogeneousAtSchedule {
                level: 0,
                deg_min: 3,
                deg_max: 4
            }
        );
    }

    #[test]
    fn equivalence_width_one_collapses_chain() {
        let s = line_space(&[0, 1, 2, 3, 4]);
        let cert = baire_equivalence(&s, 1, 2, 1 << 20).unwrap();
        assert!(!cert.separating_bottom);
        assert_eq!(cert.multimap.target().point_count(), 1);
        assert!(cert.multimap.is_total());
        assert!(cert.multimap.is_surjective());
    }

    #[test]
    fn embedding_with_geometric_levels() {
        let spec = KappaSpec::with_levels(3, 3, vec![d(7), d(49), d(343)]).unwrap();
        let s = FiniteMetricSpace::gen_kappa_space(&spec, 1 << 20).unwrap();
        let base = s.index_of("0-0-0").unwrap();
        let cert = embed_baire(&s, 3, 2, base, 1 << 20).unwrap();
        assert_eq!(cert.schedule.values, vec![d(7), d(49), d(343)]);
        assert_eq!(cert.multimap.pairs().len(), 9);
        assert!(cert.multimap.is_single_valued());
        assert!(cert.multimap.invert().is_single_valued());
        assert!(cert.separation.iter().all(|r| r.meets_required));
        assert!(cert.max_base_distance <= cert.containment_bound);
    }

    #[test]
    fn embedding_insufficient_on_binary() {
        let s = kappa(2, 5);
        let base = 0;
        assert_eq!(
            embed_baire(&s, 3, 2, base, 1 << 20).unwrap_err(),
            ConstructError::InsufficientCapacity { step: 1 }
        );
    }

    #[test]
    fn embedding_depth_zero_is_base_point() {
        let s = kappa(3, 2);
        let cert = embed_baire(&s, 3, 0, 4, 1 << 20).unwrap();
        assert_eq!(cert.multimap.pairs().len(), 1);
        let (_, img) = *cert.multimap.pairs().iter().next().unwrap();
        assert_eq!(img, 4);
        assert!(cert.separation.is_empty());
    }

    #[test]
    fn surjection_from_spread_line() {
        let source = line_space(&[7, 49, 343, 2401]);
        let target = line_space(&[0, 10, 25]);
        let base = source.index_of("p7").unwrap();
        let cert = surjection_onto(&source, &target, base, 1 << 20).unwrap();
        assert!(cert.multimap.is_total());
        assert!(cert.multimap.is_surjective());
        let chain: Vec<(&str, Distance)> = cert
            .escape_chain
            .iter()
            .map(|s| (s.point.as_str(), s.epsilon.clone()))
            .collect();
        assert_eq!(
            chain,
            vec![("p49", d(42)), ("p343", d(336)), ("p2401", d(2394))]
        );
        let squares: Vec<u64> = cert.assignment.iter().map(|(_, s)| *s).collect();
        assert_eq!(squares, vec![1, 1, 4, 9]);
        assert!(cert.oscillation_fwd.is_finite_everywhere());
    }

    #[test]
    fn surjection_from_square_generator() {
        let source = kappa(2, 2);
        let target = line_space(&[0, 5]);
        let base = source.index_of("0-0").unwrap();
        let cert = surjection_onto(&source, &target, base, 1 << 20).unwrap();
        assert!(cert.multimap.is_surjective());
        assert_eq!(cert.escape_chain.len(), 2);
    }

    #[test]
    fn surjection_to_single_point_is_constant() {
        let source = line_space(&[0, 1]);
        let target = line_space(&[9]);
        let cert = surjection_onto(&source, &target, 0, 1 << 20).unwrap();
        assert!(cert.multimap.is_surjective());
        assert!(cert.escape_chain.is_empty());
        for e in cert.oscillation_fwd.entries() {
            assert_eq!(
                e.omega,
                crate::morphisms::OscillationValue::Finite(Distance::zero())
            );
        }
    }

    #[test]
    fn surjection_needs_escapes() {
        // Macro-connected chain cannot fill three shells.
        let source = line_space(&[0, 1, 2]);
        let target = line_space(&[0, 10, 25]);
        let err = surjection_onto(&source, &target, 0, 1 << 20).unwrap_err();
        assert!(matches!(err, ConstructError::MacroConnectedSource { .. }));
    }
}
