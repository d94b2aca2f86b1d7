//! Ball-capacity machinery: minimum covers by bounded-diameter sets,
//! min/max capacity profiles over ball centers, and the finite-scale
//! geometry classifier.
//!
//! A cover of a subset by sets of diameter at most `delta` is the same thing
//! as a clique cover of the threshold graph with edges `d <= delta`
//! restricted to the subset: every bounded-diameter set is a clique and
//! every clique has bounded diameter. Ultrametric spaces admit an exact
//! shortcut (delta-components partition the space into sets of diameter at
//! most delta); everywhere else we run an exact branch-and-bound with an
//! effort budget, returning a bracket when the budget runs out.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::distance::Distance;
use crate::metric::{FiniteMetricSpace, MetricError};
use crate::union_find::DisjointSet;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("cannot cover an empty subset")]
    EmptySubset,
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
}

/// A bracket around a minimum cover cardinality. `lower == upper` means the
/// value is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverNumber {
    pub lower: u64,
    pub upper: u64,
}

impl CoverNumber {
    pub fn exact(value: u64) -> Self {
        CoverNumber {
            lower: value,
            upper: value,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn exact_value(&self) -> Option<u64> {
        self.is_exact().then_some(self.lower)
    }
}

impl Serialize for CoverNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CoverNumber", 3)?;
        s.serialize_field("lower", &self.lower)?;
        s.serialize_field("upper", &self.upper)?;
        s.serialize_field("exact", &self.is_exact())?;
        s.end()
    }
}

/// Capacity of eps-balls at granularity delta: min and max over all centers
/// of the minimum cover of the ball by diameter-<=delta sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapacityProfile {
    pub delta: Distance,
    pub epsilon: Distance,
    pub min_over_centers: CoverNumber,
    pub max_over_centers: CoverNumber,
}

/// Minimum number of sets of diameter at most `delta` covering `subset`.
pub fn min_cover_number(
    space: &FiniteMetricSpace,
    subset: &[usize],
    delta: &Distance,
    effort_budget: u64,
) -> Result<CoverNumber, CoverError> {
    let ultra = space.is_ultrametric();
    min_cover_with_hint(space, subset, delta, effort_budget, ultra)
}

/// The general branch-and-bound path, exposed for cross-checking against the
/// ultrametric shortcut.
pub fn min_cover_clique_search(
    space: &FiniteMetricSpace,
    subset: &[usize],
    delta: &Distance,
    effort_budget: u64,
) -> Result<CoverNumber, CoverError> {
    let verts = checked_subset(space, subset)?;
    Ok(clique_cover_bnb(space, &verts, delta, effort_budget))
}

fn checked_subset(
    space: &FiniteMetricSpace,
    subset: &[usize],
) -> Result<Vec<usize>, CoverError> {
    if subset.is_empty() {
        return Err(CoverError::EmptySubset);
    }
    let mut verts = subset.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if let Some(&bad) = verts.iter().find(|&&p| p >= space.point_count()) {
        return Err(CoverError::PointOutOfRange(bad));
    }
    Ok(verts)
}

fn min_cover_with_hint(
    space: &FiniteMetricSpace,
    subset: &[usize],
    delta: &Distance,
    effort_budget: u64,
    ultrametric: bool,
) -> Result<CoverNumber, CoverError> {
    let verts = checked_subset(space, subset)?;
    if ultrametric {
        // delta-components of an ultrametric space partition it into sets of
        // diameter <= delta, and no diameter-<=delta set meets two of them.
        let part = space.epsilon_components(delta);
        let mut seen = vec![false; part.blocks.len()];
        let mut count = 0u64;
        for &p in &verts {
            let b = part.block_of(p).expect("partition covers all points");
            if !seen[b] {
                seen[b] = true;
                count += 1;
            }
        }
        return Ok(CoverNumber::exact(count));
    }
    Ok(clique_cover_bnb(space, &verts, delta, effort_budget))
}

/// Exact minimum clique cover of the threshold graph on `verts` by branch
/// and bound, seeded with a greedy clique-partition upper bound and a
/// maximal-independent-set lower bound.
fn clique_cover_bnb(
    space: &FiniteMetricSpace,
    verts: &[usize],
    delta: &Distance,
    effort_budget: u64,
) -> CoverNumber {
    let m = verts.len();
    let thr = space.threshold_rank(delta);
    let adjacent =
        |i: usize, j: usize| -> bool { (space.rank(verts[i], verts[j]) as usize) < thr };

    let degree: Vec<usize> = (0..m)
        .map(|i| (0..m).filter(|&j| j != i && adjacent(i, j)).count())
        .collect();

    // Greedy clique partition: first-fit into a compatible clique.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let mut greedy_classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match greedy_classes
            .iter_mut()
            .find(|c| c.iter().all(|&u| adjacent(u, v)))
        {
            Some(c) => c.push(v),
            None => greedy_classes.push(vec![v]),
        }
    }
    let upper = greedy_classes.len() as u64;

    // Maximal independent set: any two of its members need distinct cover
    // sets, so its size bounds the cover from below.
    let mut alive: Vec<bool> = vec![true; m];
    let mut lower = 0u64;
    loop {
        let pick = (0..m)
            .filter(|&i| alive[i])
            .min_by_key(|&i| ((0..m).filter(|&j| alive[j] && j != i && adjacent(i, j)).count(), i));
        let Some(v) = pick else { break };
        lower += 1;
        alive[v] = false;
        for j in 0..m {
            if alive[j] && adjacent(v, j) {
                alive[j] = false;
            }
        }
    }

    if lower == upper {
        return CoverNumber::exact(lower);
    }

    struct Search<'a, F: Fn(usize, usize) -> bool> {
        order: &'a [usize],
        adjacent: F,
        best: u64,
        lower: u64,
        nodes_left: u64,
        exhausted: bool,
    }

    impl<F: Fn(usize, usize) -> bool> Search<'_, F> {
        fn run(&mut self, depth: usize, classes: &mut Vec<Vec<usize>>) {
            if self.exhausted || self.best == self.lower {
                return;
            }
            if classes.len() as u64 >= self.best {
                return;
            }
            if depth == self.order.len() {
                self.best = classes.len() as u64;
                return;
            }
            if self.nodes_left == 0 {
                self.exhausted = true;
                return;
            }
            self.nodes_left -= 1;
            let v = self.order[depth];
            for ci in 0..classes.len() {
                if classes[ci].iter().all(|&u| (self.adjacent)(u, v)) {
                    classes[ci].push(v);
                    self.run(depth + 1, classes);
                    classes[ci].pop();
                }
            }
            classes.push(vec![v]);
            self.run(depth + 1, classes);
            classes.pop();
        }
    }

    let mut search = Search {
        order: &order,
        adjacent,
        best: upper,
        lower,
        nodes_left: effort_budget,
        exhausted: false,
    };
    search.run(0, &mut Vec::new());

    if search.exhausted && search.best > lower {
        CoverNumber {
            lower,
            upper: search.best,
        }
    } else {
        CoverNumber::exact(search.best)
    }
}

/// Min/max over all centers of the minimum cover of the eps-ball at
/// granularity delta.
pub fn cov_profile(
    space: &FiniteMetricSpace,
    delta: &Distance,
    epsilon: &Distance,
    effort_budget: u64,
) -> CapacityProfile {
    let n = space.point_count();
    let ultra = space.is_ultrametric();
    let mut min_cn: Option<CoverNumber> = None;
    let mut max_cn: Option<CoverNumber> = None;

    if ultra {
        // One partition serves every center.
        let part = space.epsilon_components(delta);
        let block_id: Vec<usize> = (0..n)
            .map(|p| part.block_of(p).expect("partition covers all points"))
            .collect();
        let thr = space.threshold_rank(epsilon);
        let mut seen = vec![usize::MAX; part.blocks.len()];
        for center in 0..n {
            let mut count = 0u64;
            for q in 0..n {
                if (space.rank(center, q) as usize) < thr {
                    let b = block_id[q];
                    if seen[b] != center {
                        seen[b] = center;
                        count += 1;
                    }
                }
            }
            let cn = CoverNumber::exact(count);
            fold_min(&mut min_cn, cn);
            fold_max(&mut max_cn, cn);
        }
    } else {
        for center in 0..n {
            let ball = space.ball(center, epsilon);
            let cn = clique_cover_bnb(space, &ball, delta, effort_budget);
            fold_min(&mut min_cn, cn);
            fold_max(&mut max_cn, cn);
        }
    }

    CapacityProfile {
        delta: delta.clone(),
        epsilon: epsilon.clone(),
        min_over_centers: min_cn.expect("space is nonempty"),
        max_over_centers: max_cn.expect("space is nonempty"),
    }
}

fn fold_min(acc: &mut Option<CoverNumber>, cn: CoverNumber) {
    *acc = Some(match acc.take() {
        None => cn,
        Some(prev) => CoverNumber {
            lower: prev.lower.min(cn.lower),
            upper: prev.upper.min(cn.upper),
        },
    });
}

fn fold_max(acc: &mut Option<CoverNumber>, cn: CoverNumber) {
    *acc = Some(match acc.take() {
        None => cn,
        Some(prev) => CoverNumber {
            lower: prev.lower.max(cn.lower),
            upper: prev.upper.max(cn.upper),
        },
    });
}

/// An indexed family of spaces of non-decreasing size.
pub trait SpaceFamily {
    fn name(&self) -> String;
    fn space(&self, index: u32) -> Result<FiniteMetricSpace, MetricError>;
}

/// `index -> kappa(k, index)` for a fixed alphabet, or `kappa(index, index)`
/// when the alphabet tracks the index.
pub struct KappaFamily {
    pub alphabet: Option<u64>,
    pub point_budget: u64,
}

impl SpaceFamily for KappaFamily {
    fn name(&self) -> String {
        match self.alphabet {
            Some(k) => format!("kappa-fixed-{k}"),
            None => "kappa-square".to_string(),
        }
    }

    fn space(&self, index: u32) -> Result<FiniteMetricSpace, MetricError> {
        let k = self.alphabet.unwrap_or(index as u64);
        let spec = crate::metric::KappaSpec::new(k.max(1), index.max(1));
        FiniteMetricSpace::gen_kappa_space(&spec, self.point_budget)
    }
}

/// The constant one-point family.
pub struct SingletonFamily;

impl SpaceFamily for SingletonFamily {
    fn name(&self) -> String {
        "singleton".to_string()
    }

    fn space(&self, _index: u32) -> Result<FiniteMetricSpace, MetricError> {
        FiniteMetricSpace::validate_metric(vec!["pt".into()], vec![vec![Distance::zero()]])
    }
}

/// Which of the three asymptotic regimes the collected profiles support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    BoundedEvidence,
    UnboundedEvidence,
    IsolatedBallsEvidence,
    Inconclusive,
}

/// Finite-scale stand-in for the singleton / Cantor-type / Baire-type
/// trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrichotomyLabel {
    SingletonType,
    CantorType,
    BaireType,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryVerdict {
    pub kind: EvidenceKind,
    pub witness_scales: Vec<CapacityProfile>,
    pub threshold_k: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub family: String,
    pub verdict: GeometryVerdict,
    pub label: TrichotomyLabel,
    pub diameters: Vec<Distance>,
    pub grid: Vec<Distance>,
    /// The delta/epsilon grid is an artifact policy, not part of the
    /// underlying theory; flagged here so downstream consumers know.
    pub grid_policy: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

/// Classifies a family of growing spaces against `threshold_k`, the finite
/// stand-in for "infinitely many".
///
/// Profiles are computed on the largest family member. The delta grid is
/// the realized distance values plus their doubles, restricted below the
/// diameter (values at or above it are degenerate at finite scale) and
/// augmented with zero; epsilon ranges over grid values above delta.
/// Verdict tie-break order: isolated balls, then unbounded, then bounded.
pub fn classify_geometry(
    family: &dyn SpaceFamily,
    threshold_k: u64,
    max_index: u32,
    effort_budget: u64,
) -> Result<Classification, MetricError> {
    let mut diameters = Vec::new();
    let mut largest: Option<FiniteMetricSpace> = None;
    for i in 1..=max_index.max(1) {
        let s = family.space(i)?;
        diameters.push(s.diameter());
        largest = Some(s);
    }
    let space = largest.expect("at least one index");

    let mut grid: Vec<Distance> = space.realized_distances();
    let doubles: Vec<Distance> = grid.iter().map(|v| v.double()).collect();
    grid.extend(doubles);
    grid.sort();
    grid.dedup();

    let diameter = space.diameter();
    let mut delta_candidates: Vec<Distance> = vec![Distance::zero()];
    delta_candidates.extend(grid.iter().filter(|g| **g < diameter).cloned());

    let mut per_delta: Vec<(Distance, Vec<CapacityProfile>)> = Vec::new();
    for delta in &delta_candidates {
        let mut eps_list: Vec<Distance> =
            grid.iter().filter(|g| *g > delta).cloned().collect();
        if eps_list.is_empty() {
            eps_list.push(delta.clone());
        }
        let profiles = eps_list
            .iter()
            .map(|eps| cov_profile(&space, delta, eps, effort_budget))
            .collect();
        per_delta.push((delta.clone(), profiles));
    }

    let min_is_one = |p: &CapacityProfile| -> Tri {
        if p.min_over_centers.upper == 1 {
            Tri::True
        } else if p.min_over_centers.lower >= 2 {
            Tri::False
        } else {
            Tri::Unknown
        }
    };
    let min_at_least_k = |p: &CapacityProfile| -> Tri {
        if p.min_over_centers.lower >= threshold_k {
            Tri::True
        } else if p.min_over_centers.upper < threshold_k {
            Tri::False
        } else {
            Tri::Unknown
        }
    };
    let max_below_k = |p: &CapacityProfile| -> Tri {
        if p.max_over_centers.upper < threshold_k {
            Tri::True
        } else if p.max_over_centers.lower >= threshold_k {
            Tri::False
        } else {
            Tri::Unknown
        }
    };

    let for_all = |items: Vec<Tri>| -> Tri {
        if items.iter().any(|t| *t == Tri::False) {
            Tri::False
        } else if items.iter().any(|t| *t == Tri::Unknown) {
            Tri::Unknown
        } else {
            Tri::True
        }
    };
    let exists = |items: Vec<Tri>| -> Tri {
        if items.iter().any(|t| *t == Tri::True) {
            Tri::True
        } else if items.iter().any(|t| *t == Tri::Unknown) {
            Tri::Unknown
        } else {
            Tri::False
        }
    };

    let isolated_at: Vec<Tri> = per_delta
        .iter()
        .map(|(_, ps)| for_all(ps.iter().map(&min_is_one).collect()))
        .collect();
    let unbounded_at: Vec<Tri> = per_delta
        .iter()
        .map(|(_, ps)| exists(ps.iter().map(&min_at_least_k).collect()))
        .collect();
    let bounded_at: Vec<Tri> = per_delta
        .iter()
        .map(|(_, ps)| for_all(ps.iter().map(&max_below_k).collect()))
        .collect();

    let isolated = exists(isolated_at.clone());
    let unbounded = for_all(unbounded_at.clone());
    let bounded = exists(bounded_at.clone());

    let all_profiles = || -> Vec<CapacityProfile> {
        per_delta.iter().flat_map(|(_, ps)| ps.clone()).collect()
    };

    let (kind, witnesses) = match isolated {
        Tri::True => {
            let idx = isolated_at.iter().position(|t| *t == Tri::True).unwrap();
            (EvidenceKind::IsolatedBallsEvidence, per_delta[idx].1.clone())
        }
        Tri::Unknown => (EvidenceKind::Inconclusive, all_profiles()),
        Tri::False => match unbounded {
            Tri::True => {
                let ws = per_delta
                    .iter()
                    .map(|(_, ps)| {
                        ps.iter()
                            .find(|p| min_at_least_k(p) == Tri::True)
                            .expect("each delta has a witnessing epsilon")
                            .clone()
                    })
                    .collect();
                (EvidenceKind::UnboundedEvidence, ws)
            }
            Tri::Unknown => (EvidenceKind::Inconclusive, all_profiles()),
            Tri::False => match bounded {
                Tri::True => {
                    let idx = bounded_at.iter().position(|t| *t == Tri::True).unwrap();
                    (EvidenceKind::BoundedEvidence, per_delta[idx].1.clone())
                }
                _ => (EvidenceKind::Inconclusive, all_profiles()),
            },
        },
    };

    let first = diameters.first().expect("nonempty family").clone();
    let last = diameters.last().expect("nonempty family").clone();
    let diameters_grow = last > first.double();

    let label = match kind {
        EvidenceKind::IsolatedBallsEvidence => {
            if diameters_grow {
                TrichotomyLabel::Inconclusive
            } else {
                TrichotomyLabel::SingletonType
            }
        }
        EvidenceKind::UnboundedEvidence => TrichotomyLabel::BaireType,
        EvidenceKind::BoundedEvidence => {
            if diameters_grow {
                TrichotomyLabel::CantorType
            } else {
                TrichotomyLabel::SingletonType
            }
        }
        EvidenceKind::Inconclusive => TrichotomyLabel::Inconclusive,
    };

    Ok(Classification {
        family: family.name(),
        verdict: GeometryVerdict {
            kind,
            witness_scales: witnesses,
            threshold_k,
        },
        label,
        diameters,
        grid,
        grid_policy: "delta: zero plus realized values and doubles below the diameter; \
                      epsilon: grid values above delta (delta itself when none); \
                      profiles taken on the largest family member"
            .to_string(),
    })
}
