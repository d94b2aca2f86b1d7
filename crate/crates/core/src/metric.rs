//! Finite metric spaces with exact rational distances.
//!
//! A space stores its distance matrix as an interned table: the sorted list
//! of distinct values plus a rank matrix indexing into it. All threshold
//! tests (`d <= eps`) reduce to integer rank comparisons while staying
//! exact; the rational values are only touched when a new scale enters.

use std::collections::BTreeMap;
use std::fmt;

use crate::distance::Distance;
use crate::union_find::DisjointSet;

/// Validation and lookup errors for metric spaces. Witnessing points are
/// reported by label.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("distance matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix is asymmetric at ({x}, {y})")]
    AsymmetricMatrix { x: String, y: String },
    #[error("nonzero diagonal entry at {x}")]
    NonzeroDiagonal { x: String },
    #[error("distinct points {x} and {y} at distance zero")]
    ZeroDistanceDistinctPoints { x: String, y: String },
    #[error("triangle inequality fails on ({x}, {y}, {z}): d({x},{z}) > d({x},{y}) + d({y},{z})")]
    TriangleViolation { x: String, y: String, z: String },
    #[error("unknown point {label:?}")]
    UnknownPoint { label: String },
    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },
    #[error("space must have at least one point")]
    EmptySpace,
    #[error("generator would produce {requested} points, budget is {budget}")]
    BudgetExceeded { requested: u64, budget: u64 },
    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),
    #[error("scale list must be strictly increasing")]
    ScalesNotIncreasing,
}

/// A finite labeled metric space with an exact symmetric distance matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    /// Sorted distinct distance values; `values[0]` is always zero.
    values: Vec<Distance>,
    /// Row-major rank matrix into `values`.
    ranks: Vec<u32>,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiniteMetricSpace({} points, {} scales)",
            self.labels.len(),
            self.values.len()
        )
    }
}

/// The cover of a space by its eps-components at one scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalePartition {
    pub scale: Distance,
    /// Disjoint blocks covering all point indices; each block sorted, blocks
    /// ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    /// Largest block diameter.
    pub mesh: Distance,
}

impl ScalePartition {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, point: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&point).is_ok())
    }
}

/// One row of a mesh profile: scale, mesh of the component cover, block count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshRow {
    pub epsilon: Distance,
    pub mesh: Distance,
    pub block_count: usize,
}

/// Generator spec for truncated coordinate spaces: all length-`depth` tuples
/// over an alphabet of size `alphabet_size`, with the distance between two
/// tuples given by the level value of the highest coordinate where they
/// differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaSpec {
    pub alphabet_size: u64,
    pub depth: u32,
    /// Strictly increasing positive values, one per coordinate. Defaults to
    /// `1, 2, ..., depth`.
    pub level_values: Vec<Distance>,
}

impl KappaSpec {
    pub fn new(alphabet_size: u64, depth: u32) -> Self {
        let level_values = (1..=depth as u64).map(Distance::from_int).collect();
        KappaSpec {
            alphabet_size,
            depth,
            level_values,
        }
    }

    pub fn with_levels(
        alphabet_size: u64,
        depth: u32,
        level_values: Vec<Distance>,
    ) -> Result<Self, MetricError> {
        let spec = KappaSpec {
            alphabet_size,
            depth,
            level_values,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), MetricError> {
        if self.alphabet_size < 1 {
            return Err(MetricError::InvalidGenerator(
                "alphabet size must be at least 1".into(),
            ));
        }
        if self.depth < 1 {
            return Err(MetricError::InvalidGenerator(
                "depth must be at least 1".into(),
            ));
        }
        if self.level_values.len() != self.depth as usize {
            return Err(MetricError::InvalidGenerator(format!(
                "expected {} level values, got {}",
                self.depth,
                self.level_values.len()
            )));
        }
        if self.level_values[0].is_zero() {
            return Err(MetricError::InvalidGenerator(
                "level values must be positive".into(),
            ));
        }
        if self.level_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetricError::InvalidGenerator(
                "level values must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn point_count(&self) -> Option<u64> {
        let mut total: u64 = 1;
        for _ in 0..self.depth {
            total = total.checked_mul(self.alphabet_size)?;
        }
        Some(total)
    }
}

impl FiniteMetricSpace {
    /// Validates a raw matrix against all metric axioms and builds the space.
    pub fn validate_metric(
        labels: Vec<String>,
        matrix: Vec<Vec<Distance>>,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        {
            let mut seen = BTreeMap::new();
            for l in &labels {
                if seen.insert(l.clone(), ()).is_some() {
                    return Err(MetricError::DuplicateLabel { label: l.clone() });
                }
            }
        }
        if matrix.len() != n {
            return Err(MetricError::NotSquare {
                row: 0,
                got: matrix.len(),
                expected: n,
            });
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
        }
        for i in 0..n {
            if !matrix[i][i].is_zero() {
                return Err(MetricError::NonzeroDiagonal {
                    x: labels[i].clone(),
                });
            }
            for j in (i + 1)..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(MetricError::AsymmetricMatrix {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                    });
                }
                if matrix[i][j].is_zero() {
                    return Err(MetricError::ZeroDistanceDistinctPoints {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                    });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                if y == x {
                    continue;
                }
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    let via = &matrix[x][y] + &matrix[y][z];
                    if matrix[x][z] > via {
                        return Err(MetricError::TriangleViolation {
                            x: labels[x].clone(),
                            y: labels[y].clone(),
                            z: labels[z].clone(),
                        });
                    }
                }
            }
        }
        Ok(Self::intern(labels, matrix))
    }

    /// Interns a matrix already known to satisfy the metric axioms.
    pub(crate) fn from_valid_matrix(labels: Vec<String>, matrix: Vec<Vec<Distance>>) -> Self {
        Self::intern(labels, matrix)
    }

    fn intern(labels: Vec<String>, matrix: Vec<Vec<Distance>>) -> Self {
        let n = labels.len();
        let mut values: Vec<Distance> = Vec::new();
        values.push(Distance::zero());
        for row in &matrix {
            for d in row {
                values.push(d.clone());
            }
        }
        values.sort();
        values.dedup();
        let mut ranks = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let r = values.binary_search(&matrix[i][j]).expect("interned value");
                ranks[i * n + j] = r as u32;
            }
        }
        FiniteMetricSpace {
            labels,
            values,
            ranks,
        }
    }

    /// Builds the truncated coordinate space described by `spec`.
    ///
    /// Point `p` has coordinate `j` (1-based) equal to `(p / k^(j-1)) mod k`,
    /// so indices group points that agree on high coordinates, i.e. points
    /// that are close. With the default level values the distance is exactly
    /// the highest differing coordinate index.
    pub fn gen_kappa_space(spec: &KappaSpec, point_budget: u64) -> Result<Self, MetricError> {
        spec.validate()?;
        let total = spec.point_count().ok_or(MetricError::BudgetExceeded {
            requested: u64::MAX,
            budget: point_budget,
        })?;
        if total > point_budget {
            return Err(MetricError::BudgetExceeded {
                requested: total,
                budget: point_budget,
            });
        }
        let n = total as usize;
        let k = spec.alphabet_size;
        let depth = spec.depth as usize;

        let coords = |p: u64| -> Vec<u64> {
            let mut c = Vec::with_capacity(depth);
            let mut rest = p;
            for _ in 0..depth {
                c.push(rest % k);
                rest /= k;
            }
            c
        };
        let labels: Vec<String> = (0..total)
            .map(|p| {
                coords(p)
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("-")
            })
            .collect();

        let mut values = Vec::with_capacity(depth + 1);
        values.push(Distance::zero());
        values.extend(spec.level_values.iter().cloned());

        let mut ranks = vec![0u32; n * n];
        for p in 0..n {
            let cp = coords(p as u64);
            for q in (p + 1)..n {
                let cq = coords(q as u64);
                let mut top = 0usize;
                for j in (0..depth).rev() {
                    if cp[j] != cq[j] {
                        top = j + 1;
                        break;
                    }
                }
                let r = top as u32; // values[top] is the level value of coordinate `top`
                ranks[p * n + q] = r;
                ranks[q * n + p] = r;
            }
        }
        Ok(FiniteMetricSpace {
            labels,
            values,
            ranks,
        })
    }

    pub fn point_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, point: usize) -> &str {
        &self.labels[point]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, MetricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricError::UnknownPoint {
                label: label.to_string(),
            })
    }

    pub fn distance(&self, x: usize, y: usize) -> &Distance {
        &self.values[self.rank(x, y) as usize]
    }

    #[inline]
    pub(crate) fn rank(&self, x: usize, y: usize) -> u32 {
        self.ranks[x * self.labels.len() + y]
    }

    /// Number of interned values `<= eps`; a pair is within `eps` iff its
    /// rank is below this.
    pub(crate) fn threshold_rank(&self, eps: &Distance) -> usize {
        self.values.partition_point(|v| v <= eps)
    }

    pub(crate) fn value_at_rank(&self, rank: u32) -> &Distance {
        &self.values[rank as usize]
    }

    /// Sorted distinct positive distance values.
    pub fn realized_distances(&self) -> Vec<Distance> {
        self.values.iter().skip(1).cloned().collect()
    }

    pub fn min_positive_distance(&self) -> Option<Distance> {
        self.values.get(1).cloned()
    }

    pub fn diameter(&self) -> Distance {
        let n = self.labels.len();
        let max_rank = (0..n * n).map(|i| self.ranks[i]).max().unwrap_or(0);
        self.values[max_rank as usize].clone()
    }

    /// True iff the strong triangle inequality holds for all triples.
    pub fn is_ultrametric(&self) -> bool {
        let n = self.labels.len();
        for x in 0..n {
            for y in 0..n {
                let rxy = self.rank(x, y);
                for z in 0..n {
                    if self.rank(x, z) > rxy.max(self.rank(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Closed ball `{y : d(center, y) <= eps}`, sorted by point index.
    pub fn ball(&self, center: usize, eps: &Distance) -> Vec<usize> {
        let thr = self.threshold_rank(eps);
        (0..self.labels.len())
            .filter(|&y| (self.rank(center, y) as usize) < thr)
            .collect()
    }

    pub fn ball_by_label(&self, center: &str, eps: &Distance) -> Result<Vec<usize>, MetricError> {
        Ok(self.ball(self.index_of(center)?, eps))
    }

    pub fn subset_diameter(&self, subset: &[usize]) -> Distance {
        let mut max_rank = 0u32;
        for (i, &x) in subset.iter().enumerate() {
            for &y in &subset[i + 1..] {
                max_rank = max_rank.max(self.rank(x, y));
            }
        }
        self.values[max_rank as usize].clone()
    }

    /// Chain-connectivity classes of the graph with edges `d <= eps`.
    pub fn epsilon_components(&self, eps: &Distance) -> ScalePartition {
        let n = self.labels.len();
        let thr = self.threshold_rank(eps);
        let mut ds = DisjointSet::new(n);
        for x in 0..n {
            for y in (x + 1)..n {
                if (self.rank(x, y) as usize) < thr {
                    ds.unite(x, y);
                }
            }
        }
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in 0..n {
            by_root.entry(ds.find(p)).or_default().push(p);
        }
        let mut blocks: Vec<Vec<usize>> = by_root.into_values().collect();
        blocks.sort_by_key(|b| b[0]);
        let mesh_rank = blocks
            .iter()
            .map(|b| {
                let mut m = 0u32;
                for (i, &x) in b.iter().enumerate() {
                    for &y in &b[i + 1..] {
                        m = m.max(self.rank(x, y));
                    }
                }
                m
            })
            .max()
            .unwrap_or(0);
        ScalePartition {
            scale: eps.clone(),
            blocks,
            mesh: self.values[mesh_rank as usize].clone(),
        }
    }

    /// Per-scale mesh and component count. Scales must be strictly increasing.
    pub fn mesh_profile(&self, scales: &[Distance]) -> Result<Vec<MeshRow>, MetricError> {
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetricError::ScalesNotIncreasing);
        }
        Ok(scales
            .iter()
            .map(|eps| {
                let part = self.epsilon_components(eps);
                MeshRow {
                    epsilon: eps.clone(),
                    mesh: part.mesh,
                    block_count: part.blocks.len(),
                }
            })
            .collect())
    }

    pub fn is_macro_connected_at(&self, eps: &Distance) -> bool {
        self.epsilon_components(eps).blocks.len() == 1
    }

    /// Searches for a self-isometry taking every point to every other point.
    ///
    /// Transitivity from one base point suffices: connecting isometries
    /// compose and invert, so the orbit of the base either covers the space
    /// or some target is unreachable from it.
    pub fn isometric_homogeneity_probe(&self, budget: u64) -> HomogeneityVerdict {
        let n = self.labels.len();
        let base = 0usize;
        let mut nodes_left = budget;
        for target in 0..n {
            match find_isometry_internal(self, self, Some((base, target)), &mut nodes_left) {
                SearchResult::Found(_) => {}
                SearchResult::NotFound => {
                    return HomogeneityVerdict::WitnessPair {
                        from: self.labels[base].clone(),
                        to: self.labels[target].clone(),
                    }
                }
                SearchResult::Exhausted => return HomogeneityVerdict::BudgetExhausted,
            }
        }
        HomogeneityVerdict::Homogeneous
    }
}

/// Outcome of the homogeneity probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomogeneityVerdict {
    Homogeneous,
    /// An ordered pair with no connecting self-isometry.
    WitnessPair { from: String, to: String },
    BudgetExhausted,
}

enum SearchResult {
    Found(Vec<usize>),
    NotFound,
    Exhausted,
}

/// Searches for a distance-preserving bijection `a -> b`, optionally pinned
/// at one pair. Returns `None` when the budget runs out.
pub fn find_isometry(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    budget: u64,
) -> Option<Option<Vec<usize>>> {
    let mut nodes = budget;
    match find_isometry_internal(a, b, None, &mut nodes) {
        SearchResult::Found(m) => Some(Some(m)),
        SearchResult::NotFound => Some(None),
        SearchResult::Exhausted => None,
    }
}

fn find_isometry_internal(
    a: &FiniteMetricSpace,
    b: &FiniteMetricSpace,
    pin: Option<(usize, usize)>,
    nodes_left: &mut u64,
) -> SearchResult {
    let n = a.labels.len();
    if b.labels.len() != n {
        return SearchResult::NotFound;
    }
    // Distances must agree as value sets for ranks to be comparable.
    if a.values != b.values {
        return SearchResult::NotFound;
    }
    // Row signature: sorted multiset of distance ranks.
    let signature = |s: &FiniteMetricSpace, p: usize| -> Vec<u32> {
        let mut row: Vec<u32> = (0..n).map(|q| s.rank(p, q)).collect();
        row.sort_unstable();
        row
    };
    let sig_a: Vec<Vec<u32>> = (0..n).map(|p| signature(a, p)).collect();
    let sig_b: Vec<Vec<u32>> = (0..n).map(|p| signature(b, p)).collect();
    {
        let mut sa = sig_a.clone();
        let mut sb = sig_b.clone();
        sa.sort();
        sb.sort();
        if sa != sb {
            return SearchResult::NotFound;
        }
    }
    // Assignment order: rarest signature first, lexicographic label tie-break.
    let mut order: Vec<usize> = (0..n).collect();
    let mut freq: BTreeMap<&Vec<u32>, usize> = BTreeMap::new();
    for s in &sig_a {
        *freq.entry(s).or_insert(0) += 1;
    }
    order.sort_by(|&p, &q| {
        freq[&sig_a[p]]
            .cmp(&freq[&sig_a[q]])
            .then_with(|| sig_a[p].cmp(&sig_a[q]))
            .then_with(|| a.labels[p].cmp(&a.labels[q]))
    });
    if let Some((src, _)) = pin {
        order.retain(|&p| p != src);
        order.insert(0, src);
    }

    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn assign(
        a: &FiniteMetricSpace,
        b: &FiniteMetricSpace,
        order: &[usize],
        sig_a: &[Vec<u32>],
        sig_b: &[Vec<u32>],
        pin: Option<(usize, usize)>,
        depth: usize,
        image: &mut [usize],
        used: &mut [bool],
        nodes_left: &mut u64,
    ) -> SearchResult {
        if depth == order.len() {
            return SearchResult::Found(image.to_vec());
        }
        let p = order[depth];
        let candidates: Vec<usize> = match pin {
            Some((src, dst)) if src == p => vec![dst],
            _ => (0..image.len()).collect(),
        };
        for q in candidates {
            if used[q] || sig_a[p] != sig_b[q] {
                continue;
            }
            if *nodes_left == 0 {
                return SearchResult::Exhausted;
            }
            *nodes_left -= 1;
            let consistent = order[..depth]
                .iter()
                .all(|&prev| a.rank(p, prev) == b.rank(q, image[prev]));
            if !consistent {
                continue;
            }
            image[p] = q;
            used[q] = true;
            match assign(
                a, b, order, sig_a, sig_b, pin, depth + 1, image, used, nodes_left,
            ) {
                SearchResult::NotFound => {}
                other => return other,
            }
            image[p] = usize::MAX;
            used[q] = false;
        }
        SearchResult::NotFound
    }

    assign(
        a,
        b,
        &order,
        &sig_a,
        &sig_b,
        pin,
        0,
        &mut image,
        &mut used,
        nodes_left,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::line_space;

    fn d(n: u64) -> Distance {
        Distance::from_int(n)
    }

    #[test]
    fn validates_two_point_space() {
        let s = FiniteMetricSpace::validate_metric(
            vec!["a".into(), "b".into()],
            vec![vec![d(0), d(1)], vec![d(1), d(0)]],
        )
        .unwrap();
        assert_eq!(s.point_count(), 2);
        assert_eq!(s.distance(0, 1), &d(1));
    }

    #[test]
    fn rejects_triangle_violation() {
        let err = FiniteMetricSpace::validate_metric(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![d(0), d(1), d(3)],
                vec![d(1), d(0), d(1)],
                vec![d(3), d(1), d(0)],
            ],
        )
        .unwrap_err();
        assert_eq!(
            err,
            MetricError::TriangleViolation {
                x: "a".into(),
                y: "b".into(),
                z: "c".into()
            }
        );
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let err = FiniteMetricSpace::validate_metric(
            vec!["a".into(), "b".into()],
            vec![vec![d(0), d(1)], vec![d(2), d(0)]],
        )
        .unwrap_err();
        assert_eq!(
            err,
            MetricError::AsymmetricMatrix {
                x: "a".into(),
                y: "b".into()
            }
        );
    }

    #[test]
    fn rejects_zero_distance_and_nonzero_diagonal() {
        let err = FiniteMetricSpace::validate_metric(
            vec!["a".into(), "b".into()],
            vec![vec![d(0), d(0)], vec![d(0), d(0)]],
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::ZeroDistanceDistinctPoints { .. }));
        let err = FiniteMetricSpace::validate_metric(
            vec!["a".into()],
            vec![vec![d(1)]],
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::NonzeroDiagonal { .. }));
    }

    #[test]
    fn kappa_distances_match_formula() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 2), 1 << 20).unwrap();
        assert_eq!(s.point_count(), 4);
        let i = |l: &str| s.index_of(l).unwrap();
        assert_eq!(s.distance(i("0-0"), i("1-0")), &d(1));
        assert_eq!(s.distance(i("0-0"), i("0-1")), &d(2));
        assert_eq!(s.distance(i("0-0"), i("1-1")), &d(2));
    }

    #[test]
    fn kappa_degenerate_alphabet() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(1, 5), 1 << 20).unwrap();
        assert_eq!(s.point_count(), 1);
        assert_eq!(s.diameter(), Distance::zero());
    }

    #[test]
    fn kappa_with_value_schedule() {
        let spec = KappaSpec::with_levels(3, 2, vec![d(7), d(49)]).unwrap();
        let s = FiniteMetricSpace::gen_kappa_space(&spec, 1 << 20).unwrap();
        let i = |l: &str| s.index_of(l).unwrap();
        assert_eq!(s.distance(i("0-0"), i("2-0")), &d(7));
        assert_eq!(s.distance(i("1-2"), i("1-0")), &d(49));
    }

    #[test]
    fn kappa_budget_guard() {
        let err = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(10, 7), 100).unwrap_err();
        assert_eq!(
            err,
            MetricError::BudgetExceeded {
                requested: 10_000_000,
                budget: 100
            }
        );
    }

    #[test]
    fn ultrametric_checks() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 3), 1 << 20).unwrap();
        assert!(s.is_ultrametric());
        assert!(!line_space(&[0, 1, 2]).is_ultrametric());
        assert!(line_space(&[0, 5]).is_ultrametric());
    }

    #[test]
    fn components_at_scales() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 2), 1 << 20).unwrap();
        let part = s.epsilon_components(&d(1));
        assert_eq!(part.blocks.len(), 2);
        let labels: Vec<Vec<&str>> = part
            .blocks
            .iter()
            .map(|b| b.iter().map(|&p| s.label(p)).collect())
            .collect();
        assert_eq!(labels, vec![vec!["0-0", "1-0"], vec!["0-1", "1-1"]]);
        assert_eq!(part.mesh, d(1));

        assert!(s.is_macro_connected_at(&d(2)));
        assert!(!s.is_macro_connected_at(&d(1)));

        let zero = s.epsilon_components(&Distance::zero());
        assert_eq!(zero.blocks.len(), 4);
        assert_eq!(zero.mesh, Distance::zero());
    }

    #[test]
    fn mesh_profile_rows() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 2), 1 << 20).unwrap();
        let rows = s
            .mesh_profile(&[Distance::zero(), d(1), d(2)])
            .unwrap();
        let got: Vec<(Distance, Distance, usize)> = rows
            .into_iter()
            .map(|r| (r.epsilon, r.mesh, r.block_count))
            .collect();
        assert_eq!(
            got,
            vec![
                (Distance::zero(), Distance::zero(), 4),
                (d(1), d(1), 2),
                (d(2), d(2), 1),
            ]
        );

        let chain = line_space(&[0, 1, 2, 3]);
        let rows = chain.mesh_profile(&[d(1)]).unwrap();
        assert_eq!(rows[0].mesh, d(3));
        assert_eq!(rows[0].block_count, 1);

        assert!(chain.mesh_profile(&[d(2), d(1)]).is_err());
    }

    #[test]
    fn balls() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 3), 1 << 20).unwrap();
        let origin = s.index_of("0-0-0").unwrap();
        let b = s.ball(origin, &d(2));
        let labels: Vec<&str> = b.iter().map(|&p| s.label(p)).collect();
        assert_eq!(labels, vec!["0-0-0", "1-0-0", "0-1-0", "1-1-0"]);

        assert_eq!(s.ball(origin, &Distance::zero()), vec![origin]);
        assert_eq!(s.ball(origin, &d(3)).len(), 8);
        assert!(s.ball_by_label("9-9-9", &d(1)).is_err());
    }

    #[test]
    fn homogeneity_probe_verdicts() {
        let s = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 2), 1 << 20).unwrap();
        assert_eq!(
            s.isometric_homogeneity_probe(1 << 20),
            HomogeneityVerdict::Homogeneous
        );

        let two = line_space(&[0, 7]);
        assert_eq!(
            two.isometric_homogeneity_probe(1 << 20),
            HomogeneityVerdict::Homogeneous
        );

        let collinear = line_space(&[0, 1, 2]);
        match collinear.isometric_homogeneity_probe(1 << 20) {
            HomogeneityVerdict::WitnessPair { from, to } => {
                assert_eq!(from, "p0");
                assert_eq!(to, "p1");
            }
            other => panic!("expected witness pair, got {other:?}"),
        }

        assert_eq!(
            collinear.isometric_homogeneity_probe(1),
            HomogeneityVerdict::BudgetExhausted
        );
    }

    #[test]
    fn cross_space_isometry() {
        let a = FiniteMetricSpace::gen_kappa_space(&KappaSpec::new(2, 2), 1 << 20).unwrap();
        let spec = KappaSpec::with_levels(2, 2, vec![d(1), d(2)]).unwrap();
        let b = FiniteMetricSpace::gen_kappa_space(&spec, 1 << 20).unwrap();
        let m = find_isometry(&a, &b, 1 << 20).unwrap().unwrap();
        for x in 0..a.point_count() {
            for y in 0..a.point_count() {
                assert_eq!(a.distance(x, y), b.distance(m[x], m[y]));
            }
        }
        let c = line_space(&[0, 1, 3]);
        let e = line_space(&[0, 2, 3]);
        assert!(find_isometry(&c, &e, 1 << 20).unwrap().is_none());
    }
}
