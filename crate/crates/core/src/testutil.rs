//! Shared helpers for unit tests.

use crate::distance::Distance;
use crate::metric::FiniteMetricSpace;

/// Points on a line with the absolute-difference metric, labeled `p<coord>`.
pub(crate) fn line_space(coords: &[u64]) -> FiniteMetricSpace {
    let labels = coords.iter().map(|c| format!("p{c}")).collect();
    let matrix = coords
        .iter()
        .map(|&a| {
            coords
                .iter()
                .map(|&b| Distance::from_int(a.max(b) - a.min(b)))
                .collect::<Vec<_>>()
        })
        .collect();
    FiniteMetricSpace::validate_metric(labels, matrix).unwrap()
}

/// An ultrametric space given by explicit labels and a matrix of integers.
pub(crate) fn space_from_ints(labels: &[&str], matrix: &[&[u64]]) -> FiniteMetricSpace {
    let labels = labels.iter().map(|s| s.to_string()).collect();
    let matrix = matrix
        .iter()
        .map(|row| row.iter().map(|&v| Distance::from_int(v)).collect())
        .collect();
    FiniteMetricSpace::validate_metric(labels, matrix).unwrap()
}
