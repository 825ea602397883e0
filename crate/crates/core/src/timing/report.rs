//! Descriptive statistics of latency samples per label.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelSummary<L, T> {
    pub label: L,
    pub count: usize,
    pub mean: T,
    /// Sample standard deviation (n − 1 denominator); 0 for a single sample.
    pub stdev: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionReport<L, T> {
    pub rows: Vec<LabelSummary<L, T>>,
    /// Label pairs whose means are within one standard deviation (the larger
    /// of the two) of each other.
    pub overlapping: Vec<(L, L)>,
}

pub fn summarize<T: Real>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let stdev = if xs.len() > 1 {
        (xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())).sqrt()
    } else {
        T::zero()
    };
    (mean, stdev)
}

/// Per-label mean, stdev and count, plus pairwise overlap flags. Labels with
/// no samples are listed with NaN statistics and never flagged.
pub fn distribution_report<L: Ord + Clone, T: Real>(samples: &BTreeMap<L, Vec<T>>) -> DistributionReport<L, T> {
    let rows: Vec<LabelSummary<L, T>> = samples
        .iter()
        .map(|(label, xs)| {
            let (mean, stdev) = summarize(xs);
            LabelSummary {
                label: label.clone(),
                count: xs.len(),
                mean,
                stdev,
            }
        })
        .collect();
    let mut overlapping = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if a.count == 0 || b.count == 0 {
                continue;
            }
            let gap = (a.mean - b.mean).abs();
            let spread = a.stdev.max(b.stdev);
            if gap < spread || gap == T::zero() {
                overlapping.push((a.label.clone(), b.label.clone()));
            }
        }
    }
    DistributionReport { rows, overlapping }
}
