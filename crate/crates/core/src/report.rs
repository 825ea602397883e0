//! Guess-rank summaries for attack evaluations.

use std::collections::BTreeMap;

use serde::Serialize;

/// Attempt counts at which PIN guess CDFs are sampled.
pub const PIN_CDF_ATTEMPTS: [usize; 11] = [5, 10, 20, 40, 80, 160, 320, 640, 1280, 2560, 5120];

/// Attempt thresholds reported per target password.
pub const PASSWORD_THRESHOLDS: [usize; 2] = [20_000, 100_000];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRank {
    pub id: String,
    pub target: Option<String>,
    /// 1-based rank of the target in the guess list; `None` when absent.
    pub rank: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdfPoint {
    pub attempts: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub name: String,
    pub points: Vec<CdfPoint>,
}

/// Per-target statistics over instances of one password.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetSummary {
    pub target: String,
    pub instances: usize,
    pub avg: f64,
    pub stdev: f64,
    pub med: f64,
    /// Expected attempts of the frequency baseline.
    pub rnd: f64,
    /// Fraction of instances ranked strictly earlier than `rnd`.
    pub below_rnd: f64,
    pub best: usize,
    /// Fraction of instances ranked within each threshold.
    pub within: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub instances: Vec<InstanceRank>,
    pub cdf: Vec<CdfPoint>,
    pub baselines: Vec<Curve>,
    pub targets: Vec<TargetSummary>,
}

/// Fraction of instances whose rank is at most each attempt count. Missing
/// ranks count as misses. Nondecreasing whenever `attempts` is sorted.
pub fn guess_cdf(ranks: &[Option<usize>], attempts: &[usize]) -> Vec<CdfPoint> {
    let n = ranks.len().max(1) as f64;
    attempts
        .iter()
        .map(|&k| CdfPoint {
            attempts: k,
            fraction: ranks.iter().filter(|r| matches!(r, Some(x) if *x <= k)).count() as f64 / n,
        })
        .collect()
}

/// Summary for one target. `ranks` must be nonempty and 1-based.
pub fn summarize_target(target: &str, ranks: &[usize], rnd: f64, thresholds: &[usize]) -> TargetSummary {
    let n = ranks.len() as f64;
    let avg = ranks.iter().map(|&r| r as f64).sum::<f64>() / n;
    let stdev = if ranks.len() > 1 {
        (ranks.iter().map(|&r| (r as f64 - avg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    let med = if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    };
    TargetSummary {
        target: target.to_string(),
        instances: ranks.len(),
        avg,
        stdev,
        med,
        rnd,
        below_rnd: ranks.iter().filter(|&&r| (r as f64) < rnd).count() as f64 / n,
        best: sorted[0],
        within: thresholds
            .iter()
            .map(|&t| (t, ranks.iter().filter(|&&r| r <= t).count() as f64 / n))
            .collect(),
    }
}
