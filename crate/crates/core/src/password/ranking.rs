//! Per-latency digraph rankings and the rankers that produce them.

use std::collections::{BTreeMap, HashMap};

use super::digraph::Digraph;
use crate::error::{Error, Result};
use crate::observation::ObservationSequence;
use crate::scalar::Real;
use crate::timing::{PriorMode, TimingModel};

/// Digraphs ordered by decreasing confidence for one latency.
///
/// Entries with equal confidence are listed in digraph order and share a
/// rank: the rank of a digraph is one plus the number of entries with
/// strictly higher confidence.
#[derive(Clone, Debug, PartialEq)]
pub struct DigraphRanking<T> {
    entries: Vec<(Digraph, T)>,
    ranks: HashMap<Digraph, usize>,
}

impl<T: Real> DigraphRanking<T> {
    /// Sorts `scores` by decreasing confidence. Confidences must be finite,
    /// nonnegative, unique per digraph and sum to at most one.
    pub fn from_scores(scores: impl IntoIterator<Item = (Digraph, T)>) -> Result<Self> {
        let mut entries: Vec<(Digraph, T)> = scores.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("digraph ranking has duplicate digraphs"));
        }
        if entries.iter().any(|(_, c)| !(*c >= T::zero() && c.is_finite())) {
            return Err(Error::domain("digraph confidences must be finite and nonnegative"));
        }
        let total: T = entries.iter().map(|e| e.1).sum();
        if total > T::one() + T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::domain(format!("digraph confidences sum to {total} > 1")));
        }
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite"));
        let mut ranks = HashMap::with_capacity(entries.len());
        let mut rank = 1;
        for (i, (d, c)) in entries.iter().enumerate() {
            if i > 0 && *c < entries[i - 1].1 {
                rank = i + 1;
            }
            ranks.insert(*d, rank);
        }
        Ok(DigraphRanking { entries, ranks })
    }

    pub fn entries(&self) -> &[(Digraph, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based rank, `None` if the digraph is not ranked.
    pub fn rank_of(&self, d: &Digraph) -> Option<usize> {
        self.ranks.get(d).copied()
    }

    pub fn confidence_of(&self, d: &Digraph) -> Option<T> {
        self.entries.iter().find(|e| e.0 == *d).map(|e| e.1)
    }

    /// Rank used for scoring: unranked digraphs get `len + 1`.
    pub fn penalty_rank(&self, d: &Digraph) -> usize {
        self.rank_of(d).unwrap_or(self.entries.len() + 1)
    }
}

/// Anything that turns one latency into a digraph ranking. Closures of type
/// `Fn(T) -> Result<DigraphRanking<T>>` implement it, so external learners can
/// be plugged in without touching the scoring code.
pub trait DigraphRanker<T> {
    fn rank(&self, latency: T) -> Result<DigraphRanking<T>>;
}

impl<T, F> DigraphRanker<T> for F
where
    F: Fn(T) -> Result<DigraphRanking<T>>,
{
    fn rank(&self, latency: T) -> Result<DigraphRanking<T>> {
        self(latency)
    }
}

/// Ranks digraphs by gamma-likelihood posterior.
pub struct GammaRanker<'a, T> {
    model: &'a TimingModel<Digraph, T>,
    prior: PriorMode,
}

impl<'a, T: Real> GammaRanker<'a, T> {
    pub fn new(model: &'a TimingModel<Digraph, T>, prior: PriorMode) -> Result<Self> {
        if model.is_empty() {
            return Err(Error::Empty("digraph model is untrained".into()));
        }
        if prior == PriorMode::PairCount {
            return Err(Error::domain("pair-count priors apply to keypad classes, not digraphs"));
        }
        Ok(GammaRanker { model, prior })
    }
}

impl<T: Real> DigraphRanker<T> for GammaRanker<'_, T> {
    fn rank(&self, latency: T) -> Result<DigraphRanking<T>> {
        DigraphRanking::from_scores(self.model.posterior(latency, self.prior)?)
    }
}

/// Scores whole candidate strings from the full latency sequence at once.
/// Higher scores are more likely. No learner ships with this crate.
pub trait WholePasswordScorer<T> {
    fn score(&self, latencies: &[T], candidate: &str) -> Result<T>;
}

/// One ranking per digraph position of `obs`.
pub fn position_rankings<T: Real, R: DigraphRanker<T> + ?Sized>(
    obs: &ObservationSequence<T>,
    ranker: &R,
) -> Result<Vec<DigraphRanking<T>>> {
    obs.latencies.iter().map(|&l| ranker.rank(l)).collect()
}

/// Averages confidences per position across recordings and re-ranks.
/// A digraph missing from one recording's ranking contributes zero there.
pub fn fuse_rankings<T: Real>(per_recording: &[Vec<DigraphRanking<T>>]) -> Result<Vec<DigraphRanking<T>>> {
    let first = per_recording
        .first()
        .ok_or_else(|| Error::Empty("no recordings to fuse".into()))?;
    if let Some(bad) = per_recording.iter().find(|r| r.len() != first.len()) {
        return Err(Error::LengthMismatch(format!(
            "recordings have {} and {} positions",
            first.len(),
            bad.len()
        )));
    }
    let k = T::of_usize(per_recording.len());
    (0..first.len())
        .map(|pos| {
            let mut sums: BTreeMap<Digraph, T> = BTreeMap::new();
            for rec in per_recording {
                for &(d, c) in rec[pos].entries() {
                    let s = sums.entry(d).or_insert_with(T::zero);
                    *s = *s + c;
                }
            }
            DigraphRanking::from_scores(sums.into_iter().map(|(d, s)| (d, s / k)))
        })
        .collect()
}

/// Ranks each recording and fuses the rankings position by position.
pub fn fuse_recordings<T: Real, R: DigraphRanker<T> + ?Sized>(
    obs: &[ObservationSequence<T>],
    ranker: &R,
) -> Result<Vec<DigraphRanking<T>>> {
    if let Some(first) = obs.first() {
        if let Some(bad) = obs.iter().find(|o| o.len() != first.len()) {
            return Err(Error::LengthMismatch(format!(
                "recording {} has {} latencies, recording {} has {}",
                first.recording_id,
                first.len(),
                bad.recording_id,
                bad.len()
            )));
        }
    }
    let per: Vec<Vec<DigraphRanking<T>>> = obs
        .iter()
        .map(|o| position_rankings(o, ranker))
        .collect::<Result<_>>()?;
    fuse_rankings(&per)
}
