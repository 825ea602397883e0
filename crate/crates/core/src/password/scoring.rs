//! Penalty scoring and dictionary ranking.

use std::cmp::Ordering;
use std::io::Write;

use super::dictionary::{DictEntry, Dictionary};
use super::digraph::digraphs;
use super::ranking::{position_rankings, DigraphRanker, DigraphRanking, WholePasswordScorer};
use crate::error::{Error, Result};
use crate::observation::ObservationSequence;
use crate::scalar::Real;

pub const PASSWORD_GUESS_HEADER: &str = "rank,password,penalty";

/// Sum over digraph positions of the digraph's rank in that position's
/// ranking. Lower is more likely.
pub fn penalty_score<T: Real>(password: &str, rankings: &[DigraphRanking<T>]) -> Result<u64> {
    let ds = digraphs(password);
    if ds.len() != rankings.len() || password.chars().count() < 2 {
        return Err(Error::LengthMismatch(format!(
            "password of length {} against {} latencies",
            password.chars().count(),
            rankings.len()
        )));
    }
    Ok(ds.iter().zip(rankings).map(|(d, r)| r.penalty_rank(d) as u64).sum())
}

/// Convenience: rank `obs` with `ranker` and score `password`.
pub fn penalty_for_observation<T: Real, R: DigraphRanker<T> + ?Sized>(
    password: &str,
    obs: &ObservationSequence<T>,
    ranker: &R,
) -> Result<u64> {
    penalty_score(password, &position_rankings(obs, ranker)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedPassword {
    /// 1-based.
    pub rank: usize,
    pub password: String,
    pub penalty: u64,
    pub count: u64,
}

/// Ranks every dictionary password whose length matches the rankings.
///
/// Ascending penalty; ties by descending frequency, then lexicographic.
pub fn rank_dictionary<T: Real>(dict: &Dictionary, rankings: &[DigraphRanking<T>]) -> Result<Vec<RankedPassword>> {
    let len = rankings.len() + 1;
    let mut scored: Vec<(u64, &DictEntry)> = dict
        .entries()
        .iter()
        .filter(|e| e.password.chars().count() == len)
        .map(|e| Ok((penalty_score(&e.password, rankings)?, e)))
        .collect::<Result<_>>()?;
    if scored.is_empty() {
        return Err(Error::Empty(format!("no dictionary passwords of length {len}")));
    }
    scored.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| b.1.count.cmp(&a.1.count))
            .then_with(|| a.1.password.cmp(&b.1.password))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (penalty, e))| RankedPassword {
            rank: i + 1,
            password: e.password.clone(),
            penalty,
            count: e.count,
        })
        .collect())
}

/// Ranks length-matched passwords by a whole-string scorer, highest score
/// first; ties by descending frequency, then lexicographic.
pub fn rank_dictionary_whole<T: Real, S: WholePasswordScorer<T> + ?Sized>(
    dict: &Dictionary,
    obs: &ObservationSequence<T>,
    scorer: &S,
) -> Result<Vec<(String, T)>> {
    let len = obs.secret_len();
    let mut scored: Vec<(T, &DictEntry)> = dict
        .entries()
        .iter()
        .filter(|e| e.password.chars().count() == len)
        .map(|e| Ok((scorer.score(&obs.latencies, &e.password)?, e)))
        .collect::<Result<_>>()?;
    if scored.is_empty() {
        return Err(Error::Empty(format!("no dictionary passwords of length {len}")));
    }
    if scored.iter().any(|s| s.0.is_nan()) {
        return Err(Error::domain("whole-password scorer returned NaN"));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.1.count.cmp(&a.1.count))
            .then_with(|| a.1.password.cmp(&b.1.password))
    });
    Ok(scored.into_iter().map(|(s, e)| (e.password.clone(), s)).collect())
}

/// Writes `rank,password,penalty`.
pub fn write_password_guesses<'a, W: Write>(
    guesses: impl IntoIterator<Item = &'a RankedPassword>,
    mut w: W,
) -> Result<()> {
    writeln!(w, "{PASSWORD_GUESS_HEADER}")?;
    for g in guesses {
        writeln!(w, "{},{},{}", g.rank, csv_field(&g.password), g.penalty)?;
    }
    Ok(())
}

/// Quotes a field if it contains a separator or quote.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
