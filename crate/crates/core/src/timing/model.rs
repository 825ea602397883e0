//! Per-label gamma timing models and latency posteriors.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::gamma::{fit_gamma, GammaParams};
use crate::error::{Error, Result};
use crate::keypad::{pairs_in_class, DistanceClass};
use crate::scalar::{log_sum_exp, Real};

/// Labels with fewer samples are dropped by default.
pub const DEFAULT_MIN_SAMPLES: usize = 100;

/// Header line of the serialized model format.
pub const MODEL_HEADER: &str = "label,shape,scale,prior,count";

/// Something a latency can be attributed to: a keypad distance class or a
/// typed digraph. `Ord` is the fixed tie-breaking order.
pub trait Label: Ord + Clone + Hash + Debug + Display {
    fn parse_label(s: &str) -> Result<Self>;

    /// Number of ordered keypairs realising this label, if it is a keypad
    /// distance class.
    fn pair_count(&self) -> Option<usize> {
        None
    }
}

impl Label for DistanceClass {
    fn parse_label(s: &str) -> Result<Self> {
        s.parse()
    }

    fn pair_count(&self) -> Option<usize> {
        Some(pairs_in_class(*self).len())
    }
}

impl Label for String {
    fn parse_label(s: &str) -> Result<Self> {
        if s.is_empty() || s.contains([',', '\n', '\r']) {
            return Err(Error::domain(format!("invalid label `{s}`")));
        }
        Ok(s.to_owned())
    }
}

/// How label priors enter the posterior.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorMode {
    /// Label frequencies observed at fit time.
    Fitted,
    Uniform,
    /// Proportional to the number of keypad pairs in each distance class.
    #[default]
    PairCount,
}

impl std::str::FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fitted" => Ok(PriorMode::Fitted),
            "uniform" => Ok(PriorMode::Uniform),
            "pair-count" | "pair_count" => Ok(PriorMode::PairCount),
            _ => Err(Error::domain(format!("unknown prior mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelFit<T> {
    pub params: GammaParams<T>,
    pub prior: T,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingModel<L, T> {
    labels: BTreeMap<L, LabelFit<T>>,
}

/// A fitted model together with what the fit had to leave out.
#[derive(Clone, Debug)]
pub struct FitOutcome<L, T> {
    pub model: TimingModel<L, T>,
    /// Labels below `min_samples`, with their sample counts.
    pub dropped: Vec<(L, usize)>,
    /// Labels whose fit used the variance floor.
    pub floored: Vec<L>,
}

impl<L: Label, T: Real> TimingModel<L, T> {
    /// Builds a model from explicit parameters. Priors are normalized to sum to one.
    pub fn from_parts(parts: impl IntoIterator<Item = (L, LabelFit<T>)>) -> Result<Self> {
        let labels: BTreeMap<L, LabelFit<T>> = parts.into_iter().collect();
        if labels.is_empty() {
            return Err(Error::Empty("timing model has no labels".into()));
        }
        let total: T = labels.values().map(|f| f.prior).sum();
        if labels.values().any(|f| !(f.prior >= T::zero() && f.prior.is_finite())) || !(total > T::zero()) {
            return Err(Error::domain("label priors must be nonnegative with positive sum"));
        }
        let labels = labels
            .into_iter()
            .map(|(l, f)| {
                (
                    l,
                    LabelFit {
                        prior: f.prior / total,
                        ..f
                    },
                )
            })
            .collect();
        Ok(TimingModel { labels })
    }

    /// Fits one gamma per label by maximum likelihood.
    ///
    /// Labels with fewer than `min_samples` latencies are dropped and reported
    /// in [`FitOutcome::dropped`]. Priors are the retained labels' sample
    /// frequencies.
    pub fn fit(samples: &BTreeMap<L, Vec<T>>, min_samples: usize) -> Result<FitOutcome<L, T>> {
        if samples.is_empty() || samples.values().all(Vec::is_empty) {
            return Err(Error::Empty("no latency samples".into()));
        }
        let mut dropped = Vec::new();
        let mut floored = Vec::new();
        let mut parts = Vec::new();
        for (label, xs) in samples {
            if xs.len() < min_samples.max(1) {
                dropped.push((label.clone(), xs.len()));
                continue;
            }
            let fit = fit_gamma(xs).map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("label {label}: {msg}")),
                other => other,
            })?;
            if fit.floored {
                floored.push(label.clone());
            }
            parts.push((
                label.clone(),
                LabelFit {
                    params: fit.params,
                    prior: T::of_usize(xs.len()),
                    count: xs.len(),
                },
            ));
        }
        if parts.is_empty() {
            return Err(Error::Empty(format!("no label has at least {min_samples} samples")));
        }
        Ok(FitOutcome {
            model: Self::from_parts(parts)?,
            dropped,
            floored,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &L> {
        self.labels.keys()
    }

    pub fn get(&self, label: &L) -> Option<&LabelFit<T>> {
        self.labels.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, &LabelFit<T>)> {
        self.labels.iter()
    }

    /// Same parameters, priors replaced by `weights` (normalized). Labels
    /// missing from `weights` get weight zero.
    pub fn with_prior_weights(&self, weights: &BTreeMap<L, T>) -> Result<Self> {
        Self::from_parts(self.labels.iter().map(|(l, f)| {
            let w = weights.get(l).copied().unwrap_or_else(T::zero);
            (l.clone(), LabelFit { prior: w, ..*f })
        }))
    }

    fn log_priors(&self, mode: PriorMode) -> Result<Vec<T>> {
        match mode {
            PriorMode::Fitted => Ok(self.labels.values().map(|f| f.prior.ln()).collect()),
            PriorMode::Uniform => Ok(vec![T::zero(); self.labels.len()]),
            PriorMode::PairCount => self
                .labels
                .keys()
                .map(|l| {
                    l.pair_count()
                        .map(|c| T::of_usize(c).ln())
                        .ok_or_else(|| Error::domain(format!("pair-count prior undefined for label {l}")))
                })
                .collect(),
        }
    }

    /// Normalized log posterior of every label given one latency, in label order.
    pub fn log_posterior_by_label(&self, latency: T, mode: PriorMode) -> Result<Vec<(L, T)>> {
        if !(latency > T::zero() && latency.is_finite()) {
            return Err(Error::domain(format!("latency must be positive, got {latency}")));
        }
        let priors = self.log_priors(mode)?;
        let scores: Vec<T> = self
            .labels
            .values()
            .zip(&priors)
            .map(|(f, &lp)| f.params.ln_pdf(latency) + lp)
            .collect();
        let norm = log_sum_exp(&scores);
        if !norm.is_finite() {
            return Err(Error::domain(format!(
                "latency {latency} has zero likelihood under every label"
            )));
        }
        Ok(self
            .labels
            .keys()
            .cloned()
            .zip(scores.into_iter().map(|s| s - norm))
            .collect())
    }

    /// Log posterior sorted by decreasing probability; ties keep label order.
    pub fn log_posterior(&self, latency: T, mode: PriorMode) -> Result<Vec<(L, T)>> {
        let mut out = self.log_posterior_by_label(latency, mode)?;
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite or -inf log posteriors"));
        Ok(out)
    }

    /// Posterior probabilities sorted by decreasing probability; ties keep label order.
    pub fn posterior(&self, latency: T, mode: PriorMode) -> Result<Vec<(L, T)>> {
        Ok(self
            .log_posterior(latency, mode)?
            .into_iter()
            .map(|(l, lp)| (l, lp.exp()))
            .collect())
    }

    /// Writes `label,shape,scale,prior,count` lines with 12 significant digits.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MODEL_HEADER}")?;
        for (label, f) in &self.labels {
            writeln!(
                w,
                "{label},{:.11e},{:.11e},{:.11e},{}",
                f.params.shape.as_f64(),
                f.params.scale.as_f64(),
                f.prior.as_f64(),
                f.count
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("utf8")
    }

    /// Reads the format produced by [`TimingModel::write_to`]. The header is
    /// optional; blank lines and `#` comments are skipped.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut parts = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == MODEL_HEADER {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::parse(lineno, format!("expected 5 fields, got {}", fields.len())));
            }
            let label = L::parse_label(fields[0]).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let num = |s: &str| -> Result<T> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad number `{s}`")))?;
                T::from_f64(v).ok_or_else(|| Error::parse(lineno, format!("number `{s}` out of range")))
            };
            let params =
                GammaParams::new(num(fields[1])?, num(fields[2])?).map_err(|e| Error::parse(lineno, e.to_string()))?;
            let prior = num(fields[3])?;
            let count: usize = fields[4]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad count `{}`", fields[4])))?;
            parts.push((label, LabelFit { params, prior, count }));
        }
        let n = parts.len();
        let model = Self::from_parts(parts)?;
        if model.len() != n {
            return Err(Error::parse(0, "duplicate labels in model"));
        }
        Ok(model)
    }
}
