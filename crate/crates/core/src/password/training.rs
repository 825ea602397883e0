//! Balancing population digraph data before fitting.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::digraph::Digraph;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingConfig {
    /// Digraphs with fewer samples are excluded.
    pub min_samples: usize,
    /// Digraphs with more samples are under-sampled to this many.
    pub max_samples: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            min_samples: 100,
            max_samples: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exclusion {
    /// Not two lowercase alphanumeric characters.
    Charset,
    TooRare,
}

#[derive(Clone, Debug)]
pub struct TrainingSet<T> {
    pub samples: BTreeMap<Digraph, Vec<T>>,
    /// Raw key, its sample count, and why it was dropped.
    pub excluded: Vec<(String, usize, Exclusion)>,
}

/// Keeps lowercase-alphanumeric digraphs with at least `min_samples`
/// latencies and under-samples those above `max_samples` without
/// replacement. Retained samples keep their input order. Digraphs are
/// processed in key order from one seeded stream.
pub fn prepare_training<T: Real>(
    raw: &BTreeMap<String, Vec<T>>,
    cfg: TrainingConfig,
    seed: u64,
) -> Result<TrainingSet<T>> {
    if cfg.max_samples < cfg.min_samples {
        return Err(Error::Config(format!(
            "max_samples {} below min_samples {}",
            cfg.max_samples, cfg.min_samples
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = BTreeMap::new();
    let mut excluded = Vec::new();
    for (key, xs) in raw {
        let digraph = match key.parse::<Digraph>() {
            Ok(d) if d.is_lower_alnum() => d,
            _ => {
                excluded.push((key.clone(), xs.len(), Exclusion::Charset));
                continue;
            }
        };
        if xs.len() < cfg.min_samples {
            excluded.push((key.clone(), xs.len(), Exclusion::TooRare));
            continue;
        }
        let kept = if xs.len() > cfg.max_samples {
            let mut picks = index::sample(&mut rng, xs.len(), cfg.max_samples).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| xs[i]).collect()
        } else {
            xs.clone()
        };
        samples.insert(digraph, kept);
    }
    if samples.is_empty() {
        return Err(Error::Empty("every digraph was excluded from training".into()));
    }
    Ok(TrainingSet { samples, excluded })
}
