pub mod fit;
pub mod passwords;
pub mod pins;
pub mod simulate;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use keyleak::ObservationSequence;

use crate::io;

/// Where observed latencies come from.
#[derive(Args, Debug, Clone)]
#[group(required = false, multiple = false)]
pub struct ObservationSource {
    /// `recording_id,position,latency_ms` CSV.
    #[arg(long)]
    pub observations: Option<PathBuf>,
    /// `entry_id,event_index,appearance_ms` CSV of symbol appearance times.
    #[arg(long)]
    pub timestamps: Option<PathBuf>,
}

impl ObservationSource {
    pub fn load(&self) -> anyhow::Result<Vec<ObservationSequence>> {
        if let Some(p) = &self.observations {
            return Ok(keyleak::observation::read_observations(io::open(p)?)?);
        }
        if let Some(p) = &self.timestamps {
            let (seqs, rejected) = keyleak::sim::ingest_timestamp_log(io::open(p)?)?;
            for r in rejected {
                eprintln!("skipped entry {}: {}", r.entry_id, r.reason);
            }
            return Ok(seqs);
        }
        anyhow::bail!(keyleak::Error::Config(
            "one of --observations or --timestamps is required".into()
        ))
    }

    pub fn describe(&self) -> String {
        match (&self.observations, &self.timestamps) {
            (Some(p), _) => p.display().to_string(),
            (_, Some(p)) => p.display().to_string(),
            _ => String::new(),
        }
    }
}

pub fn load_truth(path: Option<&Path>) -> anyhow::Result<Option<HashMap<String, String>>> {
    path.map(|p| Ok(keyleak::observation::read_truth(io::open(p)?)?))
        .transpose()
}

/// Truth for `id`, falling back to the part before `#` for cycled entries.
pub fn truth_for<'a>(truth: &'a HashMap<String, String>, id: &str) -> Option<&'a String> {
    truth.get(id).or_else(|| truth.get(base_id(id)))
}

pub fn base_id(id: &str) -> &str {
    id.split_once('#').map_or(id, |(b, _)| b)
}

pub fn announce_seed(seed: u64) {
    eprintln!("seed: {seed}");
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
