//! Observed latency sequences and the `recording_id,position,latency_ms` log.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const OBSERVATION_HEADER: [&str; 3] = ["recording_id", "position", "latency_ms"];

/// Ordered inter-keystroke latencies (ms) from one secret entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSequence<T> {
    pub recording_id: String,
    pub latencies: Vec<T>,
}

impl<T: Real> ObservationSequence<T> {
    pub fn new(recording_id: impl Into<String>, latencies: Vec<T>) -> Result<Self> {
        let recording_id = recording_id.into();
        if let Some(bad) = latencies.iter().find(|x| !(**x > T::zero() && x.is_finite())) {
            return Err(Error::domain(format!(
                "recording {recording_id}: latency must be positive, got {bad}"
            )));
        }
        Ok(ObservationSequence {
            recording_id,
            latencies,
        })
    }

    /// Latencies between consecutive appearance times.
    pub fn from_times(recording_id: impl Into<String>, times: &[T]) -> Result<Self> {
        let lat = times.windows(2).map(|w| w[1] - w[0]).collect();
        Self::new(recording_id, lat)
    }

    pub fn len(&self) -> usize {
        self.latencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latencies.is_empty()
    }

    /// Length of the secret this observation was typed for.
    pub fn secret_len(&self) -> usize {
        self.latencies.len() + 1
    }
}

/// Writes observations in input order, positions from 0.
pub fn write_observations<T: Real, W: Write>(obs: &[ObservationSequence<T>], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(OBSERVATION_HEADER)?;
    for o in obs {
        for (i, l) in o.latencies.iter().enumerate() {
            wtr.write_record([o.recording_id.clone(), i.to_string(), format_ms(*l)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads an observation log. Recordings keep the order of their first row;
/// positions must be dense from 0 within each recording.
pub fn read_observations<T: Real, R: Read>(r: R) -> Result<Vec<ObservationSequence<T>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    check_header(rdr.headers()?, &OBSERVATION_HEADER)?;
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, T, usize)>> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, got {}", rec.len())));
        }
        let id = rec[0].to_string();
        let pos: usize = rec[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad position `{}`", &rec[1])))?;
        let lat = parse_ms::<T>(&rec[2], line)?;
        if !(lat > T::zero()) {
            return Err(Error::parse(line, format!("latency must be positive, got {lat}")));
        }
        if !rows.contains_key(&id) {
            order.push(id.clone());
        }
        rows.entry(id).or_default().push((pos, lat, line));
    }
    order
        .into_iter()
        .map(|id| {
            let mut r = rows.remove(&id).expect("id recorded");
            r.sort_by_key(|x| x.0);
            for (expect, (pos, _, line)) in r.iter().enumerate() {
                if *pos != expect {
                    return Err(Error::parse(
                        *line,
                        format!("recording {id}: positions not dense from 0 (found {pos}, expected {expect})"),
                    ));
                }
            }
            ObservationSequence::new(id, r.into_iter().map(|x| x.1).collect())
        })
        .collect()
}

/// Reads a `recording_id,secret` ground-truth file.
pub fn read_truth<R: Read>(r: R) -> Result<HashMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    check_header(rdr.headers()?, &["recording_id", "secret"])?;
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::parse(i + 2, "expected recording_id,secret"));
        }
        if out.insert(rec[0].to_string(), rec[1].to_string()).is_some() {
            return Err(Error::parse(i + 2, format!("duplicate recording `{}`", &rec[0])));
        }
    }
    Ok(out)
}

pub(crate) fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(())
}

pub(crate) fn parse_ms<T: Real>(s: &str, line: usize) -> Result<T> {
    let v: f64 = s.parse().map_err(|_| Error::parse(line, format!("bad number `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite number `{s}`")));
    }
    T::from_f64(v).ok_or_else(|| Error::parse(line, format!("number `{s}` out of range")))
}

/// Millisecond values are written with microsecond resolution.
pub(crate) fn format_ms<T: Real>(v: T) -> String {
    format!("{:.3}", v.as_f64())
}
