//! Population training logs: `digraph,latency_ms` rows.
//!
//! For passwords the digraph is the two typed characters. For PINs it is
//! the two keys (`"31"`), or directly a distance class name (`"diag1"`).

use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::keypad::{Direction, DistanceClass, Keypad};
use crate::observation::{check_header, parse_ms};
use crate::scalar::Real;

pub const TRAINING_HEADER: [&str; 2] = ["digraph", "latency_ms"];

/// Latencies grouped by raw digraph key, in key order.
pub fn read_training_log<T: Real, R: Read>(r: R) -> Result<BTreeMap<String, Vec<T>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::None).from_reader(r);
    check_header(rdr.headers()?, &TRAINING_HEADER)?;
    let mut out: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 2 {
            return Err(Error::parse(line, format!("expected 2 fields, got {}", rec.len())));
        }
        let lat = parse_ms::<T>(rec[1].trim(), line)?;
        if !(lat > T::zero()) {
            return Err(Error::parse(line, format!("latency must be positive, got {lat}")));
        }
        out.entry(rec[0].to_string()).or_default().push(lat);
    }
    Ok(out)
}

/// Key pair of a PIN digraph key such as `"31"`.
fn key_pair(key: &str) -> Option<(u8, u8)> {
    let b = key.as_bytes();
    (b.len() == 2 && b.iter().all(u8::is_ascii_digit)).then(|| (b[0] - b'0', b[1] - b'0'))
}

/// Regroups PIN digraph latencies by distance class.
pub fn by_distance_class<T: Real>(raw: &BTreeMap<String, Vec<T>>) -> Result<BTreeMap<DistanceClass, Vec<T>>> {
    let keypad = Keypad::ATM;
    let mut out: BTreeMap<DistanceClass, Vec<T>> = BTreeMap::new();
    for (key, xs) in raw {
        let class = match key_pair(key) {
            Some((a, b)) => keypad.classify_pair(a, b)?,
            None => key
                .parse::<DistanceClass>()
                .map_err(|_| Error::domain(format!("`{key}` is neither a key pair nor a distance class")))?,
        };
        out.entry(class).or_default().extend_from_slice(xs);
    }
    Ok(out)
}

/// Regroups PIN digraph latencies by distance class and direction of travel.
/// Rows labelled directly by class name carry no direction and are skipped.
pub fn by_class_and_direction<T: Real>(
    raw: &BTreeMap<String, Vec<T>>,
) -> Result<BTreeMap<(DistanceClass, Direction), Vec<T>>> {
    let keypad = Keypad::ATM;
    let mut out: BTreeMap<(DistanceClass, Direction), Vec<T>> = BTreeMap::new();
    for (key, xs) in raw {
        if let Some((a, b)) = key_pair(key) {
            out.entry((keypad.classify_pair(a, b)?, keypad.direction(a, b)?))
                .or_default()
                .extend_from_slice(xs);
        }
    }
    Ok(out)
}
