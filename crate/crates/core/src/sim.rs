//! Masking-symbol side channel: keystrokes become visible when the display
//! next refreshes, and become recorded when the camera next samples a frame.
//!
//! A press at `t` is latched to the first refresh tick at or after `t`, then
//! to the first camera frame at or after that tick, then shifted by optional
//! uniform detection noise in `[-noise, +noise]`. Ticks lie at
//! `phase + m * period` for integer `m`.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observation::{check_header, format_ms, parse_ms, ObservationSequence};
use crate::scalar::Real;

pub const TIMESTAMP_HEADER: [&str; 3] = ["entry_id", "event_index", "appearance_ms"];
pub const GROUND_TRUTH_HEADER: [&str; 3] = ["entry_id", "event_index", "press_ms"];

/// Relative slack, in periods, within which a time counts as lying on a tick.
const TICK_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelConfig<T> {
    /// Display refresh rate; `inf` disables refresh latching.
    pub refresh_hz: T,
    /// Camera frame rate; `inf` disables frame sampling.
    pub camera_fps: T,
    pub refresh_phase_ms: T,
    pub frame_phase_ms: T,
    /// Half-width of uniform additive noise on each observed time.
    pub detection_noise_ms: T,
}

impl<T: Real> Default for ChannelConfig<T> {
    fn default() -> Self {
        ChannelConfig {
            refresh_hz: T::lit(60.0),
            camera_fps: T::lit(120.0),
            refresh_phase_ms: T::zero(),
            frame_phase_ms: T::zero(),
            detection_noise_ms: T::zero(),
        }
    }
}

impl<T: Real> ChannelConfig<T> {
    /// Identity channel: no quantization, no noise.
    pub fn ideal() -> Self {
        ChannelConfig {
            refresh_hz: T::infinity(),
            camera_fps: T::infinity(),
            ..Self::default()
        }
    }

    pub fn refresh_period_ms(&self) -> T {
        T::lit(1000.0) / self.refresh_hz
    }

    pub fn frame_period_ms(&self) -> T {
        T::lit(1000.0) / self.camera_fps
    }

    /// Upper bound (exclusive) on the delay added with zero noise.
    pub fn max_delay_ms(&self) -> T {
        self.refresh_period_ms() + self.frame_period_ms()
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: T| r > T::zero() && !r.is_nan();
        if !rate_ok(self.refresh_hz) || !rate_ok(self.camera_fps) {
            return Err(Error::Config("refresh_hz and camera_fps must be positive".into()));
        }
        let phase_ok = |p: T, period: T| p >= T::zero() && (p < period || (period == T::zero() && p == T::zero()));
        if !phase_ok(self.refresh_phase_ms, self.refresh_period_ms()) {
            return Err(Error::Config(format!(
                "refresh_phase_ms {} outside [0, {})",
                self.refresh_phase_ms,
                self.refresh_period_ms()
            )));
        }
        if !phase_ok(self.frame_phase_ms, self.frame_period_ms()) {
            return Err(Error::Config(format!(
                "frame_phase_ms {} outside [0, {})",
                self.frame_phase_ms,
                self.frame_period_ms()
            )));
        }
        if !(self.detection_noise_ms >= T::zero() && self.detection_noise_ms.is_finite()) {
            return Err(Error::Config(
                "detection_noise_ms must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Parses `key=value` lines over the defaults. `#` starts a comment.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected key=value"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad number `{}`", value.trim())))?;
            let v = T::lit(v);
            match key.trim() {
                "refresh_hz" => cfg.refresh_hz = v,
                "camera_fps" => cfg.camera_fps = v,
                "refresh_phase_ms" => cfg.refresh_phase_ms = v,
                "frame_phase_ms" => cfg.frame_phase_ms = v,
                "detection_noise_ms" => cfg.detection_noise_ms = v,
                other => return Err(Error::parse(i + 1, format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same rates and noise with phases drawn uniformly over one period each.
    pub fn with_random_phases<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let draw = |rng: &mut R, period: T| {
            if period > T::zero() {
                T::lit(rng.random::<f64>()) * period
            } else {
                T::zero()
            }
        };
        ChannelConfig {
            refresh_phase_ms: draw(rng, self.refresh_period_ms()),
            frame_phase_ms: draw(rng, self.frame_period_ms()),
            ..*self
        }
    }
}

/// First tick `phase + m·period` at or after `t`. A zero period is the identity.
pub fn ceil_to_tick<T: Real>(t: T, period: T, phase: T) -> T {
    if period == T::zero() {
        return t;
    }
    let x = (t - phase) / period;
    let m = if x - x.floor() < T::lit(TICK_SLACK) {
        x.floor()
    } else {
        x.ceil()
    };
    // Within-slack snaps may land a hair before t; never report an early event.
    (phase + m * period).max(t)
}

/// Ground-truth key-press instants for one secret entry.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthEntry<T> {
    pub entry_id: String,
    pub press_times: Vec<T>,
}

impl<T: Real> GroundTruthEntry<T> {
    pub fn new(entry_id: impl Into<String>, press_times: Vec<T>) -> Result<Self> {
        let entry_id = entry_id.into();
        check_strictly_increasing(&entry_id, &press_times)?;
        Ok(GroundTruthEntry { entry_id, press_times })
    }

    pub fn latencies(&self) -> Vec<T> {
        self.press_times.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_strictly_increasing<T: Real>(id: &str, times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain(format!("entry {id}: non-finite time")));
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!(
            "entry {id}: times not strictly increasing at event {}",
            i + 1
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observed<T> {
    /// Observed appearance time per event.
    pub times: Vec<T>,
    pub observation: ObservationSequence<T>,
    /// Latency positions that came out nonpositive and were clamped to 1 ms.
    pub clamped: Vec<usize>,
}

/// Passes one entry through the channel. Deterministic in `(truth, cfg, seed)`.
pub fn observe<T: Real>(truth: &GroundTruthEntry<T>, cfg: &ChannelConfig<T>, seed: u64) -> Result<Observed<T>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rp, fp) = (cfg.refresh_period_ms(), cfg.frame_period_ms());
    let noise = cfg.detection_noise_ms;
    let times: Vec<T> = truth
        .press_times
        .iter()
        .map(|&t| {
            let shown = ceil_to_tick(t, rp, cfg.refresh_phase_ms);
            let seen = ceil_to_tick(shown, fp, cfg.frame_phase_ms);
            if noise > T::zero() {
                seen + (T::lit(rng.random::<f64>()) * T::lit(2.0) - T::one()) * noise
            } else {
                seen
            }
        })
        .collect();
    let mut clamped = Vec::new();
    let latencies = times
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let l = w[1] - w[0];
            if l > T::zero() {
                l
            } else {
                clamped.push(i);
                T::one()
            }
        })
        .collect();
    Ok(Observed {
        times,
        observation: ObservationSequence::new(truth.entry_id.clone(), latencies)?,
        clamped,
    })
}

/// Per-entry seeds and phases for a batch simulation, drawn from one stream.
pub struct BatchSampler<T> {
    cfg: ChannelConfig<T>,
    rng: ChaCha8Rng,
    random_phases: bool,
}

impl<T: Real> BatchSampler<T> {
    pub fn new(cfg: ChannelConfig<T>, seed: u64, random_phases: bool) -> Result<Self> {
        cfg.validate()?;
        Ok(BatchSampler {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            random_phases,
        })
    }

    pub fn observe(&mut self, truth: &GroundTruthEntry<T>) -> Result<Observed<T>> {
        let cfg = if self.random_phases {
            self.cfg.with_random_phases(&mut self.rng)
        } else {
            self.cfg
        };
        let seed = self.rng.next_u64();
        observe(truth, &cfg, seed)
    }
}

/// Latency error statistics of the channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorStats<T> {
    pub entries: usize,
    pub latencies: usize,
    pub mean_abs_error_ms: T,
    /// Standard deviation of the absolute error.
    pub stdev_abs_error_ms: T,
    pub max_abs_error_ms: T,
    pub mean_error_ms: T,
    /// Fraction of latencies with absolute error ≤ 10 ms.
    pub cdf_10ms: T,
    /// Fraction of latencies with absolute error ≤ 20 ms.
    pub cdf_20ms: T,
    pub clamped: usize,
}

/// Accumulates observed-minus-true latency errors.
#[derive(Clone, Debug, Default)]
pub struct ErrorAccumulator {
    entries: usize,
    n: usize,
    sum: f64,
    sum_abs: f64,
    sum_abs2: f64,
    max_abs: f64,
    within_10: usize,
    within_20: usize,
    clamped: usize,
}

impl ErrorAccumulator {
    pub fn add<T: Real>(&mut self, truth: &GroundTruthEntry<T>, observed: &Observed<T>) {
        self.entries += 1;
        self.clamped += observed.clamped.len();
        for (o, t) in observed.observation.latencies.iter().zip(truth.latencies()) {
            let e = (*o - t).as_f64();
            let a = e.abs();
            self.n += 1;
            self.sum += e;
            self.sum_abs += a;
            self.sum_abs2 += a * a;
            self.max_abs = self.max_abs.max(a);
            self.within_10 += (a <= 10.0) as usize;
            self.within_20 += (a <= 20.0) as usize;
        }
    }

    pub fn finish<T: Real>(&self) -> ErrorStats<T> {
        let n = self.n.max(1) as f64;
        let mean_abs = self.sum_abs / n;
        let var = if self.n > 1 {
            ((self.sum_abs2 - n * mean_abs * mean_abs) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        ErrorStats {
            entries: self.entries,
            latencies: self.n,
            mean_abs_error_ms: T::lit(mean_abs),
            stdev_abs_error_ms: T::lit(var.sqrt()),
            max_abs_error_ms: T::lit(self.max_abs),
            mean_error_ms: T::lit(self.sum / n),
            cdf_10ms: T::lit(self.within_10 as f64 / n),
            cdf_20ms: T::lit(self.within_20 as f64 / n),
            clamped: self.clamped,
        }
    }
}

/// Simulates `n_entries` entries, cycling through `truths`, each with
/// phases drawn uniformly at random, and summarizes latency errors.
pub fn error_stats<T: Real>(
    truths: &[GroundTruthEntry<T>],
    cfg: &ChannelConfig<T>,
    seed: u64,
    n_entries: usize,
) -> Result<ErrorStats<T>> {
    if n_entries == 0 {
        return Err(Error::domain("n_entries must be at least 1"));
    }
    if truths.is_empty() {
        return Err(Error::Empty("no ground-truth entries".into()));
    }
    let mut sampler = BatchSampler::new(*cfg, seed, true)?;
    let mut acc = ErrorAccumulator::default();
    for i in 0..n_entries {
        let truth = &truths[i % truths.len()];
        let observed = sampler.observe(truth)?;
        acc.add(truth, &observed);
    }
    Ok(acc.finish())
}

/// Entry rejected while reading a timestamp log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub entry_id: String,
    pub reason: String,
}

/// Per-entry event times read from a log.
#[derive(Clone, Debug, PartialEq)]
pub struct TimestampLog<T> {
    pub entries: Vec<(String, Vec<T>)>,
    pub rejected: Vec<Rejection>,
}

fn read_event_log<T: Real, R: Read>(r: R, header: &[&str; 3]) -> Result<TimestampLog<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, T)>> = HashMap::new();
    let mut seen_any = false;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if !seen_any {
            check_header(&headers, header)?;
            seen_any = true;
        }
        if rec.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, got {}", rec.len())));
        }
        let id = rec[0].to_string();
        let idx: usize = rec[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad event index `{}`", &rec[1])))?;
        let t = parse_ms::<T>(&rec[2], line)?;
        if !rows.contains_key(&id) {
            order.push(id.clone());
        }
        rows.entry(id).or_default().push((idx, t));
    }
    if !seen_any && !headers.is_empty() {
        check_header(&headers, header)?;
    }
    let mut log = TimestampLog {
        entries: Vec::new(),
        rejected: Vec::new(),
    };
    for id in order {
        let mut evs = rows.remove(&id).expect("id recorded");
        evs.sort_by_key(|e| e.0);
        if let Some((pos, e)) = evs.iter().enumerate().find(|(pos, e)| e.0 != *pos) {
            log.rejected.push(Rejection {
                entry_id: id,
                reason: format!("event indices not dense from 0 (found {}, expected {pos})", e.0),
            });
            continue;
        }
        let times: Vec<T> = evs.into_iter().map(|e| e.1).collect();
        match check_strictly_increasing(&id, &times) {
            Ok(()) => log.entries.push((id, times)),
            Err(e) => log.rejected.push(Rejection {
                entry_id: id,
                reason: e.to_string(),
            }),
        }
    }
    Ok(log)
}

/// Reads `entry_id,event_index,appearance_ms` and converts each entry to
/// latencies. Entries with non-monotonic times or index gaps are rejected
/// and reported; the rest are kept.
pub fn ingest_timestamp_log<T: Real, R: Read>(r: R) -> Result<(Vec<ObservationSequence<T>>, Vec<Rejection>)> {
    let log = read_event_log::<T, R>(r, &TIMESTAMP_HEADER)?;
    let seqs = log
        .entries
        .into_iter()
        .map(|(id, times)| ObservationSequence::from_times(id, &times))
        .collect::<Result<_>>()?;
    Ok((seqs, log.rejected))
}

/// Reads `entry_id,event_index,press_ms`.
pub fn read_ground_truth<T: Real, R: Read>(r: R) -> Result<(Vec<GroundTruthEntry<T>>, Vec<Rejection>)> {
    let log = read_event_log::<T, R>(r, &GROUND_TRUTH_HEADER)?;
    let entries = log
        .entries
        .into_iter()
        .map(|(id, times)| GroundTruthEntry::new(id, times))
        .collect::<Result<_>>()?;
    Ok((entries, log.rejected))
}

/// Writes observed appearance times as a timestamp log.
pub fn write_timestamp_log<T: Real, W: Write>(entries: &[(String, Vec<T>)], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TIMESTAMP_HEADER)?;
    for (id, times) in entries {
        for (i, t) in times.iter().enumerate() {
            wtr.write_record([id.clone(), i.to_string(), format_ms(*t)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
