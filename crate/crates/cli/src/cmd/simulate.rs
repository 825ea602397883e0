use std::path::PathBuf;

use clap::Args;
use keyleak::observation::write_observations;
use keyleak::sim::{read_ground_truth, write_timestamp_log, BatchSampler, ErrorAccumulator};
use keyleak::{ChannelConfig, ErrorStats};
use serde_json::json;

use super::announce_seed;
use crate::{io, DEFAULT_SEED};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `entry_id,event_index,press_ms` CSV.
    #[arg(long)]
    pub truth: PathBuf,
    /// Flat `key=value` channel config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub refresh_hz: Option<f64>,
    #[arg(long)]
    pub camera_fps: Option<f64>,
    #[arg(long)]
    pub refresh_phase_ms: Option<f64>,
    #[arg(long)]
    pub frame_phase_ms: Option<f64>,
    /// Half-width of uniform detection noise.
    #[arg(long)]
    pub noise_ms: Option<f64>,
    /// Use the configured phases instead of drawing them per entry.
    #[arg(long)]
    pub fixed_phases: bool,
    /// Number of entries to simulate, cycling through the ground truth.
    #[arg(long)]
    pub entries: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Observed latencies as `recording_id,position,latency_ms`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Observed appearance times as a timestamp log.
    #[arg(long)]
    pub timestamps_out: Option<PathBuf>,
    /// Latency error statistics as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn channel(args: &SimulateArgs) -> anyhow::Result<ChannelConfig> {
    let mut cfg = match &args.config {
        Some(p) => ChannelConfig::read_from(io::open(p)?)?,
        None => ChannelConfig::default(),
    };
    let overrides = [
        (&mut cfg.refresh_hz, args.refresh_hz),
        (&mut cfg.camera_fps, args.camera_fps),
        (&mut cfg.refresh_phase_ms, args.refresh_phase_ms),
        (&mut cfg.frame_phase_ms, args.frame_phase_ms),
        (&mut cfg.detection_noise_ms, args.noise_ms),
    ];
    for (field, v) in overrides {
        if let Some(v) = v {
            *field = v;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &SimulateArgs) -> anyhow::Result<()> {
    let cfg = channel(args)?;
    announce_seed(args.seed);
    let (truths, rejected) = read_ground_truth::<f64, _>(io::open(&args.truth)?)?;
    for r in &rejected {
        eprintln!("skipped entry {}: {}", r.entry_id, r.reason);
    }
    if truths.is_empty() {
        return Err(keyleak::Error::Empty("no usable ground-truth entries".into()).into());
    }
    let n = args.entries.unwrap_or(truths.len());
    let cycling = n > truths.len();

    let mut sampler = BatchSampler::new(cfg, args.seed, !args.fixed_phases)?;
    let mut acc = ErrorAccumulator::default();
    let mut observations = Vec::with_capacity(n);
    let mut times = Vec::new();
    for i in 0..n {
        let truth = &truths[i % truths.len()];
        let mut observed = sampler.observe(truth)?;
        acc.add(truth, &observed);
        if cycling {
            observed.observation.recording_id = format!("{}#{}", truth.entry_id, i / truths.len());
        }
        if args.timestamps_out.is_some() {
            times.push((observed.observation.recording_id.clone(), observed.times));
        }
        observations.push(observed.observation);
    }
    let stats: ErrorStats = acc.finish();

    io::write_to(args.out.as_deref(), |w| Ok(write_observations(&observations, w)?))?;
    if let Some(p) = &args.timestamps_out {
        io::write_to(Some(p), |w| Ok(write_timestamp_log(&times, w)?))?;
    }
    match &args.report {
        Some(p) => io::write_json(
            Some(p),
            &json!({
                "experiment": "simulate",
                "seed": args.seed,
                "config": cfg,
                "random_phases": !args.fixed_phases,
                "rejected": rejected.len(),
                "stats": stats,
            }),
        ),
        None => {
            eprintln!(
                "{} latencies, mean |error| {:.3} ms, max {:.3} ms",
                stats.latencies, stats.mean_abs_error_ms, stats.max_abs_error_ms
            );
            Ok(())
        }
    }
}
