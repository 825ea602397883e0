use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use keyleak::pin_attack::{rank_pins, write_pin_guess};
use keyleak::report::{guess_cdf, CdfPoint, Curve, ExperimentReport, InstanceRank, PIN_CDF_ATTEMPTS};
use keyleak::{exact_distance_guess_curve, random_guess_curve, triplet_census, Pin, PinModel, PriorMode, TiePolicy};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{announce_seed, csv_field, load_truth, truth_for, ObservationSource};
use crate::{io, DEFAULT_SEED};

#[derive(Args, Debug)]
pub struct RankPinsArgs {
    /// PIN distance-class model from `fit --labels pin-class`.
    #[arg(long, required_unless_present = "census")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub source: ObservationSource,
    /// `recording_id,secret` file; adds true-PIN ranks to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Emit only the first k guesses per observation.
    #[arg(long)]
    pub top: Option<usize>,
    /// `lex`, `shuffle` (seeded from --seed) or `shuffle:SEED`.
    #[arg(long, default_value = "lex")]
    pub tie: String,
    /// `pair-count`, `fitted` or `uniform`.
    #[arg(long, default_value = "pair-count")]
    pub prior: PriorMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report with rank CDF and baselines.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the 512-row triplet census instead of ranking.
    #[arg(long)]
    pub census: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn census(out: Option<&Path>) -> anyhow::Result<()> {
    io::write_to(out, |w| Ok(triplet_census().write_csv(w)?))
}

/// Tie policy for each observation, in input order.
fn tie_policies(tie: &str, seed: u64, n: usize) -> anyhow::Result<Vec<TiePolicy>> {
    if tie == "shuffle" {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok((0..n).map(|_| TiePolicy::Shuffle(rng.next_u64())).collect());
    }
    let t: TiePolicy = tie.parse()?;
    Ok(vec![t; n])
}

fn baselines() -> anyhow::Result<Vec<Curve>> {
    let curve = |name: &str, f: &dyn Fn(usize) -> keyleak::Result<f64>| -> anyhow::Result<Curve> {
        Ok(Curve {
            name: name.to_string(),
            points: PIN_CDF_ATTEMPTS
                .iter()
                .map(|&k| {
                    Ok(CdfPoint {
                        attempts: k,
                        fraction: f(k)?,
                    })
                })
                .collect::<keyleak::Result<_>>()?,
        })
    };
    Ok(vec![
        curve("random", &random_guess_curve::<f64>)?,
        curve("exact_distance", &exact_distance_guess_curve::<f64>)?,
    ])
}

pub fn run(args: &RankPinsArgs) -> anyhow::Result<()> {
    if args.census {
        return census(args.out.as_deref());
    }
    let model_path = args.model.as_deref().expect("clap enforces --model");
    let model = PinModel::read_from(io::open(model_path)?)?;
    let observations = args.source.load()?;
    let truth = load_truth(args.truth.as_deref())?;
    if args.tie == "shuffle" {
        announce_seed(args.seed);
    }
    let ties = tie_policies(&args.tie, args.seed, observations.len())?;

    io::write_to(args.out.as_deref(), |w| {
        writeln!(w, "recording_id,{}", keyleak::pin_attack::PIN_GUESS_HEADER)?;
        for (obs, &tie) in observations.iter().zip(&ties) {
            let id = csv_field(&obs.recording_id);
            let guesses = rank_pins(obs, &model, args.prior, tie)?;
            for g in guesses.take(args.top.unwrap_or(Pin::SPACE)) {
                write!(w, "{id},")?;
                write_pin_guess(&g, &mut *w)?;
            }
        }
        Ok(())
    })?;

    let Some(report_path) = &args.report else {
        return Ok(());
    };
    let mut instances = Vec::with_capacity(observations.len());
    for (obs, &tie) in observations.iter().zip(&ties) {
        let target = truth.as_ref().and_then(|t| truth_for(t, &obs.recording_id)).cloned();
        let rank = match &target {
            Some(secret) => {
                let pin: Pin = secret.parse()?;
                rank_pins(obs, &model, args.prior, tie)?.rank_of(pin)
            }
            None => None,
        };
        instances.push(InstanceRank {
            id: obs.recording_id.clone(),
            target,
            rank,
        });
    }
    let scored: Vec<Option<usize>> = instances
        .iter()
        .filter(|i| i.target.is_some())
        .map(|i| i.rank)
        .collect();
    let cdf = if scored.is_empty() {
        Vec::new()
    } else {
        guess_cdf(&scored, &PIN_CDF_ATTEMPTS)
    };
    let config = BTreeMap::from([
        ("model".to_string(), model_path.display().to_string()),
        ("observations".to_string(), args.source.describe()),
        ("prior".to_string(), format!("{:?}", args.prior)),
        ("tie".to_string(), args.tie.clone()),
    ]);
    let report = ExperimentReport {
        experiment: "rank-pins".into(),
        seed: args.seed,
        config,
        instances,
        cdf,
        baselines: baselines()?,
        targets: Vec::new(),
    };
    io::write_json(Some(report_path), &report)
}
