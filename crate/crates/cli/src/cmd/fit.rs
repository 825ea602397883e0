use std::collections::BTreeMap;
use std::path::Path;

use keyleak::dataset::{by_class_and_direction, by_distance_class, read_training_log};
use keyleak::password::{prepare_training, TrainingConfig};
use keyleak::timing::{distribution_report, summarize};
use keyleak::{DigraphModel, PinModel};
use serde_json::{json, Value};

use super::announce_seed;
use crate::{io, LabelKind};

pub fn run(
    input: &Path,
    labels: LabelKind,
    min_samples: usize,
    max_samples: usize,
    out: &Path,
    seed: u64,
) -> anyhow::Result<()> {
    let raw: BTreeMap<String, Vec<f64>> = read_training_log(io::open(input)?)?;
    match labels {
        LabelKind::PinClass => {
            let fit = PinModel::fit(&by_distance_class(&raw)?, min_samples)?;
            for (l, n) in &fit.dropped {
                eprintln!("dropped {l}: {n} samples");
            }
            for l in &fit.floored {
                eprintln!("variance floor applied to {l}");
            }
            io::write_to(Some(out), |w| Ok(fit.model.write_to(w)?))
        }
        LabelKind::Digraph => {
            announce_seed(seed);
            let cfg = TrainingConfig {
                min_samples,
                max_samples,
            };
            let set = prepare_training(&raw, cfg, seed)?;
            for (key, n, why) in &set.excluded {
                eprintln!("excluded {key:?}: {n} samples ({why:?})");
            }
            let fit = DigraphModel::fit(&set.samples, min_samples)?;
            for l in &fit.floored {
                eprintln!("variance floor applied to {l}");
            }
            io::write_to(Some(out), |w| Ok(fit.model.write_to(w)?))
        }
    }
}

fn report_json<L: ToString + Ord + Clone>(samples: &BTreeMap<L, Vec<f64>>) -> Value {
    let rep = distribution_report(samples);
    json!({
        "labels": rep.rows.iter().map(|r| json!({
            "label": r.label.to_string(),
            "count": r.count,
            "mean_ms": r.mean,
            "stdev_ms": r.stdev,
        })).collect::<Vec<_>>(),
        "overlapping": rep.overlapping.iter()
            .map(|(a, b)| json!([a.to_string(), b.to_string()]))
            .collect::<Vec<_>>(),
    })
}

pub fn report(input: &Path, labels: LabelKind, out: Option<&Path>) -> anyhow::Result<()> {
    let raw: BTreeMap<String, Vec<f64>> = read_training_log(io::open(input)?)?;
    let value = match labels {
        LabelKind::PinClass => {
            let mut v = report_json(&by_distance_class(&raw)?);
            let dirs = by_class_and_direction(&raw)?;
            v["directions"] = dirs
                .iter()
                .map(|((c, d), xs)| {
                    let (mean, stdev) = summarize(xs);
                    json!({ "class": c.to_string(), "direction": d.to_string(), "count": xs.len(), "mean_ms": mean, "stdev_ms": stdev })
                })
                .collect();
            v
        }
        LabelKind::Digraph => report_json(&raw),
    };
    io::write_json(out, &value)
}
