use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use keyleak::password::{
    baseline_expected_attempts, fuse_recordings, position_rankings, rank_dictionary, Dictionary, GammaRanker,
};
use keyleak::report::{guess_cdf, summarize_target, ExperimentReport, InstanceRank, PASSWORD_THRESHOLDS};
use keyleak::{DigraphModel, ObservationSequence, PriorMode};

use super::{base_id, csv_field, load_truth, truth_for, ObservationSource};
use crate::{io, DEFAULT_SEED};

#[derive(Args, Debug)]
pub struct RankPasswordsArgs {
    /// Digraph model from `fit --labels digraph`.
    #[arg(long, required_unless_present = "baseline")]
    pub model: Option<PathBuf>,
    /// `password<TAB>count` file.
    #[arg(long)]
    pub dictionary: PathBuf,
    #[command(flatten)]
    pub source: ObservationSource,
    /// `recording_id,secret` file; adds target ranks and summaries to the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Average rankings over recordings sharing an id prefix (`login#1`, `login#2`, ...).
    #[arg(long)]
    pub fuse: bool,
    /// Ignore timing and guess by descending frequency.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long)]
    pub top: Option<usize>,
    /// `fitted` or `uniform`.
    #[arg(long, default_value = "fitted")]
    pub prior: PriorMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Attempt thresholds for the per-target summary.
    #[arg(long, value_delimiter = ',', default_values_t = PASSWORD_THRESHOLDS)]
    pub thresholds: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

/// One ranked guess list: `(password, penalty)` in guess order.
struct Instance {
    id: String,
    len: usize,
    guesses: Vec<(String, Option<u64>)>,
}

/// Recordings grouped for ranking, in order of first appearance.
fn group(observations: Vec<ObservationSequence>, fuse: bool) -> Vec<(String, Vec<ObservationSequence>)> {
    if !fuse {
        return observations
            .into_iter()
            .map(|o| (o.recording_id.clone(), vec![o]))
            .collect();
    }
    let mut groups: Vec<(String, Vec<ObservationSequence>)> = Vec::new();
    for o in observations {
        let key = base_id(&o.recording_id).to_string();
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(o),
            None => groups.push((key, vec![o])),
        }
    }
    groups
}

fn mode(args: &RankPasswordsArgs) -> &'static str {
    match (args.baseline, args.fuse) {
        (true, true) => "baseline-fused",
        (true, false) => "baseline",
        (false, true) => "fused",
        (false, false) => "single",
    }
}

pub fn run(args: &RankPasswordsArgs) -> anyhow::Result<()> {
    let dict = Dictionary::read_from(io::open(&args.dictionary)?)?;
    let model = args
        .model
        .as_deref()
        .map(|p| -> anyhow::Result<DigraphModel> { Ok(DigraphModel::read_from(io::open(p)?)?) })
        .transpose()?;
    let truth = load_truth(args.truth.as_deref())?;
    let groups = group(args.source.load()?, args.fuse);

    let mut instances = Vec::with_capacity(groups.len());
    for (id, obs) in &groups {
        let len = obs[0].secret_len();
        let guesses = if args.baseline {
            let filtered = dict.filter_length(len);
            if filtered.is_empty() {
                return Err(keyleak::Error::Empty(format!("no dictionary passwords of length {len}")).into());
            }
            filtered
                .by_frequency()
                .into_iter()
                .map(|e| (e.password.clone(), None))
                .collect()
        } else {
            let model = model.as_ref().expect("clap enforces --model");
            let ranker = GammaRanker::new(model, args.prior)?;
            let rankings = if obs.len() == 1 {
                position_rankings(&obs[0], &ranker)?
            } else {
                fuse_recordings(obs, &ranker)?
            };
            rank_dictionary(&dict, &rankings)?
                .into_iter()
                .map(|r| (r.password, Some(r.penalty)))
                .collect()
        };
        instances.push(Instance {
            id: id.clone(),
            len,
            guesses,
        });
    }

    io::write_to(args.out.as_deref(), |w| {
        writeln!(w, "recording_id,rank,password,penalty")?;
        for inst in &instances {
            let id = csv_field(&inst.id);
            for (i, (pw, penalty)) in inst.guesses.iter().take(args.top.unwrap_or(usize::MAX)).enumerate() {
                let penalty = penalty.map(|p| p.to_string()).unwrap_or_default();
                writeln!(w, "{id},{},{},{penalty}", i + 1, csv_field(pw))?;
            }
        }
        Ok(())
    })?;

    let Some(report_path) = &args.report else {
        return Ok(());
    };
    let mut ranks = Vec::new();
    // target -> (length, ranks)
    let mut per_target: BTreeMap<String, (usize, Vec<usize>)> = BTreeMap::new();
    for inst in &instances {
        let target = truth.as_ref().and_then(|t| truth_for(t, &inst.id)).cloned();
        let rank = target
            .as_ref()
            .and_then(|t| inst.guesses.iter().position(|g| &g.0 == t))
            .map(|p| p + 1);
        if let (Some(t), Some(r)) = (&target, rank) {
            per_target
                .entry(t.clone())
                .or_insert_with(|| (inst.len, Vec::new()))
                .1
                .push(r);
        }
        ranks.push(InstanceRank {
            id: inst.id.clone(),
            target,
            rank,
        });
    }
    let scored: Vec<Option<usize>> = ranks.iter().filter(|i| i.target.is_some()).map(|i| i.rank).collect();
    let cdf = if scored.is_empty() {
        Vec::new()
    } else {
        guess_cdf(&scored, &args.thresholds)
    };
    let targets = per_target
        .iter()
        .map(|(t, (len, rs))| {
            let rnd: f64 = baseline_expected_attempts(&dict.filter_length(*len), t)?;
            Ok(summarize_target(t, rs, rnd, &args.thresholds))
        })
        .collect::<keyleak::Result<Vec<_>>>()?;
    let mut config = BTreeMap::from([
        ("mode".to_string(), mode(args).to_string()),
        ("dictionary".to_string(), args.dictionary.display().to_string()),
        ("observations".to_string(), args.source.describe()),
        ("prior".to_string(), format!("{:?}", args.prior)),
    ]);
    if let Some(p) = &args.model {
        config.insert("model".into(), p.display().to_string());
    }
    let report = ExperimentReport {
        experiment: "rank-passwords".into(),
        seed: args.seed,
        config,
        instances: ranks,
        cdf,
        baselines: Vec::new(),
        targets,
    };
    io::write_json(Some(report_path), &report)
}
