//! One line per acceptance criterion, then a single pass/fail verdict.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::time::Instant;

use common::*;
use keyleak::password::{baseline_expected_attempts, rank_dictionary, Dictionary, Digraph, DigraphRanking};
use keyleak::pin_attack::rank_pins;
use keyleak::report::PIN_CDF_ATTEMPTS;
use keyleak::sim::error_stats;
use keyleak::timing::{fit_gamma, GammaParams, LabelFit};
use keyleak::{
    exact_distance_guess_curve, pairs_in_class, pins_for_triplet, random_guess_curve, triplet_census, ChannelConfig,
    DistanceClass, ExactFraction, GroundTruthEntry, Keypad, ObservationSequence, Pin, PinModel, PriorMode, TiePolicy,
    Triplet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn census() -> Outcome {
    let c = triplet_census();
    let mut brute: BTreeMap<Triplet, usize> = BTreeMap::new();
    for pin in Pin::all() {
        *brute.entry(Keypad::ATM.pin_to_triplet(&pin)).or_default() += 1;
    }
    let agrees = Triplet::all().all(|t| c.count(t) == brute.get(&t).copied().unwrap_or(0));
    let (largest, size) = c.largest();
    let one = Triplet([DistanceClass::One; 3]);
    check(
        agrees
            && c.empty() == 58
            && c.nonempty() == 454
            && c.with_size(2) == 57
            && (largest, size) == (one, 216)
            && c.total() == 10_000,
        format!(
            "empty {} nonempty {} size-2 {} max {size} at {largest} total {} brute-force agrees {agrees}",
            c.empty(),
            c.nonempty(),
            c.with_size(2),
            c.total()
        ),
    )
}

fn named_sets() -> Outcome {
    use DistanceClass::*;
    let three: HashSet<String> = pins_for_triplet(Triplet([Three; 3]))
        .iter()
        .map(Pin::to_string)
        .collect();
    let diag2: HashSet<(u8, u8)> = pairs_in_class(Diag2).into_iter().collect();
    let empty = pins_for_triplet(Triplet([Three, Zero, Diag2])).is_empty();
    check(
        three == HashSet::from(["2020".into(), "0202".into()])
            && diag2 == HashSet::from([(1, 9), (7, 3), (9, 1), (3, 7)])
            && empty,
        format!("three-three-three {three:?}, diag2 pairs {diag2:?}, three-zero-diag2 empty {empty}"),
    )
}

fn exact_curve() -> Outcome {
    let at_320: ExactFraction = exact_distance_guess_curve(320).map_err(|e| e.to_string())?;
    let mut prev = ExactFraction::from_integer(0);
    let mut monotone = true;
    for k in 1..=Pin::SPACE {
        let v: ExactFraction = exact_distance_guess_curve(k).unwrap();
        monotone &= v >= prev;
        prev = v;
    }
    // Uniform PIN, attacker knows its triplet and tries that triplet's PINs in random order.
    let trials = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hits = vec![0usize; PIN_CDF_ATTEMPTS.len()];
    for _ in 0..trials {
        let pin = Pin::from_index(rng.random_range(0..10_000)).unwrap();
        let size = pins_for_triplet(Keypad::ATM.pin_to_triplet(&pin)).len();
        let position = rng.random_range(0..size);
        for (h, &k) in hits.iter_mut().zip(&PIN_CDF_ATTEMPTS) {
            *h += (position < k) as usize;
        }
    }
    let worst = PIN_CDF_ATTEMPTS
        .iter()
        .zip(&hits)
        .map(|(&k, &h)| {
            let analytic: f64 = exact_distance_guess_curve(k).unwrap();
            (100.0 * (h as f64 / trials as f64 - analytic)).abs()
        })
        .fold(0.0, f64::max);
    check(
        at_320 == ExactFraction::from_integer(1) && monotone && worst <= 0.5,
        format!("curve(320) = {at_320}, nondecreasing {monotone}, max Monte-Carlo gap {worst:.3} pp over 1e5 trials"),
    )
}

fn draw_observation(id: String, pin: Pin, model: &PinModel, rng: &mut ChaCha8Rng) -> ObservationSequence {
    let lat = Keypad::ATM
        .pin_to_triplet(&pin)
        .classes()
        .iter()
        .map(|c| {
            let p = model.get(c).unwrap().params;
            Gamma::new(p.shape, p.scale).unwrap().sample(rng)
        })
        .collect();
    ObservationSequence::new(id, lat).unwrap()
}

fn synthetic_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    // (a) fit per-class gammas on synthetic training data, then attack 500 random PINs.
    let training: BTreeMap<DistanceClass, Vec<f64>> = DistanceClass::ALL
        .into_iter()
        .map(|c| {
            let (k, theta) = class_params(c);
            let g = Gamma::new(k, theta).unwrap();
            (c, (0..2000).map(|_| g.sample(&mut rng)).collect())
        })
        .collect();
    let model = PinModel::fit(&training, 100).map_err(|e| e.to_string())?.model;
    let n = 500;
    let mut hits = 0;
    for i in 0..n {
        let pin = Pin::from_index(rng.random_range(0..10_000)).unwrap();
        let obs = draw_observation(format!("p{i}"), pin, &model, &mut rng);
        let rank = rank_pins(&obs, &model, PriorMode::PairCount, TiePolicy::Shuffle(rng.random()))
            .unwrap()
            .rank_of(pin)
            .unwrap();
        hits += (rank <= 10) as usize;
    }
    let rate = hits as f64 / n as f64;
    let random: f64 = random_guess_curve(10).unwrap();
    let lift = rate / random;

    // (b) identical classes: the ranking carries no information.
    let same = PinModel::from_parts(DistanceClass::ALL.map(|c| {
        (
            c,
            LabelFit {
                params: GammaParams::new(4.0, 50.0).unwrap(),
                prior: 1.0,
                count: 1000,
            },
        )
    }))
    .unwrap();
    let trials = 10_000;
    let checkpoints = [10, 100, 1000, 5000];
    let mut deg_hits = [0usize; 4];
    for i in 0..trials {
        let pin = Pin::from_index(rng.random_range(0..10_000)).unwrap();
        let obs = draw_observation(format!("d{i}"), pin, &same, &mut rng);
        let rank = rank_pins(&obs, &same, PriorMode::Uniform, TiePolicy::Shuffle(rng.random()))
            .unwrap()
            .rank_of(pin)
            .unwrap();
        for (h, &k) in deg_hits.iter_mut().zip(&checkpoints) {
            *h += (rank <= k) as usize;
        }
    }
    let deg_gap = checkpoints
        .iter()
        .zip(&deg_hits)
        .map(|(&k, &h)| (100.0 * (h as f64 / trials as f64 - random_guess_curve::<f64>(k).unwrap())).abs())
        .fold(0.0, f64::max);
    check(
        lift >= 10.0 && deg_gap <= 1.0,
        format!(
            "(a) {:.1}% within 10 attempts vs random {:.2}% ({lift:.0}x); (b) identical classes max gap {deg_gap:.3} pp",
            100.0 * rate,
            100.0 * random
        ),
    )
}

fn gamma_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (k, theta) in [(2.0, 50.0), (4.0, 40.0), (9.0, 20.0)] {
        let g = Gamma::new(k, theta).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| g.sample(&mut rng)).collect();
        let p = fit_gamma(&xs).map_err(|e| e.to_string())?.params;
        let err = ((p.shape - k).abs() / k).max((p.scale - theta).abs() / theta);
        worst = worst.max(err);
        lines.push(format!("({k},{theta})->({:.2},{:.2})", p.shape, p.scale));
    }
    check(
        worst <= 0.10,
        format!("{}, worst relative error {:.2}%", lines.join(" "), 100.0 * worst),
    )
}

const ALPHA: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];

fn penalty_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let len = 6;
    let mut words = HashSet::new();
    while words.len() < 1000 {
        words.insert((0..len).map(|_| ALPHA[rng.random_range(0..8)]).collect::<String>());
    }
    let mut words: Vec<String> = words.into_iter().collect();
    words.sort();
    let dict = Dictionary::new(words.iter().map(|w| (w.clone(), rng.random_range(1..40u64)))).unwrap();

    // Scores over a random subset of digraphs; the rest are out of vocabulary.
    let all: Vec<Digraph> = ALPHA
        .iter()
        .flat_map(|&a| ALPHA.iter().map(move |&b| Digraph(a, b)))
        .collect();
    let scores: Vec<BTreeMap<Digraph, f64>> = (0..len - 1)
        .map(|_| {
            let mut s = BTreeMap::new();
            for &d in &all {
                if rng.random_bool(0.8) {
                    s.insert(d, rng.random_range(0..20) as f64 / 2000.0);
                }
            }
            s
        })
        .collect();
    let rankings: Vec<DigraphRanking<f64>> = scores
        .iter()
        .map(|s| DigraphRanking::from_scores(s.iter().map(|(&d, &c)| (d, c))).unwrap())
        .collect();
    let ranked = rank_dictionary(&dict, &rankings).map_err(|e| e.to_string())?;

    let brute_penalty = |w: &str| -> u64 {
        let cs: Vec<char> = w.chars().collect();
        cs.windows(2)
            .zip(&scores)
            .map(|(p, s)| match s.get(&Digraph(p[0], p[1])) {
                Some(c) => 1 + s.values().filter(|&&o| o > *c).count() as u64,
                None => s.len() as u64 + 1,
            })
            .sum()
    };
    let mut brute: Vec<(u64, u64, &str)> = dict
        .entries()
        .iter()
        .map(|e| (brute_penalty(&e.password), e.count, e.password.as_str()))
        .collect();
    brute.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2)));
    let matches = ranked.len() == brute.len()
        && ranked
            .iter()
            .zip(&brute)
            .all(|(r, b)| r.password == b.2 && r.penalty == b.0);

    let uniform: Vec<DigraphRanking<f64>> = (0..len - 1)
        .map(|_| DigraphRanking::from_scores(all.iter().map(|&d| (d, 1.0 / 64.0))).unwrap())
        .collect();
    let flat = rank_dictionary(&dict, &uniform).map_err(|e| e.to_string())?;
    let baseline = dict.by_frequency();
    let uniform_matches =
        flat.len() == baseline.len() && flat.iter().zip(&baseline).all(|(r, b)| r.password == b.password);
    check(
        matches && uniform_matches,
        format!("1000 passwords: brute-force order agrees {matches}, uniform ranker equals frequency order {uniform_matches}"),
    )
}

fn baseline_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let entries: Vec<(String, u64)> = (0..200)
        .map(|i| (format!("pw{i:03}"), rng.random_range(1..12u64)))
        .collect();
    let dict = Dictionary::new(entries.clone()).unwrap();
    let targets = ["pw000", "pw050", "pw199"];
    let trials = 100_000;
    let mut sums = [0u64; 3];
    let mut order: Vec<usize> = (0..entries.len()).collect();
    for _ in 0..trials {
        order.shuffle(&mut rng);
        // A stable sort after a uniform shuffle breaks count ties uniformly at random.
        order.sort_by(|&a, &b| entries[b].1.cmp(&entries[a].1));
        for (s, t) in sums.iter_mut().zip(targets) {
            *s += order.iter().position(|&i| entries[i].0 == t).unwrap() as u64 + 1;
        }
    }
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (s, t) in sums.iter().zip(targets) {
        let expected: f64 = baseline_expected_attempts(&dict, t).unwrap();
        let mean = *s as f64 / trials as f64;
        worst = worst.max((mean - expected).abs() / expected);
        lines.push(format!("{t}: formula {expected} vs mean {mean:.2}"));
    }
    check(
        worst <= 0.01,
        format!("{}; worst {:.3}%", lines.join(", "), 100.0 * worst),
    )
}

fn channel_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let truths: Vec<GroundTruthEntry> = (0..1000)
        .map(|i| {
            let mut t = rng.random_range(0.0..1000.0);
            let times = (0..10)
                .map(|_| {
                    t += rng.random_range(40.0..900.0);
                    t
                })
                .collect();
            GroundTruthEntry::new(format!("e{i}"), times).unwrap()
        })
        .collect();
    let stats = error_stats(&truths, &ChannelConfig::default(), 31, 100_000).map_err(|e| e.to_string())?;
    let events = stats.entries * 10;
    check(
        events >= 1_000_000 && stats.max_abs_error_ms < 25.0 && (5.0..=13.0).contains(&stats.mean_abs_error_ms),
        format!(
            "{events} events, {} latencies: max |error| {:.3} ms, mean |error| {:.3} ms",
            stats.latencies, stats.max_abs_error_ms, stats.mean_abs_error_ms
        ),
    )
}

fn determinism() -> Outcome {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let pin_log = write(d, "pin_train.csv", &pin_training_log(15, 8));
    let mut digraph_log = String::from("digraph,latency_ms\n");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for dg in all_digraphs() {
        for _ in 0..rng.random_range(100..1600) {
            digraph_log += &format!("{dg},{:.3}\n", digraph_mean(dg) * rng.random_range(0.8..1.2));
        }
    }
    let digraph_log = write(d, "dg_train.csv", &digraph_log);
    let (obs, truth) = pin_observations(6, 12);
    let pin_obs = write(d, "pin_obs.csv", &obs);
    let pin_truth = write(d, "pin_truth.csv", &truth);
    let dict = write(d, "dict.txt", &dictionary_text());
    let mut pw_obs = String::from("recording_id,position,latency_ms\n");
    for (k, j) in [-9.0, 2.0, 7.0].iter().enumerate() {
        pw_obs += &password_rows(&format!("s#{k}"), "cab", *j);
    }
    let pw_obs = write(d, "pw_obs.csv", &pw_obs);
    let pw_truth = write(
        d,
        "pw_truth.csv",
        "recording_id,secret\ns,cab\ns#0,cab\ns#1,cab\ns#2,cab\n",
    );
    let mut gt = String::from("entry_id,event_index,press_ms\n");
    for e in 0..30 {
        for i in 0..5 {
            gt += &format!("g{e},{i},{:.3}\n", 500.0 + i as f64 * (90.0 + 7.7 * e as f64));
        }
    }
    let gt = write(d, "gt.csv", &gt);

    let runs: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        (
            "fit pin-class",
            vec![
                "fit",
                "--input",
                p(&pin_log),
                "--labels",
                "pin-class",
                "--min-samples",
                "30",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["--out"],
        ),
        (
            "fit digraph",
            vec!["fit", "--input", p(&digraph_log), "--labels", "digraph", "--seed", "99"]
                .into_iter()
                .map(String::from)
                .collect(),
            vec!["--out"],
        ),
        (
            "report",
            vec!["report", "--input", p(&pin_log), "--labels", "pin-class"]
                .into_iter()
                .map(String::from)
                .collect(),
            vec!["--out"],
        ),
        ("census", vec!["census".to_string()], vec!["--out"]),
        ("rank-pins", vec![], vec!["--out", "--report"]),
        ("rank-passwords", vec![], vec!["--out", "--report"]),
        (
            "simulate",
            vec![
                "simulate",
                "--truth",
                p(&gt),
                "--noise-ms",
                "3",
                "--entries",
                "70",
                "--seed",
                "5",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            vec!["--out", "--report", "--timestamps-out"],
        ),
    ];
    let pin_model = d.join("pin_model.csv");
    let dg_model = d.join("dg_model.csv");
    ok(&[
        "fit",
        "--input",
        p(&pin_log),
        "--labels",
        "pin-class",
        "--min-samples",
        "30",
        "--out",
        p(&pin_model),
    ]);
    ok(&[
        "fit",
        "--input",
        p(&digraph_log),
        "--labels",
        "digraph",
        "--seed",
        "99",
        "--out",
        p(&dg_model),
    ]);
    let rank_pins_args: Vec<String> = [
        "rank-pins",
        "--model",
        p(&pin_model),
        "--observations",
        p(&pin_obs),
        "--truth",
        p(&pin_truth),
        "--tie",
        "shuffle",
        "--seed",
        "77",
        "--top",
        "400",
    ]
    .map(String::from)
    .to_vec();
    let rank_pw_args: Vec<String> = [
        "rank-passwords",
        "--model",
        p(&dg_model),
        "--dictionary",
        p(&dict),
        "--observations",
        p(&pw_obs),
        "--truth",
        p(&pw_truth),
        "--fuse",
        "--seed",
        "77",
    ]
    .map(String::from)
    .to_vec();

    let mut compared = 0;
    for (name, base, outputs) in runs {
        let base = match name {
            "rank-pins" => rank_pins_args.clone(),
            "rank-passwords" => rank_pw_args.clone(),
            _ => base,
        };
        let mut results = Vec::new();
        for run in 0..2 {
            let mut args = base.clone();
            let paths: Vec<_> = outputs
                .iter()
                .map(|flag| d.join(format!("{name}-{run}{flag}")))
                .collect();
            for (flag, path) in outputs.iter().zip(&paths) {
                args.push(flag.to_string());
                args.push(p(path).to_string());
            }
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            ok(&argv);
            results.push(paths.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>());
        }
        if results[0] != results[1] {
            return Err(format!("{name} differs between runs"));
        }
        compared += results[0].len();
    }
    Ok(format!("7 commands run twice, {compared} output files byte-identical"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("triplet census", census),
        ("named sets", named_sets),
        ("exact-distance curve", exact_curve),
        ("synthetic PIN recovery", synthetic_recovery),
        ("gamma fit recovery", gamma_recovery),
        ("penalty ranking oracle", penalty_oracle),
        ("baseline formula", baseline_formula),
        ("channel bound", channel_bound),
        ("CLI determinism", determinism),
    ];
    // Written straight to stdout so the lines survive output capture.
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(out, "acceptance {} {tag} {name} ({secs:.1}s): {detail}", i + 1).unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
