#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use keyleak::password::{digraphs, Digraph};
use keyleak::timing::{GammaParams, LabelFit};
use keyleak::{pairs_in_class, DigraphModel, DistanceClass, Pin, PinModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub fn keyleak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keyleak"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs and asserts success, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = keyleak(args);
    assert!(
        out.status.success(),
        "keyleak {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

/// Well-separated class means: 100, 160, ..., 520 ms.
pub fn class_params(c: DistanceClass) -> (f64, f64) {
    let mean = 100.0 + 60.0 * c.index() as f64;
    let shape = 200.0;
    (shape, mean / shape)
}

/// `digraph,latency_ms` log with `per_pair` draws for each keypad pair.
pub fn pin_training_log(per_pair: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = String::from("digraph,latency_ms\n");
    for c in DistanceClass::ALL {
        let (k, theta) = class_params(c);
        let g = Gamma::new(k, theta).unwrap();
        for (a, b) in pairs_in_class(c) {
            for _ in 0..per_pair {
                writeln!(s, "{a}{b},{:.3}", g.sample(&mut rng)).unwrap();
            }
        }
    }
    s
}

pub fn separated_pin_model() -> PinModel {
    PinModel::from_parts(DistanceClass::ALL.map(|c| {
        let (k, theta) = class_params(c);
        (
            c,
            LabelFit {
                params: GammaParams::new(k, theta).unwrap(),
                prior: 1.0,
                count: 1000,
            },
        )
    }))
    .unwrap()
}

/// Random PINs and their observed latencies as `(observations, truth)` CSV.
pub fn pin_observations(n: usize, seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = String::from("recording_id,position,latency_ms\n");
    let mut truth = String::from("recording_id,secret\n");
    for i in 0..n {
        let pin = Pin::from_index(rng.random_range(0..10_000)).unwrap();
        for (pos, c) in keyleak::keypad::Keypad::ATM
            .pin_to_triplet(&pin)
            .classes()
            .iter()
            .enumerate()
        {
            let (k, theta) = class_params(*c);
            let l = Gamma::new(k, theta).unwrap().sample(&mut rng);
            writeln!(obs, "r{i},{pos},{l:.3}").unwrap();
        }
        writeln!(truth, "r{i},{pin}").unwrap();
    }
    (obs, truth)
}

pub const DICTIONARY: &[(&str, u64)] = &[
    ("abc", 50),
    ("bca", 50),
    ("cab", 30),
    ("aab", 30),
    ("bba", 10),
    ("acb", 5),
    ("ccc", 5),
    ("abca", 7),
    ("ab", 3),
];

pub fn dictionary_text() -> String {
    DICTIONARY.iter().map(|(p, c)| format!("{p}\t{c}\n")).collect()
}

pub const LETTERS: [char; 3] = ['a', 'b', 'c'];

/// Every digraph over `LETTERS`, in a fixed order.
pub fn all_digraphs() -> Vec<Digraph> {
    LETTERS
        .iter()
        .flat_map(|&a| LETTERS.iter().map(move |&b| Digraph(a, b)))
        .collect()
}

/// Narrow gammas with distinct means, 100 + 40·i ms.
pub fn digraph_mean(d: Digraph) -> f64 {
    let i = all_digraphs().iter().position(|&x| x == d).unwrap();
    100.0 + 40.0 * i as f64
}

pub fn separated_digraph_model() -> DigraphModel {
    DigraphModel::from_parts(all_digraphs().into_iter().map(|d| {
        (
            d,
            LabelFit {
                params: GammaParams::new(400.0, digraph_mean(d) / 400.0).unwrap(),
                prior: 1.0,
                count: 500,
            },
        )
    }))
    .unwrap()
}

/// Every digraph gets the same distribution, so every ranking is a tie.
pub fn uniform_digraph_model() -> DigraphModel {
    DigraphModel::from_parts(all_digraphs().into_iter().map(|d| {
        (
            d,
            LabelFit {
                params: GammaParams::new(4.0, 50.0).unwrap(),
                prior: 1.0,
                count: 500,
            },
        )
    }))
    .unwrap()
}

/// Observation rows for `password` at the exact digraph means, plus a
/// per-recording jitter.
pub fn password_rows(id: &str, password: &str, jitter: f64) -> String {
    digraphs(password)
        .into_iter()
        .enumerate()
        .map(|(i, d)| format!("{id},{i},{:.3}\n", digraph_mean(d) + jitter))
        .collect()
}

pub fn model_text<L: keyleak::timing::Label>(m: &keyleak::timing::TimingModel<L, f64>) -> String {
    m.to_text()
}
