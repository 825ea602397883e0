//! PIN reconstruction from three inter-keystroke latencies.
//!
//! Each latency yields a posterior over keypad distance classes. Triplets of
//! classes are ranked by the product of their per-position posteriors and each
//! triplet is expanded into the PINs it admits by chaining keypairs that share
//! a key: the second key of a pair for digraph `i` must be the first key of
//! the pair for digraph `i + 1`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::keypad::{DistanceClass, Keypad, Pin, Triplet};
use crate::observation::ObservationSequence;
use crate::scalar::{Fraction, Real};
use crate::timing::{PriorMode, TimingModel};

/// Header of the PIN guess-list CSV.
pub const PIN_GUESS_HEADER: &str = "rank,pin,triplet,log_prob";

/// All PINs of `triplet`, ascending.
pub fn pins_for_triplet(triplet: Triplet) -> &'static [Pin] {
    pin_space().pins(triplet)
}

/// Chains keypairs of the three classes on shared keys.
fn chain_triplet(keypad: &Keypad, triplet: Triplet) -> Vec<Pin> {
    // successors[c][a] = keys b with (a, b) in class c
    let successors = |class: DistanceClass| {
        let mut next: [Vec<u8>; 10] = Default::default();
        for (a, b) in keypad.pairs_in_class(class) {
            next[a as usize].push(b);
        }
        next
    };
    let [c0, c1, c2] = triplet.classes();
    let (s1, s2, s3) = (successors(c0), successors(c1), successors(c2));
    let mut out = Vec::new();
    for a in 0..10u8 {
        for &b in &s1[a as usize] {
            for &c in &s2[b as usize] {
                for &d in &s3[c as usize] {
                    out.push(Pin::new([a, b, c, d]).expect("keys are digits"));
                }
            }
        }
    }
    out
}

/// Every triplet's PIN set, computed once.
pub struct PinSpace {
    by_triplet: Vec<Vec<Pin>>,
}

impl PinSpace {
    fn build(keypad: &Keypad) -> Self {
        PinSpace {
            by_triplet: Triplet::all().map(|t| chain_triplet(keypad, t)).collect(),
        }
    }

    pub fn pins(&self, t: Triplet) -> &[Pin] {
        &self.by_triplet[t.index()]
    }

    pub fn census(&self) -> TripletCensus {
        TripletCensus {
            counts: self.by_triplet.iter().map(Vec::len).collect(),
        }
    }
}

pub fn pin_space() -> &'static PinSpace {
    static SPACE: OnceLock<PinSpace> = OnceLock::new();
    SPACE.get_or_init(|| PinSpace::build(&Keypad::ATM))
}

/// Number of PINs per triplet, indexed by [`Triplet::index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripletCensus {
    counts: Vec<usize>,
}

impl TripletCensus {
    pub fn count(&self, t: Triplet) -> usize {
        self.counts[t.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Triplet, usize)> + '_ {
        Triplet::all().zip(self.counts.iter().copied())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn empty(&self) -> usize {
        self.with_size(0)
    }

    pub fn nonempty(&self) -> usize {
        self.counts.len() - self.empty()
    }

    pub fn with_size(&self, n: usize) -> usize {
        self.counts.iter().filter(|&&c| c == n).count()
    }

    /// Largest triplet and its size; the first in triplet order on ties.
    pub fn largest(&self) -> (Triplet, usize) {
        self.iter()
            .fold((Triplet::from_index(0).expect("nonempty"), 0), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
    }

    pub fn smallest_nonempty(&self) -> Option<usize> {
        self.counts.iter().copied().filter(|&c| c > 0).min()
    }

    /// `c1,c2,c3,count` rows for all 512 triplets.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "first,second,third,count")?;
        for (t, n) in self.iter() {
            let [a, b, c] = t.classes();
            writeln!(w, "{a},{b},{c},{n}")?;
        }
        Ok(())
    }
}

pub fn triplet_census() -> TripletCensus {
    pin_space().census()
}

/// A distance triplet with its log posterior under one observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceTriplet<T> {
    pub triplet: Triplet,
    pub log_prob: T,
}

impl<T: Real> DistanceTriplet<T> {
    pub fn probability(&self) -> T {
        self.log_prob.exp()
    }
}

/// Order of PINs that share a triplet.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TiePolicy {
    #[default]
    Lexicographic,
    /// Seeded uniform shuffle within each triplet.
    Shuffle(u64),
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lex" {
            return Ok(TiePolicy::Lexicographic);
        }
        if let Some(seed) = s.strip_prefix("shuffle:") {
            return seed
                .parse()
                .map(TiePolicy::Shuffle)
                .map_err(|_| Error::domain(format!("bad shuffle seed `{seed}`")));
        }
        Err(Error::domain(format!(
            "unknown tie policy `{s}` (expected lex or shuffle:SEED)"
        )))
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TiePolicy::Lexicographic => f.write_str("lex"),
            TiePolicy::Shuffle(s) => write!(f, "shuffle:{s}"),
        }
    }
}

/// All 512 triplets sorted by decreasing posterior, computed in log space.
/// Classes missing from the model have probability zero. Ties keep triplet
/// order.
pub fn rank_triplets<T: Real>(
    obs: &ObservationSequence<T>,
    model: &TimingModel<DistanceClass, T>,
    prior: PriorMode,
) -> Result<Vec<DistanceTriplet<T>>> {
    if obs.latencies.len() != 3 {
        return Err(Error::domain(format!(
            "PIN observation {} has {} latencies, expected 3",
            obs.recording_id,
            obs.latencies.len()
        )));
    }
    let mut per_position = [[T::neg_infinity(); DistanceClass::COUNT]; 3];
    for (slot, &lat) in per_position.iter_mut().zip(&obs.latencies) {
        for (class, lp) in model.log_posterior_by_label(lat, prior)? {
            slot[class.index()] = lp;
        }
    }
    let mut ranked: Vec<DistanceTriplet<T>> = Triplet::all()
        .map(|t| {
            let [a, b, c] = t.classes();
            DistanceTriplet {
                triplet: t,
                log_prob: per_position[0][a.index()] + per_position[1][b.index()] + per_position[2][c.index()],
            }
        })
        .collect();
    ranked.sort_by(|x, y| {
        y.log_prob
            .partial_cmp(&x.log_prob)
            .expect("log probabilities are not NaN")
    });
    Ok(ranked)
}

/// One entry of a PIN guess list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PinGuess<T> {
    /// 1-based position in the guess list.
    pub rank: usize,
    pub pin: Pin,
    pub triplet: Triplet,
    /// 0-based rank of `triplet` among all triplets (provenance).
    pub triplet_rank: usize,
    pub log_prob: T,
}

/// Lazy guess list: triplets are expanded only as guesses are consumed.
/// Empty triplets contribute nothing; the full list covers all 10⁴ PINs.
pub struct PinGuesses<T> {
    triplets: Vec<DistanceTriplet<T>>,
    next_triplet: usize,
    current: Vec<Pin>,
    cursor: usize,
    rank: usize,
    rng: Option<ChaCha8Rng>,
}

impl<T: Real> PinGuesses<T> {
    pub fn triplets(&self) -> &[DistanceTriplet<T>] {
        &self.triplets
    }

    /// 1-based rank of `pin` in this list. Consumes the iterator.
    pub fn rank_of(self, pin: Pin) -> Option<usize> {
        self.into_iter().find(|g| g.pin == pin).map(|g| g.rank)
    }
}

impl<T: Real> Iterator for PinGuesses<T> {
    type Item = PinGuess<T>;

    fn next(&mut self) -> Option<PinGuess<T>> {
        while self.cursor >= self.current.len() {
            if self.next_triplet >= self.triplets.len() {
                return None;
            }
            self.current = pins_for_triplet(self.triplets[self.next_triplet].triplet).to_vec();
            if let Some(rng) = self.rng.as_mut() {
                self.current.shuffle(rng);
            }
            self.cursor = 0;
            self.next_triplet += 1;
        }
        let t = self.triplets[self.next_triplet - 1];
        let pin = self.current[self.cursor];
        self.cursor += 1;
        self.rank += 1;
        Some(PinGuess {
            rank: self.rank,
            pin,
            triplet: t.triplet,
            triplet_rank: self.next_triplet - 1,
            log_prob: t.log_prob,
        })
    }
}

/// Ranks all PINs for a 3-latency observation.
pub fn rank_pins<T: Real>(
    obs: &ObservationSequence<T>,
    model: &TimingModel<DistanceClass, T>,
    prior: PriorMode,
    ties: TiePolicy,
) -> Result<PinGuesses<T>> {
    Ok(PinGuesses {
        triplets: rank_triplets(obs, model, prior)?,
        next_triplet: 0,
        current: Vec::new(),
        cursor: 0,
        rank: 0,
        rng: match ties {
            TiePolicy::Lexicographic => None,
            TiePolicy::Shuffle(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        },
    })
}

pub fn write_pin_guess_header<W: Write>(mut w: W) -> Result<()> {
    writeln!(w, "{PIN_GUESS_HEADER}")?;
    Ok(())
}

pub fn write_pin_guess<T: Real, W: Write>(g: &PinGuess<T>, mut w: W) -> Result<()> {
    writeln!(w, "{},{},{},{:.6}", g.rank, g.pin, g.triplet, g.log_prob.as_f64())?;
    Ok(())
}

/// Writes `rank,pin,triplet,log_prob` for every guess yielded by `guesses`.
pub fn write_pin_guesses<T: Real, W: Write>(guesses: impl IntoIterator<Item = PinGuess<T>>, mut w: W) -> Result<()> {
    write_pin_guess_header(&mut w)?;
    for g in guesses {
        write_pin_guess(&g, &mut w)?;
    }
    Ok(())
}

/// Expected fraction of uniformly random PINs guessed within `attempts` when
/// the true triplet is known and PINs inside it are tried in random order:
/// `Σ_t min(attempts, |t|) / 10⁴`.
pub fn exact_distance_guess_curve<F: Fraction>(attempts: usize) -> Result<F> {
    if attempts == 0 {
        return Err(Error::domain("attempts must be at least 1"));
    }
    let hits: u64 = triplet_census().iter().map(|(_, n)| n.min(attempts) as u64).sum();
    Ok(F::from_ratio(hits, Pin::SPACE as u64))
}

/// Fraction of uniformly random PINs hit by `attempts` distinct random guesses.
pub fn random_guess_curve<F: Fraction>(attempts: usize) -> Result<F> {
    if attempts == 0 || attempts > Pin::SPACE {
        return Err(Error::domain(format!("attempts must be in 1..=10000, got {attempts}")));
    }
    Ok(F::from_ratio(attempts as u64, Pin::SPACE as u64))
}
