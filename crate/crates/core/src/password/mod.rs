//! Password dictionary ranking from per-digraph latency observations.
//!
//! Each latency of an observed entry is turned into a [`DigraphRanking`] by a
//! [`DigraphRanker`]. A candidate password's penalty is the sum of its
//! digraphs' ranks across positions, and the length-matched dictionary is
//! sorted by ascending penalty.

mod dictionary;
mod digraph;
mod ranking;
mod scoring;
mod training;

pub use dictionary::{baseline_expected_attempts, DictEntry, Dictionary};
pub use digraph::{digraphs, is_lower_alnum, Digraph, ALPHABET_SIZE};
pub use ranking::{
    fuse_rankings, fuse_recordings, position_rankings, DigraphRanker, DigraphRanking, GammaRanker, WholePasswordScorer,
};
pub use scoring::{
    penalty_for_observation, penalty_score, rank_dictionary, rank_dictionary_whole, write_password_guesses,
    RankedPassword, PASSWORD_GUESS_HEADER,
};
pub use training::{prepare_training, Exclusion, TrainingConfig, TrainingSet};
