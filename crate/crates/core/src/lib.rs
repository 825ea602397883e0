//! Reconstructing PINs and ranking password dictionaries from the
//! inter-keystroke timing that masking symbols (`•`, `*`) leak on screen.
//!
//! The statistical core is generic over [`scalar::Real`] (`f32`/`f64`), and
//! guess curves over [`scalar::Fraction`], which also admits exact rationals.
//! The aliases below fix the scalar to `f64` (and [`ExactFraction`] for
//! exact curves), which is what most callers want.
//!
//! * [`keypad`]: ATM keypad geometry and the eight distance classes.
//! * [`timing`]: gamma fits of latency per label and label posteriors.
//! * [`pin_attack`]: distance-triplet ranking and PIN enumeration.
//! * [`password`]: digraph rankings, penalty scoring, dictionary ranking.
//! * [`sim`]: display-refresh and camera-frame quantization of the channel.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod keypad;
pub mod observation;
pub mod password;
pub mod pin_attack;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod timing;

pub use error::{Error, Result};
pub use keypad::{classify_pair, pairs_in_class, pin_to_triplet, DistanceClass, Keypad, Pin, Triplet};
pub use password::Digraph;
pub use pin_attack::{exact_distance_guess_curve, pins_for_triplet, random_guess_curve, triplet_census, TiePolicy};
pub use timing::PriorMode;

/// Exact rational used for guess curves.
pub type ExactFraction = num_rational::Ratio<u64>;

pub type GammaParams = timing::GammaParams<f64>;
pub type LabelFit = timing::LabelFit<f64>;
pub type PinModel = timing::TimingModel<DistanceClass, f64>;
pub type DigraphModel = timing::TimingModel<Digraph, f64>;
pub type ObservationSequence = observation::ObservationSequence<f64>;
pub type DigraphRanking = password::DigraphRanking<f64>;
pub type ChannelConfig = sim::ChannelConfig<f64>;
pub type GroundTruthEntry = sim::GroundTruthEntry<f64>;
pub type ErrorStats = sim::ErrorStats<f64>;

/// Single-precision variants.
pub mod f32 {
    use crate::{keypad::DistanceClass, password::Digraph};

    pub type GammaParams = crate::timing::GammaParams<f32>;
    pub type PinModel = crate::timing::TimingModel<DistanceClass, f32>;
    pub type DigraphModel = crate::timing::TimingModel<Digraph, f32>;
    pub type ObservationSequence = crate::observation::ObservationSequence<f32>;
    pub type ChannelConfig = crate::sim::ChannelConfig<f32>;
}
