//! Gamma models of inter-keystroke latency.

mod gamma;
mod model;
mod report;
pub mod special;

pub use gamma::{fit_gamma, GammaFit, GammaParams, VARIANCE_FLOOR_MS2};
pub use model::{FitOutcome, Label, LabelFit, PriorMode, TimingModel, DEFAULT_MIN_SAMPLES, MODEL_HEADER};
pub use report::{distribution_report, summarize, DistributionReport, LabelSummary};
