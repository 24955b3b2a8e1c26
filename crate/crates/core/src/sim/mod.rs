//! Monte Carlo BER engine, the OFDM baseline, configuration, result tables
//! and the self-check suite.

mod config;
mod engine;
mod ofdm;
mod report;
pub mod validate;

pub use config::{ChannelChoice, ChannelPreset, Scheme, SimConfig, ThpSection, MIN_TARGET_ERRORS};
pub use engine::{noise_variance, optimize_alpha, run_point, simulate, sweep, FrameResult, PointRunner, BATCH_FRAMES};
pub use ofdm::{run_ofdm_baseline_frame, OfdmBaseline, OfdmFrameOutcome};
pub use report::{
    fmt_g10, results_csv, sort_records, write_bounds, write_results, BerRecord, BoundRow, BOUNDS_HEADER, RESULTS_HEADER,
};
