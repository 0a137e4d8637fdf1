//! Experiment harness: configuration, figure runs, method comparison and the
//! result cache.

pub mod cache;
pub mod compare;
pub mod config;
pub mod figures;

/// Hash of the crate sources this binary was built from.
pub const CODE_HASH: &str = env!("QAM_CODE_HASH");

pub use cache::{cache_key, Cache, CacheStats};
pub use compare::{compare_methods, Comparison, ComparisonRow, PairSummary};
pub use config::{ChainConfig, ChainSource, ChainValues, ExperimentConfig, GridSpec, RunMode, FIGURES};
pub use figures::{crossing_slices, labelled_island_states, run_figure, track_pair, ChainReport, FigureRun};
