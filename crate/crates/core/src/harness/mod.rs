//! Experiment plumbing: run configuration and presets, the seeded training
//! loop, frozen-policy evaluation, initial-state grid sweeps and the files
//! they write (`metrics.jsonl`, `summary.json`, `checkpoint.bin`,
//! `trajectory_*.csv`, `grid_*.csv`).

mod config;
mod evaluate;
mod grid;
mod metrics;
mod train;

pub use config::{
    experiment_preset, Preset, RunConfig, DEFAULT_FRAME_LIMIT, DEFAULT_SEEDS,
    DEFAULT_STABLE_INTERVAL,
};
pub use evaluate::{evaluate, evaluate_checkpoint, sample_test_params, EvalEpisode, EvalOptions, EvalSummary};
pub use grid::{grid_sweep, GridCell, GridMode, GridResult, GridSpec};
pub use metrics::{
    moving_average, outcome_counts, outcomes, read_records, record_line, returns, success_rate,
    write_records, MetricsLog, RecordWriter, RunRecord, RunSummary, MOVING_AVERAGE_WINDOW,
};
pub use train::{
    env_rng, train, train_all, train_with, AbortRecord, RunCheckpoint, TrainOutput, ABORT_FILE,
    CHECKPOINT_FILE, METRICS_FILE, SUMMARY_FILE,
};
