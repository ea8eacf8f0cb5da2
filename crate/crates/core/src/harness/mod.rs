//! Configuration, experiment drivers and CSV output for the command line.

mod commands;
mod config;
mod records;

pub use commands::{
    attn_demo, checkpoint_meta, checkpoint_path, cmd_eval, cmd_oracle, cmd_sweep, cmd_train, eval_seed,
    evaluate_policy, grid_for, load_agent, rollout, run_id, slip_times, summary_rows, train_log_path, train_policy,
    Actor, Metrics, SweepParam, TrainOutcome,
};
pub use config::{EnvSection, ExperimentConfig, Overrides, CONFIG_ENV_VAR};
pub use records::{
    mean_std, write_csv, CsvSink, HeaderRow, ImportanceRow, OracleRow, RunRecord, SummaryRow, SweepRow,
};
