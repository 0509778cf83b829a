//! Configuration, presets, seeded experiment runs and record sinks.

mod config;
mod records;
mod run;

pub use config::{
    parse_config, parse_config_over, preset, AlgorithmSpec, ConfigError, ExperimentConfig, GraphSpec, InitSpec,
    ProblemSpec, RecordFormat, StepSpec, DEFAULT_MNIST_PATH, PRESETS,
};
pub use records::{
    format_csv, format_jsonl, parse_csv, parse_jsonl, read_records, write_plotdata, write_records, CSV_HEADER,
};
pub use run::{
    advice_for, build_dataset, build_graph, evaluate, lipschitz_estimate, prepare, resolve_alpha, run_experiment,
    substream, Prepared, RunOutput, RunStatus, RunSummary, Seeds,
};
