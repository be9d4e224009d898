//! Configuration-driven disorder sweeps.
//!
//! A run expands its config into `(model, N, realization)` tasks, evaluates
//! them on a worker pool and writes a JSON envelope holding the config, every
//! per-realization record and the disorder statistics. Coupling and chain
//! seeds depend only on the master seed and the task tags, and results are
//! gathered in task order, so the numbers do not depend on the worker count.

mod config;
mod envelope;
mod export;
mod run;

pub use config::{
    command_name, example_config, Command, EstimatorChoice, ExperimentConfig, QuenchOptions, Realizations,
    SpectrumOptions, DEFAULT_REALIZATIONS, SCHEMA_VERSION,
};
pub use envelope::{
    alpha_key, summarize, GroupSummary, Provenance, ResultEnvelope, SeriesStat, SnapshotRecord, Stat, TaskRecord,
    TaskStatus,
};
pub use export::{export_figure_data, FigureId};
pub use run::{execute, expand_tasks, half_filling_ground_state, run, Task};
