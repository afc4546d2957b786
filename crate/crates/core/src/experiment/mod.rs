//! Teacher, student and distilled runs over several seeds, with reports
//! and activation maps.

mod activation;
mod config;
mod report;
mod run;

pub use activation::{activation_map, ActivationMap};
pub use config::{DatasetSpec, ExperimentConfig, Mode, ModelSpec, Timing};
pub use report::{
    emit_report, read_model_csv, read_report_dir, summarize, summary_text, write_model_csv,
    write_summary, EpochRecord, MeanStd, ModelCurve, ModelKind, ModelSummary, RunReport,
    RunResult,
};
pub use run::{run_experiment, run_experiment_on, EncodedSplit, STUDENT_ROLE, TEACHER_ROLE};
