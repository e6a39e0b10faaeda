//! Dataset ingestion, the pass@k estimator, run aggregation and report files.

mod dataset;
mod metrics;
mod passk;
mod report;

pub use dataset::{load_dataset, parse_dataset, Dataset, DatasetRecord, DatasetTest, SkippedLine};
pub use metrics::{aggregate, DifficultyMetrics, RunMetrics, TaskMetrics};
pub use passk::pass_at_k;
pub use report::{
    console_summary, read_metrics, report, summary_csv, task_file_name, write_atomic, write_task_result,
    write_task_results,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("malformed_dataset({line}): {message}")]
    MalformedDataset { line: usize, message: String },
    #[error("invalid task `{task_id}` on line {line}: {}", .problems.join("; "))]
    InvalidTask { line: usize, task_id: String, problems: Vec<String> },
    #[error("invalid_args: {0}")]
    InvalidArgs(String),
    #[error("report_failed: {path}: {message}")]
    ReportFailed { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}
