//! Accuracy and confusion metrics, report rows, and the end-to-end
//! experiment pipeline.

mod metrics;
mod pipeline;
mod report;

pub use metrics::{accuracy, confusion_matrix, log_heatmap_export, ConfusionMatrix};
pub use pipeline::{
    cell_dir_name, run_cell, run_pipeline, write_confusion, CellOutcome, ExperimentReport, PipelineConfig, CELLS_DIR,
    REPORT_FILE,
};
pub use report::{
    confusion_file_name, evaluate_scenario, parse_jsonl, summarize, to_jsonl, unit_runtime, ReportRow, Scenario,
    ScenarioReport, Summary,
};
