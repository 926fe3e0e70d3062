//! Benchmark runner, answer parsers, metrics and report tables.

pub mod answers;
pub mod report;
mod runner;
pub mod score;

pub use answers::{
    parse_age, parse_answer, parse_option_letter, parse_yes_no, Answer, ParseRule, ParsedAnswer,
    UnparseableReason,
};
pub use report::{emit_report, zero_shot_mean, Layout, RenderedReport, ReportError};
pub use runner::{run_benchmark, EvalOptions, EvalRecord, EvalRun};
pub use score::{score, tally, Confusion, MetricsReport, RunMeta, ScoreError, TaskStats, Tally};
