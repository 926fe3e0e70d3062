//! `faceqa`: annotation, QA generation, training mixes and benchmark
//! evaluation from the command line.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 endpoint failure.

mod commands;
mod config;
mod http;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use faceqa_core::eval::Layout;
use faceqa_core::qaforge::{Dataset, Scale};

#[derive(Debug, Parser)]
#[command(name = "faceqa", version, about = "Face-perception QA data pipeline and benchmark harness")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Shared flags. Each also reads an environment variable; both override
/// the config file.
#[derive(Debug, Args, Clone, Default)]
pub struct Global {
    /// Seed for every generating step
    #[arg(long, global = true, env = "FACEQA_SEED")]
    pub seed: Option<u64>,
    /// TOML file with default settings
    #[arg(long, global = true, env = "FACEQA_CONFIG")]
    pub config: Option<PathBuf>,
    /// Reject unknown fields in input records
    #[arg(long, global = true)]
    pub strict: bool,
    /// Endpoint address: mock://SEED or an http(s) URL
    #[arg(long, global = true, env = "FACEQA_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Environment variable holding the bearer token
    #[arg(long, global = true)]
    pub credential_env: Option<String>,
    #[arg(long, global = true, env = "FACEQA_CONCURRENCY")]
    pub concurrency: Option<usize>,
    /// Retries per request after the first attempt
    #[arg(long, global = true, env = "FACEQA_RETRIES")]
    pub retries: Option<u32>,
    /// Request rate cap across all workers
    #[arg(long, global = true)]
    pub qps: Option<f64>,
    /// Per-request timeout for HTTP endpoints
    #[arg(long, global = true)]
    pub timeout_secs: Option<u64>,
    /// Attribute schema TOML replacing the built-in one
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Cleaning rules TOML
    #[arg(long, global = true)]
    pub cleaning: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MultiFace {
    /// Positional questions for images with more than one annotated person
    Auto,
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Annotate images and write cleaned person annotations
    Annotate {
        /// Image records
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Images with no usable annotation
        #[arg(long)]
        failures: Option<PathBuf>,
        /// Dropped attributes and people
        #[arg(long)]
        report: Option<PathBuf>,
        /// Verbatim service responses
        #[arg(long)]
        responses: Option<PathBuf>,
    },
    /// Apply the cleaning rules to person annotations
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Caption pairs and attribute questions from cleaned annotations
    Genqa {
        #[arg(long)]
        annos: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        multi_face: MultiFace,
        /// Caption pairs for the alignment stage
        #[arg(long)]
        captions: Option<PathBuf>,
        /// Question variants that could not be generated
        #[arg(long)]
        skips: Option<PathBuf>,
    },
    /// Turn a labelled face dataset into question-answer pairs
    Reformulate {
        /// agedb, utkface, rafdb, affectnet, emotionet, lfwa, celeba or biwi
        #[arg(long)]
        dataset: Dataset,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Prefix for image URIs
        #[arg(long, default_value = "")]
        image_root: String,
        #[arg(long)]
        skips: Option<PathBuf>,
        /// Keep class-table option order
        #[arg(long)]
        no_shuffle: bool,
        /// Leave attribute definitions out of attribute questions
        #[arg(long)]
        no_descriptions: bool,
    },
    /// Zero-shot attribute questions from labelled items
    Zeroshot {
        /// Zero-shot item records
        #[arg(long)]
        annos: PathBuf,
        /// `[descriptions]` table overriding the built-in definitions
        #[arg(long)]
        descriptions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Exact number of questions, between 2 and 3 per image
        #[arg(long)]
        target: Option<usize>,
    },
    /// Sample and interleave a training mix
    Mix {
        /// Mix spec TOML; source paths are relative to it
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Multiply every count, as `1/1000` or `0.001`
        #[arg(long)]
        scale: Option<Scale>,
    },
    /// Write the default manifest of a training stage
    Manifest {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        stage: u8,
        #[arg(long)]
        scale: Option<Scale>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ask every benchmark question and record parsed answers
    Eval {
        #[arg(long)]
        qa: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Benchmark name; defaults to the question file stem
        #[arg(long)]
        benchmark: Option<String>,
        /// System message sent with every question
        #[arg(long)]
        system: Option<String>,
    },
    /// Metrics report from evaluation records
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recorded in the report as given
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Render metrics reports as a table on stdout
    Report {
        /// One or more report files, one table row each
        #[arg(long = "in", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, default_value = "table2")]
        layout: Layout,
        /// Machine-readable summary
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::EndpointFailure>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
