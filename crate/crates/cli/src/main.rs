use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmml_core::constraints::{self, Status};
use cmml_core::pipeline::{self, RunMode, RunOptions, RunReport};
use cmml_core::tabular::Dataset;

#[derive(Parser)]
#[command(name = "cmml", version, about = "Constraint-governed tabular ML pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Run every phase, write the model and report, and enforce the gates.
    Run {
        /// Pipeline configuration (JSON); relative paths resolve against its directory
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed and CMML_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Also print the report to stdout.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run up to model integration and write the model; gates are skipped.
    Train {
        /// Pipeline configuration (JSON); relative paths resolve against its directory
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Evaluate a constraint file against a CSV.
    Check {
        /// CSV file with a header row
        #[arg(long)]
        data: PathBuf,
        /// Constraint file (.cmc)
        #[arg(long)]
        constraints: PathBuf,
        /// Features whose zeros are read as missing before evaluation.
        #[arg(long, value_delimiter = ',')]
        zero_as_missing: Vec<String>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Print descriptive statistics for a CSV.
    Stats {
        /// CSV file with a header row
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
    /// Score a CSV with a saved model.
    Predict {
        /// Model document written by run or train
        #[arg(long)]
        model: PathBuf,
        /// CSV to score; must contain every model input
        #[arg(long)]
        input: PathBuf,
        /// Destination CSV: input columns plus prediction and probability
        #[arg(long)]
        output: PathBuf,
    },
}

fn print_report(report: &RunReport, format: Option<Format>) -> cmml_core::Result<()> {
    match format {
        Some(Format::Json) => print!("{}", report.to_json()?),
        Some(Format::Markdown) => print!("{}", report.to_markdown()),
        None => {}
    }
    let verdict = report
        .gates
        .as_ref()
        .map(|g| format!(", gates {:?}", g.verdict))
        .unwrap_or_default();
    eprintln!("status {:?}{verdict}", report.status);
    if let Some(a) = &report.abort {
        eprintln!("aborted in {}: {}", a.phase.title(), a.reason);
    }
    Ok(())
}

fn pipeline_command(config: &Path, seed: Option<u64>, format: Option<Format>, mode: RunMode) -> cmml_core::Result<u8> {
    let report = pipeline::execute(config, &RunOptions::from_env(seed), mode)?;
    print_report(&report, format)?;
    Ok(report.status.exit_code() as u8)
}

fn check(data: &Path, cmc: &Path, zeros: &[String], format: Format) -> cmml_core::Result<u8> {
    let doc = constraints::load(cmc)?;
    let data = Dataset::load_csv(data, &BTreeMap::new())?.mark_missing_zeros(zeros)?;
    let report = constraints::evaluate(&doc, &data)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Markdown => print!("{}", pipeline::violations_markdown(&report)),
    }
    let failed = report.statements.iter().any(|s| s.status == Status::Fail);
    Ok(if failed { 3 } else { 0 })
}

fn stats(data: &Path, format: Format) -> cmml_core::Result<u8> {
    let stats = Dataset::load_csv(data, &BTreeMap::new())?.descriptive_stats();
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&stats)?),
        Format::Markdown => print!("{}", pipeline::stats_markdown(&stats)),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, format } => pipeline_command(&config, seed, format, RunMode::Full),
        Command::Train { config, seed, format } => pipeline_command(&config, seed, format, RunMode::TrainOnly),
        Command::Check {
            data,
            constraints,
            zero_as_missing,
            format,
        } => check(&data, &constraints, &zero_as_missing, format),
        Command::Stats { data, format } => stats(&data, format),
        Command::Predict { model, input, output } => pipeline::predict_file(&model, &input, &output).map(|n| {
            eprintln!("wrote {n} predictions to {}", output.display());
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
