//! `privslice analyze` front end.
//!
//! Exit codes: 0 when no risk findings were produced, 1 when at least one app has risk
//! findings, 2 on any input error.

use crate::dataset::{load_dataset, Dataset};
use crate::report::{analyze_source, dot_files, render_reports, AnalysisResult, Options};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const DATASET_ENV: &str = "PRIVSLICE_DATASET";

#[derive(Debug, Parser)]
#[command(name = "privslice", version, about = "Personal-data slicing and pseudonymization checks for app IR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze one or more apps and emit a JSON report.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    /// App in textual IR form; repeat to analyze several apps.
    #[arg(long = "app", value_name = "FILE", required = true)]
    apps: Vec<PathBuf>,
    /// Dataset JSON; falls back to $PRIVSLICE_DATASET.
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Write per-source and merged slice graphs here.
    #[arg(long, value_name = "DIR")]
    dot_dir: Option<PathBuf>,
    /// Follow control dependences when slicing.
    #[arg(long)]
    include_control_deps: bool,
    /// Add per-phase timings to the report.
    #[arg(long)]
    timings: bool,
}

/// Runs the CLI with process stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let Command::Analyze(args) = cli.command;
    match analyze_command(&args, out) {
        Ok(risky) => i32::from(risky),
        Err(messages) => {
            for m in messages {
                let _ = writeln!(err, "error: {m}");
            }
            2
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn dataset_path(args: &AnalyzeArgs) -> Result<PathBuf, String> {
    args.dataset
        .clone()
        .or_else(|| std::env::var_os(DATASET_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .ok_or_else(|| format!("no dataset given; pass --dataset or set {DATASET_ENV}"))
}

fn load(path: &Path) -> Result<Dataset, String> {
    load_dataset(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn analyze_file(path: &Path, d: &Dataset, opts: Options) -> Result<AnalysisResult, String> {
    let text = read(path)?;
    analyze_source(&text, d, opts).map_err(|e| format!("{}: {e}", path.display()))
}

/// Returns whether any app has risk findings.
fn analyze_command(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<bool, Vec<String>> {
    let d = dataset_path(args).and_then(|p| load(&p)).map_err(|e| vec![e])?;
    let opts = Options { include_ctrl: args.include_control_deps, timings: args.timings };

    let outcomes: Vec<Result<AnalysisResult, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = args.apps.iter().map(|path| s.spawn(|| analyze_file(path, &d, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let text = render_reports(&results);
    match &args.report {
        Some(path) => std::fs::write(path, &text).map_err(|e| vec![format!("{}: {e}", path.display())])?,
        None => out.write_all(text.as_bytes()).map_err(|e| vec![format!("writing report: {e}")])?,
    }
    if let Some(dir) = &args.dot_dir {
        std::fs::create_dir_all(dir).map_err(|e| vec![format!("{}: {e}", dir.display())])?;
        for r in &results {
            for (name, dot) in dot_files(r) {
                let path = dir.join(name);
                std::fs::write(&path, dot).map_err(|e| vec![format!("{}: {e}", path.display())])?;
            }
        }
    }
    Ok(results.iter().any(AnalysisResult::has_risk))
}
