#![allow(dead_code)]

pub mod dot_reader;
pub mod extend;
pub mod gen;
pub mod closure;
pub mod taint_oracle;

use privslice::dataset::{load_dataset, Dataset};
use std::path::PathBuf;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixtures_dir() -> PathBuf {
    crate_dir().join("fixtures")
}

pub fn dataset_path() -> PathBuf {
    crate_dir().join("data/default_dataset.json")
}

pub fn default_dataset() -> Dataset {
    load_dataset(&std::fs::read_to_string(dataset_path()).unwrap()).unwrap()
}

/// `(name, source text)` of every fixture, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "air"))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(format!("{name}.air"))).unwrap()
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary with `args`, from the crate directory, with the dataset
/// environment variable cleared unless given in `env`.
pub fn run_cli(args: &[&str], env: &[(&str, &str)]) -> CliRun {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_privslice"));
    cmd.current_dir(crate_dir()).args(args).env_remove(privslice::cli::DATASET_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Default-flag report for a fixture, as the binary prints it.
pub fn fixture_report(name: &str) -> CliRun {
    let app = format!("fixtures/{name}.air");
    run_cli(&["analyze", "--app", &app, "--dataset", "data/default_dataset.json"], &[])
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(crate_dir().join(format!("tests/golden/{name}.json"))).unwrap()
}
