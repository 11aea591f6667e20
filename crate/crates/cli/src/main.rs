//! `infinitewalk` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid input (parse errors,
//! disconnected or bipartite graphs, bad parameters), 4 numerical failure,
//! 5 I/O. Failures print one line to stderr:
//!
//! ```text
//! error kind=<usage|validation|numerical|io> code=<n>: <message>
//! ```
//!
//! Set `INFINITEWALK_THREADS` to bound the worker pool. Results do not
//! depend on the thread count.

mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;

use commands::Command;
use output::{manifest_path, read_manifest, RunManifest, Stage};

#[derive(Debug, Parser)]
#[command(name = "infinitewalk", version, about = "Closed-form DeepWalk embeddings and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const THREADS_ENV: &str = "INFINITEWALK_THREADS";

#[derive(Debug, Clone, Copy)]
enum Failure {
    Usage = 2,
    Validation = 3,
    Numerical = 4,
    Io = 5,
}

impl Failure {
    fn name(self) -> &'static str {
        match self {
            Failure::Usage => "usage",
            Failure::Validation => "validation",
            Failure::Numerical => "numerical",
            Failure::Io => "io",
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn classify(err: &anyhow::Error) -> Failure {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return Failure::Usage;
        }
        if let Some(e) = cause.downcast_ref::<infinitewalk::Error>() {
            return match e {
                infinitewalk::Error::Numerical(_) => Failure::Numerical,
                infinitewalk::Error::Io(_) => Failure::Io,
                _ => Failure::Validation,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return Failure::Io;
        }
    }
    Failure::Validation
}

fn configure_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| UsageError(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting thread pool")?;
    }
    Ok(rayon::current_num_threads())
}

fn run_command(mut command: Command, argv: Vec<String>, threads: usize) -> Result<()> {
    if let Command::Replay(r) = &command {
        let manifest = read_manifest(&r.manifest)?;
        let mut inner = manifest.args;
        if let Some(out) = r.out.clone() {
            inner.set_out(out);
        }
        if matches!(inner, Command::Replay(_)) {
            return Err(UsageError("a manifest cannot point at another replay".into()).into());
        }
        return run_command(inner, argv, threads);
    }
    command.absolutize()?;
    let start = Instant::now();
    let mut stage = Stage::new();
    command.execute(&mut stage)?;

    let out = command.out().expect("every executable command has an output").to_path_buf();
    let manifest_file = manifest_path(&out, command.writes_directory());
    let mut outputs = stage.destinations();
    outputs.push(manifest_file.clone());
    let manifest = RunManifest {
        command: command.name().to_string(),
        argv,
        args: command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        duration_secs: start.elapsed().as_secs_f64(),
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    stage.write_bytes(&manifest_file, format!("{text}\n").as_bytes())?;
    stage.commit()
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let msg = rendered.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error kind=usage code=2: {msg}");
            return ExitCode::from(Failure::Usage as u8);
        }
    };
    let result = configure_threads().and_then(|threads| run_command(cli.command, argv[1..].to_vec(), threads));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = classify(&err);
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error kind={} code={}: {msg}", kind.name(), kind as u8);
            ExitCode::from(kind as u8)
        }
    }
}
