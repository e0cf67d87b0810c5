//! `shadowcue run` and `shadowcue serve`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use shadowcue_core::batch::Execution;
use shadowcue_core::sim::{
    compare_modes_with, run_scenario, Metrics, Scenario, SimError, TracePoint,
};
use shadowcue_core::telemetry::write_tick_log;

use crate::server;
use crate::session::SessionConfig;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "shadowcue",
    version,
    about = "Run shadow-cue scenarios or serve live sessions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a scenario file and write its tick log.
    Run {
        scenario: PathBuf,
        /// Tick log path. Without it the log goes to stdout and the
        /// summary to stderr. With --compare this is the stem for
        /// `<stem>.direct.jsonl` and `<stem>.pid.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run both control modes on the same robot inputs.
        #[arg(long)]
        compare: bool,
    },
    /// Accept WebSocket sessions.
    Serve {
        #[arg(long, env = "SHADOWCUE_BIND", default_value = server::DEFAULT_BIND)]
        bind: String,
        /// Overrides the tick rate of every session's scenario, Hz.
        #[arg(long)]
        tick_rate: Option<f64>,
        /// Directory of `<name>.toml` presets for `init`.
        #[arg(long)]
        presets: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub scenario: &'a str,
    pub ticks: u64,
    pub log: Option<String>,
    pub metrics: Metrics,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary<'a> {
    pub scenario: &'a str,
    pub direct_log: String,
    pub pid_log: String,
    pub direct: Metrics,
    pub pid: Metrics,
    pub pid_is_smoother: bool,
    pub trace: &'a [TracePoint],
}

fn write_log(path: &Path, records: &[shadowcue_core::sim::TickRecord]) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    write_tick_log(BufWriter::new(file), records).map_err(|e| io_failure(path, e))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::Runtime(e.to_string()))?;
    writeln!(out).map_err(|e| Failure::Runtime(e.to_string()))
}

pub fn run(scenario_path: &Path, out: Option<&Path>, compare: bool) -> Result<(), Failure> {
    let scenario = Scenario::load(scenario_path)?;
    if compare {
        let stem = match out {
            Some(p) => p.to_path_buf(),
            None => PathBuf::from(scenario_path.file_stem().unwrap_or_default()),
        };
        let run = compare_modes_with(&scenario, Execution::default())?;
        let (direct_log, pid_log) = (
            with_suffix(&stem, ".direct.jsonl"),
            with_suffix(&stem, ".pid.jsonl"),
        );
        write_log(&direct_log, &run.direct)?;
        write_log(&pid_log, &run.pid)?;
        let summary = CompareSummary {
            scenario: &scenario.name,
            direct_log: direct_log.display().to_string(),
            pid_log: pid_log.display().to_string(),
            direct: run.report.direct,
            pid: run.report.pid,
            pid_is_smoother: run.report.pid_is_smoother(),
            trace: &run.report.trace,
        };
        return print_json(&mut io::stdout().lock(), &summary);
    }

    let (records, metrics) = run_scenario(&scenario)?;
    let summary = RunSummary {
        scenario: &scenario.name,
        ticks: records.len() as u64,
        log: out.map(|p| p.display().to_string()),
        metrics,
    };
    match out {
        Some(path) => {
            write_log(path, &records)?;
            print_json(&mut io::stdout().lock(), &summary)
        }
        None => {
            match write_tick_log(io::stdout().lock(), &records) {
                // reader went away, e.g. `| head`
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
                r => r.map_err(|e| Failure::Runtime(format!("stdout: {e}")))?,
            }
            print_json(&mut io::stderr().lock(), &summary)
        }
    }
}

pub async fn serve(
    bind: &str,
    tick_rate: Option<f64>,
    presets: Option<PathBuf>,
) -> Result<(), Failure> {
    if let Some(rate) = tick_rate {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Failure::Validation(format!(
                "tick rate must be positive, got {rate}"
            )));
        }
    }
    let mut config = SessionConfig {
        tick_rate,
        ..SessionConfig::default()
    };
    if let Some(dir) = presets {
        if !dir.is_dir() {
            return Err(Failure::Validation(format!(
                "{} is not a directory",
                dir.display()
            )));
        }
        config.presets = dir;
    }
    let (listener, addr) = server::bind(bind)
        .await
        .map_err(|e| Failure::Validation(format!("cannot bind {bind}: {e}")))?;
    eprintln!("listening on ws://{addr}");
    tokio::select! {
        r = server::serve(listener, config) => r.map_err(|e| Failure::Runtime(e.to_string())),
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Cmd::Run {
            scenario,
            out,
            compare,
        } => run(&scenario, out.as_deref(), compare),
        Cmd::Serve {
            bind,
            tick_rate,
            presets,
        } => match tokio::runtime::Runtime::new() {
            Ok(rt) => rt.block_on(serve(&bind, tick_rate, presets)),
            Err(e) => Err(Failure::Runtime(e.to_string())),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("shadowcue: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
