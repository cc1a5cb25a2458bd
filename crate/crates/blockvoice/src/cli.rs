//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error (bad flags, missing
//! files), 3 invalid configuration or data, or hierarchy violations.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use blockvoice_core::config::{Config, Language};
use blockvoice_core::eval::TrialFilter;
use blockvoice_core::pipeline::Session;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config_dir::{self, ConfigLoadError};
use crate::dataset::{self, DatasetError};
use crate::repl::Repl;
use crate::report::{self, MachineReport};
use crate::serve::Server;

pub const OK: i32 = 0;
pub const RUNTIME: i32 = 1;
pub const USAGE: i32 = 2;
pub const INVALID: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "blockvoice", about = "Voice commands for block-based programming")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Evaluate a trial dataset under the four conditions.
    Eval(EvalArgs),
    /// Type transcripts into a live session.
    Repl(ReplArgs),
    /// Serve the session protocol (plain TCP lines or WebSocket).
    Serve(ServeArgs),
    /// Validate a configuration directory.
    CheckConfig(CheckArgs),
    /// Print version information.
    Version,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Configuration directory; the bundled configuration when absent.
    #[arg(long, env = config_dir::ENV_VAR)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Trial dataset, one JSON trial per line.
    #[arg(long, required_unless_present = "sample", conflicts_with = "sample")]
    dataset: Option<PathBuf>,
    /// Use the bundled sample dataset.
    #[arg(long)]
    sample: bool,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the trials, e.g. `--scope language=de`. Repeatable.
    #[arg(long)]
    scope: Vec<String>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse()
}

fn parse_confidence(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
struct ReplArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "en", value_parser = parse_language)]
    lang: Language,
    /// Confidence attached to every typed transcript, as an ASR would.
    #[arg(long, value_parser = parse_confidence)]
    asr_confidence: Option<f64>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 8765)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value = "en", value_parser = parse_language)]
    lang: Language,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Also write the checked configuration to this directory.
    #[arg(long)]
    export: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigLoadError> for Failure {
    fn from(e: ConfigLoadError) -> Failure {
        let code = match e {
            ConfigLoadError::MissingFile(_) | ConfigLoadError::NoLanguages(_) => USAGE,
            ConfigLoadError::Io { .. } => RUNTIME,
            ConfigLoadError::Parse { .. } | ConfigLoadError::Validation(_) => INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

fn config(arg: &ConfigArg) -> Result<Config, Failure> {
    Ok(config_dir::resolve(arg.config.as_deref())?.0)
}

/// Runs the CLI with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn io::BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return USAGE;
            }
            let _ = write!(stdout, "{text}");
            return OK;
        }
    };
    let result = match cli.command {
        Cmd::Eval(a) => eval(&a, stdout, stderr),
        Cmd::Repl(a) => repl(&a, stdin, stdout),
        Cmd::Serve(a) => serve(&a, stderr),
        Cmd::CheckConfig(a) => check_config(&a, stdout),
        Cmd::Version => {
            let _ = writeln!(stdout, "blockvoice {} (engine {})", env!("CARGO_PKG_VERSION"), blockvoice_core::VERSION);
            Ok(OK)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            if f.code == USAGE {
                let _ = writeln!(stderr, "see 'blockvoice --help'");
            }
            f.code
        }
    }
}

fn eval(a: &EvalArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let config = config(&a.config)?;
    let mut filter = TrialFilter::default();
    for spec in &a.scope {
        for part in spec.split(',') {
            filter.restrict(part).map_err(|e| Failure::new(USAGE, e))?;
        }
    }
    let bytes = match &a.dataset {
        Some(path) => fs::read(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => Failure::new(USAGE, format!("{}: no such dataset", path.display())),
            _ => Failure::new(RUNTIME, format!("{}: {e}", path.display())),
        })?,
        None => dataset::SAMPLE.as_bytes().to_vec(),
    };
    let text = String::from_utf8(bytes.clone()).map_err(|e| Failure::new(INVALID, format!("dataset: {e}")))?;
    let trials = dataset::parse_dataset(&text).map_err(|e| match e {
        DatasetError::Missing(_) => Failure::new(USAGE, e.to_string()),
        DatasetError::Io { .. } => Failure::new(RUNTIME, e.to_string()),
        _ => Failure::new(INVALID, format!("dataset: {e}")),
    })?;
    let evaluation = report::evaluate(&config, &trials, &filter, usize::from(a.jobs)).map_err(|e| {
        use blockvoice_core::eval::EvalError;
        match e {
            EvalError::Stats(blockvoice_core::stats::StatsError::EmptySelection) => {
                Failure::new(USAGE, "no trials match the scope")
            }
            other => Failure::new(INVALID, other.to_string()),
        }
    })?;
    let summary = report::summary_line(&evaluation.report);
    let violations = evaluation.report.hierarchy_violations.len();
    let rendered = match a.format {
        Format::Table => report::render_table(&evaluation),
        Format::Machine => MachineReport::new(evaluation, &config, &bytes).to_json(),
    };
    match &a.out {
        Some(path) => fs::write(path, rendered).map_err(|e| Failure::new(RUNTIME, format!("{}: {e}", path.display())))?,
        None => stdout.write_all(rendered.as_bytes()).map_err(|e| Failure::new(RUNTIME, e.to_string()))?,
    }
    let _ = writeln!(stderr, "{summary}");
    if violations > 0 {
        let _ = writeln!(stderr, "error: {violations} hierarchy violation(s): a Top condition succeeded where its Any condition failed");
        return Ok(INVALID);
    }
    Ok(OK)
}

fn repl(a: &ReplArgs, stdin: &mut dyn io::BufRead, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let config = config(&a.config)?;
    let session = Session::new(&config, a.lang).map_err(|e| Failure::new(USAGE, e.to_string()))?;
    Repl::new(session, a.asr_confidence).run(stdin, stdout).map_err(|e| Failure::new(RUNTIME, e.to_string()))?;
    Ok(OK)
}

fn serve(a: &ServeArgs, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let config = config(&a.config)?;
    let addr = format!("{}:{}", a.host, a.port);
    let server = Server::bind(addr.as_str(), &config, a.lang).map_err(|e| Failure::new(RUNTIME, e.to_string()))?;
    let local = server.local_addr().map_err(|e| Failure::new(RUNTIME, e.to_string()))?;
    let _ = writeln!(stderr, "serving on {local} (ws://{local}/ or newline-delimited JSON)");
    server.run().map_err(|e| Failure::new(RUNTIME, e.to_string()))?;
    Ok(OK)
}

fn check_config(a: &CheckArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (config, dir) = config_dir::resolve(a.config.config.as_deref())?;
    let languages: Vec<&str> = config.languages().map(Language::code).collect();
    let s = &config.settings;
    let _ = writeln!(
        stdout,
        "ok: {} ({} languages: {}, {} blocks, execute >= {}, confirm >= {}) {}",
        dir.map_or_else(|| "bundled configuration".to_string(), |d| d.display().to_string()),
        languages.len(),
        languages.join(", "),
        config.catalog.blocks.len(),
        s.t_execute,
        s.t_confirm,
        config_dir::config_hash(&config),
    );
    if let Some(out) = &a.export {
        config_dir::write_config(out, &config).map_err(|e| Failure::new(RUNTIME, format!("{}: {e}", out.display())))?;
        let _ = writeln!(stdout, "wrote {}", out.display());
    }
    Ok(OK)
}
