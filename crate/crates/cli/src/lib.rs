//! The `switchbif` command-line tool.
//!
//! Exit codes: 0 success, 1 parse/validation/argument error, 2 numerical
//! failure, 3 internal error (I/O, panics).

pub mod args;
pub mod commands;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use switchbif_core::config::{parse_config, parse_config_unchecked, RunConfig, PAPER_EXAMPLE_CONFIG};
use switchbif_core::{Error, ErrorClass};

pub use args::{Cli, Command, TopLevel};
pub use commands::{run_command, Artifact, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Input => EXIT_INPUT,
        ErrorClass::Numerical => EXIT_NUMERICAL,
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

fn report(err: &mut dyn Write, as_json: bool, kind: &str, message: String, code: i32) -> i32 {
    let _ = if as_json {
        let doc = ErrorDoc {
            error: ErrorBody {
                kind,
                message,
                exit_code: code,
            },
        };
        writeln!(err, "{}", serde_json::to_string(&doc).unwrap_or_default())
    } else {
        writeln!(err, "error: {message}")
    };
    code
}

fn load(cli: &Cli, builtin: bool, validate_only: bool) -> Result<RunConfig, Error> {
    let text = if builtin {
        if cli.config.is_some() {
            return Err(Error::InvalidArgument("paper-example does not take --config".into()));
        }
        PAPER_EXAMPLE_CONFIG.to_string()
    } else {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--config FILE is required (or use paper-example)".into()))?;
        std::fs::read_to_string(path).map_err(|e| Error::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        })?
    };
    if validate_only {
        parse_config_unchecked(&text)
    } else {
        parse_config(&text)
    }
}

fn write_outputs(artifacts: &[Artifact], dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in artifacts {
                std::fs::write(dir.join(a.file), &a.content)?;
            }
        }
        None => {
            for a in artifacts {
                if a.primary {
                    out.write_all(a.content.as_bytes())?;
                } else {
                    err.write_all(a.content.as_bytes())?;
                }
            }
        }
    }
    out.flush()
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let wants_json = args.iter().any(|a| a == "--error-json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            if wants_json {
                return report(err, true, "UsageError", e.kind().to_string(), EXIT_INPUT);
            }
            let _ = write!(err, "{e}");
            return EXIT_INPUT;
        }
    };

    let (cmd, builtin) = match &cli.command {
        TopLevel::PaperExample { command } => (command.clone(), true),
        TopLevel::Run(command) => (command.clone(), false),
    };
    let result = cmd
        .check_shapes()
        .map_err(Error::InvalidArgument)
        .and_then(|_| load(&cli, builtin, matches!(cmd, Command::Validate)))
        .and_then(|mut cfg| {
            cmd.apply_to(&mut cfg.run);
            run_command(&cmd, &cfg)
        });

    match result {
        Ok(outcome) => {
            if let Err(e) = write_outputs(&outcome.artifacts, cli.out.as_deref(), out, err) {
                return report(err, cli.error_json, "IoError", e.to_string(), EXIT_INTERNAL);
            }
            match outcome.failure {
                None => EXIT_OK,
                Some(e) => report(err, cli.error_json, e.kind(), e.to_string(), exit_code(&e)),
            }
        }
        Err(e) => report(err, cli.error_json, e.kind(), e.to_string(), exit_code(&e)),
    }
}
