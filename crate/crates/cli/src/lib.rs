//! Command-line driver for the `semlabel` toolkit.
//!
//! [`execute`] runs one invocation against arbitrary output streams and
//! returns the process exit code; the binary is a thin wrapper around it.

pub mod args;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use serde_json::json;

use semlabel::ErrorKind;

pub use commands::parse_synth_spec;
pub use config::RunConfig;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or flag combinations.
    Usage(String),
    Core(semlabel::Error),
}

impl From<semlabel::Error> for CliError {
    fn from(e: semlabel::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => "input",
                ErrorKind::Contract => "contract",
                ErrorKind::Internal => "internal",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "contract" => EXIT_CONTRACT,
            "internal" => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    /// Single-line JSON rendering written to stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "code": self.exit_code(),
                "message": self.message(),
            }
        })
        .to_string()
    }
}

/// Runs one invocation; returns the exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp
                    | ClapErrorKind::DisplayVersion
                    | ClapErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let message = e
                .to_string()
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            let _ = writeln!(err, "{}", CliError::Usage(message).to_json());
            return EXIT_INPUT;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    // Output is buffered so the command can run on the pool's threads.
    let mut buffer: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let sink: &mut dyn Write = &mut buffer;
        match cli.command {
            Command::Train(a) => commands::train(a, sink),
            Command::Predict(a) => commands::predict(a, sink),
            Command::Benchmark(a) => commands::benchmark(a, sink),
            Command::Sweep(a) => commands::sweep(a, sink),
            Command::Synth(a) => commands::synth(a, sink),
            Command::Schema(a) => commands::schema(a, sink),
            Command::Inspect(a) => commands::inspect(a, sink),
        }
    });
    match out.write_all(&buffer).and_then(|_| out.flush()) {
        // A closed pipe (e.g. `| head`) is not a failure of the command.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            result?;
            Err(CliError::Core(semlabel::Error::io(
                std::path::Path::new("<stdout>"),
                e,
            )))
        }
        _ => result,
    }
}
