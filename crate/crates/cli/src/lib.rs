//! `mrpp`: validate, format, scaffold, diff, audit, badge, rate and watch
//! policies, against a directory of `.mrpp.json` files or a running
//! registry.
//!
//! Exit codes: 0 success, 1 domain failure (invalid policy, findings,
//! badge below a threshold, conflicting inputs), 2 usage error, 3 I/O or
//! network error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use mrpp_core::BadgeLevel;

mod commands;
pub mod source;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The inputs were read but do not pass (exit 1).
    #[error("{0}")]
    Domain(String),
    /// A file, directory or endpoint could not be used (exit 3).
    #[error("{0}")]
    Io(String),
    /// Bad arguments; the rendered message carries the synopsis (exit 2).
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_FAILURE,
            CliError::Io(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mrpp", version, about = "Machine-readable privacy policy tools")]
pub struct Cli {
    /// Print canonical JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Where to read policies from. `--dir` wins when both are present.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Directory of `.mrpp.json` files.
    #[arg(long, value_name = "DIR")]
    pub dir: Option<PathBuf>,
    /// Base URL of a policy registry.
    #[arg(long, env = "MRPP_REGISTRY_URL", value_name = "URL")]
    pub registry: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check policy files; exit 1 if any has errors.
    Validate {
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
    /// Rewrite policy files in canonical form.
    Fmt {
        /// Rewrite the files in place instead of printing them.
        #[arg(long)]
        write: bool,
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
    /// Draft a policy from a permission manifest.
    Scaffold {
        #[arg(value_name = "MANIFEST")]
        manifest: PathBuf,
        #[arg(value_name = "PARTY")]
        party: String,
        /// Write the draft here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Show what changed between two versions of a policy.
    Diff {
        #[arg(value_name = "OLD")]
        old: PathBuf,
        #[arg(value_name = "NEW")]
        new: PathBuf,
    },
    /// List one-way references; exit 1 if there are any.
    Audit {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Print a party's transparency badge.
    Badge {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(value_name = "PARTY")]
        party: String,
        /// Exit 1 when the badge is below this level.
        #[arg(long, value_name = "LEVEL", value_parser = parse_level)]
        min: Option<BadgeLevel>,
    },
    /// List what keeps a party from a badge level; exit 1 if anything does.
    Gap {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(value_name = "PARTY")]
        party: String,
        #[arg(long, value_name = "LEVEL", value_parser = parse_level)]
        target: BadgeLevel,
    },
    /// Rate a party's policy against a preference profile.
    Rate {
        #[command(flatten)]
        source: SourceArgs,
        /// Preference profile (`.profile.json`).
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        #[arg(value_name = "PARTY")]
        party: String,
    },
    /// Poll the registry and print alerts when a watched policy changes in a
    /// way the profile objects to.
    Watch {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_name = "FILE")]
        profile: PathBuf,
        /// App id to put on alerts; defaults to the policy's own app_id.
        #[arg(long, value_name = "ID")]
        app_id: Option<String>,
        /// Compare against this version instead of the one current at start.
        #[arg(long, value_name = "N")]
        from_version: Option<i64>,
        /// Seconds between polls.
        #[arg(long, value_name = "SECS", default_value_t = 10)]
        interval: u64,
        /// Stop after this many polls.
        #[arg(long, value_name = "N")]
        max_polls: Option<u64>,
        #[arg(required = true, value_name = "PARTY")]
        parties: Vec<String>,
    },
}

fn parse_level(s: &str) -> Result<BadgeLevel, String> {
    s.parse::<BadgeLevel>().map_err(|_| "expected one of none, bronze, gold, platinum".to_string())
}

/// Usage error for `subcommand`, rendered with its synopsis.
pub(crate) fn usage_error(subcommand: &str, message: &str) -> CliError {
    let mut cmd = Cli::command();
    cmd.build();
    let err = match cmd.find_subcommand_mut(subcommand) {
        Some(sub) => sub.error(clap::error::ErrorKind::MissingRequiredArgument, message),
        None => cmd.error(clap::error::ErrorKind::MissingRequiredArgument, message),
    };
    CliError::Usage(err.render().to_string())
}

/// Parse `args` (including the program name) and run the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let mut out = commands::Output { stdout, stderr, json: cli.json };
    match commands::execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(CliError::Usage(text)) => {
            let _ = write!(out.stderr, "{text}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(out.stderr, "mrpp: {e}");
            e.exit_code()
        }
    }
}
