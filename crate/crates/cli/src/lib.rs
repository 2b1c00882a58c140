//! Command-line front end: `mine`, `synth` and `eval`.
//!
//! [`run`] parses arguments, dispatches to a subcommand and maps failures to
//! exit codes: 0 on success, 1 for usage errors and 2 for data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod eval;
mod mine;
mod synth;
pub mod tsv;

pub use eval::{cmd_eval, scaling, ScalingRow};
pub use mine::{cmd_mine, RunReport};
pub use synth::cmd_synth;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: itemset_core::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(itemset_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<itemset_core::Error> for CliError {
    fn from(e: itemset_core::Error) -> Self {
        match e {
            itemset_core::Error::InvalidConfig(msg) => CliError::Usage(msg),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }

    pub(crate) fn file(
        path: &std::path::Path,
    ) -> impl FnOnce(itemset_core::Error) -> CliError + '_ {
        move |source| CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "imine",
    version,
    about = "Mine interesting itemsets from transaction data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine itemsets from a FIMI file and write a ranked TSV.
    Mine(MineArgs),
    /// Sample a FIMI database from a JSON model.
    Synth(SynthArgs),
    /// Evaluate mined itemsets.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SortKey {
    #[default]
    Interestingness,
    Probability,
}

#[derive(Clone, Debug, Args)]
pub struct MineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 100_000)]
    pub queue_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub em_tolerance: f64,
    /// Run hard EM after this many accepted itemsets.
    #[arg(long, default_value_t = 5)]
    pub em_every: usize,
    /// Ranked TSV path [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Leave singletons out of the ranked output.
    #[arg(long)]
    pub no_singletons: bool,
    #[arg(long, value_enum, default_value_t = SortKey::Interestingness)]
    pub sort: SortKey,
}

#[derive(Clone, Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub transactions: u64,
    #[arg(long)]
    pub seed: u64,
    /// FIMI path [default: stdout]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum EvalCommand {
    /// Precision/recall of a ranked TSV against a truth model.
    Pr(PrArgs),
    /// Average inter-itemset distance of the top itemsets.
    Iid(IidArgs),
    /// Mining wall-clock time on synthetic databases of growing size.
    Scaling(ScalingArgs),
}

#[derive(Clone, Debug, Args)]
pub struct PrArgs {
    #[arg(long)]
    pub mined: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Ignore singletons on both sides.
    #[arg(long)]
    pub no_singletons: bool,
}

#[derive(Clone, Debug, Args)]
pub struct IidArgs {
    #[arg(long)]
    pub mined: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub top: usize,
    #[arg(long)]
    pub no_singletons: bool,
}

#[derive(Clone, Debug, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub queue_size: usize,
    /// Timed runs per size; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics and the run report go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Mine(args) => cmd_mine(args, out, err).map(|_| ()),
        Command::Synth(args) => cmd_synth(args, out),
        Command::Eval(cmd) => cmd_eval(cmd, out),
    };
    match result.and_then(|()| out.flush().map_err(CliError::from)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Writes to `path`, or to `fallback` when no path is given.
pub(crate) fn with_output(
    path: Option<&std::path::Path>,
    fallback: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match path {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(fallback),
    }
}
