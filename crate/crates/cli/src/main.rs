use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use pvnls_cli::{dispatch, emit_config, parse_config, CliError, Format, RunConfig, Subcommand};

/// Homoclinic orbits, Melnikov analysis and simulations of the perturbed vector NLS.
#[derive(Debug, Parser)]
#[command(name = "pvnls", version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// TOML run configuration; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: [output] path, else stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `TOOL_THREADS` sizes the global rayon pool used by sweeps.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TOOL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Parse {
            line: 0,
            field: Some("TOOL_THREADS".into()),
            message: format!("expected a positive integer, got `{raw}`"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Core(pvnls_core::Error::InvalidConfig(e.to_string())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path).map_err(io_error(path))?)?,
        None => RunConfig::default(),
    };
    let format = cli.format.unwrap_or(cfg.output.format);
    let target = cli.out.clone().or_else(|| cfg.output.path.clone());
    // open the sink first so an unwritable path fails before any computation
    let mut sink: Box<dyn Write> = match &target {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io_error(path))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let report = dispatch(cli.command, &cfg)?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    let label = target.unwrap_or_else(|| PathBuf::from("<stdout>"));
    report.table.write(format, &mut sink).map_err(io_error(&label))?;
    sink.flush().map_err(io_error(&label))?;
    report.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let defaults = format!(
        "Configuration sections and their defaults:\n\n{}",
        emit_config(&RunConfig::default())
    );
    let matches = Cli::command().after_long_help(defaults).get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
