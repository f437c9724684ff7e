use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gncorr_cli::config::{apply_override, parse_table, FigureTarget, OutputFormat};
use gncorr_cli::{run, CliError, RunConfig};
use toml::{Table, Value};

/// Higher-order intensity correlation imaging of source arrays.
#[derive(Parser)]
#[command(name = "gncorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the configuration file.
    Run(Common),
    /// Exact correlation scan.
    Analytic(Common),
    /// Monte Carlo photon-counting scan.
    Mc(Common),
    /// Fit the sinusoidal fringe model to a scan.
    Fit(Common),
    /// Resolution report for a scan.
    Report(Common),
    /// Numerical search for fixed-detector positions.
    MagicSearch(Common),
    /// Regenerate the data behind one of the figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(FigureTarget))]
        target: FigureTarget,
        #[command(flatten)]
        common: Common,
    },
    /// Print the fully resolved configuration in canonical form.
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set source.n=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (a directory for figures); standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(OutputFormat))]
    format: Option<OutputFormat>,
}

fn section<'a>(table: &'a mut Table, name: &str) -> &'a mut Table {
    let entry = table
        .entry(name)
        .or_insert_with(|| Value::Table(Table::new()));
    if !entry.is_table() {
        *entry = Value::Table(Table::new());
    }
    entry.as_table_mut().expect("just made a table")
}

fn load(
    common: &Common,
    mode: Option<&str>,
    target: Option<FigureTarget>,
) -> Result<RunConfig, CliError> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let mut table = parse_table(&text)?;
    for o in &common.overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(mode) = mode {
        table.insert("mode".into(), Value::String(mode.into()));
    }
    if let Some(t) = target {
        table.insert("target".into(), Value::String(t.as_str().into()));
    }
    if let Some(seed) = common.seed {
        let seed = i64::try_from(seed).map_err(|_| gncorr_cli::ConfigError::Constraint {
            key: "seed".into(),
            message: "must fit in a signed 64-bit integer".into(),
        })?;
        table.insert("seed".into(), Value::Integer(seed));
    }
    if let Some(path) = &common.output {
        section(&mut table, "output")
            .insert("path".into(), Value::String(path.display().to_string()));
    }
    if let Some(format) = common.format {
        section(&mut table, "output")
            .insert("format".into(), Value::String(format.as_str().into()));
    }
    Ok(RunConfig::from_table(&table)?)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, mode, target) = match &cli.command {
        Command::Run(c) => (c, None, None),
        Command::Analytic(c) => (c, Some("analytic"), None),
        Command::Mc(c) => (c, Some("mc"), None),
        Command::Fit(c) => (c, Some("fit"), None),
        Command::Report(c) => (c, Some("report"), None),
        Command::MagicSearch(c) => (c, Some("magic-search"), None),
        Command::Figure { target, common } => (common, Some("figure"), Some(*target)),
        Command::Config(c) => {
            let cfg = load(c, None, None)?;
            print!("{}", cfg.to_canonical());
            return Ok(());
        }
    };
    let cfg = load(common, mode, target)?;
    let outcome = run(&cfg)?;
    if let Some(bytes) = outcome.stdout {
        let mut out = std::io::stdout().lock();
        // a closed pipe is not worth reporting
        let _ = out.write_all(&bytes).and_then(|_| out.flush());
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
        for path in &outcome.written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // every message already carries its cause
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
