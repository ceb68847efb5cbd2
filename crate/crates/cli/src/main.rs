use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gidseg_cli::pipeline::{self, format_csv, format_table, Overrides, ResultRow};
use gidseg_cli::CliError;

#[derive(Parser)]
#[command(
    name = "gidseg",
    version,
    about = "Segmentation of speckled images with convex and level-set solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Speckle seed, overriding [speckle] seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding [output] dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Console report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Segment the configured image or scene and write mask, overlay and metrics.
    Segment { config: PathBuf },
    /// Run the six-method grid over the configured scenes.
    Bench { config: PathBuf },
    /// Render and speckle the configured scene only.
    Scene { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn report(rows: &[ResultRow], format: Format) {
    match format {
        Format::Csv => print!("{}", format_csv(rows)),
        Format::Table => print!("{}", format_table(rows)),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Segment { config } => {
            let cfg = pipeline::load_config(&config, &overrides)?;
            let out = pipeline::segment(&cfg)?;
            report(std::slice::from_ref(&out.row), cli.format);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Bench { config } => {
            let cfg = pipeline::load_config(&config, &overrides)?;
            let rows = pipeline::bench(&cfg)?;
            report(&rows, cli.format);
            for f in pipeline::write_bench(&cfg, &rows)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(rows.iter().all(|r| r.outcome.is_ok()))
        }
        Command::Scene { config } => {
            let cfg = pipeline::load_config(&config, &overrides)?;
            for f in pipeline::scene(&cfg)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        // some bench cells failed
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
