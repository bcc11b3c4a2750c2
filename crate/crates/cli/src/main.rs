use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shearsparse_cli::{config::ExperimentConfig, experiments, summarize, tools, CliError, Result};
use shearsparse_core::Cone;

#[derive(Parser)]
#[command(name = "shearsparse", version, about = "Shearlet sparse-approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConeArg {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set n=256` or `--set sweep.hi=12`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Join experiment manifests into one table.
    Summarize {
        manifests: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Also write summary.csv and summary.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a generator spec against the decay conditions.
    VerifyGenerators { spec: PathBuf },
    /// Print samples of one shearlet as CSV.
    DumpAtoms {
        spec: PathBuf,
        #[arg(long = "j")]
        j: u32,
        #[arg(long = "k", allow_hyphen_values = true)]
        k: i32,
        #[arg(long, value_enum, default_value = "horizontal")]
        cone: ConeArg,
        /// Image length of one generator unit (default 1/8).
        #[arg(long)]
        unit: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, set, workers } => {
            let cfg = ExperimentConfig::load(&config, &set)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(w) = workers {
                if w == 0 {
                    return Err(CliError::config("workers", "must be at least 1"));
                }
                pool = pool.num_threads(w);
            }
            let pool = pool.build().map_err(|e| CliError::config("workers", e.to_string()))?;
            let out = pool.install(|| experiments::run(&cfg))?;
            for line in &out.summary {
                println!("{line}");
            }
            println!("manifest: {}", out.manifest_path.display());
        }
        Command::Summarize { manifests, format, out } => {
            let s = summarize::summarize(&manifests)?;
            let (csv, text) = (s.to_csv(), s.to_text());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                write(&dir.join("summary.csv"), &csv)?;
                write(&dir.join("summary.txt"), &text)?;
            }
            print!("{}", if matches!(format, Format::Csv) { csv } else { text });
        }
        Command::VerifyGenerators { spec } => print!("{}", tools::verify_generators(&spec)?),
        Command::DumpAtoms { spec, j, k, cone, unit, out } => {
            let cone = match cone {
                ConeArg::Horizontal => Cone::Horizontal,
                ConeArg::Vertical => Cone::Vertical,
            };
            let (info, csv) = tools::dump_atom(&spec, j, k, cone, unit)?;
            eprintln!("{info}");
            match out {
                Some(p) => write(&p, &csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
