use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdmarc_core::sweep::{
    default_script_path, emit_csv, emit_plot_script, evaluate_regions, run_sweep, ConfigError, SweepConfig,
};
use hdmarc_core::verify::{verify, Subject};

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;

/// Rate regions of the half-duplex multiple-access relay channel.
#[derive(Debug, Parser)]
#[command(name = "hdmarc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep sigmaQ2 or beta and write a CSV plus a gnuplot script.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV path; overrides the config's `output`. The script goes next to it with a .gp extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded invariant suite; exits 2 if any check fails.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(["closed-forms", "dm-regions", "reductions"]))]
        subject: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        draws: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every configured scheme at one parameter point, printed as JSON.
    Region {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Verify(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::from_file(&config)?;
            let csv = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| Failure::Config("no output path: pass --out or set `output` in the config".into()))?;
            let result = run_sweep(&cfg)?;
            emit_csv(&result, &csv)?;
            let script = default_script_path(&csv);
            emit_plot_script(&result, &csv, &script)?;
            eprintln!("wrote {} and {}", csv.display(), script.display());
            Ok(())
        }
        Command::Verify { subject, seed, draws, out } => {
            let subject: Subject = subject.parse().map_err(Failure::Config)?;
            let report = verify(subject, seed, draws as usize);
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            write_or_print(out.as_deref(), &text)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(Failure::Verify(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Region { config, out } => {
            let cfg = SweepConfig::from_file(&config)?;
            let regions = evaluate_regions(&cfg)?;
            let mut text = serde_json::to_string_pretty(&regions).expect("regions serialize");
            text.push('\n');
            write_or_print(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
