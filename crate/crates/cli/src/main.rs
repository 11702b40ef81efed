use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddm_cli::{
    cmd_moments, cmd_validate, cmd_value, to_machine, ExitStatus, MomentsOptions, SpecFile,
    ValidateOptions, ValuationReport,
};
use stochastic_ddm::DEFAULT_ENUMERATION_CAP;

/// Valuation reports for the dividend discount model with random growth.
///
/// Exit codes: 0 ok, 1 parse or I/O error, 2 invalid model entry,
/// 3 oracle disagreement (validate only).
#[derive(Parser)]
#[command(name = "ddm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form expected price, variance and convergence threshold.
    Value {
        #[command(flatten)]
        common: Common,
    },
    /// Closed forms checked against the truncated series and a simulation.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Truncation and simulation horizon (default: chosen from the tail).
        #[arg(long)]
        horizon: Option<u32>,
        /// Number of simulated paths (default 100000).
        #[arg(long)]
        paths: Option<u64>,
        /// Simulation seed (default 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Relative tolerance for the series check (default 1e-6).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Fixed number of simulation blocks; results depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Dividend moments at periods j <= p and the exact joint table.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        j: u32,
        /// Later period (defaults to j).
        #[arg(long)]
        p: Option<u32>,
        /// Largest p for which the joint table is enumerated.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        enum_cap: u32,
    },
}

#[derive(Args)]
struct Common {
    /// TOML spec file with one or more [[stock]] entries.
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Only report the entry with this label.
    #[arg(long)]
    entry: Option<String>,
    /// Add a generation timestamp to machine output.
    #[arg(long)]
    stamp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

fn load(common: &Common) -> Result<SpecFile, String> {
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|e| format!("{}: {e}", common.spec.display()))?;
    let mut file = SpecFile::parse(&text).map_err(|e| format!("{}: {e}", common.spec.display()))?;
    if let Some(label) = &common.entry {
        let Some(index) = file.stocks.iter().position(|s| &s.label == label) else {
            return Err(format!("{}: no entry labelled '{label}'", common.spec.display()));
        };
        file.stocks = vec![file.stocks.swap_remove(index)];
        if index < file.locations.len() {
            file.locations = vec![file.locations.swap_remove(index)];
        }
    }
    Ok(file)
}

fn emit_valuation(mut report: ValuationReport, common: &Common) {
    for stock in &report.stocks {
        for d in &stock.diagnostics {
            eprintln!("{d}");
        }
    }
    match common.format {
        Format::Human => print!("{}", report.to_human()),
        Format::Machine => {
            if common.stamp {
                report.generated_at_unix = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .ok()
                    .map(|d| d.as_secs());
            }
            print!("{}", to_machine(&report));
        }
    }
}

fn run(cli: Cli) -> Result<ExitStatus, String> {
    match cli.command {
        Command::Value { common } => {
            let file = load(&common)?;
            let (report, status) = cmd_value(&file);
            emit_valuation(report, &common);
            Ok(status)
        }
        Command::Validate {
            common,
            horizon,
            paths,
            seed,
            tolerance,
            workers,
        } => {
            let file = load(&common)?;
            let options = ValidateOptions {
                horizon,
                paths,
                seed,
                tolerance,
                workers,
            };
            let (report, status) = cmd_validate(&file, &options);
            emit_valuation(report, &common);
            Ok(status)
        }
        Command::Moments {
            common,
            j,
            p,
            enum_cap,
        } => {
            let file = load(&common)?;
            let options = MomentsOptions {
                j,
                p,
                enum_cap,
                entry: None,
            };
            let (report, status) = cmd_moments(&file, &options);
            for row in &report.rows {
                for d in &row.diagnostics {
                    eprintln!("{d}");
                }
            }
            match common.format {
                Format::Human => print!("{}", report.to_human()),
                Format::Machine => print!("{}", to_machine(&report)),
            }
            Ok(status)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(ExitStatus::ParseOrIo.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let status = run(cli).unwrap_or_else(|message| {
        eprintln!("error: {message}");
        ExitStatus::ParseOrIo
    });
    ExitCode::from(status.code() as u8)
}
