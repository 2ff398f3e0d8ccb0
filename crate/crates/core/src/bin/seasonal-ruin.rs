use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seasonal_ruin::cli::{self, Overrides};

#[derive(Parser)]
#[command(
    version,
    about = "Survival probabilities of seasonal discrete-time risk models"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a TOML config file.
    Run {
        config: PathBuf,
        /// Also print the table with three-decimal rounding.
        #[arg(long)]
        pretty: bool,
        #[arg(long)]
        mc_paths: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        u_max: Option<usize>,
        /// Finite horizons, comma separated.
        #[arg(long = "t", value_delimiter = ',')]
        t_values: Option<Vec<usize>>,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        root_tol: Option<f64>,
        #[arg(long)]
        cluster_tol: Option<f64>,
        #[arg(long)]
        max_poly_degree: Option<usize>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        pretty,
        mc_paths,
        seed,
        u_max,
        t_values,
        out,
        report,
        root_tol,
        cluster_tol,
        max_poly_degree,
    } = Args::parse().command;
    let overrides = Overrides {
        u_max,
        t_values,
        mc_paths,
        seed,
        table_path: out,
        report_path: report,
        root_tol,
        cluster_tol,
        max_poly_degree,
    };
    match cli::run(&config, &overrides) {
        Ok(result) => {
            if pretty {
                print!("{}", cli::to_pretty(&result));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
