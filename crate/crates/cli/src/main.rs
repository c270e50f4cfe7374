use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddl_radar::config::{parse_config, ExperimentConfig};
use ddl_radar::experiments::run_experiment;
use ddl_radar_core::performance::{
    amf_threshold, glr_threshold, load_gain, reference_table_params,
};

#[derive(Parser)]
#[command(name = "ddl-radar", version, about = "Doppler-domain localized adaptive radar detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's Monte Carlo trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Output directory for the CSV.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print exact GLR and AMF detection thresholds for one (n, K, P_FA).
    Thresholds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        pfa: f64,
    },
    /// Print the computational-load gain table.
    LoadGain {
        /// Range cells per CPI.
        #[arg(long, default_value_t = 8000)]
        m: usize,
        /// Representative-cell percentage.
        #[arg(long, default_value_t = 90.0)]
        gamma: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddl-radar: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg: ExperimentConfig = parse_config(&text)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            let path = run_experiment(&cfg, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Thresholds { n, k, pfa } => {
            let glr = glr_threshold(pfa, k, n)?;
            let amf = amf_threshold(pfa, k, n)?;
            println!("n = {n}, K = {k}, P_FA = {pfa:e}");
            println!("lambda_GLR = {glr:.12}");
            println!("lambda_AMF = {amf:.12}");
        }
        Command::LoadGain { m, gamma } => {
            println!("n,N,cl_td,cl_ddl,gain_exact,gain_floor");
            for p in reference_table_params(m, gamma) {
                let g = load_gain(&p)?;
                println!(
                    "{},{},{:.6e},{:.6e},{:.6},{}",
                    p.ddl_order, p.pulses, g.cl_td, g.cl_ddl, g.gain, g.gain_floor
                );
            }
        }
    }
    Ok(())
}
