//! `privopt`: run the privacy-preserving primal-dual benchmarks.
//!
//! Exit status: 0 when the run converged, 2 when it stopped at `k_max`,
//! 1 on any error.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use privopt::experiments::{run_experiment, write_records, OracleSettings, ReferenceOptima, RunOptions};

use config::{resolve, RunArgs, OUTPUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "privopt", version, about = "Privacy-preserving decentralized primal-dual optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write one record per iteration
    Run {
        /// TOML file with run settings; flags take precedence
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Recompute the reference optima of the built-in experiments
    Reference {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(config: Option<PathBuf>, args: RunArgs) -> Result<bool, String> {
    let file_args = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunArgs::from_toml(&text)?
        }
        None => RunArgs::default(),
    };
    let output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let cfg = resolve(args.over(file_args), output_dir.as_deref())?;

    let opts = RunOptions {
        crypto: cfg.crypto.clone(),
        master_seed: cfg.seed,
        compare_plaintext: cfg.compare_plaintext,
    };
    let result = run_experiment(&cfg.experiment, &opts).map_err(|e| e.to_string())?;

    let x_len: usize = cfg.experiment.spec.primal_dims().iter().sum();
    let m = cfg.experiment.spec.dual_dim();
    let out = open_output(cfg.output.as_ref()).map_err(|e| format!("output: {e}"))?;
    write_records(out, cfg.format, &result.records, x_len, m).map_err(|e| format!("output: {e}"))?;

    if let (Some(path), Some(run)) = (&cfg.transcript, &result.protocol) {
        let out = open_output(Some(path)).map_err(|e| format!("transcript: {e}"))?;
        run.transcript.write_jsonl(out).map_err(|e| format!("transcript: {e}"))?;
    }

    eprintln!("{}: {}", cfg.experiment.name, result.summary);
    Ok(result.summary.converged)
}

fn reference(output: Option<PathBuf>) -> Result<(), String> {
    let optima = ReferenceOptima::compute(OracleSettings::default()).map_err(|e| e.to_string())?;
    let text = optima.to_toml().map_err(|e| e.to_string())?;
    let mut out = open_output(output.as_ref()).map_err(|e| format!("output: {e}"))?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| format!("output: {e}"))?;
    eprintln!(
        "numerical: {} iterations, traffic: {} iterations",
        optima.numerical.iterations, optima.traffic.iterations
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, args } => run(config, args).map(|converged| if converged { 0 } else { 2 }),
        Command::Reference { output } => reference(output).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
