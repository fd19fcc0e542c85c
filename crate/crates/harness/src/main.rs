use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use echoes::training::Method;
use echoes_harness::run::print_summary;
use echoes_harness::{
    evaluate_saved, generate_dataset, run_experiment, run_sweep, write_evaluation,
    ExperimentConfig, HarnessError, Result,
};

#[derive(Parser)]
#[command(name = "echoes", version, about = "Train and compare debiasing methods on multi-bias data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic train/test splits and a manifest.
    Generate(Common),
    /// Train every configured run and seed.
    Train(Common),
    /// Repeat training over the config's sweep grid.
    Sweep(Common),
    /// Score a saved model on the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// A `model.json` written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keep only this method's run.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Base seed for every run (and the synthetic data for `generate`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (an output file for `evaluate`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn load(common: &Common, out_is_dir: bool) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let out = if out_is_dir { common.out.clone() } else { None };
    config.apply_overrides(common.method, common.seed, out);
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let stdout = &mut std::io::stdout();
    let print_err = |e: std::io::Error| HarnessError::Io {
        path: "stdout".into(),
        source: e,
    };
    match cli.command {
        Command::Generate(common) => {
            let mut config = match &common.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(out) = &common.out {
                config.output_dir = out.clone();
            }
            let manifest = generate_dataset(&config, common.seed)?;
            for f in &manifest.files {
                println!("{}: {} rows, sha256 {}", f.file, f.rows, f.sha256);
            }
        }
        Command::Train(common) => {
            let config = load(&common, true)?;
            let report = run_experiment(&config)?;
            print_summary(stdout, &report.summary).map_err(print_err)?;
            println!("results in {}", config.output_dir.display());
        }
        Command::Sweep(common) => {
            let config = load(&common, true)?;
            if config.sweep.is_none() {
                return Err(HarnessError::Usage("config has no `sweep` section".into()));
            }
            let report = run_sweep(&config)?;
            for p in &report.points {
                println!("{} = {}", report.parameter, p.value);
                print_summary(stdout, &p.summary).map_err(print_err)?;
            }
        }
        Command::Evaluate { common, model } => {
            let config = load(&common, false)?;
            let eval = evaluate_saved(&config, &model)?;
            let text = serde_json::to_string_pretty(&eval).expect("evaluation serializes");
            println!("{text}");
            if let Some(out) = &common.out {
                write_evaluation(Path::new(out), &eval)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Usage(_) | HarnessError::Core(echoes::Error::Config(_)) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
