use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levylab_cli::config::ExperimentConfig;
use levylab_cli::experiments::CATALOG;
use levylab_core::{Dynamics, LevyModel};

#[derive(Parser)]
#[command(name = "levylab", about = "Experiment runner for conditioned Lévy path laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the experiment catalog.
    List,
    /// Validate a model JSON file and print its derived quantities.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
}

fn validate_model(path: &PathBuf) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path)?;
    let dynamics: Dynamics = serde_json::from_str(&text)?;
    let model = LevyModel::validate(dynamics)?;
    let d = model.dynamics();
    println!("drift        {}", d.drift);
    println!("sigma        {}", d.sigma);
    println!("jump parts   {}", d.jumps.len());
    println!("mean         {}", d.mean());
    println!("theta        {}", model.theta());
    println!("tilted mean  {}", model.tilted_mean());
    println!("dual theta   {}", model.dual()?.theta());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            // Unknown-experiment errors should surface before any sampling,
            // with the catalog attached.
            match ExperimentConfig::from_path(&config).map(|c| c.validate()) {
                Ok(Ok(cfg)) if levylab_cli::experiments::find_experiment(&cfg.experiment).is_none() => {
                    eprintln!("{}", levylab_cli::unknown_experiment_message(&cfg.experiment));
                    return ExitCode::from(2);
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                Ok(Err(e)) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                Ok(Ok(_)) => {}
            }
            match levylab_cli::execute(&config) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::List => {
            for e in CATALOG {
                println!("{:26} {}", e.name, e.description.split_whitespace().collect::<Vec<_>>().join(" "));
            }
            ExitCode::SUCCESS
        }
        Command::Validate { model } => match validate_model(&model) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
