use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ays_rl::agents::AgentKind;
use ays_rl::env::NormState;
use ays_rl::harness::{
    evaluate_checkpoint, grid_sweep, sample_test_params, train, EvalOptions, GridMode, GridSpec,
    Preset, RunCheckpoint, RunConfig,
};
use ays_rl::{Error, Result};

#[derive(Parser)]
#[command(name = "ays-rl", version, about = "Train and inspect RL agents on the AYS model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write metrics, summary and checkpoint.
    Train {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        agent: Option<String>,
        /// Train only this seed; otherwise every seed from the config, each in `seed_<n>/`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        episodes: Option<u64>,
        /// Flat TOML run config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run frozen-policy episodes from a checkpoint.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: u64,
        /// Argmax actions for every agent kind.
        #[arg(long, conflicts_with = "stochastic")]
        greedy: bool,
        /// Exploratory actions (current ε, or policy samples).
        #[arg(long)]
        stochastic: bool,
        /// Start every episode at exactly (0.5, 0.5, 0.5).
        #[arg(long)]
        from_start: bool,
        /// Fix the parameters to one noisy draw at this variance.
        #[arg(long)]
        test_noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for trajectory CSVs; defaults to the checkpoint's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the initialization square and write a CSV matrix.
    Grid {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        #[arg(long)]
        stochastic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            preset,
            agent,
            seed,
            frames,
            episodes,
            config,
            out,
        } => {
            let preset = preset.map(|p| p.parse::<Preset>()).transpose()?;
            let mut cfg = match &config {
                Some(path) => RunConfig::load_with_preset(path, preset)?,
                None => RunConfig::new(preset.unwrap_or(Preset::Pb), AgentKind::Dqn),
            };
            if let Some(kind) = agent {
                cfg.agent = kind.parse()?;
            }
            if let Some(f) = frames {
                cfg.frame_limit = f;
            }
            if episodes.is_some() {
                cfg.episode_limit = episodes;
            }
            if out.is_some() {
                cfg.output_dir = out;
            }
            cfg.validate()?;
            let dir = cfg
                .output_dir
                .clone()
                .ok_or_else(|| Error::Config("an output directory is required (--out)".into()))?;
            let runs: Vec<(u64, PathBuf)> = match seed {
                Some(s) => vec![(s, dir)],
                None => cfg
                    .seeds
                    .iter()
                    .map(|&s| (s, dir.join(format!("seed_{s}"))))
                    .collect(),
            };
            for (s, d) in runs {
                let result = train(&cfg, s, Some(&d))?;
                print_json(&result.summary);
            }
            Ok(())
        }
        Command::Evaluate {
            checkpoint,
            episodes,
            greedy,
            stochastic,
            from_start,
            test_noise,
            seed,
            out,
        } => {
            let ckpt = RunCheckpoint::load(&checkpoint)?;
            let fixed_params = test_noise
                .map(|v| sample_test_params(&ckpt.config.env.params, v, seed))
                .transpose()?;
            let opts = EvalOptions {
                episodes,
                greedy: match (greedy, stochastic) {
                    (true, _) => Some(true),
                    (_, true) => Some(false),
                    _ => None,
                },
                start: from_start.then_some(NormState::START),
                fixed_params,
                seed,
                trajectory_dir: Some(out.unwrap_or_else(|| parent_dir(&checkpoint))),
            };
            let summary = evaluate_checkpoint(&ckpt, &ckpt.config, &opts)?;
            print_json(&summary);
            Ok(())
        }
        Command::Grid {
            checkpoint,
            mode,
            resolution,
            stochastic,
            out,
        } => {
            let mode: GridMode = mode.parse()?;
            let ckpt = RunCheckpoint::load(&checkpoint)?;
            let mut agent = ckpt.restore_agent()?;
            let result = grid_sweep(
                agent.as_mut(),
                &ckpt.config.env,
                &GridSpec::with_resolution(resolution),
                mode,
                !stochastic,
            )?;
            let dir = out.unwrap_or_else(|| parent_dir(&checkpoint));
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let path = dir.join(result.file_name());
            result.write_csv(&path)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Numeric(_) | Error::Integration { .. } => 3,
                _ => 1,
            })
        }
    }
}
