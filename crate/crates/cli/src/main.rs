use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use handover_cli::{cmd_eval, cmd_generate, cmd_synth, cmd_train, ControllerChoice, TrainFlags};
use handover_core::ForwardMode;

#[derive(Parser)]
#[command(
    name = "handover",
    version,
    about = "Train, replay and evaluate bimanual handover controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Literal,
    #[value(name = "explicit_duration")]
    ExplicitDuration,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Hsmm,
    Baseline,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a directory of demonstration CSVs.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "explicit_duration")]
        mode: Mode,
        /// Resampling step in seconds (default: spacing of the first demo).
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Replay a receiver stream through a controller, writing per-step CSV.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        stream: PathBuf,
        #[arg(long, value_enum)]
        controller: Which,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-out comparison of the HSMM and baseline controllers.
    Eval {
        #[arg(long)]
        model_config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Write synthetic demonstrations.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train {
            data,
            out,
            mode,
            dt,
        } => {
            let mode = match mode {
                Mode::Literal => ForwardMode::Literal,
                Mode::ExplicitDuration => ForwardMode::ExplicitDuration,
            };
            cmd_train(&data, &out, TrainFlags { mode, dt })?;
        }
        Command::Generate {
            model,
            stream,
            controller,
            out,
        } => {
            let c = match controller {
                Which::Hsmm => ControllerChoice::Hsmm,
                Which::Baseline => ControllerChoice::Baseline,
            };
            cmd_generate(&model, &stream, c, &out)?;
        }
        Command::Eval {
            model_config,
            data,
            out,
            jobs,
        } => {
            cmd_eval(&model_config, &data, &out, jobs)?;
        }
        Command::Synth {
            config,
            count,
            seed,
            out,
        } => {
            cmd_synth(&config, count, seed, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
