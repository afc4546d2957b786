//! `tmkd`: train teachers and students, distill, evaluate, and render
//! activation maps and reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tmkd", version, about = "Tsetlin Machine knowledge distillation experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// noisy-xor, an MNIST-family name (with --data-dir), or imdb/text.
    #[arg(long, global = true, value_name = "NAME")]
    pub dataset: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for the repetitions.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_name = "BOOL", action = clap::ArgAction::Set)]
    pub deterministic: Option<bool>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Dkd,
    Ckd,
    #[value(name = "baselines_only", alias = "baselines-only")]
    BaselinesOnly,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Teacher,
    Student,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one baseline for E_T + E_S epochs, saving the model at E_T and at the end.
    Train {
        #[arg(long, value_enum, default_value = "teacher")]
        role: Role,
        /// Also write the E_T checkpoint's soft labels for the training split.
        #[arg(long)]
        soft_labels: bool,
    },
    /// Distill from a saved teacher, or run the full K-seed protocol when no
    /// teacher is given.
    Distill {
        #[arg(long, value_name = "PATH")]
        teacher: Option<PathBuf>,
    },
    /// Accuracy of a saved model on both splits.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// For models trained on clause outputs: the teacher producing them.
        #[arg(long, value_name = "PATH")]
        teacher: Option<PathBuf>,
        /// Downsampling projection CSV applied after the teacher transform.
        #[arg(long, value_name = "PATH", requires = "teacher")]
        projection: Option<PathBuf>,
    },
    /// Render included-literal maps as PPM (red/green) and PGM.
    ActivationMap {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Image shape as HxW with H*W equal to the feature count.
        #[arg(long, value_name = "HxW")]
        shape: String,
    },
    /// Recompute summary.csv and summary.txt from the per-model CSVs in --out.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
