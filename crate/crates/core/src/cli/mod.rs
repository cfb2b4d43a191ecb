//! Command-line frontend: argument parsing, config resolution and error reporting.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::synth::SynthConfig;
use crate::trainer::TrainConfig;
use config::{resolve, AlignConfig, DemoConfig, EvalConfig, FitConfig, FuseConfig, KeyValues, RenderConfig, SmoothConfig};

/// Options every command accepts.
#[derive(Args, Debug, Default)]
pub struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key, `--set key=value`; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub sets: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a synthetic subject into a dataset directory.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Rescale source skeletons to the reference body proportions.
    AlignPose {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recompute scales per source frame.
        #[arg(long)]
        per_frame: bool,
    },
    /// Temporally smooth a pose parameter sequence.
    Smooth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Blend a rendered head into a frame.
    Fuse {
        /// Rendered head image.
        #[arg(long)]
        src: PathBuf,
        /// Frame receiving the head.
        #[arg(long)]
        dst: PathBuf,
        #[arg(long)]
        landmarks_src: PathBuf,
        #[arg(long)]
        landmarks_dst: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Fit body parameters to a dataset's 2D keypoints.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an avatar on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Pose file to use instead of the dataset's poses.
        #[arg(long)]
        poses: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a trained avatar for given poses and cameras.
    Render {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        cameras: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted images against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sampler convergence on Gaussian toy data.
    DdimDemo {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Parser, Debug)]
#[command(name = "splat-avatar", version, about = "Gaussian-splat avatar toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

fn resolved<C: KeyValues>(name: &str, cfg: C, common: &Common, out: &mut String) -> Result<C> {
    let cfg = resolve(cfg, common.config.as_deref(), &common.sets, common.seed)?;
    out.push_str(&format!("# {name} config\n"));
    out.push_str(&cfg.to_kv());
    Ok(cfg)
}

/// Runs one command and returns its report.
pub fn run(command: &Command, common: &Common) -> Result<String> {
    let mut out = String::new();
    let report = match command {
        Command::Synth { out: dir } => {
            let cfg = resolved("synth", SynthConfig::default(), common, &mut out)?;
            commands::synth(&cfg, dir)?
        }
        Command::AlignPose { reference, source, out: path, per_frame } => {
            let mut cfg = resolved("align-pose", AlignConfig::default(), common, &mut out)?;
            cfg.per_frame |= *per_frame;
            commands::align_pose(&cfg, reference, source, path)?
        }
        Command::Smooth { input, out: path } => {
            let cfg = resolved("smooth", SmoothConfig::default(), common, &mut out)?;
            commands::smooth(&cfg, input, path)?
        }
        Command::Fuse {
            src,
            dst,
            landmarks_src,
            landmarks_dst,
            threshold,
            out: path,
            mask_out,
        } => {
            let mut sets = common.sets.clone();
            if let Some(t) = threshold {
                sets.push(format!("threshold={t}"));
            }
            let common = Common {
                config: common.config.clone(),
                sets,
                seed: common.seed,
            };
            let cfg = resolved("fuse", FuseConfig::default(), &common, &mut out)?;
            let paths = commands::FusePaths {
                src,
                dst,
                landmarks_src,
                landmarks_dst,
                out: path,
                mask_out: mask_out.as_deref(),
            };
            commands::fuse(&cfg, &paths)?
        }
        Command::Fit { data, out: path } => {
            let cfg = resolved("fit", FitConfig::default(), common, &mut out)?;
            commands::fit_cmd(&cfg, data, path)?
        }
        Command::Train { data, poses, out: dir } => {
            let cfg = resolved("train", TrainConfig::default(), common, &mut out)?;
            commands::train_cmd(&cfg, data, poses.as_deref(), dir)?
        }
        Command::Render {
            checkpoint,
            poses,
            cameras,
            out: dir,
        } => {
            let cfg = resolved("render", RenderConfig::default(), common, &mut out)?;
            commands::render_cmd(&cfg, checkpoint, poses, cameras, dir)?
        }
        Command::Eval { pred, gt, out: path } => {
            resolved("eval", EvalConfig, common, &mut out)?;
            commands::eval_cmd(pred, gt, path)?
        }
        Command::DdimDemo { out: path } => {
            let cfg = resolved("ddim-demo", DemoConfig::default(), common, &mut out)?;
            commands::ddim_demo(&cfg, path)?
        }
    };
    out.push_str(&report);
    Ok(out)
}

/// Parses `args`, runs the command and returns the process exit code.
/// Failures print a single `E_CODE: message` line on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match Cli::try_parse_from(args) {
        Ok(inv) => inv,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("E_USAGE: {first}");
            return 2;
        }
    };
    match run(&inv.command, &inv.common) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(e) => {
            let msg = e.detail().replace('\n', " ");
            eprintln!("{}: {msg}", e.code());
            e.exit_code()
        }
    }
}
