use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use v1sal::commands::ablation::{self, AblationArgs};
use v1sal::commands::evaluate::{self, EvaluateArgs};
use v1sal::commands::psychophysics::{self, Condition, PsychophysicsArgs};
use v1sal::commands::saliency::{self, SaliencyArgs};
use v1sal::commands::stimgen::{self, StimgenArgs};
use v1sal::config::{Overrides, RunConfig};
use v1sal_core::integrate::Fusion;
use v1sal_core::stimgen::Canvas;

#[derive(Parser)]
#[command(name = "v1sal", version, about = "Saliency maps from a firing-rate model of V1")]
struct Cli {
    /// TOML run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    fusion: Option<FusionArg>,
    /// Seed for the lattice noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pixels per degree of visual angle.
    #[arg(long, global = true)]
    ppd: Option<f64>,
    /// Images processed in parallel.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log per-item progress.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FusionArg {
    Inverse,
    Max,
    Argmax,
}

impl From<FusionArg> for Fusion {
    fn from(f: FusionArg) -> Self {
        match f {
            FusionArg::Inverse => Fusion::Inverse,
            FusionArg::Max => Fusion::Max,
            FusionArg::Argmax => Fusion::Argmax,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute saliency maps for every image of a dataset.
    Saliency {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write per-step firing rates of one hypercolumn to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Hypercolumn to trace as `x,y` at working resolution.
        #[arg(long, value_parser = parse_point)]
        trace_at: Option<(usize, usize)>,
        /// Also write the per-channel maps.
        #[arg(long)]
        channel_maps: bool,
        /// Also write the wavelet pyramids of every channel.
        #[arg(long)]
        dump_pyramids: bool,
    },
    /// Score saliency maps against a dataset's fixations.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory of `.v1sf` maps.
        #[arg(long)]
        maps: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Contrast sweeps over generated search displays.
    Psychophysics {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the three fusion modes on one dataset.
    Ablation {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render search displays with target masks.
    Stimgen {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Instead write a dataset of N displays with synthetic fixations.
        #[arg(long, value_name = "N")]
        synthetic: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Conditions to run (default: all).
    #[arg(long = "condition", value_delimiter = ',')]
    conditions: Vec<Condition>,
    /// Only these levels (default: every tabulated level).
    #[arg(long = "level", value_delimiter = ',')]
    levels: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Display size as `WIDTHxHEIGHT`.
    #[arg(long, value_parser = parse_size, default_value = "1280x1024")]
    canvas: (usize, usize),
}

impl SweepArgs {
    fn conditions(&self) -> Vec<Condition> {
        if self.conditions.is_empty() {
            Condition::ALL.to_vec()
        } else {
            self.conditions.clone()
        }
    }

    fn canvas(&self, ppd: f64) -> Canvas {
        Canvas {
            width: self.canvas.0,
            height: self.canvas.1,
            ppd,
        }
    }
}

fn parse_pair(s: &str, sep: char) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(sep)
        .with_context(|| format!("expected two numbers separated by '{sep}'"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_point(s: &str) -> Result<(usize, usize)> {
    parse_pair(s, ',')
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = parse_pair(s, 'x')?;
    if w == 0 || h == 0 {
        bail!("canvas dimensions must be positive");
    }
    Ok((w, h))
}

fn run(cli: Cli) -> Result<bool> {
    let overrides = Overrides {
        fusion: cli.fusion.map(Fusion::from),
        seed: cli.seed,
        ppd: cli.ppd,
        workers: cli.workers,
    };
    let mut cfg = RunConfig::resolve(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Saliency {
            dataset,
            out,
            trace,
            trace_at,
            channel_maps,
            dump_pyramids,
        } => {
            cfg.run.channel_maps |= channel_maps;
            let s = saliency::run(
                &cfg,
                &SaliencyArgs {
                    dataset,
                    out,
                    trace,
                    trace_at,
                    dump_pyramids,
                },
            )?;
            println!("{} maps written, {} failed", s.written.len(), s.failed.len());
            Ok(s.failed.is_empty())
        }
        Command::Evaluate { dataset, maps, out } => {
            let r = evaluate::run(&cfg, &EvaluateArgs { dataset, maps, out })?;
            if let Some(m) = &r.mean {
                for (name, v) in v1sal_core::metrics::MetricScores::NAMES.iter().zip(m.values()) {
                    println!("{name:>8} {v:.4}");
                }
            }
            Ok(r.exceptions.is_empty())
        }
        Command::Psychophysics { sweep, out } => {
            let args = PsychophysicsArgs {
                conditions: sweep.conditions(),
                seeds: sweep.seeds.clone(),
                levels: sweep.levels.clone(),
                canvas: sweep.canvas(cfg.pipeline.ppd),
                out: Some(out),
            };
            let r = psychophysics::run(&cfg, &args)?;
            for s in &r.summaries {
                let rho = s.rho_in_mask.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                println!("{:<32} seed {:<3} rho {rho}", s.condition, s.seed);
            }
            Ok(r.summaries.iter().all(|s| s.error.is_none()))
        }
        Command::Ablation { dataset, out } => {
            let r = ablation::run(&cfg, &AblationArgs { dataset, out })?;
            println!(
                "{} of {} images differ across all modes",
                r.pairwise_distinct,
                r.images.len()
            );
            Ok(true)
        }
        Command::Stimgen { sweep, synthetic, out } => {
            let canvas = sweep.canvas(cfg.pipeline.ppd);
            match synthetic {
                Some(n) => {
                    stimgen::synthetic_dataset(&out, n, canvas, sweep.seeds[0])?;
                    println!("{n} synthetic images written");
                }
                None => {
                    let written = stimgen::run(&StimgenArgs {
                        conditions: sweep.conditions(),
                        levels: sweep.levels.clone(),
                        seeds: sweep.seeds.clone(),
                        canvas,
                        out,
                    })?;
                    println!("{} stimuli written", written.len());
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
