use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use v1sal_core::color::{Channel, RgbImage};
use v1sal_core::pipeline::{Output, Pipeline, ResponseCache};
use v1sal_core::wavelet::Orientation;
use v1sal_core::Plane;

use crate::config::RunConfig;
use crate::dataset::{Dataset, ImageEntry};
use crate::formats::{write_map, write_pyramid};
use crate::imageio::{load_rgb, save_map_png};
use crate::pool::map_ordered;
use crate::runlog::{ItemLog, RunLog};

#[derive(Debug, Clone)]
pub struct SaliencyArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
    /// Per-step firing rates of one hypercolumn, as CSV.
    pub trace: Option<PathBuf>,
    /// Hypercolumn to trace, in working-resolution pixels (default: center).
    pub trace_at: Option<(usize, usize)>,
    /// Also dump every opponent-channel wavelet pyramid (`.v1sp`).
    pub dump_pyramids: bool,
}

/// Excitatory rate of one unit at one step.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub image: String,
    pub channel: &'static str,
    pub polarity: &'static str,
    pub step: usize,
    pub t: f64,
    pub scale: usize,
    pub orientation: &'static str,
    pub x: usize,
    pub y: usize,
    pub rate: f64,
}

/// Everything computed for one image.
pub struct Computed {
    pub output: Output,
    pub simulations: usize,
    pub trace: Vec<TraceRow>,
}

/// Runs the pipeline on one image, optionally tracing one hypercolumn.
pub fn compute(
    pipeline: &Pipeline,
    id: &str,
    img: &RgbImage,
    trace_at: Option<Option<(usize, usize)>>,
) -> Result<Computed> {
    let prepared = pipeline.prepare(img)?;
    let mut cache = ResponseCache::default();
    let mut trace = Vec::new();
    let consp = match trace_at {
        None => pipeline.conspicuity(&prepared, &mut cache)?,
        Some(at) => {
            let (w, h) = prepared.working_dims;
            let (x, y) = at.unwrap_or((w / 2, h / 2));
            anyhow::ensure!(
                x < w && y < h,
                "trace point ({x}, {y}) lies outside the {w}×{h} working grid"
            );
            let mut steps = [0usize; 2];
            pipeline.conspicuity_observed(&prepared, &mut cache, &mut |channel, on, state, gx| {
                let step = &mut steps[on as usize];
                *step += 1;
                let dims = state.dims;
                for s in 1..=dims.scales {
                    for o in Orientation::ALL {
                        trace.push(TraceRow {
                            image: id.to_owned(),
                            channel: channel.name(),
                            polarity: if on { "on" } else { "off" },
                            step: *step,
                            t: state.t,
                            scale: s,
                            orientation: o.name(),
                            x,
                            y,
                            rate: gx[dims.index(x, y, s, o)],
                        });
                    }
                }
            })?
        }
    };
    // Steps restart with each run; renumber from the recorded times.
    for row in &mut trace {
        row.step = (row.t / pipeline.config().lattice.dt).round() as usize;
    }
    let output = pipeline.integrate(&consp, pipeline.config().fusion)?;
    Ok(Computed {
        output,
        simulations: consp.simulations,
        trace,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SaliencySummary {
    pub written: Vec<String>,
    pub failed: Vec<(String, String)>,
}

fn write_outputs(out: &Path, id: &str, c: &Computed, channel_maps: bool) -> Result<()> {
    write_map(&out.join("maps").join(format!("{id}.v1sf")), &c.output.saliency.values)?;
    save_map_png(&out.join("png").join(format!("{id}.png")), &c.output.saliency.values)?;
    if channel_maps {
        for (ch, map) in Channel::ALL.iter().zip(&c.output.channel_maps) {
            let stem = format!("{id}_{}", ch.name());
            write_map(&out.join("channels").join(format!("{stem}.v1sf")), map)?;
            save_map_png(&out.join("channels").join(format!("{stem}.png")), map)?;
        }
    }
    Ok(())
}

fn process(pipeline: &Pipeline, cfg: &RunConfig, args: &SaliencyArgs, e: &ImageEntry) -> Result<Computed> {
    let img = load_rgb(&e.path)?;
    if args.dump_pyramids {
        let prepared = pipeline.prepare(&img)?;
        for (ch, pyr) in Channel::ALL.iter().zip(&prepared.pyramids) {
            write_pyramid(
                &args.out.join("pyramids").join(format!("{}_{}.v1sp", e.id, ch.name())),
                pyr,
            )?;
        }
    }
    let traced = args.trace.as_ref().map(|_| args.trace_at);
    let c = compute(pipeline, &e.id, &img, traced)?;
    if c.output.diagnostics.degenerate_map {
        log::warn!("{}: saliency map is constant", e.id);
    }
    write_outputs(&args.out, &e.id, &c, cfg.run.channel_maps)?;
    Ok(c)
}

pub fn run(cfg: &RunConfig, args: &SaliencyArgs) -> Result<SaliencySummary> {
    let dataset = Dataset::scan(&args.dataset)?;
    let mut dirs = vec!["maps", "png"];
    if cfg.run.channel_maps {
        dirs.push("channels");
    }
    if args.dump_pyramids {
        dirs.push("pyramids");
    }
    for d in dirs {
        std::fs::create_dir_all(args.out.join(d))
            .with_context(|| format!("creating {}", args.out.join(d).display()))?;
    }
    let mut log = RunLog::start("saliency", cfg);
    let pipeline = Pipeline::new(cfg.pipeline.clone())?;
    let results = map_ordered(cfg.run.workers, &dataset.images, |_, e| {
        let t0 = Instant::now();
        let r = process(&pipeline, cfg, args, e);
        (r, t0.elapsed().as_secs_f64())
    })?;

    let mut summary = SaliencySummary {
        written: Vec::new(),
        failed: Vec::new(),
    };
    let mut trace = Vec::new();
    for (e, (r, seconds)) in dataset.images.iter().zip(results) {
        match r {
            Ok(c) => {
                log.items.push(ItemLog {
                    id: e.id.clone(),
                    seconds,
                    simulations: c.simulations,
                    error: None,
                });
                trace.extend(c.trace);
                summary.written.push(e.id.clone());
            }
            Err(err) => {
                log::error!("{}: {err:#}", e.id);
                log.items.push(ItemLog {
                    id: e.id.clone(),
                    seconds,
                    simulations: 0,
                    error: Some(format!("{err:#}")),
                });
                summary.failed.push((e.id.clone(), format!("{err:#}")));
            }
        }
    }
    if let Some(path) = &args.trace {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        for row in &trace {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    log.finish(&args.out.join("run.json"))?;
    Ok(summary)
}

/// Reads the maps written by [`run`].
pub fn load_map(maps_dir: &Path, id: &str) -> Result<Plane> {
    crate::formats::read_map(&maps_dir.join(format!("{id}.v1sf")))
}
