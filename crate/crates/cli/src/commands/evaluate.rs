use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use v1sal_core::metrics::{baseline_density, density_from_fixations, evaluate, FixationSet, GroundTruth, MetricScores};
use v1sal_core::Plane;

use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::pool::map_ordered;
use crate::runlog::{ItemLog, RunLog};

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub dataset: PathBuf,
    /// Directory of `<id>.v1sf` maps, as written by the saliency command.
    pub maps: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageScores {
    pub id: String,
    pub scores: MetricScores,
}

/// An image that could not be scored.
#[derive(Debug, Clone, Serialize)]
pub struct Exception {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub dataset: String,
    pub images: Vec<ImageScores>,
    /// Mean over the scored images.
    pub mean: Option<MetricScores>,
    pub exceptions: Vec<Exception>,
}

fn score_one(cfg: &RunConfig, sets: &[&FixationSet], i: usize, map: &Plane) -> Result<MetricScores> {
    let f = sets[i];
    let others: Vec<&FixationSet> = sets
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, s)| *s)
        .collect();
    let ppd = cfg.pipeline.ppd;
    let sigma = cfg.run.density_sigma_deg;
    let density = density_from_fixations(f, sigma, ppd)?;
    // Leave-one-out center bias: the image's own fixations stay out.
    let owned: Vec<FixationSet> = others.iter().map(|s| (*s).clone()).collect();
    let baseline = baseline_density(&owned, f.width, f.height, sigma, ppd)?;
    let gt = GroundTruth {
        fixations: f,
        density: &density,
        baseline: &baseline,
        pool: &others,
        trials: cfg.run.sauc_trials,
        seed: cfg.pipeline.lattice.seed.wrapping_add(i as u64),
    };
    Ok(evaluate(map, &gt)?)
}

/// Scores `maps` (one per dataset image, `None` when missing) against the
/// dataset's fixations.
pub fn evaluate_maps(cfg: &RunConfig, dataset: &Dataset, maps: &[Option<Plane>]) -> Result<MetricReport> {
    dataset.require_fixations()?;
    let sets: Vec<&FixationSet> = dataset.images.iter().map(|e| &dataset.fixations[&e.id]).collect();
    let indices: Vec<usize> = (0..dataset.images.len()).collect();
    let results = map_ordered(cfg.run.workers, &indices, |_, &i| match &maps[i] {
        Some(m) => score_one(cfg, &sets, i, m),
        None => Err(anyhow::anyhow!("no saliency map")),
    })?;
    let mut report = MetricReport {
        dataset: dataset.id.clone(),
        images: Vec::new(),
        mean: None,
        exceptions: Vec::new(),
    };
    for (e, r) in dataset.images.iter().zip(results) {
        match r {
            Ok(scores) => report.images.push(ImageScores {
                id: e.id.clone(),
                scores,
            }),
            Err(err) => {
                log::warn!("{}: not scored: {err:#}", e.id);
                report.exceptions.push(Exception {
                    id: e.id.clone(),
                    reason: format!("{err:#}"),
                });
            }
        }
    }
    let rows: Vec<MetricScores> = report.images.iter().map(|s| s.scores).collect();
    report.mean = MetricScores::mean(&rows);
    Ok(report)
}

/// `metrics.csv` (one row per image, then the mean) and `metrics.json`.
pub fn write_report(out: &Path, report: &MetricReport) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["image"];
    header.extend(MetricScores::NAMES);
    w.write_record(&header)?;
    let rows = report
        .images
        .iter()
        .map(|s| (s.id.as_str(), &s.scores))
        .chain(report.mean.iter().map(|m| ("mean", m)));
    for (id, scores) in rows {
        let mut rec = vec![id.to_owned()];
        rec.extend(scores.values().iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(out.join("metrics.json"), json)?;
    Ok(())
}

pub fn run(cfg: &RunConfig, args: &EvaluateArgs) -> Result<MetricReport> {
    let dataset = Dataset::scan(&args.dataset)?;
    let mut log = RunLog::start("evaluate", cfg);
    let maps: Vec<Option<Plane>> = dataset
        .images
        .iter()
        .map(|e| match super::saliency::load_map(&args.maps, &e.id) {
            Ok(m) => Some(m),
            Err(err) => {
                log::warn!("{}: {err:#}", e.id);
                None
            }
        })
        .collect();
    let report = evaluate_maps(cfg, &dataset, &maps)?;
    for e in &dataset.images {
        let error = report
            .exceptions
            .iter()
            .find(|x| x.id == e.id)
            .map(|x| x.reason.clone());
        log.items.push(ItemLog {
            id: e.id.clone(),
            seconds: 0.0,
            simulations: 0,
            error,
        });
    }
    write_report(&args.out, &report)?;
    log.finish(&args.out.join("run.json"))?;
    Ok(report)
}
