use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use v1sal_core::integrate::Fusion;
use v1sal_core::metrics::MetricScores;
use v1sal_core::pipeline::{Pipeline, ResponseCache};
use v1sal_core::Plane;

use super::evaluate::{evaluate_maps, MetricReport};
use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::formats::{read_map, write_map};
use crate::imageio::{load_rgb, save_map_png};
use crate::pool::map_ordered;
use crate::runlog::{ItemLog, RunLog};

#[derive(Debug, Clone)]
pub struct AblationArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub mode: &'static str,
    pub metric: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageChecksums {
    pub id: String,
    /// SHA-256 of the float map, per mode in [`Fusion::ALL`] order.
    pub checksums: Vec<String>,
    /// Number of different maps among the modes.
    pub distinct: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub modes: Vec<(&'static str, MetricReport)>,
    /// Dataset means, one row per (mode, metric).
    pub table: Vec<TableRow>,
    pub images: Vec<ImageChecksums>,
    /// Images whose modes all produced different maps.
    pub pairwise_distinct: usize,
}

pub fn checksum(map: &Plane) -> String {
    let mut h = Sha256::new();
    for v in map.as_slice() {
        h.update(v.to_le_bytes());
    }
    format!("{:x}", h.finalize())
}

fn mode_dir(out: &Path, f: Fusion) -> PathBuf {
    out.join(f.name())
}

/// One lattice simulation per image, integrated under every fusion mode.
fn process(pipeline: &Pipeline, path: &Path, id: &str, out: &Path) -> Result<(Vec<String>, usize)> {
    let img = load_rgb(path)?;
    let prepared = pipeline.prepare(&img)?;
    let consp = pipeline.conspicuity(&prepared, &mut ResponseCache::default())?;
    let mut sums = Vec::with_capacity(Fusion::ALL.len());
    for f in Fusion::ALL {
        let map = pipeline.integrate(&consp, f)?.saliency.values;
        let dir = mode_dir(out, f);
        write_map(&dir.join("maps").join(format!("{id}.v1sf")), &map)?;
        save_map_png(&dir.join("png").join(format!("{id}.png")), &map)?;
        sums.push(checksum(&map));
    }
    Ok((sums, consp.simulations))
}

pub fn run(cfg: &RunConfig, args: &AblationArgs) -> Result<AblationReport> {
    let dataset = Dataset::scan(&args.dataset)?;
    dataset.require_fixations()?;
    for f in Fusion::ALL {
        for d in ["maps", "png"] {
            let dir = mode_dir(&args.out, f).join(d);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let mut log = RunLog::start("ablation", cfg);
    let pipeline = Pipeline::new(cfg.pipeline.clone())?;
    let results = map_ordered(cfg.run.workers, &dataset.images, |_, e| {
        let t0 = Instant::now();
        (
            process(&pipeline, &e.path, &e.id, &args.out),
            t0.elapsed().as_secs_f64(),
        )
    })?;

    let mut images = Vec::new();
    for (e, (r, seconds)) in dataset.images.iter().zip(results) {
        let (simulations, error) = match r {
            Ok((sums, sims)) => {
                let mut unique = sums.clone();
                unique.sort();
                unique.dedup();
                images.push(ImageChecksums {
                    id: e.id.clone(),
                    checksums: sums,
                    distinct: unique.len(),
                });
                (sims, None)
            }
            Err(err) => {
                log::error!("{}: {err:#}", e.id);
                (0, Some(format!("{err:#}")))
            }
        };
        log.items.push(ItemLog {
            id: e.id.clone(),
            seconds,
            simulations,
            error,
        });
    }

    let mut modes = Vec::new();
    let mut table = Vec::new();
    for f in Fusion::ALL {
        let dir = mode_dir(&args.out, f).join("maps");
        let maps: Vec<Option<Plane>> = dataset
            .images
            .iter()
            .map(|e| read_map(&dir.join(format!("{}.v1sf", e.id))).ok())
            .collect();
        let report = evaluate_maps(cfg, &dataset, &maps)?;
        if let Some(mean) = &report.mean {
            for (metric, value) in MetricScores::NAMES.iter().zip(mean.values()) {
                table.push(TableRow {
                    mode: f.name(),
                    metric,
                    value,
                });
            }
        }
        modes.push((f.name(), report));
    }
    let report = AblationReport {
        modes,
        table,
        pairwise_distinct: images.iter().filter(|i| i.distinct == Fusion::ALL.len()).count(),
        images,
    };
    write_report(&args.out, &report)?;
    log.finish(&args.out.join("run.json"))?;
    Ok(report)
}

/// `ablation.csv` (modes as rows, metrics as columns), `ablation_long.csv`
/// and `ablation.json`.
pub fn write_report(out: &Path, report: &AblationReport) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("ablation.csv"))?;
    let mut header = vec!["mode"];
    header.extend(MetricScores::NAMES);
    w.write_record(&header)?;
    for (mode, r) in &report.modes {
        let mut rec = vec![mode.to_string()];
        match &r.mean {
            Some(m) => rec.extend(m.values().iter().map(|v| format!("{v:.6}"))),
            None => rec.extend(std::iter::repeat_n(String::new(), MetricScores::NAMES.len())),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join("ablation_long.csv"))?;
    for row in &report.table {
        w.serialize(row)?;
    }
    w.flush()?;
    std::fs::write(out.join("ablation.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}
