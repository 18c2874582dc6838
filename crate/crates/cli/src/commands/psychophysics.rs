use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use v1sal_core::metrics::{auc_full, spearman};
use v1sal_core::pipeline::{Pipeline, ResponseCache};
use v1sal_core::stimgen::{
    generate, AsymmetryVariant, BrightnessBackground, Canvas, ColorBackground, StimulusParams, StimulusSpec, TargetHue,
    ASYMMETRY_SCALES, BRIGHTNESS_LEVELS, COLOR_LEVELS, ORIENTATION_LEVELS, SIZE_LEVELS,
};
use v1sal_core::Plane;

use crate::config::RunConfig;
use crate::pool::map_ordered;
use crate::runlog::{ItemLog, RunLog};

/// One contrast sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    BrightnessDark,
    BrightnessBright,
    Color(TargetHue, ColorBackground),
    Size,
    Orientation,
    Asymmetry(AsymmetryVariant),
}

impl Condition {
    pub const ALL: [Condition; 10] = [
        Condition::BrightnessDark,
        Condition::BrightnessBright,
        Condition::Color(TargetHue::Red, ColorBackground::Achromatic),
        Condition::Color(TargetHue::Blue, ColorBackground::Achromatic),
        Condition::Color(TargetHue::Red, ColorBackground::SaturatedRed),
        Condition::Color(TargetHue::Blue, ColorBackground::SaturatedRed),
        Condition::Size,
        Condition::Orientation,
        Condition::Asymmetry(AsymmetryVariant::BarAmongCircles),
        Condition::Asymmetry(AsymmetryVariant::CircleAmongBarred),
    ];

    pub fn name(self) -> &'static str {
        use AsymmetryVariant::*;
        use ColorBackground::*;
        use TargetHue::*;
        match self {
            Condition::BrightnessDark => "brightness_dark",
            Condition::BrightnessBright => "brightness_bright",
            Condition::Color(Red, Achromatic) => "color_red_achromatic",
            Condition::Color(Blue, Achromatic) => "color_blue_achromatic",
            Condition::Color(Red, SaturatedRed) => "color_red_on_red",
            Condition::Color(Blue, SaturatedRed) => "color_blue_on_red",
            Condition::Size => "size",
            Condition::Orientation => "orientation",
            Condition::Asymmetry(BarAmongCircles) => "asymmetry_bar_among_circles",
            Condition::Asymmetry(CircleAmongBarred) => "asymmetry_circle_among_barred",
        }
    }

    pub fn levels(self) -> &'static [f64] {
        match self {
            Condition::BrightnessDark | Condition::BrightnessBright => &BRIGHTNESS_LEVELS,
            Condition::Color(..) => &COLOR_LEVELS,
            Condition::Size => &SIZE_LEVELS,
            Condition::Orientation => &ORIENTATION_LEVELS,
            Condition::Asymmetry(_) => &ASYMMETRY_SCALES,
        }
    }

    pub fn params(self, level: f64) -> StimulusParams {
        match self {
            Condition::BrightnessDark => StimulusParams::Brightness {
                delta: level,
                background: BrightnessBackground::Dark,
            },
            Condition::BrightnessBright => StimulusParams::Brightness {
                delta: level,
                background: BrightnessBackground::Bright,
            },
            Condition::Color(hue, background) => StimulusParams::Color {
                delta: level,
                hue,
                background,
            },
            Condition::Size => StimulusParams::Size { target_diameter: level },
            Condition::Orientation => StimulusParams::Orientation { delta_phi: level },
            Condition::Asymmetry(variant) => StimulusParams::Asymmetry { variant, scale: level },
        }
    }

    /// Correlation reported for human fixations on the same displays.
    pub fn reference_rho(self) -> Option<f64> {
        use ColorBackground::*;
        use TargetHue::*;
        match self {
            Condition::BrightnessDark => Some(0.986),
            Condition::BrightnessBright => Some(0.941),
            Condition::Color(Red, Achromatic) => Some(0.864),
            Condition::Color(Blue, Achromatic) => Some(0.944),
            Condition::Color(Red, SaturatedRed) => Some(0.106),
            Condition::Color(Blue, SaturatedRed) => Some(0.483),
            Condition::Size => Some(0.955),
            _ => None,
        }
    }
}

impl FromStr for Condition {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match Condition::ALL.iter().find(|c| c.name() == s) {
            Some(c) => Ok(*c),
            None => {
                let names: Vec<&str> = Condition::ALL.iter().map(|c| c.name()).collect();
                bail!("unknown condition {s:?}; expected one of {}", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsychophysicsArgs {
    pub conditions: Vec<Condition>,
    /// Each seed places the items anew and reseeds the lattice noise.
    pub seeds: Vec<u64>,
    /// Restrict every condition to these levels; all levels when empty.
    pub levels: Vec<f64>,
    pub canvas: Canvas,
    pub out: Option<PathBuf>,
}

/// Saliency statistics of one display.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub condition: &'static str,
    pub seed: u64,
    pub level: f64,
    pub zero_contrast: bool,
    /// Mean saliency (z-units) inside the target footprint.
    pub in_mask: f64,
    pub out_of_mask: f64,
    /// Mean over all distractor footprints.
    pub distractor_mean: f64,
    /// Rank (1 = highest) of the target's peak among all item peaks.
    pub target_rank: usize,
    pub items: usize,
    /// AUC with the target pixels as fixations and the distractor pixels
    /// of the same display as the shuffled negatives.
    pub sauc: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSummary {
    pub condition: &'static str,
    pub seed: u64,
    /// Spearman ρ between level and in-mask saliency.
    pub rho_in_mask: Option<f64>,
    pub rho_sauc: Option<f64>,
    pub reference_rho: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsychReport {
    pub records: Vec<LevelRecord>,
    pub summaries: Vec<ConditionSummary>,
    pub seconds: f64,
}

impl PsychReport {
    pub fn summary(&self, condition: Condition, seed: u64) -> Option<&ConditionSummary> {
        self.summaries
            .iter()
            .find(|s| s.condition == condition.name() && s.seed == seed)
    }

    pub fn records_of(&self, condition: Condition, seed: u64) -> impl Iterator<Item = &LevelRecord> {
        self.records_of_name(condition.name(), seed)
    }

    fn records_of_name<'a>(&'a self, name: &'a str, seed: u64) -> impl Iterator<Item = &'a LevelRecord> {
        self.records
            .iter()
            .filter(move |r| r.condition == name && r.seed == seed)
    }
}

fn masked_mean(map: &Plane, mask: &[bool]) -> f64 {
    let (sum, n) = map
        .as_slice()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// One (condition, seed) sweep.
struct Sweep {
    condition: Condition,
    seed: u64,
    levels: Vec<f64>,
}

fn measure(pipeline: &Pipeline, sweep: &Sweep, k: usize, canvas: Canvas) -> Result<LevelRecord> {
    let t0 = Instant::now();
    let (condition, seed) = (sweep.condition, sweep.seed);
    let level = sweep.levels[k];
    let spec = StimulusSpec {
        params: condition.params(level),
        canvas,
        seed,
    };
    let stim = generate(&spec).with_context(|| format!("generating {} at level {level}", condition.name()))?;
    let out = pipeline.run(&stim.image, &mut ResponseCache::default())?;
    let map = &out.saliency.values;
    let labels = &stim.labels;
    let target: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
    let outside: Vec<bool> = target.iter().map(|t| !t).collect();
    let distractor: Vec<bool> = labels.iter().map(|&l| l > 1).collect();

    // Peak saliency per item label.
    let top = stim.items.iter().map(|i| i.label as usize).max().unwrap_or(0);
    let mut peaks = vec![f64::NEG_INFINITY; top + 1];
    for (&l, &v) in labels.iter().zip(map.as_slice()) {
        if l > 0 {
            let p = &mut peaks[l as usize];
            *p = p.max(v);
        }
    }
    let target_peak = peaks[1];
    let target_rank = 1 + stim
        .items
        .iter()
        .filter(|i| i.label != 1 && peaks[i.label as usize] > target_peak)
        .count();

    let values = map.as_slice();
    let pos: Vec<f64> = values
        .iter()
        .zip(&target)
        .filter(|(_, &t)| t)
        .map(|(v, _)| *v)
        .collect();
    let neg: Vec<f64> = values
        .iter()
        .zip(&distractor)
        .filter(|(_, &d)| d)
        .map(|(v, _)| *v)
        .collect();
    let sauc = (!pos.is_empty() && !neg.is_empty()).then(|| auc_full(&pos, &neg));

    Ok(LevelRecord {
        condition: condition.name(),
        seed,
        level,
        zero_contrast: spec.params.is_zero_contrast(),
        in_mask: masked_mean(map, &target),
        out_of_mask: masked_mean(map, &outside),
        distractor_mean: masked_mean(map, &distractor),
        target_rank,
        items: stim.items.len(),
        sauc,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

pub fn run_sweeps(cfg: &RunConfig, args: &PsychophysicsArgs) -> Result<PsychReport> {
    let t0 = Instant::now();
    let mut sweeps = Vec::new();
    for &seed in &args.seeds {
        for &condition in &args.conditions {
            let levels = condition
                .levels()
                .iter()
                .copied()
                .filter(|l| args.levels.is_empty() || args.levels.iter().any(|w| (w - l).abs() < 1e-9))
                .collect();
            sweeps.push(Sweep {
                condition,
                seed,
                levels,
            });
        }
    }
    let mut jobs = Vec::new();
    for (i, s) in sweeps.iter().enumerate() {
        jobs.extend((0..s.levels.len()).map(|k| (i, k)));
    }
    let mut pipelines = Vec::new();
    for &seed in &args.seeds {
        let mut pc = cfg.pipeline.clone();
        pc.lattice.seed = seed;
        pipelines.push((seed, Pipeline::new(pc)?));
    }
    let pipeline_for = |seed: u64| {
        &pipelines
            .iter()
            .find(|(s, _)| *s == seed)
            .expect("one pipeline per seed")
            .1
    };

    let results = map_ordered(cfg.run.workers, &jobs, |_, &(i, k)| {
        let s = &sweeps[i];
        let r = measure(pipeline_for(s.seed), s, k, args.canvas);
        if let Ok(rec) = &r {
            log::info!(
                "{} seed {} level {}: in {:.3} out {:.3} ({:.1} s)",
                rec.condition,
                rec.seed,
                rec.level,
                rec.in_mask,
                rec.out_of_mask,
                rec.seconds
            );
        }
        r
    })?;

    let mut report = PsychReport {
        records: Vec::new(),
        summaries: Vec::new(),
        seconds: 0.0,
    };
    let mut results = jobs.iter().zip(results).peekable();
    for (i, s) in sweeps.iter().enumerate() {
        let mut summary = ConditionSummary {
            condition: s.condition.name(),
            seed: s.seed,
            rho_in_mask: None,
            rho_sauc: None,
            reference_rho: s.condition.reference_rho(),
            error: None,
        };
        let mut records = Vec::new();
        while let Some(((_, _), r)) = results.next_if(|((j, _), _)| *j == i) {
            match r {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    log::error!("{} seed {}: {e:#}", s.condition.name(), s.seed);
                    summary.error.get_or_insert(format!("{e:#}"));
                }
            }
        }
        if summary.error.is_none() {
            let levels: Vec<f64> = records.iter().map(|r| r.level).collect();
            let ins: Vec<f64> = records.iter().map(|r| r.in_mask).collect();
            if levels.len() > 1 {
                summary.rho_in_mask = spearman(&levels, &ins).ok();
                let sa: Option<Vec<f64>> = records.iter().map(|r| r.sauc).collect();
                summary.rho_sauc = sa.and_then(|sa| spearman(&levels, &sa).ok());
            }
            report.records.extend(records);
        }
        report.summaries.push(summary);
    }
    report.seconds = t0.elapsed().as_secs_f64();
    Ok(report)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// `psychophysics.csv`, `correlations.csv` and `psychophysics.json`.
pub fn write_report(out: &Path, report: &PsychReport) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = csv::Writer::from_path(out.join("psychophysics.csv"))?;
    for r in &report.records {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join("correlations.csv"))?;
    w.write_record(["condition", "seed", "rho_in_mask", "rho_sauc", "reference_rho", "error"])?;
    for s in &report.summaries {
        w.write_record([
            s.condition.to_owned(),
            s.seed.to_string(),
            fmt_opt(s.rho_in_mask),
            fmt_opt(s.rho_sauc),
            fmt_opt(s.reference_rho),
            s.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    std::fs::write(out.join("psychophysics.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

pub fn run(cfg: &RunConfig, args: &PsychophysicsArgs) -> Result<PsychReport> {
    let mut log = RunLog::start("psychophysics", cfg);
    let report = run_sweeps(cfg, args)?;
    for s in &report.summaries {
        log.items.push(ItemLog {
            id: format!("{}/seed{}", s.condition, s.seed),
            seconds: report.records_of_name(s.condition, s.seed).map(|r| r.seconds).sum(),
            simulations: 0,
            error: s.error.clone(),
        });
    }
    if let Some(out) = &args.out {
        write_report(out, &report)?;
        log.finish(&out.join("run.json"))?;
    }
    Ok(report)
}
