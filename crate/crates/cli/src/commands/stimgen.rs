use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use v1sal_core::metrics::FixationSet;
use v1sal_core::stimgen::{generate, Canvas, Item, Stimulus, StimulusSpec};

use super::psychophysics::Condition;
use crate::dataset::write_fixations_csv;
use crate::imageio::{save_mask_png, save_rgb};

#[derive(Debug, Clone)]
pub struct StimgenArgs {
    pub conditions: Vec<Condition>,
    /// Levels to render; every tabulated level of the condition when empty.
    pub levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub canvas: Canvas,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a StimulusSpec,
    items: &'a [Item],
}

/// Writes `images/<name>.png`, `masks/<name>.png` and `meta/<name>.json`.
pub fn write_stimulus(root: &Path, name: &str, stim: &Stimulus) -> Result<()> {
    for d in ["images", "masks", "meta"] {
        std::fs::create_dir_all(root.join(d)).with_context(|| format!("creating {}", root.join(d).display()))?;
    }
    save_rgb(&root.join("images").join(format!("{name}.png")), &stim.image)?;
    save_mask_png(&root.join("masks").join(format!("{name}.png")), &stim.target_mask())?;
    let meta = Sidecar {
        spec: &stim.spec,
        items: &stim.items,
    };
    std::fs::write(
        root.join("meta").join(format!("{name}.json")),
        serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(())
}

pub fn run(args: &StimgenArgs) -> Result<Vec<String>> {
    let mut written = Vec::new();
    for &seed in &args.seeds {
        for &c in &args.conditions {
            let levels = if args.levels.is_empty() {
                c.levels()
            } else {
                &args.levels[..]
            };
            for &level in levels {
                let spec = StimulusSpec {
                    params: c.params(level),
                    canvas: args.canvas,
                    seed,
                };
                let stim = generate(&spec).with_context(|| format!("{} at level {level}", c.name()))?;
                let name = format!("{}_{level}_s{seed}", c.name());
                write_stimulus(&args.out, &name, &stim)?;
                written.push(name);
            }
        }
    }
    Ok(written)
}

/// Conditions drawn for synthetic datasets; all have some colour or
/// orientation structure so that the fusion modes differ.
const SYNTHETIC_MIX: [Condition; 6] = [
    Condition::Orientation,
    Condition::Color(
        v1sal_core::stimgen::TargetHue::Red,
        v1sal_core::stimgen::ColorBackground::Achromatic,
    ),
    Condition::BrightnessDark,
    Condition::Color(
        v1sal_core::stimgen::TargetHue::Blue,
        v1sal_core::stimgen::ColorBackground::Achromatic,
    ),
    Condition::Size,
    Condition::Asymmetry(v1sal_core::stimgen::AsymmetryVariant::BarAmongCircles),
];

/// Canvas used by [`synthetic_dataset`]: half the default display at half
/// the resolution, so item layouts match the full-size displays.
pub fn synthetic_canvas() -> Canvas {
    Canvas {
        width: 640,
        height: 512,
        ppd: 16.0,
    }
}

/// Pseudo-observer fixations: half on the target, half scattered around
/// the display center.
fn synthetic_fixations(id: &str, stim: &Stimulus, rng: &mut ChaCha8Rng) -> Result<FixationSet> {
    let (w, h) = stim.dims();
    let target: Vec<usize> = stim
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == Stimulus::TARGET)
        .map(|(i, _)| i)
        .collect();
    let mut points = Vec::new();
    for _ in 0..10 {
        let i = target[rng.random_range(0..target.len())];
        points.push(((i % w) as f64, (i / w) as f64));
    }
    let nx = Normal::new(w as f64 / 2.0, w as f64 / 8.0)?;
    let ny = Normal::new(h as f64 / 2.0, h as f64 / 8.0)?;
    for _ in 0..10 {
        points.push((
            nx.sample(rng).clamp(0.0, w as f64 - 1.0),
            ny.sample(rng).clamp(0.0, h as f64 - 1.0),
        ));
    }
    Ok(FixationSet::new(id, w, h, points)?)
}

/// `n` search displays with masks and synthetic fixations, laid out as a
/// dataset directory.
pub fn synthetic_dataset(root: &Path, n: usize, canvas: Canvas, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let condition = SYNTHETIC_MIX[i % SYNTHETIC_MIX.len()];
        let levels = condition.levels();
        // Skip the first level, which is zero contrast for most kinds.
        let level = levels[rng.random_range(1..levels.len())];
        let spec = StimulusSpec {
            params: condition.params(level),
            canvas,
            seed: seed.wrapping_mul(1000).wrapping_add(i as u64),
        };
        let stim = generate(&spec).with_context(|| format!("synthetic image {i}"))?;
        let id = format!("img{i:02}");
        write_stimulus(root, &id, &stim)?;
        sets.push(synthetic_fixations(&id, &stim, &mut rng)?);
    }
    write_fixations_csv(&root.join("fixations.csv"), &sets)
}
