//! Parametric feature-singleton search displays with target masks.
//!
//! Every stimulus places one target among distractors that differ from it
//! along one feature (brightness, saturation, size, orientation, or the
//! presence of a bar). Items are rasterized with 4×4 supersampled coverage
//! around integer pixel centres, so at zero contrast the target glyph is
//! pixel-identical to every distractor glyph.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::color::RgbImage;
use crate::plane::Plane;
use crate::{invalid, Error, Result};

pub const BRIGHTNESS_LEVELS: [f64; 7] = [0.0, 0.08, 0.17, 0.25, 0.33, 0.41, 0.5];
pub const COLOR_LEVELS: [f64; 7] = [0.0, 0.121, 0.246, 0.368, 0.528, 0.728, 1.0];
/// Target diameters (degrees); distractors are 2.5°.
pub const SIZE_LEVELS: [f64; 7] = [1.25, 1.67, 2.08, 2.5, 3.34, 4.17, 5.0];
/// Target rotation (degrees) relative to horizontal distractors.
pub const ORIENTATION_LEVELS: [f64; 7] = [0.0, 10.0, 20.0, 30.0, 42.0, 56.0, 90.0];
/// Item scale (degrees) of the search-asymmetry grids.
pub const ASYMMETRY_SCALES: [f64; 7] = [1.25, 1.67, 2.08, 2.5, 3.33, 4.17, 5.0];
/// Rows × columns of the asymmetry grid for each entry of
/// [`ASYMMETRY_SCALES`].
pub const ASYMMETRY_GRIDS: [(usize, usize); 7] = [(20, 26), (15, 20), (12, 16), (10, 13), (8, 10), (6, 8), (5, 7)];

/// Number of items in the free-placement displays.
pub const ITEM_COUNT: usize = 34;
/// Diameter (degrees) of disks and length of bars.
pub const ITEM_DIAMETER_DEG: f64 = 2.5;
/// Bar width (degrees).
pub const BAR_WIDTH_DEG: f64 = 0.5;
/// Placement attempts per item before giving up.
pub const MAX_PLACEMENT_RETRIES: usize = 1000;

const LEVEL_TOLERANCE: f64 = 1e-9;
const SUPERSAMPLE: usize = 4;

/// Output raster and viewing geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    /// Pixels per degree of visual angle.
    pub ppd: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: 1280,
            height: 1024,
            ppd: 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BrightnessBackground {
    /// `L_B = 1`, distractors from 0.5 up to 1.
    Bright,
    /// `L_B = 0`, distractors from 0.5 down to 0.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TargetHue {
    /// 0°.
    Red,
    /// 240°.
    Blue,
}

impl TargetHue {
    pub fn degrees(self) -> f64 {
        match self {
            TargetHue::Red => 0.0,
            TargetHue::Blue => 240.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ColorBackground {
    /// Mid grey.
    Achromatic,
    /// Fully saturated red.
    SaturatedRed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AsymmetryVariant {
    /// A circle crossed by a vertical bar among plain circles.
    BarAmongCircles,
    /// A plain circle among circles crossed by a vertical bar.
    CircleAmongBarred,
}

/// Feature dimension and level of a display.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum StimulusParams {
    Brightness {
        delta: f64,
        background: BrightnessBackground,
    },
    Color {
        delta: f64,
        hue: TargetHue,
        background: ColorBackground,
    },
    Size {
        target_diameter: f64,
    },
    Orientation {
        delta_phi: f64,
    },
    Asymmetry {
        variant: AsymmetryVariant,
        scale: f64,
    },
}

impl StimulusParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StimulusParams::Brightness { .. } => "brightness",
            StimulusParams::Color { .. } => "color",
            StimulusParams::Size { .. } => "size",
            StimulusParams::Orientation { .. } => "orientation",
            StimulusParams::Asymmetry { .. } => "asymmetry",
        }
    }

    /// The varied quantity.
    pub fn level(&self) -> f64 {
        match *self {
            StimulusParams::Brightness { delta, .. } => delta,
            StimulusParams::Color { delta, .. } => delta,
            StimulusParams::Size { target_diameter } => target_diameter,
            StimulusParams::Orientation { delta_phi } => delta_phi,
            StimulusParams::Asymmetry { scale, .. } => scale,
        }
    }

    /// Whether the target equals the distractors along the varied feature.
    pub fn is_zero_contrast(&self) -> bool {
        match *self {
            StimulusParams::Size { target_diameter } => (target_diameter - ITEM_DIAMETER_DEG).abs() < LEVEL_TOLERANCE,
            StimulusParams::Asymmetry { .. } => false,
            _ => self.level().abs() < LEVEL_TOLERANCE,
        }
    }

    fn kind_code(&self) -> u64 {
        match self {
            StimulusParams::Brightness { .. } => 1,
            StimulusParams::Color { .. } => 2,
            StimulusParams::Size { .. } => 3,
            StimulusParams::Orientation { .. } => 4,
            StimulusParams::Asymmetry { .. } => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StimulusSpec {
    pub params: StimulusParams,
    pub canvas: Canvas,
    pub seed: u64,
}

/// One placed item. `label` is 1 for the target and 2.. for distractors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Item {
    pub label: u16,
    pub center: (f64, f64),
    /// Radius of the footprint used for placement (pixels).
    pub radius: f64,
}

/// Rendered display.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub image: RgbImage,
    /// Per pixel: 0 for background, otherwise the label of the covering
    /// item's footprint.
    pub labels: Vec<u16>,
    pub items: Vec<Item>,
    pub spec: StimulusSpec,
}

impl Stimulus {
    pub const TARGET: u16 = 1;

    pub fn dims(&self) -> (usize, usize) {
        self.image.dims()
    }

    /// 1 inside the target footprint, 0 elsewhere.
    pub fn target_mask(&self) -> Plane {
        self.label_mask(Self::TARGET)
    }

    pub fn label_mask(&self, label: u16) -> Plane {
        let (w, h) = self.dims();
        Plane::from_vec(w, h, self.labels.iter().map(|&l| (l == label) as u8 as f64).collect())
            .expect("label map has image size")
    }

    /// Labels of all distractors.
    pub fn distractor_labels(&self) -> impl Iterator<Item = u16> + '_ {
        self.items.iter().map(|i| i.label).filter(|&l| l != Self::TARGET)
    }
}

/// HSL (hue in degrees, saturation and lightness in `[0, 1]`) to RGB.
pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [f64; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h.rem_euclid_deg()) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [r + m, g + m, b + m]
}

/// RGB to HSL; hue is 0 for achromatic colours.
pub fn rgb_to_hsl(rgb: [f64; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let l = (max + min) / 2.0;
    let c = max - min;
    if c <= 0.0 {
        return (0.0, 0.0, l);
    }
    let s = c / (1.0 - (2.0 * l - 1.0).abs());
    let h = if max == r {
        60.0 * ((g - b) / c)
    } else if max == g {
        60.0 * ((b - r) / c + 2.0)
    } else {
        60.0 * ((r - g) / c + 4.0)
    };
    (h.rem_euclid_deg(), s, l)
}

trait DegreeWrap {
    fn rem_euclid_deg(self) -> f64;
}

impl DegreeWrap for f64 {
    fn rem_euclid_deg(self) -> f64 {
        let r = self - 360.0 * (self / 360.0).floor();
        if r >= 360.0 {
            0.0
        } else {
            r
        }
    }
}

fn grey(l: f64) -> [f64; 3] {
    hsl_to_rgb(0.0, 0.0, l)
}

fn check_level(value: f64, allowed: &[f64], what: &str) -> Result<()> {
    if allowed.iter().any(|a| (a - value).abs() < LEVEL_TOLERANCE) {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{what} {value} is not one of {allowed:?}")))
    }
}

enum Shape {
    Disk {
        radius: f64,
    },
    Bar {
        half_length: f64,
        half_width: f64,
        angle: f64,
    },
    Ring {
        radius: f64,
        half_stroke: f64,
        bar: bool,
    },
}

impl Shape {
    /// Whether offset `(dx, dy)` from the centre is inside the shape.
    fn contains(&self, dx: f64, dy: f64) -> bool {
        match *self {
            Shape::Disk { radius } => dx * dx + dy * dy <= radius * radius,
            Shape::Bar {
                half_length,
                half_width,
                angle,
            } => {
                // Image rows grow downwards; a positive angle turns the bar
                // counter-clockwise on screen.
                let (s, c) = angle.sin_cos();
                let u = dx * c - dy * s;
                let v = dx * s + dy * c;
                u.abs() <= half_length && v.abs() <= half_width
            }
            Shape::Ring {
                radius,
                half_stroke,
                bar,
            } => {
                let d = (dx * dx + dy * dy).sqrt();
                (d - radius).abs() <= half_stroke || (bar && dx.abs() <= half_stroke && dy.abs() <= radius)
            }
        }
    }

    fn extent(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => radius,
            Shape::Bar {
                half_length,
                half_width,
                ..
            } => half_length.hypot(half_width),
            Shape::Ring {
                radius, half_stroke, ..
            } => radius + half_stroke,
        }
    }
}

struct Raster {
    width: usize,
    height: usize,
    rgb: Vec<[f64; 3]>,
    labels: Vec<u16>,
}

impl Raster {
    fn new(canvas: &Canvas, background: [f64; 3]) -> Self {
        Self {
            width: canvas.width,
            height: canvas.height,
            rgb: vec![background; canvas.width * canvas.height],
            labels: vec![0; canvas.width * canvas.height],
        }
    }

    /// Blends `shape` centred on pixel `center` with `color` by coverage.
    /// `footprint` (radius) marks the label region; `None` uses coverage ≥ ½.
    fn draw(&mut self, shape: &Shape, center: (i64, i64), color: [f64; 3], label: u16, footprint: Option<f64>) {
        let reach = shape.extent().ceil() as i64 + 1;
        let (cx, cy) = center;
        let step = 1.0 / SUPERSAMPLE as f64;
        for py in (cy - reach).max(0)..(cy + reach + 1).min(self.height as i64) {
            for px in (cx - reach).max(0)..(cx + reach + 1).min(self.width as i64) {
                let mut hits = 0;
                for sy in 0..SUPERSAMPLE {
                    for sx in 0..SUPERSAMPLE {
                        let dx = (px - cx) as f64 + (sx as f64 + 0.5) * step - 0.5;
                        let dy = (py - cy) as f64 + (sy as f64 + 0.5) * step - 0.5;
                        if shape.contains(dx, dy) {
                            hits += 1;
                        }
                    }
                }
                let cover = hits as f64 / (SUPERSAMPLE * SUPERSAMPLE) as f64;
                let i = py as usize * self.width + px as usize;
                if cover > 0.0 {
                    let bg = self.rgb[i];
                    self.rgb[i] = [
                        bg[0] + cover * (color[0] - bg[0]),
                        bg[1] + cover * (color[1] - bg[1]),
                        bg[2] + cover * (color[2] - bg[2]),
                    ];
                }
                let inside = match footprint {
                    Some(r) => {
                        let (dx, dy) = ((px - cx) as f64, (py - cy) as f64);
                        dx * dx + dy * dy <= r * r
                    }
                    None => cover >= 0.5,
                };
                if inside {
                    self.labels[i] = label;
                }
            }
        }
    }

    fn finish(self, items: Vec<Item>, spec: StimulusSpec) -> Result<Stimulus> {
        let plane = |c: usize| {
            Plane::from_vec(
                self.width,
                self.height,
                self.rgb.iter().map(|p| p[c].clamp(0.0, 1.0)).collect(),
            )
        };
        Ok(Stimulus {
            image: RgbImage::new(plane(0)?, plane(1)?, plane(2)?)?,
            labels: self.labels,
            items,
            spec,
        })
    }
}

fn rng_for(spec: &StimulusSpec) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.params.kind_code());
    rng
}

/// Places `radii.len()` non-overlapping discs (integer centres) with at least
/// `gap` pixels between footprints and from the canvas border. Item `k` gets
/// label `k + 1`.
pub fn place_items(canvas: &Canvas, radii: &[f64], gap: f64, rng: &mut impl Rng) -> Result<Vec<Item>> {
    place(canvas, radii, radii, gap, rng)
}

/// As [`place_items`], but item `k` keeps `border[k]` (≥ its radius) away
/// from the canvas edge.
fn place(canvas: &Canvas, radii: &[f64], border: &[f64], gap: f64, rng: &mut impl Rng) -> Result<Vec<Item>> {
    let mut items: Vec<Item> = Vec::with_capacity(radii.len());
    for (k, (&r, &b)) in radii.iter().zip(border).enumerate() {
        let lo = (b + gap).ceil();
        let hi_x = canvas.width as f64 - 1.0 - lo;
        let hi_y = canvas.height as f64 - 1.0 - lo;
        if hi_x < lo || hi_y < lo {
            return Err(Error::PlacementFailed {
                placed: k,
                requested: radii.len(),
            });
        }
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_RETRIES {
            let x = rng.random_range(lo as i64..=hi_x as i64) as f64;
            let y = rng.random_range(lo as i64..=hi_y as i64) as f64;
            let free = items.iter().all(|o| {
                let (dx, dy) = (o.center.0 - x, o.center.1 - y);
                (dx * dx + dy * dy).sqrt() > o.radius + r + gap
            });
            if free {
                placed = Some((x, y));
                break;
            }
        }
        let Some(center) = placed else {
            return Err(Error::PlacementFailed {
                placed: k,
                requested: radii.len(),
            });
        };
        items.push(Item {
            label: k as u16 + 1,
            center,
            radius: r,
        });
    }
    Ok(items)
}

fn free_layout(spec: &StimulusSpec, target_diameter_deg: f64, target_reserve_deg: f64) -> Result<Vec<Item>> {
    let ppd = spec.canvas.ppd;
    let mut radii = vec![ITEM_DIAMETER_DEG * ppd / 2.0; ITEM_COUNT];
    let mut border = radii.clone();
    radii[0] = target_diameter_deg * ppd / 2.0;
    // The target is placed first and kept clear of the border at the largest
    // level, so its position does not depend on the level.
    border[0] = target_reserve_deg * ppd / 2.0;
    let gap = 0.5 * ppd;
    place(&spec.canvas, &radii, &border, gap, &mut rng_for(spec))
}

fn pixel_center(item: &Item) -> (i64, i64) {
    (item.center.0 as i64, item.center.1 as i64)
}

fn disk_display(
    spec: StimulusSpec,
    background: [f64; 3],
    target: [f64; 3],
    distractor: [f64; 3],
    target_diameter_deg: f64,
    reserve_deg: f64,
) -> Result<Stimulus> {
    let items = free_layout(&spec, target_diameter_deg, reserve_deg)?;
    let mut r = Raster::new(&spec.canvas, background);
    let ppd = spec.canvas.ppd;
    for item in &items {
        let (color, diameter) = if item.label == Stimulus::TARGET {
            (target, target_diameter_deg)
        } else {
            (distractor, ITEM_DIAMETER_DEG)
        };
        let radius = diameter * ppd / 2.0;
        r.draw(
            &Shape::Disk { radius },
            pixel_center(item),
            color,
            item.label,
            Some(radius),
        );
    }
    r.finish(items, spec)
}

/// Grey disks: target lightness 0.5, distractors `0.5 ± delta` towards the
/// background (white or black).
pub fn brightness_stimulus(
    delta: f64,
    background: BrightnessBackground,
    canvas: Canvas,
    seed: u64,
) -> Result<Stimulus> {
    check_level(delta, &BRIGHTNESS_LEVELS, "brightness contrast")?;
    let (bg, ld) = match background {
        BrightnessBackground::Bright => (1.0, 0.5 + delta),
        BrightnessBackground::Dark => (0.0, 0.5 - delta),
    };
    let spec = StimulusSpec {
        params: StimulusParams::Brightness { delta, background },
        canvas,
        seed,
    };
    disk_display(
        spec,
        grey(bg),
        grey(0.5),
        grey(ld),
        ITEM_DIAMETER_DEG,
        ITEM_DIAMETER_DEG,
    )
}

/// Disks of one hue at lightness 0.5: target saturation 1, distractor
/// saturation `1 − delta`.
pub fn color_stimulus(
    delta: f64,
    hue: TargetHue,
    background: ColorBackground,
    canvas: Canvas,
    seed: u64,
) -> Result<Stimulus> {
    check_level(delta, &COLOR_LEVELS, "saturation contrast")?;
    let bg = match background {
        ColorBackground::Achromatic => grey(0.5),
        ColorBackground::SaturatedRed => hsl_to_rgb(0.0, 1.0, 0.5),
    };
    let h = hue.degrees();
    let spec = StimulusSpec {
        params: StimulusParams::Color { delta, hue, background },
        canvas,
        seed,
    };
    disk_display(
        spec,
        bg,
        hsl_to_rgb(h, 1.0, 0.5),
        hsl_to_rgb(h, 1.0 - delta, 0.5),
        ITEM_DIAMETER_DEG,
        ITEM_DIAMETER_DEG,
    )
}

/// Black disks on white; distractors 2.5°, target `target_diameter`.
pub fn size_stimulus(target_diameter: f64, canvas: Canvas, seed: u64) -> Result<Stimulus> {
    check_level(target_diameter, &SIZE_LEVELS, "target diameter")?;
    let spec = StimulusSpec {
        params: StimulusParams::Size { target_diameter },
        canvas,
        seed,
    };
    let reserve = SIZE_LEVELS.iter().copied().fold(0.0, f64::max);
    disk_display(spec, grey(1.0), grey(0.0), grey(0.0), target_diameter, reserve)
}

/// Black 2.5° × 0.5° bars on white; distractors horizontal, target rotated
/// by `delta_phi` degrees.
pub fn orientation_stimulus(delta_phi: f64, canvas: Canvas, seed: u64) -> Result<Stimulus> {
    check_level(delta_phi, &ORIENTATION_LEVELS, "orientation contrast")?;
    let spec = StimulusSpec {
        params: StimulusParams::Orientation { delta_phi },
        canvas,
        seed,
    };
    let items = free_layout(&spec, ITEM_DIAMETER_DEG, ITEM_DIAMETER_DEG)?;
    let ppd = canvas.ppd;
    let mut r = Raster::new(&canvas, grey(1.0));
    for item in &items {
        let angle = if item.label == Stimulus::TARGET {
            delta_phi * PI / 180.0
        } else {
            0.0
        };
        let bar = Shape::Bar {
            half_length: ITEM_DIAMETER_DEG * ppd / 2.0,
            half_width: BAR_WIDTH_DEG * ppd / 2.0,
            angle,
        };
        r.draw(&bar, pixel_center(item), grey(0.0), item.label, None);
    }
    r.finish(items, spec)
}

/// Rows × columns of the asymmetry grid at item scale `scale`.
pub fn asymmetry_grid(scale: f64) -> Result<(usize, usize)> {
    check_level(scale, &ASYMMETRY_SCALES, "asymmetry scale")?;
    let k = ASYMMETRY_SCALES
        .iter()
        .position(|s| (s - scale).abs() < LEVEL_TOLERANCE)
        .expect("checked above");
    Ok(ASYMMETRY_GRIDS[k])
}

/// Regular grid of black ring glyphs (diameter `scale` degrees) on white,
/// with or without a vertical bar; the target cell holds the other glyph.
pub fn asymmetry_stimulus(variant: AsymmetryVariant, scale: f64, canvas: Canvas, seed: u64) -> Result<Stimulus> {
    let (rows, cols) = asymmetry_grid(scale)?;
    let spec = StimulusSpec {
        params: StimulusParams::Asymmetry { variant, scale },
        canvas,
        seed,
    };
    let ppd = canvas.ppd;
    let radius = scale * ppd / 2.0;
    let half_stroke = (0.05 * scale * ppd).max(1.0);
    let cell_w = canvas.width as f64 / cols as f64;
    let cell_h = canvas.height as f64 / rows as f64;
    if 2.0 * (radius + half_stroke) > cell_w.min(cell_h) {
        return Err(invalid("asymmetry glyphs do not fit their grid cells on this canvas"));
    }
    let mut rng = rng_for(&spec);
    let target_cell = rng.random_range(0..rows * cols);
    let (target_bar, distractor_bar) = match variant {
        AsymmetryVariant::BarAmongCircles => (true, false),
        AsymmetryVariant::CircleAmongBarred => (false, true),
    };
    let mut items = Vec::with_capacity(rows * cols);
    let mut next_label = 2;
    for cell in 0..rows * cols {
        let (row, col) = (cell / cols, cell % cols);
        let center = (
            ((col as f64 + 0.5) * cell_w).floor(),
            ((row as f64 + 0.5) * cell_h).floor(),
        );
        let label = if cell == target_cell {
            Stimulus::TARGET
        } else {
            next_label += 1;
            next_label - 1
        };
        items.push(Item {
            label,
            center,
            radius: radius + half_stroke,
        });
    }
    let mut r = Raster::new(&canvas, grey(1.0));
    for item in &items {
        let bar = if item.label == Stimulus::TARGET {
            target_bar
        } else {
            distractor_bar
        };
        let glyph = Shape::Ring {
            radius,
            half_stroke,
            bar,
        };
        r.draw(&glyph, pixel_center(item), grey(0.0), item.label, Some(item.radius));
    }
    r.finish(items, spec)
}

/// Dispatches on `spec.params`.
pub fn generate(spec: &StimulusSpec) -> Result<Stimulus> {
    match spec.params {
        StimulusParams::Brightness { delta, background } => {
            brightness_stimulus(delta, background, spec.canvas, spec.seed)
        }
        StimulusParams::Color { delta, hue, background } => {
            color_stimulus(delta, hue, background, spec.canvas, spec.seed)
        }
        StimulusParams::Size { target_diameter } => size_stimulus(target_diameter, spec.canvas, spec.seed),
        StimulusParams::Orientation { delta_phi } => orientation_stimulus(delta_phi, spec.canvas, spec.seed),
        StimulusParams::Asymmetry { variant, scale } => asymmetry_stimulus(variant, scale, spec.canvas, spec.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canvas() -> Canvas {
        Canvas::default()
    }

    fn glyph_histogram(s: &Stimulus, label: u16) -> Vec<[u64; 3]> {
        let item = s.items.iter().find(|i| i.label == label).unwrap();
        let (cx, cy) = pixel_center(item);
        let reach = (ITEM_DIAMETER_DEG * 16.0) as i64 + 2;
        let mut px = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (x, y) = ((cx + dx) as usize, (cy + dy) as usize);
                let v = s.image.pixel(x, y);
                px.push([v[0].to_bits(), v[1].to_bits(), v[2].to_bits()]);
            }
        }
        px
    }

    #[test]
    fn hsl_examples_and_round_trip() {
        assert_eq!(hsl_to_rgb(0.0, 1.0, 0.5), [1.0, 0.0, 0.0]);
        assert_eq!(hsl_to_rgb(240.0, 1.0, 0.5), [0.0, 0.0, 1.0]);
        assert_eq!(hsl_to_rgb(77.0, 0.0, 0.25), [0.25, 0.25, 0.25]);
        for h in (0..360).step_by(7) {
            for s in [0.1, 0.5, 1.0] {
                for l in [0.2, 0.5, 0.8] {
                    let rgb = hsl_to_rgb(h as f64, s, l);
                    let (h2, s2, l2) = rgb_to_hsl(rgb);
                    let back = hsl_to_rgb(h2, s2, l2);
                    for c in 0..3 {
                        assert!((rgb[c] - back[c]).abs() < 1.0 / 255.0);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_levels_are_rejected() {
        assert!(brightness_stimulus(0.1, BrightnessBackground::Dark, canvas(), 0).is_err());
        assert!(size_stimulus(2.0, canvas(), 0).is_err());
        assert!(orientation_stimulus(45.0, canvas(), 0).is_err());
        assert!(asymmetry_grid(2.2).is_err());
    }

    #[test]
    fn brightness_dark_endpoint() {
        let s = brightness_stimulus(0.5, BrightnessBackground::Dark, canvas(), 3).unwrap();
        let t = s.items[0];
        let d = s.items[1];
        assert_eq!(s.image.pixel(t.center.0 as usize, t.center.1 as usize), [0.5; 3]);
        assert_eq!(s.image.pixel(d.center.0 as usize, d.center.1 as usize), [0.0; 3]);
        assert_eq!(s.image.pixel(0, 0), [0.0; 3]);
        assert_eq!(s.items.len(), ITEM_COUNT);
    }

    #[test]
    fn placement_is_deterministic_and_disjoint() {
        let a = size_stimulus(5.0, canvas(), 11).unwrap();
        let b = size_stimulus(5.0, canvas(), 11).unwrap();
        assert_eq!(a, b);
        let c = size_stimulus(1.25, canvas(), 11).unwrap();
        assert_eq!(a.items[0].center, c.items[0].center);
        for (k, p) in a.items.iter().enumerate() {
            for q in &a.items[k + 1..] {
                let d = ((p.center.0 - q.center.0).powi(2) + (p.center.1 - q.center.1).powi(2)).sqrt();
                assert!(d > p.radius + q.radius);
            }
        }
        let d = size_stimulus(5.0, canvas(), 12).unwrap();
        assert_ne!(a.items[0].center, d.items[0].center);
    }

    #[test]
    fn zero_contrast_target_matches_distractors() {
        let stimuli = [
            brightness_stimulus(0.0, BrightnessBackground::Bright, canvas(), 5).unwrap(),
            color_stimulus(0.0, TargetHue::Red, ColorBackground::Achromatic, canvas(), 5).unwrap(),
            size_stimulus(2.5, canvas(), 5).unwrap(),
            orientation_stimulus(0.0, canvas(), 5).unwrap(),
        ];
        for s in &stimuli {
            assert!(s.spec.params.is_zero_contrast());
            let mut t = glyph_histogram(s, 1);
            let mut d = glyph_histogram(s, 2);
            t.sort();
            d.sort();
            assert_eq!(t, d, "{}", s.spec.params.kind_name());
        }
    }

    #[test]
    fn masks_cover_the_target() {
        let s = orientation_stimulus(90.0, canvas(), 2).unwrap();
        let m = s.target_mask();
        let bar_px = (2.5 * 32.0) * (0.5 * 32.0);
        assert!((m.sum() - bar_px).abs() <= 2.0 * 2.5 * 32.0);
        let t = s.items[0];
        // Vertical target: a pixel 30 px above the centre is inside, 30 px
        // to the side is not.
        assert_eq!(m.get(t.center.0 as usize, t.center.1 as usize - 30), 1.0);
        assert_eq!(m.get(t.center.0 as usize + 30, t.center.1 as usize), 0.0);
        for (k, &l) in s.labels.iter().enumerate() {
            if l == 1 {
                let v = s.image.r.as_slice()[k];
                assert!(v <= 0.5);
            }
        }
    }

    #[test]
    fn asymmetry_grids_and_variants() {
        let a = asymmetry_stimulus(AsymmetryVariant::BarAmongCircles, 2.5, canvas(), 4).unwrap();
        let b = asymmetry_stimulus(AsymmetryVariant::CircleAmongBarred, 2.5, canvas(), 4).unwrap();
        assert_eq!(a.items.len(), 130);
        assert_eq!(a.items, b.items);
        // Swapping variants swaps the glyphs: target of one equals a
        // distractor of the other.
        assert_eq!(glyph_histogram(&a, 1), glyph_histogram(&b, 2));
        assert_eq!(glyph_histogram(&a, 2), glyph_histogram(&b, 1));
        assert_ne!(glyph_histogram(&a, 1), glyph_histogram(&a, 2));
        for s in ASYMMETRY_SCALES {
            let st = asymmetry_stimulus(AsymmetryVariant::BarAmongCircles, s, canvas(), 0).unwrap();
            let (r, c) = asymmetry_grid(s).unwrap();
            assert_eq!(st.items.len(), r * c);
            assert!(st.target_mask().sum() > 0.0);
        }
    }

    #[test]
    fn brightness_contrast_is_monotone_in_level() {
        for bg in [BrightnessBackground::Bright, BrightnessBackground::Dark] {
            let mut last = -1.0;
            for d in BRIGHTNESS_LEVELS {
                let s = brightness_stimulus(d, bg, canvas(), 1).unwrap();
                let t = s.items[0].center;
                let o = s.items[1].center;
                let diff =
                    (s.image.pixel(t.0 as usize, t.1 as usize)[0] - s.image.pixel(o.0 as usize, o.1 as usize)[0]).abs();
                assert!(diff > last);
                last = diff;
            }
        }
    }
}
