//! Fixation ground truth, density maps and the saliency evaluation metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plane::{Boundary, Plane};
use crate::{invalid, Error, Result};

/// Regularizer for KL divergence and information gain.
pub const METRIC_EPSILON: f64 = 1e-7;

/// Number of shuffled-AUC trials used by default.
pub const DEFAULT_SAUC_TRIALS: usize = 10;

/// Fixation points of one image, in that image's pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixationSet {
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub points: Vec<(f64, f64)>,
}

impl FixationSet {
    /// Rejects points outside `[0, width) × [0, height)`.
    pub fn new(image_id: impl Into<String>, width: usize, height: usize, points: Vec<(f64, f64)>) -> Result<Self> {
        let image_id = image_id.into();
        if width == 0 || height == 0 {
            return Err(invalid("fixation image has zero size"));
        }
        for &(x, y) in &points {
            if !(x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64) {
                return Err(invalid("fixation outside the image bounds"));
            }
        }
        Ok(Self {
            image_id,
            width,
            height,
            points,
        })
    }

    /// Every nonzero pixel of a binary fixation map is one fixation.
    pub fn from_map(image_id: impl Into<String>, map: &Plane) -> Result<Self> {
        let mut points = Vec::new();
        for y in 0..map.height() {
            for x in 0..map.width() {
                if map.get(x, y) != 0.0 {
                    points.push((x as f64, y as f64));
                }
            }
        }
        Self::new(image_id, map.width(), map.height(), points)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pixel `(⌊x⌋, ⌊y⌋)` of every fixation, in input order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.points.iter().map(|&(x, y)| (x as usize, y as usize))
    }

    /// Row-major indices of the distinct fixated pixels, sorted.
    pub fn unique_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.pixels().map(|(x, y)| y * self.width + x).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Fixation pixels rescaled into a `width × height` image.
    pub fn rescaled_indices(&self, width: usize, height: usize) -> Vec<usize> {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        self.points
            .iter()
            .map(|&(x, y)| {
                let px = ((x * sx) as usize).min(width - 1);
                let py = ((y * sy) as usize).min(height - 1);
                py * width + px
            })
            .collect()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptyFixations(self.image_id.clone()))
        } else {
            Ok(())
        }
    }
}

/// Nonnegative plane summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    plane: Plane,
}

impl DensityMap {
    /// Shifts by the minimum and rescales to unit sum; a constant plane
    /// becomes uniform.
    pub fn from_plane(p: &Plane) -> Self {
        Self {
            plane: to_distribution(p),
        }
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn into_plane(self) -> Plane {
        self.plane
    }
}

fn to_distribution(p: &Plane) -> Plane {
    let m = p.min();
    let shifted = p.map(|v| v - m);
    let total = shifted.sum();
    if total > 0.0 && total.is_finite() {
        shifted.map(|v| v / total)
    } else {
        Plane::filled(p.width(), p.height(), 1.0 / p.len() as f64)
    }
}

fn impulses_to_density(width: usize, height: usize, indices: &[usize], sigma_px: f64) -> Plane {
    let mut p = Plane::new(width, height);
    for &i in indices {
        p.as_mut_slice()[i] += 1.0;
    }
    let blurred = if sigma_px >= 0.5 {
        p.gaussian_blur(sigma_px, Boundary::Mirror)
    } else {
        p
    };
    let total = blurred.sum();
    blurred.map(|v| v / total)
}

/// Unit impulses at the fixated pixels, blurred with `σ = sigma_deg · ppd`
/// pixels and renormalized.
pub fn density_from_fixations(f: &FixationSet, sigma_deg: f64, ppd: f64) -> Result<DensityMap> {
    f.require_nonempty()?;
    if !(sigma_deg > 0.0 && ppd > 0.0) {
        return Err(invalid("sigma_deg and ppd must be positive"));
    }
    let idx: Vec<usize> = f.pixels().map(|(x, y)| y * f.width + x).collect();
    Ok(DensityMap {
        plane: impulses_to_density(f.width, f.height, &idx, sigma_deg * ppd),
    })
}

/// Center-bias baseline: every fixation of the dataset, rescaled into a
/// `width × height` image, blurred and normalized.
pub fn baseline_density(
    sets: &[FixationSet],
    width: usize,
    height: usize,
    sigma_deg: f64,
    ppd: f64,
) -> Result<DensityMap> {
    let idx: Vec<usize> = sets.iter().flat_map(|s| s.rescaled_indices(width, height)).collect();
    if idx.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(DensityMap {
        plane: impulses_to_density(width, height, &idx, sigma_deg * ppd),
    })
}

fn check_dims(sal: &Plane, dims: (usize, usize)) -> Result<()> {
    if sal.dims() != dims {
        Err(Error::DimensionMismatch {
            expected: dims,
            got: sal.dims(),
        })
    } else {
        Ok(())
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// Number of entries `≥ t` in ascending `v`.
fn count_at_least(v: &[f64], t: f64) -> usize {
    v.len() - v.partition_point(|&x| x < t)
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum()
}

/// ROC area with thresholds at `thresholds` (descending), framed by `(0, 0)`
/// and `(1, 1)`.
fn roc_area(pos: &[f64], neg: &[f64], thresholds: &[f64]) -> f64 {
    if pos.is_empty() || neg.is_empty() {
        return 0.5;
    }
    let pos = sorted(pos.to_vec());
    let neg = sorted(neg.to_vec());
    let mut pts = Vec::with_capacity(thresholds.len() + 2);
    pts.push((0.0, 0.0));
    for &t in thresholds {
        let tp = count_at_least(&pos, t) as f64 / pos.len() as f64;
        let fp = count_at_least(&neg, t) as f64 / neg.len() as f64;
        pts.push((fp, tp));
    }
    pts.push((1.0, 1.0));
    trapezoid(&pts)
}

fn descending_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut t: Vec<f64> = values.collect();
    t.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    t.dedup();
    t
}

/// ROC area with thresholds at the distinct positive values: positives are
/// `pos`, negatives `neg`.
pub fn auc_from_scores(pos: &[f64], neg: &[f64]) -> f64 {
    roc_area(pos, neg, &descending_unique(pos.iter().copied()))
}

/// Full ROC area (thresholds at every distinct value), i.e. the
/// probability that a positive outranks a negative, ties counting one half.
pub fn auc_full(pos: &[f64], neg: &[f64]) -> f64 {
    roc_area(pos, neg, &descending_unique(pos.iter().chain(neg).copied()))
}

/// AUC with positives at the distinct fixated pixels and negatives at every
/// other pixel. A constant map scores 0.5.
pub fn auc(sal: &Plane, f: &FixationSet) -> Result<f64> {
    f.require_nonempty()?;
    check_dims(sal, f.dims())?;
    let fixated = f.unique_indices();
    let s = sal.as_slice();
    let pos: Vec<f64> = fixated.iter().map(|&i| s[i]).collect();
    let mut neg = Vec::with_capacity(s.len() - fixated.len());
    let mut k = 0;
    for (i, &v) in s.iter().enumerate() {
        if k < fixated.len() && fixated[k] == i {
            k += 1;
        } else {
            neg.push(v);
        }
    }
    Ok(auc_from_scores(&pos, &neg))
}

/// Shuffled AUC: per trial the negatives are all fixations of one randomly
/// drawn image from `pool` (rescaled into this image). Trial `t` draws from
/// ChaCha stream `t` of `seed`, so trials are independent of evaluation
/// order.
pub fn sauc(sal: &Plane, f: &FixationSet, pool: &[&FixationSet], trials: usize, seed: u64) -> Result<f64> {
    f.require_nonempty()?;
    check_dims(sal, f.dims())?;
    let pool: Vec<&&FixationSet> = pool.iter().filter(|p| !p.is_empty()).collect();
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if trials == 0 {
        return Err(invalid("sAUC needs at least one trial"));
    }
    let s = sal.as_slice();
    let pos: Vec<f64> = f.unique_indices().iter().map(|&i| s[i]).collect();
    let mut total = 0.0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let other = pool[rng.random_range(0..pool.len())];
        let neg: Vec<f64> = other
            .rescaled_indices(f.width, f.height)
            .iter()
            .map(|&i| s[i])
            .collect();
        total += auc_full(&pos, &neg);
    }
    Ok(total / trials as f64)
}

/// Score plus a flag raised when the input was degenerate (constant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub value: f64,
    pub degenerate: bool,
}

/// Mean z-scored saliency over the distinct fixated pixels.
pub fn nss(sal: &Plane, f: &FixationSet) -> Result<Scored> {
    f.require_nonempty()?;
    check_dims(sal, f.dims())?;
    let mean = sal.mean();
    let sd = sal.std_dev();
    if sd.is_nan() || sd <= 0.0 {
        return Ok(Scored {
            value: 0.0,
            degenerate: true,
        });
    }
    let idx = f.unique_indices();
    let s = sal.as_slice();
    let value = idx.iter().map(|&i| (s[i] - mean) / sd).sum::<f64>() / idx.len() as f64;
    Ok(Scored {
        value,
        degenerate: false,
    })
}

/// Pearson correlation of two planes.
pub fn cc(a: &Plane, b: &Plane) -> Result<Scored> {
    check_dims(a, b.dims())?;
    let (ma, mb) = (a.mean(), b.mean());
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return Ok(Scored {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Scored {
        value: (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// `Σ min(p, q)` after shifting both planes to a zero minimum and normalizing
/// them to unit sum.
pub fn sim(a: &Plane, b: &Plane) -> Result<f64> {
    check_dims(a, b.dims())?;
    let p = to_distribution(a);
    let q = to_distribution(b);
    Ok(p.as_slice().iter().zip(q.as_slice()).map(|(&x, &y)| x.min(y)).sum())
}

/// `Σ_{d>0} d · ln(d / (p + ε))` where `p` is the saliency map shifted to a
/// zero minimum and normalized, and `d` the normalized density.
pub fn kl(sal: &Plane, density: &Plane) -> Result<f64> {
    check_dims(sal, density.dims())?;
    let p = to_distribution(sal);
    let d = to_distribution(density);
    Ok(d.as_slice()
        .iter()
        .zip(p.as_slice())
        .filter(|(&d, _)| d > 0.0)
        .map(|(&d, &p)| d * (d / (p + METRIC_EPSILON)).ln())
        .sum())
}

/// Mean over the distinct fixated pixels of `log2(p + ε) − log2(b + ε)`,
/// with saliency `p` and baseline `b` as distributions.
pub fn infogain(sal: &Plane, f: &FixationSet, baseline: &Plane) -> Result<f64> {
    f.require_nonempty()?;
    check_dims(sal, f.dims())?;
    check_dims(baseline, f.dims())?;
    let p = to_distribution(sal);
    let b = to_distribution(baseline);
    let idx = f.unique_indices();
    let total: f64 = idx
        .iter()
        .map(|&i| (p.as_slice()[i] + METRIC_EPSILON).log2() - (b.as_slice()[i] + METRIC_EPSILON).log2())
        .sum();
    Ok(total / idx.len() as f64)
}

/// All metrics for one image.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricScores {
    pub auc: f64,
    pub sauc: f64,
    pub nss: f64,
    pub cc: f64,
    pub sim: f64,
    pub kl: f64,
    pub infogain: f64,
}

impl MetricScores {
    pub const NAMES: [&'static str; 7] = ["AUC", "sAUC", "NSS", "CC", "SIM", "KL", "InfoGain"];

    pub fn values(&self) -> [f64; 7] {
        [self.auc, self.sauc, self.nss, self.cc, self.sim, self.kl, self.infogain]
    }

    /// Column-wise mean of `rows`.
    pub fn mean(rows: &[MetricScores]) -> Option<MetricScores> {
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        let mut acc = [0.0; 7];
        for r in rows {
            for (a, v) in acc.iter_mut().zip(r.values()) {
                *a += v;
            }
        }
        Some(MetricScores {
            auc: acc[0] / n,
            sauc: acc[1] / n,
            nss: acc[2] / n,
            cc: acc[3] / n,
            sim: acc[4] / n,
            kl: acc[5] / n,
            infogain: acc[6] / n,
        })
    }
}

/// Ground truth needed to score one image.
pub struct GroundTruth<'a> {
    pub fixations: &'a FixationSet,
    pub density: &'a DensityMap,
    pub baseline: &'a DensityMap,
    /// Fixations of the other images, for sAUC.
    pub pool: &'a [&'a FixationSet],
    pub trials: usize,
    pub seed: u64,
}

pub fn evaluate(sal: &Plane, gt: &GroundTruth<'_>) -> Result<MetricScores> {
    Ok(MetricScores {
        auc: auc(sal, gt.fixations)?,
        sauc: sauc(sal, gt.fixations, gt.pool, gt.trials, gt.seed)?,
        nss: nss(sal, gt.fixations)?.value,
        cc: cc(sal, gt.density.plane())?.value,
        sim: sim(sal, gt.density.plane())?,
        kl: kl(sal, gt.density.plane())?,
        infogain: infogain(sal, gt.fixations, gt.baseline.plane())?,
    })
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut r = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; 0 when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(invalid("spearman needs two equally long series of length ≥ 2"));
    }
    let ra = Plane::from_vec(a.len(), 1, ranks(a))?;
    let rb = Plane::from_vec(b.len(), 1, ranks(b))?;
    Ok(cc(&ra, &rb)?.value)
}
