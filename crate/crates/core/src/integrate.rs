//! Fusion of conspicuity planes into channel maps, channel combination,
//! z-normalization and smoothing.

use alloc::vec::Vec;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::plane::{Boundary, Plane};
use crate::{invalid, Error, Result};

/// How the `(s, θ)` conspicuity planes of a channel are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Fusion {
    /// Sum of all planes, as in wavelet synthesis.
    #[default]
    Inverse,
    /// Pointwise maximum over planes.
    Max,
    /// The whole plane holding the globally largest response.
    Argmax,
}

impl Fusion {
    pub const ALL: [Fusion; 3] = [Fusion::Inverse, Fusion::Max, Fusion::Argmax];

    pub fn name(self) -> &'static str {
        match self {
            Fusion::Inverse => "inverse",
            Fusion::Max => "max",
            Fusion::Argmax => "argmax",
        }
    }

    pub fn parse(s: &str) -> Option<Fusion> {
        match s {
            "inverse" | "sum" | "inverse_sum" => Some(Fusion::Inverse),
            "max" => Some(Fusion::Max),
            "argmax" => Some(Fusion::Argmax),
            _ => None,
        }
    }
}

/// How shifted channel maps are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChannelCombine {
    /// `sqrt(S_rg + S_by + S_L)`.
    #[default]
    SqrtSum,
    /// `sqrt(S_rg² + S_by² + S_L²)`.
    L2,
}

fn check_planes(planes: &[Plane], residual: &Plane) -> Result<()> {
    if planes.is_empty() {
        return Err(invalid("no conspicuity planes to fuse"));
    }
    for p in planes {
        if p.dims() != residual.dims() {
            return Err(Error::DimensionMismatch {
                expected: residual.dims(),
                got: p.dims(),
            });
        }
    }
    Ok(())
}

/// `Σ_{s,θ} Ŝ_{sθ} + c_n`.
pub fn fuse_inverse(planes: &[Plane], residual: &Plane) -> Result<Plane> {
    check_planes(planes, residual)?;
    let mut out = residual.clone();
    for p in planes {
        out.add_assign(p);
    }
    Ok(out)
}

/// `max_{s,θ} Ŝ_{sθ} + c_n` pointwise.
pub fn fuse_max(planes: &[Plane], residual: &Plane) -> Result<Plane> {
    check_planes(planes, residual)?;
    let mut best = planes[0].clone();
    for p in &planes[1..] {
        for (b, &v) in best.as_mut_slice().iter_mut().zip(p.as_slice()) {
            if v > *b {
                *b = v;
            }
        }
    }
    best.add_assign(residual);
    Ok(best)
}

/// Index of the plane holding the global maximum; ties go to the lowest
/// index (lowest scale, then `h`, `v`, `d`).
pub fn argmax_plane(planes: &[Plane]) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, p) in planes.iter().enumerate() {
        let m = p.max();
        if m > best_value {
            best_value = m;
            best = k;
        }
    }
    best
}

/// The plane holding the global maximum, plus `c_n`.
pub fn fuse_argmax(planes: &[Plane], residual: &Plane) -> Result<Plane> {
    check_planes(planes, residual)?;
    let mut out = planes[argmax_plane(planes)].clone();
    out.add_assign(residual);
    Ok(out)
}

pub fn fuse(mode: Fusion, planes: &[Plane], residual: &Plane) -> Result<Plane> {
    match mode {
        Fusion::Inverse => fuse_inverse(planes, residual),
        Fusion::Max => fuse_max(planes, residual),
        Fusion::Argmax => fuse_argmax(planes, residual),
    }
}

/// Subtracts the global minimum so the map is nonnegative.
pub fn shift_to_nonnegative(p: &Plane) -> Plane {
    let m = p.min();
    p.map(|v| v - m)
}

/// Combined map and the number of pixels whose radicand was clamped to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub map: Plane,
    pub clamped: usize,
}

/// Merges the three channel maps; negative radicands are clamped to 0 and
/// counted.
pub fn combine_channels(rg: &Plane, by: &Plane, l: &Plane, mode: ChannelCombine) -> Result<Combined> {
    for p in [by, l] {
        if p.dims() != rg.dims() {
            return Err(Error::DimensionMismatch {
                expected: rg.dims(),
                got: p.dims(),
            });
        }
    }
    let mut clamped = 0;
    let mut map = Plane::new(rg.width(), rg.height());
    for (i, out) in map.as_mut_slice().iter_mut().enumerate() {
        let (a, b, c) = (rg.as_slice()[i], by.as_slice()[i], l.as_slice()[i]);
        let radicand = match mode {
            ChannelCombine::SqrtSum => a + b + c,
            ChannelCombine::L2 => a * a + b * b + c * c,
        };
        if radicand < 0.0 {
            clamped += 1;
            *out = 0.0;
        } else {
            *out = radicand.sqrt();
        }
    }
    Ok(Combined { map, clamped })
}

/// z-scored map; `degenerate` is set (and the map zeroed) when the input is
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub map: Plane,
    pub degenerate: bool,
}

/// `(Ŝ − μ) / σ` with the population standard deviation.
pub fn znorm(p: &Plane) -> Normalized {
    let mean = p.mean();
    let sd = p.std_dev();
    if sd.is_nan() || sd <= 0.0 || !sd.is_finite() || sd <= f64::EPSILON * mean.abs() {
        return Normalized {
            map: Plane::new(p.width(), p.height()),
            degenerate: true,
        };
    }
    Normalized {
        map: p.map(|v| (v - mean) / sd),
        degenerate: false,
    }
}

/// Smoothed map; `skipped` is set when `σ` is below half a pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub map: Plane,
    pub sigma_px: f64,
    pub skipped: bool,
}

/// Gaussian blur with `σ = sigma_deg · ppd` pixels, truncated at `3σ`, mirror
/// boundary.
pub fn smooth(p: &Plane, sigma_deg: f64, ppd: f64) -> Result<Smoothed> {
    if !(sigma_deg > 0.0 && ppd > 0.0 && sigma_deg.is_finite() && ppd.is_finite()) {
        return Err(invalid("sigma_deg and ppd must be positive"));
    }
    let sigma_px = sigma_deg * ppd;
    if sigma_px < 0.5 {
        return Ok(Smoothed {
            map: p.clone(),
            sigma_px,
            skipped: true,
        });
    }
    Ok(Smoothed {
        map: p.gaussian_blur(sigma_px, Boundary::Mirror),
        sigma_px,
        skipped: false,
    })
}

/// A finished saliency map and how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub values: Plane,
    pub fusion: Fusion,
    pub smoothed: bool,
    pub sigma_deg: f64,
}

/// Non-fatal events raised while integrating one image.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Pixels whose channel-combination radicand was negative.
    pub clamped_pixels: usize,
    /// The combined map was constant before z-normalization.
    pub degenerate_map: bool,
    /// Smoothing was skipped because `σ` was below half a pixel.
    pub smoothing_skipped: bool,
    /// Plane index chosen per channel under [`Fusion::Argmax`].
    pub argmax_planes: Vec<usize>,
}
