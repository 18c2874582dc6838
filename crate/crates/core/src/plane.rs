//! Dense row-major planes of `f64` and the separable filtering shared by the
//! wavelet, integration and metric stages.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::{invalid, Result};

/// How samples outside a plane are extended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Boundary {
    /// Half-sample symmetric reflection (`... b a | a b c ... `).
    #[default]
    Mirror,
    /// Circular wrap-around.
    Periodic,
}

impl Boundary {
    /// Maps an arbitrary integer coordinate onto `0..n`.
    #[inline]
    pub fn index(self, i: isize, n: usize) -> usize {
        let n = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::Mirror => {
                let period = 2 * n;
                let m = i.rem_euclid(period);
                if m < n {
                    m as usize
                } else {
                    (period - 1 - m) as usize
                }
            }
        }
    }
}

/// A `width × height` grid of samples stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(invalid("plane data length does not match its dimensions"));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two planes of equal size.
    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        debug_assert_eq!(self.dims(), other.dims());
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Plane) {
        debug_assert_eq!(self.dims(), other.dims());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var = self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.data.len() as f64;
        var.sqrt()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index `(x, y)` of the first maximal sample in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Circular shift: sample `(x, y)` moves to `(x + dx, y + dy)`.
    pub fn roll(&self, dx: isize, dy: isize) -> Plane {
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            let ty = Boundary::Periodic.index(y as isize + dy, self.height);
            for x in 0..self.width {
                let tx = Boundary::Periodic.index(x as isize + dx, self.width);
                out.set(tx, ty, self.get(x, y));
            }
        }
        out
    }

    /// 1-D correlation along rows with an odd-length, centered kernel.
    /// Zero taps are skipped, which keeps dilated à trous filters cheap.
    pub fn filter_rows(&self, taps: &[f64], boundary: Boundary) -> Plane {
        let support = nonzero_taps(taps);
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            let dst = &mut out.data[y * self.width..(y + 1) * self.width];
            for (x, d) in dst.iter_mut().enumerate() {
                let mut acc = 0.0;
                for &(off, w) in &support {
                    acc += w * row[boundary.index(x as isize + off, self.width)];
                }
                *d = acc;
            }
        }
        out
    }

    /// 1-D correlation along columns; see [`Plane::filter_rows`].
    pub fn filter_cols(&self, taps: &[f64], boundary: Boundary) -> Plane {
        let support = nonzero_taps(taps);
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            let dst = &mut out.data[y * self.width..(y + 1) * self.width];
            for &(off, w) in &support {
                let sy = boundary.index(y as isize + off, self.height);
                let src = &self.data[sy * self.width..(sy + 1) * self.width];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        out
    }

    /// Separable Gaussian blur, kernel truncated at `3σ` and normalized to
    /// unit sum.
    pub fn gaussian_blur(&self, sigma: f64, boundary: Boundary) -> Plane {
        let taps = gaussian_taps(sigma);
        self.filter_rows(&taps, boundary).filter_cols(&taps, boundary)
    }

    /// Resamples to `new_width × new_height` with a triangle (bilinear)
    /// kernel. When shrinking, the kernel is widened by the scale factor so
    /// every source sample contributes (antialiased bilinear).
    pub fn resize_bilinear(&self, new_width: usize, new_height: usize) -> Plane {
        let rows = resample_axis(self, new_width, true);
        resample_axis(&rows, new_height, false)
    }
}

fn nonzero_taps(taps: &[f64]) -> Vec<(isize, f64)> {
    debug_assert!(taps.len() % 2 == 1);
    let half = (taps.len() / 2) as isize;
    taps.iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(k, &w)| (k as isize - half, w))
        .collect()
}

/// Sampled, normalized Gaussian of standard deviation `sigma` truncated at
/// `⌈3σ⌉` samples on each side.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(0.0) as usize;
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= total;
    }
    taps
}

fn resample_axis(src: &Plane, new_len: usize, along_x: bool) -> Plane {
    let (w, h) = src.dims();
    let old_len = if along_x { w } else { h };
    let (out_w, out_h) = if along_x { (new_len, h) } else { (w, new_len) };
    if new_len == old_len {
        return src.clone();
    }
    let scale = new_len as f64 / old_len as f64;
    // Kernel support in source samples.
    let support = if scale < 1.0 { 1.0 / scale } else { 1.0 };
    let weights: Vec<Vec<(usize, f64)>> = (0..new_len)
        .map(|i| {
            let center = (i as f64 + 0.5) / scale - 0.5;
            let lo = (center - support).floor() as isize;
            let hi = (center + support).ceil() as isize;
            let mut ws: Vec<(usize, f64)> = Vec::new();
            let mut total = 0.0;
            for j in lo..=hi {
                let t = 1.0 - ((j as f64 - center) / support).abs();
                if t > 0.0 {
                    let idx = Boundary::Mirror.index(j, old_len);
                    ws.push((idx, t));
                    total += t;
                }
            }
            for wt in &mut ws {
                wt.1 /= total;
            }
            ws
        })
        .collect();
    let mut out = Plane::new(out_w, out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let v = if along_x {
                weights[x].iter().map(|&(j, t)| t * src.get(j, y)).sum()
            } else {
                weights[y].iter().map(|&(j, t)| t * src.get(x, j)).sum()
            };
            out.set(x, y, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_index_reflects_repeatedly() {
        let b = Boundary::Mirror;
        let got: Vec<usize> = (-4..8).map(|i| b.index(i, 3)).collect();
        assert_eq!(got, vec![2, 2, 1, 0, 0, 1, 2, 2, 1, 0, 0, 1]);
        assert_eq!(b.index(-7, 1), 0);
    }

    #[test]
    fn blur_preserves_constant_and_mass() {
        let p = Plane::filled(9, 7, 2.5);
        let b = p.gaussian_blur(1.7, Boundary::Mirror);
        assert!(b.as_slice().iter().all(|v| (v - 2.5).abs() < 1e-12));

        let mut imp = Plane::new(15, 11);
        imp.set(0, 0, 1.0);
        let b = imp.gaussian_blur(2.0, Boundary::Mirror);
        assert!((b.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resize_keeps_constants_and_identity() {
        let p = Plane::filled(40, 30, 0.3);
        let small = p.resize_bilinear(8, 6);
        assert!(small.as_slice().iter().all(|v| (v - 0.3).abs() < 1e-12));
        let q = Plane::from_fn(5, 4, |x, y| (x * 7 + y) as f64);
        assert_eq!(q.resize_bilinear(5, 4), q);
    }

    #[test]
    fn roll_round_trips() {
        let q = Plane::from_fn(5, 4, |x, y| (x * 7 + y) as f64);
        assert_eq!(q.roll(2, -3).roll(-2, 3), q);
        assert_eq!(q.roll(1, 0).get(1, 0), q.get(0, 0));
    }
}
