//! Undecimated (à trous) wavelet analysis and synthesis.
//!
//! At scale `s` the approximation `c_{s-1}` is low-passed along rows with
//! `h_s` (giving `c_{s,h}`) and along columns with its transpose (giving
//! `c_{s,v}`). With `c_{s,hv} = c_{s,h} ⊗ h_s'`:
//!
//! ```text
//! ω_{s,h} = c_{s-1} − c_{s,h}
//! ω_{s,v} = c_{s-1} − c_{s,v}
//! ω_{s,d} = c_{s-1} − (c_{s,hv} + ω_{s,h} + ω_{s,v})
//! c_s     = c_{s-1} − (ω_{s,h} + ω_{s,v} + ω_{s,d})
//! ```
//!
//! The three details of a scale sum to `c_{s-1} − c_s`, so the plain sum of
//! every detail plane and the last residual telescopes back to the input.
//!
//! Orientation convention: `ω_h` comes from filtering along rows, so it
//! responds to intensity changes along x, i.e. to *vertical* edges and bars.
//! `ω_v` responds to horizontal structure and `ω_d` to both diagonals.

use alloc::vec;
use alloc::vec::Vec;

use crate::plane::{Boundary, Plane};
use crate::{invalid, Result};

/// Orientation band of a detail plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Orientation {
    H,
    V,
    D,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::H, Orientation::V, Orientation::D];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Orientation {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::H => "h",
            Orientation::V => "v",
            Orientation::D => "d",
        }
    }
}

/// Number of scales for a plane whose larger side is `n`:
/// `⌊log2(n / 8)⌋ + 2`.
pub fn num_scales(n: usize) -> Result<usize> {
    if n < 8 {
        return Err(invalid("wavelet decomposition needs a side of at least 8 pixels"));
    }
    // ⌊log2(n/8)⌋ for integer n ≥ 8 is the bit length of ⌊n/8⌋ minus one.
    let q = n / 8;
    Ok((usize::BITS - 1 - q.leading_zeros()) as usize + 2)
}

/// Symmetric low-pass filter `h_s` (taps include the inserted zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFilter {
    pub taps: Vec<f64>,
    pub scale: usize,
}

impl ScalingFilter {
    /// `h_1 = [1 4 6 4 1] / 16`.
    pub fn h1() -> Self {
        Self {
            taps: vec![1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0],
            scale: 1,
        }
    }

    /// Filter for scale `s ≥ 1`, built by dilating `h_1` `s − 1` times.
    pub fn for_scale(s: usize) -> Self {
        let mut f = Self::h1();
        for _ in 1..s.max(1) {
            f = dilate_filter(&f);
        }
        f
    }
}

/// Upsamples a filter by inserting one zero between consecutive taps.
pub fn dilate_filter(f: &ScalingFilter) -> ScalingFilter {
    let n = f.taps.len();
    let mut taps = vec![0.0; 2 * n - 1];
    for (k, &t) in f.taps.iter().enumerate() {
        taps[2 * k] = t;
    }
    ScalingFilter {
        taps,
        scale: f.scale + 1,
    }
}

/// Detail planes for one scale, indexed by [`Orientation::index`].
pub type ScaleBands = [Plane; 3];

/// Full-resolution detail planes for scales `1..=S` plus the residual `c_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    /// `bands[s - 1][θ]` is `ω_{s,θ}`.
    pub bands: Vec<ScaleBands>,
    pub residual: Plane,
}

impl WaveletPyramid {
    pub fn num_scales(&self) -> usize {
        self.bands.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.residual.dims()
    }

    /// `ω_{s,θ}` with `s` counted from 1.
    pub fn band(&self, s: usize, o: Orientation) -> &Plane {
        &self.bands[s - 1][o.index()]
    }

    pub fn map_bands(&self, f: impl Fn(&Plane) -> Plane) -> WaveletPyramid {
        WaveletPyramid {
            bands: self.bands.iter().map(|b| [f(&b[0]), f(&b[1]), f(&b[2])]).collect(),
            residual: self.residual.clone(),
        }
    }
}

/// Decomposes `plane` with the scale count implied by its larger side.
pub fn decompose(plane: &Plane, boundary: Boundary) -> Result<WaveletPyramid> {
    let n = plane.width().max(plane.height());
    let scales = num_scales(n)?;
    decompose_scales(plane, scales, boundary)
}

/// Decomposes `plane` into exactly `scales` scales.
pub fn decompose_scales(plane: &Plane, scales: usize, boundary: Boundary) -> Result<WaveletPyramid> {
    if plane.is_empty() {
        return Err(invalid("cannot decompose an empty plane"));
    }
    if !plane.all_finite() {
        return Err(invalid("plane contains non-finite values"));
    }
    let mut bands = Vec::with_capacity(scales);
    let mut prev = plane.clone();
    let mut filter = ScalingFilter::h1();
    for s in 1..=scales {
        if s > 1 {
            filter = dilate_filter(&filter);
        }
        let c_h = prev.filter_rows(&filter.taps, boundary);
        let c_v = prev.filter_cols(&filter.taps, boundary);
        let c_hv = c_h.filter_cols(&filter.taps, boundary);
        let w_h = prev.zip_map(&c_h, |a, b| a - b);
        let w_v = prev.zip_map(&c_v, |a, b| a - b);
        let mut w_d = Plane::new(prev.width(), prev.height());
        let mut next = Plane::new(prev.width(), prev.height());
        for i in 0..prev.len() {
            let c = prev.as_slice()[i];
            let wh = w_h.as_slice()[i];
            let wv = w_v.as_slice()[i];
            let wd = c - (c_hv.as_slice()[i] + wh + wv);
            w_d.as_mut_slice()[i] = wd;
            next.as_mut_slice()[i] = c - (wh + wv + wd);
        }
        bands.push([w_h, w_v, w_d]);
        prev = next;
    }
    Ok(WaveletPyramid { bands, residual: prev })
}

/// Inverse transform: the sum of all detail planes and the residual.
pub fn synthesize(p: &WaveletPyramid) -> Plane {
    let mut out = p.residual.clone();
    for scale in &p.bands {
        for band in scale {
            out.add_assign(band);
        }
    }
    out
}

/// ON (positive part) and OFF (negated negative part) inputs of a plane.
pub fn split_on_off(plane: &Plane) -> (Plane, Plane) {
    (plane.map(|v| v.max(0.0)), plane.map(|v| (-v).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scale_counts() {
        assert_eq!(num_scales(128).unwrap(), 6);
        assert_eq!(num_scales(8).unwrap(), 2);
        assert_eq!(num_scales(100).unwrap(), 5);
        assert_eq!(num_scales(15).unwrap(), 2);
        assert_eq!(num_scales(16).unwrap(), 3);
        assert!(num_scales(7).is_err());
    }

    #[test]
    fn dilation() {
        let h2 = dilate_filter(&ScalingFilter::h1());
        let expect: Vec<f64> = [1.0, 0.0, 4.0, 0.0, 6.0, 0.0, 4.0, 0.0, 1.0]
            .iter()
            .map(|v| v / 16.0)
            .collect();
        assert_eq!(h2.taps, expect);
        assert_eq!(h2.scale, 2);

        let one = ScalingFilter {
            taps: vec![1.0],
            scale: 1,
        };
        assert_eq!(dilate_filter(&one).taps, vec![1.0]);

        // Hand expansion: h1 taps land on offsets 0, 4, 8, 12, 16.
        let h3 = ScalingFilter::for_scale(3);
        assert_eq!(h3.taps.len(), 17);
        for (k, &t) in h3.taps.iter().enumerate() {
            if k % 4 == 0 {
                assert_eq!(t, ScalingFilter::h1().taps[k / 4]);
            } else {
                assert_eq!(t, 0.0);
            }
        }
    }

    #[test]
    fn filters_are_normalized_and_symmetric() {
        for s in 1..7 {
            let f = ScalingFilter::for_scale(s);
            assert!((f.taps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let n = f.taps.len();
            for k in 0..n {
                assert_eq!(f.taps[k], f.taps[n - 1 - k]);
            }
        }
    }

    #[test]
    fn constant_plane_has_no_detail() {
        let p = Plane::filled(20, 12, 0.7);
        let pyr = decompose(&p, Boundary::Mirror).unwrap();
        assert_eq!(pyr.num_scales(), 3);
        for scale in &pyr.bands {
            for band in scale {
                assert!(band.as_slice().iter().all(|v| v.abs() < 1e-12));
            }
        }
        assert!(pyr.residual.as_slice().iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn zeroed_details_leave_the_residual() {
        let p = Plane::from_fn(16, 16, |x, y| ((x * 3 + y * 5) % 7) as f64);
        let pyr = decompose(&p, Boundary::Mirror).unwrap();
        let blurred = pyr.map_bands(|b| Plane::new(b.width(), b.height()));
        assert_eq!(synthesize(&blurred), pyr.residual);

        let zero = Plane::new(16, 16);
        let pyr = decompose(&zero, Boundary::Mirror).unwrap();
        assert_eq!(synthesize(&pyr), zero);
    }

    #[test]
    fn rejects_non_finite() {
        let mut p = Plane::new(8, 8);
        p.set(3, 3, f64::INFINITY);
        assert!(decompose(&p, Boundary::Mirror).is_err());
        assert!(decompose(&Plane::new(4, 20), Boundary::Mirror).is_ok());
        assert!(decompose(&Plane::new(4, 4), Boundary::Mirror).is_err());
    }

    #[test]
    fn on_off_examples() {
        let (on, off) = split_on_off(&Plane::filled(2, 2, 3.0));
        assert_eq!((on.get(0, 0), off.get(0, 0)), (3.0, 0.0));
        let (on, off) = split_on_off(&Plane::filled(2, 2, -2.0));
        assert_eq!((on.get(0, 0), off.get(0, 0)), (0.0, 2.0));
    }

    proptest! {
        #[test]
        fn on_off_partition(values in proptest::collection::vec(-5.0..5.0f64, 16)) {
            let p = Plane::from_vec(4, 4, values).unwrap();
            let (on, off) = split_on_off(&p);
            for i in 0..16 {
                let (a, b) = (on.as_slice()[i], off.as_slice()[i]);
                prop_assert!(a >= 0.0 && b >= 0.0);
                prop_assert_eq!(a * b, 0.0);
                prop_assert_eq!(a - b, p.as_slice()[i]);
            }
        }

        #[test]
        fn periodic_decomposition_commutes_with_shifts(
            values in proptest::collection::vec(-1.0..1.0f64, 16 * 12),
            dx in -20isize..20,
            dy in -20isize..20,
        ) {
            let p = Plane::from_vec(16, 12, values).unwrap();
            let a = decompose(&p.roll(dx, dy), Boundary::Periodic).unwrap();
            let b = decompose(&p, Boundary::Periodic).unwrap();
            for s in 0..a.num_scales() {
                for o in 0..3 {
                    let shifted = b.bands[s][o].roll(dx, dy);
                    for (u, v) in a.bands[s][o].as_slice().iter().zip(shifted.as_slice()) {
                        prop_assert!((u - v).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
