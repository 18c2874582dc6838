//! RGB input and the opponent colour representation
//! `L = R+G+B`, `rg = (R−G)/L`, `by = (R+G−2B)/L`.

use crate::plane::Plane;
use crate::{invalid, Error, Result};
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

/// Below this luminance the chromatic opponencies are defined as zero.
pub const LUMINANCE_EPSILON: f64 = 1e-6;

/// Default gamma exponent applied to RGB values before the opponent transform.
pub const DEFAULT_GAMMA: f64 = 1.0 / 2.2;

/// Opponent channel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Channel {
    L,
    Rg,
    By,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::L, Channel::Rg, Channel::By];

    pub fn name(self) -> &'static str {
        match self {
            Channel::L => "l",
            Channel::Rg => "rg",
            Channel::By => "by",
        }
    }
}

/// Three equally sized planes with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
}

impl RgbImage {
    pub fn new(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        if r.dims() != g.dims() || r.dims() != b.dims() {
            return Err(Error::DimensionMismatch {
                expected: r.dims(),
                got: if r.dims() != g.dims() { g.dims() } else { b.dims() },
            });
        }
        let img = Self { r, g, b };
        img.validate()?;
        Ok(img)
    }

    /// Interleaved 8-bit RGB, mapped linearly onto `[0, 1]`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(invalid("rgb8 buffer length does not match dimensions"));
        }
        let chan = |c: usize| Plane::from_fn(width, height, |x, y| bytes[(y * width + x) * 3 + c] as f64 / 255.0);
        Ok(Self {
            r: chan(0),
            g: chan(1),
            b: chan(2),
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self {
            r: Plane::filled(width, height, rgb[0]),
            g: Plane::filled(width, height, rgb[1]),
            b: Plane::filled(width, height, rgb[2]),
        }
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [self.r.get(x, y), self.g.get(x, y), self.b.get(x, y)]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
        self.r.set(x, y, rgb[0]);
        self.g.set(x, y, rgb[1]);
        self.b.set(x, y, rgb[2]);
    }

    /// Quantizes to interleaved 8-bit RGB.
    pub fn to_rgb8(&self) -> alloc::vec::Vec<u8> {
        let mut out = alloc::vec::Vec::with_capacity(self.r.len() * 3);
        for i in 0..self.r.len() {
            for p in [&self.r, &self.g, &self.b] {
                out.push((p.as_slice()[i].clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.width() == 0 || self.height() == 0 {
            return Err(invalid("image has zero size"));
        }
        for p in [&self.r, &self.g, &self.b] {
            for &v in p.as_slice() {
                if !v.is_finite() {
                    return Err(invalid("image contains a non-finite sample"));
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid("image sample outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// Gamma-corrected luminance and the two chromatic opponencies.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentImage {
    pub l: Plane,
    pub rg: Plane,
    pub by: Plane,
}

impl OpponentImage {
    pub fn channel(&self, c: Channel) -> &Plane {
        match c {
            Channel::L => &self.l,
            Channel::Rg => &self.rg,
            Channel::By => &self.by,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.l.dims()
    }
}

/// Raises every sample to `gamma`.
pub fn gamma_correct(img: &RgbImage, gamma: f64) -> Result<RgbImage> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma must be positive and finite"));
    }
    img.validate()?;
    let f = |v: f64| v.powf(gamma);
    Ok(RgbImage {
        r: img.r.map(f),
        g: img.g.map(f),
        b: img.b.map(f),
    })
}

/// Per-pixel opponent transform. Chromatic planes are zero where
/// `L < LUMINANCE_EPSILON`.
pub fn to_opponent(img: &RgbImage) -> OpponentImage {
    let (w, h) = img.dims();
    let mut l = Plane::new(w, h);
    let mut rg = Plane::new(w, h);
    let mut by = Plane::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let [r, g, b] = img.pixel(x, y);
            let lum = r + g + b;
            l.set(x, y, lum);
            if lum >= LUMINANCE_EPSILON {
                rg.set(x, y, (r - g) / lum);
                by.set(x, y, (r + g - 2.0 * b) / lum);
            }
        }
    }
    OpponentImage { l, rg, by }
}

/// An image brought down to the working resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResizedImage {
    pub image: RgbImage,
    /// `new / original` along each axis (1 when untouched).
    pub scale: f64,
    pub original_dims: (usize, usize),
}

/// Downscales so the larger side equals `limit`, preserving the aspect ratio.
/// Images already within the limit are returned unchanged.
pub fn resize_max_side(img: &RgbImage, limit: usize) -> Result<ResizedImage> {
    if limit < 8 {
        return Err(invalid("resize limit must be at least 8 pixels"));
    }
    let (w, h) = img.dims();
    if w == 0 || h == 0 {
        return Err(invalid("image has zero size"));
    }
    let larger = w.max(h);
    if larger <= limit {
        return Ok(ResizedImage {
            image: img.clone(),
            scale: 1.0,
            original_dims: (w, h),
        });
    }
    let scale = limit as f64 / larger as f64;
    let (nw, nh) = if w >= h {
        (limit, ((h as f64 * scale).round() as usize).max(1))
    } else {
        (((w as f64 * scale).round() as usize).max(1), limit)
    };
    let clamp01 = |p: Plane| p.map(|v| v.clamp(0.0, 1.0));
    Ok(ResizedImage {
        image: RgbImage {
            r: clamp01(img.r.resize_bilinear(nw, nh)),
            g: clamp01(img.g.resize_bilinear(nw, nh)),
            b: clamp01(img.b.resize_bilinear(nw, nh)),
        },
        scale,
        original_dims: (w, h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(rgb: [f64; 3]) -> RgbImage {
        RgbImage::filled(1, 1, rgb)
    }

    #[test]
    fn gamma_fixed_points_and_identity() {
        let img = RgbImage::new(
            Plane::from_vec(3, 1, alloc::vec![0.0, 0.25, 1.0]).unwrap(),
            Plane::filled(3, 1, 0.5),
            Plane::filled(3, 1, 0.0),
        )
        .unwrap();
        let g = gamma_correct(&img, DEFAULT_GAMMA).unwrap();
        assert_eq!(g.r.get(0, 0), 0.0);
        assert_eq!(g.r.get(2, 0), 1.0);
        // 0.25^(1/2.2), evaluated independently: exp(ln 0.25 / 2.2)
        assert!((g.r.get(1, 0) - 0.532_520_544_719_981_3).abs() < 1e-12);
        assert_eq!(gamma_correct(&img, 1.0).unwrap(), img);
    }

    #[test]
    fn gamma_rejects_bad_input() {
        let mut img = px([0.2, 0.2, 0.2]);
        img.r.set(0, 0, f64::NAN);
        assert!(gamma_correct(&img, 0.5).is_err());
        assert!(gamma_correct(&px([0.2, 0.2, 0.2]), 0.0).is_err());
    }

    #[test]
    fn opponent_examples() {
        let o = to_opponent(&px([0.5, 0.5, 0.5]));
        assert_eq!((o.l.get(0, 0), o.rg.get(0, 0), o.by.get(0, 0)), (1.5, 0.0, 0.0));
        let o = to_opponent(&px([1.0, 0.0, 0.0]));
        assert_eq!((o.l.get(0, 0), o.rg.get(0, 0), o.by.get(0, 0)), (1.0, 1.0, 1.0));
        let o = to_opponent(&px([0.0, 0.0, 0.0]));
        assert_eq!((o.l.get(0, 0), o.rg.get(0, 0), o.by.get(0, 0)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn resize_examples() {
        let img = RgbImage::filled(640, 480, [0.1, 0.2, 0.3]);
        let r = resize_max_side(&img, 128).unwrap();
        assert_eq!(r.image.dims(), (128, 96));
        assert!((r.scale - 0.2).abs() < 1e-15);
        for (w, h) in [(100, 80), (128, 128)] {
            let img = RgbImage::filled(w, h, [0.1, 0.2, 0.3]);
            let r = resize_max_side(&img, 128).unwrap();
            assert_eq!(r.image, img);
            assert_eq!(r.scale, 1.0);
        }
        assert!(resize_max_side(&img, 4).is_err());
    }

    fn rgb() -> impl Strategy<Value = [f64; 3]> {
        [0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64]
    }

    proptest! {
        #[test]
        fn opponent_scale_invariance(c in rgb(), k in 0.05..1.0f64) {
            let a = to_opponent(&px(c));
            let b = to_opponent(&px([c[0] * k, c[1] * k, c[2] * k]));
            prop_assert!((b.l.get(0, 0) - k * a.l.get(0, 0)).abs() < 1e-12);
            if b.l.get(0, 0) > LUMINANCE_EPSILON {
                prop_assert!((b.rg.get(0, 0) - a.rg.get(0, 0)).abs() < 1e-9);
                prop_assert!((b.by.get(0, 0) - a.by.get(0, 0)).abs() < 1e-9);
            }
        }

        #[test]
        fn swapping_red_green_negates_rg(c in rgb()) {
            let a = to_opponent(&px(c));
            let b = to_opponent(&px([c[1], c[0], c[2]]));
            prop_assert_eq!(b.rg.get(0, 0), -a.rg.get(0, 0));
            prop_assert_eq!(b.by.get(0, 0), a.by.get(0, 0));
            prop_assert_eq!(b.l.get(0, 0), a.l.get(0, 0));
        }

        #[test]
        fn gamma_inverse_round_trip(c in rgb(), g in 0.2..5.0f64) {
            let img = px(c);
            let back = gamma_correct(&gamma_correct(&img, g).unwrap(), 1.0 / g).unwrap();
            for (a, b) in [(&img.r, &back.r), (&img.g, &back.g), (&img.b, &back.b)] {
                prop_assert!((a.get(0, 0) - b.get(0, 0)).abs() < 1e-12);
            }
        }
    }
}
