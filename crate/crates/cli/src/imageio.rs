//! PNG/JPEG decoding and PNG encoding of maps, stimuli and masks.

use std::path::Path;

use anyhow::{Context, Result};
use image::{GrayImage, ImageReader, Luma, RgbImage as Rgb8};
use v1sal_core::color::RgbImage;
use v1sal_core::Plane;

pub const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "bmp", "tif", "tiff"];

pub fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = ImageReader::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .with_guessed_format()?
        .decode()
        .with_context(|| format!("decoding {}", path.display()))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    Ok(RgbImage::from_rgb8(w as usize, h as usize, img.as_raw())?)
}

/// Single-channel image as a plane of samples in `[0, 1]`.
pub fn load_gray(path: &Path) -> Result<Plane> {
    let img = ImageReader::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .with_guessed_format()?
        .decode()
        .with_context(|| format!("decoding {}", path.display()))?
        .to_luma8();
    let (w, h) = img.dimensions();
    Ok(Plane::from_fn(w as usize, h as usize, |x, y| {
        img.get_pixel(x as u32, y as u32)[0] as f64 / 255.0
    }))
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    let (w, h) = img.dims();
    let buf = Rgb8::from_raw(w as u32, h as u32, img.to_rgb8()).expect("buffer matches dimensions");
    buf.save(path).with_context(|| format!("writing {}", path.display()))
}

/// 8-bit grayscale with the map's range stretched to 0..255; a constant map
/// is written as mid-grey.
pub fn save_map_png(path: &Path, map: &Plane) -> Result<()> {
    let (lo, hi) = (map.min(), map.max());
    let span = hi - lo;
    let img = GrayImage::from_fn(map.width() as u32, map.height() as u32, |x, y| {
        let v = map.get(x as usize, y as usize);
        let t = if span > 0.0 { (v - lo) / span } else { 0.5 };
        Luma([(t * 255.0).round() as u8])
    });
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

/// Binary mask: 255 where `mask > 0.5`.
pub fn save_mask_png(path: &Path, mask: &Plane) -> Result<()> {
    let img = GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) > 0.5 { 255 } else { 0 }])
    });
    img.save(path).with_context(|| format!("writing {}", path.display()))
}
