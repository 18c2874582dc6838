//! Raw float grids on disk.
//!
//! A saliency map (`.v1sf`) is the magic `V1SF`, then version, width and
//! height as little-endian `u32`, then `width × height` little-endian `f32`
//! samples in row-major order.
//!
//! A pyramid dump (`.v1sp`) starts with `V1SP`, version, width, height and a
//! plane count (all `u32`). Each plane carries its own `(s, θ)` header:
//! scale `s` from 1 and θ as 0 = h, 1 = v, 2 = d. The residual is written
//! last with `s = 0, θ = 0`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use v1sal_core::wavelet::{Orientation, WaveletPyramid};
use v1sal_core::Plane;

const MAP_MAGIC: &[u8; 4] = b"V1SF";
const PYRAMID_MAGIC: &[u8; 4] = b"V1SP";
const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn put_samples(w: &mut impl Write, p: &Plane) -> std::io::Result<()> {
    for &v in p.as_slice() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

fn get_samples(r: &mut impl Read, width: usize, height: usize) -> Result<Plane> {
    let mut bytes = vec![0u8; width * height * 4];
    r.read_exact(&mut bytes).context("truncated sample data")?;
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(Plane::from_vec(width, height, data)?)
}

pub fn write_map(path: &Path, map: &Plane) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(MAP_MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_u32(&mut w, map.width() as u32)?;
    put_u32(&mut w, map.height() as u32)?;
    put_samples(&mut w, map)?;
    w.flush()?;
    Ok(())
}

pub fn read_map(path: &Path) -> Result<Plane> {
    let mut r = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    ensure!(&magic == MAP_MAGIC, "{} is not a V1SF map", path.display());
    let version = get_u32(&mut r)?;
    ensure!(version == VERSION, "unsupported V1SF version {version}");
    let width = get_u32(&mut r)? as usize;
    let height = get_u32(&mut r)? as usize;
    ensure!(width > 0 && height > 0, "empty map in {}", path.display());
    get_samples(&mut r, width, height).with_context(|| format!("reading {}", path.display()))
}

/// One plane of a pyramid dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpedPlane {
    /// 1-based scale, or 0 for the residual.
    pub scale: u32,
    pub orientation: Option<Orientation>,
    pub plane: Plane,
}

pub fn write_pyramid(path: &Path, pyr: &WaveletPyramid) -> Result<()> {
    let (width, height) = pyr.residual.dims();
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(PYRAMID_MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_u32(&mut w, width as u32)?;
    put_u32(&mut w, height as u32)?;
    put_u32(&mut w, (pyr.num_scales() * 3 + 1) as u32)?;
    for (s, bands) in pyr.bands.iter().enumerate() {
        for o in Orientation::ALL {
            put_u32(&mut w, s as u32 + 1)?;
            put_u32(&mut w, o.index() as u32)?;
            put_samples(&mut w, &bands[o.index()])?;
        }
    }
    put_u32(&mut w, 0)?;
    put_u32(&mut w, 0)?;
    put_samples(&mut w, &pyr.residual)?;
    w.flush()?;
    Ok(())
}

pub fn read_pyramid(path: &Path) -> Result<Vec<DumpedPlane>> {
    let mut r = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    ensure!(&magic == PYRAMID_MAGIC, "{} is not a V1SP dump", path.display());
    let version = get_u32(&mut r)?;
    ensure!(version == VERSION, "unsupported V1SP version {version}");
    let width = get_u32(&mut r)? as usize;
    let height = get_u32(&mut r)? as usize;
    let count = get_u32(&mut r)?;
    let mut planes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let scale = get_u32(&mut r)?;
        let theta = get_u32(&mut r)?;
        let orientation = match (scale, theta) {
            (0, _) => None,
            (_, t @ 0..=2) => Some(Orientation::from_index(t as usize)),
            (_, t) => bail!("bad orientation code {t}"),
        };
        planes.push(DumpedPlane {
            scale,
            orientation,
            plane: get_samples(&mut r, width, height)?,
        });
    }
    Ok(planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use v1sal_core::wavelet::decompose;
    use v1sal_core::Boundary;

    #[test]
    fn map_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.v1sf");
        let p = Plane::from_fn(7, 3, |x, y| x as f64 * 0.25 - y as f64);
        write_map(&path, &p).unwrap();
        assert_eq!(read_map(&path).unwrap(), p);

        std::fs::write(&path, b"nope").unwrap();
        assert!(read_map(&path).is_err());
    }

    #[test]
    fn pyramid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.v1sp");
        let p = Plane::from_fn(16, 12, |x, y| ((x * 5 + y * 3) % 7) as f64 / 8.0);
        let pyr = decompose(&p, Boundary::Mirror).unwrap();
        write_pyramid(&path, &pyr).unwrap();
        let planes = read_pyramid(&path).unwrap();
        assert_eq!(planes.len(), pyr.num_scales() * 3 + 1);
        assert_eq!(planes[4].scale, 2);
        assert_eq!(planes[4].orientation, Some(Orientation::V));
        let last = planes.last().unwrap();
        assert_eq!((last.scale, last.orientation), (0, None));
        for (a, b) in last.plane.as_slice().iter().zip(pyr.residual.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
