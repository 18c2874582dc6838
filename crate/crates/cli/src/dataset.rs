//! Dataset manifests built by scanning a directory:
//!
//! ```text
//! <root>/images/<id>.png     stimuli (any decodable format)
//! <root>/fixations.csv       rows `image,x,y` in image pixels
//! <root>/maps/<id>.png       or binary fixation maps instead of the CSV
//! <root>/masks/<id>.png      optional target masks
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use v1sal_core::metrics::FixationSet;

use crate::imageio::{is_image, load_gray};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageEntry {
    pub id: String,
    pub path: PathBuf,
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    pub root: PathBuf,
    pub images: Vec<ImageEntry>,
    /// Keyed by image id. Empty when the dataset has no fixation data.
    pub fixations: BTreeMap<String, FixationSet>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FixationRow {
    image: String,
    x: f64,
    y: f64,
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .with_context(|| format!("file name of {} is not valid UTF-8", path.display()))
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && is_image(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

impl Dataset {
    /// Scans `root`. Images come from `root/images` if present, otherwise
    /// from `root` itself.
    pub fn scan(root: &Path) -> Result<Self> {
        ensure!(root.is_dir(), "dataset directory {} does not exist", root.display());
        let image_dir = if root.join("images").is_dir() {
            root.join("images")
        } else {
            root.to_path_buf()
        };
        let mask_dir = root.join("masks");
        let mut images = Vec::new();
        for path in list_images(&image_dir)? {
            let id = stem(&path)?;
            let mask = mask_dir.join(format!("{id}.png"));
            images.push(ImageEntry {
                id,
                path,
                mask: mask.is_file().then_some(mask),
            });
        }
        ensure!(!images.is_empty(), "no images found in {}", image_dir.display());
        for pair in images.windows(2) {
            if pair[0].id == pair[1].id {
                bail!("two images share the id {}", pair[0].id);
            }
        }

        let csv = root.join("fixations.csv");
        let maps = root.join("maps");
        let fixations = if csv.is_file() {
            read_fixations_csv(&csv, &images)?
        } else if maps.is_dir() {
            read_fixation_maps(&maps, &images)?
        } else {
            BTreeMap::new()
        };
        let id = root
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().and_then(|n| n.to_str()).map(str::to_owned))
            .unwrap_or_else(|| "dataset".into());
        Ok(Self {
            id,
            root: root.to_path_buf(),
            images,
            fixations,
        })
    }

    pub fn has_fixations(&self) -> bool {
        !self.fixations.is_empty()
    }

    /// Fails unless every image has a non-empty fixation record.
    pub fn require_fixations(&self) -> Result<()> {
        for e in &self.images {
            match self.fixations.get(&e.id) {
                Some(f) if !f.is_empty() => {}
                _ => bail!("image {} has no fixations", e.id),
            }
        }
        Ok(())
    }
}

fn image_dims(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = image::image_dimensions(path).with_context(|| format!("reading size of {}", path.display()))?;
    Ok((w as usize, h as usize))
}

fn read_fixations_csv(path: &Path, images: &[ImageEntry]) -> Result<BTreeMap<String, FixationSet>> {
    let mut points: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    for (line, row) in reader.deserialize::<FixationRow>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        points.entry(row.image).or_default().push((row.x, row.y));
    }
    let mut out = BTreeMap::new();
    for e in images {
        if let Some(p) = points.remove(&e.id) {
            let (w, h) = image_dims(&e.path)?;
            let set = FixationSet::new(e.id.clone(), w, h, p).with_context(|| format!("fixations of {}", e.id))?;
            out.insert(e.id.clone(), set);
        }
    }
    if let Some(orphan) = points.keys().next() {
        log::warn!("fixations.csv names image {orphan}, which is not in the dataset");
    }
    Ok(out)
}

fn read_fixation_maps(dir: &Path, images: &[ImageEntry]) -> Result<BTreeMap<String, FixationSet>> {
    let mut out = BTreeMap::new();
    for e in images {
        let path = dir.join(format!("{}.png", e.id));
        if path.is_file() {
            let map = load_gray(&path)?;
            out.insert(e.id.clone(), FixationSet::from_map(e.id.clone(), &map)?);
        }
    }
    Ok(out)
}

pub fn write_fixations_csv(path: &Path, sets: &[FixationSet]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for set in sets {
        for &(x, y) in &set.points {
            w.serialize(FixationRow {
                image: set.image_id.clone(),
                x,
                y,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::{save_mask_png, save_rgb};
    use v1sal_core::color::RgbImage;
    use v1sal_core::Plane;

    fn write_images(dir: &Path, ids: &[&str]) {
        std::fs::create_dir_all(dir).unwrap();
        for id in ids {
            save_rgb(&dir.join(format!("{id}.png")), &RgbImage::filled(6, 4, [0.2, 0.4, 0.6])).unwrap();
        }
    }

    #[test]
    fn scans_images_csv_and_masks() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path();
        write_images(&root.join("images"), &["b", "a"]);
        std::fs::create_dir(root.join("masks")).unwrap();
        save_mask_png(&root.join("masks/a.png"), &Plane::filled(6, 4, 1.0)).unwrap();
        let sets = vec![
            FixationSet::new("a", 6, 4, vec![(1.0, 1.0), (5.5, 3.5)]).unwrap(),
            FixationSet::new("b", 6, 4, vec![(0.0, 0.0)]).unwrap(),
        ];
        write_fixations_csv(&root.join("fixations.csv"), &sets).unwrap();

        let ds = Dataset::scan(root).unwrap();
        assert_eq!(ds.images.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert!(ds.images[0].mask.is_some() && ds.images[1].mask.is_none());
        assert_eq!(ds.fixations["a"], sets[0]);
        ds.require_fixations().unwrap();
    }

    #[test]
    fn fixation_maps_and_missing_records() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path();
        write_images(&root.join("images"), &["x", "y"]);
        std::fs::create_dir(root.join("maps")).unwrap();
        let mut m = Plane::new(6, 4);
        m.set(2, 3, 1.0);
        save_mask_png(&root.join("maps/x.png"), &m).unwrap();
        let ds = Dataset::scan(root).unwrap();
        assert_eq!(ds.fixations["x"].points, vec![(2.0, 3.0)]);
        assert!(ds.require_fixations().is_err());
    }

    #[test]
    fn flat_directories_and_bad_rows() {
        let tmp = tempfile::tempdir().unwrap();
        write_images(tmp.path(), &["only"]);
        let ds = Dataset::scan(tmp.path()).unwrap();
        assert_eq!(ds.images.len(), 1);
        assert!(!ds.has_fixations());

        std::fs::write(tmp.path().join("fixations.csv"), "image,x,y\nonly,9,1\n").unwrap();
        assert!(Dataset::scan(tmp.path()).is_err());
        assert!(Dataset::scan(&tmp.path().join("nope")).is_err());
    }
}
