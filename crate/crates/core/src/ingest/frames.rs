//! Pre-extracted video frames (netpbm or CSV matrices) to patterns.

use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::pnm::read_pnm;
use crate::dynamics::PatternMatrix;
use crate::error::{CdamError, Result};
use crate::rng;

/// Divisor applied to raw frame values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    /// Largest declared netpbm maxval; for CSV frames, the largest value
    /// across all frames.
    FileMaxval,
    Fixed(f64),
}

/// The neuron-to-pixel map shared by every frame of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSampler {
    pub flattened_len: usize,
    /// Sorted, unique flat indices.
    pub indices: Vec<usize>,
    pub divisor: f64,
}

impl FrameSampler {
    pub fn new(flattened_len: usize, n: usize, divisor: f64, seed: u64) -> Result<Self> {
        if n == 0 || n > flattened_len {
            return Err(CdamError::InvalidSize(format!(
                "cannot sample {n} values from frames of length {flattened_len}"
            )));
        }
        if !(divisor > 0.0 && divisor.is_finite()) {
            return Err(CdamError::InvalidParameter(format!(
                "frame normalizer must be positive, got {divisor}"
            )));
        }
        let mut r = rng::stream(seed, &[rng::TAG_SAMPLER, flattened_len as u64]);
        let mut indices = index::sample(&mut r, flattened_len, n).into_vec();
        indices.sort_unstable();
        Ok(Self {
            flattened_len,
            indices,
            divisor,
        })
    }

    pub fn apply(&self, flat: &[f64]) -> Result<Vec<f64>> {
        if flat.len() != self.flattened_len {
            return Err(CdamError::Ingest(format!(
                "frame has {} values, expected {}",
                flat.len(),
                self.flattened_len
            )));
        }
        Ok(self.indices.iter().map(|&i| flat[i] / self.divisor).collect())
    }
}

/// Raw flattened frame; the second value is the declared maxval for netpbm.
pub fn load_frame(path: &Path) -> Result<(Vec<f64>, Option<f64>)> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("csv") => {
            let mut rd = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_path(path)?;
            let mut out = Vec::new();
            let mut width = None;
            for rec in rd.records() {
                let rec = rec?;
                if *width.get_or_insert(rec.len()) != rec.len() {
                    return Err(CdamError::Ingest(format!(
                        "{}: ragged CSV rows",
                        path.display()
                    )));
                }
                for field in &rec {
                    out.push(field.parse::<f64>().map_err(|_| {
                        CdamError::Ingest(format!("{}: bad number `{field}`", path.display()))
                    })?);
                }
            }
            Ok((out, None))
        }
        _ => {
            let img = read_pnm(path)?;
            let flat = img.samples.iter().map(|&s| f64::from(s)).collect();
            Ok((flat, Some(f64::from(img.maxval))))
        }
    }
}

fn frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase)
                .is_some_and(|e| matches!(e.as_str(), "pgm" | "ppm" | "pnm" | "csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CdamError::Ingest(format!(
            "no frame files (.pgm/.ppm/.pnm/.csv) in {}",
            dir.display()
        )));
    }
    Ok(files)
}

pub fn ingest_frames(dir: &Path, n: usize, seed: u64) -> Result<(PatternMatrix, FrameSampler)> {
    ingest_frames_with(dir, n, seed, Normalizer::FileMaxval)
}

/// One pattern per frame in filename order, all sampled at the same indices.
pub fn ingest_frames_with(
    dir: &Path,
    n: usize,
    seed: u64,
    normalizer: Normalizer,
) -> Result<(PatternMatrix, FrameSampler)> {
    let files = frame_files(dir)?;
    let mut frames = Vec::with_capacity(files.len());
    for f in &files {
        frames.push(load_frame(f)?);
    }
    let len = frames[0].0.len();
    if let Some((i, _)) = frames.iter().enumerate().find(|(_, f)| f.0.len() != len) {
        return Err(CdamError::Ingest(format!(
            "{} has {} values, {} has {len}",
            files[i].display(),
            frames[i].0.len(),
            files[0].display()
        )));
    }
    let divisor = match normalizer {
        Normalizer::Fixed(d) => d,
        Normalizer::FileMaxval => frames
            .iter()
            .map(|(flat, maxval)| maxval.unwrap_or_else(|| flat.iter().fold(0.0, |m: f64, &x| m.max(x))))
            .fold(0.0, f64::max),
    };
    let sampler = FrameSampler::new(len, n, divisor, seed)?;
    let columns = frames
        .iter()
        .map(|(flat, _)| sampler.apply(flat))
        .collect::<Result<Vec<_>>>()?;
    Ok((PatternMatrix::from_columns(&columns)?, sampler))
}
