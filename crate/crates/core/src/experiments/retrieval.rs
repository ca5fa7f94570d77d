use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{ExperimentConfig, ExperimentReport, Setting};
use crate::dynamics::{init_state, Dynamics, PatternMatrix};
use crate::error::{CdamError, Result};
use crate::graph::{build_nn_scaffold, normalize, MemoryGraph};
use crate::ingest::IdxImages;
use crate::rng;

/// Memory loads used for the capacity sweep.
pub const PAPER_LEVELS: [usize; 10] = [10, 20, 30, 40, 50, 75, 100, 150, 200, 500];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetrievalCell {
    pub setting: Setting,
    pub p: usize,
    pub trials: usize,
    /// Fraction of triggers whose final state overlaps most with the
    /// trigger's own pattern.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrievalReport {
    pub cells: Vec<RetrievalCell>,
    pub dataset: String,
    pub config: ExperimentConfig,
}

impl RetrievalReport {
    pub fn accuracy(&self, setting: Setting, p: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.setting == setting && c.p == p)
            .map(|c| c.accuracy)
    }

    /// Accuracies of one setting in level order.
    pub fn curve(&self, setting: Setting) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter(|c| c.setting == setting)
            .map(|c| (c.p, c.accuracy))
            .collect()
    }

    pub fn to_report(&self) -> Result<ExperimentReport> {
        let mut r = ExperimentReport::new("retrieval-sweep")
            .with_grid(json!({
                "levels": self.cells.iter().map(|c| c.p).collect::<std::collections::BTreeSet<_>>(),
                "settings": self.cells.iter().map(|c| c.setting.label()).collect::<std::collections::BTreeSet<_>>(),
                "trials": self.cells.first().map(|c| c.trials),
                "config": self.config,
            }))?
            .with_statistics(&self.cells)?;
        r.input("dataset", self.dataset.clone());
        Ok(r)
    }
}

/// Fashion-like stand-in: ten classes of 28x28 greyscale items. Each class
/// is a blurred silhouette made of a few random ellipses; items vary the
/// silhouette's brightness, shift it by up to two pixels and add pixel
/// noise. Labels cycle through the classes.
pub fn surrogate_fashion(count: usize, seed: u64) -> Result<IdxImages> {
    const SIDE: usize = 28;
    if count == 0 {
        return Err(CdamError::InvalidSize("surrogate needs count >= 1".into()));
    }
    let mut r = rng::stream(seed, &[rng::TAG_SURROGATE, 0]);
    let protos: Vec<Vec<f64>> = (0..10)
        .map(|_| {
            let blobs: Vec<[f64; 5]> = (0..r.random_range(2..5))
                .map(|_| {
                    [
                        r.random_range(8.0..20.0),
                        r.random_range(8.0..20.0),
                        r.random_range(3.0..9.0),
                        r.random_range(3.0..9.0),
                        r.random_range(0.5..1.0),
                    ]
                })
                .collect();
            (0..SIDE * SIDE)
                .map(|k| {
                    let (y, x) = ((k / SIDE) as f64, (k % SIDE) as f64);
                    blobs
                        .iter()
                        .map(|b| {
                            let d = ((y - b[0]) / b[2]).powi(2) + ((x - b[1]) / b[3]).powi(2);
                            b[4] / (1.0 + (4.0 * (d - 1.0)).exp())
                        })
                        .fold(0.0f64, f64::max)
                })
                .collect()
        })
        .collect();
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    let mut r = rng::stream(seed, &[rng::TAG_SURROGATE, 1]);
    for i in 0..count {
        let class = i % 10;
        let gain = r.random_range(0.6..1.2);
        let (dy, dx) = (r.random_range(-2i64..=2), r.random_range(-2i64..=2));
        let img = (0..SIDE * SIDE)
            .map(|k| {
                let (y, x) = ((k / SIDE) as i64 - dy, (k % SIDE) as i64 - dx);
                let base = if (0..SIDE as i64).contains(&y) && (0..SIDE as i64).contains(&x) {
                    protos[class][y as usize * SIDE + x as usize]
                } else {
                    0.0
                };
                let noise = if base > 0.05 {
                    0.3 * (r.random::<f64>() - 0.5)
                } else {
                    0.0
                };
                // quantised like an 8-bit image
                ((gain * base + noise).clamp(0.0, 1.0) * 255.0).round() / 255.0
            })
            .collect();
        images.push(img);
        labels.push(class as u8);
    }
    Ok(IdxImages {
        rows: SIDE,
        cols: SIDE,
        images,
        labels: Some(labels),
    })
}

fn scaffold(patterns: &PatternMatrix) -> Result<MemoryGraph> {
    if patterns.p() < 2 {
        Ok(MemoryGraph::without_loops(patterns.p(), false))
    } else {
        build_nn_scaffold(patterns)
    }
}

/// Accuracy of one trial: `p` items drawn without replacement, each stored
/// pattern triggered with noise and converged.
fn trial_accuracy(
    images: &[Vec<f64>],
    p: usize,
    trial: usize,
    setting: Setting,
    cfg: &ExperimentConfig,
) -> Result<usize> {
    let mut r = rng::stream(cfg.seed, &[rng::TAG_SAMPLER, p as u64, trial as u64]);
    let picks = index::sample(&mut r, images.len(), p).into_vec();
    let columns: Vec<Vec<f64>> = picks.iter().map(|&i| images[i].clone()).collect();
    let patterns = PatternMatrix::from_columns(&columns)?;
    let coupling = normalize(&scaffold(&patterns)?);
    let dynamics = Dynamics::new(&patterns, &coupling, cfg.params(setting))?;
    let noise_seed = rng::derive_seed(cfg.seed, &[p as u64, trial as u64]);
    let mut batch = Array2::zeros((patterns.n(), p));
    for mu in 0..p {
        batch
            .column_mut(mu)
            .assign(&init_state(&patterns, mu, cfg.noise_c, noise_seed)?.sigma);
    }
    let fin = dynamics.converge_batch(&batch, cfg.stop)?;
    let overlaps = patterns.values().t().dot(&fin);
    Ok((0..p)
        .filter(|&mu| {
            let col = overlaps.column(mu);
            let best = col
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b });
            best.0 == mu
        })
        .count())
}

/// Accuracy for every `(setting, level)` pair over `trials` random subsets.
pub fn retrieval_sweep(
    images: &[Vec<f64>],
    dataset: &str,
    levels: &[usize],
    settings: &[Setting],
    trials: usize,
    cfg: &ExperimentConfig,
) -> Result<RetrievalReport> {
    if trials == 0 {
        return Err(CdamError::InvalidParameter("trials must be >= 1".into()));
    }
    if let Some(&p) = levels.iter().find(|&&p| p == 0 || p > images.len()) {
        return Err(CdamError::InvalidSize(format!(
            "level p={p} outside 1..={}",
            images.len()
        )));
    }
    let mut cells = Vec::new();
    for &setting in settings {
        for &p in levels {
            let mut hits = 0;
            for trial in 0..trials {
                hits += trial_accuracy(images, p, trial, setting, cfg)?;
            }
            cells.push(RetrievalCell {
                setting,
                p,
                trials,
                accuracy: hits as f64 / (p * trials) as f64,
            });
        }
    }
    Ok(RetrievalReport {
        cells,
        dataset: dataset.to_string(),
        config: *cfg,
    })
}
