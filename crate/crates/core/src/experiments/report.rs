use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::SimulationTrace;
use crate::error::Result;

/// Output bundle of one experiment, written as a directory:
/// `report.json`, `traces/*.csv`, `matrices/*.csv`, `heatmaps/*.pgm`.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub grid: Value,
    pub statistics: Value,
    /// Input label to fingerprint (graph hashes, pattern seeds, files).
    pub inputs: BTreeMap<String, String>,
    pub traces: Vec<(String, SimulationTrace)>,
    pub matrices: Vec<(String, Array2<f64>)>,
    /// Matrices with values in `[-1, 1]` also rendered as greyscale images.
    pub heatmaps: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            grid: Value::Null,
            statistics: Value::Null,
            ..Self::default()
        }
    }

    pub fn with_grid(mut self, grid: impl Serialize) -> Result<Self> {
        self.grid = serde_json::to_value(grid)?;
        Ok(self)
    }

    pub fn with_statistics(mut self, stats: impl Serialize) -> Result<Self> {
        self.statistics = serde_json::to_value(stats)?;
        Ok(self)
    }

    pub fn input(&mut self, label: &str, fingerprint: impl Into<String>) {
        self.inputs.insert(label.to_string(), fingerprint.into());
    }

    pub fn add_matrix(&mut self, name: &str, m: Array2<f64>, heatmap: bool) {
        if heatmap {
            self.heatmaps.push(name.to_string());
        }
        self.matrices.push((name.to_string(), m));
    }

    pub fn manifest(&self) -> Value {
        json!({
            "experiment": self.name,
            "grid": self.grid,
            "inputs": self.inputs,
            "statistics": self.statistics,
            "traces": self.traces.iter().map(|(n, _)| format!("traces/{n}.csv")).collect::<Vec<_>>(),
            "matrices": self.matrices.iter().map(|(n, _)| format!("matrices/{n}.csv")).collect::<Vec<_>>(),
            "heatmaps": self.heatmaps.iter().map(|n| format!("heatmaps/{n}.pgm")).collect::<Vec<_>>(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if !self.traces.is_empty() {
            std::fs::create_dir_all(dir.join("traces"))?;
            for (name, trace) in &self.traces {
                trace.save_csv(&dir.join("traces").join(format!("{name}.csv")))?;
            }
        }
        if !self.matrices.is_empty() {
            std::fs::create_dir_all(dir.join("matrices"))?;
            for (name, m) in &self.matrices {
                write_matrix_csv(m, &dir.join("matrices").join(format!("{name}.csv")))?;
            }
        }
        if !self.heatmaps.is_empty() {
            std::fs::create_dir_all(dir.join("heatmaps"))?;
            for name in &self.heatmaps {
                if let Some((_, m)) = self.matrices.iter().find(|(n, _)| n == name) {
                    std::fs::write(dir.join("heatmaps").join(format!("{name}.pgm")), heatmap_pgm(m))?;
                }
            }
        }
        let text = serde_json::to_string_pretty(&self.manifest())?;
        std::fs::write(dir.join("report.json"), text + "\n")?;
        Ok(())
    }
}

fn write_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in m.rows() {
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Binary greymap, `[-1, 1]` mapped linearly onto `[0, 255]`; NaN renders black.
pub fn heatmap_pgm(m: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = m.dim();
    let mut out = Vec::with_capacity(rows * cols + 20);
    let _ = write!(out, "P5\n{cols} {rows}\n255\n");
    out.extend(m.iter().map(|&x| {
        if x.is_nan() {
            0
        } else {
            ((x.clamp(-1.0, 1.0) + 1.0) / 2.0 * 255.0).round() as u8
        }
    }));
    out
}
