use ndarray::Array2;
use serde::Serialize;
use serde_json::json;

use super::{ExperimentConfig, ExperimentReport, Setting};
use crate::dynamics::SimulationTrace;
use crate::error::Result;
use crate::graph::{normalize, MemoryGraph};
use crate::ingest::random_patterns;

/// Snapshot times reported for every run.
pub const SNAPSHOT_TIMES: [usize; 4] = [1, 11, 26, 101];

/// All triggered runs of one setting.
#[derive(Debug, Clone)]
pub struct SettingRun {
    pub setting: Setting,
    pub traces: Vec<SimulationTrace>,
}

impl SettingRun {
    /// Correlations at time `t` (or the last record if the run stopped
    /// earlier), rows are triggers.
    pub fn correlations_at(&self, t: usize) -> Array2<f64> {
        let p = self.traces.len();
        let mut out = Array2::from_elem((p, p), f64::NAN);
        for (i, tr) in self.traces.iter().enumerate() {
            let rec = tr.at(t).unwrap_or_else(|| tr.last());
            for (j, c) in rec.correlations.iter().enumerate() {
                out[[i, j]] = c.unwrap_or(f64::NAN);
            }
        }
        out
    }

    pub fn final_correlations(&self) -> Array2<f64> {
        self.correlations_at(usize::MAX)
    }

    pub fn final_means(&self) -> Vec<f64> {
        self.traces.iter().map(|t| t.last().mean).collect()
    }
}

#[derive(Debug, Clone)]
pub struct FourModesReport {
    pub graph_fingerprint: String,
    pub config: ExperimentConfig,
    pub runs: Vec<SettingRun>,
}

#[derive(Serialize)]
struct SettingSummary {
    a: f64,
    h: f64,
    max_abs_final_mean: f64,
    mean_trigger_r: f64,
}

impl FourModesReport {
    pub fn to_report(&self, name: &str) -> Result<ExperimentReport> {
        let summaries: Vec<SettingSummary> = self
            .runs
            .iter()
            .map(|run| {
                let fin = run.final_correlations();
                let p = fin.nrows();
                SettingSummary {
                    a: run.setting.a,
                    h: run.setting.h,
                    max_abs_final_mean: run.final_means().iter().fold(0.0, |m, x| m.max(x.abs())),
                    mean_trigger_r: (0..p).map(|i| fin[[i, i]]).sum::<f64>() / p as f64,
                }
            })
            .collect();
        let mut report = ExperimentReport::new(name)
            .with_grid(json!({
                "settings": self.runs.iter().map(|r| r.setting).collect::<Vec<_>>(),
                "config": self.config,
                "snapshots": SNAPSHOT_TIMES,
            }))?
            .with_statistics(summaries)?;
        report.input("graph", self.graph_fingerprint.clone());
        report.input("patterns", format!("uniform n={} seed={}", self.config.n, self.config.seed));
        for run in &self.runs {
            let label = run.setting.label();
            for &t in &SNAPSHOT_TIMES {
                report.add_matrix(&format!("{label}_t{t}"), run.correlations_at(t), true);
            }
            for (mu, tr) in run.traces.iter().enumerate() {
                report.traces.push((format!("{label}_trigger{mu}"), tr.clone()));
            }
        }
        Ok(report)
    }
}

/// Runs every vertex as a trigger under each setting on random patterns.
pub fn four_modes(
    graph: &MemoryGraph,
    settings: &[Setting],
    cfg: &ExperimentConfig,
) -> Result<FourModesReport> {
    let patterns = random_patterns(cfg.n, graph.vertex_count(), cfg.seed)?;
    let coupling = normalize(graph);
    let runs = settings
        .iter()
        .map(|&setting| {
            Ok(SettingRun {
                setting,
                traces: super::traced_runs(&patterns, &coupling, setting, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FourModesReport {
        graph_fingerprint: graph.fingerprint(),
        config: *cfg,
        runs,
    })
}

fn value(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x
    }
}

/// Trigger at or above `hi`, every other pattern at or below `lo`.
pub fn trigger_dominant(corrs: &[f64], trigger: usize, hi: f64, lo: f64) -> bool {
    value(corrs[trigger]) >= hi
        && corrs
            .iter()
            .enumerate()
            .all(|(j, &c)| j == trigger || value(c) <= lo)
}

/// Some graph neighbour above `threshold`.
pub fn neighbor_coactivation(corrs: &[f64], neighbors: &[usize], threshold: f64) -> bool {
    neighbors.iter().any(|&v| value(corrs[v]) > threshold)
}

/// More than half of `component` with `|r| > threshold`.
pub fn component_wide(corrs: &[f64], component: &[usize], threshold: f64) -> bool {
    let active = component
        .iter()
        .filter(|&&v| value(corrs[v]).abs() > threshold)
        .count();
    2 * active > component.len()
}

/// Every `|r|` at or below `threshold`; undefined correlations count as 0.
pub fn quiescent(corrs: &[f64], threshold: f64) -> bool {
    corrs.iter().all(|&c| value(c).abs() <= threshold)
}
