use ndarray::Array2;
use serde_json::json;

use super::{final_states, ExperimentConfig, ExperimentReport, Setting};
use crate::dynamics::pearson_slices;
use crate::error::{CdamError, Result};
use crate::graph::{normalize, MemoryGraph};
use crate::ingest::random_patterns;

/// Pairwise correlations between the final states of every trigger run.
#[derive(Debug, Clone)]
pub struct CommunityResult {
    pub setting: Setting,
    pub matrix: Array2<f64>,
}

/// One matrix per setting; rows and columns follow vertex order.
pub fn community_matrices(
    graph: &MemoryGraph,
    settings: &[Setting],
    cfg: &ExperimentConfig,
) -> Result<Vec<CommunityResult>> {
    let patterns = random_patterns(cfg.n, graph.vertex_count(), cfg.seed)?;
    let coupling = normalize(graph);
    settings
        .iter()
        .map(|&setting| {
            let runs = final_states(&patterns, &coupling, setting, cfg)?;
            let p = runs.len();
            let mut m = Array2::from_elem((p, p), f64::NAN);
            for i in 0..p {
                m[[i, i]] = 1.0;
                for j in i + 1..p {
                    let r = pearson_slices(runs[i].state.sigma.view(), runs[j].state.sigma.view())
                        .unwrap_or(f64::NAN);
                    m[[i, j]] = r;
                    m[[j, i]] = r;
                }
            }
            Ok(CommunityResult { setting, matrix: m })
        })
        .collect()
}

/// Mean within-block off-diagonal entry minus mean cross-block entry.
/// Vertices labelled `-1` are left out; NaN entries are skipped.
pub fn block_contrast(matrix: &Array2<f64>, blocks: &[i64]) -> Result<f64> {
    if matrix.nrows() != blocks.len() || matrix.ncols() != blocks.len() {
        return Err(CdamError::DimensionMismatch {
            what: "block labels vs matrix size",
            expected: matrix.nrows(),
            found: blocks.len(),
        });
    }
    let (mut within, mut nw, mut cross, mut nc) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..blocks.len() {
        for j in 0..blocks.len() {
            let x = matrix[[i, j]];
            if i == j || blocks[i] < 0 || blocks[j] < 0 || x.is_nan() {
                continue;
            }
            if blocks[i] == blocks[j] {
                within += x;
                nw += 1;
            } else {
                cross += x;
                nc += 1;
            }
        }
    }
    if nw == 0 || nc == 0 {
        return Err(CdamError::InvalidParameter(
            "block contrast needs at least two blocks with a pair inside one".into(),
        ));
    }
    Ok(within / nw as f64 - cross / nc as f64)
}

/// Report with one heatmap per setting and, given labels, the block contrasts.
pub fn community_report(
    name: &str,
    graph: &MemoryGraph,
    blocks: Option<&[i64]>,
    results: &[CommunityResult],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let contrasts = match blocks {
        Some(b) => results
            .iter()
            .map(|r| block_contrast(&r.matrix, b).map(Some))
            .collect::<Result<Vec<_>>>()?,
        None => vec![None; results.len()],
    };
    let mut report = ExperimentReport::new(name)
        .with_grid(json!({
            "settings": results.iter().map(|r| r.setting).collect::<Vec<_>>(),
            "config": cfg,
        }))?
        .with_statistics(json!({
            "block_contrast": results.iter().zip(&contrasts).map(|(r, c)| json!({
                "a": r.setting.a, "h": r.setting.h, "contrast": c,
            })).collect::<Vec<_>>(),
            "blocks": blocks,
        }))?;
    report.input("graph", graph.fingerprint());
    report.input("patterns", format!("uniform n={} seed={}", cfg.n, cfg.seed));
    for r in results {
        report.add_matrix(&format!("{}_final_state_correlations", r.setting.label()), r.matrix.clone(), true);
    }
    Ok(report)
}
