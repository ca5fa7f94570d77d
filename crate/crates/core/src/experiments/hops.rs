use ndarray::Array2;
use serde::Serialize;
use serde_json::json;

use super::{final_states, ExperimentConfig, ExperimentReport, FinalRun, Setting};
use crate::dynamics::pearson_slices;
use crate::error::{CdamError, Result};
use crate::graph::{normalize, MemoryGraph};
use crate::ingest::random_patterns;
use crate::stats::{mean, one_way_anova, r_squared, sample_sd, sem, Anova};

/// A hop counts as recalled when its mean correlation exceeds this.
pub const RANGE_THRESHOLD: f64 = 0.1;

/// Hop-distance 0..6 autocorrelations from the 28-cell group.
pub const MIYASHITA_MEANS: [f64; 7] = [1.0, 0.33810, 0.19700, 0.11940, 0.08806, 0.07015, 0.06493];
pub const MIYASHITA_SEMS: [f64; 7] = [0.0, 0.03731, 0.03582, 0.02985, 0.02388, 0.02015, 0.02239];

/// Final-state correlations grouped by hop distance from the trigger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopProfile {
    /// `per_trigger[mu][d]`: mean correlation with patterns `d` hops from `mu`
    /// (NaN when no vertex sits at that distance).
    pub per_trigger: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub sem: Vec<f64>,
}

impl HopProfile {
    fn from_rows(per_trigger: Vec<Vec<f64>>, max_hop: usize) -> Self {
        let mut m = Vec::with_capacity(max_hop + 1);
        let mut s = Vec::with_capacity(max_hop + 1);
        let mut e = Vec::with_capacity(max_hop + 1);
        for d in 0..=max_hop {
            let col: Vec<f64> = per_trigger
                .iter()
                .map(|row| row[d])
                .filter(|x| !x.is_nan())
                .collect();
            if col.is_empty() {
                m.push(f64::NAN);
                s.push(f64::NAN);
                e.push(f64::NAN);
            } else {
                m.push(mean(&col));
                s.push(if col.len() > 1 { sample_sd(&col) } else { 0.0 });
                e.push(if col.len() > 1 { sem(&col) } else { 0.0 });
            }
        }
        Self {
            per_trigger,
            mean: m,
            sd: s,
            sem: e,
        }
    }

    pub fn max_hop(&self) -> usize {
        self.mean.len() - 1
    }
}

/// Largest hop whose value exceeds [`RANGE_THRESHOLD`]; 0 when none does.
pub fn effective_range(profile: &[f64]) -> usize {
    profile
        .iter()
        .rposition(|&x| x > RANGE_THRESHOLD)
        .unwrap_or(0)
}

fn profile_rows(
    graph: &MemoryGraph,
    max_hop: usize,
    value: impl Fn(usize, usize) -> f64,
) -> Vec<Vec<f64>> {
    (0..graph.vertex_count())
        .map(|mu| {
            let dist = graph.hop_distances(mu);
            let mut sums = vec![0.0; max_hop + 1];
            let mut counts = vec![0usize; max_hop + 1];
            for (v, d) in dist.iter().enumerate() {
                if let Some(d) = *d {
                    if d <= max_hop {
                        let x = value(mu, v);
                        let x = if x.is_nan() { 0.0 } else { x };
                        sums[d] += x;
                        counts[d] += 1;
                    }
                }
            }
            sums.iter()
                .zip(&counts)
                .map(|(&s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
                .collect()
        })
        .collect()
}

/// Correlation of each trigger's final state with the patterns at each hop.
/// Undefined correlations (flat final state) count as 0.
pub fn hop_profile(graph: &MemoryGraph, runs: &[FinalRun], max_hop: usize) -> HopProfile {
    HopProfile::from_rows(
        profile_rows(graph, max_hop, |mu, v| runs[mu].correlations[v]),
        max_hop,
    )
}

/// Correlation between the final states reached from triggers `d` hops apart.
/// Hop 0 is 1 by construction.
pub fn attractor_profile(graph: &MemoryGraph, runs: &[FinalRun], max_hop: usize) -> HopProfile {
    let p = runs.len();
    let mut c = Array2::from_elem((p, p), f64::NAN);
    for i in 0..p {
        for j in i..p {
            let r = pearson_slices(runs[i].state.sigma.view(), runs[j].state.sigma.view())
                .unwrap_or(f64::NAN);
            c[[i, j]] = r;
            c[[j, i]] = r;
        }
    }
    HopProfile::from_rows(profile_rows(graph, max_hop, |mu, v| c[[mu, v]]), max_hop)
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeCell {
    pub setting: Setting,
    pub profile: HopProfile,
    /// Range of the across-trigger mean profile.
    pub effective_range: usize,
    /// Range of every trigger's own profile; the ANOVA groups.
    pub trigger_ranges: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopRangeReport {
    pub cells: Vec<RangeCell>,
    pub anova: Anova,
    pub graph_fingerprint: String,
    pub config: ExperimentConfig,
}

impl HopRangeReport {
    pub fn ranges(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.effective_range).collect()
    }

    pub fn to_report(&self) -> Result<ExperimentReport> {
        let mut r = ExperimentReport::new("hop-range")
            .with_grid(json!({
                "settings": self.cells.iter().map(|c| c.setting).collect::<Vec<_>>(),
                "config": self.config,
                "range_threshold": RANGE_THRESHOLD,
                "anova_groups": "per-trigger effective ranges",
            }))?
            .with_statistics(json!({
                "effective_ranges": self.ranges(),
                "anova": self.anova,
                "profiles": self.cells.iter().map(|c| json!({
                    "a": c.setting.a, "h": c.setting.h,
                    "mean": c.profile.mean, "sd": c.profile.sd,
                    "trigger_ranges": c.trigger_ranges,
                })).collect::<Vec<_>>(),
            }))?;
        r.input("graph", self.graph_fingerprint.clone());
        r.input("patterns", format!("uniform n={} seed={}", self.config.n, self.config.seed));
        for c in &self.cells {
            r.add_matrix(
                &format!("{}_hop_profile", c.setting.label()),
                rows_matrix(&c.profile.per_trigger),
                false,
            );
        }
        Ok(r)
    }
}

fn rows_matrix(rows: &[Vec<f64>]) -> Array2<f64> {
    let w = rows.first().map_or(0, Vec::len);
    let mut m = Array2::zeros((rows.len(), w));
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            m[[i, j]] = x;
        }
    }
    m
}

/// Hop profiles per setting and a one-way ANOVA over per-trigger ranges.
pub fn hop_range(
    graph: &MemoryGraph,
    settings: &[Setting],
    max_hop: usize,
    cfg: &ExperimentConfig,
) -> Result<HopRangeReport> {
    if settings.len() < 2 {
        return Err(CdamError::InvalidParameter(
            "hop range needs at least two settings".into(),
        ));
    }
    let patterns = random_patterns(cfg.n, graph.vertex_count(), cfg.seed)?;
    let coupling = normalize(graph);
    let mut cells = Vec::with_capacity(settings.len());
    for &setting in settings {
        let runs = final_states(&patterns, &coupling, setting, cfg)?;
        let profile = hop_profile(graph, &runs, max_hop);
        let trigger_ranges = profile
            .per_trigger
            .iter()
            .map(|row| effective_range(row) as f64)
            .collect();
        cells.push(RangeCell {
            setting,
            effective_range: effective_range(&profile.mean),
            trigger_ranges,
            profile,
        });
    }
    let groups: Vec<Vec<f64>> = cells.iter().map(|c| c.trigger_ranges.clone()).collect();
    let anova = one_way_anova(&groups)?;
    Ok(HopRangeReport {
        cells,
        anova,
        graph_fingerprint: graph.fingerprint(),
        config: *cfg,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MiyashitaSeed {
    pub seed: u64,
    pub means: Vec<f64>,
    pub r_squared: f64,
    pub attractor_means: Vec<f64>,
    pub attractor_r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MiyashitaReport {
    pub setting: Setting,
    pub seeds: Vec<MiyashitaSeed>,
    /// Mean over seeds of the per-seed R² against the target means.
    pub r_squared: f64,
    pub attractor_r_squared: f64,
    pub means: Vec<f64>,
    pub sems: Vec<f64>,
    pub graph_fingerprint: String,
    pub config: ExperimentConfig,
}

impl MiyashitaReport {
    pub fn to_report(&self) -> Result<ExperimentReport> {
        let mut r = ExperimentReport::new("miyashita")
            .with_grid(json!({
                "setting": self.setting,
                "seeds": self.seeds.iter().map(|s| s.seed).collect::<Vec<_>>(),
                "config": self.config,
            }))?
            .with_statistics(json!({
                "r_squared": self.r_squared,
                "attractor_r_squared": self.attractor_r_squared,
                "model_means": self.means,
                "model_sems": self.sems,
                "target_means": MIYASHITA_MEANS,
                "target_sems": MIYASHITA_SEMS,
                "per_seed": self.seeds,
            }))?;
        r.input("graph", self.graph_fingerprint.clone());
        Ok(r)
    }
}

/// Hop 0..6 profile on the given graph against the recorded cell means.
pub fn miyashita_fit(
    graph: &MemoryGraph,
    setting: Setting,
    seeds: &[u64],
    cfg: &ExperimentConfig,
) -> Result<MiyashitaReport> {
    if seeds.is_empty() {
        return Err(CdamError::InvalidParameter("at least one seed required".into()));
    }
    let max_hop = MIYASHITA_MEANS.len() - 1;
    let coupling = normalize(graph);
    let mut rows = Vec::new();
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let c = cfg.with_seed(seed);
        let patterns = random_patterns(c.n, graph.vertex_count(), seed)?;
        let runs = final_states(&patterns, &coupling, setting, &c)?;
        let prof = hop_profile(graph, &runs, max_hop);
        let attr = attractor_profile(graph, &runs, max_hop);
        let fit = r_squared(&prof.mean, &MIYASHITA_MEANS).unwrap_or(0.0);
        let attr_fit = r_squared(&attr.mean, &MIYASHITA_MEANS).unwrap_or(0.0);
        rows.extend(prof.per_trigger.iter().cloned());
        per_seed.push(MiyashitaSeed {
            seed,
            means: prof.mean,
            r_squared: fit,
            attractor_means: attr.mean,
            attractor_r_squared: attr_fit,
        });
    }
    let pooled = HopProfile::from_rows(rows, max_hop);
    let k = per_seed.len() as f64;
    Ok(MiyashitaReport {
        setting,
        r_squared: per_seed.iter().map(|s| s.r_squared).sum::<f64>() / k,
        attractor_r_squared: per_seed.iter().map(|s| s.attractor_r_squared).sum::<f64>() / k,
        seeds: per_seed,
        means: pooled.mean,
        sems: pooled.sem,
        graph_fingerprint: graph.fingerprint(),
        config: *cfg,
    })
}
