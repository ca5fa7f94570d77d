//! Reproductions of the model's numerical experiments.
//!
//! Every experiment is a pure function of its configuration, seeds and input
//! data; per-trigger runs are independent and fan out over rayon.

mod automaton;
mod community;
mod hops;
mod modes;
mod report;
mod retrieval;
mod sequence;

pub use automaton::{
    automaton_sweep, AutomatonSession, QueryOutcome, SweepCase, SweepReport, TranscriptEntry,
};
pub use community::{block_contrast, community_matrices, community_report, CommunityResult};
pub use hops::{
    attractor_profile, effective_range, hop_profile, hop_range, miyashita_fit, HopProfile,
    HopRangeReport, MiyashitaReport, MiyashitaSeed, RangeCell, MIYASHITA_MEANS, MIYASHITA_SEMS, RANGE_THRESHOLD,
};
pub use modes::{
    component_wide, four_modes, neighbor_coactivation, quiescent, trigger_dominant,
    FourModesReport, SettingRun, SNAPSHOT_TIMES,
};
pub use report::{heatmap_pgm, ExperimentReport};
pub use retrieval::{
    retrieval_sweep, surrogate_fashion, RetrievalCell, RetrievalReport, PAPER_LEVELS,
};
pub use sequence::{
    sequence_metrics, sequence_recall, sequence_recall_on, sequence_report, surrogate_frames,
    SequenceMetrics, SequenceReport, SurrogateFrames, DEFAULT_PATIENCE,
};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    init_state, pearson_slices, Dynamics, LoadScale, ModelParams, NetworkState, PatternMatrix,
    SimulationTrace, StopRule,
};
use crate::error::Result;
use crate::graph::NormalizedAdjacency;

/// One `(a, h)` cell of a parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub a: f64,
    pub h: f64,
}

impl Setting {
    pub const fn new(a: f64, h: f64) -> Self {
        Self { a, h }
    }

    pub fn label(&self) -> String {
        format!("a{}_h{}", self.a, self.h)
    }
}

/// Auto-association, narrow and wide hetero-association, quiescence.
pub const FOUR_MODES: [Setting; 4] = [
    Setting::new(1.0, 0.0),
    Setting::new(0.5, 0.5),
    Setting::new(-0.5, 1.5),
    Setting::new(-2.5, 1.0),
];

/// Sweep used for range control and community structure.
pub const RANGE_SWEEP: [Setting; 4] = [
    Setting::new(1.0, 0.0),
    Setting::new(0.5, 0.5),
    Setting::new(-0.5, 1.5),
    Setting::new(-2.0, 3.0),
];

/// Shared run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub beta: f64,
    pub eta: f64,
    pub noise_c: f64,
    pub seed: u64,
    pub stop: StopRule,
    pub load_scale: LoadScale,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            beta: 1.0,
            eta: 0.1,
            noise_c: 1.0,
            seed: 0,
            stop: StopRule::default(),
            load_scale: LoadScale::Unit,
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self, s: Setting) -> ModelParams {
        ModelParams::new(s.a, s.h)
            .with_beta(self.beta)
            .with_eta(self.eta)
            .with_load_scale(self.load_scale)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Correlations of a state with every pattern; zero-variance cases are NaN.
pub fn correlations(sigma: &ndarray::Array1<f64>, patterns: &PatternMatrix) -> Vec<f64> {
    (0..patterns.p())
        .map(|mu| pearson_slices(sigma.view(), patterns.pattern(mu)).unwrap_or(f64::NAN))
        .collect()
}

/// Index of the largest value, ignoring NaN; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Final state of one triggered run.
#[derive(Debug, Clone)]
pub struct FinalRun {
    pub trigger: usize,
    pub state: NetworkState,
    pub correlations: Vec<f64>,
}

/// Triggers every pattern (noise seeded by `cfg.seed`) and converges.
pub fn final_states(
    patterns: &PatternMatrix,
    coupling: &NormalizedAdjacency,
    setting: Setting,
    cfg: &ExperimentConfig,
) -> Result<Vec<FinalRun>> {
    let dynamics = Dynamics::new(patterns, coupling, cfg.params(setting))?;
    (0..patterns.p())
        .into_par_iter()
        .map(|mu| {
            let s0 = init_state(patterns, mu, cfg.noise_c, cfg.seed)?;
            let (state, _) = dynamics.converge(&s0, cfg.stop)?;
            let correlations = correlations(&state.sigma, patterns);
            Ok(FinalRun {
                trigger: mu,
                state,
                correlations,
            })
        })
        .collect()
}

/// As [`final_states`] but keeping full traces.
pub fn traced_runs(
    patterns: &PatternMatrix,
    coupling: &NormalizedAdjacency,
    setting: Setting,
    cfg: &ExperimentConfig,
) -> Result<Vec<SimulationTrace>> {
    let dynamics = Dynamics::new(patterns, coupling, cfg.params(setting))?;
    (0..patterns.p())
        .into_par_iter()
        .map(|mu| {
            let s0 = init_state(patterns, mu, cfg.noise_c, cfg.seed)?;
            dynamics.run(&s0, cfg.stop)
        })
        .collect()
}

/// Rows are triggers, columns patterns.
pub fn correlation_table(runs: &[FinalRun]) -> Array2<f64> {
    let p = runs.len();
    let q = runs.first().map_or(0, |r| r.correlations.len());
    let mut out = Array2::zeros((p, q));
    for (i, r) in runs.iter().enumerate() {
        for (j, &c) in r.correlations.iter().enumerate() {
            out[[i, j]] = c;
        }
    }
    out
}
