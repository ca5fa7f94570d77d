use ndarray::Array2;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{argmax, ExperimentConfig, ExperimentReport, Setting};
use crate::dynamics::{init_state, Dynamics, PatternMatrix, SimulationTrace, StopRule};
use crate::error::{CdamError, Result};
use crate::graph::{build_cycle, normalize, MemoryGraph};
use crate::rng;

/// Steps one pattern may hold the argmax before it counts as a stall.
pub const DEFAULT_PATIENCE: usize = 40;

/// Synthetic video: contexts of slowly drifting frames separated by abrupt
/// switches.
#[derive(Debug, Clone)]
pub struct SurrogateFrames {
    pub patterns: PatternMatrix,
    /// First frame of every context after the first.
    pub switches: Vec<usize>,
    pub noise: f64,
    pub drift: f64,
}

/// `frames` frames of `n` values in `[0, 1]`. Each context has its own base
/// image and drift direction `dir ~ U(-1, 1)`; frame `k` of a context of
/// length `L` is `clip(base + drift * k/(L-1) * dir + noise * U(-0.5, 0.5))`.
pub fn surrogate_frames(
    n: usize,
    frames: usize,
    switches: &[usize],
    noise: f64,
    drift: f64,
    seed: u64,
) -> Result<SurrogateFrames> {
    if n == 0 || frames == 0 {
        return Err(CdamError::InvalidSize(format!(
            "surrogate frames need n, frames >= 1, got n={n}, frames={frames}"
        )));
    }
    if switches.windows(2).any(|w| w[0] >= w[1]) || switches.iter().any(|&s| s == 0 || s >= frames) {
        return Err(CdamError::InvalidParameter(
            "switch frames must be increasing and inside 1..frames".into(),
        ));
    }
    let mut bounds = vec![0];
    bounds.extend_from_slice(switches);
    bounds.push(frames);
    let mut values = Array2::zeros((n, frames));
    for (ctx, w) in bounds.windows(2).enumerate() {
        let mut r = rng::stream(seed, &[rng::TAG_SURROGATE, ctx as u64]);
        let base: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
        let dir: Vec<f64> = (0..n).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
        let len = ((w[1] - w[0]) as f64 - 1.0).max(1.0);
        for f in w[0]..w[1] {
            let frac = (f - w[0]) as f64 / len;
            for i in 0..n {
                let x = base[i] + drift * frac * dir[i] + noise * (r.random::<f64>() - 0.5);
                values[[i, f]] = x.clamp(0.0, 1.0);
            }
        }
    }
    Ok(SurrogateFrames {
        patterns: PatternMatrix::new(values)?,
        switches: switches.to_vec(),
        noise,
        drift,
    })
}

impl SurrogateFrames {
    /// 50 frames of 2000 values with context switches at frames 17 and 34.
    pub fn standard(seed: u64) -> Result<Self> {
        surrogate_frames(2000, 50, &[17, 34], 0.8, 0.3, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SequenceMetrics {
    /// Every pattern reached, first visits in cycle order from the trigger.
    pub visited_in_order: bool,
    pub distinct_visited: usize,
    /// Runs longer than the patience within the first pass.
    pub stalls: usize,
    /// Forward advances of two or more cycle positions.
    pub skips: usize,
    /// Moves against the cycle direction.
    pub backward_jumps: usize,
    /// Steps until the last pattern was first reached, if it was.
    pub first_pass_steps: Option<usize>,
    /// The argmax never left the trigger.
    pub stuck_at_trigger: bool,
}

/// Scores an argmax schedule against a cycle of `p` patterns. Only the first
/// pass is scored: the schedule is cut once every pattern has been seen.
pub fn sequence_metrics(schedule: &[usize], p: usize, patience: usize) -> SequenceMetrics {
    let stuck_at_trigger = schedule.iter().all(|&x| Some(&x) == schedule.first());
    let mut seen = vec![false; p];
    let mut order = Vec::new();
    let mut end = schedule.len();
    for (t, &x) in schedule.iter().enumerate() {
        if x < p && !seen[x] {
            seen[x] = true;
            order.push(x);
            if order.len() == p {
                end = t + 1;
                break;
            }
        }
    }
    let complete = order.len() == p;
    let pass = &schedule[..end];
    let (mut stalls, mut skips, mut backward_jumps) = (0, 0, 0);
    let mut run = 0usize;
    for (t, &x) in pass.iter().enumerate() {
        if t > 0 && x != pass[t - 1] {
            if run > patience {
                stalls += 1;
            }
            run = 0;
            let adv = (x + p - pass[t - 1] % p) % p;
            if adv > p / 2 {
                backward_jumps += 1;
            } else if adv >= 2 {
                skips += 1;
            }
        }
        run += 1;
    }
    // the final run only counts if the pass never completed
    if !complete && run > patience {
        stalls += 1;
    }
    let in_order = complete
        && order
            .iter()
            .enumerate()
            .all(|(k, &x)| x == (order[0] + k) % p);
    SequenceMetrics {
        visited_in_order: in_order,
        distinct_visited: order.len(),
        stalls,
        skips,
        backward_jumps,
        first_pass_steps: complete.then(|| end - 1),
        stuck_at_trigger,
    }
}

#[derive(Debug, Clone)]
pub struct SequenceReport {
    pub setting: Setting,
    pub patience: usize,
    /// Argmax-correlation pattern at every step, starting with `t = 0`.
    pub schedule: Vec<usize>,
    pub metrics: SequenceMetrics,
    pub trace: SimulationTrace,
}

/// Triggers pattern 0 on a directed cycle and follows the argmax for
/// exactly `steps` updates. Steps with a flat state repeat the previous
/// argmax.
pub fn sequence_recall(
    patterns: &PatternMatrix,
    setting: Setting,
    steps: usize,
    patience: usize,
    cfg: &ExperimentConfig,
) -> Result<SequenceReport> {
    let graph = build_cycle(patterns.p(), true)?;
    sequence_recall_on(&graph, patterns, setting, steps, patience, cfg)
}

pub fn sequence_recall_on(
    graph: &MemoryGraph,
    patterns: &PatternMatrix,
    setting: Setting,
    steps: usize,
    patience: usize,
    cfg: &ExperimentConfig,
) -> Result<SequenceReport> {
    let coupling = normalize(graph);
    let dynamics = Dynamics::new(patterns, &coupling, cfg.params(setting))?;
    let s0 = init_state(patterns, 0, cfg.noise_c, cfg.seed)?;
    let trace = dynamics.run(&s0, StopRule::fixed(steps))?;
    let mut schedule = Vec::with_capacity(trace.records.len());
    let mut prev = 0;
    for rec in &trace.records {
        let r: Vec<f64> = rec
            .correlations
            .iter()
            .map(|c| c.unwrap_or(f64::NAN))
            .collect();
        prev = argmax(&r).unwrap_or(prev);
        schedule.push(prev);
    }
    let metrics = sequence_metrics(&schedule, patterns.p(), patience);
    Ok(SequenceReport {
        setting,
        patience,
        schedule,
        metrics,
        trace,
    })
}

/// Bundles several recall runs over the same frames.
pub fn sequence_report(
    runs: &[SequenceReport],
    frames_label: &str,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("sequence")
        .with_grid(json!({
            "settings": runs.iter().map(|r| r.setting).collect::<Vec<_>>(),
            "config": cfg,
            "patience": runs.first().map(|r| r.patience),
            "skip_rule": "forward advance of 2 or more cycle positions",
        }))?
        .with_statistics(json!(runs
            .iter()
            .map(|r| json!({
                "a": r.setting.a,
                "h": r.setting.h,
                "metrics": r.metrics,
                "schedule": r.schedule,
            }))
            .collect::<Vec<_>>()))?;
    report.input("patterns", frames_label);
    for r in runs {
        report.traces.push((r.setting.label(), r.trace.clone()));
    }
    Ok(report)
}
