use ndarray::{Array1, ArrayView1};

use super::{ModelParams, NetworkState, PatternMatrix};
use crate::error::{CdamError, Result};
use crate::graph::{normalize, MemoryGraph};

/// `m^mu = sigma . xi^mu / n`.
pub fn overlap(state: &NetworkState, mu: usize, patterns: &PatternMatrix) -> f64 {
    state.sigma.dot(&patterns.pattern(mu)) / patterns.n() as f64
}

/// All overlaps at once.
pub fn overlaps(state: &NetworkState, patterns: &PatternMatrix) -> Array1<f64> {
    patterns.values().t().dot(&state.sigma) / patterns.n() as f64
}

pub fn pearson_slices(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CdamError::DimensionMismatch {
            what: "correlation operands",
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.sum() / n;
    let my = y.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(CdamError::UndefinedCorrelation(
            "an operand has zero variance".into(),
        ));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    if !r.is_finite() {
        return Err(CdamError::UndefinedCorrelation(
            "non-finite operand statistics".into(),
        ));
    }
    Ok(r.clamp(-1.0, 1.0))
}

pub fn pearson(state: &NetworkState, mu: usize, patterns: &PatternMatrix) -> Result<f64> {
    pearson_slices(state.sigma.view(), patterns.pattern(mu))
}

/// Log of `sum_i c_i exp(e_i)` with the exponent shifted by its maximum.
/// Returns `None` when the weighted sum is not positive.
fn weighted_log_sum_exp(terms: &[(f64, f64)]) -> Option<f64> {
    let shift = terms
        .iter()
        .filter(|(c, _)| *c != 0.0)
        .fold(f64::NEG_INFINITY, |m, &(_, e)| m.max(e));
    if !shift.is_finite() {
        return None;
    }
    let s: f64 = terms.iter().map(|&(c, e)| c * (e - shift).exp()).sum();
    (s > 0.0).then(|| shift + s.ln())
}

/// Precomputed graph data for energy evaluation.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    directed: bool,
    /// Undirected: nonzero normalised entries `(alpha, kappa, M)` in both
    /// orientations. Directed: raw edges `(alpha, kappa, w)`.
    terms: Vec<(usize, usize, f64)>,
}

impl EnergyModel {
    pub fn new(graph: &MemoryGraph, p: usize) -> Result<Self> {
        if graph.vertex_count() != p {
            return Err(CdamError::DimensionMismatch {
                what: "graph vertices vs pattern count",
                expected: p,
                found: graph.vertex_count(),
            });
        }
        let terms = if graph.is_directed() {
            graph
                .edges()
                .iter()
                .map(|e| (e.source, e.target, e.weight))
                .collect()
        } else {
            normalize(graph)
                .matrix()
                .indexed_iter()
                .filter(|(_, &v)| v != 0.0)
                .map(|((i, j), &v)| (i, j, v))
                .collect()
        };
        Ok(Self {
            directed: graph.is_directed(),
            terms,
        })
    }

    pub fn evaluate(
        &self,
        state: &NetworkState,
        patterns: &PatternMatrix,
        params: &ModelParams,
    ) -> Result<f64> {
        let m = overlaps(state, patterns);
        let beta = params.beta;
        let auto: Vec<(f64, f64)> = m.iter().map(|&x| (1.0, beta * x * x)).collect();
        let hetero: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|&(i, j, w)| (w, beta * m[i] * m[j]))
            .collect();

        if self.directed {
            let mut all: Vec<(f64, f64)> =
                auto.iter().map(|&(_, e)| (params.a, e)).collect();
            all.extend(hetero.iter().map(|&(w, e)| (params.h * w, e)));
            return weighted_log_sum_exp(&all)
                .map(|l| -l / beta)
                .ok_or_else(|| {
                    CdamError::EnergyUndefined("log argument is not positive".into())
                });
        }

        let mut e = 0.0;
        if params.a != 0.0 {
            let l = weighted_log_sum_exp(&auto).expect("auto term is a positive sum");
            e -= params.a / beta * l;
        }
        if params.h != 0.0 && !self.terms.is_empty() {
            let l = weighted_log_sum_exp(&hetero).ok_or_else(|| {
                CdamError::EnergyUndefined("hetero log argument is not positive".into())
            })?;
            e -= params.h / beta * l;
        }
        Ok(e)
    }
}

/// Energy of a state under the graph's form (undirected or directed).
pub fn energy(
    state: &NetworkState,
    patterns: &PatternMatrix,
    graph: &MemoryGraph,
    params: &ModelParams,
) -> Result<f64> {
    EnergyModel::new(graph, patterns.p())?.evaluate(state, patterns, params)
}
