use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::measures::EnergyModel;
use super::trace::{SimulationTrace, StepRecord, Termination};
use super::{LoadScale, ModelParams, NetworkState, PatternMatrix};
use crate::error::{CdamError, Result};
use crate::graph::{MemoryGraph, NormalizedAdjacency};
use crate::rng;

/// `softmax(beta * z)`, shifted by the maximum so large inputs cannot overflow.
pub fn softmax_beta(z: ArrayView1<'_, f64>, beta: f64) -> Array1<f64> {
    let max = z.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let mut w = z.mapv(|x| (beta * (x - max)).exp());
    let total = w.sum();
    w /= total;
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_steps: usize,
    /// Stop once the sup-norm of the update drops below this.
    pub tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_steps: 101,
            tol: 1e-9,
        }
    }
}

impl StopRule {
    pub fn steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            ..Self::default()
        }
    }

    /// Exactly `max_steps` updates, no early exit.
    pub fn fixed(max_steps: usize) -> Self {
        Self { max_steps, tol: 0.0 }
    }
}

/// Update engine with `Q = a Xi + h Xi M^T` and the bias precomputed.
/// Shares the patterns read-only, so one engine serves any number of runs.
#[derive(Debug, Clone)]
pub struct Dynamics<'a> {
    patterns: &'a PatternMatrix,
    q: Array2<f64>,
    bias: Array1<f64>,
    params: ModelParams,
}

impl<'a> Dynamics<'a> {
    pub fn new(
        patterns: &'a PatternMatrix,
        coupling: &NormalizedAdjacency,
        params: ModelParams,
    ) -> Result<Self> {
        params.validate()?;
        let p = patterns.p();
        if coupling.dim() != p {
            return Err(CdamError::DimensionMismatch {
                what: "coupling matrix vs pattern count",
                expected: p,
                found: coupling.dim(),
            });
        }
        let xi = patterns.values();
        let mut q = xi * params.a;
        if params.h != 0.0 {
            q = q + xi.dot(&coupling.matrix().t()) * params.h;
        }
        let bias = match params.load_scale {
            LoadScale::Unit => patterns.mean_load().clone(),
            LoadScale::PerNeuron => patterns.mean_load() / patterns.n() as f64,
        };
        Ok(Self {
            patterns,
            q,
            bias,
            params,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn patterns(&self) -> &PatternMatrix {
        self.patterns
    }

    fn check_len(&self, state: &NetworkState) -> Result<()> {
        if state.sigma.len() != self.patterns.n() {
            return Err(CdamError::DimensionMismatch {
                what: "state length vs neuron count",
                expected: self.patterns.n(),
                found: state.sigma.len(),
            });
        }
        Ok(())
    }

    fn advance(&self, sigma: &Array1<f64>) -> Array1<f64> {
        let z = self.patterns.values().t().dot(sigma);
        let w = softmax_beta(z.view(), self.params.beta);
        let retrieved = self.q.dot(&w);
        let eta = self.params.eta;
        let mut next = sigma.clone();
        ndarray::Zip::from(&mut next)
            .and(&retrieved)
            .and(&self.bias)
            .for_each(|s, &r, &b| *s += eta * (r - b - *s));
        next
    }

    pub fn step(&self, state: &NetworkState) -> Result<NetworkState> {
        self.check_len(state)?;
        Ok(NetworkState {
            sigma: self.advance(&state.sigma),
            t: state.t + 1,
        })
    }

    /// Iterates without recording; returns the last state and why it stopped.
    pub fn converge(
        &self,
        initial: &NetworkState,
        stop: StopRule,
    ) -> Result<(NetworkState, Termination)> {
        self.drive(initial, stop, |_| Ok(()))
    }

    fn drive(
        &self,
        initial: &NetworkState,
        stop: StopRule,
        mut observe: impl FnMut(&NetworkState) -> Result<()>,
    ) -> Result<(NetworkState, Termination)> {
        self.check_len(initial)?;
        if stop.max_steps == 0 {
            return Err(CdamError::InvalidParameter("max_steps must be >= 1".into()));
        }
        let mut state = initial.clone();
        for _ in 0..stop.max_steps {
            let next = self.advance(&state.sigma);
            let t = state.t + 1;
            if !next.iter().all(|x| x.is_finite()) {
                return Err(CdamError::NumericDivergence { step: t });
            }
            let delta = next
                .iter()
                .zip(state.sigma.iter())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            state = NetworkState { sigma: next, t };
            observe(&state)?;
            if delta < stop.tol {
                return Ok((state, Termination::FixedPoint));
            }
        }
        Ok((state, Termination::MaxSteps))
    }

    /// Converges many states at once, one column per state. Each column
    /// stops under the same rule as [`Dynamics::converge`]; results agree
    /// with single runs up to floating-point summation order.
    pub fn converge_batch(&self, initial: &Array2<f64>, stop: StopRule) -> Result<Array2<f64>> {
        if initial.nrows() != self.patterns.n() {
            return Err(CdamError::DimensionMismatch {
                what: "batch rows vs neuron count",
                expected: self.patterns.n(),
                found: initial.nrows(),
            });
        }
        if stop.max_steps == 0 {
            return Err(CdamError::InvalidParameter("max_steps must be >= 1".into()));
        }
        let xi_t = self.patterns.values().t();
        let eta = self.params.eta;
        let beta = self.params.beta;
        let mut s = initial.clone();
        let mut active = vec![true; s.ncols()];
        for step in 1..=stop.max_steps {
            let mut w = xi_t.dot(&s);
            for mut col in w.columns_mut() {
                let max = col.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
                col.mapv_inplace(|x| (beta * (x - max)).exp());
                let total = col.sum();
                col /= total;
            }
            let retrieved = self.q.dot(&w);
            for (j, mut col) in s.columns_mut().into_iter().enumerate() {
                if !active[j] {
                    continue;
                }
                let mut delta = 0.0f64;
                for ((x, &r), &b) in col.iter_mut().zip(retrieved.column(j)).zip(&self.bias) {
                    let d = eta * (r - b - *x);
                    *x += d;
                    delta = delta.max(d.abs());
                }
                if !col.iter().all(|x| x.is_finite()) {
                    return Err(CdamError::NumericDivergence { step });
                }
                if delta < stop.tol {
                    active[j] = false;
                }
            }
            if !active.iter().any(|&a| a) {
                break;
            }
        }
        Ok(s)
    }

    pub fn run(&self, initial: &NetworkState, stop: StopRule) -> Result<SimulationTrace> {
        self.run_inner(initial, stop, None)
    }

    pub fn run_with_energy(
        &self,
        initial: &NetworkState,
        stop: StopRule,
        energy: &EnergyModel,
    ) -> Result<SimulationTrace> {
        self.run_inner(initial, stop, Some(energy))
    }

    fn run_inner(
        &self,
        initial: &NetworkState,
        stop: StopRule,
        energy: Option<&EnergyModel>,
    ) -> Result<SimulationTrace> {
        let record = |s: &NetworkState| -> Result<StepRecord> {
            let e = match energy {
                Some(model) => Some(model.evaluate(s, self.patterns, &self.params)?),
                None => None,
            };
            Ok(StepRecord::capture(s, self.patterns, e))
        };
        let mut records = vec![record(initial)?];
        let (final_state, termination) = self.drive(initial, stop, |s| {
            records.push(record(s)?);
            Ok(())
        })?;
        Ok(SimulationTrace {
            records,
            final_state,
            termination,
        })
    }
}

/// One application of the update rule; the input state is left untouched.
pub fn update_step(
    state: &NetworkState,
    patterns: &PatternMatrix,
    coupling: &NormalizedAdjacency,
    params: &ModelParams,
) -> Result<NetworkState> {
    Dynamics::new(patterns, coupling, *params)?.step(state)
}

pub fn run(
    initial: &NetworkState,
    patterns: &PatternMatrix,
    coupling: &NormalizedAdjacency,
    params: &ModelParams,
    stop: StopRule,
) -> Result<SimulationTrace> {
    Dynamics::new(patterns, coupling, *params)?.run(initial, stop)
}

/// As [`run`], also evaluating the energy of every recorded state.
pub fn run_with_energy(
    initial: &NetworkState,
    patterns: &PatternMatrix,
    graph: &MemoryGraph,
    coupling: &NormalizedAdjacency,
    params: &ModelParams,
    stop: StopRule,
) -> Result<SimulationTrace> {
    let model = EnergyModel::new(graph, patterns.p())?;
    Dynamics::new(patterns, coupling, *params)?.run_with_energy(initial, stop, &model)
}

/// `sigma(0) = xi^mu + c * zeta`, `zeta` uniform on `[-0.5, 0.5]` per neuron.
pub fn init_state(patterns: &PatternMatrix, mu: usize, c: f64, seed: u64) -> Result<NetworkState> {
    if mu >= patterns.p() {
        return Err(CdamError::InvalidParameter(format!(
            "trigger {mu} out of range 0..{}",
            patterns.p()
        )));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(CdamError::InvalidParameter(format!(
            "noise amplitude must be >= 0, got {c}"
        )));
    }
    let mut sigma = patterns.pattern(mu).to_owned();
    if c > 0.0 {
        let mut r = rng::stream(seed, &[rng::TAG_NOISE, mu as u64]);
        sigma.mapv_inplace(|x| x + c * (r.random::<f64>() - 0.5));
    }
    Ok(NetworkState::new(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::pearson;
    use crate::graph::{build_cycle, normalize, MemoryGraph, NormalizedAdjacency};
    use crate::ingest::random_patterns;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn softmax_examples() {
        let w = softmax_beta(array![0.0, 0.0, 0.0].view(), 1.0);
        for x in &w {
            assert_abs_diff_eq!(*x, 1.0 / 3.0, epsilon = 1e-15);
        }
        let w = softmax_beta(array![2f64.ln(), 0.0].view(), 1.0);
        assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 1.0 / 3.0, epsilon = 1e-15);
        let w = softmax_beta(array![1.0, 0.0].view(), 100.0);
        assert!(w[0] >= 1.0 - 1e-10);
        let w = softmax_beta(array![1e300, -1e300, 5.0].view(), 1.0);
        assert!(w.iter().all(|x| x.is_finite()));
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(z in prop::collection::vec(-500.0f64..500.0, 1..20), beta in 0.01f64..50.0) {
            let w = softmax_beta(Array1::from(z).view(), beta);
            prop_assert!((w.sum() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
        }
    }

    fn empty_coupling(p: usize) -> NormalizedAdjacency {
        normalize(&MemoryGraph::new(p, false))
    }

    #[test]
    fn zero_strengths_relax_to_negative_bias() {
        let pm = random_patterns(8, 3, 1).unwrap();
        let m = empty_coupling(3);
        for scale in [LoadScale::Unit, LoadScale::PerNeuron] {
            let params = ModelParams::new(0.0, 0.0).with_load_scale(scale);
            let s0 = init_state(&pm, 0, 1.0, 2).unwrap();
            let s1 = update_step(&s0, &pm, &m, &params).unwrap();
            let div = if scale == LoadScale::Unit { 1.0 } else { 8.0 };
            for i in 0..8 {
                let want = 0.9 * s0.sigma[i] - 0.1 * pm.mean_load()[i] / div;
                assert_abs_diff_eq!(s1.sigma[i], want, epsilon = 1e-14);
            }
            assert_eq!(s1.t, 1);
            let tr = run(&s0, &pm, &m, &params, StopRule::steps(2000)).unwrap();
            for i in 0..8 {
                assert_abs_diff_eq!(
                    tr.final_state.sigma[i],
                    -pm.mean_load()[i] / div,
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn single_pattern_fixed_point() {
        let pm = random_patterns(5, 1, 3).unwrap();
        let m = empty_coupling(1);
        let xi = pm.pattern(0).to_owned();
        let s = NetworkState::new(xi.clone());
        let per = ModelParams::new(1.0, 0.0).with_load_scale(LoadScale::PerNeuron);
        let tr = run(&s, &pm, &m, &per, StopRule::steps(5000)).unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(tr.final_state.sigma[i], xi[i] * (1.0 - 0.2), epsilon = 1e-8);
        }
        // unit scale: sigma* = xi - xi = 0
        let unit = ModelParams::new(1.0, 0.0);
        let tr = run(&s, &pm, &m, &unit, StopRule::steps(5000)).unwrap();
        assert!(tr.final_state.sigma.iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn input_state_not_modified() {
        let pm = random_patterns(6, 3, 0).unwrap();
        let m = normalize(&build_cycle(3, false).unwrap());
        let s0 = init_state(&pm, 1, 1.0, 0).unwrap();
        let copy = s0.clone();
        let _ = update_step(&s0, &pm, &m, &ModelParams::new(0.5, 0.5)).unwrap();
        assert_eq!(s0, copy);
    }

    #[test]
    fn dimension_mismatches() {
        let pm = random_patterns(6, 3, 0).unwrap();
        let m4 = empty_coupling(4);
        let s = NetworkState::new(Array1::zeros(6));
        assert!(matches!(
            update_step(&s, &pm, &m4, &ModelParams::new(1.0, 0.0)),
            Err(CdamError::DimensionMismatch { .. })
        ));
        let short = NetworkState::new(Array1::zeros(5));
        assert!(update_step(&short, &pm, &empty_coupling(3), &ModelParams::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn run_step_counts() {
        let pm = random_patterns(20, 4, 0).unwrap();
        let m = normalize(&build_cycle(4, false).unwrap());
        let s0 = init_state(&pm, 0, 1.0, 0).unwrap();
        let tr = run(&s0, &pm, &m, &ModelParams::new(0.5, 0.5), StopRule::fixed(101)).unwrap();
        assert_eq!(tr.records.len(), 102);
        assert_eq!(tr.final_state.t, 101);
        assert_eq!(tr.termination, Termination::MaxSteps);

        let frozen = ModelParams::new(0.5, 0.5).with_eta(0.0);
        let tr = run(&s0, &pm, &m, &frozen, StopRule::steps(101)).unwrap();
        assert_eq!(tr.final_state.t, 1);
        assert_eq!(tr.records.len(), 2);
        assert_eq!(tr.termination, Termination::FixedPoint);

        assert!(run(&s0, &pm, &m, &frozen, StopRule::fixed(0)).is_err());
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let pm = random_patterns(10, 3, 0).unwrap();
        let m = normalize(&build_cycle(3, false).unwrap());
        // |1 - eta| > 1 makes the relaxation blow up geometrically
        let params = ModelParams::new(0.0, 0.0).with_eta(1e100);
        let s0 = init_state(&pm, 0, 0.0, 0).unwrap();
        match run(&s0, &pm, &m, &params, StopRule::fixed(50)) {
            Err(CdamError::NumericDivergence { step }) => assert!((2..50).contains(&step)),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn auto_association_retrieves_trigger() {
        let pm = random_patterns(1000, 30, 0).unwrap();
        let m = normalize(&build_cycle(30, false).unwrap());
        let s0 = init_state(&pm, 7, 1.0, 0).unwrap();
        let tr = run(&s0, &pm, &m, &ModelParams::new(1.0, 0.0), StopRule::default()).unwrap();
        let r: Vec<f64> = (0..30)
            .map(|mu| pearson(&tr.final_state, mu, &pm).unwrap())
            .collect();
        let best = (0..30).max_by(|&i, &j| r[i].total_cmp(&r[j])).unwrap();
        assert_eq!(best, 7);
        assert!(r.iter().enumerate().all(|(i, &x)| i == 7 || x < r[7]));
    }

    #[test]
    fn batch_matches_single_runs() {
        let pm = random_patterns(60, 6, 2).unwrap();
        let m = normalize(&build_cycle(6, false).unwrap());
        let dynamics = Dynamics::new(&pm, &m, ModelParams::new(-0.5, 1.5)).unwrap();
        let starts: Vec<NetworkState> = (0..6).map(|mu| init_state(&pm, mu, 1.0, 3).unwrap()).collect();
        let mut batch = Array2::zeros((60, 6));
        for (j, s) in starts.iter().enumerate() {
            batch.column_mut(j).assign(&s.sigma);
        }
        for stop in [StopRule::default(), StopRule::steps(3000)] {
            let out = dynamics.converge_batch(&batch, stop).unwrap();
            for (j, s) in starts.iter().enumerate() {
                let (single, _) = dynamics.converge(s, stop).unwrap();
                for (x, y) in out.column(j).iter().zip(single.sigma.iter()) {
                    assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn init_state_contract() {
        let pm = random_patterns(50, 3, 4).unwrap();
        let exact = init_state(&pm, 2, 0.0, 9).unwrap();
        assert_eq!(exact.sigma, pm.pattern(2).to_owned());
        assert_eq!(exact.t, 0);
        let noisy = init_state(&pm, 2, 1.0, 9).unwrap();
        for (x, y) in noisy.sigma.iter().zip(pm.pattern(2).iter()) {
            assert!((x - y).abs() <= 0.5);
        }
        assert_eq!(noisy, init_state(&pm, 2, 1.0, 9).unwrap());
        assert_ne!(noisy, init_state(&pm, 2, 1.0, 10).unwrap());
        assert!(init_state(&pm, 3, 1.0, 0).is_err());
    }
}
