//! State-update engine, overlap and correlation measures, energies.

mod engine;
mod measures;
mod trace;

pub use engine::{init_state, run, run_with_energy, softmax_beta, update_step, Dynamics, StopRule};
pub use measures::{energy, overlap, overlaps, pearson, pearson_slices, EnergyModel};
pub use trace::{RunManifest, SimulationTrace, StepRecord, Termination};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{CdamError, Result};

/// Stored memories as the columns of an `n x p` matrix, with the cached
/// mean memory load (column mean).
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatrix {
    values: Array2<f64>,
    mean_load: Array1<f64>,
}

impl PatternMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if n == 0 || p == 0 {
            return Err(CdamError::InvalidSize(format!(
                "pattern matrix must be non-empty, got {n}x{p}"
            )));
        }
        if let Some(((i, mu), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(CdamError::InvalidParameter(format!(
                "pattern {mu} has non-finite value {v} at neuron {i}"
            )));
        }
        let mean_load = Self::column_mean(&values);
        Ok(Self { values, mean_load })
    }

    /// Builds from pattern vectors, each becoming one column.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let mut values = Array2::zeros((n, columns.len()));
        for (mu, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(CdamError::DimensionMismatch {
                    what: "pattern length",
                    expected: n,
                    found: col.len(),
                });
            }
            values.column_mut(mu).assign(&ArrayView1::from(col.as_slice()));
        }
        Self::new(values)
    }

    fn column_mean(values: &Array2<f64>) -> Array1<f64> {
        values.sum_axis(ndarray::Axis(1)) / values.ncols() as f64
    }

    /// Neuron count.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Pattern count.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mean_load(&self) -> &Array1<f64> {
        &self.mean_load
    }

    pub fn pattern(&self, mu: usize) -> ArrayView1<'_, f64> {
        self.values.column(mu)
    }

    pub fn set_pattern(&mut self, mu: usize, values: &[f64]) -> Result<()> {
        if mu >= self.p() {
            return Err(CdamError::InvalidParameter(format!(
                "pattern index {mu} out of range 0..{}",
                self.p()
            )));
        }
        if values.len() != self.n() {
            return Err(CdamError::DimensionMismatch {
                what: "pattern length",
                expected: self.n(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CdamError::InvalidParameter(format!(
                "pattern {mu} would contain non-finite values"
            )));
        }
        self.values
            .column_mut(mu)
            .assign(&ArrayView1::from(values));
        self.mean_load = Self::column_mean(&self.values);
        Ok(())
    }

    /// Patterns restricted to the listed columns, in that order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.p()) {
            return Err(CdamError::InvalidParameter(format!(
                "pattern index {bad} out of range 0..{}",
                self.p()
            )));
        }
        Self::new(self.values.select(ndarray::Axis(1), columns))
    }
}

/// Scale of the inhibitory mean-load bias subtracted at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadScale {
    /// Subtract the mean load itself, so `a = h = 0` relaxes to `-mean_load`
    /// and `a + h = 1` keeps the mean activity near zero for uniform patterns.
    #[default]
    Unit,
    /// Subtract `mean_load / n`.
    PerNeuron,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub h: f64,
    pub beta: f64,
    pub eta: f64,
    #[serde(default)]
    pub load_scale: LoadScale,
}

impl ModelParams {
    /// `a`, `h` with `beta = 1`, `eta = 0.1`.
    pub fn new(a: f64, h: f64) -> Self {
        Self {
            a,
            h,
            beta: 1.0,
            eta: 0.1,
            load_scale: LoadScale::Unit,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_load_scale(mut self, scale: LoadScale) -> Self {
        self.load_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.h.is_finite()) {
            return Err(CdamError::InvalidParameter("a and h must be finite".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(CdamError::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        // eta = 0 is accepted: it is the degenerate "no motion" run
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(CdamError::InvalidParameter(format!(
                "eta must be non-negative, got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub sigma: Array1<f64>,
    pub t: usize,
}

impl NetworkState {
    pub fn new(sigma: Array1<f64>) -> Self {
        Self { sigma, t: 0 }
    }

    pub fn mean(&self) -> f64 {
        self.sigma.mean().unwrap_or(0.0)
    }

    /// Population standard deviation.
    pub fn sd(&self) -> f64 {
        self.sigma.std(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mean_load_tracks_mutation() {
        let mut pm = PatternMatrix::new(array![[0.0, 1.0], [2.0, 4.0]]).unwrap();
        assert_eq!(pm.mean_load(), &array![0.5, 3.0]);
        pm.set_pattern(1, &[3.0, 2.0]).unwrap();
        assert_eq!(pm.mean_load(), &array![1.5, 2.0]);
        assert!(pm.set_pattern(1, &[f64::NAN, 0.0]).is_err());
        assert!(pm.set_pattern(2, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(PatternMatrix::new(Array2::zeros((0, 3))).is_err());
        assert!(PatternMatrix::new(array![[1.0, f64::INFINITY]]).is_err());
        assert!(PatternMatrix::from_columns(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(-2.5, 1.0).validate().is_ok());
        assert!(ModelParams::new(1.0, 0.0).with_beta(0.0).validate().is_err());
        assert!(ModelParams::new(1.0, 0.0).with_eta(-0.1).validate().is_err());
        assert!(ModelParams::new(f64::NAN, 0.0).validate().is_err());
    }
}
