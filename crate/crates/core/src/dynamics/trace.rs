use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::measures::{overlaps, pearson_slices};
use super::{ModelParams, NetworkState, PatternMatrix, StopRule};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxSteps,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub mean: f64,
    pub sd: f64,
    pub overlaps: Vec<f64>,
    /// `None` where the state has zero variance.
    pub correlations: Vec<Option<f64>>,
    pub energy: Option<f64>,
}

impl StepRecord {
    pub fn capture(state: &NetworkState, patterns: &PatternMatrix, energy: Option<f64>) -> Self {
        let correlations = (0..patterns.p())
            .map(|mu| pearson_slices(state.sigma.view(), patterns.pattern(mu)).ok())
            .collect();
        Self {
            t: state.t,
            mean: state.mean(),
            sd: state.sd(),
            overlaps: overlaps(state, patterns).to_vec(),
            correlations,
            energy,
        }
    }
}

/// One record per executed step plus the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub records: Vec<StepRecord>,
    pub final_state: NetworkState,
    pub termination: Termination,
}

impl SimulationTrace {
    pub fn steps(&self) -> usize {
        self.final_state.t
    }

    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    /// Record at time `t`, if the run reached it.
    pub fn at(&self, t: usize) -> Option<&StepRecord> {
        self.records.iter().find(|r| r.t == t)
    }

    /// Columns `t, mean_activity, sd_activity, energy, r_0..r_{p-1}`;
    /// undefined values are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let p = self.records.first().map_or(0, |r| r.correlations.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "t".to_string(),
            "mean_activity".into(),
            "sd_activity".into(),
            "energy".into(),
        ];
        header.extend((0..p).map(|mu| format!("r_{mu}")));
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:?}"));
        for r in &self.records {
            let mut row = vec![
                r.t.to_string(),
                format!("{:?}", r.mean),
                format!("{:?}", r.sd),
                opt(r.energy),
            ];
            row.extend(r.correlations.iter().map(|&c| opt(c)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Everything needed to reproduce a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub params: ModelParams,
    pub stop: StopRule,
    pub seed: u64,
    pub noise_c: f64,
    pub trigger: usize,
    pub n: usize,
    pub p: usize,
    pub graph: String,
    pub graph_fingerprint: String,
    pub patterns: String,
    pub steps_executed: usize,
    pub termination: Termination,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
