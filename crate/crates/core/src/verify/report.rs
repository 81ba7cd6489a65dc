use serde::{Deserialize, Serialize};

use crate::functions::ModelParams;
use crate::Error;

/// Where a relation was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SamplePoint {
    Time(f64),
    Frequency([f64; 2]),
    Stationary,
}

/// Outcome of one relation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub relation_id: String,
    pub params: ModelParams,
    pub sample_points: Vec<SamplePoint>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResidualReport {
    pub fn new(relation_id: &str, params: ModelParams, sample_points: Vec<SamplePoint>, max_residual: f64, tolerance: f64) -> Self {
        Self {
            relation_id: relation_id.to_string(),
            params,
            sample_points,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            witness: None,
            error: None,
        }
    }

    /// A failed report carrying the error that prevented the check.
    pub fn failed(relation_id: &str, params: ModelParams, sample_points: Vec<SamplePoint>, tolerance: f64, err: &Error) -> Self {
        Self {
            relation_id: relation_id.to_string(),
            params,
            sample_points,
            max_residual: f64::INFINITY,
            tolerance,
            pass: false,
            witness: None,
            error: Some(err.to_string()),
        }
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

/// Running maximum that treats NaN as an infinite residual.
pub(crate) fn worst(acc: f64, r: f64) -> f64 {
    if r.is_nan() {
        f64::INFINITY
    } else {
        acc.max(r)
    }
}
