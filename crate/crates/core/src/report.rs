//! Scan output shared by every family.

use serde::{Deserialize, Serialize};

use crate::equivariant::{CriterionVerdict, Fingerprint};

/// Version of the report and table layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSample {
    /// Mode label, e.g. `"2"` or `"(0,2)"`.
    pub mode: String,
    pub negative_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_value: Option<f64>,
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub parameter: f64,
    pub mean_curvature: Option<f64>,
    pub mean_curvature_derivative: Option<f64>,
    pub morse_index: Option<usize>,
    pub modes: Vec<ModeSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantReport {
    pub parameter: f64,
    pub bracket: [f64; 2],
    /// What degenerates there, e.g. `"mode 2"` or `"mode (0,2)"`.
    pub source: String,
    pub verdict: CriterionVerdict,
    pub mean_curvature_derivative: Option<f64>,
    /// Whether no other mode degenerates within the isolation window.
    pub isolated: Option<bool>,
    /// Whether the bifurcating branch must leave the symmetry class;
    /// `None` when undetermined or not applicable.
    pub symmetry_breaking: Option<bool>,
}

impl InstantReport {
    pub fn fingerprint_before(&self) -> Option<&Fingerprint> {
        self.verdict.fingerprint_a.as_ref()
    }

    pub fn fingerprint_after(&self) -> Option<&Fingerprint> {
        self.verdict.fingerprint_b.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport {
    pub family: String,
    pub parameter: String,
    pub interval: [f64; 2],
    pub samples: Vec<SweepSample>,
    pub instants: Vec<InstantReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BifurcationReport {
    pub fn new(family: impl Into<String>, parameter: impl Into<String>, interval: [f64; 2]) -> Self {
        Self {
            family: family.into(),
            parameter: parameter.into(),
            interval,
            samples: Vec::new(),
            instants: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn sort_instants(&mut self) {
        self.instants.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    }
}
