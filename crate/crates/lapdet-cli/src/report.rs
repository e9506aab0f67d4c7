//! The JSON report document emitted by `lapdet analyze`.
//!
//! Schema (version 1): field order below is the serialization order. The
//! `timing_ms` field is the only one excluded from golden comparisons.

use lapdet::{DetectabilityReport, StochasticityEvidence};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub input: InputEcho,
    pub laplacian_summary: LaplacianSummary,
    pub spectral: SpectralEvidence,
    pub detectability: DetectabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilizability: Option<StabilizabilityEvidence>,
    pub timing_ms: f64,
}

/// Echo of the request, with node indices 1-based as supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_nodes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_matrix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_matrix: Option<String>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianSummary {
    pub n: usize,
    pub edge_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    pub strongly_connected: bool,
}

/// Certificates evaluated on the discretized transition matrix (or on the
/// full schedule product for LPV inputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEvidence {
    pub positivity: bool,
    pub stochasticity: StochasticityEvidence,
    pub inf_norm_uniqueness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizabilityEvidence {
    pub applicable: bool,
    pub stabilizable: bool,
}

impl ReportDocument {
    pub fn detectable(&self) -> bool {
        self.detectability.certificate_detectable || self.detectability.numeric_detectable
    }

    pub fn to_pretty_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Flat `key,value` rendering for `--format csv`.
    pub fn to_csv(&self) -> String {
        let d = &self.detectability;
        let mut out = String::from("key,value\n");
        let mut push = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
        push("schema_version", self.schema_version.to_string());
        push("n", self.laplacian_summary.n.to_string());
        push("edge_count", self.laplacian_summary.edge_count.to_string());
        push("strongly_connected", self.laplacian_summary.strongly_connected.to_string());
        push("positivity", self.spectral.positivity.to_string());
        push("stochasticity_passed", self.spectral.stochasticity.passed.to_string());
        push("inf_norm_uniqueness", self.spectral.inf_norm_uniqueness.to_string());
        push("certificate_applicable", d.certificate_applicable.to_string());
        push("certificate_detectable", d.certificate_detectable.to_string());
        push("numeric_detectable", d.numeric_detectable.to_string());
        push("unobservable_dimension", d.unobservable_dimension.to_string());
        push("max_unobservable_modulus", d.max_unobservable_modulus.to_string());
        if let Some(s) = &self.stabilizability {
            push("stabilizability_applicable", s.applicable.to_string());
            push("stabilizable", s.stabilizable.to_string());
        }
        out
    }
}
