use serde::{Deserialize, Serialize};

use qfisher::criteria::{CriterionReport, DepthCertificate, Evaluation};
use qfisher::qfi::GammaMatrix;
use qfisher::states::StateSpec;

use crate::AnalysisConfig;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub state_hermiticity_residue: f64,
    pub gamma_imaginary_residue: f64,
    pub gamma_asymmetry: f64,
    pub clamped: Vec<f64>,
    pub explicit_rank: usize,
}

/// Full analysis of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub input: StateSpec,
    pub label: String,
    pub n_qubits: usize,
    pub config: AnalysisConfig,
    pub fisher_triple: [f64; 3],
    /// Row-major 3x3.
    pub gamma: [f64; 9],
    pub gamma_eigenvalues: [f64; 3],
    pub variance_sum: f64,
    pub criteria: Vec<CriterionReport>,
    pub depth: DepthCertificate,
    pub fewest_unentangled: Option<usize>,
    pub diagnostics: Diagnostics,
}

impl ReportDocument {
    pub fn new(input: StateSpec, config: &AnalysisConfig, gamma: &GammaMatrix, variance_sum: f64, eval: Evaluation) -> Self {
        let d = &gamma.diagnostics;
        let flat: Vec<f64> = gamma.gamma.iter().flatten().copied().collect();
        ReportDocument {
            tool_version: TOOL_VERSION.to_string(),
            label: input.label(),
            n_qubits: gamma.n_qubits,
            input,
            config: config.clone(),
            fisher_triple: gamma.fisher_triple().0,
            gamma: flat.try_into().expect("3x3"),
            gamma_eigenvalues: gamma.eigenvalues,
            variance_sum,
            criteria: eval.reports,
            depth: eval.depth,
            fewest_unentangled: eval.fewest_unentangled,
            diagnostics: Diagnostics {
                state_hermiticity_residue: d.state_hermiticity_residue,
                gamma_imaginary_residue: d.imaginary_residue,
                gamma_asymmetry: d.asymmetry,
                clamped: d.clamped.clone(),
                explicit_rank: d.explicit_rank,
            },
        }
    }

    pub fn violations(&self) -> impl Iterator<Item = &CriterionReport> {
        self.criteria.iter().filter(|r| r.violated)
    }
}

/// Depth-only output of the `depth` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthDocument {
    pub tool_version: String,
    pub input: StateSpec,
    pub label: String,
    pub depth: DepthCertificate,
}

impl From<&ReportDocument> for DepthDocument {
    fn from(r: &ReportDocument) -> Self {
        DepthDocument {
            tool_version: r.tool_version.clone(),
            input: r.input.clone(),
            label: r.label.clone(),
            depth: r.depth.clone(),
        }
    }
}
