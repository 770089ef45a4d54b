use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Numerical settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub tol_violation: f64,
    pub eps_rank: f64,
    pub fd_step: f64,
    pub seed: u64,
    pub dimension_cap: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { tol_violation: 1e-9, eps_rank: 1e-12, fd_step: 1e-4, seed: 0, dimension_cap: 4096 }
    }
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: AnalysisConfig = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [("tol_violation", self.tol_violation), ("eps_rank", self.eps_rank), ("fd_step", self.fd_step)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.dimension_cap.is_power_of_two() || self.dimension_cap < 2 {
            return Err(CliError::validation(format!(
                "dimension_cap must be a power of two, got {}",
                self.dimension_cap
            )));
        }
        Ok(())
    }

    /// Caps the register at `n` qubits.
    pub fn set_max_qubits(&mut self, n: u32) -> Result<(), CliError> {
        if n == 0 || n > qfisher::collective::MAX_QUBITS as u32 {
            return Err(CliError::validation(format!(
                "--max-qubits must be in 1..={}",
                qfisher::collective::MAX_QUBITS
            )));
        }
        self.dimension_cap = 1usize << n;
        Ok(())
    }
}
