use serde::Serialize;

use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::Operator;
use crate::tolerances::HERMITIAN_TOL;

/// Continuous weak measurement of a Hermitian observable.
///
/// Conditioning adds `strength·D[op]` backaction and the innovation
/// `√strength·H[op] dW`; the record is `dy = ⟨op⟩ dt + record_noise_scale·dW`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusiveChannel {
    pub label: String,
    pub op: Operator,
    pub strength: f64,
    pub record_noise_scale: f64,
}

/// Serializable description of a channel.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelSummary {
    pub label: String,
    pub strength: f64,
    pub record_noise_scale: f64,
}

impl DiffusiveChannel {
    pub fn new(label: &str, op: Operator, strength: f64, record_noise_scale: f64) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian(format!("channel '{label}' defect {defect:e}")));
        }
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(Error::InvalidParameter(format!("channel '{label}' strength {strength}")));
        }
        if !(record_noise_scale > 0.0 && record_noise_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "channel '{label}' record noise scale {record_noise_scale}"
            )));
        }
        Ok(Self {
            label: label.to_string(),
            op,
            strength,
            record_noise_scale,
        })
    }

    /// Energy (σz) channel with the record scale `1/√(8Γ)`.
    pub fn sigma_z(label: &str, op: Operator, gamma_meas: f64) -> Result<Self> {
        Self::new(label, op, gamma_meas, 1.0 / (8.0 * gamma_meas).sqrt())
    }

    /// Photon-number channel with the record scale `1/√Λ`.
    pub fn number(label: &str, op: Operator, lambda: f64) -> Result<Self> {
        Self::new(label, op, lambda, 1.0 / lambda.sqrt())
    }

    pub fn summary(&self) -> ChannelSummary {
        ChannelSummary {
            label: self.label.clone(),
            strength: self.strength,
            record_noise_scale: self.record_noise_scale,
        }
    }
}

/// `model` plus the measurement backaction `strength·D[op]` of every channel:
/// the master equation obeyed by the ensemble average.
pub fn unconditional_model(model: &LindbladModel, channels: &[DiffusiveChannel]) -> Result<LindbladModel> {
    let mut out = model.clone();
    for ch in channels {
        out.add_dissipator(&format!("meas:{}", ch.label), ch.strength, ch.op.clone())?;
    }
    Ok(out)
}
