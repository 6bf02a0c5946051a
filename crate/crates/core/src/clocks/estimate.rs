use serde::{Deserialize, Serialize};

/// A time estimate with its predicted standard error.
///
/// `t_est = None` is the undefined sentinel (e.g. no upward transitions, or
/// a printed estimator whose logarithm has no real value).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockEstimate {
    pub t_est: Option<f64>,
    pub sigma_t: Option<f64>,
    pub estimator_id: String,
    pub inputs: Vec<(String, f64)>,
    /// FNV-1a hash of the estimator id and the exact input bits.
    pub digest: String,
}

impl ClockEstimate {
    pub(crate) fn new(id: &str, t_est: Option<f64>, sigma_t: Option<f64>, inputs: &[(&str, f64)]) -> Self {
        let inputs: Vec<(String, f64)> = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self {
            digest: digest(id, &inputs),
            t_est,
            sigma_t,
            estimator_id: id.to_string(),
            inputs,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.t_est.is_some_and(f64::is_finite)
    }

    /// `sigma_t / t_est` when both are defined and `t_est ≠ 0`.
    pub fn relative_error(&self) -> Option<f64> {
        match (self.t_est, self.sigma_t) {
            (Some(t), Some(s)) if t != 0.0 => Some(s / t),
            _ => None,
        }
    }
}

fn digest(id: &str, inputs: &[(String, f64)]) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(id.as_bytes());
    for (k, v) in inputs {
        feed(k.as_bytes());
        feed(&v.to_bits().to_le_bytes());
    }
    format!("{h:016x}")
}

/// Which form of an estimator to use where the printed form and its own
/// stated mean disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// The formula as printed.
    Printed,
    /// The form consistent with the stated mean law.
    #[default]
    Derived,
}

impl std::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "printed" => Ok(Self::Printed),
            "derived" => Ok(Self::Derived),
            other => Err(format!("unknown convention '{other}' (expected printed or derived)")),
        }
    }
}
