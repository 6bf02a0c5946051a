use serde::Serialize;

use super::SeedSpec;
use crate::quantum::Operator;

/// A named observable tracked along a trajectory.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub op: Operator,
}

impl Observable {
    pub fn new(name: &str, op: Operator) -> Self {
        Self {
            name: name.to_string(),
            op,
        }
    }
}

/// Named real series sampled on a trajectory's time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// Measurement record of one channel, one entry per integration step.
///
/// Entry `k` covers `[t_k, t_k + dt]`: `increments[k] = expectation[k]·dt +
/// noise_scale·wiener[k]` where `expectation[k]` is the conditional mean at
/// `t_k` and `wiener[k]` the Wiener increment used by the filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub channel: String,
    pub dt: f64,
    pub noise_scale: f64,
    pub increments: Vec<f64>,
    pub expectation: Vec<f64>,
    pub wiener: Vec<f64>,
}

impl MeasurementRecord {
    pub(crate) fn new(channel: &str, dt: f64, noise_scale: f64, steps: usize) -> Self {
        Self {
            channel: channel.to_string(),
            dt,
            noise_scale,
            increments: Vec::with_capacity(steps),
            expectation: Vec::with_capacity(steps),
            wiener: Vec::with_capacity(steps),
        }
    }

    pub(crate) fn push(&mut self, expectation: f64, dw: f64) {
        self.expectation.push(expectation);
        self.wiener.push(dw);
        self.increments.push(expectation * self.dt + self.noise_scale * dw);
    }

    /// Start time of every step.
    pub fn times(&self) -> Vec<f64> {
        (0..self.increments.len()).map(|k| k as f64 * self.dt).collect()
    }

    /// Instantaneous signal `dy/dt`.
    pub fn signal(&self) -> Vec<f64> {
        self.increments.iter().map(|dy| dy / self.dt).collect()
    }

    /// Largest violation of `dy − ⟨A⟩dt = scale·dW` over the record.
    pub fn consistency_defect(&self) -> f64 {
        self.increments
            .iter()
            .zip(&self.expectation)
            .zip(&self.wiener)
            .map(|((dy, e), dw)| (dy - e * self.dt - self.noise_scale * dw).abs())
            .fold(0.0, f64::max)
    }
}

/// Trailing moving average over `window` samples (shorter at the start).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v;
        if k >= window {
            acc -= values[k - window];
        }
        out.push(acc / (k + 1).min(window) as f64);
    }
    out
}

/// A single jump event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub time: f64,
    /// Index into the model's dissipator list.
    pub channel: usize,
}

/// Output of one stochastic trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryResult {
    pub seed: SeedSpec,
    pub scheme: String,
    /// Sample times of `observables` and `jump_counts`.
    pub times: Vec<f64>,
    pub observables: Vec<Series>,
    pub records: Vec<MeasurementRecord>,
    /// Cumulative jump counts per dissipator label at each sample time.
    pub jump_counts: Vec<(String, Vec<u64>)>,
    pub jumps: Vec<JumpEvent>,
}

impl TrajectoryResult {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    pub fn counts(&self, label: &str) -> Option<&[u64]> {
        self.jump_counts
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| c.as_slice())
    }

    pub fn record(&self, channel: &str) -> Option<&MeasurementRecord> {
        self.records.iter().find(|r| r.channel == channel)
    }
}
