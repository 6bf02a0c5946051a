use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use super::rng::EVENT_STREAM;
use super::SeedSpec;
use crate::error::{Error, Result};

/// Piecewise-constant ±1 signal on `[0, t_final]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelegraphRecord {
    pub t_final: f64,
    pub initial: i8,
    /// Times at which the value flips, increasing.
    pub switches: Vec<f64>,
}

impl TelegraphRecord {
    pub fn value_at(&self, t: f64) -> i8 {
        let flips = self.switches.partition_point(|s| *s <= t);
        if flips % 2 == 0 {
            self.initial
        } else {
            -self.initial
        }
    }

    /// `(start, end, value)` of every constant piece; the last one is censored.
    pub fn segments(&self) -> Vec<(f64, f64, i8)> {
        let mut out = Vec::with_capacity(self.switches.len() + 1);
        let mut start = 0.0;
        let mut value = self.initial;
        for &s in &self.switches {
            out.push((start, s, value));
            start = s;
            value = -value;
        }
        out.push((start, self.t_final, value));
        out
    }

    /// Fraction of time spent at `+1`.
    pub fn occupancy_plus(&self) -> f64 {
        if self.t_final == 0.0 {
            return if self.initial > 0 { 1.0 } else { 0.0 };
        }
        let up: f64 = self
            .segments()
            .iter()
            .filter(|s| s.2 > 0)
            .map(|s| s.1 - s.0)
            .sum();
        up / self.t_final
    }

    /// Lengths of completed stays at `value` (the censored final stay excluded).
    pub fn dwell_times(&self, value: i8) -> Vec<f64> {
        let segs = self.segments();
        segs[..segs.len() - 1]
            .iter()
            .filter(|s| s.2 == value)
            .map(|s| s.1 - s.0)
            .collect()
    }

    /// Total time at `value`, censored final stay included.
    pub fn exposure(&self, value: i8) -> f64 {
        self.segments().iter().filter(|s| s.2 == value).map(|s| s.1 - s.0).sum()
    }

    /// Sample on a uniform grid of `n` points spanning `[0, t_final]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, i8)> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = self.t_final * k as f64 / (n - 1) as f64;
                (t, self.value_at(t))
            })
            .collect()
    }
}

/// Two-state jump process with exact exponential dwell times.
///
/// `rate_up` drives −1 → +1, `rate_down` drives +1 → −1. `initial = None`
/// draws the start from the stationary law `rate_up/(rate_up + rate_down)`.
pub fn simulate_telegraph(
    rate_up: f64,
    rate_down: f64,
    initial: Option<i8>,
    t_final: f64,
    seed: SeedSpec,
) -> Result<TelegraphRecord> {
    if !(rate_up >= 0.0 && rate_down >= 0.0 && rate_up.is_finite() && rate_down.is_finite()) {
        return Err(Error::InvalidParameter(format!("rates {rate_up}, {rate_down}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_final = {t_final}")));
    }
    let mut rng = seed.rng(EVENT_STREAM);
    let start = match initial {
        Some(v) if v == 1 || v == -1 => v,
        Some(v) => return Err(Error::InvalidState(format!("telegraph value {v} is not ±1"))),
        None => {
            let total = rate_up + rate_down;
            let p_up = if total > 0.0 { rate_up / total } else { 0.0 };
            if rng.random::<f64>() < p_up {
                1
            } else {
                -1
            }
        }
    };
    let mut switches = Vec::new();
    let mut value = start;
    let mut t = 0.0;
    loop {
        let rate = if value > 0 { rate_down } else { rate_up };
        if rate == 0.0 {
            break;
        }
        let e: f64 = Exp1.sample(&mut rng);
        t += e / rate;
        if t > t_final {
            break;
        }
        switches.push(t);
        value = -value;
    }
    Ok(TelegraphRecord {
        t_final,
        initial: start,
        switches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_when_rate_vanishes() {
        let r = simulate_telegraph(0.0, 3.0, Some(-1), 100.0, SeedSpec::new(1, 0)).unwrap();
        assert!(r.switches.is_empty());
        assert_eq!(r.value_at(50.0), -1);
        assert_eq!(r.occupancy_plus(), 0.0);
    }

    #[test]
    fn stationary_occupancy() {
        // γ = 1, n̄ = 1: up γn̄, down γ(n̄+1), occupancy n̄/(2n̄+1) = 1/3
        let r = simulate_telegraph(1.0, 2.0, None, 20_000.0, SeedSpec::new(9, 0)).unwrap();
        assert!((r.occupancy_plus() - 1.0 / 3.0).abs() < 0.02);
        let up = r.dwell_times(1);
        let mean = up.iter().sum::<f64>() / up.len() as f64;
        assert!((mean - 0.5).abs() < 3.0 * 0.5 / (up.len() as f64).sqrt());
    }

    #[test]
    fn segments_partition_the_interval() {
        let r = simulate_telegraph(2.0, 2.0, Some(1), 10.0, SeedSpec::new(2, 4)).unwrap();
        let total: f64 = r.segments().iter().map(|s| s.1 - s.0).sum();
        assert!((total - 10.0).abs() < 1e-12);
        assert!((r.exposure(1) + r.exposure(-1) - 10.0).abs() < 1e-12);
        assert!(r.switches.windows(2).all(|w| w[0] < w[1]));
        assert!(simulate_telegraph(-1.0, 1.0, None, 1.0, SeedSpec::new(0, 0)).is_err());
    }
}
