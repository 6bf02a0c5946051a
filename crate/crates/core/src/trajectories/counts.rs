use rand_distr::{Distribution, Poisson};

use super::rng::EVENT_STREAM;
use super::SeedSpec;
use crate::error::{Error, Result};

/// Number of events of a rate-`rate` Poisson process observed over `[0, t]`.
pub fn simulate_poisson_count(rate: f64, t: f64, seed: SeedSpec) -> Result<u64> {
    if !(rate >= 0.0 && t >= 0.0 && (rate * t).is_finite()) {
        return Err(Error::InvalidParameter(format!("rate = {rate}, t = {t}")));
    }
    let mean = rate * t;
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(&mut seed.rng(EVENT_STREAM)) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_have_poisson_moments() {
        let n = 4000;
        let xs: Vec<f64> = (0..n)
            .map(|i| simulate_poisson_count(2.0, 25.0, SeedSpec::new(3, i)).unwrap() as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - 50.0).abs() < 3.0 * (50.0 / n as f64).sqrt());
        assert!((var / 50.0 - 1.0).abs() < 0.1);
        assert_eq!(simulate_poisson_count(0.0, 5.0, SeedSpec::new(0, 0)).unwrap(), 0);
    }
}
