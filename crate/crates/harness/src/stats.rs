//! Small statistics helpers for the acceptance bands.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for fewer than two values.
    pub std_dev: f64,
}

impl Moments {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let count = xs.len();
        if count == 0 {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let var = if count > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64 } else { 0.0 };
        Self { count, mean, std_dev: var.sqrt() }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev / (self.count as f64).sqrt()
        }
    }
}

/// Standard deviation of a frequency estimated from `n` Bernoulli(`p`) draws.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Pearson statistic of `observed` counts against a uniform expectation.
pub fn chi_square_uniform(observed: &[u64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / observed.len() as f64;
    observed.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

/// Upper `alpha` quantile of the chi-square distribution.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).expect("positive degrees of freedom").inverse_cdf(1.0 - alpha)
}
