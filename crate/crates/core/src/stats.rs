use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::numeric::binomial;

/// Bernoulli-rate estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Estimate {
                value: 0.0,
                stderr: 0.0,
            };
        }
        let p = hits as f64 / trials as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// `|value - expected|` in units of the standard error. A zero stderr
    /// yields 0 for an exact match and infinity otherwise.
    pub fn z_score(&self, expected: f64) -> f64 {
        let d = (self.value - expected).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of `counts[k]` against Binomial(n, p).
pub fn binomial_chi_square(counts: &[u64], p: f64) -> Result<ChiSquareTest> {
    if counts.len() < 2 {
        return Err(Error::invalid("need at least two histogram bins"));
    }
    let n = counts.len() - 1;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("empty histogram"));
    }
    let statistic = counts
        .iter()
        .enumerate()
        .map(|(k, &obs)| {
            let expected = total as f64 * binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            (obs as f64 - expected).powi(2) / expected
        })
        .sum::<f64>();
    let dof = n;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::NumericFailure(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_stderr() {
        let e = Estimate::from_counts(50, 100);
        assert_eq!(e.value, 0.5);
        assert!((e.stderr - 0.05).abs() < 1e-15);
        assert_eq!(Estimate::from_counts(0, 10).z_score(0.0), 0.0);
        assert!(Estimate::from_counts(0, 10).z_score(0.1).is_infinite());
    }

    #[test]
    fn chi_square_exact_binomial_counts() {
        let t = binomial_chi_square(&[250, 500, 250], 0.5).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let skew = binomial_chi_square(&[500, 400, 100], 0.5).unwrap();
        assert!(skew.p_value < 1e-6);
    }
}
