use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pure ε-DP budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(Self { epsilon })
        } else {
            Err(Error::InvalidBudget(epsilon))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// One draw from Laplace(0, `scale`) by inverse CDF.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidScale(scale));
    }
    loop {
        let u = rng.random::<f64>() - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        // u = -0.5 would give ln(0)
        if tail > 0.0 {
            return Ok(-scale * u.signum() * tail.ln());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn rejects_bad_scale() {
        let mut rng = seed::stream(0, "t", 0);
        assert!(matches!(laplace_sample(0.0, &mut rng), Err(Error::InvalidScale(_))));
        assert!(matches!(laplace_sample(-1.0, &mut rng), Err(Error::InvalidScale(_))));
        assert!(matches!(laplace_sample(f64::INFINITY, &mut rng), Err(Error::InvalidScale(_))));
    }

    #[test]
    fn rejects_bad_budget() {
        assert!(PrivacyBudget::new(0.0).is_err());
        assert!(PrivacyBudget::new(f64::INFINITY).is_err());
        assert!(PrivacyBudget::new(f64::NAN).is_err());
        assert_eq!(PrivacyBudget::new(0.5).unwrap().epsilon(), 0.5);
    }

    #[test]
    fn mean_absolute_value_is_scale() {
        let mut rng = seed::stream(10, "laplace-abs", 0);
        let n = 1_000_000;
        let m = (0..n).map(|_| laplace_sample(1.0, &mut rng).unwrap().abs()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.02, "E|Y| {m}");
    }

    #[test]
    fn variance_matches_two_scale_squared() {
        let mut rng = seed::stream(11, "laplace-var", 0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| laplace_sample(2.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 8.0).abs() / 8.0 < 0.03, "variance {var}");
    }
}
