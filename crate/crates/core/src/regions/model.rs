use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative, continuous, increasing `phi` with `phi(x) <= C x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFunction {
    /// `phi(x) = x`, the classical Stolz angle.
    Linear,
    /// `x^gamma` on `[0, 2]`, continued linearly as `2^(gamma - 1) x`.
    TruncatedPower { gamma: f64 },
    /// `exp(-x^(-rho))`, exponentially tangential contact.
    ExpTangential { rho: f64 },
}

impl ModelFunction {
    pub fn truncated_power(gamma: f64) -> Result<Self> {
        let m = ModelFunction::TruncatedPower { gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn exp_tangential(rho: f64) -> Result<Self> {
        let m = ModelFunction::ExpTangential { rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelFunction::Linear => Ok(()),
            ModelFunction::TruncatedPower { gamma } if gamma >= 1.0 && gamma.is_finite() => Ok(()),
            ModelFunction::TruncatedPower { gamma } => {
                Err(Error::domain(format!("truncated power needs gamma >= 1, got {gamma}")))
            }
            ModelFunction::ExpTangential { rho } if rho > 0.0 && rho.is_finite() => Ok(()),
            ModelFunction::ExpTangential { rho } => {
                Err(Error::domain(format!("exponential model needs rho > 0, got {rho}")))
            }
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("model function argument must be >= 0, got {x}")));
        }
        Ok(self.value(x))
    }

    /// `phi(x)` for `x >= 0`.
    pub(crate) fn value(&self, x: f64) -> f64 {
        match *self {
            ModelFunction::Linear => x,
            ModelFunction::TruncatedPower { gamma } => {
                if x <= 2.0 {
                    x.powf(gamma)
                } else {
                    2f64.powf(gamma - 1.0) * x
                }
            }
            ModelFunction::ExpTangential { rho } => {
                if x == 0.0 {
                    0.0
                } else {
                    (-x.powf(-rho)).exp()
                }
            }
        }
    }

    /// Smallest `C` with `phi(x) <= C x` on `(0, inf)`.
    ///
    /// For the exponential model the supremum of `exp(-x^-rho)/x` sits at
    /// `x = rho^(1/rho)` and equals `(rho e)^(-1/rho)`.
    pub fn constant(&self) -> f64 {
        match *self {
            ModelFunction::Linear => 1.0,
            ModelFunction::TruncatedPower { gamma } => 2f64.powf(gamma - 1.0),
            ModelFunction::ExpTangential { rho } => (rho * std::f64::consts::E).powf(-1.0 / rho),
        }
    }

    /// Largest `x` with `phi(x) <= y`; infinite when `phi` never exceeds `y`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match *self {
            ModelFunction::Linear => y,
            ModelFunction::TruncatedPower { gamma } => {
                if y <= 2f64.powf(gamma) {
                    y.powf(1.0 / gamma)
                } else {
                    y / 2f64.powf(gamma - 1.0)
                }
            }
            ModelFunction::ExpTangential { rho } => {
                if y >= 1.0 {
                    f64::INFINITY
                } else {
                    (-y.ln()).powf(-1.0 / rho)
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ModelFunction::Linear => "linear".to_string(),
            ModelFunction::TruncatedPower { gamma } => format!("truncated_power(gamma={gamma})"),
            ModelFunction::ExpTangential { rho } => format!("exp_tangential(rho={rho})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variants() -> Vec<ModelFunction> {
        vec![
            ModelFunction::Linear,
            ModelFunction::TruncatedPower { gamma: 1.0 },
            ModelFunction::TruncatedPower { gamma: 2.0 },
            ModelFunction::TruncatedPower { gamma: 3.0 },
            ModelFunction::TruncatedPower { gamma: 2.5 },
            ModelFunction::ExpTangential { rho: 0.5 },
            ModelFunction::ExpTangential { rho: 1.0 },
            ModelFunction::ExpTangential { rho: 2.0 },
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ModelFunction::Linear.eval(0.3).unwrap(), 0.3);
        assert_eq!(ModelFunction::TruncatedPower { gamma: 2.0 }.eval(3.0).unwrap(), 6.0);
        let e = ModelFunction::ExpTangential { rho: 1.0 }.eval(1.0).unwrap();
        assert!((e - 0.3678794411714423).abs() < 1e-15);
        assert_eq!(ModelFunction::ExpTangential { rho: 1.0 }.eval(0.0).unwrap(), 0.0);
        assert!(ModelFunction::Linear.eval(-1e-3).is_err());
        assert!(ModelFunction::Linear.eval(f64::NAN).is_err());
    }

    #[test]
    fn constant_examples() {
        assert_eq!(ModelFunction::Linear.constant(), 1.0);
        assert_eq!(ModelFunction::TruncatedPower { gamma: 3.0 }.constant(), 4.0);
        let c = ModelFunction::ExpTangential { rho: 1.0 }.constant();
        assert!((c - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn constant_is_a_certificate() {
        // log-spaced x in (1e-6, 1e2]
        let n = 10_000;
        for m in variants() {
            let c = m.constant();
            let mut best = 0.0f64;
            for i in 1..=n {
                let x = 1e-6 * (1e8f64).powf(i as f64 / n as f64);
                let ratio = m.value(x) / x;
                assert!(ratio <= c * (1.0 + 1e-12), "{m:?} at x={x}: {ratio} > {c}");
                best = best.max(ratio);
            }
            // the bound is attained (up to grid resolution), so it is the smallest constant
            assert!(best >= c * (1.0 - 1e-3), "{m:?}: sup {best} vs {c}");
        }
    }

    #[test]
    fn monotone_and_continuous_at_two() {
        for m in variants() {
            let mut prev = 0.0;
            for i in 0..=4000 {
                let x = i as f64 * 0.001;
                let v = m.value(x);
                assert!(v >= prev, "{m:?} decreases at {x}");
                prev = v;
            }
            let below = m.value(2.0 - 1e-12);
            let above = m.value(2.0 + 1e-12);
            assert!((above - below).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trips() {
        for m in variants() {
            for &x in &[1e-3, 0.1, 0.5, 1.0, 1.9, 2.5, 10.0] {
                let y = m.value(x);
                if y == 0.0 {
                    continue;
                }
                let back = m.inverse(y);
                assert!((back - x).abs() <= 1e-9 * x.max(1.0), "{m:?}: {x} -> {y} -> {back}");
            }
        }
        assert_eq!(ModelFunction::ExpTangential { rho: 1.0 }.inverse(1.5), f64::INFINITY);
    }

    #[test]
    fn validation() {
        assert!(ModelFunction::truncated_power(0.5).is_err());
        assert!(ModelFunction::exp_tangential(0.0).is_err());
        assert!(ModelFunction::exp_tangential(2.0).is_ok());
        let parsed: ModelFunction = serde_json::from_str(r#"{"kind":"truncated_power","gamma":2}"#).unwrap();
        assert_eq!(parsed, ModelFunction::TruncatedPower { gamma: 2.0 });
        assert!(serde_json::from_str::<ModelFunction>(r#"{"kind":"exp_tangential","rho":1,"gamma":2}"#).is_err());
    }
}
