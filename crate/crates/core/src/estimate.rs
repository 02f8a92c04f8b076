//! Numerical results with their error metadata.

use serde::{Deserialize, Serialize};

/// Number of standard errors used for error bands throughout the crate.
pub const BAND_SIGMAS: f64 = 3.0;

/// Slack for deterministic (closed form / quadrature) results.
pub const DETERMINISTIC_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Gauss1d,
    McImportance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    pub n_samples_or_nodes: u64,
    /// Effective sample size of the importance weights (Monte Carlo only).
    pub ess: Option<f64>,
    /// Set when the effective sample size falls under 1% of the draws.
    pub unreliable: bool,
}

impl Estimate {
    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            method: Method::ClosedForm,
            n_samples_or_nodes: 0,
            ess: None,
            unreliable: false,
        }
    }

    pub fn gauss(value: f64, nodes: u64) -> Self {
        Self {
            value,
            std_error: 0.0,
            method: Method::Gauss1d,
            n_samples_or_nodes: nodes,
            ess: None,
            unreliable: false,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self.method, Method::McImportance)
    }

    /// Half-width of the error band around `value`.
    pub fn band(&self) -> f64 {
        if self.is_deterministic() {
            DETERMINISTIC_SLACK
        } else {
            BAND_SIGMAS * self.std_error
        }
    }
}

/// Lower and upper expectation of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub lower_meta: Estimate,
    pub upper_meta: Estimate,
}

impl BoundPair {
    pub fn new(lower: Estimate, upper: Estimate) -> Self {
        Self {
            lower: lower.value,
            upper: upper.value,
            lower_meta: lower,
            upper_meta: upper,
        }
    }

    pub fn exact(lower: f64, upper: f64) -> Self {
        Self::new(Estimate::closed_form(lower), Estimate::closed_form(upper))
    }

    /// `lower <= upper` up to the combined error bands.
    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper + self.lower_meta.band() + self.upper_meta.band()
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_estimates_carry_no_std_error() {
        assert!(Estimate::closed_form(0.3).is_deterministic());
        assert_eq!(Estimate::gauss(0.3, 256).std_error, 0.0);
    }

    #[test]
    fn ordering_respects_bands() {
        let mut lo = Estimate::closed_form(0.5);
        lo.method = Method::McImportance;
        lo.std_error = 0.01;
        let up = Estimate::closed_form(0.49);
        assert!(BoundPair::new(lo, up).is_ordered());
        assert!(!BoundPair::exact(0.5, 0.49).is_ordered());
    }
}
