//! Time-varying scalar parameters (stability index, scale, Hurst exponent)
//! as a closed family of C^1 functions with exact derivatives and exact
//! range bounds.

use serde::{Deserialize, Serialize};

/// A continuously differentiable scalar function of time.
///
/// `Linear` extends past its `over` interval with the same slope (keeping
/// the function C^1 on the whole line); its admissible range is evaluated
/// over the declared interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ParamFn {
    Constant { value: f64 },
    Linear { from: f64, to: f64, over: [f64; 2] },
    Sine { min: f64, max: f64, period: f64, phase: f64 },
}

impl ParamFn {
    pub fn constant(value: f64) -> Self {
        ParamFn::Constant { value }
    }

    pub fn linear(from: f64, to: f64, start: f64, end: f64) -> Self {
        ParamFn::Linear { from, to, over: [start, end] }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ParamFn::Constant { value } => value,
            ParamFn::Linear { from, to, over } => {
                from + (to - from) * (u - over[0]) / (over[1] - over[0])
            }
            ParamFn::Sine { min, max, period, phase } => {
                let mid = 0.5 * (min + max);
                let amp = 0.5 * (max - min);
                mid + amp * (std::f64::consts::TAU * (u - phase) / period).sin()
            }
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        match *self {
            ParamFn::Constant { .. } => 0.0,
            ParamFn::Linear { from, to, over } => (to - from) / (over[1] - over[0]),
            ParamFn::Sine { min, max, period, phase } => {
                let amp = 0.5 * (max - min);
                let omega = std::f64::consts::TAU / period;
                amp * omega * (omega * (u - phase)).cos()
            }
        }
    }

    /// Exact range bounds over the declared domain.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            ParamFn::Constant { value } => (value, value),
            ParamFn::Linear { from, to, .. } => (from.min(to), from.max(to)),
            ParamFn::Sine { min, max, .. } => (min, max),
        }
    }

    /// Whether the function is structurally well-formed (finite numbers,
    /// non-degenerate domain/period).
    pub fn is_well_formed(&self) -> bool {
        match *self {
            ParamFn::Constant { value } => value.is_finite(),
            ParamFn::Linear { from, to, over } => {
                from.is_finite() && to.is_finite() && over[0] < over[1]
            }
            ParamFn::Sine { min, max, period, phase } => {
                min.is_finite() && max.is_finite() && min <= max && period > 0.0
                    && phase.is_finite()
            }
        }
    }
}
