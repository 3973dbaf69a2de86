//! Kernel families `f(t, u, x)` for the concrete processes, their
//! u-derivatives, and admissibility checks for the parameter functions.
//!
//! Each variant owns its sampling-space preset and its admissible range for
//! the stability index:
//!
//! | kernel          | f(t, u, x)                                | space            | alpha    |
//! |-----------------|-------------------------------------------|------------------|----------|
//! | `LevyCompact`   | `1_{[0,t]}(x)`                            | `[0, T]` uniform | (1, 2)   |
//! | `LevyHalfLine`  | `1_{[0,t]}(x)`                            | half-line dyadic | (1, 2)   |
//! | `LogFractional` | `ln|t-x| - ln|x|`                         | two-sided zeta   | (1, 2)   |
//! | `LinearMmm`     | `|t-x|^{h(u)-1/a(u)} - |x|^{h(u)-1/a(u)}` | two-sided zeta   | (0, 2)   |
//! | `ReverseOu`     | `e^{-l(x-t)} 1_{[t,inf)}(x)`              | two-sided dyadic | (1, 2)   |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{BlockPreset, MeasureSpace};
use crate::params::ParamFn;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    LevyCompact { t_max: f64 },
    LevyHalfLine,
    LogFractional,
    LinearMmm { h: ParamFn },
    ReverseOu { lambda: f64 },
}

/// A reported admissibility violation (reported, never thrown).
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub role: String,
    pub range: (f64, f64),
    pub required: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ranges over [{}, {}] but must lie in {}",
            self.role, self.range.0, self.range.1, self.required
        )
    }
}

impl KernelSpec {
    /// The sampling space this kernel is paired with.
    pub fn measure(&self) -> MeasureSpace {
        match self {
            KernelSpec::LevyCompact { t_max } => MeasureSpace::Finite { t_max: *t_max },
            KernelSpec::LevyHalfLine => {
                MeasureSpace::SigmaFinite { preset: BlockPreset::HalfLineDyadic }
            }
            KernelSpec::LogFractional | KernelSpec::LinearMmm { .. } => {
                MeasureSpace::SigmaFinite { preset: BlockPreset::TwoSidedZeta }
            }
            KernelSpec::ReverseOu { .. } => {
                MeasureSpace::SigmaFinite { preset: BlockPreset::TwoSidedDyadic }
            }
        }
    }

    /// Open interval the stability index must range within.
    pub fn alpha_interval(&self) -> (f64, f64) {
        match self {
            KernelSpec::LinearMmm { .. } => (0.0, 2.0),
            _ => (1.0, 2.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::LevyCompact { .. } => "levy_compact",
            KernelSpec::LevyHalfLine => "levy_half_line",
            KernelSpec::LogFractional => "log_fractional",
            KernelSpec::LinearMmm { .. } => "linear_mmm",
            KernelSpec::ReverseOu { .. } => "reverse_ou",
        }
    }

    /// Pointwise kernel value `f(t, u, x)`. Exact singular hits (`x = 0` or
    /// `x = t` where the kernel blows up) are an error: the sampling
    /// distributions are continuous, so such hits have probability zero and
    /// indicate the caller should re-seed rather than have us clamp.
    pub fn eval(&self, alpha: &ParamFn, t: f64, u: f64, x: f64) -> Result<f64> {
        let v = match self {
            KernelSpec::LevyCompact { .. } | KernelSpec::LevyHalfLine => {
                if (0.0..=t).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::LogFractional => {
                if x == 0.0 || x == t {
                    return Err(Error::SingularEvaluation { t, x });
                }
                (t - x).abs().ln() - x.abs().ln()
            }
            KernelSpec::LinearMmm { h } => {
                let p = h.eval(u) - 1.0 / alpha.eval(u);
                if p < 0.0 && (x == 0.0 || x == t) {
                    return Err(Error::SingularEvaluation { t, x });
                }
                (t - x).abs().powf(p) - x.abs().powf(p)
            }
            KernelSpec::ReverseOu { lambda } => {
                if x >= t {
                    (-lambda * (x - t)).exp()
                } else {
                    0.0
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularEvaluation { t, x })
        }
    }

    /// `d f / d u`; identically zero for every variant except `LinearMmm`,
    /// where it reads
    ///
    /// ```text
    /// (h'(u) + a'(u)/a(u)^2) [ ln|t-x| |t-x|^p - ln|x| |x|^p ],  p = h(u) - 1/a(u)
    /// ```
    pub fn eval_du(&self, alpha: &ParamFn, t: f64, u: f64, x: f64) -> Result<f64> {
        match self {
            KernelSpec::LinearMmm { h } => {
                let a = alpha.eval(u);
                let p = h.eval(u) - 1.0 / a;
                if x == 0.0 || x == t {
                    // ln|.| is singular here even for p > 0
                    return Err(Error::SingularEvaluation { t, x });
                }
                let pref = h.deriv(u) + alpha.deriv(u) / (a * a);
                let dt = (t - x).abs();
                let dx = x.abs();
                let v = pref * (dt.ln() * dt.powf(p) - dx.ln() * dx.powf(p));
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SingularEvaluation { t, x })
                }
            }
            _ => Ok(0.0),
        }
    }

    /// A uniform bound on `|f(t, t, .)|` when one exists.
    pub fn sup_hint(&self, _t: f64) -> Option<f64> {
        match self {
            KernelSpec::LevyCompact { .. }
            | KernelSpec::LevyHalfLine
            | KernelSpec::ReverseOu { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Interior points where `f(t, t, .)` is singular, jumps, or changes
    /// analytic branch (the two-point kernels vanish at `t/2`); used as
    /// quadrature split points.
    pub fn singular_points(&self, t: f64) -> Vec<f64> {
        match self {
            KernelSpec::LogFractional | KernelSpec::LinearMmm { .. } => {
                vec![0.0, 0.5 * t, t]
            }
            KernelSpec::LevyCompact { .. } | KernelSpec::LevyHalfLine => vec![0.0, t],
            KernelSpec::ReverseOu { .. } => vec![t],
        }
    }

    /// Verify the parameter functions' exact ranges against this variant's
    /// admissible intervals. Violations are reported, not thrown.
    pub fn admissible_check(&self, alpha: &ParamFn, b: &ParamFn) -> Vec<Violation> {
        let mut out = Vec::new();
        let (lo, hi) = self.alpha_interval();
        let (amin, amax) = alpha.range();
        if !(amin > lo && amax < hi) {
            out.push(Violation {
                role: "alpha".into(),
                range: (amin, amax),
                required: format!("({lo}, {hi})"),
            });
        }
        let (bmin, bmax) = b.range();
        if !(bmin >= 0.0 && bmax.is_finite()) {
            out.push(Violation {
                role: "b".into(),
                range: (bmin, bmax),
                required: "[0, inf)".into(),
            });
        }
        if let KernelSpec::LinearMmm { h } = self {
            let (hmin, hmax) = h.range();
            if !(hmin > 0.0 && hmax < 1.0) {
                out.push(Violation {
                    role: "h".into(),
                    range: (hmin, hmax),
                    required: "(0, 1)".into(),
                });
            }
        }
        if let KernelSpec::LevyCompact { t_max } = self {
            if !(*t_max > 0.0) {
                out.push(Violation {
                    role: "t_max".into(),
                    range: (*t_max, *t_max),
                    required: "(0, inf)".into(),
                });
            }
        }
        if let KernelSpec::ReverseOu { lambda } = self {
            if !(*lambda > 0.0) {
                out.push(Violation {
                    role: "lambda".into(),
                    range: (*lambda, *lambda),
                    required: "(0, inf)".into(),
                });
            }
        }
        out
    }
}
