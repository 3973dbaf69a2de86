//! Job configuration: one JSON file per job.

use serde::Deserialize;

use mstab_core::{KernelSpec, ParamFn, ProcessSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Synth,
    VerifyStable,
    VerifyCf,
    Scaling,
    Audit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub process: ProcessBlock,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    pub mc: McBlock,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub verify_stable: Option<VerifyStableBlock>,
    #[serde(default)]
    pub verify_cf: Option<VerifyCfBlock>,
    #[serde(default)]
    pub scaling: Option<ScalingBlock>,
    #[serde(default)]
    pub audit: Option<AuditBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessBlock {
    /// One of: levy_compact, levy_half_line, log_fractional, linear_mmm,
    /// reverse_ou.
    pub kernel: String,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    pub alpha: ParamFn,
    pub b: ParamFn,
    #[serde(default)]
    pub h: Option<ParamFn>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_n_terms")]
    pub n_terms: usize,
}

fn default_n_paths() -> usize {
    20_000
}

fn default_n_terms() -> usize {
    10_000
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
    #[serde(default)]
    pub json: Option<String>,
    /// Diagnostic dump of the series draw behind a synth job.
    #[serde(default)]
    pub draw_json: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyStableBlock {
    pub t: f64,
    /// KS rejection band; default 1.63/sqrt(n_paths) + 0.01.
    #[serde(default)]
    pub band: Option<f64>,
    #[serde(default = "default_oracle_n")]
    pub oracle_n: usize,
}

fn default_oracle_n() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCfBlock {
    pub t: f64,
    pub thetas: Vec<f64>,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Empirical-vs-quadrature band; default 3/sqrt(n_paths) + 1e-4.
    #[serde(default)]
    pub band: Option<f64>,
}

fn default_quad_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    pub u: f64,
    /// Rescaling exponent; defaults to h(u) for the multifractional kernel
    /// and 1/alpha(u) otherwise.
    #[serde(default)]
    pub h: Option<f64>,
    pub radii: Vec<f64>,
    pub t_probe: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditBlock {
    pub u: f64,
    pub epsilon: f64,
    #[serde(default = "default_audit_tol")]
    pub quad_tol: f64,
}

fn default_audit_tol() -> f64 {
    1e-7
}

impl JobConfig {
    /// Build and validate the process specification.
    pub fn process_spec(&self, seed_override: Option<u64>) -> Result<ProcessSpec, String> {
        let p = &self.process;
        let kernel = match p.kernel.as_str() {
            "levy_compact" => {
                let t_max = p.t_max.ok_or("levy_compact requires process.t_max")?;
                KernelSpec::LevyCompact { t_max }
            }
            "levy_half_line" => KernelSpec::LevyHalfLine,
            "log_fractional" => KernelSpec::LogFractional,
            "linear_mmm" => {
                let h = p.h.clone().ok_or("linear_mmm requires process.h")?;
                KernelSpec::LinearMmm { h }
            }
            "reverse_ou" => {
                let lambda = p.lambda.ok_or("reverse_ou requires process.lambda")?;
                KernelSpec::ReverseOu { lambda }
            }
            other => return Err(format!("unknown kernel '{other}'")),
        };
        let spec = ProcessSpec {
            kernel,
            alpha: p.alpha.clone(),
            b: p.b.clone(),
            n_terms: self.mc.n_terms,
            seed: seed_override.unwrap_or(self.seed),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn grid_points(&self) -> Result<Vec<f64>, String> {
        let g = self.grid.as_ref().ok_or("this command requires a grid block")?;
        if g.points == 0 {
            return Err("grid.points must be positive".into());
        }
        if g.points == 1 {
            return Ok(vec![g.start]);
        }
        if !(g.end > g.start) {
            return Err("grid.end must exceed grid.start".into());
        }
        let step = (g.end - g.start) / (g.points - 1) as f64;
        Ok((0..g.points).map(|i| g.start + step * i as f64).collect())
    }
}
