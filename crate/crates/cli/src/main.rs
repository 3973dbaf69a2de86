//! `mstab`: synthesize multistable process paths and verify their laws.
//!
//! One job per invocation, fully described by a JSON config:
//!
//! ```text
//! mstab <command> --config <file> [--seed N] [--out DIR]
//! ```
//!
//! Exit codes: 0 success, 2 validation error, 3 statistical-test failure,
//! 4 numerical-accuracy error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{Command, JobConfig};
use mstab_core::{
    condition_audit, diagonal_path, empirical_cf, f_alpha_norm_split, fdd_cf, ks_two_sample,
    sample_joint, sample_marginal, scaling_diagnostic, stable_oracle_sample, CfQuery, Error,
    KernelSpec, StableParams,
};

#[derive(Parser, Debug)]
#[command(name = "mstab", version, about = "multistable process synthesis and verification")]
struct Args {
    /// synth | verify-stable | verify-cf | scaling | audit (must match the
    /// config's command)
    command: String,
    /// Path to the JSON job config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory to prefix all output paths with.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum JobError {
    Validation(String),
    Statistical(String),
    Accuracy(String),
    Io(String),
}

impl JobError {
    fn exit(&self) -> ExitCode {
        match self {
            JobError::Validation(_) => ExitCode::from(2),
            JobError::Statistical(_) => ExitCode::from(3),
            JobError::Accuracy(_) => ExitCode::from(4),
            JobError::Io(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            JobError::Validation(m)
            | JobError::Statistical(m)
            | JobError::Accuracy(m)
            | JobError::Io(m) => m,
        }
    }
}

fn core_err(e: Error) -> JobError {
    match e {
        Error::Accuracy { .. } => JobError::Accuracy(e.to_string()),
        Error::Domain(_) | Error::InvalidSpec(_) => JobError::Validation(e.to_string()),
        other => JobError::Accuracy(other.to_string()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mstab: {}", e.message());
            e.exit()
        }
    }
}

fn run(args: &Args) -> Result<(), JobError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| JobError::Validation(format!("cannot read config: {e}")))?;
    let cfg: JobConfig = serde_json::from_str(&text)
        .map_err(|e| JobError::Validation(format!("bad config: {e}")))?;

    let requested = match args.command.as_str() {
        "synth" => Command::Synth,
        "verify-stable" => Command::VerifyStable,
        "verify-cf" => Command::VerifyCf,
        "scaling" => Command::Scaling,
        "audit" => Command::Audit,
        other => return Err(JobError::Validation(format!("unknown command '{other}'"))),
    };
    if requested != cfg.command {
        return Err(JobError::Validation(format!(
            "config is for a different command than '{}'",
            args.command
        )));
    }

    let spec = cfg.process_spec(args.seed).map_err(JobError::Validation)?;
    let out_path = |name: &Option<String>| -> Option<PathBuf> {
        name.as_ref().map(|n| match &args.out {
            Some(dir) => dir.join(n),
            None => PathBuf::from(n),
        })
    };

    match cfg.command {
        Command::Synth => {
            let grid = cfg.grid_points().map_err(JobError::Validation)?;
            let path = diagonal_path(&spec, &grid).map_err(core_err)?;
            let csv = out_path(&cfg.output.csv)
                .ok_or_else(|| JobError::Validation("synth requires output.csv".into()))?;
            output::write_file(&csv, &path.to_csv()).map_err(JobError::Io)?;
            if let Some(svg) = out_path(&cfg.output.svg) {
                let title = format!(
                    "{} n_terms={} seed={}",
                    spec.kernel.name(),
                    spec.n_terms,
                    spec.seed
                );
                output::write_file(&svg, &output::path_svg(&path, &title))
                    .map_err(JobError::Io)?;
            }
            if let Some(dump) = out_path(&cfg.output.draw_json) {
                let draw = spec.draw().map_err(core_err)?;
                let value = serde_json::to_value(&draw)
                    .map_err(|e| JobError::Io(format!("serialize: {e}")))?;
                emit_json(&Some(dump), &value)?;
            }
            println!("synth: wrote {} grid points", path.grid.len());
            Ok(())
        }
        Command::VerifyStable => {
            let vs = cfg
                .verify_stable
                .ok_or_else(|| JobError::Validation("missing verify_stable block".into()))?;
            let n = cfg.mc.n_paths;
            let band = vs.band.unwrap_or(1.63 / (n as f64).sqrt() + 0.01);
            let alpha_t = spec.alpha.eval(vs.t);
            let k = spec.kernel.clone();
            let af = spec.alpha.clone();
            let t = vs.t;
            let sigma = f_alpha_norm_split(
                move |x| k.eval(&af, t, t, x).unwrap_or(f64::NAN),
                alpha_t,
                &spec.measure(),
                1e-9,
                &spec.kernel.singular_points(t),
            )
            .map_err(core_err)?;
            let samples = sample_marginal(&spec, vs.t, n, spec.seed).map_err(core_err)?;
            let oracle = stable_oracle_sample(
                StableParams::new(alpha_t, sigma).map_err(core_err)?,
                vs.oracle_n,
                spec.seed ^ 0xFACADE,
            );
            let (d, p) = ks_two_sample(&samples, &oracle).map_err(core_err)?;
            let report = json!({
                "t": vs.t,
                "alpha_at_t": alpha_t,
                "sigma": sigma,
                "n_paths": n,
                "ks_D": d,
                "ks_p": p,
                "band": band,
                "pass": d < band,
            });
            emit_json(&out_path(&cfg.output.json), &report)?;
            println!("verify-stable: KS D = {d:.5}, band = {band:.5}");
            if d < band {
                Ok(())
            } else {
                Err(JobError::Statistical(format!("KS D = {d:.5} >= band {band:.5}")))
            }
        }
        Command::VerifyCf => {
            let vc = cfg
                .verify_cf
                .clone()
                .ok_or_else(|| JobError::Validation("missing verify_cf block".into()))?;
            let n = cfg.mc.n_paths;
            let band = vc.band.unwrap_or(3.0 / (n as f64).sqrt() + 1e-4);
            let samples = sample_joint(&spec, &[vc.t], n, spec.seed).map_err(core_err)?;
            let mut entries = Vec::new();
            let mut worst = 0.0f64;
            for &theta in &vc.thetas {
                let q = CfQuery::single(vc.t, theta);
                let quad = fdd_cf(&spec, &q, vc.quad_tol).map_err(core_err)?;
                let (re, im) = empirical_cf(&samples, &q).map_err(core_err)?;
                let diff = (re - quad.cf_value).abs();
                worst = worst.max(diff);
                entries.push(json!({
                    "theta": theta,
                    "cf_value": quad.cf_value,
                    "cf_error_bound": quad.cf_error_bound,
                    "empirical_re": re,
                    "empirical_im": im,
                    "abs_diff": diff,
                }));
            }
            let report = json!({
                "t": vc.t,
                "n_paths": n,
                "band": band,
                "cf": entries,
                "max_abs_diff": worst,
                "pass": worst <= band,
            });
            emit_json(&out_path(&cfg.output.json), &report)?;
            println!("verify-cf: max |empirical - quadrature| = {worst:.5}, band = {band:.5}");
            if worst <= band {
                Ok(())
            } else {
                Err(JobError::Statistical(format!(
                    "max CF deviation {worst:.5} > band {band:.5}"
                )))
            }
        }
        Command::Scaling => {
            let sc = cfg
                .scaling
                .clone()
                .ok_or_else(|| JobError::Validation("missing scaling block".into()))?;
            let h = sc.h.unwrap_or_else(|| match &spec.kernel {
                KernelSpec::LinearMmm { h } => h.eval(sc.u),
                _ => 1.0 / spec.alpha.eval(sc.u),
            });
            let report =
                scaling_diagnostic(&spec, sc.u, h, &sc.radii, sc.t_probe, cfg.mc.n_paths)
                    .map_err(core_err)?;
            let value = serde_json::to_value(&report)
                .map_err(|e| JobError::Io(format!("serialize: {e}")))?;
            emit_json(&out_path(&cfg.output.json), &value)?;
            println!(
                "scaling: fitted exponent {:.4} (target h = {h:.4})",
                report.fitted_exponent
            );
            Ok(())
        }
        Command::Audit => {
            let au = cfg
                .audit
                .ok_or_else(|| JobError::Validation("missing audit block".into()))?;
            let report =
                condition_audit(&spec, au.u, au.epsilon, au.quad_tol).map_err(core_err)?;
            let value = serde_json::to_value(&report)
                .map_err(|e| JobError::Io(format!("serialize: {e}")))?;
            emit_json(&out_path(&cfg.output.json), &value)?;
            println!(
                "audit: verdicts {}",
                report
                    .verdicts
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            Ok(())
        }
    }
}

fn emit_json(path: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), JobError> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| JobError::Io(format!("serialize: {e}")))?;
        output::write_file(p, &(text + "\n")).map_err(JobError::Io)?;
    }
    Ok(())
}
