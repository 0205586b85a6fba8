//! Experiment orchestration and result files.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use poisson_polymer::estimators::{
    annealed_check, dp_dbeta, dp_dnu, dp_dnu_finite_difference, localization, nu_monotonicity, quenched_free_energy,
    DerivativeMethod, EstimateWithError,
};
use poisson_polymer::numfmt::sig17;
use poisson_polymer::ExperimentConfig;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "mode,d,beta,nu,t,n_steps,M,K,h,value,std_error,ess_min,observable";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaTriple {
    pub delta: f64,
    pub middle: f64,
    pub negligible_in_tube: f64,
    pub predominant_out_of_tube: f64,
}

/// One results row; `delta_sets` is filled on localization rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub mode: String,
    pub d: usize,
    pub beta: f64,
    pub nu: f64,
    pub t: f64,
    pub n_steps: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub h: f64,
    pub value: f64,
    pub std_error: f64,
    pub ess_min: f64,
    pub observable: String,
    pub delta_sets: Option<DeltaTriple>,
}

impl ResultRow {
    fn new(mode: &Mode, cfg: &ExperimentConfig, observable: &str, est: EstimateWithError, ess_min: f64) -> Self {
        Self {
            mode: mode.to_string(),
            d: cfg.d,
            beta: cfg.beta,
            nu: cfg.nu,
            t: cfg.t,
            n_steps: cfg.n_steps,
            m: cfg.paths_per_env,
            k: cfg.n_envs,
            h: cfg.bin_width,
            value: est.value,
            std_error: est.std_error,
            ess_min,
            observable: observable.to_string(),
            delta_sets: None,
        }
    }

    pub fn csv_line(&self) -> String {
        [
            self.mode.clone(),
            self.d.to_string(),
            sig17(self.beta),
            sig17(self.nu),
            sig17(self.t),
            self.n_steps.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            sig17(self.h),
            sig17(self.value),
            sig17(self.std_error),
            sig17(self.ess_min),
            self.observable.clone(),
        ]
        .join(",")
    }
}

/// Runs `mode` on one cell.
pub fn run_cell(mode: &Mode, cfg: &ExperimentConfig) -> CliResult<Vec<ResultRow>> {
    let row = |obs: &str, est, ess| ResultRow::new(mode, cfg, obs, est, ess);
    Ok(match mode {
        Mode::Quenched => {
            let q = quenched_free_energy(cfg)?;
            vec![row("p_hat", q.estimate, q.ess.min), row("p_hat_naive", q.naive, q.ess.min)]
        }
        Mode::Annealed => {
            // a single fixed path: every ensemble has ESS 1
            vec![row("annealed_p_hat", annealed_check(cfg)?, 1.0)]
        }
        Mode::DpDbeta => {
            let mut rows = Vec::new();
            for (name, method) in [
                ("dp_dbeta_direct", DerivativeMethod::Direct),
                ("dp_dbeta_palm", DerivativeMethod::Palm),
                ("dp_dbeta_finite_difference", DerivativeMethod::FiniteDifference),
            ] {
                let m = dp_dbeta(cfg, method)?;
                rows.push(row(name, m.estimate, m.ess.min));
            }
            rows
        }
        Mode::DpDnu => {
            let a = dp_dnu(cfg)?;
            let b = dp_dnu_finite_difference(cfg)?;
            vec![
                row("dp_dnu", a.estimate, a.ess.min),
                row("dp_dnu_finite_difference", b.estimate, b.ess.min),
            ]
        }
        Mode::NuMonotonicity { nu_prime } => {
            let m = nu_monotonicity(cfg, *nu_prime)?;
            vec![
                row("p_difference", m.difference, m.ess.min),
                row("lower_slack", m.lower_slack, m.ess.min),
                row("upper_slack", m.upper_slack, m.ess.min),
            ]
        }
        Mode::Localization => {
            let l = localization(cfg)?;
            let triple = DeltaTriple {
                delta: cfg.delta,
                middle: l.middle.value,
                negligible_in_tube: l.negligible_in_tube.value,
                predominant_out_of_tube: l.predominant_out_of_tube.value,
            };
            let mut rows = vec![
                row("overlap", l.overlap, l.ess.min),
                row("favourite_overlap", l.favourite_overlap, l.ess.min),
                row("delta_middle", l.middle, l.ess.min),
                row("delta_negligible_in_tube", l.negligible_in_tube, l.ess.min),
                row("delta_predominant_out_of_tube", l.predominant_out_of_tube, l.ess.min),
            ];
            for r in &mut rows {
                r.delta_sets = Some(triple);
            }
            rows
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// `simulate` or `sweep`
    pub command: String,
    /// canonical configuration, parsed again on replay
    pub config: String,
    /// git blob hash (SHA-256) of `config`
    pub config_hash: String,
    pub seed: u64,
    pub timings: Vec<Timing>,
    pub version: String,
}

/// `sha256("blob <len>\0" ++ content)`, the git object hash of a blob.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }
}

pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub manifest: RunManifest,
}

/// Runs every cell (cells in parallel, results kept in cell order).
pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<RunOutput> {
    if command == Command::Simulate && cfg.has_grid() {
        return Err(CliError::Config("grid keys need the sweep subcommand".into()));
    }
    let cells = cfg.cells()?;
    let results: Vec<(Vec<ResultRow>, Timing)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let start = Instant::now();
            let rows = run_cell(&cfg.mode, cell)?;
            let timing = Timing {
                operation: format!("cell {i}: {}", cfg.mode),
                seconds: start.elapsed().as_secs_f64(),
            };
            Ok((rows, timing))
        })
        .collect::<CliResult<_>>()?;
    let text = cfg.canonical_text();
    let manifest = RunManifest {
        command: command.name().to_string(),
        config_hash: blob_hash(text.as_bytes()),
        config: text,
        seed: cfg.seed,
        timings: results.iter().map(|r| r.1.clone()).collect(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunOutput {
        rows: results.into_iter().flat_map(|r| r.0).collect(),
        manifest,
    })
}

pub fn csv_text(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a ResultRow,
    manifest_hash: &'a str,
}

/// Writes `results.csv`, `results.json` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), csv_text(&out.rows))?;
    let manifest_json = serde_json::to_string_pretty(&out.manifest)?;
    let manifest_hash = blob_hash(manifest_json.as_bytes());
    let rows: Vec<JsonRow> = out
        .rows
        .iter()
        .map(|row| JsonRow {
            row,
            manifest_hash: &manifest_hash,
        })
        .collect();
    fs::write(dir.join("results.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
    fs::write(dir.join("manifest.json"), manifest_json + "\n")?;
    Ok(())
}

/// Reruns the experiment recorded in a manifest.
pub fn replay(manifest: &RunManifest) -> CliResult<RunOutput> {
    let command = match manifest.command.as_str() {
        "simulate" => Command::Simulate,
        "sweep" => Command::Sweep,
        other => return Err(CliError::Config(format!("manifest: unknown command `{other}`"))),
    };
    if blob_hash(manifest.config.as_bytes()) != manifest.config_hash {
        return Err(CliError::Config("manifest: config does not match config_hash".into()));
    }
    let cfg = RunConfig::parse(&manifest.config)?;
    execute(command, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git_convention() {
        // printf 'hello\n' | git hash-object --object-format=sha256 --stdin
        assert_eq!(
            blob_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn csv_line_layout() {
        let cfg = ExperimentConfig::new(1, 0.5, 1.0, 2.0).unwrap();
        let est = EstimateWithError {
            value: 0.1,
            std_error: 0.0,
            n_replicates: 3,
        };
        let line = ResultRow::new(&Mode::Quenched, &cfg, "p_hat", est, 1.0).csv_line();
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        assert!(line.starts_with("quenched,1,5.0000000000000000e-1,"));
        assert!(line.ends_with(",p_hat"));
    }
}
