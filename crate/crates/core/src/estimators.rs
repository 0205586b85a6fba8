//! Monte Carlo experiments over independent environments.
//!
//! Replicate `k` draws its `M` reference paths from `stream(seed, Paths, k)`,
//! sizes the window around them, and then samples the medium from
//! `stream(seed, Cloud, k)`. Replicates run in parallel and are reduced in
//! index order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::lambda;
use crate::environment::{count_in_tube, sample_poisson, superpose, PointCloud, SpaceTimeBox};
use crate::error::{Error, Result};
use crate::geometry::BallGeometry;
use crate::polymer::{
    build_ensemble, occupancy_field, sample_paths, two_to_one_report, GibbsEnsemble, OccupancyField, PolymerPath,
    TimeGrid, TwoToOneReport,
};
use crate::rng::{stream, StreamTag};

/// Spatial margin added around the tubes when sizing the window.
pub const WINDOW_MARGIN: f64 = 0.5;
/// Tolerance for the per-replicate two-to-one checks.
pub const INVARIANT_TOL: f64 = 1e-9;
/// Step of the central difference in β.
pub const BETA_FD_STEP: f64 = 0.05;
/// Step of the coupled central difference in ν, relative to ν.
pub const NU_FD_REL_STEP: f64 = 0.1;

/// Mean over replicates with standard error `sd/√n` (zero for `n = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub n_replicates: usize,
}

impl EstimateWithError {
    pub fn from_samples(xs: &[f64]) -> Self {
        assert!(!xs.is_empty(), "no samples");
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error,
            n_replicates: n,
        }
    }

    /// `√(se₁² + se₂²)`, the standard error of a difference of independent estimates.
    pub fn combined_se(&self, other: &Self) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub beta: f64,
    pub nu: f64,
    pub t: f64,
    pub n_steps: usize,
    /// paths per environment, `M`
    pub paths_per_env: usize,
    /// environments, `K`
    pub n_envs: usize,
    /// occupancy bin width `h`
    pub bin_width: f64,
    pub delta: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `n_steps = 64·t`, `M = 2000`, `K = 200`,
    /// `h = r_d/4`, `δ = 1/4`, seed 0.
    pub fn new(d: usize, beta: f64, nu: f64, t: f64) -> Result<Self> {
        let r = BallGeometry::new(d)?.radius();
        Ok(Self {
            d,
            beta,
            nu,
            t,
            n_steps: default_steps(t),
            paths_per_env: 2000,
            n_envs: 200,
            bin_width: r / 4.0,
            delta: 0.25,
            seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::InvalidConfig(format!("{key}: {why}")));
        if self.d == 0 {
            return bad("d", "dimension must be at least 1".into());
        }
        if !self.beta.is_finite() {
            return bad("beta", format!("must be finite, got {}", self.beta));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad("nu", format!("must be finite and >= 0, got {}", self.nu));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad("t", format!("must be finite and > 0, got {}", self.t));
        }
        if self.n_steps == 0 {
            return bad("n_steps", "must be at least 1".into());
        }
        if self.paths_per_env == 0 {
            return bad("paths_per_env", "must be at least 1".into());
        }
        if self.n_envs == 0 {
            return bad("n_envs", "must be at least 1".into());
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return bad("bin_width", format!("must be finite and > 0, got {}", self.bin_width));
        }
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return bad("delta", format!("must lie in (0, 1/2], got {}", self.delta));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<BallGeometry> {
        BallGeometry::new(self.d)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t, self.n_steps)
    }
}

/// `n_steps = 64·t`, rounded, at least 1.
pub fn default_steps(t: f64) -> usize {
    ((64.0 * t).round() as usize).max(1)
}

/// One sampled environment with its reference paths.
#[derive(Debug, Clone)]
pub struct Environment {
    pub paths: Vec<PolymerPath>,
    pub bbox: SpaceTimeBox,
    pub cloud: PointCloud,
}

/// Replicate `k` of `cfg` at intensity `nu`.
pub fn sample_environment(cfg: &ExperimentConfig, nu: f64, k: usize) -> Result<Environment> {
    let geom = cfg.geometry()?;
    let grid = cfg.time_grid()?;
    let paths = sample_paths(&grid, cfg.d, cfg.paths_per_env, &mut stream(cfg.seed, StreamTag::Paths, k as u64))?;
    let bbox = SpaceTimeBox::covering(&paths, geom.radius(), WINDOW_MARGIN)?;
    let cloud = sample_poisson(&bbox, nu, &mut stream(cfg.seed, StreamTag::Cloud, k as u64))?;
    Ok(Environment { paths, bbox, cloud })
}

/// Two-to-one report for a replicate; any violation aborts with the seed
/// and replicate index.
pub fn checked_report(cfg: &ExperimentConfig, k: usize, ens: &GibbsEnsemble, field: &OccupancyField) -> Result<TwoToOneReport> {
    let report = two_to_one_report(ens, field, cfg.delta)?;
    if let Some(detail) = report.violation(INVARIANT_TOL) {
        return Err(Error::InvariantViolation {
            seed: cfg.seed,
            replicate: k,
            detail,
        });
    }
    Ok(report)
}

/// Ensemble at `cfg.beta` plus its checked occupancy field.
fn checked_ensemble(cfg: &ExperimentConfig, k: usize, env: Environment) -> Result<(GibbsEnsemble, OccupancyField, TwoToOneReport)> {
    let geom = cfg.geometry()?;
    let ens = build_ensemble(env.paths, &env.cloud, cfg.beta, &geom)?;
    let field = occupancy_field(&ens, &env.bbox, cfg.bin_width)?;
    let report = checked_report(cfg, k, &ens, &field)?;
    Ok((ens, field, report))
}

fn replicates<T: Send>(cfg: &ExperimentConfig, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    cfg.validate()?;
    (0..cfg.n_envs).into_par_iter().map(&f).collect()
}

/// Minimum and mean effective sample size over environments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssSummary {
    pub min: f64,
    pub mean: f64,
}

impl EssSummary {
    fn from_values(xs: &[f64]) -> Self {
        Self {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
        }
    }
}

/// An estimate with the ESS diagnostics of the ensembles behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub estimate: EstimateWithError,
    pub ess: EssSummary,
}

fn measurement(per_env: &[(f64, f64)]) -> Measurement {
    let values: Vec<f64> = per_env.iter().map(|p| p.0).collect();
    let ess: Vec<f64> = per_env.iter().map(|p| p.1).collect();
    Measurement {
        estimate: EstimateWithError::from_samples(&values),
        ess: EssSummary::from_values(&ess),
    }
}

/// `ln((1/M) Σ e^{l_i})` and the jackknife-corrected version
/// `M·L − (M−1)·mean_i L_{−i}`, with `L_{−i}` the leave-one-out log mean.
pub fn log_mean_exp_jackknife(log_weights: &[f64]) -> (f64, f64) {
    let m = log_weights.len();
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let full = max + total.ln() - (m as f64).ln();
    if m == 1 {
        return (full, full);
    }
    let ln_rest = ((m - 1) as f64).ln();
    let loo_sum: f64 = scaled
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if e <= 0.5 * total {
                max + (total - e).ln() - ln_rest
            } else {
                // subtracting a dominant term would cancel: rescale the others by their own maximum
                let others = log_weights.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, l)| *l);
                let m2 = others.clone().fold(f64::NEG_INFINITY, f64::max);
                m2 + others.map(|l| (l - m2).exp()).sum::<f64>().ln() - ln_rest
            }
        })
        .sum();
    let loo_mean = loo_sum / m as f64;
    (full, m as f64 * full - (m - 1) as f64 * loo_mean)
}

/// Quenched free energy `(1/t) ln Ẑ` averaged over environments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuenchedEstimate {
    /// jackknife-corrected for the low bias of a log of a sample mean
    pub estimate: EstimateWithError,
    /// plain average of `(1/t) ln Ẑ`
    pub naive: EstimateWithError,
    /// `naive − corrected`
    pub jackknife_bias: f64,
    pub ess: EssSummary,
}

pub fn quenched_free_energy(cfg: &ExperimentConfig) -> Result<QuenchedEstimate> {
    let rows = replicates(cfg, |k| {
        let env = sample_environment(cfg, cfg.nu, k)?;
        let (ens, _, _) = checked_ensemble(cfg, k, env)?;
        let (naive, corrected) = log_mean_exp_jackknife(ens.log_weights());
        Ok((naive / cfg.t, corrected / cfg.t, ens.ess()))
    })?;
    let naive: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let corrected: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let ess: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let estimate = EstimateWithError::from_samples(&corrected);
    let naive = EstimateWithError::from_samples(&naive);
    Ok(QuenchedEstimate {
        estimate,
        naive,
        jackknife_bias: naive.value - estimate.value,
        ess: EssSummary::from_values(&ess),
    })
}

/// `(1/t) ln((1/K) Σ_k e^{β H_k})` for the zero path over `K` environments,
/// with a delta-method standard error. The target is `νλ(β)`, since the
/// zero path's tube count is Poisson(νt).
pub fn annealed_check(cfg: &ExperimentConfig) -> Result<EstimateWithError> {
    let geom = cfg.geometry()?;
    let grid = cfg.time_grid()?;
    let zero = PolymerPath::zero(grid, cfg.d);
    let bbox = SpaceTimeBox::covering(std::slice::from_ref(&zero), geom.radius(), WINDOW_MARGIN)?;
    let counts = replicates(cfg, |k| {
        let cloud = sample_poisson(&bbox, cfg.nu, &mut stream(cfg.seed, StreamTag::Annealed, k as u64))?;
        Ok(count_in_tube(&cloud, &zero, &geom))
    })?;
    let logs: Vec<f64> = counts.iter().map(|&h| cfg.beta * h as f64).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let s = EstimateWithError::from_samples(&scaled);
    Ok(EstimateWithError {
        value: (max + s.value.ln()) / cfg.t,
        std_error: s.std_error / s.value / cfg.t,
        n_replicates: s.n_replicates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Gibbs average of the Hamiltonian, `Σ w_i H_i / t`
    Direct,
    /// Palm form `ν e^β ∫ m/(1 + λm)` over the occupancy grid
    Palm,
    /// central difference of `(1/t) ln Ẑ` at `β ± 0.05` on the same paths and points
    FiniteDifference,
}

/// `∂p_t/∂β` by the chosen method.
pub fn dp_dbeta(cfg: &ExperimentConfig, method: DerivativeMethod) -> Result<Measurement> {
    match method {
        DerivativeMethod::FiniteDifference => dp_dbeta_finite_difference(cfg, BETA_FD_STEP),
        DerivativeMethod::Direct | DerivativeMethod::Palm => {
            let lam = lambda(cfg.beta);
            let palm_scale = cfg.nu * cfg.beta.exp();
            let rows = replicates(cfg, |k| {
                let env = sample_environment(cfg, cfg.nu, k)?;
                let (ens, field, _) = checked_ensemble(cfg, k, env)?;
                let value = if method == DerivativeMethod::Direct {
                    ens.weights()
                        .iter()
                        .zip(ens.hamiltonians())
                        .map(|(w, &h)| w * h as f64)
                        .sum::<f64>()
                        / cfg.t
                } else {
                    palm_scale * field.integrate(|m| m / (1.0 + lam * m))
                };
                Ok((value, ens.ess()))
            })?;
            Ok(measurement(&rows))
        }
    }
}

/// Central difference in β with common paths and points; differentiates the
/// plain `(1/t) ln Ẑ`, whose exact derivative is the direct estimator.
pub fn dp_dbeta_finite_difference(cfg: &ExperimentConfig, eps: f64) -> Result<Measurement> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!("finite-difference step must be > 0, got {eps}")));
    }
    let rows = replicates(cfg, |k| {
        let env = sample_environment(cfg, cfg.nu, k)?;
        let (ens, _, _) = checked_ensemble(cfg, k, env)?;
        let up = ens.reweight(cfg.beta + eps).log_z_hat();
        let down = ens.reweight(cfg.beta - eps).log_z_hat();
        Ok(((up - down) / (2.0 * eps * cfg.t), ens.ess()))
    })?;
    Ok(measurement(&rows))
}

/// `∂p_t/∂ν = (1/t) ∫∫ Q ln(1 + λ μ_t(χ_{s,x}))` on the occupancy grid.
pub fn dp_dnu(cfg: &ExperimentConfig) -> Result<Measurement> {
    let lam = lambda(cfg.beta);
    let rows = replicates(cfg, |k| {
        let env = sample_environment(cfg, cfg.nu, k)?;
        let (ens, field, _) = checked_ensemble(cfg, k, env)?;
        Ok((field.integrate(|m| (lam * m).ln_1p()), ens.ess()))
    })?;
    Ok(measurement(&rows))
}

/// Environment at `nu` built as the superposition of the replicate's base
/// cloud at `nu_base` and an independent extra cloud at `nu − nu_base`.
fn coupled_clouds(cfg: &ExperimentConfig, k: usize, nu_base: f64, nu: f64) -> Result<(Environment, PointCloud)> {
    let base = sample_environment(cfg, nu_base, k)?;
    let extra = sample_poisson(&base.bbox, nu - nu_base, &mut stream(cfg.seed, StreamTag::CloudExtra, k as u64))?;
    let full = superpose(&base.cloud, &extra)?;
    Ok((base, full))
}

/// Coupled central difference `(p̂(ν+ε) − p̂(ν−ε))/(2ε)` with `ε = 0.1·ν`;
/// the larger cloud is the smaller one plus independent extra points.
pub fn dp_dnu_finite_difference(cfg: &ExperimentConfig) -> Result<Measurement> {
    if cfg.nu <= 0.0 {
        return Err(Error::InvalidConfig("nu: the coupled difference needs nu > 0".into()));
    }
    let eps = NU_FD_REL_STEP * cfg.nu;
    let geom = cfg.geometry()?;
    let rows = replicates(cfg, |k| {
        let (base, full) = coupled_clouds(cfg, k, cfg.nu - eps, cfg.nu + eps)?;
        let low = build_ensemble(base.paths.clone(), &base.cloud, cfg.beta, &geom)?;
        let high = build_ensemble(base.paths, &full, cfg.beta, &geom)?;
        Ok(((high.log_z_hat() - low.log_z_hat()) / (2.0 * eps * cfg.t), high.ess()))
    })?;
    Ok(measurement(&rows))
}

/// Coupled comparison of intensities `ν′ ≤ ν`: the difference
/// `p̂(ν) − p̂(ν′)` and the slacks against `β(ν−ν′)` and `λ(β)(ν−ν′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuMonotonicity {
    pub nu_prime: f64,
    pub difference: EstimateWithError,
    /// difference − β(ν−ν′)
    pub lower_slack: EstimateWithError,
    /// λ(β)(ν−ν′) − difference
    pub upper_slack: EstimateWithError,
    pub ess: EssSummary,
}

pub fn nu_monotonicity(cfg: &ExperimentConfig, nu_prime: f64) -> Result<NuMonotonicity> {
    if !(nu_prime > 0.0 && nu_prime <= cfg.nu) {
        return Err(Error::InvalidConfig(format!(
            "nu_prime: need 0 < nu_prime <= nu = {}, got {nu_prime}",
            cfg.nu
        )));
    }
    let geom = cfg.geometry()?;
    let gap = cfg.nu - nu_prime;
    let (lo_bound, hi_bound) = (cfg.beta * gap, lambda(cfg.beta) * gap);
    let rows = replicates(cfg, |k| {
        let (base, full) = coupled_clouds(cfg, k, nu_prime, cfg.nu)?;
        let low = build_ensemble(base.paths.clone(), &base.cloud, cfg.beta, &geom)?;
        let env = Environment {
            paths: base.paths,
            bbox: base.bbox,
            cloud: full,
        };
        let (high, _, _) = checked_ensemble(cfg, k, env)?;
        let diff = (high.log_z_hat() - low.log_z_hat()) / cfg.t;
        Ok((diff, diff - lo_bound, hi_bound - diff, high.ess()))
    })?;
    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| EstimateWithError::from_samples(&rows.iter().map(f).collect::<Vec<_>>());
    let ess: Vec<f64> = rows.iter().map(|r| r.3).collect();
    Ok(NuMonotonicity {
        nu_prime,
        difference: col(|r| r.0),
        lower_slack: col(|r| r.1),
        upper_slack: col(|r| r.2),
        ess: EssSummary::from_values(&ess),
    })
}

/// Environment-averaged localization observables for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationRow {
    pub beta: f64,
    pub nu: f64,
    pub t: f64,
    /// grid replica overlap `R`
    pub overlap: EstimateWithError,
    /// favourite-path overlap `R_*`
    pub favourite_overlap: EstimateWithError,
    pub middle: EstimateWithError,
    pub negligible_in_tube: EstimateWithError,
    pub predominant_out_of_tube: EstimateWithError,
    pub ess: EssSummary,
}

pub fn localization(cfg: &ExperimentConfig) -> Result<LocalizationRow> {
    let reports = replicates(cfg, |k| {
        let env = sample_environment(cfg, cfg.nu, k)?;
        let (_, _, report) = checked_ensemble(cfg, k, env)?;
        Ok(report)
    })?;
    let col = |f: fn(&TwoToOneReport) -> f64| EstimateWithError::from_samples(&reports.iter().map(f).collect::<Vec<_>>());
    let ess: Vec<f64> = reports.iter().map(|r| r.ess).collect();
    Ok(LocalizationRow {
        beta: cfg.beta,
        nu: cfg.nu,
        t: cfg.t,
        overlap: col(|r| r.overlap),
        favourite_overlap: col(|r| r.favourite_overlap),
        middle: col(|r| r.delta_sets.middle),
        negligible_in_tube: col(|r| r.delta_sets.negligible_in_tube),
        predominant_out_of_tube: col(|r| r.delta_sets.predominant_out_of_tube),
        ess: EssSummary::from_values(&ess),
    })
}

/// One localization row per configuration, in the given order.
pub fn localization_scan(cfgs: &[ExperimentConfig]) -> Result<Vec<LocalizationRow>> {
    cfgs.iter().map(localization).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(beta: f64, nu: f64, t: f64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(1, beta, nu, t).unwrap();
        c.paths_per_env = 200;
        c.n_envs = 40;
        c.n_steps = 32;
        c.seed = 11;
        c
    }

    #[test]
    fn standard_error_convention() {
        let e = EstimateWithError::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(EstimateWithError::from_samples(&[7.0]).std_error, 0.0);
    }

    #[test]
    fn config_validation_names_key() {
        let mut c = small(0.5, 1.0, 1.0);
        c.delta = 0.7;
        match c.validate() {
            Err(Error::InvalidConfig(msg)) => assert!(msg.starts_with("delta")),
            other => panic!("{other:?}"),
        }
        c.delta = 0.25;
        c.nu = -1.0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(m)) if m.starts_with("nu")));
        assert_eq!(ExperimentConfig::new(1, 0.0, 1.0, 2.0).unwrap().n_steps, 128);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let ls = [0.3, -1.2, 2.5, 0.0, 0.7];
        let lme = |xs: &[f64]| (xs.iter().map(|x| x.exp()).sum::<f64>() / xs.len() as f64).ln();
        let full = lme(&ls);
        let loo: f64 = (0..ls.len())
            .map(|i| {
                let rest: Vec<f64> = ls.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| *x).collect();
                lme(&rest)
            })
            .sum::<f64>()
            / ls.len() as f64;
        let (a, b) = log_mean_exp_jackknife(&ls);
        assert!((a - full).abs() < 1e-14);
        assert!((b - (5.0 * full - 4.0 * loo)).abs() < 1e-12);
        // one dominant term
        let (a, c) = log_mean_exp_jackknife(&[800.0, 0.0, 1.0]);
        let loo = ((800.0 + (1.0 + (-800.0f64).exp()).ln() - 2f64.ln()) * 2.0 + (1.0 + 1f64.exp()).ln() - 2f64.ln()) / 3.0;
        assert!((c - (3.0 * a - 2.0 * loo)).abs() < 1e-9, "{c}");
        assert_eq!(log_mean_exp_jackknife(&[0.0; 9]), (0.0, 0.0));
    }

    #[test]
    fn trivial_quenched_values() {
        let q = quenched_free_energy(&small(0.0, 1.0, 1.0)).unwrap();
        assert_eq!((q.estimate.value, q.estimate.std_error), (0.0, 0.0));
        let q = quenched_free_energy(&small(0.7, 0.0, 1.0)).unwrap();
        assert_eq!((q.estimate.value, q.estimate.std_error), (0.0, 0.0));
        assert!((q.ess.min - 200.0).abs() < 1e-9);
    }

    #[test]
    fn trivial_annealed_and_derivatives() {
        let a = annealed_check(&small(0.0, 1.0, 1.0)).unwrap();
        assert_eq!((a.value, a.std_error), (0.0, 0.0));
        assert_eq!(dp_dnu(&small(0.0, 1.0, 1.0)).unwrap().estimate.value, 0.0);
        let m = nu_monotonicity(&small(0.8, 2.0, 1.0), 2.0).unwrap();
        assert_eq!(m.lower_slack.value, 0.0);
        assert_eq!(m.upper_slack.value, 0.0);
        let m = nu_monotonicity(&small(0.0, 2.0, 1.0), 1.0).unwrap();
        assert_eq!((m.difference.value, m.lower_slack.value, m.upper_slack.value), (0.0, 0.0, 0.0));
        assert!(nu_monotonicity(&small(0.8, 2.0, 1.0), 3.0).is_err());
    }

    #[test]
    fn beta_zero_derivatives_equal_nu() {
        let c = small(0.0, 1.5, 1.0);
        let direct = dp_dbeta(&c, DerivativeMethod::Direct).unwrap().estimate;
        let palm = dp_dbeta(&c, DerivativeMethod::Palm).unwrap().estimate;
        assert!((direct.value - 1.5).abs() < 3.0 * direct.std_error + 0.05);
        // λ = 0: the Palm integrand is ν times the grid mass
        assert!((palm.value - 1.5).abs() < 0.05 * 1.5);
    }

    #[test]
    fn annealed_hits_target() {
        let mut c = small(0.5, 1.0, 2.0);
        c.n_envs = 20_000;
        let a = annealed_check(&c).unwrap();
        assert!((a.value - lambda(0.5)).abs() < 3.0 * a.std_error, "{a:?}");
    }

    #[test]
    fn replay_is_bitwise() {
        let c = small(0.9, 1.0, 1.0);
        let a = dp_dbeta(&c, DerivativeMethod::Palm).unwrap();
        let b = dp_dbeta(&c, DerivativeMethod::Palm).unwrap();
        assert_eq!(a.estimate.value.to_bits(), b.estimate.value.to_bits());
        assert_eq!(a.estimate.std_error.to_bits(), b.estimate.std_error.to_bits());
    }

    #[test]
    fn dp_dnu_envelope_and_coupling() {
        let mut c = small(1.0, 1.0, 2.0);
        c.n_steps = 64;
        let g = dp_dnu(&c).unwrap().estimate;
        // β m ≤ ln(1+λm) ≤ λ m with grid mass close to 1
        assert!(g.value >= 1.0 - 3.0 * g.std_error - 0.05);
        assert!(g.value <= lambda(1.0) + 3.0 * g.std_error + 0.05);
        let fd = dp_dnu_finite_difference(&c).unwrap().estimate;
        assert!((g.value - fd.value).abs() < 3.0 * g.combined_se(&fd) + 0.05 * lambda(1.0), "{g:?} vs {fd:?}");
    }

    #[test]
    fn localization_row_shapes() {
        let r = localization(&small(1.0, 2.0, 1.0)).unwrap();
        for e in [r.overlap, r.favourite_overlap, r.middle, r.negligible_in_tube, r.predominant_out_of_tube] {
            assert!(e.value >= 0.0, "{r:?}");
            assert_eq!(e.n_replicates, 40);
        }
        assert!(r.overlap.value <= 1.0 + 1e-9 && r.favourite_overlap.value <= 1.0 + 1e-9);
        assert!(r.ess.min >= 1.0 && r.ess.min <= r.ess.mean);
    }
}
