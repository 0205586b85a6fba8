use crate::environment::{PointCloud, TubeIndex};
use crate::error::{Error, Result};
use crate::geometry::BallGeometry;

use super::path::PolymerPath;

/// `M` paths reweighted by `exp(β·H_i)` under one environment: the Monte
/// Carlo stand-in for the polymer measure.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    geom: BallGeometry,
    paths: Vec<PolymerPath>,
    hamiltonians: Vec<u64>,
    beta: f64,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    log_z_hat: f64,
}

impl GibbsEnsemble {
    /// Weights from given Hamiltonians, in log space.
    pub fn from_hamiltonians(geom: BallGeometry, paths: Vec<PolymerPath>, hamiltonians: Vec<u64>, beta: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidCount("ensemble needs at least one path".into()));
        }
        if paths.len() != hamiltonians.len() {
            return Err(Error::InvalidCount(format!(
                "{} paths but {} hamiltonians",
                paths.len(),
                hamiltonians.len()
            )));
        }
        let log_weights: Vec<f64> = hamiltonians.iter().map(|&h| beta * h as f64).collect();
        let (weights, log_sum) = normalize_log_weights(&log_weights);
        let log_z_hat = log_sum - (paths.len() as f64).ln();
        Ok(Self {
            geom,
            paths,
            hamiltonians,
            beta,
            log_weights,
            weights,
            log_z_hat,
        })
    }

    pub fn geometry(&self) -> &BallGeometry {
        &self.geom
    }

    pub fn paths(&self) -> &[PolymerPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn hamiltonians(&self) -> &[u64] {
        &self.hamiltonians
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln((1/M) Σ_i exp(β H_i))`.
    pub fn log_z_hat(&self) -> f64 {
        self.log_z_hat
    }

    pub fn z_hat(&self) -> f64 {
        self.log_z_hat.exp()
    }

    /// Effective sample size `1 / Σ w_i²`.
    pub fn ess(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// `Σ_i w_i H_i`, the β-derivative of `ln Z_hat`.
    pub fn mean_hamiltonian(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.hamiltonians)
            .map(|(w, &h)| w * h as f64)
            .sum()
    }

    /// Same paths and Hamiltonians at another inverse temperature.
    pub fn reweight(&self, beta: f64) -> Self {
        Self::from_hamiltonians(self.geom, self.paths.clone(), self.hamiltonians.clone(), beta)
            .expect("sizes already validated")
    }
}

/// Normalized weights and `ln Σ exp(l_i)`, subtracting the maximum first.
pub(crate) fn normalize_log_weights(log_weights: &[f64]) -> (Vec<f64>, f64) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = scaled.iter().sum();
    (scaled.iter().map(|a| a / sum).collect(), max + sum.ln())
}

/// Scores every path against `cloud` and forms the Gibbs weights. The cloud
/// window must contain every tube; otherwise this fails rather than silently
/// dropping interactions.
pub fn build_ensemble(paths: Vec<PolymerPath>, cloud: &PointCloud, beta: f64, geom: &BallGeometry) -> Result<GibbsEnsemble> {
    let first = paths
        .first()
        .ok_or_else(|| Error::InvalidCount("ensemble needs at least one path".into()))?;
    let grid = *first.grid();
    let bbox = cloud.bbox();
    if bbox.t_max() < grid.t() {
        return Err(Error::WindowCoverage {
            path: 0,
            step: grid.n_steps(),
        });
    }
    let r = geom.radius();
    for (i, p) in paths.iter().enumerate() {
        if p.dim() != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                got: p.dim(),
            });
        }
        if *p.grid() != grid {
            return Err(Error::InvalidCount(format!("path {i} uses a different time grid")));
        }
        for k in 0..=grid.n_steps() {
            let inside = p
                .position(k)
                .iter()
                .enumerate()
                .all(|(j, x)| x - r >= bbox.lo()[j] && x + r <= bbox.hi()[j]);
            if !inside {
                return Err(Error::WindowCoverage { path: i, step: k });
            }
        }
    }
    let index = TubeIndex::new(cloud, &grid, geom);
    let hamiltonians = paths.iter().map(|p| index.count(p)).collect();
    GibbsEnsemble::from_hamiltonians(*geom, paths, hamiltonians, beta)
}
