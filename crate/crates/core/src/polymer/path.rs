use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::BallGeometry;

/// Uniform grid `k·dt`, `k = 0..=n_steps`, on `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t: f64, n_steps: usize) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidTime { t, t_max: f64::INFINITY });
        }
        if n_steps == 0 {
            return Err(Error::InvalidCount("n_steps must be positive".into()));
        }
        Ok(Self { t, n_steps })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t / self.n_steps as f64
    }
}

/// A discretized trajectory: `n_steps + 1` positions in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymerPath {
    grid: TimeGrid,
    dim: usize,
    positions: Vec<f64>,
}

impl PolymerPath {
    /// The path that stays at the origin.
    pub fn zero(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            dim,
            positions: vec![0.0; (grid.n_steps + 1) * dim],
        }
    }

    /// Explicit positions, flattened step-major. Sampled paths start at the
    /// origin; hand-built test paths need not.
    pub fn from_positions(grid: TimeGrid, dim: usize, positions: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let want = (grid.n_steps + 1) * dim;
        if positions.len() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                got: positions.len(),
            });
        }
        Ok(Self { grid, dim, positions })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// `1{‖B_k − x‖₂ ≤ r_d}` at grid step `k`.
    pub fn chi(&self, geom: &BallGeometry, k: usize, x: &[f64]) -> Result<bool> {
        if k > self.grid.n_steps {
            return Err(Error::InvalidIndex {
                index: k,
                n_steps: self.grid.n_steps,
            });
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(geom.contains(self.position(k), x))
    }
}

/// `m` independent Gaussian random walks from the origin with step
/// covariance `dt·I`. Draws are consumed path by path, step by step,
/// coordinate by coordinate.
pub fn sample_paths<R: Rng + ?Sized>(grid: &TimeGrid, dim: usize, m: usize, rng: &mut R) -> Result<Vec<PolymerPath>> {
    if m == 0 {
        return Err(Error::InvalidCount("need at least one path".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let sd = grid.dt().sqrt();
    let n = grid.n_steps;
    Ok((0..m)
        .map(|_| {
            let mut pos = vec![0.0; (n + 1) * dim];
            for k in 1..=n {
                for j in 0..dim {
                    let z: f64 = rng.sample(StandardNormal);
                    pos[k * dim + j] = pos[(k - 1) * dim + j] + sd * z;
                }
            }
            PolymerPath {
                grid: *grid,
                dim,
                positions: pos,
            }
        })
        .collect())
}
