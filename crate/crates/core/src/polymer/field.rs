use std::collections::BTreeMap;

use crate::environment::SpaceTimeBox;
use crate::error::{Error, Result};

use super::ensemble::GibbsEnsemble;

/// Cubic bins of width `h` tiling the spatial part of a window. Bins are
/// numbered row-major with the first coordinate most significant, so index
/// order is the lexicographic order of the bin centers.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    lo: Vec<f64>,
    h: f64,
    counts: Vec<usize>,
}

impl SpatialGrid {
    pub fn covering(bbox: &SpaceTimeBox, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("bin width {h} must be positive")));
        }
        let counts = bbox
            .lo()
            .iter()
            .zip(bbox.hi())
            .map(|(l, u)| (((u - l) / h).ceil() as usize).max(1))
            .collect();
        Ok(Self {
            lo: bbox.lo().to_vec(),
            h,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n_bins(&self) -> usize {
        self.counts.iter().product()
    }

    #[inline]
    pub fn center_coord(&self, axis: usize, j: usize) -> f64 {
        self.lo[axis] + (j as f64 + 0.5) * self.h
    }

    pub fn center(&self, index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mut rem = index;
        for axis in (0..self.dim()).rev() {
            let j = rem % self.counts[axis];
            rem /= self.counts[axis];
            out[axis] = self.center_coord(axis, j);
        }
        out
    }

    /// Inclusive per-axis index ranges of the bins whose centers can lie in
    /// the closed ball of radius `r` around `x`. One extra bin on each side
    /// absorbs rounding; callers apply the exact ball test.
    fn candidate_ranges(&self, x: &[f64], r: f64) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.dim());
        for (axis, &xa) in x.iter().enumerate() {
            let a = ((xa - r - self.lo[axis]) / self.h - 0.5).ceil() - 1.0;
            let b = ((xa + r - self.lo[axis]) / self.h - 0.5).floor() + 1.0;
            let n = self.counts[axis] as f64;
            let a = a.max(0.0);
            let b = b.min(n - 1.0);
            if a > b {
                return None;
            }
            out.push((a as usize, b as usize));
        }
        Some(out)
    }
}

/// Grid estimate of `μ_t(χ_{s,x})`: for each step `k` and bin `b`,
/// `m(k,b) = Σ_i w_i·1{‖B_i(k) − c_b‖ ≤ r_d}`. Only nonzero cells are stored.
#[derive(Debug, Clone)]
pub struct OccupancyField {
    grid: SpatialGrid,
    rows: Vec<Vec<(usize, f64)>>,
    time_mass: Vec<f64>,
}

impl OccupancyField {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn n_steps(&self) -> usize {
        self.rows.len()
    }

    /// Nonzero cells of step `k` as `(bin index, m)`, sorted by bin index.
    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn value(&self, k: usize, bin: usize) -> f64 {
        let row = &self.rows[k];
        row.binary_search_by_key(&bin, |e| e.0).map(|i| row[i].1).unwrap_or(0.0)
    }

    /// `m(k) = Σ_b m(k,b)·h^d`; equals 1 for exact integration.
    pub fn time_mass(&self) -> &[f64] {
        &self.time_mass
    }

    pub fn mean_mass(&self) -> f64 {
        self.time_mass.iter().sum::<f64>() / self.n_steps() as f64
    }

    /// `(1/n) Σ_k |1 − m(k)|`.
    pub fn mass_defect(&self) -> f64 {
        self.time_mass.iter().map(|m| (1.0 - m).abs()).sum::<f64>() / self.n_steps() as f64
    }

    /// `(1/n) Σ_k Σ_b h^d f(m(k,b))` over nonzero cells; `f(0)` must be 0.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let vol = self.grid.cell_volume();
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, m)| f(m)).sum::<f64>() * vol)
            .sum::<f64>()
            / self.n_steps() as f64
    }
}

const DENSE_LIMIT: usize = 1 << 22;

enum Accumulator {
    Dense { buf: Vec<f64>, touched: Vec<usize> },
    Sparse(BTreeMap<usize, f64>),
}

impl Accumulator {
    fn new(n_bins: usize) -> Self {
        if n_bins <= DENSE_LIMIT {
            Accumulator::Dense {
                buf: vec![0.0; n_bins],
                touched: Vec::new(),
            }
        } else {
            Accumulator::Sparse(BTreeMap::new())
        }
    }

    #[inline]
    fn add(&mut self, idx: usize, w: f64) {
        match self {
            Accumulator::Dense { buf, touched } => {
                if buf[idx] == 0.0 {
                    touched.push(idx);
                }
                buf[idx] += w;
            }
            Accumulator::Sparse(map) => *map.entry(idx).or_insert(0.0) += w,
        }
    }

    fn drain(&mut self) -> Vec<(usize, f64)> {
        match self {
            Accumulator::Dense { buf, touched } => {
                touched.sort_unstable();
                touched.dedup();
                let row = touched
                    .iter()
                    .map(|&i| {
                        let v = buf[i];
                        buf[i] = 0.0;
                        (i, v)
                    })
                    .filter(|e| e.1 != 0.0)
                    .collect();
                touched.clear();
                row
            }
            Accumulator::Sparse(map) => std::mem::take(map).into_iter().filter(|e| e.1 != 0.0).collect(),
        }
    }
}

/// Builds the occupancy field on bins of width `h` covering `bbox`, using
/// exact ball tests of every weighted path against every nearby bin center.
/// Steps `k = 0..n_steps` (the left endpoints of the time cells).
pub fn occupancy_field(ensemble: &GibbsEnsemble, bbox: &SpaceTimeBox, h: f64) -> Result<OccupancyField> {
    let grid = SpatialGrid::covering(bbox, h)?;
    let d = grid.dim();
    let first = &ensemble.paths()[0];
    if first.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: first.dim(),
        });
    }
    let n_steps = first.grid().n_steps();
    let geom = ensemble.geometry();
    let r = geom.radius();
    let r2 = r * r;
    let vol = grid.cell_volume();
    let mut acc = Accumulator::new(grid.n_bins());
    let mut rows = Vec::with_capacity(n_steps);
    let mut time_mass = Vec::with_capacity(n_steps);
    let mut center = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for k in 0..n_steps {
        for (path, &w) in ensemble.paths().iter().zip(ensemble.weights()) {
            if w == 0.0 {
                continue;
            }
            let x = path.position(k);
            let Some(ranges) = grid.candidate_ranges(x, r) else {
                continue;
            };
            // odometer over the candidate box
            for (axis, rg) in ranges.iter().enumerate() {
                idx[axis] = rg.0;
            }
            'cells: loop {
                let mut lin = 0usize;
                let mut dist2 = 0.0;
                for axis in 0..d {
                    center[axis] = grid.center_coord(axis, idx[axis]);
                    let diff = x[axis] - center[axis];
                    dist2 += diff * diff;
                    lin = lin * grid.counts[axis] + idx[axis];
                }
                if dist2 <= r2 {
                    acc.add(lin, w);
                }
                let mut axis = d;
                loop {
                    if axis == 0 {
                        break 'cells;
                    }
                    axis -= 1;
                    if idx[axis] < ranges[axis].1 {
                        idx[axis] += 1;
                        break;
                    }
                    idx[axis] = ranges[axis].0;
                }
            }
        }
        let row = acc.drain();
        time_mass.push(row.iter().map(|e| e.1).sum::<f64>() * vol);
        rows.push(row);
    }
    Ok(OccupancyField { grid, rows, time_mass })
}
