//! The Poisson medium: sampling inside a finite space-time window, time
//! restriction, superposition, Palm-point insertion, and counting the points
//! collected by a path's tube.

use std::cmp::Ordering;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{dist2, BallGeometry};
use crate::numfmt::sig17;
use crate::polymer::PolymerPath;

/// The window `(0, t_max] × [lo, hi]` the medium is simulated in.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBox {
    t_max: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SpaceTimeBox {
    pub fn new(t_max: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidBox(format!("t_max = {t_max} must be positive")));
        }
        if lo.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(hi[i] > lo[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::InvalidBox(format!(
                "coordinate {i}: need lo < hi, got [{}, {}]",
                lo[i], hi[i]
            )));
        }
        Ok(Self { t_max, lo, hi })
    }

    /// Smallest box holding every path position inflated by `r_d + margin`
    /// in each coordinate, over the time horizon of the paths.
    pub fn covering(paths: &[PolymerPath], radius: f64, margin: f64) -> Result<Self> {
        let first = paths
            .first()
            .ok_or_else(|| Error::InvalidCount("no paths to cover".into()))?;
        let d = first.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in paths {
            for k in 0..=p.grid().n_steps() {
                for (j, &x) in p.position(k).iter().enumerate() {
                    lo[j] = lo[j].min(x);
                    hi[j] = hi[j].max(x);
                }
            }
        }
        let pad = radius + margin;
        Self::new(
            first.grid().t(),
            lo.iter().map(|x| x - pad).collect(),
            hi.iter().map(|x| x + pad).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn spatial_volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn volume(&self) -> f64 {
        self.t_max * self.spatial_volume()
    }

    pub fn contains(&self, s: f64, x: &[f64]) -> bool {
        s > 0.0
            && s <= self.t_max
            && x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// A realization of the medium: finitely many space-time points, stored in
/// canonical order (time ascending, ties by lexicographic position).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    bbox: SpaceTimeBox,
    nu: f64,
    times: Vec<f64>,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn empty(bbox: SpaceTimeBox, nu: f64) -> Self {
        Self {
            bbox,
            nu,
            times: Vec::new(),
            coords: Vec::new(),
        }
    }

    /// Builds a cloud from explicit points, restoring canonical order.
    pub fn from_points(bbox: SpaceTimeBox, nu: f64, points: &[(f64, Vec<f64>)]) -> Result<Self> {
        let mut cloud = Self::empty(bbox, nu);
        for (s, x) in points {
            cloud.push_checked(*s, x)?;
        }
        cloud.canonicalize();
        Ok(cloud)
    }

    fn push_checked(&mut self, s: f64, x: &[f64]) -> Result<()> {
        if !self.bbox.contains(s, x) {
            return Err(Error::InvalidPoint { s, x: x.to_vec() });
        }
        self.times.push(s);
        self.coords.extend_from_slice(x);
        Ok(())
    }

    fn canonicalize(&mut self) {
        let d = self.dim();
        let mut order: Vec<usize> = (0..self.times.len()).collect();
        order.sort_by(|&a, &b| {
            self.times[a].total_cmp(&self.times[b]).then_with(|| {
                let xa = &self.coords[a * d..(a + 1) * d];
                let xb = &self.coords[b * d..(b + 1) * d];
                xa.iter()
                    .zip(xb)
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
        });
        let times = order.iter().map(|&i| self.times[i]).collect();
        let coords = order
            .iter()
            .flat_map(|&i| self.coords[i * d..(i + 1) * d].iter().copied())
            .collect();
        self.times = times;
        self.coords = coords;
    }

    pub fn bbox(&self) -> &SpaceTimeBox {
        &self.bbox
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> (f64, &[f64]) {
        let d = self.dim();
        (self.times[i], &self.coords[i * d..(i + 1) * d])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.coords.chunks_exact(self.dim()))
    }

    /// Writes the `s,x_1,...,x_d` CSV dump.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("s".to_string())
            .chain((1..=self.dim()).map(|j| format!("x_{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (s, x) in self.iter() {
            let row: Vec<String> = std::iter::once(sig17(s)).chain(x.iter().map(|v| sig17(*v))).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Samples the medium of intensity `nu` inside `bbox`: a Poisson(ν·|box|)
/// number of independent uniform points.
pub fn sample_poisson<R: Rng + ?Sized>(bbox: &SpaceTimeBox, nu: f64, rng: &mut R) -> Result<PointCloud> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidIntensity(nu));
    }
    let mut cloud = PointCloud::empty(bbox.clone(), nu);
    let mean = nu * bbox.volume();
    if mean == 0.0 {
        return Ok(cloud);
    }
    let n = Poisson::new(mean)
        .map_err(|e| Error::Numeric(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let d = bbox.dim();
    cloud.times.reserve(n);
    cloud.coords.reserve(n * d);
    for _ in 0..n {
        // (0, t_max]
        let u: f64 = rng.random();
        cloud.times.push(bbox.t_max * (1.0 - u));
        for j in 0..d {
            let v: f64 = rng.random();
            cloud.coords.push(bbox.lo[j] + v * (bbox.hi[j] - bbox.lo[j]));
        }
    }
    cloud.canonicalize();
    Ok(cloud)
}

/// Keeps the points with time `s ≤ t`. The window itself is unchanged.
pub fn restrict(cloud: &PointCloud, t: f64) -> Result<PointCloud> {
    if !(t > 0.0 && t <= cloud.bbox.t_max) {
        return Err(Error::InvalidTime {
            t,
            t_max: cloud.bbox.t_max,
        });
    }
    // canonical order is time-ascending
    let keep = cloud.times.partition_point(|&s| s <= t);
    Ok(PointCloud {
        bbox: cloud.bbox.clone(),
        nu: cloud.nu,
        times: cloud.times[..keep].to_vec(),
        coords: cloud.coords[..keep * cloud.dim()].to_vec(),
    })
}

/// The cloud with one more point at `(s, x)`; duplicates add multiplicity.
pub fn add_palm_point(cloud: &PointCloud, s: f64, x: &[f64]) -> Result<PointCloud> {
    let mut out = cloud.clone();
    out.push_checked(s, x)?;
    out.canonicalize();
    Ok(out)
}

/// Multiset union of two clouds on the same window; intensities add.
pub fn superpose(a: &PointCloud, b: &PointCloud) -> Result<PointCloud> {
    if a.bbox != b.bbox {
        return Err(Error::IncompatibleBox);
    }
    let mut out = a.clone();
    out.nu = a.nu + b.nu;
    out.times.extend_from_slice(&b.times);
    out.coords.extend_from_slice(&b.coords);
    out.canonicalize();
    Ok(out)
}

/// Grid step a point at time `s` is attributed to: the path is constant on
/// `[k·dt, (k+1)·dt)`, and `s = t` falls in the last step.
#[inline]
pub(crate) fn step_of(s: f64, dt: f64, n_steps: usize) -> usize {
    ((s / dt).floor() as usize).min(n_steps - 1)
}

/// Number of cloud points `(s, x)` with `s ≤ t` inside the tube of `path`.
pub fn count_in_tube(cloud: &PointCloud, path: &PolymerPath, geom: &BallGeometry) -> u64 {
    assert_eq!(cloud.dim(), path.dim(), "cloud and path dimensions differ");
    let grid = path.grid();
    let (t, dt, n) = (grid.t(), grid.dt(), grid.n_steps());
    let r2 = geom.radius() * geom.radius();
    cloud
        .iter()
        .take_while(|(s, _)| *s <= t)
        .filter(|(s, x)| dist2(path.position(step_of(*s, dt, n)), x) <= r2)
        .count() as u64
}

/// Points bucketed by grid step and sorted on the first coordinate, so a
/// batch of paths can be scored without scanning the whole cloud per path.
#[derive(Debug, Clone)]
pub struct TubeIndex {
    dim: usize,
    radius: f64,
    /// bucket k spans `offsets[k]..offsets[k+1]`
    offsets: Vec<usize>,
    coords: Vec<f64>,
}

impl TubeIndex {
    pub fn new(cloud: &PointCloud, grid: &crate::polymer::TimeGrid, geom: &BallGeometry) -> Self {
        let d = cloud.dim();
        let (t, dt, n) = (grid.t(), grid.dt(), grid.n_steps());
        let mut buckets: Vec<Vec<&[f64]>> = vec![Vec::new(); n];
        for (s, x) in cloud.iter().take_while(|(s, _)| *s <= t) {
            buckets[step_of(s, dt, n)].push(x);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut coords = Vec::with_capacity(cloud.len() * d);
        offsets.push(0);
        for mut b in buckets {
            b.sort_by(|u, v| u[0].total_cmp(&v[0]));
            for x in b {
                coords.extend_from_slice(x);
            }
            offsets.push(coords.len() / d);
        }
        Self {
            dim: d,
            radius: geom.radius(),
            offsets,
            coords,
        }
    }

    pub fn count(&self, path: &PolymerPath) -> u64 {
        assert_eq!(self.dim, path.dim(), "index and path dimensions differ");
        let d = self.dim;
        let r = self.radius;
        let r2 = r * r;
        let mut total = 0u64;
        for k in 0..self.offsets.len() - 1 {
            let (a, b) = (self.offsets[k], self.offsets[k + 1]);
            if a == b {
                continue;
            }
            let p = path.position(k);
            let bucket = &self.coords[a * d..b * d];
            let first = |i: usize| bucket[i * d];
            let len = b - a;
            let start = partition(len, |i| first(i) < p[0] - r);
            let mut i = start;
            while i < len && first(i) <= p[0] + r {
                if dist2(p, &bucket[i * d..(i + 1) * d]) <= r2 {
                    total += 1;
                }
                i += 1;
            }
        }
        total
    }
}

fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
