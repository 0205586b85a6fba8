//! Euclidean primitives that depend on the spatial dimension: the ball of unit
//! volume, the volume shared by two such balls, and the closed-ball indicator.

use std::f64::consts::PI;

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Dimension together with the radius of its unit-volume ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGeometry {
    d: usize,
    r_d: f64,
}

impl BallGeometry {
    pub fn new(d: usize) -> Result<Self> {
        Ok(Self {
            d,
            r_d: unit_ball_radius(d)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.r_d
    }

    /// Intersection volume of two unit-volume balls with centers `rho` apart.
    pub fn overlap(&self, rho: f64) -> f64 {
        overlap_with_radius(self.d, self.r_d, rho)
    }

    /// Closed-ball membership: `‖a − b‖₂ ≤ r_d`.
    #[inline]
    pub fn contains(&self, a: &[f64], b: &[f64]) -> bool {
        dist2(a, b) <= self.r_d * self.r_d
    }
}

/// Radius of the Euclidean ball of volume one in `d` dimensions.
pub fn unit_ball_radius(d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::InvalidDimension(0)),
        1 => Ok(0.5),
        _ => {
            // π^{d/2} r^d / Γ(d/2 + 1) = 1
            let df = d as f64;
            Ok((ln_gamma(df / 2.0 + 1.0) / df).exp() / PI.sqrt())
        }
    }
}

/// Volume of the ball of radius `r` in `d` dimensions.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    let df = d as f64;
    (df / 2.0 * PI.ln() + df * r.ln() - ln_gamma(df / 2.0 + 1.0)).exp()
}

/// Lebesgue volume of `U(a) ∩ U(b)` for unit-volume balls whose centers are
/// `rho` apart. Returns 1 at `rho = 0` and 0 once `rho ≥ 2 r_d`.
pub fn ball_overlap_volume(d: usize, rho: f64) -> Result<f64> {
    let r = unit_ball_radius(d)?;
    Ok(overlap_with_radius(d, r, rho))
}

fn overlap_with_radius(d: usize, r: f64, rho: f64) -> f64 {
    let rho = rho.abs();
    if rho >= 2.0 * r {
        return 0.0;
    }
    if d == 1 {
        return (1.0 - rho).max(0.0);
    }
    if rho == 0.0 {
        return 1.0;
    }
    // Two caps of height r − rho/2; each cap is ½·I_{1−(rho/2r)²}((d+1)/2, ½)
    // of the unit-volume ball.
    let a = rho / (2.0 * r);
    let x = 1.0 - a * a;
    beta_reg((d as f64 + 1.0) / 2.0, 0.5, x).clamp(0.0, 1.0)
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
