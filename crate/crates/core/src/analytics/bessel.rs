//! Bessel functions of the first kind of real order and the smallest
//! positive zero of `J_{(d−4)/2}`, which controls a lower bound on the
//! critical intensity.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::unit_ball_radius;

/// `1/Γ(z)`, zero at the poles.
fn recip_gamma(z: f64) -> f64 {
    if z <= 0.0 && z == z.floor() {
        0.0
    } else {
        1.0 / gamma(z)
    }
}

/// Ascending series `(x/2)^ν Σ_k (−x²/4)^k / (k! Γ(ν + k + 1))`.
/// Accurate for moderate `x`; loses digits to cancellation once `x` is large.
pub fn bessel_j_series(order: f64, x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut sum = 0.0;
    let mut pow = 1.0; // q^k / k!
    for k in 0..400 {
        let kf = k as f64;
        if k > 0 {
            pow *= q / kf;
        }
        let term = pow * recip_gamma(order + kf + 1.0);
        sum += term;
        if k > 10 && term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (x / 2.0).powf(order) * sum
}

/// `J_ν(x)` for `x > 0` and `ν ≥ 0` of any real value, or `ν < 0` an
/// integer or half-integer.
///
/// Nonnegative orders use backward recurrence from far above `max(ν, x)`,
/// normalized with Neumann's expansion
/// `(x/2)^{ν₀} = Σ_j (ν₀ + 2j) Γ(ν₀ + j)/j! · J_{ν₀+2j}(x)`, `ν₀ = ν − ⌊ν⌋`.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("bessel_j needs finite x >= 0, got {x}")));
    }
    if order < 0.0 {
        let twice = 2.0 * order;
        if order == order.floor() {
            let n = -order;
            let sign = if (n as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
            return Ok(sign * bessel_j(n, x)?);
        }
        if twice == twice.floor() {
            if x == 0.0 {
                return Err(Error::Domain("negative half-integer order is singular at 0".into()));
            }
            // J_{−m−1/2}(x) = (−1)^{m+1} sqrt(2x/π) y_m(x)
            let m = (-order - 0.5).round() as usize;
            let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
            return Ok(sign * (2.0 * x / PI).sqrt() * spherical_y(m, x));
        }
        return Err(Error::Domain(format!(
            "negative order {order} is supported only for integers and half-integers"
        )));
    }
    if x == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(miller(order, x))
}

/// Spherical Bessel function of the second kind by upward recurrence.
fn spherical_y(m: usize, x: f64) -> f64 {
    let y0 = -x.cos() / x;
    if m == 0 {
        return y0;
    }
    let mut prev = y0;
    let mut cur = -x.cos() / (x * x) - x.sin() / x;
    for k in 1..m {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn miller(order: f64, x: f64) -> f64 {
    let n = order.floor() as usize;
    let nu0 = order - n as f64;
    let top = (n as f64).max(x);
    let mut start = top as usize + 40 + (12.0 * top.sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    // Γ(ν₀ + j)/j! for the even-index weights, built upwards first
    let half = start / 2;
    let mut coef = vec![0.0; half + 1];
    coef[0] = gamma(nu0 + 1.0);
    let mut g = gamma(nu0 + 1.0); // Γ(ν₀ + 1)/1!
    #[allow(clippy::needless_range_loop)]
    for j in 1..=half {
        if j > 1 {
            g *= (nu0 + j as f64 - 1.0) / j as f64;
        }
        coef[j] = (nu0 + 2.0 * j as f64) * g;
    }

    let mut f_next = 0.0;
    let mut f = 1e-30;
    let mut sum = 0.0;
    let mut at_order = 0.0;
    let mut k = start;
    loop {
        if k == n {
            at_order = f;
        }
        if k.is_multiple_of(2) {
            sum += coef[k / 2] * f;
        }
        if k == 0 {
            break;
        }
        let f_prev = 2.0 * (nu0 + k as f64) / x * f - f_next;
        f_next = f;
        f = f_prev;
        k -= 1;
        if f.abs() > 1e200 {
            f *= 1e-200;
            f_next *= 1e-200;
            sum *= 1e-200;
            at_order *= 1e-200;
        }
    }
    at_order * (x / 2.0).powf(nu0) / sum
}

/// Smallest positive zero of `J_{(d−4)/2}`.
///
/// A sign scan with step 0.01 isolates the zero below an asymptotic estimate
/// plus 2; bisection then refines it to width `1e-12`.
pub fn bessel_gamma(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let order = (d as f64 - 4.0) / 2.0;
    let estimate = if order >= 1.0 {
        order + 1.855_757_1 * order.cbrt() + 1.033_150 / order.cbrt()
    } else {
        4.0
    };
    let limit = estimate + 2.0;
    let f = |x: f64| bessel_j(order, x);
    let step = 0.01;
    let mut a = step;
    let mut fa = f(a)?;
    while a < limit {
        let b = a + step;
        let fb = f(b)?;
        if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
            return bisect(&f, a, b, fa);
        }
        if fb != 0.0 {
            fa = fb;
        }
        a = b;
    }
    Err(Error::Numeric(format!(
        "no sign change of J_{order} below {limit}"
    )))
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bessel-zero lower bound on the critical intensity in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuCBound {
    pub d: usize,
    pub gamma: f64,
    pub r_d: f64,
    /// `γ_d / (2 r_d)`
    pub ratio: f64,
    /// `(γ_d / (2 r_d))²`
    pub ratio_squared: f64,
}

impl NuCBound {
    /// The bound `ν_c ≥ (γ_d/(2r_d))²`.
    pub fn value(&self) -> f64 {
        self.ratio_squared
    }
}

pub fn nu_c_lower_bound(d: usize) -> Result<NuCBound> {
    let gamma = bessel_gamma(d)?;
    let r_d = unit_ball_radius(d)?;
    let ratio = gamma / (2.0 * r_d);
    Ok(NuCBound {
        d,
        gamma,
        r_d,
        ratio,
        ratio_squared: ratio * ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn miller_matches_series_for_moderate_arguments() {
        for order in [0.0, 0.5, 1.0, 1.5, 2.0, 3.25, 7.0, 12.5] {
            for x in [0.05, 0.7, 2.0, 5.0] {
                let a = bessel_j(order, x).unwrap();
                let b = bessel_j_series(order, x);
                assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()) + 1e-15, "J_{order}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn negative_orders_match_series() {
        for order in [-0.5, -1.0, -1.5, -2.0, -2.5] {
            for x in [0.3, 1.0, 4.0] {
                let a = bessel_j(order, x).unwrap();
                let b = bessel_j_series(order, x);
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "J_{order}({x}): {a} vs {b}");
            }
        }
        assert!(bessel_j(-0.3, 1.0).is_err());
    }

    #[test]
    fn closed_forms_at_large_argument() {
        for x in [10.0, 37.5, 120.0] {
            let half = (2.0 / (PI * x)).sqrt() * x.sin();
            let mhalf = (2.0 / (PI * x)).sqrt() * x.cos();
            assert!((bessel_j(0.5, x).unwrap() - half).abs() < 1e-13);
            assert!((bessel_j(-0.5, x).unwrap() - mhalf).abs() < 1e-13);
        }
        assert!((bessel_j(0.0, 9.0).unwrap() + 0.090_333_611_182_876_6).abs() < 1e-14);
        // J₀(100) and J₁(50) from published tables
        assert!((bessel_j(0.0, 100.0).unwrap() - 0.019_985_850_304_223_12).abs() < 1e-13);
        assert!((bessel_j(1.0, 50.0).unwrap() + 0.097_511_828_125_175_14).abs() < 1e-13);
    }

    #[test]
    fn known_first_zeros() {
        assert!((bessel_gamma(3).unwrap() - FRAC_PI_2).abs() < 1e-11);
        assert!((bessel_gamma(4).unwrap() - 2.404_825_557_695_773).abs() < 1e-11);
        assert!((bessel_gamma(5).unwrap() - PI).abs() < 1e-11);
        // J_{−1} = −J₁ and J_{−3/2}
        assert!((bessel_gamma(2).unwrap() - 3.831_705_970_207_512).abs() < 1e-11);
        assert!((bessel_gamma(1).unwrap() - 2.798_386_045_783_887).abs() < 1e-11);
        assert!((bessel_gamma(200).unwrap() - 106.779_856_141_838).abs() < 1e-9);
        assert!(bessel_gamma(0).is_err());
    }

    #[test]
    fn zero_is_first_sign_change() {
        for d in [6usize, 9, 30] {
            let g = bessel_gamma(d).unwrap();
            let order = (d as f64 - 4.0) / 2.0;
            assert!(bessel_j(order, g).unwrap().abs() < 1e-10);
            let mut x = 0.05;
            while x < g - 0.05 {
                assert!(bessel_j(order, x).unwrap() >= 0.0);
                x += 0.05;
            }
        }
    }

    #[test]
    fn ratio_table() {
        let b3 = nu_c_lower_bound(3).unwrap();
        assert!((b3.ratio - 1.266_055_520_096).abs() < 1e-9);
        assert!((b3.value() - b3.ratio * b3.ratio).abs() < 1e-15);
        assert!((nu_c_lower_bound(4).unwrap().ratio - 1.792_136).abs() < 1e-5);
        assert!((nu_c_lower_bound(5).unwrap().ratio - 2.189_675).abs() < 1e-5);
    }
}
