//! Closed-form functions of the model and the phase-diagram bounds built on
//! them.

mod bessel;
mod critical;

pub use bessel::{bessel_gamma, bessel_j, bessel_j_series, nu_c_lower_bound, NuCBound};
pub use critical::{
    bc_bounds, bc_increment_bounds, classify_phase, sandwich_formula, Branch, CriticalBounds, CriticalPoint, PhaseLabel,
    SandwichCase,
};

use crate::error::{Error, Result};

/// `λ(β) = e^β − 1`, the annealed free energy per unit intensity.
pub fn lambda(beta: f64) -> f64 {
    beta.exp_m1()
}

/// Cramér transform of the unit Poisson law: `u ln u − u + 1`.
pub fn lambda_star(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("lambda_star needs u > 0, got {u}")));
    }
    Ok(u * u.ln() - u + 1.0)
}

/// `(e^β − 1 − β)/β²` by its Taylor series; used where direct evaluation
/// cancels catastrophically.
fn excess_over_square_series(beta: f64) -> f64 {
    let b = beta;
    0.5 + b * (1.0 / 6.0 + b * (1.0 / 24.0 + b * (1.0 / 120.0 + b * (1.0 / 720.0 + b / 5040.0))))
}

/// `α(β) = (e^β − 1)² / (e^β (e^β − 1 − β))`, continuous at 0 with `α(0) = 2`.
/// Decreases from `+∞` at `−∞` to `1` at `+∞`.
pub fn alpha(beta: f64) -> f64 {
    if beta.abs() < 1e-3 {
        // (e^β−1)/β = 1 + β/2 + β²/6 + ..., shares the series above
        let q = excess_over_square_series(beta);
        let ratio = 1.0 + beta * q;
        return ratio * ratio / (beta.exp() * q);
    }
    if beta > 1.0 {
        let e = (-beta).exp();
        let num = -(-beta).exp_m1();
        return num * num / (1.0 - (1.0 + beta) * e);
    }
    let l = beta.exp_m1();
    l * l / (beta.exp() * (l - beta))
}

/// `h_α(u) = ln(1 + u) − u + u² / (α (1 + u))`.
pub fn h_alpha(alpha: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("h_alpha needs alpha > 0, got {alpha}")));
    }
    if !(u > -1.0) {
        return Err(Error::Domain(format!("h_alpha needs u > -1, got {u}")));
    }
    Ok(u.ln_1p() - u + u * u / (alpha * (1.0 + u)))
}

/// `ψ(u) = λ (u − u²) / (1 + λ u)`.
pub fn psi(beta: f64, u: f64) -> f64 {
    let l = lambda(beta);
    l * (u - u * u) / (1.0 + l * u)
}

/// `φ(u) = e^β λ u² / (1 + λ u)`.
pub fn phi(beta: f64, u: f64) -> f64 {
    let l = lambda(beta);
    beta.exp() * l * u * u / (1.0 + l * u)
}

/// `ψ(u) = e^β u / (1 + λu) − u`.
pub fn psi_alt(beta: f64, u: f64) -> f64 {
    beta.exp() * u / (1.0 + lambda(beta) * u) - u
}

/// `φ(u) = e^β u − e^β u / (1 + λu)`.
pub fn phi_alt(beta: f64, u: f64) -> f64 {
    let e = beta.exp();
    e * u - e * u / (1.0 + lambda(beta) * u)
}

/// Whether `(β, ν)` lies in the region `ν λ(β)² < a_{L²}`, where quenched and
/// annealed free energies coincide.
pub fn l2_region(beta: f64, nu: f64, a_l2: f64) -> bool {
    let l = lambda(beta);
    nu * l * l < a_l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn lambda_values() {
        assert_eq!(lambda(0.0), 0.0);
        assert!((lambda(LN_2) - 1.0).abs() < 1e-15);
        assert!(lambda(-30.0) > -1.0 && lambda(-30.0) < -1.0 + 1e-12);
        assert!(lambda(-1e6) >= -1.0);
    }

    #[test]
    fn lambda_star_values() {
        assert_eq!(lambda_star(1.0).unwrap(), 0.0);
        assert!((lambda_star(E).unwrap() - 1.0).abs() < 1e-15);
        assert!(lambda_star(0.0).is_err());
        assert!(lambda_star(-1.0).is_err());
        let mut prev = f64::INFINITY;
        for g in [1e-1, 1e-2, 1e-3, 1e-4] {
            let ratio = lambda_star(1.0 + g).unwrap() / (g * g);
            assert!((ratio - 0.5).abs() < prev);
            prev = (ratio - 0.5).abs();
        }
        assert!(prev < 1e-4);
    }

    /// `α` from a long Taylor series of `e^β − 1 − β`, summed in order.
    fn alpha_oracle(beta: f64) -> f64 {
        let mut term = beta * beta / 2.0;
        let mut excess = 0.0;
        let mut k = 2.0;
        while term.abs() > 1e-300 && k < 200.0 {
            excess += term;
            k += 1.0;
            term *= beta / k;
        }
        let l = excess + beta;
        l * l / (beta.exp() * excess)
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(0.0), 2.0);
        let exact1 = (E - 1.0).powi(2) / (E * (E - 2.0));
        assert!((alpha(1.0) - exact1).abs() < 1e-14);
        // high-precision value of (e−1)²/(e(e−2))
        assert!((alpha(1.0) - 1.512_165_875_002_945_2).abs() < 1e-13);
        assert!((alpha(40.0) - 1.0).abs() < 1e-15);
        assert!((alpha(800.0) - 1.0).abs() < 1e-15);
        assert!(alpha(-40.0) > 1e15);
        assert_eq!(alpha(-800.0), f64::INFINITY);
    }

    #[test]
    fn alpha_series_crossover() {
        for b in [-2e-3, -1.0001e-3, -9.999e-4, -1e-5, 1e-7, 9.999e-4, 1.0001e-3, 2e-3, 0.5, -0.5] {
            let rel = (alpha(b) / alpha_oracle(b) - 1.0).abs();
            assert!(rel < 1e-12, "beta = {b}: rel {rel}");
        }
    }

    #[test]
    fn alpha_strictly_decreasing_on_grid() {
        let pts: Vec<f64> = (0..1000).map(|i| -10.0 + 20.0 * i as f64 / 999.0).collect();
        for w in pts.windows(2) {
            assert!(alpha(w[0]) > alpha(w[1]), "{} vs {}", w[0], w[1]);
        }
        for &b in &pts {
            assert!(alpha(b) > 1.0);
            if b > 0.0 {
                assert!(alpha(-b) > 2.0 && 2.0 > alpha(b));
            }
        }
    }

    #[test]
    fn h_alpha_values() {
        assert_eq!(h_alpha(3.0, 0.0).unwrap(), 0.0);
        let v = h_alpha(2.0, 1.0).unwrap();
        assert!((v - (LN_2 - 0.75)).abs() < 1e-15);
        assert!((v + 0.056_852_819_440_054_69).abs() < 1e-15);
        assert!(h_alpha(0.0, 0.5).is_err());
        assert!(h_alpha(1.0, -1.0).is_err());
    }

    #[test]
    fn psi_phi_values_and_forms() {
        for beta in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            assert_eq!(psi(beta, 0.0), 0.0);
            assert!(psi(beta, 1.0).abs() < 1e-15);
            assert_eq!(phi(beta, 0.0), 0.0);
            for i in 0..=100 {
                let u = i as f64 / 100.0;
                assert!((psi(beta, u) - psi_alt(beta, u)).abs() <= 1e-12);
                assert!((phi(beta, u) - phi_alt(beta, u)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn psi_phi_bounds() {
        for beta in [-3.0, -1.0, -0.1, 0.1, 1.0, 3.0] {
            let l = lambda(beta);
            for i in 0..=200 {
                let u = i as f64 / 200.0;
                let base = l * (u - u * u);
                let p = psi(beta, u);
                let tol = 1e-14;
                let scaled = (-beta).exp() * base;
                assert!(scaled.min(base) <= p + tol && p <= scaled.max(base) + tol);
                assert!(phi(beta, u) <= beta.exp() * l * u * u + tol);
            }
        }
    }

    #[test]
    fn l2_region_rules() {
        assert!(l2_region(0.0, 1e9, 1e-9));
        // ν λ² = a exactly is outside (strict)
        assert!(!l2_region(LN_2, 2.0, 2.0));
        // endpoints ln(1 ± x) have λ² = x²
        for x in [0.1f64, 0.5, 0.9] {
            for b in [(1.0 + x).ln(), (1.0 - x).ln()] {
                assert!((lambda(b).powi(2) - x * x).abs() < 1e-14);
            }
        }
    }
}
