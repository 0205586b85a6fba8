//! Bounds on the critical curves `β_c^±(ν)` and the phase test they induce,
//! both anchored at a known critical point `(β₀, ν₀)`.

use serde::Serialize;

use super::{alpha, lambda};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

/// A point `(β₀, ν₀)` on the critical curve, on the branch matching the sign
/// of `β₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    beta0: f64,
    nu0: f64,
    branch: Branch,
}

impl CriticalPoint {
    pub fn new(beta0: f64, nu0: f64, branch: Branch) -> Result<Self> {
        if !(nu0 > 0.0 && nu0.is_finite()) {
            return Err(Error::Domain(format!("nu0 must be positive, got {nu0}")));
        }
        let ok = match branch {
            Branch::Plus => beta0 > 0.0 && beta0.is_finite(),
            Branch::Minus => beta0 < 0.0 && beta0.is_finite(),
        };
        if !ok {
            return Err(Error::Domain(format!("beta0 = {beta0} does not lie on the {branch:?} branch")));
        }
        Ok(Self { beta0, nu0, branch })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `c₁ = |λ(β₀)|`.
    pub fn c1(&self) -> f64 {
        lambda(self.beta0).abs()
    }

    /// `c₂ = |e^{−β₀} − 1|`.
    pub fn c2(&self) -> f64 {
        (-self.beta0).exp_m1().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseLabel {
    /// quenched = annealed
    D,
    /// quenched < annealed
    L,
    Unknown,
}

/// Which sandwich applies: plus/minus branch, intensity above/below `ν₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SandwichCase {
    /// `ν = ν₀`: both bounds collapse to `β₀`
    AtReference,
    /// plus branch, `ν > ν₀`
    A1,
    /// plus branch, `ν < ν₀`
    A2,
    /// minus branch, `ν > ν₀`
    B1,
    /// minus branch, `ν₀ c₂² < ν < ν₀`
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalBounds {
    pub case: SandwichCase,
    pub lower: f64,
    pub upper: f64,
}

/// The sandwich formulas without hypothesis checks:
/// plus `ln(1 + c₁ q^e)`, minus `ln(1 − c₁ q^e)` with `q = ν₀/ν` and the
/// exponents `1/α` and `1/2` placed per case.
pub fn sandwich_formula(case: SandwichCase, nu: f64, crit: &CriticalPoint, alpha: f64) -> (f64, f64) {
    let q = crit.nu0 / nu;
    let c1 = crit.c1();
    let plus = |e: f64| (c1 * q.powf(e)).ln_1p();
    let minus = |e: f64| (-c1 * q.powf(e)).ln_1p();
    let ia = 1.0 / alpha;
    match case {
        SandwichCase::AtReference => (crit.beta0, crit.beta0),
        SandwichCase::A1 => (plus(ia), plus(0.5)),
        SandwichCase::A2 => (plus(0.5), plus(ia)),
        SandwichCase::B1 => (minus(ia), minus(0.5)),
        SandwichCase::B2 => (minus(0.5), minus(ia)),
    }
}

/// Lower and upper bounds on `β_c^±(ν)` from the critical point `crit`,
/// selecting the case from the branch and the position of `ν` relative to
/// `ν₀`, and rejecting any `α` outside the admissible range.
///
/// The admissible range in the cases below `ν₀` refers to the unknown
/// `β_c^±(ν₁)`; it is checked through a bound on that value which is itself
/// free of `α`: `β_c^+(ν) ≤ ln(1 + c₁ ν₀/ν)` on the plus side and
/// `β_c^-(ν₀c₂²) ≥ ln(1 − e^{β₀})` on the minus side.
pub fn bc_bounds(nu: f64, crit: &CriticalPoint, alpha_exp: f64) -> Result<CriticalBounds> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    if !(alpha_exp >= 1.0) {
        return Err(Error::Hypothesis(format!("alpha = {alpha_exp} must be at least 1")));
    }
    let (b0, nu0) = (crit.beta0, crit.nu0);
    let case = if nu == nu0 {
        SandwichCase::AtReference
    } else {
        match (crit.branch, nu > nu0) {
            (Branch::Plus, true) => {
                let cap = alpha(b0);
                if alpha_exp > cap {
                    return Err(Error::Hypothesis(format!(
                        "case a1 needs 1 <= alpha <= alpha(beta0) = {cap}, got {alpha_exp}"
                    )));
                }
                SandwichCase::A1
            }
            (Branch::Plus, false) => {
                let beta_cap = (crit.c1() * nu0 / nu).ln_1p();
                let cap = alpha(beta_cap);
                if alpha_exp > cap {
                    return Err(Error::Hypothesis(format!(
                        "case a2 needs alpha <= alpha(beta_c^+(nu)); with beta_c^+(nu) <= {beta_cap} this means alpha <= {cap}, got {alpha_exp}"
                    )));
                }
                SandwichCase::A2
            }
            (Branch::Minus, true) => {
                let floor = alpha(b0);
                if alpha_exp < floor {
                    return Err(Error::Hypothesis(format!(
                        "case b1 needs alpha >= alpha(beta0) = {floor}, got {alpha_exp}"
                    )));
                }
                SandwichCase::B1
            }
            (Branch::Minus, false) => {
                let nu1 = nu0 * crit.c2() * crit.c2();
                if nu <= nu1 {
                    return Err(Error::Hypothesis(format!(
                        "case b2 needs nu > nu0 * c2^2 = {nu1}, got {nu}"
                    )));
                }
                let beta_floor = (-b0.exp()).ln_1p();
                let floor = alpha(beta_floor);
                if alpha_exp < floor {
                    return Err(Error::Hypothesis(format!(
                        "case b2 needs alpha >= alpha(beta_c^-(nu1)); with beta_c^-(nu1) >= {beta_floor} this means alpha >= {floor}, got {alpha_exp}"
                    )));
                }
                SandwichCase::B2
            }
        }
    };
    let (lower, upper) = sandwich_formula(case, nu, crit, alpha_exp);
    Ok(CriticalBounds { case, lower, upper })
}

/// Bounds on the increment `β_c^±(ν) − β₀` in terms of `c₂`, as an interval
/// `(lower, upper)` for `β_c^±(ν)`. These follow from the logarithmic
/// sandwich by convexity of `ln(1 + x)`.
pub fn bc_increment_bounds(nu: f64, crit: &CriticalPoint, alpha_exp: f64) -> Result<(f64, f64)> {
    let case = bc_bounds(nu, crit, alpha_exp)?.case;
    let (b0, nu0, c1, c2) = (crit.beta0, crit.nu0, crit.c1(), crit.c2());
    let ia = 1.0 / alpha_exp;
    Ok(match case {
        SandwichCase::AtReference => (b0, b0),
        // c₂(1 − (ν₀/ν)^{1/2}) ≤ β₀ − β_c(ν) ≤ c₂((ν/ν₀)^{1/α} − 1)
        SandwichCase::A1 => (
            b0 - c2 * ((nu / nu0).powf(ia) - 1.0),
            b0 - c2 * (1.0 - (nu0 / nu).sqrt()),
        ),
        // c₂(1 − (ν/ν₀)^{1/2}) ≤ β_c(ν) − β₀ ≤ c₂((ν₀/ν)^{1/α} − 1)
        SandwichCase::A2 => (
            b0 + c2 * (1.0 - (nu / nu0).sqrt()),
            b0 + c2 * ((nu0 / nu).powf(ia) - 1.0),
        ),
        // c₁(1 − q^{1/α})/(1 − c₁q^{1/α}) ≤ β_c(ν) − β₀ ≤ c₂((ν/ν₀)^{1/2} − 1), q = ν₀/ν;
        // the lower end is what convexity gives, and is weaker than c₂(1 − q^{1/α})
        SandwichCase::B1 => {
            let qe = (nu0 / nu).powf(ia);
            (
                b0 + c1 * (1.0 - qe) / (1.0 - c1 * qe),
                b0 + c2 * ((nu / nu0).sqrt() - 1.0),
            )
        }
        // c₂(q^{1/α} − 1) ≤ β₀ − β_c(ν) ≤ c₁(q^{1/2} − 1)/(1 − c₁q^{1/2}), q = ν₀/ν
        SandwichCase::B2 => {
            let qh = (nu0 / nu).sqrt();
            (
                b0 - c1 * (qh - 1.0) / (1.0 - c1 * qh),
                b0 - c2 * ((nu0 / nu).powf(ia) - 1.0),
            )
        }
    })
}

/// Phase of `(β, ν)` as far as the curves through `crit` decide it:
/// `L` or `D` when one of the comparison conditions fires, `Unknown`
/// otherwise. `β = 0` is always in `D`.
pub fn classify_phase(beta: f64, nu: f64, crit: &CriticalPoint, alpha_exp: f64) -> Result<PhaseLabel> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    if beta == 0.0 {
        return Ok(PhaseLabel::D);
    }
    let (b0, nu0) = (crit.beta0, crit.nu0);
    let (l, l0) = (lambda(beta).abs(), lambda(b0).abs());
    let sq = nu * l * l;
    let sq0 = nu0 * l0 * l0;
    let pw = nu * l.powf(alpha_exp);
    let pw0 = nu0 * l0.powf(alpha_exp);
    let (is_l, is_d) = match crit.branch {
        Branch::Plus => {
            if beta < 0.0 {
                return Err(Error::InvalidQuery(format!("beta = {beta} is not on the plus branch")));
            }
            let cap = alpha(beta.max(b0));
            if !(alpha_exp > 0.0 && alpha_exp <= cap) {
                return Err(Error::Hypothesis(format!(
                    "plus branch needs 0 < alpha <= alpha(max(beta, beta0)) = {cap}, got {alpha_exp}"
                )));
            }
            let is_l = (nu > nu0 && sq > sq0) || (beta > b0 && pw > pw0);
            let is_d = (beta <= b0 && pw <= pw0) || (nu <= nu0 && sq <= sq0);
            (is_l, is_d)
        }
        Branch::Minus => {
            if beta > 0.0 {
                return Err(Error::InvalidQuery(format!("beta = {beta} is not on the minus branch")));
            }
            let floor = alpha(beta.min(b0));
            if !(alpha_exp >= floor) {
                return Err(Error::Hypothesis(format!(
                    "minus branch needs alpha >= alpha(min(beta, beta0)) = {floor}, got {alpha_exp}"
                )));
            }
            let is_l = (nu > nu0 && pw > pw0) || (beta < b0 && sq > sq0);
            let is_d = (beta >= b0 && sq <= sq0) || (beta < b0 && pw <= pw0);
            (is_l, is_d)
        }
    };
    assert!(
        !(is_l && is_d),
        "phase conditions overlap at beta = {beta}, nu = {nu}, alpha = {alpha_exp}"
    );
    Ok(if is_l {
        PhaseLabel::L
    } else if is_d {
        PhaseLabel::D
    } else {
        PhaseLabel::Unknown
    })
}
