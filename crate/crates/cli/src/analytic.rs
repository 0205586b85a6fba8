//! `polymer analytic …`: closed forms evaluated at points or on grids,
//! printed as CSV.

use clap::{Subcommand, ValueEnum};

use poisson_polymer::analytics::{
    alpha, bc_bounds, bc_increment_bounds, classify_phase, h_alpha, l2_region, lambda, nu_c_lower_bound, phi, psi,
    Branch, CriticalPoint, PhaseLabel, SandwichCase,
};
use poisson_polymer::numfmt::sig17;

use crate::error::{CliError, CliResult};

/// One list element: a number, or `start:stop:count` for `count` evenly
/// spaced points including both ends.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("not a number: `{p}`"));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad count in `{s}`"))?;
            match n {
                0 => Err(format!("empty grid `{s}`")),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(format!("expected a number or start:stop:count, got `{s}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Analytic {
    /// λ(β) = e^β − 1
    Lambda {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        beta: Vec<Vec<f64>>,
    },
    /// α(β), with α(0) = 2
    Alpha {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        beta: Vec<Vec<f64>>,
    },
    /// h_α(u) = ln(1+u) − u + u²/(α(1+u))
    HAlpha {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        alpha: Vec<Vec<f64>>,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        u: Vec<Vec<f64>>,
    },
    /// ψ(u) and φ(u) at inverse temperature β
    PsiPhi {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        beta: Vec<Vec<f64>>,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        u: Vec<Vec<f64>>,
    },
    /// Bounds on β_c(ν) from a critical point (β₀, ν₀)
    BcBounds {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long, allow_hyphen_values = true)]
        beta0: f64,
        #[arg(long)]
        nu0: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_grid)]
        nu: Vec<Vec<f64>>,
    },
    /// Phase label D, L or unknown of (β, ν) relative to a critical point
    Classify {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long, allow_hyphen_values = true)]
        beta0: f64,
        #[arg(long)]
        nu0: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        beta: Vec<Vec<f64>>,
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_grid)]
        nu: Vec<Vec<f64>>,
    },
    /// Smallest zero γ_d of J_{(d−4)/2} and the ratio γ_d/(2r_d)
    Bessel {
        #[arg(long, required = true, value_delimiter = ',')]
        d: Vec<usize>,
    },
    /// Whether νλ(β)² < a; `a` defaults to the Bessel bound for `d`
    L2 {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_grid)]
        beta: Vec<Vec<f64>>,
        #[arg(long, required = true, value_delimiter = ',', value_parser = parse_grid)]
        nu: Vec<Vec<f64>>,
        #[arg(long = "a-l2")]
        a_l2: Option<f64>,
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
}

fn flat(v: &[Vec<f64>]) -> Vec<f64> {
    v.iter().flatten().copied().collect()
}

fn case_name(c: SandwichCase) -> &'static str {
    match c {
        SandwichCase::AtReference => "at_reference",
        SandwichCase::A1 => "a1",
        SandwichCase::A2 => "a2",
        SandwichCase::B1 => "b1",
        SandwichCase::B2 => "b2",
    }
}

fn phase_name(p: PhaseLabel) -> &'static str {
    match p {
        PhaseLabel::D => "D",
        PhaseLabel::L => "L",
        PhaseLabel::Unknown => "unknown",
    }
}

/// The CSV table for one analytic query.
pub fn analytic_csv(cmd: &Analytic) -> CliResult<String> {
    let mut lines: Vec<String> = Vec::new();
    match cmd {
        Analytic::Lambda { beta } => {
            lines.push("beta,lambda".into());
            for b in flat(beta) {
                lines.push(format!("{},{}", sig17(b), sig17(lambda(b))));
            }
        }
        Analytic::Alpha { beta } => {
            lines.push("beta,alpha".into());
            for b in flat(beta) {
                lines.push(format!("{},{}", sig17(b), sig17(alpha(b))));
            }
        }
        Analytic::HAlpha { alpha: a, u } => {
            lines.push("alpha,u,h_alpha".into());
            for a in flat(a) {
                for u in flat(u) {
                    lines.push(format!("{},{},{}", sig17(a), sig17(u), sig17(h_alpha(a, u)?)));
                }
            }
        }
        Analytic::PsiPhi { beta, u } => {
            lines.push("beta,u,psi,phi".into());
            for b in flat(beta) {
                for u in flat(u) {
                    lines.push(format!("{},{},{},{}", sig17(b), sig17(u), sig17(psi(b, u)), sig17(phi(b, u))));
                }
            }
        }
        Analytic::BcBounds {
            branch,
            beta0,
            nu0,
            alpha: a,
            nu,
        } => {
            let crit = CriticalPoint::new(*beta0, *nu0, (*branch).into())?;
            lines.push("nu,case,lower,upper,increment_lower,increment_upper".into());
            for n in flat(nu) {
                let b = bc_bounds(n, &crit, *a)?;
                let (il, iu) = bc_increment_bounds(n, &crit, *a)?;
                lines.push(format!(
                    "{},{},{},{},{},{}",
                    sig17(n),
                    case_name(b.case),
                    sig17(b.lower),
                    sig17(b.upper),
                    sig17(il),
                    sig17(iu)
                ));
            }
        }
        Analytic::Classify {
            branch,
            beta0,
            nu0,
            alpha: a,
            beta,
            nu,
        } => {
            let crit = CriticalPoint::new(*beta0, *nu0, (*branch).into())?;
            lines.push("beta,nu,phase".into());
            for b in flat(beta) {
                for n in flat(nu) {
                    let p = classify_phase(b, n, &crit, *a)?;
                    lines.push(format!("{},{},{}", sig17(b), sig17(n), phase_name(p)));
                }
            }
        }
        Analytic::Bessel { d } => {
            lines.push("d,gamma,r_d,ratio,ratio_squared".into());
            for &d in d {
                let b = nu_c_lower_bound(d)?;
                lines.push(format!(
                    "{},{},{},{},{}",
                    d,
                    sig17(b.gamma),
                    sig17(b.r_d),
                    sig17(b.ratio),
                    sig17(b.ratio_squared)
                ));
            }
        }
        Analytic::L2 { beta, nu, a_l2, d } => {
            let a = match a_l2 {
                Some(a) if *a > 0.0 => *a,
                Some(a) => return Err(CliError::Config(format!("a-l2: must be > 0, got {a}"))),
                None => nu_c_lower_bound(*d)?.ratio_squared,
            };
            lines.push("beta,nu,a_l2,nu_lambda_squared,in_region".into());
            for b in flat(beta) {
                for n in flat(nu) {
                    let l = lambda(b);
                    lines.push(format!(
                        "{},{},{},{},{}",
                        sig17(b),
                        sig17(n),
                        sig17(a),
                        sig17(n * l * l),
                        l2_region(b, n, a)
                    ));
                }
            }
        }
    }
    Ok(lines.join("\n") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("2.5").unwrap(), vec![2.5]);
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("-1:1:1").unwrap(), vec![-1.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn alpha_at_zero_is_two() {
        let out = analytic_csv(&Analytic::Alpha { beta: vec![vec![0.0]] }).unwrap();
        assert_eq!(out, "beta,alpha\n0.0000000000000000e0,2.0000000000000000e0\n");
    }
}
