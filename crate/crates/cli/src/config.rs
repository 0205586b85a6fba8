//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Recognised keys: `d, beta, nu, t, n_steps, paths_per_env, n_envs,
//! bin_width, delta, seed, mode, grid.beta, grid.nu, grid.t`. The grid keys
//! take comma-separated lists. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use poisson_polymer::estimators::default_steps;
use poisson_polymer::numfmt::sig17;
use poisson_polymer::{BallGeometry, ExperimentConfig};

use crate::error::{CliError, CliResult};

pub const KEYS: [&str; 14] = [
    "d",
    "beta",
    "nu",
    "t",
    "n_steps",
    "paths_per_env",
    "n_envs",
    "bin_width",
    "delta",
    "seed",
    "mode",
    "grid.beta",
    "grid.nu",
    "grid.t",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Quenched,
    Annealed,
    /// direct, Palm and finite-difference estimates of ∂p/∂β
    DpDbeta,
    /// grid integral and coupled finite difference of ∂p/∂ν
    DpDnu,
    NuMonotonicity { nu_prime: f64 },
    Localization,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if let Some(rest) = s.strip_prefix("nu-monotonicity:") {
            let nu_prime = rest
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("mode: bad nu_prime in `{s}`")))?;
            return Ok(Mode::NuMonotonicity { nu_prime });
        }
        match s {
            "quenched" => Ok(Mode::Quenched),
            "annealed" => Ok(Mode::Annealed),
            "dp-dbeta" => Ok(Mode::DpDbeta),
            "dp-dnu" => Ok(Mode::DpDnu),
            "localization" => Ok(Mode::Localization),
            "nu-monotonicity" => Err(CliError::Config(
                "mode: nu-monotonicity needs the smaller intensity, as `nu-monotonicity:<nu_prime>`".into(),
            )),
            _ => Err(CliError::Config(format!(
                "mode: unknown mode `{s}` (expected quenched, annealed, dp-dbeta, dp-dnu, nu-monotonicity:<nu_prime>, localization)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Quenched => f.write_str("quenched"),
            Mode::Annealed => f.write_str("annealed"),
            Mode::DpDbeta => f.write_str("dp-dbeta"),
            Mode::DpDnu => f.write_str("dp-dnu"),
            Mode::NuMonotonicity { nu_prime } => write!(f, "nu-monotonicity:{}", sig17(*nu_prime)),
            Mode::Localization => f.write_str("localization"),
        }
    }
}

/// Parsed configuration. Scalars left unset fall back to defaults when the
/// grid cells are expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub beta: Option<f64>,
    pub nu: Option<f64>,
    pub t: Option<f64>,
    pub n_steps: Option<usize>,
    pub paths_per_env: usize,
    pub n_envs: usize,
    pub bin_width: Option<f64>,
    pub delta: f64,
    pub seed: u64,
    pub mode: Mode,
    pub grid_beta: Option<Vec<f64>>,
    pub grid_nu: Option<Vec<f64>>,
    pub grid_t: Option<Vec<f64>>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse::<T>()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{v}`")))
}

fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    let xs = v
        .split(',')
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect::<CliResult<Vec<f64>>>()?;
    if xs.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    Ok(xs)
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Config(format!("{k}: unknown key (line {})", lineno + 1)));
            }
            if v.is_empty() {
                return Err(CliError::Config(format!("{k}: missing value (line {})", lineno + 1)));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Config(format!("{k}: given more than once")));
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let d = match get("d") {
            Some(v) => parse_num("d", v)?,
            None => return Err(CliError::Config("d: required".into())),
        };
        let opt_f = |k: &str| get(k).map(|v| parse_num::<f64>(k, v)).transpose();
        let opt_u = |k: &str| get(k).map(|v| parse_num::<usize>(k, v)).transpose();
        let opt_l = |k: &str| get(k).map(|v| parse_list(k, v)).transpose();
        let cfg = RunConfig {
            d,
            beta: opt_f("beta")?,
            nu: opt_f("nu")?,
            t: opt_f("t")?,
            n_steps: opt_u("n_steps")?,
            paths_per_env: opt_u("paths_per_env")?.unwrap_or(2000),
            n_envs: opt_u("n_envs")?.unwrap_or(200),
            bin_width: opt_f("bin_width")?,
            delta: opt_f("delta")?.unwrap_or(0.25),
            seed: get("seed").map(|v| parse_num::<u64>("seed", v)).transpose()?.unwrap_or(0),
            mode: get("mode").map(Mode::from_str).transpose()?.unwrap_or(Mode::Quenched),
            grid_beta: opt_l("grid.beta")?,
            grid_nu: opt_l("grid.nu")?,
            grid_t: opt_l("grid.t")?,
        };
        for (key, scalar, grid) in [
            ("beta", cfg.beta, &cfg.grid_beta),
            ("nu", cfg.nu, &cfg.grid_nu),
            ("t", cfg.t, &cfg.grid_t),
        ] {
            if scalar.is_none() && grid.is_none() {
                return Err(CliError::Config(format!("{key}: required (or give grid.{key})")));
            }
        }
        // surface bad values early, naming the key
        cfg.cells()?;
        Ok(cfg)
    }

    pub fn has_grid(&self) -> bool {
        self.grid_beta.is_some() || self.grid_nu.is_some() || self.grid_t.is_some()
    }

    /// Grid cells in row-major order over (beta, nu, t); a missing grid
    /// uses the scalar value.
    pub fn cells(&self) -> CliResult<Vec<ExperimentConfig>> {
        let axis = |grid: &Option<Vec<f64>>, scalar: Option<f64>| grid.clone().unwrap_or_else(|| scalar.into_iter().collect());
        let betas = axis(&self.grid_beta, self.beta);
        let nus = axis(&self.grid_nu, self.nu);
        let ts = axis(&self.grid_t, self.t);
        let radius = BallGeometry::new(self.d)
            .map_err(|_| CliError::Config(format!("d: dimension must be at least 1, got {}", self.d)))?
            .radius();
        let mut out = Vec::with_capacity(betas.len() * nus.len() * ts.len());
        for &beta in &betas {
            for &nu in &nus {
                for &t in &ts {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(CliError::Config(format!("t: must be finite and > 0, got {t}")));
                    }
                    let cell = ExperimentConfig {
                        d: self.d,
                        beta,
                        nu,
                        t,
                        n_steps: self.n_steps.unwrap_or_else(|| default_steps(t)),
                        paths_per_env: self.paths_per_env,
                        n_envs: self.n_envs,
                        bin_width: self.bin_width.unwrap_or(radius / 4.0),
                        delta: self.delta,
                        seed: self.seed,
                    };
                    cell.validate().map_err(|e| match e {
                        poisson_polymer::Error::InvalidConfig(msg) => CliError::Config(msg),
                        other => CliError::Config(other.to_string()),
                    })?;
                    if let Mode::NuMonotonicity { nu_prime } = self.mode {
                        if !(nu_prime > 0.0 && nu_prime <= nu) {
                            return Err(CliError::Config(format!(
                                "mode: need 0 < nu_prime <= nu, got nu_prime = {nu_prime}, nu = {nu}"
                            )));
                        }
                    }
                    if self.mode == Mode::DpDnu && nu <= 0.0 {
                        return Err(CliError::Config("nu: dp-dnu needs nu > 0".into()));
                    }
                    out.push(cell);
                }
            }
        }
        Ok(out)
    }

    /// Canonical rendering: every key that was set, in `KEYS` order, with
    /// reals in 17 significant digits. Parsing it gives back the same config.
    pub fn canonical_text(&self) -> String {
        let mut lines = Vec::new();
        let list = |xs: &Vec<f64>| xs.iter().map(|x| sig17(*x)).collect::<Vec<_>>().join(",");
        lines.push(format!("d = {}", self.d));
        if let Some(v) = self.beta {
            lines.push(format!("beta = {}", sig17(v)));
        }
        if let Some(v) = self.nu {
            lines.push(format!("nu = {}", sig17(v)));
        }
        if let Some(v) = self.t {
            lines.push(format!("t = {}", sig17(v)));
        }
        if let Some(v) = self.n_steps {
            lines.push(format!("n_steps = {v}"));
        }
        lines.push(format!("paths_per_env = {}", self.paths_per_env));
        lines.push(format!("n_envs = {}", self.n_envs));
        if let Some(v) = self.bin_width {
            lines.push(format!("bin_width = {}", sig17(v)));
        }
        lines.push(format!("delta = {}", sig17(self.delta)));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("mode = {}", self.mode));
        if let Some(g) = &self.grid_beta {
            lines.push(format!("grid.beta = {}", list(g)));
        }
        if let Some(g) = &self.grid_nu {
            lines.push(format!("grid.nu = {}", list(g)));
        }
        if let Some(g) = &self.grid_t {
            lines.push(format!("grid.t = {}", list(g)));
        }
        lines.join("\n") + "\n"
    }
}
