//! Physical and numerical parameters, and the flat key-value configuration format.
//!
//! A configuration file holds one `key = value` pair per line; `#` starts a
//! comment. Recognised keys are the [`ParamSet`] field names plus the grid
//! keys `grid` (`torus` or `line`), `grid_points`, `grid_length`,
//! `grid_left` and `grid_right`. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    /// Small parameter ε ∈ (0, 1).
    pub epsilon: f64,
    /// Pressure weight exponent α ∈ (0, 2).
    pub alpha: f64,
    /// Adiabatic exponent γ > 1.
    pub gamma: f64,
    /// Background charge M.
    pub mass_level: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub grid: Grid,
    /// Courant factor in (0, 1].
    pub dt_cfl: f64,
    /// Final rescaled time τ.
    pub t_end: f64,
    /// Upper bound on any adaptive step.
    pub dt_max: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            alpha: 1.0,
            gamma: 2.0,
            mass_level: 1.0,
            rho_lower: 0.5,
            rho_upper: 1.5,
            grid: Grid::Torus {
                length: 2.0 * std::f64::consts::PI,
                points: 64,
            },
            dt_cfl: 0.5,
            t_end: 1.0,
            dt_max: 1e-2,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl ParamSet {
    pub fn validate(&self) -> Result<()> {
        let in_open = |x: f64, a: f64, b: f64| x > a && x < b;
        if !in_open(self.epsilon, 0.0, 1.0) {
            return Err(invalid("epsilon", format!("{} not in (0,1)", self.epsilon)));
        }
        if !in_open(self.alpha, 0.0, 2.0) {
            return Err(invalid("alpha", format!("{} not in (0,2)", self.alpha)));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("{} must exceed 1", self.gamma)));
        }
        if !(self.rho_lower > 0.0
            && self.rho_lower < self.mass_level
            && self.mass_level < self.rho_upper
            && self.rho_upper.is_finite())
        {
            return Err(invalid(
                "mass_level",
                format!(
                    "need 0 < rho_lower < M < rho_upper, got {} < {} < {}",
                    self.rho_lower, self.mass_level, self.rho_upper
                ),
            ));
        }
        let n = self.grid.len();
        if !n.is_power_of_two() || n < crate::grid::MIN_POINTS {
            return Err(invalid("grid_points", format!("{n} is not a power of two >= 8")));
        }
        if !(self.dt_cfl > 0.0 && self.dt_cfl <= 1.0) {
            return Err(invalid("dt_cfl", format!("{} not in (0,1]", self.dt_cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("{} must be >= 0", self.t_end)));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(invalid("dt_max", format!("{} must be > 0", self.dt_max)));
        }
        Ok(())
    }

    /// Friction time scale of the velocity perturbation, ε^{2−α}.
    pub fn layer_time(&self) -> f64 {
        self.epsilon.powf(2.0 - self.alpha)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let kv = parse_key_values(text)?;
        Self::from_map(&kv)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }

    /// Applies the key-value overrides on top of the defaults.
    pub fn from_map(kv: &BTreeMap<String, String>) -> Result<Self> {
        let mut p = ParamSet::default();
        let (mut kind, mut points, mut length, mut left, mut right) =
            (None::<String>, None::<usize>, None::<f64>, None::<f64>, None::<f64>);
        for (key, value) in kv {
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}` as a number")))
            };
            match key.as_str() {
                "epsilon" => p.epsilon = num()?,
                "alpha" => p.alpha = num()?,
                "gamma" => p.gamma = num()?,
                "mass_level" => p.mass_level = num()?,
                "rho_lower" => p.rho_lower = num()?,
                "rho_upper" => p.rho_upper = num()?,
                "dt_cfl" => p.dt_cfl = num()?,
                "t_end" => p.t_end = num()?,
                "dt_max" => p.dt_max = num()?,
                "grid" => kind = Some(value.clone()),
                "grid_points" => {
                    points = Some(
                        value
                            .parse()
                            .map_err(|_| Error::Config(format!("`grid_points`: cannot parse `{value}`")))?,
                    )
                }
                "grid_length" => length = Some(num()?),
                "grid_left" => left = Some(num()?),
                "grid_right" => right = Some(num()?),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        let n = points.unwrap_or(p.grid.len());
        p.grid = match kind.as_deref() {
            None | Some("torus") => {
                let default_len = match p.grid {
                    Grid::Torus { length, .. } => length,
                    _ => 2.0 * std::f64::consts::PI,
                };
                Grid::torus(length.unwrap_or(default_len), n)?
            }
            Some("line") => Grid::line(
                left.ok_or_else(|| Error::Config("line grid needs `grid_left`".into()))?,
                right.ok_or_else(|| Error::Config("line grid needs `grid_right`".into()))?,
                n,
            )?,
            Some(other) => return Err(Error::Config(format!("unknown grid kind `{other}`"))),
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ParamSet::default().validate().unwrap();
    }

    #[test]
    fn hypothesis_ranges_are_enforced() {
        let base = ParamSet::default();
        assert!(ParamSet { alpha: 2.0, ..base }.validate().is_err());
        assert!(ParamSet { gamma: 1.0, ..base }.validate().is_err());
        assert!(ParamSet { epsilon: 1.0, ..base }.validate().is_err());
        assert!(ParamSet { rho_lower: 1.2, ..base }.validate().is_err());
        assert!(ParamSet { dt_cfl: 0.0, ..base }.validate().is_err());
        let g = Grid::periodic(48).unwrap();
        assert!(base.with_grid(g).validate().is_err());
    }

    #[test]
    fn parses_flat_config() {
        let text = "# sweep setup\nepsilon = 0.1\nalpha=1.5\ngrid = line\ngrid_left = -4\ngrid_right = 4\ngrid_points = 128 # power of two\n";
        let p = ParamSet::from_config_str(text).unwrap();
        assert_eq!(p.epsilon, 0.1);
        assert_eq!(p.alpha, 1.5);
        assert_eq!(p.grid, Grid::line(-4.0, 4.0, 128).unwrap());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(ParamSet::from_config_str("eps = 0.1"), Err(Error::Config(_))));
        assert!(matches!(
            ParamSet::from_config_str("alpha = 1\nalpha = 1"),
            Err(Error::Config(_))
        ));
        assert!(ParamSet::from_config_str("alpha = one").is_err());
    }
}
