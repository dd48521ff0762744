//! Solver states and initial-data validation.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::ParamSet;

/// State `(ρ, w)` of the perturbation system, with `u = ε v_ρ + ε^α w`.
#[derive(Debug, Clone, PartialEq)]
pub struct EPState {
    pub rho: Field,
    pub w: Field,
    pub time: f64,
}

impl EPState {
    pub fn new(rho: Field, w: Field) -> Result<Self> {
        if rho.grid() != w.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { rho, w, time: 0.0 })
    }

    pub fn equilibrium(grid: Grid, mass_level: f64) -> Self {
        Self {
            rho: Field::constant(grid, mass_level),
            w: Field::constant(grid, 0.0),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }
}

/// Bacteria density σ of the limit system.
#[derive(Debug, Clone, PartialEq)]
pub struct KSState {
    pub sigma: Field,
    pub time: f64,
}

impl KSState {
    pub fn new(sigma: Field) -> Self {
        Self { sigma, time: 0.0 }
    }

    pub fn grid(&self) -> &Grid {
        self.sigma.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub min: f64,
    pub max: f64,
    /// Discrete ∫(ρ0 − M).
    pub mean_defect: f64,
}

/// Relative tolerance on ∫(ρ0 − M), scaled by |Ω|.
pub const MEAN_DEFECT_TOL: f64 = 1e-10;

/// Checks the non-vacuum, zero-mean conditions on the initial data.
///
/// Succeeds iff every sample is finite, `rho_lower < ρ0 < rho_upper`
/// pointwise, and the quadrature of `ρ0 − M` vanishes within
/// `1e-10·|Ω|`.
pub fn validate_initial_data(rho0: &Field, w0: &Field, p: &ParamSet) -> Result<ValidationReport> {
    if rho0.grid() != &p.grid || w0.grid() != &p.grid {
        return Err(Error::GridMismatch);
    }
    for (name, f) in [("rho0", rho0), ("w0", w0)] {
        if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(" in {name} at node {i}")));
        }
    }
    let report = ValidationReport {
        min: rho0.min(),
        max: rho0.max(),
        mean_defect: rho0.shifted(-p.mass_level).integral(),
    };
    let tolerance = MEAN_DEFECT_TOL * p.grid.measure();
    if report.mean_defect.abs() > tolerance {
        return Err(Error::MeanDefect {
            defect: report.mean_defect,
            tolerance,
        });
    }
    if !(report.min > p.rho_lower && report.max < p.rho_upper) {
        return Err(Error::RangeViolation {
            min: report.min,
            max: report.max,
            lower: p.rho_lower,
            upper: p.rho_upper,
        });
    }
    Ok(report)
}
