//! Eulerian solver for the limit system `∂τσ + ∂ₓ(σv) = 0`, `∂ₓv = σ − M`, on the torus.
//!
//! Strong-stability-preserving RK3 (Shu–Osher) on the spectral flux divergence;
//! the velocity is recomputed from σ at every stage.

use crate::diagnostics::{ks_record, DiagnosticsRecord, DEFAULT_MAX_ORDER};
use crate::ep::{check_sample_times, next_dt, BLOW_UP_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::ks_map::velocity_values;
use crate::params::ParamSet;
use crate::spectral::Spectral;
use crate::state::KSState;

/// σ below this fraction of M is treated as vacuum.
pub const VACUUM_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSStepReport {
    pub dt_used: f64,
    pub mass_defect: f64,
    pub min_sigma: f64,
}

#[derive(Debug, Clone)]
pub struct KsSolver {
    p: ParamSet,
    spectral: Spectral,
}

impl KsSolver {
    pub fn new(p: &ParamSet) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            p: *p,
            spectral: Spectral::new(&p.grid)?,
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn velocity(&self, sigma: &[f64]) -> Vec<f64> {
        velocity_values(&self.spectral, sigma, self.p.mass_level).0
    }

    fn rhs(&self, sigma: &[f64]) -> Vec<f64> {
        let v = self.velocity(sigma);
        let flux: Vec<f64> = sigma.iter().zip(&v).map(|(s, v)| s * v).collect();
        self.spectral
            .derivative_dealiased(&flux)
            .into_iter()
            .map(|d| -d)
            .collect()
    }

    pub fn cfl_limit(&self, state: &KSState) -> f64 {
        let vmax = self
            .velocity(state.sigma.values())
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if vmax > 0.0 {
            self.p.dt_cfl * self.p.grid.spacing() / vmax
        } else {
            f64::INFINITY
        }
    }

    pub fn step(&self, state: &KSState, dt: f64) -> Result<(KSState, KSStepReport)> {
        if state.grid() != &self.p.grid {
            return Err(Error::GridMismatch);
        }
        let limit = self.cfl_limit(state);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let floor = VACUUM_FRACTION * self.p.mass_level;
        let s0 = state.sigma.values();
        let min0 = state.sigma.min();
        if min0 < floor {
            return Err(Error::VacuumApproach {
                min_sigma: min0,
                tau: state.time,
            });
        }
        let n = s0.len();
        let k0 = self.rhs(s0);
        let s1: Vec<f64> = (0..n).map(|i| s0[i] + dt * k0[i]).collect();
        let k1 = self.rhs(&s1);
        let s2: Vec<f64> = (0..n).map(|i| 0.75 * s0[i] + 0.25 * (s1[i] + dt * k1[i])).collect();
        let k2 = self.rhs(&s2);
        let s3: Vec<f64> = (0..n).map(|i| s0[i] / 3.0 + 2.0 / 3.0 * (s2[i] + dt * k2[i])).collect();

        let tau = state.time + dt;
        if s3.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD) {
            return Err(Error::NonFinite(format!(" (blow-up sentinel, tau = {tau})")));
        }
        let sigma = Field::from_raw(self.p.grid, s3);
        let min_sigma = sigma.min();
        if min_sigma < floor {
            return Err(Error::VacuumApproach { min_sigma, tau });
        }
        let mass_defect = sigma.integral() - state.sigma.integral();
        Ok((
            KSState { sigma, time: tau },
            KSStepReport {
                dt_used: dt,
                mass_defect,
                min_sigma,
            },
        ))
    }

    /// Advances to `target` with adaptive steps, calling `observe` after every step.
    pub(crate) fn advance(
        &self,
        state: &mut KSState,
        target: f64,
        mut observe: impl FnMut(&KSState, f64),
    ) -> Result<usize> {
        let mut steps = 0;
        while target - state.time > 1e-13 * target.max(1.0) {
            let dt = next_dt(self.cfl_limit(state), self.p.dt_max, target - state.time);
            let (next, _) = self.step(state, dt)?;
            *state = next;
            steps += 1;
            observe(state, dt);
        }
        state.time = target;
        Ok(steps)
    }
}

pub fn step_ks(state: &KSState, p: &ParamSet, dt: f64) -> Result<(KSState, KSStepReport)> {
    KsSolver::new(p)?.step(state, dt)
}

#[derive(Debug, Clone)]
pub struct KSRun {
    pub samples: Vec<(KSState, DiagnosticsRecord)>,
    pub steps: usize,
    pub failure: Option<Error>,
    pub max_mass_defect: f64,
}

impl KSRun {
    pub fn records(&self) -> Vec<DiagnosticsRecord> {
        self.samples.iter().map(|(_, r)| *r).collect()
    }
}

pub fn simulate_ks(sigma0: &Field, p: &ParamSet, sample_times: &[f64]) -> Result<KSRun> {
    let solver = KsSolver::new(p)?;
    if sigma0.grid() != &p.grid {
        return Err(Error::GridMismatch);
    }
    if sigma0.min() < VACUUM_FRACTION * p.mass_level {
        return Err(Error::VacuumApproach {
            min_sigma: sigma0.min(),
            tau: 0.0,
        });
    }
    check_sample_times(sample_times)?;
    let mass0 = sigma0.integral();
    let mut state = KSState::new(sigma0.clone());
    let mut run = KSRun {
        samples: Vec::with_capacity(sample_times.len()),
        steps: 0,
        failure: None,
        max_mass_defect: 0.0,
    };
    for &target in sample_times {
        let mut worst = run.max_mass_defect;
        let result = solver.advance(&mut state, target, |s, _| {
            worst = worst.max((s.sigma.integral() - mass0).abs());
        });
        run.max_mass_defect = worst;
        match result {
            Ok(steps) => run.steps += steps,
            Err(e) => {
                run.failure = Some(e);
                break;
            }
        }
        let rec = ks_record(&state, p, DEFAULT_MAX_ORDER, mass0);
        run.samples.push((state.clone(), rec));
    }
    Ok(run)
}
