//! Time integration of the one-dimensional perturbation system on the torus
//!
//! ```text
//! ∂τρ + ε^{α−1} ∂ₓ(ρw) + ∂ₓ(ρ v_ρ) = 0
//! ∂τw = −w/ε² − ε⁻¹ u ∂ₓw − ε⁻¹ γ ρ^{γ−2} ∂ₓρ − ε^{1−α} ∂τv_ρ − ε^{−α} u (ρ − M)
//! u = ε v_ρ + ε^α w,    ∂ₓ v_ρ = ρ − M
//! ```
//!
//! The second line is the momentum balance divided by `ε^α ρ`. The friction
//! `−w/ε²` is integrated exactly by a third-order exponential Runge–Kutta
//! scheme (Cox–Matthews ETD3RK); everything else is explicit. For the density
//! the scheme reduces to Kutta's third-order method applied to a spectral flux
//! divergence, so the discrete mass is conserved to round-off.
//!
//! `∂τv_ρ` is eliminated through the continuity equation: on the torus it is
//! `−(F − mean F)` with flux `F = ε^{α−1}ρw + ρv_ρ`.

use crate::diagnostics::{ep_record, DiagnosticsRecord, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::ks_map::{ks_map_torus_with, velocity_values};
use crate::params::ParamSet;
use crate::phi::{phi1, phi2, phi3};
use crate::spectral::Spectral;
use crate::state::{validate_initial_data, EPState};

/// Values beyond this magnitude are treated as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EPStepReport {
    pub dt_used: f64,
    pub max_cfl_speed: f64,
    /// Exact friction multiplier `e^{−dt/ε²}` applied to `w` over the step.
    pub friction_factor: f64,
    /// ∫ρ after the step minus ∫ρ before.
    pub mass_defect: f64,
}

/// Prepared operators for one parameter set.
#[derive(Debug, Clone)]
pub struct EpSolver {
    p: ParamSet,
    spectral: Spectral,
}

struct Rhs {
    drho: Vec<f64>,
    nonlinear_w: Vec<f64>,
}

impl EpSolver {
    pub fn new(p: &ParamSet) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            p: *p,
            spectral: Spectral::new(&p.grid)?,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.p
    }

    fn rhs(&self, rho: &[f64], w: &[f64]) -> Rhs {
        let p = &self.p;
        let (eps, alpha, m) = (p.epsilon, p.alpha, p.mass_level);
        let s = &self.spectral;
        let n = rho.len();
        let (v, _) = velocity_values(s, rho, m);
        let coupling = eps.powf(alpha - 1.0);
        let flux: Vec<f64> = (0..n).map(|i| coupling * rho[i] * w[i] + rho[i] * v[i]).collect();
        let drho: Vec<f64> = s.derivative_dealiased(&flux).into_iter().map(|d| -d).collect();
        let flux_mean = flux.iter().sum::<f64>() / n as f64;

        let wx = s.derivative_dealiased(w);
        let m_pow = m.powf(p.gamma - 1.0);
        // subtracting M^{γ−1} keeps the equilibrium an exact fixed point
        let enthalpy: Vec<f64> = rho.iter().map(|r| r.powf(p.gamma - 1.0) - m_pow).collect();
        let hx = s.derivative_dealiased(&enthalpy);
        let pressure_factor = p.gamma / (p.gamma - 1.0) / eps;
        let ea = eps.powf(alpha);
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let u = eps * v[i] + ea * w[i];
                let dtau_v = -(flux[i] - flux_mean);
                -u * wx[i] / eps - pressure_factor * hx[i] - eps.powf(1.0 - alpha) * dtau_v - u * (rho[i] - m) / ea
            })
            .collect();
        Rhs {
            drho,
            nonlinear_w: s.dealias(&raw),
        }
    }

    /// Largest characteristic speed: transport `|u|/ε` plus the sound speed
    /// `ε^{α/2−1} √(γ ρ^{γ−1})`.
    pub fn max_speed(&self, state: &EPState) -> f64 {
        let p = &self.p;
        let (v, _) = velocity_values(&self.spectral, state.rho.values(), p.mass_level);
        let coupling = p.epsilon.powf(p.alpha - 1.0);
        let sound = p.epsilon.powf(0.5 * p.alpha - 1.0);
        state
            .rho
            .values()
            .iter()
            .zip(state.w.values())
            .zip(&v)
            .map(|((&r, &w), &vi)| {
                (vi + coupling * w).abs() + sound * (p.gamma * r.max(0.0).powf(p.gamma - 1.0)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn cfl_limit(&self, state: &EPState) -> f64 {
        let speed = self.max_speed(state);
        if speed > 0.0 {
            self.p.dt_cfl * self.p.grid.spacing() / speed
        } else {
            f64::INFINITY
        }
    }

    pub fn step(&self, state: &EPState, dt: f64) -> Result<(EPState, EPStepReport)> {
        let p = &self.p;
        if state.grid() != &p.grid {
            return Err(Error::GridMismatch);
        }
        let speed = self.max_speed(state);
        let limit = if speed > 0.0 {
            p.dt_cfl * p.grid.spacing() / speed
        } else {
            f64::INFINITY
        };
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let rho = state.rho.values();
        let w = state.w.values();
        let n = rho.len();
        let z = -dt / (p.epsilon * p.epsilon);
        let (e_half, e_full) = ((0.5 * z).exp(), z.exp());

        let r0 = self.rhs(rho, w);
        let half_phi = 0.5 * dt * phi1(0.5 * z);
        let rho_a: Vec<f64> = (0..n).map(|i| rho[i] + 0.5 * dt * r0.drho[i]).collect();
        let w_a: Vec<f64> = (0..n).map(|i| e_half * w[i] + half_phi * r0.nonlinear_w[i]).collect();

        let ra = self.rhs(&rho_a, &w_a);
        let full_phi = dt * phi1(z);
        let rho_b: Vec<f64> = (0..n).map(|i| rho[i] + dt * (2.0 * ra.drho[i] - r0.drho[i])).collect();
        let w_b: Vec<f64> = (0..n)
            .map(|i| e_full * w[i] + full_phi * (2.0 * ra.nonlinear_w[i] - r0.nonlinear_w[i]))
            .collect();

        let rb = self.rhs(&rho_b, &w_b);
        let (p1, p2, p3) = (phi1(z), phi2(z), phi3(z));
        let (b0, ba, bb) = (p1 - 3.0 * p2 + 4.0 * p3, 4.0 * p2 - 8.0 * p3, 4.0 * p3 - p2);
        let new_rho: Vec<f64> = (0..n)
            .map(|i| rho[i] + dt * (r0.drho[i] / 6.0 + 2.0 * ra.drho[i] / 3.0 + rb.drho[i] / 6.0))
            .collect();
        let new_w: Vec<f64> = (0..n)
            .map(|i| e_full * w[i] + dt * (b0 * r0.nonlinear_w[i] + ba * ra.nonlinear_w[i] + bb * rb.nonlinear_w[i]))
            .collect();

        let tau = state.time + dt;
        if let Some(i) = new_rho
            .iter()
            .chain(&new_w)
            .position(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD)
        {
            return Err(Error::NonFinite(format!(
                " (blow-up sentinel at component {i}, tau = {tau})"
            )));
        }
        let rho_field = Field::from_raw(p.grid, new_rho);
        let (lower, upper) = (0.5 * p.rho_lower, 2.0 * p.rho_upper);
        let (min, max) = (rho_field.min(), rho_field.max());
        if min < lower || max > upper {
            return Err(Error::RangeBreach {
                min,
                max,
                lower,
                upper,
                tau,
            });
        }
        let mass_defect = rho_field.integral() - state.rho.integral();
        let next = EPState {
            rho: rho_field,
            w: Field::from_raw(p.grid, new_w),
            time: tau,
        };
        Ok((
            next,
            EPStepReport {
                dt_used: dt,
                max_cfl_speed: speed,
                friction_factor: e_full,
                mass_defect,
            },
        ))
    }
}

pub fn reconstruct_u(state: &EPState, p: &ParamSet) -> Result<Field> {
    let spectral = Spectral::new(state.grid())?;
    let v = ks_map_torus_with(&spectral, &state.rho, p.mass_level)?.v;
    let ea = p.epsilon.powf(p.alpha);
    v.zip_with(&state.w, |vi, wi| p.epsilon * vi + ea * wi)
}

pub fn step_ep(state: &EPState, p: &ParamSet, dt: f64) -> Result<(EPState, EPStepReport)> {
    EpSolver::new(p)?.step(state, dt)
}

/// Trajectory sampled at requested times, plus the failure that stopped it, if any.
#[derive(Debug, Clone)]
pub struct EPRun {
    pub samples: Vec<(EPState, DiagnosticsRecord)>,
    pub steps: usize,
    /// Set when a step failed (CFL, range breach, blow-up); `samples` then holds the
    /// trajectory up to the last sample reached.
    pub failure: Option<Error>,
    /// Largest |∫ρ(τ) − ∫ρ₀| seen over all steps.
    pub max_mass_defect: f64,
}

impl EPRun {
    pub fn blew_up(&self) -> bool {
        self.failure.is_some()
    }

    pub fn records(&self) -> Vec<DiagnosticsRecord> {
        self.samples.iter().map(|(_, r)| *r).collect()
    }
}

pub(crate) fn check_sample_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BadSampleTimes);
    }
    Ok(())
}

/// Adaptive step toward `target`: the CFL limit, `dt_max`, and the remaining time.
pub(crate) fn next_dt(limit: f64, dt_max: f64, remaining: f64) -> f64 {
    let dt = limit.min(dt_max);
    if remaining <= dt {
        remaining
    } else if remaining < 2.0 * dt {
        // split the remainder evenly rather than leave a sliver
        0.5 * remaining
    } else {
        dt
    }
}

pub fn simulate_ep(rho0: &Field, w0: &Field, p: &ParamSet, sample_times: &[f64]) -> Result<EPRun> {
    validate_initial_data(rho0, w0, p)?;
    check_sample_times(sample_times)?;
    let solver = EpSolver::new(p)?;
    let mut state = EPState::new(rho0.clone(), w0.clone())?;
    let mass0 = rho0.integral();
    let mut run = EPRun {
        samples: Vec::with_capacity(sample_times.len()),
        steps: 0,
        failure: None,
        max_mass_defect: 0.0,
    };
    'samples: for &target in sample_times {
        while target - state.time > 1e-13 * target.max(1.0) {
            let dt = next_dt(solver.cfl_limit(&state), p.dt_max, target - state.time);
            match solver.step(&state, dt) {
                Ok((next, _)) => {
                    state = next;
                    run.steps += 1;
                    let defect = (state.rho.integral() - mass0).abs();
                    run.max_mass_defect = run.max_mass_defect.max(defect);
                }
                Err(e) => {
                    run.failure = Some(e);
                    break 'samples;
                }
            }
        }
        state.time = target;
        let rec = ep_record(&state, p, DEFAULT_MAX_ORDER, mass0);
        run.samples.push((state.clone(), rec));
    }
    Ok(run)
}
