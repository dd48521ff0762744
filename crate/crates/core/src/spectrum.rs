//! Linear stability of the equilibrium `(M, 0)`.
//!
//! A mode `ζ e^{ikx + λτ}` solves the linearised system when
//! `ε²λ² + λ + M + γM^{γ−1}ε^α k² = 0`. The root that continues `−M` as
//! `ε → 0` is the slow (Keller–Segel) root; the other is the friction root
//! `≈ −1/ε²`.

use num_complex::Complex64;

use crate::diagnostics::{fit_exponential_rate, RateFit};
use crate::ep::simulate_ep;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::params::ParamSet;
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionQuery {
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub mass_level: f64,
    pub k: f64,
}

impl DispersionQuery {
    pub fn from_params(p: &ParamSet, k: f64) -> Self {
        Self {
            epsilon: p.epsilon,
            alpha: p.alpha,
            gamma: p.gamma,
            mass_level: p.mass_level,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        };
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", "must lie in [0, 1)");
        }
        if !(self.alpha >= 0.0 && self.alpha < 2.0) {
            return bad("alpha", "must lie in [0, 2)");
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return bad("gamma", "must exceed 1");
        }
        if !(self.mass_level > 0.0 && self.mass_level.is_finite()) {
            return bad("mass_level", "must be positive");
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return bad("k", "must be a finite non-negative wavenumber");
        }
        Ok(())
    }

    /// `M + γM^{γ−1}ε^α k²`.
    pub fn stiffness(&self) -> f64 {
        let q = self;
        q.mass_level + q.gamma * q.mass_level.powf(q.gamma - 1.0) * q.epsilon.powf(q.alpha) * q.k * q.k
    }

    /// Scaled residual `|ε²λ² + λ + c| / max(1, ε²|λ|²)`.
    pub fn residual(&self, lambda: Complex64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        (e2 * lambda * lambda + lambda + self.stiffness()).norm() / (e2 * lambda.norm_sqr()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub lambda_slow: Complex64,
    /// Absent at `ε = 0`, where the relation is linear.
    pub lambda_fast: Option<Complex64>,
    /// `U/ζ` on the slow root; `None` for `k = 0`.
    pub amplitude_ratio: Option<Complex64>,
}

impl ModePair {
    pub fn is_stable(&self) -> bool {
        self.lambda_slow.re < 0.0 && self.lambda_fast.is_none_or(|l| l.re < 0.0)
    }
}

pub fn dispersion_roots(q: &DispersionQuery) -> Result<ModePair> {
    q.validate()?;
    let c = q.stiffness();
    if q.epsilon == 0.0 {
        if q.alpha == 0.0 && q.k > 0.0 {
            return Err(Error::DegenerateEpsilon);
        }
        return Ok(ModePair {
            lambda_slow: Complex64::new(-q.mass_level, 0.0),
            lambda_fast: None,
            amplitude_ratio: (q.k > 0.0).then(|| Complex64::new(0.0, 0.0)),
        });
    }
    let e2 = q.epsilon * q.epsilon;
    let disc = 1.0 - 4.0 * e2 * c;
    // q_r = −(b + √disc)/2 with b = 1 avoids cancellation in the slow root
    let sqrt_disc = if disc >= 0.0 {
        Complex64::new(disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-disc).sqrt())
    };
    let qr = -(1.0 + sqrt_disc) / 2.0;
    let fast = qr / e2;
    let slow = c / qr;
    let amplitude_ratio = if q.k > 0.0 {
        Some(amplitude_ratio(q, slow)?)
    } else {
        None
    };
    Ok(ModePair {
        lambda_slow: slow,
        lambda_fast: Some(fast),
        amplitude_ratio,
    })
}

/// Velocity-to-density amplitude `U/ζ` of the mode `e^{ikx}` with growth rate `λ`:
/// `U/ζ = −i (εM/k + ε^{α+1}γM^{γ−1}k) / ((1 + ε²λ) M)`.
pub fn amplitude_ratio(q: &DispersionQuery, lambda: Complex64) -> Result<Complex64> {
    q.validate()?;
    if q.k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let denom = (1.0 + q.epsilon * q.epsilon * lambda) * q.mass_level;
    if (denom / q.mass_level).norm() < 1e-14 {
        return Err(Error::ResonantDenominator(denom.norm()));
    }
    let m = q.mass_level;
    let numer = q.epsilon * m / q.k + q.epsilon.powf(q.alpha + 1.0) * q.gamma * m.powf(q.gamma - 1.0) * q.k;
    Ok(Complex64::new(0.0, -numer) / denom)
}

/// Outcome of [`validate_linear_mode`]. Rates are growth rates (negative when decaying).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModeCheck {
    pub measured: f64,
    pub predicted: f64,
    pub relative_gap: f64,
    pub fit: RateFit,
}

/// Index of the Fourier mode with wavenumber `k` on the parameter grid.
fn mode_index(p: &ParamSet, k: f64) -> Result<usize> {
    let spectral = Spectral::new(&p.grid)?;
    let j = (k * p.grid.measure() / (2.0 * std::f64::consts::PI)).round();
    let index = j as usize;
    if j < 1.0
        || (spectral.wavenumber(index % spectral.len()) - k).abs() > 1e-9 * k.max(1.0)
        || !spectral.in_band(index)
    {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("wavenumber {k} is not a resolved mode of the grid"),
        });
    }
    Ok(index)
}

/// Runs the nonlinear solver from the slow eigenmode `ρ = M + a cos(kx)` with the
/// matching `w`, and fits the decay of the `k`-th Fourier amplitude over `τ ∈ [0, 1]`.
pub fn validate_linear_mode(p: &ParamSet, k: f64, amplitude: f64) -> Result<LinearModeCheck> {
    p.validate()?;
    if !(amplitude > 0.0 && amplitude <= 1e-6) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: "must lie in (0, 1e-6]".into(),
        });
    }
    let index = mode_index(p, k)?;
    let q = DispersionQuery::from_params(p, k);
    let pair = dispersion_roots(&q)?;
    let ratio = pair.amplitude_ratio.ok_or(Error::ZeroWavenumber)?;
    // u = εv + ε^α w with v/ζ = 1/(ik)
    let w_ratio = (ratio - p.epsilon / Complex64::new(0.0, k)) / p.epsilon.powf(p.alpha);
    let m = p.mass_level;
    let rho0 = Field::from_fn(p.grid, |x| m + amplitude * (k * x).cos())?;
    let w0 = Field::from_fn(p.grid, |x| amplitude * (w_ratio * Complex64::from_polar(1.0, k * x)).re)?;
    let times: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let run = simulate_ep(&rho0, &w0, p, &times)?;
    if let Some(e) = run.failure {
        return Err(e);
    }
    let spectral = Spectral::new(&p.grid)?;
    let series: Vec<(f64, f64)> = run
        .samples
        .iter()
        .map(|(s, _)| {
            let dev: Vec<f64> = s.rho.values().iter().map(|r| r - m).collect();
            (s.time, spectral.forward(&dev)[index].norm())
        })
        .collect();
    let fit = fit_exponential_rate(&series, (0.0, 1.0))?;
    let measured = -fit.rate;
    let predicted = pair.lambda_slow.re;
    Ok(LinearModeCheck {
        measured,
        predicted,
        relative_gap: ((measured - predicted) / predicted).abs(),
        fit,
    })
}
