//! Energy and dissipation functionals, Sobolev-type norms and exponential rate fits.
//!
//! Norms use the squared-sum convention `‖f‖²_{Hˢ} = Σ_{j≤s} ‖∂ʲf‖²_{L²}`.
//! Derivatives are spectral on the torus and second-order finite differences
//! on the line; integrals use the grid quadrature weights.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::ParamSet;
use crate::spectral::Spectral;
use crate::state::{EPState, KSState};

/// Highest derivative order carried by the one-dimensional energies.
pub const DEFAULT_MAX_ORDER: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub tau: f64,
    pub e0: f64,
    pub e1: f64,
    pub e_total: f64,
    pub d0: f64,
    pub d1: f64,
    pub d_total: f64,
    /// ‖ρ − M‖_∞
    pub sup_dev: f64,
    /// ‖∂ₓρ‖_{L⁴}
    pub grad_l4: f64,
    /// ‖ρ − M‖_{L²}
    pub l2_dev: f64,
    /// ‖ρ − M‖_{H²}
    pub h2_dev: f64,
    /// ‖ε^{α/2} w‖_{L²}; zero for Keller–Segel states.
    pub w_l2: f64,
    pub mass: f64,
    /// Change of ∫ρ relative to the initial mass.
    pub mass_defect: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub sup: f64,
    pub l4_of_gradient: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// Derivatives `∂ʲf` for `j = 1..=max_order`.
pub fn derivatives(f: &Field, max_order: u32) -> Vec<Vec<f64>> {
    match f.grid() {
        Grid::Torus { .. } => {
            let s = Spectral::new(f.grid()).expect("torus grid");
            (1..=max_order).map(|j| s.derivative(f.values(), j)).collect()
        }
        Grid::Line { .. } => {
            let h = f.grid().spacing();
            let mut out = Vec::with_capacity(max_order as usize);
            let mut cur = f.values().to_vec();
            for _ in 0..max_order {
                cur = fd_derivative(&cur, h);
                out.push(cur.clone());
            }
            out
        }
    }
}

/// Second-order central differences with one-sided second-order ends.
pub fn fd_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

fn quad(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    (0..grid.len()).map(|i| grid.weight(i) * f(i)).sum()
}

pub fn norms(f: &Field) -> Norms {
    let g = f.grid();
    let d = derivatives(f, 3);
    let sq = |v: &[f64]| quad(g, |i| v[i] * v[i]);
    let l2sq = sq(f.values());
    let dsq: Vec<f64> = d.iter().map(|v| sq(v)).collect();
    Norms {
        l2: l2sq.sqrt(),
        sup: f.sup_norm(),
        l4_of_gradient: quad(g, |i| d[0][i].powi(4)).powf(0.25),
        h1: (l2sq + dsq[0]).sqrt(),
        h2: (l2sq + dsq[0] + dsq[1]).sqrt(),
        h3: (l2sq + dsq[0] + dsq[1] + dsq[2]).sqrt(),
    }
}

/// `ρ^γ − M^γ − γM^{γ−1}(ρ − M)`, evaluated without cancellation near `ρ = M`.
pub fn bregman_pressure(rho: f64, mass_level: f64, gamma: f64) -> f64 {
    let r = (rho - mass_level) / mass_level;
    let scale = mass_level.powf(gamma);
    let bracket = if r.abs() < 1e-3 {
        // (1+r)^γ − 1 − γr = Σ_{n≥2} C(γ, n) rⁿ
        let mut term = gamma * r;
        let mut sum = 0.0;
        for n in 2..=8 {
            term *= (gamma - (n - 1) as f64) * r / n as f64;
            sum += term;
        }
        sum
    } else {
        (gamma * r.ln_1p()).exp_m1() - gamma * r
    };
    scale * bracket
}

pub fn energy_e0(state: &EPState, p: &ParamSet) -> f64 {
    let g = state.grid();
    let rho = state.rho.values();
    let w = state.w.values();
    let kinetic = 0.5 * p.epsilon.powf(p.alpha) * quad(g, |i| rho[i] * w[i] * w[i]);
    let pressure = quad(g, |i| bregman_pressure(rho[i], p.mass_level, p.gamma)) / (p.gamma - 1.0);
    kinetic + pressure
}

pub fn energy_e1(state: &EPState, p: &ParamSet, max_order: u32) -> f64 {
    let g = state.grid();
    let rho = state.rho.values();
    let dw = derivatives(&state.w, max_order);
    let dr = derivatives(&state.rho, max_order);
    let ea = p.epsilon.powf(p.alpha);
    (0..max_order as usize)
        .map(|j| {
            0.5 * ea * quad(g, |i| rho[i] * dw[j][i] * dw[j][i])
                + 0.5 * p.gamma * quad(g, |i| rho[i].powf(p.gamma - 2.0) * dr[j][i] * dr[j][i])
        })
        .sum()
}

fn dissipation_parts(state: &EPState, p: &ParamSet, max_order: u32) -> (f64, f64) {
    let g = state.grid();
    let rho = state.rho.values();
    let w = state.w.values();
    let weight = p.epsilon.powf(p.alpha - 2.0);
    let d0 = weight * quad(g, |i| w[i] * w[i]) + quad(g, |i| (rho[i] - p.mass_level).powi(2));
    let dw = derivatives(&state.w, max_order);
    let dr = derivatives(&state.rho, max_order);
    let d1 = (0..max_order as usize)
        .map(|j| {
            weight * quad(g, |i| rho[i] * dw[j][i] * dw[j][i])
                + p.gamma * quad(g, |i| rho[i].powf(p.gamma - 1.0) * dr[j][i] * dr[j][i])
        })
        .sum();
    (d0, d1)
}

pub fn dissipation_total(state: &EPState, p: &ParamSet, max_order: u32) -> f64 {
    let (d0, d1) = dissipation_parts(state, p, max_order);
    d0 + d1
}

/// Constant `c` with `E₀ ≥ c (ε^α‖w‖² + ‖ρ − M‖²)` for densities in `[rho_min, rho_max]`.
pub fn coercivity_constant(rho_min: f64, rho_max: f64, mass_level: f64, gamma: f64) -> f64 {
    // Bregman bracket / (γ−1) = (γ/2) ξ^{γ−2} (ρ−M)² for some ξ between ρ and M
    let lo = rho_min.min(mass_level);
    let hi = rho_max.max(mass_level);
    let curvature = 0.5 * gamma * lo.powf(gamma - 2.0).min(hi.powf(gamma - 2.0));
    (0.5 * rho_min).min(curvature)
}

pub fn ep_record(state: &EPState, p: &ParamSet, max_order: u32, initial_mass: f64) -> DiagnosticsRecord {
    let e0 = energy_e0(state, p);
    let e1 = energy_e1(state, p, max_order);
    let (d0, d1) = dissipation_parts(state, p, max_order);
    let dev = state.rho.shifted(-p.mass_level);
    let n = norms(&dev);
    let mass = state.rho.integral();
    let w_l2 = p.epsilon.powf(0.5 * p.alpha) * norms(&state.w).l2;
    DiagnosticsRecord {
        tau: state.time,
        e0,
        e1,
        e_total: e0 + e1,
        d0,
        d1,
        d_total: d0 + d1,
        sup_dev: n.sup,
        grad_l4: n.l4_of_gradient,
        l2_dev: n.l2,
        h2_dev: n.h2,
        w_l2,
        mass,
        mass_defect: mass - initial_mass,
        rho_min: state.rho.min(),
        rho_max: state.rho.max(),
    }
}

/// Keller–Segel states are scored as EP states with `w ≡ 0`.
pub fn ks_record(state: &KSState, p: &ParamSet, max_order: u32, initial_mass: f64) -> DiagnosticsRecord {
    let ep = EPState {
        rho: state.sigma.clone(),
        w: Field::constant(*state.grid(), 0.0),
        time: state.time,
    };
    ep_record(&ep, p, max_order, initial_mass)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Minus the least-squares slope of `ln y` against τ.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 5;

pub fn fit_exponential_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: pts.len(),
        });
    }
    if let Some(&(t, _)) = pts.iter().find(|&&(_, y)| !(y > 0.0)) {
        return Err(Error::NonPositiveSample(t));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        let (dt, dl) = (t - tm, y.ln() - lm);
        sxx += dt * dt;
        sxy += dt * dl;
        syy += dl * dl;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, y)| {
            let r = y.ln() - (lm + slope * (t - tm));
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit {
        rate: -slope,
        r_squared,
        samples: pts.len(),
    })
}
