//! Exact characteristics of the limit system `∂τσ + ∂ₓ(σv) = 0`, `∂ₓv = σ − M`.
//!
//! Along `η̇ = v(η, τ)` the velocity obeys `d/dτ v = −Mv` and the density the
//! logistic law `d/dτ σ = −σ(σ − M)`. With `E = e^{−Mτ}` and `F` the cumulative
//! mass of σ0:
//!
//! ```text
//! v∘η   = E F(x)
//! η     = x + (1 − E) F(x)/M
//! σ∘η   = M σ0 / D,        D = σ0 + (M − σ0) E
//! ∂ₓη   = D / M
//! ∂ₓσ∘η = M³ E σ0' / D³
//! ```
//!
//! The same identities hold on the torus when `F` is the zero-mean antiderivative.

mod oracle;
pub mod profile;

pub use oracle::{semi_lagrangian_oracle, OracleReport};
pub use profile::{InitialProfile, ProfileKind, ProfileSpec};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::state::KSState;

/// Beyond `M τ` of this size, `e^{−Mτ}` is reported as its limit 0.
pub const HORIZON: f64 = 50.0;

fn decay(tau: f64, m: f64) -> f64 {
    if m * tau > HORIZON {
        0.0
    } else {
        (-m * tau).exp()
    }
}

pub fn velocity_along(x: f64, tau: f64, prof: &InitialProfile) -> f64 {
    decay(tau, prof.mass_level()) * prof.cumulative(x)
}

/// `η = E x + (1 − E) G(x)` with `G` the limit position; this form keeps
/// vacuum labels, where `G` is constant, exactly ordered in floating point.
pub fn trajectory_position(x: f64, tau: f64, prof: &InitialProfile) -> f64 {
    let e = decay(tau, prof.mass_level());
    e * x + (1.0 - e) * prof.limit_position(x)
}

/// Logistic evolution of a density value `s0` over time `tau`.
pub fn logistic(s0: f64, tau: f64, m: f64) -> f64 {
    if s0 == 0.0 {
        return 0.0;
    }
    m * s0 / (s0 + (m - s0) * decay(tau, m))
}

pub fn sigma_along(x: f64, tau: f64, prof: &InitialProfile) -> f64 {
    logistic(prof.sigma0(x), tau, prof.mass_level())
}

/// Trajectory Jacobian `∂ₓη = (σ0 + (M − σ0)e^{−Mτ})/M`.
pub fn jacobian_along(x: f64, tau: f64, prof: &InitialProfile) -> f64 {
    let m = prof.mass_level();
    let s0 = prof.sigma0(x);
    (s0 + (m - s0) * decay(tau, m)) / m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumReport {
    pub tau: f64,
    pub left: f64,
    pub right: f64,
    pub length: f64,
    pub limit_point: f64,
}

pub fn vacuum_interval(tau: f64, prof: &InitialProfile) -> Result<VacuumReport> {
    let (a0, b0) = match prof.vacuum_set() {
        [] => return Err(Error::NoVacuum),
        [one] => *one,
        many => return Err(Error::MultipleVacuumIntervals(many.len())),
    };
    let m = prof.mass_level();
    Ok(VacuumReport {
        tau,
        left: trajectory_position(a0, tau, prof),
        right: trajectory_position(b0, tau, prof),
        length: (b0 - a0) * decay(tau, m),
        limit_point: prof.limit_position(a0),
    })
}

/// `∂ₓᵏσ` transported to time `tau` along the trajectory from label `x`.
///
/// Vacuum labels: `e^{(k+1)Mτ} ∂ₓᵏσ0(x)`, valid when the lower derivatives vanish.
/// Occupied labels: first order only.
pub fn derivative_along(x: f64, k: u32, tau: f64, prof: &InitialProfile) -> Result<f64> {
    if k == 0 || k > profile::MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder { k });
    }
    let m = prof.mass_level();
    let s0 = prof.sigma0(x);
    if s0 == 0.0 {
        for j in 1..k {
            if prof.derivative(x, j) != 0.0 {
                return Err(Error::PreconditionViolation { x, k });
            }
        }
        let d = prof.derivative(x, k);
        if d.is_nan() {
            return Err(Error::UnsupportedOrder { k });
        }
        return Ok(((k + 1) as f64 * m * tau).exp() * d);
    }
    if k > 1 {
        return Err(Error::UnsupportedOrder { k });
    }
    let e = decay(tau, m);
    let d = s0 + (m - s0) * e;
    Ok(m.powi(3) * e * prof.derivative(x, 1) / d.powi(3))
}

/// Label/position table at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    pub tau: f64,
    pub labels: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma_along: Vec<f64>,
    pub dxeta: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl TrajectoryBundle {
    pub fn new(prof: &InitialProfile, labels: &[f64], tau: f64) -> Result<Self> {
        if labels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter {
                name: "labels",
                reason: "must be strictly increasing".into(),
            });
        }
        let bundle = Self {
            tau,
            labels: labels.to_vec(),
            eta: labels.iter().map(|&x| trajectory_position(x, tau, prof)).collect(),
            sigma_along: labels.iter().map(|&x| sigma_along(x, tau, prof)).collect(),
            dxeta: labels.iter().map(|&x| jacobian_along(x, tau, prof)).collect(),
            velocity: labels.iter().map(|&x| velocity_along(x, tau, prof)).collect(),
        };
        // past e^{−Mτ} ≈ 1e−16 neighbouring vacuum labels may round to the same position
        if let Some(i) = bundle.eta.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InversionFailure(labels[i]));
        }
        Ok(bundle)
    }

    /// Non-decreasing positions and non-negative Jacobian. Past [`HORIZON`] the
    /// vacuum labels share one position and their Jacobian is reported as 0.
    pub fn is_monotone(&self) -> bool {
        self.eta.windows(2).all(|w| w[0] <= w[1]) && self.dxeta.iter().all(|&j| j >= 0.0)
    }
}

/// Label `x` with `η(x, τ) = y`, by bisection to the resolution of `f64`.
pub fn inverse_position(y: f64, tau: f64, prof: &InitialProfile) -> Result<f64> {
    let m = prof.mass_level();
    let shift = (1.0 - decay(tau, m)) * prof.f_bound() / m;
    let mut half = shift + 1e-9 * (1.0 + y.abs());
    let eta = |x: f64| trajectory_position(x, tau, prof);
    let (mut lo, mut hi) = (y - half, y + half);
    let mut tries = 0;
    while !(eta(lo) <= y && eta(hi) >= y) {
        half *= 2.0;
        (lo, hi) = (y - half, y + half);
        tries += 1;
        if tries > 60 {
            return Err(Error::InversionFailure(y));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eta(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(hi - lo <= 1e-12 * (1.0 + y.abs())) {
        return Err(Error::InversionFailure(y));
    }
    Ok(0.5 * (lo + hi))
}

/// Eulerian density `σ(y, τ) = σ∘η(η⁻¹(y), τ)` at the nodes of `grid`.
/// Torus nodes are wrapped to `[−L/2, L/2)` before inversion.
pub fn reconstruct_eulerian(tau: f64, prof: &InitialProfile, grid: Grid) -> Result<KSState> {
    let nodes: Vec<f64> = match grid {
        Grid::Torus { length, .. } => grid.nodes().into_iter().map(|y| profile::wrap(y, length)).collect(),
        Grid::Line { .. } => grid.nodes(),
    };
    let values = nodes
        .iter()
        .map(|&y| inverse_position(y, tau, prof).map(|x| sigma_along(x, tau, prof)))
        .collect::<Result<Vec<_>>>()?;
    Ok(KSState {
        sigma: Field::new(grid, values)?,
        time: tau,
    })
}

/// Measured vacuum gap on a reconstructed field: number of exactly-zero nodes times `h`.
pub fn measured_gap(state: &KSState) -> f64 {
    let zeros = state.sigma.values().iter().filter(|&&s| s == 0.0).count();
    zeros as f64 * state.grid().spacing()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGradientCheck {
    pub tau: f64,
    pub finite_difference: f64,
    pub exact: f64,
    /// `finite_difference / ∂ₓσ0(edge)`; compare with `e^{2Mτ}`.
    pub growth_factor: f64,
    pub relative_error: f64,
}

/// Finite-difference slope of the reconstructed density at the left vacuum edge
/// `a(τ) = η(a0, τ)`, on a window grid of `points` nodes ending at the edge.
/// The window is `window_labels · e^{−2Mτ}` wide, matching the squeeze of the
/// occupied labels next to the edge.
pub fn edge_gradient_fd(
    tau: f64,
    prof: &InitialProfile,
    points: usize,
    window_labels: f64,
) -> Result<EdgeGradientCheck> {
    let report = vacuum_interval(tau, prof)?;
    let (a0, _) = prof.vacuum_set()[0];
    let m = prof.mass_level();
    let width = window_labels * (-2.0 * m * tau).exp();
    let grid = Grid::line(report.left - width, report.left, points)?;
    let field = reconstruct_eulerian(tau, prof, grid)?;
    let s = field.sigma.values();
    let n = s.len();
    let h = grid.spacing();
    let fd = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / (2.0 * h);
    let initial = prof.derivative(a0, 1);
    let exact = derivative_along(a0, 1, tau, prof)?;
    Ok(EdgeGradientCheck {
        tau,
        finite_difference: fd,
        exact,
        growth_factor: fd / initial,
        relative_error: ((fd - exact) / exact).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn ramp(m: f64) -> InitialProfile {
        InitialProfile::vacuum_ramp(1.0, -0.3, 1, 1.0, m).unwrap()
    }

    #[test]
    fn equilibrium_does_not_move() {
        let p = InitialProfile::equilibrium(1.0).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(velocity_along(x, 1.0, &p), 0.0);
            assert_eq!(trajectory_position(x, 7.0, &p), x);
            assert_eq!(sigma_along(x, 2.0, &p), 1.0);
        }
    }

    #[test]
    fn closed_forms_at_ln2() {
        // a label with F = 1: the left vacuum edge of a ramp with F0 = 1
        let p = InitialProfile::vacuum_ramp(1.0, 1.0, 1, 1.0, 1.0).unwrap();
        assert!((velocity_along(0.0, LN_2, &p) - 0.5).abs() < 1e-15);
        assert!((trajectory_position(0.0, LN_2, &p) - 0.5).abs() < 1e-15);
        assert!((trajectory_position(0.0, f64::INFINITY, &p) - 1.0).abs() < 1e-15);
        assert_eq!(velocity_along(0.0, 0.0, &p), p.cumulative(0.0));
        assert!((logistic(0.5, 3f64.ln(), 1.0) - 0.75).abs() < 1e-15);
        assert_eq!(logistic(0.0, 5.0, 1.0), 0.0);
        assert_eq!(logistic(1.0, 5.0, 1.0), 1.0);
    }

    #[test]
    fn vacuum_interval_shrinks() {
        let p = ramp(1.0);
        let r0 = vacuum_interval(0.0, &p).unwrap();
        assert_eq!(r0.length, 1.0);
        let r = vacuum_interval(LN_2, &p).unwrap();
        assert!((r.length - 0.5).abs() < 1e-15);
        assert!((r.right - r.left - r.length).abs() < 1e-14);
        assert!((r.limit_point + 0.3).abs() < 1e-15);
        let c = InitialProfile::cosine(0.3, 1.0, 1.0).unwrap();
        assert_eq!(vacuum_interval(1.0, &c), Err(Error::NoVacuum));
    }

    #[test]
    fn derivative_laws() {
        let p = ramp(1.0);
        let d = derivative_along(1.0, 1, LN_2, &p).unwrap();
        assert!((d - 4.0 * p.derivative(1.0, 1)).abs() < 1e-12);
        let p2 = InitialProfile::vacuum_ramp(1.0, -0.3, 2, 1.0, 1.0).unwrap();
        let d = derivative_along(0.0, 2, LN_2, &p2).unwrap();
        assert!((d - 8.0 * p2.derivative(0.0, 2)).abs() < 1e-12);
        assert_eq!(
            derivative_along(1.0, 2, LN_2, &p),
            Err(Error::PreconditionViolation { x: 1.0, k: 2 })
        );
        assert_eq!(
            derivative_along(-0.5, 2, 1.0, &p),
            Err(Error::UnsupportedOrder { k: 2 })
        );
        assert_eq!(derivative_along(1.0, 0, 1.0, &p), Err(Error::UnsupportedOrder { k: 0 }));
        let late = derivative_along(-0.5, 1, 60.0, &p).unwrap();
        assert_eq!(late, 0.0);
    }

    #[test]
    fn occupied_derivative_matches_label_differences() {
        // ∂ₓσ∘η = (d/dx σ∘η) / ∂ₓη, checked by differencing in label space
        let p = InitialProfile::ricker(0.4, 1.0, 1.0).unwrap();
        let (x, tau, h) = (0.7, 1.3, 1e-5);
        let ds = (sigma_along(x + h, tau, &p) - sigma_along(x - h, tau, &p)) / (2.0 * h);
        let de = (trajectory_position(x + h, tau, &p) - trajectory_position(x - h, tau, &p)) / (2.0 * h);
        assert!((jacobian_along(x, tau, &p) - de).abs() < 1e-8);
        assert!((derivative_along(x, 1, tau, &p).unwrap() - ds / de).abs() < 1e-7);
    }

    #[test]
    fn bundle_is_monotone() {
        let p = ramp(2.0);
        let labels: Vec<f64> = (0..400).map(|i| -4.0 + 0.02 * i as f64).collect();
        for tau in [0.0, 0.5, 3.0, 25.0] {
            assert!(TrajectoryBundle::new(&p, &labels, tau).unwrap().is_monotone());
        }
        assert!(TrajectoryBundle::new(&p, &[1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn inversion_round_trip() {
        let p = ramp(1.0);
        for tau in [0.0, 1.0, 4.0] {
            for x in [-2.5, -0.2, 0.0, 0.4, 1.0, 1.7] {
                let y = trajectory_position(x, tau, &p);
                let back = inverse_position(y, tau, &p).unwrap();
                assert!((trajectory_position(back, tau, &p) - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_of_equilibrium() {
        let p = InitialProfile::equilibrium(1.5).unwrap();
        let s = reconstruct_eulerian(2.0, &p, Grid::line(-1.0, 1.0, 33).unwrap()).unwrap();
        assert!(s.sigma.values().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn reconstructed_gap() {
        let p = ramp(1.0);
        let g = Grid::line(-4.0, 5.0, 4096).unwrap();
        let s = reconstruct_eulerian(3.0, &p, g).unwrap();
        assert!((measured_gap(&s) - (-3.0f64).exp()).abs() <= g.spacing());
    }

    #[test]
    fn edge_gradient_grows() {
        let p = ramp(1.0);
        for tau in [0.0, 1.0, 3.0] {
            let c = edge_gradient_fd(tau, &p, 2048, 0.01).unwrap();
            assert!(c.relative_error < 0.05, "{c:?}");
            assert!(((c.growth_factor / (2.0 * tau).exp()) - 1.0).abs() < 0.05);
        }
    }
}
