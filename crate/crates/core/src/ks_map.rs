//! The Keller–Segel map `ρ ↦ v_ρ = −∂ₓ(−∂ₓₓ)⁻¹(ρ − M)`.
//!
//! In one dimension `∂ₓ v_ρ = ρ − M`. On the torus `v_ρ` is the zero-mean
//! periodic antiderivative; on the line it is the running integral from the
//! left end.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct KSVelocity {
    pub v: Field,
    /// Mean of `ρ − M` removed before inversion (torus), or the total
    /// integral of `σ − M` (line).
    pub source_mean_defect: f64,
}

/// Relative tolerance on the total mass defect accepted by [`ks_map_line`].
pub const LINE_MASS_TOL: f64 = 1e-8;

pub fn ks_map_torus(rho: &Field, mass_level: f64) -> Result<KSVelocity> {
    let spectral = Spectral::new(rho.grid())?;
    ks_map_torus_with(&spectral, rho, mass_level)
}

/// Same as [`ks_map_torus`] with a prepared transform.
pub fn ks_map_torus_with(spectral: &Spectral, rho: &Field, mass_level: f64) -> Result<KSVelocity> {
    if !rho.grid().is_torus() {
        return Err(Error::NotTorus);
    }
    if rho.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(" in Keller-Segel source".into()));
    }
    let (v, defect) = velocity_values(spectral, rho.values(), mass_level);
    Ok(KSVelocity {
        v: Field::from_raw(*rho.grid(), v),
        source_mean_defect: defect,
    })
}

pub(crate) fn velocity_values(spectral: &Spectral, rho: &[f64], mass_level: f64) -> (Vec<f64>, f64) {
    let source: Vec<f64> = rho.iter().map(|r| r - mass_level).collect();
    spectral.antiderivative(&source)
}

pub fn ks_map_line(sigma: &Field, mass_level: f64) -> Result<KSVelocity> {
    let grid = *sigma.grid();
    if !matches!(grid, Grid::Line { .. }) {
        return Err(Error::NotLine);
    }
    let h = grid.spacing();
    let s = sigma.values();
    let mut v = Vec::with_capacity(s.len());
    let mut acc = 0.0;
    v.push(0.0);
    for i in 1..s.len() {
        acc += 0.5 * h * ((s[i - 1] - mass_level) + (s[i] - mass_level));
        v.push(acc);
    }
    let tolerance = LINE_MASS_TOL * grid.measure();
    if acc.abs() > tolerance || !acc.is_finite() {
        return Err(Error::NonzeroTotalMass { defect: acc, tolerance });
    }
    Ok(KSVelocity {
        v: Field::from_raw(grid, v),
        source_mean_defect: acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::mean;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Grid {
        Grid::periodic(n).unwrap()
    }

    #[test]
    fn cosine_source_gives_sine_velocity() {
        let g = torus(64);
        let rho = Field::from_fn(g, |x| 1.0 + x.cos()).unwrap();
        let v = ks_map_torus(&rho, 1.0).unwrap();
        for (x, vi) in g.nodes().iter().zip(v.v.values()) {
            assert!((vi - x.sin()).abs() < 1e-14);
        }
        assert!(v.source_mean_defect.abs() < 1e-15);
    }

    #[test]
    fn second_mode() {
        let g = torus(64);
        let rho = Field::from_fn(g, |x| 1.0 + (2.0 * x).sin()).unwrap();
        let v = ks_map_torus(&rho, 1.0).unwrap();
        for (x, vi) in g.nodes().iter().zip(v.v.values()) {
            assert!((vi + 0.5 * (2.0 * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn equilibrium_has_zero_velocity() {
        let g = torus(32);
        let v = ks_map_torus(&Field::constant(g, 1.3), 1.3).unwrap();
        assert!(v.v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mean_defect_is_projected_and_reported() {
        let g = torus(32);
        let rho = Field::from_fn(g, |x| 1.2 + x.cos()).unwrap();
        let v = ks_map_torus(&rho, 1.0).unwrap();
        assert!((v.source_mean_defect - 0.2).abs() < 1e-14);
        assert!(mean(&v.v).abs() < 1e-14);
    }

    #[test]
    fn torus_map_rejects_line() {
        let g = Grid::line(0.0, 1.0, 16).unwrap();
        assert_eq!(ks_map_torus(&Field::constant(g, 1.0), 1.0), Err(Error::NotTorus));
        assert_eq!(ks_map_line(&Field::constant(torus(16), 1.0), 1.0), Err(Error::NotLine));
    }

    #[test]
    fn line_sine_source() {
        // σ − M = −sin x on [0, 2π], zero outside.
        let g = Grid::line(-2.0, 2.0 * PI + 2.0, 4097).unwrap();
        let src = |x: f64| if (0.0..=2.0 * PI).contains(&x) { -x.sin() } else { 0.0 };
        let sigma = Field::from_fn(g, |x| 1.0 + src(x)).unwrap();
        let v = ks_map_line(&sigma, 1.0).unwrap();
        let h = g.spacing();
        for (x, vi) in g.nodes().iter().zip(v.v.values()) {
            let exact = if (0.0..=2.0 * PI).contains(x) {
                x.cos() - 1.0
            } else {
                0.0
            };
            assert!((vi - exact).abs() < 2.0 * h * h + 2.0 * h * 1e-3, "x={x}");
        }
        assert!(v.v.values().last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn line_equilibrium() {
        let g = Grid::line(0.0, 1.0, 33).unwrap();
        let v = ks_map_line(&Field::constant(g, 2.0), 2.0).unwrap();
        assert!(v.v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn line_mollified_steps() {
        // χ[0,1] − χ[1,2] smoothed over a width δ; the exact antiderivative of the
        // smoothed steps is the piecewise-linear tent smoothed the same way.
        let delta = 0.02;
        let step = |x: f64| 0.5 * (1.0 + (x / delta).tanh());
        let src = move |x: f64| step(x) - 2.0 * step(x - 1.0) + step(x - 2.0);
        let g = Grid::line(-1.0, 3.0, 8001).unwrap();
        let sigma = Field::from_fn(g, |x| 1.0 + src(x)).unwrap();
        let v = ks_map_line(&sigma, 1.0).unwrap();
        let ramp = move |y: f64| 0.5 * (y + delta * (y / delta).cosh().ln() + delta * 2f64.ln());
        let exact = |x: f64| ramp(x) - 2.0 * ramp(x - 1.0) + ramp(x - 2.0);
        let nodes = g.nodes();
        // trapezoid error near a layer: h²/12 · |Δσ'| with σ' up to 1/(2δ) per step
        let tol = 0.25 * g.spacing().powi(2) / delta;
        for (x, vi) in nodes.iter().zip(v.v.values()) {
            assert!((vi - exact(*x)).abs() < tol, "x={x}");
        }
        let (imax, vmax) =
            v.v.values()
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert!((nodes[imax] - 1.0).abs() < 2.0 * g.spacing());
        // smoothing shaves δ·ln 2 off the sharp peak value 1
        assert!((vmax - (1.0 - delta * 2f64.ln())).abs() < tol);
        let at2 = v.v.values()[nodes.iter().position(|&x| x >= 2.2).unwrap()];
        assert!(at2.abs() < tol);
    }

    #[test]
    fn line_rejects_nonzero_total_mass() {
        let g = Grid::line(0.0, 1.0, 33).unwrap();
        let sigma = Field::constant(g, 1.1);
        assert!(matches!(ks_map_line(&sigma, 1.0), Err(Error::NonzeroTotalMass { .. })));
    }

    proptest! {
        #[test]
        fn torus_map_is_linear_and_consistent(
            a in prop::collection::vec(-1.0f64..1.0, 6),
            b in prop::collection::vec(-1.0f64..1.0, 6),
            s in -3.0f64..3.0,
        ) {
            let g = torus(64);
            let spec = Spectral::new(&g).unwrap();
            let mode = |c: &[f64], x: f64| {
                c.iter().enumerate().map(|(j, cj)| {
                    let k = (j / 2 + 1) as f64;
                    if j % 2 == 0 { cj * (k * x).cos() } else { cj * (k * x).sin() }
                }).sum::<f64>()
            };
            let fa = Field::from_fn(g, |x| 1.0 + mode(&a, x)).unwrap();
            let fb = Field::from_fn(g, |x| 1.0 + mode(&b, x)).unwrap();
            let va = ks_map_torus(&fa, 1.0).unwrap().v;
            let vb = ks_map_torus(&fb, 1.0).unwrap().v;
            let fc = fa.zip_with(&fb, |p, q| 1.0 + (p - 1.0) + s * (q - 1.0)).unwrap();
            let vc = ks_map_torus(&fc, 1.0).unwrap().v;
            let scale = 1.0 + va.sup_norm() + s.abs() * vb.sup_norm();
            for i in 0..g.len() {
                let lin = va.values()[i] + s * vb.values()[i];
                prop_assert!((vc.values()[i] - lin).abs() <= 1e-13 * scale);
            }
            prop_assert!(mean(&va).abs() <= 1e-12);
            let dv = spec.derivative(va.values(), 1);
            for (d, f) in dv.iter().zip(fa.values()) {
                prop_assert!((d - (f - 1.0)).abs() <= 1e-10);
            }
        }
    }
}
