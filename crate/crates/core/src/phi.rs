//! Scalar φ-functions of exponential integrators,
//! `φ₀(z) = eᶻ`, `φₖ(z) = (φₖ₋₁(z) − 1/(k−1)!)/z`.

const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 24;

fn series(z: f64, k: usize) -> f64 {
    // Σ_m z^m / (m+k)!
    let mut fact = (1..=k).fold(1.0, |a, i| a * i as f64);
    let mut term = 1.0 / fact;
    let mut sum = term;
    for m in 1..SERIES_TERMS {
        fact = (m + k) as f64;
        term *= z / fact;
        sum += term;
    }
    sum
}

pub fn phi1(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        series(z, 1)
    } else {
        z.exp_m1() / z
    }
}

pub fn phi2(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        series(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

pub fn phi3(z: f64) -> f64 {
    if z.abs() < SERIES_RADIUS {
        series(z, 3)
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}
