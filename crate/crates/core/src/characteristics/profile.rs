//! Initial densities with closed-form cumulative mass `F(x) = ∫_{−∞}^x (σ0 − M)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Highest derivative order available from a profile.
pub const MAX_DERIVATIVE_ORDER: u32 = 3;

/// Tolerance on `F(+∞)` for sampled profiles, relative to the sampled length.
pub const SAMPLED_MASS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `σ0 ≡ M`.
    Equilibrium,
    /// `σ0 = M + a cos(kx)`; requires `|a| < M`.
    Cosine { a: f64, k: f64 },
    /// `σ0 = M + a (1 − 2x²/s²) e^{−x²/s²}`, so `F = a x e^{−x²/s²}`.
    Ricker { a: f64, s: f64 },
    /// Vacuum on `[0, 1]`, see [`InitialProfile::vacuum_ramp`].
    VacuumRamp {
        width: f64,
        f0: f64,
        order: u32,
        bump: f64,
        left_mass: f64,
        right_mass: f64,
    },
    /// Piecewise-linear data on a line grid; `σ0 = M` outside.
    Sampled {
        grid: Grid,
        values: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialProfile {
    kind: ProfileKind,
    mass_level: f64,
    vacuum_set: Vec<(f64, f64)>,
    f_bound: f64,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidProfile(msg.into()))
}

fn spow(s: f64, e: i32) -> f64 {
    if e < 0 {
        0.0
    } else {
        s.powi(e)
    }
}

/// `d^j/dθ^j sin^n θ` for `j ≤ 3`.
fn sin_power_derivative(n: u32, j: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let nf = n as f64;
    let n = n as i32;
    match j {
        0 => spow(s, n),
        1 => nf * spow(s, n - 1) * c,
        2 => nf * (nf - 1.0) * spow(s, n - 2) * c * c - nf * spow(s, n),
        3 => nf * (nf - 1.0) * (nf - 2.0) * spow(s, n - 3) * c * c * c - nf * (3.0 * nf - 2.0) * spow(s, n - 1) * c,
        _ => unreachable!("derivative order checked by caller"),
    }
}

/// `∫₀^θ sin^n t dt`.
fn sin_power_integral(n: u32, theta: f64) -> f64 {
    match n {
        0 => theta,
        1 => 1.0 - theta.cos(),
        _ => {
            let nf = n as f64;
            -theta.sin().powi(n as i32 - 1) * theta.cos() / nf + (nf - 1.0) / nf * sin_power_integral(n - 2, theta)
        }
    }
}

/// Unit-mass bump `sin²(πy/2r)/r` on `[0, 2r]`: value or derivative.
fn bump_derivative(r: f64, j: u32, y: f64) -> f64 {
    let th = PI * y / r;
    let base = PI / (2.0 * r * r);
    match j {
        0 => (PI * y / (2.0 * r)).sin().powi(2) / r,
        1 => base * th.sin(),
        2 => base * (PI / r) * th.cos(),
        3 => -base * (PI / r).powi(2) * th.sin(),
        _ => unreachable!("derivative order checked by caller"),
    }
}

fn bump_integral(r: f64, y: f64) -> f64 {
    y / (2.0 * r) - (PI * y / r).sin() / (2.0 * PI)
}

impl InitialProfile {
    fn build(kind: ProfileKind, mass_level: f64) -> Result<Self> {
        if !(mass_level > 0.0 && mass_level.is_finite()) {
            return invalid("mass level must be positive");
        }
        let mut p = Self {
            kind,
            mass_level,
            vacuum_set: Vec::new(),
            f_bound: 0.0,
        };
        p.vacuum_set = p.find_vacuum_set();
        p.f_bound = p.estimate_f_bound();
        Ok(p)
    }

    pub fn equilibrium(mass_level: f64) -> Result<Self> {
        Self::build(ProfileKind::Equilibrium, mass_level)
    }

    pub fn cosine(a: f64, k: f64, mass_level: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite() && a.is_finite()) {
            return invalid("cosine needs finite amplitude and positive wavenumber");
        }
        if a.abs() >= mass_level {
            return invalid("cosine amplitude must stay below the mass level");
        }
        Self::build(ProfileKind::Cosine { a, k }, mass_level)
    }

    pub fn ricker(a: f64, s: f64, mass_level: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite() && a.is_finite()) {
            return invalid("ricker needs finite amplitude and positive scale");
        }
        // minimum of (1 − 2u²)e^{−u²} is −2e^{−3/2}
        let min = if a >= 0.0 {
            mass_level - 2.0 * a * (-1.5f64).exp()
        } else {
            mass_level + a
        };
        if min <= 0.0 {
            return invalid("ricker amplitude produces a non-positive density");
        }
        Self::build(ProfileKind::Ricker { a, s }, mass_level)
    }

    /// Vacuum on `[0, 1]` flanked by ramps `M sinⁿ(π d/2w)` over distance `d ≤ w`
    /// from each edge, then unit-mass bumps of width `2r` scaled so that
    /// `F(0) = f0` and `F(+∞) = 0`. The first `n − 1` derivatives vanish at the
    /// edges; the `n`-th is the one-sided value from the occupied side.
    pub fn vacuum_ramp(width: f64, f0: f64, order: u32, bump: f64, mass_level: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && bump > 0.0 && bump.is_finite() && f0.is_finite()) {
            return invalid("vacuum-ramp needs positive width and bump radius and finite F0");
        }
        if !(1..=MAX_DERIVATIVE_ORDER).contains(&order) {
            return invalid(format!("vacuum-ramp order must lie in 1..={MAX_DERIVATIVE_ORDER}"));
        }
        let m = mass_level;
        let ramp_deficit = m * (width - width * 2.0 / PI * sin_power_integral(order, PI / 2.0));
        let left_mass = f0 + ramp_deficit;
        let right_mass = m - f0 + ramp_deficit;
        // the bump peak is mass/r
        if left_mass.min(right_mass) / bump <= -m {
            return invalid("vacuum-ramp bumps would make the density negative; widen the bumps");
        }
        Self::build(
            ProfileKind::VacuumRamp {
                width,
                f0,
                order,
                bump,
                left_mass,
                right_mass,
            },
            mass_level,
        )
    }

    /// Piecewise-linear profile from samples on a line grid.
    pub fn sampled(sigma: &Field, mass_level: f64) -> Result<Self> {
        let grid = *sigma.grid();
        if grid.is_torus() {
            return Err(Error::NotLine);
        }
        let values = sigma.values().to_vec();
        if values.iter().any(|&v| v < 0.0) {
            return invalid("sampled density is negative");
        }
        let h = grid.spacing();
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1] - 2.0 * mass_level);
            cumulative.push(acc);
        }
        let tol = SAMPLED_MASS_TOL * grid.measure();
        if acc.abs() > tol {
            return Err(Error::NonzeroTotalMass {
                defect: acc,
                tolerance: tol,
            });
        }
        Self::build(
            ProfileKind::Sampled {
                grid,
                values,
                cumulative,
            },
            mass_level,
        )
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn mass_level(&self) -> f64 {
        self.mass_level
    }

    /// Maximal closed intervals where `σ0 = 0`, sorted.
    pub fn vacuum_set(&self) -> &[(f64, f64)] {
        &self.vacuum_set
    }

    /// Upper bound on `|F|`.
    pub fn f_bound(&self) -> f64 {
        self.f_bound
    }

    /// Half-width of a vacuum-ramp's transition zone, or `None` for other kinds.
    pub fn ramp_width(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::VacuumRamp { width, .. } => Some(width),
            _ => None,
        }
    }

    /// Interval outside which `σ0 = M`, when it is bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ProfileKind::Equilibrium => Some((0.0, 0.0)),
            &ProfileKind::VacuumRamp { width, bump, .. } => Some((-width - 2.0 * bump, 1.0 + width + 2.0 * bump)),
            ProfileKind::Sampled { grid, .. } => Some((grid.left(), grid.left() + grid.measure())),
            ProfileKind::Cosine { .. } | ProfileKind::Ricker { .. } => None,
        }
    }

    pub fn sigma0(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `∂ₓᵏσ0(x)` for `k ≤ 3`; one-sided from the occupied side at vacuum edges.
    /// Orders above 3 (or above 1 for sampled data) return NaN.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        if k > MAX_DERIVATIVE_ORDER {
            return f64::NAN;
        }
        let m = self.mass_level;
        let base = if k == 0 { m } else { 0.0 };
        match &self.kind {
            ProfileKind::Equilibrium => base,
            &ProfileKind::Cosine { a, k: kw } => {
                let ph = kw * x + k as f64 * PI / 2.0;
                base + a * kw.powi(k as i32) * ph.cos()
            }
            &ProfileKind::Ricker { a, s } => {
                let u = x / s;
                let g = (-u * u).exp();
                let poly = match k {
                    0 => 1.0 - 2.0 * u * u,
                    1 => 4.0 * u.powi(3) - 6.0 * u,
                    2 => -8.0 * u.powi(4) + 24.0 * u * u - 6.0,
                    _ => 16.0 * u.powi(5) - 80.0 * u.powi(3) + 60.0 * u,
                };
                base + a * poly * g / s.powi(k as i32)
            }
            &ProfileKind::VacuumRamp {
                width,
                order,
                bump,
                left_mass,
                right_mass,
                ..
            } => {
                let slope = PI / (2.0 * width);
                if x < -width - 2.0 * bump {
                    base
                } else if x < -width {
                    base + left_mass * bump_derivative(bump, k, x + width + 2.0 * bump)
                } else if x <= 0.0 {
                    m * sin_power_derivative(order, k, -x * slope) * (-slope).powi(k as i32)
                } else if x < 1.0 {
                    0.0
                } else if x <= 1.0 + width {
                    m * sin_power_derivative(order, k, (x - 1.0) * slope) * slope.powi(k as i32)
                } else if x < 1.0 + width + 2.0 * bump {
                    base + right_mass * bump_derivative(bump, k, x - 1.0 - width)
                } else {
                    base
                }
            }
            ProfileKind::Sampled { grid, values, .. } => {
                if k > 1 {
                    return f64::NAN;
                }
                let (left, h) = (grid.left(), grid.spacing());
                let n = values.len();
                let t = (x - left) / h;
                if t < 0.0 || t > (n - 1) as f64 {
                    return base;
                }
                let i = (t.floor() as usize).min(n - 2);
                let frac = t - i as f64;
                if k == 0 {
                    values[i] + frac * (values[i + 1] - values[i])
                } else {
                    (values[i + 1] - values[i]) / h
                }
            }
        }
    }

    /// `F(x) = ∫_{−∞}^x (σ0(y) − M) dy`; for periodic kinds, the zero-mean antiderivative.
    pub fn cumulative(&self, x: f64) -> f64 {
        let m = self.mass_level;
        match &self.kind {
            ProfileKind::Equilibrium => 0.0,
            &ProfileKind::Cosine { a, k } => a * (k * x).sin() / k,
            &ProfileKind::Ricker { a, s } => a * x * (-(x / s).powi(2)).exp(),
            &ProfileKind::VacuumRamp {
                width,
                f0,
                order,
                bump,
                left_mass,
                right_mass,
            } => {
                let ramp = |d: f64| width * 2.0 / PI * sin_power_integral(order, PI * d / (2.0 * width));
                let full = ramp(width);
                if x < -width - 2.0 * bump {
                    0.0
                } else if x < -width {
                    left_mass * bump_integral(bump, x + width + 2.0 * bump)
                } else if x <= 0.0 {
                    left_mass - m * (x + width) + m * (full - ramp(-x))
                } else if x < 1.0 {
                    f0 - m * x
                } else if x <= 1.0 + width {
                    f0 - m + m * ramp(x - 1.0) - m * (x - 1.0)
                } else if x < 1.0 + width + 2.0 * bump {
                    f0 - m - m * (width - full) + right_mass * bump_integral(bump, x - 1.0 - width)
                } else {
                    0.0
                }
            }
            ProfileKind::Sampled {
                grid,
                values,
                cumulative,
            } => {
                let (left, h) = (grid.left(), grid.spacing());
                let n = values.len();
                let t = (x - left) / h;
                if t <= 0.0 {
                    return 0.0;
                }
                if t >= (n - 1) as f64 {
                    return cumulative[n - 1];
                }
                let i = t.floor() as usize;
                let d = x - (left + i as f64 * h);
                let slope = (values[i + 1] - values[i]) / h;
                cumulative[i] + d * (values[i] - m) + 0.5 * slope * d * d
            }
        }
    }

    /// `x + F(x)/M`, where the trajectory from `x` settles as `τ → ∞`.
    pub fn limit_position(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::VacuumRamp { f0, .. } if (0.0..=1.0).contains(&x) => f0 / self.mass_level,
            _ => x + self.cumulative(x) / self.mass_level,
        }
    }

    fn find_vacuum_set(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            ProfileKind::VacuumRamp { .. } => vec![(0.0, 1.0)],
            ProfileKind::Sampled { grid, values, .. } => {
                let mut out = Vec::new();
                let mut start: Option<usize> = None;
                for (i, &v) in values.iter().enumerate() {
                    match (v == 0.0, start) {
                        (true, None) => start = Some(i),
                        (false, Some(s)) => {
                            out.push((grid.node(s), grid.node(i - 1)));
                            start = None;
                        }
                        _ => {}
                    }
                }
                if let Some(s) = start {
                    out.push((grid.node(s), grid.node(values.len() - 1)));
                }
                out
            }
            _ => Vec::new(),
        }
    }

    fn estimate_f_bound(&self) -> f64 {
        match &self.kind {
            ProfileKind::Equilibrium => 0.0,
            &ProfileKind::Cosine { a, k } => a.abs() / k,
            &ProfileKind::Ricker { a, s } => a.abs() * s * (-0.5f64).exp() / 2f64.sqrt(),
            &ProfileKind::VacuumRamp { width, bump, .. } => {
                let (lo, hi) = (-width - 2.0 * bump, 1.0 + width + 2.0 * bump);
                (0..=4096)
                    .map(|i| self.cumulative(lo + (hi - lo) * i as f64 / 4096.0).abs())
                    .fold(0.0, f64::max)
                    + self.mass_level * (hi - lo) / 4096.0
            }
            ProfileKind::Sampled {
                cumulative,
                values,
                grid,
            } => {
                cumulative.iter().fold(0.0f64, |a, c| a.max(c.abs()))
                    + values.iter().fold(0.0f64, |a, v| a.max((v - self.mass_level).abs())) * grid.spacing()
            }
        }
    }

    /// Whether `x` is a vacuum label (`σ0(x) = 0`).
    pub fn is_vacuum(&self, x: f64) -> bool {
        self.vacuum_set.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Samples σ0 on a grid. On a torus the coordinate is wrapped to `[−L/2, L/2)`.
    pub fn sample_on(&self, grid: Grid) -> Result<Field> {
        match grid {
            Grid::Torus { length, .. } => {
                if let ProfileKind::Cosine { k, .. } = self.kind {
                    let periods = k * length / (2.0 * PI);
                    if (periods - periods.round()).abs() > 1e-9 || periods.round() < 1.0 {
                        return invalid("cosine wavenumber is not periodic on the torus");
                    }
                }
                Field::from_fn(grid, |x| self.sigma0(wrap(x, length)))
            }
            Grid::Line { .. } => Field::from_fn(grid, |x| self.sigma0(x)),
        }
    }
}

/// Maps `x` into `[−L/2, L/2)`.
pub fn wrap(x: f64, length: f64) -> f64 {
    x - length * (x / length + 0.5).floor()
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProfileKind::Equilibrium => write!(f, "equilibrium"),
            ProfileKind::Cosine { a, k } => write!(f, "cosine({a},{k})"),
            ProfileKind::Ricker { a, s } => write!(f, "ricker({a},{s})"),
            ProfileKind::VacuumRamp {
                width, f0, order, bump, ..
            } => write!(f, "vacuum-ramp({width},{f0},{order},{bump})"),
            ProfileKind::Sampled { values, .. } => write!(f, "sampled({} points)", values.len()),
        }
    }
}

/// A profile name with its arguments, e.g. `cosine(0.3,1)`, before the mass level is known.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub name: String,
    pub args: Vec<f64>,
}

impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            None => (s, Vec::new()),
            Some(open) => {
                let Some(body) = s[open + 1..].strip_suffix(')') else {
                    return invalid(format!("unbalanced parentheses in '{s}'"));
                };
                let args = if body.trim().is_empty() {
                    Vec::new()
                } else {
                    body.split(',')
                        .map(|a| {
                            a.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::InvalidProfile(format!("bad argument '{a}' in '{s}'")))
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                (&s[..open], args)
            }
        };
        let spec = ProfileSpec {
            name: name.trim().to_string(),
            args,
        };
        spec.check_arity()?;
        Ok(spec)
    }
}

impl ProfileSpec {
    fn check_arity(&self) -> Result<()> {
        let n = self.args.len();
        let ok = match self.name.as_str() {
            "equilibrium" => n == 0,
            "cosine" | "ricker" => n == 2,
            "vacuum-ramp" => (2..=4).contains(&n),
            other => return invalid(format!("unknown profile '{other}'")),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("wrong number of arguments for '{}'", self.name))
        }
    }

    pub fn build(&self, mass_level: f64) -> Result<InitialProfile> {
        let a = &self.args;
        match self.name.as_str() {
            "equilibrium" => InitialProfile::equilibrium(mass_level),
            "cosine" => InitialProfile::cosine(a[0], a[1], mass_level),
            "ricker" => InitialProfile::ricker(a[0], a[1], mass_level),
            "vacuum-ramp" => {
                let order = a.get(2).copied().unwrap_or(1.0);
                if order.fract() != 0.0 || order < 1.0 {
                    return invalid("vacuum-ramp order must be a positive integer");
                }
                InitialProfile::vacuum_ramp(a[0], a[1], order as u32, a.get(3).copied().unwrap_or(1.0), mass_level)
            }
            other => invalid(format!("unknown profile '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(order: u32, m: f64) -> InitialProfile {
        InitialProfile::vacuum_ramp(1.0, -0.3, order, 1.0, m).unwrap()
    }

    /// Composite Simpson quadrature of σ0 − M from `lo` to `x`, split at the
    /// kinks of the unit-width ramp profiles.
    fn quad(p: &InitialProfile, lo: f64, x: f64) -> f64 {
        let mut cuts = vec![lo];
        cuts.extend(
            [-3.0, -1.0, 0.0, 1.0, 2.0, 4.0]
                .into_iter()
                .filter(|&c| c > lo && c < x),
        );
        cuts.push(x);
        cuts.windows(2).map(|w| simpson(p, w[0], w[1])).sum()
    }

    fn simpson(p: &InitialProfile, lo: f64, x: f64) -> f64 {
        let n = 2_000;
        let h = (x - lo) / n as f64;
        let f = |t: f64| p.sigma0(t) - p.mass_level();
        let mut s = f(lo) + f(x);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn sin_power_integral_matches_quadrature() {
        for n in 0..=4 {
            let th = 1.3;
            let m = 10_000;
            let h = th / m as f64;
            let q: f64 = (0..m).map(|i| ((i as f64 + 0.5) * h).sin().powi(n as i32) * h).sum();
            assert!((sin_power_integral(n, th) - q).abs() < 1e-8);
        }
    }

    #[test]
    fn vacuum_ramp_cumulative_is_consistent() {
        for order in 1..=3 {
            for m in [0.5, 1.0, 2.0] {
                let p = ramp(order, m);
                assert!((p.cumulative(0.0) + 0.3).abs() < 1e-14);
                assert_eq!(p.cumulative(100.0), 0.0);
                let lo = -4.0;
                for x in [-2.5, -1.7, -0.4, 0.0, 0.5, 1.0, 1.6, 2.2, 3.4, 5.0] {
                    assert!(
                        (p.cumulative(x) - quad(&p, lo, x)).abs() < 1e-9,
                        "order {order} m {m} x {x} err {}",
                        p.cumulative(x) - quad(&p, lo, x)
                    );
                }
                assert!(p.cumulative(4.0 + 1e-12).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_ramp_edges() {
        let p = ramp(1, 1.0);
        assert_eq!(p.sigma0(0.0), 0.0);
        assert_eq!(p.sigma0(1.0), 0.0);
        assert_eq!(p.sigma0(0.5), 0.0);
        assert!((p.derivative(1.0, 1) - PI / 2.0).abs() < 1e-15);
        assert!((p.derivative(0.0, 1) + PI / 2.0).abs() < 1e-15);
        assert_eq!(p.vacuum_set(), &[(0.0, 1.0)]);

        let p = ramp(2, 1.0);
        assert_eq!(p.derivative(1.0, 1), 0.0);
        assert!((p.derivative(1.0, 2) - 2.0 * (PI / 2.0).powi(2)).abs() < 1e-14);
        let p = ramp(3, 1.0);
        assert_eq!(p.derivative(1.0, 2), 0.0);
        assert!((p.derivative(1.0, 3) - 6.0 * (PI / 2.0).powi(3)).abs() < 1e-13);
        assert!((p.derivative(0.0, 3) + 6.0 * (PI / 2.0).powi(3)).abs() < 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            ramp(1, 1.0),
            ramp(2, 2.0),
            ramp(3, 0.5),
            InitialProfile::cosine(0.3, 2.0, 1.0).unwrap(),
            InitialProfile::ricker(0.5, 1.3, 1.0).unwrap(),
        ];
        let h = 1e-4;
        for p in &profiles {
            for x in [-2.3, -1.2, -0.6, 1.3, 1.9, 2.6, 0.3] {
                for k in 1..=3 {
                    let fd = (p.derivative(x + h, k - 1) - p.derivative(x - h, k - 1)) / (2.0 * h);
                    let scale = 1.0 + p.derivative(x, k).abs();
                    assert!((fd - p.derivative(x, k)).abs() < 1e-5 * scale, "{p} x={x} k={k}");
                }
            }
        }
    }

    #[test]
    fn ricker_cumulative() {
        let p = InitialProfile::ricker(0.4, 1.0, 1.0).unwrap();
        for x in [-1.0, 0.3, 2.0] {
            assert!((p.cumulative(x) - quad(&p, -12.0, x)).abs() < 1e-10);
        }
        assert!(
            p.f_bound()
                >= (0..100)
                    .map(|i| p.cumulative(i as f64 * 0.05).abs())
                    .fold(0.0, f64::max)
        );
    }

    #[test]
    fn sampled_profile() {
        let g = Grid::line(-5.0, 5.0, 2001).unwrap();
        let r = InitialProfile::ricker(0.4, 1.0, 1.0).unwrap();
        let p = InitialProfile::sampled(&r.sample_on(g).unwrap(), 1.0).unwrap();
        for x in [-1.0, 0.3, 2.0] {
            assert!((p.cumulative(x) - r.cumulative(x)).abs() < 1e-5);
            assert!((p.sigma0(x) - r.sigma0(x)).abs() < 1e-5);
        }
        let v = Field::from_fn(g, |x| if (0.0..=1.0).contains(&x) { 0.0 } else { 1.0 }).unwrap();
        assert!(matches!(
            InitialProfile::sampled(&v, 1.0),
            Err(Error::NonzeroTotalMass { .. })
        ));
    }

    #[test]
    fn sampled_vacuum_runs() {
        let g = Grid::line(0.0, 8.0, 9).unwrap();
        let f = Field::new(g, vec![1.0, 0.0, 0.0, 2.0, 2.0, 1.0, 0.0, 2.0, 1.0]).unwrap();
        let p = InitialProfile::sampled(&f, 1.0).unwrap();
        assert_eq!(p.vacuum_set(), &[(1.0, 2.0), (6.0, 6.0)]);
    }

    #[test]
    fn parse_names() {
        let s: ProfileSpec = "cosine(0.3, 1)".parse().unwrap();
        assert_eq!(s.args, vec![0.3, 1.0]);
        assert!(matches!(s.build(1.0).unwrap().kind(), ProfileKind::Cosine { .. }));
        let v: ProfileSpec = "vacuum-ramp(1,-0.3)".parse().unwrap();
        assert_eq!(v.build(1.0).unwrap().vacuum_set().len(), 1);
        assert!("equilibrium".parse::<ProfileSpec>().is_ok());
        assert!("cosine(0.3)".parse::<ProfileSpec>().is_err());
        assert!("nope(1)".parse::<ProfileSpec>().is_err());
        assert!("cosine(0.3,x)".parse::<ProfileSpec>().is_err());
        assert!("cosine(2,1)".parse::<ProfileSpec>().unwrap().build(1.0).is_err());
    }

    #[test]
    fn torus_sampling_checks_period() {
        let g = Grid::periodic(32).unwrap();
        assert!(InitialProfile::cosine(0.3, 1.5, 1.0).unwrap().sample_on(g).is_err());
        let f = InitialProfile::cosine(0.3, 1.0, 1.0).unwrap().sample_on(g).unwrap();
        assert!((f.values()[0] - 1.3).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrap_lands_in_half_open_window(x in -100.0f64..100.0, l in 0.5f64..20.0) {
            let y = wrap(x, l);
            prop_assert!(y >= -l / 2.0 && y < l / 2.0 + 1e-12);
            let k = ((x - y) / l).round();
            prop_assert!((x - y - k * l).abs() < 1e-9);
        }
    }
}
