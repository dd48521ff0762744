use super::ExperimentSpec;
use crate::characteristics::{
    derivative_along, edge_gradient_fd, measured_gap, reconstruct_eulerian, vacuum_interval, InitialProfile,
    ProfileKind,
};
use crate::csvio::{format_number, Table};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Latest time at which the finite-difference edge check is attempted.
pub const FD_HORIZON: f64 = 3.0;
pub const FD_MIN_POINTS: usize = 2048;
/// FD window width in labels, as a fraction of the ramp width.
pub const FD_WINDOW_FRACTION: f64 = 0.01;
pub const FD_TOLERANCE: f64 = 0.05;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VacuumRow {
    pub tau: f64,
    pub left: f64,
    pub right: f64,
    pub length: f64,
    /// `(b0 − a0) e^{−Mτ}`.
    pub exact_length: f64,
    pub measured_gap: f64,
    pub spacing: f64,
    /// `∂ₓσ` along the edge trajectory over `∂ₓσ0` at the edge; `None` when `∂ₓσ0` vanishes there.
    pub edge_growth: Option<f64>,
    /// `e^{2Mτ}`.
    pub predicted_growth: f64,
    pub order: u32,
    /// Same ratio for the first non-vanishing derivative of order `n`.
    pub order_growth: f64,
    /// `e^{(n+1)Mτ}`.
    pub predicted_order_growth: f64,
    pub fd_growth: Option<f64>,
    pub limit_point: f64,
    /// `a0 + F(a0)/M`.
    pub predicted_limit: f64,
}

impl VacuumRow {
    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    pub fn passes(&self) -> bool {
        (self.length - self.exact_length).abs() <= CLOSED_FORM_TOLERANCE
            && (self.measured_gap - self.exact_length).abs() <= self.spacing
            && self
                .edge_growth
                .is_none_or(|g| Self::rel(g, self.predicted_growth) <= CLOSED_FORM_TOLERANCE)
            && Self::rel(self.order_growth, self.predicted_order_growth) <= CLOSED_FORM_TOLERANCE
            && self
                .fd_growth
                .is_none_or(|g| Self::rel(g, self.predicted_growth) <= FD_TOLERANCE)
            && (self.limit_point - self.predicted_limit).abs() <= CLOSED_FORM_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VacuumCollapseReport {
    pub rows: Vec<VacuumRow>,
}

impl VacuumCollapseReport {
    pub fn verdict(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(VacuumRow::passes)
    }

    pub fn summary(&self) -> String {
        let last = self.rows.last();
        format!(
            "{} times, {} passing; final length {}, limit point {}",
            self.rows.len(),
            self.rows.iter().filter(|r| r.passes()).count(),
            last.map_or("-".into(), |r| format_number(r.length)),
            last.map_or("-".into(), |r| format_number(r.limit_point)),
        )
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "tau",
            "left",
            "right",
            "length",
            "exact_length",
            "measured_gap",
            "spacing",
            "edge_growth",
            "predicted_growth",
            "order",
            "order_growth",
            "predicted_order_growth",
            "fd_growth",
            "limit_point",
            "predicted_limit",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.tau.into(),
                r.left.into(),
                r.right.into(),
                r.length.into(),
                r.exact_length.into(),
                r.measured_gap.into(),
                r.spacing.into(),
                r.edge_growth.map_or("".into(), Into::into),
                r.predicted_growth.into(),
                (r.order as usize).into(),
                r.order_growth.into(),
                r.predicted_order_growth.into(),
                r.fd_growth.map_or("".into(), Into::into),
                r.limit_point.into(),
                r.predicted_limit.into(),
            ]);
        }
        t
    }
}

fn vanishing_order(prof: &InitialProfile) -> u32 {
    match prof.kind() {
        ProfileKind::VacuumRamp { order, .. } => *order,
        _ => 1,
    }
}

/// Line grid wide enough to hold the whole vacuum and its flanks.
fn window_grid(prof: &InitialProfile, points: usize) -> Result<Grid> {
    let (a0, b0) = prof.vacuum_set()[0];
    let (lo, hi) = prof.support().unwrap_or((a0 - 5.0, b0 + 5.0));
    Grid::line(lo.min(a0) - 1.0, hi.max(b0) + 1.0, points)
}

pub fn vacuum_row(prof: &InitialProfile, tau: f64, points: usize) -> Result<VacuumRow> {
    let report = vacuum_interval(tau, prof)?;
    let (a0, b0) = prof.vacuum_set()[0];
    let m = prof.mass_level();
    let grid = window_grid(prof, points)?;
    let state = reconstruct_eulerian(tau, prof, grid)?;
    let n = vanishing_order(prof);
    let fd_growth = if n == 1 && tau <= FD_HORIZON {
        let window = FD_WINDOW_FRACTION * prof.ramp_width().unwrap_or(1.0);
        Some(edge_gradient_fd(tau, prof, points.max(FD_MIN_POINTS), window)?.growth_factor)
    } else {
        None
    };
    Ok(VacuumRow {
        tau,
        left: report.left,
        right: report.right,
        length: report.right - report.left,
        exact_length: (b0 - a0) * (-m * tau).exp(),
        measured_gap: measured_gap(&state),
        spacing: grid.spacing(),
        edge_growth: match n {
            1 => Some(derivative_along(a0, 1, tau, prof)? / prof.derivative(a0, 1)),
            _ => None,
        },
        predicted_growth: (2.0 * m * tau).exp(),
        order: n,
        order_growth: derivative_along(a0, n, tau, prof)? / prof.derivative(a0, n),
        predicted_order_growth: ((n + 1) as f64 * m * tau).exp(),
        fd_growth,
        limit_point: report.limit_point,
        predicted_limit: a0 + prof.cumulative(a0) / m,
    })
}

/// Tracks the single vacuum interval of the configured profile at each sample time.
/// The grid's point count sets the reconstruction resolution.
pub fn run_vacuum_collapse(spec: &ExperimentSpec) -> Result<VacuumCollapseReport> {
    let prof = spec.profile()?;
    if prof.vacuum_set().is_empty() {
        return Err(Error::NoVacuum);
    }
    let points = spec.params.grid.len();
    let rows = spec
        .sample_times()
        .into_iter()
        .map(|tau| vacuum_row(&prof, tau, points))
        .collect::<Result<Vec<_>>>()?;
    Ok(VacuumCollapseReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, ProfileSource};

    #[test]
    fn default_recipe_passes() {
        let spec = ExperimentSpec::new(ExperimentKind::VacuumCollapse);
        let r = run_vacuum_collapse(&spec).unwrap();
        assert_eq!(r.rows.len(), 11);
        assert!(r.verdict(), "{:#?}", r.rows);
        assert!((r.rows[0].limit_point + 0.3).abs() < 1e-15);
        assert!(r.rows.iter().filter(|r| r.fd_growth.is_some()).count() == 7);
    }

    #[test]
    fn higher_order_ramp() {
        let mut spec = ExperimentSpec::new(ExperimentKind::VacuumCollapse);
        spec.profile = ProfileSource::parse("vacuum-ramp(1,0.2,2)").unwrap();
        spec.params.t_end = 2.0;
        spec.samples = 2;
        let r = run_vacuum_collapse(&spec).unwrap();
        let last = r.rows.last().unwrap();
        assert_eq!(last.order, 2);
        assert!((last.order_growth / (6.0f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_profile_has_no_vacuum() {
        let mut spec = ExperimentSpec::new(ExperimentKind::VacuumCollapse);
        spec.profile = ProfileSource::parse("cosine(0.3,1)").unwrap();
        assert_eq!(run_vacuum_collapse(&spec), Err(Error::NoVacuum));
    }
}
