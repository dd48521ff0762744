use std::f64::consts::LN_10;

use super::ExperimentSpec;
use crate::csvio::{format_number, Cell, Table};
use crate::diagnostics::{fit_exponential_rate, DiagnosticsRecord, RateFit};
use crate::ep::simulate_ep;
use crate::error::Result;
use crate::ks::simulate_ks;

pub const MIN_R_SQUARED: f64 = 0.99;
/// Fraction of `min{min σ0, M}` the Keller–Segel sup-norm rate must reach.
pub const KS_RATE_FRACTION: f64 = 0.9;
/// Earliest fit start for either solver.
pub const FIT_START: f64 = 0.5;
/// Signals below this are treated as an already-settled equilibrium.
const ZERO_SIGNAL: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub enum FitStatus {
    Fitted(RateFit),
    /// The quantity vanishes on the whole window.
    ZeroSignal,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub solver: &'static str,
    pub quantity: &'static str,
    pub window: (f64, f64),
    /// Smallest acceptable rate.
    pub threshold: f64,
    pub status: FitStatus,
}

impl FitRow {
    pub fn passes(&self) -> bool {
        match &self.status {
            FitStatus::Fitted(f) => f.rate > self.threshold && f.r_squared >= MIN_R_SQUARED,
            FitStatus::ZeroSignal => true,
            FitStatus::Failed(_) => false,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        match &self.status {
            FitStatus::Fitted(f) => Some(f.rate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<FitRow>,
    /// Per-sample diagnostics of both runs, for plotting.
    pub series: Table,
    pub max_mass_defect: f64,
    pub rho_range: (f64, f64),
}

impl DecayReport {
    pub fn verdict(&self) -> bool {
        self.rows.iter().all(FitRow::passes)
    }

    pub fn row(&self, solver: &str, quantity: &str) -> Option<&FitRow> {
        self.rows.iter().find(|r| r.solver == solver && r.quantity == quantity)
    }

    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let rate = r.rate().map_or("-".into(), format_number);
                format!("{}:{} {}", r.solver, r.quantity, rate)
            })
            .collect();
        format!("rates {}", parts.join(", "))
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "solver",
            "quantity",
            "window_start",
            "window_end",
            "rate",
            "r_squared",
            "samples",
            "threshold",
            "status",
        ]);
        for r in &self.rows {
            let (rate, r2, n, status) = match &r.status {
                FitStatus::Fitted(f) => (
                    Cell::Num(f.rate),
                    Cell::Num(f.r_squared),
                    Cell::from(f.samples),
                    if r.passes() { "ok" } else { "weak" }.to_string(),
                ),
                FitStatus::ZeroSignal => ("".into(), "".into(), "".into(), "zero signal".into()),
                FitStatus::Failed(m) => ("".into(), "".into(), "".into(), format!("failed: {m}")),
            };
            t.push(vec![
                r.solver.into(),
                r.quantity.into(),
                r.window.0.into(),
                r.window.1.into(),
                rate,
                r2,
                n,
                r.threshold.into(),
                Cell::Text(status),
            ]);
        }
        t
    }
}

fn fit(
    solver: &'static str,
    quantity: &'static str,
    series: &[(f64, f64)],
    window: (f64, f64),
    threshold: f64,
) -> FitRow {
    let inside = series.iter().filter(|&&(t, _)| t >= window.0 && t <= window.1);
    let status = if inside.clone().all(|&(_, y)| y.abs() < ZERO_SIGNAL) && inside.count() > 0 {
        FitStatus::ZeroSignal
    } else {
        match fit_exponential_rate(series, window) {
            Ok(f) => FitStatus::Fitted(f),
            Err(e) => FitStatus::Failed(e.to_string()),
        }
    };
    FitRow {
        solver,
        quantity,
        window,
        threshold,
        status,
    }
}

type Column = fn(&DiagnosticsRecord) -> f64;

fn column(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.tau, f(r))).collect()
}

/// Fits post-layer decay rates of the Euler–Poisson energy and deviation norms,
/// and of the Keller–Segel sup-norm deviation, from the same initial density.
pub fn run_decay_fit(spec: &ExperimentSpec) -> Result<DecayReport> {
    spec.validate()?;
    let p = &spec.params;
    let (rho0, w0) = spec.initial_fields()?;
    let times = spec.sample_times();
    let t_end = p.t_end;
    // friction damps w by 10 per ln(10)·ε^{2−α}; five decades clears the layer
    let ep_window = (FIT_START.max(5.0 * p.layer_time() * LN_10), t_end);
    let ks_window = (FIT_START, t_end);
    let ks_threshold = KS_RATE_FRACTION * rho0.min().min(p.mass_level);

    let mut rows = Vec::new();
    let mut series = Table::new(&[
        "solver",
        "tau",
        "e_total",
        "sup_dev",
        "grad_l4",
        "w_l2",
        "mass_defect",
        "rho_min",
        "rho_max",
    ]);
    let mut max_mass_defect: f64 = 0.0;
    let mut rho_range = (f64::INFINITY, f64::NEG_INFINITY);

    let ep = simulate_ep(&rho0, &w0, p, &times)?;
    let ep_records = ep.records();
    let ks = simulate_ks(&rho0, p, &times)?;
    let ks_records = ks.records();
    for (solver, records) in [("ep", &ep_records), ("ks", &ks_records)] {
        for r in records.iter() {
            max_mass_defect = max_mass_defect.max(r.mass_defect.abs());
            if solver == "ep" {
                rho_range = (rho_range.0.min(r.rho_min), rho_range.1.max(r.rho_max));
            }
            series.push(vec![
                solver.into(),
                r.tau.into(),
                r.e_total.into(),
                r.sup_dev.into(),
                r.grad_l4.into(),
                r.w_l2.into(),
                r.mass_defect.into(),
                r.rho_min.into(),
                r.rho_max.into(),
            ]);
        }
    }

    let broken = |e: &crate::error::Error, solver, quantity, window, threshold| FitRow {
        solver,
        quantity,
        window,
        threshold,
        status: FitStatus::Failed(e.to_string()),
    };
    let ep_quantities: [(&str, Column); 3] = [
        ("e_total", |r| r.e_total),
        ("sup_dev", |r| r.sup_dev),
        ("grad_l4", |r| r.grad_l4),
    ];
    for (name, f) in ep_quantities {
        rows.push(match &ep.failure {
            Some(e) => broken(e, "ep", name, ep_window, 0.0),
            None => fit("ep", name, &column(&ep_records, f), ep_window, 0.0),
        });
    }
    rows.push(match &ks.failure {
        Some(e) => broken(e, "ks", "sup_dev", ks_window, ks_threshold),
        None => fit(
            "ks",
            "sup_dev",
            &column(&ks_records, |r| r.sup_dev),
            ks_window,
            ks_threshold,
        ),
    });
    Ok(DecayReport {
        rows,
        series,
        max_mass_defect,
        rho_range,
    })
}
