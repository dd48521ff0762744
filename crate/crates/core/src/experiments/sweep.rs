use rayon::prelude::*;

use super::ExperimentSpec;
use crate::csvio::{Cell, Table};
use crate::diagnostics::norms;
use crate::ep::simulate_ep;
use crate::error::Result;
use crate::grid::Field;
use crate::ks::simulate_ks;
use crate::params::ParamSet;
use crate::state::KSState;

/// Step bound for the shared Keller–Segel reference.
const REFERENCE_DT_MAX: f64 = 1e-3;
/// Samples placed in the initial layer `[0, 5ε^{2−α}]` of each run.
const LAYER_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `sup_τ ‖ρ_ε − σ‖_{L²}` over the common sample times.
    pub sup_l2_error: f64,
    /// Discrete `H²` norm of `ρ_ε − σ` at `t_end`.
    pub h2_error_at_end: f64,
    pub sup_w: f64,
    /// `sup ‖ε^{α/2} w‖_{L²}` over the initial layer `[0, 5ε^{2−α}]`.
    pub layer_sup_w: f64,
    pub steps: usize,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_l2_error).collect()
    }

    /// Errors strictly decreasing along the ε list (or identically zero).
    pub fn monotone(&self) -> bool {
        let e = self.errors();
        e.iter().all(|&x| x == 0.0) || e.windows(2).all(|w| w[1] < w[0])
    }

    /// Error at the last ε over the error at the first.
    pub fn final_ratio(&self) -> f64 {
        let e = self.errors();
        e[e.len() - 1] / e[0]
    }

    pub fn verdict(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Ok) && self.monotone()
    }

    pub fn summary(&self) -> String {
        format!(
            "{} rows, monotone = {}, final/first error = {}",
            self.rows.len(),
            self.monotone(),
            crate::csvio::format_number(self.final_ratio())
        )
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "epsilon",
            "sup_l2_error",
            "h2_error_at_end",
            "sup_w_l2",
            "layer_sup_w_l2",
            "steps",
            "status",
        ]);
        for r in &self.rows {
            let status = match &r.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Failed(m) => format!("failed: {m}"),
            };
            t.push(vec![
                r.epsilon.into(),
                r.sup_l2_error.into(),
                r.h2_error_at_end.into(),
                r.sup_w.into(),
                r.layer_sup_w.into(),
                r.steps.into(),
                Cell::Text(status),
            ]);
        }
        t
    }
}

fn l2_distance(a: &Field, b: &Field) -> f64 {
    a.zip_with(b, |x, y| (x - y) * (x - y))
        .map(|d| d.integral().sqrt())
        .unwrap_or(f64::NAN)
}

fn failed(epsilon: f64, message: String) -> SweepRow {
    SweepRow {
        epsilon,
        sup_l2_error: f64::NAN,
        h2_error_at_end: f64::NAN,
        sup_w: f64::NAN,
        layer_sup_w: f64::NAN,
        steps: 0,
        status: RowStatus::Failed(message),
    }
}

fn sweep_member(
    epsilon: f64,
    base: &ParamSet,
    rho0: &Field,
    w0: &Field,
    times: &[f64],
    reference: &[KSState],
) -> SweepRow {
    let p = base.with_epsilon(epsilon);
    let layer_end = (5.0 * p.layer_time()).min(p.t_end);
    let mut all: Vec<f64> = times.to_vec();
    all.extend((1..=LAYER_SAMPLES).map(|i| layer_end * i as f64 / LAYER_SAMPLES as f64));
    all.sort_by(f64::total_cmp);
    all.dedup();
    let run = match simulate_ep(rho0, w0, &p, &all) {
        Ok(run) => run,
        Err(e) => return failed(epsilon, e.to_string()),
    };
    if let Some(e) = run.failure {
        return failed(epsilon, e.to_string());
    }
    let mut sup_l2: f64 = 0.0;
    let mut sup_w: f64 = 0.0;
    let mut layer_sup_w: f64 = 0.0;
    let mut last = None;
    let mut next_ref = 0;
    for (state, rec) in &run.samples {
        sup_w = sup_w.max(rec.w_l2);
        if state.time <= layer_end {
            layer_sup_w = layer_sup_w.max(rec.w_l2);
        }
        if next_ref < reference.len() && state.time == reference[next_ref].time {
            sup_l2 = sup_l2.max(l2_distance(&state.rho, &reference[next_ref].sigma));
            last = Some((state, &reference[next_ref]));
            next_ref += 1;
        }
    }
    let h2 = last
        .and_then(|(s, r)| s.rho.zip_with(&r.sigma, |a, b| a - b).ok())
        .map(|d| norms(&d).h2)
        .unwrap_or(f64::NAN);
    SweepRow {
        epsilon,
        sup_l2_error: sup_l2,
        h2_error_at_end: h2,
        sup_w,
        layer_sup_w,
        steps: run.steps,
        status: RowStatus::Ok,
    }
}

/// Runs every ε in parallel against one Keller–Segel reference started from `σ0 = ρ0`.
pub fn run_epsilon_sweep(spec: &ExperimentSpec) -> Result<SweepReport> {
    spec.validate()?;
    let (rho0, w0) = spec.initial_fields()?;
    let times = spec.sample_times();
    let ks_params = ParamSet {
        dt_max: spec.params.dt_max.min(REFERENCE_DT_MAX),
        ..spec.params
    };
    let ks = simulate_ks(&rho0, &ks_params, &times)?;
    if let Some(e) = ks.failure {
        return Err(e);
    }
    let reference: Vec<KSState> = ks.samples.into_iter().map(|(s, _)| s).collect();
    let rows = spec
        .epsilon_list
        .par_iter()
        .map(|&eps| sweep_member(eps, &spec.params, &rho0, &w0, &times, &reference))
        .collect();
    Ok(SweepReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, ProfileSource};

    #[test]
    fn equilibrium_sweep_is_exact() {
        let mut spec = ExperimentSpec::new(ExperimentKind::EpsilonSweep);
        spec.profile = ProfileSource::parse("equilibrium").unwrap();
        spec.samples = 10;
        let r = run_epsilon_sweep(&spec).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.sup_l2_error == 0.0 && row.status == RowStatus::Ok));
        assert!(r.verdict());
    }

    #[test]
    fn failed_row_spoils_verdict() {
        let ok = SweepRow {
            epsilon: 0.2,
            sup_l2_error: 0.1,
            h2_error_at_end: 0.1,
            sup_w: 0.0,
            layer_sup_w: 0.0,
            steps: 10,
            status: RowStatus::Ok,
        };
        let mut r = SweepReport {
            rows: vec![ok.clone(), failed(0.1, "breach".into())],
        };
        assert!(!r.verdict());
        r.rows[1] = SweepRow {
            epsilon: 0.1,
            sup_l2_error: 0.05,
            ..ok
        };
        assert!(r.verdict());
        assert_eq!(r.final_ratio(), 0.5);
        let csv = r.table().to_csv_string().unwrap();
        assert!(csv.starts_with("epsilon,sup_l2_error"));
    }

    #[test]
    fn ill_prepared_data_shows_layer() {
        let mut spec = ExperimentSpec::new(ExperimentKind::EpsilonSweep);
        spec.samples = 20;
        spec.w0_amplitude = 0.5;
        let r = run_epsilon_sweep(&spec).unwrap();
        assert!(r.monotone(), "{:?}", r.rows);
        // the record scores ε^{α/2}‖w‖, and ‖0.5 sin x‖ = 0.5√π
        let initial = 0.5 * std::f64::consts::PI.sqrt();
        for row in &r.rows {
            assert!(
                row.layer_sup_w >= row.epsilon.sqrt() * initial * (1.0 - 1e-12),
                "{row:?}"
            );
        }
    }
}
