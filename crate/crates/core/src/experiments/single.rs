use super::{ExperimentOutcome, ExperimentSpec};
use crate::characteristics::{vacuum_interval, InitialProfile, TrajectoryBundle};
use crate::csvio::{format_number, Table};
use crate::diagnostics::DiagnosticsRecord;
use crate::ep::simulate_ep;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::ks::simulate_ks;

/// Sampled diagnostics of one solver run and its final state.
#[derive(Debug, Clone)]
pub struct SingleRunReport {
    pub series: Table,
    pub final_state: Table,
    pub steps: usize,
    pub max_mass_defect: f64,
    pub failure: Option<Error>,
}

impl SingleRunReport {
    pub fn into_outcome(self, tag: &str) -> ExperimentOutcome {
        let summary = match &self.failure {
            None => format!(
                "{} steps, max mass defect {}",
                self.steps,
                format_number(self.max_mass_defect)
            ),
            Some(e) => format!("stopped after {} steps: {e}", self.steps),
        };
        ExperimentOutcome {
            tables: vec![
                (format!("{tag}_series.csv"), self.series),
                (format!("{tag}_final.csv"), self.final_state),
            ],
            verdict: self.failure.is_none(),
            summary,
            failure: self.failure,
        }
    }
}

fn series_table(records: &[DiagnosticsRecord], with_w: bool) -> Table {
    let mut headers = vec!["tau", "sup_dev", "l2_dev", "grad_l4"];
    if with_w {
        headers.push("w_l2");
    }
    headers.extend(["e_total", "d_total", "mass_defect", "rho_min", "rho_max"]);
    let mut t = Table::new(&headers);
    for r in records {
        let mut row = vec![r.tau.into(), r.sup_dev.into(), r.l2_dev.into(), r.grad_l4.into()];
        if with_w {
            row.push(r.w_l2.into());
        }
        row.extend([
            r.e_total.into(),
            r.d_total.into(),
            r.mass_defect.into(),
            r.rho_min.into(),
            r.rho_max.into(),
        ]);
        t.push(row);
    }
    t
}

fn state_table(columns: &[(&str, &Field)]) -> Table {
    let mut headers = vec!["x"];
    headers.extend(columns.iter().map(|(name, _)| *name));
    let mut t = Table::new(&headers);
    let nodes = columns[0].1.grid().nodes();
    for (i, x) in nodes.iter().enumerate() {
        let mut row = vec![(*x).into()];
        row.extend(columns.iter().map(|(_, f)| f.values()[i].into()));
        t.push(row);
    }
    t
}

pub fn run_single_ep(spec: &ExperimentSpec) -> Result<SingleRunReport> {
    spec.validate()?;
    let (rho0, w0) = spec.initial_fields()?;
    let run = simulate_ep(&rho0, &w0, &spec.params, &spec.sample_times())?;
    let (last, _) = run.samples.last().expect("the initial sample is always recorded");
    Ok(SingleRunReport {
        series: series_table(&run.records(), true),
        final_state: state_table(&[("rho", &last.rho), ("w", &last.w)]),
        steps: run.steps,
        max_mass_defect: run.max_mass_defect,
        failure: run.failure,
    })
}

pub fn run_single_ks(spec: &ExperimentSpec) -> Result<SingleRunReport> {
    spec.validate()?;
    let (sigma0, _) = spec.initial_fields()?;
    let run = simulate_ks(&sigma0, &spec.params, &spec.sample_times())?;
    let last = run.samples.last().map_or(&sigma0, |(s, _)| &s.sigma);
    Ok(SingleRunReport {
        series: series_table(&run.records(), false),
        final_state: state_table(&[("sigma", last)]),
        steps: run.steps,
        max_mass_defect: run.max_mass_defect,
        failure: run.failure,
    })
}

#[derive(Debug, Clone)]
pub struct CharacteristicsReport {
    /// One row per label and sample time.
    pub bundles: Table,
    /// Vacuum interval per sample time, when the profile has exactly one.
    pub vacuum: Option<Table>,
    pub monotone: bool,
}

/// Labels spanning the profile's support with a margin, or one torus period.
fn labels(prof: &InitialProfile, grid: Grid) -> Result<Vec<f64>> {
    let n = grid.len();
    let line = match (prof.support(), grid) {
        (Some((lo, hi)), _) if hi > lo => Grid::line(lo - 1.0, hi + 1.0, n)?,
        (_, Grid::Torus { length, .. }) => Grid::line(-length / 2.0, length / 2.0, n)?,
        (_, g) => g,
    };
    Ok(line.nodes())
}

pub fn run_characteristics(spec: &ExperimentSpec) -> Result<CharacteristicsReport> {
    spec.validate()?;
    let prof = spec.profile()?;
    let labels = labels(&prof, spec.params.grid)?;
    let times = spec.sample_times();
    let mut bundles = Table::new(&["x", "tau", "eta", "sigma_along", "dx_eta", "v_along"]);
    let mut monotone = true;
    for &tau in &times {
        let b = TrajectoryBundle::new(&prof, &labels, tau)?;
        monotone &= b.is_monotone();
        for i in 0..labels.len() {
            bundles.push(vec![
                b.labels[i].into(),
                tau.into(),
                b.eta[i].into(),
                b.sigma_along[i].into(),
                b.dxeta[i].into(),
                b.velocity[i].into(),
            ]);
        }
    }
    let vacuum = match prof.vacuum_set().len() {
        1 => {
            let mut t = Table::new(&["tau", "left", "right", "length", "limit_point"]);
            for &tau in &times {
                let r = vacuum_interval(tau, &prof)?;
                t.push(vec![
                    tau.into(),
                    r.left.into(),
                    r.right.into(),
                    r.length.into(),
                    r.limit_point.into(),
                ]);
            }
            Some(t)
        }
        _ => None,
    };
    Ok(CharacteristicsReport {
        bundles,
        vacuum,
        monotone,
    })
}
