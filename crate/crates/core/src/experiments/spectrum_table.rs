use super::ExperimentSpec;
use crate::csvio::{format_number, Cell, Table};
use crate::error::Result;
use crate::spectrum::{dispersion_roots, DispersionQuery, ModePair};

/// Largest scaled residual accepted for a tabulated root.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub query: DispersionQuery,
    pub modes: ModePair,
    /// Worst residual over the slow and fast roots.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    pub fn verdict(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.modes.is_stable() && e.residual <= RESIDUAL_TOLERANCE)
    }

    pub fn summary(&self) -> String {
        let stable = self.entries.iter().filter(|e| e.modes.is_stable()).count();
        let worst = self.entries.iter().fold(0.0f64, |a, e| a.max(e.residual));
        format!(
            "{stable}/{} stable, worst residual {}",
            self.entries.len(),
            format_number(worst)
        )
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "epsilon",
            "alpha",
            "gamma",
            "mass_level",
            "k",
            "re_slow",
            "im_slow",
            "re_fast",
            "im_fast",
            "abs_u_over_zeta",
            "stable",
            "residual",
        ]);
        let opt = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Num);
        for e in &self.entries {
            let q = &e.query;
            let m = &e.modes;
            t.push(vec![
                q.epsilon.into(),
                q.alpha.into(),
                q.gamma.into(),
                q.mass_level.into(),
                q.k.into(),
                m.lambda_slow.re.into(),
                m.lambda_slow.im.into(),
                opt(m.lambda_fast.map(|l| l.re)),
                opt(m.lambda_fast.map(|l| l.im)),
                opt(m.amplitude_ratio.map(|r| r.norm())),
                m.is_stable().into(),
                e.residual.into(),
            ]);
        }
        t
    }
}

/// Both roots for every `(ε, k)` pair of the experiment's lists.
pub fn run_spectrum_table(spec: &ExperimentSpec) -> Result<SpectrumTable> {
    let p = &spec.params;
    let mut entries = Vec::with_capacity(spec.epsilon_list.len() * spec.k_list.len());
    for &epsilon in &spec.epsilon_list {
        for &k in &spec.k_list {
            let query = DispersionQuery::from_params(&p.with_epsilon(epsilon), k);
            let modes = dispersion_roots(&query)?;
            let residual = std::iter::once(modes.lambda_slow)
                .chain(modes.lambda_fast)
                .map(|l| query.residual(l))
                .fold(0.0f64, f64::max);
            entries.push(SpectrumEntry { query, modes, residual });
        }
    }
    Ok(SpectrumTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn default_table_is_stable_and_accurate() {
        let spec = ExperimentSpec::new(ExperimentKind::SpectrumTable);
        let t = run_spectrum_table(&spec).unwrap();
        assert_eq!(t.entries.len(), 4 * 7);
        assert!(t.verdict(), "{}", t.summary());
        let csv = t.table().to_csv_string().unwrap();
        // k = 0 rows leave the amplitude column empty
        assert!(csv.lines().nth(1).unwrap().contains(",,true,"));
    }
}
