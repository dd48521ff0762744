//! Experiment recipes and their configuration.
//!
//! An experiment file uses the same `key = value` format as [`ParamSet`], with
//! these extra keys:
//!
//! | key            | meaning                                              |
//! |----------------|------------------------------------------------------|
//! | `kind`         | `sweep`, `vacuum`, `decay`, `spectrum`, `simulate-ep`, `simulate-ks`, `characteristics` |
//! | `epsilon_list` | comma-separated, strictly decreasing, each in (0, 1) |
//! | `k_list`       | comma-separated wavenumbers for spectrum tables      |
//! | `profile`      | profile name such as `cosine(0.3,1)` or a CSV path   |
//! | `w0_amplitude` | initial `w0 = a sin(2πx/L)`; 0 means well prepared   |
//! | `samples`      | number of sampling intervals over `[0, t_end]`       |
//! | `output_dir`   | directory receiving the CSV files                    |
//! | `seed`         | reserved; every recipe is deterministic              |
//!
//! Built-in profiles, with `M` the configured mass level:
//!
//! * `equilibrium`: `σ0 ≡ M`.
//! * `cosine(a,k)`: `M + a cos(kx)`.
//! * `ricker(a,s)`: `M + a (1 − 2x²/s²) e^{−x²/s²}`.
//! * `vacuum-ramp(w,F0[,n[,r]])`: vacuum on `[0, 1]`, ramps `M sinⁿ(πd/2w)` at
//!   distance `d ≤ w` from each edge, and two `sin²` bumps of width `2r`
//!   (default `n = 1`, `r = 1`) sized so that `∫_{−∞}^0 (σ0 − M) = F0` and
//!   the total excess mass vanishes.
//!
//! A CSV profile has a header with `x` and `rho` columns and optionally `w`.

mod decay;
mod single;
mod spectrum_table;
mod sweep;
mod vacuum;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub use decay::{run_decay_fit, DecayReport, FitRow, FitStatus};
pub use single::{run_characteristics, run_single_ep, run_single_ks, CharacteristicsReport, SingleRunReport};
pub use spectrum_table::{run_spectrum_table, SpectrumTable};
pub use sweep::{run_epsilon_sweep, RowStatus, SweepReport, SweepRow};
pub use vacuum::{run_vacuum_collapse, vacuum_row, VacuumCollapseReport, VacuumRow};

use crate::characteristics::{InitialProfile, ProfileSpec};
use crate::csvio::Table;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{parse_key_values, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    EpsilonSweep,
    VacuumCollapse,
    DecayFit,
    SpectrumTable,
    SingleRun(Solver),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    EulerPoisson,
    KellerSegel,
    Characteristics,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "sweep" => Self::EpsilonSweep,
            "vacuum" => Self::VacuumCollapse,
            "decay" => Self::DecayFit,
            "spectrum" => Self::SpectrumTable,
            "simulate-ep" => Self::SingleRun(Solver::EulerPoisson),
            "simulate-ks" => Self::SingleRun(Solver::KellerSegel),
            "characteristics" => Self::SingleRun(Solver::Characteristics),
            other => return Err(Error::Config(format!("unknown experiment kind `{other}`"))),
        })
    }

    fn default_t_end(self) -> f64 {
        match self {
            Self::DecayFit | Self::VacuumCollapse => 5.0,
            Self::SingleRun(Solver::Characteristics) => 5.0,
            _ => 1.0,
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Self::VacuumCollapse | Self::SingleRun(Solver::Characteristics) => 10,
            Self::SingleRun(_) => 20,
            _ => 100,
        }
    }

    fn default_profile(self) -> &'static str {
        match self {
            Self::VacuumCollapse | Self::SingleRun(Solver::Characteristics) => "vacuum-ramp(1,-0.3)",
            _ => "cosine(0.3,1)",
        }
    }

    fn default_points(self) -> usize {
        match self {
            Self::VacuumCollapse | Self::SingleRun(Solver::Characteristics) => 4096,
            _ => 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    Named(ProfileSpec),
    File(PathBuf),
}

impl ProfileSource {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.to_ascii_lowercase().ends_with(".csv") {
            Ok(Self::File(PathBuf::from(t)))
        } else {
            Ok(Self::Named(t.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params: ParamSet,
    pub epsilon_list: Vec<f64>,
    pub k_list: Vec<f64>,
    pub profile: ProfileSource,
    pub w0_amplitude: f64,
    pub samples: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{s}` as a number")))
        })
        .collect()
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        let mut params = ParamSet {
            t_end: kind.default_t_end(),
            ..ParamSet::default()
        };
        params.grid = Grid::Torus {
            length: 2.0 * PI,
            points: kind.default_points(),
        };
        Self {
            kind,
            params,
            epsilon_list: vec![0.2, 0.1, 0.05, 0.025],
            k_list: vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            profile: ProfileSource::Named(kind.default_profile().parse().expect("built-in profile name")),
            w0_amplitude: 0.0,
            samples: kind.default_samples(),
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }

    /// Reads a spec; `kind` overrides (or supplies) the file's `kind` key.
    pub fn from_config_str(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut kv = parse_key_values(text)?;
        let file_kind = kv.remove("kind").map(|k| ExperimentKind::parse(&k)).transpose()?;
        let kind = kind
            .or(file_kind)
            .ok_or_else(|| Error::Config("experiment kind not given".into()))?;
        let mut spec = Self::new(kind);
        let mut rest = BTreeMap::new();
        for (key, value) in kv {
            match key.as_str() {
                "epsilon_list" => spec.epsilon_list = parse_list(&key, &value)?,
                "k_list" => spec.k_list = parse_list(&key, &value)?,
                "profile" => spec.profile = ProfileSource::parse(&value)?,
                "w0_amplitude" => spec.w0_amplitude = parse_list(&key, &value)?[0],
                "samples" => {
                    spec.samples = value
                        .parse()
                        .map_err(|_| Error::Config(format!("`samples`: cannot parse `{value}`")))?
                }
                "output_dir" => spec.output_dir = PathBuf::from(value),
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("`seed`: cannot parse `{value}`")))?
                }
                _ => {
                    rest.insert(key, value);
                }
            }
        }
        let had_t_end = rest.contains_key("t_end");
        let had_points = rest.contains_key("grid_points");
        let mut params = ParamSet::from_map(&rest)?;
        if !had_t_end {
            params.t_end = kind.default_t_end();
        }
        if !had_points && !rest.contains_key("grid") {
            if let Grid::Torus { length, .. } = params.grid {
                params.grid = Grid::torus(length, kind.default_points())?;
            }
        }
        spec.params = params;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_config_file(path: &Path, kind: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text, kind)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.epsilon_list.is_empty() {
            return Err(Error::Config("`epsilon_list` is empty".into()));
        }
        if self.epsilon_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Config("every epsilon must lie in (0, 1)".into()));
        }
        if self.epsilon_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("`epsilon_list` must be strictly decreasing".into()));
        }
        if self.k_list.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
            return Err(Error::Config("wavenumbers must be finite and non-negative".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("`samples` must be positive".into()));
        }
        if !self.w0_amplitude.is_finite() {
            return Err(Error::Config("`w0_amplitude` must be finite".into()));
        }
        if let ProfileSource::Named(p) = &self.profile {
            p.build(self.params.mass_level)?;
        }
        Ok(())
    }

    /// `samples + 1` equally spaced times over `[0, t_end]`.
    pub fn sample_times(&self) -> Vec<f64> {
        let t = self.params.t_end;
        (0..=self.samples)
            .map(|i| {
                if i == self.samples {
                    t
                } else {
                    t * i as f64 / self.samples as f64
                }
            })
            .collect()
    }

    /// Analytic or sampled profile for the characteristics recipes.
    pub fn profile(&self) -> Result<InitialProfile> {
        let m = self.params.mass_level;
        match &self.profile {
            ProfileSource::Named(spec) => spec.build(m),
            ProfileSource::File(path) => {
                let data = read_profile_csv(path)?;
                let grid = uniform_line(&data.x)?;
                InitialProfile::sampled(&Field::new(grid, data.rho)?, m)
            }
        }
    }

    /// Initial `(ρ0, w0)` on the parameter grid (a torus).
    pub fn initial_fields(&self) -> Result<(Field, Field)> {
        let grid = self.params.grid;
        let Grid::Torus { length, .. } = grid else {
            return Err(Error::NotTorus);
        };
        let (rho, file_w) = match &self.profile {
            ProfileSource::Named(spec) => (spec.build(self.params.mass_level)?.sample_on(grid)?, None),
            ProfileSource::File(path) => {
                let data = read_profile_csv(path)?;
                if data.rho.len() != grid.len() {
                    return Err(Error::Config(format!(
                        "{} has {} rows but the grid has {} points",
                        path.display(),
                        data.rho.len(),
                        grid.len()
                    )));
                }
                let w = data.w.map(|w| Field::new(grid, w)).transpose()?;
                (Field::new(grid, data.rho)?, w)
            }
        };
        // a `w` column takes precedence over `w0_amplitude`
        let a = self.w0_amplitude;
        let w = match file_w {
            Some(w) => w,
            None => Field::from_fn(grid, |x| a * (2.0 * PI * x / length).sin())?,
        };
        Ok((rho, w))
    }
}

struct ProfileData {
    x: Vec<f64>,
    rho: Vec<f64>,
    w: Option<Vec<f64>>,
}

fn read_profile_csv(path: &Path) -> Result<ProfileData> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(ix), Some(ir)) = (col("x"), col("rho")) else {
        return Err(Error::Config(format!("{} needs `x` and `rho` columns", path.display())));
    };
    let iw = col("w");
    let mut data = ProfileData {
        x: Vec::new(),
        rho: Vec::new(),
        w: iw.map(|_| Vec::new()),
    };
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let get = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        data.x.push(get(ix)?);
        data.rho.push(get(ir)?);
        if let (Some(i), Some(w)) = (iw, data.w.as_mut()) {
            w.push(get(i)?);
        }
    }
    Ok(data)
}

fn uniform_line(x: &[f64]) -> Result<Grid> {
    if x.len() < 2 {
        return Err(Error::Config("profile needs at least two rows".into()));
    }
    let grid = Grid::line(x[0], x[x.len() - 1], x.len())?;
    let h = grid.spacing();
    if x.iter()
        .enumerate()
        .any(|(i, &xi)| (xi - grid.node(i)).abs() > 1e-9 * h.max(1.0))
    {
        return Err(Error::Config("profile abscissae must be uniformly spaced".into()));
    }
    Ok(grid)
}

/// A finished experiment: its tables, keyed by file name, and the verdict.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub tables: Vec<(String, Table)>,
    pub verdict: bool,
    pub summary: String,
    /// Breakdown that ended a single run early.
    pub failure: Option<Error>,
}

impl ExperimentOutcome {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.tables
            .iter()
            .map(|(name, table)| {
                let path = dir.join(name);
                table.write(&path)?;
                Ok(path)
            })
            .collect()
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::EpsilonSweep => {
            let r = run_epsilon_sweep(spec)?;
            Ok(ExperimentOutcome {
                summary: r.summary(),
                verdict: r.verdict(),
                tables: vec![("sweep.csv".into(), r.table())],
                failure: None,
            })
        }
        ExperimentKind::VacuumCollapse => {
            let r = run_vacuum_collapse(spec)?;
            Ok(ExperimentOutcome {
                summary: r.summary(),
                verdict: r.verdict(),
                tables: vec![("vacuum.csv".into(), r.table())],
                failure: None,
            })
        }
        ExperimentKind::DecayFit => {
            let r = run_decay_fit(spec)?;
            Ok(ExperimentOutcome {
                summary: r.summary(),
                verdict: r.verdict(),
                tables: vec![
                    ("decay.csv".into(), r.table()),
                    ("decay_series.csv".into(), r.series.clone()),
                ],
                failure: None,
            })
        }
        ExperimentKind::SpectrumTable => {
            let r = run_spectrum_table(spec)?;
            Ok(ExperimentOutcome {
                summary: r.summary(),
                verdict: r.verdict(),
                tables: vec![("spectrum.csv".into(), r.table())],
                failure: None,
            })
        }
        ExperimentKind::SingleRun(Solver::EulerPoisson) => {
            let r = run_single_ep(spec)?;
            Ok(r.into_outcome("ep"))
        }
        ExperimentKind::SingleRun(Solver::KellerSegel) => {
            let r = run_single_ks(spec)?;
            Ok(r.into_outcome("ks"))
        }
        ExperimentKind::SingleRun(Solver::Characteristics) => {
            let r = run_characteristics(spec)?;
            let mut tables = vec![("characteristics.csv".into(), r.bundles.clone())];
            if let Some(v) = &r.vacuum {
                tables.push(("vacuum.csv".into(), v.clone()));
            }
            Ok(ExperimentOutcome {
                summary: format!("{} trajectory rows", r.bundles.rows.len()),
                verdict: r.monotone,
                tables,
                failure: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = "kind = sweep\nepsilon_list = 0.2, 0.1\nprofile = cosine(0.2,1)\nalpha = 1.5\n";
        let s = ExperimentSpec::from_config_str(text, None).unwrap();
        assert_eq!(s.kind, ExperimentKind::EpsilonSweep);
        assert_eq!(s.epsilon_list, vec![0.2, 0.1]);
        assert_eq!(s.params.alpha, 1.5);
        assert_eq!(s.params.t_end, 1.0);
        let d = ExperimentSpec::from_config_str("t_end = 2", Some(ExperimentKind::DecayFit)).unwrap();
        assert_eq!(d.params.t_end, 2.0);
        let v = ExperimentSpec::from_config_str("", Some(ExperimentKind::VacuumCollapse)).unwrap();
        assert_eq!(v.params.grid.len(), 4096);
    }

    #[test]
    fn config_rejections() {
        let k = Some(ExperimentKind::EpsilonSweep);
        assert!(ExperimentSpec::from_config_str("epsilon_list = 0.1, 0.2", k).is_err());
        assert!(ExperimentSpec::from_config_str("epsilon_list = 1.5", k).is_err());
        assert!(ExperimentSpec::from_config_str("profile = bogus(1)", k).is_err());
        assert!(ExperimentSpec::from_config_str("colour = red", k).is_err());
        assert!(ExperimentSpec::from_config_str("", None).is_err());
        assert!(ExperimentSpec::from_config_str("samples = 0", k).is_err());
    }

    #[test]
    fn sample_times_end_exactly() {
        let mut s = ExperimentSpec::new(ExperimentKind::DecayFit);
        s.params.t_end = 0.3;
        s.samples = 3;
        let t = s.sample_times();
        assert_eq!(t.len(), 4);
        assert_eq!(*t.last().unwrap(), 0.3);
    }

    #[test]
    fn csv_profile_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("init.csv");
        let g = Grid::periodic(16).unwrap();
        let mut text = String::from("x,rho,w\n");
        for x in g.nodes() {
            text.push_str(&format!("{x},{},{}\n", 1.0 + 0.1 * x.cos(), 0.2 * x.sin()));
        }
        std::fs::write(&path, text).unwrap();
        let mut s = ExperimentSpec::new(ExperimentKind::SingleRun(Solver::EulerPoisson));
        s.params.grid = g;
        s.profile = ProfileSource::parse(path.to_str().unwrap()).unwrap();
        let (rho, w) = s.initial_fields().unwrap();
        assert!((rho.values()[0] - 1.1).abs() < 1e-15);
        assert!((w.values()[4] - 0.2).abs() < 1e-15);
        s.params.grid = Grid::periodic(32).unwrap();
        assert!(s.initial_fields().is_err());
    }
}
