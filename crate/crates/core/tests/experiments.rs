use std::fs;

use epks::experiments::{
    run_experiment, run_spectrum_table, run_vacuum_collapse, ExperimentKind, ExperimentSpec, RowStatus,
};

#[test]
fn vacuum_recipe_reference_values() {
    let spec = ExperimentSpec::new(ExperimentKind::VacuumCollapse);
    let report = run_vacuum_collapse(&spec).unwrap();
    let at3 = report.rows.iter().find(|r| r.tau == 3.0).unwrap();
    assert!((at3.length - 0.049787).abs() < 1e-6);
    assert!((at3.edge_growth.unwrap() - 403.43).abs() < 1e-2);
    assert!((at3.fd_growth.unwrap() / 403.43 - 1.0).abs() < 0.05);
    assert!(report.rows.iter().all(|r| (r.limit_point + 0.3).abs() < 1e-15));
}

#[test]
fn spectrum_recipe_contains_reference_row() {
    let spec = ExperimentSpec::new(ExperimentKind::SpectrumTable);
    let t = run_spectrum_table(&spec).unwrap();
    let row = t
        .entries
        .iter()
        .find(|e| e.query.epsilon == 0.1 && e.query.k == 1.0)
        .unwrap();
    assert!((row.modes.lambda_slow.re + 1.21475).abs() < 1e-4);
    assert!(t.entries.iter().all(|e| e.modes.is_stable()));
}

#[test]
fn failed_sweep_row_leaves_others_unchanged() {
    let mut spec = ExperimentSpec::new(ExperimentKind::EpsilonSweep);
    spec.samples = 10;
    spec.w0_amplitude = 40.0;
    spec.epsilon_list = vec![0.2, 0.01];
    let both = run_experiment(&spec).unwrap();
    spec.epsilon_list = vec![0.01];
    let alone = run_experiment(&spec).unwrap();
    assert!(!both.verdict);
    let rows = |o: &epks::experiments::ExperimentOutcome| o.tables[0].1.rows.clone();
    let (b, a) = (rows(&both), rows(&alone));
    assert!(matches!(&b[0][6], epks::csvio::Cell::Text(s) if s.starts_with("failed")));
    assert_eq!(b[1], a[0]);

    spec.epsilon_list = vec![0.2, 0.01];
    let report = epks::experiments::run_epsilon_sweep(&spec).unwrap();
    assert!(matches!(report.rows[0].status, RowStatus::Failed(_)));
    assert_eq!(report.rows[1].status, RowStatus::Ok);
}

#[test]
fn config_file_drives_the_recipe() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.txt");
    fs::write(
        &path,
        "kind = sweep\nepsilon_list = 0.2, 0.1\nprofile = cosine(0.2,2)\nt_end = 0.5\nsamples = 10\ngrid_points = 32\n",
    )
    .unwrap();
    let spec = ExperimentSpec::from_config_file(&path, None).unwrap();
    assert_eq!(spec.kind, ExperimentKind::EpsilonSweep);
    assert_eq!(spec.params.grid.len(), 32);
    let out = run_experiment(&spec).unwrap();
    assert!(out.verdict, "{}", out.summary);
    let written = out.write(&dir.path().join("out")).unwrap();
    let text = fs::read_to_string(&written[0]).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn characteristics_from_csv_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    // piecewise-linear data with zero excess mass and a vacuum on [2, 3]
    let xs: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let rho = [1.0, 1.0, 0.0, 0.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let mut text = String::from("x,rho\n");
    for (x, r) in xs.iter().zip(rho) {
        text.push_str(&format!("{x},{r}\n"));
    }
    fs::write(&path, text).unwrap();
    let mut spec = ExperimentSpec::new(ExperimentKind::VacuumCollapse);
    spec.profile = epks::experiments::ProfileSource::parse(path.to_str().unwrap()).unwrap();
    spec.samples = 4;
    spec.params.t_end = 2.0;
    let report = run_vacuum_collapse(&spec).unwrap();
    for r in &report.rows {
        assert!((r.length - (-r.tau).exp()).abs() < 1e-12);
        assert!((r.measured_gap - r.exact_length).abs() <= r.spacing);
    }
}
