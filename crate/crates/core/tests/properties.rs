use epks::characteristics::{logistic, InitialProfile, TrajectoryBundle};
use epks::csvio::{format_number, Table};
use epks::ep::simulate_ep;
use epks::grid::{Field, Grid};
use epks::ks::simulate_ks;
use epks::params::ParamSet;
use epks::spectrum::{dispersion_roots, DispersionQuery};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logistic_stays_between_start_and_level(s0 in 1e-3f64..4.0, m in 0.2f64..3.0, tau in 0.0f64..20.0) {
        let s = logistic(s0, tau, m);
        let floor = s0.min(m);
        prop_assert!(s >= floor * (1.0 - 1e-14));
        prop_assert!(s <= s0.max(m) * (1.0 + 1e-14));
        prop_assert!((s - m).abs() <= (-floor * tau).exp() * (s0 - m).abs() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn logistic_keeps_vacuum(m in 0.2f64..3.0, tau in 0.0f64..100.0) {
        prop_assert_eq!(logistic(0.0, tau, m), 0.0);
    }

    #[test]
    fn equilibrium_is_linearly_stable(
        epsilon in 0.0f64..0.99,
        alpha in 0.01f64..1.99,
        gamma in 1.01f64..4.0,
        m in 0.1f64..5.0,
        k in 0.0f64..50.0,
    ) {
        let q = DispersionQuery { epsilon, alpha, gamma, mass_level: m, k };
        let pair = dispersion_roots(&q).unwrap();
        prop_assert!(pair.is_stable(), "{:?}", pair);
        prop_assert!(q.residual(pair.lambda_slow) <= 1e-10);
        if let Some(fast) = pair.lambda_fast {
            prop_assert!(q.residual(fast) <= 1e-10);
            // equal real parts on the oscillatory branch, up to rounding
            prop_assert!(fast.re <= pair.lambda_slow.re * (1.0 - 1e-12));
        }
    }

    #[test]
    fn trajectories_never_cross(
        width in 0.2f64..2.0,
        f0 in -0.5f64..0.5,
        order in 1u32..=3,
        m in 0.5f64..2.0,
        tau in 0.0f64..40.0,
    ) {
        let prof = InitialProfile::vacuum_ramp(width, f0, order, 1.5, m).unwrap();
        let labels: Vec<f64> = (0..400).map(|i| -6.0 + 0.03 * i as f64).collect();
        let b = TrajectoryBundle::new(&prof, &labels, tau).unwrap();
        prop_assert!(b.is_monotone());
    }

    #[test]
    fn numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_text_round_trips(cells in prop::collection::vec("[ -~\n]{0,12}", 1..6)) {
        let headers: Vec<String> = (0..cells.len()).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
        let mut t = Table::new(&refs);
        t.push(cells.iter().map(|c| c.clone().into()).collect());
        let text = t.to_csv_string().unwrap();
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let row = reader.records().next().unwrap().unwrap();
        let got: Vec<&str> = row.iter().collect();
        prop_assert_eq!(got, cells.iter().map(String::as_str).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solvers_conserve_mass(a in -0.3f64..0.3, k in 1u32..4, epsilon in 0.02f64..0.2) {
        let p = ParamSet { epsilon, ..ParamSet::default() };
        let rho0 = Field::from_fn(p.grid, |x| 1.0 + a * (k as f64 * x).cos()).unwrap();
        let w0 = Field::from_fn(p.grid, |x| 0.1 * x.sin()).unwrap();
        let omega = p.grid.measure();
        let ep = simulate_ep(&rho0, &w0, &p, &[0.0, 0.5]).unwrap();
        prop_assert!(ep.failure.is_none());
        prop_assert!(ep.max_mass_defect <= 1e-10 * omega);
        let ks = simulate_ks(&rho0, &p, &[0.0, 0.5]).unwrap();
        prop_assert!(ks.max_mass_defect <= 1e-10 * omega);
        // sup-norm contraction of the limit dynamics
        let devs: Vec<f64> = ks.records().iter().map(|r| r.sup_dev).collect();
        prop_assert!(devs[1] <= devs[0] * (1.0 + 1e-9));
    }

    #[test]
    fn torus_length_is_respected(len in 1.0f64..20.0) {
        let p = ParamSet { grid: Grid::torus(len, 32).unwrap(), ..ParamSet::default() };
        let rho0 = Field::from_fn(p.grid, |x| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x / len).cos()).unwrap();
        let ks = simulate_ks(&rho0, &p, &[0.0, 0.2]).unwrap();
        prop_assert!(ks.failure.is_none());
        prop_assert!((ks.samples[1].0.sigma.integral() - len).abs() <= 1e-10 * len);
    }
}
