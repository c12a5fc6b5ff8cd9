use kll_core::dynamics::{
    capped_dt, energy_report, homogeneous_solution, integrate, picard_solve, rhs, step, DynamicsError, Integrator,
    KineticParams, RunOptions, TrajectoryRecord,
};
use kll_core::legendre_basis::basis_for_nv;
use kll_core::spectral_core::random::random_field;
use kll_core::spectral_core::{Band, SpectralField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(eps: f64) -> KineticParams {
    KineticParams::with_default_kappa(eps, 1.0).unwrap()
}

fn no_observer() -> impl FnMut(usize, f64, &SpectralField) -> Result<(), DynamicsError> {
    |_, _, _| Ok(())
}

fn mean_mode(f: &SpectralField) -> f64 {
    f.get([0, 0, 0], [0, 0, 0]).re
}

#[test]
fn homogeneous_state_follows_the_cubic_ode() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let p = params(0.3);
    let f0 = 0.8;
    for integrator in [Integrator::Imex, Integrator::Rk4] {
        let opts = RunOptions::new(integrator, 1e-2, 0.5);
        let (f, rec) = integrate(&SpectralField::constant(band, f0), &p, &basis, &opts, &mut no_observer()).unwrap();
        let exact = homogeneous_solution(f0, 0.5, &p);
        assert!((mean_mode(&f) - exact).abs() < 1e-7, "{integrator:?}: {} vs {exact}", mean_mode(&f));
        // nothing leaves the mean mode
        let mut rest = f.clone();
        rest.set([0, 0, 0], [0, 0, 0], 0.0.into());
        assert!(rest.max_abs() < 1e-14);
        assert_eq!(rec.len(), 51);
    }
}

#[test]
fn rk4_error_drops_at_fourth_order() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let p = params(0.5);
    let f0 = 1.5;
    let exact = homogeneous_solution(f0, 0.4, &p);
    let err = |dt: f64| {
        let opts = RunOptions::new(Integrator::Rk4, dt, 0.4);
        let (f, _) = integrate(&SpectralField::constant(band, f0), &p, &basis, &opts, &mut no_observer()).unwrap();
        (mean_mode(&f) - exact).abs()
    };
    let ratio = err(0.02) / err(0.01);
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn picard_matches_the_closed_form() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let p = params(0.5);
    let f0 = 0.6;
    let report = picard_solve(&SpectralField::constant(band, f0), 0.2, 40, 1e-2, &p, &basis).unwrap();
    let exact = homogeneous_solution(f0, 0.2, &p);
    assert!((mean_mode(&report.solution) - exact).abs() < 1e-7);
    assert!(report.max_ratio < 1.0);
    assert_eq!(report.nodes, 21);
}

#[test]
fn picard_reports_divergence() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let err = picard_solve(&SpectralField::constant(band, 10.0), 2.0, 30, 1e-2, &params(0.5), &basis).unwrap_err();
    assert!(matches!(err, DynamicsError::NonContracting { .. }), "{err}");
}

#[test]
fn blow_up_returns_the_last_finite_state() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let opts = RunOptions::new(Integrator::Rk4, 1.0, 50.0);
    let f0 = SpectralField::constant(band, 1e3);
    match integrate(&f0, &params(0.5), &basis, &opts, &mut no_observer()) {
        Err(DynamicsError::NonFinite { steps, last_good, .. }) => {
            assert!(last_good.is_finite());
            assert!(steps < 50);
        }
        other => panic!("expected a non-finite error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn final_step_lands_on_t_end() {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let mut seen = Vec::new();
    let mut obs = |s: usize, t: f64, _: &SpectralField| -> Result<(), DynamicsError> {
        seen.push((s, t));
        Ok(())
    };
    let opts = RunOptions::new(Integrator::Imex, 1e-3, 0.0105);
    integrate(&SpectralField::constant(band, 0.1), &params(0.5), &basis, &opts, &mut obs).unwrap();
    assert_eq!(seen.len(), 12);
    assert_eq!(seen.last().unwrap(), &(11, 0.0105));
    assert_eq!(seen[0], (0, 0.0));
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(KineticParams::new(0.0, 1.0, 1.0).is_err());
    assert!(KineticParams::new(0.1, f64::NAN, 1.0).is_err());
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let opts = RunOptions::new(Integrator::Imex, -1.0, 1.0);
    assert!(integrate(&SpectralField::zeros(band), &params(0.5), &basis, &opts, &mut no_observer()).is_err());
}

#[test]
fn capped_dt_respects_both_limits() {
    let p = params(0.1);
    // a single x mode only feels the ε cap
    assert_eq!(capped_dt(1.0, &p, 1, 0.5), 0.05);
    let transport = 2.8 / (2.0 * std::f64::consts::PI * 2.0 * 0.5 * 3f64.sqrt() / 0.1);
    assert!((capped_dt(1.0, &p, 3, 0.5) - 0.5 * transport).abs() < 1e-15);
    assert_eq!(capped_dt(1e-6, &p, 3, 0.5), 1e-6);
}

#[test]
fn energy_report_flags_only_real_violations() {
    let p = params(1.0);
    let mut rec = TrajectoryRecord::default();
    rec.push(0.0, 1.0, 0.0, None);
    rec.push(1.0, 0.5, 0.5, None);
    // margin at t = 1: 1 - 0.5 - 0.25 = 0.25
    let ok = energy_report(&rec, &p, None);
    assert!(ok.pass && ok.worst_violation == 0.0);
    rec.push(2.0, 0.9, 0.5, None);
    // 1 - 0.9 - 0.75 = -0.65
    let bad = energy_report(&rec, &p, None);
    assert!(!bad.pass);
    assert_eq!(bad.violations, 1);
    assert!((bad.worst_violation - 0.65).abs() < 1e-12);
    assert_eq!(bad.min_margin_time, 2.0);
}

#[test]
fn zero_is_a_fixed_point() {
    let band = Band::new(2, 3).unwrap();
    let basis = basis_for_nv(3).unwrap();
    let z = SpectralField::zeros(band);
    assert_eq!(rhs(&z, &params(0.2), &basis).unwrap().max_abs(), 0.0);
    for integrator in [Integrator::Imex, Integrator::Rk4] {
        assert_eq!(step(integrator, &z, 1e-3, &params(0.2), &basis).unwrap().max_abs(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_margin_stays_nonnegative(seed in any::<u64>(), eps in 0.2f64..1.0) {
        let band = Band::new(2, 2).unwrap();
        let basis = basis_for_nv(2).unwrap();
        let f0 = random_field(band, 0.3, 0.6, &mut ChaCha8Rng::seed_from_u64(seed));
        let p = params(eps);
        let opts = RunOptions::new(Integrator::Imex, 2e-3, 0.03);
        let (_, rec) = integrate(&f0, &p, &basis, &opts, &mut no_observer()).unwrap();
        let report = energy_report(&rec, &p, None);
        prop_assert!(report.pass, "min margin {} against tolerance {}", report.min_margin, report.tol_energy);
        prop_assert!(rec.energy_sq.last().unwrap() <= &rec.energy_sq[0]);
    }
}
