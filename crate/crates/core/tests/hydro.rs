use std::f64::consts::PI;

use kll_core::closure::{build_tensors, ClosureConstants};
use kll_core::dynamics::{rhs, Integrator, KineticParams};
use kll_core::hydro::{
    boussinesq_residual, forcing_terms, lift_initial, limit_study, loglog_slope, moment_residuals, nsf_run,
    remainder_moments, well_prepare, BoussinesqForm, FluxWeights, ForcingSeries, ForcingSource, InitialMacro,
    LimitStudyConfig, NsfForcing, NsfState, THETA_DIFFUSION,
};
use kll_core::legendre_basis::basis_for_nv;
use kll_core::moment_oracle::{limit, poly_moment, VPolynomial, Q35};
use kll_core::projections::{macro_project, moments, MacroState};
use kll_core::spectral_core::random::random_field;
use kll_core::spectral_core::{Band, XField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `<w q^3>` over the unit cell, exactly, for `q = ρ + u·e1 + ϑ e2`.
fn exact_bracket(weight: &VPolynomial, rho: Q35, u: [Q35; 3], vartheta: Q35) -> f64 {
    let mut q = VPolynomial::constant(rho);
    for (i, ui) in u.iter().enumerate() {
        q = &q + &limit::e1(i).scale(ui);
    }
    q = &q + &limit::e2().scale(&vartheta);
    poly_moment(&(weight * &q.pow(3))).to_f64()
}

#[test]
fn cubic_forcing_matches_exact_limit_brackets() {
    let n = 2;
    let (rho, u, vt) = (Q35::frac(1, 3), [Q35::frac(-1, 2), Q35::frac(1, 5), Q35::frac(2, 7)], Q35::frac(-3, 4));
    let state = MacroState {
        rho: XField::constant(n, rho.to_f64()),
        u: std::array::from_fn(|i| XField::constant(n, u[i].to_f64())),
        // θ_s = √3 θ and ϑ = θ_s / 3
        theta: XField::constant(n, 3f64.sqrt() * vt.to_f64()),
    };
    let set = forcing_terms(&state, &KineticParams::with_default_kappa(0.1, 1.0).unwrap());
    for i in 0..3 {
        let want = exact_bracket(&limit::e1(i), rho.clone(), u.clone(), vt.clone());
        assert!((set.f[i].mean() - want).abs() < 1e-13, "F_{i}: {} vs {want}", set.f[i].mean());
    }
    let want_g = exact_bracket(&limit::e2(), rho.clone(), u.clone(), vt.clone());
    assert!((set.g.mean() - want_g).abs() < 1e-13, "G: {} vs {want_g}", set.g.mean());
    let want_e = exact_bracket(&VPolynomial::constant(Q35::one()), rho, u, vt);
    assert!((set.e.mean() - want_e).abs() < 1e-13, "E: {} vs {want_e}", set.e.mean());
    // the derivative terms vanish on a constant state
    for i in 0..3 {
        assert_eq!(set.h[i].max_abs(), 0.0);
        assert_eq!(set.j[i].max_abs(), 0.0);
    }
    assert_eq!(set.k.max_abs(), 0.0);
}

#[test]
fn limit_coefficients_at_the_reference_parameters() {
    // κ = √3, ν* = 12ν: the u forcing is -(1/(4ν)) F + H + 12ν J before projection
    let nu = 0.05;
    let p = KineticParams::with_default_kappa(0.1, 12.0 * nu).unwrap();
    let n = 2;
    let state = MacroState {
        rho: XField::constant(n, 0.2),
        u: [XField::constant(n, 0.3), XField::zeros(n), XField::zeros(n)],
        theta: XField::zeros(n),
    };
    let set = forcing_terms(&state, &p);
    let forcing = NsfForcing::from_set(&set, &p);
    assert!((forcing.u[0].mean() + set.f[0].mean() / (4.0 * nu)).abs() < 1e-12);
    let want = -set.g.mean() / (4.0 * nu) + 5f64.sqrt() / (10.0 * nu) * set.e.mean();
    assert!((forcing.theta.mean() - want).abs() < 1e-12);
}

#[test]
fn lift_preserves_the_macroscopic_data() {
    let basis = basis_for_nv(3).unwrap();
    let band = Band::new(3, 3).unwrap();
    let rho0 = XField::cosine(3, [1, 1, 0], 0.4);
    let u0 = [XField::sine(3, [0, 1, 0], 0.5), XField::zeros(3), XField::cosine(3, [1, 0, 0], 0.2)];
    let theta0 = XField::sine(3, [0, 0, 1], 0.3);
    let f = lift_initial(&rho0, &u0, &theta0, &basis, band);
    let m = moments(&f, &basis).unwrap();
    assert!(m.rho.max_abs_diff(&rho0) < 1e-14);
    // the velocity lift 2√3 v_i is c1 e1_i / c1 scaled to the limit normalisation
    let gain = 2.0 * 3f64.sqrt() / basis.c1;
    for i in 0..3 {
        assert!(m.u[i].max_abs_diff(&u0[i].scale(gain)) < 1e-13, "u_{i}");
    }
    assert!(f.reality_defect() < 1e-14);
}

#[test]
fn well_preparation_enforces_each_boussinesq_form() {
    let basis = basis_for_nv(4).unwrap();
    let band = Band::new(2, 4).unwrap();
    let consts = ClosureConstants::compute(&basis).unwrap();
    let rho0 = XField::constant(2, 0.1);
    let u0 = [XField::zeros(2), XField::sine(2, [1, 0, 0], 0.3), XField::sine(2, [1, 1, 0], 0.2)];
    let theta0 = XField::cosine(2, [1, 0, 0], 0.5);
    for form in [BoussinesqForm::Epsilon, BoussinesqForm::Limit] {
        let (rho, u, theta) = well_prepare(&rho0, &u0, &theta0, &basis, form).unwrap();
        assert_eq!(rho.mean(), 0.1);
        assert!(kll_core::spectral_core::divergence(&u).max_abs() < 1e-14);
        let f = lift_initial(&rho, &u, &theta, &basis, band);
        let r = boussinesq_residual(&moments(&f, &basis).unwrap(), &consts);
        let (hit, other) = match form {
            BoussinesqForm::Epsilon => (r.eps_form, r.limit_form),
            BoussinesqForm::Limit => (r.limit_form, r.eps_form),
        };
        assert!(hit < 1e-13, "{form:?}: {hit}");
        assert!(other > 1e-6, "{form:?}: the other form should not hold");
    }
}

#[test]
fn remainder_vanishes_on_macroscopic_fields() {
    let basis = basis_for_nv(2).unwrap();
    let f = random_field(Band::new(2, 2).unwrap(), 0.5, 0.7, &mut ChaCha8Rng::seed_from_u64(3));
    let (_, p) = macro_project(&f, &basis).unwrap();
    assert!(remainder_moments(&p, &basis).unwrap().iter().all(|r| r.abs() < 1e-15));
    assert!(remainder_moments(&f, &basis).unwrap().iter().any(|r| r.abs() > 1e-8));
}

#[test]
fn free_decay_of_single_modes() {
    let nu = 0.02;
    let t = 0.3;
    let n = 3;
    // u1(x2) is a steady Euler flow, so only diffusion acts on it
    let shear = NsfState::new([XField::sine(n, [0, 1, 0], 0.7), XField::zeros(n), XField::zeros(n)], XField::zeros(n), nu).unwrap();
    let end = nsf_run(&shear, 1e-2, t, None, |_, _| {}).unwrap();
    let want = shear.kinetic_energy() * (-2.0 * nu * 4.0 * PI * PI * t).exp();
    assert!((end.kinetic_energy() / want - 1.0).abs() < 1e-12);

    let heat = NsfState::new(std::array::from_fn(|_| XField::zeros(n)), XField::cosine(n, [1, 1, 0], 0.4), nu).unwrap();
    let end = nsf_run(&heat, 1e-2, t, None, |_, _| {}).unwrap();
    let want = 0.4 * (-THETA_DIFFUSION * nu * 8.0 * PI * PI * t).exp();
    assert!((end.theta_tilde.get([1, 1, 0]).re * 2.0 - want).abs() < 1e-12);
}

#[test]
fn unforced_kinetic_energy_does_not_grow() {
    let n = 3;
    let mut r = ChaCha8Rng::seed_from_u64(21);
    let u = std::array::from_fn(|_| kll_core::spectral_core::random::random_xfield(n, 0.5, &mut r));
    let s = NsfState::new(u, XField::zeros(n), 0.05).unwrap();
    let mut energies = Vec::new();
    let mut divs = Vec::new();
    nsf_run(&s, 2e-3, 0.1, None, |_, st| {
        energies.push(st.kinetic_energy());
        divs.push(st.divergence_norm());
    })
    .unwrap();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    assert!(divs.iter().all(|d| *d < 1e-13));
    assert!(NsfState::new(s.u.clone(), XField::zeros(n), 0.0).is_err());
}

fn sample_series() -> ForcingSeries {
    let mut s = ForcingSeries::default();
    for (t, a) in [(0.0, 1.0), (0.5, 3.0)] {
        let mut f = NsfForcing::zeros(2);
        f.u[1].set([1, 0, 0], Complex64::new(0.0, a));
        f.u[1].set([-1, 0, 0], Complex64::new(0.0, -a));
        f.theta.set([0, 0, 0], Complex64::new(a * 0.1, 0.0));
        s.push(t, f);
    }
    s
}

#[test]
fn forcing_csv_roundtrip_and_interpolation() {
    let s = sample_series();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = ForcingSeries::read_csv(buf.as_slice(), 2).unwrap();
    assert_eq!(back.times, s.times);
    assert_eq!(back.frames, s.frames);
    let mid = back.at(0.25);
    assert!((mid.u[1].get([1, 0, 0]).im - 2.0).abs() < 1e-15);
    assert_eq!(back.at(7.0), s.frames[1]);
}

#[test]
fn malformed_forcing_files_are_rejected() {
    let header = "t,field,n1,n2,n3,re,im\n";
    for body in ["0,u4,0,0,0,1,0\n", "0,u1,2,0,0,1,0\n", "1,u1,0,0,0,1,0\n0,u1,0,0,0,1,0\n", "0,u1,0,0\n"] {
        let text = format!("{header}{body}");
        assert!(ForcingSeries::read_csv(text.as_bytes(), 2).is_err(), "{body:?}");
    }
}

#[test]
fn loglog_slope_recovers_power_laws() {
    let x = [0.4, 0.2, 0.1, 0.05];
    let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powf(1.5)).collect();
    assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-12);
    assert!(loglog_slope(&x[..1], &y[..1]).is_nan());
    // non-positive samples are skipped
    assert!((loglog_slope(&[1.0, 2.0, 4.0], &[0.0, 2.0, 4.0]) - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_needs_a_decreasing_epsilon_list() {
    let cfg = LimitStudyConfig {
        n_x: 2,
        n_v: 2,
        nu_star: 1.0,
        kappa: 3f64.sqrt(),
        integrator: Integrator::Imex,
        dt: 1e-3,
        t_end: 1e-2,
        record_every: 1,
        well_prepared: None,
        initial: InitialMacro::zeros(2),
    };
    assert!(limit_study(&cfg, &[0.1, 0.2]).is_err());
    assert!(limit_study(&cfg, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn moment_identities_hold_on_random_fields(seed in any::<u64>(), eps in 0.05f64..1.0) {
        let basis = basis_for_nv(2).unwrap();
        let consts = ClosureConstants::compute(&basis).unwrap();
        let tensors = build_tensors(&basis, &consts).unwrap();
        let weights = FluxWeights::new(&basis);
        let p = KineticParams::with_default_kappa(eps, 0.7).unwrap();
        let f = random_field(Band::new(2, 2).unwrap(), 0.5, 0.6, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = rhs(&f, &p, &basis).unwrap();
        let res = moment_residuals(&f, &r, &p, &basis, &consts, &tensors, &weights).unwrap();
        prop_assert!(res.max() < 1e-9, "{res:?}");
    }
}
