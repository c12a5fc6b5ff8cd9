use kll_core::legendre_basis::basis_for_nv;
use kll_core::projections::{helmholtz_project, leray, macro_project, micro_project, moments, orthogonal_split, relax};
use kll_core::spectral_core::random::{random_field, random_xfield};
use kll_core::spectral_core::{cutoff_x, divergence, gradient, Band, SpectralField, XField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_u(n_x: usize, seed: u64) -> [XField; 3] {
    let mut r = rng(seed);
    std::array::from_fn(|_| random_xfield(n_x, 1.0, &mut r))
}

#[test]
fn band_mismatch_is_an_error() {
    let basis = basis_for_nv(3).unwrap();
    let f = SpectralField::zeros(Band::new(2, 2).unwrap());
    assert!(moments(&f, &basis).is_err());
}

#[test]
fn helmholtz_parts_of_a_pure_gradient() {
    let phi = random_xfield(3, 1.0, &mut rng(11));
    let g = gradient(&phi);
    let (p, q) = helmholtz_project(&g);
    for i in 0..3 {
        assert!(p[i].max_abs() < 1e-12);
        assert!(q[i].max_abs_diff(&g[i]) < 1e-12);
    }
}

#[test]
fn mean_flow_is_solenoidal() {
    let mut u: [XField; 3] = std::array::from_fn(|_| XField::zeros(2));
    u[0] = XField::constant(2, 0.7);
    let p = leray(&u);
    assert!(p[0].max_abs_diff(&u[0]) < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn macro_projection_is_an_orthogonal_idempotent(seed in any::<u64>()) {
        let basis = basis_for_nv(2).unwrap();
        let band = Band::new(2, 2).unwrap();
        let f = random_field(band, 1.0, 0.8, &mut rng(seed));
        let (_, p) = macro_project(&f, &basis).unwrap();
        let (_, pp) = macro_project(&p, &basis).unwrap();
        prop_assert!(pp.max_abs_diff(&p) < 1e-12);
        let l = micro_project(&f, &basis).unwrap();
        let ll = micro_project(&l, &basis).unwrap();
        prop_assert!(ll.max_abs_diff(&l) < 1e-12);
        prop_assert!(p.inner(&l).norm() < 1e-12);
        for h1 in [false, true] {
            let s = orthogonal_split(&f, &basis, h1).unwrap();
            prop_assert!(s.defect < 1e-10 * (1.0 + s.total_sq));
        }
    }

    #[test]
    fn projection_commutes_with_the_x_cutoff(seed in any::<u64>()) {
        let basis = basis_for_nv(2).unwrap();
        let f = random_field(Band::new(3, 2).unwrap(), 1.0, 0.8, &mut rng(seed));
        let (_, pf) = macro_project(&f, &basis).unwrap();
        let (_, pc) = macro_project(&cutoff_x(&f, 2), &basis).unwrap();
        prop_assert!(cutoff_x(&pf, 2).max_abs_diff(&pc) < 1e-12);
    }

    #[test]
    fn relaxation_is_a_semigroup(seed in any::<u64>(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let basis = basis_for_nv(2).unwrap();
        let f = random_field(Band::new(2, 2).unwrap(), 1.0, 0.8, &mut rng(seed));
        let two = relax(&relax(&f, a, &basis).unwrap(), b, &basis).unwrap();
        let one = relax(&f, a + b, &basis).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
        prop_assert!(relax(&f, 0.0, &basis).unwrap().max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn leray_projection_properties(seed in any::<u64>()) {
        let u = random_u(2, seed);
        let p = leray(&u);
        let pp = leray(&p);
        for i in 0..3 {
            prop_assert!(pp[i].max_abs_diff(&p[i]) < 1e-12);
        }
        prop_assert!(divergence(&p).max_abs() < 1e-12);
        let phi = random_xfield(2, 1.0, &mut rng(seed ^ 7));
        let pg = leray(&gradient(&phi));
        prop_assert!(pg.iter().all(|c| c.max_abs() < 1e-12));
        let (ps, q) = helmholtz_project(&u);
        for i in 0..3 {
            let mut s = ps[i].clone();
            s += &q[i];
            prop_assert!(s.max_abs_diff(&u[i]) < 1e-12);
        }
        let cross: f64 = (0..3).map(|i| ps[i].inner(&q[i]).re).sum();
        prop_assert!(cross.abs() < 1e-12);
    }
}
