use kll_core::closure::{brackets, build_tensors, limits, ClosureConstants};
use kll_core::legendre_basis::{basis_for_nv, saw_norm_sq};
use kll_core::spectral_core::inner_v;

fn constants(n: usize) -> ClosureConstants {
    ClosureConstants::compute(&basis_for_nv(n).unwrap()).unwrap()
}

#[test]
fn brackets_match_plancherel_sums() {
    for n in [2, 5, 9] {
        let br = brackets(&basis_for_nv(n).unwrap());
        assert!((br.vsq_mean - 1.0 / 12.0).abs() < 1e-15);
        assert!((br.saw_saw - saw_norm_sq(n)).abs() < 1e-15);
    }
}

#[test]
fn tensors_are_kernel_orthogonal() {
    for n in [2, 3, 4, 6] {
        let basis = basis_for_nv(n).unwrap();
        let k = ClosureConstants::compute(&basis).unwrap();
        let t = build_tensors(&basis, &k).unwrap();
        assert!(t.a_residual < 1e-12 && t.b_residual < 1e-12, "N_v = {n}: {} {}", t.a_residual, t.b_residual);
    }
}

#[test]
fn off_diagonal_brackets_follow_the_parity_catalogue() {
    let basis = basis_for_nv(3).unwrap();
    let k = ClosureConstants::compute(&basis).unwrap();
    let t = build_tensors(&basis, &k).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for p in 0..3 {
                for q in 0..3 {
                    let v = inner_v(&t.a[i][j], &t.a[p][q]);
                    let allowed = (i == j && p == q) || (i == p && j == q) || (i == q && j == p);
                    if !allowed {
                        assert!(v.abs() < 1e-14, "<A_{i}{j} A_{p}{q}> = {v}");
                    }
                }
            }
        }
        for j in 0..3 {
            let v = inner_v(&t.b[i], &t.b[j]);
            if i != j {
                assert!(v.abs() < 1e-14);
            } else {
                assert!(v > 0.0);
            }
        }
    }
}

fn gap(k: &ClosureConstants, name: &str) -> f64 {
    k.gaps().into_iter().find(|g| g.name == name).unwrap().gap
}

/// The sawtooth tail `Σ_{|m|>=N} (2πm)^{-2} ≈ 1/(2π² N)` makes every
/// constant converge at first order in `1/N_v`.
#[test]
fn gaps_converge_at_first_order() {
    let (k64, k128) = (constants(64), constants(128));
    for name in ["a", "b", "c", "mu1", "mu2", "mu5", "c1"] {
        let r = gap(&k128, name) / gap(&k64, name);
        assert!((0.45..0.55).contains(&r), "{name}: ratio {r}");
    }
    // det D converges at third order
    assert!(gap(&k128, "det_D") / gap(&k64, "det_D") < 0.15);
}

#[test]
fn constants_reach_the_limits_on_a_wide_band() {
    let k = constants(1024);
    for name in ["a", "b", "c", "det_D", "mu1", "mu2", "mu5"] {
        assert!(gap(&k, name) < 1e-3, "{name}: {}", gap(&k, name));
    }
    // at N_v = 64 only c and det D are within 1e-3
    let k = constants(64);
    assert!(gap(&k, "c") < 1e-3 && gap(&k, "det_D") < 1e-3);
    assert!(gap(&k, "a") > 5e-3);
}

#[test]
fn gaps_shrink_as_the_band_doubles() {
    let rows: Vec<ClosureConstants> = [16, 32, 64].into_iter().map(constants).collect();
    for name in ["a", "b", "c", "det_D", "mu1", "mu2", "mu5"] {
        let g: Vec<f64> = rows.iter().map(|k| k.gaps().into_iter().find(|g| g.name == name).unwrap().gap).collect();
        assert!(g[1] < g[0] && g[2] < g[1], "{name}: {g:?}");
    }
}

#[test]
fn limit_values_of_derived_constants() {
    // μ1 = a c1/c2 and μ2 = 3 a c0 c1/c2 + b c1 evaluated at the limits
    let mu1 = limits::A * limits::c1() / limits::c2();
    let mu2 = limits::c1() * (3.0 * limits::A * limits::c0() / limits::c2() + limits::B);
    assert!((mu1 - limits::mu1()).abs() < 1e-15);
    assert!((mu2 - limits::mu2()).abs() < 1e-15);
    let mu5 = limits::c2() * limits::C - 3.0 * limits::c0();
    assert!((mu5 - limits::mu5()).abs() < 1e-14);
}

#[test]
#[should_panic(expected = "μ index")]
fn mu_index_is_one_based() {
    constants(2).mu(0);
}
