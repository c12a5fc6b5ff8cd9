//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 1, 2, 7 and 9 are known to fail for documented reasons (see the
//! README). The binary exits nonzero only when some other criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use kll_core::closure::{build_tensors, ClosureConstants};
use kll_core::dynamics::{homogeneous_solution, integrate, picard_solve, DynamicsError, Integrator, KineticParams, RunOptions};
use kll_core::harness::{limit_config, simulate, RunConfig, SimulateOutput};
use kll_core::hydro::{limit_solver_gap, limit_study, nsf_run, NsfState};
use kll_core::legendre_basis::basis_for_nv;
use kll_core::moment_oracle::{verify_closure_tables, ACCEPTANCE_SYMBOLS};
use kll_core::projections::{helmholtz_project, leray, macro_project, micro_project, orthogonal_split};
use kll_core::spectral_core::bernstein::bernstein_check;
use kll_core::spectral_core::random::{random_field, random_xfield};
use kll_core::spectral_core::{cutoff, cutoff_v, cutoff_x, divergence, gradient, Band, SpectralField, XField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CLOSURE_RUNTIME: f64 = 1.0;
const CONSTANTS_GAP: f64 = 1e-3;
const CONSTANTS_RUNTIME: f64 = 10.0;
const STRUCTURAL_FIELDS: u64 = 200;
const STRUCTURAL_TOL: f64 = 1e-12;
const STRUCTURAL_RUNTIME: f64 = 30.0;
const IDENTITY_TOL: f64 = 1e-9;
const ENERGY_TOL_REL: f64 = 1e-6;
const ENERGY_SHRINK: f64 = 4.0;
const ODE_TOL_REL: f64 = 1e-6;
const BERNSTEIN_FIELDS: u64 = 100;
const DECAY_TOL_REL: f64 = 0.01;
const GAP_FACTOR: f64 = 5.0;
const LIMIT_RUNTIME: f64 = 900.0;

const EXPECTED_FAILURES: [u32; 4] = [1, 2, 7, 9];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn closure_table() -> Verdict {
    let report = verify_closure_tables();
    let missing: Vec<&str> = ACCEPTANCE_SYMBOLS.iter().copied().filter(|s| report.find(s).is_none()).collect();
    let failures: Vec<String> =
        report.failures().iter().map(|r| format!("{} expected {} computed {}", r.symbol, r.expected, r.computed)).collect();
    let fast = report.elapsed_seconds < CLOSURE_RUNTIME;
    Verdict {
        id: 1,
        name: "closure-table",
        pass: missing.is_empty() && failures.is_empty() && fast,
        detail: format!(
            "{} rows, {} mismatches [{}], missing {:?}, {:.3} s",
            report.rows.len(),
            failures.len(),
            failures.join("; "),
            missing,
            report.elapsed_seconds
        ),
    }
}

fn constants_convergence() -> Verdict {
    let start = Instant::now();
    let names = ["a", "b", "c", "det_D", "mu1", "mu2", "mu5"];
    let rows: Vec<Vec<f64>> = [16, 32, 64]
        .into_iter()
        .map(|n| {
            let k = ClosureConstants::compute(&basis_for_nv(n).unwrap()).unwrap();
            let gaps = k.gaps();
            names.iter().map(|name| gaps.iter().find(|g| g.name == *name).unwrap().gap).collect()
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let over: Vec<String> =
        names.iter().zip(&rows[2]).filter(|(_, g)| **g >= CONSTANTS_GAP).map(|(n, g)| format!("{n} {g:.2e}")).collect();
    let non_monotone: Vec<&str> =
        names.iter().enumerate().filter(|(i, _)| !(rows[1][*i] < rows[0][*i] && rows[2][*i] < rows[1][*i])).map(|(_, n)| *n).collect();
    Verdict {
        id: 2,
        name: "constants-convergence",
        pass: over.is_empty() && non_monotone.is_empty() && elapsed < CONSTANTS_RUNTIME,
        detail: format!(
            "gaps at N_v = 64 above {CONSTANTS_GAP:e}: [{}]; strict decrease 16 -> 32 -> 64 {}; {elapsed:.2} s",
            over.join(", "),
            if non_monotone.is_empty() { "holds for all".to_string() } else { format!("fails for {non_monotone:?}") }
        ),
    }
}

fn structural() -> Verdict {
    let start = Instant::now();
    let basis = basis_for_nv(2).unwrap();
    let band = Band::new(2, 2).unwrap();
    let consts = ClosureConstants::compute(&basis).unwrap();
    let tensors = build_tensors(&basis, &consts).unwrap();
    let worst = (0..STRUCTURAL_FIELDS)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = Vec::new();
            // band-limit a wider field to exercise the cutoffs
            let wide = random_field(Band::new(3, 3).unwrap(), 1.0, 0.8, &mut rng);
            let f = cutoff(&wide, band);
            r.push(cutoff(&f, band).max_abs_diff(&f));
            r.push(cutoff_x(&cutoff_v(&wide, 2), 2).max_abs_diff(&f));
            r.push(cutoff_v(&cutoff_x(&wide, 2), 2).max_abs_diff(&f));
            let (_, p) = macro_project(&f, &basis).unwrap();
            r.push(macro_project(&p, &basis).unwrap().1.max_abs_diff(&p));
            let l = micro_project(&f, &basis).unwrap();
            r.push(micro_project(&l, &basis).unwrap().max_abs_diff(&l));
            r.push(p.inner(&l).norm());
            for h1 in [false, true] {
                let s = orthogonal_split(&f, &basis, h1).unwrap();
                r.push(s.defect / (1.0 + s.total_sq));
            }
            let xwide = random_field(Band::new(3, 2).unwrap(), 1.0, 0.8, &mut rng);
            let (_, pw) = macro_project(&xwide, &basis).unwrap();
            let (_, pc) = macro_project(&cutoff_x(&xwide, 2), &basis).unwrap();
            r.push(cutoff_x(&pw, 2).max_abs_diff(&pc));
            let u: [XField; 3] = std::array::from_fn(|_| random_xfield(2, 1.0, &mut rng));
            let pu = leray(&u);
            let ppu = leray(&pu);
            r.extend((0..3).map(|i| ppu[i].max_abs_diff(&pu[i])));
            r.push(divergence(&pu).max_abs());
            let phi = random_xfield(2, 1.0, &mut rng);
            r.extend(leray(&gradient(&phi)).iter().map(XField::max_abs));
            let (ps, q) = helmholtz_project(&u);
            r.extend((0..3).map(|i| {
                let mut s = ps[i].clone();
                s += &q[i];
                s.max_abs_diff(&u[i])
            }));
            r.into_iter().fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let worst = worst.max(tensors.a_residual).max(tensors.b_residual);
    let elapsed = start.elapsed().as_secs_f64();
    Verdict {
        id: 3,
        name: "structural-exactness",
        pass: worst <= STRUCTURAL_TOL && elapsed < STRUCTURAL_RUNTIME,
        detail: format!(
            "max residual {worst:.2e} over {STRUCTURAL_FIELDS} fields (kernel orthogonality {:.1e}, {:.1e}); {elapsed:.2} s",
            tensors.a_residual, tensors.b_residual
        ),
    }
}

const SUITE_BASE: &str = r#"
[band]
n_x = 2
n_v = 2

[params]
epsilon = 0.2
nu_star = 1.0

[integrator]
kind = "imex"
dt = 1e-3
t_end = 0.5
"#;

const SUITE: [(&str, &str); 3] = [
    ("homogeneous", "[initial]\npreset = \"zero\"\n[[initial.modes]]\nn = [0, 0, 0]\ncomponent = \"rho\"\nre = 0.8\n"),
    ("shear", "[initial]\npreset = \"single_mode_shear\"\namplitude = 0.5\n"),
    ("random", "[initial]\npreset = \"random_seeded\"\namplitude = 0.1\nseed = 7\ndecay = 0.5\n"),
];

/// Suite runs at `dt = 1e-3 / 2^k`, sampled on the common 1e-3 grid.
fn suite_runs() -> Vec<Vec<SimulateOutput>> {
    let jobs: Vec<(usize, u32)> = (0..SUITE.len()).flat_map(|r| (0..3).map(move |k| (r, k))).collect();
    let outs: Vec<SimulateOutput> = jobs
        .par_iter()
        .map(|&(r, k)| {
            let dt = 1e-3 / f64::from(1u32 << k);
            let overrides = vec![format!("integrator.dt={dt:e}"), format!("outputs.series_every={}", 1u32 << k)];
            let cfg = RunConfig::from_toml(&format!("{SUITE_BASE}{}", SUITE[r].1), &overrides).unwrap();
            simulate(&cfg, None).unwrap()
        })
        .collect();
    let mut it = outs.into_iter();
    (0..SUITE.len()).map(|_| it.by_ref().take(3).collect()).collect()
}

fn moment_identities(runs: &[Vec<SimulateOutput>]) -> Verdict {
    let res: Vec<f64> = runs.iter().map(|r| r[0].report.max_identity_residual).collect();
    let detail = SUITE.iter().zip(&res).map(|((n, _), r)| format!("{n} {r:.2e}")).collect::<Vec<_>>().join(", ");
    Verdict {
        id: 4,
        name: "moment-identities",
        pass: res.iter().all(|r| *r <= IDENTITY_TOL),
        detail: format!("max residual per run at dt = 1e-3, every step: {detail}"),
    }
}

fn margins(out: &SimulateOutput) -> Vec<f64> {
    out.series.iter().map(|r| r.energy_margin).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn energy_inequality(runs: &[Vec<SimulateOutput>]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for ((name, _), r) in SUITE.iter().zip(runs) {
        let e0 = r[0].series[0].energy_sq;
        let worst: Vec<f64> = r.iter().map(|o| (-margins(o).into_iter().fold(0.0, f64::min)).max(0.0)).collect();
        let bounded = worst.iter().all(|w| *w <= ENERGY_TOL_REL * e0);
        // a zero violation cannot shrink further
        let shrinks = worst.windows(2).all(|w| w[0] == 0.0 || w[1] * ENERGY_SHRINK <= w[0]);
        let (m0, m1, m2) = (margins(&r[0]), margins(&r[1]), margins(&r[2]));
        let aligned = m0.len() == m1.len() && m1.len() == m2.len();
        let order = if aligned { max_diff(&m0, &m1) / max_diff(&m1, &m2) } else { f64::NAN };
        pass &= bounded && shrinks;
        parts.push(format!(
            "{name}: worst violation {:.1e}/{:.1e}/{:.1e} of ℰ0² = {e0:.3e}, margin self-convergence ratio {order:.2}",
            worst[0], worst[1], worst[2]
        ));
    }
    Verdict { id: 5, name: "energy-inequality", pass, detail: parts.join("; ") }
}

fn ode_oracle() -> Verdict {
    let band = Band::new(2, 2).unwrap();
    let basis = basis_for_nv(2).unwrap();
    let p = KineticParams::with_default_kappa(0.2, 1.0).unwrap();
    let f0 = 1.0;
    let mean = |f: &SpectralField| f.get([0; 3], [0; 3]).re;
    let mut errs = Vec::new();
    for integrator in [Integrator::Imex, Integrator::Rk4] {
        let opts = RunOptions::new(integrator, 1e-3, 1.0);
        let mut none = |_: usize, _: f64, _: &SpectralField| -> Result<(), DynamicsError> { Ok(()) };
        let (f, _) = integrate(&SpectralField::constant(band, f0), &p, &basis, &opts, &mut none).unwrap();
        let exact = homogeneous_solution(f0, 1.0, &p);
        errs.push(((mean(&f) - exact) / exact).abs());
    }
    let pic = picard_solve(&SpectralField::constant(band, f0), 0.05, 30, 1e-3, &p, &basis).unwrap();
    let exact = homogeneous_solution(f0, 0.05, &p);
    errs.push(((mean(&pic.solution) - exact) / exact).abs());
    Verdict {
        id: 6,
        name: "ode-oracle",
        pass: errs.iter().all(|e| *e < ODE_TOL_REL),
        detail: format!("relative errors imex {:.1e}, rk4 {:.1e}, picard {:.1e}", errs[0], errs[1], errs[2]),
    }
}

const SWEEP: &str = r#"
[band]
n_x = 2
n_v = 2

[params]
epsilon = 0.4
nu_star = 1.0

[integrator]
kind = "imex"
dt = 1e-3
t_end = 0.5

[initial]
preset = "cellular"
amplitude = 0.5
well_prepared = "epsilon"
"#;

const EPS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn limit_trends_and_solver() -> (Verdict, Verdict) {
    let start = Instant::now();
    let cfg = limit_config(&RunConfig::from_toml(SWEEP, &[]).unwrap()).unwrap();
    let (report, runs) = limit_study(&cfg, &EPS).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let c = &report.checks;
    let col = |f: &dyn Fn(&kll_core::hydro::PerEps) -> f64| {
        report.per_eps.iter().map(|p| format!("{:.3e}", f(p))).collect::<Vec<_>>().join(" ")
    };
    let trends = Verdict {
        id: 7,
        name: "limit-trends",
        pass: c.s1_slope_in_range && c.s2_decreasing && c.s3_decreasing && c.s4_decreasing && elapsed < LIMIT_RUNTIME,
        detail: format!(
            "s1 slope {:.2} ({}); div u decreasing {} [{}]; Boussinesq limit form decreasing {} [{}]; \
             consecutive-ε gap decreasing {} [{}]; {elapsed:.1} s",
            report.slopes.s1,
            if c.s1_slope_in_range { "in range" } else { "out of range" },
            c.s2_decreasing,
            col(&|p| p.s2),
            c.s3_decreasing,
            col(&|p| p.s3),
            c.s4_decreasing,
            col(&|p| p.s4.unwrap_or(f64::NAN)),
        ),
    };

    let (decay_ok, decay_detail) = solenoidal_decay();
    let last = runs.last().unwrap();
    let bound = GAP_FACTOR * report.per_eps.last().unwrap().s4.unwrap();
    let gap = limit_solver_gap(last, cfg.nu_star / 12.0, 1e-3, true).unwrap();
    let solver = Verdict {
        id: 9,
        name: "limit-solver",
        pass: decay_ok && gap <= bound,
        detail: format!(
            "{decay_detail}; forced gap at ε = {} is {gap:.3e} against {GAP_FACTOR} x s4 = {bound:.3e}",
            last.epsilon
        ),
    };
    (trends, solver)
}

fn solenoidal_decay() -> (bool, String) {
    let nu = 1.0 / 12.0;
    let t_end = 0.1;
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, k2) in [([0, 1, 0], 1.0), ([0, 1, 1], 2.0)] {
        let u = [XField::sine(3, k, 0.5), XField::zeros(3), XField::zeros(3)];
        let s0 = NsfState::new(u, XField::zeros(3), nu).unwrap();
        let end = nsf_run(&s0, 1e-4, t_end, None, |_, _| {}).unwrap();
        let rate = -(end.kinetic_energy() / s0.kinetic_energy()).ln() / t_end;
        let want = 2.0 * nu * 4.0 * PI * PI * k2;
        let rel = (rate / want - 1.0).abs();
        ok &= rel < DECAY_TOL_REL;
        parts.push(format!("|k|² = {k2}: rate {rate:.4} vs {want:.4}"));
    }
    (ok, parts.join(", "))
}

fn bernstein() -> Verdict {
    let mut checks = 0;
    let mut violations = 0;
    for seed in 0..BERNSTEIN_FIELDS {
        let n = 2 + (seed % 2) as usize;
        let h = random_xfield(n, 1.0, &mut ChaCha8Rng::seed_from_u64(1000 + seed));
        for alpha in [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            for (p, q) in [(1.0, 2.0), (2.0, f64::INFINITY)] {
                checks += 1;
                if !bernstein_check(&h, alpha, p, q, 16).holds {
                    violations += 1;
                }
            }
        }
    }
    Verdict {
        id: 8,
        name: "bernstein",
        pass: violations == 0,
        detail: format!("{violations} violations in {checks} checks on {BERNSTEIN_FIELDS} fields"),
    }
}

fn main() {
    let mut verdicts = vec![closure_table(), constants_convergence(), structural()];
    let runs = suite_runs();
    verdicts.push(moment_identities(&runs));
    verdicts.push(energy_inequality(&runs));
    verdicts.push(ode_oracle());
    let (trends, solver) = limit_trends_and_solver();
    verdicts.push(trends);
    verdicts.push(bernstein());
    verdicts.push(solver);
    verdicts.sort_by_key(|v| v.id);

    let mut unexpected = Vec::new();
    for v in &verdicts {
        println!("{} criterion {} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.name, v.detail);
        let expected = EXPECTED_FAILURES.contains(&v.id);
        if !v.pass && !expected {
            unexpected.push(v.id);
        }
        if v.pass && expected {
            println!("notice: criterion {} is listed as an expected failure but passed", v.id);
        }
    }
    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!("acceptance: {} of {} criteria pass; failing {:?}, expected {:?}", verdicts.len() - failed.len(), verdicts.len(), failed, EXPECTED_FAILURES);
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
