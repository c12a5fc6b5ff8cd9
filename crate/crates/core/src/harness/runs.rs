use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{BandSpec, IntegratorKind, RunConfig};
use super::initial::{initial_macro, load_initial_with};
use super::HarnessError;
use crate::closure::{build_tensors, ClosureConstants, LimitGap};
use crate::dynamics::{
    energy_report, integrate, picard_solve, rhs, DynamicsError, EnergyReport, KineticParams, PicardReport, RunOptions,
    TrajectoryRecord,
};
use crate::hydro::{
    boussinesq_residual, forcing_terms, limit_study, moment_residuals, nsf_run, theta_tilde, FluxWeights, ForcingSeries,
    ForcingSource, LimitReport, LimitStudyConfig, NsfForcing, NsfState,
};
use crate::legendre_basis::basis_for_nv;
use crate::moment_oracle::{verify_closure_tables, ClosureReport};
use crate::projections::{leray, moments};
use crate::spectral_core::checkpoint::{save_field, save_xfield};
use crate::spectral_core::{divergence, x_norm};

/// Result of a subcommand: whether every hard invariant held, and the names
/// of the ones that did not.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    pub pass: bool,
    pub failures: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: &[(&str, bool)]) -> Self {
        let failures: Vec<String> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.to_string()).collect();
        Self { pass: failures.is_empty(), failures }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    threads: usize,
    config: &'a RunConfig,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

fn prepare_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig) -> Result<(), HarnessError> {
    let m = Manifest {
        tool: "kll",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.initial.seed,
        threads: rayon::current_num_threads(),
        config: cfg,
    };
    write_json(&dir.join("manifest.json"), &m)
}

/// One row of `series.csv`.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub energy_sq: f64,
    pub dissipation_sq: f64,
    pub cumulative_dissipation: f64,
    pub energy_margin: f64,
    pub residual_mass: f64,
    pub residual_momentum: f64,
    pub residual_energy: f64,
    pub residual_momentum_closed: f64,
    pub residual_energy_closed: f64,
    pub div_u_hminus1: f64,
    pub boussinesq_eps: f64,
    pub boussinesq_limit: f64,
    pub rho_l2: f64,
    pub u_l2: f64,
    pub theta_l2: f64,
    pub leray_u_l2: f64,
    pub forcing_u_l2: f64,
    pub forcing_theta_l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub integrator: IntegratorKind,
    pub n_x: usize,
    pub n_v: usize,
    /// `ℰ(f0)`, not squared.
    pub initial_energy: f64,
    pub final_energy: f64,
    pub steps: usize,
    pub energy: Option<EnergyReport>,
    pub max_identity_residual: f64,
    pub tol_identity: f64,
    pub picard: Option<PicardReport>,
    pub checkpoint_times: Vec<f64>,
    pub outcome: Outcome,
}

/// Everything a simulation produced, in memory.
#[derive(Clone, Debug)]
pub struct SimulateOutput {
    pub report: SimulateReport,
    pub series: Vec<SeriesRow>,
    pub forcing: ForcingSeries,
    pub final_field: crate::spectral_core::SpectralField,
}

fn l2_vec(u: &[crate::spectral_core::XField; 3]) -> f64 {
    u.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
}

/// Run one kinetic trajectory; files are written when `out` is given.
pub fn simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<SimulateOutput, HarnessError> {
    let params = cfg.params.kinetic()?;
    let band = cfg.band.resolve(params.epsilon)?;
    let basis = basis_for_nv(band.v_halfwidth())?;
    let init = load_initial_with(cfg, band, &basis)?;
    let tol_identity = cfg.tolerances.tol_identity;

    let output = match cfg.integrator.kind.stepper() {
        None => simulate_picard(cfg, &params, &basis, &init.field, init.energy)?,
        Some(integrator) => {
            let consts = ClosureConstants::compute(&basis)?;
            let tensors = build_tensors(&basis, &consts)?;
            let weights = FluxWeights::new(&basis);
            let mut opts = RunOptions::new(integrator, cfg.integrator.dt, cfg.integrator.t_end);
            opts.dt_cap = cfg.integrator.dt_cap;
            opts.checkpoint_every = cfg.outputs.checkpoint_every;
            let dt = opts.dt_cap.map_or(opts.dt, |c| crate::dynamics::capped_dt(opts.dt, &params, band.x_radius(), c));
            let n_steps = (opts.t_end / dt - 1e-9).ceil().max(0.0) as usize;
            let every = cfg.outputs.series_every.max(1);

            let mut sampled: Vec<(usize, SeriesRow)> = Vec::new();
            let mut forcing = ForcingSeries::default();
            let mut max_res = 0.0f64;
            let mut observer = |step: usize, t: f64, f: &crate::spectral_core::SpectralField| -> Result<(), DynamicsError> {
                if step % every != 0 && step != n_steps {
                    return Ok(());
                }
                let fail = |e: crate::hydro::HydroError| DynamicsError::Observer(e.to_string());
                let state = moments(f, &basis)?;
                let r = rhs(f, &params, &basis)?;
                let res = moment_residuals(f, &r, &params, &basis, &consts, &tensors, &weights).map_err(fail)?;
                max_res = max_res.max(res.max());
                let bq = boussinesq_residual(&state, &consts);
                let frame = NsfForcing::from_set(&forcing_terms(&state, &params), &params);
                let row = SeriesRow {
                    t,
                    energy_sq: 0.0,
                    dissipation_sq: 0.0,
                    cumulative_dissipation: 0.0,
                    energy_margin: 0.0,
                    residual_mass: res.mass,
                    residual_momentum: res.momentum,
                    residual_energy: res.energy,
                    residual_momentum_closed: res.momentum_closed,
                    residual_energy_closed: res.energy_closed,
                    div_u_hminus1: divergence(&state.u).hminus1_norm(),
                    boussinesq_eps: bq.eps_form,
                    boussinesq_limit: bq.limit_form,
                    rho_l2: state.rho.l2_norm(),
                    u_l2: l2_vec(&state.u),
                    theta_l2: state.theta.l2_norm(),
                    leray_u_l2: l2_vec(&leray(&state.u)),
                    forcing_u_l2: l2_vec(&frame.u),
                    forcing_theta_l2: frame.theta.l2_norm(),
                };
                forcing.push(t, frame);
                sampled.push((step, row));
                Ok(())
            };
            let (final_field, rec) = integrate(&init.field, &params, &basis, &opts, &mut observer)?;
            let energy = energy_report(&rec, &params, cfg.tolerances.tol_energy);
            let margins = rec.margins(&params);
            let series: Vec<SeriesRow> = sampled
                .into_iter()
                .map(|(k, mut row)| {
                    row.energy_sq = rec.energy_sq[k];
                    row.dissipation_sq = rec.dissipation_sq[k];
                    row.cumulative_dissipation = rec.cumulative_dissipation[k];
                    row.energy_margin = margins[k];
                    row
                })
                .collect();
            let outcome = Outcome::from_checks(&[("energy-inequality", energy.pass), ("moment-identities", max_res <= tol_identity)]);
            let report = SimulateReport {
                integrator: cfg.integrator.kind,
                n_x: band.x_radius(),
                n_v: band.v_halfwidth(),
                initial_energy: init.energy,
                final_energy: x_norm(&final_field).h1,
                steps: rec.len().saturating_sub(1),
                energy: Some(energy),
                max_identity_residual: max_res,
                tol_identity,
                picard: None,
                checkpoint_times: rec.checkpoints.iter().map(|c| c.0).collect(),
                outcome,
            };
            if let Some(dir) = out {
                prepare_dir(dir)?;
                for (k, (_, f)) in rec.checkpoints.iter().enumerate() {
                    save_field(&dir.join(format!("checkpoint_{k:04}.kll")), f)?;
                }
            }
            SimulateOutput { report, series, forcing, final_field }
        }
    };

    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_manifest(dir, "simulate", cfg)?;
        let mut w = csv::Writer::from_path(dir.join("series.csv"))?;
        for row in &output.series {
            w.serialize(row)?;
        }
        w.flush()?;
        output.forcing.write_csv(BufWriter::new(File::create(dir.join("forcing.csv"))?))?;
        save_field(&dir.join("final.kll"), &output.final_field)?;
        write_json(&dir.join("report.json"), &output.report)?;
    }
    Ok(output)
}

fn simulate_picard(
    cfg: &RunConfig,
    params: &KineticParams,
    basis: &crate::legendre_basis::BasisSet,
    f0: &crate::spectral_core::SpectralField,
    initial_energy: f64,
) -> Result<SimulateOutput, HarnessError> {
    let spec = &cfg.integrator;
    let report = picard_solve(f0, spec.t_end, spec.picard_iterations, spec.quad_dt, params, basis)?;
    let final_field = report.solution.clone();
    let row = |t: f64, f: &crate::spectral_core::SpectralField| -> Result<SeriesRow, HarnessError> {
        let (state, p) = crate::projections::macro_project(f, basis)?;
        let lf = f - &p;
        Ok(SeriesRow {
            t,
            energy_sq: x_norm(f).h1.powi(2),
            dissipation_sq: x_norm(&lf).h1.powi(2),
            cumulative_dissipation: f64::NAN,
            energy_margin: f64::NAN,
            residual_mass: f64::NAN,
            residual_momentum: f64::NAN,
            residual_energy: f64::NAN,
            residual_momentum_closed: f64::NAN,
            residual_energy_closed: f64::NAN,
            div_u_hminus1: divergence(&state.u).hminus1_norm(),
            boussinesq_eps: f64::NAN,
            boussinesq_limit: f64::NAN,
            rho_l2: state.rho.l2_norm(),
            u_l2: l2_vec(&state.u),
            theta_l2: state.theta.l2_norm(),
            leray_u_l2: l2_vec(&leray(&state.u)),
            forcing_u_l2: f64::NAN,
            forcing_theta_l2: f64::NAN,
        })
    };
    let series = vec![row(0.0, f0)?, row(spec.t_end, &final_field)?];
    let contracting = report.max_ratio < 1.0;
    let out = SimulateReport {
        integrator: IntegratorKind::Picard,
        n_x: f0.band().x_radius(),
        n_v: f0.band().v_halfwidth(),
        initial_energy,
        final_energy: x_norm(&final_field).h1,
        steps: report.nodes.saturating_sub(1),
        energy: None,
        max_identity_residual: 0.0,
        tol_identity: cfg.tolerances.tol_identity,
        checkpoint_times: Vec::new(),
        outcome: Outcome::from_checks(&[("picard-contraction", contracting)]),
        picard: Some(report),
    };
    Ok(SimulateOutput { report: out, series, forcing: ForcingSeries::default(), final_field })
}

/// `constants` output: the basis and closure constants of one band with
/// their distance to the limit values.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub n_v: usize,
    pub gram_residual: f64,
    pub constants: ClosureConstants,
    pub gaps: Vec<LimitGap>,
}

/// Gram matrices farther than this from the identity fail `constants`.
pub const GRAM_TOLERANCE: f64 = 1e-12;

pub fn constants_report(n_v: usize) -> Result<ConstantsReport, HarnessError> {
    let basis = basis_for_nv(n_v)?;
    let constants = ClosureConstants::compute(&basis)?;
    Ok(ConstantsReport { n_v, gram_residual: basis.gram_residual(), gaps: constants.gaps(), constants })
}

pub fn run_constants(n_v: usize, out: Option<&Path>) -> Result<Outcome, HarnessError> {
    let report = constants_report(n_v)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_json(&dir.join("constants.json"), &report)?;
        let mut w = csv::Writer::from_path(dir.join("constants.csv"))?;
        for g in &report.gaps {
            w.serialize(g)?;
        }
        w.flush()?;
    }
    Ok(Outcome::from_checks(&[("gram-orthonormality", report.gram_residual <= GRAM_TOLERANCE)]))
}

pub fn run_verify_closure(out: Option<&Path>) -> Result<(ClosureReport, Outcome), HarnessError> {
    let report = verify_closure_tables();
    match out {
        Some(dir) => {
            prepare_dir(dir)?;
            report.write_csv(File::create(dir.join("closure.csv"))?)?;
        }
        None => report.write_csv(std::io::stdout().lock())?,
    }
    for r in &report.rows {
        eprintln!("{:<5} {:<20} {:<40} expected {:<18} computed {}", if r.pass { "ok" } else { "FAIL" }, r.group, r.symbol, r.expected, r.computed);
    }
    let failures: Vec<String> = report.failures().iter().map(|r| format!("closure-table {}", r.symbol)).collect();
    let outcome = Outcome { pass: failures.is_empty(), failures };
    Ok((report, outcome))
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: Option<f64>,
    energy_margin_min: f64,
    max_identity_residual: f64,
    remainder: f64,
}

/// Sweep configuration from a run configuration.
pub fn limit_config(cfg: &RunConfig) -> Result<LimitStudyConfig, HarnessError> {
    let BandSpec::Explicit { n_x, n_v } = cfg.band else {
        return Err(HarnessError::Config("limit-study compares members on one band; give band.n_x and band.n_v".into()));
    };
    if cfg.initial.modes.iter().any(|m| m.m.is_some()) {
        return Err(HarnessError::Config("limit-study takes macroscopic initial data; drop modes with m".into()));
    }
    let integrator = cfg
        .integrator
        .kind
        .stepper()
        .ok_or_else(|| HarnessError::Config("limit-study needs a time stepper (imex or rk4)".into()))?;
    Ok(LimitStudyConfig {
        n_x,
        n_v,
        nu_star: cfg.params.nu_star,
        kappa: cfg.params.kappa,
        integrator,
        dt: cfg.integrator.dt,
        t_end: cfg.integrator.t_end,
        record_every: cfg.outputs.series_every.max(1),
        well_prepared: cfg.initial.well_prepared,
        initial: initial_macro(&cfg.initial, n_x)?,
    })
}

pub fn run_limit_study(cfg: &RunConfig, eps_list: &[f64], out: Option<&Path>) -> Result<(LimitReport, Outcome), HarnessError> {
    let lc = limit_config(cfg)?;
    let (report, runs) = limit_study(&lc, eps_list)?;
    let tol = cfg.tolerances.tol_identity;
    let identities_ok = runs.iter().all(|r| r.max_identity_residual <= tol);
    let energy_ok = runs.iter().all(|r| r.energy.pass);
    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_manifest(dir, "limit-study", cfg)?;
        write_json(&dir.join("limit_report.json"), &report)?;
        let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
        for p in &report.per_eps {
            w.serialize(SweepRow {
                epsilon: p.epsilon,
                s1: p.s1,
                s2: p.s2,
                s3: p.s3,
                s4: p.s4,
                energy_margin_min: p.energy_margin_min,
                max_identity_residual: p.max_identity_residual,
                remainder: p.remainder,
            })?;
        }
        w.flush()?;
        for r in &runs {
            let member = dir.join(format!("eps_{}", r.epsilon));
            prepare_dir(&member)?;
            r.forcing.write_csv(BufWriter::new(File::create(member.join("forcing.csv"))?))?;
            save_field(&member.join("final.kll"), &r.final_field)?;
        }
    }
    for flag in &report.flags {
        eprintln!("trend: {flag}");
    }
    let outcome = Outcome::from_checks(&[("moment-identities", identities_ok), ("energy-inequality", energy_ok)]);
    Ok((report, outcome))
}

#[derive(Clone, Debug, Serialize)]
pub struct NsfRow {
    pub t: f64,
    pub kinetic_energy: f64,
    pub theta_tilde_l2: f64,
    pub divergence_l2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NsfReport {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub forcing: Option<String>,
    pub max_divergence: f64,
    /// Largest step-to-step increase of `½||u||^2`; checked only without forcing.
    pub max_energy_increase: f64,
    pub outcome: Outcome,
}

/// Above this `||div u||` the limit solver fails its solenoidal invariant.
pub const NSF_DIVERGENCE_TOLERANCE: f64 = 1e-10;

/// Run the limit solver from the moments of the lifted initial data.
pub fn run_nsf(cfg: &RunConfig, forcing_path: Option<&Path>, out: Option<&Path>) -> Result<(NsfReport, Vec<NsfRow>), HarnessError> {
    let params = cfg.params.kinetic()?;
    let band = cfg.band.resolve(params.epsilon)?;
    let basis = basis_for_nv(band.v_halfwidth())?;
    let init = load_initial_with(cfg, band, &basis)?;
    let state = moments(&init.field, &basis)?;
    let s0 = NsfState::new(leray(&state.u), theta_tilde(&state), params.nu())?;

    let path: Option<PathBuf> = forcing_path.map(Path::to_path_buf).or_else(|| cfg.nsf.forcing.as_ref().map(PathBuf::from));
    let series = match &path {
        Some(p) => {
            let s = ForcingSeries::read_csv(File::open(p)?, band.x_radius())?;
            if s.times.is_empty() {
                return Err(HarnessError::Config(format!("forcing file {} has no rows", p.display())));
            }
            Some(s)
        }
        None => None,
    };
    let source: Option<&dyn ForcingSource> = series.as_ref().map(|s| s as &dyn ForcingSource);
    let t_end = cfg.nsf.t_end.unwrap_or(cfg.integrator.t_end);
    let mut rows = Vec::new();
    let final_state = nsf_run(&s0, cfg.nsf.dt, t_end, source, |t, s| {
        rows.push(NsfRow { t, kinetic_energy: s.kinetic_energy(), theta_tilde_l2: s.theta_tilde.l2_norm(), divergence_l2: s.divergence_norm() });
    })?;
    let max_divergence = rows.iter().map(|r| r.divergence_l2).fold(0.0, f64::max);
    let max_energy_increase = rows.windows(2).map(|w| w[1].kinetic_energy - w[0].kinetic_energy).fold(0.0, f64::max);
    let e0 = rows.first().map_or(0.0, |r| r.kinetic_energy);
    let mut checks = vec![("solenoidal-velocity", max_divergence <= NSF_DIVERGENCE_TOLERANCE)];
    if series.is_none() {
        checks.push(("energy-non-increasing", max_energy_increase <= 1e-12 * (1.0 + e0)));
    }
    let report = NsfReport {
        nu: params.nu(),
        dt: cfg.nsf.dt,
        t_end,
        forcing: path.map(|p| p.display().to_string()),
        max_divergence,
        max_energy_increase,
        outcome: Outcome::from_checks(&checks),
    };
    if let Some(dir) = out {
        prepare_dir(dir)?;
        write_manifest(dir, "nsf", cfg)?;
        let mut w = csv::Writer::from_path(dir.join("nsf_series.csv"))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        write_json(&dir.join("nsf_report.json"), &report)?;
        for (i, c) in final_state.u.iter().enumerate() {
            save_xfield(&dir.join(format!("nsf_final_u{}.kll", i + 1)), c)?;
        }
        save_xfield(&dir.join("nsf_final_theta_tilde.kll"), &final_state.theta_tilde)?;
    }
    Ok((report, rows))
}

/// Re-read the energy columns of a `series.csv` and scan the margin.
///
/// The running dissipation integral is taken from the file, so a series
/// written with `series_every > 1` is analysed without loss.
pub fn energy_report_from_series(path: &Path, params: &KineticParams, tol: Option<f64>) -> Result<EnergyReport, HarnessError> {
    #[derive(serde::Deserialize)]
    struct Row {
        t: f64,
        energy_sq: f64,
        dissipation_sq: f64,
        cumulative_dissipation: f64,
    }
    let mut rec = TrajectoryRecord::default();
    let mut rdr = csv::Reader::from_path(path)?;
    for row in rdr.deserialize() {
        let row: Row = row?;
        rec.times.push(row.t);
        rec.energy_sq.push(row.energy_sq);
        rec.dissipation_sq.push(row.dissipation_sq);
        rec.cumulative_dissipation.push(row.cumulative_dissipation);
    }
    if rec.is_empty() {
        return Err(HarnessError::Config(format!("{} has no rows", path.display())));
    }
    if rec.cumulative_dissipation.iter().any(|c| c.is_nan()) {
        return Err(HarnessError::Config(format!("{} has no dissipation integral (a picard run?)", path.display())));
    }
    Ok(energy_report(&rec, params, tol))
}
