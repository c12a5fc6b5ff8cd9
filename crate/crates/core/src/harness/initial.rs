use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{InitialSpec, ModeSpec, Preset, RunConfig};
use super::HarnessError;
use crate::hydro::InitialMacro;
use crate::legendre_basis::{basis_for_nv, BasisSet};
use crate::spectral_core::random::random_field;
use crate::spectral_core::{x_norm, Band, SpectralField, XField};

/// The lifted initial field together with `ℰ(f0)`.
#[derive(Clone, Debug)]
pub struct LoadedInitial {
    pub field: SpectralField,
    pub energy: f64,
    pub seed: u64,
    pub band: Band,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MacroComponent {
    Rho,
    U(usize),
    Theta,
}

fn parse_component(name: &str) -> Result<MacroComponent, HarnessError> {
    Ok(match name {
        "rho" => MacroComponent::Rho,
        "u1" => MacroComponent::U(0),
        "u2" => MacroComponent::U(1),
        "u3" => MacroComponent::U(2),
        "theta" => MacroComponent::Theta,
        other => {
            return Err(HarnessError::Config(format!("unknown component {other:?}; expected rho, u1, u2, u3 or theta")))
        }
    })
}

fn is_zero(k: [i64; 3]) -> bool {
    k == [0, 0, 0]
}

fn check_self_mirrored(mode: &ModeSpec, self_mirrored: bool) -> Result<(), HarnessError> {
    if self_mirrored && mode.im != 0.0 {
        return Err(HarnessError::Config(format!("mode n = {:?} is its own mirror and needs im = 0", mode.n)));
    }
    Ok(())
}

/// Add `value` at `n` and its conjugate at `-n`.
fn add_real_pair_x(f: &mut XField, n: [i64; 3], value: Complex64) {
    if is_zero(n) {
        f.set(n, f.get(n) + value.re);
        return;
    }
    let m = n.map(|c| -c);
    f.set(n, f.get(n) + value);
    f.set(m, f.get(m) + value.conj());
}

fn out_of_band(modes: &[ModeSpec], band: Band) -> Vec<String> {
    modes
        .iter()
        .filter(|md| !band.keeps_x(md.n) || md.m.is_some_and(|m| !band.keeps_v(m)))
        .map(|md| match md.m {
            Some(m) => format!("(n = {:?}, m = {:?})", md.n, m),
            None => format!("(n = {:?}, {})", md.n, md.component.as_deref().unwrap_or("?")),
        })
        .collect()
}

fn validate_modes(modes: &[ModeSpec], band: Band) -> Result<(), HarnessError> {
    for md in modes {
        match (&md.m, &md.component) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(format!("mode n = {:?} sets both m and component", md.n)))
            }
            (None, None) => return Err(HarnessError::Config(format!("mode n = {:?} needs m or component", md.n))),
            (None, Some(c)) => {
                parse_component(c)?;
            }
            (Some(_), None) => {}
        }
    }
    let bad = out_of_band(modes, band);
    if !bad.is_empty() {
        return Err(HarnessError::Config(format!(
            "modes outside the band N_x = {}, N_v = {}: {}",
            band.x_radius(),
            band.v_halfwidth(),
            bad.join(", ")
        )));
    }
    Ok(())
}

/// Macroscopic data of a preset plus the explicit macroscopic modes.
///
/// `random_seeded` is a phase-space preset and is rejected here.
pub fn initial_macro(spec: &InitialSpec, n_x: usize) -> Result<InitialMacro, HarnessError> {
    let a = spec.amplitude;
    let mut init = InitialMacro::zeros(n_x);
    match spec.preset {
        Preset::Zero => {}
        Preset::SingleModeShear => init = InitialMacro::single_mode_shear(n_x, a),
        Preset::Cellular => {
            init.u[0] = XField::sine(n_x, [0, 1, 0], a);
            init.u[1] = XField::sine(n_x, [1, 0, 0], a);
        }
        Preset::ThermalBump => init.theta = XField::cosine(n_x, [1, 0, 0], a),
        Preset::RandomSeeded => {
            return Err(HarnessError::Config("random_seeded draws a phase-space field, not macroscopic data".into()))
        }
    }
    for md in spec.modes.iter().filter(|md| md.m.is_none()) {
        let Some(name) = md.component.as_deref() else { continue };
        check_self_mirrored(md, is_zero(md.n))?;
        let target = match parse_component(name)? {
            MacroComponent::Rho => &mut init.rho,
            MacroComponent::U(i) => &mut init.u[i],
            MacroComponent::Theta => &mut init.theta,
        };
        add_real_pair_x(target, md.n, Complex64::new(md.re, md.im));
    }
    Ok(init)
}

/// Build the band-limited, real initial field described by `cfg`.
pub fn load_initial(cfg: &RunConfig) -> Result<LoadedInitial, HarnessError> {
    let band = cfg.band.resolve(cfg.params.epsilon)?;
    let basis = basis_for_nv(band.v_halfwidth())?;
    load_initial_with(cfg, band, &basis)
}

pub(crate) fn load_initial_with(cfg: &RunConfig, band: Band, basis: &BasisSet) -> Result<LoadedInitial, HarnessError> {
    let spec = &cfg.initial;
    validate_modes(&spec.modes, band)?;
    let mut field = if spec.preset == Preset::RandomSeeded {
        if spec.well_prepared.is_some() {
            return Err(HarnessError::Config("well_prepared needs macroscopic initial data, not random_seeded".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut f = random_field(band, spec.amplitude, spec.decay, &mut rng);
        let macro_modes = InitialSpec { preset: Preset::Zero, ..spec.clone() };
        f += &initial_macro(&macro_modes, band.x_radius())?.lift(basis, band, None)?;
        f
    } else {
        initial_macro(spec, band.x_radius())?.lift(basis, band, spec.well_prepared)?
    };
    for md in &spec.modes {
        let Some(m) = md.m else { continue };
        check_self_mirrored(md, is_zero(md.n) && is_zero(m))?;
        let value = Complex64::new(md.re, md.im);
        let (mn, mm) = (md.n.map(|c| -c), m.map(|c| -c));
        if is_zero(md.n) && is_zero(m) {
            field.set(md.n, m, field.get(md.n, m) + value.re);
        } else {
            field.set(md.n, m, field.get(md.n, m) + value);
            field.set(mn, mm, field.get(mn, mm) + value.conj());
        }
    }
    let defect = field.reality_defect();
    if defect > 1e-12 * (1.0 + field.max_abs()) {
        return Err(HarnessError::Config(format!("initial field is not real (defect {defect:.3e})")));
    }
    let energy = x_norm(&field).h1;
    Ok(LoadedInitial { field, energy, seed: spec.seed, band })
}
