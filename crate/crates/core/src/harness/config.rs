use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dynamics::{Integrator, KineticParams};
use crate::hydro::BoussinesqForm;
use crate::spectral_core::Band;

/// Complete description of a run, read from TOML.
///
/// ```toml
/// [band]
/// n_x = 2
/// n_v = 2
///
/// [params]
/// epsilon = 0.2
/// nu_star = 1.0
///
/// [integrator]
/// kind = "imex"
/// dt = 1e-3
/// t_end = 0.5
///
/// [initial]
/// preset = "single_mode_shear"
/// amplitude = 0.5
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub band: BandSpec,
    pub params: ParamsSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub limit: LimitSpec,
    #[serde(default)]
    pub nsf: NsfSpec,
}

/// Either explicit radii or the scaling `N = ε^{-γ}` for both.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BandSpec {
    Explicit { n_x: usize, n_v: usize },
    Scaling { gamma: f64 },
}

impl Default for BandSpec {
    fn default() -> Self {
        Self::Explicit { n_x: 2, n_v: 2 }
    }
}

impl BandSpec {
    pub fn resolve(&self, epsilon: f64) -> Result<Band, HarnessError> {
        let band = match *self {
            Self::Explicit { n_x, n_v } => Band::new(n_x, n_v)?,
            Self::Scaling { gamma } => Band::knudsen_scaling(epsilon, gamma)?,
        };
        if band.v_halfwidth() < 2 {
            return Err(HarnessError::Config(format!("the velocity band needs n_v >= 2, got {}", band.v_halfwidth())));
        }
        Ok(band)
    }
}

fn default_kappa() -> f64 {
    3f64.sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub epsilon: f64,
    pub nu_star: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl ParamsSpec {
    pub fn kinetic(&self) -> Result<KineticParams, HarnessError> {
        KineticParams::new(self.epsilon, self.nu_star, self.kappa).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorKind {
    Imex,
    Rk4,
    Picard,
}

impl IntegratorKind {
    pub fn stepper(self) -> Option<Integrator> {
        match self {
            Self::Imex => Some(Integrator::Imex),
            Self::Rk4 => Some(Integrator::Rk4),
            Self::Picard => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub kind: IntegratorKind,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_quad_dt")]
    pub quad_dt: f64,
    #[serde(default = "default_picard_iterations")]
    pub picard_iterations: usize,
    /// Safety factor of the automatic step cap; absent means no cap.
    #[serde(default)]
    pub dt_cap: Option<f64>,
}

fn default_quad_dt() -> f64 {
    1e-3
}

fn default_picard_iterations() -> usize {
    30
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self { kind: IntegratorKind::Imex, dt: 1e-3, t_end: 0.5, quad_dt: default_quad_dt(), picard_iterations: 30, dt_cap: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    SingleModeShear,
    Cellular,
    ThermalBump,
    RandomSeeded,
}

/// Component of an explicit mode: a phase-space coefficient `(n, m)`, or a
/// macroscopic field coefficient that is lifted.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub n: [i64; 3],
    #[serde(default)]
    pub m: Option<[i64; 3]>,
    /// One of `rho`, `u1`, `u2`, `u3`, `theta` when `m` is absent.
    #[serde(default)]
    pub component: Option<String>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub preset: Preset,
    pub amplitude: f64,
    pub seed: u64,
    /// Decay per unit `|n|_1 + |m|_1` of the random preset.
    pub decay: f64,
    pub well_prepared: Option<BoussinesqForm>,
    pub modes: Vec<ModeSpec>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { preset: Preset::SingleModeShear, amplitude: 0.5, seed: 0, decay: 0.5, well_prepared: None, modes: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    pub checkpoint_every: usize,
    pub series_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: "kll_out".into(), checkpoint_every: 0, series_every: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute energy tolerance; default `1e-8 ℰ(f0)^2`.
    pub tol_energy: Option<f64>,
    pub tol_identity: f64,
}

fn default_tol_identity() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_energy: None, tol_identity: default_tol_identity() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitSpec {
    pub eps_list: Vec<f64>,
}

impl Default for LimitSpec {
    fn default() -> Self {
        Self { eps_list: vec![0.4, 0.2, 0.1, 0.05] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsfSpec {
    pub dt: f64,
    pub t_end: Option<f64>,
    /// Forcing file in the long CSV format; absent means no forcing.
    pub forcing: Option<String>,
}

fn default_nsf_dt() -> f64 {
    1e-4
}

impl Default for NsfSpec {
    fn default() -> Self {
        Self { dt: default_nsf_dt(), t_end: None, forcing: None }
    }
}

impl RunConfig {
    /// Parse TOML text, apply `key.path=value` overrides and validate.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.params.kinetic()?;
        let i = &self.integrator;
        if !(i.dt > 0.0) {
            return Err(HarnessError::Config(format!("integrator.dt must be positive, got {}", i.dt)));
        }
        if !(i.t_end >= i.dt) {
            return Err(HarnessError::Config(format!("integrator.t_end = {} must be at least dt = {}", i.t_end, i.dt)));
        }
        if !(i.quad_dt > 0.0) {
            return Err(HarnessError::Config("integrator.quad_dt must be positive".into()));
        }
        if !(self.tolerances.tol_identity > 0.0) {
            return Err(HarnessError::Config("tolerances.tol_identity must be positive".into()));
        }
        if self.limit.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(HarnessError::Config("limit.eps_list entries must be positive".into()));
        }
        if !(self.nsf.dt > 0.0) {
            return Err(HarnessError::Config("nsf.dt must be positive".into()));
        }
        self.band.resolve(self.params.epsilon)?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// `a.b.c=value`, where `value` is parsed as a TOML literal and falls back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), HarnessError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| HarnessError::Config(format!("override {spec:?} is not KEY=VALUE")))?;
    let value = parse_literal(raw.trim());
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields one item");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| HarnessError::Config(format!("override {spec:?}: {p} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
