use std::io::{Read, Write};

use num_complex::Complex64;

use super::HydroError;
use crate::dynamics::KineticParams;
use crate::projections::{leray, MacroState};
use crate::spectral_core::{divergence, XField};

/// Cubic, gradient and second-derivative forcing of the limit equations,
/// evaluated on a finite-ε macro state.
///
/// `F`, `G` and `E` are the brackets `<e1_i q^3>`, `<e2 q^3>` and `<q^3>` of the
/// limit polynomials with `q = ρ + u·e1 + ϑ e2`. The temperature enters
/// through `ϑ = θ_s / 3`, its coordinate along the unnormalised `e2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingSet {
    pub f: [XField; 3],
    pub g: XField,
    pub e: XField,
    pub h: [XField; 3],
    pub j: [XField; 3],
    /// `-div(ℙ(u) ρ)`.
    pub k: XField,
}

const SQRT5: f64 = 2.236_067_977_499_789_7;

/// Coefficients of `F_i`: `u_i^3`, `u_i u_j^2 (j ≠ i)`, `ρ^2 u_i`, `ϑ^2 u_i`, `ρ ϑ u_i`.
pub const F_COEFFS: [f64; 5] = [9.0 / 5.0, 3.0, 3.0, 75.0 / 7.0, 12.0 * SQRT5 / 5.0];
/// Coefficients of `G`: `ϑ^3`, `ρ |u|^2`, `ϑ |u|^2`, `ϑ ρ^2`, `ρ ϑ^2`.
pub const G_COEFFS: [f64; 5] = [171.0 / 7.0, 6.0 * SQRT5 / 5.0, 75.0 / 7.0, 9.0, 18.0 * SQRT5 / 7.0];
/// Coefficients of `E`: `ρ^3`, `ϑ^3`, `ρ |u|^2`, `ϑ |u|^2`, `ρ ϑ^2`.
pub const E_COEFFS: [f64; 5] = [1.0, 6.0 * SQRT5 / 7.0, 3.0, 6.0 * SQRT5 / 5.0, 9.0];

pub fn forcing_terms(state: &MacroState, params: &KineticParams) -> ForcingSet {
    let n = state.x_radius();
    let p3 = |a: &XField, b: &XField, c: &XField| XField::product(&[a, b, c], n);
    let rho = &state.rho;
    let u = &state.u;
    let th = state.theta_sum().scale(1.0 / 3.0);
    let u_sq: [XField; 3] = std::array::from_fn(|i| XField::product(&[&u[i], &u[i]], n));
    let speed_sq = {
        let mut s = u_sq[0].clone();
        s += &u_sq[1];
        s += &u_sq[2];
        s
    };

    let f = std::array::from_fn(|i| {
        let mut out = &p3(&u[i], &u[i], &u[i]) * F_COEFFS[0];
        for j in (0..3).filter(|&j| j != i) {
            out.axpy(F_COEFFS[1], &XField::product(&[&u[i], &u_sq[j]], n));
        }
        out.axpy(F_COEFFS[2], &p3(rho, rho, &u[i]));
        out.axpy(F_COEFFS[3], &p3(&th, &th, &u[i]));
        out.axpy(F_COEFFS[4], &p3(rho, &th, &u[i]));
        out
    });

    let rho_u2 = XField::product(&[rho, &speed_sq], n);
    let th_u2 = XField::product(&[&th, &speed_sq], n);
    let th_rho2 = p3(&th, rho, rho);
    let rho_th2 = p3(rho, &th, &th);
    let th3 = p3(&th, &th, &th);

    let mut g = &th3 * G_COEFFS[0];
    g.axpy(G_COEFFS[1], &rho_u2);
    g.axpy(G_COEFFS[2], &th_u2);
    g.axpy(G_COEFFS[3], &th_rho2);
    g.axpy(G_COEFFS[4], &rho_th2);

    let mut e = &p3(rho, rho, rho) * E_COEFFS[0];
    e.axpy(E_COEFFS[1], &th3);
    e.axpy(E_COEFFS[2], &rho_u2);
    e.axpy(E_COEFFS[3], &th_u2);
    e.axpy(E_COEFFS[4], &rho_th2);

    let h = std::array::from_fn(|i| &u_sq[i].derivative(i) * (3f64.sqrt() * params.kappa / 5.0));
    let j = std::array::from_fn(|i| &u[i].derivative(i).derivative(i) * -0.1);
    let pu = leray(u);
    let flux: [XField; 3] = std::array::from_fn(|i| XField::product(&[&pu[i], rho], n));
    let k = &divergence(&flux) * -1.0;
    ForcingSet { f, g, e, h, j, k }
}

/// Forcing of the reference limit solver, already projected.
#[derive(Clone, Debug, PartialEq)]
pub struct NsfForcing {
    pub u: [XField; 3],
    pub theta: XField,
}

impl NsfForcing {
    pub fn zeros(n_x: usize) -> Self {
        Self { u: std::array::from_fn(|_| XField::zeros(n_x)), theta: XField::zeros(n_x) }
    }

    /// `ℙ(-(κ²/ν*) F + H + ν* J)` and
    /// `(194 κ √15 / 525) K - (κ²/ν*) G + (2√5 κ² / (5 ν*)) E`.
    ///
    /// At `κ = √3` and `ν* = 12 ν` these are the coefficients `1/(4ν)`,
    /// `12 ν`, `194√5/175` and `√5/(10ν)` of the limit system.
    pub fn from_set(set: &ForcingSet, params: &KineticParams) -> Self {
        let k2 = params.kappa * params.kappa / params.nu_star;
        let raw: [XField; 3] = std::array::from_fn(|i| {
            let mut v = &set.f[i] * -k2;
            v += &set.h[i];
            v.axpy(params.nu_star, &set.j[i]);
            v
        });
        let mut theta = &set.k * (194.0 * params.kappa * 15f64.sqrt() / 525.0);
        theta.axpy(-k2, &set.g);
        theta.axpy(2.0 * 5f64.sqrt() * k2 / 5.0, &set.e);
        Self { u: leray(&raw), theta }
    }

    fn components(&self) -> [&XField; 4] {
        [&self.u[0], &self.u[1], &self.u[2], &self.theta]
    }
}

/// Time-dependent forcing for the reference solver.
pub trait ForcingSource {
    fn at(&self, t: f64) -> NsfForcing;
}

impl ForcingSource for NsfForcing {
    fn at(&self, _t: f64) -> NsfForcing {
        self.clone()
    }
}

/// Recorded forcing frames, linearly interpolated in time and held constant
/// outside the recorded range.
#[derive(Clone, Debug, Default)]
pub struct ForcingSeries {
    pub times: Vec<f64>,
    pub frames: Vec<NsfForcing>,
}

const FIELDS: [&str; 4] = ["u1", "u2", "u3", "theta"];

impl ForcingSeries {
    pub fn push(&mut self, t: f64, frame: NsfForcing) {
        self.times.push(t);
        self.frames.push(frame);
    }

    /// Long format, one row per stored mode: `t,field,n1,n2,n3,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HydroError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "field", "n1", "n2", "n3", "re", "im"])?;
        for (t, frame) in self.times.iter().zip(&self.frames) {
            for (name, field) in FIELDS.iter().zip(frame.components()) {
                for i in 0..field.coeffs().len() {
                    let k = field.mode(i);
                    if !field.keeps(k) {
                        continue;
                    }
                    let c = field.get(k);
                    out.write_record(&[
                        format!("{t:e}"),
                        name.to_string(),
                        k[0].to_string(),
                        k[1].to_string(),
                        k[2].to_string(),
                        format!("{:e}", c.re),
                        format!("{:e}", c.im),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, n_x: usize) -> Result<Self, HydroError> {
        #[derive(serde::Deserialize)]
        struct Row {
            t: f64,
            field: String,
            n1: i64,
            n2: i64,
            n3: i64,
            re: f64,
            im: f64,
        }
        let mut series = Self::default();
        let mut rdr = csv::Reader::from_reader(r);
        for row in rdr.deserialize() {
            let row: Row = row?;
            if series.times.last().map_or(true, |&t| t != row.t) {
                if let Some(&last) = series.times.last() {
                    if row.t < last {
                        return Err(HydroError::Forcing(format!("times must increase, found {} after {last}", row.t)));
                    }
                }
                series.push(row.t, NsfForcing::zeros(n_x));
            }
            let slot = FIELDS
                .iter()
                .position(|f| *f == row.field)
                .ok_or_else(|| HydroError::Forcing(format!("unknown field {:?}", row.field)))?;
            let k = [row.n1, row.n2, row.n3];
            let frame = series.frames.last_mut().expect("pushed above");
            let target = if slot < 3 { &mut frame.u[slot] } else { &mut frame.theta };
            if !target.keeps(k) {
                return Err(HydroError::Forcing(format!("mode {k:?} lies outside the band N_x = {n_x}")));
            }
            target.set(k, Complex64::new(row.re, row.im));
        }
        Ok(series)
    }
}

impl ForcingSource for ForcingSeries {
    fn at(&self, t: f64) -> NsfForcing {
        let n = self.times.len();
        assert!(n > 0, "empty forcing series");
        if t <= self.times[0] {
            return self.frames[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.frames[n - 1].clone();
        }
        let hi = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[hi - 1], self.times[hi]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (&self.frames[hi - 1], &self.frames[hi]);
        let mix = |x: &XField, y: &XField| {
            let mut m = x * (1.0 - w);
            m.axpy(w, y);
            m
        };
        NsfForcing { u: std::array::from_fn(|i| mix(&a.u[i], &b.u[i])), theta: mix(&a.theta, &b.theta) }
    }
}
