use num_complex::Complex64;
use rand::Rng;

use super::{Band, SpectralField, XField};

/// Real random field on `band` with coefficients uniform in the complex
/// square of half-side `amplitude`, optionally damped by `decay^|k|_1` so
/// high modes carry less weight.
pub fn random_field<R: Rng + ?Sized>(band: Band, amplitude: f64, decay: f64, rng: &mut R) -> SpectralField {
    let f = SpectralField::from_fn(band, |n, m| {
        let w = decay.powi(l1(n) + l1(m));
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (amplitude * w)
    });
    f.realify()
}

pub fn random_xfield<R: Rng + ?Sized>(n_x: usize, amplitude: f64, rng: &mut R) -> XField {
    XField::from_fn(n_x, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amplitude)
        .realify()
}

/// Random real function of `v` alone.
pub fn random_vfield<R: Rng + ?Sized>(n_v: usize, amplitude: f64, rng: &mut R) -> SpectralField {
    random_field(Band::v_only(n_v), amplitude, 1.0, rng)
}

fn l1(n: [i64; 3]) -> i32 {
    n.iter().map(|c| c.abs() as i32).sum()
}
