//! The band-limited algebra: cutoffs, x-derivatives, exact products,
//! multiplication by the sawtooth `v_j`, norms and velocity moments.

use num_complex::Complex64;
use serde::Serialize;

use super::field::norm2;
use super::grid::{self, ZERO};
use super::{Band, SpectralError, SpectralField, XField};
use crate::legendre_basis::sawtooth_coeff;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Restrict (or zero-extend) `f` to `band`. Modes outside the target band are
/// dropped; modes of the target band missing from `f` are zero.
pub fn cutoff(f: &SpectralField, band: Band) -> SpectralField {
    let src = f.band();
    if src == band {
        return f.clone();
    }
    let mut out = SpectralField::zeros(band);
    let vb_out = band.v_block();
    let vb_src = src.v_block();
    // Map each target v index to the source v index once.
    let v_map: Vec<Option<usize>> = (0..vb_out).map(|iv| src.v_index(band.v_mode(iv))).collect();
    for ix in 0..band.x_block() {
        let n = band.x_mode(ix);
        if !band.keeps_x(n) || !src.keeps_x(n) {
            continue;
        }
        let Some(jx) = src.x_index(n) else { continue };
        let dst = &mut out.coeffs_mut()[ix * vb_out..(ix + 1) * vb_out];
        let from = &f.coeffs()[jx * vb_src..(jx + 1) * vb_src];
        for (d, m) in dst.iter_mut().zip(&v_map) {
            if let Some(jv) = m {
                *d = from[*jv];
            }
        }
    }
    out
}

/// `Λ^x`: restrict the x-modes to the ball of radius `n_x`, keeping v.
pub fn cutoff_x(f: &SpectralField, n_x: usize) -> SpectralField {
    cutoff(f, f.band().with_x(n_x))
}

/// `Λ^v`: restrict the v-modes to the cube of half-width `n_v`, keeping x.
pub fn cutoff_v(f: &SpectralField, n_v: usize) -> SpectralField {
    cutoff(f, f.band().with_v(n_v))
}

/// `d/dx_axis` (axis in `0..3`): multiplies coefficient `(n, m)` by `2 pi i n_axis`.
pub fn derivative_x(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    f.map_x_modes(|n| Complex64::new(0.0, TWO_PI * n[axis] as f64))
}

/// Exact coefficients of `f g` restricted to `out`.
pub fn product(f: &SpectralField, g: &SpectralField, out: Band) -> SpectralField {
    let kf = f.band().half_widths();
    let kg = g.band().half_widths();
    let coeffs = grid::padded_product(&[(f.coeffs(), &kf), (g.coeffs(), &kg)], &out.half_widths());
    SpectralField::from_coeffs(out, coeffs).expect("consistent length")
}

/// `(Λ(f^2), Λ(f^3))` on `out`, sharing one grid evaluation of `f`.
pub fn square_and_cube(f: &SpectralField, out: Band) -> (SpectralField, SpectralField) {
    let k = f.band().half_widths();
    let (sq, cu) = grid::square_and_cube(f.coeffs(), &k, &out.half_widths());
    (
        SpectralField::from_coeffs(out, sq).expect("consistent length"),
        SpectralField::from_coeffs(out, cu).expect("consistent length"),
    )
}

/// `Λ(v_axis f)` on `out`, computed exactly by convolving along the
/// `axis`-th velocity index with the analytic sawtooth coefficients.
pub fn multiply_by_sawtooth(f: &SpectralField, axis: usize, out: Band) -> SpectralField {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    let src = f.band();
    let ks = src.kv() as i64;
    let ko = out.kv() as i64;
    let span = ks + ko;
    let saw: Vec<Complex64> = (-span..=span).map(sawtooth_coeff).collect();
    let saw_at = |d: i64| saw[(d + span) as usize];

    let mut res = SpectralField::zeros(out);
    let vb_out = out.v_block();
    let vb_src = src.v_block();
    let len_src = src.v_len();
    let stride_src = len_src.pow(2 - axis as u32);
    for ix in 0..out.x_block() {
        let n = out.x_mode(ix);
        if !out.keeps_x(n) || !src.keeps_x(n) {
            continue;
        }
        let Some(jx) = src.x_index(n) else { continue };
        let from = src_slice(f, jx, vb_src);
        if from.iter().all(|c| *c == ZERO) {
            continue;
        }
        let dst = &mut res.coeffs_mut()[ix * vb_out..(ix + 1) * vb_out];
        for (iv, d) in dst.iter_mut().enumerate() {
            let m = out.v_mode(iv);
            let mut base = m;
            base[axis] = 0;
            let Some(j0) = src.v_index(base) else { continue };
            // j0 addresses m' with m'_axis = 0; step along the axis from there.
            let start = j0 - (ks as usize) * stride_src;
            let mut acc = ZERO;
            for (s, mp) in (-ks..=ks).enumerate() {
                let c = from[start + s * stride_src];
                if c != ZERO {
                    acc += saw_at(m[axis] - mp) * c;
                }
            }
            *d = acc;
        }
    }
    res
}

fn src_slice(f: &SpectralField, jx: usize, vb: usize) -> &[Complex64] {
    &f.coeffs()[jx * vb..(jx + 1) * vb]
}

/// `L^2` and `X = H^1_x L^2_v` norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XNorm {
    pub l2: f64,
    pub h1: f64,
}

pub fn x_norm(f: &SpectralField) -> XNorm {
    let band = f.band();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for ix in 0..band.x_block() {
        let w = 1.0 + TWO_PI * TWO_PI * norm2(band.x_mode(ix));
        let s: f64 = f.v_slice(ix).iter().map(|c| c.norm_sqr()).sum();
        l2 += s;
        h1 += w * s;
    }
    XNorm { l2: l2.sqrt(), h1: h1.sqrt() }
}

/// `∫_Ω f(x, v) w(v) dv` as a function of `x`, for a real weight `w`.
pub fn v_moment(f: &SpectralField, weight: &SpectralField) -> Result<XField, SpectralError> {
    let wb = weight.band();
    if !wb.is_v_only() {
        return Err(SpectralError::WeightNotVOnly);
    }
    let band = f.band();
    // For real w, w(-m) = conj(w(m)).
    let w_at: Vec<Complex64> = (0..band.v_block())
        .map(|iv| wb.v_index(band.v_mode(iv)).map_or(ZERO, |j| weight.coeffs()[j].conj()))
        .collect();
    let mut out = XField::zeros(band.x_radius());
    for ix in 0..band.x_block() {
        let n = band.x_mode(ix);
        if !band.keeps_x(n) {
            continue;
        }
        let s: Complex64 = f.v_slice(ix).iter().zip(&w_at).map(|(c, w)| c * w).sum();
        out.set(n, s);
    }
    Ok(out)
}

/// `∫_Ω a b dv` for two real functions of `v` alone.
pub fn inner_v(a: &SpectralField, b: &SpectralField) -> f64 {
    debug_assert!(a.band().is_v_only() && b.band().is_v_only());
    a.inner(b).re
}

/// The tensor product `g(x) w(v)` on `band`.
pub fn outer(g: &XField, w: &SpectralField, band: Band) -> SpectralField {
    let wb = w.band();
    debug_assert!(wb.is_v_only());
    let w_at: Vec<Complex64> = (0..band.v_block())
        .map(|iv| wb.v_index(band.v_mode(iv)).map_or(ZERO, |j| w.coeffs()[j]))
        .collect();
    let mut out = SpectralField::zeros(band);
    let vb = band.v_block();
    for ix in 0..band.x_block() {
        let n = band.x_mode(ix);
        if !band.keeps_x(n) {
            continue;
        }
        let gx = g.get(n);
        if gx == ZERO {
            continue;
        }
        for (d, wv) in out.coeffs_mut()[ix * vb..(ix + 1) * vb].iter_mut().zip(&w_at) {
            *d = gx * wv;
        }
    }
    out
}

/// Grid-quadrature `L^p` norm of `f` over `T^3 × Ω` on `m` points per axis.
pub fn lp_norm(f: &SpectralField, p: f64, m: usize) -> f64 {
    let k = f.band().half_widths();
    let dims: Vec<usize> = k.iter().map(|&k| if k == 0 { 1 } else { m }).collect();
    grid::lp_norm(f.coeffs(), &k, &dims, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_of_constant_is_v_eps() {
        let b = Band::v_only(3);
        let one = SpectralField::constant(b, 1.0);
        let v = multiply_by_sawtooth(&one, 1, b);
        assert_eq!(v.get([0; 3], [0, 0, 0]), ZERO);
        assert!((v.get([0; 3], [0, 1, 0]) - sawtooth_coeff(1)).norm() < 1e-16);
        assert!((v.get([0; 3], [0, -2, 0]) - sawtooth_coeff(-2)).norm() < 1e-16);
        assert_eq!(v.get([0; 3], [1, 1, 0]), ZERO);
    }

    #[test]
    fn outer_then_moment_recovers_profile() {
        let b = Band::new(2, 2).unwrap();
        let g = XField::sine(2, [0, 1, 0], 0.7);
        let w = SpectralField::constant(Band::v_only(2), 1.0);
        let f = outer(&g, &w, b);
        let back = v_moment(&f, &w).unwrap();
        assert!(back.max_abs_diff(&g) < 1e-15);
    }
}
