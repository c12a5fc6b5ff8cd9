//! Dense multi-dimensional trigonometric blocks and padded FFT products.
//!
//! A block with half-widths `k = [k_0, .., k_{d-1}]` stores the coefficients
//! of modes `-k_j..=k_j` along every axis in row-major order. All routines are
//! dimension-agnostic so the same code serves the six-dimensional phase-space
//! field and the three-dimensional macroscopic fields.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn dense_len(k: &[usize]) -> usize {
    k.iter().map(|&k| 2 * k + 1).product()
}

/// Smallest integer `>= n` whose prime factors are 2, 3 or 5.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

fn strides(lens: &[usize]) -> Vec<usize> {
    let mut s = vec![1; lens.len()];
    for a in (0..lens.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * lens[a + 1];
    }
    s
}

/// Visit every multi-index of a block with the given axis lengths, in
/// row-major order.
pub(crate) fn for_each_index(lens: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    let total: usize = lens.iter().product();
    if total == 0 {
        return;
    }
    let mut idx = vec![0usize; lens.len()];
    for lin in 0..total {
        visit(lin, &idx);
        for a in (0..lens.len()).rev() {
            idx[a] += 1;
            if idx[a] < lens[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Scatter a coefficient block onto an FFT grid of sizes `m`
/// (mode `j` lands on slot `j mod m`).
pub(crate) fn embed(coeffs: &[Complex64], k: &[usize], m: &[usize]) -> Vec<Complex64> {
    debug_assert_eq!(coeffs.len(), dense_len(k));
    let lens: Vec<usize> = k.iter().map(|&k| 2 * k + 1).collect();
    let gs = strides(m);
    let maps: Vec<Vec<usize>> = k
        .iter()
        .zip(m)
        .zip(&gs)
        .map(|((&k, &m), &s)| {
            (0..2 * k + 1)
                .map(|i| ((i as i64 - k as i64).rem_euclid(m as i64)) as usize * s)
                .collect()
        })
        .collect();
    let mut grid = vec![ZERO; m.iter().product()];
    for_each_index(&lens, |lin, idx| {
        let c = coeffs[lin];
        if c != ZERO {
            let pos: usize = idx.iter().enumerate().map(|(a, &i)| maps[a][i]).sum();
            grid[pos] += c;
        }
    });
    grid
}

/// Gather the modes `|j_a| <= k_a` from an FFT grid, multiplying by `scale`.
pub(crate) fn extract(grid: &[Complex64], m: &[usize], k: &[usize], scale: f64) -> Vec<Complex64> {
    let lens: Vec<usize> = k.iter().map(|&k| 2 * k + 1).collect();
    let gs = strides(m);
    let maps: Vec<Vec<usize>> = k
        .iter()
        .zip(m)
        .zip(&gs)
        .map(|((&k, &m), &s)| {
            (0..2 * k + 1)
                .map(|i| ((i as i64 - k as i64).rem_euclid(m as i64)) as usize * s)
                .collect()
        })
        .collect();
    let mut out = vec![ZERO; dense_len(k)];
    for_each_index(&lens, |lin, idx| {
        let pos: usize = idx.iter().enumerate().map(|(a, &i)| maps[a][i]).sum();
        out[lin] = grid[pos] * scale;
    });
    out
}

/// In-place unnormalised FFT along every axis of an `m`-shaped grid.
/// `Inverse` evaluates a trigonometric sum on the grid; `Forward` recovers
/// coefficients up to the factor `prod(m)`.
pub(crate) fn fftn(data: &mut [Complex64], m: &[usize], direction: FftDirection) {
    let total: usize = m.iter().product();
    debug_assert_eq!(data.len(), total);
    let gs = strides(m);
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        for (a, &len) in m.iter().enumerate() {
            if len <= 1 {
                continue;
            }
            let fft = planner.plan_fft(len, direction);
            let stride = gs[a];
            let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = len * stride;
            let mut buf = vec![ZERO; len];
            for base in (0..total).step_by(block) {
                for s in 0..stride {
                    let start = base + s;
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = data[start + i * stride];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for (i, b) in buf.iter().enumerate() {
                        data[start + i * stride] = *b;
                    }
                }
            }
        }
    });
}

/// Values of the trigonometric polynomial on the uniform grid of sizes `m`.
pub(crate) fn sample(coeffs: &[Complex64], k: &[usize], m: &[usize]) -> Vec<Complex64> {
    let mut grid = embed(coeffs, k, m);
    fftn(&mut grid, m, FftDirection::Inverse);
    grid
}

/// Grid sizes that make the truncated product of the given factors exact.
///
/// A product of factors with half-widths `k_i` has modes up to `sum k_i`; on a
/// grid of `M` points those alias onto `j - M`, which stays outside the output
/// window `|j| <= k_out` as long as `M > sum k_i + k_out`.
pub(crate) fn product_grid(factor_k: &[&[usize]], k_out: &[usize]) -> Vec<usize> {
    (0..k_out.len())
        .map(|a| {
            let s: usize = factor_k.iter().map(|k| k[a]).sum();
            fast_len(s + k_out[a] + 1)
        })
        .collect()
}

/// Exact coefficients of the pointwise product of all factors restricted to
/// the output window `k_out`.
pub(crate) fn padded_product(factors: &[(&[Complex64], &[usize])], k_out: &[usize]) -> Vec<Complex64> {
    assert!(!factors.is_empty(), "product of zero factors");
    let ks: Vec<&[usize]> = factors.iter().map(|(_, k)| *k).collect();
    let m = product_grid(&ks, k_out);
    let mut acc = sample(factors[0].0, factors[0].1, &m);
    for (c, k) in &factors[1..] {
        let vals = sample(c, k, &m);
        for (a, b) in acc.iter_mut().zip(vals) {
            *a *= b;
        }
    }
    fftn(&mut acc, &m, FftDirection::Forward);
    let n: usize = m.iter().product();
    extract(&acc, &m, k_out, 1.0 / n as f64)
}

/// Square and cube of one factor from a single grid evaluation.
pub(crate) fn square_and_cube(
    coeffs: &[Complex64],
    k: &[usize],
    k_out: &[usize],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = product_grid(&[k, k, k], k_out);
    let vals = sample(coeffs, k, &m);
    let mut sq: Vec<Complex64> = vals.iter().map(|v| v * v).collect();
    let mut cu: Vec<Complex64> = vals.iter().zip(&sq).map(|(v, s)| v * s).collect();
    fftn(&mut sq, &m, FftDirection::Forward);
    fftn(&mut cu, &m, FftDirection::Forward);
    let n = 1.0 / m.iter().product::<usize>() as f64;
    (extract(&sq, &m, k_out, n), extract(&cu, &m, k_out, n))
}

/// Quadrature `L^p` norm (`p = inf` gives the grid maximum) of a real
/// trigonometric polynomial on the unit torus, sampled on `m` points per axis.
pub(crate) fn lp_norm(coeffs: &[Complex64], k: &[usize], m: &[usize], p: f64) -> f64 {
    let vals = sample(coeffs, k, m);
    if p.is_infinite() {
        return vals.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    }
    let n = vals.len() as f64;
    (vals.iter().map(|v| v.re.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_len_rounds_to_smooth_sizes() {
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(11), 12);
        assert_eq!(fast_len(25), 25);
    }

    #[test]
    fn sample_then_forward_roundtrips() {
        let k = [1usize, 2];
        let coeffs: Vec<Complex64> = (0..dense_len(&k)).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let m = [4usize, 6];
        let mut g = sample(&coeffs, &k, &m);
        fftn(&mut g, &m, FftDirection::Forward);
        let back = extract(&g, &m, &k, 1.0 / 24.0);
        for (a, b) in coeffs.iter().zip(back) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
