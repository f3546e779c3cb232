//! Univariate polynomial helpers: interpolation at Chebyshev nodes and
//! roots via the companion matrix.

use nalgebra::{Complex, DMatrix};

/// Chebyshev points of the first kind on [−1, 1].
pub fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / count as f64).cos())
        .collect()
}

/// Monomial coefficients c₀ … c_d (ascending powers of x) of the degree-d
/// polynomial through (x_j, v_j) at the d+1 Chebyshev nodes.
pub fn interpolate_monomial(values: &[f64]) -> Vec<f64> {
    let count = values.len();
    let d = count - 1;
    let nodes = chebyshev_nodes(count);
    // Chebyshev coefficients via the discrete orthogonality relation.
    let mut cheb = vec![0.0; count];
    for (k, ck) in cheb.iter_mut().enumerate() {
        let s: f64 = nodes
            .iter()
            .zip(values)
            .enumerate()
            .map(|(j, (_, v))| v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / count as f64).cos())
            .sum();
        *ck = 2.0 * s / count as f64;
    }
    cheb[0] *= 0.5;
    // T_k in the monomial basis via T_{k+1} = 2x T_k − T_{k−1}.
    let mut out = vec![0.0; count];
    let mut t_prev = vec![0.0; count];
    let mut t_cur = vec![0.0; count];
    t_prev[0] = 1.0;
    if d >= 1 {
        t_cur[1] = 1.0;
    }
    for i in 0..count {
        out[i] += cheb[0] * t_prev[i];
    }
    if d >= 1 {
        for i in 0..count {
            out[i] += cheb[1] * t_cur[i];
        }
    }
    for k in 2..=d {
        let mut t_next = vec![0.0; count];
        for i in 0..count {
            if i >= 1 {
                t_next[i] += 2.0 * t_cur[i - 1];
            }
            t_next[i] -= t_prev[i];
        }
        for i in 0..count {
            out[i] += cheb[k] * t_next[i];
        }
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    out
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn eval_complex(coeffs: &[f64], x: Complex<f64>) -> Complex<f64> {
    coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, c| acc * x + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

/// All complex roots of the polynomial with the given ascending
/// coefficients (leading coefficient nonzero).
pub fn roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![Complex::new(-coeffs[0] / lead, 0.0)];
    }
    let mut c = DMatrix::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        c[(i, d - 1)] = -coeffs[i] / lead;
    }
    let mut r: Vec<Complex<f64>> = c.complex_eigenvalues().iter().copied().collect();
    // Newton polish on the polynomial itself.
    let dc = derivative(coeffs);
    for z in r.iter_mut() {
        for _ in 0..3 {
            let f = eval_complex(coeffs, *z);
            let fp = eval_complex(&dc, *z);
            if fp.norm() == 0.0 {
                break;
            }
            let next = *z - f / fp;
            if eval_complex(coeffs, next).norm() < f.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    r
}

/// e₀ … e_m of the given values.
pub fn elementary_symmetric_all(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += e[k - 1] * v;
        }
    }
    e
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}
