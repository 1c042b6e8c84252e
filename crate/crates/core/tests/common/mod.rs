//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// One-sided Jacobi SVD for small matrices with `rows >= cols`.
///
/// Returns `(u, s, v)` with `s` sorted descending and `a = u diag(s) vᵀ`.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    assert!(m >= n, "jacobi_svd wants a tall matrix");
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = (0..m).map(|i| w[(i, p)] * w[(i, p)]).sum();
                let beta: f64 = (0..m).map(|i| w[(i, q)] * w[(i, q)]).sum();
                let gamma: f64 = (0..m).map(|i| w[(i, p)] * w[(i, q)]).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > 0.0 {
            u.set_column(k, &(w.column(j) / norms[j]));
        }
        vs.set_column(k, &v.column(j));
    }
    (u, s, vs)
}

/// `u diag(values) vᵀ`.
pub fn recompose(u: &DMatrix<f64>, values: &[f64], v: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = u.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= values[k];
    }
    scaled * v.transpose()
}

/// Coefficients of `det(tI - b)` (leading coefficient first) by Faddeev-LeVerrier.
pub fn char_poly(b: &DMatrix<f64>) -> Vec<f64> {
    let n = b.nrows();
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        mk = b * &mk + &id * coeffs[k - 1];
        let c = -(b * &mk).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

fn horner(coeffs: &[f64], t: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &c in coeffs {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

/// Roots of a real-rooted polynomial, descending.
///
/// Newton from above the largest root converges monotonically; each root is
/// deflated out and then polished against the original polynomial.
pub fn real_roots(coeffs: &[f64], upper: f64) -> Vec<f64> {
    let mut work = coeffs.to_vec();
    let mut roots = Vec::new();
    while work.len() > 1 {
        let mut t = upper;
        for _ in 0..500 {
            let (p, dp) = horner(&work, t);
            if dp == 0.0 {
                break;
            }
            let next = t - p / dp;
            if (next - t).abs() <= 1e-15 * upper.max(1.0) {
                t = next;
                break;
            }
            t = next;
        }
        for _ in 0..5 {
            let (p, dp) = horner(coeffs, t);
            if dp != 0.0 {
                t -= p / dp;
            }
        }
        roots.push(t);
        let mut quotient = Vec::with_capacity(work.len() - 1);
        let mut carry = 0.0;
        for &c in &work[..work.len() - 1] {
            carry = carry * t + c;
            quotient.push(carry);
        }
        work = quotient;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Singular values from the roots of the characteristic polynomial of the
/// smaller Gram matrix (`aᵀa` or `aaᵀ`).
pub fn singular_values_by_char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let gram = if a.nrows() >= a.ncols() {
        a.transpose() * a
    } else {
        a * a.transpose()
    };
    let upper = gram.trace() + 1.0;
    real_roots(&char_poly(&gram), upper)
        .into_iter()
        .map(|r| r.max(0.0).sqrt())
        .collect()
}
