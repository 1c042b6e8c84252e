//! Generalized singular value shrinkage.
//!
//! Any monotone non-decreasing scalar proximity operator applied to the
//! singular values yields the proximity operator of the corresponding
//! spectral penalty. With the HOW operator this is the prox of the matrix
//! `φ`-norm `Σ φ(sᵢ)`; with soft thresholding it is classical SVT.

use nalgebra::DMatrix;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{singular_values, thin_svd, DenseMatrix};
use crate::prox::{phi_numeric, prox_how, prox_l1, prox_welsch, HowParams};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShrinkKind {
    How,
    L1,
    /// Threshold is ignored.
    Welsch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkSpec<T: Scalar> {
    pub threshold: T,
    pub sigma: T,
    pub kind: ShrinkKind,
}

impl<T: Scalar> ShrinkSpec<T> {
    pub fn how(threshold: T, sigma: T) -> Self {
        Self {
            threshold,
            sigma,
            kind: ShrinkKind::How,
        }
    }

    pub fn l1(threshold: T) -> Self {
        Self {
            threshold,
            sigma: T::one(),
            kind: ShrinkKind::L1,
        }
    }

    pub fn welsch(sigma: T) -> Self {
        Self {
            threshold: T::zero(),
            sigma,
            kind: ShrinkKind::Welsch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(Float::is_finite(self.threshold) && self.threshold >= T::zero()) {
            return Err(Error::invalid(format!(
                "shrink threshold must be non-negative, got {}",
                self.threshold
            )));
        }
        if !(Float::is_finite(self.sigma) && self.sigma > T::zero()) {
            return Err(Error::invalid(format!(
                "shrink sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, x: T) -> T {
        match self.kind {
            ShrinkKind::How => prox_how(x, self.threshold, self.sigma),
            ShrinkKind::L1 => prox_l1(x, self.threshold),
            ShrinkKind::Welsch => prox_welsch(x, self.sigma),
        }
    }
}

/// Shrinks singular values and reassembles; also returns the shrunk spectrum.
pub fn sv_shrink_with_values<T: Scalar>(
    a: &DenseMatrix<T>,
    spec: &ShrinkSpec<T>,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    spec.validate()?;
    let factors = thin_svd(a)?;
    let shrunk: Vec<T> = factors.s.iter().map(|&s| spec.apply(s)).collect();

    // Monotone operators keep the order; a violation beyond rounding means the
    // backend handed us an unsorted or corrupted spectrum.
    let slack = T::lit(16.0) * T::epsilon() * shrunk.first().copied().unwrap_or_else(T::zero);
    if let Some(i) = shrunk.windows(2).position(|w| w[1] > w[0] + slack) {
        return Err(Error::Invariant(format!(
            "shrunk singular values out of order at {i}: {} < {}",
            shrunk[i],
            shrunk[i + 1]
        )));
    }

    let keep = shrunk.iter().take_while(|s| **s > T::zero()).count();
    let (m, n) = a.shape();
    let mut out = DMatrix::<T>::zeros(m, n);
    if keep > 0 {
        let mut left = factors.u.columns(0, keep).into_owned();
        for (k, mut col) in left.column_iter_mut().enumerate() {
            col *= shrunk[k];
        }
        left.mul_to(&factors.v.columns(0, keep).transpose(), &mut out);
    }
    Ok((DenseMatrix::from_nalgebra(out)?, shrunk))
}

/// `u diag(P(s)) vᵀ` where `(u, s, v)` is the thin SVD of `a`.
pub fn sv_shrink<T: Scalar>(a: &DenseMatrix<T>, spec: &ShrinkSpec<T>) -> Result<DenseMatrix<T>> {
    sv_shrink_with_values(a, spec).map(|(m, _)| m)
}

/// `Σᵢ φ(sᵢ)` over the singular values. Diagnostic only.
pub fn matrix_phi_norm<T: Scalar>(a: &DenseMatrix<T>, p: &HowParams<T>) -> Result<T> {
    singular_values(a)?
        .into_iter()
        .try_fold(T::zero(), |acc, s| Ok(acc + phi_numeric(s, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::fro_norm;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        g.qr().q()
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = DenseMatrix::<f64>::zeros(3, 5).unwrap();
        for spec in [ShrinkSpec::how(1.0, SQRT2), ShrinkSpec::l1(0.5), ShrinkSpec::welsch(1.0)] {
            assert!(sv_shrink(&z, &spec).unwrap().is_zero());
        }
    }

    #[test]
    fn diagonal_how_shrinkage() {
        let a = DenseMatrix::from_diagonal(2, 2, &[3.0, 0.5]).unwrap();
        let out = sv_shrink(&a, &ShrinkSpec::how(1.0, SQRT2)).unwrap();
        let expected = 3.0 - 3.0 * (-4.0f64).exp();
        assert_abs_diff_eq!(expected, 2.945_053_083_333_797, epsilon = 1e-12);
        assert_abs_diff_eq!(out.get(0, 0), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(out.get(1, 1), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.get(0, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_one_soft_threshold() {
        let u = [0.6, 0.8, 0.0];
        let v = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 0.0];
        let a = DenseMatrix::from_fn(3, 4, |i, j| 5.0 * u[i] * v[j]).unwrap();
        let out = sv_shrink(&a, &ShrinkSpec::l1(1.0)).unwrap();
        let want = DenseMatrix::from_fn(3, 4, |i, j| 4.0 * u[i] * v[j]).unwrap();
        assert!(fro_norm(&out.sub(&want).unwrap()) < 1e-12);
    }

    #[test]
    fn unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = DenseMatrix::from_fn(5, 4, |_, _| rng.gen_range(-2.0..2.0)).unwrap();
            let q = DenseMatrix::from_nalgebra(random_orthogonal(5, &mut rng)).unwrap();
            let spec = ShrinkSpec::how(0.8, 0.9);
            let lhs = sv_shrink(&q.matmul(&a).unwrap(), &spec).unwrap();
            let rhs = q.matmul(&sv_shrink(&a, &spec).unwrap()).unwrap();
            assert!(fro_norm(&lhs.sub(&rhs).unwrap()) <= 1e-9);
        }
    }

    #[test]
    fn output_rank_bounded_by_surviving_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
        let s = singular_values(&a).unwrap();
        let t = 0.5 * (s[2] + s[3]);
        for spec in [ShrinkSpec::how(t, 0.3), ShrinkSpec::l1(t)] {
            let (out, shrunk) = sv_shrink_with_values(&a, &spec).unwrap();
            assert_eq!(shrunk.iter().filter(|v| **v > 0.0).count(), 3);
            let out_s = singular_values(&out).unwrap();
            assert!(out_s[3] < 1e-12 * out_s[0]);
        }
    }

    #[test]
    fn welsch_keeps_every_nonzero_value() {
        let a = DenseMatrix::from_diagonal(3, 3, &[2.0, 1.0, 0.1]).unwrap();
        let (_, shrunk) = sv_shrink_with_values(&a, &ShrinkSpec::welsch(1.0)).unwrap();
        assert!(shrunk.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn phi_norm_cases() {
        let p = HowParams::new(1.0, SQRT2).unwrap();
        assert_eq!(matrix_phi_norm(&DenseMatrix::<f64>::zeros(3, 3).unwrap(), &p).unwrap(), 0.0);
        let d = DenseMatrix::from_diagonal(2, 2, &[1.3, 0.0]).unwrap();
        assert_abs_diff_eq!(
            matrix_phi_norm(&d, &p).unwrap(),
            phi_numeric(1.3, &p).unwrap(),
            epsilon = 1e-9
        );

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_fn(4, 4, |_, _| rng.gen_range(-2.0..2.0)).unwrap();
        let q1 = DenseMatrix::from_nalgebra(random_orthogonal(4, &mut rng)).unwrap();
        let q2 = DenseMatrix::from_nalgebra(random_orthogonal(4, &mut rng)).unwrap();
        let rotated = q1.matmul(&a).unwrap().matmul(&q2).unwrap();
        assert_abs_diff_eq!(
            matrix_phi_norm(&a, &p).unwrap(),
            matrix_phi_norm(&rotated, &p).unwrap(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn rejects_invalid_spec() {
        let a = DenseMatrix::<f64>::identity(2).unwrap();
        assert!(sv_shrink(&a, &ShrinkSpec::how(-1.0, 1.0)).is_err());
        assert!(sv_shrink(&a, &ShrinkSpec::how(1.0, 0.0)).is_err());
    }
}
