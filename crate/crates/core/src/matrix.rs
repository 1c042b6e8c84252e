//! Dense matrices, observation masks, Frobenius geometry and the thin SVD.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SVD};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real `rows x cols` matrix with finite entries.
///
/// Storage is delegated to `nalgebra` (column-major), but constructors and
/// accessors use row-major logical order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T: Scalar> {
    data: DMatrix<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Wraps an `nalgebra` matrix, rejecting empty shapes and non-finite entries.
    pub fn from_nalgebra(data: DMatrix<T>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::shape(format!(
                "empty matrix {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !Float::is_finite(*v)) {
            let (c, r) = (pos / data.nrows(), pos % data.nrows());
            return Err(Error::Numeric(format!(
                "non-finite entry at ({r}, {c}) of {}x{} matrix",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_diagonal(rows: usize, cols: usize, diag: &[T]) -> Result<Self> {
        Self::from_fn(rows, cols, |i, j| {
            if i == j && i < diag.len() {
                diag[i]
            } else {
                T::zero()
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(rows, cols, f))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_nalgebra(self) -> DMatrix<T> {
        self.data
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<T> {
        self.data.transpose().as_slice().to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| Float::max(acc, Float::abs(*v)))
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
        }
    }

    pub fn scale(&self, k: T) -> Result<Self> {
        Self::from_nalgebra(&self.data * k)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Self::from_nalgebra(&self.data + &other.data)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Self::from_nalgebra(&self.data - &other.data)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::shape(format!(
                "matmul {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Self::from_nalgebra(&self.data * &other.data)
    }

    pub(crate) fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<DenseMatrix<U>> {
        DenseMatrix::from_nalgebra(self.data.map(|v| U::lit(v.to_f64_lossy())))
    }
}

/// The observed index set of a matrix as a boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    /// Row-major flags.
    observed: Vec<bool>,
    cardinality: usize,
}

impl ObservationMask {
    pub fn new(rows: usize, cols: usize, observed: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(format!("empty mask {rows}x{cols}")));
        }
        if observed.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} flags for a {rows}x{cols} mask",
                observed.len()
            )));
        }
        let cardinality = observed.iter().filter(|b| **b).count();
        Ok(Self {
            rows,
            cols,
            observed,
            cardinality,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut flags = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                flags.push(f(i, j));
            }
        }
        Self::new(rows, cols, flags)
    }

    pub fn full(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![true; rows * cols])
    }

    pub fn empty(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![false; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of observed entries, `|Ω|`.
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.observed[i * self.cols + j]
    }

    pub fn flags(&self) -> &[bool] {
        &self.observed
    }

    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            observed: self.observed.iter().map(|b| !b).collect(),
            cardinality: self.rows * self.cols - self.cardinality,
        }
    }

    pub(crate) fn check_matches<T: Scalar>(&self, a: &DenseMatrix<T>) -> Result<()> {
        if a.shape() != self.shape() {
            return Err(Error::shape(format!(
                "matrix {}x{} vs mask {}x{}",
                a.rows(),
                a.cols(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }
}

/// Keeps the observed entries of `a` and zeroes the rest.
pub fn project_mask<T: Scalar>(a: &DenseMatrix<T>, mask: &ObservationMask) -> Result<DenseMatrix<T>> {
    mask.check_matches(a)?;
    let data = DMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        if mask.is_observed(i, j) {
            a.get(i, j)
        } else {
            T::zero()
        }
    });
    Ok(DenseMatrix { data })
}

pub fn fro_norm<T: Scalar>(a: &DenseMatrix<T>) -> T {
    Float::sqrt(a.data.iter().fold(T::zero(), |acc, v| acc + *v * *v))
}

pub fn fro_inner<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<T> {
    a.check_same_shape(b, "inner product")?;
    Ok(a.data
        .iter()
        .zip(b.data.iter())
        .fold(T::zero(), |acc, (x, y)| acc + *x * *y))
}

/// Thin SVD `a = u diag(s) vᵀ` with `r = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct SvdFactors<T: Scalar> {
    /// `m x r`, orthonormal columns.
    pub u: DMatrix<T>,
    /// Non-increasing, non-negative.
    pub s: Vec<T>,
    /// `n x r`, orthonormal columns.
    pub v: DMatrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `u diag(values) vᵀ` for an arbitrary replacement spectrum.
    pub fn recompose_with(&self, values: &[T]) -> DMatrix<T> {
        debug_assert_eq!(values.len(), self.s.len());
        let mut scaled = self.u.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= values[k];
        }
        scaled * self.v.transpose()
    }

    pub fn recompose(&self) -> DMatrix<T> {
        self.recompose_with(&self.s)
    }
}

const SVD_MAX_SWEEPS: usize = 10_000;

pub fn thin_svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    let (m, n) = a.shape();
    let svd = SVD::try_new(a.data.clone(), true, true, T::default_epsilon(), SVD_MAX_SWEEPS)
        .ok_or_else(|| Error::Numeric(format!("SVD did not converge on {m}x{n} matrix")))?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numeric(format!("SVD of {m}x{n} matrix returned no factors"))),
    };
    let raw: &DVector<T> = &svd.singular_values;
    let r = raw.len();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|&k| Float::max(raw[k], T::zero())).collect();
    let u = DMatrix::from_fn(m, r, |i, k| u[(i, order[k])]);
    let v = DMatrix::from_fn(n, r, |j, k| v_t[(order[k], j)]);
    Ok(SvdFactors { u, s, v })
}

/// Singular values only, non-increasing.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let (m, n) = a.shape();
    let raw = a
        .data
        .clone()
        .try_svd(false, false, T::default_epsilon(), SVD_MAX_SWEEPS)
        .ok_or_else(|| Error::Numeric(format!("SVD did not converge on {m}x{n} matrix")))?
        .singular_values;
    let mut s: Vec<T> = raw.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Reads a headerless CSV matrix, one row per line. Ragged rows are rejected.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<DenseMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut entries = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        cols = record.len();
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::invalid(format!("row {rows}, column {j}: cannot parse {field:?}"))
            })?;
            entries.push(T::lit(v));
        }
        rows += 1;
    }
    DenseMatrix::from_row_major(rows, cols, entries)
}

pub fn write_csv<T: Scalar, W: Write>(a: &DenseMatrix<T>, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..a.rows() {
        wtr.write_record((0..a.cols()).map(|j| format!("{}", a.get(i, j).to_f64_lossy())))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn save_csv<T: Scalar>(a: &DenseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv(a, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_row_major(rows, cols, v.to_vec()).unwrap()
    }

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(DenseMatrix::<f64>::zeros(0, 3), Err(Error::Shape(_))));
        assert!(matches!(
            DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn row_major_round_trip() {
        let a = m(2, 3, &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(a.get(0, 2), 3.0);
        assert_eq!(a.get(1, 0), 4.0);
        assert_eq!(a.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn projection_cases() {
        let a = random(4, 5, 1);
        let full = ObservationMask::full(4, 5).unwrap();
        let empty = ObservationMask::empty(4, 5).unwrap();
        assert_eq!(project_mask(&a, &full).unwrap(), a);
        assert!(project_mask(&a, &empty).unwrap().is_zero());

        let mask = ObservationMask::from_fn(4, 5, |i, j| (i + 2 * j) % 3 == 0).unwrap();
        let once = project_mask(&a, &mask).unwrap();
        assert_eq!(project_mask(&once, &mask).unwrap(), once);

        let wrong = ObservationMask::full(5, 4).unwrap();
        assert!(matches!(project_mask(&a, &wrong), Err(Error::Shape(_))));
    }

    #[test]
    fn mask_cardinality_and_complement() {
        let mask = ObservationMask::from_fn(3, 7, |i, j| (i * j) % 2 == 1).unwrap();
        let expected = mask.flags().iter().filter(|b| **b).count();
        assert_eq!(mask.cardinality(), expected);
        let comp = mask.complement();
        assert_eq!(comp.cardinality(), 21 - expected);
        assert_eq!(comp.complement(), mask);
    }

    #[test]
    fn frobenius_norm_values() {
        assert_eq!(fro_norm(&DenseMatrix::<f64>::zeros(3, 2).unwrap()), 0.0);
        assert_abs_diff_eq!(fro_norm(&DenseMatrix::<f64>::identity(2).unwrap()), 2f64.sqrt());
        assert_eq!(fro_norm(&m(1, 2, &[3., 4.])), 5.0);
    }

    #[test]
    fn frobenius_inner_values() {
        let a = m(2, 2, &[1., 2., 3., 4.]);
        let z = DenseMatrix::zeros(2, 2).unwrap();
        assert_eq!(fro_inner(&a, &z).unwrap(), 0.0);
        assert_abs_diff_eq!(fro_inner(&a, &a).unwrap(), fro_norm(&a).powi(2), epsilon = 1e-12);
        assert_eq!(fro_inner(&a, &DenseMatrix::identity(2).unwrap()).unwrap(), 5.0);
        assert!(fro_inner(&a, &m(1, 2, &[1., 1.])).is_err());
    }

    #[test]
    fn svd_of_zero_and_diagonal() {
        let z = thin_svd(&DenseMatrix::<f64>::zeros(3, 4).unwrap()).unwrap();
        assert_eq!(z.s.len(), 3);
        assert!(z.s.iter().all(|s| *s == 0.0));

        let d = m(2, 2, &[3., 0., 0., -2.]);
        let f = thin_svd(&d).unwrap();
        assert_abs_diff_eq!(f.s[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.s[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.recompose(), d.as_nalgebra().clone(), epsilon = 1e-12);
    }

    #[test]
    fn svd_reconstruction_and_orthonormality() {
        for (rows, cols) in [(20, 8), (8, 20), (7, 7)] {
            let a = random(rows, cols, (rows * 100 + cols) as u64);
            let f = thin_svd(&a).unwrap();
            assert_eq!(f.rank(), rows.min(cols));
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
            assert!(f.s.iter().all(|s| *s >= 0.0));
            let resid = (f.recompose() - a.as_nalgebra()).norm();
            assert!(resid <= 1e-10 * fro_norm(&a), "residual {resid}");
            let r = f.rank();
            let eye = DMatrix::<f64>::identity(r, r);
            assert!((f.u.transpose() * &f.u - &eye).amax() <= 1e-10);
            assert!((f.v.transpose() * &f.v - &eye).amax() <= 1e-10);
        }
    }

    #[test]
    fn svd_works_in_single_precision() {
        let a = random(6, 4, 9).cast::<f32>().unwrap();
        let f = thin_svd(&a).unwrap();
        let resid = (f.recompose() - a.as_nalgebra()).norm();
        assert!(resid <= 1e-5 * fro_norm(&a));
    }

    #[test]
    fn csv_round_trip_and_ragged_rows() {
        let a = random(3, 4, 5);
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let b: DenseMatrix<f64> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(a, b);

        let ragged = "1,2,3\n4,5\n";
        assert!(matches!(read_csv::<f64, _>(ragged.as_bytes()), Err(Error::Csv(_))));
        assert!(read_csv::<f64, _>("1,x\n".as_bytes()).is_err());
        assert!(read_csv::<f64, _>("".as_bytes()).is_err());
    }
}
