//! Multispectral cubes as `(w·h) x bands` matrices, and impulse noise.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::imaging::image::{BitDepth, ImagePlane};
use crate::matrix::DenseMatrix;
use crate::rng::{stream, STREAM_IMPULSE};
use crate::scalar::Scalar;

/// Column `b` is band `b` vectorized column-major (pixel `(r, c)` at `c·h + r`).
pub fn msi_stack<T: Scalar>(bands: &[ImagePlane]) -> Result<DenseMatrix<T>> {
    let first = bands
        .first()
        .ok_or_else(|| Error::shape("no bands to stack"))?;
    let (w, h) = (first.width(), first.height());
    if let Some((i, b)) = bands
        .iter()
        .enumerate()
        .find(|(_, b)| (b.width(), b.height()) != (w, h))
    {
        return Err(Error::shape(format!(
            "band {i} is {}x{}, band 0 is {w}x{h}",
            b.width(),
            b.height()
        )));
    }
    DenseMatrix::from_fn(w * h, bands.len(), |p, b| {
        let (c, r) = (p / h, p % h);
        T::lit(bands[b].at(r, c))
    })
}

/// Inverse of [`msi_stack`]; values are clamped to `[0, 1]`.
pub fn msi_unstack<T: Scalar>(
    matrix: &DenseMatrix<T>,
    width: usize,
    height: usize,
    depth: BitDepth,
) -> Result<Vec<ImagePlane>> {
    if matrix.rows() != width * height {
        return Err(Error::shape(format!(
            "{} rows cannot hold {width}x{height} bands",
            matrix.rows()
        )));
    }
    (0..matrix.cols())
        .map(|b| {
            let mut px = vec![0.0; width * height];
            for c in 0..width {
                for r in 0..height {
                    px[r * width + c] = matrix.get(c * height + r, b).to_f64_lossy().clamp(0.0, 1.0);
                }
            }
            ImagePlane::new(width, height, px, depth)
        })
        .collect()
}

/// Impulse density for a signal-to-noise ratio in dB: `1 / 10^(dB/10)`, capped at 1.
pub fn density_from_snr_db(snr_db: f64) -> f64 {
    (1.0 / 10f64.powf(snr_db / 10.0)).min(1.0)
}

/// Sets `round(density · count)` uniformly chosen entries to 0 or the matrix
/// maximum with equal probability.
pub fn salt_pepper<T: Scalar>(x: &DenseMatrix<T>, density: f64, seed: u64) -> Result<DenseMatrix<T>> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid(format!("density {density} not in [0, 1]")));
    }
    let (rows, cols) = x.shape();
    let total = rows * cols;
    let salt = x
        .as_nalgebra()
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    let mut data = x.as_nalgebra().clone();
    let mut rng = stream(seed, STREAM_IMPULSE);
    let count = (density * total as f64).round() as usize;
    for p in sample(&mut rng, total, count).into_iter() {
        data[(p / cols, p % cols)] = if rng.gen::<bool>() { salt } else { T::zero() };
    }
    DenseMatrix::from_nalgebra(data)
}
