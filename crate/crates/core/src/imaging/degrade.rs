//! Inpainting degradations: outliers plus a random or stripe mask.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::imaging::image::ImagePlane;
use crate::matrix::{project_mask, DenseMatrix, ObservationMask};
use crate::rng::{stream, STREAM_OUTLIERS};
use crate::synth::bernoulli_mask;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Random,
    /// Vertical stripes: column `c` is missing when `c mod period < width`.
    Stripe,
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(MaskKind::Random),
            "stripe" => Ok(MaskKind::Stripe),
            other => Err(Error::invalid(format!("unknown mask kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegradeSpec {
    pub mask_kind: MaskKind,
    /// Observed fraction for random masks.
    pub gamma: f64,
    pub stripe_width: usize,
    pub stripe_period: usize,
    pub outlier_frac: f64,
    /// Outliers are uniform on `[-outlier_mag, outlier_mag]`.
    pub outlier_mag: f64,
    pub seed: u64,
}

impl Default for DegradeSpec {
    fn default() -> Self {
        Self {
            mask_kind: MaskKind::Random,
            gamma: 0.8,
            stripe_width: 4,
            stripe_period: 16,
            outlier_frac: 0.2,
            outlier_mag: 2.0,
            seed: 0,
        }
    }
}

impl DegradeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!("gamma {} not in [0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.outlier_frac) {
            return Err(Error::invalid(format!(
                "outlier fraction {} not in [0, 1]",
                self.outlier_frac
            )));
        }
        if !(self.outlier_mag >= 0.0 && self.outlier_mag.is_finite()) {
            return Err(Error::invalid(format!(
                "outlier magnitude {} must be non-negative",
                self.outlier_mag
            )));
        }
        if self.mask_kind == MaskKind::Stripe && self.stripe_width >= self.stripe_period {
            return Err(Error::invalid(format!(
                "stripe width {} must be below period {}",
                self.stripe_width, self.stripe_period
            )));
        }
        Ok(())
    }
}

/// Column indices hidden by a stripe mask of the given geometry.
pub fn stripe_columns(width: usize, stripe_width: usize, stripe_period: usize) -> Vec<usize> {
    (0..width)
        .filter(|c| c % stripe_period < stripe_width)
        .collect()
}

#[derive(Clone, Debug)]
pub struct Degraded<T: Scalar> {
    /// Corrupted image projected onto the mask (`height x width`).
    pub x: DenseMatrix<T>,
    pub mask: ObservationMask,
    pub outlier_count: usize,
}

pub fn degrade<T: Scalar>(plane: &ImagePlane, spec: &DegradeSpec) -> Result<Degraded<T>> {
    spec.validate()?;
    let (h, w) = (plane.height(), plane.width());
    let mut data = plane.to_matrix::<T>()?.into_nalgebra();

    let count = (spec.outlier_frac * (w * h) as f64).round() as usize;
    let mut rng = stream(spec.seed, STREAM_OUTLIERS);
    for p in sample(&mut rng, w * h, count).into_iter() {
        let noise = rng.gen_range(-spec.outlier_mag..=spec.outlier_mag);
        data[(p / w, p % w)] += T::lit(noise);
    }
    let corrupted = DenseMatrix::from_nalgebra(data)?;

    let mask = match spec.mask_kind {
        MaskKind::Random => bernoulli_mask(h, w, spec.gamma, spec.seed)?,
        MaskKind::Stripe => ObservationMask::from_fn(h, w, |_, c| {
            c % spec.stripe_period >= spec.stripe_width
        })?,
    };
    Ok(Degraded {
        x: project_mask(&corrupted, &mask)?,
        mask,
        outlier_count: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::image::BitDepth;

    fn ramp(w: usize, h: usize) -> ImagePlane {
        let px = (0..w * h).map(|i| (i % 97) as f64 / 96.0).collect();
        ImagePlane::new(w, h, px, BitDepth::Eight).unwrap()
    }

    #[test]
    fn identity_degradation() {
        let plane = ramp(20, 10);
        let spec = DegradeSpec {
            gamma: 1.0,
            outlier_frac: 0.0,
            ..DegradeSpec::default()
        };
        let d: Degraded<f64> = degrade(&plane, &spec).unwrap();
        assert_eq!(d.x, plane.to_matrix().unwrap());
        assert_eq!(d.mask.cardinality(), 200);
    }

    #[test]
    fn stripe_geometry() {
        let plane = ramp(64, 8);
        let spec = DegradeSpec {
            mask_kind: MaskKind::Stripe,
            outlier_frac: 0.0,
            ..DegradeSpec::default()
        };
        let d: Degraded<f64> = degrade(&plane, &spec).unwrap();
        assert_eq!(stripe_columns(64, 4, 16).len(), 16);
        assert_eq!(d.mask.cardinality(), (64 - 16) * 8);
        for c in 0..64 {
            assert_eq!(d.mask.is_observed(3, c), c % 16 >= 4);
        }
    }

    #[test]
    fn outlier_count_and_range() {
        let plane = ramp(30, 20);
        let spec = DegradeSpec {
            gamma: 1.0,
            ..DegradeSpec::default()
        };
        let d: Degraded<f64> = degrade(&plane, &spec).unwrap();
        assert_eq!(d.outlier_count, (0.2f64 * 600.0).round() as usize);
        let clean: DenseMatrix<f64> = plane.to_matrix().unwrap();
        let mut changed = 0;
        for i in 0..20 {
            for j in 0..30 {
                let diff = d.x.get(i, j) - clean.get(i, j);
                assert!(diff.abs() <= 2.0);
                if diff != 0.0 {
                    changed += 1;
                }
            }
        }
        assert_eq!(changed, d.outlier_count);
    }

    #[test]
    fn deterministic_per_seed() {
        let plane = ramp(40, 30);
        let spec = DegradeSpec {
            seed: 9,
            ..DegradeSpec::default()
        };
        let a: Degraded<f64> = degrade(&plane, &spec).unwrap();
        let b: Degraded<f64> = degrade(&plane, &spec).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.mask, b.mask);
        let other: Degraded<f64> = degrade(&plane, &DegradeSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.mask, other.mask);
    }

    #[test]
    fn random_mask_cardinality_concentrates() {
        let px = vec![0.5; 300 * 200];
        let plane = ImagePlane::new(300, 200, px, BitDepth::Eight).unwrap();
        let spec = DegradeSpec {
            gamma: 0.6,
            outlier_frac: 0.0,
            seed: 4,
            ..DegradeSpec::default()
        };
        let d: Degraded<f64> = degrade(&plane, &spec).unwrap();
        let n = 60_000.0;
        let sd = (n * 0.6 * 0.4f64).sqrt();
        assert!((d.mask.cardinality() as f64 - 0.6 * n).abs() <= 4.0 * sd);
    }

    #[test]
    fn rejects_bad_stripes() {
        let spec = DegradeSpec {
            mask_kind: MaskKind::Stripe,
            stripe_width: 16,
            stripe_period: 16,
            ..DegradeSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}
