//! PSNR and SSIM.
//!
//! SSIM follows the usual reference setting: 11x11 Gaussian window with
//! standard deviation 1.5, `K1 = 0.01`, `K2 = 0.03`, statistics over every
//! fully contained window, averaged.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::imaging::image::ImagePlane;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check_dims(a: &ImagePlane, b: &ImagePlane) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::shape(format!(
            "images {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// `10 log10(peak² / MSE)`; `+∞` for identical inputs.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn psnr(reference: &ImagePlane, test: &ImagePlane, peak: f64) -> Result<f64> {
    check_dims(reference, test)?;
    if !(peak > 0.0) {
        return Err(Error::invalid(format!("peak {peak} must be positive")));
    }
    let n = reference.pixels().len() as f64;
    let mse = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    Ok(psnr_from_mse(mse, peak))
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, w) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *w = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable "valid" filtering of a row-major `h x w` field.
fn filter_valid(field: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        let line = &field[r * w..(r + 1) * w];
        for c in 0..ow {
            rows[r * ow + c] = k.iter().zip(&line[c..c + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = k
                .iter()
                .enumerate()
                .map(|(t, kt)| kt * rows[(r + t) * ow + c])
                .sum();
        }
    }
    out
}

/// Mean structural similarity with dynamic range `dynamic_range`.
pub fn ssim(reference: &ImagePlane, test: &ImagePlane, dynamic_range: f64) -> Result<f64> {
    check_dims(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::shape(format!(
            "image {w}x{h} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    if !(dynamic_range > 0.0) {
        return Err(Error::invalid(format!("dynamic range {dynamic_range} must be positive")));
    }
    let c1 = (SSIM_K1 * dynamic_range).powi(2);
    let c2 = (SSIM_K2 * dynamic_range).powi(2);
    let k = gaussian_kernel();
    let x = reference.pixels();
    let y = test.pixels();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, w, h, &k);
    let mu_y = filter_valid(y, w, h, &k);
    let e_xx = filter_valid(&xx, w, h, &k);
    let e_yy = filter_valid(&yy, w, h, &k);
    let e_xy = filter_valid(&xy, w, h, &k);

    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = e_xx[i] - mx * mx;
            let var_y = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// Serializes `+∞` PSNR as the string `"inf"` (JSON has no infinity).
pub fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandMetrics {
    pub band: usize,
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Metrics JSON payload: `{psnr_db, ssim, per_band: [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageMetrics {
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub ssim: f64,
    pub per_band: Vec<BandMetrics>,
}

impl ImageMetrics {
    pub fn single(reference: &ImagePlane, test: &ImagePlane) -> Result<Self> {
        Ok(Self {
            psnr_db: psnr(reference, test, 1.0)?,
            ssim: ssim(reference, test, 1.0)?,
            per_band: Vec::new(),
        })
    }

    /// Per-band metrics with band means as the headline values.
    pub fn bands(reference: &[ImagePlane], test: &[ImagePlane]) -> Result<Self> {
        if reference.len() != test.len() || reference.is_empty() {
            return Err(Error::shape(format!(
                "{} reference bands vs {} recovered",
                reference.len(),
                test.len()
            )));
        }
        let per_band = reference
            .iter()
            .zip(test)
            .enumerate()
            .map(|(band, (r, t))| {
                Ok(BandMetrics {
                    band,
                    psnr_db: psnr(r, t, 1.0)?,
                    ssim: ssim(r, t, 1.0)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = per_band.len() as f64;
        Ok(Self {
            psnr_db: per_band.iter().map(|b| b.psnr_db).sum::<f64>() / k,
            ssim: per_band.iter().map(|b| b.ssim).sum::<f64>() / k,
            per_band,
        })
    }
}
