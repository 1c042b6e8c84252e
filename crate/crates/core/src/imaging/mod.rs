//! Image inpainting and multispectral restoration harness.

pub mod degrade;
pub mod image;
pub mod metrics;
pub mod msi;

pub use degrade::{degrade, stripe_columns, DegradeSpec, Degraded, MaskKind};
pub use image::{decode_pnm, encode_pgm, read_image, write_image, BitDepth, ImagePlane};
pub use metrics::{psnr, psnr_from_mse, ssim, BandMetrics, ImageMetrics};
pub use msi::{density_from_snr_db, msi_stack, msi_unstack, salt_pepper};
