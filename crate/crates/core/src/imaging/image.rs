//! Grayscale planes and binary PGM/PPM codecs.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn maxval(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }
}

/// Grayscale raster with pixels normalized to `[0, 1]`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    source_depth: BitDepth,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, source_depth: BitDepth) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("pixel value {p} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
            source_depth,
        })
    }

    /// Builds a plane from a `height x width` matrix, clamping to `[0, 1]`.
    pub fn from_matrix_clamped<T: Scalar>(m: &DenseMatrix<T>, source_depth: BitDepth) -> Result<Self> {
        let pixels = m
            .to_row_major()
            .into_iter()
            .map(|v| v.to_f64_lossy().clamp(0.0, 1.0))
            .collect();
        Self::new(m.cols(), m.rows(), pixels, source_depth)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn source_depth(&self) -> BitDepth {
        self.source_depth
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Pixels rounded to the source depth's grid, i.e. what [`encode_pgm`] stores.
    pub fn quantized(&self) -> Self {
        let maxval = self.source_depth.maxval() as f64;
        let scale = 1.0 / maxval;
        Self {
            pixels: self.pixels.iter().map(|p| (p * maxval).round() * scale).collect(),
            ..self.clone()
        }
    }

    /// `height x width` matrix of the pixels.
    pub fn to_matrix<T: Scalar>(&self) -> Result<DenseMatrix<T>> {
        DenseMatrix::from_row_major(
            self.height,
            self.width,
            self.pixels.iter().map(|&p| T::lit(p)).collect(),
        )
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} out of range")))
    }
}

/// Decodes a binary PGM (P5) or PPM (P6); color is reduced to Rec.601 luma.
pub fn decode_pnm(bytes: &[u8]) -> Result<ImagePlane> {
    if bytes.is_empty() {
        return Err(Error::format(0, "empty file"));
    }
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::format(0, "not a PNM file"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        other => {
            return Err(Error::format(
                1,
                format!("unsupported magic P{}", other as char),
            ))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let maxval_at = cur.pos;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format(2, format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(maxval_at, format!("maxval {maxval} not in 1..=65535")));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::format(cur.pos, "missing whitespace after header")),
    }

    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let needed = width * height * channels * sample_bytes;
    let payload = &bytes[cur.pos..];
    if payload.len() < needed {
        return Err(Error::format(
            bytes.len(),
            format!("truncated payload: {} of {needed} bytes", payload.len()),
        ));
    }
    let scale = 1.0 / maxval as f64;
    let sample = |k: usize| -> f64 {
        let v = if sample_bytes == 1 {
            payload[k] as u32
        } else {
            u16::from_be_bytes([payload[2 * k], payload[2 * k + 1]]) as u32
        };
        (v.min(maxval) as f64) * scale
    };
    let pixels: Vec<f64> = (0..width * height)
        .map(|p| {
            if channels == 1 {
                sample(p)
            } else {
                let (r, g, b) = (sample(3 * p), sample(3 * p + 1), sample(3 * p + 2));
                (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0)
            }
        })
        .collect();
    let depth = if maxval < 256 {
        BitDepth::Eight
    } else {
        BitDepth::Sixteen
    };
    ImagePlane::new(width, height, pixels, depth)
}

/// Encodes as P5 at the plane's source depth, clamping to `[0, 1]`.
pub fn encode_pgm(plane: &ImagePlane) -> Vec<u8> {
    let maxval = plane.source_depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", plane.width, plane.height, maxval).into_bytes();
    for &p in &plane.pixels {
        let q = (p.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match plane.source_depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImagePlane> {
    decode_pnm(&std::fs::read(path)?)
}

pub fn write_image(plane: &ImagePlane, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_pgm(plane))?;
    Ok(())
}
