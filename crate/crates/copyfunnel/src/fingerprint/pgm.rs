//! Binary PGM (P5, 8-bit) ingestion and the bit-specified downsampler.
//!
//! The exact digest of an image work is taken over the raw PGM bytes, so the
//! parser never rewrites or normalizes the input.

use super::{FingerprintError, LumaGrid};

/// 8-bit grayscale image in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, FingerprintError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(FingerprintError::Dimension(format!(
                "{}x{} image with {} pixels",
                width,
                height,
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Parse binary PGM (magic `P5`, maxval <= 255). Comments (`#`) are allowed
/// in the header.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, FingerprintError> {
    fn skip_ws_and_comments(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_token(bytes: &[u8], pos: &mut usize) -> Result<usize, FingerprintError> {
        skip_ws_and_comments(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(FingerprintError::PgmFormat(
                "expected integer in header".into(),
            ));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| FingerprintError::PgmFormat("bad integer in header".into()))
    }

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(FingerprintError::PgmFormat("missing P5 magic".into()));
    }
    let mut pos = 2usize;
    let width = read_token(bytes, &mut pos)?;
    let height = read_token(bytes, &mut pos)?;
    let maxval = read_token(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(FingerprintError::PgmFormat(format!(
            "maxval {maxval} out of range (need 1..=255)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(FingerprintError::PgmFormat(
            "missing separator before raster".into(),
        ));
    }
    pos += 1;
    let need = width
        .checked_mul(height)
        .ok_or_else(|| FingerprintError::PgmFormat("dimensions overflow".into()))?;
    let raster = &bytes[pos..];
    if raster.len() < need {
        return Err(FingerprintError::PgmFormat(format!(
            "raster truncated: need {need} bytes, have {}",
            raster.len()
        )));
    }
    GrayImage::new(width, height, raster[..need].to_vec())
}

/// Encode as binary PGM with maxval 255.
pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Box-filter downsample to the 9x8 dhash grid.
///
/// Cell (r, c) covers source columns `[c*W/9, (c+1)*W/9)` and rows
/// `[r*H/8, (r+1)*H/8)` (integer floor division); its value is the floor of
/// the mean of the covered pixels. Requires at least 9x8 source pixels.
pub fn downsample_to_grid(img: &GrayImage) -> Result<LumaGrid, FingerprintError> {
    if img.width < LumaGrid::COLS || img.height < LumaGrid::ROWS {
        return Err(FingerprintError::Dimension(format!(
            "image {}x{} too small to downsample to {}x{}",
            img.width,
            img.height,
            LumaGrid::COLS,
            LumaGrid::ROWS
        )));
    }
    let mut cells = [[0u8; 9]; 8];
    for (r, row) in cells.iter_mut().enumerate() {
        let y0 = r * img.height / LumaGrid::ROWS;
        let y1 = (r + 1) * img.height / LumaGrid::ROWS;
        for (c, cell) in row.iter_mut().enumerate() {
            let x0 = c * img.width / LumaGrid::COLS;
            let x1 = (c + 1) * img.width / LumaGrid::COLS;
            let mut sum: u64 = 0;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += u64::from(img.pixel(x, y));
                }
            }
            let count = ((y1 - y0) * (x1 - x0)) as u64;
            *cell = (sum / count) as u8;
        }
    }
    Ok(LumaGrid::new(cells))
}

/// Shift every pixel by `delta`, clamping to 0..=255.
pub fn adjust_brightness(img: &GrayImage, delta: i16) -> GrayImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&p| (i16::from(p) + delta).clamp(0, 255) as u8)
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Remove a `border`-pixel frame from every edge.
pub fn crop_border(img: &GrayImage, border: usize) -> Result<GrayImage, FingerprintError> {
    if img.width <= 2 * border || img.height <= 2 * border {
        return Err(FingerprintError::Dimension(format!(
            "cannot crop {border}px border from {}x{}",
            img.width, img.height
        )));
    }
    let width = img.width - 2 * border;
    let height = img.height - 2 * border;
    let mut pixels = Vec::with_capacity(width * height);
    for y in border..border + height {
        let start = y * img.width + border;
        pixels.extend_from_slice(&img.pixels[start..start + width]);
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}
