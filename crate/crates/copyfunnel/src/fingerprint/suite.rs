//! Bundled synthetic perturbation suite for dhash robustness checks.
//!
//! Images are smooth sums of low-frequency cosine waves, generated
//! deterministically from a seed, so the suite is identical on every run
//! without shipping binary fixtures. Perturbations are the documented ones:
//! brightness +/-10 on every pixel and a 1-pixel crop from each edge, both
//! applied before downsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pgm::{adjust_brightness, crop_border, GrayImage};

/// Deterministic smooth grayscale test image.
pub fn synthetic_image(seed: u64, width: usize, height: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const WAVES: usize = 4;
    let mut amp = [0f64; WAVES];
    let mut fx = [0f64; WAVES];
    let mut fy = [0f64; WAVES];
    let mut phase = [0f64; WAVES];
    for j in 0..WAVES {
        amp[j] = rng.random_range(0.3..1.0);
        fx[j] = rng.random_range(0.2..1.6);
        fy[j] = rng.random_range(0.2..1.6);
        phase[j] = rng.random_range(0.0..std::f64::consts::TAU);
    }
    let mut field = vec![0f64; width * height];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for y in 0..height {
        for x in 0..width {
            let mut v = 0.0;
            for j in 0..WAVES {
                let t = std::f64::consts::TAU
                    * (fx[j] * x as f64 / width as f64 + fy[j] * y as f64 / height as f64)
                    + phase[j];
                v += amp[j] * t.cos();
            }
            field[y * width + x] = v;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels = field
        .iter()
        .map(|&v| (16.0 + (v - lo) / span * 223.0).floor() as u8)
        .collect();
    GrayImage {
        width,
        height,
        pixels,
    }
}

/// The bundled perturbations of one image, by name.
pub fn perturbations(img: &GrayImage) -> Vec<(&'static str, GrayImage)> {
    let mut out = vec![
        ("brightness+10", adjust_brightness(img, 10)),
        ("brightness-10", adjust_brightness(img, -10)),
    ];
    if let Ok(cropped) = crop_border(img, 1) {
        out.push(("crop1px", cropped));
    }
    out
}

/// The 200-image suite at 64x64, seeds 0..count.
pub fn robustness_suite(count: usize) -> Vec<GrayImage> {
    (0..count as u64)
        .map(|seed| synthetic_image(seed, 64, 64))
        .collect()
}
