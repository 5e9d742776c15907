//! Full-reference image quality metrics: PSNR, SSIM, UQI.
//!
//! SSIM and UQI run on the BT.601 integer luma plane with an 8x8 sliding
//! window at stride 1, which keeps UQI structurally equal to SSIM with both
//! stabilizing constants at zero and lets one window engine serve both.
//! Window sums come from integer summed-area tables, so the window
//! statistics are exact.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::raster::Raster;

pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);
const WINDOW: usize = 8;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("images have different dimensions")]
    DimensionMismatch,
    #[error("images smaller than the {WINDOW}x{WINDOW} analysis window")]
    TooSmall,
}

/// PSNR / SSIM / UQI triple. PSNR is +inf for identical inputs and is
/// serialized as the string "inf" in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityScores {
    pub psnr: f64,
    pub ssim: f64,
    pub uqi: f64,
}

impl Serialize for QualityScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("QualityScores", 3)?;
        if self.psnr.is_finite() {
            s.serialize_field("psnr", &self.psnr)?;
        } else {
            s.serialize_field("psnr", "inf")?;
        }
        s.serialize_field("ssim", &self.ssim)?;
        s.serialize_field("uqi", &self.uqi)?;
        s.end()
    }
}

/// Format a decibel value for reports: "inf" or a fixed 4-decimal number.
pub fn format_db(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "inf".to_string()
    }
}

/// All three metrics with one shared window engine (the summed-area tables
/// dominate the cost on large images).
pub fn quality_scores(a: &Raster, b: &Raster) -> Result<QualityScores, MetricsError> {
    let engine = WindowEngine::new(a, b)?;
    let (ssim, uqi) = windowed_pair(&engine);
    Ok(QualityScores { psnr: psnr(a, b)?, ssim, uqi })
}

/// Peak signal-to-noise ratio over all 3*w*h channel samples,
/// 10*log10(255^2 / MSE); +inf when the images are identical.
pub fn psnr(a: &Raster, b: &Raster) -> Result<f64, MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch);
    }
    let mut sse = 0u64;
    for (pa, pb) in a.pixels().iter().zip(b.pixels().iter()) {
        for c in 0..3 {
            let d = pa[c] as i64 - pb[c] as i64;
            sse += (d * d) as u64;
        }
    }
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / (3.0 * a.pixel_count() as f64);
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

struct WindowStats {
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
    /// Both windows are the same constant patch.
    identical_constants: bool,
}

/// Integer summed-area tables over the two luma planes; exact window sums.
struct WindowEngine {
    w: usize,
    h: usize,
    sum_a: Vec<u64>,
    sum_b: Vec<u64>,
    sum_aa: Vec<u64>,
    sum_bb: Vec<u64>,
    sum_ab: Vec<u64>,
}

impl WindowEngine {
    fn new(a: &Raster, b: &Raster) -> Result<Self, MetricsError> {
        if a.width() != b.width() || a.height() != b.height() {
            return Err(MetricsError::DimensionMismatch);
        }
        let (w, h) = (a.width() as usize, a.height() as usize);
        if w < WINDOW || h < WINDOW {
            return Err(MetricsError::TooSmall);
        }
        let la = a.luma_plane();
        let lb = b.luma_plane();
        let stride = w + 1;
        let mut sum_a = vec![0u64; stride * (h + 1)];
        let mut sum_b = vec![0u64; stride * (h + 1)];
        let mut sum_aa = vec![0u64; stride * (h + 1)];
        let mut sum_bb = vec![0u64; stride * (h + 1)];
        let mut sum_ab = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                let va = la[y * w + x] as u64;
                let vb = lb[y * w + x] as u64;
                let i = (y + 1) * stride + x + 1;
                let up = i - stride;
                sum_a[i] = va + sum_a[i - 1] + sum_a[up] - sum_a[up - 1];
                sum_b[i] = vb + sum_b[i - 1] + sum_b[up] - sum_b[up - 1];
                sum_aa[i] = va * va + sum_aa[i - 1] + sum_aa[up] - sum_aa[up - 1];
                sum_bb[i] = vb * vb + sum_bb[i - 1] + sum_bb[up] - sum_bb[up - 1];
                sum_ab[i] = va * vb + sum_ab[i - 1] + sum_ab[up] - sum_ab[up - 1];
            }
        }
        Ok(Self { w, h, sum_a, sum_b, sum_aa, sum_bb, sum_ab })
    }

    fn rect(&self, table: &[u64], x: usize, y: usize) -> u64 {
        let stride = self.w + 1;
        let (x1, y1) = (x + WINDOW, y + WINDOW);
        table[y1 * stride + x1] + table[y * stride + x]
            - table[y * stride + x1]
            - table[y1 * stride + x]
    }

    fn stats(&self, x: usize, y: usize) -> WindowStats {
        let n = (WINDOW * WINDOW) as f64;
        let sa = self.rect(&self.sum_a, x, y);
        let sb = self.rect(&self.sum_b, x, y);
        let saa = self.rect(&self.sum_aa, x, y);
        let sbb = self.rect(&self.sum_bb, x, y);
        let sab = self.rect(&self.sum_ab, x, y);
        let mean_a = sa as f64 / n;
        let mean_b = sb as f64 / n;
        let var_a = (saa as f64 - sa as f64 * sa as f64 / n) / n;
        let var_b = (sbb as f64 - sb as f64 * sb as f64 / n) / n;
        let cov = (sab as f64 - sa as f64 * sb as f64 / n) / n;
        // Exact integer identities: zero variance iff n*saa == sa^2.
        let const_a = (WINDOW * WINDOW) as u64 * saa == sa * sa;
        let const_b = (WINDOW * WINDOW) as u64 * sbb == sb * sb;
        WindowStats {
            mean_a,
            mean_b,
            var_a,
            var_b,
            cov,
            identical_constants: const_a && const_b && sa == sb,
        }
    }

    fn for_each(&self, mut f: impl FnMut(WindowStats)) {
        for y in 0..=(self.h - WINDOW) {
            for x in 0..=(self.w - WINDOW) {
                f(self.stats(x, y));
            }
        }
    }
}

/// Both windowed metrics from one engine pass.
fn windowed_pair(engine: &WindowEngine) -> (f64, f64) {
    let mut ssim_total = 0.0;
    let mut ssim_count = 0usize;
    let mut uqi_total = 0.0;
    let mut uqi_count = 0usize;
    engine.for_each(|s| {
        let numerator = (2.0 * s.mean_a * s.mean_b + SSIM_C1) * (2.0 * s.cov + SSIM_C2);
        let denominator = (s.mean_a * s.mean_a + s.mean_b * s.mean_b + SSIM_C1)
            * (s.var_a + s.var_b + SSIM_C2);
        ssim_total += numerator / denominator;
        ssim_count += 1;

        let uqi_denominator =
            (s.mean_a * s.mean_a + s.mean_b * s.mean_b) * (s.var_a + s.var_b);
        if uqi_denominator.abs() < 1e-8 {
            if s.identical_constants {
                uqi_total += 1.0;
                uqi_count += 1;
            }
        } else {
            uqi_total += (2.0 * s.mean_a * s.mean_b) * (2.0 * s.cov) / uqi_denominator;
            uqi_count += 1;
        }
    });
    let ssim = ssim_total / ssim_count as f64;
    let uqi = if uqi_count == 0 { 0.0 } else { uqi_total / uqi_count as f64 };
    (ssim, uqi)
}

/// Mean structural similarity over the luma plane.
pub fn ssim(a: &Raster, b: &Raster) -> Result<f64, MetricsError> {
    let engine = WindowEngine::new(a, b)?;
    Ok(windowed_pair(&engine).0)
}

/// Universal Image Quality Index: the SSIM formula with both constants at
/// zero. Windows with a vanishing denominator contribute 1 when both windows
/// are identical constants and are skipped otherwise.
pub fn uqi(a: &Raster, b: &Raster) -> Result<f64, MetricsError> {
    let engine = WindowEngine::new(a, b)?;
    Ok(windowed_pair(&engine).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_raster(w: u32, h: u32, seed: u64) -> Raster {
        let mut rng = SplitMix64::new(seed);
        let pixels = (0..w as usize * h as usize)
            .map(|_| [rng.next_u8(), rng.next_u8(), rng.next_u8()])
            .collect();
        Raster::from_pixels(w, h, pixels)
    }

    #[test]
    fn identical_images_hit_maxima() {
        let r = random_raster(32, 24, 1);
        assert_eq!(psnr(&r, &r).unwrap(), f64::INFINITY);
        assert_eq!(ssim(&r, &r).unwrap(), 1.0);
        assert_eq!(uqi(&r, &r).unwrap(), 1.0);
    }

    #[test]
    fn black_vs_white_is_zero_db() {
        let a = Raster::filled(10, 10, [0, 0, 0]);
        let b = Raster::filled(10, 10, [255, 255, 255]);
        assert!((psnr(&a, &b).unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn single_unit_error_in_100x100() {
        let a = Raster::filled(100, 100, [50, 50, 50]);
        let mut b = a.clone();
        b.set(3, 7, [51, 50, 50]);
        // MSE = 1/30000, so PSNR = 10*log10(255^2 * 30000).
        let expected = 10.0 * (255.0f64 * 255.0 * 30_000.0).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Raster::filled(8, 8, [0, 0, 0]);
        let b = Raster::filled(9, 8, [0, 0, 0]);
        assert!(matches!(psnr(&a, &b), Err(MetricsError::DimensionMismatch)));
        assert!(matches!(ssim(&a, &b), Err(MetricsError::DimensionMismatch)));
    }

    #[test]
    fn too_small_for_windows() {
        let a = Raster::filled(7, 12, [0, 0, 0]);
        assert!(matches!(ssim(&a, &a), Err(MetricsError::TooSmall)));
    }

    #[test]
    fn inversion_has_low_ssim() {
        let a = random_raster(32, 32, 99);
        let inverted = Raster::from_pixels(
            32,
            32,
            a.pixels().iter().map(|p| [255 - p[0], 255 - p[1], 255 - p[2]]).collect(),
        );
        assert!(ssim(&a, &inverted).unwrap() < 0.2);
    }

    #[test]
    fn anticorrelated_gradients_give_negative_uqi() {
        let w = 16u32;
        let pixels_up: Vec<[u8; 3]> = (0..w * w)
            .map(|i| {
                let v = ((i % w) * 16) as u8;
                [v, v, v]
            })
            .collect();
        let pixels_down: Vec<[u8; 3]> = (0..w * w)
            .map(|i| {
                let v = 240 - ((i % w) * 16) as u8;
                [v, v, v]
            })
            .collect();
        let a = Raster::from_pixels(w, w, pixels_up);
        let b = Raster::from_pixels(w, w, pixels_down);
        assert!(uqi(&a, &b).unwrap() < 0.0);
    }

    #[test]
    fn psnr_serializes_inf_as_string() {
        let scores = QualityScores { psnr: f64::INFINITY, ssim: 1.0, uqi: 1.0 };
        let json = serde_json::to_string(&scores).unwrap();
        assert!(json.contains("\"inf\""));
    }
}
