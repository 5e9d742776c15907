//! Pixel-domain transforms used by the disarm pipeline and the tuning
//! experiments. All rounding rules are fixed (round half away from zero) so
//! identical inputs produce bit-identical outputs on every platform.

use thiserror::Error;

use crate::raster::Raster;

pub const DEFAULT_RESIZE_SCALE: f64 = 0.97;
pub const DEFAULT_BLUR_SIGMA: f64 = 1.0;
pub const DEFAULT_BLUR_RADIUS: usize = 2;
pub const DEFAULT_DETOX_GAMMA: f64 = 0.97;
pub const DEFAULT_DETOX_W: f64 = 1.0;

#[derive(Debug, Error)]
pub enum OpsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Per-axis tap table for half-pixel-center sampling with edge clamping.
fn bilinear_taps(src_dim: u32, dst_dim: u32) -> Vec<(usize, usize, f64)> {
    let scale = src_dim as f64 / dst_dim as f64;
    (0..dst_dim)
        .map(|d| {
            let s = (d as f64 + 0.5) * scale - 0.5;
            let floor = s.floor();
            let t = s - floor;
            let i0 = (floor as i64).clamp(0, src_dim as i64 - 1) as usize;
            let i1 = (floor as i64 + 1).clamp(0, src_dim as i64 - 1) as usize;
            (i0, i1, t)
        })
        .collect()
}

/// Bilinear resize with half-pixel-center sampling
/// (source coordinate = (d + 0.5) * scale - 0.5) and edge clamping.
pub fn resize_bilinear(r: &Raster, new_w: u32, new_h: u32) -> Raster {
    assert!(new_w >= 1 && new_h >= 1, "target dimensions must be at least 1x1");
    assert!(
        new_w as u64 * new_h as u64 <= crate::MAX_PIXELS,
        "target exceeds the pixel gate"
    );
    if new_w == r.width() && new_h == r.height() {
        return r.clone();
    }
    let x_taps = bilinear_taps(r.width(), new_w);
    let y_taps = bilinear_taps(r.height(), new_h);
    let src = r.pixels();
    let stride = r.width() as usize;
    let mut pixels = Vec::with_capacity(new_w as usize * new_h as usize);
    for &(y0, y1, ty) in &y_taps {
        let row0 = &src[y0 * stride..y0 * stride + stride];
        let row1 = &src[y1 * stride..y1 * stride + stride];
        for &(x0, x1, tx) in &x_taps {
            let (p00, p10, p01, p11) = (row0[x0], row0[x1], row1[x0], row1[x1]);
            let mut out = [0u8; 3];
            for c in 0..3 {
                let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
                let bottom = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
                out[c] = to_u8(top * (1.0 - ty) + bottom * ty);
            }
            pixels.push(out);
        }
    }
    Raster::from_pixels(new_w, new_h, pixels)
}

/// Downscale to `scale` (round-half-up on each dimension) and back to the
/// original size, re-synthesizing every pixel through interpolation.
pub fn resize_cycle(r: &Raster, scale: f64) -> Raster {
    assert!(scale > 0.0 && scale < 1.0, "scale must be in (0, 1)");
    let small_w = ((r.width() as f64 * scale + 0.5).floor() as u32).max(1);
    let small_h = ((r.height() as f64 * scale + 0.5).floor() as u32).max(1);
    let small = resize_bilinear(r, small_w, small_h);
    resize_bilinear(&small, r.width(), r.height())
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    kernel
}

/// Clamped source index per (position, tap) pair for one axis.
fn clamped_taps(dim: usize, radius: usize) -> Vec<usize> {
    let side = 2 * radius + 1;
    let mut taps = vec![0usize; dim * side];
    for d in 0..dim {
        for i in 0..side {
            taps[d * side + i] =
                (d as i64 + i as i64 - radius as i64).clamp(0, dim as i64 - 1) as usize;
        }
    }
    taps
}

/// Separable Gaussian blur, clamp-to-edge, full-precision intermediate rows.
pub fn gaussian_blur(r: &Raster, sigma: f64, radius: usize) -> Raster {
    assert!(sigma > 0.0 && radius >= 1, "sigma must be positive, radius >= 1");
    let kernel = gaussian_kernel(sigma, radius);
    let side = kernel.len();
    let (w, h) = (r.width() as usize, r.height() as usize);
    let src = r.pixels();
    let x_taps = clamped_taps(w, radius);
    let y_taps = clamped_taps(h, radius);

    // Horizontal pass into f64 to avoid double rounding.
    let mut tmp = vec![[0f64; 3]; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out_row = &mut tmp[y * w..(y + 1) * w];
        for (x, out) in out_row.iter_mut().enumerate() {
            let mut acc = [0f64; 3];
            for (i, &k) in kernel.iter().enumerate() {
                let p = row[x_taps[x * side + i]];
                for c in 0..3 {
                    acc[c] += k * p[c] as f64;
                }
            }
            *out = acc;
        }
    }
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (i, &k) in kernel.iter().enumerate() {
                let p = tmp[y_taps[y * side + i] * w + x];
                for c in 0..3 {
                    acc[c] += k * p[c];
                }
            }
            pixels.push([to_u8(acc[0]), to_u8(acc[1]), to_u8(acc[2])]);
        }
    }
    Raster::from_pixels(r.width(), r.height(), pixels)
}

/// 3x3 sharpen: kernel [[0,-1,0],[-1,5,-1],[0,-1,0]], clamp-to-edge borders.
pub fn sharpen(r: &Raster) -> Raster {
    let (w, h) = (r.width() as i64, r.height() as i64);
    let mut pixels = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let center = r.get_clamped(x, y);
            let up = r.get_clamped(x, y - 1);
            let down = r.get_clamped(x, y + 1);
            let left = r.get_clamped(x - 1, y);
            let right = r.get_clamped(x + 1, y);
            let mut out = [0u8; 3];
            for c in 0..3 {
                let v = 5 * center[c] as i32
                    - up[c] as i32
                    - down[c] as i32
                    - left[c] as i32
                    - right[c] as i32;
                out[c] = v.clamp(0, 255) as u8;
            }
            pixels.push(out);
        }
    }
    Raster::from_pixels(r.width(), r.height(), pixels)
}

/// Per-channel median over the (2r+1)^2 clamped neighborhood.
pub fn median_filter(r: &Raster, radius: usize) -> Raster {
    assert!(radius >= 1);
    let (w, h) = (r.width() as i64, r.height() as i64);
    let side = 2 * radius + 1;
    let mut window = vec![[0u8; 3]; side * side];
    let mut pixels = Vec::with_capacity((w * h) as usize);
    let mut channel = vec![0u8; side * side];
    for y in 0..h {
        for x in 0..w {
            let mut n = 0;
            for dy in 0..side as i64 {
                for dx in 0..side as i64 {
                    window[n] = r.get_clamped(x + dx - radius as i64, y + dy - radius as i64);
                    n += 1;
                }
            }
            let mut out = [0u8; 3];
            for c in 0..3 {
                for (slot, px) in channel.iter_mut().zip(window.iter()) {
                    *slot = px[c];
                }
                channel.sort_unstable();
                out[c] = channel[channel.len() / 2];
            }
            pixels.push(out);
        }
    }
    Raster::from_pixels(r.width(), r.height(), pixels)
}

/// Bilateral filter: spatial Gaussian times range Gaussian on the
/// per-channel intensity difference, weights renormalized per pixel.
pub fn bilateral_filter(r: &Raster, sigma_space: f64, sigma_range: f64, radius: usize) -> Raster {
    assert!(sigma_space > 0.0 && sigma_range > 0.0);
    let (w, h) = (r.width() as i64, r.height() as i64);
    let rad = radius as i64;
    let inv_2ss = 1.0 / (2.0 * sigma_space * sigma_space);
    let inv_2sr = 1.0 / (2.0 * sigma_range * sigma_range);
    let mut pixels = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let center = r.get_clamped(x, y);
            let mut num = [0f64; 3];
            let mut den = [0f64; 3];
            for dy in -rad..=rad {
                for dx in -rad..=rad {
                    let spatial = (-((dx * dx + dy * dy) as f64) * inv_2ss).exp();
                    let p = r.get_clamped(x + dx, y + dy);
                    for c in 0..3 {
                        let diff = p[c] as f64 - center[c] as f64;
                        let weight = spatial * (-(diff * diff) * inv_2sr).exp();
                        num[c] += weight * p[c] as f64;
                        den[c] += weight;
                    }
                }
            }
            pixels.push([
                to_u8(num[0] / den[0]),
                to_u8(num[1] / den[1]),
                to_u8(num[2] / den[2]),
            ]);
        }
    }
    Raster::from_pixels(r.width(), r.height(), pixels)
}

/// Nonlinear transfer v' = round(255 * w * (v/255)^(1/gamma)) per channel.
///
/// Gamma is restricted to (0.950, 0.995) or (1.005, 1.050); w is a scalar
/// gain in (0, 1]. Values are normalized to [0, 1] before exponentiation so
/// the endpoints stay fixed (0 -> 0 and, at w = 1, 255 -> 255).
pub fn detox_transfer(r: &Raster, gamma: f64, w: f64) -> Result<Raster, OpsError> {
    let in_range = (gamma > 0.950 && gamma < 0.995) || (gamma > 1.005 && gamma < 1.050);
    if !in_range {
        return Err(OpsError::InvalidParameter(format!(
            "gamma {gamma} outside (0.950, 0.995) and (1.005, 1.050)"
        )));
    }
    if !(w > 0.0 && w <= 1.0) {
        return Err(OpsError::InvalidParameter(format!("w {w} outside (0, 1]")));
    }
    let exponent = 1.0 / gamma;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = to_u8(255.0 * w * (v as f64 / 255.0).powf(exponent));
    }
    let pixels = r
        .pixels()
        .iter()
        .map(|&[r, g, b]| [lut[r as usize], lut[g as usize], lut[b as usize]])
        .collect();
    Ok(Raster::from_pixels(r.width(), r.height(), pixels))
}
