//! Shared fixtures for integration tests: deterministic synthetic images.
#![allow(dead_code)] // each test target uses a different subset

use icdr_core::raster::Raster;
use icdr_core::rng::SplitMix64;

/// Uniform random pixels. Worst case for compression, good for stress.
pub fn random_raster(w: u32, h: u32, seed: u64) -> Raster {
    let mut rng = SplitMix64::new(seed);
    let pixels = (0..w as usize * h as usize)
        .map(|_| [rng.next_u8(), rng.next_u8(), rng.next_u8()])
        .collect();
    Raster::from_pixels(w, h, pixels)
}

/// Two-octave value noise with fine detail: texture-like statistics, plenty
/// of mid-band AC energy for the DCT embedding oracle.
pub fn noise_raster(w: u32, h: u32, seed: u64) -> Raster {
    octave_noise(w, h, seed, &[(16.0, 0.7), (4.0, 0.3)])
}

/// Photograph-like value noise: dominant mid-scale structure that survives
/// the blur kernel, minimal sub-4px energy.
pub fn photo_raster(w: u32, h: u32, seed: u64) -> Raster {
    octave_noise(w, h, seed, &[(32.0, 0.35), (8.0, 0.55), (4.0, 0.10)])
}

/// Weighted sum of bilinearly-interpolated random lattices.
pub fn octave_noise(w: u32, h: u32, seed: u64, spec: &[(f64, f64)]) -> Raster {
    let mut rng = SplitMix64::new(seed);
    let layers: Vec<(Lattice, f64, f64)> = spec
        .iter()
        .map(|&(scale, weight)| {
            let lw = (w as f64 / scale) as u32 + 3;
            let lh = (h as f64 / scale) as u32 + 3;
            (lattice(&mut rng, lw, lh), scale, weight)
        })
        .collect();
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let mut px = [0u8; 3];
            for c in 0..3 {
                let v: f64 = layers
                    .iter()
                    .map(|(l, scale, weight)| {
                        weight * sample(l, c, x as f64 / scale, y as f64 / scale)
                    })
                    .sum();
                px[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            pixels.push(px);
        }
    }
    Raster::from_pixels(w, h, pixels)
}

/// Build a complete APP1 segment (marker + length + "Exif\0\0" + TIFF) with
/// ASCII tags in IFD0. Little-endian TIFF, values in a data area after the
/// directory.
pub fn exif_app1_segment(tags: &[(u16, &[u8])]) -> Vec<u8> {
    let mut tiff = Vec::new();
    tiff.extend_from_slice(b"II");
    tiff.extend_from_slice(&42u16.to_le_bytes());
    tiff.extend_from_slice(&8u32.to_le_bytes()); // IFD0 offset

    let entry_area = 8 + 2 + tags.len() * 12 + 4;
    let mut data_offset = entry_area;
    let mut dir = Vec::new();
    dir.extend_from_slice(&(tags.len() as u16).to_le_bytes());
    let mut data = Vec::new();
    for &(tag, value) in tags {
        let ascii_len = value.len() + 1; // trailing NUL
        dir.extend_from_slice(&tag.to_le_bytes());
        dir.extend_from_slice(&2u16.to_le_bytes()); // ASCII
        dir.extend_from_slice(&(ascii_len as u32).to_le_bytes());
        if ascii_len <= 4 {
            let mut inline = [0u8; 4];
            inline[..value.len()].copy_from_slice(value);
            dir.extend_from_slice(&inline);
        } else {
            dir.extend_from_slice(&(data_offset as u32).to_le_bytes());
            data.extend_from_slice(value);
            data.push(0);
            data_offset += ascii_len;
        }
    }
    dir.extend_from_slice(&0u32.to_le_bytes()); // no next IFD
    tiff.extend_from_slice(&dir);
    tiff.extend_from_slice(&data);

    let mut segment = vec![0xFF, 0xE1];
    let payload_len = 6 + tiff.len();
    segment.extend_from_slice(&((payload_len + 2) as u16).to_be_bytes());
    segment.extend_from_slice(b"Exif\0\0");
    segment.extend_from_slice(&tiff);
    segment
}

/// Build a complete COM segment.
pub fn com_segment(text: &[u8]) -> Vec<u8> {
    let mut segment = vec![0xFF, 0xFE];
    segment.extend_from_slice(&((text.len() + 2) as u16).to_be_bytes());
    segment.extend_from_slice(text);
    segment
}

/// Insert raw segment bytes right after the SOI marker.
pub fn splice_after_soi(jpeg: &[u8], segment: &[u8]) -> Vec<u8> {
    assert!(jpeg.len() >= 2 && jpeg[0] == 0xFF && jpeg[1] == 0xD8);
    let mut out = Vec::with_capacity(jpeg.len() + segment.len());
    out.extend_from_slice(&jpeg[..2]);
    out.extend_from_slice(segment);
    out.extend_from_slice(&jpeg[2..]);
    out
}

struct Lattice {
    w: u32,
    values: Vec<[u8; 3]>,
}

fn lattice(rng: &mut SplitMix64, w: u32, h: u32) -> Lattice {
    let values = (0..w as usize * h as usize)
        .map(|_| [rng.next_u8(), rng.next_u8(), rng.next_u8()])
        .collect();
    Lattice { w, values }
}

fn sample(l: &Lattice, c: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let tx = x - x.floor();
    let ty = y - y.floor();
    let at = |xx: usize, yy: usize| l.values[yy * l.w as usize + xx][c] as f64;
    let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
    let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
    top * (1.0 - ty) + bottom * ty
}
