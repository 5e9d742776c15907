//! Deterministic synthetic corpus: clean JPEGs in three texture families
//! plus "infected" variants carrying the structural threats the pipeline
//! must strip (appended payloads, EXIF script strings, COM scripts).

use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use icdr_core::codec::{jpeg_encode, EncodeParams, Subsampling};
use icdr_core::raster::Raster;
use icdr_core::rng::SplitMix64;

use crate::inject;

/// Clean corpus files are written at quality 95; the pipeline re-encodes at
/// 90, so requantization always crosses different tables.
pub const CORPUS_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    /// Photograph-like: dominant mid-scale structure, no sub-4px noise.
    Photos,
    /// Smooth two-color gradient with soft-blended shapes.
    Gradients,
    /// Fine-grained value noise.
    Texture,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 3] = [CorpusKind::Photos, CorpusKind::Gradients, CorpusKind::Texture];

    pub fn name(&self) -> &'static str {
        match self {
            CorpusKind::Photos => "photos",
            CorpusKind::Gradients => "gradients",
            CorpusKind::Texture => "texture",
        }
    }
}

impl FromStr for CorpusKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "photos" => Ok(CorpusKind::Photos),
            "gradients" => Ok(CorpusKind::Gradients),
            "texture" => Ok(CorpusKind::Texture),
            other => Err(format!("unknown corpus kind '{other}'")),
        }
    }
}

pub fn parse_kinds(spec: &str) -> Result<Vec<CorpusKind>, String> {
    let kinds: Result<Vec<_>, _> = spec.split(',').map(CorpusKind::from_str).collect();
    let kinds = kinds?;
    if kinds.is_empty() {
        return Err("kind list is empty".to_string());
    }
    Ok(kinds)
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

/// Weighted sum of bilinearly interpolated random lattices.
pub fn octave_noise(w: u32, h: u32, rng: &mut SplitMix64, spec: &[(f64, f64)]) -> Raster {
    let layers: Vec<(Lattice, f64, f64)> = spec
        .iter()
        .map(|&(scale, weight)| {
            let lw = (w as f64 / scale) as u32 + 3;
            let lh = (h as f64 / scale) as u32 + 3;
            (lattice(rng, lw, lh), scale, weight)
        })
        .collect();
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let mut px = [0u8; 3];
            for (c, slot) in px.iter_mut().enumerate() {
                let v: f64 = layers
                    .iter()
                    .map(|(l, scale, weight)| weight * sample(l, c, x as f64 / scale, y as f64 / scale))
                    .sum();
                *slot = v.round().clamp(0.0, 255.0) as u8;
            }
            pixels.push(px);
        }
    }
    Raster::from_pixels(w, h, pixels)
}

fn gradient_with_shapes(w: u32, h: u32, rng: &mut SplitMix64) -> Raster {
    let c0 = [rng.next_u8(), rng.next_u8(), rng.next_u8()];
    let c1 = [rng.next_u8(), rng.next_u8(), rng.next_u8()];
    let diag = rng.next_below(2) == 0;
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let t = if diag {
                (x as f64 / w as f64 + y as f64 / h as f64) / 2.0
            } else {
                x as f64 / w as f64
            };
            let mut px = [0u8; 3];
            for (c, slot) in px.iter_mut().enumerate() {
                *slot = (c0[c] as f64 * (1.0 - t) + c1[c] as f64 * t).round() as u8;
            }
            pixels.push(px);
        }
    }
    let mut r = Raster::from_pixels(w, h, pixels);
    for _ in 0..5 + rng.next_below(4) {
        let col = [rng.next_u8(), rng.next_u8(), rng.next_u8()];
        let cx = rng.next_below(w as u64) as i64;
        let cy = rng.next_below(h as u64) as i64;
        let rad = rng.next_range(6, (w.min(h) as u64 / 3).max(7)) as i64;
        for y in (cy - rad).max(0)..(cy + rad).min(h as i64) {
            for x in (cx - rad).max(0)..(cx + rad).min(w as i64) {
                if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= rad * rad {
                    let p = r.get(x as u32, y as u32);
                    let mut q = [0u8; 3];
                    for c in 0..3 {
                        q[c] = ((p[c] as f64 + col[c] as f64) / 2.0).round() as u8;
                    }
                    r.set(x as u32, y as u32, q);
                }
            }
        }
    }
    r
}

/// Deterministic image for (kind, seed): same inputs, same pixels.
pub fn generate_image(kind: CorpusKind, w: u32, h: u32, seed: u64) -> Raster {
    let mut rng = SplitMix64::new(seed);
    match kind {
        CorpusKind::Photos => octave_noise(w, h, &mut rng, &[(32.0, 0.35), (8.0, 0.55), (4.0, 0.10)]),
        CorpusKind::Gradients => gradient_with_shapes(w, h, &mut rng),
        CorpusKind::Texture => octave_noise(w, h, &mut rng, &[(8.0, 0.5), (2.0, 0.5)]),
    }
}

/// Side length in [64, 1024], quadratically biased toward the small end so
/// corpus runs stay fast while the full range is exercised.
fn pick_side(rng: &mut SplitMix64) -> u32 {
    let u = rng.next_f64();
    64 + (960.0 * u * u) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreatMix {
    AppendedPayload { size: usize },
    ExifStrings,
    ComScript,
    Everything { payload_size: usize },
}

pub struct GeneratedFile {
    pub path: PathBuf,
    pub kind: CorpusKind,
    pub threat: Option<ThreatMix>,
}

pub struct CorpusManifest {
    pub clean: Vec<GeneratedFile>,
    pub infected: Vec<GeneratedFile>,
}

/// Build a clean JPEG (in memory) for corpus index `i`.
pub fn clean_bytes(i: u64, seed: u64, kinds: &[CorpusKind]) -> (Vec<u8>, CorpusKind) {
    let kind = kinds[(i % kinds.len() as u64) as usize];
    let mut dim_rng = SplitMix64::new(seed ^ (0xD1A5 + i).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let w = pick_side(&mut dim_rng);
    let h = pick_side(&mut dim_rng);
    let raster = generate_image(kind, w, h, seed.wrapping_add(i).wrapping_mul(0x100_0000_01B3));
    let sub = if dim_rng.next_below(2) == 0 { Subsampling::S444 } else { Subsampling::S420 };
    let params = EncodeParams { quality: CORPUS_QUALITY, subsampling: sub, restart_interval: 0 };
    (jpeg_encode(&raster, &params), kind)
}

/// Infect clean bytes with the threat mix for index `i`. Appended-payload
/// indexes 0 and 4 pin the 16 B minimum and 1 MiB maximum, so any corpus of
/// five or more files provably covers the whole payload size range.
pub fn infect_bytes(clean: &[u8], i: u64, seed: u64) -> (Vec<u8>, ThreatMix) {
    let mut rng = SplitMix64::new(seed ^ (0x1F3C + i).wrapping_mul(0x2545_F491_4F6C_DD1D));
    let payload_size = match i {
        0 => 16,
        4 => 1 << 20,
        _ => 16usize << rng.next_below(17),
    };
    let threat = match i % 4 {
        0 => ThreatMix::AppendedPayload { size: payload_size },
        1 => ThreatMix::ExifStrings,
        2 => ThreatMix::ComScript,
        _ => ThreatMix::Everything { payload_size },
    };
    let exif = || {
        inject::exif_app1_segment(&[
            (inject::TAG_ARTIST, &[b"<script>", inject::EXIF_TOKEN, b"</script>"].concat()),
            (inject::TAG_IMAGE_DESCRIPTION, &[b"<?php ", inject::EXIF_TOKEN, b" ?>"].concat()),
        ])
    };
    let com = || inject::com_segment(&[b"<script src='http://x/", inject::COM_TOKEN, b"'>"].concat());
    let bytes = match threat {
        ThreatMix::AppendedPayload { size } => {
            let mut b = clean.to_vec();
            b.extend_from_slice(&inject::script_payload(size, seed ^ i));
            b
        }
        ThreatMix::ExifStrings => inject::splice_after_soi(clean, &exif()),
        ThreatMix::ComScript => inject::splice_after_soi(clean, &com()),
        ThreatMix::Everything { payload_size } => {
            let mut b = inject::splice_after_soi(clean, &exif());
            b = inject::splice_after_soi(&b, &com());
            b.extend_from_slice(&inject::script_payload(payload_size, seed ^ i));
            b
        }
    };
    (bytes, threat)
}

/// Write `count` clean files and `count` infected variants under `dir`.
pub fn generate(
    dir: &Path,
    count: u64,
    seed: u64,
    kinds: &[CorpusKind],
) -> io::Result<CorpusManifest> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = CorpusManifest { clean: Vec::new(), infected: Vec::new() };
    for i in 0..count {
        let (clean, kind) = clean_bytes(i, seed, kinds);
        let clean_path = dir.join(format!("{:04}_{}_clean.jpg", i, kind.name()));
        std::fs::write(&clean_path, &clean)?;
        manifest.clean.push(GeneratedFile { path: clean_path, kind, threat: None });

        let (infected, threat) = infect_bytes(&clean, i, seed);
        let infected_path = dir.join(format!("{:04}_{}_infected.jpg", i, kind.name()));
        std::fs::write(&infected_path, &infected)?;
        manifest.infected.push(GeneratedFile {
            path: infected_path,
            kind,
            threat: Some(threat),
        });
    }
    Ok(manifest)
}
