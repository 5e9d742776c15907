//! Tuning experiments: the resize-scale sweep and the filter-stack sweep,
//! reproducing the paper-style rankings on the local corpus.

use std::path::PathBuf;

use icdr_core::codec::jpeg_decode;
use icdr_core::disarm::{disarm_raster, PipelineConfig, StepSet};
use icdr_core::metrics::{format_db, quality_scores};
use icdr_core::ops;
use icdr_core::raster::Raster;
use icdr_core::stego::{msb_embed, msb_extract};

use crate::csv_line;

pub const RESIZE_SCALES: [f64; 5] = [0.99, 0.98, 0.97, 0.96, 0.95];

#[derive(Debug, Clone)]
pub struct ResizeSweepRow {
    pub scale: f64,
    pub uqi: f64,
    pub psnr: f64,
    pub ssim: f64,
    /// Fraction of MSB-embedded carriers whose message did not survive.
    pub destruction_rate: f64,
}

/// For each scale: run the resize-only disarm configuration on every corpus
/// image (file to file, including the re-encode) and measure quality against
/// the rebuilt original; separately, embed an MSB message, run the same
/// configuration, and count destroyed extractions.
pub fn resize_sweep(
    files: &[PathBuf],
    base: &PipelineConfig,
    seed: u64,
) -> std::io::Result<Vec<ResizeSweepRow>> {
    let mut decoded = Vec::new();
    for path in files {
        let bytes = std::fs::read(path)?;
        if let Ok(raster) = jpeg_decode(&bytes) {
            decoded.push(raster);
        }
    }
    if decoded.is_empty() {
        return Err(std::io::Error::other("no decodable corpus images"));
    }
    let mut rows = Vec::new();
    for scale in RESIZE_SCALES {
        let cfg = PipelineConfig {
            steps: StepSet::only_resize(),
            resize_scale: scale,
            ..base.clone()
        };
        let (mut sp, mut ss, mut su) = (0.0, 0.0, 0.0);
        let mut measured = 0usize;
        let mut destroyed = 0usize;
        let mut attacked = 0usize;
        for (index, original) in decoded.iter().enumerate() {
            let outcome = disarm_raster(original.clone(), icdr_core::codec::Subsampling::S444, &cfg);
            if let Some(out) = outcome.output.as_deref() {
                if let Ok(rebuilt) = jpeg_decode(out) {
                    if let Ok(q) = quality_scores(original, &rebuilt) {
                        sp += q.psnr;
                        ss += q.ssim;
                        su += q.uqi;
                        measured += 1;
                    }
                }
            }

            let message = format!("sweep-{seed}-{index}").into_bytes();
            if let Ok(embedded) = msb_embed(original, &message) {
                attacked += 1;
                let outcome =
                    disarm_raster(embedded, icdr_core::codec::Subsampling::S444, &cfg);
                let survived = outcome
                    .output
                    .as_deref()
                    .and_then(|out| jpeg_decode(out).ok())
                    .and_then(|r| msb_extract(&r))
                    .is_some_and(|m| m == message);
                if !survived {
                    destroyed += 1;
                }
            }
        }
        let n = measured.max(1) as f64;
        rows.push(ResizeSweepRow {
            scale,
            uqi: su / n,
            psnr: sp / n,
            ssim: ss / n,
            destruction_rate: if attacked == 0 { 0.0 } else { destroyed as f64 / attacked as f64 },
        });
    }
    Ok(rows)
}

pub fn resize_sweep_csv(rows: &[ResizeSweepRow]) -> String {
    let mut out = String::from("scale,uqi,psnr,ssim,msb_destruction_rate\n");
    for r in rows {
        out.push_str(&csv_line(&[
            format!("{:.2}", r.scale),
            format!("{:.5}", r.uqi),
            format_db(r.psnr),
            format!("{:.5}", r.ssim),
            format!("{:.4}", r.destruction_rate),
        ]));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filter {
    /// Gaussian blur.
    Gbf,
    /// Bilateral smoothing.
    Bsf,
    /// Median filter.
    Mf,
    /// Sharpen.
    Sf,
}

impl Filter {
    pub const ALL: [Filter; 4] = [Filter::Gbf, Filter::Bsf, Filter::Mf, Filter::Sf];

    pub fn name(&self) -> &'static str {
        match self {
            Filter::Gbf => "GBF",
            Filter::Bsf => "BSF",
            Filter::Mf => "MF",
            Filter::Sf => "SF",
        }
    }

    pub fn apply(&self, r: &Raster, cfg: &PipelineConfig) -> Raster {
        match self {
            Filter::Gbf => ops::gaussian_blur(r, cfg.blur_sigma, cfg.blur_radius),
            Filter::Bsf => ops::bilateral_filter(r, 2.0, 25.0, 2),
            Filter::Mf => ops::median_filter(r, 1),
            Filter::Sf => ops::sharpen(r),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterSweepRow {
    pub stack: Vec<Filter>,
    pub uqi: f64,
    pub psnr: f64,
    pub ssim: f64,
}

impl FilterSweepRow {
    pub fn stack_name(&self) -> String {
        self.stack.iter().map(|f| f.name()).collect::<Vec<_>>().join(",")
    }
}

/// Every ordered stack of depth 1..=max_depth from {GBF, BSF, MF, SF},
/// applied in the pixel domain and ranked by PSNR (descending).
pub fn filter_sweep(
    files: &[PathBuf],
    base: &PipelineConfig,
    max_depth: usize,
) -> std::io::Result<Vec<FilterSweepRow>> {
    let mut decoded = Vec::new();
    for path in files {
        let bytes = std::fs::read(path)?;
        if let Ok(raster) = jpeg_decode(&bytes) {
            decoded.push(raster);
        }
    }
    if decoded.is_empty() {
        return Err(std::io::Error::other("no decodable corpus images"));
    }

    let mut stacks: Vec<Vec<Filter>> = Vec::new();
    let mut frontier: Vec<Vec<Filter>> = vec![Vec::new()];
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for stack in &frontier {
            for f in Filter::ALL {
                let mut extended = stack.clone();
                extended.push(f);
                next.push(extended);
            }
        }
        stacks.extend(next.iter().cloned());
        frontier = next;
    }

    let mut rows = Vec::with_capacity(stacks.len());
    for stack in stacks {
        let (mut sp, mut ss, mut su) = (0.0, 0.0, 0.0);
        let mut measured = 0usize;
        for original in &decoded {
            let mut filtered = original.clone();
            for f in &stack {
                filtered = f.apply(&filtered, base);
            }
            if let Ok(q) = quality_scores(original, &filtered) {
                sp += q.psnr.min(99.0); // guard the mean against +inf
                ss += q.ssim;
                su += q.uqi;
                measured += 1;
            }
        }
        let n = measured.max(1) as f64;
        rows.push(FilterSweepRow { stack, uqi: su / n, psnr: sp / n, ssim: ss / n });
    }
    rows.sort_by(|a, b| b.psnr.partial_cmp(&a.psnr).unwrap_or(std::cmp::Ordering::Equal));
    Ok(rows)
}

pub fn filter_sweep_csv(rows: &[FilterSweepRow]) -> String {
    let mut out = String::from("stack,uqi,psnr,ssim\n");
    for r in rows {
        out.push_str(&csv_line(&[
            r.stack_name(),
            format!("{:.5}", r.uqi),
            format_db(r.psnr),
            format!("{:.5}", r.ssim),
        ]));
        out.push('\n');
    }
    out
}
