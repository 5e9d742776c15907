//! The disarm pipeline: validate, rebuild from pixel data only, resize
//! cycle, filter stack, lossless transcode, JPEG re-encode — plus the Detox
//! baseline for comparison.
//!
//! Fixed step order: rebuild -> resize -> filter -> transcode -> encode.
//! Corrupt inputs produce no output (quarantine semantics). The pipeline
//! never panics on hostile bytes; every failure is a verdict.

use std::time::Instant;

use serde::Serialize;

use crate::codec::{
    jpeg_decode, jpeg_encode, png_decode, png_encode, EncodeParams, JpegError, Subsampling,
};
use crate::jpeg::{
    self, extract_metadata_strings, scan_segments, CorruptReason, MarkerKind, SegmentMap,
};
use crate::metrics::{quality_scores, QualityScores};
use crate::ops;
use crate::raster::Raster;

/// Which optional disarm steps run; rebuild is always implied first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepSet {
    pub resize: bool,
    pub filter: bool,
    pub transcode: bool,
}

impl StepSet {
    pub fn all() -> Self {
        Self { resize: true, filter: true, transcode: true }
    }

    pub fn none() -> Self {
        Self { resize: false, filter: false, transcode: false }
    }

    pub fn only_resize() -> Self {
        Self { resize: true, ..Self::none() }
    }

    pub fn only_filter() -> Self {
        Self { filter: true, ..Self::none() }
    }

    pub fn only_transcode() -> Self {
        Self { transcode: true, ..Self::none() }
    }
}

impl Default for StepSet {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub resize_scale: f64,
    pub blur_sigma: f64,
    pub blur_radius: usize,
    pub jpeg_quality: u8,
    pub steps: StepSet,
    pub detox_gamma: f64,
    pub detox_w: f64,
    pub max_pixels: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            resize_scale: ops::DEFAULT_RESIZE_SCALE,
            blur_sigma: ops::DEFAULT_BLUR_SIGMA,
            blur_radius: ops::DEFAULT_BLUR_RADIUS,
            jpeg_quality: 90,
            steps: StepSet::all(),
            detox_gamma: ops::DEFAULT_DETOX_GAMMA,
            detox_w: ops::DEFAULT_DETOX_W,
            max_pixels: crate::MAX_PIXELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Disarmed,
    Corrupt,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RemovedThreats {
    pub trailing_payload_bytes: u64,
    pub metadata_strings: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepTiming {
    pub step: &'static str,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisarmReport {
    pub verdict: Verdict,
    pub corrupt_reasons: Vec<CorruptReason>,
    pub removed: RemovedThreats,
    /// Output quality vs the rebuilt input raster; absent for corrupt files
    /// and for images too small for the SSIM window.
    pub quality: Option<QualityScores>,
    pub timings: Vec<StepTiming>,
    pub output_size: u64,
}

impl DisarmReport {
    fn corrupt(reasons: Vec<CorruptReason>, removed: RemovedThreats) -> Self {
        Self {
            verdict: Verdict::Corrupt,
            corrupt_reasons: reasons,
            removed,
            quality: None,
            timings: Vec::new(),
            output_size: 0,
        }
    }
}

/// Result of one pipeline invocation: `output` is `Some` iff the verdict is
/// `Disarmed`.
#[derive(Debug, Clone)]
pub struct DisarmOutcome {
    pub output: Option<Vec<u8>>,
    pub report: DisarmReport,
}

struct Timer {
    timings: Vec<StepTiming>,
}

impl Timer {
    fn new() -> Self {
        Self { timings: Vec::new() }
    }

    fn run<T>(&mut self, step: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StepTiming { step, millis: start.elapsed().as_secs_f64() * 1e3 });
        out
    }
}

/// Scan + gate an input; on success also collect the removal bookkeeping.
fn inspect_input(
    input: &[u8],
    max_pixels: u64,
) -> Result<(SegmentMap, RemovedThreats), DisarmReport> {
    let map = match scan_segments(input) {
        Ok(map) => map,
        Err(_) => {
            return Err(DisarmReport::corrupt(
                vec![CorruptReason::UnparseableStructure],
                RemovedThreats::default(),
            ))
        }
    };
    let removed = RemovedThreats {
        trailing_payload_bytes: map.trailing_payload.map_or(0, |s| s.length as u64),
        metadata_strings: extract_metadata_strings(&map, input).len() as u64,
    };
    let verdict = jpeg::validate_with_limit(&map, max_pixels);
    if !verdict.is_valid() {
        return Err(DisarmReport::corrupt(verdict.reasons, removed));
    }
    Ok((map, removed))
}

/// Chroma handling for the re-encode, from the frame header alone: keep
/// 4:2:0 when the input was subsampled, else 4:4:4.
pub fn sniff_subsampling(bytes: &[u8]) -> Subsampling {
    match scan_segments(bytes) {
        Ok(map) => input_subsampling(&map, bytes),
        Err(_) => Subsampling::S444,
    }
}

fn input_subsampling(map: &SegmentMap, bytes: &[u8]) -> Subsampling {
    for seg in &map.segments {
        if let MarkerKind::Sof(_) = seg.marker.kind {
            let p = seg.payload_span.slice(bytes);
            if p.len() >= 6 {
                let n = p[5] as usize;
                if n >= 2 && p.len() >= 6 + 3 * n {
                    let luma_hv = p[7];
                    if luma_hv != 0x11 {
                        return Subsampling::S420;
                    }
                }
            }
            break;
        }
    }
    Subsampling::S444
}

/// Run the full ICDR pipeline on raw bytes (zero trust: any bytes accepted).
pub fn disarm_bytes(input: &[u8], cfg: &PipelineConfig) -> DisarmOutcome {
    match inspect_input(input, cfg.max_pixels) {
        Ok((map, removed)) => {
            let subsampling = input_subsampling(&map, input);
            let mut timer = Timer::new();
            let raster = match timer.run("rebuild", || jpeg_decode(input)) {
                Ok(r) => r,
                Err(err) => {
                    let reason = match err {
                        JpegError::UnsupportedCoding(_) => CorruptReason::UnsupportedCoding,
                        JpegError::CorruptStream(_) => CorruptReason::UndecodablePixels,
                    };
                    return DisarmOutcome {
                        output: None,
                        report: DisarmReport::corrupt(vec![reason], removed),
                    };
                }
            };
            run_pixel_pipeline(raster, removed, subsampling, cfg, timer)
        }
        Err(report) => DisarmOutcome { output: None, report },
    }
}

/// Pipeline entry for an already-rebuilt raster (the attack harness embeds
/// in the pixel domain and hands the carrier straight to the steps).
pub fn disarm_raster(raster: Raster, subsampling: Subsampling, cfg: &PipelineConfig) -> DisarmOutcome {
    run_pixel_pipeline(raster, RemovedThreats::default(), subsampling, cfg, Timer::new())
}

fn run_pixel_pipeline(
    input_raster: Raster,
    removed: RemovedThreats,
    subsampling: Subsampling,
    cfg: &PipelineConfig,
    mut timer: Timer,
) -> DisarmOutcome {
    let mut raster = input_raster.clone();
    if cfg.steps.resize {
        raster = timer.run("resize", || ops::resize_cycle(&raster, cfg.resize_scale));
    }
    if cfg.steps.filter {
        raster = timer.run("filter", || {
            ops::sharpen(&ops::gaussian_blur(&raster, cfg.blur_sigma, cfg.blur_radius))
        });
    }
    if cfg.steps.transcode {
        let transcoded = timer.run("transcode", || transcode_roundtrip(&raster));
        match transcoded {
            Ok(r) => raster = r,
            Err(_) => {
                // Unreachable for a well-formed raster; fail closed.
                return DisarmOutcome {
                    output: None,
                    report: DisarmReport::corrupt(
                        vec![CorruptReason::UndecodablePixels],
                        removed,
                    ),
                };
            }
        }
    }
    finish_encode(input_raster, raster, removed, subsampling, cfg, timer)
}

fn finish_encode(
    input_raster: Raster,
    final_raster: Raster,
    removed: RemovedThreats,
    subsampling: Subsampling,
    cfg: &PipelineConfig,
    mut timer: Timer,
) -> DisarmOutcome {
    let params = EncodeParams {
        quality: cfg.jpeg_quality,
        subsampling,
        restart_interval: 0,
    };
    let output = timer.run("encode", || jpeg_encode(&final_raster, &params));
    let quality = jpeg_decode(&output)
        .ok()
        .and_then(|out_raster| quality_scores(&input_raster, &out_raster).ok());
    let report = DisarmReport {
        verdict: Verdict::Disarmed,
        corrupt_reasons: Vec::new(),
        removed,
        quality,
        timings: timer.timings,
        output_size: output.len() as u64,
    };
    DisarmOutcome { output: Some(output), report }
}

/// PNG round trip: raster-identical by PNG losslessness. The disarm effect
/// of the transcode step is realized by the final JPEG re-encode, which
/// requantizes every coefficient; the PNG boundary guarantees no JPEG-native
/// side data survives.
pub fn transcode_roundtrip(r: &Raster) -> Result<Raster, crate::codec::PngError> {
    png_decode(&png_encode(r))
}

/// The Detox baseline: rebuild, nonlinear transfer, re-encode.
pub fn detox_bytes(input: &[u8], cfg: &PipelineConfig) -> DisarmOutcome {
    match inspect_input(input, cfg.max_pixels) {
        Ok((map, removed)) => {
            let subsampling = input_subsampling(&map, input);
            let mut timer = Timer::new();
            match timer.run("rebuild", || jpeg_decode(input)) {
                Ok(raster) => detox_pixel_pipeline(raster, removed, subsampling, cfg, timer),
                Err(err) => {
                    let reason = match err {
                        JpegError::UnsupportedCoding(_) => CorruptReason::UnsupportedCoding,
                        JpegError::CorruptStream(_) => CorruptReason::UndecodablePixels,
                    };
                    DisarmOutcome {
                        output: None,
                        report: DisarmReport::corrupt(vec![reason], removed),
                    }
                }
            }
        }
        Err(report) => DisarmOutcome { output: None, report },
    }
}

/// Detox on an already-rebuilt raster.
pub fn detox_raster(raster: Raster, subsampling: Subsampling, cfg: &PipelineConfig) -> DisarmOutcome {
    detox_pixel_pipeline(raster, RemovedThreats::default(), subsampling, cfg, Timer::new())
}

fn detox_pixel_pipeline(
    input_raster: Raster,
    removed: RemovedThreats,
    subsampling: Subsampling,
    cfg: &PipelineConfig,
    mut timer: Timer,
) -> DisarmOutcome {
    let transferred =
        timer.run("detox", || ops::detox_transfer(&input_raster, cfg.detox_gamma, cfg.detox_w));
    match transferred {
        Ok(raster) => finish_encode(input_raster, raster, removed, subsampling, cfg, timer),
        Err(_) => DisarmOutcome {
            output: None,
            report: DisarmReport::corrupt(vec![CorruptReason::UndecodablePixels], removed),
        },
    }
}

/// Execute only the named steps (after the mandatory rebuild); reproduces
/// the per-column standalone experiments.
pub fn run_step_subset(input: &[u8], steps: StepSet, cfg: &PipelineConfig) -> DisarmOutcome {
    let cfg = PipelineConfig { steps, ..cfg.clone() };
    disarm_bytes(input, &cfg)
}

/// Structural cleanliness oracle: scans without error, no trailing payload,
/// no metadata strings, exactly one image stream.
pub fn is_clean_jpeg(bytes: &[u8]) -> bool {
    let Ok(map) = scan_segments(bytes) else {
        return false;
    };
    map.trailing_payload.is_none()
        && extract_metadata_strings(&map, bytes).is_empty()
        && map.count_kind(MarkerKind::Soi) == 1
        && map.count_kind(MarkerKind::Sos) == 1
        && map.count_kind(MarkerKind::Eoi) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_garbage_yields_no_output() {
        let outcome = disarm_bytes(b"\x89PNG not a jpeg", &PipelineConfig::default());
        assert!(outcome.output.is_none());
        assert_eq!(outcome.report.verdict, Verdict::Corrupt);
        assert_eq!(outcome.report.corrupt_reasons, vec![CorruptReason::UnparseableStructure]);
    }

    #[test]
    fn oversized_declared_dimensions_are_corrupt() {
        // SOI + SOF0 declaring 60000x60000 + EOI; never decoded.
        let mut bytes = vec![0xFF, 0xD8];
        let sof: &[u8] = &[8, 0xEA, 0x60, 0xEA, 0x60, 1, 1, 0x11, 0];
        bytes.extend_from_slice(&[0xFF, 0xC0, 0x00, (sof.len() + 2) as u8]);
        bytes.extend_from_slice(sof);
        bytes.extend_from_slice(&[0xFF, 0xD9]);
        let outcome = disarm_bytes(&bytes, &PipelineConfig::default());
        assert_eq!(outcome.report.verdict, Verdict::Corrupt);
        assert!(outcome
            .report
            .corrupt_reasons
            .contains(&CorruptReason::PixelCountOutOfRange));
    }
}
