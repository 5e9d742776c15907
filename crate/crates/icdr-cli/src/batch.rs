//! Batch evaluation: optional attack embed, disarm with the configured
//! steps, extraction attempt, quality vs the pre-attack original — one CSV
//! row per file plus a summary line. Deterministic for a fixed seed, and
//! the row set is independent of the job count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use icdr_core::codec::{
    jpeg_decode, jpeg_decode_coefficients, jpeg_encode_coefficients, Subsampling,
};
use icdr_core::disarm::{
    detox_bytes, detox_raster, disarm_bytes, disarm_raster, sniff_subsampling, DisarmOutcome,
    PipelineConfig, Verdict,
};
use icdr_core::metrics::{format_db, quality_scores};
use icdr_core::raster::Raster;
use icdr_core::stego::{
    antiresize_embed, antiresize_extract, dct_embed, dct_extract, lsb_embed, lsb_extract,
    msb_embed, msb_extract, StegoTool, ANTIRESIZE_BLOCK, ANTIRESIZE_CANVAS,
};

use crate::csv_line;

pub const CSV_HEADER: &str = "file,status,input_size,output_size,width,height,\
trailing_payload_bytes,metadata_strings_removed,psnr,ssim,uqi,stego_tool,stego_survived,duration_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Disarmed,
    Corrupt,
    Error,
}

impl RowStatus {
    fn name(&self) -> &'static str {
        match self {
            RowStatus::Disarmed => "disarmed",
            RowStatus::Corrupt => "corrupt",
            RowStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchRow {
    pub file: String,
    pub status: RowStatus,
    pub input_size: u64,
    pub output_size: u64,
    pub width: u32,
    pub height: u32,
    pub trailing_payload_bytes: u64,
    pub metadata_strings_removed: u64,
    /// None when not measured (corrupt/error rows).
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub uqi: Option<f64>,
    pub stego_tool: Option<StegoTool>,
    /// None ("-") when no attack was configured.
    pub stego_survived: Option<bool>,
    pub duration_ms: u64,
}

impl BatchRow {
    pub fn to_csv(&self) -> String {
        let dash = "-".to_string();
        csv_line(&[
            self.file.clone(),
            self.status.name().to_string(),
            self.input_size.to_string(),
            self.output_size.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            self.trailing_payload_bytes.to_string(),
            self.metadata_strings_removed.to_string(),
            self.psnr.map(format_db).unwrap_or_else(|| dash.clone()),
            self.ssim.map(|v| format!("{v:.5}")).unwrap_or_else(|| dash.clone()),
            self.uqi.map(|v| format!("{v:.5}")).unwrap_or_else(|| dash.clone()),
            self.stego_tool.map(|t| t.name().to_string()).unwrap_or_else(|| dash.clone()),
            match self.stego_survived {
                Some(true) => "yes".to_string(),
                Some(false) => "no".to_string(),
                None => dash,
            },
            self.duration_ms.to_string(),
        ])
    }
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub pipeline: PipelineConfig,
    pub attack: Option<StegoTool>,
    pub detox: bool,
    pub jobs: usize,
    pub seed: u64,
    pub timeout_ms: u64,
    /// Directory for disarmed outputs; None keeps them in memory only.
    pub out_dir: Option<PathBuf>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            attack: None,
            detox: false,
            jobs: 1,
            seed: 0,
            timeout_ms: 10_000,
            out_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
    pub attacked: usize,
    pub destroyed: usize,
    pub errors: usize,
}

impl BatchReport {
    /// Fraction of attacked files whose hidden message did not survive.
    pub fn success_rate(&self) -> f64 {
        if self.attacked == 0 {
            return 0.0;
        }
        self.destroyed as f64 / self.attacked as f64
    }

    pub fn summary_line(&self) -> String {
        csv_line(&[
            "summary".to_string(),
            format!("attacked={}", self.attacked),
            format!("destroyed={}", self.destroyed),
            format!("errors={}", self.errors),
            format!("success_rate={:.4}", self.success_rate()),
        ])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.to_csv());
            out.push('\n');
        }
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }
}

fn per_file_message(seed: u64, index: usize) -> Vec<u8> {
    format!("batch-payload-{seed}-{index}").into_bytes()
}

fn error_row(file: String, input_size: u64, started: Instant) -> BatchRow {
    BatchRow {
        file,
        status: RowStatus::Error,
        input_size,
        output_size: 0,
        width: 0,
        height: 0,
        trailing_payload_bytes: 0,
        metadata_strings_removed: 0,
        psnr: None,
        ssim: None,
        uqi: None,
        stego_tool: None,
        stego_survived: None,
        duration_ms: started.elapsed().as_millis() as u64,
    }
}

fn outcome_row(
    file: String,
    input_size: u64,
    outcome: &DisarmOutcome,
    reference: Option<(&Raster, &[u8])>,
    tool: Option<StegoTool>,
    survived: Option<bool>,
    started: Instant,
) -> BatchRow {
    let status = match outcome.report.verdict {
        Verdict::Disarmed => RowStatus::Disarmed,
        Verdict::Corrupt => RowStatus::Corrupt,
    };
    let (mut width, mut height) = (0, 0);
    let (mut psnr, mut ssim, mut uqi) = (None, None, None);
    if let Some((original, output)) = reference {
        width = original.width();
        height = original.height();
        if let Ok(rebuilt) = jpeg_decode(output) {
            if let Ok(q) = quality_scores(original, &rebuilt) {
                psnr = Some(q.psnr);
                ssim = Some(q.ssim);
                uqi = Some(q.uqi);
            }
        }
    }
    BatchRow {
        file,
        status,
        input_size,
        output_size: outcome.report.output_size,
        width,
        height,
        trailing_payload_bytes: outcome.report.removed.trailing_payload_bytes,
        metadata_strings_removed: outcome.report.removed.metadata_strings,
        psnr,
        ssim,
        uqi,
        stego_tool: tool,
        stego_survived: survived,
        duration_ms: started.elapsed().as_millis() as u64,
    }
}

/// Structural findings of the raw input; attack flows disarm a raster (or a
/// re-emitted carrier), so the input's own threats are accounted here.
fn removed_from_input(bytes: &[u8]) -> icdr_core::disarm::RemovedThreats {
    let mut removed = icdr_core::disarm::RemovedThreats::default();
    if let Ok(map) = icdr_core::jpeg::scan_segments(bytes) {
        removed.trailing_payload_bytes = map.trailing_payload.map_or(0, |s| s.length as u64);
        removed.metadata_strings =
            icdr_core::jpeg::extract_metadata_strings(&map, bytes).len() as u64;
    }
    removed
}

fn process_file(path: &Path, index: usize, opts: &BatchOptions) -> (BatchRow, Option<Vec<u8>>) {
    let started = Instant::now();
    let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let Ok(bytes) = std::fs::read(path) else {
        return (error_row(file, 0, started), None);
    };
    let input_size = bytes.len() as u64;
    let run_bytes = |input: &[u8]| {
        if opts.detox {
            detox_bytes(input, &opts.pipeline)
        } else {
            disarm_bytes(input, &opts.pipeline)
        }
    };
    let run_raster = |raster: Raster, sub: Subsampling| {
        if opts.detox {
            detox_raster(raster, sub, &opts.pipeline)
        } else {
            disarm_raster(raster, sub, &opts.pipeline)
        }
    };
    let message = per_file_message(opts.seed, index);

    let (outcome, original, tool, survived) = match opts.attack {
        None => {
            let outcome = run_bytes(&bytes);
            let original = jpeg_decode(&bytes).ok();
            (outcome, original, None, None)
        }
        Some(tool @ (StegoTool::Lsb | StegoTool::Msb)) => {
            let Ok(original) = jpeg_decode(&bytes) else {
                let outcome = run_bytes(&bytes); // records the corrupt verdict
                return (
                    outcome_row(file, input_size, &outcome, None, Some(tool), None, started),
                    None,
                );
            };
            let embedded = match tool {
                StegoTool::Lsb => lsb_embed(&original, &message),
                _ => msb_embed(&original, &message),
            };
            let Ok(embedded) = embedded else {
                return (error_row(file, input_size, started), None);
            };
            let outcome = run_raster(embedded, sniff_subsampling(&bytes));
            let survived = outcome.output.as_deref().map(|out| {
                jpeg_decode(out)
                    .ok()
                    .and_then(|r| match tool {
                        StegoTool::Lsb => lsb_extract(&r),
                        _ => msb_extract(&r),
                    })
                    .is_some_and(|m| m == message)
            });
            (outcome, Some(original), Some(tool), survived)
        }
        Some(StegoTool::Dct) => {
            let Ok(planes) = jpeg_decode_coefficients(&bytes) else {
                let outcome = run_bytes(&bytes);
                return (
                    outcome_row(file, input_size, &outcome, None, Some(StegoTool::Dct), None, started),
                    None,
                );
            };
            let Ok(embedded) = dct_embed(&planes, &message) else {
                return (error_row(file, input_size, started), None);
            };
            let attacked = jpeg_encode_coefficients(&embedded);
            let outcome = run_bytes(&attacked);
            let original = jpeg_decode(&bytes).ok();
            let survived = outcome.output.as_deref().map(|out| {
                jpeg_decode_coefficients(out)
                    .ok()
                    .and_then(|p| dct_extract(&p))
                    .is_some_and(|m| m == message)
            });
            (outcome, original, Some(StegoTool::Dct), survived)
        }
        Some(StegoTool::Antiresize) => {
            // The attack replaces the image: the embedded canvas is both the
            // carrier and the pre-attack reference.
            let Ok(embedded) = antiresize_embed(&message, ANTIRESIZE_BLOCK, ANTIRESIZE_CANVAS)
            else {
                return (error_row(file, input_size, started), None);
            };
            let outcome = run_raster(embedded.clone(), Subsampling::S444);
            let survived = outcome.output.as_deref().map(|out| {
                jpeg_decode(out)
                    .ok()
                    .and_then(|r| antiresize_extract(&r, ANTIRESIZE_BLOCK, ANTIRESIZE_CANVAS))
                    .is_some_and(|m| m == message)
            });
            (outcome, Some(embedded), Some(StegoTool::Antiresize), survived)
        }
    };

    let mut row = outcome_row(
        file,
        input_size,
        &outcome,
        original.as_ref().zip(outcome.output.as_deref()),
        tool,
        survived,
        started,
    );
    if matches!(opts.attack, Some(StegoTool::Lsb | StegoTool::Msb | StegoTool::Dct))
        && row.status == RowStatus::Disarmed
    {
        let removed = removed_from_input(&bytes);
        row.trailing_payload_bytes = removed.trailing_payload_bytes;
        row.metadata_strings_removed = removed.metadata_strings;
    }
    (row, outcome.output)
}

/// Run the batch over `files` (sorted for determinism) on up to `jobs`
/// worker threads. Returns rows in file order regardless of job count.
pub fn run_batch(files: &[PathBuf], opts: &BatchOptions) -> std::io::Result<BatchReport> {
    let mut files: Vec<PathBuf> = files.to_vec();
    files.sort();
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;

    let results: Vec<(BatchRow, Option<Vec<u8>>)> = pool.install(|| {
        files
            .par_iter()
            .enumerate()
            .map(|(index, path)| process_file(path, index, opts))
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    for ((mut row, output), path) in results.into_iter().zip(files.iter()) {
        if row.duration_ms > opts.timeout_ms {
            row.status = RowStatus::Error;
        }
        if let (Some(dir), Some(output)) = (&opts.out_dir, output) {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            std::fs::write(dir.join(format!("{stem}_disarmed.jpg")), output)?;
        }
        rows.push(row);
    }

    let attacked = rows.iter().filter(|r| r.stego_survived.is_some()).count();
    let destroyed = rows.iter().filter(|r| r.stego_survived == Some(false)).count();
    let errors = rows.iter().filter(|r| r.status == RowStatus::Error).count();
    Ok(BatchReport { rows, attacked, destroyed, errors })
}

/// Collect the JPEG-looking files of a directory, sorted.
pub fn collect_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| {
                        let e = e.to_ascii_lowercase();
                        e == "jpg" || e == "jpeg"
                    })
                    .unwrap_or(false)
        })
        .collect();
    files.sort();
    Ok(files)
}
