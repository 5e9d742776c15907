//! `icdr` — zero-trust JPEG disarm toolkit.
//!
//! Exit codes: 0 success, 2 I/O or usage error, 3 corrupt input,
//! 4 extraction destroyed, 5 embedding capacity exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use icdr_cli::batch::{collect_files, run_batch, BatchOptions};
use icdr_cli::config::{parse_steps, RunConfig, CONFIG_ENV};
use icdr_cli::corpus;
use icdr_cli::sweep;
use icdr_core::codec::{
    jpeg_decode, jpeg_decode_coefficients, jpeg_encode, jpeg_encode_coefficients, png_decode,
    png_encode, EncodeParams,
};
use icdr_core::disarm::{detox_bytes, disarm_bytes, Verdict};
use icdr_core::jpeg::{extract_metadata_strings, extract_trailing_payload, scan_segments, validate};
use icdr_core::metrics::{format_db, quality_scores};
use icdr_core::raster::Raster;
use icdr_core::stego::{
    antiresize_capacity_bits, antiresize_embed, antiresize_extract, dct_capacity_bits, dct_embed,
    dct_extract, framed_bits, lsb_embed, lsb_extract, msb_embed, msb_extract, pixel_capacity_bits,
    EmbedRecord, StegoError, StegoTool, ANTIRESIZE_BLOCK, ANTIRESIZE_CANVAS,
};

const EXIT_OK: u8 = 0;
const EXIT_IO: u8 = 2;
const EXIT_CORRUPT: u8 = 3;
const EXIT_DESTROYED: u8 = 4;
const EXIT_CAPACITY: u8 = 5;

#[derive(Parser)]
#[command(name = "icdr", version, about = "Zero-trust JPEG content disarm and reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a file's structure: segments, metadata strings, trailing payload, verdict.
    Inspect {
        file: PathBuf,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Disarm a JPEG: rebuild from pixels, resize cycle, filters, transcode, re-encode.
    Disarm {
        input: PathBuf,
        /// Output path for the disarmed JPEG.
        #[arg(long)]
        out: PathBuf,
        /// Config file (flat key = value); defaults to $ICDR_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated step subset: rebuild,resize,filter,transcode.
        #[arg(long)]
        steps: Option<String>,
        /// Run the Detox baseline instead of the ICDR steps.
        #[arg(long)]
        detox: bool,
        /// Re-encode quality (1-100).
        #[arg(long)]
        quality: Option<u8>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Embed or extract hidden messages (the attack oracles).
    Stego {
        #[command(subcommand)]
        action: StegoAction,
    },
    /// Print "psnr,ssim,uqi" for two images.
    Quality { a: PathBuf, b: PathBuf },
    /// Attack + disarm + extract over a directory, with a CSV report.
    Batch {
        dir: PathBuf,
        /// Directory for disarmed outputs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV report path.
        #[arg(long)]
        report: PathBuf,
        /// Attack tool: lsb|msb|dct|antiresize|none.
        #[arg(long, default_value = "none")]
        attack: String,
        #[arg(long)]
        steps: Option<String>,
        #[arg(long)]
        detox: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a deterministic synthetic corpus (clean + infected variants).
    GenCorpus {
        #[arg(long)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated kinds: photos,gradients,texture.
        #[arg(long, default_value = "photos,gradients,texture")]
        kinds: String,
    },
    /// Tuning experiments: resize-scale or filter-stack sweep (CSV).
    Sweep {
        /// "resize" or "filters".
        #[arg(long)]
        experiment: String,
        /// Directory of corpus JPEGs.
        #[arg(long)]
        corpus: PathBuf,
        /// CSV output path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use at most this many corpus files.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum filter stack depth.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum StegoAction {
    /// Embed a message; writes the carrier (PNG out keeps pixel-domain bits intact).
    Embed {
        #[arg(long)]
        tool: String,
        #[arg(long)]
        message: String,
        /// Carrier image (unused by the antiresize tool, which paints its own canvas).
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Anti-resize canvas side (multiple of the block size).
        #[arg(long, default_value_t = ANTIRESIZE_CANVAS)]
        canvas: u32,
        #[arg(long, default_value_t = ANTIRESIZE_BLOCK)]
        block: u32,
    },
    /// Extract a message; prints it, or "DESTROYED" with exit code 4.
    Extract {
        #[arg(long)]
        tool: String,
        input: PathBuf,
        #[arg(long, default_value_t = ANTIRESIZE_CANVAS)]
        canvas: u32,
        #[arg(long, default_value_t = ANTIRESIZE_BLOCK)]
        block: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Inspect { file, json } => cmd_inspect(&file, json),
        Command::Disarm { input, out, config, steps, detox, quality, json } => {
            cmd_disarm(&input, &out, config.as_deref(), steps.as_deref(), detox, quality, json)
        }
        Command::Stego { action } => match action {
            StegoAction::Embed { tool, message, input, out, canvas, block } => {
                cmd_stego_embed(&tool, &message, input.as_deref(), &out, canvas, block)
            }
            StegoAction::Extract { tool, input, canvas, block } => {
                cmd_stego_extract(&tool, &input, canvas, block)
            }
        },
        Command::Quality { a, b } => cmd_quality(&a, &b),
        Command::Batch { dir, out, report, attack, steps, detox, jobs, seed, config } => cmd_batch(
            &dir,
            out,
            &report,
            &attack,
            steps.as_deref(),
            detox,
            jobs,
            seed,
            config.as_deref(),
        ),
        Command::GenCorpus { count, out, seed, kinds } => cmd_gen_corpus(count, &out, seed, &kinds),
        Command::Sweep { experiment, corpus, out, limit, seed, depth } => {
            cmd_sweep(&experiment, &corpus, out.as_deref(), limit, seed, depth)
        }
    };
    ExitCode::from(code)
}

fn read_file(path: &Path) -> Result<Vec<u8>, u8> {
    std::fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })
}

fn load_run_config(config: Option<&Path>) -> Result<RunConfig, u8> {
    let mut run = RunConfig::default();
    let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let path = config.map(Path::to_path_buf).or(env_path);
    if let Some(path) = path {
        run.load_file(&path).map_err(|e| {
            eprintln!("error: config: {e}");
            EXIT_IO
        })?;
    }
    Ok(run)
}

fn cmd_inspect(file: &Path, json: bool) -> u8 {
    let bytes = match read_file(file) {
        Ok(b) => b,
        Err(code) => return code,
    };
    match scan_segments(&bytes) {
        Ok(map) => {
            let verdict = validate(&map);
            let metadata = extract_metadata_strings(&map, &bytes);
            if json {
                let report = serde_json::json!({
                    "file": file.display().to_string(),
                    "verdict": verdict,
                    "declared_width": map.declared_width,
                    "declared_height": map.declared_height,
                    "component_count": map.component_count,
                    "progressive": map.progressive,
                    "segments": map.segments,
                    "entropy_spans": map.entropy_spans,
                    "trailing_payload": map.trailing_payload,
                    "metadata_strings": metadata,
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("{}: {} segments", file.display(), map.segments.len());
                for seg in &map.segments {
                    println!(
                        "  {:#08x}  FF{:02X}  {:?}  payload {} bytes",
                        seg.marker.offset,
                        seg.marker.code,
                        seg.marker.kind,
                        seg.payload_span.length
                    );
                }
                println!(
                    "declared dimensions: {}x{} ({} components{})",
                    map.declared_width,
                    map.declared_height,
                    map.component_count,
                    if map.progressive { ", progressive" } else { "" }
                );
                if metadata.is_empty() {
                    println!("metadata strings: none");
                } else {
                    println!("metadata strings: {}", metadata.len());
                    for m in &metadata {
                        println!(
                            "  [{:?}] {} = {:?}",
                            m.source,
                            m.tag_name,
                            String::from_utf8_lossy(&m.value)
                        );
                    }
                }
                match extract_trailing_payload(&map, &bytes) {
                    Some(payload) => println!("trailing payload: {} bytes after EOI", payload.len()),
                    None => println!("trailing payload: none"),
                }
                println!("verdict: {:?} {:?}", verdict.status, verdict.reasons);
            }
            if verdict.is_valid() {
                EXIT_OK
            } else {
                EXIT_CORRUPT
            }
        }
        Err(err) => {
            if json {
                let report = serde_json::json!({
                    "file": file.display().to_string(),
                    "verdict": {"status": "corrupt", "reasons": ["unparseable_structure"]},
                    "error": err.to_string(),
                    "partial_segments": err.partial_map().segments,
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("{}: {err}", file.display());
                println!("verdict: Corrupt [UnparseableStructure]");
            }
            EXIT_CORRUPT
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_disarm(
    input: &Path,
    out: &Path,
    config: Option<&Path>,
    steps: Option<&str>,
    detox: bool,
    quality: Option<u8>,
    json: bool,
) -> u8 {
    let mut run = match load_run_config(config) {
        Ok(r) => r,
        Err(code) => return code,
    };
    if let Some(spec) = steps {
        match parse_steps(spec) {
            Ok(s) => run.pipeline.steps = s,
            Err(e) => {
                eprintln!("error: --steps: {e}");
                return EXIT_IO;
            }
        }
    }
    if let Some(q) = quality {
        run.pipeline.jpeg_quality = q;
    }
    let bytes = match read_file(input) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let outcome = if detox {
        detox_bytes(&bytes, &run.pipeline)
    } else {
        disarm_bytes(&bytes, &run.pipeline)
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&outcome.report).unwrap());
    } else {
        println!(
            "{}: {:?} removed[trailing={} metadata={}] output {} bytes",
            input.display(),
            outcome.report.verdict,
            outcome.report.removed.trailing_payload_bytes,
            outcome.report.removed.metadata_strings,
            outcome.report.output_size,
        );
        if let Some(q) = &outcome.report.quality {
            println!("quality: psnr={} ssim={:.5} uqi={:.5}", format_db(q.psnr), q.ssim, q.uqi);
        }
    }
    match (outcome.report.verdict, outcome.output) {
        (Verdict::Disarmed, Some(output)) => {
            if let Err(e) = std::fs::write(out, output) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return EXIT_IO;
            }
            EXIT_OK
        }
        _ => EXIT_CORRUPT,
    }
}

/// Magic-based sniff: PNG or JPEG raster load.
fn load_raster(path: &Path) -> Result<Raster, u8> {
    let bytes = read_file(path)?;
    let decoded = if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        png_decode(&bytes).map_err(|e| e.to_string())
    } else {
        jpeg_decode(&bytes).map_err(|e| e.to_string())
    };
    decoded.map_err(|e| {
        eprintln!("error: cannot decode {}: {e}", path.display());
        EXIT_IO
    })
}

fn write_raster(path: &Path, raster: &Raster) -> Result<(), u8> {
    let is_png = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false);
    let bytes = if is_png {
        png_encode(raster)
    } else {
        jpeg_encode(raster, &EncodeParams::quality(95))
    };
    std::fs::write(path, bytes).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_IO
    })
}

fn capacity_exit(err: StegoError) -> u8 {
    eprintln!("error: {err}");
    match err {
        StegoError::CapacityExceeded { .. } => EXIT_CAPACITY,
    }
}

fn cmd_stego_embed(
    tool: &str,
    message: &str,
    input: Option<&Path>,
    out: &Path,
    canvas: u32,
    block: u32,
) -> u8 {
    let tool: StegoTool = match tool.parse() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let message_bytes = message.as_bytes();
    let record = match tool {
        StegoTool::Lsb | StegoTool::Msb => {
            let Some(input) = input else {
                eprintln!("error: {} embedding needs a carrier image", tool.name());
                return EXIT_IO;
            };
            let carrier = match load_raster(input) {
                Ok(r) => r,
                Err(code) => return code,
            };
            let embedded = match tool {
                StegoTool::Lsb => lsb_embed(&carrier, message_bytes),
                _ => msb_embed(&carrier, message_bytes),
            };
            let embedded = match embedded {
                Ok(e) => e,
                Err(err) => return capacity_exit(err),
            };
            if let Err(code) = write_raster(out, &embedded) {
                return code;
            }
            EmbedRecord::new(
                tool,
                pixel_capacity_bits(&carrier),
                framed_bits(message_bytes.len() as u64),
                format!("carrier={}x{}", carrier.width(), carrier.height()),
            )
        }
        StegoTool::Dct => {
            let Some(input) = input else {
                eprintln!("error: dct embedding needs a carrier JPEG");
                return EXIT_IO;
            };
            let bytes = match read_file(input) {
                Ok(b) => b,
                Err(code) => return code,
            };
            let planes = match jpeg_decode_coefficients(&bytes) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot decode coefficients: {e}");
                    return EXIT_IO;
                }
            };
            let embedded = match dct_embed(&planes, message_bytes) {
                Ok(p) => p,
                Err(err) => return capacity_exit(err),
            };
            if let Err(e) = std::fs::write(out, jpeg_encode_coefficients(&embedded)) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return EXIT_IO;
            }
            EmbedRecord::new(
                tool,
                dct_capacity_bits(&planes),
                framed_bits(message_bytes.len() as u64),
                format!("carrier={}x{}", planes.width, planes.height),
            )
        }
        StegoTool::Antiresize => {
            let embedded = match antiresize_embed(message_bytes, block, canvas) {
                Ok(r) => r,
                Err(err) => return capacity_exit(err),
            };
            if let Err(code) = write_raster(out, &embedded) {
                return code;
            }
            EmbedRecord::new(
                tool,
                antiresize_capacity_bits(block, canvas),
                framed_bits(message_bytes.len() as u64),
                format!("canvas={canvas} block={block}"),
            )
        }
    };
    match record {
        Ok(record) => {
            println!(
                "embedded {} bits of {} capacity with {} into {}",
                record.bits_used,
                record.capacity_bits,
                record.tool.name(),
                out.display()
            );
            EXIT_OK
        }
        Err(err) => capacity_exit(err),
    }
}

fn cmd_stego_extract(tool: &str, input: &Path, canvas: u32, block: u32) -> u8 {
    let tool: StegoTool = match tool.parse() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let extracted: Option<Vec<u8>> = match tool {
        StegoTool::Dct => {
            let bytes = match read_file(input) {
                Ok(b) => b,
                Err(code) => return code,
            };
            match jpeg_decode_coefficients(&bytes) {
                Ok(planes) => dct_extract(&planes),
                Err(e) => {
                    eprintln!("error: cannot decode coefficients: {e}");
                    return EXIT_IO;
                }
            }
        }
        _ => {
            let raster = match load_raster(input) {
                Ok(r) => r,
                Err(code) => return code,
            };
            match tool {
                StegoTool::Lsb => lsb_extract(&raster),
                StegoTool::Msb => msb_extract(&raster),
                StegoTool::Antiresize => antiresize_extract(&raster, block, canvas),
                StegoTool::Dct => unreachable!(),
            }
        }
    };
    match extracted {
        Some(message) => {
            println!("{}", String::from_utf8_lossy(&message));
            EXIT_OK
        }
        None => {
            println!("DESTROYED");
            EXIT_DESTROYED
        }
    }
}

fn cmd_quality(a: &Path, b: &Path) -> u8 {
    let ra = match load_raster(a) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let rb = match load_raster(b) {
        Ok(r) => r,
        Err(code) => return code,
    };
    match quality_scores(&ra, &rb) {
        Ok(q) => {
            println!("{},{},{}", format_db(q.psnr), trim_metric(q.ssim), trim_metric(q.uqi));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

/// "1.00000" -> "1.0", "0.96274" stays.
fn trim_metric(v: f64) -> String {
    let mut s = format!("{v:.5}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_batch(
    dir: &Path,
    out: Option<PathBuf>,
    report: &Path,
    attack: &str,
    steps: Option<&str>,
    detox: bool,
    jobs: Option<usize>,
    seed: Option<u64>,
    config: Option<&Path>,
) -> u8 {
    let mut run = match load_run_config(config) {
        Ok(r) => r,
        Err(code) => return code,
    };
    if let Some(spec) = steps {
        match parse_steps(spec) {
            Ok(s) => run.pipeline.steps = s,
            Err(e) => {
                eprintln!("error: --steps: {e}");
                return EXIT_IO;
            }
        }
    }
    let attack = match attack {
        "none" => None,
        other => match other.parse::<StegoTool>() {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: --attack: {e}");
                return EXIT_IO;
            }
        },
    };
    let files = match collect_files(dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot list {}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    if files.is_empty() {
        eprintln!("error: {} holds no .jpg files", dir.display());
        return EXIT_IO;
    }
    let opts = BatchOptions {
        pipeline: run.pipeline,
        attack,
        detox,
        jobs: jobs.unwrap_or(run.jobs),
        seed: seed.unwrap_or(run.seed),
        timeout_ms: run.timeout_ms,
        out_dir: out,
    };
    let result = match run_batch(&files, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: batch failed: {e}");
            return EXIT_IO;
        }
    };
    if let Err(e) = std::fs::write(report, result.to_csv()) {
        eprintln!("error: cannot write {}: {e}", report.display());
        return EXIT_IO;
    }
    println!("{}", result.summary_line());
    if !result.rows.is_empty() && result.errors == result.rows.len() {
        return EXIT_IO;
    }
    EXIT_OK
}

fn cmd_gen_corpus(count: u64, out: &Path, seed: u64, kinds: &str) -> u8 {
    if count < 1 {
        eprintln!("error: --count must be at least 1");
        return EXIT_IO;
    }
    let kinds = match corpus::parse_kinds(kinds) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: --kinds: {e}");
            return EXIT_IO;
        }
    };
    match corpus::generate(out, count, seed, &kinds) {
        Ok(manifest) => {
            println!(
                "wrote {} clean and {} infected files to {}",
                manifest.clean.len(),
                manifest.infected.len(),
                out.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: corpus generation failed: {e}");
            EXIT_IO
        }
    }
}

fn cmd_sweep(
    experiment: &str,
    corpus_dir: &Path,
    out: Option<&Path>,
    limit: Option<usize>,
    seed: u64,
    depth: usize,
) -> u8 {
    let mut files = match collect_files(corpus_dir) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot list {}: {e}", corpus_dir.display());
            return EXIT_IO;
        }
    };
    // Infected variants would skew quality numbers; sweep the clean half.
    files.retain(|p| !p.to_string_lossy().contains("infected"));
    if let Some(limit) = limit {
        files.truncate(limit);
    }
    if files.is_empty() {
        eprintln!("error: no corpus files in {}", corpus_dir.display());
        return EXIT_IO;
    }
    let base = RunConfig::default().pipeline;
    let csv = match experiment {
        "resize" => match sweep::resize_sweep(&files, &base, seed) {
            Ok(rows) => sweep::resize_sweep_csv(&rows),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_IO;
            }
        },
        "filters" => match sweep::filter_sweep(&files, &base, depth.clamp(1, 4)) {
            Ok(rows) => sweep::filter_sweep_csv(&rows),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_IO;
            }
        },
        other => {
            eprintln!("error: unknown experiment '{other}' (use resize or filters)");
            return EXIT_IO;
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
        }
        None => print!("{csv}"),
    }
    EXIT_OK
}
