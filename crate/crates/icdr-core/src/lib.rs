//! Zero-trust JPEG content disarm and reconstruction.
//!
//! The library is organized around the pipeline's data flow:
//!
//! * [`jpeg`] — byte-level JPEG/JFIF structure scanner: segment map, metadata
//!   string extraction, trailing-payload carving, validity gate. No pixel
//!   decoding happens here.
//! * [`codec`] — self-contained baseline JPEG decoder/encoder with access to
//!   quantized DCT coefficients, plus a minimal lossless PNG codec used as the
//!   transcode intermediate.
//! * [`ops`] — pixel-domain transforms: bilinear resize, Gaussian blur,
//!   sharpen, median, bilateral, and the Detox transfer function.
//! * [`stego`] — embedding tools and extraction oracles (LSB, MSB, DCT,
//!   anti-resize). Extraction failure is the disarm success criterion.
//! * [`disarm`] — the pipeline itself: validate, rebuild from pixels, resize
//!   cycle, filter stack, lossless transcode, re-encode.
//! * [`metrics`] — full-reference quality metrics (PSNR, SSIM, UQI).

pub mod codec;
pub mod disarm;
pub mod jpeg;
pub mod metrics;
pub mod ops;
pub mod raster;
pub mod rng;
pub mod stego;

pub use raster::Raster;

/// Upper bound of the validity gate: images with more pixels are corrupt.
pub const MAX_PIXELS: u64 = 30_000_000;
