//! Self-contained baseline JPEG codec with DCT-coefficient access, plus a
//! minimal lossless PNG codec used as the transcode intermediate.
//!
//! The codec is built in-house rather than wrapping a system library: the
//! steganography oracle needs the quantized coefficients, lossless
//! re-emission needs control of the entropy layer, and the zero-trust chain
//! stays auditable end to end.

mod dct;
mod huffman;
mod inflate;
mod jpeg_dec;
mod jpeg_enc;
mod png;
pub mod tables;

use serde::Serialize;
use thiserror::Error;

pub use jpeg_dec::{jpeg_decode, jpeg_decode_coefficients};
pub use jpeg_enc::{jpeg_encode, jpeg_encode_coefficients};
pub use png::{png_decode, png_encode};

#[derive(Debug, Error)]
pub enum JpegError {
    /// Progressive, arithmetic, unsupported sampling, precision, or CMYK.
    #[error("unsupported JPEG coding: {0}")]
    UnsupportedCoding(String),
    /// Anything from malformed structure to Huffman underrun or a bad
    /// restart sequence.
    #[error("corrupt JPEG stream: {0}")]
    CorruptStream(String),
}

#[derive(Debug, Error)]
pub enum PngError {
    #[error("not a PNG: bad signature")]
    BadSignature,
    #[error("checksum mismatch: {0}")]
    BadChecksum(&'static str),
    #[error("unsupported PNG: {0}")]
    UnsupportedPng(String),
    #[error("malformed PNG: {0}")]
    Malformed(String),
}

/// Chroma subsampling for the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subsampling {
    /// No subsampling (1x1 on all components).
    S444,
    /// 2x2 luma, 1x1 chroma.
    S420,
}

/// Encoder settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EncodeParams {
    /// 1..=100; scales the Annex K base tables by the IJG mapping
    /// (quality 50 reproduces the base tables exactly).
    pub quality: u8,
    pub subsampling: Subsampling,
    /// Restart interval in MCUs; 0 disables restart markers.
    pub restart_interval: u16,
}

impl EncodeParams {
    pub fn quality(quality: u8) -> Self {
        Self { quality, subsampling: Subsampling::S444, restart_interval: 0 }
    }

    pub fn with_subsampling(mut self, subsampling: Subsampling) -> Self {
        self.subsampling = subsampling;
        self
    }
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self { quality: 90, subsampling: Subsampling::S444, restart_interval: 0 }
    }
}

/// One component's quantized-coefficient grid.
///
/// Blocks are stored in natural (row-major) coefficient order, on a
/// `blocks_w x blocks_h` grid where `blocks_w = ceil(width / 8)`; MCU padding
/// blocks present in the entropy stream are not part of the plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPlane {
    /// Component identifier from the frame header.
    pub id: u8,
    /// Horizontal / vertical sampling factors.
    pub h: u8,
    pub v: u8,
    /// Quantization table selector (0..=3).
    pub quant_idx: u8,
    /// Component dimensions in samples.
    pub width: u32,
    pub height: u32,
    pub blocks_w: u32,
    pub blocks_h: u32,
    pub blocks: Vec<[i16; 64]>,
}

impl ComponentPlane {
    pub fn block(&self, bx: u32, by: u32) -> &[i16; 64] {
        &self.blocks[(by * self.blocks_w + bx) as usize]
    }
}

/// Quantized DCT coefficients for a whole image plus the context needed to
/// re-emit them without requantization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientPlanes {
    pub width: u32,
    pub height: u32,
    pub components: Vec<ComponentPlane>,
    /// Quantization tables in natural order, indexed by selector.
    pub quant_tables: [Option<[u16; 64]>; 4],
    pub restart_interval: u16,
}

impl CoefficientPlanes {
    /// The luma plane (first component).
    pub fn luma(&self) -> &ComponentPlane {
        &self.components[0]
    }

    pub fn luma_mut(&mut self) -> &mut ComponentPlane {
        &mut self.components[0]
    }
}
