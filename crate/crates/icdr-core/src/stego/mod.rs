//! Steganography attack tools and extraction oracles.
//!
//! Every tool frames its payload (magic + 32-bit length) so extraction
//! either recovers the exact message or fails loudly — "destroyed vs
//! intact" is the success criterion the disarm pipeline is judged by.

mod antiresize;
mod dct;
mod pixel;

use serde::Serialize;
use thiserror::Error;

pub use antiresize::{
    antiresize_capacity_bits, antiresize_embed, antiresize_extract, ANTIRESIZE_BLOCK,
    ANTIRESIZE_CANVAS,
};
pub use dct::{dct_capacity_bits, dct_embed, dct_extract};
pub use pixel::{
    lsb_embed, lsb_extract, msb_embed, msb_extract, pixel_capacity_bits,
};

/// Frame magic: 0x53 0x47.
pub const MAGIC: [u8; 2] = [0x53, 0x47];
/// Frame overhead: magic (2) + big-endian length (4).
pub const FRAME_OVERHEAD_BYTES: u64 = 6;

#[derive(Debug, Error)]
pub enum StegoError {
    #[error("payload needs {needed} bits but the carrier offers {capacity}")]
    CapacityExceeded { needed: u64, capacity: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StegoTool {
    Lsb,
    Msb,
    Dct,
    Antiresize,
}

impl StegoTool {
    pub fn name(&self) -> &'static str {
        match self {
            StegoTool::Lsb => "lsb",
            StegoTool::Msb => "msb",
            StegoTool::Dct => "dct",
            StegoTool::Antiresize => "antiresize",
        }
    }
}

impl std::str::FromStr for StegoTool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lsb" => Ok(StegoTool::Lsb),
            "msb" => Ok(StegoTool::Msb),
            "dct" => Ok(StegoTool::Dct),
            "antiresize" => Ok(StegoTool::Antiresize),
            other => Err(format!("unknown stego tool '{other}'")),
        }
    }
}

/// Bookkeeping for one embedding run.
#[derive(Debug, Clone, Serialize)]
pub struct EmbedRecord {
    pub tool: StegoTool,
    pub capacity_bits: u64,
    pub bits_used: u64,
    pub params: String,
}

impl EmbedRecord {
    pub fn new(
        tool: StegoTool,
        capacity_bits: u64,
        bits_used: u64,
        params: impl Into<String>,
    ) -> Result<Self, StegoError> {
        if bits_used > capacity_bits {
            return Err(StegoError::CapacityExceeded {
                needed: bits_used,
                capacity: capacity_bits,
            });
        }
        Ok(Self { tool, capacity_bits, bits_used, params: params.into() })
    }
}

/// magic + u32 big-endian length + body.
pub(crate) fn frame_message(body: &[u8]) -> Vec<u8> {
    let mut framed = Vec::with_capacity(6 + body.len());
    framed.extend_from_slice(&MAGIC);
    framed.extend_from_slice(&(body.len() as u32).to_be_bytes());
    framed.extend_from_slice(body);
    framed
}

pub fn framed_bits(body_len: u64) -> u64 {
    (FRAME_OVERHEAD_BYTES + body_len) * 8
}

/// Bit `i` of a byte string, most-significant-bit-first per byte.
#[inline]
pub(crate) fn bit_at(data: &[u8], i: usize) -> u8 {
    (data[i / 8] >> (7 - (i % 8))) & 1
}

/// Incremental framed-message reader fed one bit at a time; used by every
/// extractor so the accept/reject logic is identical across tools.
pub(crate) struct FrameReader {
    buf: Vec<u8>,
    bits: usize,
    expected_len: Option<usize>,
}

pub(crate) enum FrameProgress {
    NeedMore,
    Rejected,
    Complete(Vec<u8>),
}

impl FrameReader {
    pub fn new() -> Self {
        Self { buf: vec![0u8; 6], bits: 0, expected_len: None }
    }

    /// Bits the reader still needs, given total budget `capacity`; `None`
    /// when the frame cannot possibly fit.
    pub fn push(&mut self, bit: u8, capacity_bits: u64) -> FrameProgress {
        let byte = self.bits / 8;
        if byte >= self.buf.len() {
            return FrameProgress::Rejected;
        }
        self.buf[byte] = (self.buf[byte] << 1) | bit;
        self.bits += 1;

        if self.bits == 16 && self.buf[..2] != MAGIC {
            return FrameProgress::Rejected;
        }
        if self.bits == 48 {
            let len = u32::from_be_bytes([self.buf[2], self.buf[3], self.buf[4], self.buf[5]])
                as usize;
            if framed_bits(len as u64) > capacity_bits {
                return FrameProgress::Rejected;
            }
            self.expected_len = Some(len);
            self.buf.reserve(len);
            self.buf.resize(6 + len, 0);
            if len == 0 {
                return FrameProgress::Complete(Vec::new());
            }
        }
        if let Some(len) = self.expected_len {
            if self.bits == (6 + len) * 8 {
                return FrameProgress::Complete(self.buf[6..].to_vec());
            }
        }
        FrameProgress::NeedMore
    }
}
