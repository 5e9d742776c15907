//! Anti-resize steganography: the message is embedded into the LSBs of
//! block-replicated cell colors on a large canvas. Interpolating resizers
//! synthesize new pixels from identical neighbors inside each cell, so the
//! cell colors — and the bits they carry — survive rescaling.

use crate::ops::resize_bilinear;
use crate::raster::Raster;
use crate::rng::SplitMix64;

use super::{bit_at, frame_message, framed_bits, FrameProgress, FrameReader, StegoError};

pub const ANTIRESIZE_BLOCK: u32 = 8;
pub const ANTIRESIZE_CANVAS: u32 = 4000;

/// Fixed seed for the cell jitter; embedding and the carrier texture are
/// fully deterministic.
const JITTER_SEED: u64 = 0x1CDA_57E6_0B10_C45Eu64;

/// One LSB-style bit per channel per logical cell.
pub fn antiresize_capacity_bits(block: u32, canvas: u32) -> u64 {
    let grid = (canvas / block) as u64;
    3 * grid * grid
}

/// Paint a `canvas x canvas` raster out of `block x block` uniform cells.
/// Each cell's color is mid-gray with a small seeded jitter, message bits in
/// the channel LSBs, replicated across the whole cell.
pub fn antiresize_embed(message: &[u8], block: u32, canvas: u32) -> Result<Raster, StegoError> {
    assert!(block >= 1 && canvas >= block, "canvas must hold at least one block");
    assert_eq!(canvas % block, 0, "canvas must be a multiple of the block size");
    let grid = canvas / block;
    let capacity = antiresize_capacity_bits(block, canvas);
    let needed = framed_bits(message.len() as u64);
    if needed > capacity {
        return Err(StegoError::CapacityExceeded { needed, capacity });
    }
    let framed = frame_message(message);
    let total_bits = framed.len() * 8;

    let mut rng = SplitMix64::new(JITTER_SEED);
    let mut out = Raster::filled(canvas, canvas, [128, 128, 128]);
    for cy in 0..grid {
        for cx in 0..grid {
            let cell_index = (cy * grid + cx) as usize;
            let mut color = [0u8; 3];
            for (c, value) in color.iter_mut().enumerate() {
                // 128 +/- 8, then the message bit replaces the LSB.
                let jittered = 120 + rng.next_below(17) as u8;
                let bit_index = cell_index * 3 + c;
                *value = if bit_index < total_bits {
                    (jittered & !1) | bit_at(&framed, bit_index)
                } else {
                    jittered
                };
            }
            for py in cy * block..(cy + 1) * block {
                for px in cx * block..(cx + 1) * block {
                    out.set(px, py, color);
                }
            }
        }
    }
    Ok(out)
}

/// Rescale back to the canvas if needed, then read each cell's center pixel
/// and decode channel LSBs. `None` when the frame does not verify.
pub fn antiresize_extract(r: &Raster, block: u32, canvas: u32) -> Option<Vec<u8>> {
    if block < 1 || canvas < block || !canvas.is_multiple_of(block) {
        return None;
    }
    let grid = canvas / block;
    let capacity = antiresize_capacity_bits(block, canvas);
    let rescaled;
    let source = if r.width() == canvas && r.height() == canvas {
        r
    } else {
        rescaled = resize_bilinear(r, canvas, canvas);
        &rescaled
    };
    let mut reader = FrameReader::new();
    let half = block / 2;
    for cy in 0..grid {
        for cx in 0..grid {
            let p = source.get(cx * block + half, cy * block + half);
            for channel in p {
                match reader.push(channel & 1, capacity) {
                    FrameProgress::Complete(body) => return Some(body),
                    FrameProgress::Rejected => return None,
                    FrameProgress::NeedMore => {}
                }
            }
        }
    }
    None
}
