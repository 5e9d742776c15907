//! Jsteg-style DCT-domain embedding: payload bits ride in the LSBs of
//! usable luma AC coefficients. A coefficient is usable when its value is
//! neither 0 nor 1 (the Jsteg rule), which keeps the usable set invariant
//! under embedding: setting the LSB of any usable value never produces 0
//! or 1, and unusable coefficients are never touched.

use crate::codec::tables::ZIGZAG_TO_NATURAL;
use crate::codec::CoefficientPlanes;

use super::{bit_at, frame_message, framed_bits, FrameProgress, FrameReader, StegoError};

#[inline]
fn usable(v: i16) -> bool {
    v != 0 && v != 1
}

/// Count of usable luma AC coefficients: block raster order, zig-zag within
/// each block, DC excluded, chroma untouched.
pub fn dct_capacity_bits(planes: &CoefficientPlanes) -> u64 {
    planes
        .luma()
        .blocks
        .iter()
        .map(|block| {
            ZIGZAG_TO_NATURAL[1..]
                .iter()
                .filter(|&&idx| usable(block[idx]))
                .count() as u64
        })
        .sum()
}

pub fn dct_embed(planes: &CoefficientPlanes, message: &[u8]) -> Result<CoefficientPlanes, StegoError> {
    let capacity = dct_capacity_bits(planes);
    let needed = framed_bits(message.len() as u64);
    if needed > capacity {
        return Err(StegoError::CapacityExceeded { needed, capacity });
    }
    let framed = frame_message(message);
    let total_bits = framed.len() * 8;
    let mut out = planes.clone();
    let mut i = 0usize;
    'blocks: for block in out.luma_mut().blocks.iter_mut() {
        for &idx in &ZIGZAG_TO_NATURAL[1..] {
            if !usable(block[idx]) {
                continue;
            }
            block[idx] = (block[idx] & !1) | bit_at(&framed, i) as i16;
            i += 1;
            if i == total_bits {
                break 'blocks;
            }
        }
    }
    Ok(out)
}

pub fn dct_extract(planes: &CoefficientPlanes) -> Option<Vec<u8>> {
    let capacity = dct_capacity_bits(planes);
    if capacity < framed_bits(0) {
        return None;
    }
    let mut reader = FrameReader::new();
    for block in planes.luma().blocks.iter() {
        for k in 1..64 {
            let v = block[ZIGZAG_TO_NATURAL[k]];
            if !usable(v) {
                continue;
            }
            match reader.push((v & 1) as u8, capacity) {
                FrameProgress::Complete(body) => return Some(body),
                FrameProgress::Rejected => return None,
                FrameProgress::NeedMore => {}
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::ComponentPlane;

    fn plane_of_blocks(blocks: Vec<[i16; 64]>, blocks_w: u32) -> CoefficientPlanes {
        let blocks_h = blocks.len() as u32 / blocks_w;
        CoefficientPlanes {
            width: blocks_w * 8,
            height: blocks_h * 8,
            components: vec![ComponentPlane {
                id: 1,
                h: 1,
                v: 1,
                quant_idx: 0,
                width: blocks_w * 8,
                height: blocks_h * 8,
                blocks_w,
                blocks_h,
                blocks,
            }],
            quant_tables: [Some([1u16; 64]), None, None, None],
            restart_interval: 0,
        }
    }

    #[test]
    fn embedding_never_creates_zero_or_one() {
        let mut block = [0i16; 64];
        for (k, v) in block.iter_mut().enumerate() {
            *v = match k % 6 {
                0 => 0,
                1 => 1,
                2 => 2,
                3 => -1,
                4 => -2,
                _ => 3,
            };
        }
        let planes = plane_of_blocks(vec![block; 40], 8);
        let embedded = dct_embed(&planes, b"jsteg rule").unwrap();
        for b in embedded.luma().blocks.iter() {
            for k in 1..64 {
                let before = planes.luma().blocks[0][ZIGZAG_TO_NATURAL[k]];
                let after = b[ZIGZAG_TO_NATURAL[k]];
                if !usable(before) {
                    assert_eq!(after, before, "unusable coefficient was touched");
                } else {
                    assert!(usable(after));
                }
            }
        }
        assert_eq!(dct_extract(&embedded).unwrap(), b"jsteg rule");
    }

    #[test]
    fn flat_blocks_have_no_capacity() {
        let mut block = [0i16; 64];
        block[0] = 37; // DC only
        let planes = plane_of_blocks(vec![block; 16], 4);
        assert_eq!(dct_capacity_bits(&planes), 0);
        assert!(matches!(
            dct_embed(&planes, b"x"),
            Err(StegoError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn dc_and_chroma_untouched() {
        let mut block = [5i16; 64];
        block[0] = -100;
        let mut planes = plane_of_blocks(vec![block; 20], 5);
        planes.components.push(ComponentPlane {
            id: 2,
            h: 1,
            v: 1,
            quant_idx: 1,
            width: 40,
            height: 32,
            blocks_w: 5,
            blocks_h: 4,
            blocks: vec![block; 20],
        });
        let embedded = dct_embed(&planes, b"dc safe").unwrap();
        for (a, b) in planes.luma().blocks.iter().zip(embedded.luma().blocks.iter()) {
            assert_eq!(a[0], b[0]);
        }
        assert_eq!(planes.components[1], embedded.components[1]);
    }
}
