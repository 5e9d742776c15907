//! LSB and MSB bit-plane embedding: one bit per channel, row-major pixels,
//! channel order R, G, B.

use crate::raster::Raster;

use super::{bit_at, frame_message, framed_bits, FrameProgress, FrameReader, StegoError};

/// Carrier capacity for the bit-plane tools: 1 bit per channel.
pub fn pixel_capacity_bits(r: &Raster) -> u64 {
    3 * r.pixel_count()
}

fn embed_plane(r: &Raster, message: &[u8], bit: u8) -> Result<Raster, StegoError> {
    let capacity = pixel_capacity_bits(r);
    let needed = framed_bits(message.len() as u64);
    if needed > capacity {
        return Err(StegoError::CapacityExceeded { needed, capacity });
    }
    let framed = frame_message(message);
    let mask = 1u8 << bit;
    let mut out = r.clone();
    let pixels = out.pixels_mut();
    for i in 0..(framed.len() * 8) {
        let value = &mut pixels[i / 3][i % 3];
        *value = (*value & !mask) | (bit_at(&framed, i) << bit);
    }
    Ok(out)
}

fn extract_plane(r: &Raster, bit: u8) -> Option<Vec<u8>> {
    let capacity = pixel_capacity_bits(r);
    if capacity < framed_bits(0) {
        return None;
    }
    let mut reader = FrameReader::new();
    for px in r.pixels().iter().flat_map(|p| p.iter()) {
        match reader.push((px >> bit) & 1, capacity) {
            FrameProgress::Complete(body) => return Some(body),
            FrameProgress::Rejected => return None,
            FrameProgress::NeedMore => {}
        }
    }
    None
}

/// Hide `message` in the least significant bit of each channel value.
/// Per-channel absolute difference from the carrier is at most 1.
pub fn lsb_embed(r: &Raster, message: &[u8]) -> Result<Raster, StegoError> {
    embed_plane(r, message, 0)
}

pub fn lsb_extract(r: &Raster) -> Option<Vec<u8>> {
    extract_plane(r, 0)
}

/// Same traversal but bit 7 is targeted; the distortion is visible by
/// design. Per-channel difference is 0 or 128.
pub fn msb_embed(r: &Raster, message: &[u8]) -> Result<Raster, StegoError> {
    embed_plane(r, message, 7)
}

pub fn msb_extract(r: &Raster) -> Option<Vec<u8>> {
    extract_plane(r, 7)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_raster(w: u32, h: u32, seed: u64) -> Raster {
        let mut rng = SplitMix64::new(seed);
        let pixels =
            (0..w as usize * h as usize).map(|_| [rng.next_u8(), rng.next_u8(), rng.next_u8()]).collect();
        Raster::from_pixels(w, h, pixels)
    }

    #[test]
    fn lsb_round_trip_and_bounded_change() {
        let carrier = random_raster(40, 30, 11);
        let embedded = lsb_embed(&carrier, b"attack-at-dawn").unwrap();
        assert_eq!(lsb_extract(&embedded).unwrap(), b"attack-at-dawn");
        for (a, b) in carrier.pixels().iter().zip(embedded.pixels().iter()) {
            for c in 0..3 {
                assert!((a[c] as i16 - b[c] as i16).abs() <= 1);
            }
        }
    }

    #[test]
    fn msb_round_trip_and_difference_set() {
        let carrier = random_raster(40, 30, 12);
        let embedded = msb_embed(&carrier, b"visible").unwrap();
        assert_eq!(msb_extract(&embedded).unwrap(), b"visible");
        for (a, b) in carrier.pixels().iter().zip(embedded.pixels().iter()) {
            for c in 0..3 {
                let d = (a[c] as i16 - b[c] as i16).abs();
                assert!(d == 0 || d == 128);
            }
        }
    }

    #[test]
    fn capacity_boundary_counts_framing_overhead() {
        // 5x9 pixels: capacity 135 bits. An 11-byte message needs
        // (6 + 11) * 8 = 136 bits - one over - while 10 bytes fits.
        let carrier = Raster::filled(5, 9, [7, 7, 7]);
        assert_eq!(pixel_capacity_bits(&carrier), 135);
        assert!(matches!(
            lsb_embed(&carrier, &[0u8; 11]),
            Err(StegoError::CapacityExceeded { needed: 136, capacity: 135 })
        ));
        assert!(lsb_embed(&carrier, &[0u8; 10]).is_ok());
    }

    #[test]
    fn locality_only_leading_pixels_change() {
        let carrier = random_raster(64, 64, 13);
        let message = b"short";
        let embedded = lsb_embed(&carrier, message).unwrap();
        let framed_bits = (6 + message.len()) * 8;
        let touched_pixels = framed_bits.div_ceil(3);
        for i in touched_pixels..carrier.pixels().len() {
            assert_eq!(carrier.pixels()[i], embedded.pixels()[i]);
        }
    }

    #[test]
    fn fresh_raster_extracts_nothing() {
        let r = random_raster(32, 32, 14);
        assert_eq!(lsb_extract(&r), None);
    }
}
