//! JPEG/PNG codec contracts: round trips, table emission, coefficient
//! losslessness, unsupported-mode rejection.

mod common;

use common::{noise_raster, random_raster};
use icdr_core::codec::{
    jpeg_decode, jpeg_decode_coefficients, jpeg_encode, jpeg_encode_coefficients, png_decode,
    png_encode, tables, EncodeParams, JpegError, Subsampling,
};
use icdr_core::jpeg::{extract_metadata_strings, scan_segments, MarkerKind};
use icdr_core::metrics::psnr;
use icdr_core::raster::Raster;

#[test]
fn flat_gray_survives_within_one() {
    let r = Raster::filled(64, 64, [128, 128, 128]);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let back = jpeg_decode(&bytes).unwrap();
    assert_eq!((back.width(), back.height()), (64, 64));
    for p in back.pixels() {
        for c in 0..3 {
            assert!((p[c] as i16 - 128).abs() <= 1, "pixel {p:?}");
        }
    }
}

#[test]
fn one_by_one_white_round_trip() {
    let r = Raster::filled(1, 1, [255, 255, 255]);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let back = jpeg_decode(&bytes).unwrap();
    for c in 0..3 {
        assert!(back.pixels()[0][c] >= 254);
    }
}

#[test]
fn quality_95_round_trip_beats_30_db() {
    let r = random_raster(96, 80, 42);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(95));
    let back = jpeg_decode(&bytes).unwrap();
    let db = psnr(&r, &back).unwrap();
    assert!(db > 30.0, "psnr {db}");
}

#[test]
fn natural_image_round_trip_q90_both_subsamplings() {
    let r = noise_raster(133, 97, 7);
    for sub in [Subsampling::S444, Subsampling::S420] {
        let bytes = jpeg_encode(&r, &EncodeParams::quality(90).with_subsampling(sub));
        let back = jpeg_decode(&bytes).unwrap();
        assert_eq!((back.width(), back.height()), (133, 97));
        let db = psnr(&r, &back).unwrap();
        assert!(db > 28.0, "psnr {db} with {sub:?}");
    }
}

#[test]
fn restart_markers_round_trip() {
    let r = noise_raster(120, 56, 9);
    let params = EncodeParams { quality: 85, subsampling: Subsampling::S420, restart_interval: 3 };
    let bytes = jpeg_encode(&r, &params);
    let map = scan_segments(&bytes).unwrap();
    assert!(map.count_kind(MarkerKind::Rst(0)) >= 1);
    let back = jpeg_decode(&bytes).unwrap();
    assert!(psnr(&r, &back).unwrap() > 25.0);
}

#[test]
fn progressive_marker_is_unsupported() {
    // SOI + SOF2 (progressive) declaring 16x16 + EOI.
    let mut bytes = vec![0xFF, 0xD8];
    let sof: &[u8] = &[8, 0, 16, 0, 16, 1, 1, 0x11, 0];
    bytes.extend_from_slice(&[0xFF, 0xC2, 0x00, (sof.len() + 2) as u8]);
    bytes.extend_from_slice(sof);
    bytes.extend_from_slice(&[0xFF, 0xD9]);
    assert!(matches!(jpeg_decode(&bytes), Err(JpegError::UnsupportedCoding(_))));
}

#[test]
fn quality_50_emits_annex_k_tables_byte_for_byte() {
    let r = Raster::filled(16, 16, [10, 200, 30]);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(50));
    let map = scan_segments(&bytes).unwrap();
    let dqt = map
        .segments
        .iter()
        .find(|s| s.marker.kind == MarkerKind::Dqt)
        .expect("DQT present");
    let payload = dqt.payload_span.slice(&bytes);
    assert_eq!(payload.len(), 2 * 65);
    assert_eq!(payload[0], 0x00);
    assert_eq!(payload[65], 0x01);
    for k in 0..64 {
        assert_eq!(
            payload[1 + k] as u16,
            tables::BASE_LUMA_QUANT[tables::ZIGZAG_TO_NATURAL[k]],
            "luma zigzag index {k}"
        );
        assert_eq!(
            payload[66 + k] as u16,
            tables::BASE_CHROMA_QUANT[tables::ZIGZAG_TO_NATURAL[k]],
            "chroma zigzag index {k}"
        );
    }
}

#[test]
fn encoder_output_is_structurally_clean() {
    let r = noise_raster(50, 38, 3);
    let bytes = jpeg_encode(&r, &EncodeParams::default());
    let map = scan_segments(&bytes).unwrap();
    assert!(map.trailing_payload.is_none());
    assert!(extract_metadata_strings(&map, &bytes).is_empty());
    assert_eq!(map.attributed_bytes(), bytes.len());
}

#[test]
fn coefficient_decode_is_lossless_over_reencode() {
    for (seed, sub) in [(1u64, Subsampling::S444), (2, Subsampling::S420)] {
        let r = noise_raster(72, 48, seed);
        let bytes = jpeg_encode(&r, &EncodeParams::quality(80).with_subsampling(sub));
        let planes1 = jpeg_decode_coefficients(&bytes).unwrap();
        let bytes2 = jpeg_encode_coefficients(&planes1);
        let planes2 = jpeg_decode_coefficients(&bytes2).unwrap();
        assert_eq!(planes1, planes2);
        // And the pixel decodes agree exactly (no requantization anywhere).
        assert_eq!(jpeg_decode(&bytes).unwrap(), jpeg_decode(&bytes2).unwrap());
    }
}

#[test]
fn flat_image_has_dc_only() {
    let r = Raster::filled(32, 32, [90, 90, 90]);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    for block in planes.luma().blocks.iter() {
        assert_ne!(block[0], 0, "flat non-gray has DC energy");
        assert!(block[1..].iter().all(|&ac| ac == 0));
    }
}

#[test]
fn random_image_has_embedding_capacity() {
    let r = random_raster(64, 64, 5);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    let big_ac = planes
        .luma()
        .blocks
        .iter()
        .flat_map(|b| b[1..].iter())
        .filter(|&&v| v.abs() >= 2)
        .count();
    assert!(big_ac > 0, "no usable AC coefficients");
}

#[test]
fn single_ac_lsb_flip_changes_exactly_that_coefficient() {
    let r = noise_raster(40, 40, 8);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let mut planes = jpeg_decode_coefficients(&bytes).unwrap();
    let (bi, ki) = planes
        .luma()
        .blocks
        .iter()
        .enumerate()
        .find_map(|(bi, b)| {
            (1..64).find(|&k| b[k].abs() >= 2).map(|k| (bi, k))
        })
        .expect("a usable coefficient exists");
    planes.luma_mut().blocks[bi][ki] ^= 1;
    let reencoded = jpeg_encode_coefficients(&planes);
    let planes2 = jpeg_decode_coefficients(&reencoded).unwrap();
    let mut diffs = 0;
    for (a, b) in planes
        .luma()
        .blocks
        .iter()
        .flat_map(|b| b.iter())
        .zip(planes2.luma().blocks.iter().flat_map(|b| b.iter()))
    {
        if a != b {
            diffs += 1;
        }
    }
    assert_eq!(diffs, 0, "re-decode must reproduce the flipped planes exactly");
}

#[test]
fn subsampled_coefficients_preserve_sampling_factors() {
    let r = noise_raster(100, 60, 11);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90).with_subsampling(Subsampling::S420));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    assert_eq!((planes.components[0].h, planes.components[0].v), (2, 2));
    let reencoded = jpeg_encode_coefficients(&planes);
    let planes2 = jpeg_decode_coefficients(&reencoded).unwrap();
    assert_eq!((planes2.components[0].h, planes2.components[0].v), (2, 2));
    assert_eq!(planes2.components[1].width, 50);
    assert_eq!(planes2.components[1].height, 30);
}

#[test]
fn grayscale_single_component_decodes_to_replicated_luma() {
    // Build a grayscale JPEG through the coefficient writer.
    let color = noise_raster(48, 32, 13);
    let bytes = jpeg_encode(&color, &EncodeParams::quality(90));
    let mut planes = jpeg_decode_coefficients(&bytes).unwrap();
    planes.components.truncate(1);
    let gray_bytes = jpeg_encode_coefficients(&planes);
    let gray = jpeg_decode(&gray_bytes).unwrap();
    assert_eq!((gray.width(), gray.height()), (48, 32));
    assert!(gray.pixels().iter().all(|p| p[0] == p[1] && p[1] == p[2]));
}

#[test]
fn truncated_entropy_data_is_corrupt_not_panic() {
    let r = noise_raster(64, 64, 17);
    let bytes = jpeg_encode(&r, &EncodeParams::quality(90));
    let cut = bytes.len() * 3 / 4;
    assert!(jpeg_decode(&bytes[..cut]).is_err());
}

#[test]
fn png_round_trip_bit_exact_on_noise_and_random() {
    for seed in 0..4u64 {
        let r = if seed % 2 == 0 {
            random_raster(61, 47, seed)
        } else {
            noise_raster(64, 48, seed)
        };
        let encoded = png_encode(&r);
        assert_eq!(png_decode(&encoded).unwrap(), r);
    }
}

#[test]
fn externally_authored_png_decodes() {
    // tests/fixtures/reference.png: 4x2 RGB rows
    // [(255,0,0),(0,255,0),(0,0,255),(255,255,255)] /
    // [(0,0,0),(128,128,128),(64,32,16),(200,100,50)]
    // written by an independent zlib-based PNG writer (dynamic Huffman).
    let bytes = include_bytes!("fixtures/reference.png");
    let r = png_decode(bytes).unwrap();
    assert_eq!((r.width(), r.height()), (4, 2));
    assert_eq!(r.get(0, 0), [255, 0, 0]);
    assert_eq!(r.get(1, 0), [0, 255, 0]);
    assert_eq!(r.get(2, 0), [0, 0, 255]);
    assert_eq!(r.get(3, 0), [255, 255, 255]);
    assert_eq!(r.get(0, 1), [0, 0, 0]);
    assert_eq!(r.get(1, 1), [128, 128, 128]);
    assert_eq!(r.get(2, 1), [64, 32, 16]);
    assert_eq!(r.get(3, 1), [200, 100, 50]);
}
