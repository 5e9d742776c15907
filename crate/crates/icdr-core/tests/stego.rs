//! Stego tool behavior on realistic carriers: quality bands, destruction
//! under individual transforms, disk round trips, no-false-positive sweep.

mod common;

use common::{noise_raster, random_raster};
use icdr_core::codec::{
    jpeg_decode, jpeg_decode_coefficients, jpeg_encode, jpeg_encode_coefficients, png_decode,
    png_encode, EncodeParams,
};
use icdr_core::metrics::psnr;
use icdr_core::ops::{gaussian_blur, resize_cycle, sharpen, DEFAULT_BLUR_RADIUS, DEFAULT_BLUR_SIGMA};
use icdr_core::stego::{
    antiresize_embed, antiresize_extract, dct_capacity_bits, dct_embed, dct_extract, lsb_embed,
    lsb_extract, msb_embed, msb_extract, ANTIRESIZE_BLOCK,
};

const MESSAGE: &[u8] = b"attack-at-dawn: exfiltrate the blueprints";

#[test]
fn lsb_quality_band_on_512_carrier() {
    let carrier = random_raster(512, 512, 31);
    let embedded = lsb_embed(&carrier, MESSAGE).unwrap();
    let db = psnr(&carrier, &embedded).unwrap();
    assert!(db >= 51.0, "LSB embedding PSNR {db} below band");
}

#[test]
fn msb_quality_band_on_512_carrier() {
    let carrier = random_raster(512, 512, 32);
    let embedded = msb_embed(&carrier, MESSAGE).unwrap();
    let db = psnr(&carrier, &embedded).unwrap();
    assert!((25.0..=45.0).contains(&db), "MSB embedding PSNR {db} outside band");
}

#[test]
fn quality_ordering_lsb_above_msb() {
    let carrier = noise_raster(256, 256, 33);
    let lsb = lsb_embed(&carrier, MESSAGE).unwrap();
    let msb = msb_embed(&carrier, MESSAGE).unwrap();
    assert!(psnr(&carrier, &lsb).unwrap() > psnr(&carrier, &msb).unwrap());
}

#[test]
fn lsb_embedding_barely_moves_uqi() {
    let carrier = noise_raster(512, 512, 34);
    let embedded = lsb_embed(&carrier, MESSAGE).unwrap();
    assert!(icdr_core::metrics::uqi(&carrier, &embedded).unwrap() >= 0.999);
}

#[test]
fn no_false_positives_on_clean_rasters() {
    for seed in 0..1000u64 {
        let r = random_raster(24, 18, seed + 10_000);
        assert_eq!(lsb_extract(&r), None, "seed {seed}");
    }
}

#[test]
fn blur_destroys_lsb() {
    for seed in 0..20u64 {
        let carrier = noise_raster(128, 128, seed + 40);
        let embedded = lsb_embed(&carrier, MESSAGE).unwrap();
        let blurred = gaussian_blur(&embedded, DEFAULT_BLUR_SIGMA, DEFAULT_BLUR_RADIUS);
        assert_ne!(lsb_extract(&blurred), Some(MESSAGE.to_vec()), "seed {seed}");
    }
}

#[test]
fn resize_cycle_destroys_lsb_and_msb() {
    for seed in 0..20u64 {
        let carrier = noise_raster(128, 128, seed + 70);
        let lsb = lsb_embed(&carrier, MESSAGE).unwrap();
        assert_ne!(
            lsb_extract(&resize_cycle(&lsb, 0.97)),
            Some(MESSAGE.to_vec()),
            "lsb seed {seed}"
        );
        let msb = msb_embed(&carrier, MESSAGE).unwrap();
        assert_ne!(
            msb_extract(&resize_cycle(&msb, 0.97)),
            Some(MESSAGE.to_vec()),
            "msb seed {seed}"
        );
    }
}

#[test]
fn dct_embed_survives_disk_round_trip() {
    let carrier = noise_raster(160, 120, 90);
    let bytes = jpeg_encode(&carrier, &EncodeParams::quality(90));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    assert!(dct_capacity_bits(&planes) as usize >= (MESSAGE.len() + 6) * 8);
    let embedded = dct_embed(&planes, MESSAGE).unwrap();
    let stego_bytes = jpeg_encode_coefficients(&embedded);

    // Reopen from "disk" and extract.
    let reopened = jpeg_decode_coefficients(&stego_bytes).unwrap();
    assert_eq!(dct_extract(&reopened).unwrap(), MESSAGE);
}

#[test]
fn dct_embed_dies_under_pixel_reencode() {
    let carrier = noise_raster(160, 120, 91);
    let bytes = jpeg_encode(&carrier, &EncodeParams::quality(90));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    let embedded = dct_embed(&planes, MESSAGE).unwrap();
    let stego_bytes = jpeg_encode_coefficients(&embedded);

    // Full pixel rebuild at quality 90 requantizes everything.
    let pixels = jpeg_decode(&stego_bytes).unwrap();
    let reencoded = jpeg_encode(&pixels, &EncodeParams::quality(90));
    let planes_after = jpeg_decode_coefficients(&reencoded).unwrap();
    assert_ne!(dct_extract(&planes_after), Some(MESSAGE.to_vec()));
}

#[test]
fn fresh_natural_planes_extract_nothing() {
    let carrier = noise_raster(96, 96, 92);
    let bytes = jpeg_encode(&carrier, &EncodeParams::quality(90));
    let planes = jpeg_decode_coefficients(&bytes).unwrap();
    assert_eq!(dct_extract(&planes), None);
}

#[test]
fn antiresize_survives_png_write_and_reopen() {
    // The attacker's save format is lossless; the carrier holds its message
    // through a PNG round trip on disk.
    let embedded = antiresize_embed(MESSAGE, ANTIRESIZE_BLOCK, 800).unwrap();
    let bytes = png_encode(&embedded);
    let reopened = png_decode(&bytes).unwrap();
    assert_eq!(antiresize_extract(&reopened, ANTIRESIZE_BLOCK, 800).unwrap(), MESSAGE);
}

#[test]
fn antiresize_dies_under_any_jpeg_write() {
    // Integer YCbCr storage shifts cell colors by +/-1 per channel at any
    // quality, so channel-LSB data never survives a JPEG save.
    let embedded = antiresize_embed(MESSAGE, ANTIRESIZE_BLOCK, 800).unwrap();
    for q in [90u8, 100] {
        let bytes = jpeg_encode(&embedded, &EncodeParams::quality(q));
        let reopened = jpeg_decode(&bytes).unwrap();
        assert_ne!(
            antiresize_extract(&reopened, ANTIRESIZE_BLOCK, 800),
            Some(MESSAGE.to_vec()),
            "quality {q}"
        );
    }
}

#[test]
fn antiresize_center_pixels_are_transparent_to_small_filters() {
    // The 5-tap blur kernel never reaches across a cell boundary when read
    // at the cell center, so the raster-domain filter stack alone does not
    // destroy this embedding; the re-encode in the filter *configuration*
    // does (covered by the pipeline tests).
    let embedded = antiresize_embed(MESSAGE, ANTIRESIZE_BLOCK, 800).unwrap();
    let filtered = sharpen(&gaussian_blur(&embedded, DEFAULT_BLUR_SIGMA, DEFAULT_BLUR_RADIUS));
    assert_eq!(
        antiresize_extract(&filtered, ANTIRESIZE_BLOCK, 800),
        Some(MESSAGE.to_vec())
    );
}
