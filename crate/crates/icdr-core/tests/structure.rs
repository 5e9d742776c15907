//! Structure scanner contracts: carving, metadata extraction, attribution,
//! stuffed-byte safety.

mod common;

use common::{com_segment, exif_app1_segment, noise_raster, splice_after_soi};
use icdr_core::codec::{jpeg_encode, EncodeParams, Subsampling};
use icdr_core::jpeg::{
    extract_metadata_strings, extract_trailing_payload, scan_segments, validate, MetadataSource,
    Span,
};
use icdr_core::rng::SplitMix64;

fn encoded_sample(seed: u64) -> Vec<u8> {
    jpeg_encode(&noise_raster(96, 64, seed), &EncodeParams::quality(88))
}

#[test]
fn appended_bytes_are_carved_exactly() {
    let clean = encoded_sample(1);
    let mut infected = clean.clone();
    infected.extend_from_slice(&[0xAB; 16]);
    let map = scan_segments(&infected).unwrap();
    let span = map.trailing_payload.unwrap();
    assert_eq!(span, Span::new(clean.len(), 16));
    assert_eq!(extract_trailing_payload(&map, &infected).unwrap(), vec![0xAB; 16]);
}

#[test]
fn megabyte_payload_is_carved() {
    let clean = encoded_sample(2);
    let mut rng = SplitMix64::new(77);
    let mut payload = vec![0u8; 1 << 20];
    rng.fill(&mut payload);
    let mut infected = clean.clone();
    infected.extend_from_slice(&payload);
    let map = scan_segments(&infected).unwrap();
    assert_eq!(extract_trailing_payload(&map, &infected).unwrap(), payload);
}

#[test]
fn php_snippet_after_eoi() {
    let clean = encoded_sample(3);
    let mut infected = clean;
    infected.extend_from_slice(b"<?php evil ?>");
    let map = scan_segments(&infected).unwrap();
    assert_eq!(extract_trailing_payload(&map, &infected).unwrap(), b"<?php evil ?>");
}

#[test]
fn own_encoder_output_is_quiet() {
    for seed in [4u64, 5, 6] {
        let bytes = encoded_sample(seed);
        let map = scan_segments(&bytes).unwrap();
        assert!(map.trailing_payload.is_none());
        assert!(extract_trailing_payload(&map, &bytes).is_none());
        assert!(extract_metadata_strings(&map, &bytes).is_empty());
        assert!(validate(&map).is_valid());
    }
}

#[test]
fn com_segment_payload_is_reported() {
    let infected = splice_after_soi(&encoded_sample(7), &com_segment(b"hello"));
    let map = scan_segments(&infected).unwrap();
    let strings = extract_metadata_strings(&map, &infected);
    assert_eq!(strings.len(), 1);
    assert_eq!(strings[0].source, MetadataSource::ComSegment);
    assert_eq!(strings[0].value, b"hello");
}

#[test]
fn exif_artist_script_string_is_reported() {
    let app1 = exif_app1_segment(&[(0x013B, b"<script>x</script>"), (0x010E, b"desc")]);
    let infected = splice_after_soi(&encoded_sample(8), &app1);
    let map = scan_segments(&infected).unwrap();
    let strings = extract_metadata_strings(&map, &infected);
    let artist = strings
        .iter()
        .find(|s| s.tag_name == "Artist")
        .expect("Artist tag extracted");
    assert_eq!(artist.source, MetadataSource::ExifTag);
    assert_eq!(artist.value, b"<script>x</script>");
    let desc = strings.iter().find(|s| s.tag_name == "ImageDescription").unwrap();
    assert_eq!(desc.value, b"desc");
}

#[test]
fn short_inline_exif_value_is_reported() {
    let app1 = exif_app1_segment(&[(0x0131, b"vi")]);
    let infected = splice_after_soi(&encoded_sample(9), &app1);
    let map = scan_segments(&infected).unwrap();
    let strings = extract_metadata_strings(&map, &infected);
    let software = strings.iter().find(|s| s.tag_name == "Software").unwrap();
    assert_eq!(software.value, b"vi");
}

#[test]
fn malformed_tiff_degrades_to_raw_app1() {
    let mut app1 = vec![0xFF, 0xE1, 0x00, 0x0C];
    app1.extend_from_slice(b"Exif\0\0");
    app1.extend_from_slice(b"XXXX"); // not a TIFF header
    let infected = splice_after_soi(&encoded_sample(10), &app1);
    let map = scan_segments(&infected).unwrap();
    let strings = extract_metadata_strings(&map, &infected);
    assert_eq!(strings.len(), 1);
    assert_eq!(strings[0].source, MetadataSource::AppnRaw);
    assert_eq!(strings[0].tag_name, "APP1");
}

#[test]
fn unknown_appn_is_reported_raw() {
    let mut app13 = vec![0xFF, 0xED, 0x00, 0x08];
    app13.extend_from_slice(b"8BIM\x04\x04");
    let infected = splice_after_soi(&encoded_sample(11), &app13);
    let map = scan_segments(&infected).unwrap();
    let strings = extract_metadata_strings(&map, &infected);
    assert_eq!(strings.len(), 1);
    assert_eq!(strings[0].tag_name, "APP13");
}

#[test]
fn attribution_sums_to_file_length() {
    for seed in 12..18u64 {
        let r = noise_raster(40 + seed as u32 * 7, 33, seed);
        let params = EncodeParams {
            quality: 80,
            subsampling: if seed % 2 == 0 { Subsampling::S420 } else { Subsampling::S444 },
            restart_interval: if seed % 3 == 0 { 4 } else { 0 },
        };
        let bytes = jpeg_encode(&r, &params);
        let map = scan_segments(&bytes).unwrap();
        assert_eq!(map.attributed_bytes(), bytes.len(), "seed {seed}");

        // Still true with a trailing payload present.
        let mut with_payload = bytes.clone();
        with_payload.extend_from_slice(b"tail");
        let map2 = scan_segments(&with_payload).unwrap();
        assert_eq!(map2.attributed_bytes(), with_payload.len());
    }
}

#[test]
fn stuffed_byte_insertion_keeps_segment_list() {
    let bytes = encoded_sample(20);
    let map = scan_segments(&bytes).unwrap();
    let kinds: Vec<_> = map.segments.iter().map(|s| s.marker.kind).collect();
    let entropy = map.entropy_spans[0];

    let mut rng = SplitMix64::new(21);
    for _ in 0..20 {
        let at = entropy.offset + 1 + rng.next_below(entropy.length as u64 - 2) as usize;
        // Splitting an existing 0xFF 0x00 pair would corrupt it; step past.
        let at = if bytes[at - 1] == 0xFF { at + 1 } else { at };
        let mut mutated = bytes.clone();
        mutated.splice(at..at, [0xFF, 0x00]);
        let map2 = scan_segments(&mutated).expect("still scans");
        let kinds2: Vec<_> = map2.segments.iter().map(|s| s.marker.kind).collect();
        assert_eq!(kinds, kinds2);
        assert_eq!(map2.attributed_bytes(), mutated.len());
    }
}

#[test]
fn carving_is_sound_for_arbitrary_payloads() {
    let clean = encoded_sample(22);
    let mut rng = SplitMix64::new(23);
    for _ in 0..50 {
        let len = rng.next_range(1, 4096) as usize;
        let mut payload = vec![0u8; len];
        rng.fill(&mut payload);
        let mut combined = clean.clone();
        combined.extend_from_slice(&payload);
        let map = scan_segments(&combined).unwrap();
        assert_eq!(extract_trailing_payload(&map, &combined).unwrap(), payload);
    }
}

#[test]
fn second_jpeg_stream_is_all_payload() {
    let a = encoded_sample(24);
    let b = encoded_sample(25);
    let mut polyglot = a.clone();
    polyglot.extend_from_slice(&b);
    let map = scan_segments(&polyglot).unwrap();
    let payload = extract_trailing_payload(&map, &polyglot).unwrap();
    assert_eq!(payload, b);
}

#[test]
fn truncated_file_is_malformed() {
    let bytes = encoded_sample(26);
    for cut in [3usize, 10, bytes.len() / 2, bytes.len() - 1] {
        assert!(scan_segments(&bytes[..cut]).is_err(), "cut at {cut}");
    }
}
