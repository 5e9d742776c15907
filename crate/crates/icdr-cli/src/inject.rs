//! Threat injection for building the infected test corpus: appended
//! payloads, EXIF script strings, COM scripts. These are the structural
//! attack vectors the disarm pipeline must strip.

pub const TAG_IMAGE_DESCRIPTION: u16 = 0x010E;
pub const TAG_SOFTWARE: u16 = 0x0131;
pub const TAG_ARTIST: u16 = 0x013B;
pub const TAG_COPYRIGHT: u16 = 0x8298;

/// Marker tokens the acceptance harness greps for after disarming. The
/// payload token is short enough to fit the 16-byte minimum payload.
pub const PAYLOAD_TOKEN: &[u8] = b"EVILPAY7f3c";
pub const EXIF_TOKEN: &[u8] = b"EVIL_EXIF_51b0d4";
pub const COM_TOKEN: &[u8] = b"EVIL_COM_e28c17";

/// A dropper-style payload of exactly `size` bytes, starting with the grep
/// token and padded with pseudo-random bytes.
pub fn script_payload(size: usize, filler_seed: u64) -> Vec<u8> {
    let mut payload = Vec::with_capacity(size);
    payload.extend_from_slice(PAYLOAD_TOKEN);
    payload.extend_from_slice(b"<?php system($_GET['cmd']); ?>");
    payload.truncate(size);
    let mut rng = icdr_core::rng::SplitMix64::new(filler_seed);
    while payload.len() < size {
        payload.push(rng.next_u8());
    }
    payload
}

/// Complete APP1 segment bytes: marker, length, "Exif\0\0", little-endian
/// TIFF with ASCII tags in IFD0.
pub fn exif_app1_segment(tags: &[(u16, &[u8])]) -> Vec<u8> {
    let mut tiff = Vec::new();
    tiff.extend_from_slice(b"II");
    tiff.extend_from_slice(&42u16.to_le_bytes());
    tiff.extend_from_slice(&8u32.to_le_bytes());

    let entry_area = 8 + 2 + tags.len() * 12 + 4;
    let mut data_offset = entry_area;
    let mut dir = Vec::new();
    dir.extend_from_slice(&(tags.len() as u16).to_le_bytes());
    let mut data = Vec::new();
    for &(tag, value) in tags {
        let ascii_len = value.len() + 1;
        dir.extend_from_slice(&tag.to_le_bytes());
        dir.extend_from_slice(&2u16.to_le_bytes());
        dir.extend_from_slice(&(ascii_len as u32).to_le_bytes());
        if ascii_len <= 4 {
            let mut inline = [0u8; 4];
            inline[..value.len()].copy_from_slice(value);
            dir.extend_from_slice(&inline);
        } else {
            dir.extend_from_slice(&(data_offset as u32).to_le_bytes());
            data.extend_from_slice(value);
            data.push(0);
            data_offset += ascii_len;
        }
    }
    dir.extend_from_slice(&0u32.to_le_bytes());
    tiff.extend_from_slice(&dir);
    tiff.extend_from_slice(&data);

    let mut segment = vec![0xFF, 0xE1];
    segment.extend_from_slice(&((6 + tiff.len() + 2) as u16).to_be_bytes());
    segment.extend_from_slice(b"Exif\0\0");
    segment.extend_from_slice(&tiff);
    segment
}

/// Complete COM segment bytes.
pub fn com_segment(text: &[u8]) -> Vec<u8> {
    let mut segment = vec![0xFF, 0xFE];
    segment.extend_from_slice(&((text.len() + 2) as u16).to_be_bytes());
    segment.extend_from_slice(text);
    segment
}

/// Insert a raw segment right after SOI.
pub fn splice_after_soi(jpeg: &[u8], segment: &[u8]) -> Vec<u8> {
    assert!(jpeg.len() >= 2 && jpeg[0] == 0xFF && jpeg[1] == 0xD8, "not a JPEG");
    let mut out = Vec::with_capacity(jpeg.len() + segment.len());
    out.extend_from_slice(&jpeg[..2]);
    out.extend_from_slice(segment);
    out.extend_from_slice(&jpeg[2..]);
    out
}
