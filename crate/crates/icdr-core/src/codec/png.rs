//! Minimal PNG codec (RFC 2083 subset).
//!
//! The encoder emits 8-bit truecolor, non-interlaced, filter type 0 per
//! scanline, with stored (uncompressed) DEFLATE blocks — the intermediate
//! exists for format-boundary hygiene, not compression. The decoder
//! additionally accepts fixed- and dynamic-Huffman streams, filter types
//! 0-4, and grayscale/RGBA color at 8-bit depth.

use crate::raster::Raster;

use super::inflate::inflate;
use super::PngError;

const SIGNATURE: [u8; 8] = [0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A];
const MAX_STORED_BLOCK: usize = 65_535;

fn crc_table() -> &'static [u32; 256] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[u32; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0u32; 256];
        for (n, entry) in table.iter_mut().enumerate() {
            let mut c = n as u32;
            for _ in 0..8 {
                c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            }
            *entry = c;
        }
        table
    })
}

pub fn crc32(data: &[u8]) -> u32 {
    let table = crc_table();
    let mut c = 0xFFFF_FFFFu32;
    for &b in data {
        c = table[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

pub fn adler32(data: &[u8]) -> u32 {
    const MOD: u32 = 65_521;
    let mut a = 1u32;
    let mut b = 0u32;
    for chunk in data.chunks(5552) {
        for &byte in chunk {
            a += byte as u32;
            b += a;
        }
        a %= MOD;
        b %= MOD;
    }
    (b << 16) | a
}

fn write_chunk(out: &mut Vec<u8>, tag: &[u8; 4], payload: &[u8]) {
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    let start = out.len();
    out.extend_from_slice(tag);
    out.extend_from_slice(payload);
    let crc = crc32(&out[start..]);
    out.extend_from_slice(&crc.to_be_bytes());
}

/// Encode as a lossless 8-bit RGB PNG. Bit-exact round trip with
/// [`png_decode`] for every raster.
pub fn png_encode(raster: &Raster) -> Vec<u8> {
    let (w, h) = (raster.width(), raster.height());

    // Raw scanline stream: filter byte 0 + RGB triples.
    let mut raw = Vec::with_capacity(h as usize * (1 + w as usize * 3));
    for y in 0..h {
        raw.push(0u8);
        for x in 0..w {
            raw.extend_from_slice(&raster.get(x, y));
        }
    }

    // zlib wrapper with stored DEFLATE blocks.
    let mut z = Vec::with_capacity(raw.len() + raw.len() / MAX_STORED_BLOCK * 5 + 16);
    z.extend_from_slice(&[0x78, 0x01]);
    let mut chunks = raw.chunks(MAX_STORED_BLOCK).peekable();
    if raw.is_empty() {
        z.extend_from_slice(&[0x01, 0x00, 0x00, 0xFF, 0xFF]);
    }
    while let Some(block) = chunks.next() {
        let last = chunks.peek().is_none();
        z.push(last as u8);
        z.extend_from_slice(&(block.len() as u16).to_le_bytes());
        z.extend_from_slice(&(!(block.len() as u16)).to_le_bytes());
        z.extend_from_slice(block);
    }
    z.extend_from_slice(&adler32(&raw).to_be_bytes());

    let mut out = Vec::with_capacity(z.len() + 64);
    out.extend_from_slice(&SIGNATURE);
    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&w.to_be_bytes());
    ihdr.extend_from_slice(&h.to_be_bytes());
    ihdr.extend_from_slice(&[8, 2, 0, 0, 0]); // depth 8, truecolor, deflate, adaptive, no interlace
    write_chunk(&mut out, b"IHDR", &ihdr);
    write_chunk(&mut out, b"IDAT", &z);
    write_chunk(&mut out, b"IEND", &[]);
    out
}

/// Decode an 8-bit grayscale/RGB/RGBA, non-interlaced PNG to an RGB raster.
pub fn png_decode(bytes: &[u8]) -> Result<Raster, PngError> {
    if bytes.len() < 8 || bytes[..8] != SIGNATURE {
        return Err(PngError::BadSignature);
    }
    let mut pos = 8usize;
    let mut header: Option<(u32, u32, u8, u8)> = None; // w, h, depth, color type
    let mut idat = Vec::new();
    let mut seen_iend = false;

    while pos < bytes.len() {
        let len_bytes = bytes
            .get(pos..pos + 8)
            .ok_or_else(|| PngError::Malformed("truncated chunk header".into()))?;
        let len = u32::from_be_bytes([len_bytes[0], len_bytes[1], len_bytes[2], len_bytes[3]])
            as usize;
        let tag: [u8; 4] = [len_bytes[4], len_bytes[5], len_bytes[6], len_bytes[7]];
        let payload = bytes
            .get(pos + 8..pos + 8 + len)
            .ok_or_else(|| PngError::Malformed("truncated chunk payload".into()))?;
        let crc_bytes = bytes
            .get(pos + 8 + len..pos + 12 + len)
            .ok_or_else(|| PngError::Malformed("truncated chunk crc".into()))?;
        let declared = u32::from_be_bytes([crc_bytes[0], crc_bytes[1], crc_bytes[2], crc_bytes[3]]);
        if crc32(&bytes[pos + 4..pos + 8 + len]) != declared {
            return Err(PngError::BadChecksum("CRC32"));
        }
        pos += 12 + len;

        match &tag {
            b"IHDR" => {
                if payload.len() != 13 {
                    return Err(PngError::Malformed("IHDR length".into()));
                }
                let w = u32::from_be_bytes([payload[0], payload[1], payload[2], payload[3]]);
                let h = u32::from_be_bytes([payload[4], payload[5], payload[6], payload[7]]);
                let depth = payload[8];
                let color = payload[9];
                if payload[12] != 0 {
                    return Err(PngError::UnsupportedPng("interlaced".into()));
                }
                if depth != 8 {
                    return Err(PngError::UnsupportedPng(format!("bit depth {depth}")));
                }
                match color {
                    0 | 2 | 6 => {}
                    3 => return Err(PngError::UnsupportedPng("palette".into())),
                    other => {
                        return Err(PngError::UnsupportedPng(format!("color type {other}")))
                    }
                }
                if payload[10] != 0 || payload[11] != 0 {
                    return Err(PngError::UnsupportedPng("compression/filter method".into()));
                }
                header = Some((w, h, depth, color));
            }
            b"IDAT" => idat.extend_from_slice(payload),
            b"IEND" => {
                seen_iend = true;
                break;
            }
            _ => {} // ancillary chunks are ignored
        }
    }

    let Some((w, h, _depth, color)) = header else {
        return Err(PngError::Malformed("missing IHDR".into()));
    };
    if !seen_iend {
        return Err(PngError::Malformed("missing IEND".into()));
    }
    if w == 0 || h == 0 {
        return Err(PngError::Malformed("zero dimension".into()));
    }
    if w as u64 * h as u64 > crate::MAX_PIXELS {
        return Err(PngError::Malformed("pixel count beyond the validity gate".into()));
    }

    // zlib header + raw deflate + adler
    if idat.len() < 6 {
        return Err(PngError::Malformed("IDAT too short".into()));
    }
    let cmf = idat[0];
    let flg = idat[1];
    if cmf & 0x0F != 8 {
        return Err(PngError::UnsupportedPng("non-deflate zlib stream".into()));
    }
    if !(cmf as u16 * 256 + flg as u16).is_multiple_of(31) {
        return Err(PngError::Malformed("zlib header check".into()));
    }
    if flg & 0x20 != 0 {
        return Err(PngError::UnsupportedPng("preset dictionary".into()));
    }

    let channels: usize = match color {
        0 => 1,
        2 => 3,
        _ => 4,
    };
    let stride = w as usize * channels;
    let expected = (stride + 1) * h as usize;
    let raw = inflate(&idat[2..idat.len() - 4], expected)?;
    if raw.len() != expected {
        return Err(PngError::Malformed("decompressed size mismatch".into()));
    }
    let declared_adler = u32::from_be_bytes([
        idat[idat.len() - 4],
        idat[idat.len() - 3],
        idat[idat.len() - 2],
        idat[idat.len() - 1],
    ]);
    if adler32(&raw) != declared_adler {
        return Err(PngError::BadChecksum("Adler-32"));
    }

    // Unfilter scanlines in place.
    let mut lines = vec![0u8; stride * h as usize];
    for y in 0..h as usize {
        let filter = raw[y * (stride + 1)];
        let src = &raw[y * (stride + 1) + 1..(y + 1) * (stride + 1)];
        let (done, current) = lines.split_at_mut(y * stride);
        let current = &mut current[..stride];
        current.copy_from_slice(src);
        let prior = if y > 0 { &done[(y - 1) * stride..] } else { &[] as &[u8] };
        unfilter(filter, channels, current, prior)?;
    }

    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h as usize {
        let line = &lines[y * stride..(y + 1) * stride];
        for x in 0..w as usize {
            let p = &line[x * channels..(x + 1) * channels];
            pixels.push(match channels {
                1 => [p[0], p[0], p[0]],
                3 => [p[0], p[1], p[2]],
                _ => [p[0], p[1], p[2]], // alpha dropped
            });
        }
    }
    Ok(Raster::from_pixels(w, h, pixels))
}

fn unfilter(
    filter: u8,
    bpp: usize,
    current: &mut [u8],
    prior: &[u8],
) -> Result<(), PngError> {
    let up = |prior: &[u8], i: usize| -> u8 {
        if prior.is_empty() {
            0
        } else {
            prior[i]
        }
    };
    match filter {
        0 => {}
        1 => {
            for i in bpp..current.len() {
                current[i] = current[i].wrapping_add(current[i - bpp]);
            }
        }
        2 => {
            for (i, value) in current.iter_mut().enumerate() {
                *value = value.wrapping_add(up(prior, i));
            }
        }
        3 => {
            for i in 0..current.len() {
                let left = if i >= bpp { current[i - bpp] as u16 } else { 0 };
                let above = up(prior, i) as u16;
                current[i] = current[i].wrapping_add(((left + above) / 2) as u8);
            }
        }
        4 => {
            for i in 0..current.len() {
                let a = if i >= bpp { current[i - bpp] } else { 0 };
                let b = up(prior, i);
                let c = if i >= bpp { up(prior, i - bpp) } else { 0 };
                current[i] = current[i].wrapping_add(paeth(a, b, c));
            }
        }
        other => return Err(PngError::Malformed(format!("filter type {other}"))),
    }
    Ok(())
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = a as i16 + b as i16 - c as i16;
    let pa = (p - a as i16).abs();
    let pb = (p - b as i16).abs();
    let pc = (p - c as i16).abs();
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}
