//! Baseline JPEG decoding: entropy layer to quantized coefficient grids,
//! then optional dequantize + IDCT + upsample + color conversion to RGB.
//!
//! Every branch that hostile bytes can reach returns an error instead of
//! panicking; this decoder sits on the zero-trust boundary.

use crate::jpeg::{self, MarkerKind};
use crate::raster::Raster;

use super::huffman::{BitReader, HuffDecoder};
use super::tables::ZIGZAG_TO_NATURAL;
use super::{dct, CoefficientPlanes, ComponentPlane, JpegError};

fn corrupt(msg: impl Into<String>) -> JpegError {
    JpegError::CorruptStream(msg.into())
}

fn unsupported(msg: impl Into<String>) -> JpegError {
    JpegError::UnsupportedCoding(msg.into())
}

struct FrameComp {
    id: u8,
    h: u8,
    v: u8,
    tq: u8,
}

/// MCU-aligned coefficient grid for one component.
struct Grid {
    blocks_w: u32,
    blocks_h: u32,
    blocks: Vec<[i16; 64]>,
}

pub(super) struct DecodedFrame {
    pub width: u32,
    pub height: u32,
    comps: Vec<FrameComp>,
    grids: Vec<Grid>,
    h_max: u8,
    v_max: u8,
    quant_tables: [Option<[u16; 64]>; 4],
    restart_interval: u16,
}

/// Decode the entropy layer of a baseline JPEG into coefficient grids.
fn parse_and_decode(bytes: &[u8]) -> Result<DecodedFrame, JpegError> {
    let map = jpeg::scan_segments(bytes)
        .map_err(|e| corrupt(format!("structure scan failed: {e}")))?;

    let Some(variant) = map.sof_variant else {
        return Err(corrupt("no frame header"));
    };
    if map.progressive {
        return Err(unsupported("progressive coding"));
    }
    if map.arithmetic {
        return Err(unsupported("arithmetic coding"));
    }
    if variant != 0 {
        return Err(unsupported(format!("SOF{variant} frame")));
    }
    if !matches!(map.component_count, 1 | 3) {
        return Err(unsupported(format!("{} components", map.component_count)));
    }

    let width = map.declared_width;
    let height = map.declared_height; // DNL override already applied
    if width == 0 || height == 0 {
        return Err(corrupt("zero image dimension"));
    }
    if width as u64 * height as u64 > crate::MAX_PIXELS {
        return Err(corrupt("pixel count beyond the validity gate"));
    }

    let mut quant_tables: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: [Option<HuffDecoder>; 4] = [None, None, None, None];
    let mut ac_tables: [Option<HuffDecoder>; 4] = [None, None, None, None];
    let mut restart_interval = 0u16;
    let mut comps: Vec<FrameComp> = Vec::new();

    // (entropy start, per scan component: (frame comp index, DC sel, AC sel))
    type ScanHeader = (usize, Vec<(usize, u8, u8)>);
    let mut scan: Option<ScanHeader> = None;

    for seg in &map.segments {
        let payload = seg.payload_span.slice(bytes);
        match seg.marker.kind {
            MarkerKind::Dqt => parse_dqt(payload, &mut quant_tables)?,
            MarkerKind::Dht => parse_dht(payload, &mut dc_tables, &mut ac_tables)?,
            MarkerKind::Dri => {
                if payload.len() < 2 {
                    return Err(corrupt("DRI payload too short"));
                }
                restart_interval = u16::from_be_bytes([payload[0], payload[1]]);
            }
            MarkerKind::Sof(0) if comps.is_empty() => {
                let precision = payload[0];
                if precision != 8 {
                    return Err(unsupported(format!("{precision}-bit precision")));
                }
                let n = payload[5] as usize;
                for i in 0..n {
                    let p = &payload[6 + 3 * i..6 + 3 * i + 3];
                    let (h, v) = (p[1] >> 4, p[1] & 0xF);
                    let tq = p[2];
                    if !(1..=2).contains(&h) || !(1..=2).contains(&v) {
                        return Err(unsupported(format!("sampling factors {h}x{v}")));
                    }
                    if tq > 3 {
                        return Err(corrupt("quantization table selector > 3"));
                    }
                    comps.push(FrameComp { id: p[0], h, v, tq });
                }
            }
            MarkerKind::Sof(_) => {
                return Err(corrupt("multiple frame headers"));
            }
            MarkerKind::Sos => {
                if comps.is_empty() {
                    return Err(corrupt("scan before frame header"));
                }
                if scan.is_some() {
                    return Err(unsupported("multiple scans"));
                }
                let sel = parse_sos(payload, &comps)?;
                scan = Some((seg.payload_span.end(), sel));
            }
            _ => {}
        }
    }

    let Some((entropy_start, scan_comps)) = scan else {
        return Err(corrupt("no scan in image stream"));
    };
    let entropy_end = map
        .segments
        .iter()
        .filter(|s| s.marker.offset >= entropy_start)
        .find(|s| !matches!(s.marker.kind, MarkerKind::Rst(_)))
        .map(|s| s.marker.offset)
        .unwrap_or(map.source_len);

    // Single-component scans are non-interleaved: the MCU is one block and
    // sampling factors do not apply.
    let single = comps.len() == 1;
    if single {
        comps[0].h = 1;
        comps[0].v = 1;
    }
    let h_max = comps.iter().map(|c| c.h).max().unwrap();
    let v_max = comps.iter().map(|c| c.v).max().unwrap();
    let mcus_x = width.div_ceil(8 * h_max as u32);
    let mcus_y = height.div_ceil(8 * v_max as u32);

    let mut grids: Vec<Grid> = comps
        .iter()
        .map(|c| {
            let blocks_w = mcus_x * c.h as u32;
            let blocks_h = mcus_y * c.v as u32;
            Grid {
                blocks_w,
                blocks_h,
                blocks: vec![[0i16; 64]; blocks_w as usize * blocks_h as usize],
            }
        })
        .collect();

    // Resolve Huffman tables per scan component up front.
    for &(ci, td, ta) in &scan_comps {
        if dc_tables[td as usize].is_none() || ac_tables[ta as usize].is_none() {
            return Err(corrupt(format!("missing Huffman table for component {ci}")));
        }
    }

    let mut reader = BitReader::new(&bytes[entropy_start..entropy_end]);
    let mut preds = vec![0i32; comps.len()];
    let total_mcus = mcus_x as u64 * mcus_y as u64;
    let mut rst_index = 0u32;

    for mcu in 0..total_mcus {
        if restart_interval > 0 && mcu > 0 && mcu % restart_interval as u64 == 0 {
            reader.consume_restart((rst_index & 7) as u8)?;
            rst_index = rst_index.wrapping_add(1);
            preds.iter_mut().for_each(|p| *p = 0);
        }
        let mx = (mcu % mcus_x as u64) as u32;
        let my = (mcu / mcus_x as u64) as u32;
        for &(ci, td, ta) in &scan_comps {
            let comp = &comps[ci];
            let dc = dc_tables[td as usize].as_ref().unwrap();
            let ac = ac_tables[ta as usize].as_ref().unwrap();
            for by in 0..comp.v as u32 {
                for bx in 0..comp.h as u32 {
                    let block = decode_block(&mut reader, dc, ac, &mut preds[ci])?;
                    let gx = mx * comp.h as u32 + bx;
                    let gy = my * comp.v as u32 + by;
                    let grid = &mut grids[ci];
                    grid.blocks[(gy * grid.blocks_w + gx) as usize] = block;
                }
            }
        }
    }

    Ok(DecodedFrame {
        width,
        height,
        comps,
        grids,
        h_max,
        v_max,
        quant_tables,
        restart_interval,
    })
}

fn parse_dqt(payload: &[u8], tables: &mut [Option<[u16; 64]>; 4]) -> Result<(), JpegError> {
    let mut pos = 0usize;
    while pos < payload.len() {
        let pq_tq = payload[pos];
        let pq = pq_tq >> 4;
        let tq = (pq_tq & 0xF) as usize;
        if tq > 3 || pq > 1 {
            return Err(corrupt("bad DQT precision/selector"));
        }
        pos += 1;
        let entry_len = if pq == 0 { 1 } else { 2 };
        if pos + 64 * entry_len > payload.len() {
            return Err(corrupt("DQT payload truncated"));
        }
        let mut table = [0u16; 64];
        for k in 0..64 {
            let value = if pq == 0 {
                payload[pos + k] as u16
            } else {
                u16::from_be_bytes([payload[pos + 2 * k], payload[pos + 2 * k + 1]])
            };
            table[ZIGZAG_TO_NATURAL[k]] = value;
        }
        pos += 64 * entry_len;
        tables[tq] = Some(table);
    }
    Ok(())
}

fn parse_dht(
    payload: &[u8],
    dc: &mut [Option<HuffDecoder>; 4],
    ac: &mut [Option<HuffDecoder>; 4],
) -> Result<(), JpegError> {
    let mut pos = 0usize;
    while pos < payload.len() {
        if pos + 17 > payload.len() {
            return Err(corrupt("DHT payload truncated"));
        }
        let tc_th = payload[pos];
        let tc = tc_th >> 4;
        let th = (tc_th & 0xF) as usize;
        if tc > 1 || th > 3 {
            return Err(corrupt("bad DHT class/selector"));
        }
        let mut bits = [0u8; 16];
        bits.copy_from_slice(&payload[pos + 1..pos + 17]);
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if pos + 17 + total > payload.len() {
            return Err(corrupt("DHT values truncated"));
        }
        let values = payload[pos + 17..pos + 17 + total].to_vec();
        let table = HuffDecoder::build(&bits, values)?;
        if tc == 0 {
            dc[th] = Some(table);
        } else {
            ac[th] = Some(table);
        }
        pos += 17 + total;
    }
    Ok(())
}

/// Parse the scan header; returns (component index, DC selector, AC selector)
/// per scan component. Only full-frame baseline scans are supported.
fn parse_sos(payload: &[u8], comps: &[FrameComp]) -> Result<Vec<(usize, u8, u8)>, JpegError> {
    if payload.is_empty() {
        return Err(corrupt("empty SOS payload"));
    }
    let ns = payload[0] as usize;
    if ns != comps.len() {
        return Err(unsupported("partial (multi-scan) image"));
    }
    if payload.len() < 1 + 2 * ns + 3 {
        return Err(corrupt("SOS payload truncated"));
    }
    let mut sel = Vec::with_capacity(ns);
    for i in 0..ns {
        let cs = payload[1 + 2 * i];
        let td_ta = payload[2 + 2 * i];
        let (td, ta) = (td_ta >> 4, td_ta & 0xF);
        if td > 3 || ta > 3 {
            return Err(corrupt("bad entropy table selector"));
        }
        let ci = comps
            .iter()
            .position(|c| c.id == cs)
            .ok_or_else(|| corrupt(format!("scan references unknown component {cs}")))?;
        sel.push((ci, td, ta));
    }
    let tail = &payload[1 + 2 * ns..];
    let (ss, se, ah_al) = (tail[0], tail[1], tail[2]);
    if ss != 0 || se != 63 || ah_al != 0 {
        return Err(unsupported("spectral selection / successive approximation"));
    }
    Ok(sel)
}

fn extend(value: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    if (value as i32) < (1 << (size - 1)) {
        value as i32 - (1 << size) + 1
    } else {
        value as i32
    }
}

fn decode_block(
    reader: &mut BitReader,
    dc: &HuffDecoder,
    ac: &HuffDecoder,
    pred: &mut i32,
) -> Result<[i16; 64], JpegError> {
    let mut block = [0i16; 64];

    let t = dc.decode(reader)?;
    if t > 11 {
        return Err(corrupt("DC magnitude category beyond 8-bit baseline"));
    }
    let diff = extend(reader.read_bits(t as u32)?, t);
    *pred += diff;
    if !(-2048..=2047).contains(pred) {
        return Err(corrupt("DC prediction out of range"));
    }
    block[0] = *pred as i16;

    let mut k = 1usize;
    while k < 64 {
        let rs = ac.decode(reader)?;
        let r = (rs >> 4) as usize;
        let s = rs & 0xF;
        if s == 0 {
            if r == 15 {
                k += 16; // ZRL
                if k > 64 {
                    return Err(corrupt("ZRL overruns block"));
                }
                continue;
            }
            break; // EOB
        }
        if s > 10 {
            return Err(corrupt("AC magnitude category beyond 8-bit baseline"));
        }
        k += r;
        if k > 63 {
            return Err(corrupt("AC run overruns block"));
        }
        let value = extend(reader.read_bits(s as u32)?, s);
        block[ZIGZAG_TO_NATURAL[k]] = value as i16;
        k += 1;
    }
    Ok(block)
}

#[inline]
fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Decode to pixels. Returns only pixel data: metadata, headers beyond what
/// decoding requires, and trailing bytes are discarded. Grayscale input
/// replicates luma into R=G=B; color uses BT.601 full-range conversion with
/// round-half-away-from-zero and clamping.
pub fn jpeg_decode(bytes: &[u8]) -> Result<Raster, JpegError> {
    let frame = parse_and_decode(bytes)?;
    let samples: Vec<Plane> = frame
        .comps
        .iter()
        .zip(frame.grids.iter())
        .map(|(c, g)| reconstruct_plane(c, g, &frame.quant_tables))
        .collect::<Result<_, _>>()?;

    let (w, h) = (frame.width, frame.height);
    let mut pixels = Vec::with_capacity(w as usize * h as usize);
    if frame.comps.len() == 1 {
        let y_plane = &samples[0];
        for y in 0..h {
            for x in 0..w {
                let l = y_plane.at(x, y);
                pixels.push([l, l, l]);
            }
        }
    } else {
        let (hm, vm) = (frame.h_max as u32, frame.v_max as u32);
        for y in 0..h {
            for x in 0..w {
                let s = |ci: usize| {
                    let c = &frame.comps[ci];
                    let sx = x * c.h as u32 / hm;
                    let sy = y * c.v as u32 / vm;
                    samples[ci].at(sx, sy)
                };
                pixels.push(ycbcr_to_rgb(s(0), s(1), s(2)));
            }
        }
    }
    Ok(Raster::from_pixels(w, h, pixels))
}

struct Plane {
    stride: usize,
    data: Vec<u8>,
}

impl Plane {
    #[inline]
    fn at(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.stride + x as usize]
    }
}

fn reconstruct_plane(
    comp: &FrameComp,
    grid: &Grid,
    quant_tables: &[Option<[u16; 64]>; 4],
) -> Result<Plane, JpegError> {
    let q = quant_tables[comp.tq as usize]
        .ok_or_else(|| corrupt(format!("missing quantization table {}", comp.tq)))?;
    let stride = grid.blocks_w as usize * 8;
    let mut data = vec![0u8; stride * grid.blocks_h as usize * 8];
    for by in 0..grid.blocks_h {
        for bx in 0..grid.blocks_w {
            let block = &grid.blocks[(by * grid.blocks_w + bx) as usize];
            let mut freq = [0f64; 64];
            for i in 0..64 {
                freq[i] = block[i] as i32 as f64 * q[i] as f64;
            }
            let spatial = dct::inverse(&freq);
            for y in 0..8usize {
                let row = (by as usize * 8 + y) * stride + bx as usize * 8;
                for x in 0..8usize {
                    data[row + x] = clamp_u8(spatial[y * 8 + x] + 128.0);
                }
            }
        }
    }
    Ok(Plane { stride, data })
}

#[inline]
fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8) -> [u8; 3] {
    let y = y as f64;
    let cb = cb as f64 - 128.0;
    let cr = cr as f64 - 128.0;
    [
        clamp_u8(y + 1.402 * cr),
        clamp_u8(y - 0.344136 * cb - 0.714136 * cr),
        clamp_u8(y + 1.772 * cb),
    ]
}

/// Decode only the entropy layer, preserving quantized coefficients exactly.
/// Grids are cropped to `ceil(component_dim / 8)`; MCU padding blocks are
/// dropped (the encoder re-synthesizes them deterministically).
pub fn jpeg_decode_coefficients(bytes: &[u8]) -> Result<CoefficientPlanes, JpegError> {
    let frame = parse_and_decode(bytes)?;
    let (hm, vm) = (frame.h_max as u32, frame.v_max as u32);
    let components = frame
        .comps
        .iter()
        .zip(frame.grids.iter())
        .map(|(c, g)| {
            let comp_w = (frame.width * c.h as u32).div_ceil(hm);
            let comp_h = (frame.height * c.v as u32).div_ceil(vm);
            let blocks_w = comp_w.div_ceil(8);
            let blocks_h = comp_h.div_ceil(8);
            let mut blocks = Vec::with_capacity(blocks_w as usize * blocks_h as usize);
            for by in 0..blocks_h {
                for bx in 0..blocks_w {
                    blocks.push(g.blocks[(by * g.blocks_w + bx) as usize]);
                }
            }
            ComponentPlane {
                id: c.id,
                h: c.h,
                v: c.v,
                quant_idx: c.tq,
                width: comp_w,
                height: comp_h,
                blocks_w,
                blocks_h,
                blocks,
            }
        })
        .collect();
    Ok(CoefficientPlanes {
        width: frame.width,
        height: frame.height,
        components,
        quant_tables: frame.quant_tables,
        restart_interval: frame.restart_interval,
    })
}
