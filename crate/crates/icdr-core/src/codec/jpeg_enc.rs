//! Baseline JPEG encoding, from pixels or from quantized coefficients.
//!
//! Output is deliberately minimal: SOI, APP0 (JFIF 1.01, no thumbnail), DQT,
//! SOF0, DHT (standard Annex K tables), optional DRI, SOS, entropy data, EOI
//! — and nothing else. No COM, no EXIF, no bytes after EOI; the encoder is
//! the reconstruction half of the disarm guarantee.

use crate::raster::Raster;

use super::huffman::{BitWriter, HuffEncoder};
use super::tables::{
    scale_quant_table, HuffSpec, BASE_CHROMA_QUANT, BASE_LUMA_QUANT, STD_CHROMA_AC,
    STD_CHROMA_DC, STD_LUMA_AC, STD_LUMA_DC, ZIGZAG_TO_NATURAL,
};
use super::{dct, CoefficientPlanes, ComponentPlane, EncodeParams, Subsampling};

/// Encode an RGB raster as a baseline JFIF JPEG.
pub fn jpeg_encode(raster: &Raster, params: &EncodeParams) -> Vec<u8> {
    let quality = params.quality.clamp(1, 100);
    let luma_q = scale_quant_table(&BASE_LUMA_QUANT, quality);
    let chroma_q = scale_quant_table(&BASE_CHROMA_QUANT, quality);

    let (lh, lv) = match params.subsampling {
        Subsampling::S444 => (1u8, 1u8),
        Subsampling::S420 => (2, 2),
    };
    let (w, h) = (raster.width(), raster.height());
    let chroma_w = w.div_ceil(lh as u32);
    let chroma_h = h.div_ceil(lv as u32);

    // Full-resolution YCbCr planes in f64; chroma is then box-averaged.
    let mut y_plane = vec![0f64; w as usize * h as usize];
    let mut cb_full = vec![0f64; w as usize * h as usize];
    let mut cr_full = vec![0f64; w as usize * h as usize];
    for (i, &[r, g, b]) in raster.pixels().iter().enumerate() {
        let (r, g, b) = (r as f64, g as f64, b as f64);
        y_plane[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb_full[i] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
        cr_full[i] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    }
    let downsample = |full: &[f64]| -> Vec<f64> {
        if lh == 1 && lv == 1 {
            return full.to_vec();
        }
        let mut out = vec![0f64; chroma_w as usize * chroma_h as usize];
        for cy in 0..chroma_h {
            for cx in 0..chroma_w {
                let mut sum = 0.0;
                let mut count = 0.0;
                for dy in 0..lv as u32 {
                    for dx in 0..lh as u32 {
                        let x = cx * lh as u32 + dx;
                        let y = cy * lv as u32 + dy;
                        if x < w && y < h {
                            sum += full[(y * w + x) as usize];
                            count += 1.0;
                        }
                    }
                }
                out[(cy * chroma_w + cx) as usize] = sum / count;
            }
        }
        out
    };
    let cb_plane = downsample(&cb_full);
    let cr_plane = downsample(&cr_full);

    let comps = [
        PlaneRef { id: 1, h: lh, v: lv, tq: 0, w, h_px: h, data: &y_plane },
        PlaneRef { id: 2, h: 1, v: 1, tq: 1, w: chroma_w, h_px: chroma_h, data: &cb_plane },
        PlaneRef { id: 3, h: 1, v: 1, tq: 1, w: chroma_w, h_px: chroma_h, data: &cr_plane },
    ];
    let quants = [Some(luma_q), Some(chroma_q), None, None];

    let blocks: Vec<Vec<[i16; 64]>> = comps
        .iter()
        .map(|c| {
            let q = quants[c.tq as usize].as_ref().unwrap();
            quantize_plane(c, q, lh as u32, lv as u32, w, raster.height())
        })
        .collect();

    let written: Vec<WriteComp> = comps
        .iter()
        .zip(blocks.iter())
        .map(|(c, b)| WriteComp {
            id: c.id,
            h: c.h,
            v: c.v,
            tq: c.tq,
            mcu_blocks_w: mcu_blocks(w, lh as u32, c.h) ,
            mcu_blocks_h: mcu_blocks(raster.height(), lv as u32, c.v),
            blocks: b,
        })
        .collect();

    write_jpeg(
        w,
        raster.height(),
        &written,
        &[(0, luma_q), (1, chroma_q)],
        params.restart_interval,
    )
}

fn mcu_blocks(image_dim: u32, max_factor: u32, factor: u8) -> u32 {
    image_dim.div_ceil(8 * max_factor) * factor as u32
}

struct PlaneRef<'a> {
    id: u8,
    h: u8,
    v: u8,
    tq: u8,
    w: u32,
    h_px: u32,
    data: &'a [f64],
}

fn quantize_plane(
    comp: &PlaneRef,
    q: &[u16; 64],
    h_max: u32,
    v_max: u32,
    image_w: u32,
    image_h: u32,
) -> Vec<[i16; 64]> {
    let blocks_w = mcu_blocks(image_w, h_max, comp.h);
    let blocks_h = mcu_blocks(image_h, v_max, comp.v);
    let mut out = Vec::with_capacity(blocks_w as usize * blocks_h as usize);
    for by in 0..blocks_h {
        for bx in 0..blocks_w {
            let mut spatial = [0f64; 64];
            for y in 0..8u32 {
                for x in 0..8u32 {
                    // Edge samples replicate outward into padding blocks.
                    let sx = (bx * 8 + x).min(comp.w - 1);
                    let sy = (by * 8 + y).min(comp.h_px - 1);
                    spatial[(y * 8 + x) as usize] =
                        comp.data[(sy * comp.w + sx) as usize] - 128.0;
                }
            }
            let freq = dct::forward(&spatial);
            let mut block = [0i16; 64];
            for i in 0..64 {
                block[i] = (freq[i] / q[i] as f64).round() as i16;
            }
            out.push(block);
        }
    }
    out
}

/// Re-emit quantized coefficients without requantization: the decoded
/// coefficients of the output equal `planes` exactly.
pub fn jpeg_encode_coefficients(planes: &CoefficientPlanes) -> Vec<u8> {
    let h_max = planes.components.iter().map(|c| c.h).max().unwrap_or(1) as u32;
    let v_max = planes.components.iter().map(|c| c.v).max().unwrap_or(1) as u32;
    let single = planes.components.len() == 1;

    let padded: Vec<(u32, u32, Vec<[i16; 64]>)> = planes
        .components
        .iter()
        .map(|c| pad_to_mcu_grid(c, planes.width, planes.height, h_max, v_max, single))
        .collect();

    let written: Vec<WriteComp> = planes
        .components
        .iter()
        .zip(padded.iter())
        .map(|(c, (bw, bh, blocks))| WriteComp {
            id: c.id,
            h: c.h,
            v: c.v,
            tq: c.quant_idx,
            mcu_blocks_w: *bw,
            mcu_blocks_h: *bh,
            blocks,
        })
        .collect();

    let quant_list: Vec<(u8, [u16; 64])> = planes
        .quant_tables
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|t| (i as u8, t)))
        .collect();

    write_jpeg(
        planes.width,
        planes.height,
        &written,
        &quant_list,
        planes.restart_interval,
    )
}

/// Expand a ceil-grid component to the MCU-aligned grid the entropy layer
/// needs; padding blocks duplicate the nearest real block.
fn pad_to_mcu_grid(
    c: &ComponentPlane,
    image_w: u32,
    image_h: u32,
    h_max: u32,
    v_max: u32,
    single: bool,
) -> (u32, u32, Vec<[i16; 64]>) {
    let (bw, bh) = if single {
        (c.blocks_w, c.blocks_h)
    } else {
        (
            mcu_blocks(image_w, h_max, c.h),
            mcu_blocks(image_h, v_max, c.v),
        )
    };
    let mut blocks = Vec::with_capacity(bw as usize * bh as usize);
    for by in 0..bh {
        for bx in 0..bw {
            let sx = bx.min(c.blocks_w - 1);
            let sy = by.min(c.blocks_h - 1);
            blocks.push(*c.block(sx, sy));
        }
    }
    (bw, bh, blocks)
}

struct WriteComp<'a> {
    id: u8,
    h: u8,
    v: u8,
    tq: u8,
    mcu_blocks_w: u32,
    mcu_blocks_h: u32,
    blocks: &'a [[i16; 64]],
}

fn write_jpeg(
    width: u32,
    height: u32,
    comps: &[WriteComp],
    quants: &[(u8, [u16; 64])],
    restart_interval: u16,
) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&[0xFF, 0xD8]); // SOI

    // APP0: JFIF 1.01, no units, 1x1 density, no thumbnail.
    write_segment(&mut out, 0xE0, &{
        let mut p = Vec::new();
        p.extend_from_slice(b"JFIF\0");
        p.extend_from_slice(&[1, 1, 0, 0, 1, 0, 1, 0, 0]);
        p
    });

    let mut dqt = Vec::new();
    for (idx, table) in quants {
        let wide = table.iter().any(|&v| v > 255);
        dqt.push(((wide as u8) << 4) | idx);
        for k in 0..64 {
            let v = table[ZIGZAG_TO_NATURAL[k]];
            if wide {
                dqt.extend_from_slice(&v.to_be_bytes());
            } else {
                dqt.push(v as u8);
            }
        }
    }
    write_segment(&mut out, 0xDB, &dqt);

    // SOF0
    let mut sof = vec![8u8];
    sof.extend_from_slice(&(height as u16).to_be_bytes());
    sof.extend_from_slice(&(width as u16).to_be_bytes());
    sof.push(comps.len() as u8);
    for c in comps {
        sof.extend_from_slice(&[c.id, (c.h << 4) | c.v, c.tq]);
    }
    write_segment(&mut out, 0xC0, &sof);

    // DHT: standard tables; chroma tables only when needed.
    let mut dht = Vec::new();
    let push_table = |class: u8, idx: u8, spec: &HuffSpec, dht: &mut Vec<u8>| {
        dht.push((class << 4) | idx);
        dht.extend_from_slice(&spec.bits);
        dht.extend_from_slice(spec.values);
    };
    push_table(0, 0, &STD_LUMA_DC, &mut dht);
    push_table(1, 0, &STD_LUMA_AC, &mut dht);
    if comps.len() > 1 {
        push_table(0, 1, &STD_CHROMA_DC, &mut dht);
        push_table(1, 1, &STD_CHROMA_AC, &mut dht);
    }
    write_segment(&mut out, 0xC4, &dht);

    if restart_interval > 0 {
        write_segment(&mut out, 0xDD, &restart_interval.to_be_bytes());
    }

    // SOS: component c uses table pair 0 for luma, 1 for chroma.
    let mut sos = vec![comps.len() as u8];
    for (i, c) in comps.iter().enumerate() {
        let t = if i == 0 { 0 } else { 1 };
        sos.extend_from_slice(&[c.id, (t << 4) | t]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    write_segment(&mut out, 0xDA, &sos);

    out.extend_from_slice(&encode_scan(comps, restart_interval));
    out.extend_from_slice(&[0xFF, 0xD9]); // EOI
    out
}

fn write_segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.push(0xFF);
    out.push(marker);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn magnitude_category(v: i32) -> u8 {
    (32 - (v.unsigned_abs()).leading_zeros()) as u8
}

fn encode_scan(comps: &[WriteComp], restart_interval: u16) -> Vec<u8> {
    let luma_dc = HuffEncoder::build(&STD_LUMA_DC.bits, STD_LUMA_DC.values);
    let luma_ac = HuffEncoder::build(&STD_LUMA_AC.bits, STD_LUMA_AC.values);
    let chroma_dc = HuffEncoder::build(&STD_CHROMA_DC.bits, STD_CHROMA_DC.values);
    let chroma_ac = HuffEncoder::build(&STD_CHROMA_AC.bits, STD_CHROMA_AC.values);

    let mcus_x = comps[0].mcu_blocks_w / comps[0].h as u32;
    let mcus_y = comps[0].mcu_blocks_h / comps[0].v as u32;
    let total = mcus_x as u64 * mcus_y as u64;

    let mut writer = BitWriter::new();
    let mut preds = vec![0i32; comps.len()];
    let mut rst_index = 0u32;

    for mcu in 0..total {
        if restart_interval > 0 && mcu > 0 && mcu % restart_interval as u64 == 0 {
            writer.write_restart((rst_index & 7) as u8);
            rst_index = rst_index.wrapping_add(1);
            preds.iter_mut().for_each(|p| *p = 0);
        }
        let mx = (mcu % mcus_x as u64) as u32;
        let my = (mcu / mcus_x as u64) as u32;
        for (ci, c) in comps.iter().enumerate() {
            let (dc, ac) = if ci == 0 {
                (&luma_dc, &luma_ac)
            } else {
                (&chroma_dc, &chroma_ac)
            };
            for by in 0..c.v as u32 {
                for bx in 0..c.h as u32 {
                    let gx = mx * c.h as u32 + bx;
                    let gy = my * c.v as u32 + by;
                    let block = &c.blocks[(gy * c.mcu_blocks_w + gx) as usize];
                    encode_block(&mut writer, block, dc, ac, &mut preds[ci]);
                }
            }
        }
    }
    writer.finish()
}

fn encode_block(
    writer: &mut BitWriter,
    block: &[i16; 64],
    dc: &HuffEncoder,
    ac: &HuffEncoder,
    pred: &mut i32,
) {
    // Out-of-contract DC values are clamped to the encodable range rather
    // than emitting an undecodable stream.
    let dc_value = (block[0] as i32).clamp(*pred - 2047, *pred + 2047);
    let diff = dc_value - *pred;
    *pred = dc_value;
    let cat = magnitude_category(diff);
    dc.emit(writer, cat);
    if cat > 0 {
        let bits = if diff < 0 { diff + (1 << cat) - 1 } else { diff };
        writer.write_bits(bits as u32, cat as u32);
    }

    let mut run = 0u32;
    for k in 1..64 {
        // Same guard as for DC: out-of-contract magnitudes clamp to the
        // 8-bit baseline range instead of producing an undecodable stream.
        let v = (block[ZIGZAG_TO_NATURAL[k]] as i32).clamp(-1023, 1023);
        if v == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            ac.emit(writer, 0xF0); // ZRL
            run -= 16;
        }
        let cat = magnitude_category(v);
        ac.emit(writer, ((run as u8) << 4) | cat);
        let bits = if v < 0 { v + (1 << cat) - 1 } else { v };
        writer.write_bits(bits as u32, cat as u32);
        run = 0;
    }
    if run > 0 {
        ac.emit(writer, 0x00); // EOB
    }
}
