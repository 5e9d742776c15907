//! DEFLATE decompression (RFC 1951): stored, fixed-Huffman and
//! dynamic-Huffman blocks. Bounded by an expected output size so hostile
//! streams cannot balloon memory.

use super::PngError;

fn malformed(msg: &'static str) -> PngError {
    PngError::Malformed(msg.to_string())
}

const LENGTH_BASE: [u16; 29] = [
    3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15, 17, 19, 23, 27, 31, 35, 43, 51, 59, 67, 83, 99, 115,
    131, 163, 195, 227, 258,
];
const LENGTH_EXTRA: [u8; 29] = [
    0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0,
];
const DIST_BASE: [u16; 30] = [
    1, 2, 3, 4, 5, 7, 9, 13, 17, 25, 33, 49, 65, 97, 129, 193, 257, 385, 513, 769, 1025, 1537,
    2049, 3073, 4097, 6145, 8193, 12289, 16385, 24577,
];
const DIST_EXTRA: [u8; 30] = [
    0, 0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12,
    13, 13,
];
const CODE_LENGTH_ORDER: [usize; 19] = [
    16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15,
];

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bit_buf: u32,
    bit_count: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, bit_buf: 0, bit_count: 0 }
    }

    /// LSB-first bit read.
    fn bits(&mut self, n: u32) -> Result<u32, PngError> {
        while self.bit_count < n {
            let &b = self.data.get(self.pos).ok_or_else(|| malformed("deflate underrun"))?;
            self.pos += 1;
            self.bit_buf |= (b as u32) << self.bit_count;
            self.bit_count += 8;
        }
        let v = self.bit_buf & ((1u32 << n) - 1);
        self.bit_buf >>= n;
        self.bit_count -= n;
        Ok(v)
    }

    fn align_byte(&mut self) {
        self.bit_buf = 0;
        self.bit_count = 0;
    }
}

/// Canonical Huffman decoder over code lengths.
struct Huffman {
    /// count[l] = number of codes of length l.
    count: [u16; 16],
    /// Symbols sorted by (length, symbol).
    symbols: Vec<u16>,
}

impl Huffman {
    fn from_lengths(lengths: &[u8]) -> Result<Self, PngError> {
        let mut count = [0u16; 16];
        for &l in lengths {
            if l > 15 {
                return Err(malformed("code length > 15"));
            }
            count[l as usize] += 1;
        }
        count[0] = 0;
        // Over-subscription check.
        let mut left = 1i32;
        for &n in &count[1..] {
            left <<= 1;
            left -= n as i32;
            if left < 0 {
                return Err(malformed("over-subscribed Huffman code"));
            }
        }
        let mut offs = [0u16; 16];
        for l in 1..15 {
            offs[l + 1] = offs[l] + count[l];
        }
        let mut symbols = vec![0u16; lengths.iter().filter(|&&l| l > 0).count()];
        for (sym, &l) in lengths.iter().enumerate() {
            if l > 0 {
                symbols[offs[l as usize] as usize] = sym as u16;
                offs[l as usize] += 1;
            }
        }
        Ok(Self { count, symbols })
    }

    fn decode(&self, r: &mut BitReader) -> Result<u16, PngError> {
        let mut code = 0i32;
        let mut first = 0i32;
        let mut index = 0i32;
        for l in 1..16 {
            code |= r.bits(1)? as i32;
            let n = self.count[l] as i32;
            if code - first < n {
                return Ok(self.symbols[(index + (code - first)) as usize]);
            }
            index += n;
            first = (first + n) << 1;
            code <<= 1;
        }
        Err(malformed("invalid Huffman code"))
    }
}

fn fixed_literal_lengths() -> Vec<u8> {
    let mut l = vec![8u8; 288];
    l[144..256].iter_mut().for_each(|v| *v = 9);
    l[256..280].iter_mut().for_each(|v| *v = 7);
    l
}

/// Inflate a raw DEFLATE stream. `expected_size` caps the output buffer.
pub fn inflate(data: &[u8], expected_size: usize) -> Result<Vec<u8>, PngError> {
    let mut r = BitReader::new(data);
    let mut out: Vec<u8> = Vec::with_capacity(expected_size.min(1 << 24));
    loop {
        let bfinal = r.bits(1)?;
        let btype = r.bits(2)?;
        match btype {
            0 => {
                r.align_byte();
                let pos = r.pos;
                let header = data.get(pos..pos + 4).ok_or_else(|| malformed("stored header"))?;
                let len = u16::from_le_bytes([header[0], header[1]]) as usize;
                let nlen = u16::from_le_bytes([header[2], header[3]]);
                if nlen != !(len as u16) {
                    return Err(malformed("stored block LEN/NLEN mismatch"));
                }
                let body = data
                    .get(pos + 4..pos + 4 + len)
                    .ok_or_else(|| malformed("stored block truncated"))?;
                if out.len() + len > expected_size {
                    return Err(malformed("output exceeds expected size"));
                }
                out.extend_from_slice(body);
                r.pos = pos + 4 + len;
            }
            1 | 2 => {
                let (lit, dist) = if btype == 1 {
                    (Huffman::from_lengths(&fixed_literal_lengths())?, Huffman::from_lengths(&[5u8; 30])?)
                } else {
                    read_dynamic_tables(&mut r)?
                };
                inflate_block(&mut r, &lit, &dist, &mut out, expected_size)?;
            }
            _ => return Err(malformed("reserved block type")),
        }
        if bfinal == 1 {
            break;
        }
    }
    Ok(out)
}

fn read_dynamic_tables(r: &mut BitReader) -> Result<(Huffman, Huffman), PngError> {
    let hlit = r.bits(5)? as usize + 257;
    let hdist = r.bits(5)? as usize + 1;
    let hclen = r.bits(4)? as usize + 4;
    if hlit > 286 || hdist > 30 {
        return Err(malformed("too many codes"));
    }
    let mut cl_lengths = [0u8; 19];
    for i in 0..hclen {
        cl_lengths[CODE_LENGTH_ORDER[i]] = r.bits(3)? as u8;
    }
    let cl = Huffman::from_lengths(&cl_lengths)?;

    let mut lengths = vec![0u8; hlit + hdist];
    let mut i = 0;
    while i < lengths.len() {
        let sym = cl.decode(r)?;
        match sym {
            0..=15 => {
                lengths[i] = sym as u8;
                i += 1;
            }
            16 => {
                if i == 0 {
                    return Err(malformed("repeat with no previous length"));
                }
                let prev = lengths[i - 1];
                let n = r.bits(2)? as usize + 3;
                if i + n > lengths.len() {
                    return Err(malformed("length repeat overrun"));
                }
                lengths[i..i + n].iter_mut().for_each(|v| *v = prev);
                i += n;
            }
            17 => {
                let n = r.bits(3)? as usize + 3;
                if i + n > lengths.len() {
                    return Err(malformed("zero repeat overrun"));
                }
                i += n;
            }
            18 => {
                let n = r.bits(7)? as usize + 11;
                if i + n > lengths.len() {
                    return Err(malformed("zero repeat overrun"));
                }
                i += n;
            }
            _ => return Err(malformed("bad code-length symbol")),
        }
    }
    let lit = Huffman::from_lengths(&lengths[..hlit])?;
    let dist = Huffman::from_lengths(&lengths[hlit..])?;
    Ok((lit, dist))
}

fn inflate_block(
    r: &mut BitReader,
    lit: &Huffman,
    dist: &Huffman,
    out: &mut Vec<u8>,
    expected_size: usize,
) -> Result<(), PngError> {
    loop {
        let sym = lit.decode(r)?;
        match sym {
            0..=255 => {
                if out.len() >= expected_size {
                    return Err(malformed("output exceeds expected size"));
                }
                out.push(sym as u8);
            }
            256 => return Ok(()),
            257..=285 => {
                let li = sym as usize - 257;
                let len = LENGTH_BASE[li] as usize + r.bits(LENGTH_EXTRA[li] as u32)? as usize;
                let ds = dist.decode(r)? as usize;
                if ds >= 30 {
                    return Err(malformed("bad distance symbol"));
                }
                let d = DIST_BASE[ds] as usize + r.bits(DIST_EXTRA[ds] as u32)? as usize;
                if d > out.len() {
                    return Err(malformed("distance beyond window"));
                }
                if out.len() + len > expected_size {
                    return Err(malformed("output exceeds expected size"));
                }
                let start = out.len() - d;
                for k in 0..len {
                    let b = out[start + k];
                    out.push(b);
                }
            }
            _ => return Err(malformed("bad literal/length symbol")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stored-block stream builder (mirrors what the PNG encoder emits).
    fn stored(data: &[u8]) -> Vec<u8> {
        let mut v = vec![0x01];
        v.extend_from_slice(&(data.len() as u16).to_le_bytes());
        v.extend_from_slice(&(!(data.len() as u16)).to_le_bytes());
        v.extend_from_slice(data);
        v
    }

    #[test]
    fn stored_round_trip() {
        let data = b"hello stored world";
        assert_eq!(inflate(&stored(data), data.len()).unwrap(), data);
    }

    #[test]
    fn stored_nlen_mismatch_rejected() {
        let mut s = stored(b"abc");
        s[3] ^= 0xFF;
        assert!(inflate(&s, 3).is_err());
    }

    #[test]
    fn fixed_huffman_literals() {
        // BFINAL=1, BTYPE=01, then literal 'A' (0x41 -> code 0x71, 8 bits),
        // then end-of-block (7 zero bits). Assembled LSB-first by hand:
        // header bits 1,1,0 then code bits MSB-first of 0x71+0x30 table...
        // Easier to trust the reference: deflate of "A" with fixed codes.
        let stream = [0x73, 0x04, 0x00];
        let out = inflate(&stream, 1).unwrap();
        assert_eq!(out, b"A");
    }
}
