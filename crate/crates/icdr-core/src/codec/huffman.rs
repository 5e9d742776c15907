//! Huffman coding for the baseline JPEG entropy layer: canonical table
//! construction, a marker-aware bit reader, and a byte-stuffing bit writer.

use super::JpegError;

fn corrupt(msg: impl Into<String>) -> JpegError {
    JpegError::CorruptStream(msg.into())
}

/// Decoding tables built from a DHT specification (T.81 F.2.2.3).
pub struct HuffDecoder {
    mincode: [i32; 17],
    maxcode: [i32; 17],
    valptr: [usize; 17],
    values: Vec<u8>,
}

impl HuffDecoder {
    pub fn build(bits: &[u8; 16], values: Vec<u8>) -> Result<Self, JpegError> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total == 0 || total > 256 || total != values.len() {
            return Err(corrupt("invalid Huffman table code counts"));
        }
        let mut mincode = [0i32; 17];
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0usize; 17];
        let mut code: i32 = 0;
        let mut k = 0usize;
        for l in 1..=16usize {
            let n = bits[l - 1] as i32;
            if n > 0 {
                valptr[l] = k;
                mincode[l] = code;
                code += n;
                maxcode[l] = code - 1;
                k += n as usize;
            }
            // Code space must not overflow l bits (over-subscribed table).
            if code > (1 << l) {
                return Err(corrupt("over-subscribed Huffman table"));
            }
            code <<= 1;
        }
        Ok(Self { mincode, maxcode, valptr, values })
    }

    pub fn decode(&self, reader: &mut BitReader) -> Result<u8, JpegError> {
        let mut code = 0i32;
        for l in 1..=16usize {
            code = (code << 1) | reader.read_bit()? as i32;
            if code <= self.maxcode[l] {
                let idx = self.valptr[l] + (code - self.mincode[l]) as usize;
                return self
                    .values
                    .get(idx)
                    .copied()
                    .ok_or_else(|| corrupt("Huffman value index out of range"));
            }
        }
        Err(corrupt("Huffman code longer than 16 bits"))
    }
}

/// Canonical (code, length) pairs per symbol, for encoding.
pub struct HuffEncoder {
    codes: [u16; 256],
    sizes: [u8; 256],
}

impl HuffEncoder {
    pub fn build(bits: &[u8; 16], values: &[u8]) -> Self {
        let mut codes = [0u16; 256];
        let mut sizes = [0u8; 256];
        let mut code = 0u16;
        let mut k = 0usize;
        for l in 1..=16usize {
            for _ in 0..bits[l - 1] {
                let sym = values[k] as usize;
                codes[sym] = code;
                sizes[sym] = l as u8;
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Self { codes, sizes }
    }

    pub fn emit(&self, writer: &mut BitWriter, symbol: u8) {
        let size = self.sizes[symbol as usize];
        debug_assert!(size > 0, "symbol 0x{symbol:02X} not present in table");
        writer.write_bits(self.codes[symbol as usize] as u32, size as u32);
    }
}

/// What stopped the bit reader at a 0xFF byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interrupt {
    Restart(u8),
    Marker,
}

/// MSB-first bit reader over entropy-coded data. Handles 0xFF 0x00 byte
/// stuffing, surfaces restart markers, and stops at any other marker.
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bit_buf: u32,
    bit_count: u32,
    interrupt: Option<Interrupt>,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, bit_buf: 0, bit_count: 0, interrupt: None }
    }

    fn load_byte(&mut self) -> Result<(), JpegError> {
        if self.interrupt.is_some() {
            return Err(corrupt("read past segment boundary"));
        }
        loop {
            let Some(&b) = self.data.get(self.pos) else {
                return Err(corrupt("Huffman bit underrun"));
            };
            if b != 0xFF {
                self.pos += 1;
                self.bit_buf = (self.bit_buf << 8) | b as u32;
                self.bit_count += 8;
                return Ok(());
            }
            match self.data.get(self.pos + 1) {
                Some(0x00) => {
                    self.pos += 2;
                    self.bit_buf = (self.bit_buf << 8) | 0xFF;
                    self.bit_count += 8;
                    return Ok(());
                }
                Some(&m) if (0xD0..=0xD7).contains(&m) => {
                    self.interrupt = Some(Interrupt::Restart(m - 0xD0));
                    return Err(corrupt("bit read across restart marker"));
                }
                Some(0xFF) => {
                    // Fill byte; keep scanning.
                    self.pos += 1;
                }
                _ => {
                    self.interrupt = Some(Interrupt::Marker);
                    return Err(corrupt("bit read into a marker"));
                }
            }
        }
    }

    pub fn read_bit(&mut self) -> Result<u8, JpegError> {
        if self.bit_count == 0 {
            self.load_byte()?;
        }
        self.bit_count -= 1;
        Ok(((self.bit_buf >> self.bit_count) & 1) as u8)
    }

    /// Read `n` bits (n <= 16) MSB first.
    pub fn read_bits(&mut self, n: u32) -> Result<u32, JpegError> {
        let mut v = 0u32;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }

    /// Byte-align and consume an expected restart marker.
    pub fn consume_restart(&mut self, expected: u8) -> Result<(), JpegError> {
        // Drop padding bits of the current byte.
        self.bit_buf = 0;
        self.bit_count = 0;
        if self.interrupt.is_none() {
            // We may be sitting right before the marker without having
            // tripped on it yet.
            match self.peek_marker() {
                Some(m) if (0xD0..=0xD7).contains(&m) => {
                    self.interrupt = Some(Interrupt::Restart(m - 0xD0));
                }
                _ => return Err(corrupt("expected restart marker")),
            }
        }
        match self.interrupt {
            Some(Interrupt::Restart(n)) if n == expected => {
                // Skip fill bytes then the two marker bytes.
                while self.data.get(self.pos) == Some(&0xFF)
                    && self.data.get(self.pos + 1) == Some(&0xFF)
                {
                    self.pos += 1;
                }
                self.pos += 2;
                self.interrupt = None;
                Ok(())
            }
            Some(Interrupt::Restart(n)) => {
                Err(corrupt(format!("bad restart sequence: expected RST{expected}, found RST{n}")))
            }
            _ => Err(corrupt("expected restart marker")),
        }
    }

    fn peek_marker(&self) -> Option<u8> {
        let mut p = self.pos;
        while self.data.get(p) == Some(&0xFF) && self.data.get(p + 1) == Some(&0xFF) {
            p += 1;
        }
        if self.data.get(p) == Some(&0xFF) {
            self.data.get(p + 1).copied().filter(|&m| m != 0x00)
        } else {
            None
        }
    }
}

/// MSB-first bit writer with 0xFF 0x00 byte stuffing.
pub struct BitWriter {
    out: Vec<u8>,
    bit_buf: u32,
    bit_count: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self { out: Vec::new(), bit_buf: 0, bit_count: 0 }
    }

    pub fn write_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 16);
        self.bit_buf = (self.bit_buf << n) | (value & ((1u32 << n) - 1));
        self.bit_count += n;
        while self.bit_count >= 8 {
            let byte = ((self.bit_buf >> (self.bit_count - 8)) & 0xFF) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.bit_count -= 8;
        }
    }

    /// Pad to a byte boundary with 1-bits (T.81 convention).
    pub fn align(&mut self) {
        if self.bit_count > 0 {
            let pad = 8 - self.bit_count;
            self.write_bits((1 << pad) - 1, pad);
        }
    }

    /// Byte-align and append a restart marker.
    pub fn write_restart(&mut self, n: u8) {
        self.align();
        self.out.push(0xFF);
        self.out.push(0xD0 + (n & 7));
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.align();
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::tables;

    #[test]
    fn encode_decode_symbols_round_trip() {
        let spec = &tables::STD_LUMA_AC;
        let enc = HuffEncoder::build(&spec.bits, spec.values);
        let dec = HuffDecoder::build(&spec.bits, spec.values.to_vec()).unwrap();
        let mut w = BitWriter::new();
        for &sym in spec.values.iter() {
            enc.emit(&mut w, sym);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for &sym in spec.values.iter() {
            assert_eq!(dec.decode(&mut r).unwrap(), sym);
        }
    }

    #[test]
    fn stuffed_ff_is_transparent() {
        let data = [0xFF, 0x00, 0xAB];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0xFF);
        assert_eq!(r.read_bits(8).unwrap(), 0xAB);
    }

    #[test]
    fn reader_stops_at_marker() {
        let data = [0x12, 0xFF, 0xD9];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0x12);
        assert!(r.read_bit().is_err());
    }

    #[test]
    fn over_subscribed_table_is_rejected() {
        let mut bits = [0u8; 16];
        bits[0] = 3; // three 1-bit codes cannot exist
        assert!(HuffDecoder::build(&bits, vec![0, 1, 2]).is_err());
    }
}
