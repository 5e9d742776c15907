//! Byte-level JPEG/JFIF structure scanner.
//!
//! Maps a file into segments, entropy-coded spans, padding and trailing
//! payload without decoding any pixels. Every byte of a successfully scanned
//! file is attributed to exactly one span, which is what makes the
//! trailing-payload carve and the cleanliness checks sound.

mod exif;

use serde::Serialize;
use thiserror::Error;

/// A half-open byte range into the source buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub offset: usize,
    pub length: usize,
}

impl Span {
    pub fn new(offset: usize, length: usize) -> Self {
        Self { offset, length }
    }

    pub fn end(&self) -> usize {
        self.offset + self.length
    }

    pub fn slice<'a>(&self, bytes: &'a [u8]) -> &'a [u8] {
        &bytes[self.offset..self.end()]
    }
}

/// Classified marker type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MarkerKind {
    Soi,
    Eoi,
    Sos,
    /// SOF0..SOF15; the payload carries the variant index (0 for baseline).
    Sof(u8),
    /// APP0..APP15.
    App(u8),
    Com,
    Dqt,
    Dht,
    Dri,
    /// RST0..RST7 (standalone, inside entropy data).
    Rst(u8),
    /// Define Number of Lines — honored as a height override.
    Dnl,
    Other(u8),
}

impl MarkerKind {
    fn classify(code: u8) -> MarkerKind {
        match code {
            0xD8 => MarkerKind::Soi,
            0xD9 => MarkerKind::Eoi,
            0xDA => MarkerKind::Sos,
            0xC4 => MarkerKind::Dht,
            0xDB => MarkerKind::Dqt,
            0xDD => MarkerKind::Dri,
            0xDC => MarkerKind::Dnl,
            0xFE => MarkerKind::Com,
            // 0xC8 (JPG extension) and 0xCC (DAC) are not frame headers.
            0xC8 | 0xCC => MarkerKind::Other(code),
            0xC0..=0xCF => MarkerKind::Sof(code - 0xC0),
            0xE0..=0xEF => MarkerKind::App(code - 0xE0),
            0xD0..=0xD7 => MarkerKind::Rst(code - 0xD0),
            other => MarkerKind::Other(other),
        }
    }
}

/// A marker: 0xFF lead byte plus a code byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Marker {
    /// The byte following 0xFF. Never 0x00 and never 0xFF.
    pub code: u8,
    /// Position of the 0xFF lead byte in the source buffer.
    pub offset: usize,
    pub kind: MarkerKind,
}

/// A marker plus, for length-bearing markers, its declared length and payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub marker: Marker,
    /// The 16-bit length field (counts itself, so payload = length - 2).
    /// Absent for standalone markers (SOI/EOI/RSTn/TEM).
    pub declared_length: Option<u16>,
    pub payload_span: Span,
}

impl Segment {
    /// Total bytes this segment accounts for: marker, length field, payload.
    fn attributed_len(&self) -> usize {
        2 + if self.declared_length.is_some() { 2 } else { 0 } + self.payload_span.length
    }
}

/// Parsed byte layout of a JPEG file.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentMap {
    pub segments: Vec<Segment>,
    /// Entropy-coded scan data, split at restart markers.
    pub entropy_spans: Vec<Span>,
    /// 0xFF fill bytes preceding markers.
    pub padding_spans: Vec<Span>,
    /// Bytes after the EOI that terminates the first complete image stream.
    pub trailing_payload: Option<Span>,
    pub declared_width: u32,
    pub declared_height: u32,
    pub component_count: u8,
    pub progressive: bool,
    pub arithmetic: bool,
    /// SOF variant index of the first frame header seen (0 = baseline).
    pub sof_variant: Option<u8>,
    /// Length of the scanned buffer.
    pub source_len: usize,
}

impl SegmentMap {
    fn empty(source_len: usize) -> Self {
        Self {
            segments: Vec::new(),
            entropy_spans: Vec::new(),
            padding_spans: Vec::new(),
            trailing_payload: None,
            declared_width: 0,
            declared_height: 0,
            component_count: 0,
            progressive: false,
            arithmetic: false,
            sof_variant: None,
            source_len,
        }
    }

    /// Pixel count used by the validity gate.
    pub fn pixel_count(&self) -> u64 {
        self.declared_width as u64 * self.declared_height as u64
    }

    /// Sum of every attributed span: segments, entropy, padding, trailing.
    /// Equals `source_len` for any file that scanned without error.
    pub fn attributed_bytes(&self) -> usize {
        let seg: usize = self.segments.iter().map(|s| s.attributed_len()).sum();
        let ent: usize = self.entropy_spans.iter().map(|s| s.length).sum();
        let pad: usize = self.padding_spans.iter().map(|s| s.length).sum();
        let tra = self.trailing_payload.map_or(0, |s| s.length);
        seg + ent + pad + tra
    }

    pub fn count_kind(&self, kind: MarkerKind) -> usize {
        self.segments.iter().filter(|s| s.marker.kind == kind).count()
    }
}

/// Where a metadata string was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetadataSource {
    ExifTag,
    ComSegment,
    AppnRaw,
}

/// A textual (or raw) metadata value carried outside the pixel data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetadataString {
    pub source: MetadataSource,
    /// Tag name ("Artist", "ImageDescription", ...) or segment label ("COM", "APP13").
    pub tag_name: String,
    pub value: Vec<u8>,
    pub offset: usize,
}

/// Reasons a file fails the validity gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptReason {
    PixelCountOutOfRange,
    UnparseableStructure,
    UndecodablePixels,
    UnsupportedCoding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidityStatus {
    Valid,
    Corrupt,
}

/// Gate verdict; `status` is `Corrupt` iff `reasons` is non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidityVerdict {
    pub status: ValidityStatus,
    pub reasons: Vec<CorruptReason>,
}

impl ValidityVerdict {
    pub fn valid() -> Self {
        Self { status: ValidityStatus::Valid, reasons: Vec::new() }
    }

    pub fn corrupt(reasons: Vec<CorruptReason>) -> Self {
        debug_assert!(!reasons.is_empty());
        Self { status: ValidityStatus::Corrupt, reasons }
    }

    pub fn from_reasons(reasons: Vec<CorruptReason>) -> Self {
        if reasons.is_empty() {
            Self::valid()
        } else {
            Self::corrupt(reasons)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == ValidityStatus::Valid
    }
}

#[derive(Debug, Error)]
pub enum StructureError {
    /// The partial map scanned so far rides along for forensics.
    #[error("malformed JPEG structure at offset {offset}: {detail}")]
    MalformedStructure {
        offset: usize,
        detail: String,
        partial: Box<SegmentMap>,
    },
}

impl StructureError {
    pub fn partial_map(&self) -> &SegmentMap {
        match self {
            StructureError::MalformedStructure { partial, .. } => partial,
        }
    }
}

fn malformed(offset: usize, detail: impl Into<String>, partial: SegmentMap) -> StructureError {
    StructureError::MalformedStructure {
        offset,
        detail: detail.into(),
        partial: Box::new(partial),
    }
}

/// Scan a byte buffer into a [`SegmentMap`].
///
/// The scan stops at the EOI that terminates the first complete image
/// stream; everything after it — including further embedded JPEG streams —
/// is trailing payload. Inside entropy-coded spans, 0xFF 0x00 byte stuffing
/// is never treated as a marker.
pub fn scan_segments(bytes: &[u8]) -> Result<SegmentMap, StructureError> {
    let mut map = SegmentMap::empty(bytes.len());

    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return Err(malformed(0, "no SOI marker at offset 0", map));
    }
    map.segments.push(Segment {
        marker: Marker { code: 0xD8, offset: 0, kind: MarkerKind::Soi },
        declared_length: None,
        payload_span: Span::new(2, 0),
    });

    let mut pos = 2usize;
    loop {
        // Runs of 0xFF before a marker are fill bytes.
        let pad_start = pos;
        while pos + 1 < bytes.len() && bytes[pos] == 0xFF && bytes[pos + 1] == 0xFF {
            pos += 1;
        }
        if pos > pad_start {
            map.padding_spans.push(Span::new(pad_start, pos - pad_start));
        }
        if pos + 1 >= bytes.len() {
            return Err(malformed(pos, "truncated: expected a marker", map));
        }
        if bytes[pos] != 0xFF {
            return Err(malformed(pos, format!("expected 0xFF, found 0x{:02X}", bytes[pos]), map));
        }
        let code = bytes[pos + 1];
        if code == 0x00 {
            return Err(malformed(pos, "stuffed byte outside entropy-coded data", map));
        }
        let kind = MarkerKind::classify(code);
        match kind {
            MarkerKind::Eoi => {
                map.segments.push(Segment {
                    marker: Marker { code, offset: pos, kind },
                    declared_length: None,
                    payload_span: Span::new(pos + 2, 0),
                });
                // First complete image stream ends here; the rest is payload.
                if pos + 2 < bytes.len() {
                    map.trailing_payload = Some(Span::new(pos + 2, bytes.len() - pos - 2));
                }
                return Ok(map);
            }
            MarkerKind::Soi => {
                return Err(malformed(pos, "unexpected SOI inside image stream", map));
            }
            MarkerKind::Rst(_) => {
                return Err(malformed(pos, "restart marker outside entropy-coded data", map));
            }
            MarkerKind::Other(0x01) => {
                // TEM is standalone.
                map.segments.push(Segment {
                    marker: Marker { code, offset: pos, kind },
                    declared_length: None,
                    payload_span: Span::new(pos + 2, 0),
                });
                pos += 2;
            }
            _ => {
                if pos + 4 > bytes.len() {
                    return Err(malformed(pos, "truncated segment length field", map));
                }
                let declared = u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]);
                if declared < 2 {
                    return Err(malformed(pos, format!("segment length {declared} < 2"), map));
                }
                let payload_len = declared as usize - 2;
                let payload_off = pos + 4;
                if payload_off + payload_len > bytes.len() {
                    return Err(malformed(
                        pos,
                        format!("declared length {declared} overruns the buffer"),
                        map,
                    ));
                }
                let payload = Span::new(payload_off, payload_len);
                map.segments.push(Segment {
                    marker: Marker { code, offset: pos, kind },
                    declared_length: Some(declared),
                    payload_span: payload,
                });
                match kind {
                    MarkerKind::Sof(variant) => {
                        if map.sof_variant.is_none() {
                            if payload_len < 6 {
                                return Err(malformed(pos, "SOF payload too short", map));
                            }
                            let p = payload.slice(bytes);
                            let height = u16::from_be_bytes([p[1], p[2]]) as u32;
                            let width = u16::from_be_bytes([p[3], p[4]]) as u32;
                            let ncomp = p[5];
                            if payload_len < 6 + 3 * ncomp as usize {
                                return Err(malformed(pos, "SOF component list truncated", map));
                            }
                            // DNL may override a zero height later.
                            if map.declared_height == 0 {
                                map.declared_height = height;
                            }
                            map.declared_width = width;
                            map.component_count = ncomp;
                            map.sof_variant = Some(variant);
                            map.progressive = matches!(variant, 2 | 6 | 10 | 14);
                            map.arithmetic = matches!(variant, 9..=11 | 13..=15);
                        }
                    }
                    MarkerKind::Dnl => {
                        if payload_len >= 2 {
                            let p = payload.slice(bytes);
                            let lines = u16::from_be_bytes([p[0], p[1]]) as u32;
                            if lines > 0 {
                                // Attacker-controlled fields are read the way
                                // decoders read them: DNL wins.
                                map.declared_height = lines;
                            }
                        }
                    }
                    MarkerKind::Sos => {
                        pos = scan_entropy(bytes, payload.end(), &mut map)?;
                        continue;
                    }
                    _ => {}
                }
                pos = payload.end();
            }
        }
    }
}

/// Walk entropy-coded data starting at `start`; returns the offset of the
/// first real marker after the scan. Restart markers are recorded as
/// standalone segments and split the entropy span.
fn scan_entropy(
    bytes: &[u8],
    start: usize,
    map: &mut SegmentMap,
) -> Result<usize, StructureError> {
    let mut span_start = start;
    let mut pos = start;
    loop {
        if pos >= bytes.len() {
            if pos > span_start {
                map.entropy_spans.push(Span::new(span_start, pos - span_start));
            }
            let partial = map.clone();
            return Err(malformed(pos, "entropy-coded data not terminated by a marker", partial));
        }
        if bytes[pos] != 0xFF {
            pos += 1;
            continue;
        }
        if pos + 1 >= bytes.len() {
            if pos > span_start {
                map.entropy_spans.push(Span::new(span_start, pos - span_start));
            }
            let partial = map.clone();
            return Err(malformed(pos, "dangling 0xFF at end of entropy data", partial));
        }
        let next = bytes[pos + 1];
        match next {
            0x00 => pos += 2, // stuffed 0xFF data byte
            0xFF => {
                // Fill byte before an eventual marker.
                if pos > span_start {
                    map.entropy_spans.push(Span::new(span_start, pos - span_start));
                }
                map.padding_spans.push(Span::new(pos, 1));
                pos += 1;
                span_start = pos;
            }
            0xD0..=0xD7 => {
                if pos > span_start {
                    map.entropy_spans.push(Span::new(span_start, pos - span_start));
                }
                map.segments.push(Segment {
                    marker: Marker {
                        code: next,
                        offset: pos,
                        kind: MarkerKind::Rst(next - 0xD0),
                    },
                    declared_length: None,
                    payload_span: Span::new(pos + 2, 0),
                });
                pos += 2;
                span_start = pos;
            }
            _ => {
                if pos > span_start {
                    map.entropy_spans.push(Span::new(span_start, pos - span_start));
                }
                return Ok(pos);
            }
        }
    }
}

/// Carve the bytes after the final EOI, or `None` when the file ends at EOI.
pub fn extract_trailing_payload(map: &SegmentMap, bytes: &[u8]) -> Option<Vec<u8>> {
    map.trailing_payload.map(|span| span.slice(bytes).to_vec())
}

/// Collect every metadata string: COM payloads, EXIF ASCII tags from APP1,
/// and other APPn payloads verbatim.
///
/// The canonical thumbnail-free JFIF APP0 header is structural, not
/// metadata, and is not reported; anything longer (thumbnails, extensions)
/// is. Malformed TIFF data inside an APP1 degrades to an `AppnRaw` entry
/// rather than aborting the scan.
pub fn extract_metadata_strings(map: &SegmentMap, bytes: &[u8]) -> Vec<MetadataString> {
    let mut out = Vec::new();
    for seg in &map.segments {
        match seg.marker.kind {
            MarkerKind::Com => {
                out.push(MetadataString {
                    source: MetadataSource::ComSegment,
                    tag_name: "COM".to_string(),
                    value: seg.payload_span.slice(bytes).to_vec(),
                    offset: seg.payload_span.offset,
                });
            }
            MarkerKind::App(n) => {
                let payload = seg.payload_span.slice(bytes);
                if n == 0 && is_plain_jfif_header(payload) {
                    continue;
                }
                if n == 1 && payload.starts_with(b"Exif\0\0") {
                    match exif::parse_exif_strings(&payload[6..], seg.payload_span.offset + 6) {
                        Ok(tags) if !tags.is_empty() => {
                            out.extend(tags);
                            continue;
                        }
                        Ok(_) => {
                            // An EXIF block with no string tags carries nothing
                            // of interest; report nothing rather than raw bytes.
                            continue;
                        }
                        Err(_) => {
                            // fall through to raw
                        }
                    }
                }
                out.push(MetadataString {
                    source: MetadataSource::AppnRaw,
                    tag_name: format!("APP{n}"),
                    value: payload.to_vec(),
                    offset: seg.payload_span.offset,
                });
            }
            _ => {}
        }
    }
    out
}

/// The exact APP0 payload a clean re-encode produces: "JFIF\0", any version,
/// no thumbnail.
fn is_plain_jfif_header(payload: &[u8]) -> bool {
    payload.len() == 14
        && payload.starts_with(b"JFIF\0")
        && payload[12] == 0
        && payload[13] == 0
}

/// Apply the validity gate to a scanned map.
///
/// Corrupt when the declared pixel count is outside [1, 30,000,000] or the
/// coding mode is outside the supported pixel-decode subset (progressive or
/// arithmetic coding, non-baseline frame, component count not 1 or 3).
pub fn validate(map: &SegmentMap) -> ValidityVerdict {
    validate_with_limit(map, crate::MAX_PIXELS)
}

/// [`validate`] with a configurable pixel ceiling (the lower bound stays 1).
pub fn validate_with_limit(map: &SegmentMap, max_pixels: u64) -> ValidityVerdict {
    let mut reasons = Vec::new();
    let pixels = map.pixel_count();
    if pixels < 1 || pixels > max_pixels {
        reasons.push(CorruptReason::PixelCountOutOfRange);
    }
    if let Some(variant) = map.sof_variant {
        let unsupported = map.progressive
            || map.arithmetic
            || variant != 0
            || !matches!(map.component_count, 1 | 3);
        if unsupported {
            reasons.push(CorruptReason::UnsupportedCoding);
        }
    }
    ValidityVerdict::from_reasons(reasons)
}
