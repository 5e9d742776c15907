//! Minimal TIFF/EXIF reader: IFD0 plus the Exif sub-IFD, ASCII/BYTE/UNDEFINED
//! tags only. Depth is deliberately shallow — the threat strings of interest
//! are textual tag values, not the full EXIF data model.

use super::{MetadataSource, MetadataString};

const TYPE_BYTE: u16 = 1;
const TYPE_ASCII: u16 = 2;
const TYPE_UNDEFINED: u16 = 7;
const TAG_EXIF_IFD_POINTER: u16 = 0x8769;

const MAX_IFD_ENTRIES: usize = 512;

pub(super) struct ExifError;

struct Reader<'a> {
    data: &'a [u8],
    little_endian: bool,
}

impl<'a> Reader<'a> {
    fn u16_at(&self, off: usize) -> Result<u16, ExifError> {
        let b = self.data.get(off..off + 2).ok_or(ExifError)?;
        Ok(if self.little_endian {
            u16::from_le_bytes([b[0], b[1]])
        } else {
            u16::from_be_bytes([b[0], b[1]])
        })
    }

    fn u32_at(&self, off: usize) -> Result<u32, ExifError> {
        let b = self.data.get(off..off + 4).ok_or(ExifError)?;
        Ok(if self.little_endian {
            u32::from_le_bytes([b[0], b[1], b[2], b[3]])
        } else {
            u32::from_be_bytes([b[0], b[1], b[2], b[3]])
        })
    }
}

/// Parse the TIFF structure embedded in an APP1 Exif segment. `base_offset`
/// is the position of the TIFF header in the enclosing file, used to report
/// string offsets.
pub(super) fn parse_exif_strings(
    tiff: &[u8],
    base_offset: usize,
) -> Result<Vec<MetadataString>, ExifError> {
    if tiff.len() < 8 {
        return Err(ExifError);
    }
    let little_endian = match &tiff[0..2] {
        b"II" => true,
        b"MM" => false,
        _ => return Err(ExifError),
    };
    let r = Reader { data: tiff, little_endian };
    if r.u16_at(2)? != 42 {
        return Err(ExifError);
    }
    let ifd0 = r.u32_at(4)? as usize;

    let mut out = Vec::new();
    let exif_ptr = read_ifd(&r, ifd0, base_offset, &mut out)?;
    if let Some(off) = exif_ptr {
        // Errors inside the sub-IFD do not discard what IFD0 yielded.
        let _ = read_ifd(&r, off, base_offset, &mut out);
    }
    Ok(out)
}

/// Read one IFD, appending string tags to `out`. Returns the Exif sub-IFD
/// pointer if the directory carries one.
fn read_ifd(
    r: &Reader,
    ifd_offset: usize,
    base_offset: usize,
    out: &mut Vec<MetadataString>,
) -> Result<Option<usize>, ExifError> {
    let count = r.u16_at(ifd_offset)? as usize;
    if count > MAX_IFD_ENTRIES {
        return Err(ExifError);
    }
    let mut exif_ptr = None;
    for i in 0..count {
        let entry = ifd_offset + 2 + i * 12;
        let tag = r.u16_at(entry)?;
        let ty = r.u16_at(entry + 2)?;
        let value_count = r.u32_at(entry + 4)? as usize;

        if tag == TAG_EXIF_IFD_POINTER {
            exif_ptr = Some(r.u32_at(entry + 8)? as usize);
            continue;
        }
        if !matches!(ty, TYPE_ASCII | TYPE_BYTE | TYPE_UNDEFINED) {
            continue;
        }
        if value_count == 0 || value_count > 65_536 {
            continue;
        }
        let value_offset = if value_count <= 4 {
            entry + 8
        } else {
            r.u32_at(entry + 8)? as usize
        };
        let Some(raw) = r.data.get(value_offset..value_offset + value_count) else {
            continue;
        };
        let mut value = raw.to_vec();
        if ty == TYPE_ASCII {
            while value.last() == Some(&0) {
                value.pop();
            }
        }
        out.push(MetadataString {
            source: MetadataSource::ExifTag,
            tag_name: tag_name(tag),
            value,
            offset: base_offset + value_offset,
        });
    }
    Ok(exif_ptr)
}

fn tag_name(tag: u16) -> String {
    match tag {
        0x010E => "ImageDescription".to_string(),
        0x010F => "Make".to_string(),
        0x0110 => "Model".to_string(),
        0x0131 => "Software".to_string(),
        0x013B => "Artist".to_string(),
        0x8298 => "Copyright".to_string(),
        0x9286 => "UserComment".to_string(),
        0x927C => "MakerNote".to_string(),
        other => format!("Tag0x{other:04X}"),
    }
}
