//! Netpbm bitmap input and output, P1 (ASCII) and P4 (packed) only.
//!
//! PBM is already binary, so no binarization happens here; `1` is black,
//! which this crate treats as ink/foreground. Any other Netpbm flavor is
//! rejected.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::probes;
use crate::rle::BitRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmFormat {
    /// P1, one ASCII digit per pixel.
    Ascii,
    /// P4, eight pixels per byte, MSB first, rows padded to whole bytes.
    Binary,
}

/// Parse a PBM byte stream into raster rows.
pub fn parse_pbm(bytes: &[u8]) -> Result<Vec<BitRow>> {
    let magic = bytes.get(0..2).ok_or_else(|| Error::UnsupportedFormat(
        "file too short for a PBM magic number".into(),
    ))?;
    let format = match magic {
        b"P1" => PbmFormat::Ascii,
        b"P4" => PbmFormat::Binary,
        other => {
            let shown = String::from_utf8_lossy(other);
            return Err(Error::UnsupportedFormat(format!(
                "expected PBM magic P1 or P4, found '{shown}'"
            )));
        }
    };

    let mut pos = 2;
    let width = read_header_number(bytes, &mut pos)?;
    let height = read_header_number(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            line: 1,
            reason: format!("degenerate PBM dimensions {width}x{height}"),
        });
    }

    probes::count_raster_materialization();
    let mut raster = Vec::with_capacity(height);
    match format {
        PbmFormat::Ascii => {
            let mut bits = Vec::with_capacity(width);
            while pos < bytes.len() && raster.len() < height {
                match bytes[pos] {
                    b'0' => bits.push(false),
                    b'1' => bits.push(true),
                    b'#' => skip_comment(bytes, &mut pos),
                    c if c.is_ascii_whitespace() => {}
                    c => {
                        return Err(Error::Parse {
                            line: 1,
                            reason: format!("unexpected byte '{}' in P1 raster", c as char),
                        })
                    }
                }
                pos += 1;
                if bits.len() == width {
                    raster.push(std::mem::take(&mut bits));
                    bits.reserve(width);
                }
            }
        }
        PbmFormat::Binary => {
            // exactly one whitespace byte separates the header from data
            if bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
                pos += 1;
            }
            let stride = width.div_ceil(8);
            for _ in 0..height {
                let row_bytes = bytes.get(pos..pos + stride).ok_or_else(|| Error::Parse {
                    line: 1,
                    reason: "P4 pixel data truncated".into(),
                })?;
                pos += stride;
                let mut bits = Vec::with_capacity(width);
                for x in 0..width {
                    let byte = row_bytes[x / 8];
                    bits.push(byte & (0x80 >> (x % 8)) != 0);
                }
                raster.push(bits);
            }
        }
    }

    if raster.len() != height {
        return Err(Error::Parse {
            line: 1,
            reason: format!("P1 raster ended after {} of {height} rows", raster.len()),
        });
    }
    Ok(raster)
}

fn skip_comment(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos] != b'\n' {
        *pos += 1;
    }
}

fn read_header_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => skip_comment(bytes, pos),
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(c) if c.is_ascii_digit() => break,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    reason: "malformed PBM header".into(),
                })
            }
        }
    }
    let mut value = 0usize;
    while let Some(c) = bytes.get(*pos) {
        if !c.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((c - b'0') as usize))
            .ok_or_else(|| Error::Parse {
                line: 1,
                reason: "PBM dimension overflows".into(),
            })?;
        *pos += 1;
    }
    Ok(value)
}

/// Render a raster as PBM bytes.
pub fn format_pbm(raster: &[BitRow], format: PbmFormat) -> Result<Vec<u8>> {
    let height = raster.len();
    let width = raster.first().map(|r| r.len()).unwrap_or(0);
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("cannot write an empty raster".into()));
    }
    if raster.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidInput("ragged raster rows".into()));
    }

    let mut out = Vec::new();
    match format {
        PbmFormat::Ascii => {
            out.extend_from_slice(format!("P1\n{width} {height}\n").as_bytes());
            for row in raster {
                // keep lines within the conventional 70-character limit
                for chunk in row.chunks(64) {
                    for &bit in chunk {
                        out.push(if bit { b'1' } else { b'0' });
                    }
                    out.push(b'\n');
                }
            }
        }
        PbmFormat::Binary => {
            out.extend_from_slice(format!("P4\n{width} {height}\n").as_bytes());
            let stride = width.div_ceil(8);
            for row in raster {
                let mut packed = vec![0u8; stride];
                for (x, &bit) in row.iter().enumerate() {
                    if bit {
                        packed[x / 8] |= 0x80 >> (x % 8);
                    }
                }
                out.extend_from_slice(&packed);
            }
        }
    }
    Ok(out)
}

pub fn read_pbm<P: AsRef<Path>>(path: P) -> Result<Vec<BitRow>> {
    let bytes = fs::read(path)?;
    parse_pbm(&bytes)
}

pub fn write_pbm<P: AsRef<Path>>(raster: &[BitRow], format: PbmFormat, path: P) -> Result<()> {
    fs::write(path, format_pbm(raster, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rle::test_support::worked_raster;
    use proptest::prelude::*;

    #[test]
    fn ascii_and_binary_agree() {
        let raster = worked_raster();
        let p1 = format_pbm(&raster, PbmFormat::Ascii).unwrap();
        let p4 = format_pbm(&raster, PbmFormat::Binary).unwrap();
        assert_eq!(parse_pbm(&p1).unwrap(), raster);
        assert_eq!(parse_pbm(&p4).unwrap(), raster);
    }

    #[test]
    fn header_comments_are_skipped() {
        let text = b"P1\n# a comment\n3 2\n010\n101\n";
        let raster = parse_pbm(text).unwrap();
        assert_eq!(raster, vec![vec![false, true, false], vec![true, false, true]]);
    }

    #[test]
    fn rejects_other_netpbm_flavors() {
        let err = parse_pbm(b"P5\n3 2\n255\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
        let err = parse_pbm(b"JUNK").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn rejects_truncated_p4() {
        let err = parse_pbm(b"P4\n16 4\nXY").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(parse_pbm(b"P1\n0 4\n").is_err());
        assert!(parse_pbm(b"P4\n4 0\n").is_err());
    }

    fn raster_strategy() -> impl Strategy<Value = Vec<BitRow>> {
        (1usize..25, 1usize..25).prop_flat_map(|(w, h)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), w), h)
        })
    }

    proptest! {
        #[test]
        fn round_trip_both_formats(raster in raster_strategy()) {
            for format in [PbmFormat::Ascii, PbmFormat::Binary] {
                let bytes = format_pbm(&raster, format).unwrap();
                prop_assert_eq!(parse_pbm(&bytes).unwrap(), raster.clone());
            }
        }
    }
}
