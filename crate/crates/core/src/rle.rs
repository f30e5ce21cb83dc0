//! Row-wise run-length representation of binary rasters.
//!
//! Every raster row is stored as alternating run lengths, white run first.
//! A row that begins with an ink pixel gets a leading `0` so the
//! white-first convention always holds. Runs are `u32`, wide enough for
//! rows beyond 2^31 pixels; internal storage keeps rows variable-length
//! with no trailing zero padding.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::probes;

/// One raster row: `true` is foreground (ink), `false` is background.
pub type BitRow = Vec<bool>;

/// A binary document in run-length matrix form.
///
/// Invariants (enforced by every constructor):
/// - each row's run lengths sum to `width`,
/// - each row starts with a white-run slot (`0` when the raster row
///   begins with ink),
/// - no interior run has length zero and rows carry no trailing padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RleDocument {
    width: u32,
    rows: Vec<Vec<u32>>,
}

impl RleDocument {
    /// Build a document from raw run-length rows, validating the row
    /// invariants. Trailing zero padding (as found in rectangular storage)
    /// is stripped.
    pub fn from_rows(width: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidInput("document width must be positive".into()));
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("document must have at least one row".into()));
        }
        let mut normalized = Vec::with_capacity(rows.len());
        for (row_idx, mut runs) in rows.into_iter().enumerate() {
            while runs.last() == Some(&0) {
                runs.pop();
            }
            validate_runs(&runs, width, row_idx)?;
            normalized.push(runs);
        }
        Ok(RleDocument { width, rows: normalized })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Run-length rows, white run first, no trailing padding.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[u32] {
        &self.rows[index]
    }
}

fn validate_runs(runs: &[u32], width: u32, row_idx: usize) -> Result<()> {
    let mut sum = 0u64;
    for (i, &run) in runs.iter().enumerate() {
        if run == 0 && i > 0 {
            return Err(Error::CorruptRow {
                row: row_idx,
                reason: format!("interior zero run at slot {i}"),
            });
        }
        sum += u64::from(run);
    }
    if sum != u64::from(width) {
        return Err(Error::CorruptRow {
            row: row_idx,
            reason: format!("run lengths sum to {sum}, expected width {width}"),
        });
    }
    Ok(())
}

/// Encode one raster row as alternating white/black run lengths.
///
/// The first slot is always white; a leading `0` is emitted when the row
/// starts with ink.
pub fn encode_row(row: &[bool]) -> Result<Vec<u32>> {
    if row.is_empty() {
        return Err(Error::InvalidInput("cannot encode an empty row".into()));
    }
    let mut runs = Vec::new();
    if row[0] {
        runs.push(0);
    }
    let mut current = row[0];
    let mut length = 0u32;
    for &bit in row {
        if bit == current {
            length += 1;
        } else {
            runs.push(length);
            current = bit;
            length = 1;
        }
    }
    runs.push(length);
    Ok(runs)
}

/// Decode a run-length row back to bits. Runs at even slot positions are
/// white, odd positions black; zero-length runs (the leading-zero
/// convention and trailing padding) contribute nothing.
pub fn decode_row(runs: &[u32], width: u32) -> Result<BitRow> {
    let sum: u64 = runs.iter().map(|&r| u64::from(r)).sum();
    if sum != u64::from(width) {
        return Err(Error::CorruptRow {
            row: 0,
            reason: format!("run lengths sum to {sum}, expected width {width}"),
        });
    }
    probes::count_raster_materialization();
    let mut row = Vec::with_capacity(width as usize);
    for (i, &run) in runs.iter().enumerate() {
        let ink = i % 2 == 1;
        row.extend(std::iter::repeat_n(ink, run as usize));
    }
    Ok(row)
}

/// Encode a full raster into a run-length document.
pub fn encode_image(raster: &[BitRow]) -> Result<RleDocument> {
    let first = raster
        .first()
        .ok_or_else(|| Error::InvalidInput("raster must have at least one row".into()))?;
    let width = first.len();
    let mut rows = Vec::with_capacity(raster.len());
    for (i, bits) in raster.iter().enumerate() {
        if bits.len() != width {
            return Err(Error::InvalidInput(format!(
                "ragged raster: row {i} has {} columns, expected {width}",
                bits.len()
            )));
        }
        rows.push(encode_row(bits)?);
    }
    Ok(RleDocument { width: width as u32, rows })
}

/// Decode a document back to its raster. Test and oracle support only;
/// the segmentation pipeline never calls this.
pub fn decode_image(doc: &RleDocument) -> Vec<BitRow> {
    probes::count_raster_materialization();
    doc.rows
        .iter()
        .map(|runs| decode_row(runs, doc.width).expect("document invariant: runs sum to width"))
        .collect()
}

/// Render a document in the RLE CSV wire format: a `width,height` header
/// line followed by one comma-separated run-length row per raster row,
/// LF line endings.
pub fn format_rle_csv(doc: &RleDocument) -> String {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", doc.width, doc.height()));
    for runs in &doc.rows {
        let cells: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse the RLE CSV wire format. Errors carry the one-based file line.
pub fn parse_rle_csv(text: &str) -> Result<RleDocument> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "missing width,height header".into(),
    })?;
    let (width, height) = parse_header(header)?;
    if height == 0 {
        return Err(Error::Parse {
            line: 1,
            reason: "zero-height document".into(),
        });
    }

    let mut rows = Vec::with_capacity(height);
    for (row_idx, line) in lines.enumerate() {
        let file_line = row_idx + 2;
        if row_idx >= height {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Parse {
                line: file_line,
                reason: format!("more rows than the declared height {height}"),
            });
        }
        let mut runs = Vec::new();
        for cell in line.split(',') {
            let run: u32 = cell.trim().parse().map_err(|_| Error::Parse {
                line: file_line,
                reason: format!("row {row_idx}: non-numeric or out-of-range cell '{cell}'"),
            })?;
            runs.push(run);
        }
        rows.push(runs);
    }
    if rows.len() != height {
        return Err(Error::Parse {
            line: rows.len() + 1,
            reason: format!("found {} rows, header declares {height}", rows.len()),
        });
    }
    RleDocument::from_rows(width, rows)
}

fn parse_header(header: &str) -> Result<(u32, usize)> {
    let mut parts = header.split(',');
    let bad = || Error::Parse {
        line: 1,
        reason: format!("header must be 'width,height', got '{header}'"),
    };
    let width: u32 = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(bad)?;
    let height: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(bad)?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((width, height))
}

pub fn read_rle_csv<P: AsRef<Path>>(path: P) -> Result<RleDocument> {
    let text = fs::read_to_string(path)?;
    parse_rle_csv(&text)
}

pub fn write_rle_csv<P: AsRef<Path>>(doc: &RleDocument, path: P) -> Result<()> {
    fs::write(path, format_rle_csv(doc))?;
    Ok(())
}
