//! Margin-depth columns at the two line terminals.
//!
//! The left column is literally the first RLE column: the leading white
//! run of every row. The right column is virtual — it is derived from the
//! last non-zero run of each row and holds the white depth of the right
//! margin (zero when a row ends in ink).

use serde::{Deserialize, Serialize};

use crate::rle::RleDocument;

/// Which terminal of the document a column or result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// Per-row white margin depth at one terminal, in pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalColumn {
    pub side: Side,
    /// Document width; every depth lies in `[0, width]`.
    pub width: u32,
    /// One entry per document row.
    pub depths: Vec<u32>,
}

impl TerminalColumn {
    pub fn height(&self) -> usize {
        self.depths.len()
    }
}

/// Left-terminal depths: the first run of every row (0 when the row
/// starts with ink).
pub fn left_column(doc: &RleDocument) -> TerminalColumn {
    let depths = doc.rows().iter().map(|runs| runs[0]).collect();
    TerminalColumn { side: Side::Left, width: doc.width(), depths }
}

/// Right-terminal depths from the virtual last column: the last non-zero
/// run when it sits in a white slot, 0 when the row ends in ink. An
/// all-white row contributes the full width.
pub fn right_column(doc: &RleDocument) -> TerminalColumn {
    let mut reads = 0u64;
    right_column_counting(doc, &mut reads)
}

/// Same as [`right_column`], counting every run-slot read so tests can
/// assert the single-backward-scan bound.
pub fn right_column_counting(doc: &RleDocument, reads: &mut u64) -> TerminalColumn {
    let mut depths = Vec::with_capacity(doc.height());
    for runs in doc.rows() {
        let mut depth = 0;
        for (slot, &run) in runs.iter().enumerate().rev() {
            *reads += 1;
            if run == 0 {
                continue; // trailing padding
            }
            if slot % 2 == 0 {
                depth = run;
            }
            break;
        }
        depths.push(depth);
    }
    TerminalColumn { side: Side::Right, width: doc.width(), depths }
}
