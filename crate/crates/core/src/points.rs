//! Separator points: band midpoints at one terminal, with the top-margin
//! point excluded.
//!
//! The separator band containing row 0 is the page's top margin and its
//! midpoint is not reported; the bottom margin's is. Rows recorded as
//! inserted separators keep an `Inserted` provenance so evaluation can be
//! run with or without them.

use serde::{Deserialize, Serialize};

use crate::bands::{Band, BandKind, BandList};
use crate::refine::RefinementTrace;
use crate::terminal::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Detected,
    Inserted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorPoint {
    pub row: usize,
    pub provenance: Provenance,
}

/// Ordered separator points for one terminal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorPoints {
    pub side: Side,
    pub points: Vec<SeparatorPoint>,
    pub height: usize,
}

impl SeparatorPoints {
    pub fn rows(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.row).collect()
    }

    /// Rows filtered by provenance; `include_inserted = false` drops
    /// inserted separators from the listing.
    pub fn rows_filtered(&self, include_inserted: bool) -> Vec<usize> {
        self.points
            .iter()
            .filter(|p| include_inserted || p.provenance == Provenance::Detected)
            .map(|p| p.row)
            .collect()
    }
}

/// Midpoint row of a separator band: `floor((start + end) / 2)`.
pub fn band_midpoint(band: &Band) -> usize {
    debug_assert_eq!(band.kind, BandKind::Separator);
    (band.start + band.end) / 2
}

/// Collect the midpoints of all separator bands except the one containing
/// row 0, merge in the trace's inserted separators, and tag provenance.
pub fn assemble(bands: &BandList, trace: &RefinementTrace, side: Side) -> SeparatorPoints {
    let mut rows: Vec<usize> = bands
        .separators()
        .filter(|b| b.start != 0)
        .map(band_midpoint)
        .collect();
    rows.extend(trace.inserted_separators.iter().copied());
    rows.sort_unstable();
    rows.dedup();

    let points = rows
        .into_iter()
        .map(|row| SeparatorPoint {
            row,
            provenance: if trace.inserted_separators.contains(&row) {
                Provenance::Inserted
            } else {
                Provenance::Detected
            },
        })
        .collect();

    SeparatorPoints { side, points, height: bands.height() }
}
