//! Separator-band detection on a terminal column.
//!
//! The column is normalized by subtracting its minimum (removing the
//! constant margin) and thresholded: rows whose normalized depth exceeds
//! `t` are separator rows, the rest text. A row whose depth equals the
//! full document width is blank from this terminal and is always a
//! separator row, whatever the normalization says. Maximal runs of equal
//! labels become bands. Detection is two passes over the column: one to
//! find the minimum, one to label.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::terminal::TerminalColumn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Separator,
    Text,
}

/// A maximal run of rows with one label; `start..=end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub kind: BandKind,
    pub start: usize,
    pub end: usize,
}

impl Band {
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, row: usize) -> bool {
        self.start <= row && row <= self.end
    }
}

impl Serialize for Band {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Band", 4)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("start", &self.start)?;
        s.serialize_field("end", &self.end)?;
        s.serialize_field("width", &self.width())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Band {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: BandKind,
            start: usize,
            end: usize,
            #[serde(default)]
            width: Option<usize>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.end < raw.start {
            return Err(D::Error::custom("band end precedes start"));
        }
        let band = Band { kind: raw.kind, start: raw.start, end: raw.end };
        if let Some(w) = raw.width {
            if w != band.width() {
                return Err(D::Error::custom("band width disagrees with start/end"));
            }
        }
        Ok(band)
    }
}

/// Ordered bands of alternating kind tiling `[0, height)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BandList {
    bands: Vec<Band>,
    height: usize,
}

impl BandList {
    /// Validate an externally supplied band vector: bands must tile
    /// `[0, height)` with alternating kinds.
    pub fn from_bands(bands: Vec<Band>, height: usize) -> Result<Self> {
        let mut expected_start = 0usize;
        let mut prev_kind: Option<BandKind> = None;
        for band in &bands {
            if band.start != expected_start || band.end < band.start {
                return Err(Error::InvalidInput(format!(
                    "bands do not tile: band at {}..={} expected to start at {expected_start}",
                    band.start, band.end
                )));
            }
            if prev_kind == Some(band.kind) {
                return Err(Error::InvalidInput(
                    "consecutive bands share a kind; they must alternate".into(),
                ));
            }
            prev_kind = Some(band.kind);
            expected_start = band.end + 1;
        }
        if expected_start != height {
            return Err(Error::InvalidInput(format!(
                "bands cover [0, {expected_start}) but height is {height}"
            )));
        }
        Ok(BandList { bands, height })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn separators(&self) -> impl Iterator<Item = &Band> {
        self.bands.iter().filter(|b| b.kind == BandKind::Separator)
    }

    pub fn texts(&self) -> impl Iterator<Item = &Band> {
        self.bands.iter().filter(|b| b.kind == BandKind::Text)
    }

    /// Row labels, `true` for separator rows.
    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.height];
        for band in self.separators() {
            for m in &mut mask[band.start..=band.end] {
                *m = true;
            }
        }
        mask
    }

    /// Median text-band width as an exact rational `(numerator,
    /// denominator)`; `None` when there is no text band.
    pub fn median_text_width(&self) -> Option<(u64, u64)> {
        let mut widths: Vec<u64> = self.texts().map(|b| b.width() as u64).collect();
        if widths.is_empty() {
            return None;
        }
        widths.sort_unstable();
        let n = widths.len();
        Some(if n % 2 == 1 {
            (widths[n / 2], 1)
        } else {
            (widths[n / 2 - 1] + widths[n / 2], 2)
        })
    }
}

/// Tunable detection and refinement parameters. Defaults follow the
/// values that performed best across the evaluated handwritten corpora.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Threshold is `width / threshold_divisor` (min 1). 15 and 35 are
    /// the evaluated alternatives to the default 25.
    pub threshold_divisor: u32,
    /// Separator bands wider than `height / large_band_divisor` are taken
    /// directly as regions of interest and excluded from the average.
    pub large_band_divisor: u32,
    /// Separator bands wider than this multiple of the average width are
    /// regions of interest.
    pub under_sep_factor: f64,
    /// Cap on re-analysis rounds inside regions of interest.
    pub max_recursion_depth: u32,
    /// Text bands thinner than this fraction of the median text width are
    /// merged into a neighbor (over-separation deletion).
    pub over_sep_fraction: f64,
    /// Text bands wider than this multiple of the median text width are
    /// probed at the opposite terminal for a missed separator.
    pub insertion_factor: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            threshold_divisor: 25,
            large_band_divisor: 10,
            under_sep_factor: 2.0,
            max_recursion_depth: 8,
            over_sep_fraction: 0.5,
            insertion_factor: 2.0,
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.threshold_divisor < 1 {
            return Err(Error::InvalidInput("threshold_divisor must be >= 1".into()));
        }
        if self.large_band_divisor < 1 {
            return Err(Error::InvalidInput("large_band_divisor must be >= 1".into()));
        }
        for (name, v) in [
            ("under_sep_factor", self.under_sep_factor),
            ("over_sep_fraction", self.over_sep_fraction),
            ("insertion_factor", self.insertion_factor),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        if self.max_recursion_depth == 0 {
            return Err(Error::InvalidInput("max_recursion_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Threshold in pixels: `floor(width / threshold_divisor)`, clamped to a
/// minimum of 1 so narrow images keep a usable threshold.
pub fn default_threshold(width: u32, params: &DetectionParams) -> u32 {
    (width / params.threshold_divisor).max(1)
}

/// Label each row by normalization alone: `true` when
/// `depth - min(depths) > t`. Adding a constant to every depth leaves the
/// result unchanged.
pub fn detect_mask(column: &TerminalColumn, t: u32) -> Vec<bool> {
    let mut reads = 0;
    mask_from_depths_counting(&column.depths, t, &mut reads)
}

/// Mask computation over a raw depth slice, counting every element read.
/// One pass finds the minimum, a second applies the threshold, so
/// `reads == 2 * depths.len()`.
pub fn mask_from_depths_counting(depths: &[u32], t: u32, reads: &mut u64) -> Vec<bool> {
    if depths.is_empty() {
        return Vec::new();
    }
    let mut min = u32::MAX;
    for &d in depths {
        *reads += 1;
        min = min.min(d);
    }
    let mut mask = Vec::with_capacity(depths.len());
    for &d in depths {
        *reads += 1;
        mask.push(d - min > t);
    }
    mask
}

/// Band-level row labeling: the normalized threshold test plus the
/// blank-row rule — a depth equal to the full document width means the
/// row is empty at this terminal and is a separator row unconditionally.
/// Still two passes; the blank check rides along the labeling pass.
pub fn label_rows_counting(depths: &[u32], width: u32, t: u32, reads: &mut u64) -> Vec<bool> {
    if depths.is_empty() {
        return Vec::new();
    }
    let mut min = u32::MAX;
    for &d in depths {
        *reads += 1;
        min = min.min(d);
    }
    let mut mask = Vec::with_capacity(depths.len());
    for &d in depths {
        *reads += 1;
        mask.push(d - min > t || d == width);
    }
    mask
}

/// Group a row mask into maximal alternating bands tiling `[0, height)`.
pub fn mask_to_bands(mask: &[bool], height: usize) -> BandList {
    assert_eq!(mask.len(), height, "mask length must equal height");
    let mut bands = Vec::new();
    let mut start = 0;
    for i in 1..=mask.len() {
        if i == mask.len() || mask[i] != mask[start] {
            bands.push(Band {
                kind: if mask[start] { BandKind::Separator } else { BandKind::Text },
                start,
                end: i - 1,
            });
            start = i;
        }
    }
    BandList { bands, height }
}

/// Full detection: threshold from the document width, row labeling with
/// the blank-row rule, then band grouping. Two passes over the column.
pub fn detect_bands(column: &TerminalColumn, params: &DetectionParams) -> BandList {
    let mut reads = 0;
    detect_bands_counting(column, params, &mut reads)
}

/// [`detect_bands`] with a read counter for complexity assertions.
pub fn detect_bands_counting(
    column: &TerminalColumn,
    params: &DetectionParams,
    reads: &mut u64,
) -> BandList {
    let t = default_threshold(column.width, params);
    let mask = label_rows_counting(&column.depths, column.width, t, reads);
    mask_to_bands(&mask, column.height())
}
