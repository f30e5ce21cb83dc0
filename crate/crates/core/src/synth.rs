//! Seeded synthetic pages with known line geometry, the failure-mode
//! artifacts that exercise the corrections, and an uncompressed
//! projection-profile segmenter used as the verification oracle.
//!
//! Ink is drawn as filled line rectangles plus seeded speckle strictly
//! inside the rectangle, so the terminal columns — the only signal the
//! pipeline reads — are exact: every line row carries ink at its left and
//! right margins unless an artifact says otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::pipeline::{segment_columns, SegmentOptions, SideOutcome};
use crate::rle::BitRow;
use crate::terminal::{Side, TerminalColumn};

/// Deliberate defects modelled after the failure modes the corrections
/// exist for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Artifact {
    /// Lines `first` and `second == first + 1` joined by an ink stroke at
    /// the left margin: the left terminal loses the gap, the right keeps it.
    TouchAtLeft { first: usize, second: usize },
    /// Line `line` drawn with `depth` pixels of left margin instead of
    /// its own, emulating a deep indent.
    LeftIndent { line: usize, depth: u32 },
    /// `rows` interior rows of line `line` lose their ink near the left
    /// terminal, producing a pseudo gap like a deeply concave glyph.
    ConcaveSliver { line: usize, rows: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub top: usize,
    pub bottom: usize,
    pub left_margin: u32,
    pub right_margin: u32,
    /// Fill fraction inside the line box, (0, 1].
    pub ink_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageSpec {
    pub width: u32,
    pub height: usize,
    pub lines: Vec<LineSpec>,
    pub seed: u64,
    #[serde(default)]
    pub artifacts: Vec<Artifact>,
}

/// A rendered page with its per-side ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedPage {
    pub raster: Vec<BitRow>,
    pub truth_left: GroundTruth,
    pub truth_right: GroundTruth,
}

impl PageSpec {
    fn touched_pairs(&self) -> Vec<(usize, usize)> {
        self.artifacts
            .iter()
            .filter_map(|a| match a {
                Artifact::TouchAtLeft { first, second } => Some((*first, *second)),
                _ => None,
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidInput("page dimensions must be positive".into()));
        }
        let touched = self.touched_pairs();
        for (i, line) in self.lines.iter().enumerate() {
            if line.top > line.bottom || line.bottom >= self.height {
                return Err(Error::InvalidInput(format!(
                    "line {i} rows {}..={} leave the page of height {}",
                    line.top, line.bottom, self.height
                )));
            }
            if u64::from(line.left_margin) * 2 >= u64::from(self.width)
                || u64::from(line.right_margin) * 2 >= u64::from(self.width)
            {
                return Err(Error::InvalidInput(format!(
                    "line {i} margins must stay below half the width"
                )));
            }
            if !(line.ink_density > 0.0 && line.ink_density <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "line {i} ink_density must lie in (0, 1]"
                )));
            }
            if i > 0 {
                let prev = &self.lines[i - 1];
                let bridged = touched.contains(&(i - 1, i));
                if line.top <= prev.bottom && !bridged {
                    return Err(Error::InvalidInput(format!(
                        "lines {} and {i} overlap without a bridging artifact",
                        i - 1
                    )));
                }
            }
        }
        for artifact in &self.artifacts {
            match *artifact {
                Artifact::TouchAtLeft { first, second } => {
                    if second != first + 1 || second >= self.lines.len() {
                        return Err(Error::InvalidInput(
                            "touch_at_left must bridge consecutive existing lines".into(),
                        ));
                    }
                }
                Artifact::LeftIndent { line, depth } => {
                    let spec = self.lines.get(line).ok_or_else(|| {
                        Error::InvalidInput("left_indent names a missing line".into())
                    })?;
                    if depth + spec.right_margin + 1 >= self.width {
                        return Err(Error::InvalidInput(
                            "left_indent leaves no room for ink".into(),
                        ));
                    }
                }
                Artifact::ConcaveSliver { line, rows } => {
                    let spec = self.lines.get(line).ok_or_else(|| {
                        Error::InvalidInput("concave_sliver names a missing line".into())
                    })?;
                    let h = spec.bottom - spec.top + 1;
                    if rows == 0 || rows + 2 > h {
                        return Err(Error::InvalidInput(
                            "concave_sliver must leave intact rows above and below".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn drawn_left_margin(&self, line: usize) -> u32 {
        for artifact in &self.artifacts {
            if let Artifact::LeftIndent { line: l, depth } = *artifact {
                if l == line {
                    return depth;
                }
            }
        }
        self.lines[line].left_margin
    }
}

/// Render a page deterministically and derive its ground truth: one point
/// per inter-line gap plus the bottom margin, top margin excluded —
/// identical on both sides.
pub fn generate(spec: &PageSpec) -> Result<GeneratedPage> {
    spec.validate()?;
    let width = spec.width as usize;
    let mut raster = vec![vec![false; width]; spec.height];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for (i, line) in spec.lines.iter().enumerate() {
        let left = spec.drawn_left_margin(i) as usize;
        let right_edge = width - line.right_margin as usize; // exclusive
        for row in raster.iter_mut().take(line.bottom + 1).skip(line.top) {
            for cell in row.iter_mut().take(right_edge).skip(left) {
                *cell = true;
            }
        }
        // speckle strictly inside the box so both terminals stay exact
        let hole_probability = 1.0 - line.ink_density;
        if hole_probability > 0.0 && right_edge - left > 2 {
            for row in raster.iter_mut().take(line.bottom + 1).skip(line.top) {
                for cell in row.iter_mut().take(right_edge - 1).skip(left + 1) {
                    if rng.random_bool(hole_probability) {
                        *cell = false;
                    }
                }
            }
        }
    }

    for artifact in &spec.artifacts {
        match *artifact {
            Artifact::TouchAtLeft { first, second } => {
                let stroke_left =
                    spec.drawn_left_margin(first).min(spec.drawn_left_margin(second)) as usize;
                let stroke_right = (stroke_left + 3).min(width);
                let from = spec.lines[first].bottom + 1;
                let to = spec.lines[second].top; // exclusive
                for row in raster.iter_mut().take(to).skip(from) {
                    for cell in row.iter_mut().take(stroke_right).skip(stroke_left) {
                        *cell = true;
                    }
                }
            }
            Artifact::ConcaveSliver { line, rows } => {
                let spec_line = &spec.lines[line];
                let h = spec_line.bottom - spec_line.top + 1;
                let r0 = spec_line.top + (h - rows) / 2;
                let left = spec.drawn_left_margin(line) as usize;
                let reach = (width / 6).max(2);
                let clear_to = (left + reach).min(width - spec_line.right_margin as usize - 1);
                for row in raster.iter_mut().take(r0 + rows).skip(r0) {
                    for cell in row.iter_mut().take(clear_to).skip(left) {
                        *cell = false;
                    }
                }
            }
            Artifact::LeftIndent { .. } => {} // applied at draw time
        }
    }

    let mut points = Vec::new();
    for pair in spec.lines.windows(2) {
        let lo = pair[0].bottom + 1;
        let hi = pair[1].top.saturating_sub(1);
        if lo <= hi {
            points.push((lo + hi) / 2);
        }
    }
    if let Some(last) = spec.lines.last() {
        let lo = last.bottom + 1;
        let hi = spec.height - 1;
        if lo <= hi {
            points.push((lo + hi) / 2);
        }
    }

    let truth = |side| GroundTruth { side, total_lines: spec.lines.len(), points: points.clone() };
    Ok(GeneratedPage {
        raster,
        truth_left: truth(Side::Left),
        truth_right: truth(Side::Right),
    })
}

/// Brute-force terminal columns straight from the raster: per-row leading
/// and trailing background counts. This is the oracle's independent
/// replacement for the run-length column extraction.
pub fn profile_columns(raster: &[BitRow]) -> (TerminalColumn, TerminalColumn) {
    let width = raster.first().map(|r| r.len()).unwrap_or(0) as u32;
    let left = raster
        .iter()
        .map(|row| row.iter().take_while(|&&b| !b).count() as u32)
        .collect();
    let right = raster
        .iter()
        .map(|row| row.iter().rev().take_while(|&&b| !b).count() as u32)
        .collect();
    (
        TerminalColumn { side: Side::Left, width, depths: left },
        TerminalColumn { side: Side::Right, width, depths: right },
    )
}

/// Uncompressed reference segmenter: projection-profile margin depths
/// computed directly on the raster, then the identical detection,
/// refinement and assembly as the compressed pipeline.
pub fn oracle_segment(
    raster: &[BitRow],
    sides: &[Side],
    opts: &SegmentOptions,
) -> Vec<SideOutcome> {
    let (left, right) = profile_columns(raster);
    segment_columns(&left, &right, sides, opts)
}

/// Deterministic random page geometry for corpus building: 6–9 lines of
/// 14–18 rows, gaps of 9–12 rows, margins of 8–12 pixels. The ranges keep
/// clean pages unambiguous (no band ever nears the correction triggers)
/// while artifact pages reliably cross them.
pub fn random_page_spec(seed: u64) -> PageSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width: u32 = rng.random_range(250..=450);
    let line_count: usize = rng.random_range(6..=9);
    let top_margin: usize = rng.random_range(8..=12);

    let mut lines = Vec::with_capacity(line_count);
    let mut top = top_margin;
    for i in 0..line_count {
        let h: usize = rng.random_range(14..=18);
        let line = LineSpec {
            top,
            bottom: top + h - 1,
            left_margin: rng.random_range(8..=12),
            right_margin: rng.random_range(8..=12),
            ink_density: f64::from(rng.random_range(80u32..=95)) / 100.0,
        };
        top = line.bottom + 1;
        if i + 1 < line_count {
            top += rng.random_range(9usize..=12);
        }
        lines.push(line);
    }
    let height = top + rng.random_range(8usize..=12);

    PageSpec { width, height, lines, seed, artifacts: Vec::new() }
}

/// Bridge the middle pair of lines at the left terminal.
pub fn add_touch_at_left(spec: &mut PageSpec) {
    let first = spec.lines.len() / 2 - 1;
    spec.artifacts.push(Artifact::TouchAtLeft { first, second: first + 1 });
}

/// Carve a pseudo gap through the middle line at the left terminal. Half
/// the line height keeps both remaining fragments well under the sliver
/// threshold.
pub fn add_concave_sliver(spec: &mut PageSpec) {
    let line = spec.lines.len() / 2;
    let h = spec.lines[line].bottom - spec.lines[line].top + 1;
    spec.artifacts.push(Artifact::ConcaveSliver { line, rows: h / 2 });
}
