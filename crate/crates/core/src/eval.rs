//! Evaluation against ground truth: one-to-one point matching, detection
//! rate, and under-/over-separation rates.
//!
//! Matching is greedy over globally distance-sorted candidate pairs with
//! deterministic tie-breaking, which equals optimal assignment whenever
//! points are well separated. Rates are kept as exact fractions; the
//! two-decimal display rounds half up.

use serde::{Deserialize, Serialize};

use crate::bands::{BandKind, BandList};
use crate::error::{Error, Result};
use crate::points::SeparatorPoints;
use crate::terminal::Side;

/// Reference separator points for one terminal of one page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub side: Side,
    /// Number of text lines; the `N` in the detection rate.
    pub total_lines: usize,
    /// Strictly increasing separator rows (top margin excluded, bottom
    /// margin included).
    pub points: Vec<usize>,
}

/// An exact ratio; `dr` stores `o2o / N` without float drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// One matched pair: indices into the detected and truth lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPair {
    pub detected: usize,
    pub truth: usize,
    pub distance: usize,
}

/// Result of one-to-one matching.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<MatchPair>,
    /// Indices of truth points left unmatched.
    pub unmatched_truth: Vec<usize>,
    /// Indices of detected points left unmatched.
    pub unmatched_detected: Vec<usize>,
}

/// Greedy one-to-one matching: candidate pairs within `tolerance` rows
/// are sorted by (distance, detected index, truth index) and taken while
/// both ends are free.
pub fn match_points(detected: &[usize], truth: &[usize], tolerance: usize) -> Matching {
    let mut candidates: Vec<MatchPair> = Vec::new();
    for (di, &d) in detected.iter().enumerate() {
        for (ti, &t) in truth.iter().enumerate() {
            let distance = d.abs_diff(t);
            if distance <= tolerance {
                candidates.push(MatchPair { detected: di, truth: ti, distance });
            }
        }
    }
    candidates.sort_unstable_by_key(|p| (p.distance, p.detected, p.truth));

    let mut detected_used = vec![false; detected.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut pairs = Vec::new();
    for cand in candidates {
        if !detected_used[cand.detected] && !truth_used[cand.truth] {
            detected_used[cand.detected] = true;
            truth_used[cand.truth] = true;
            pairs.push(cand);
        }
    }
    pairs.sort_unstable_by_key(|p| p.truth);

    Matching {
        pairs,
        unmatched_truth: (0..truth.len()).filter(|&i| !truth_used[i]).collect(),
        unmatched_detected: (0..detected.len()).filter(|&i| !detected_used[i]).collect(),
    }
}

/// `o2o / N` as an exact fraction.
pub fn detection_rate(o2o: usize, n: usize) -> Result<Fraction> {
    if n == 0 {
        return Err(Error::InvalidInput("detection rate needs N > 0".into()));
    }
    if o2o > n {
        return Err(Error::InvalidInput(format!(
            "one-to-one count {o2o} exceeds ground-truth count {n}"
        )));
    }
    Ok(Fraction { num: o2o as u64, den: n as u64 })
}

/// Under-separation rate: `under_count / total_lines * 100` as an exact
/// percentage fraction.
pub fn tn_rate(under_count: usize, total_lines: usize) -> Result<Fraction> {
    if total_lines == 0 {
        return Err(Error::InvalidInput("rates need total_lines > 0".into()));
    }
    Ok(Fraction { num: under_count as u64 * 100, den: total_lines as u64 })
}

/// Over-separation rate: `over_count / total_lines * 100` as an exact
/// percentage fraction.
pub fn fp_rate(over_count: usize, total_lines: usize) -> Result<Fraction> {
    if total_lines == 0 {
        return Err(Error::InvalidInput("rates need total_lines > 0".into()));
    }
    Ok(Fraction { num: over_count as u64 * 100, den: total_lines as u64 })
}

/// Expected separator points per terminal for a clean page: the gaps
/// between lines plus both margins, `total_lines - 1 + 2`.
pub fn expected_point_count(total_lines: usize) -> usize {
    debug_assert!(total_lines >= 1);
    total_lines + 1
}

/// Render `count / total` as a percentage with two decimals, rounding
/// half up (`97.315 -> 97.32`).
pub fn percent_display(count: u64, total: u64) -> String {
    assert!(total > 0, "percentage needs a positive denominator");
    let num = u128::from(count) * 10_000;
    let den = u128::from(total);
    let hundredths = (2 * num + den) / (2 * den);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Default matching tolerance for a page: half the median text-band
/// width, never below 3 rows.
pub fn default_tolerance(bands: &BandList) -> usize {
    match bands.median_text_width() {
        Some((num, den)) => ((num / (2 * den)) as usize).max(3),
        None => 3,
    }
}

/// Full per-page, per-side evaluation report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub side: Side,
    pub o2o: usize,
    pub n: usize,
    pub dr: Fraction,
    pub dr_percent: String,
    pub under_count: usize,
    pub over_count: usize,
    pub tn_percent: String,
    pub fp_percent: String,
    pub tolerance: usize,
    pub matches: Vec<MatchPair>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_detected: Vec<usize>,
}

/// Evaluate detected points against ground truth.
///
/// `bands`, when available, qualifies the residual analysis: an unmatched
/// truth point only counts as an under-separation when it falls inside a
/// detected text band (a missed gap), and an unmatched detected point
/// counts as an over-separation when it is farther than the tolerance
/// from every truth point (it sits inside a true text region).
pub fn evaluate(
    detected: &SeparatorPoints,
    truth: &GroundTruth,
    tolerance: usize,
    bands: Option<&BandList>,
    include_inserted: bool,
) -> Result<EvalReport> {
    let detected_rows = detected.rows_filtered(include_inserted);
    let matching = match_points(&detected_rows, &truth.points, tolerance);
    let o2o = matching.pairs.len();
    let n = truth.total_lines;
    let dr = detection_rate(o2o, n)?;

    let under_count = matching
        .unmatched_truth
        .iter()
        .filter(|&&ti| {
            let row = truth.points[ti];
            match bands {
                Some(list) => list
                    .bands()
                    .iter()
                    .any(|b| b.kind == BandKind::Text && b.contains(row)),
                None => true,
            }
        })
        .count();

    let over_count = matching
        .unmatched_detected
        .iter()
        .filter(|&&di| {
            let row = detected_rows[di];
            truth.points.iter().all(|&t| row.abs_diff(t) > tolerance)
        })
        .count();

    Ok(EvalReport {
        side: truth.side,
        o2o,
        n,
        dr,
        dr_percent: percent_display(o2o as u64, n as u64),
        under_count,
        over_count,
        tn_percent: percent_display(under_count as u64, n as u64),
        fp_percent: percent_display(over_count as u64, n as u64),
        tolerance,
        matches: matching.pairs,
        unmatched_truth: matching.unmatched_truth,
        unmatched_detected: matching.unmatched_detected,
    })
}
