//! Band refinement: re-analysis of abnormally wide separator bands and
//! the two corrective actions, deletion of spurious separators and
//! insertion of missed ones.
//!
//! Wide-band handling follows a two-step screen. Separator bands wider
//! than `height / large_band_divisor` are regions of interest outright
//! and are excluded from the average; of the rest, bands wider than
//! `under_sep_factor` times the average are regions of interest too.
//! Each region is relabeled by re-running the detection on its own rows
//! (local minimum, same threshold), and the screen repeats until no
//! region is found, nothing changes, or the depth cap binds.
//!
//! Comparisons against averages and medians are exact: `width * count`
//! against `factor * sum` rather than dividing first.

use serde::{Deserialize, Serialize};

use crate::bands::{default_threshold, label_rows_counting, mask_to_bands, Band, BandKind, BandList, DetectionParams};
use crate::terminal::{Side, TerminalColumn};

/// Why a separator band was flagged for re-analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiTag {
    /// Wider than `height / large_band_divisor`; excluded from the average.
    OversizedBand,
    /// Wider than `under_sep_factor` times the average separator width.
    WideBand,
}

/// A flagged row interval; always coincides with a separator band of the
/// band list it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiInterval {
    pub start: usize,
    pub end: usize,
    pub tag: RoiTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoiSet {
    pub intervals: Vec<RoiInterval>,
}

impl RoiSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Record of the corrective actions taken while refining one side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementTrace {
    /// Separator bands removed by over-separation deletion, with the
    /// coordinates they had when deleted.
    pub deleted_bands: Vec<Band>,
    /// Rows where a separator was inserted inside a former text band.
    pub inserted_separators: Vec<usize>,
    /// Re-analysis rounds actually used.
    pub recursion_depth_used: u32,
}

impl RefinementTrace {
    pub fn merge(&mut self, other: RefinementTrace) {
        self.deleted_bands.extend(other.deleted_bands);
        self.inserted_separators.extend(other.inserted_separators);
        self.inserted_separators.sort_unstable();
        self.inserted_separators.dedup();
        self.recursion_depth_used = self.recursion_depth_used.max(other.recursion_depth_used);
    }
}

/// Instrumented result of the wide-band screen, exposing which bands
/// entered the average so tests can assert the exclusion rule.
#[derive(Debug, Clone)]
pub struct UnderSeparationAnalysis {
    pub roi: RoiSet,
    /// Indices (into `bands.bands()`) of separator bands that contributed
    /// to the average.
    pub averaged_bands: Vec<usize>,
    pub width_sum: u64,
    pub averaged_count: u64,
}

/// Wide-band screen with instrumentation. Step 1 diverts oversized bands
/// to the ROI and keeps them out of the average; step 2 averages the
/// rest; step 3 flags remaining bands wider than the factored average.
pub fn analyze_under_separation(
    bands: &BandList,
    height: usize,
    params: &DetectionParams,
) -> UnderSeparationAnalysis {
    let mut oversized = Vec::new();
    let mut averaged_bands = Vec::new();
    let mut width_sum = 0u64;

    for (idx, band) in bands.bands().iter().enumerate() {
        if band.kind != BandKind::Separator {
            continue;
        }
        let width = band.width() as u64;
        if width * u64::from(params.large_band_divisor) > height as u64 {
            oversized.push(RoiInterval { start: band.start, end: band.end, tag: RoiTag::OversizedBand });
        } else {
            width_sum += width;
            averaged_bands.push(idx);
        }
    }

    let averaged_count = averaged_bands.len() as u64;
    let mut wide = Vec::new();
    if averaged_count > 0 {
        for &idx in &averaged_bands {
            let band = bands.bands()[idx];
            let width = band.width() as u64;
            // width > factor * (sum / count), kept exact as width*count vs factor*sum
            if (width * averaged_count) as f64 > params.under_sep_factor * width_sum as f64 {
                wide.push(RoiInterval { start: band.start, end: band.end, tag: RoiTag::WideBand });
            }
        }
    }

    let mut intervals = oversized;
    intervals.extend(wide);
    intervals.sort_unstable_by_key(|iv| iv.start);
    UnderSeparationAnalysis { roi: RoiSet { intervals }, averaged_bands, width_sum, averaged_count }
}

/// Separator bands that warrant re-analysis (the wide-band screen).
pub fn find_under_separation(bands: &BandList, height: usize, params: &DetectionParams) -> RoiSet {
    analyze_under_separation(bands, height, params).roi
}

/// Re-run detection inside each flagged interval (local minimum, same
/// threshold), rebuild, and repeat the screen until no region is flagged,
/// a fixed point is reached, or `max_recursion_depth` rounds have run.
/// The depth used is recorded on `trace`.
pub fn refine_roi(
    column: &TerminalColumn,
    bands: &BandList,
    roi: RoiSet,
    params: &DetectionParams,
    trace: &mut RefinementTrace,
) -> BandList {
    let t = default_threshold(column.width, params);
    let mut current = bands.clone();
    let mut roi = roi;
    let mut depth = 0u32;

    while !roi.is_empty() && depth < params.max_recursion_depth {
        depth += 1;
        let mut mask = current.to_mask();
        for iv in &roi.intervals {
            debug_assert!(iv.start <= iv.end && iv.end < column.height());
            let slice = &column.depths[iv.start..=iv.end];
            let mut reads = 0;
            let local = label_rows_counting(slice, column.width, t, &mut reads);
            mask[iv.start..=iv.end].copy_from_slice(&local);
        }
        let next = mask_to_bands(&mask, current.height());
        if next == current {
            break; // fixed point: further rounds cannot make progress
        }
        current = next;
        roi = find_under_separation(&current, current.height(), params);
    }

    trace.recursion_depth_used = trace.recursion_depth_used.max(depth);
    current
}

fn strictly_below_fraction(width: u64, fraction: f64, med_num: u64, med_den: u64) -> bool {
    ((width * med_den) as f64) < fraction * med_num as f64
}

fn strictly_above_factor(width: u64, factor: f64, med_num: u64, med_den: u64) -> bool {
    ((width * med_den) as f64) > factor * med_num as f64
}

/// Over-separation deletion. While some text band is thinner than
/// `over_sep_fraction` times the median text width, relabel its thinner
/// adjacent separator band as text (merging the sliver into a neighbor),
/// recomputing the median after every merge. Ties go to the upper
/// separator; slivers are handled topmost first.
pub fn remove_over_separation(
    bands: &BandList,
    params: &DetectionParams,
) -> (BandList, RefinementTrace) {
    let mut current = bands.clone();
    let mut trace = RefinementTrace::default();

    loop {
        let texts: Vec<(usize, Band)> = current
            .bands()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BandKind::Text)
            .map(|(i, b)| (i, *b))
            .collect();
        if texts.len() <= 1 {
            break;
        }
        let (med_num, med_den) = current
            .median_text_width()
            .expect("text bands exist, so the median exists");

        let Some(&(sliver_idx, _)) = texts.iter().find(|(_, b)| {
            strictly_below_fraction(b.width() as u64, params.over_sep_fraction, med_num, med_den)
        }) else {
            break;
        };

        let all = current.bands();
        let mut candidates: Vec<Band> = Vec::new();
        if sliver_idx > 0 {
            candidates.push(all[sliver_idx - 1]);
        }
        if sliver_idx + 1 < all.len() {
            candidates.push(all[sliver_idx + 1]);
        }
        let Some(victim) = candidates
            .into_iter()
            .min_by_key(|b| (b.width(), b.start))
        else {
            break;
        };
        debug_assert_eq!(victim.kind, BandKind::Separator);

        let mut mask = current.to_mask();
        for m in &mut mask[victim.start..=victim.end] {
            *m = false;
        }
        trace.deleted_bands.push(victim);
        current = mask_to_bands(&mask, current.height());
    }

    (current, trace)
}

/// Under-separation insertion. Text bands wider than `insertion_factor`
/// times the median text width are probed at the opposite terminal: the
/// opposite column restricted to the band is run through detection, and
/// the midpoint of every interior separator band found there is spliced
/// in as an inserted separator row. Bands with no interior evidence are
/// left intact.
pub fn insert_missing_separators(
    left: &TerminalColumn,
    right: &TerminalColumn,
    side: Side,
    bands: &BandList,
    params: &DetectionParams,
) -> (BandList, RefinementTrace) {
    let opposite = match side {
        Side::Left => right,
        Side::Right => left,
    };
    debug_assert_eq!(opposite.height(), bands.height());

    let Some((med_num, med_den)) = bands.median_text_width() else {
        return (bands.clone(), RefinementTrace::default());
    };
    let t = default_threshold(opposite.width, params);

    let mut inserted: Vec<usize> = Vec::new();
    for band in bands.texts() {
        if !strictly_above_factor(band.width() as u64, params.insertion_factor, med_num, med_den) {
            continue;
        }
        let slice = &opposite.depths[band.start..=band.end];
        let mut reads = 0;
        let labels = label_rows_counting(slice, opposite.width, t, &mut reads);
        let local = mask_to_bands(&labels, slice.len());
        for sb in local.separators() {
            // only interior gaps split the band; edge-touching separator
            // rows merely extend the band's existing neighbors
            if sb.start > 0 && sb.end < slice.len() - 1 {
                inserted.push(band.start + (sb.start + sb.end) / 2);
            }
        }
    }

    if inserted.is_empty() {
        return (bands.clone(), RefinementTrace::default());
    }
    inserted.sort_unstable();
    inserted.dedup();

    let mut mask = bands.to_mask();
    for &row in &inserted {
        mask[row] = true;
    }
    let refined = mask_to_bands(&mask, bands.height());
    let trace = RefinementTrace {
        deleted_bands: Vec::new(),
        inserted_separators: inserted,
        recursion_depth_used: 0,
    };
    (refined, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::detect_bands;

    fn bands_from_widths(pairs: &[(BandKind, usize)]) -> BandList {
        let mut mask = Vec::new();
        for &(kind, w) in pairs {
            mask.extend(std::iter::repeat_n(kind == BandKind::Separator, w));
        }
        let height = mask.len();
        mask_to_bands(&mask, height)
    }

    use BandKind::{Separator as S, Text as T};

    #[test]
    fn wide_band_screen_hand_example() {
        // separator widths [5, 6, 30, 5] at height 200: 30 is oversized,
        // the average over the rest is 16/3, and nobody beats twice that.
        let list = bands_from_widths(&[
            (S, 5), (T, 40), (S, 6), (T, 40), (S, 30), (T, 40), (S, 5), (T, 34),
        ]);
        assert_eq!(list.height(), 200);
        let analysis = analyze_under_separation(&list, 200, &DetectionParams::default());
        assert_eq!(analysis.width_sum, 16);
        assert_eq!(analysis.averaged_count, 3);
        assert_eq!(analysis.roi.intervals.len(), 1);
        let iv = analysis.roi.intervals[0];
        assert_eq!(iv.tag, RoiTag::OversizedBand);
        assert_eq!(iv.end - iv.start + 1, 30);
    }

    #[test]
    fn wide_band_screen_uniform_bands_find_nothing() {
        let list = bands_from_widths(&[
            (S, 4), (T, 46), (S, 4), (T, 46), (S, 4), (T, 46), (S, 4), (T, 46),
        ]);
        assert_eq!(list.height(), 200);
        let roi = find_under_separation(&list, 200, &DetectionParams::default());
        assert!(roi.is_empty());
    }

    #[test]
    fn wide_band_screen_boundary_arithmetic() {
        // widths [3, 3, 9] at height 1000: avg 5, 9 <= 10, nothing flagged
        let list = bands_from_widths(&[(S, 3), (T, 400), (S, 3), (T, 400), (S, 9), (T, 185)]);
        assert_eq!(list.height(), 1000);
        let roi = find_under_separation(&list, 1000, &DetectionParams::default());
        assert!(roi.is_empty());

        // widths [3, 3, 13]: avg 19/3, 13*3 = 39 > 2*19 = 38, flagged wide
        let list = bands_from_widths(&[(S, 3), (T, 400), (S, 3), (T, 400), (S, 13), (T, 181)]);
        assert_eq!(list.height(), 1000);
        let roi = find_under_separation(&list, 1000, &DetectionParams::default());
        assert_eq!(roi.intervals.len(), 1);
        assert_eq!(roi.intervals[0].tag, RoiTag::WideBand);
    }

    #[test]
    fn wide_screen_with_no_remaining_bands_selects_nothing() {
        // every separator oversized: average undefined, step 3 silent
        let list = bands_from_widths(&[(S, 10), (T, 5), (S, 12), (T, 3)]);
        assert_eq!(list.height(), 30);
        let analysis = analyze_under_separation(&list, 30, &DetectionParams::default());
        assert_eq!(analysis.averaged_count, 0);
        assert_eq!(analysis.roi.intervals.len(), 2);
        assert!(analysis
            .roi
            .intervals
            .iter()
            .all(|iv| iv.tag == RoiTag::OversizedBand));
    }

    fn column(width: u32, depths: Vec<u32>) -> TerminalColumn {
        TerminalColumn { side: Side::Left, width, depths }
    }

    #[test]
    fn roi_recursion_splits_an_indented_line_band() {
        // Three text lines at depth 5; the middle one is deeply indented
        // (depth 30), so detection lumps gap+line+gap into one separator
        // band. Local re-analysis recovers the line.
        let width = 100;
        let mut depths = Vec::new();
        depths.extend(std::iter::repeat_n(5u32, 6)); // line 1
        depths.extend(std::iter::repeat_n(100u32, 5)); // gap (blank)
        depths.extend(std::iter::repeat_n(30u32, 6)); // indented line 2
        depths.extend(std::iter::repeat_n(100u32, 5)); // gap
        depths.extend(std::iter::repeat_n(5u32, 6)); // line 3
        let col = column(width, depths);
        let params = DetectionParams::default(); // t = 4

        let initial = detect_bands(&col, &params);
        // merged: Text[0,5], Sep[6,21], Text[22,27]
        assert_eq!(initial.bands().len(), 3);
        assert_eq!(initial.bands()[1].width(), 16);

        let roi = find_under_separation(&initial, 28, &params);
        assert!(!roi.is_empty());
        let mut trace = RefinementTrace::default();
        let refined = refine_roi(&col, &initial, roi, &params, &mut trace);

        let got: Vec<_> = refined.bands().iter().map(|b| (b.kind, b.start, b.end)).collect();
        assert_eq!(
            got,
            [
                (T, 0, 5),
                (S, 6, 10),
                (T, 11, 16),
                (S, 17, 21),
                (T, 22, 27),
            ]
        );
        assert!(trace.recursion_depth_used >= 1);
        assert!(trace.recursion_depth_used <= params.max_recursion_depth);
    }

    #[test]
    fn roi_recursion_constant_blank_slice_stops_at_fixed_point() {
        // A blank page: one full-page separator band, oversized. The
        // slice is constant at full width, relabels to itself, and the
        // fixed-point check stops the recursion immediately.
        let col = column(50, vec![50; 40]);
        let params = DetectionParams::default();
        let initial = detect_bands(&col, &params);
        assert_eq!(initial.bands().len(), 1);
        let roi = find_under_separation(&initial, 40, &params);
        assert!(!roi.is_empty());
        let mut trace = RefinementTrace::default();
        let refined = refine_roi(&col, &initial, roi, &params, &mut trace);
        assert_eq!(refined, initial);
        assert_eq!(trace.recursion_depth_used, 1);
    }

    #[test]
    fn roi_recursion_constant_shallow_slice_relabels_to_text() {
        // An oversized separator band whose rows are constant but not
        // blank: the local minimum flattens it, so it relabels to text.
        let mut depths = vec![2u32; 10];
        depths.extend(std::iter::repeat_n(40u32, 20)); // constant, below width
        depths.extend(std::iter::repeat_n(2u32, 10));
        let col = column(100, depths);
        let params = DetectionParams::default();
        let initial = detect_bands(&col, &params);
        assert_eq!(initial.bands().len(), 3);
        let roi = find_under_separation(&initial, 40, &params);
        assert_eq!(roi.intervals.len(), 1);
        let mut trace = RefinementTrace::default();
        let refined = refine_roi(&col, &initial, roi, &params, &mut trace);
        assert_eq!(refined.bands().len(), 1);
        assert_eq!(refined.bands()[0].kind, T);
    }

    #[test]
    fn empty_roi_leaves_bands_unchanged() {
        let col = column(100, vec![5, 5, 100, 100, 5, 5]);
        let params = DetectionParams::default();
        let initial = detect_bands(&col, &params);
        let mut trace = RefinementTrace::default();
        let refined = refine_roi(&col, &initial, RoiSet::default(), &params, &mut trace);
        assert_eq!(refined, initial);
        assert_eq!(trace.recursion_depth_used, 0);
    }

    #[test]
    fn deletion_merges_sliver_through_thinner_separator() {
        // text widths [40, 6, 38, 41], the 6-sliver flanked by separators
        // of widths 3 (above) and 12 (below): median 39, 6 < 19.5, the
        // width-3 separator goes.
        let list = bands_from_widths(&[
            (S, 5), (T, 40), (S, 3), (T, 6), (S, 12), (T, 38), (S, 5), (T, 41), (S, 5),
        ]);
        let (refined, trace) = remove_over_separation(&list, &DetectionParams::default());
        assert_eq!(trace.deleted_bands.len(), 1);
        assert_eq!(trace.deleted_bands[0].width(), 3);
        let text_widths: Vec<usize> = refined.texts().map(|b| b.width()).collect();
        assert_eq!(text_widths, [49, 38, 41]);
    }

    #[test]
    fn deletion_leaves_uniform_text_alone() {
        let list = bands_from_widths(&[(S, 4), (T, 20), (S, 4), (T, 20), (S, 4), (T, 20)]);
        let (refined, trace) = remove_over_separation(&list, &DetectionParams::default());
        assert_eq!(refined, list);
        assert!(trace.deleted_bands.is_empty());
    }

    #[test]
    fn deletion_leaves_single_text_band_alone() {
        let list = bands_from_widths(&[(S, 10), (T, 3), (S, 10)]);
        let (refined, trace) = remove_over_separation(&list, &DetectionParams::default());
        assert_eq!(refined, list);
        assert!(trace.deleted_bands.is_empty());
    }

    #[test]
    fn deletion_never_removes_separator_between_two_healthy_bands() {
        // both neighbors of every separator at or above the median
        let list = bands_from_widths(&[(S, 4), (T, 20), (S, 2), (T, 20), (S, 4), (T, 21)]);
        let (_, trace) = remove_over_separation(&list, &DetectionParams::default());
        assert!(trace.deleted_bands.is_empty());
    }

    #[test]
    fn insertion_probes_opposite_terminal() {
        let width = 100u32;
        // Left terminal: lines 5..=14 and 20..=29 touch at the start, so
        // rows 5..=29 all read depth 5. Right terminal keeps the gap.
        // Two further clean lines pin the median text width at 10.
        let mut left_depths = vec![100u32; 5];
        left_depths.extend(std::iter::repeat_n(5u32, 25)); // merged block
        left_depths.extend(std::iter::repeat_n(100u32, 5));
        left_depths.extend(std::iter::repeat_n(5u32, 10)); // clean line
        left_depths.extend(std::iter::repeat_n(100u32, 5));
        left_depths.extend(std::iter::repeat_n(5u32, 10)); // clean line
        left_depths.extend(std::iter::repeat_n(100u32, 5));

        let mut right_depths = vec![100u32; 5];
        right_depths.extend(std::iter::repeat_n(8u32, 10)); // line 1
        right_depths.extend(std::iter::repeat_n(90u32, 5)); // the gap the left lost
        right_depths.extend(std::iter::repeat_n(8u32, 10)); // line 2
        right_depths.extend(std::iter::repeat_n(100u32, 5));
        right_depths.extend(std::iter::repeat_n(8u32, 10)); // line 3
        right_depths.extend(std::iter::repeat_n(100u32, 5));
        right_depths.extend(std::iter::repeat_n(8u32, 10)); // line 4
        right_depths.extend(std::iter::repeat_n(100u32, 5));

        let left = TerminalColumn { side: Side::Left, width, depths: left_depths };
        let right = TerminalColumn { side: Side::Right, width, depths: right_depths };
        assert_eq!(left.height(), right.height());
        let params = DetectionParams::default();

        let bands = detect_bands(&left, &params);
        // text widths [25, 10, 10]: median 10, 25 > 20 -> probe the wide one
        let (refined, trace) =
            insert_missing_separators(&left, &right, Side::Left, &bands, &params);
        assert_eq!(trace.inserted_separators, vec![17]); // rows 15..=19 at right, midpoint 17
        let seps: Vec<_> = refined.separators().map(|b| (b.start, b.end)).collect();
        assert!(seps.contains(&(17, 17)));
        // the former 5..=29 text band is split around the insertion
        let texts: Vec<_> = refined.texts().map(|b| (b.start, b.end)).collect();
        assert!(texts.contains(&(5, 16)));
        assert!(texts.contains(&(18, 29)));
    }

    #[test]
    fn insertion_without_oversized_band_is_identity() {
        let width = 100u32;
        let left = column(width, vec![100, 100, 5, 5, 5, 100, 5, 5, 5, 100]);
        let right = column(width, vec![100, 100, 8, 8, 8, 100, 8, 8, 8, 100]);
        let params = DetectionParams::default();
        let bands = detect_bands(&left, &params);
        let (refined, trace) = insert_missing_separators(&left, &right, Side::Left, &bands, &params);
        assert_eq!(refined, bands);
        assert!(trace.inserted_separators.is_empty());
    }

    #[test]
    fn insertion_with_no_gap_at_either_terminal_records_nothing() {
        let width = 100u32;
        // both terminals read the merged block as solid text; the block
        // is wide enough to be probed, but the probe finds no gap
        let mut depths = vec![100u32; 5];
        depths.extend(std::iter::repeat_n(5u32, 25)); // merged block
        depths.extend(std::iter::repeat_n(100u32, 5));
        depths.extend(std::iter::repeat_n(5u32, 10)); // clean line
        depths.extend(std::iter::repeat_n(100u32, 5));
        depths.extend(std::iter::repeat_n(5u32, 10)); // clean line
        depths.extend(std::iter::repeat_n(100u32, 5));
        let left = TerminalColumn { side: Side::Left, width, depths: depths.clone() };
        let right = TerminalColumn { side: Side::Right, width, depths };
        let params = DetectionParams::default();
        let bands = detect_bands(&left, &params);
        // text widths [25, 10, 10]: the 25-block is probed, finds nothing
        let (refined, trace) = insert_missing_separators(&left, &right, Side::Left, &bands, &params);
        assert_eq!(refined, bands);
        assert!(trace.inserted_separators.is_empty());
    }

    #[test]
    fn exclusion_rule_on_random_band_lists() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let params = DetectionParams::default();
        for _ in 0..1000 {
            let n_bands = rng.random_range(2usize..24);
            let mut pairs = Vec::new();
            for i in 0..n_bands {
                let kind = if i % 2 == 0 { S } else { T };
                pairs.push((kind, rng.random_range(1usize..40)));
            }
            let list = bands_from_widths(&pairs);
            let height = list.height();
            let analysis = analyze_under_separation(&list, height, &params);
            for &idx in &analysis.averaged_bands {
                let band = list.bands()[idx];
                assert!(
                    (band.width() as u64) * u64::from(params.large_band_divisor) <= height as u64,
                    "oversized band entered the average"
                );
            }
            let averaged_total: u64 = analysis
                .averaged_bands
                .iter()
                .map(|&i| list.bands()[i].width() as u64)
                .sum();
            assert_eq!(averaged_total, analysis.width_sum);
        }
    }
}
