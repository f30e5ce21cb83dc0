//! Text-line separator detection at line terminals, computed directly on
//! run-length encoded binary document images.
//!
//! Binary document pages compressed with row-wise RLE expose two cheap
//! signals without decompression: the leading white run of every row (the
//! left margin depth) and a virtual column holding the white depth at the
//! right margin. Rows belonging to a text line have shallow margins; rows
//! inside the gap between two lines have deep ones. Grouping consecutive
//! deep rows yields separator bands, and the midpoint of each band is a
//! separator point at that terminal.
//!
//! The crate covers the full path from raster to evaluated result:
//!
//! - [`rle`] — the run-length matrix representation and its CSV form
//! - [`terminal`] — left/right margin-depth column extraction
//! - [`bands`] — threshold-based separator/text band detection
//! - [`refine`] — wide-band re-analysis plus deletion/insertion corrections
//! - [`points`] — band midpoints with top-margin exclusion
//! - [`eval`] — one-to-one matching, detection rate, under/over rates
//! - [`synth`] — seeded synthetic page generator and an uncompressed
//!   projection-profile oracle for verification
//! - [`pbm`] — Netpbm P1/P4 input and output
//! - [`pipeline`] — composition of the above per document side

pub mod bands;
pub mod error;
pub mod eval;
pub mod pbm;
pub mod pipeline;
pub mod points;
pub mod probes;
pub mod refine;
pub mod rle;
pub mod synth;
pub mod terminal;

pub use bands::{default_threshold, detect_bands, detect_mask, mask_to_bands};
pub use bands::{Band, BandKind, BandList, DetectionParams};
pub use error::{Error, Result};
pub use eval::{
    detection_rate, expected_point_count, fp_rate, match_points, tn_rate, EvalReport, Fraction,
    GroundTruth, Matching,
};
pub use pipeline::{segment_columns, segment_document, SegmentOptions, SideOutcome};
pub use points::{assemble, band_midpoint, Provenance, SeparatorPoint, SeparatorPoints};
pub use refine::{
    find_under_separation, insert_missing_separators, refine_roi, remove_over_separation,
    RefinementTrace, RoiInterval, RoiSet, RoiTag,
};
pub use rle::{
    decode_image, decode_row, encode_image, encode_row, read_rle_csv, write_rle_csv, BitRow,
    RleDocument,
};
pub use synth::{generate, oracle_segment, Artifact, LineSpec, PageSpec};
pub use terminal::{left_column, right_column, Side, TerminalColumn};
