//! Browser demo: generate a synthetic handwritten-style page, segment it
//! in the compressed domain, and render the bands and separator points
//! onto a canvas buffer.
//!
//! The exported surface is deliberately small — generate, segment,
//! render — with every tunable exposed so the threshold divisor and the
//! corrections can be explored interactively. All heavy lifting lives in
//! the core crate; this module only shuttles JSON strings and an RGBA
//! buffer across the boundary.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rle_lineseg::eval::{default_tolerance, evaluate, EvalReport};
use rle_lineseg::pipeline::{segment_document, SegmentOptions, SideOutcome};
use rle_lineseg::rle::{encode_image, BitRow, RleDocument};
use rle_lineseg::synth::{add_concave_sliver, add_touch_at_left, generate, random_page_spec, GeneratedPage};
use rle_lineseg::{DetectionParams, Error, Provenance, Side};

#[derive(Serialize)]
struct DemoSideResult {
    side: Side,
    points: Vec<DemoPoint>,
    separator_bands: usize,
    report: EvalReport,
}

#[derive(Serialize)]
struct DemoPoint {
    row: usize,
    inserted: bool,
}

#[derive(Serialize)]
struct DemoResult {
    width: u32,
    height: usize,
    lines: usize,
    truth: Vec<usize>,
    run_cells: usize,
    sides: Vec<DemoSideResult>,
}

/// One loaded page plus its latest segmentation.
#[wasm_bindgen]
pub struct LineSegDemo {
    raster: Vec<BitRow>,
    doc: RleDocument,
    page: GeneratedPage,
    lines: usize,
    outcomes: Vec<SideOutcome>,
}

impl LineSegDemo {
    fn build(seed: u64, touch_at_left: bool, concave_sliver: bool) -> Result<LineSegDemo, Error> {
        let mut spec = random_page_spec(seed);
        if touch_at_left {
            add_touch_at_left(&mut spec);
        }
        if concave_sliver {
            add_concave_sliver(&mut spec);
        }
        let lines = spec.lines.len();
        let page = generate(&spec)?;
        let doc = encode_image(&page.raster)?;
        Ok(LineSegDemo { raster: page.raster.clone(), doc, page, lines, outcomes: Vec::new() })
    }

    fn run_segmentation(
        &mut self,
        threshold_divisor: u32,
        enable_insertion: bool,
        enable_deletion: bool,
    ) -> Result<String, Error> {
        let opts = SegmentOptions {
            params: DetectionParams {
                threshold_divisor,
                ..DetectionParams::default()
            },
            enable_insertion,
            enable_deletion,
            insertion_first: false,
        };
        opts.params.validate()?;
        self.outcomes = segment_document(&self.doc, &[Side::Left, Side::Right], &opts);

        let mut sides = Vec::new();
        for outcome in &self.outcomes {
            let truth = match outcome.side {
                Side::Left => &self.page.truth_left,
                Side::Right => &self.page.truth_right,
            };
            let tolerance = default_tolerance(&outcome.bands);
            let report = evaluate(&outcome.points, truth, tolerance, Some(&outcome.bands), true)?;
            sides.push(DemoSideResult {
                side: outcome.side,
                points: outcome
                    .points
                    .points
                    .iter()
                    .map(|p| DemoPoint { row: p.row, inserted: p.provenance == Provenance::Inserted })
                    .collect(),
                separator_bands: outcome.bands.separators().count(),
                report,
            });
        }

        let result = DemoResult {
            width: self.doc.width(),
            height: self.doc.height(),
            lines: self.lines,
            truth: self.page.truth_left.points.clone(),
            run_cells: self.doc.rows().iter().map(|r| r.len()).sum(),
            sides,
        };
        serde_json::to_string(&result)
            .map_err(|e| Error::InvalidInput(format!("serializing demo result: {e}")))
    }

    fn paint_rgba(&self, show_bands: bool, show_points: bool) -> Vec<u8> {
        let width = self.doc.width() as usize;
        let height = self.doc.height();
        let mut buf = vec![255u8; width * height * 4];

        // band tint: left outcome over the left half, right over the right
        if show_bands {
            for outcome in &self.outcomes {
                let (x0, x1) = match outcome.side {
                    Side::Left => (0, width / 2),
                    Side::Right => (width / 2, width),
                };
                for band in outcome.bands.separators() {
                    for row in band.start..=band.end {
                        for x in x0..x1 {
                            let px = (row * width + x) * 4;
                            buf[px] = 209;
                            buf[px + 1] = 237;
                            buf[px + 2] = 215;
                        }
                    }
                }
            }
        }

        for (y, bits) in self.raster.iter().enumerate() {
            for (x, &bit) in bits.iter().enumerate() {
                if bit {
                    let px = (y * width + x) * 4;
                    buf[px] = 32;
                    buf[px + 1] = 32;
                    buf[px + 2] = 40;
                }
            }
        }

        if show_points {
            let tick = (width / 8).max(4).min(width);
            for outcome in &self.outcomes {
                for point in &outcome.points.points {
                    let (r, g, b) = if point.provenance == Provenance::Inserted {
                        (255, 140, 0) // inserted: orange
                    } else {
                        (220, 20, 60) // detected: crimson
                    };
                    let range = match outcome.side {
                        Side::Left => 0..tick,
                        Side::Right => width - tick..width,
                    };
                    for x in range {
                        let px = (point.row * width + x) * 4;
                        buf[px] = r;
                        buf[px + 1] = g;
                        buf[px + 2] = b;
                    }
                }
            }
        }

        buf
    }
}

fn to_js(err: Error) -> JsValue {
    JsValue::from_str(&err.to_string())
}

#[wasm_bindgen]
impl LineSegDemo {
    /// Build a seeded page. The artifact flags plant a left-terminal
    /// touching pair and a concave pseudo gap.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, touch_at_left: bool, concave_sliver: bool) -> Result<LineSegDemo, JsValue> {
        LineSegDemo::build(u64::from(seed), touch_at_left, concave_sliver).map_err(to_js)
    }

    /// Segment both terminals with the given threshold divisor and
    /// correction switches; returns a JSON summary with points, band
    /// counts and the evaluation against the page's built-in truth.
    pub fn segment(
        &mut self,
        threshold_divisor: u32,
        enable_insertion: bool,
        enable_deletion: bool,
    ) -> Result<String, JsValue> {
        self.run_segmentation(threshold_divisor, enable_insertion, enable_deletion)
            .map_err(to_js)
    }

    /// RGBA pixels (row-major, width*height*4) of the page with optional
    /// band tint and separator-point ticks from the last `segment` call.
    pub fn render(&self, show_bands: bool, show_points: bool) -> Vec<u8> {
        self.paint_rgba(show_bands, show_points)
    }

    pub fn width(&self) -> u32 {
        self.doc.width()
    }

    pub fn height(&self) -> u32 {
        self.doc.height() as u32
    }
}
