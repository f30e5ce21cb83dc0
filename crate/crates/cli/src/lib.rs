//! Command implementations behind the `rle-lineseg` binary, exposed as a
//! library so integration tests can drive them in-process.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use rle_lineseg::bands::{Band, BandList};
use rle_lineseg::eval::{default_tolerance, evaluate, EvalReport, Fraction, GroundTruth};
use rle_lineseg::pbm;
use rle_lineseg::pipeline::{segment_document, SegmentOptions, SideOutcome};
use rle_lineseg::points::SeparatorPoint;
use rle_lineseg::refine::RefinementTrace;
use rle_lineseg::rle::{self, RleDocument};
use rle_lineseg::synth::{self, PageSpec};
use rle_lineseg::{Error as CoreError, Side};

pub const SCHEMA_VERSION: u32 = 1;

/// Env var capping batch-mode worker threads.
pub const THREADS_ENV: &str = "RLE_LINESEG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Auto,
    Pbm,
    RleCsv,
}

/// Everything `segment` needs beyond the input path.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub options: SegmentOptions,
    pub format: InputFormat,
    pub sides: Vec<Side>,
    pub tolerance: Option<usize>,
    pub pretty: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            options: SegmentOptions::default(),
            format: InputFormat::Auto,
            sides: vec![Side::Left, Side::Right],
            tolerance: None,
            pretty: false,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EncodeSummary {
    pub schema: u32,
    pub width: u32,
    pub height: usize,
    pub run_cells: usize,
    /// Input bits per stored run cell.
    pub compression_ratio: String,
}

/// Parameters echoed into every segmentation report.
#[derive(Debug, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub threshold_divisor: u32,
    pub large_band_divisor: u32,
    pub under_sep_factor: f64,
    pub max_recursion_depth: u32,
    pub over_sep_fraction: f64,
    pub insertion_factor: f64,
    pub enable_insertion: bool,
    pub enable_deletion: bool,
    pub insertion_first: bool,
    /// Match tolerance requested at segmentation time, picked up by
    /// `evaluate` unless overridden there.
    #[serde(default)]
    pub tolerance: Option<usize>,
}

impl ParamsEcho {
    fn new(opts: &SegmentOptions, tolerance: Option<usize>) -> Self {
        ParamsEcho {
            threshold_divisor: opts.params.threshold_divisor,
            large_band_divisor: opts.params.large_band_divisor,
            under_sep_factor: opts.params.under_sep_factor,
            max_recursion_depth: opts.params.max_recursion_depth,
            over_sep_fraction: opts.params.over_sep_fraction,
            insertion_factor: opts.params.insertion_factor,
            enable_insertion: opts.enable_insertion,
            enable_deletion: opts.enable_deletion,
            insertion_first: opts.insertion_first,
            tolerance,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SideReport {
    pub side: Side,
    pub points: Vec<SeparatorPoint>,
    pub bands: Vec<Band>,
    pub trace: RefinementTrace,
}

impl From<SideOutcome> for SideReport {
    fn from(outcome: SideOutcome) -> Self {
        SideReport {
            side: outcome.side,
            points: outcome.points.points,
            bands: outcome.bands.bands().to_vec(),
            trace: outcome.trace,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentReport {
    pub schema: u32,
    pub source: String,
    pub width: u32,
    pub height: usize,
    pub params: ParamsEcho,
    pub sides: Vec<SideReport>,
}

#[derive(Debug, Serialize)]
pub struct BatchReport {
    pub schema: u32,
    pub pages: Vec<SegmentReport>,
}

#[derive(Debug, Serialize)]
pub struct EvaluateOutput {
    pub schema: u32,
    pub report: EvalReport,
}

#[derive(Debug, Serialize)]
pub struct CountEvaluateOutput {
    pub schema: u32,
    pub o2o: usize,
    pub n: usize,
    pub dr: Fraction,
    pub dr_percent: String,
}

#[derive(Debug, Serialize)]
pub struct GenerateSummary {
    pub schema: u32,
    pub seed: u64,
    pub width: u32,
    pub height: usize,
    pub lines: usize,
    pub artifacts: usize,
    pub files: Vec<String>,
}

fn sniff_format(path: &Path, requested: InputFormat) -> anyhow::Result<InputFormat> {
    if requested != InputFormat::Auto {
        return Ok(requested);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("pbm") => Ok(InputFormat::Pbm),
        Some("csv") | Some("rlecsv") => Ok(InputFormat::RleCsv),
        _ => {
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            if bytes.starts_with(b"P1") || bytes.starts_with(b"P4") {
                Ok(InputFormat::Pbm)
            } else {
                Ok(InputFormat::RleCsv)
            }
        }
    }
}

fn load_document(path: &Path, format: InputFormat) -> anyhow::Result<RleDocument> {
    let format = sniff_format(path, format)?;
    let doc = match format {
        InputFormat::Pbm => {
            let raster = pbm::read_pbm(path)?;
            rle::encode_image(&raster)?
        }
        InputFormat::RleCsv | InputFormat::Auto => rle::read_rle_csv(path)?,
    };
    Ok(doc)
}

/// Encode a PBM raster into the RLE CSV format, reporting the size of the
/// run matrix relative to the raw bitmap.
pub fn cmd_encode(input: &Path, output: &Path) -> anyhow::Result<EncodeSummary> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let raster = pbm::parse_pbm(&bytes)?;
    let doc = rle::encode_image(&raster)?;
    rle::write_rle_csv(&doc, output)?;
    let run_cells: usize = doc.rows().iter().map(|r| r.len()).sum();
    let bits = doc.width() as f64 * doc.height() as f64;
    Ok(EncodeSummary {
        schema: SCHEMA_VERSION,
        width: doc.width(),
        height: doc.height(),
        run_cells,
        compression_ratio: format!("{:.2}", bits / run_cells as f64),
    })
}

fn segment_file(path: &Path, config: &PipelineConfig) -> anyhow::Result<SegmentReport> {
    config.options.params.validate()?;
    if config.sides.is_empty() {
        bail!("at least one side must be selected");
    }
    let doc = load_document(path, config.format)?;
    let outcomes = segment_document(&doc, &config.sides, &config.options);
    Ok(SegmentReport {
        schema: SCHEMA_VERSION,
        source: path.display().to_string(),
        width: doc.width(),
        height: doc.height(),
        params: ParamsEcho::new(&config.options, config.tolerance),
        sides: outcomes.into_iter().map(SideReport::from).collect(),
    })
}

fn worker_count(jobs: usize) -> usize {
    let configured = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    configured.unwrap_or(available).min(jobs).max(1)
}

fn segment_directory(dir: &Path, config: &PipelineConfig) -> anyhow::Result<BatchReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("pbm") | Some("csv") | Some("rlecsv")
            )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .pbm or .csv inputs in {}", dir.display());
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<anyhow::Result<SegmentReport>>>> =
        Mutex::new((0..files.len()).map(|_| None).collect());
    let workers = worker_count(files.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= files.len() {
                    break;
                }
                let result = segment_file(&files[i], config);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    let mut pages = Vec::with_capacity(files.len());
    for (i, slot) in slots.into_inner().unwrap().into_iter().enumerate() {
        let report = slot
            .unwrap_or_else(|| Err(anyhow!("page was never processed")))
            .with_context(|| format!("segmenting {}", files[i].display()))?;
        pages.push(report);
    }
    Ok(BatchReport { schema: SCHEMA_VERSION, pages })
}

fn emit_json<T: Serialize>(value: &T, pretty: bool) -> anyhow::Result<String> {
    Ok(if pretty {
        serde_json::to_string_pretty(value)?
    } else {
        serde_json::to_string(value)?
    })
}

/// Segment a file (or every page file in a directory) and return the JSON
/// report. Compressed CSV input is segmented without ever rebuilding the
/// raster.
pub fn cmd_segment(input: &Path, config: &PipelineConfig) -> anyhow::Result<String> {
    if input.is_dir() {
        emit_json(&segment_directory(input, config)?, config.pretty)
    } else {
        emit_json(&segment_file(input, config)?, config.pretty)
    }
}

/// Evaluate a segmentation report against ground truth. The truth's side
/// picks the matching side section; the default tolerance is half the
/// median text-band width of that section (at least 3 rows).
pub fn cmd_evaluate(
    detected_path: &Path,
    truth_path: &Path,
    tolerance: Option<usize>,
    ignore_inserted: bool,
) -> anyhow::Result<EvaluateOutput> {
    let detected_text = std::fs::read_to_string(detected_path)
        .with_context(|| format!("reading {}", detected_path.display()))?;
    let report: SegmentReport = serde_json::from_str(&detected_text)
        .with_context(|| format!("parsing detected JSON {}", detected_path.display()))?;
    if report.schema != SCHEMA_VERSION {
        bail!("unsupported schema {} in {}", report.schema, detected_path.display());
    }

    let truth_text = std::fs::read_to_string(truth_path)
        .with_context(|| format!("reading {}", truth_path.display()))?;
    let truth: GroundTruth = serde_json::from_str(&truth_text)
        .with_context(|| format!("parsing ground truth {}", truth_path.display()))?;

    let side_report = report
        .sides
        .iter()
        .find(|s| s.side == truth.side)
        .ok_or_else(|| anyhow!("detected JSON has no '{}' side section", truth.side))?;

    let bands = BandList::from_bands(side_report.bands.clone(), report.height)?;
    let tolerance = tolerance
        .or(report.params.tolerance)
        .unwrap_or_else(|| default_tolerance(&bands));
    let points = rle_lineseg::points::SeparatorPoints {
        side: side_report.side,
        points: side_report.points.clone(),
        height: report.height,
    };
    let eval = evaluate(&points, &truth, tolerance, Some(&bands), !ignore_inserted)?;
    Ok(EvaluateOutput { schema: SCHEMA_VERSION, report: eval })
}

/// Count-only evaluation: compute the detection rate from precomputed
/// one-to-one and ground-truth counts.
pub fn cmd_evaluate_counts(o2o: usize, total: usize) -> anyhow::Result<CountEvaluateOutput> {
    let dr = rle_lineseg::eval::detection_rate(o2o, total)?;
    Ok(CountEvaluateOutput {
        schema: SCHEMA_VERSION,
        o2o,
        n: total,
        dr,
        dr_percent: rle_lineseg::eval::percent_display(dr.num, dr.den),
    })
}

/// Draw a horizontal tick at each separator point's terminal and write
/// the annotated raster.
pub fn cmd_overlay(
    input: &Path,
    points_path: &Path,
    output: &Path,
    tick_length: usize,
    ascii: bool,
) -> anyhow::Result<()> {
    let doc = load_document(input, InputFormat::Auto)?;
    let mut raster = rle::decode_image(&doc);
    let width = doc.width() as usize;
    let tick = tick_length.min(width).max(1);

    let text = std::fs::read_to_string(points_path)
        .with_context(|| format!("reading {}", points_path.display()))?;
    let report: SegmentReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing points JSON {}", points_path.display()))?;

    for side_report in &report.sides {
        for point in &side_report.points {
            let row = raster.get_mut(point.row).ok_or_else(|| {
                anyhow!(
                    "separator point at row {} lies outside the {}-row image",
                    point.row,
                    doc.height()
                )
            })?;
            match side_report.side {
                Side::Left => row[..tick].fill(true),
                Side::Right => row[width - tick..].fill(true),
            }
        }
    }

    let format = if ascii { pbm::PbmFormat::Ascii } else { pbm::PbmFormat::Binary };
    pbm::write_pbm(&raster, format, output)?;
    Ok(())
}

/// What `generate` should produce and where.
#[derive(Debug, Clone)]
pub struct GenerateRequest {
    /// Page geometry from a JSON spec file; otherwise a seeded random page.
    pub spec: Option<PathBuf>,
    pub seed: u64,
    pub touch_at_left: bool,
    pub concave_sliver: bool,
    pub out_prefix: PathBuf,
    pub ascii: bool,
}

/// Generate a synthetic page: PBM raster, RLE CSV, and per-side ground
/// truth JSON files under the prefix.
pub fn cmd_generate(request: &GenerateRequest) -> anyhow::Result<GenerateSummary> {
    let spec: PageSpec = match &request.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing page spec {}", path.display()))?
        }
        None => {
            let mut spec = synth::random_page_spec(request.seed);
            if request.touch_at_left {
                synth::add_touch_at_left(&mut spec);
            }
            if request.concave_sliver {
                synth::add_concave_sliver(&mut spec);
            }
            spec
        }
    };

    let page = synth::generate(&spec)?;
    let doc = rle::encode_image(&page.raster)?;

    let prefix = request.out_prefix.as_os_str().to_string_lossy().to_string();
    let pbm_path = PathBuf::from(format!("{prefix}.pbm"));
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    let left_path = PathBuf::from(format!("{prefix}.truth-left.json"));
    let right_path = PathBuf::from(format!("{prefix}.truth-right.json"));

    let format = if request.ascii { pbm::PbmFormat::Ascii } else { pbm::PbmFormat::Binary };
    pbm::write_pbm(&page.raster, format, &pbm_path)?;
    rle::write_rle_csv(&doc, &csv_path)?;
    std::fs::write(&left_path, serde_json::to_string_pretty(&page.truth_left)?)?;
    std::fs::write(&right_path, serde_json::to_string_pretty(&page.truth_right)?)?;

    Ok(GenerateSummary {
        schema: SCHEMA_VERSION,
        seed: spec.seed,
        width: spec.width,
        height: spec.height,
        lines: spec.lines.len(),
        artifacts: spec.artifacts.len(),
        files: vec![
            pbm_path.display().to_string(),
            csv_path.display().to_string(),
            left_path.display().to_string(),
            right_path.display().to_string(),
        ],
    })
}

/// Exit code for an error: 2 for unsupported formats (usage-level), 1 for
/// processing failures.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(CoreError::UnsupportedFormat(_)) = cause.downcast_ref::<CoreError>() {
            return 2;
        }
    }
    1
}
