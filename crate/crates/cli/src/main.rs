use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rle_lineseg::bands::DetectionParams;
use rle_lineseg::pipeline::SegmentOptions;
use rle_lineseg::Side;
use rle_lineseg_cli::{
    cmd_encode, cmd_evaluate, cmd_evaluate_counts, cmd_generate, cmd_overlay, cmd_segment,
    exit_code_for, GenerateRequest, InputFormat, PipelineConfig,
};

/// Text-line separator detection at line terminals, directly on
/// run-length encoded document images.
#[derive(Parser)]
#[command(name = "rle-lineseg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PBM (P1/P4) bitmap into the RLE CSV format.
    Encode {
        /// Input bitmap (.pbm).
        input: PathBuf,
        /// Output run-length matrix (.csv).
        output: PathBuf,
    },
    /// Detect separator points; prints a JSON report to stdout.
    ///
    /// A directory input segments every .pbm/.csv page inside, ordered by
    /// filename; RLE_LINESEG_THREADS caps the worker threads.
    Segment {
        /// Input page (.pbm or RLE .csv) or a directory of pages.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[command(flatten)]
        params: ParamArgs,
        /// Skip the missed-separator insertion correction.
        #[arg(long)]
        no_insertion: bool,
        /// Skip the spurious-separator deletion correction.
        #[arg(long)]
        no_deletion: bool,
        /// Run insertion before deletion instead of after.
        #[arg(long)]
        insertion_first: bool,
        /// Pretty-print the JSON report.
        #[arg(long)]
        pretty: bool,
    },
    /// Score detected points against ground truth.
    Evaluate {
        /// Segmentation report JSON (from `segment`).
        #[arg(long, required_unless_present = "o2o")]
        detected: Option<PathBuf>,
        /// Ground truth JSON ({"side", "total_lines", "points"}).
        #[arg(long, required_unless_present = "o2o")]
        truth: Option<PathBuf>,
        /// Match tolerance in rows; default is half the median text-band
        /// width of the evaluated page (at least 3).
        #[arg(long)]
        tolerance: Option<usize>,
        /// Drop inserted separator points before matching.
        #[arg(long)]
        ignore_inserted: bool,
        /// Count-only mode: one-to-one match count (needs --total-lines).
        #[arg(long, requires = "total_lines", conflicts_with_all = ["detected", "truth"])]
        o2o: Option<usize>,
        /// Count-only mode: ground-truth line count.
        #[arg(long)]
        total_lines: Option<usize>,
    },
    /// Write a synthetic page: PBM, RLE CSV, and ground truth JSON.
    Generate {
        /// Page geometry JSON; omit for a seeded random page.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Seed for the random page (ignored with --spec).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bridge the middle pair of lines at the left terminal.
        #[arg(long)]
        touch_at_left: bool,
        /// Carve a pseudo gap through the middle line at the left terminal.
        #[arg(long)]
        concave_sliver: bool,
        /// Output prefix; writes PREFIX.pbm, PREFIX.csv,
        /// PREFIX.truth-left.json and PREFIX.truth-right.json.
        #[arg(long)]
        out_prefix: PathBuf,
        /// Write the bitmap as ASCII P1 instead of packed P4.
        #[arg(long)]
        ascii: bool,
    },
    /// Overlay separator-point ticks onto a page bitmap.
    Overlay {
        /// Input page (.pbm or RLE .csv).
        input: PathBuf,
        /// Segmentation report JSON with the points to draw.
        #[arg(long)]
        points: PathBuf,
        /// Annotated output bitmap (.pbm).
        #[arg(long)]
        output: PathBuf,
        /// Tick length in pixels.
        #[arg(long, default_value_t = 12)]
        tick_length: usize,
        /// Write ASCII P1 instead of packed P4.
        #[arg(long)]
        ascii: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Auto,
    Pbm,
    Rlecsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<Side> {
        match self {
            SideArg::Left => vec![Side::Left],
            SideArg::Right => vec![Side::Right],
            SideArg::Both => vec![Side::Left, Side::Right],
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Separator threshold is width / this divisor (evaluated: 15, 25, 35).
    #[arg(long, default_value_t = 25)]
    threshold_divisor: u32,
    /// Bands wider than height / this divisor bypass the average.
    #[arg(long, default_value_t = 10)]
    large_band_divisor: u32,
    /// Wide-band factor over the average separator width.
    #[arg(long, default_value_t = 2.0)]
    under_sep_factor: f64,
    /// Sliver fraction of the median text width for deletion.
    #[arg(long, default_value_t = 0.5)]
    over_sep_fraction: f64,
    /// Oversize factor of the median text width for insertion probing.
    #[arg(long, default_value_t = 2.0)]
    insertion_factor: f64,
    /// Re-analysis round cap inside regions of interest.
    #[arg(long, default_value_t = 8)]
    max_depth: u32,
    /// Match tolerance in rows (stored in the report for evaluation).
    #[arg(long)]
    tolerance: Option<usize>,
}

impl ParamArgs {
    fn detection_params(&self) -> DetectionParams {
        DetectionParams {
            threshold_divisor: self.threshold_divisor,
            large_band_divisor: self.large_band_divisor,
            under_sep_factor: self.under_sep_factor,
            max_recursion_depth: self.max_depth,
            over_sep_fraction: self.over_sep_fraction,
            insertion_factor: self.insertion_factor,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode { input, output } => {
            let summary = cmd_encode(&input, &output)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Segment {
            input,
            format,
            side,
            params,
            no_insertion,
            no_deletion,
            insertion_first,
            pretty,
        } => {
            let config = PipelineConfig {
                options: SegmentOptions {
                    params: params.detection_params(),
                    enable_insertion: !no_insertion,
                    enable_deletion: !no_deletion,
                    insertion_first,
                },
                format: match format {
                    FormatArg::Auto => InputFormat::Auto,
                    FormatArg::Pbm => InputFormat::Pbm,
                    FormatArg::Rlecsv => InputFormat::RleCsv,
                },
                sides: side.sides(),
                tolerance: params.tolerance,
                pretty,
            };
            println!("{}", cmd_segment(&input, &config)?);
        }
        Command::Evaluate { detected, truth, tolerance, ignore_inserted, o2o, total_lines } => {
            if let Some(o2o) = o2o {
                let total = total_lines.expect("clap enforces --total-lines with --o2o");
                let out = cmd_evaluate_counts(o2o, total)?;
                println!("{}", serde_json::to_string(&out)?);
            } else {
                let detected = detected.expect("clap enforces --detected without --o2o");
                let truth = truth.expect("clap enforces --truth without --o2o");
                let out = cmd_evaluate(&detected, &truth, tolerance, ignore_inserted)?;
                println!("{}", serde_json::to_string(&out)?);
            }
        }
        Command::Generate { spec, seed, touch_at_left, concave_sliver, out_prefix, ascii } => {
            let request = GenerateRequest {
                spec,
                seed,
                touch_at_left,
                concave_sliver,
                out_prefix,
                ascii,
            };
            let summary = cmd_generate(&request)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Overlay { input, points, output, tick_length, ascii } => {
            cmd_overlay(&input, &points, &output, tick_length, ascii)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
