use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use spmrf::fixture::{parse_pixel_mrf, write_superpixel_mrf};
use spmrf::partition::{load_partition, slic_superpixels, SlicParams};
use spmrf::seg::{overlap_ratio, segment_pixel, segment_superpixel, EdgeMap, Mask, SegmentParams, Segmentation};
use spmrf::{superpixelize, BinaryEnergy, RgbImage, SuperpixelPartition};

use crate::bench::{self, BenchArgs, BenchRecord};
use crate::error::{read_file, write_file, CliError, CliResult, EXIT_USAGE};
use crate::seeds::SeedsJson;

#[derive(Debug, Parser)]
#[command(name = "spmrf", version, about = "Superpixel-level MRF reduction, graph-cut segmentation and benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce a pixel MRF fixture to a superpixel MRF fixture.
    Superpixelize {
        #[arg(long)]
        mrf: PathBuf,
        /// Partition as CSV (`w,h` header, one index per line) or 16-bit PGM.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment one image from seeds.
    Segment(SegmentArgs),
    /// Time superpixel- against pixel-level solving over a corpus.
    Bench(BenchArgs),
    /// Run the HTTP service (port from SPMRF_PORT, default 8080).
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Binary edge map (PGM/PNG); defaults to the image's gradient edges.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Seed JSON, inline or as a file path.
    #[arg(long)]
    pub seeds: String,
    #[arg(long, conflicts_with = "slic")]
    pub partition: Option<PathBuf>,
    /// Generate about N superpixels (default 800 when no partition is given).
    #[arg(long)]
    pub slic: Option<usize>,
    /// Solve on pixels instead of superpixels.
    #[arg(long)]
    pub pixel_level: bool,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Output mask; PNG if the extension is .png, binary PGM otherwise.
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Append a benchmark row (needs --truth).
    #[arg(long, requires = "truth")]
    pub report: Option<PathBuf>,
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Superpixelize { mrf, partition, out } => superpixelize_cmd(&mrf, &partition, &out),
        Command::Segment(args) => segment_cmd(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Serve { port } => crate::service::serve_blocking(port),
    }
}

fn superpixelize_cmd(mrf_path: &Path, partition_path: &Path, out: &Path) -> CliResult<()> {
    let text = String::from_utf8(read_file(mrf_path)?)
        .map_err(|_| CliError::Input(format!("{}: not UTF-8 text", mrf_path.display())))?;
    let mrf = parse_pixel_mrf(&text).map_err(CliError::core(mrf_path.display().to_string()))?;
    let partition = load_partition(&read_file(partition_path)?).map_err(CliError::core(partition_path.display().to_string()))?;
    let (sp, _) = superpixelize(&mrf, &partition).map_err(CliError::core("superpixelize"))?;
    write_file(out, write_superpixel_mrf(&sp).as_bytes())?;
    println!("C = {}", sp.constant());
    println!("K = {}", sp.count());
    Ok(())
}

pub fn load_image(path: &Path) -> CliResult<RgbImage> {
    RgbImage::decode(&read_file(path)?).map_err(CliError::core(path.display().to_string()))
}

pub fn load_edges(path: Option<&Path>, image: &RgbImage) -> CliResult<EdgeMap> {
    match path {
        Some(path) => EdgeMap::decode(&read_file(path)?).map_err(CliError::core(path.display().to_string())),
        None => Ok(EdgeMap::from_gradient(image)),
    }
}

pub fn load_mask(path: &Path) -> CliResult<Mask> {
    Mask::decode(&read_file(path)?).map_err(CliError::core(path.display().to_string()))
}

/// Inline JSON if it starts with `{`, otherwise a file path.
pub fn load_seeds_json(arg: &str) -> CliResult<SeedsJson> {
    let bytes = if arg.trim_start().starts_with('{') { arg.as_bytes().to_vec() } else { read_file(Path::new(arg))? };
    SeedsJson::parse(&bytes).map_err(CliError::Input)
}

pub fn write_mask(path: &Path, mask: &Mask) -> CliResult<()> {
    let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { mask.to_png().map_err(CliError::core("encode mask"))? } else { mask.to_pgm() };
    write_file(path, &bytes)
}

fn segment_cmd(args: &SegmentArgs) -> CliResult<()> {
    let image = load_image(&args.image)?;
    let g = image.geometry();
    let edges = load_edges(args.edges.as_deref(), &image)?;
    let seeds = load_seeds_json(&args.seeds)?.to_seeds(g).map_err(CliError::core("seeds"))?;
    let params = SegmentParams::with_lambda(args.lambda);
    let truth = args.truth.as_deref().map(load_mask).transpose()?;

    let partition = if args.pixel_level && args.report.is_none() {
        None
    } else {
        Some(match &args.partition {
            Some(path) => load_partition(&read_file(path)?).map_err(CliError::core(path.display().to_string()))?,
            None => slic_superpixels(&image, &SlicParams::new(args.slic.unwrap_or(800).min(g.pixel_count())))
                .map_err(CliError::core("superpixels"))?,
        })
    };
    let run_sp = |partition: &SuperpixelPartition| {
        segment_superpixel(&image, &edges, &seeds, partition, &params).map_err(CliError::core("segment"))
    };
    let run_px = || segment_pixel(&image, &edges, &seeds, &params).map_err(CliError::core("segment"));

    let (result, other): (Segmentation, Option<Segmentation>) = match (&partition, args.pixel_level) {
        (None, _) => (run_px()?, None),
        (Some(p), false) => (run_sp(p)?, args.report.as_ref().map(|_| run_px()).transpose()?),
        (Some(p), true) => (run_px()?, Some(run_sp(p)?)),
    };

    let level = if args.pixel_level { "pixel" } else { "superpixel" };
    println!("level = {level}");
    println!("nodes = {}", result.nodes);
    println!("energy = {}", result.result.energy);
    let t = result.timings;
    println!(
        "time_ms unary = {:.3} aggregation = {:.3} solve = {:.3} total = {:.3}",
        ms(t.unary),
        ms(t.aggregation),
        ms(t.solve),
        ms(t.total)
    );
    if let Some(truth) = &truth {
        let overlap = overlap_ratio(&result.mask, truth).map_err(CliError::core("truth"))?;
        println!("overlap = {overlap}");
    }
    if let Some(path) = &args.out_mask {
        write_mask(path, &result.mask)?;
    }

    if let (Some(report), Some(truth), Some(other)) = (&args.report, &truth, other) {
        let (sp, px) = if args.pixel_level { (other, result) } else { (result, other) };
        let record = BenchRecord::from_runs(&image_id(&args.image), &sp, &px, truth)?;
        bench::append_records(report, &[record])?;
    }
    Ok(())
}

pub fn image_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
