use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spmrf::partition::{slic_superpixels, SlicParams};
use spmrf::seg::{overlap_ratio, segment_pixel, segment_superpixel, EdgeMap, Mask, SegmentParams, Seeds, Segmentation};
use spmrf::{identity_partition, RgbImage};

use crate::cli::{image_id, load_edges, load_image, load_mask, ms};
use crate::error::{read_file, CliError, CliResult};
use crate::seeds::SeedsJson;
use crate::synth;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `<id>.png|ppm|pgm` images with `<id>.seeds.json` and
    /// optional `<id>.edges.pgm|png` and `<id>.truth.pgm|png`.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub corpus: Option<PathBuf>,
    /// Generate N synthetic scenes instead of reading a corpus.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Size of synthetic scenes, WxH.
    #[arg(long, default_value = "481x321", value_parser = parse_size)]
    pub size: (usize, usize),
    /// Seed for the synthetic corpus.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 800)]
    pub superpixels: usize,
    /// Use the identity partition (one superpixel per pixel).
    #[arg(long)]
    pub identity: bool,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let parse = |v: &str| v.parse::<usize>().ok().filter(|&n| n > 0).ok_or(format!("bad dimension {v:?}"));
    Ok((parse(w)?, parse(h)?))
}

/// One CSV row. Summary rows put the statistic name in `image`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub image: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub agg_ms: f64,
    pub sp_solve_ms: f64,
    pub px_solve_ms: f64,
    pub sp_energy: f64,
    pub px_energy: f64,
    pub overlap_sp: Option<f64>,
    pub overlap_px: Option<f64>,
}

impl BenchRecord {
    pub fn from_runs(image: &str, sp: &Segmentation, px: &Segmentation, truth: &Mask) -> CliResult<Self> {
        let overlap = |m: &Mask| overlap_ratio(m, truth).map_err(CliError::core("truth"));
        Ok(Self {
            overlap_sp: Some(overlap(&sp.mask)?),
            overlap_px: Some(overlap(&px.mask)?),
            ..Self::timing_only(image, sp, px)
        })
    }

    fn timing_only(image: &str, sp: &Segmentation, px: &Segmentation) -> Self {
        Self {
            image: image.to_string(),
            k: sp.nodes as f64,
            agg_ms: ms(sp.timings.aggregation),
            sp_solve_ms: ms(sp.timings.solve),
            px_solve_ms: ms(px.timings.solve),
            sp_energy: sp.result.energy,
            px_energy: px.result.energy,
            overlap_sp: None,
            overlap_px: None,
        }
    }
}

pub const STATISTICS: [&str; 5] = ["mean", "std", "min", "median", "max"];

/// mean, sample standard deviation, min, median, max.
pub fn statistics(values: &[f64]) -> [f64; 5] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
    [mean, std, sorted[0], median, sorted[sorted.len() - 1]]
}

pub fn summary_rows(records: &[BenchRecord]) -> Vec<BenchRecord> {
    let column = |f: fn(&BenchRecord) -> f64| statistics(&records.iter().map(f).collect::<Vec<_>>());
    let optional = |f: fn(&BenchRecord) -> Option<f64>| {
        let values: Option<Vec<f64>> = records.iter().map(f).collect();
        values.map(|v| statistics(&v))
    };
    let k = column(|r| r.k);
    let agg = column(|r| r.agg_ms);
    let sp = column(|r| r.sp_solve_ms);
    let px = column(|r| r.px_solve_ms);
    let spe = column(|r| r.sp_energy);
    let pxe = column(|r| r.px_energy);
    let osp = optional(|r| r.overlap_sp);
    let opx = optional(|r| r.overlap_px);
    STATISTICS
        .iter()
        .enumerate()
        .map(|(i, name)| BenchRecord {
            image: name.to_string(),
            k: k[i],
            agg_ms: agg[i],
            sp_solve_ms: sp[i],
            px_solve_ms: px[i],
            sp_energy: spe[i],
            px_energy: pxe[i],
            overlap_sp: osp.map(|s| s[i]),
            overlap_px: opx.map(|s| s[i]),
        })
        .collect()
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_records(path: &Path, records: &[BenchRecord]) -> CliResult<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let fresh = file.metadata().map_err(io)?.len() == 0;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(io)?;
    Ok(())
}

fn write_records(out: impl std::io::Write, records: &[BenchRecord]) -> CliResult<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|source| CliError::Io { path: PathBuf::from("-"), source })?;
    Ok(())
}

pub struct BenchItem {
    pub id: String,
    pub image: RgbImage,
    pub edges: EdgeMap,
    pub seeds: Seeds,
    pub truth: Option<Mask>,
}

fn find_sidecar(dir: &Path, id: &str, kind: &str, extensions: &[&str]) -> Option<PathBuf> {
    extensions.iter().map(|ext| dir.join(format!("{id}.{kind}.{ext}"))).find(|p| p.is_file())
}

pub fn load_corpus(dir: &Path) -> CliResult<Vec<BenchItem>> {
    let io = |source| CliError::Io { path: dir.to_path_buf(), source };
    let mut images: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            let ext_ok = p
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ["png", "ppm", "pgm"].contains(&e.to_ascii_lowercase().as_str()));
            let plain_stem = p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| !s.contains('.'));
            ext_ok && plain_stem && p.is_file()
        })
        .collect();
    images.sort();
    let mut items = Vec::new();
    for path in images {
        let id = image_id(&path);
        let image = load_image(&path)?;
        let edges_path = find_sidecar(dir, &id, "edges", &["pgm", "png"]);
        let edges = load_edges(edges_path.as_deref(), &image)?;
        let seeds_path = dir.join(format!("{id}.seeds.json"));
        if !seeds_path.is_file() {
            return Err(CliError::Input(format!("{}: missing seeds file", seeds_path.display())));
        }
        let seeds = SeedsJson::parse(&read_file(&seeds_path)?)
            .map_err(CliError::Input)?
            .to_seeds(image.geometry())
            .map_err(CliError::core(seeds_path.display().to_string()))?;
        let truth = find_sidecar(dir, &id, "truth", &["pgm", "png"]).map(|p| load_mask(&p)).transpose()?;
        items.push(BenchItem { id, image, edges, seeds, truth });
    }
    if items.is_empty() {
        return Err(CliError::Input(format!("{}: corpus contains no images", dir.display())));
    }
    Ok(items)
}

pub fn synthetic_corpus(count: usize, (width, height): (usize, usize), seed: u64) -> CliResult<Vec<BenchItem>> {
    if count == 0 {
        return Err(CliError::Input("synthetic corpus must contain at least one image".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (image, truth) = synth::scene(&mut rng, width, height, 0.08);
            let seeds = synth::robot_seeds(&truth, (width.min(height) / 50).max(2)).map_err(CliError::core("seeds"))?;
            Ok(BenchItem { id: format!("synthetic{i:03}"), edges: EdgeMap::from_gradient(&image), image, seeds, truth: Some(truth) })
        })
        .collect()
}

/// Per-repetition records for every item. Superpixel generation happens once
/// per image and is not timed.
pub fn bench_records(items: &[BenchItem], args: &BenchArgs) -> CliResult<Vec<BenchRecord>> {
    let params = SegmentParams::with_lambda(args.lambda);
    let mut records = Vec::new();
    for item in items {
        let g = item.image.geometry();
        let partition = if args.identity {
            identity_partition(g)
        } else {
            slic_superpixels(&item.image, &SlicParams::new(args.superpixels.min(g.pixel_count())))
                .map_err(CliError::core(format!("{}: superpixels", item.id)))?
        };
        for _ in 0..args.repeat.max(1) {
            let ctx = || CliError::core(item.id.clone());
            let sp = segment_superpixel(&item.image, &item.edges, &item.seeds, &partition, &params).map_err(ctx())?;
            let px = segment_pixel(&item.image, &item.edges, &item.seeds, &params).map_err(ctx())?;
            records.push(match &item.truth {
                Some(truth) => BenchRecord::from_runs(&item.id, &sp, &px, truth)?,
                None => BenchRecord::timing_only(&item.id, &sp, &px),
            });
        }
    }
    Ok(records)
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let items = match (&args.corpus, args.synthetic) {
        (Some(dir), _) => load_corpus(dir)?,
        (None, Some(n)) => synthetic_corpus(n, args.size, args.seed)?,
        (None, None) => return Err(CliError::Usage("either --corpus or --synthetic is required".into())),
    };
    let records = bench_records(&items, args)?;
    let summary = summary_rows(&records);
    let all: Vec<BenchRecord> = records.iter().chain(&summary).cloned().collect();
    match &args.report {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            write_records(file, &all)?;
        }
        None => write_records(std::io::stdout().lock(), &all)?,
    }
    print_table(&records);
    Ok(())
}

fn print_table(records: &[BenchRecord]) {
    let secs = |f: fn(&BenchRecord) -> f64| statistics(&records.iter().map(|r| f(r) / 1e3).collect::<Vec<_>>());
    let rows = [
        ("pixel-level solve (s)", secs(|r| r.px_solve_ms)),
        ("superpixel-level solve (s)", secs(|r| r.sp_solve_ms)),
        ("aggregation (s)", secs(|r| r.agg_ms)),
    ];
    println!();
    print!("{:<28}", "");
    for name in STATISTICS {
        print!("{name:>12}");
    }
    println!();
    for (label, stats) in &rows {
        print!("{label:<28}");
        for v in stats {
            print!("{v:>12.6}");
        }
        println!();
    }
    println!("speedup (mean pixel / mean superpixel solve): {:.1}x", rows[0].1[0] / rows[1].1[0]);
}
