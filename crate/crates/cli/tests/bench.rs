use std::path::Path;
use std::process::Command;

use spmrf::seg::{EdgeMap, Mask};
use spmrf::{GridGeometry, RgbImage};

fn write_item(dir: &Path, id: &str, w: usize, h: usize) {
    let g = GridGeometry::new(w, h).unwrap();
    let truth = Mask::from_fn(g, |x, y| x >= w / 4 && x < 3 * w / 4 && y >= h / 4 && y < 3 * h / 4);
    let image = RgbImage::from_fn(g, |x, y| if truth.get(g.index(x, y)) { [0.8, 0.3, 0.2] } else { [0.2, 0.4, 0.8] });
    std::fs::write(dir.join(format!("{id}.png")), image.to_png().unwrap()).unwrap();
    std::fs::write(dir.join(format!("{id}.edges.pgm")), EdgeMap::from_gradient(&image).to_pgm()).unwrap();
    std::fs::write(dir.join(format!("{id}.truth.pgm")), truth.to_pgm()).unwrap();
    let seeds = format!(r#"{{"fg": [[{}, {}]], "bg": [[0, 0]]}}"#, w / 2, h / 2);
    std::fs::write(dir.join(format!("{id}.seeds.json")), seeds).unwrap();
}

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spmrf")).arg("bench").args(args).output().unwrap()
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    (header, reader.records().map(Result::unwrap).collect())
}

#[test]
fn repetitions_and_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_item(dir.path(), "tiny", 12, 10);
    let report = dir.path().join("report.csv");
    let out = bench(&[
        "--corpus",
        dir.path().to_str().unwrap(),
        "--superpixels",
        "12",
        "--repeat",
        "3",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_rows(&report);
    assert_eq!(header, ["image", "K", "agg_ms", "sp_solve_ms", "px_solve_ms", "sp_energy", "px_energy", "overlap_sp", "overlap_px"]);
    let ids: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(ids, ["tiny", "tiny", "tiny", "mean", "std", "min", "median", "max"]);
    for row in &rows[..3] {
        for col in 2..5 {
            assert!(row[col].parse::<f64>().unwrap() > 0.0);
        }
        assert!(row[5].parse::<f64>().unwrap().is_finite());
    }
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("superpixel-level solve (s)"));
    assert!(table.contains("speedup"));
}

#[test]
fn identity_corpus_matches_pixel_level() {
    let dir = tempfile::tempdir().unwrap();
    write_item(dir.path(), "a", 48, 40);
    let report = dir.path().join("report.csv");
    let out = bench(&["--corpus", dir.path().to_str().unwrap(), "--identity", "--repeat", "5", "--report", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_rows(&report);
    for row in &rows[..5] {
        assert_eq!(row[1].parse::<f64>().unwrap(), 1920.0);
        // same graph: identical energies
        assert_eq!(row[5], row[6]);
        assert_eq!(row[7], row[8]);
    }
    let median = &rows[8];
    let ratio = median[4].parse::<f64>().unwrap() / median[3].parse::<f64>().unwrap();
    assert!((0.2..5.0).contains(&ratio), "identity speedup {ratio}");
}

#[test]
fn synthetic_corpus_runs() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = bench(&["--synthetic", "2", "--size", "60x40", "--superpixels", "50", "--report", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_rows(&report);
    assert_eq!(rows.len(), 2 + 5);
    assert_eq!(&rows[0][0], "synthetic000");
}

#[test]
fn empty_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["--corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no images"));
    assert_eq!(bench(&[]).status.code(), Some(64));
}
