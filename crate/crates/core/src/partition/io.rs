use super::SuperpixelPartition;
use crate::error::{Error, Result};
use crate::mrf::GridGeometry;
use crate::raster::{is_pgm, read_pnm, write_pgm16};

/// 16-bit big-endian PGM with one superpixel index per pixel.
pub fn save_partition_pgm(partition: &SuperpixelPartition) -> Result<Vec<u8>> {
    if partition.count() > 1 << 16 {
        return Err(Error::MalformedPartition(format!(
            "{} superpixels do not fit in 16-bit samples",
            partition.count()
        )));
    }
    let samples: Vec<u16> = partition.labels().iter().map(|&k| k as u16).collect();
    Ok(write_pgm16(partition.geometry(), &samples))
}

pub fn load_partition_pgm(bytes: &[u8]) -> Result<SuperpixelPartition> {
    let pgm = read_pnm(bytes).map_err(|e| Error::MalformedPartition(e.to_string()))?;
    if !is_pgm(bytes) {
        return Err(Error::MalformedPartition("expected a grayscale PGM".into()));
    }
    let geometry = GridGeometry::new(pgm.width, pgm.height)?;
    let raw: Vec<u32> = pgm.samples.iter().map(|&s| s as u32).collect();
    SuperpixelPartition::from_labels(geometry, &raw)
}

/// `width,height` header, then one index per line in raster order.
pub fn save_partition_csv(partition: &SuperpixelPartition) -> String {
    let g = partition.geometry();
    let mut out = String::with_capacity(8 * g.pixel_count());
    out.push_str(&format!("{},{}\n", g.width(), g.height()));
    for &k in partition.labels() {
        out.push_str(&k.to_string());
        out.push('\n');
    }
    out
}

pub fn load_partition_csv(text: &str) -> Result<SuperpixelPartition> {
    let bad = |msg: String| Error::MalformedPartition(msg);
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let (w, h) = header.split_once(',').ok_or_else(|| bad(format!("bad header {header:?}")))?;
    let parse_dim = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(format!("bad header {header:?}")));
    let (w, h) = (parse_dim(w)?, parse_dim(h)?);
    if w == 0 || h == 0 {
        return Err(bad("partition has no pixels".into()));
    }
    let geometry = GridGeometry::new(w, h)?;
    let raw = lines
        .map(|l| l.parse::<u32>().map_err(|_| bad(format!("bad label {l:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if raw.len() != geometry.pixel_count() {
        return Err(bad(format!("expected {} labels, found {}", geometry.pixel_count(), raw.len())));
    }
    SuperpixelPartition::from_labels(geometry, &raw)
}

/// Dispatches on content: PGM magic, otherwise CSV.
pub fn load_partition(bytes: &[u8]) -> Result<SuperpixelPartition> {
    if is_pgm(bytes) {
        load_partition_pgm(bytes)
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::MalformedPartition("not UTF-8".into()))?;
        load_partition_csv(text)
    }
}
