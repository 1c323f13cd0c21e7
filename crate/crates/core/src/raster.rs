//! Raster types and the small set of file formats the toolkit reads and writes:
//! binary/ASCII PGM (8- and 16-bit), binary PPM, and 8-bit PNG.

use std::io::Cursor;

use image::{ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::mrf::GridGeometry;

/// An RGB image with channels stored as separate planes in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    geometry: GridGeometry,
    channels: [Vec<f64>; 3],
}

impl RgbImage {
    pub fn new(geometry: GridGeometry, channels: [Vec<f64>; 3]) -> Result<Self> {
        for c in &channels {
            if c.len() != geometry.pixel_count() {
                return Err(Error::DimensionMismatch {
                    what: "image channel",
                    expected: geometry.pixel_count(),
                    actual: c.len(),
                });
            }
        }
        Ok(Self { geometry, channels })
    }

    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let n = geometry.pixel_count();
        let mut channels = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for y in 0..geometry.height() {
            for x in 0..geometry.width() {
                let rgb = f(x, y);
                for (c, v) in channels.iter_mut().zip(rgb) {
                    c.push(v);
                }
            }
        }
        Self { geometry, channels }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    #[inline]
    pub fn pixel(&self, p: usize) -> [f64; 3] {
        [self.channels[0][p], self.channels[1][p], self.channels[2][p]]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    /// Rec. 601 luma.
    #[inline]
    pub fn luminance(&self, p: usize) -> f64 {
        let [r, g, b] = self.pixel(p);
        0.299 * r + 0.587 * g + 0.114 * b
    }

    /// Decodes PNG, binary PPM, or PGM (gray is replicated into all channels).
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"P6") {
            let ppm = read_pnm(bytes)?;
            let geometry = GridGeometry::new(ppm.width, ppm.height)?;
            let scale = ppm.maxval as f64;
            let mut channels = [Vec::new(), Vec::new(), Vec::new()];
            for px in ppm.samples.chunks_exact(3) {
                for (c, &v) in channels.iter_mut().zip(px) {
                    c.push(v as f64 / scale);
                }
            }
            return Self::new(geometry, channels);
        }
        if is_pgm(bytes) {
            let pgm = read_pnm(bytes)?;
            let geometry = GridGeometry::new(pgm.width, pgm.height)?;
            let gray: Vec<f64> = pgm.samples.iter().map(|&v| v as f64 / pgm.maxval as f64).collect();
            return Self::new(geometry, [gray.clone(), gray.clone(), gray]);
        }
        let img = image::load_from_memory(bytes)?.to_rgb8();
        let geometry = GridGeometry::new(img.width() as usize, img.height() as usize)?;
        Ok(Self::from_fn(geometry, |x, y| {
            let px = img.get_pixel(x as u32, y as u32).0;
            [px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0]
        }))
    }

    /// 8-bit binary PPM.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.geometry.width(), self.geometry.height()).into_bytes();
        for p in 0..self.geometry.pixel_count() {
            for v in self.pixel(p) {
                out.push(quantize(v));
            }
        }
        out
    }

    /// 8-bit RGB PNG.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let (w, h) = (self.geometry.width() as u32, self.geometry.height() as u32);
        let img = image::RgbImage::from_fn(w, h, |x, y| {
            let p = self.geometry.index(x as usize, y as usize);
            let [r, g, b] = self.pixel(p);
            image::Rgb([quantize(r), quantize(g), quantize(b)])
        });
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn is_pgm(bytes: &[u8]) -> bool {
    bytes.starts_with(b"P5") || bytes.starts_with(b"P2")
}

/// A decoded PNM raster. Samples are in raster order, interleaved for PPM.
#[derive(Debug, Clone)]
pub struct Pnm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

/// Reads P2 (ASCII gray), P5 (binary gray) and P6 (binary RGB). 16-bit
/// binary samples are big-endian.
pub fn read_pnm(bytes: &[u8]) -> Result<Pnm> {
    let bad = |msg: &str| Error::Image(format!("pnm: {msg}"));
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(bad("missing magic number"));
    }
    let magic = bytes[1];
    let per_pixel = match magic {
        b'2' | b'5' => 1,
        b'6' => 3,
        _ => return Err(bad("unsupported magic number")),
    };
    let mut pos = 2;
    let mut header = [0usize; 3];
    for slot in header.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header number"))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(bad("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let count = width * height * per_pixel;
    let samples = if magic == b'2' {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("non-ascii body"))?;
        let values: Vec<u16> = text
            .split_ascii_whitespace()
            .map(|t| t.parse::<u16>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad sample"))?;
        if values.len() != count {
            return Err(bad("sample count does not match dimensions"));
        }
        values
    } else {
        // exactly one whitespace byte separates header and raster
        pos += 1;
        let body = bytes.get(pos..).ok_or_else(|| bad("truncated raster"))?;
        if maxval < 256 {
            if body.len() < count {
                return Err(bad("truncated raster"));
            }
            body[..count].iter().map(|&b| b as u16).collect()
        } else {
            if body.len() < 2 * count {
                return Err(bad("truncated raster"));
            }
            body[..2 * count].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        }
    };
    if samples.iter().any(|&s| s as usize > maxval) {
        return Err(bad("sample exceeds maxval"));
    }
    Ok(Pnm { width, height, maxval: maxval as u16, samples })
}

pub fn write_pgm8(geometry: GridGeometry, samples: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", geometry.width(), geometry.height()).into_bytes();
    out.extend_from_slice(samples);
    out
}

pub fn write_pgm16(geometry: GridGeometry, samples: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", geometry.width(), geometry.height()).into_bytes();
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

/// Reads a binary raster (mask, edge map) from PGM or PNG; any non-zero
/// sample is `true`.
pub fn decode_binary(bytes: &[u8]) -> Result<(GridGeometry, Vec<bool>)> {
    if is_pgm(bytes) {
        let pgm = read_pnm(bytes)?;
        let geometry = GridGeometry::new(pgm.width, pgm.height)?;
        return Ok((geometry, pgm.samples.iter().map(|&s| s != 0).collect()));
    }
    let img = image::load_from_memory(bytes)?.to_luma8();
    let geometry = GridGeometry::new(img.width() as usize, img.height() as usize)?;
    Ok((geometry, img.pixels().map(|Luma([v])| *v != 0).collect()))
}

/// Binary raster as a 0/255 PGM.
pub fn encode_binary_pgm(geometry: GridGeometry, bits: &[bool]) -> Vec<u8> {
    let samples: Vec<u8> = bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_pgm8(geometry, &samples)
}

/// Binary raster as a 0/255 grayscale PNG.
pub fn encode_binary_png(geometry: GridGeometry, bits: &[bool]) -> Result<Vec<u8>> {
    let samples: Vec<u8> = bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = image::GrayImage::from_raw(geometry.width() as u32, geometry.height() as u32, samples)
        .ok_or_else(|| Error::Image("mask length does not match geometry".into()))?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}
