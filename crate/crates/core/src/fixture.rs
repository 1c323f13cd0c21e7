//! Plain-text MRF fixtures.
//!
//! ```text
//! mrf <width> <height> <constant>
//! u <p> <w_p>
//! e <p> <q> <w00> <w01> <w10> <w11>
//! ```
//!
//! Superpixel-level instances use the header `spmrf <K> <constant>` with the
//! same `u`/`e` lines over superpixel indices. Blank lines and lines starting
//! with `#` are ignored; unary lines may be omitted (zero). Writers emit every
//! unary and every pairwise term, with floats in shortest round-trip form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mrf::{BinaryEnergy, GridGeometry, NeighborPair, PairwiseWeights, PixelMrf};
use crate::superpixelize::{SuperpixelEdge, SuperpixelMrf};

pub fn write_pixel_mrf(mrf: &PixelMrf) -> String {
    let g = mrf.geometry();
    let mut out = format!("mrf {} {} {}\n", g.width(), g.height(), mrf.constant());
    write_body(&mut out, mrf);
    out
}

pub fn write_superpixel_mrf(sp: &SuperpixelMrf) -> String {
    let mut out = format!("spmrf {} {}\n", sp.count(), sp.constant());
    write_body(&mut out, sp);
    out
}

fn write_body<E: BinaryEnergy>(out: &mut String, e: &E) {
    for (i, w) in e.unary().iter().enumerate() {
        let _ = writeln!(out, "u {i} {w}");
    }
    for t in 0..e.term_count() {
        let (a, b, w) = e.term(t);
        let _ = writeln!(out, "e {a} {b} {} {} {} {}", w.w00, w.w01, w.w10, w.w11);
    }
}

/// Everything after the header line, for comparing fixtures whose headers
/// differ.
pub fn fixture_body(text: &str) -> &str {
    text.split_once('\n').map_or("", |(_, rest)| rest)
}

struct Body {
    unary: Vec<f64>,
    terms: Vec<(usize, usize, PairwiseWeights)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

fn parse_body<'a>(lines: impl Iterator<Item = (usize, &'a str)>, nodes: usize) -> Result<Body> {
    let mut unary = vec![0.0; nodes];
    let mut seen = vec![false; nodes];
    let mut terms = Vec::new();
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("u") => {
                let i: usize = field(toks.next(), no, "node index")?;
                let w: f64 = field(toks.next(), no, "unary weight")?;
                if i >= nodes {
                    return Err(parse_err(no, format!("node {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(parse_err(no, format!("duplicate unary for node {i}")));
                }
                unary[i] = w;
            }
            Some("e") => {
                let a: usize = field(toks.next(), no, "first node")?;
                let b: usize = field(toks.next(), no, "second node")?;
                let mut w = [0.0; 4];
                for (slot, name) in w.iter_mut().zip(["w00", "w01", "w10", "w11"]) {
                    *slot = field(toks.next(), no, name)?;
                }
                terms.push((a, b, PairwiseWeights::new(w[0], w[1], w[2], w[3])));
            }
            Some(other) => return Err(parse_err(no, format!("unknown record {other:?}"))),
            None => unreachable!("blank lines are filtered"),
        }
        if toks.next().is_some() {
            return Err(parse_err(no, "trailing tokens"));
        }
    }
    Ok(Body { unary, terms })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_pixel_mrf(text: &str) -> Result<PixelMrf> {
    let mut lines = content_lines(text);
    let (no, header) = lines.next().ok_or_else(|| parse_err(1, "empty fixture"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("mrf") {
        return Err(parse_err(no, "expected header `mrf <width> <height> <constant>`"));
    }
    let width: usize = field(toks.next(), no, "width")?;
    let height: usize = field(toks.next(), no, "height")?;
    let constant: f64 = field(toks.next(), no, "constant")?;
    let geometry = GridGeometry::new(width, height)?;
    let body = parse_body(lines, geometry.pixel_count())?;
    let pairs = body
        .terms
        .into_iter()
        .map(|(p, q, w)| Ok((NeighborPair::new(p, q)?, w)))
        .collect::<Result<Vec<_>>>()?;
    PixelMrf::new(geometry, body.unary, pairs, constant)
}

pub fn parse_superpixel_mrf(text: &str) -> Result<SuperpixelMrf> {
    let mut lines = content_lines(text);
    let (no, header) = lines.next().ok_or_else(|| parse_err(1, "empty fixture"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("spmrf") {
        return Err(parse_err(no, "expected header `spmrf <K> <constant>`"));
    }
    let k: usize = field(toks.next(), no, "superpixel count")?;
    let constant: f64 = field(toks.next(), no, "constant")?;
    let body = parse_body(lines, k)?;
    let edges = body.terms.into_iter().map(|(k, l, weights)| SuperpixelEdge { k, l, weights }).collect();
    SuperpixelMrf::new(body.unary, edges, constant)
}
