//! Text formats for fields, voxel grids, transform grids and tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! reading back a written file gives bit-identical values.
//!
//! Mesh files:
//!
//! ```text
//! PLFIELD <d>
//! <nv> <ns>
//! x1 .. xd value        (nv lines)
//! k i0 .. ik            (ns lines, sorted vertex indices)
//! ```
//!
//! Voxel files:
//!
//! ```text
//! VOXEL <d>
//! n1 .. nd
//! origin (d numbers)
//! spacing (d numbers)
//! values, first axis fastest
//! ```
//!
//! `#` starts a comment anywhere in a line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::MarginalCurveSet;
use crate::directions::{DirectionSet, Scheme};
use crate::error::{Error, Result};
use crate::field::{PlField, VoxelGrid};
use crate::grid::{TransformGrid, TransformKind};
use crate::stats::{Dendrogram, DistanceMatrix};

/// On-disk field formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    MeshText,
    VoxelText,
}

impl Format {
    pub fn from_name(s: &str) -> Option<Format> {
        match s {
            "mesh_text" | "mesh" => Some(Format::MeshText),
            "voxel_text" | "voxel" => Some(Format::VoxelText),
            _ => None,
        }
    }

    /// Guesses the format from the first keyword of the file.
    pub fn sniff(text: &str) -> Option<Format> {
        let first = Tokens::new(text).inner.next().map(|(_, t)| t)?;
        match first {
            "PLFIELD" => Some(Format::MeshText),
            "VOXEL" => Some(Format::VoxelText),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoadedField {
    Pl(PlField),
    Voxel(VoxelGrid),
}

/// Reads a field file; `format = None` sniffs the header keyword.
pub fn load_field(path: impl AsRef<Path>, format: Option<Format>) -> Result<LoadedField> {
    let text = std::fs::read_to_string(path)?;
    let format = match format.or_else(|| Format::sniff(&text)) {
        Some(f) => f,
        None => return Err(Error::Parse { line: 1, msg: "expected PLFIELD or VOXEL header".into() }),
    };
    Ok(match format {
        Format::MeshText => LoadedField::Pl(parse_mesh(&text)?),
        Format::VoxelText => LoadedField::Voxel(parse_voxel(&text)?),
    })
}

/// Whitespace tokens with their 1-based line numbers, comments removed.
struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text.lines().enumerate().flat_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("");
            line.split_whitespace().map(move |t| (i + 1, t))
        });
        Tokens { inner: Box::new(inner), last_line: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.last_line, msg: msg.into() }
    }

    fn word(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((line, t)) => {
                self.last_line = line;
                Ok(t)
            }
            None => Err(self.err(format!("unexpected end of input, expected {what}"))),
        }
    }

    fn parse<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.word(what)?;
        t.parse().map_err(|_| self.err(format!("cannot parse {t:?} as {what}")))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.word(kw)?;
        if t == kw {
            Ok(())
        } else {
            Err(self.err(format!("expected {kw}, found {t:?}")))
        }
    }

    fn finite(&mut self, what: &str) -> Result<f64> {
        let x: f64 = self.parse(what)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.err(format!("non-finite {what}")))
        }
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.finite(what)).collect()
    }

    fn end(&mut self) -> Result<()> {
        match self.inner.next() {
            None => Ok(()),
            Some((line, t)) => Err(Error::Parse { line, msg: format!("trailing token {t:?}") }),
        }
    }
}

pub fn parse_mesh(text: &str) -> Result<PlField> {
    let mut tok = Tokens::new(text);
    tok.keyword("PLFIELD")?;
    let d: usize = tok.parse("dimension")?;
    if !(1..=3).contains(&d) {
        return Err(tok.err(format!("dimension {d} not in 1..=3")));
    }
    let nv: usize = tok.parse("vertex count")?;
    let ns: usize = tok.parse("simplex count")?;
    let mut points = Vec::with_capacity(nv * d);
    let mut values = Vec::with_capacity(nv);
    for _ in 0..nv {
        points.extend(tok.floats(d, "coordinate")?);
        values.push(tok.finite("value")?);
    }
    let mut simplices = Vec::with_capacity(ns);
    for _ in 0..ns {
        let k: usize = tok.parse("simplex dimension")?;
        if k > d {
            return Err(tok.err(format!("simplex dimension {k} exceeds ambient dimension {d}")));
        }
        let s: Vec<u32> = (0..=k).map(|_| tok.parse("vertex index")).collect::<Result<_>>()?;
        simplices.push(s);
    }
    tok.end()?;
    PlField::from_parts(d, points, values, simplices)
}

pub fn write_mesh(f: &PlField, out: &mut impl Write) -> Result<()> {
    let d = f.dim();
    let k = f.complex();
    writeln!(out, "PLFIELD {d}")?;
    writeln!(out, "{} {}", f.num_vertices(), k.num_simplices())?;
    for (i, v) in f.values().iter().enumerate() {
        let mut line = String::new();
        for x in k.point(i) {
            write!(line, "{x} ").unwrap();
        }
        writeln!(out, "{line}{v}")?;
    }
    for s in k.iter() {
        let idx: Vec<String> = s.iter().map(u32::to_string).collect();
        writeln!(out, "{} {}", s.len() - 1, idx.join(" "))?;
    }
    Ok(())
}

pub fn parse_voxel(text: &str) -> Result<VoxelGrid> {
    let mut tok = Tokens::new(text);
    tok.keyword("VOXEL")?;
    let d: usize = tok.parse("dimension")?;
    if !(2..=3).contains(&d) {
        return Err(tok.err(format!("voxel dimension {d} not 2 or 3")));
    }
    let dims: Vec<usize> = (0..d).map(|_| tok.parse("axis length")).collect::<Result<_>>()?;
    let origin = tok.floats(d, "origin")?;
    let spacing = tok.floats(d, "spacing")?;
    let n = dims.iter().product();
    let values = tok.floats(n, "voxel value")?;
    tok.end()?;
    VoxelGrid::new(dims, origin, spacing, values)
}

fn join<T: std::fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn write_voxel(g: &VoxelGrid, out: &mut impl Write) -> Result<()> {
    writeln!(out, "VOXEL {}", g.dim())?;
    writeln!(out, "{}", join(g.dims(), " "))?;
    writeln!(out, "{}", join(g.origin(), " "))?;
    writeln!(out, "{}", join(g.spacing(), " "))?;
    let row = g.dims()[0];
    for chunk in g.values().chunks(row) {
        writeln!(out, "{}", join(chunk, " "))?;
    }
    Ok(())
}

/// Self-describing transform grid text:
///
/// ```text
/// TRANSFORM <kind> <n_dirs> <n_heights> <n_thresholds>
/// DIRECTIONS <dim> <scheme>
/// one direction per line
/// HEIGHTS
/// heights
/// THRESHOLDS
/// thresholds (none for ECT)
/// VALUES
/// one line of n_thresholds integers per (direction, height)
/// ```
pub fn write_grid(g: &TransformGrid, out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "TRANSFORM {} {} {} {}",
        g.kind().name(),
        g.n_directions(),
        g.n_heights(),
        g.thresholds().len()
    )?;
    let dirs = g.directions();
    writeln!(out, "DIRECTIONS {} {}", dirs.dim(), dirs.scheme().name())?;
    for v in dirs.iter() {
        writeln!(out, "{}", join(v, " "))?;
    }
    writeln!(out, "HEIGHTS")?;
    writeln!(out, "{}", join(g.heights(), " "))?;
    writeln!(out, "THRESHOLDS")?;
    writeln!(out, "{}", join(g.thresholds(), " "))?;
    writeln!(out, "VALUES")?;
    for row in g.values().chunks(g.n_thresholds()) {
        writeln!(out, "{}", join(row, " "))?;
    }
    Ok(())
}

pub fn parse_grid(text: &str) -> Result<TransformGrid> {
    let mut tok = Tokens::new(text);
    tok.keyword("TRANSFORM")?;
    let kind_name = tok.word("transform kind")?;
    let kind = TransformKind::from_name(kind_name).ok_or_else(|| tok.err(format!("unknown transform kind {kind_name:?}")))?;
    let nd: usize = tok.parse("direction count")?;
    let nh: usize = tok.parse("height count")?;
    let nt: usize = tok.parse("threshold count")?;
    tok.keyword("DIRECTIONS")?;
    let dim: usize = tok.parse("direction dimension")?;
    let scheme_name = tok.word("direction scheme")?;
    let scheme = Scheme::from_name(scheme_name).ok_or_else(|| tok.err(format!("unknown scheme {scheme_name:?}")))?;
    let vectors = tok.floats(nd * dim, "direction coordinate")?;
    let directions = DirectionSet::with_scheme(dim, scheme, vectors)?;
    tok.keyword("HEIGHTS")?;
    let heights = tok.floats(nh, "height")?;
    tok.keyword("THRESHOLDS")?;
    let thresholds = tok.floats(nt, "threshold")?;
    tok.keyword("VALUES")?;
    let values: Vec<i32> = (0..nd * nh * nt.max(1)).map(|_| tok.parse("integer value")).collect::<Result<_>>()?;
    tok.end()?;
    TransformGrid::new(kind, directions, heights, thresholds, values)
}

/// Long-format CSV: one row per grid entry. ECT grids omit the threshold
/// column.
pub fn write_grid_csv(g: &TransformGrid, out: &mut impl Write) -> Result<()> {
    let dim = g.directions().dim();
    let coord_names = ["vx", "vy", "vz"];
    let has_t = !g.thresholds().is_empty();
    writeln!(
        out,
        "direction,{},height,{}value",
        coord_names[..dim].join(","),
        if has_t { "threshold," } else { "" }
    )?;
    for i in 0..g.n_directions() {
        let v = join(g.directions().get(i), ",");
        for (j, h) in g.heights().iter().enumerate() {
            for k in 0..g.n_thresholds() {
                let value = g.get(i, j, k);
                if has_t {
                    writeln!(out, "{i},{v},{h},{},{value}", g.thresholds()[k])?;
                } else {
                    writeln!(out, "{i},{v},{h},{value}")?;
                }
            }
        }
    }
    Ok(())
}

/// Square CSV with header `id,<ids...>` and one row per id.
pub fn write_distance_csv(d: &DistanceMatrix, out: &mut impl Write) -> Result<()> {
    writeln!(out, "id,{}", d.ids().join(","))?;
    for (i, id) in d.ids().iter().enumerate() {
        let row: Vec<f64> = (0..d.len()).map(|j| d.get(i, j)).collect();
        writeln!(out, "{id},{}", join(&row, ","))?;
    }
    Ok(())
}

pub fn parse_distance_csv(text: &str) -> Result<DistanceMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty distance file".into() })?;
    let mut cols = header.split(',');
    if cols.next().map(str::trim) != Some("id") {
        return Err(Error::Parse { line: 1, msg: "header must start with `id`".into() });
    }
    let ids: Vec<String> = cols.map(|s| s.trim().to_string()).collect();
    let n = ids.len();
    let mut d = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, line) in lines {
        let mut cells = line.split(',');
        let id = cells.next().unwrap_or("").trim();
        if rows >= n || id != ids[rows] {
            return Err(Error::Parse { line: i + 1, msg: format!("unexpected row id {id:?}") });
        }
        let row: Vec<f64> = cells
            .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad number {c:?}") }))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Parse { line: i + 1, msg: format!("expected {n} entries, found {}", row.len()) });
        }
        d.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { line: rows + 2, msg: format!("expected {n} rows, found {rows}") });
    }
    DistanceMatrix::new(ids, d)
}

/// CSV `direction,height,value` of marginal curves.
pub fn write_marginal_csv(m: &MarginalCurveSet, out: &mut impl Write) -> Result<()> {
    writeln!(out, "direction,height,value")?;
    for i in 0..m.directions.len() {
        for (j, h) in m.heights.iter().enumerate() {
            writeln!(out, "{i},{h},{}", m.get(i, j))?;
        }
    }
    Ok(())
}

/// CSV `id,x1,..,xk` of embedding coordinates.
pub fn write_coords_csv(ids: &[String], coords: &[Vec<f64>], out: &mut impl Write) -> Result<()> {
    let k = coords.first().map_or(0, Vec::len);
    let names: Vec<String> = (1..=k).map(|a| format!("x{a}")).collect();
    writeln!(out, "id,{}", names.join(","))?;
    for (id, c) in ids.iter().zip(coords) {
        writeln!(out, "{id},{}", join(c, ","))?;
    }
    Ok(())
}

/// CSV `step,a,b,distance,size`, one merge per row.
pub fn write_merges_csv(tree: &Dendrogram, out: &mut impl Write) -> Result<()> {
    writeln!(out, "step,a,b,distance,size")?;
    for (s, m) in tree.merges.iter().enumerate() {
        writeln!(out, "{s},{},{},{},{}", m.a, m.b, m.distance, m.size)?;
    }
    Ok(())
}
