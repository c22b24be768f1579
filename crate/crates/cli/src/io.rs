//! Text formats: TetGen `.node/.ele/.face`, OFF, chains, curves, weights.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use flatnorm::complex::{canonical_orientation, Chain, ComplexError, SimplicialComplex};
use flatnorm::deform::PLCurve;
use flatnorm::exact::{format_rational, parse_rational};
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent indexing: {0}")]
    InconsistentIndexing(String),
    #[error("line {line}: face with {corners} corners, only triangles are supported")]
    NonTriangularFace { line: usize, corners: usize },
    #[error("line {line}: {tuple:?} is not a simplex of the complex")]
    UnknownSimplex { line: usize, tuple: Vec<usize> },
    #[error("line {line}: coefficient {text:?} is not an integer")]
    NonIntegerCoefficient { line: usize, text: String },
    #[error("unrecognised mesh file {0}")]
    UnknownFormat(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Non-empty lines with `#` comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn num<T: std::str::FromStr>(line: usize, token: &str) -> Result<T, IoError> {
    token.parse().map_err(|_| parse_err(line, format!("cannot parse {token:?}")))
}

struct Table<'a> {
    header: (usize, Vec<&'a str>),
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn table(text: &str) -> Result<Table<'_>, IoError> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    Ok(Table { header, rows: lines.collect() })
}

/// Builds a complex from TetGen ASCII files given as strings. Returns the
/// marked faces as a chain when a `.face` file is supplied.
pub fn parse_tetgen_str(
    node: &str,
    ele: &str,
    face: Option<&str>,
) -> Result<(SimplicialComplex, Option<Chain>), IoError> {
    let nodes = table(node)?;
    let (hl, h) = &nodes.header;
    let count: usize = num(*hl, h[0])?;
    let dim: usize = num(*hl, h.get(1).copied().unwrap_or("3"))?;
    if nodes.rows.len() < count {
        return Err(parse_err(*hl, format!("expected {count} nodes, found {}", nodes.rows.len())));
    }
    let base = match nodes.rows.first() {
        Some((line, row)) => num::<usize>(*line, row[0])?,
        None => 0,
    };
    if base > 1 {
        return Err(IoError::InconsistentIndexing(format!("first node id is {base}")));
    }
    let mut coords = Vec::with_capacity(count);
    for (k, (line, row)) in nodes.rows.iter().take(count).enumerate() {
        if num::<usize>(*line, row[0])? != k + base {
            return Err(IoError::InconsistentIndexing(format!("line {line}: node ids must be consecutive from {base}")));
        }
        if row.len() < 1 + dim {
            return Err(parse_err(*line, "too few coordinates"));
        }
        coords.push(row[1..=dim].iter().map(|t| num::<f64>(*line, t)).collect::<Result<Vec<_>, _>>()?);
    }
    let vertex = |line: usize, token: &str| -> Result<usize, IoError> {
        let id: usize = num(line, token)?;
        id.checked_sub(base).filter(|&v| v < count).ok_or_else(|| {
            IoError::InconsistentIndexing(format!("line {line}: vertex {id} outside {base}..{}", count + base))
        })
    };
    let elements = table(ele)?;
    let (hl, h) = &elements.header;
    let ele_count: usize = num(*hl, h[0])?;
    let per: usize = num(*hl, h.get(1).copied().unwrap_or("4"))?;
    let mut tops = Vec::with_capacity(ele_count);
    for (line, row) in elements.rows.iter().take(ele_count) {
        if row.len() < 1 + per {
            return Err(parse_err(*line, "too few element vertices"));
        }
        tops.push(row[1..=per].iter().map(|t| vertex(*line, t)).collect::<Result<Vec<_>, _>>()?);
    }
    let complex = SimplicialComplex::build(&tops, Some(coords))?;
    let chain = match face {
        None => None,
        Some(text) => {
            let faces = table(text)?;
            let (hl, h) = &faces.header;
            let face_count: usize = num(*hl, h[0])?;
            let mut chain = Chain::zero(2);
            for (line, row) in faces.rows.iter().take(face_count) {
                if row.len() < 4 {
                    return Err(parse_err(*line, "too few face vertices"));
                }
                let tuple = row[1..4].iter().map(|t| vertex(*line, t)).collect::<Result<Vec<_>, _>>()?;
                chain.add_to(find_simplex(&complex, &tuple, *line)?, orientation(&tuple, *line)?);
            }
            Some(chain)
        }
    };
    Ok((complex, chain))
}

fn orientation(tuple: &[usize], line: usize) -> Result<i64, IoError> {
    canonical_orientation(tuple).map(|(_, s)| s).ok_or_else(|| parse_err(line, "repeated vertex"))
}

fn find_simplex(k: &SimplicialComplex, tuple: &[usize], line: usize) -> Result<usize, IoError> {
    let (sorted, _) = canonical_orientation(tuple).ok_or_else(|| parse_err(line, "repeated vertex"))?;
    k.index_of(&sorted).ok_or(IoError::UnknownSimplex { line, tuple: tuple.to_vec() })
}

pub fn parse_tetgen(
    node_path: &Path,
    ele_path: &Path,
    face_path: Option<&Path>,
) -> Result<(SimplicialComplex, Option<Chain>), IoError> {
    let face = face_path.map(read_file).transpose()?;
    parse_tetgen_str(&read_file(node_path)?, &read_file(ele_path)?, face.as_deref())
}

pub fn parse_off_str(text: &str) -> Result<SimplicialComplex, IoError> {
    let mut lines = content_lines(text);
    let (hl, mut header) = lines.next().ok_or_else(|| parse_err(1, "missing OFF header"))?;
    if header[0] != "OFF" {
        return Err(parse_err(hl, "file does not start with OFF"));
    }
    header.remove(0);
    let (cl, counts) = if header.is_empty() { lines.next().ok_or_else(|| parse_err(hl, "missing counts"))? } else { (hl, header) };
    if counts.len() < 2 {
        return Err(parse_err(cl, "expected vertex and face counts"));
    }
    let nv: usize = num(cl, counts[0])?;
    let nf: usize = num(cl, counts[1])?;
    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, row) = lines.next().ok_or_else(|| parse_err(cl, "missing vertices"))?;
        coords.push(row.iter().take(3).map(|t| num::<f64>(line, t)).collect::<Result<Vec<_>, _>>()?);
    }
    let mut tops = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, row) = lines.next().ok_or_else(|| parse_err(cl, "missing faces"))?;
        let corners: usize = num(line, row[0])?;
        if corners != 3 {
            return Err(IoError::NonTriangularFace { line, corners });
        }
        if row.len() < 4 {
            return Err(parse_err(line, "too few face vertices"));
        }
        let face = row[1..4].iter().map(|t| num::<usize>(line, t)).collect::<Result<Vec<_>, _>>()?;
        if let Some(&v) = face.iter().find(|&&v| v >= nv) {
            return Err(IoError::InconsistentIndexing(format!("line {line}: vertex {v} of {nv}")));
        }
        tops.push(face);
    }
    Ok(SimplicialComplex::build(&tops, Some(coords))?)
}

pub fn parse_off(path: &Path) -> Result<SimplicialComplex, IoError> {
    parse_off_str(&read_file(path)?)
}

/// One simplex per line: `d + 1` vertex ids then an integer coefficient.
/// Vertex order sets the orientation; repeated simplices add up.
pub fn parse_chain_str(text: &str, k: &SimplicialComplex, d: usize) -> Result<Chain, IoError> {
    let mut chain = Chain::zero(d);
    for (line, row) in content_lines(text) {
        if row.len() != d + 2 {
            return Err(parse_err(line, format!("expected {} vertex ids and a coefficient", d + 1)));
        }
        let tuple = row[..=d].iter().map(|t| num::<usize>(line, t)).collect::<Result<Vec<_>, _>>()?;
        let text = row[d + 1];
        let coeff: i64 = text.parse().map_err(|_| IoError::NonIntegerCoefficient { line, text: text.to_string() })?;
        let index = find_simplex(k, &tuple, line)?;
        chain.add_to(index, orientation(&tuple, line)? * coeff);
    }
    Ok(chain)
}

pub fn parse_chain(path: &Path, k: &SimplicialComplex, d: usize) -> Result<Chain, IoError> {
    parse_chain_str(&read_file(path)?, k, d)
}

/// Header `closed` or `open`, then one point per line.
pub fn parse_curve_str(text: &str) -> Result<PLCurve, IoError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing closed/open header"))?;
    let closed = match header[0] {
        "closed" => true,
        "open" => false,
        other => return Err(parse_err(hl, format!("expected closed or open, found {other:?}"))),
    };
    let points = lines
        .map(|(line, row)| row.iter().map(|t| num::<f64>(line, t)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    PLCurve::new(points, closed).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn parse_curve(path: &Path) -> Result<PLCurve, IoError> {
    parse_curve_str(&read_file(path)?)
}

/// `[w]` and `[v]` sections with one rational per line, in simplex index order.
pub fn parse_weights_str(text: &str) -> Result<(Vec<BigRational>, Vec<BigRational>), IoError> {
    let (mut w, mut v) = (Vec::new(), Vec::new());
    let mut section: Option<bool> = None;
    for (line, row) in content_lines(text) {
        match row[0] {
            "[w]" => section = Some(true),
            "[v]" => section = Some(false),
            token => {
                let value = parse_rational(token).ok_or_else(|| parse_err(line, format!("bad weight {token:?}")))?;
                match section {
                    Some(true) => w.push(value),
                    Some(false) => v.push(value),
                    None => return Err(parse_err(line, "weight outside a [w] or [v] section")),
                }
            }
        }
    }
    Ok((w, v))
}

pub fn write_tetgen(k: &SimplicialComplex) -> Result<(String, String), IoError> {
    let coords = k.coords().ok_or(ComplexError::MissingCoordinates)?;
    let dim = coords.first().map_or(0, Vec::len);
    let mut node = format!("{} {dim} 0 0\n", coords.len());
    for (i, c) in coords.iter().enumerate() {
        let _ = writeln!(node, "{i} {}", join(c.iter().map(|x| format!("{x:?}"))));
    }
    let top = k.top_dim();
    let mut ele = format!("{} {} 0\n", k.count(top), top + 1);
    for (i, s) in k.simplices(top).iter().enumerate() {
        let _ = writeln!(ele, "{i} {}", join(s.iter()));
    }
    Ok((node, ele))
}

/// `.face` listing of a 2-chain with unit coefficients, oriented by sign.
pub fn write_face(k: &SimplicialComplex, chain: &Chain) -> String {
    let mut out = format!("{} 0\n", chain.support_len());
    for (n, (i, c)) in chain.iter().enumerate() {
        let mut s = k.simplex(2, i).to_vec();
        if c < 0 {
            s.swap(0, 1);
        }
        let _ = writeln!(out, "{n} {}", join(s.iter()));
    }
    out
}

pub fn write_off(k: &SimplicialComplex) -> Result<String, IoError> {
    let coords = k.coords().ok_or(ComplexError::MissingCoordinates)?;
    let tris = k.simplices(2);
    let mut out = format!("OFF\n{} {} 0\n", coords.len(), tris.len());
    for c in coords {
        let _ = writeln!(out, "{}", join(c.iter().map(|x| format!("{x:?}"))));
    }
    for s in tris {
        let _ = writeln!(out, "3 {}", join(s.iter()));
    }
    Ok(out)
}

pub fn write_chain(k: &SimplicialComplex, chain: &Chain) -> String {
    let mut out = String::new();
    for (i, c) in chain.iter() {
        let _ = writeln!(out, "{} {c}", join(k.simplex(chain.dim(), i).iter()));
    }
    out
}

pub fn write_weights(w: &[BigRational], v: &[BigRational]) -> String {
    let mut out = String::from("[w]\n");
    for x in w {
        let _ = writeln!(out, "{}", format_rational(x));
    }
    out.push_str("[v]\n");
    for x in v {
        let _ = writeln!(out, "{}", format_rational(x));
    }
    out
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// A mesh on disk: `.off`, or a TetGen set named by its `.node` or `.ele`
/// file (a sibling `.face` is picked up when present).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub complex: SimplicialComplex,
    pub faces: Option<Chain>,
    pub sources: Vec<PathBuf>,
}

pub fn load_mesh(path: &Path) -> Result<Mesh, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("off") => Ok(Mesh { complex: parse_off(path)?, faces: None, sources: vec![path.to_path_buf()] }),
        Some("node" | "ele") => {
            let node = path.with_extension("node");
            let ele = path.with_extension("ele");
            let face = path.with_extension("face");
            let face = face.exists().then_some(face);
            let (complex, faces) = parse_tetgen(&node, &ele, face.as_deref())?;
            let mut sources = vec![node, ele];
            sources.extend(face);
            Ok(Mesh { complex, faces, sources })
        }
        _ => Err(IoError::UnknownFormat(path.display().to_string())),
    }
}
