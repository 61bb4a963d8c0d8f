//! Matrix Market (`.mtx`) reading and writing.
//!
//! Supports the `matrix` object in `coordinate` and `array` formats with
//! `real`, `integer` or `complex` fields and `general`, `symmetric`,
//! `skew-symmetric` or `hermitian` storage. Symmetric storage is expanded to
//! the full matrix on read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Fully expanded sparse matrix in coordinate form (0-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

pub fn read(path: &Path) -> Result<CooMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, &path.display().to_string())
}

/// Parse Matrix Market text. `origin` is used in error messages.
pub fn parse(text: &str, origin: &str) -> Result<CooMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let header: Vec<String> = banner
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if header.len() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix" {
        return Err(err(1, format!("bad banner {banner:?}")));
    }
    let coordinate = match header[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(err(1, format!("unsupported format {other:?}"))),
    };
    let field = match header[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        other => return Err(err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match header[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(err(1, format!("unsupported symmetry {other:?}"))),
    };
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(err(1, "hermitian storage requires a complex field".into()));
    }

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size_text) = data
        .next()
        .ok_or_else(|| err(1, "missing size line".into()))?;
    let sizes = size_text
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| err(size_line, format!("bad size line: {e}")))?;
    let expected_sizes = if coordinate { 3 } else { 2 };
    if sizes.len() != expected_sizes {
        return Err(err(
            size_line,
            format!("expected {expected_sizes} integers on size line"),
        ));
    }
    let (nrows, ncols) = (sizes[0], sizes[1]);
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(err(size_line, "symmetric storage requires a square matrix".into()));
    }

    let width = if field == Field::Complex { 2 } else { 1 };
    let parse_value = |line: usize, toks: &[&str]| -> Result<Complex64> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| err(line, format!("bad value {t:?}: {e}")))
        };
        let re = num(toks[0])?;
        let im = if width == 2 { num(toks[1])? } else { 0.0 };
        Ok(Complex64::new(re, im))
    };

    let mut raw: Vec<(usize, usize, Complex64)> = Vec::new();
    if coordinate {
        let nnz = sizes[2];
        raw.reserve(nnz);
        for _ in 0..nnz {
            let (ln, text) = data
                .next()
                .ok_or_else(|| err(size_line, format!("expected {nnz} entries")))?;
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() != 2 + width {
                return Err(err(ln, format!("expected {} fields", 2 + width)));
            }
            let idx = |t: &str, bound: usize| -> Result<usize> {
                let i: usize = t
                    .parse()
                    .map_err(|e| err(ln, format!("bad index {t:?}: {e}")))?;
                if i == 0 || i > bound {
                    return Err(err(ln, format!("index {i} out of range 1..={bound}")));
                }
                Ok(i - 1)
            };
            let i = idx(toks[0], nrows)?;
            let j = idx(toks[1], ncols)?;
            if symmetry != Symmetry::General && j > i {
                return Err(err(ln, "upper-triangle entry in symmetric storage".into()));
            }
            raw.push((i, j, parse_value(ln, &toks[2..])?));
        }
    } else {
        // column-major; symmetric variants list the lower triangle only
        for j in 0..ncols {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::SkewSymmetric => j + 1,
                _ => j,
            };
            for i in start..nrows {
                let (ln, text) = data
                    .next()
                    .ok_or_else(|| err(size_line, "array data ended early".into()))?;
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() != width {
                    return Err(err(ln, format!("expected {width} fields")));
                }
                let v = parse_value(ln, &toks)?;
                if v != Complex64::new(0.0, 0.0) {
                    raw.push((i, j, v));
                }
            }
        }
    }
    if let Some((ln, _)) = data.next() {
        return Err(err(ln, "trailing data after the declared entries".into()));
    }

    let mut entries = Vec::with_capacity(raw.len() * 2);
    for (i, j, v) in raw {
        entries.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((j, i, v)),
                Symmetry::SkewSymmetric => entries.push((j, i, -v)),
                Symmetry::Hermitian => entries.push((j, i, v.conj())),
            }
        }
    }
    Ok(CooMatrix {
        nrows,
        ncols,
        entries,
    })
}

/// Render as `coordinate general`, using a `real` field when every entry has
/// zero imaginary part. Entries are written in row-major order; zeros are
/// skipped. Values use shortest round-trip formatting.
pub fn render(m: &CooMatrix) -> String {
    let mut entries: Vec<_> = m
        .entries
        .iter()
        .filter(|(_, _, v)| *v != Complex64::new(0.0, 0.0))
        .copied()
        .collect();
    entries.sort_by_key(|&(i, j, _)| (i, j));
    let complex = entries.iter().any(|(_, _, v)| v.im != 0.0);
    let mut out = String::new();
    let field = if complex { "complex" } else { "real" };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
    let _ = writeln!(out, "{} {} {}", m.nrows, m.ncols, entries.len());
    for (i, j, v) in entries {
        if complex {
            let _ = writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im);
        } else {
            let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v.re);
        }
    }
    out
}

pub fn write(path: &Path, m: &CooMatrix) -> Result<()> {
    fs::write(path, render(m)).map_err(|e| Error::io(path, e))
}
