//! File formats: curve tables, field-map grids and images, channel CSV.
//!
//! Every real number is written with `{:.16e}` (17 significant digits), which
//! round-trips an `f64` exactly. Metadata lines start with `# ` and hold
//! `key=value`.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{ingest_matrix, CMatrix, ChannelMatrix};
use crate::error::{Error, Result};
use crate::field::FieldMap;
use crate::Complex64;

pub const CHANNEL_HEADER: &str = "nr,nt,re,im";
pub const FIELD_MAP_HEADER: &str = "ix,iy,x,y,re,im,power_db,phase_rad";

pub type Metadata = Vec<(String, String)>;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_metadata(out: &mut String, meta: &[(String, String)]) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

fn parse_metadata(line: &str) -> Option<(String, String)> {
    let (k, v) = line.strip_prefix('#')?.trim().split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::malformed(line, format!("{what} `{}` is not a number", field.trim())))
}

fn parse_index(field: &str, line: usize, what: &str) -> Result<usize> {
    field.trim().parse().map_err(|_| {
        Error::malformed(
            line,
            format!("{what} `{}` is not a non-negative integer", field.trim()),
        )
    })
}

/// Non-comment, non-blank lines with their 1-based line numbers; metadata
/// lines are collected separately.
fn data_lines(text: &str) -> (Metadata, Vec<(usize, &str)>) {
    let mut meta = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            meta.extend(parse_metadata(t));
        } else {
            lines.push((i + 1, t));
        }
    }
    (meta, lines)
}

/// A rectangular table of named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

impl CurveTable {
    pub fn new(columns: Vec<String>, metadata: Metadata) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                context: "curve table row",
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        write_metadata(&mut out, &self.metadata);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (metadata, lines) = data_lines(text);
        let mut lines = lines.into_iter();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::malformed(None, "missing header row"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut table = CurveTable::new(columns, metadata);
        for (n, line) in lines {
            let row = line
                .split(',')
                .map(|f| parse_f64(f, n, "cell"))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != table.columns.len() {
                return Err(Error::malformed(
                    n,
                    format!(
                        "expected {} cells, found {}",
                        table.columns.len(),
                        row.len()
                    ),
                ));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Field map as CSV: geometry in metadata, then one row per pixel in row-major
/// order (`iy` outer, `ix` inner). `power_db` is relative to the map maximum.
pub fn field_map_csv(map: &FieldMap, metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    write_metadata(&mut out, metadata);
    let geometry = [
        ("z", num(map.z)),
        (
            "x_range",
            format!("{},{}", num(map.x_range.0), num(map.x_range.1)),
        ),
        (
            "y_range",
            format!("{},{}", num(map.y_range.0), num(map.y_range.1)),
        ),
        ("nx", map.nx.to_string()),
        ("ny", map.ny.to_string()),
    ];
    for (k, v) in geometry {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(FIELD_MAP_HEADER);
    out.push('\n');
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let s = map.get(ix, iy);
            let _ = writeln!(
                out,
                "{ix},{iy},{},{},{},{},{},{}",
                num(map.x_at(ix)),
                num(map.y_at(iy)),
                num(s.re),
                num(s.im),
                num(map.power_db(ix, iy)),
                num(s.arg()),
            );
        }
    }
    out
}

/// Reads a map written by [`field_map_csv`]; samples come from the `re`/`im` columns.
pub fn parse_field_map_csv(text: &str) -> Result<FieldMap> {
    let (meta, lines) = data_lines(text);
    let get = |key: &str| {
        meta.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::malformed(None, format!("missing `# {key}=` metadata")))
    };
    let pair = |key: &str| -> Result<(f64, f64)> {
        let v = get(key)?;
        let (a, b) = v
            .split_once(',')
            .ok_or_else(|| Error::malformed(None, format!("`{key}` needs two values")))?;
        Ok((parse_f64(a, 0, key)?, parse_f64(b, 0, key)?))
    };
    let z = parse_f64(get("z")?, 0, "z")?;
    let (x_range, y_range) = (pair("x_range")?, pair("y_range")?);
    let nx = parse_index(get("nx")?, 0, "nx")?;
    let ny = parse_index(get("ny")?, 0, "ny")?;
    let mut lines = lines.into_iter();
    match lines.next() {
        Some((_, h)) if h == FIELD_MAP_HEADER => {}
        Some((n, _)) => {
            return Err(Error::malformed(
                n,
                format!("header must be `{FIELD_MAP_HEADER}`"),
            ))
        }
        None => return Err(Error::malformed(None, "missing header row")),
    }
    let mut samples = vec![None; nx * ny];
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::malformed(
                n,
                format!("expected 8 cells, found {}", f.len()),
            ));
        }
        let (ix, iy) = (parse_index(f[0], n, "ix")?, parse_index(f[1], n, "iy")?);
        if ix >= nx || iy >= ny {
            return Err(Error::malformed(
                n,
                format!("pixel ({ix}, {iy}) outside {nx}x{ny} map"),
            ));
        }
        let slot = &mut samples[iy * nx + ix];
        if slot.is_some() {
            return Err(Error::malformed(n, format!("duplicate pixel ({ix}, {iy})")));
        }
        *slot = Some(Complex64::new(
            parse_f64(f[4], n, "re")?,
            parse_f64(f[5], n, "im")?,
        ));
    }
    let samples = samples
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                Error::malformed(None, format!("missing pixel ({}, {})", i % nx, i / nx))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldMap {
        z,
        x_range,
        y_range,
        nx,
        ny,
        samples,
    })
}

/// Plain-text graymap (P2) of linear power normalized to the map maximum:
/// gray = round(255·P/P_max). The first image row is the largest y, so the
/// picture is upright; within a row x increases left to right.
pub fn field_map_pgm(map: &FieldMap, metadata: &[(String, String)]) -> String {
    let max = map.max_power();
    let mut out = String::from("P2\n");
    write_metadata(&mut out, metadata);
    let _ = writeln!(out, "{} {}\n255", map.nx, map.ny);
    for iy in (0..map.ny).rev() {
        let row: Vec<String> = (0..map.nx)
            .map(|ix| {
                let g = if max > 0.0 {
                    (255.0 * map.power(ix, iy) / max).round() as u8
                } else {
                    0
                };
                g.to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Writes `<prefix>.csv` and `<prefix>.pgm`.
pub fn export_field_map(
    map: &FieldMap,
    prefix: &Path,
    metadata: &[(String, String)],
) -> Result<()> {
    std::fs::write(prefix.with_extension("csv"), field_map_csv(map, metadata))?;
    std::fs::write(prefix.with_extension("pgm"), field_map_pgm(map, metadata))?;
    Ok(())
}

/// Channel matrix as `nr,nt,re,im` rows (0-based indices, row-major).
pub fn channel_csv(h: &ChannelMatrix, metadata: &[(String, String)]) -> String {
    let mut out = String::new();
    write_metadata(&mut out, metadata);
    out.push_str(CHANNEL_HEADER);
    out.push('\n');
    for r in 0..h.n_r() {
        for t in 0..h.n_t() {
            let v = h.get(r, t);
            let _ = writeln!(out, "{r},{t},{},{}", num(v.re), num(v.im));
        }
    }
    out
}

/// Parses a channel CSV. Entries may come in any order; the matrix size is the
/// largest index plus one and every entry must appear exactly once.
pub fn parse_channel_csv(text: &str) -> Result<ChannelMatrix> {
    let (_, lines) = data_lines(text);
    let mut lines = lines.into_iter();
    match lines.next() {
        Some((_, h)) if h.replace(' ', "") == CHANNEL_HEADER => {}
        Some((n, _)) => {
            return Err(Error::malformed(
                n,
                format!("header must be `{CHANNEL_HEADER}`"),
            ))
        }
        None => return Err(Error::malformed(None, "missing header row")),
    }
    let mut entries: Vec<(usize, usize, usize, Complex64)> = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::malformed(
                n,
                format!("expected 4 cells, found {}", f.len()),
            ));
        }
        let r = parse_index(f[0], n, "nr")?;
        let t = parse_index(f[1], n, "nt")?;
        let v = Complex64::new(parse_f64(f[2], n, "re")?, parse_f64(f[3], n, "im")?);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::malformed(n, "non-finite entry"));
        }
        entries.push((n, r, t, v));
    }
    if entries.is_empty() {
        return Err(Error::malformed(None, "no channel entries"));
    }
    let n_r = entries.iter().map(|e| e.1).max().unwrap_or(0) + 1;
    let n_t = entries.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let mut seen: Vec<Option<usize>> = vec![None; n_r * n_t];
    let mut m = CMatrix::zeros(n_r, n_t);
    for (n, r, t, v) in entries {
        if let Some(first) = seen[r * n_t + t] {
            return Err(Error::malformed(
                n,
                format!("duplicate entry ({r}, {t}), first given at line {first}"),
            ));
        }
        seen[r * n_t + t] = Some(n);
        m[(r, t)] = v;
    }
    if let Some(i) = seen.iter().position(Option::is_none) {
        return Err(Error::malformed(
            None,
            format!(
                "missing entry ({}, {}) in {n_r}x{n_t} channel",
                i / n_t,
                i % n_t
            ),
        ));
    }
    ingest_matrix(m)
}

pub fn import_channel_csv(path: &Path) -> Result<ChannelMatrix> {
    parse_channel_csv(&std::fs::read_to_string(path)?)
}
