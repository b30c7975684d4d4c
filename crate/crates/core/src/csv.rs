//! Plain-text table formats. Floats are written with 17 significant digits,
//! so parsing a file and writing it again reproduces it byte for byte.
//!
//! Boundary, source and reconstruction files start with one metadata line
//! `# key=value,key=value,...` followed by a header row.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{IspError, Result};
use crate::experiments::{RegressionFit, RegressionTarget, SweepRecord};
use crate::forward::{BoundaryData, SourceField, SourceGrid};
use crate::geometry::ProblemGeometry;
use crate::singular::SpectrumTable;

pub const SPECTRUM_HEADER: &str = "m,A_m,log10_abs_H2,log10_sigma,sigma";
pub const BOUNDARY_HEADER: &str = "index,re,im";
pub const SOURCE_HEADER: &str = "i_r,i_theta,rho,theta,re,im";
pub const SWEEP_HEADER: &str =
    "kappa,kappa0,B,B_minus,B_plus,B_tilde_minus,B_tilde_plus,eps_minus,eps_plus,relerr_minus,relerr_plus";
pub const FITS_HEADER: &str = "target,slope,intercept,mean_abs_error,std_dev";

/// Full-precision float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn err(line: usize, detail: impl Into<String>) -> IspError {
    IspError::Csv {
        line,
        detail: detail.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("not a number: {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("not an integer: {s:?}")))
}

/// Numbered non-empty lines.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.is_empty())
}

fn fields(l: &str, n: usize, line: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = l.split(',').collect();
    if f.len() != n {
        return Err(err(line, format!("expected {n} fields, found {}", f.len())));
    }
    Ok(f)
}

fn expect_header(it: &mut dyn Iterator<Item = (usize, &str)>, header: &str) -> Result<()> {
    match it.next() {
        Some((_, l)) if l == header => Ok(()),
        Some((n, l)) => Err(err(n, format!("expected header {header:?}, found {l:?}"))),
        None => Err(err(0, "empty input")),
    }
}

/// Ordered `key=value` pairs of a metadata line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str, line: usize) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| err(line, format!("missing metadata key {key:?}")))
    }

    fn render(&self) -> String {
        let body: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("# {}", body.join(","))
    }

    fn parse(l: &str, line: usize) -> Result<Self> {
        let body = l
            .strip_prefix("# ")
            .ok_or_else(|| err(line, "expected a '# ' metadata line"))?;
        let mut entries = Vec::new();
        let mut seen = BTreeMap::new();
        for pair in body.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| err(line, format!("malformed metadata entry {pair:?}")))?;
            if seen.insert(k.to_string(), ()).is_some() {
                return Err(err(line, format!("duplicate metadata key {k:?}")));
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }
}

fn geometry_metadata(g: &ProblemGeometry) -> Metadata {
    let mut m = Metadata::default();
    m.push("k", fmt_f64(g.k()));
    m.push("r0", fmt_f64(g.r0()));
    m.push("r", fmt_f64(g.r()));
    m
}

fn geometry_from(meta: &Metadata, line: usize) -> Result<ProblemGeometry> {
    ProblemGeometry::new(
        parse_f64(meta.require("k", line)?, line)?,
        parse_f64(meta.require("r0", line)?, line)?,
        parse_f64(meta.require("r", line)?, line)?,
    )
}

/// Spectrum row as stored on disk, base-10 logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCsvRow {
    pub m: usize,
    pub a_m: f64,
    pub log10_abs_h2: f64,
    pub log10_sigma: f64,
    pub sigma: f64,
}

pub fn spectrum_rows(t: &SpectrumTable) -> Vec<SpectrumCsvRow> {
    let to10 = std::f64::consts::LOG10_E;
    t.rows()
        .iter()
        .map(|r| SpectrumCsvRow {
            m: r.m,
            a_m: r.a_m,
            log10_abs_h2: r.log_abs_h2 * to10,
            log10_sigma: r.log_sigma * to10,
            sigma: r.sigma,
        })
        .collect()
}

pub fn write_spectrum(rows: &[SpectrumCsvRow]) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.m,
            fmt_f64(r.a_m),
            fmt_f64(r.log10_abs_h2),
            fmt_f64(r.log10_sigma),
            fmt_f64(r.sigma)
        );
    }
    out
}

pub fn read_spectrum(text: &str) -> Result<Vec<SpectrumCsvRow>> {
    let mut it = lines(text);
    expect_header(&mut it, SPECTRUM_HEADER)?;
    it.map(|(n, l)| {
        let f = fields(l, 5, n)?;
        Ok(SpectrumCsvRow {
            m: parse_int(f[0], n)?,
            a_m: parse_f64(f[1], n)?,
            log10_abs_h2: parse_f64(f[2], n)?,
            log10_sigma: parse_f64(f[3], n)?,
            sigma: parse_f64(f[4], n)?,
        })
    })
    .collect()
}

pub fn write_boundary(u: &BoundaryData) -> String {
    let mut meta = geometry_metadata(u.geometry());
    meta.push("n_s", u.len());
    meta.push("noise_level", fmt_f64(u.noise_level()));
    let mut out = format!("{}\n{BOUNDARY_HEADER}\n", meta.render());
    for (j, v) in u.values().iter().enumerate() {
        let _ = writeln!(out, "{j},{},{}", fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

pub fn read_boundary(text: &str) -> Result<BoundaryData> {
    let mut it = lines(text);
    let (n0, first) = it.next().ok_or_else(|| err(0, "empty input"))?;
    let meta = Metadata::parse(first, n0)?;
    let g = geometry_from(&meta, n0)?;
    let n_s: usize = parse_int(meta.require("n_s", n0)?, n0)?;
    let noise = parse_f64(meta.require("noise_level", n0)?, n0)?;
    expect_header(&mut it, BOUNDARY_HEADER)?;
    let mut values = Vec::with_capacity(n_s);
    for (n, l) in it {
        let f = fields(l, 3, n)?;
        let idx: usize = parse_int(f[0], n)?;
        if idx != values.len() {
            return Err(err(
                n,
                format!("expected index {}, found {idx}", values.len()),
            ));
        }
        values.push(Complex64::new(parse_f64(f[1], n)?, parse_f64(f[2], n)?));
    }
    if values.len() != n_s {
        return Err(err(
            0,
            format!("metadata announces {n_s} samples, found {}", values.len()),
        ));
    }
    BoundaryData::new(&g, values, noise)
}

fn source_metadata(s: &SourceField) -> Metadata {
    let mut meta = geometry_metadata(s.grid().geometry());
    meta.push("n_r", s.grid().n_r());
    meta.push("n_theta", s.grid().n_theta());
    meta
}

fn source_body(s: &SourceField, out: &mut String) {
    let grid = s.grid();
    let _ = writeln!(out, "{SOURCE_HEADER}");
    for i in 0..grid.n_r() {
        for j in 0..grid.n_theta() {
            let v = s.get(i, j);
            let _ = writeln!(
                out,
                "{i},{j},{},{},{},{}",
                fmt_f64(grid.radii()[i]),
                fmt_f64(grid.theta(j)),
                fmt_f64(v.re),
                fmt_f64(v.im)
            );
        }
    }
}

pub fn write_source(s: &SourceField) -> String {
    let mut out = format!("{}\n", source_metadata(s).render());
    source_body(s, &mut out);
    out
}

fn read_source_with_meta(text: &str) -> Result<(Metadata, SourceField)> {
    let mut it = lines(text);
    let (n0, first) = it.next().ok_or_else(|| err(0, "empty input"))?;
    let meta = Metadata::parse(first, n0)?;
    let g = geometry_from(&meta, n0)?;
    let n_r: usize = parse_int(meta.require("n_r", n0)?, n0)?;
    let n_theta: usize = parse_int(meta.require("n_theta", n0)?, n0)?;
    let grid = SourceGrid::new(&g, n_r, n_theta)?;
    expect_header(&mut it, SOURCE_HEADER)?;
    let mut values = Vec::with_capacity(grid.len());
    for (n, l) in it {
        let f = fields(l, 6, n)?;
        let (i, j): (usize, usize) = (parse_int(f[0], n)?, parse_int(f[1], n)?);
        if i >= n_r || j >= n_theta || grid.index(i, j) != values.len() {
            return Err(err(n, format!("node ({i}, {j}) out of order")));
        }
        let rho = parse_f64(f[2], n)?;
        if (rho - grid.radii()[i]).abs() > 1e-12 * g.r0() {
            return Err(err(
                n,
                format!("radius {rho} is not the Gauss node of row {i}"),
            ));
        }
        values.push(Complex64::new(parse_f64(f[4], n)?, parse_f64(f[5], n)?));
    }
    Ok((
        meta,
        SourceField::new(grid, values).map_err(|e| err(0, e.to_string()))?,
    ))
}

pub fn read_source(text: &str) -> Result<SourceField> {
    Ok(read_source_with_meta(text)?.1)
}

/// Reconstruction file: source format with truncation, residual and policy
/// added to the metadata.
pub fn write_reconstruction(
    s: &SourceField,
    truncation: usize,
    residual: f64,
    policy: &str,
) -> String {
    let mut meta = source_metadata(s);
    meta.push("N", truncation);
    meta.push("residual", fmt_f64(residual));
    meta.push("policy", policy);
    let mut out = format!("{}\n", meta.render());
    source_body(s, &mut out);
    out
}

/// Returns the field, truncation, residual and policy label.
pub fn read_reconstruction(text: &str) -> Result<(SourceField, usize, f64, String)> {
    let (meta, s) = read_source_with_meta(text)?;
    let n = parse_int(meta.require("N", 1)?, 1)?;
    let residual = parse_f64(meta.require("residual", 1)?, 1)?;
    let policy = meta.require("policy", 1)?.to_string();
    Ok((s, n, residual, policy))
}

pub fn write_sweep(records: &[SweepRecord]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.kappa),
            fmt_f64(r.kappa0),
            r.bandwidth,
            r.lower,
            r.upper,
            r.lower_approx,
            r.upper_approx,
            r.eps_minus,
            r.eps_plus,
            fmt_f64(r.relerr_minus),
            fmt_f64(r.relerr_plus)
        );
    }
    out
}

pub fn read_sweep(text: &str) -> Result<Vec<SweepRecord>> {
    let mut it = lines(text);
    expect_header(&mut it, SWEEP_HEADER)?;
    it.map(|(n, l)| {
        let f = fields(l, 11, n)?;
        Ok(SweepRecord {
            kappa: parse_f64(f[0], n)?,
            kappa0: parse_f64(f[1], n)?,
            bandwidth: parse_int(f[2], n)?,
            lower: parse_int(f[3], n)?,
            upper: parse_int(f[4], n)?,
            lower_approx: parse_int(f[5], n)?,
            upper_approx: parse_int(f[6], n)?,
            eps_minus: parse_int(f[7], n)?,
            eps_plus: parse_int(f[8], n)?,
            relerr_minus: parse_f64(f[9], n)?,
            relerr_plus: parse_f64(f[10], n)?,
        })
    })
    .collect()
}

pub fn write_fits(fits: &[RegressionFit]) -> String {
    let mut out = format!("{FITS_HEADER}\n");
    for f in fits {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            f.target,
            fmt_f64(f.slope),
            fmt_f64(f.intercept),
            fmt_f64(f.mean_abs_error),
            fmt_f64(f.std_dev)
        );
    }
    out
}

pub fn read_fits(text: &str) -> Result<Vec<RegressionFit>> {
    let mut it = lines(text);
    expect_header(&mut it, FITS_HEADER)?;
    it.map(|(n, l)| {
        let f = fields(l, 5, n)?;
        let target = match f[0] {
            "B" => RegressionTarget::Bandwidth,
            "B_minus" => RegressionTarget::Lower,
            "B_plus" => RegressionTarget::Upper,
            other => return Err(err(n, format!("unknown target {other:?}"))),
        };
        Ok(RegressionFit {
            target,
            slope: parse_f64(f[1], n)?,
            intercept: parse_f64(f[2], n)?,
            mean_abs_error: parse_f64(f[3], n)?,
            std_dev: parse_f64(f[4], n)?,
        })
    })
    .collect()
}
