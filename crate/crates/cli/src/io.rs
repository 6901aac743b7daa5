//! CSV and JSON ingestion. Row numbers in errors are file line numbers, so
//! the header is row 1 and the first data row is row 2.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use boxsize::{Catalog, Dims, Product, ShipmentRecord};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header { path: PathBuf, expected: &'static str, found: String },
    #[error("{path}: malformed row {row}: {reason}")]
    Malformed { path: PathBuf, row: u64, reason: String },
    #[error("{path}: duplicate id {id} at row {row}")]
    DuplicateId { path: PathBuf, row: u64, id: String },
    #[error("{path}: non-positive dimension at row {row} ({field} = {value})")]
    NonPositiveDimension { path: PathBuf, row: u64, field: &'static str, value: f64 },
    #[error("{path}: negative or non-finite velocity at row {row} ({value})")]
    BadVelocity { path: PathBuf, row: u64, value: f64 },
    #[error("{path}: shipment count must be a positive integer at row {row}")]
    BadCount { path: PathBuf, row: u64 },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

pub const CATALOG_HEADER: &str = "id,length,width,height,velocity";
pub const SHIPMENT_HEADER: &str = "product_id,count";
pub const BOX_HEADER: &str = "length,width,height";

fn open(path: &Path) -> Result<BufReader<File>, LoadError> {
    File::open(path).map(BufReader::new).map_err(|source| LoadError::Io { path: path.into(), source })
}

fn reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).flexible(true).from_reader(src)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, path: &Path, expected: &'static str) -> Result<(), LoadError> {
    let found = rdr
        .headers()
        .map_err(|e| LoadError::Malformed { path: path.into(), row: 1, reason: e.to_string() })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != expected {
        return Err(LoadError::Header { path: path.into(), expected, found });
    }
    Ok(())
}

/// Iterate data rows as (row number, record), checking the field count.
fn rows<'a, R: Read + 'a>(
    rdr: &'a mut csv::Reader<R>,
    path: &Path,
    fields: usize,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), LoadError>> + 'a {
    let path = path.to_path_buf();
    rdr.records().map(move |r| {
        let rec = r.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            LoadError::Malformed { path: path.clone(), row, reason: e.to_string() }
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        if rec.len() != fields {
            return Err(LoadError::Malformed {
                path: path.clone(),
                row,
                reason: format!("expected {fields} fields, found {}", rec.len()),
            });
        }
        Ok((row, rec))
    })
}

fn number(rec: &csv::StringRecord, i: usize, name: &str, path: &Path, row: u64) -> Result<f64, LoadError> {
    rec[i].parse::<f64>().map_err(|_| LoadError::Malformed {
        path: path.into(),
        row,
        reason: format!("{name} `{}` is not a number", &rec[i]),
    })
}

pub fn load_catalog(path: &Path) -> Result<Catalog, LoadError> {
    read_catalog(open(path)?, path)
}

pub fn read_catalog<R: Read>(src: R, path: &Path) -> Result<Catalog, LoadError> {
    let mut rdr = reader(src);
    check_header(&mut rdr, path, CATALOG_HEADER)?;
    let mut seen = HashSet::new();
    let mut products = Vec::new();
    for r in rows(&mut rdr, path, 5) {
        let (row, rec) = r?;
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(LoadError::Malformed { path: path.into(), row, reason: "empty id".into() });
        }
        let mut d = [0.0; 3];
        for (i, name) in ["length", "width", "height"].into_iter().enumerate() {
            let v = number(&rec, i + 1, name, path, row)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(LoadError::NonPositiveDimension { path: path.into(), row, field: name, value: v });
            }
            d[i] = v;
        }
        let velocity = number(&rec, 4, "velocity", path, row)?;
        if !(velocity.is_finite() && velocity >= 0.0) {
            return Err(LoadError::BadVelocity { path: path.into(), row, value: velocity });
        }
        if !seen.insert(id.clone()) {
            return Err(LoadError::DuplicateId { path: path.into(), row, id });
        }
        let dims = Dims::new(d[0], d[1], d[2]).expect("validated above");
        products.push(Product::new(id, dims, velocity).expect("validated above"));
    }
    if products.is_empty() {
        return Err(LoadError::Empty { path: path.into() });
    }
    Catalog::new(products).map_err(|e| LoadError::Invalid { path: path.into(), reason: e.to_string() })
}

pub fn load_shipments(path: &Path) -> Result<Vec<ShipmentRecord>, LoadError> {
    read_shipments(open(path)?, path)
}

pub fn read_shipments<R: Read>(src: R, path: &Path) -> Result<Vec<ShipmentRecord>, LoadError> {
    let mut rdr = reader(src);
    check_header(&mut rdr, path, SHIPMENT_HEADER)?;
    let mut out = Vec::new();
    for r in rows(&mut rdr, path, 2) {
        let (row, rec) = r?;
        let count = match rec[1].parse::<u64>() {
            Ok(c) if c >= 1 => c,
            _ => return Err(LoadError::BadCount { path: path.into(), row }),
        };
        out.push(ShipmentRecord::new(&rec[0], count));
    }
    if out.is_empty() {
        return Err(LoadError::Empty { path: path.into() });
    }
    Ok(out)
}

/// Box suite from a `length,width,height` CSV or from the `boxes` field of a
/// JSON report.
pub fn load_boxes(path: &Path) -> Result<Vec<Dims>, LoadError> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|source| LoadError::Io { path: path.into(), source })?;
    if text.trim_start().starts_with('{') {
        return boxes_from_report(&text, path);
    }
    let mut rdr = reader(text.as_bytes());
    check_header(&mut rdr, path, BOX_HEADER)?;
    let mut out = Vec::new();
    for r in rows(&mut rdr, path, 3) {
        let (row, rec) = r?;
        let mut d = [0.0; 3];
        for (i, name) in ["length", "width", "height"].into_iter().enumerate() {
            let v = number(&rec, i, name, path, row)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(LoadError::NonPositiveDimension { path: path.into(), row, field: name, value: v });
            }
            d[i] = v;
        }
        out.push(Dims::new(d[0], d[1], d[2]).expect("validated above"));
    }
    if out.is_empty() {
        return Err(LoadError::Empty { path: path.into() });
    }
    Ok(out)
}

fn boxes_from_report(text: &str, path: &Path) -> Result<Vec<Dims>, LoadError> {
    #[derive(serde::Deserialize)]
    struct Doc {
        boxes: Vec<Dims>,
    }
    let doc: Doc = serde_json::from_str(text)
        .map_err(|e| LoadError::Invalid { path: path.into(), reason: format!("not a report: {e}") })?;
    for d in &doc.boxes {
        Dims::new(d.length, d.width, d.height)
            .map_err(|e| LoadError::Invalid { path: path.into(), reason: e.to_string() })?;
    }
    if doc.boxes.is_empty() {
        return Err(LoadError::Empty { path: path.into() });
    }
    Ok(doc.boxes)
}

/// Box suites keyed by K from a `k,length,width,height` CSV, the format for
/// externally computed comparison suites.
pub fn load_suites(path: &Path) -> Result<Vec<(usize, Vec<Dims>)>, LoadError> {
    let mut rdr = reader(open(path)?);
    check_header(&mut rdr, path, "k,length,width,height")?;
    let mut suites: std::collections::BTreeMap<usize, Vec<Dims>> = Default::default();
    for r in rows(&mut rdr, path, 4) {
        let (row, rec) = r?;
        let k = rec[0].parse::<usize>().map_err(|_| LoadError::Malformed {
            path: path.into(),
            row,
            reason: format!("k `{}` is not a positive integer", &rec[0]),
        })?;
        let mut d = [0.0; 3];
        for (i, name) in ["length", "width", "height"].into_iter().enumerate() {
            let v = number(&rec, i + 1, name, path, row)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(LoadError::NonPositiveDimension { path: path.into(), row, field: name, value: v });
            }
            d[i] = v;
        }
        suites.entry(k).or_default().push(Dims::new(d[0], d[1], d[2]).expect("validated above"));
    }
    if suites.is_empty() {
        return Err(LoadError::Empty { path: path.into() });
    }
    Ok(suites.into_iter().collect())
}

pub fn write_catalog<W: Write>(out: W, catalog: &Catalog) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CATALOG_HEADER.split(','))?;
    for p in catalog.products() {
        w.write_record([
            p.id.clone(),
            p.dims.length.to_string(),
            p.dims.width.to_string(),
            p.dims.height.to_string(),
            p.velocity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_shipments<W: Write>(out: W, shipments: &[ShipmentRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SHIPMENT_HEADER.split(','))?;
    for s in shipments {
        w.write_record([s.product_id.clone(), s.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
