//! CSV input formats: weighted instances and price-relative series.
//!
//! Instance files carry a `w,x1,...,xd` header and one `weight, coords...`
//! row per data point. Price files carry one row of positive per-asset price
//! relatives per period, with an optional leading header row of asset names.
//! Both are plain UTF-8 with `.` as the decimal separator.

use std::fs;
use std::path::Path;

use crate::backtest::{PeriodTag, PriceRelativeSeries};
use crate::{Error, Result};

/// Parsed instance file: raw rows, not yet merged or validated as a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn parse_field(path: &Path, row: usize, col: usize, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        col,
        msg: format!("expected a number, got {:?}", field.trim()),
    })
}

/// Reads a `w,x1,...,xd` instance file.
pub fn read_instance_csv(path: impl AsRef<Path>) -> Result<InstanceData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        row: 1,
        col: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.is_empty() || cols[0] != "w" || cols.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            col: 1,
            msg: "header must be w,x1,...,xd".into(),
        });
    }
    let dim = cols.len() - 1;

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                col: fields.len(),
                msg: format!("expected {} fields, got {}", dim + 1, fields.len()),
            });
        }
        weights.push(parse_field(path, row, 1, fields[0])?);
        let mut coords = Vec::with_capacity(dim);
        for (c, field) in fields[1..].iter().enumerate() {
            coords.push(parse_field(path, row, c + 2, field)?);
        }
        points.push(coords);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 2,
            col: 1,
            msg: "no data rows".into(),
        });
    }
    Ok(InstanceData { points, weights })
}

/// Writes an instance in the `w,x1,...,xd` format.
pub fn write_instance_csv(
    path: impl AsRef<Path>,
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<()> {
    let path = path.as_ref();
    let dim = points.first().map_or(0, Vec::len);
    let mut out = String::from("w");
    for t in 1..=dim {
        out.push_str(&format!(",x{t}"));
    }
    out.push('\n');
    for (x, w) in points.iter().zip(weights) {
        out.push_str(&w.to_string());
        for v in x {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a price-relative series; a non-numeric first row is taken as asset
/// names. Every entry must be strictly positive.
pub fn read_price_relatives(
    path: impl AsRef<Path>,
    period_tag: PeriodTag,
) -> Result<PriceRelativeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if rows.is_empty() && names.is_none() && fields[0].trim().parse::<f64>().is_err() {
            names = Some(fields.iter().map(|s| s.trim().to_string()).collect());
            continue;
        }
        let mut values = Vec::with_capacity(fields.len());
        for (c, field) in fields.iter().enumerate() {
            let v = parse_field(path, row, c + 1, field)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveRelative {
                    path: path.to_path_buf(),
                    row,
                    col: c + 1,
                });
            }
            values.push(v);
        }
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    col: values.len(),
                    msg: format!("expected {} fields, got {}", first.len(), values.len()),
                });
            }
        }
        rows.push(values);
    }

    PriceRelativeSeries::new(rows, names, period_tag)
}
