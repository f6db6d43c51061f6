//! Comma-separated tables with a header row.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Dataset, Matrix, Vector};

#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub data: Dataset,
    pub feature_names: Vec<String>,
    pub response_name: String,
}

/// Reads a UTF-8, comma-separated table whose first row is a header. Every
/// column except `response_column` becomes a predictor, in file order.
pub fn load_csv(path: impl AsRef<Path>, response_column: &str) -> Result<CsvDataset> {
    let path = path.as_ref();
    let fail = |message: String| Error::Csv {
        path: path.to_path_buf(),
        message,
    };
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
            hint: "expected a comma-separated file with a header row".into(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| fail(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let response = header
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| fail(format!("no column named {response_column:?}")))?;
    if header.len() < 2 {
        return Err(fail("need at least one predictor column".into()));
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                fail(format!(
                    "non-numeric cell {cell:?} at data row {}, column {:?}",
                    row + 1,
                    header[col]
                ))
            })?;
            if col == response {
                ys.push(value);
            } else {
                xs.push(value);
            }
        }
    }
    if ys.is_empty() {
        return Err(fail("no data rows".into()));
    }
    let p = header.len() - 1;
    let x = Matrix::from_row_slice(ys.len(), p, &xs);
    let mut feature_names = header.clone();
    let response_name = feature_names.remove(response);
    Ok(CsvDataset {
        data: Dataset::new(x, Vector::from_vec(ys))?,
        feature_names,
        response_name,
    })
}

/// Centers and scales `v` in place; returns false if it is constant.
fn standardize_column(v: &mut [f64]) -> bool {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter_mut().for_each(|x| *x -= mean);
    let sd = if v.len() > 1 {
        (v.iter().map(|x| x * x).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let scale = mean.abs().max(1.0);
    if sd <= 1e-12 * scale {
        v.iter_mut().for_each(|x| *x = 0.0);
        return false;
    }
    v.iter_mut().for_each(|x| *x /= sd);
    true
}

/// Like [`standardize`], also returning the indices of constant predictor
/// columns.
pub fn standardize_with_report(data: &Dataset) -> Result<(Dataset, Vec<usize>)> {
    let mut x = data.x().clone();
    let mut constant = Vec::new();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        if !standardize_column(col.as_mut_slice()) {
            constant.push(j);
        }
    }
    let mut y = data.y().clone();
    standardize_column(y.as_mut_slice());
    Ok((Dataset::new(x, y)?, constant))
}

/// Centers every predictor and the response and scales each to unit sample
/// standard deviation (`ddof = 1`). Constant columns become zero and are
/// logged.
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let (out, constant) = standardize_with_report(data)?;
    if !constant.is_empty() {
        log::warn!("constant predictor columns left unscaled: {constant:?}");
    }
    Ok(out)
}
