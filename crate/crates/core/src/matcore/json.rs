//! Matrix literals: JSON arrays of rows of finite doubles.

use super::types::{Mat, Vector};
use crate::error::{Error, Result};

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Parses a row-major literal. An empty list is the `0×0` matrix.
pub fn mat_from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "ragged matrix literal: row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix literal"));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn vec_from_json(v: &[f64]) -> Result<Vector> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("vector literal"));
    }
    Ok(Vector::from_column_slice(v))
}
