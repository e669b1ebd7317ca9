//! `dense-complex-v1` JSON matrix files.
//!
//! ```json
//! {"format": "dense-complex-v1", "entries": [[[re, im], ...], ...]}
//! ```
//!
//! A bare `entries` array is accepted on input. Doubles are written in
//! shortest round-trip form, so save → load is bit-exact.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OmegaError, Result};
use crate::linalg::ComplexMatrix;

pub const MATRIX_FORMAT: &str = "dense-complex-v1";

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    format: String,
    entries: Rows,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Doc(MatrixDoc),
    Bare(Rows),
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let entries = m
        .to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect();
    let doc = MatrixDoc { format: MATRIX_FORMAT.to_string(), entries };
    serde_json::to_string(&doc).expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let input: MatrixInput =
        serde_json::from_str(text).map_err(|e| OmegaError::ConfigParse(format!("matrix file: {e}")))?;
    let rows = match input {
        MatrixInput::Doc(doc) => {
            if doc.format != MATRIX_FORMAT {
                return Err(OmegaError::ConfigParse(format!(
                    "unsupported matrix format {:?}, expected {MATRIX_FORMAT:?}",
                    doc.format
                )));
            }
            doc.entries
        }
        MatrixInput::Bare(rows) => rows,
    };
    let rows: Vec<Vec<Complex64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

pub fn save_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, matrix_to_json(m))?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| OmegaError::Io(format!("{}: {e}", path.display())))?;
    matrix_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_array_accepted() {
        let m = matrix_from_json("[[[2,0]]]").unwrap();
        assert_eq!(m.get(0, 0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn wrong_format_tag_rejected() {
        let err = matrix_from_json(r#"{"format":"dense-real","entries":[[[1,0]]]}"#).unwrap_err();
        assert!(matches!(err, OmegaError::ConfigParse(_)));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = matrix_from_json("[[[1,0],[2,0]],[[3,0]]]").unwrap_err();
        assert!(matches!(err, OmegaError::DimensionMismatch(_)));
    }

    #[test]
    fn awkward_doubles_survive() {
        let vals = [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e308, -2.2250738585072014e-308, 5e-324];
        let entries: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, -v)).collect();
        let m = ComplexMatrix::from_row_major(2, 3, &entries).unwrap();
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        for (x, y) in m.to_row_major().iter().zip(back.to_row_major()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}
