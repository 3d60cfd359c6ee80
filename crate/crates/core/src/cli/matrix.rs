//! JSON matrix files: `{"dim": N, "re": [[...]], "im": [[...]]}`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    /// Omitted means a real matrix.
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>, String> {
        let n = self.dim;
        if n == 0 {
            return Err("dim must be at least 1".into());
        }
        let check = |name: &str, rows: &Vec<Vec<f64>>| -> Result<(), String> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(format!("{name} must be a {n}×{n} array"));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(format!("{name} has non-finite entries"));
            }
            Ok(())
        };
        check("re", &self.re)?;
        if let Some(im) = &self.im {
            check("im", im)?;
        }
        Ok(DMatrix::from_fn(n, n, |j, k| {
            let im = self.im.as_ref().map_or(0.0, |m| m[j][k]);
            Complex64::new(self.re[j][k], im)
        }))
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|j| (0..n).map(|k| m[(j, k)].re).collect()).collect();
        let im = (0..n).map(|j| (0..n).map(|k| m[(j, k)].im).collect()).collect();
        Self { dim: n, re, im: Some(im) }
    }
}
