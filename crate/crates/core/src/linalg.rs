//! Small dense least-squares helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of a column-scaled least-squares problem.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub coeffs: DVector<f64>,
    /// Ratio of extreme singular values of the column-scaled design.
    pub condition: f64,
    pub residuals: DVector<f64>,
}

/// Scales each column of `a` to unit Euclidean norm and returns the scales.
/// All-zero columns keep scale 1.
pub fn scale_columns(a: &mut DMatrix<f64>) -> Vec<f64> {
    let mut scales = Vec::with_capacity(a.ncols());
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        let s = if n > 0.0 { n } else { 1.0 };
        col /= s;
        scales.push(s);
    }
    scales
}

/// Least squares `min |a c - b|` via SVD of the column-scaled matrix.
/// Fails with a conditioning error when the scaled condition number exceeds
/// `max_condition`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, max_condition: f64) -> Result<LstsqSolution> {
    let mut scaled = a.clone();
    let scales = scale_columns(&mut scaled);
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::Conditioning { condition });
    }
    let y = svd
        .solve(b, smax * f64::EPSILON)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let coeffs = DVector::from_iterator(y.len(), y.iter().zip(&scales).map(|(v, s)| v / s));
    let residuals = a * &coeffs - b;
    Ok(LstsqSolution { coeffs, condition, residuals })
}

/// Singular values of `a` after unit-norm column scaling, sorted descending.
pub fn scaled_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut scaled = a.clone();
    scale_columns(&mut scaled);
    let mut sv: Vec<f64> = scaled.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}
