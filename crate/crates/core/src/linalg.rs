//! Small dense helpers for real measurement matrices acting on complex data.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::{CVector, Error, Result};

/// Relative singular-value floor below which a least-squares system is
/// reported as singular.
pub(crate) const SINGULAR_RATIO: f64 = 1e-10;

/// `Wᴴ r` for a real `W`, i.e. the inner product of every column with `r`.
pub(crate) fn correlate(w: &DMatrix<f64>, r: &CVector) -> Vec<Complex64> {
    debug_assert_eq!(w.nrows(), r.len());
    w.column_iter()
        .map(|col| {
            col.iter()
                .zip(r.iter())
                .fold(Complex64::new(0.0, 0.0), |acc, (&a, &b)| acc + b * a)
        })
        .collect()
}

/// `W x` for a real `W` and complex `x`.
pub(crate) fn apply(w: &DMatrix<f64>, x: &CVector) -> CVector {
    debug_assert_eq!(w.ncols(), x.len());
    let mut out = CVector::zeros(w.nrows());
    for (col, &xi) in w.column_iter().zip(x.iter()) {
        if xi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &a) in out.iter_mut().zip(col.iter()) {
            *o += xi * a;
        }
    }
    out
}

/// `Σ_j W[:, cols[j]] · coef[j]` for 0-based column indices.
pub(crate) fn apply_columns(w: &DMatrix<f64>, cols: &[usize], coef: &CVector) -> CVector {
    let mut out = CVector::zeros(w.nrows());
    for (&c, &x) in cols.iter().zip(coef.iter()) {
        for (o, &a) in out.iter_mut().zip(w.column(c).iter()) {
            *o += x * a;
        }
    }
    out
}

pub(crate) fn select_columns(w: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(w.nrows(), cols.len(), |r, c| w[(r, cols[c])])
}

/// Index of the largest magnitude; ties resolve to the lowest index.
pub(crate) fn argmax_abs<'a, I>(values: I) -> Option<usize>
where
    I: IntoIterator<Item = &'a Complex64>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let m = v.norm_sqr();
        match best {
            Some((_, b)) if m <= b => {}
            _ => best = Some((i, m)),
        }
    }
    best.map(|(i, _)| i)
}

/// Least-squares solution of `A x ≈ b` for real `A` and complex `b`.
///
/// The real and imaginary parts of `b` are solved as two right-hand sides of
/// the same SVD. Rejects systems whose smallest singular value falls below
/// [`SINGULAR_RATIO`] times the largest.
pub(crate) fn least_squares(a: &DMatrix<f64>, b: &CVector) -> Result<CVector> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: b.len(),
        });
    }
    if cols == 0 {
        return Ok(CVector::zeros(0));
    }
    if cols > rows {
        return Err(Error::SupportTooLarge {
            support: cols,
            measurements: rows,
        });
    }
    let svd = SVD::new(a.clone(), true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= SINGULAR_RATIO) {
        return Err(Error::SingularSystem { rows, cols, ratio });
    }
    let rhs = DMatrix::from_fn(rows, 2, |r, c| if c == 0 { b[r].re } else { b[r].im });
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|_| Error::SingularSystem { rows, cols, ratio })?;
    Ok(CVector::from_fn(cols, |i, _| Complex64::new(sol[(i, 0)], sol[(i, 1)])))
}

pub(crate) fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_consistent_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x = CVector::from_vec(vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 3.0)]);
        let b = CVector::from_fn(3, |r, _| {
            Complex64::new(a[(r, 0)], 0.0) * x[0] + Complex64::new(a[(r, 1)], 0.0) * x[1]
        });
        let got = least_squares(&a, &b).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn least_squares_rejects_duplicate_columns() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = CVector::from_element(3, Complex64::new(1.0, 0.0));
        assert!(matches!(
            least_squares(&a, &b),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        let v = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-2.0, 0.0),
        ];
        assert_eq!(argmax_abs(&v), Some(1));
        assert_eq!(argmax_abs(&[] as &[Complex64]), None);
    }
}
