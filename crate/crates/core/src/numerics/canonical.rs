//! Canonical values of real antisymmetric matrices.
//!
//! A real antisymmetric matrix can be rotated to a direct sum of 2x2
//! blocks `[[0, s], [-s, 0]]` with `s >= 0`, plus zero rows for any
//! kernel. The `s` values (the singular values) are read off the real
//! Schur form, which for an antisymmetric input is exactly that block
//! structure up to numerical noise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Subdiagonal entries below this are treated as structural zeros when
/// walking the Schur form.
const BLOCK_TOL: f64 = 1e-12;

/// Canonical (singular) values of a real antisymmetric matrix, sorted
/// in descending order. The result has `n/2` entries.
///
/// When the matrix is a valid covariance block its values lie in
/// `[0, 1]`; values that overshoot 1 by floating-point noise are
/// clipped, and an overshoot beyond 1e-6 is reported as a numerical
/// consistency failure rather than silently clipped.
pub fn canonical_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::arg(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n % 2 != 0 {
        return Err(Error::arg(format!("canonical form requires even dimension, got {n}")));
    }
    for i in 0..n {
        for j in i..n {
            if (a[(i, j)] + a[(j, i)]).abs() > 1e-10 {
                return Err(Error::arg(format!(
                    "matrix is not antisymmetric at ({i},{j})"
                )));
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (a[(i, j)] - a[(j, i)]);
        }
    }
    let scale = m.norm().max(1.0);
    let schur = nalgebra::Schur::try_new(m, 1e-14, 100_000).ok_or_else(|| {
        Error::numerical("Schur decomposition did not converge")
    })?;
    let t = schur.unpack().1;

    let tol = BLOCK_TOL * scale;
    let mut values = Vec::with_capacity(n / 2);
    let mut singles = 0usize;
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > tol {
            values.push((t[(i, i + 1)] * t[(i + 1, i)]).abs().sqrt());
            i += 2;
        } else {
            singles += 1;
            i += 1;
        }
    }
    if singles % 2 != 0 {
        return Err(Error::numerical(
            "odd number of singleton blocks in antisymmetric Schur form",
        ));
    }
    values.extend(std::iter::repeat(0.0).take(singles / 2));

    let worst = values.iter().cloned().fold(0.0_f64, f64::max);
    if worst > 1.0 + 1e-6 {
        return Err(Error::numerical(format!(
            "canonical value {worst} exceeds 1 beyond tolerance"
        )));
    }
    for v in &mut values {
        if *v > 1.0 {
            if *v > 1.0 + 1e-10 {
                log::warn!("clipping canonical value {v} to 1");
            }
            *v = 1.0;
        }
    }
    values.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(values)
}
