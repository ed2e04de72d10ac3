//! Haar-distributed special orthogonal matrices.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Draws a Haar-distributed matrix from SO(n).
///
/// A Ginibre matrix of iid standard normals is QR-factorized and the Q
/// factor is sign-corrected so that the diagonal of R is positive,
/// which makes the distribution exactly Haar on O(n). If the result
/// lands in the determinant -1 component, the first column is negated,
/// which pushes it to SO(n) while preserving Haar measure there.
pub fn haar_so(n: usize, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::arg("haar_so requires n >= 1"));
    }
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    Ok(q)
}
