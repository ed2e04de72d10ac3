//! Majorana covariance matrices of fermionic Gaussian states.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Covariance matrix `G_jk = Tr(i [g_j, g_k] rho / 2)` of a Gaussian
/// state on `modes` fermionic modes, stored as a real antisymmetric
/// `2L x 2L` matrix. Majorana index `2j` is the "position-like" and
/// `2j+1` the "momentum-like" operator of mode `j` (0-based).
///
/// Values are immutable snapshots: evolution and restriction return new
/// matrices. A valid covariance matrix has all canonical singular
/// values in `[0, 1]`; construction checks antisymmetry and stores an
/// exactly antisymmetrized copy, while the singular-value condition is
/// enforced at the points of use that depend on it.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    gamma: DMatrix<f64>,
}

/// Orthogonality tolerance (Frobenius) for rotation inputs.
const ORTHO_TOL: f64 = 1e-10;

pub(crate) fn check_rotation(r: &DMatrix<f64>, dim: usize) -> Result<()> {
    if r.nrows() != dim || r.ncols() != dim {
        return Err(Error::arg(format!(
            "rotation must be {dim}x{dim}, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let defect = (r.transpose() * r - DMatrix::<f64>::identity(dim, dim)).norm();
    if defect > ORTHO_TOL * (dim as f64).sqrt() {
        return Err(Error::arg(format!(
            "matrix is not orthogonal (defect {defect:.3e})"
        )));
    }
    if r.determinant() < 0.0 {
        return Err(Error::arg("rotation has determinant -1, expected +1"));
    }
    Ok(())
}

impl CovarianceMatrix {
    /// Vacuum state: direct sum of `[[0, 1], [-1, 0]]` blocks, one per
    /// mode. Every mode is unoccupied; the state is pure.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::arg("vacuum requires at least one mode"));
        }
        let n = 2 * modes;
        let mut gamma = DMatrix::zeros(n, n);
        for j in 0..modes {
            gamma[(2 * j, 2 * j + 1)] = 1.0;
            gamma[(2 * j + 1, 2 * j)] = -1.0;
        }
        Ok(Self { modes, gamma })
    }

    /// Wraps an explicit matrix. The input must be square with even
    /// dimension and antisymmetric within 1e-12 elementwise; the stored
    /// copy is exactly antisymmetrized.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::arg(format!(
                "covariance matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        if n == 0 || n % 2 != 0 {
            return Err(Error::arg(format!(
                "covariance matrix needs even positive dimension, got {n}"
            )));
        }
        let mut gamma = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if (m[(i, j)] + m[(j, i)]).abs() > 1e-12 {
                    return Err(Error::arg(format!(
                        "matrix is not antisymmetric at ({i},{j})"
                    )));
                }
                gamma[(i, j)] = 0.5 * (m[(i, j)] - m[(j, i)]);
            }
        }
        Ok(Self { modes: n / 2, gamma })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Majorana dimension `2L`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.gamma
    }

    /// Conjugates by a special orthogonal matrix: `G -> R G R^T`.
    pub fn apply_rotation(&self, r: &DMatrix<f64>) -> Result<Self> {
        check_rotation(r, self.dim())?;
        let mut out = self.clone();
        out.rotate_in_place(r);
        Ok(out)
    }

    pub(crate) fn rotate_in_place(&mut self, r: &DMatrix<f64>) {
        self.gamma = r * &self.gamma * r.transpose();
        self.resymmetrize();
    }

    /// Applies a two-mode gate `g` (special orthogonal, 4x4) to modes
    /// `(site, site + 1)` as a rank-4 row/column update, O(L) work.
    ///
    /// Equivalent to `apply_rotation` with `g` embedded on Majorana
    /// indices `2*site .. 2*site + 4` and identity elsewhere.
    pub fn apply_local_gate(&self, site: usize, g: &DMatrix<f64>) -> Result<Self> {
        check_rotation(g, 4)?;
        if site + 1 >= self.modes {
            return Err(Error::arg(format!(
                "gate site {site} out of range for {} modes",
                self.modes
            )));
        }
        let mut out = self.clone();
        out.local_gate_in_place(site, g);
        Ok(out)
    }

    pub(crate) fn local_gate_in_place(&mut self, site: usize, g: &DMatrix<f64>) {
        let n = self.dim();
        let r0 = 2 * site;
        // rows: block <- g * block
        let mut buf = [0.0_f64; 4];
        for c in 0..n {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.gamma[(r0 + k, c)];
            }
            for k in 0..4 {
                let mut acc = 0.0;
                for (l, b) in buf.iter().enumerate() {
                    acc += g[(k, l)] * b;
                }
                self.gamma[(r0 + k, c)] = acc;
            }
        }
        // columns: block <- block * g^T
        for rr in 0..n {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = self.gamma[(rr, r0 + k)];
            }
            for k in 0..4 {
                let mut acc = 0.0;
                for (l, b) in buf.iter().enumerate() {
                    acc += b * g[(k, l)];
                }
                self.gamma[(rr, r0 + k)] = acc;
            }
        }
        // restore exact antisymmetry on the touched cross blocks
        for i in 0..n {
            for k in 0..4 {
                let j = r0 + k;
                let v = 0.5 * (self.gamma[(i, j)] - self.gamma[(j, i)]);
                self.gamma[(i, j)] = v;
                self.gamma[(j, i)] = -v;
            }
        }
    }

    fn resymmetrize(&mut self) {
        let n = self.dim();
        for i in 0..n {
            self.gamma[(i, i)] = 0.0;
            for j in i + 1..n {
                let v = 0.5 * (self.gamma[(i, j)] - self.gamma[(j, i)]);
                self.gamma[(i, j)] = v;
                self.gamma[(j, i)] = -v;
            }
        }
    }

    /// Frobenius norm of `G^2 + I`; zero exactly when the state is pure.
    pub fn purity_defect(&self) -> f64 {
        let n = self.dim();
        (&self.gamma * &self.gamma + DMatrix::<f64>::identity(n, n)).norm()
    }

    /// Purity test at the scale-aware tolerance `1e-8 * 2L`.
    pub fn is_pure(&self) -> bool {
        self.purity_defect() <= 1e-8 * self.dim() as f64
    }

    /// Principal submatrix on the Majorana indices of the selected
    /// modes, in the order given. The restriction of a pure state is in
    /// general mixed.
    pub fn subsystem(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::arg("subsystem needs at least one mode"));
        }
        let mut seen = vec![false; self.modes];
        for &m in modes {
            if m >= self.modes {
                return Err(Error::arg(format!(
                    "subsystem mode {m} out of range for {} modes",
                    self.modes
                )));
            }
            if seen[m] {
                return Err(Error::arg(format!("duplicate subsystem mode {m}")));
            }
            seen[m] = true;
        }
        let k = modes.len();
        let mut sub = DMatrix::zeros(2 * k, 2 * k);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for p in 0..2 {
                    for q in 0..2 {
                        sub[(2 * a + p, 2 * b + q)] = self.gamma[(2 * ma + p, 2 * mb + q)];
                    }
                }
            }
        }
        Ok(Self { modes: k, gamma: sub })
    }

    /// Canonical singular values of the stored matrix, descending.
    pub fn canonical_values(&self) -> Result<Vec<f64>> {
        crate::numerics::canonical_values(&self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::haar_so;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn vacuum_squares_to_minus_identity() {
        for l in [1, 2, 5] {
            let v = CovarianceMatrix::vacuum(l).unwrap();
            let n = 2 * l;
            let sq = v.matrix() * v.matrix() + DMatrix::<f64>::identity(n, n);
            assert_eq!(sq.norm(), 0.0, "L={l}");
            assert!(v.is_pure());
        }
        assert!(CovarianceMatrix::vacuum(0).is_err());
    }

    #[test]
    fn vacuum_small_cases() {
        let v1 = CovarianceMatrix::vacuum(1).unwrap();
        assert_eq!(v1.matrix()[(0, 1)], 1.0);
        assert_eq!(v1.matrix()[(1, 0)], -1.0);
        let v2 = CovarianceMatrix::vacuum(2).unwrap();
        assert_eq!(v2.matrix()[(2, 3)], 1.0);
        assert_eq!(v2.matrix()[(0, 3)], 0.0);
    }

    #[test]
    fn identity_rotation_is_a_noop() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        let id = DMatrix::<f64>::identity(6, 6);
        let w = v.apply_rotation(&id).unwrap();
        assert_eq!(v.matrix(), w.matrix());
    }

    #[test]
    fn vacuum_rotated_by_itself_is_unchanged() {
        // the vacuum matrix is itself orthogonal and commutes with itself
        let v = CovarianceMatrix::vacuum(2).unwrap();
        let r = v.matrix().clone();
        let w = v.apply_rotation(&r).unwrap();
        assert!((w.matrix() - v.matrix()).norm() < 1e-14);
    }

    #[test]
    fn rotation_preserves_purity_and_singular_values() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let v = CovarianceMatrix::vacuum(4).unwrap();
        let r = haar_so(8, &mut rng).unwrap();
        let w = v.apply_rotation(&r).unwrap();
        assert!(w.purity_defect() < 1e-10 * 8.0);
        for s in w.canonical_values().unwrap() {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn local_gate_matches_embedded_rotation() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let l = 5;
        let v = CovarianceMatrix::vacuum(l)
            .unwrap()
            .apply_rotation(&haar_so(2 * l, &mut rng).unwrap())
            .unwrap();
        for site in 0..l - 1 {
            let g = haar_so(4, &mut rng).unwrap();
            let fast = v.apply_local_gate(site, &g).unwrap();
            let mut emb = DMatrix::<f64>::identity(2 * l, 2 * l);
            for a in 0..4 {
                for b in 0..4 {
                    emb[(2 * site + a, 2 * site + b)] = g[(a, b)];
                }
            }
            let slow = v.apply_rotation(&emb).unwrap();
            assert!(
                (fast.matrix() - slow.matrix()).norm() < 1e-12,
                "site {site}"
            );
        }
    }

    #[test]
    fn local_gate_is_local() {
        // gate on (0,1) of a product state leaves other modes untouched
        let v = CovarianceMatrix::vacuum(4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let g = haar_so(4, &mut rng).unwrap();
        let w = v.apply_local_gate(0, &g).unwrap();
        for i in 4..8 {
            for j in 4..8 {
                assert_eq!(w.matrix()[(i, j)], v.matrix()[(i, j)]);
            }
        }
        let id = DMatrix::<f64>::identity(4, 4);
        let u = v.apply_local_gate(1, &id).unwrap();
        assert_eq!(u.matrix(), v.matrix());
    }

    #[test]
    fn subsystem_of_vacuum_is_vacuum() {
        let v = CovarianceMatrix::vacuum(4).unwrap();
        let s = v.subsystem(&[1, 3]).unwrap();
        let w = CovarianceMatrix::vacuum(2).unwrap();
        assert_eq!(s.matrix(), w.matrix());
        assert!(s.is_pure());
    }

    #[test]
    fn full_subsystem_is_identity_operation() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let v = CovarianceMatrix::vacuum(3)
            .unwrap()
            .apply_rotation(&haar_so(6, &mut rng).unwrap())
            .unwrap();
        let s = v.subsystem(&[0, 1, 2]).unwrap();
        assert_eq!(s.matrix(), v.matrix());
    }

    #[test]
    fn subsystem_rejects_bad_indices() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        assert!(v.subsystem(&[0, 0]).is_err());
        assert!(v.subsystem(&[3]).is_err());
        assert!(v.subsystem(&[]).is_err());
    }

    #[test]
    fn from_matrix_validates() {
        assert!(CovarianceMatrix::from_matrix(DMatrix::zeros(3, 3)).is_err());
        let mut bad = DMatrix::<f64>::zeros(2, 2);
        bad[(0, 0)] = 1.0;
        assert!(CovarianceMatrix::from_matrix(bad).is_err());
        let ok = CovarianceMatrix::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(ok.modes(), 2);
    }

    #[test]
    fn rejects_improper_rotation() {
        let v = CovarianceMatrix::vacuum(1).unwrap();
        let mut flip = DMatrix::<f64>::identity(2, 2);
        flip[(0, 0)] = -1.0;
        assert!(v.apply_rotation(&flip).is_err());
    }
}
