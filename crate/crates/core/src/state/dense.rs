//! Dense Fock-space oracle for small systems.
//!
//! Represents the many-body state as `2^L` complex amplitudes and acts
//! with Majorana operators as signed bit-flip permutations, using the
//! string convention `g_{2j} = prod_{k<j}(-Z_k) X_j`,
//! `g_{2j+1} = prod_{k<j}(-Z_k) Y_j` (0-based modes). Under it the
//! basis state with every qubit bit set is the state whose covariance
//! matrix is the vacuum, and occupation `m` of mode `j` corresponds to
//! qubit bit `1 - m`. Rotations are applied as products of two-Majorana
//! Givens factors, `U = cos(t/2) + sin(t/2) g_p g_q`, which satisfies
//! `U^dag g U = G g` for the plane rotation `G` by angle `t`.
//!
//! Everything here is exponential in `L` and serves as a test oracle;
//! the mode count is capped at 12.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::covariance::{check_rotation, CovarianceMatrix};

/// Hard cap on the oracle's system size.
pub const MAX_DENSE_MODES: usize = 12;

#[derive(Clone, Debug)]
pub struct DenseState {
    modes: usize,
    amps: Vec<Complex64>,
}

fn check_size(modes: usize) -> Result<()> {
    if modes == 0 {
        return Err(Error::arg("dense state needs at least one mode"));
    }
    if modes > MAX_DENSE_MODES {
        return Err(Error::size(format!(
            "dense oracle capped at {MAX_DENSE_MODES} modes, got {modes}"
        )));
    }
    Ok(())
}

/// Applies Majorana operator `mu` to an amplitude vector.
fn gamma_apply(amps: &[Complex64], mu: usize, modes: usize) -> Vec<Complex64> {
    let m = mu / 2;
    let ytype = mu % 2 == 1;
    let dim = 1usize << modes;
    let mask = (1usize << m) - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (b, &a) in amps.iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut amp = if (m + (b & mask).count_ones() as usize) % 2 == 1 {
            -a
        } else {
            a
        };
        if ytype {
            amp *= Complex64::new(0.0, 1.0);
            if (b >> m) & 1 == 1 {
                amp = -amp;
            }
        }
        out[b ^ (1 << m)] += amp;
    }
    out
}

/// Factors a special orthogonal matrix into plane rotations
/// `(p, q, angle)` whose left-to-right product reproduces it, ending
/// with half-turn pairs for any residual diagonal signs.
fn givens_factors(r: &DMatrix<f64>) -> Result<Vec<(usize, usize, f64)>> {
    let mut a = r.clone();
    let n = a.nrows();
    let mut facs = Vec::new();
    for col in 0..n.saturating_sub(1) {
        for row in ((col + 1)..n).rev() {
            let (p, q) = (row - 1, row);
            let (x, y) = (a[(p, col)], a[(q, col)]);
            if y.abs() < 1e-300 {
                continue;
            }
            let h = x.hypot(y);
            let (c, s) = (x / h, y / h);
            let th = y.atan2(x);
            for cc in 0..n {
                let (u, v) = (a[(p, cc)], a[(q, cc)]);
                a[(p, cc)] = c * u + s * v;
                a[(q, cc)] = -s * u + c * v;
            }
            facs.push((p, q, -th));
        }
    }
    let neg: Vec<usize> = (0..n).filter(|&i| a[(i, i)] < 0.0).collect();
    if neg.len() % 2 != 0 {
        return Err(Error::numerical(
            "rotation factorization left an odd number of sign flips",
        ));
    }
    for pair in neg.chunks(2) {
        facs.push((pair[0], pair[1], std::f64::consts::PI));
    }
    Ok(facs)
}

impl DenseState {
    /// The state whose covariance matrix is the vacuum.
    pub fn reference_state(modes: usize) -> Result<Self> {
        check_size(modes)?;
        let dim = 1usize << modes;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[dim - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { modes, amps })
    }

    /// Equal-weight superposition of every basis state.
    pub fn plus_state(modes: usize) -> Result<Self> {
        check_size(modes)?;
        let dim = 1usize << modes;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { modes, amps: vec![a; dim] })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<psi| g_{i_1} g_{i_2} ... g_{i_n} |psi>` for an ordered index
    /// string, applied rightmost first.
    pub fn majorana_product_expectation(&self, indices: &[usize]) -> Result<Complex64> {
        let n = 2 * self.modes;
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::arg(format!("majorana index {bad} out of range")));
        }
        let mut cur = self.amps.clone();
        for &i in indices.iter().rev() {
            cur = gamma_apply(&cur, i, self.modes);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(cur.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// `<psi| g_j g_k |psi>`.
    pub fn majorana_pair_expectation(&self, j: usize, k: usize) -> Result<Complex64> {
        let n = 2 * self.modes;
        if j >= n || k >= n {
            return Err(Error::arg(format!("majorana index out of range ({j}, {k})")));
        }
        let gk = gamma_apply(&self.amps, k, self.modes);
        let gjk = gamma_apply(&gk, j, self.modes);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(gjk.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// Covariance matrix recovered from pair expectations.
    pub fn covariance_matrix(&self) -> Result<CovarianceMatrix> {
        let n = 2 * self.modes;
        let mut g = DMatrix::zeros(n, n);
        for k in 0..n {
            let gk = gamma_apply(&self.amps, k, self.modes);
            for j in 0..k {
                let gjk = gamma_apply(&gk, j, self.modes);
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in self.amps.iter().zip(gjk.iter()) {
                    acc += a.conj() * b;
                }
                let v = (Complex64::new(0.0, 1.0) * acc).re;
                g[(j, k)] = v;
                g[(k, j)] = -v;
            }
        }
        CovarianceMatrix::from_matrix(g)
    }

    fn apply_factors(&self, facs: &[(usize, usize, f64)]) -> Result<Self> {
        let dim = self.amps.len();
        let mut amps = self.amps.clone();
        for &(p, q, th) in facs.iter().rev() {
            let gq = gamma_apply(&amps, q, self.modes);
            let gpq = gamma_apply(&gq, p, self.modes);
            let (c, s) = ((0.5 * th).cos(), (0.5 * th).sin());
            for b in 0..dim {
                amps[b] = c * amps[b] + s * gpq[b];
            }
        }
        let out = Self { modes: self.modes, amps };
        let nrm = out.norm();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::numerical(format!(
                "rotation application drifted the norm to {nrm}"
            )));
        }
        Ok(out)
    }

    /// Applies the Fock-space unitary of a Majorana-basis rotation, so
    /// that the covariance matrix transforms as `G -> R G R^T`.
    pub fn apply_rotation(&self, r: &DMatrix<f64>) -> Result<Self> {
        check_rotation(r, 2 * self.modes)?;
        self.apply_factors(&givens_factors(r)?)
    }

    /// Applies a two-mode gate on `(site, site + 1)`.
    pub fn apply_local_gate(&self, site: usize, g: &DMatrix<f64>) -> Result<Self> {
        check_rotation(g, 4)?;
        if site + 1 >= self.modes {
            return Err(Error::arg(format!(
                "gate site {site} out of range for {} modes",
                self.modes
            )));
        }
        let facs: Vec<_> = givens_factors(g)?
            .into_iter()
            .map(|(p, q, th)| (p + 2 * site, q + 2 * site, th))
            .collect();
        self.apply_factors(&facs)
    }

    fn outcome_selector(&self, first: usize, outcome: &[u8]) -> Result<impl Fn(usize) -> bool + '_> {
        if first + outcome.len() != self.modes {
            return Err(Error::arg(format!(
                "outcome of length {} does not cover modes {first}..{}",
                outcome.len(),
                self.modes
            )));
        }
        if outcome.iter().any(|&m| m > 1) {
            return Err(Error::arg("outcomes must be 0 or 1"));
        }
        let want: Vec<(usize, usize)> = outcome
            .iter()
            .enumerate()
            .map(|(i, &m)| (first + i, 1 - m as usize))
            .collect();
        Ok(move |b: usize| want.iter().all(|&(pos, bit)| (b >> pos) & 1 == bit))
    }

    /// Probability of jointly observing occupations `outcome` on modes
    /// `first..L` in the Fock basis.
    pub fn outcome_probability(&self, first: usize, outcome: &[u8]) -> Result<f64> {
        let sel = self.outcome_selector(first, outcome)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|&(b, _)| sel(b))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Normalized conditional state after observing `outcome` on modes
    /// `first..L`.
    pub fn conditioned_on(&self, first: usize, outcome: &[u8]) -> Result<Self> {
        let sel = self.outcome_selector(first, outcome)?;
        let mut amps = self.amps.clone();
        let mut nsq = 0.0;
        for (b, a) in amps.iter_mut().enumerate() {
            if sel(b) {
                nsq += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if nsq < 1e-12 {
            return Err(Error::arg("conditioning on a zero-probability outcome"));
        }
        let inv = Complex64::new(nsq.sqrt().recip(), 0.0);
        for a in amps.iter_mut() {
            *a *= inv;
        }
        Ok(Self { modes: self.modes, amps })
    }

    /// Eigenvalues of the reduced density matrix of the leading
    /// `sub_modes` modes. For a leading contiguous block the string
    /// operators of the convention stay inside the block, so the qubit
    /// partial trace is the fermionic one.
    fn reduced_spectrum(&self, sub_modes: usize) -> Result<Vec<f64>> {
        if sub_modes == 0 || sub_modes > self.modes {
            return Err(Error::arg(format!(
                "reduced block of {sub_modes} modes out of range"
            )));
        }
        let da = 1usize << sub_modes;
        let db = 1usize << (self.modes - sub_modes);
        let mut rho = vec![Complex64::new(0.0, 0.0); da * da];
        for bb in 0..db {
            let base = bb << sub_modes;
            for ba in 0..da {
                let x = self.amps[base | ba];
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for bc in 0..da {
                    rho[ba * da + bc] += x * self.amps[base | bc].conj();
                }
            }
        }
        // realified Hermitian eigenproblem: [[Re, -Im], [Im, Re]] is
        // symmetric and carries each eigenvalue twice
        let mut h = DMatrix::zeros(2 * da, 2 * da);
        for i in 0..da {
            for j in 0..da {
                let z = rho[i * da + j];
                h[(i, j)] = z.re;
                h[(i + da, j + da)] = z.re;
                h[(i, j + da)] = -z.im;
                h[(i + da, j)] = z.im;
            }
        }
        let eig = h.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(vals)
    }

    /// Von Neumann entropy (nats) of the leading `sub_modes` modes,
    /// from the exact reduced-density-matrix spectrum.
    pub fn reduced_vn_entropy(&self, sub_modes: usize) -> Result<f64> {
        let vals = self.reduced_spectrum(sub_modes)?;
        let mut s = 0.0;
        for v in vals {
            if v > 1e-14 {
                s -= v * v.ln();
            }
        }
        Ok(0.5 * s)
    }

    /// Renyi entropy of order `alpha` of the leading `sub_modes` modes.
    pub fn reduced_renyi_entropy(&self, sub_modes: usize, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) || alpha == 1.0 {
            return Err(Error::arg(format!(
                "Renyi order must be positive and not 1, got {alpha}"
            )));
        }
        let vals = self.reduced_spectrum(sub_modes)?;
        let tr: f64 = vals.iter().filter(|&&v| v > 1e-300).map(|v| v.powf(alpha)).sum();
        Ok((0.5 * tr).ln() / (1.0 - alpha))
    }
}
