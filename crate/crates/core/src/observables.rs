//! Observables of covariance matrices and the analytic reference laws
//! of the uniform ensemble of pure Gaussian states.
//!
//! The uniform ensemble on `L_A` modes is generated by conjugating the
//! vacuum with Haar-random special-orthogonal rotations. Scalar
//! observables (correlators, Pfaffian strings, entropies) are evaluated
//! directly on covariance matrices; the matching analytic element
//! distribution and mean-entropy curves live here as well.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::special::{digamma, ln_gamma, symmetric_beta_cdf};
use crate::numerics::{haar_so, pfaffian};
use crate::state::CovarianceMatrix;

/// Parameters of the uniform pure-Gaussian ensemble on a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GheSpec {
    pub modes: usize,
}

impl GheSpec {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::arg("ensemble needs at least one mode"));
        }
        Ok(Self { modes })
    }
}

/// Draws one pure state uniformly: `O Gamma_vac O^T` with `O` Haar on
/// the special orthogonal group of dimension `2 modes`.
pub fn ghe_sample(spec: GheSpec, rng: &mut impl Rng) -> Result<CovarianceMatrix> {
    let o = haar_so(2 * spec.modes, rng)?;
    CovarianceMatrix::vacuum(spec.modes)?.apply_rotation(&o)
}

/// A scalar observable of covariance matrices, addressable by a string
/// identifier from the command line.
///
/// Majorana indices in identifiers are 1-based ("corr:1,2" is the
/// leading pair); the struct stores them 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// Single covariance-matrix element, the two-point function.
    Correlator { i: usize, j: usize },
    /// Pfaffian of the principal submatrix on an even index set.
    NPoint { indices: Vec<usize> },
    /// Von Neumann entropy (nats) of the first `modes` modes.
    VonNeumann { modes: usize },
    /// Renyi entropy (nats) of the first `modes` modes.
    Renyi { alpha: f64, modes: usize },
}

fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            let v: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::arg(format!("bad index {tok:?}")))?;
            if v == 0 {
                return Err(Error::arg("indices are 1-based; 0 is not valid"));
            }
            Ok(v - 1)
        })
        .collect()
}

fn parse_leading_range(text: &str) -> Result<usize> {
    let text = text.trim();
    if let Some((start, end)) = text.split_once("..") {
        if start.trim() != "1" {
            return Err(Error::arg(format!(
                "mode ranges must start at 1, got {text:?}"
            )));
        }
        let k: usize = end
            .trim()
            .parse()
            .map_err(|_| Error::arg(format!("bad range end {end:?}")))?;
        if k == 0 {
            return Err(Error::arg("mode range must be nonempty"));
        }
        Ok(k)
    } else {
        let k: usize = text
            .parse()
            .map_err(|_| Error::arg(format!("bad mode count {text:?}")))?;
        if k == 0 {
            return Err(Error::arg("mode count must be positive"));
        }
        Ok(k)
    }
}

fn format_alpha(alpha: f64) -> String {
    if alpha.fract() == 0.0 && alpha.abs() < 1e15 {
        format!("{alpha:.0}")
    } else {
        format!("{alpha}")
    }
}

impl Observable {
    /// Parses a registry identifier: "corr:1,2", "npoint:1,2,3,4",
    /// "vn:1..k" (or "vn:k"), "renyi:alpha:1..k".
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::arg(format!("observable {text:?} has no arguments")))?;
        match kind.trim() {
            "corr" => {
                let idx = parse_index_list(rest)?;
                if idx.len() != 2 {
                    return Err(Error::arg("corr takes exactly two indices"));
                }
                Ok(Self::Correlator { i: idx[0], j: idx[1] })
            }
            "npoint" => {
                let indices = parse_index_list(rest)?;
                Ok(Self::NPoint { indices })
            }
            "vn" => Ok(Self::VonNeumann { modes: parse_leading_range(rest)? }),
            "renyi" => {
                let (alpha_text, range) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::arg("renyi takes alpha and a mode range"))?;
                let alpha: f64 = alpha_text
                    .trim()
                    .parse()
                    .map_err(|_| Error::arg(format!("bad alpha {alpha_text:?}")))?;
                Ok(Self::Renyi { alpha, modes: parse_leading_range(range)? })
            }
            other => Err(Error::arg(format!("unknown observable kind {other:?}"))),
        }
    }

    /// Canonical registry identifier (inverse of `parse`).
    pub fn identifier(&self) -> String {
        match self {
            Self::Correlator { i, j } => format!("corr:{},{}", i + 1, j + 1),
            Self::NPoint { indices } => {
                let list: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
                format!("npoint:{}", list.join(","))
            }
            Self::VonNeumann { modes } => format!("vn:1..{modes}"),
            Self::Renyi { alpha, modes } => {
                format!("renyi:{}:1..{}", format_alpha(*alpha), modes)
            }
        }
    }

    /// Evaluates the observable on a covariance matrix.
    pub fn evaluate(&self, cm: &CovarianceMatrix) -> Result<f64> {
        match self {
            Self::Correlator { i, j } => correlator_element(cm.matrix(), *i, *j),
            Self::NPoint { indices } => npoint_correlator(cm.matrix(), indices),
            Self::VonNeumann { modes } => von_neumann_entropy(&leading_subsystem(cm, *modes)?),
            Self::Renyi { alpha, modes } => {
                renyi_entropy(&leading_subsystem(cm, *modes)?, *alpha)
            }
        }
    }

    /// Interval guaranteed to contain every evaluation on a valid
    /// covariance matrix.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Self::Correlator { .. } | Self::NPoint { .. } => (-1.0, 1.0),
            Self::VonNeumann { modes } | Self::Renyi { modes, .. } => {
                (0.0, *modes as f64 * std::f64::consts::LN_2)
            }
        }
    }

    /// Lipschitz constant with respect to the Frobenius norm on
    /// covariance matrices, when one is known.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Self::Correlator { .. } => Some(1.0),
            Self::NPoint { indices } if indices.len() == 2 => Some(1.0),
            _ => None,
        }
    }
}

fn leading_subsystem(cm: &CovarianceMatrix, modes: usize) -> Result<CovarianceMatrix> {
    if modes == 0 || modes > cm.modes() {
        return Err(Error::arg(format!(
            "subsystem of {modes} modes not contained in {} modes",
            cm.modes()
        )));
    }
    if modes == cm.modes() {
        Ok(cm.clone())
    } else {
        cm.subsystem(&(0..modes).collect::<Vec<_>>())
    }
}

/// The two-point function: the `(i, j)` covariance-matrix element.
pub fn correlator_element(gamma: &DMatrix<f64>, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::arg("two-point function on the diagonal is identically zero"));
    }
    let n = gamma.nrows();
    if i >= n || j >= n {
        return Err(Error::arg(format!("index ({i}, {j}) out of range for dimension {n}")));
    }
    Ok(gamma[(i, j)])
}

/// Wick expectation of an even Majorana string: the Pfaffian of the
/// principal submatrix on the (sorted) index set. The empty set gives 1.
pub fn npoint_correlator(gamma: &DMatrix<f64>, indices: &[usize]) -> Result<f64> {
    if indices.len() % 2 != 0 {
        return Err(Error::arg(format!(
            "majorana string of odd length {} has zero expectation by parity",
            indices.len()
        )));
    }
    let n = gamma.nrows();
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::arg("majorana indices must be distinct"));
    }
    if let Some(&last) = sorted.last() {
        if last >= n {
            return Err(Error::arg(format!("index {last} out of range for dimension {n}")));
        }
    }
    let k = sorted.len();
    let mut sub = DMatrix::zeros(k, k);
    for (a, &ia) in sorted.iter().enumerate() {
        for (b, &ib) in sorted.iter().enumerate() {
            sub[(a, b)] = gamma[(ia, ib)];
        }
    }
    pfaffian(&sub)
}

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 { 0.0 } else { -p * p.ln() }
}

/// Von Neumann entropy in nats from the canonical singular values:
/// each value `s` contributes the binary-mixture entropy of
/// `(1 +/- s)/2`.
pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    let svals = cm.canonical_values()?;
    Ok(svals
        .iter()
        .map(|&s| entropy_term(0.5 * (1.0 - s)) + entropy_term(0.5 * (1.0 + s)))
        .sum())
}

/// Renyi entropy of order `alpha` in nats. Order 1 is rejected; use
/// `von_neumann_entropy` for it.
pub fn renyi_entropy(cm: &CovarianceMatrix, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 {
        return Err(Error::arg(format!("Renyi order must be positive, got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(Error::arg(
            "Renyi order 1 is the von Neumann entropy; call von_neumann_entropy",
        ));
    }
    let svals = cm.canonical_values()?;
    let mut total = 0.0;
    for &s in &svals {
        let hi = 0.5 * (1.0 + s);
        let lo = 0.5 * (1.0 - s);
        total += (hi.powf(alpha) + lo.powf(alpha)).ln() / (1.0 - alpha);
    }
    Ok(total)
}

/// Normalized density of a single off-diagonal covariance element of
/// the uniform ensemble: proportional to `(1 - x^2)^(n-1)` on [-1, 1],
/// with `n = L_A - 1` for the ensemble on `L_A` modes.
pub fn ghe_element_pdf(x: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::arg(
            "element density needs n >= 1; the single-mode ensemble is discrete on {-1, +1}",
        ));
    }
    if x.abs() > 1.0 {
        return Ok(0.0);
    }
    let ln_norm = ln_gamma(n as f64 + 0.5)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(n as f64);
    Ok(ln_norm.exp() * (1.0 - x * x).powi(n as i32 - 1))
}

/// CDF matching `ghe_element_pdf`.
pub fn ghe_element_cdf(x: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::arg(
            "element distribution needs n >= 1; the single-mode ensemble is discrete on {-1, +1}",
        ));
    }
    symmetric_beta_cdf(x.clamp(-1.0, 1.0), (n - 1) as f64)
}

/// Unnormalized joint density of the canonical singular values of a
/// uniform pure state's subsystem block: repulsion in the squared
/// values times an edge factor.
pub fn singular_value_joint_pdf(values: &[f64], la: usize, lb: usize) -> Result<f64> {
    if la == 0 || la > lb {
        return Err(Error::arg(format!(
            "joint density needs 1 <= L_A <= L_B, got L_A = {la}, L_B = {lb}"
        )));
    }
    if values.len() != la {
        return Err(Error::arg(format!(
            "expected {la} singular values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::arg("singular values must lie in [0, 1]"));
    }
    let mut density = 1.0;
    for &s in values {
        density *= (1.0 - s * s).powi((lb - la) as i32);
    }
    for j in 0..values.len() {
        for k in 0..j {
            let d = values[j] * values[j] - values[k] * values[k];
            density *= d * d;
        }
    }
    Ok(density)
}

/// Mean entanglement entropy (nats) of an `L_A`-mode subsystem of a
/// uniform pure Gaussian state on `L` modes, by the exact digamma
/// formula.
pub fn page_mean(l: usize, la: usize) -> Result<f64> {
    if la == 0 || la >= l {
        return Err(Error::arg(format!(
            "mean entropy needs 1 <= L_A < L, got L_A = {la}, L = {l}"
        )));
    }
    if 2 * la > l {
        return page_mean(l, l - la);
    }
    let (lf, laf) = (l as f64, la as f64);
    Ok((lf - 0.5) * digamma(2.0 * lf)?
        + (0.25 - laf) * digamma(lf)?
        + (0.5 + laf - lf) * digamma(2.0 * (lf - laf))?
        - 0.25 * digamma(lf - laf)?
        - laf)
}

/// Thermodynamic-limit variance of the entanglement entropy at
/// subsystem fraction `f`: `(f + f^2 + ln(1 - f)) / 2`.
pub fn page_variance_limit(f: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&f) || f == 0.0 {
        return Err(Error::arg(format!(
            "subsystem fraction must lie strictly inside (0, 1), got {f}"
        )));
    }
    Ok(0.5 * (f + f * f + (1.0 - f).ln()))
}
