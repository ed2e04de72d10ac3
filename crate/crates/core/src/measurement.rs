//! Fock-basis measurement of Gaussian states and projected ensembles.
//!
//! The partition convention is A = the first `L_A` modes, B = the rest.
//! Outcome strings list occupations of the B modes in order, entries 0
//! or 1. Probabilities come from determinant formulas on the covariance
//! matrix; post-measurement states stay Gaussian and are returned as
//! covariance matrices.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::CovarianceMatrix;

/// Determinants in `[-DET_CLAMP_TOL, 0)` are treated as exact zeros;
/// anything more negative is an inconsistency.
const DET_CLAMP_TOL: f64 = 1e-9;
/// Probabilities at or below this are never sampled and make collapse
/// undefined.
const ZERO_PROB_TOL: f64 = 1e-12;
/// Exhaustive enumeration cap.
const MAX_EXHAUSTIVE_MODES: usize = 20;

/// One measured outcome: the occupation string on B, its probability,
/// and the post-measurement state on A.
#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub outcome: Vec<u8>,
    pub probability: f64,
    pub post_state: CovarianceMatrix,
}

/// How a `ProjectedEnsemble` was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Every outcome with nonzero probability, Born-weighted.
    Exhaustive,
    /// Independent sampled shots, uniformly weighted.
    Sampled { shots: usize },
}

/// The ensemble of post-measurement states on A induced by measuring B.
#[derive(Clone, Debug)]
pub struct ProjectedEnsemble {
    pub records: Vec<MeasurementRecord>,
    pub mode: EnsembleMode,
    /// `(L_A, L_B)`.
    pub partition: (usize, usize),
    /// Seed note carried into serialized dumps.
    pub seed: Option<u64>,
    /// Free-form provenance note (circuit description).
    pub circuit: Option<String>,
}

fn validate_outcome(outcome: &[u8]) -> Result<()> {
    if outcome.iter().any(|&m| m > 1) {
        return Err(Error::arg("outcome entries must be 0 or 1"));
    }
    Ok(())
}

/// `kappa_m`: the covariance matrix of the Fock product state with
/// occupations `m`, a direct sum of `(-1)^{m_i} [[0,1],[-1,0]]`.
fn kappa(outcome: &[u8]) -> DMatrix<f64> {
    let n = 2 * outcome.len();
    let mut k = DMatrix::zeros(n, n);
    for (i, &m) in outcome.iter().enumerate() {
        let s = if m == 0 { 1.0 } else { -1.0 };
        k[(2 * i, 2 * i + 1)] = s;
        k[(2 * i + 1, 2 * i)] = -s;
    }
    k
}

fn sqrt_of_clamped_det(det: f64, context: &str) -> Result<f64> {
    if det < -DET_CLAMP_TOL {
        return Err(Error::numerical(format!(
            "{context}: determinant {det:.3e} is negative beyond tolerance"
        )));
    }
    Ok(det.max(0.0).sqrt())
}

/// Probability of observing occupation `outcome` on a single mode:
/// `p = sqrt(det(1 - K Gamma)) / 2` with `K` the single-mode kappa
/// embedded at mode `j`.
pub fn single_mode_probability(
    state: &CovarianceMatrix,
    mode: usize,
    outcome: u8,
) -> Result<f64> {
    if mode >= state.modes() {
        return Err(Error::arg(format!(
            "mode {mode} out of range for {} modes",
            state.modes()
        )));
    }
    validate_outcome(&[outcome])?;
    let n = state.dim();
    let s = if outcome == 0 { 1.0 } else { -1.0 };
    let mut k = DMatrix::zeros(n, n);
    k[(2 * mode, 2 * mode + 1)] = s;
    k[(2 * mode + 1, 2 * mode)] = -s;
    let m = DMatrix::<f64>::identity(n, n) - k * state.matrix();
    let p = 0.5 * sqrt_of_clamped_det(m.determinant(), "single-mode probability")?;
    Ok(p.min(1.0))
}

/// Full-system post-measurement state after observing `outcome` on one
/// mode: `K + D (1 - Gamma K)^{-1} Gamma D`, where `D` is the identity
/// with the measured mode's rows zeroed. The measured block becomes
/// exactly kappa and decouples.
pub fn single_mode_collapse(
    state: &CovarianceMatrix,
    mode: usize,
    outcome: u8,
) -> Result<CovarianceMatrix> {
    let p = single_mode_probability(state, mode, outcome)?;
    if p <= ZERO_PROB_TOL {
        return Err(Error::arg(format!(
            "collapse undefined for zero-probability outcome (p = {p:.3e})"
        )));
    }
    let n = state.dim();
    let s = if outcome == 0 { 1.0 } else { -1.0 };
    let mut k = DMatrix::zeros(n, n);
    k[(2 * mode, 2 * mode + 1)] = s;
    k[(2 * mode + 1, 2 * mode)] = -s;
    let m = DMatrix::<f64>::identity(n, n) - state.matrix() * &k;
    let x = m
        .lu()
        .solve(state.matrix())
        .ok_or_else(|| Error::numerical("singular system in single-mode collapse"))?;
    let mut out = x;
    for i in 0..n {
        out[(2 * mode, i)] = 0.0;
        out[(2 * mode + 1, i)] = 0.0;
        out[(i, 2 * mode)] = 0.0;
        out[(i, 2 * mode + 1)] = 0.0;
    }
    out += k;
    let anti = 0.5 * (&out - out.transpose());
    CovarianceMatrix::from_matrix(anti)
}

/// Probability of the full outcome string on B in one determinant:
/// `p = 2^{-L_B} sqrt(det(1 - kappa Gamma^B))`.
pub fn block_probability(state: &CovarianceMatrix, la: usize, outcome: &[u8]) -> Result<f64> {
    let l = state.modes();
    if la > l {
        return Err(Error::arg(format!("partition L_A = {la} exceeds {l} modes")));
    }
    if outcome.len() != l - la {
        return Err(Error::arg(format!(
            "outcome length {} does not match L_B = {}",
            outcome.len(),
            l - la
        )));
    }
    validate_outcome(outcome)?;
    let lb = outcome.len();
    if lb == 0 {
        return Ok(1.0);
    }
    let gb = state.matrix().view((2 * la, 2 * la), (2 * lb, 2 * lb));
    let m = DMatrix::<f64>::identity(2 * lb, 2 * lb) - kappa(outcome) * gb;
    let p = 2f64.powi(-(lb as i32)) * sqrt_of_clamped_det(m.determinant(), "block probability")?;
    Ok(p.min(1.0))
}

/// Post-measurement state on A after observing the full string on B:
/// `Gamma^A - Gamma^{AB} kappa (1 - Gamma^B kappa)^{-1} (Gamma^{AB})^T`.
pub fn block_collapse(
    state: &CovarianceMatrix,
    la: usize,
    outcome: &[u8],
) -> Result<CovarianceMatrix> {
    if la == 0 {
        return Err(Error::arg("block collapse needs a nonempty subsystem A"));
    }
    let p = block_probability(state, la, outcome)?;
    if p <= ZERO_PROB_TOL {
        return Err(Error::arg(format!(
            "collapse undefined for zero-probability outcome (p = {p:.3e})"
        )));
    }
    let lb = outcome.len();
    let g = state.matrix();
    let ga = g.view((0, 0), (2 * la, 2 * la)).clone_owned();
    if lb == 0 {
        return CovarianceMatrix::from_matrix(ga);
    }
    let gab = g.view((0, 2 * la), (2 * la, 2 * lb)).clone_owned();
    let gb = g.view((2 * la, 2 * la), (2 * lb, 2 * lb)).clone_owned();
    let kap = kappa(outcome);
    let m = DMatrix::<f64>::identity(2 * lb, 2 * lb) - gb * &kap;
    let solved = m
        .lu()
        .solve(&gab.transpose())
        .ok_or_else(|| Error::numerical("singular system in block collapse at nonzero probability"))?;
    let out = ga - &gab * kap * solved;
    let anti = 0.5 * (&out - out.transpose());
    CovarianceMatrix::from_matrix(anti)
}

/// Draws one outcome string with its exact Born probability by chaining
/// single-mode conditionals, shrinking the working matrix by one mode
/// per measurement (O(L_B L^2) per shot). The caller must supply a pure
/// state; purity is checked by the ensemble builders, not per shot.
pub fn sample_outcome(
    state: &CovarianceMatrix,
    la: usize,
    rng: &mut impl Rng,
) -> Result<MeasurementRecord> {
    let l = state.modes();
    if la == 0 || la > l {
        return Err(Error::arg(format!(
            "sampling needs 1 <= L_A <= L, got L_A = {la}, L = {l}"
        )));
    }
    let lb = l - la;
    let mut w = state.matrix().clone();
    let mut outcome = Vec::with_capacity(lb);
    let mut probability = 1.0;
    for _ in 0..lb {
        let n = w.nrows();
        let (i0, i1) = (2 * la, 2 * la + 1);
        let mut g = w[(i0, i1)];
        if g.abs() > 1.0 + 1e-8 {
            return Err(Error::numerical(format!(
                "conditional occupation parameter {g} outside [-1, 1]"
            )));
        }
        g = g.clamp(-1.0, 1.0);
        let p0 = 0.5 * (1.0 + g);
        let m: u8 = if p0 <= ZERO_PROB_TOL {
            1
        } else if p0 >= 1.0 - ZERO_PROB_TOL {
            0
        } else if rng.random::<f64>() < p0 {
            0
        } else {
            1
        };
        let s = if m == 0 { 1.0 } else { -1.0 };
        let p = 0.5 * (1.0 + s * g);
        outcome.push(m);
        probability *= p;

        // drop the measured Majorana pair, then apply the rank-2
        // conditioning update on the survivors
        let keep: Vec<usize> = (0..n).filter(|&i| i != i0 && i != i1).collect();
        let u: Vec<f64> = keep.iter().map(|&i| w[(i, i0)]).collect();
        let v: Vec<f64> = keep.iter().map(|&i| w[(i, i1)]).collect();
        let mut next = DMatrix::zeros(n - 2, n - 2);
        for (a, &ia) in keep.iter().enumerate() {
            for (b, &ib) in keep.iter().enumerate() {
                next[(a, b)] = w[(ia, ib)];
            }
        }
        let coef = s / (2.0 * p);
        for a in 0..n - 2 {
            for b in 0..n - 2 {
                next[(a, b)] -= coef * (u[a] * v[b] - v[a] * u[b]);
            }
        }
        w = next;
    }
    Ok(MeasurementRecord {
        outcome,
        probability,
        post_state: CovarianceMatrix::from_matrix(w)?,
    })
}

fn require_pure(state: &CovarianceMatrix) -> Result<()> {
    if !state.is_pure() {
        return Err(Error::arg(format!(
            "projected ensembles are defined for pure states (purity defect {:.3e})",
            state.purity_defect()
        )));
    }
    Ok(())
}

impl ProjectedEnsemble {
    /// Enumerates every outcome of measuring B (L_B <= 20). Records
    /// with probability <= 1e-12 are dropped; the retained mass must
    /// still sum to 1 within 1e-9.
    pub fn exhaustive(state: &CovarianceMatrix, la: usize) -> Result<Self> {
        let l = state.modes();
        if la == 0 || la > l {
            return Err(Error::arg(format!("need 1 <= L_A <= L, got L_A = {la}")));
        }
        require_pure(state)?;
        let lb = l - la;
        if lb > MAX_EXHAUSTIVE_MODES {
            return Err(Error::size(format!(
                "exhaustive enumeration capped at L_B = {MAX_EXHAUSTIVE_MODES}, got {lb}"
            )));
        }
        let mut records = Vec::new();
        let mut total = 0.0;
        for word in 0..(1usize << lb) {
            let outcome: Vec<u8> = (0..lb).map(|i| ((word >> i) & 1) as u8).collect();
            let p = block_probability(state, la, &outcome)?;
            total += p;
            if p > ZERO_PROB_TOL {
                let post_state = block_collapse(state, la, &outcome)?;
                records.push(MeasurementRecord { outcome, probability: p, post_state });
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::numerical(format!(
                "exhaustive outcome probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            records,
            mode: EnsembleMode::Exhaustive,
            partition: (la, lb),
            seed: None,
            circuit: None,
        })
    }

    /// Draws `shots` independent outcome records.
    pub fn sampled(
        state: &CovarianceMatrix,
        la: usize,
        shots: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if shots == 0 {
            return Err(Error::arg("sampled ensemble needs at least one shot"));
        }
        require_pure(state)?;
        let records: Result<Vec<_>> =
            (0..shots).map(|_| sample_outcome(state, la, rng)).collect();
        Ok(Self {
            records: records?,
            mode: EnsembleMode::Sampled { shots },
            partition: (la, state.modes() - la),
            seed: None,
            circuit: None,
        })
    }

    pub fn with_provenance(mut self, seed: u64, circuit: impl Into<String>) -> Self {
        self.seed = Some(seed);
        self.circuit = Some(circuit.into());
        self
    }

    /// Statistical weight of each record: normalized Born probabilities
    /// for exhaustive ensembles, `1/R` for sampled ones.
    pub fn weights(&self) -> Vec<f64> {
        match self.mode {
            EnsembleMode::Exhaustive => {
                let total: f64 = self.records.iter().map(|r| r.probability).sum();
                self.records.iter().map(|r| r.probability / total).collect()
            }
            EnsembleMode::Sampled { shots } => {
                vec![1.0 / shots as f64; self.records.len()]
            }
        }
    }

    /// Weighted average of the post-measurement covariance matrices.
    pub fn mean_state(&self) -> Result<DMatrix<f64>> {
        let (la, _) = self.partition;
        let mut acc = DMatrix::zeros(2 * la, 2 * la);
        for (r, wgt) in self.records.iter().zip(self.weights()) {
            acc += r.post_state.matrix() * wgt;
        }
        Ok(acc)
    }

    /// JSON dump of the ensemble.
    pub fn to_json(&self) -> Result<String> {
        let dump = EnsembleDump {
            seed: self.seed,
            circuit: self.circuit.clone(),
            partition: self.partition,
            mode: match self.mode {
                EnsembleMode::Exhaustive => "exhaustive".into(),
                EnsembleMode::Sampled { shots } => format!("sampled:{shots}"),
            },
            records: self
                .records
                .iter()
                .map(|r| RecordDump {
                    outcome: r.outcome.iter().map(|m| m.to_string()).collect(),
                    probability: r.probability,
                    gamma_row_major: r.post_state.matrix().transpose().as_slice().to_vec(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&dump)?)
    }

    /// Rebuilds an ensemble from its JSON dump.
    pub fn from_json(text: &str) -> Result<Self> {
        let dump: EnsembleDump = serde_json::from_str(text)?;
        let (la, lb) = dump.partition;
        let mode = if dump.mode == "exhaustive" {
            EnsembleMode::Exhaustive
        } else if let Some(n) = dump.mode.strip_prefix("sampled:") {
            EnsembleMode::Sampled {
                shots: n
                    .parse()
                    .map_err(|_| Error::arg(format!("bad ensemble mode {:?}", dump.mode)))?,
            }
        } else {
            return Err(Error::arg(format!("bad ensemble mode {:?}", dump.mode)));
        };
        let records = dump
            .records
            .into_iter()
            .map(|r| {
                let outcome: Result<Vec<u8>> = r
                    .outcome
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(Error::arg(format!("bad outcome character {c:?}"))),
                    })
                    .collect();
                let n = 2 * la;
                if r.gamma_row_major.len() != n * n {
                    return Err(Error::arg("post-state matrix has wrong length"));
                }
                let gamma = DMatrix::from_row_slice(n, n, &r.gamma_row_major);
                Ok(MeasurementRecord {
                    outcome: outcome?,
                    probability: r.probability,
                    post_state: CovarianceMatrix::from_matrix(gamma)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            records,
            mode,
            partition: (la, lb),
            seed: dump.seed,
            circuit: dump.circuit,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleDump {
    seed: Option<u64>,
    circuit: Option<String>,
    partition: (usize, usize),
    mode: String,
    records: Vec<RecordDump>,
}

#[derive(Serialize, Deserialize)]
struct RecordDump {
    outcome: String,
    probability: f64,
    gamma_row_major: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::haar_so;
    use crate::state::DenseState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_pure(l: usize, seed: u64) -> CovarianceMatrix {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        CovarianceMatrix::vacuum(l)
            .unwrap()
            .apply_rotation(&haar_so(2 * l, &mut rng).unwrap())
            .unwrap()
    }

    #[test]
    fn vacuum_is_certainly_unoccupied() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        for j in 0..3 {
            assert!((single_mode_probability(&v, j, 0).unwrap() - 1.0).abs() < 1e-14);
            assert!(single_mode_probability(&v, j, 1).unwrap() < 1e-14);
        }
    }

    #[test]
    fn single_mode_probabilities_sum_to_one() {
        let g = random_pure(4, 5);
        for j in 0..4 {
            let p0 = single_mode_probability(&g, j, 0).unwrap();
            let p1 = single_mode_probability(&g, j, 1).unwrap();
            assert!((p0 + p1 - 1.0).abs() < 1e-10, "mode {j}");
        }
    }

    #[test]
    fn balanced_mode_gives_half() {
        // vacuum rotated so that mode 0 points along a correlation-free
        // direction: use a quarter turn mixing gamma_0 into gamma_2
        let l = 2;
        let mut r = DMatrix::<f64>::identity(4, 4);
        let th = std::f64::consts::FRAC_PI_4;
        r[(0, 0)] = th.cos();
        r[(0, 2)] = -th.sin();
        r[(2, 0)] = th.sin();
        r[(2, 2)] = th.cos();
        let g = CovarianceMatrix::vacuum(l).unwrap().apply_rotation(&r).unwrap();
        assert!(g.matrix()[(0, 1)].abs() < 0.8);
        let p0 = single_mode_probability(&g, 0, 0).unwrap();
        let expected = 0.5 * (1.0 + g.matrix()[(0, 1)]);
        assert!((p0 - expected).abs() < 1e-12);
    }

    #[test]
    fn probabilities_match_dense_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let l = 4;
        let r = haar_so(2 * l, &mut rng).unwrap();
        let cm = CovarianceMatrix::vacuum(l).unwrap().apply_rotation(&r).unwrap();
        let dense = DenseState::reference_state(l).unwrap().apply_rotation(&r).unwrap();
        for word in 0..(1usize << l) {
            let outcome: Vec<u8> = (0..l).map(|j| ((word >> j) & 1) as u8).collect();
            let p_cm = block_probability(&cm, 0, &outcome).unwrap();
            let p_dense = dense.outcome_probability(0, &outcome).unwrap();
            assert!((p_cm - p_dense).abs() < 1e-9, "outcome {outcome:?}");
        }
    }

    #[test]
    fn single_mode_collapse_matches_dense_conditional() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let l = 4;
        let r = haar_so(2 * l, &mut rng).unwrap();
        let cm = CovarianceMatrix::vacuum(l).unwrap().apply_rotation(&r).unwrap();
        let dense = DenseState::reference_state(l).unwrap().apply_rotation(&r).unwrap();
        // measure the last mode so the conditional keeps modes 0..3
        for m in [0u8, 1u8] {
            let p = single_mode_probability(&cm, l - 1, m).unwrap();
            if p < 1e-6 {
                continue;
            }
            let collapsed = single_mode_collapse(&cm, l - 1, m).unwrap();
            let cond = dense.conditioned_on(l - 1, &[m]).unwrap();
            let cond_cm = cond.covariance_matrix().unwrap();
            let sub = collapsed.subsystem(&[0, 1, 2]).unwrap();
            let dense_sub = cond_cm.subsystem(&[0, 1, 2]).unwrap();
            assert!(
                (sub.matrix() - dense_sub.matrix()).norm() < 1e-9,
                "m={m}"
            );
            // measured block pinned to kappa
            let s = if m == 0 { 1.0 } else { -1.0 };
            assert!((collapsed.matrix()[(2 * (l - 1), 2 * (l - 1) + 1)] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_of_vacuum_is_identity() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        let c = single_mode_collapse(&v, 1, 0).unwrap();
        assert!((c.matrix() - v.matrix()).norm() < 1e-12);
        assert!(single_mode_collapse(&v, 1, 1).is_err());
    }

    #[test]
    fn block_collapse_matches_iterated_single_mode() {
        let g = random_pure(4, 31);
        let la = 2;
        let outcome = [1u8, 0u8];
        let blocked = block_collapse(&g, la, &outcome).unwrap();
        // iterate full-system collapses then restrict
        let step1 = single_mode_collapse(&g, 2, outcome[0]).unwrap();
        let step2 = single_mode_collapse(&step1, 3, outcome[1]).unwrap();
        let iter = step2.subsystem(&[0, 1]).unwrap();
        assert!(
            (blocked.matrix() - iter.matrix()).norm() < 1e-9,
            "dev {}",
            (blocked.matrix() - iter.matrix()).norm()
        );
    }

    #[test]
    fn block_collapse_matches_dense_conditional() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let l = 4;
        let la = 1;
        let r = haar_so(2 * l, &mut rng).unwrap();
        let cm = CovarianceMatrix::vacuum(l).unwrap().apply_rotation(&r).unwrap();
        let dense = DenseState::reference_state(l).unwrap().apply_rotation(&r).unwrap();
        for word in 0..(1usize << (l - la)) {
            let outcome: Vec<u8> = (0..l - la).map(|i| ((word >> i) & 1) as u8).collect();
            let p = block_probability(&cm, la, &outcome).unwrap();
            if p < 1e-8 {
                continue;
            }
            let blocked = block_collapse(&cm, la, &outcome).unwrap();
            let cond = dense.conditioned_on(la, &outcome).unwrap().covariance_matrix().unwrap();
            let dense_a = cond.subsystem(&[0]).unwrap();
            assert!(
                (blocked.matrix() - dense_a.matrix()).norm() < 1e-9,
                "outcome {outcome:?}"
            );
            assert!(blocked.is_pure());
        }
    }

    #[test]
    fn product_state_collapse_leaves_a_untouched() {
        let v = CovarianceMatrix::vacuum(4).unwrap();
        let c = block_collapse(&v, 2, &[0, 0]).unwrap();
        assert!((c.matrix() - v.subsystem(&[0, 1]).unwrap().matrix()).norm() < 1e-14);
    }

    #[test]
    fn chain_probability_matches_block_probability() {
        let g = random_pure(6, 41);
        let la = 2;
        let mut rng = ChaCha12Rng::seed_from_u64(4242);
        for _ in 0..50 {
            let rec = sample_outcome(&g, la, &mut rng).unwrap();
            let p_block = block_probability(&g, la, &rec.outcome).unwrap();
            assert!(
                (rec.probability - p_block).abs() < 1e-10,
                "chain {} vs block {}",
                rec.probability,
                p_block
            );
            let direct = block_collapse(&g, la, &rec.outcome).unwrap();
            assert!((rec.post_state.matrix() - direct.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn sampled_frequencies_match_probabilities() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let l = 5;
        let la = 1;
        let v = CovarianceMatrix::vacuum(l).unwrap();
        // mix mode pairs inside B so several outcomes carry weight
        let mut r = DMatrix::<f64>::identity(2 * l, 2 * l);
        let th = std::f64::consts::FRAC_PI_4;
        for pair in [(1usize, 2usize), (3usize, 4usize)] {
            let (a, b) = (2 * pair.0, 2 * pair.1);
            r[(a, a)] = th.cos();
            r[(a, b)] = -th.sin();
            r[(b, a)] = th.sin();
            r[(b, b)] = th.cos();
        }
        let g = v.apply_rotation(&r).unwrap();
        let shots = 4000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..shots {
            let rec = sample_outcome(&g, la, &mut rng).unwrap();
            *counts.entry(rec.outcome.clone()).or_insert(0usize) += 1;
        }
        for (outcome, count) in counts {
            let p = block_probability(&g, la, &outcome).unwrap();
            let expect = p * shots as f64;
            let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (count as f64 - expect).abs() < 5.0 * sigma + 5.0,
                "outcome {outcome:?}: {count} vs {expect:.1}"
            );
        }
    }

    #[test]
    fn exhaustive_ensemble_is_complete_and_consistent() {
        let g = random_pure(6, 53);
        let pe = ProjectedEnsemble::exhaustive(&g, 2).unwrap();
        let total: f64 = pe.records.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for r in &pe.records {
            assert!(r.post_state.is_pure());
        }
        // first moment reproduces the pre-measurement A block
        let mean = pe.mean_state().unwrap();
        let ga = g.subsystem(&[0, 1]).unwrap();
        assert!(
            (&mean - ga.matrix()).norm() < 1e-10,
            "first moment deviation {}",
            (&mean - ga.matrix()).norm()
        );
    }

    #[test]
    fn sampled_first_moment_approaches_exhaustive() {
        let g = random_pure(5, 61);
        let la = 2;
        let exhaustive = ProjectedEnsemble::exhaustive(&g, la).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let shots = 10_000;
        let sampled = ProjectedEnsemble::sampled(&g, la, shots, &mut rng).unwrap();
        let me = exhaustive.mean_state().unwrap();
        let ms = sampled.mean_state().unwrap();
        let tol = 5.0 / (shots as f64).sqrt();
        for i in 0..2 * la {
            for j in 0..2 * la {
                assert!(
                    (me[(i, j)] - ms[(i, j)]).abs() < tol,
                    "entry ({i},{j}): {} vs {}",
                    me[(i, j)],
                    ms[(i, j)]
                );
            }
        }
    }

    #[test]
    fn trivial_partition_yields_deterministic_record() {
        let g = random_pure(3, 71);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let rec = sample_outcome(&g, 3, &mut rng).unwrap();
        assert!(rec.outcome.is_empty());
        assert_eq!(rec.probability, 1.0);
        assert!((rec.post_state.matrix() - g.matrix()).norm() < 1e-14);
    }

    #[test]
    fn ensemble_json_round_trip() {
        let g = random_pure(4, 83);
        let pe = ProjectedEnsemble::exhaustive(&g, 2)
            .unwrap()
            .with_provenance(83, "haar@4");
        let json = pe.to_json().unwrap();
        let back = ProjectedEnsemble::from_json(&json).unwrap();
        assert_eq!(back.records.len(), pe.records.len());
        assert_eq!(back.partition, pe.partition);
        assert_eq!(back.seed, Some(83));
        for (a, b) in pe.records.iter().zip(back.records.iter()) {
            assert_eq!(a.outcome, b.outcome);
            assert!((a.post_state.matrix() - b.post_state.matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn mixed_states_are_rejected() {
        let g = random_pure(4, 91);
        let mixed = g.subsystem(&[0, 1, 2]).unwrap();
        assert!(ProjectedEnsemble::exhaustive(&mixed, 1).is_err());
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(ProjectedEnsemble::sampled(&mixed, 1, 10, &mut rng).is_err());
    }
}
