//! Distribution-level comparison machinery: weighted empirical
//! distributions, Wasserstein-1 distances (exact between step CDFs,
//! quadrature against analytic CDFs), covariance-matrix moments of
//! projected ensembles, Pfaffian-product design distances, and
//! concentration probes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::ProjectedEnsemble;
use crate::numerics::quadrature::integrate;
use crate::observables::{ghe_sample, npoint_correlator, GheSpec, Observable};

/// Weighted multiset of real values with an induced step CDF. Atoms
/// are kept sorted with exact ties merged; weights are normalized to
/// sum to 1.
#[derive(Clone, Debug)]
pub struct EmpiricalDistribution {
    atoms: Vec<(f64, f64)>,
}

impl EmpiricalDistribution {
    /// Uniformly weighted samples.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("empirical distribution needs at least one sample"));
        }
        let w = 1.0 / values.len() as f64;
        Self::build(values.iter().map(|&v| (v, w)))
    }

    /// Explicitly weighted samples; weights must be non-negative and
    /// sum to 1 within 1e-10.
    pub fn from_weighted(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::arg("empirical distribution needs at least one sample"));
        }
        if let Some(&(v, w)) = pairs.iter().find(|&&(_, w)| w < 0.0) {
            return Err(Error::arg(format!("negative weight {w} at value {v}")));
        }
        let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::arg(format!("weights sum to {total}, expected 1")));
        }
        Self::build(pairs.iter().copied())
    }

    fn build(pairs: impl Iterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = pairs.collect();
        if atoms.iter().any(|&(v, _)| !v.is_finite()) {
            return Err(Error::arg("sample values must be finite"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        if merged.is_empty() {
            return Err(Error::arg("all weights are zero"));
        }
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        for a in &mut merged {
            a.1 /= total;
        }
        Ok(Self { atoms: merged })
    }

    /// Sorted (value, weight) atoms, ties merged, weights summing to 1.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Right-continuous CDF: total weight at values <= x.
    pub fn cdf(&self, x: f64) -> f64 {
        let cut = self.atoms.partition_point(|&(v, _)| v <= x);
        self.atoms[..cut].iter().map(|&(_, w)| w).sum()
    }

    /// Smallest and largest atom.
    pub fn support(&self) -> (f64, f64) {
        (self.atoms[0].0, self.atoms[self.atoms.len() - 1].0)
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| v * w).sum()
    }

    /// CSV dump with a `value,weight` header.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("value,weight\n");
        for &(v, w) in &self.atoms {
            out.push_str(&format!("{v:.17e},{w:.17e}\n"));
        }
        out
    }
}

/// Pushes every post-measurement state of an ensemble through an
/// observable, carrying the ensemble's statistical weights.
pub fn observable_distribution(
    pe: &ProjectedEnsemble,
    obs: &Observable,
) -> Result<EmpiricalDistribution> {
    let weights = pe.weights();
    let pairs: Result<Vec<(f64, f64)>> = pe
        .records
        .iter()
        .zip(weights)
        .map(|(r, w)| Ok((obs.evaluate(&r.post_state)?, w)))
        .collect();
    EmpiricalDistribution::from_weighted(&pairs?)
}

/// Exact Wasserstein-1 distance between two step CDFs: the unsigned
/// area between them, integrated over the merged support.
pub fn wasserstein1_empirical(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
) -> f64 {
    let pa = p.atoms();
    let qa = q.atoms();
    let (mut i, mut j) = (0usize, 0usize);
    let (mut fp, mut fq) = (0.0f64, 0.0f64);
    let mut last: Option<f64> = None;
    let mut area = 0.0;
    while i < pa.len() || j < qa.len() {
        let x = match (pa.get(i), qa.get(j)) {
            (Some(&(vp, _)), Some(&(vq, _))) => vp.min(vq),
            (Some(&(vp, _)), None) => vp,
            (None, Some(&(vq, _))) => vq,
            (None, None) => unreachable!(),
        };
        if let Some(prev) = last {
            area += (fp - fq).abs() * (x - prev);
        }
        while i < pa.len() && pa[i].0 == x {
            fp += pa[i].1;
            i += 1;
        }
        while j < qa.len() && qa[j].0 == x {
            fq += qa[j].1;
            j += 1;
        }
        last = Some(x);
    }
    area
}

/// Wasserstein-1 distance between a step CDF and an analytic CDF on
/// `[a, b]`: the analytic curve is integrated between consecutive
/// empirical jump points (where the step value is constant) with
/// adaptive quadrature at 1e-9 absolute tolerance per panel.
///
/// The CDF must satisfy `cdf(a) = 0` and `cdf(b) = 1` within 1e-8 and
/// be nondecreasing; it is extended by 0 below `a` and 1 above `b`
/// when atoms fall outside the stated support.
pub fn wasserstein1_vs_analytic(
    p: &EmpiricalDistribution,
    cdf: impl Fn(f64) -> f64,
    support: (f64, f64),
) -> Result<f64> {
    let (a, b) = support;
    if !(a < b) {
        return Err(Error::arg(format!("bad support [{a}, {b}]")));
    }
    let fa = cdf(a);
    let fb = cdf(b);
    if fa.abs() > 1e-8 || (fb - 1.0).abs() > 1e-8 {
        return Err(Error::arg(format!(
            "cdf does not span [0, 1] on the support: cdf({a}) = {fa}, cdf({b}) = {fb}"
        )));
    }
    let cdf_ext = |x: f64| {
        if x < a {
            0.0
        } else if x > b {
            1.0
        } else {
            cdf(x)
        }
    };
    let atoms = p.atoms();
    let (lo, hi) = p.support();
    let mut breaks = Vec::with_capacity(atoms.len() + 2);
    if a < lo {
        breaks.push(a);
    }
    breaks.extend(atoms.iter().map(|&(v, _)| v));
    if b > hi {
        breaks.push(b);
    }
    let mut prev_f = f64::NEG_INFINITY;
    for &x in &breaks {
        let f = cdf_ext(x);
        if f < prev_f - 1e-12 {
            return Err(Error::arg(format!(
                "analytic cdf is not monotone near x = {x} ({f} after {prev_f})"
            )));
        }
        prev_f = f;
    }
    let mut step = 0.0;
    let mut next_atom = 0usize;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        while next_atom < atoms.len() && atoms[next_atom].0 <= x0 {
            step += atoms[next_atom].1;
            next_atom += 1;
        }
        if x1 > x0 {
            let s = step;
            total += integrate(&mut |x| (s - cdf_ext(x)).abs(), x0, x1, 1e-9)?;
        }
    }
    // tail above the last atom, where the step CDF is 1
    let last = *breaks.last().unwrap();
    if b > last {
        total += integrate(&mut |x| (1.0 - cdf_ext(x)).abs(), last, b, 1e-9)?;
    }
    Ok(total)
}

/// k-th moment of a projected ensemble: the weighted average of a
/// product of covariance-matrix entries, one factor per copy.
pub fn pe_moment(pe: &ProjectedEnsemble, indices: &[(usize, usize)]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::arg("moment needs at least one index pair"));
    }
    let dim = 2 * pe.partition.0;
    for &(i, j) in indices {
        if i >= dim || j >= dim {
            return Err(Error::arg(format!(
                "index ({i}, {j}) out of range for dimension {dim}"
            )));
        }
    }
    let weights = pe.weights();
    let mut acc = 0.0;
    for (r, w) in pe.records.iter().zip(weights) {
        let m = r.post_state.matrix();
        let prod: f64 = indices.iter().map(|&(i, j)| m[(i, j)]).product();
        acc += w * prod;
    }
    Ok(acc)
}

/// Monte Carlo estimate of the matching uniform-ensemble moment with a
/// jackknife standard error. Returns `(estimate, std_error)`.
pub fn ghe_moment(
    spec: GheSpec,
    indices: &[(usize, usize)],
    budget: usize,
    rng: &mut impl rand::Rng,
) -> Result<(f64, f64)> {
    if budget < 1000 {
        return Err(Error::arg(format!(
            "Monte Carlo budget must be at least 1000, got {budget}"
        )));
    }
    if indices.is_empty() {
        return Err(Error::arg("moment needs at least one index pair"));
    }
    let dim = 2 * spec.modes;
    for &(i, j) in indices {
        if i >= dim || j >= dim {
            return Err(Error::arg(format!(
                "index ({i}, {j}) out of range for dimension {dim}"
            )));
        }
    }
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..budget {
        let g = ghe_sample(spec, rng)?;
        let m = g.matrix();
        let prod: f64 = indices.iter().map(|&(i, j)| m[(i, j)]).product();
        sum += prod;
        sumsq += prod * prod;
    }
    let n = budget as f64;
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    // jackknife of the sample mean collapses to the usual formula
    let se = (var / (n - 1.0)).sqrt();
    Ok((mean, se))
}

/// One Pfaffian-product design-distance term.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DesignDistance {
    /// Ensemble-side minus reference-side expectation.
    pub difference: f64,
    pub pe_value: f64,
    pub ghe_value: f64,
    pub ghe_std_error: f64,
}

/// Evaluates one term of the k-design distance: the expectation of a
/// product of Majorana-string observables (one even index set per
/// copy, each reduced to a Pfaffian by Wick's theorem) under the
/// projected ensemble, minus its Monte Carlo average under the uniform
/// ensemble.
pub fn design_distance_term(
    pe: &ProjectedEnsemble,
    spec: GheSpec,
    groups: &[Vec<usize>],
    budget: usize,
    rng: &mut impl rand::Rng,
) -> Result<DesignDistance> {
    if spec.modes != pe.partition.0 {
        return Err(Error::arg(format!(
            "reference ensemble on {} modes does not match partition L_A = {}",
            spec.modes, pe.partition.0
        )));
    }
    if budget < 1000 {
        return Err(Error::arg(format!(
            "Monte Carlo budget must be at least 1000, got {budget}"
        )));
    }
    for g in groups {
        if g.len() % 2 != 0 {
            return Err(Error::arg(format!(
                "index set of odd size {} has zero expectation by parity",
                g.len()
            )));
        }
    }
    let weights = pe.weights();
    let mut pe_value = 0.0;
    for (r, w) in pe.records.iter().zip(weights) {
        let mut prod = 1.0;
        for g in groups {
            prod *= npoint_correlator(r.post_state.matrix(), g)?;
        }
        pe_value += w * prod;
    }
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..budget {
        let sample = ghe_sample(spec, rng)?;
        let mut prod = 1.0;
        for g in groups {
            prod *= npoint_correlator(sample.matrix(), g)?;
        }
        sum += prod;
        sumsq += prod * prod;
    }
    let n = budget as f64;
    let ghe_value = sum / n;
    let var = (sumsq / n - ghe_value * ghe_value).max(0.0);
    let ghe_std_error = (var / (n - 1.0)).sqrt();
    Ok(DesignDistance {
        difference: pe_value - ghe_value,
        pe_value,
        ghe_value,
        ghe_std_error,
    })
}

/// One row of a concentration table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub epsilon: f64,
    /// Fraction of instances whose deviation exceeds epsilon.
    pub exceedance: f64,
    /// Exponential reference bound `exp(-L_B epsilon^2 / (64 k^2))`.
    pub bound: f64,
}

/// Empirical exceedance frequencies of per-instance moment deviations,
/// tabulated against the exponential concentration bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
    pub instances: usize,
    pub order: usize,
    pub measured_modes: usize,
}

/// Builds the table from per-instance deviations `|C_PE - C_GHE|` of a
/// k-th moment at a partition with `lb` measured modes. Needs at least
/// 20 instances.
pub fn concentration_probe(
    deviations: &[f64],
    eps_grid: &[f64],
    k: usize,
    lb: usize,
) -> Result<ConcentrationTable> {
    if deviations.len() < 20 {
        return Err(Error::arg(format!(
            "concentration probe needs at least 20 instances, got {}",
            deviations.len()
        )));
    }
    if k == 0 || lb == 0 {
        return Err(Error::arg("moment order and measured modes must be positive"));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| e <= 0.0) {
        return Err(Error::arg("epsilon grid must be nonempty and positive"));
    }
    let n = deviations.len() as f64;
    let mut eps_sorted = eps_grid.to_vec();
    eps_sorted.sort_by(f64::total_cmp);
    let rows = eps_sorted
        .into_iter()
        .map(|epsilon| {
            let count = deviations.iter().filter(|&&d| d.abs() > epsilon).count();
            let bound = (-(lb as f64) * epsilon * epsilon / (64.0 * (k * k) as f64)).exp();
            ConcentrationRow { epsilon, exceedance: count as f64 / n, bound }
        })
        .collect();
    Ok(ConcentrationTable {
        rows,
        instances: deviations.len(),
        order: k,
        measured_modes: lb,
    })
}

/// Serializable record of one Wasserstein-1 evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct W1Report {
    pub value: f64,
    /// "empirical" or "analytic-cdf".
    pub method: String,
    pub tolerance: f64,
    pub sample_counts: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl W1Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
