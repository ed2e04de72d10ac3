//! Wasserstein-1 experiment drivers: global-rotation and brickwork
//! sweeps of the distance between projected-ensemble observable
//! distributions and the uniform-ensemble reference.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::seeding::{derived_rng, purpose, stream_id};
use super::{fmt_e, mean_se, ols_log_slope, RunData};
use crate::error::{Error, Result};
use crate::measurement::sample_outcome;
use crate::numerics::haar_so;
use crate::observables::{ghe_element_cdf, ghe_sample, GheSpec, Observable};
use crate::state::{BrickworkRun, CovarianceMatrix};
use crate::statistics::{
    wasserstein1_empirical, wasserstein1_vs_analytic, EmpiricalDistribution,
};

/// Reference law the projected ensemble is compared against: the
/// analytic element CDF when one exists, otherwise an empirical CDF
/// sampled once from the uniform ensemble.
pub enum GheReference {
    Analytic { n: usize },
    Empirical { dist: EmpiricalDistribution },
}

impl GheReference {
    /// Chooses analytic for correlator elements at L_A >= 2, empirical
    /// (budget uniform-ensemble draws, reference stream) otherwise.
    pub fn build(obs: &Observable, la: usize, budget: usize, master: u64) -> Result<Self> {
        if let (Observable::Correlator { .. }, true) = (obs, la >= 2) {
            return Ok(Self::Analytic { n: la - 1 });
        }
        let spec = GheSpec::new(la)?;
        let mut rng = derived_rng(master, purpose::REFERENCE, 0, 0)?;
        let vals: Vec<f64> = (0..budget)
            .map(|_| obs.evaluate(&ghe_sample(spec, &mut rng)?))
            .collect::<Result<_>>()?;
        Ok(Self::Empirical { dist: EmpiricalDistribution::from_samples(&vals)? })
    }

    pub fn w1(&self, d: &EmpiricalDistribution) -> Result<f64> {
        match self {
            // n >= 1 is guaranteed at construction, so the cdf call
            // cannot fail
            Self::Analytic { n } => {
                let n = *n;
                wasserstein1_vs_analytic(d, move |x| ghe_element_cdf(x, n).unwrap(), (-1.0, 1.0))
            }
            Self::Empirical { dist } => Ok(wasserstein1_empirical(d, dist)),
        }
    }
}

/// Draws `r` measurement shots from `state` with per-shot derived
/// streams and returns the observable values.
fn sampled_pe_values(
    state: &CovarianceMatrix,
    la: usize,
    r: usize,
    obs: &Observable,
    master: u64,
    instance: usize,
    shot_base: usize,
) -> Result<Vec<f64>> {
    if !state.is_pure() {
        return Err(Error::numerical(format!(
            "pre-measurement state lost purity (defect {:.3e})",
            state.purity_defect()
        )));
    }
    (0..r)
        .map(|s| {
            let mut rng = derived_rng(master, purpose::SAMPLING, instance, shot_base + s)?;
            let rec = sample_outcome(state, la, &mut rng)?;
            obs.evaluate(&rec.post_state)
        })
        .collect()
}

fn resolve_observable(config: &ExperimentConfig, default: &str) -> Result<Observable> {
    Observable::parse(config.observable.as_deref().unwrap_or(default))
}

/// Global-rotation W1 sweep over measured-block sizes. Table rows:
/// `lb,mean_w1,std_error`; summary carries the log-log slope of mean
/// W1 versus L_B when the sweep has at least two sizes.
pub fn exp_w1_global(config: &ExperimentConfig) -> Result<RunData> {
    let la = config.require_la()?;
    let lbs = config.require_lb_list()?;
    let r = config.shots(1000)?;
    let n = config.instances(20)?;
    let master = config.seed();
    let obs = resolve_observable(config, "corr:1,2")?;
    let budget = config.ghe_budget.unwrap_or(1_000_000);
    let reference = GheReference::build(&obs, la, budget, master)?;

    let mut csv = String::from("lb,mean_w1,std_error\n");
    let mut means = Vec::new();
    let mut instance_streams = Vec::new();
    for (bi, &lb) in lbs.iter().enumerate() {
        let l = la + lb;
        let per: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let inst = bi * n + i;
                let mut crng = derived_rng(master, purpose::CIRCUIT, inst, 0)?;
                let o = haar_so(2 * l, &mut crng)?;
                let state = CovarianceMatrix::vacuum(l)?.apply_rotation(&o)?;
                let vals = sampled_pe_values(&state, la, r, &obs, master, inst, 0)?;
                reference.w1(&EmpiricalDistribution::from_samples(&vals)?)
            })
            .collect::<Result<Vec<_>>>()?;
        instance_streams.extend((0..n).map(|i| stream_id(purpose::CIRCUIT, bi * n + i, 0)));
        let (mean, se) = mean_se(&per);
        means.push(mean);
        csv.push_str(&format!("{lb},{},{}\n", fmt_e(mean), fmt_e(se)));
    }

    let mut summary = BTreeMap::new();
    if lbs.len() >= 2 {
        let x: Vec<f64> = lbs.iter().map(|&v| v as f64).collect();
        let (slope, se) = ols_log_slope(&x, &means)?;
        summary.insert("slope_w1_vs_lb".into(), slope);
        summary.insert("slope_std_error".into(), se);
    }
    Ok(RunData {
        experiment: "w1-global".into(),
        data_csv: csv,
        summary,
        extra_files: Vec::new(),
        instance_streams,
    })
}

/// One row of the sampling-floor baseline.
#[derive(Clone, Copy, Debug)]
pub struct BaselineRow {
    pub shots: usize,
    pub mean_w1: f64,
    pub std_error: f64,
}

/// Reference-vs-reference baseline: W1 between `R` fresh uniform-
/// ensemble draws and the reference law itself, for each `R`, averaged
/// over `reps` repetitions. Returns the rows and the log-log slope of
/// mean W1 versus R with its standard error.
pub fn w1_sampling_baseline(
    la: usize,
    obs: &Observable,
    r_list: &[usize],
    reps: usize,
    budget: usize,
    master: u64,
) -> Result<(Vec<BaselineRow>, (f64, f64))> {
    if r_list.len() < 2 {
        return Err(Error::arg("baseline needs at least two shot counts"));
    }
    if reps == 0 {
        return Err(Error::arg("baseline needs at least one repetition"));
    }
    let reference = GheReference::build(obs, la, budget, master)?;
    let spec = GheSpec::new(la)?;
    let mut rows = Vec::new();
    for (ri, &r) in r_list.iter().enumerate() {
        let per: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let mut rng = derived_rng(master, purpose::BASELINE, ri * reps + rep, 0)?;
                let vals: Vec<f64> = (0..r)
                    .map(|_| obs.evaluate(&ghe_sample(spec, &mut rng)?))
                    .collect::<Result<_>>()?;
                reference.w1(&EmpiricalDistribution::from_samples(&vals)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let (mean, se) = mean_se(&per);
        rows.push(BaselineRow { shots: r, mean_w1: mean, std_error: se });
    }
    let x: Vec<f64> = rows.iter().map(|b| b.shots as f64).collect();
    let y: Vec<f64> = rows.iter().map(|b| b.mean_w1).collect();
    let slope = ols_log_slope(&x, &y)?;
    Ok((rows, slope))
}

struct SweepTables {
    /// Per (lb, t): instance W1 values.
    w1: Vec<Vec<(usize, Vec<f64>)>>,
    instance_streams: Vec<u64>,
}

/// Evolves brickwork instances through the checkpoint schedule and
/// collects per-instance W1 values for every (lb, t).
fn brickwork_w1_sweep(
    la: usize,
    lbs: &[usize],
    t_list: &[usize],
    r: usize,
    n: usize,
    obs: &Observable,
    reference: &GheReference,
    master: u64,
) -> Result<SweepTables> {
    let mut w1 = Vec::new();
    let mut instance_streams = Vec::new();
    for (bi, &lb) in lbs.iter().enumerate() {
        let l = la + lb;
        let per_instance: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<Vec<f64>> {
                let inst = bi * n + i;
                let mut crng = derived_rng(master, purpose::CIRCUIT, inst, 0)?;
                let mut bw = BrickworkRun::new(l)?;
                let mut shot_base = 0;
                let mut out = Vec::with_capacity(t_list.len());
                for &t in t_list {
                    bw.run(t - bw.steps(), &mut crng)?;
                    let vals =
                        sampled_pe_values(bw.state(), la, r, obs, master, inst, shot_base)?;
                    shot_base += r;
                    out.push(reference.w1(&EmpiricalDistribution::from_samples(&vals)?)?);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        instance_streams.extend((0..n).map(|i| stream_id(purpose::CIRCUIT, bi * n + i, 0)));
        let rows: Vec<(usize, Vec<f64>)> = t_list
            .iter()
            .enumerate()
            .map(|(ti, &t)| (t, per_instance.iter().map(|v| v[ti]).collect()))
            .collect();
        w1.push(rows);
    }
    Ok(SweepTables { w1, instance_streams })
}

/// Brickwork W1-versus-depth sweep. Table rows: `lb,t,mean_w1,
/// std_error`; summary carries a per-L_B log-log slope of mean W1
/// versus t.
pub fn exp_w1_local(config: &ExperimentConfig) -> Result<RunData> {
    let la = config.require_la()?;
    let lbs = config.require_lb_list()?;
    let t_list = config.require_t_list()?;
    let r = config.shots(1000)?;
    let n = config.instances(10)?;
    let master = config.seed();
    let obs = resolve_observable(config, "corr:1,2")?;
    let budget = config.ghe_budget.unwrap_or(1_000_000);
    let reference = GheReference::build(&obs, la, budget, master)?;

    let sweep = brickwork_w1_sweep(la, &lbs, &t_list, r, n, &obs, &reference, master)?;
    let mut csv = String::from("lb,t,mean_w1,std_error\n");
    let mut summary = BTreeMap::new();
    for (bi, &lb) in lbs.iter().enumerate() {
        let mut ts = Vec::new();
        let mut means = Vec::new();
        for (t, per) in &sweep.w1[bi] {
            let (mean, se) = mean_se(per);
            csv.push_str(&format!("{lb},{t},{},{}\n", fmt_e(mean), fmt_e(se)));
            if *t > 0 {
                ts.push(*t as f64);
                means.push(mean);
            }
        }
        if ts.len() >= 2 {
            let (slope, se) = ols_log_slope(&ts, &means)?;
            summary.insert(format!("slope_w1_vs_t_lb{lb}"), slope);
            summary.insert(format!("slope_std_error_lb{lb}"), se);
        }
    }
    Ok(RunData {
        experiment: "w1-local".into(),
        data_csv: csv,
        summary,
        extra_files: Vec::new(),
        instance_streams: sweep.instance_streams,
    })
}

/// Brickwork W1 sweep for entropy observables, with late-time plateau
/// extraction. Table rows: `series,lb,t,value,std_error` where series
/// is `w1_t` (per checkpoint), `plateau` (per L_B, mean over the last
/// decade of t), or `plateau_slope` (one row, log-log fit vs L_B).
pub fn exp_w1_entropy(config: &ExperimentConfig) -> Result<RunData> {
    let la = config.require_la()?;
    let lbs = config.require_lb_list()?;
    let t_list = config.require_t_list()?;
    let r = config.shots(1000)?;
    let n = config.instances(10)?;
    let master = config.seed();
    let obs = match (&config.observable, config.alpha) {
        (Some(text), _) => Observable::parse(text)?,
        (None, Some(alpha)) => Observable::Renyi { alpha, modes: 1 },
        (None, None) => Observable::VonNeumann { modes: 1 },
    };
    match obs {
        Observable::VonNeumann { .. } | Observable::Renyi { .. } => {}
        _ => {
            return Err(Error::config(
                "w1-entropy needs an entropy observable (vn:1..k or renyi:alpha:1..k)",
            ))
        }
    }
    let budget = config.ghe_budget.unwrap_or(1_000_000);
    if budget < 1_000_000 {
        return Err(Error::config(format!(
            "entropy reference has no closed form; ghe_budget must be at least 1000000, got {budget}"
        )));
    }
    let reference = GheReference::build(&obs, la, budget, master)?;

    let sweep = brickwork_w1_sweep(la, &lbs, &t_list, r, n, &obs, &reference, master)?;
    let t_max = *t_list.last().unwrap();
    let window_start = t_max / 10;
    let mut csv = String::from("series,lb,t,value,std_error\n");
    let mut summary = BTreeMap::new();
    let mut plateau_means = Vec::new();
    for (bi, &lb) in lbs.iter().enumerate() {
        let rows = &sweep.w1[bi];
        let mut ts = Vec::new();
        let mut means = Vec::new();
        for (t, per) in rows {
            let (mean, se) = mean_se(per);
            csv.push_str(&format!("w1_t,{lb},{t},{},{}\n", fmt_e(mean), fmt_e(se)));
            if *t > 0 {
                ts.push(*t as f64);
                means.push(mean);
            }
        }
        if ts.len() >= 2 {
            let (slope, se) = ols_log_slope(&ts, &means)?;
            summary.insert(format!("slope_w1_vs_t_lb{lb}"), slope);
            summary.insert(format!("slope_std_error_lb{lb}"), se);
        }
        // per-instance plateau: mean over checkpoints in the last decade
        let window: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, (t, _))| *t >= window_start.max(1))
            .map(|(i, _)| i)
            .collect();
        let idx = if window.is_empty() { vec![rows.len() - 1] } else { window };
        let plateau_per: Vec<f64> = (0..n)
            .map(|i| idx.iter().map(|&k| rows[k].1[i]).sum::<f64>() / idx.len() as f64)
            .collect();
        let (pm, pse) = mean_se(&plateau_per);
        plateau_means.push(pm);
        csv.push_str(&format!("plateau,{lb},,{},{}\n", fmt_e(pm), fmt_e(pse)));
        summary.insert(format!("plateau_lb{lb}"), pm);
    }
    if lbs.len() >= 2 {
        let x: Vec<f64> = lbs.iter().map(|&v| v as f64).collect();
        let (slope, se) = ols_log_slope(&x, &plateau_means)?;
        csv.push_str(&format!("plateau_slope,,,{},{}\n", fmt_e(slope), fmt_e(se)));
        summary.insert("slope_plateau_vs_lb".into(), slope);
        summary.insert("slope_plateau_std_error".into(), se);
    }
    Ok(RunData {
        experiment: "w1-entropy".into(),
        data_csv: csv,
        summary,
        extra_files: Vec::new(),
        instance_streams: sweep.instance_streams,
    })
}

/// Reference-CDF dump. For correlator elements at L_A >= 2 the
/// analytic CDF and density are tabulated on a uniform grid (rows
/// `theta,cdf,pdf`); for entropy or Pfaffian observables an empirical
/// CDF is dumped atom by atom (rows `value,cdf`).
pub fn exp_ghe_cdf(config: &ExperimentConfig) -> Result<RunData> {
    let la = config.require_la()?;
    let master = config.seed();
    let mut summary = BTreeMap::new();
    match &config.observable {
        None => {
            if la < 2 {
                return Err(Error::config(
                    "the single-mode element law is discrete on {-1, +1}; no CDF dump (need LA >= 2)",
                ));
            }
            let n = la - 1;
            let grid = config.grid.unwrap_or(201);
            if grid < 2 {
                return Err(Error::config("grid needs at least 2 points"));
            }
            let mut csv = String::from("theta,cdf,pdf\n");
            let mut prev = -1.0f64;
            for k in 0..grid {
                let x = -1.0 + 2.0 * k as f64 / (grid - 1) as f64;
                let c = ghe_element_cdf(x, n)?;
                if c < prev {
                    return Err(Error::numerical("cdf dump is not monotone"));
                }
                prev = c;
                let p = crate::observables::ghe_element_pdf(x, n)?;
                csv.push_str(&format!("{},{},{}\n", fmt_e(x), fmt_e(c), fmt_e(p)));
            }
            summary.insert("grid_points".into(), grid as f64);
            Ok(RunData {
                experiment: "ghe-cdf".into(),
                data_csv: csv,
                summary,
                extra_files: Vec::new(),
                instance_streams: vec![stream_id(purpose::REFERENCE, 0, 0)],
            })
        }
        Some(text) => {
            let obs = Observable::parse(text)?;
            let budget = config.ghe_budget.unwrap_or(100_000);
            let spec = GheSpec::new(la)?;
            let mut rng = derived_rng(master, purpose::REFERENCE, 0, 0)?;
            let vals: Vec<f64> = (0..budget)
                .map(|_| obs.evaluate(&ghe_sample(spec, &mut rng)?))
                .collect::<Result<_>>()?;
            let dist = EmpiricalDistribution::from_samples(&vals)?;
            let mut csv = String::from("value,cdf\n");
            let mut acc = 0.0;
            for &(v, w) in dist.atoms() {
                acc += w;
                csv.push_str(&format!("{},{}\n", fmt_e(v), fmt_e(acc)));
            }
            summary.insert("budget".into(), budget as f64);
            Ok(RunData {
                experiment: "ghe-cdf".into(),
                data_csv: csv,
                summary,
                extra_files: Vec::new(),
                instance_streams: vec![stream_id(purpose::REFERENCE, 0, 0)],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_driver_emits_one_row_per_block_size() {
        let mut config = ExperimentConfig::new("w1-global");
        config.la = Some(2);
        config.lb_list = Some(vec![4, 8]);
        config.r = Some(100);
        config.n = Some(3);
        config.seed = Some(1);
        let data = exp_w1_global(&config).unwrap();
        let rows: Vec<&str> = data.data_csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let w1: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
            assert!(w1 > 0.0 && w1 < 2.0);
        }
        assert!(data.summary.contains_key("slope_w1_vs_lb"));
        assert_eq!(data.instance_streams.len(), 6);
        // same config, same bytes
        let again = exp_w1_global(&config).unwrap();
        assert_eq!(again.data_csv, data.data_csv);
    }

    #[test]
    fn local_driver_sweeps_checkpoints() {
        let mut config = ExperimentConfig::new("w1-local");
        config.la = Some(2);
        config.lb_list = Some(vec![4]);
        config.t_list = Some(vec![1, 2, 4]);
        config.r = Some(50);
        config.n = Some(2);
        config.seed = Some(2);
        let data = exp_w1_local(&config).unwrap();
        assert_eq!(data.data_csv.lines().count(), 4);
        assert!(data.summary.contains_key("slope_w1_vs_t_lb4"));
    }

    #[test]
    fn entropy_driver_rejects_wrong_observable_and_small_budget() {
        let mut config = ExperimentConfig::new("w1-entropy");
        config.la = Some(2);
        config.lb_list = Some(vec![4]);
        config.t_list = Some(vec![1]);
        config.observable = Some("corr:1,2".into());
        assert!(exp_w1_entropy(&config).is_err());
        config.observable = Some("vn:1..1".into());
        config.ghe_budget = Some(1000);
        assert!(exp_w1_entropy(&config).is_err());
    }

    #[test]
    fn analytic_cdf_dump_is_monotone_from_zero_to_one() {
        let mut config = ExperimentConfig::new("ghe-cdf");
        config.la = Some(4);
        config.grid = Some(101);
        let data = exp_ghe_cdf(&config).unwrap();
        let cdf: Vec<f64> = data
            .data_csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(cdf.len(), 101);
        assert!(cdf[0].abs() < 1e-12);
        assert!((cdf[100] - 1.0).abs() < 1e-12);
        assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn empirical_cdf_dump_ends_at_one() {
        let mut config = ExperimentConfig::new("ghe-cdf");
        config.la = Some(2);
        config.observable = Some("vn:1..1".into());
        config.ghe_budget = Some(500);
        let data = exp_ghe_cdf(&config).unwrap();
        let last: f64 = data
            .data_csv
            .lines()
            .last()
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert!((last - 1.0).abs() < 1e-9);
    }

    #[test]
    fn baseline_shrinks_with_more_shots() {
        let obs = Observable::parse("corr:1,2").unwrap();
        let (rows, (slope, _)) =
            w1_sampling_baseline(2, &obs, &[50, 800], 6, 10_000, 5).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].mean_w1 < rows[0].mean_w1);
        assert!(slope < 0.0);
    }
}
