//! Reproducible experiment drivers.
//!
//! Each driver consumes an [`ExperimentConfig`] and produces a
//! [`RunData`]: a CSV table, a summary map, and the derived stream ids
//! it consumed. [`complete_run`] executes a driver and writes the
//! results to a timestamped directory together with a [`RunManifest`]
//! that reproduces the run bit for bit.

pub mod config;
pub mod design;
pub mod diffusion;
pub mod manifest;
pub mod page;
pub mod seeding;
pub mod w1;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use manifest::RunManifest;

use crate::error::{Error, Result};

/// In-memory result of one experiment run.
#[derive(Clone, Debug)]
pub struct RunData {
    pub experiment: String,
    /// Full CSV table, header row included.
    pub data_csv: String,
    /// Scalar diagnostics (fitted slopes, gaps, defects).
    pub summary: BTreeMap<String, f64>,
    /// Additional (file name, content) pairs written next to data.csv.
    pub extra_files: Vec<(String, String)>,
    /// RNG stream ids consumed, for the manifest.
    pub instance_streams: Vec<u64>,
}

/// Dispatches on `config.experiment` and runs the matching driver.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunData> {
    match config.experiment.as_str() {
        "w1-global" => w1::exp_w1_global(config),
        "w1-local" => w1::exp_w1_local(config),
        "w1-entropy" => w1::exp_w1_entropy(config),
        "ghe-cdf" => w1::exp_ghe_cdf(config),
        "page-curve" => page::exp_page_curve(config),
        "diffusion" => diffusion::exp_diffusion(config),
        "design-distance" => design::exp_design_distance(config),
        "concentration" => design::exp_concentration(config),
        other => Err(Error::config(format!(
            "unknown experiment {other:?}; expected one of w1-global, w1-local, w1-entropy, \
             ghe-cdf, page-curve, diffusion, design-distance, concentration"
        ))),
    }
}

/// A run written to disk.
#[derive(Clone, Debug)]
pub struct CompletedRun {
    pub dir: PathBuf,
    pub data: RunData,
    pub manifest: RunManifest,
}

/// Runs the experiment and writes `data.csv`, `manifest.json`, and any
/// extra files into `<out_dir>/<experiment>_<timestamp>/`.
pub fn complete_run(config: &ExperimentConfig) -> Result<CompletedRun> {
    let started = chrono::Utc::now();
    let data = run_experiment(config)?;
    let wall = chrono::Utc::now()
        .signed_duration_since(started)
        .num_milliseconds() as f64
        / 1e3;
    let manifest = RunManifest::new(config.clone(), &data, wall, started);
    let dir = create_run_dir(&config.out_dir(), &data.experiment, started)?;
    fs::write(dir.join("data.csv"), &data.data_csv)?;
    fs::write(dir.join("manifest.json"), manifest.to_json()?)?;
    for (name, content) in &data.extra_files {
        fs::write(dir.join(name), content)?;
    }
    Ok(CompletedRun { dir, data, manifest })
}

fn create_run_dir(
    root: &str,
    experiment: &str,
    started: chrono::DateTime<chrono::Utc>,
) -> Result<PathBuf> {
    let stamp = started.format("%Y%m%dT%H%M%SZ");
    let base = PathBuf::from(root);
    fs::create_dir_all(&base)?;
    for k in 0..1000u32 {
        let name = if k == 0 {
            format!("{experiment}_{stamp}")
        } else {
            format!("{experiment}_{stamp}_{k}")
        };
        let dir = base.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::config(format!(
        "could not allocate a run directory under {root} (1000 name collisions)"
    )))
}

/// 12-significant-digit scientific notation used in every CSV cell.
pub(crate) fn fmt_e(v: f64) -> String {
    format!("{v:.11e}")
}

/// Builds the pre-measurement state for one instance: a single Haar
/// rotation of the vacuum when `t_final` is absent, otherwise a
/// brickwork evolution of `t_final` steps. Fails if the state has
/// drifted off the pure manifold.
pub(crate) fn prepared_state(
    l: usize,
    t_final: Option<usize>,
    master: u64,
    instance: usize,
) -> Result<crate::state::CovarianceMatrix> {
    use crate::state::{BrickworkRun, CovarianceMatrix};
    let mut crng = seeding::derived_rng(master, seeding::purpose::CIRCUIT, instance, 0)?;
    let state = match t_final {
        None => {
            let o = crate::numerics::haar_so(2 * l, &mut crng)?;
            CovarianceMatrix::vacuum(l)?.apply_rotation(&o)?
        }
        Some(t) => {
            let mut bw = BrickworkRun::new(l)?;
            bw.run(t, &mut crng)?;
            bw.state().clone()
        }
    };
    if !state.is_pure() {
        return Err(Error::numerical(format!(
            "pre-measurement state lost purity (defect {:.3e})",
            state.purity_defect()
        )));
    }
    Ok(state)
}

/// Sample mean and standard error of the mean (ddof = 1); a single
/// value has standard error 0.
pub(crate) fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    debug_assert!(n > 0);
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Ordinary least squares on (ln x, ln y): returns the slope and its
/// standard error. Needs at least two points and strictly positive
/// data; with exactly two points the fit is exact and the error is 0.
pub fn ols_log_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "slope fit needs matching lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::arg("slope fit needs at least two points"));
    }
    if x.iter().chain(y.iter()).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::numerical(
            "slope fit needs strictly positive finite data on both axes",
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::arg("slope fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if n == 2 {
        return Ok((slope, 0.0));
    }
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
        .sum();
    let se = (ss_res / (n - 2) as f64 / sxx).sqrt();
    Ok((slope, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_slope_recovers_power_law() {
        let x: [f64; 4] = [8.0, 16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let (slope, se) = ols_log_slope(&x, &y).unwrap();
        assert!((slope + 0.5).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn log_slope_rejects_nonpositive_data() {
        assert!(ols_log_slope(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(ols_log_slope(&[1.0, 2.0], &[1.0]).is_err());
        assert!(ols_log_slope(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn csv_cells_carry_twelve_significant_digits() {
        assert_eq!(fmt_e(0.25), "2.50000000000e-1");
        assert_eq!(fmt_e(12345.0), "1.23450000000e4");
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let config = ExperimentConfig::new("mystery");
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn mean_se_matches_hand_computation() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let (m1, se1) = mean_se(&[7.0]);
        assert_eq!((m1, se1), (7.0, 0.0));
    }
}
