//! Operator-spreading probe: evolves the central Majorana correlation
//! through the brickwork in the Heisenberg picture and tracks the
//! resulting site-weight profile and its width.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::seeding::{derived_rng, purpose, stream_id};
use super::{fmt_e, mean_se, ols_log_slope, RunData};
use crate::error::{Error, Result};
use crate::state::{BrickworkRun, DenseState};

/// Initial correlation vector c_j of the central-bond probe in the
/// all-plus product state. Computed from the Fock-space oracle for
/// small chains; larger chains use the two-entry closed pattern the
/// oracle validates (see the tests).
pub fn initial_correlation_vector(l: usize) -> Result<Vec<Complex64>> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::arg(format!("diffusion probe needs even L >= 2, got {l}")));
    }
    if l <= 12 {
        let psi = DenseState::plus_state(l)?;
        return (0..2 * l).map(|j| psi.majorana_product_expectation(&[j, l - 1])).collect();
    }
    let mut c = vec![Complex64::ZERO; 2 * l];
    c[l - 1] = Complex64::ONE;
    c[l] = Complex64::new(0.0, 1.0);
    Ok(c)
}

/// Site weights p_x from the rotation matrix and the initial vector:
/// amplitude C_i = (1/sqrt 2) sum_j R_ij c_j, weight per site x is
/// |C_2x|^2 + |C_2x+1|^2.
pub fn site_weights(rotation: &DMatrix<f64>, c: &[Complex64]) -> Result<Vec<f64>> {
    let dim = rotation.nrows();
    if rotation.ncols() != dim || c.len() != dim || dim % 4 != 0 {
        return Err(Error::arg("rotation and correlation vector sizes disagree"));
    }
    let l = dim / 2;
    let mut p = Vec::with_capacity(l);
    for x in 0..l {
        let mut w = 0.0;
        for i in [2 * x, 2 * x + 1] {
            let mut amp = Complex64::ZERO;
            for j in 0..dim {
                amp += rotation[(i, j)] * c[j];
            }
            w += 0.5 * amp.norm_sqr();
        }
        p.push(w);
    }
    Ok(p)
}

/// Root-mean-square spread of the site weights about the central bond.
pub fn profile_width(p: &[f64]) -> f64 {
    let x0 = (p.len() as f64 - 1.0) / 2.0;
    p.iter()
        .enumerate()
        .map(|(x, &w)| (x as f64 - x0).powi(2) * w)
        .sum::<f64>()
        .sqrt()
}

/// Brickwork operator-spreading sweep. Table rows:
/// `series,t,x,value,std_error` where series `px` carries the site
/// profile (x is the 1-based site), `norm` its sum over sites, and
/// `sigma` the RMS width. Summary carries the log-log slope of mean
/// width versus t and the largest normalization defect seen.
pub fn exp_diffusion(config: &ExperimentConfig) -> Result<RunData> {
    let l = config
        .l
        .ok_or_else(|| Error::config("diffusion requires L"))?;
    if l % 2 != 0 {
        return Err(Error::config(format!("diffusion requires even L, got {l}")));
    }
    let t_list = config.require_t_list()?;
    let n = config.instances(20)?;
    let master = config.seed();
    let c = initial_correlation_vector(l)?;

    struct Checkpoint {
        p: Vec<f64>,
        norm: f64,
        sigma: f64,
    }
    let per_instance: Vec<Vec<Checkpoint>> = (0..n)
        .into_par_iter()
        .map(|inst| -> Result<Vec<Checkpoint>> {
            let mut crng = derived_rng(master, purpose::CIRCUIT, inst, 0)?;
            let mut bw = BrickworkRun::new(l)?.with_rotation_tracking();
            let mut out = Vec::with_capacity(t_list.len());
            for &t in &t_list {
                bw.run(t - bw.steps(), &mut crng)?;
                let r = bw.rotation().expect("tracking enabled");
                let p = site_weights(r, &c)?;
                let norm: f64 = p.iter().sum();
                let sigma = profile_width(&p);
                out.push(Checkpoint { p, norm, sigma });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("series,t,x,value,std_error\n");
    let mut max_defect = 0.0f64;
    let mut sigma_means = Vec::new();
    for (ti, &t) in t_list.iter().enumerate() {
        for x in 0..l {
            let vals: Vec<f64> = per_instance.iter().map(|cp| cp[ti].p[x]).collect();
            let (m, se) = mean_se(&vals);
            csv.push_str(&format!("px,{t},{},{},{}\n", x + 1, fmt_e(m), fmt_e(se)));
        }
        let norms: Vec<f64> = per_instance.iter().map(|cp| cp[ti].norm).collect();
        for &v in &norms {
            max_defect = max_defect.max((v - 1.0).abs());
        }
        let (nm, nse) = mean_se(&norms);
        csv.push_str(&format!("norm,{t},,{},{}\n", fmt_e(nm), fmt_e(nse)));
        let sigmas: Vec<f64> = per_instance.iter().map(|cp| cp[ti].sigma).collect();
        let (sm, sse) = mean_se(&sigmas);
        sigma_means.push(sm);
        csv.push_str(&format!("sigma,{t},,{},{}\n", fmt_e(sm), fmt_e(sse)));
    }

    let mut summary = BTreeMap::new();
    summary.insert("max_norm_defect".into(), max_defect);
    let fit: Vec<(f64, f64)> = t_list
        .iter()
        .zip(&sigma_means)
        .filter(|(&t, _)| t > 0)
        .map(|(&t, &s)| (t as f64, s))
        .collect();
    if fit.len() >= 2 {
        let x: Vec<f64> = fit.iter().map(|v| v.0).collect();
        let y: Vec<f64> = fit.iter().map(|v| v.1).collect();
        let (slope, se) = ols_log_slope(&x, &y)?;
        summary.insert("slope_sigma_vs_t".into(), slope);
        summary.insert("slope_std_error".into(), se);
    }
    Ok(RunData {
        experiment: "diffusion".into(),
        data_csv: csv,
        summary,
        extra_files: Vec::new(),
        instance_streams: (0..n).map(|i| stream_id(purpose::CIRCUIT, i, 0)).collect(),
    })
}
