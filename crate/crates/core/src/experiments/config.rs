//! Experiment configuration: a flat key set loadable from TOML, with
//! every key mirrored by a CLI flag (flags win over file values).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat experiment configuration. Optional fields take per-experiment
/// defaults when resolved by a driver.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment kind: one of the CLI subcommand names. May be left
    /// empty in a config file when the caller supplies it (the CLI
    /// fills the subcommand in).
    #[serde(default)]
    pub experiment: String,
    /// Total modes (diffusion only; elsewhere L = LA + LB).
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Unmeasured subsystem size.
    #[serde(rename = "LA", skip_serializing_if = "Option::is_none")]
    pub la: Option<usize>,
    /// Measured-block sweep.
    #[serde(rename = "LB_list", skip_serializing_if = "Option::is_none")]
    pub lb_list: Option<Vec<usize>>,
    /// Circuit-depth checkpoints.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<usize>>,
    /// Shots per empirical CDF.
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Circuit instances.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Renyi order (entropy observables).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Observable identifier, e.g. "corr:1,2" or "vn:1..1"; for
    /// design-distance, pipe-separated index groups like "1,2|1,2".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    /// Monte Carlo budget for empirical reference ensembles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghe_budget: Option<usize>,
    /// Master seed; every output is a pure function of (config, seed).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Grid points for CDF dumps (ghe-cdf only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("bad config file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }

    /// Overlays non-empty fields of `flags` onto `self` (flags win).
    pub fn merged_with(&self, flags: &ExperimentConfig) -> Self {
        ExperimentConfig {
            experiment: if flags.experiment.is_empty() {
                self.experiment.clone()
            } else {
                flags.experiment.clone()
            },
            l: flags.l.or(self.l),
            la: flags.la.or(self.la),
            lb_list: flags.lb_list.clone().or_else(|| self.lb_list.clone()),
            t_list: flags.t_list.clone().or_else(|| self.t_list.clone()),
            r: flags.r.or(self.r),
            n: flags.n.or(self.n),
            alpha: flags.alpha.or(self.alpha),
            observable: flags.observable.clone().or_else(|| self.observable.clone()),
            ghe_budget: flags.ghe_budget.or(self.ghe_budget),
            seed: flags.seed.or(self.seed),
            out_dir: flags.out_dir.clone().or_else(|| self.out_dir.clone()),
            grid: flags.grid.or(self.grid),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> &str {
        self.out_dir.as_deref().unwrap_or("runs")
    }

    pub(crate) fn require_la(&self) -> Result<usize> {
        match self.la {
            Some(la) if la >= 1 => Ok(la),
            Some(la) => Err(Error::config(format!("LA must be at least 1, got {la}"))),
            None => Err(Error::config("LA is required for this experiment")),
        }
    }

    pub(crate) fn require_lb_list(&self) -> Result<Vec<usize>> {
        let list = self
            .lb_list
            .clone()
            .ok_or_else(|| Error::config("LB_list is required for this experiment"))?;
        if list.is_empty() || list.iter().any(|&lb| lb == 0) {
            return Err(Error::config("LB_list entries must be positive"));
        }
        Ok(list)
    }

    pub(crate) fn require_t_list(&self) -> Result<Vec<usize>> {
        let mut list = self
            .t_list
            .clone()
            .ok_or_else(|| Error::config("t_list is required for this experiment"))?;
        if list.is_empty() {
            return Err(Error::config("t_list must be nonempty"));
        }
        list.sort_unstable();
        list.dedup();
        Ok(list)
    }

    /// Total chain length for single-partition experiments: `L`
    /// directly, or `LA` plus the lone `LB_list` entry; giving both
    /// inconsistently is an error.
    pub(crate) fn resolve_total_modes(&self, la: usize) -> Result<usize> {
        if let Some(l) = self.l {
            if l <= la {
                return Err(Error::config(format!("L must exceed LA, got L={l}, LA={la}")));
            }
            if let Some(list) = &self.lb_list {
                if list.len() != 1 || la + list[0] != l {
                    return Err(Error::config(
                        "give either L or a single-entry LB_list with L = LA + LB, not both",
                    ));
                }
            }
            return Ok(l);
        }
        let list = self.require_lb_list()?;
        if list.len() != 1 {
            return Err(Error::config(
                "this experiment takes a single LB (or L directly)",
            ));
        }
        Ok(la + list[0])
    }

    pub(crate) fn shots(&self, default: usize) -> Result<usize> {
        let r = self.r.unwrap_or(default);
        if r == 0 {
            return Err(Error::config("R must be at least 1"));
        }
        Ok(r)
    }

    pub(crate) fn instances(&self, default: usize) -> Result<usize> {
        let n = self.n.unwrap_or(default);
        if n == 0 {
            return Err(Error::config("N must be at least 1"));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_key_names() {
        let text = r#"
experiment = "w1-global"
LA = 2
LB_list = [8, 16]
R = 1000
N = 20
seed = 7
out_dir = "runs"
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.experiment, "w1-global");
        assert_eq!(c.la, Some(2));
        assert_eq!(c.lb_list, Some(vec![8, 16]));
        assert_eq!(c.r, Some(1000));
        assert_eq!(c.n, Some(20));
        assert_eq!(c.seed, Some(7));
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn flags_override_file_values() {
        let file = ExperimentConfig {
            experiment: "w1-global".into(),
            la: Some(2),
            r: Some(1000),
            seed: Some(1),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            experiment: String::new(),
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.merged_with(&flags);
        assert_eq!(merged.experiment, "w1-global");
        assert_eq!(merged.la, Some(2));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.r, Some(1000));
    }

    #[test]
    fn requirement_helpers_validate() {
        let mut c = ExperimentConfig::new("w1-global");
        assert!(c.require_la().is_err());
        c.la = Some(0);
        assert!(c.require_la().is_err());
        c.la = Some(2);
        assert_eq!(c.require_la().unwrap(), 2);
        assert!(c.require_lb_list().is_err());
        c.lb_list = Some(vec![8, 0]);
        assert!(c.require_lb_list().is_err());
        c.lb_list = Some(vec![16, 8, 8]);
        assert_eq!(c.require_lb_list().unwrap(), vec![16, 8, 8]);
        c.t_list = Some(vec![40, 10, 10, 20]);
        assert_eq!(c.require_t_list().unwrap(), vec![10, 20, 40]);
        assert_eq!(c.shots(1000).unwrap(), 1000);
        c.r = Some(0);
        assert!(c.shots(1000).is_err());
        assert_eq!(c.seed(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("experiment = \"x\"\nbogus = 3\n").is_err());
    }
}
