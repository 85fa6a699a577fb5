//! Optional `--config` JSON file and the pinned acceptance thresholds.
//!
//! Every command resolves a setting as flag, then config file, then default.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{CliError, Result};

pub const DEFAULT_TOL: f64 = conductance_spectrum::shooting::DEFAULT_TOL;
pub const DEFAULT_SWEEP_MODES: usize = 5;
pub const DEFAULT_SWEEP_SEEDS: u64 = 5;
pub const DEFAULT_ALPHA: f64 = PI * PI;

/// Settings shared by the verbs; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tol: Option<f64>,
    pub modes: Option<usize>,
    pub dist: Option<DistSpec>,
    pub n_list: Option<Vec<usize>>,
    pub seeds: Option<u64>,
    pub jobs: Option<usize>,
    pub alpha: Option<f64>,
    pub plateau_tol: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            message: format!("invalid config: {e}"),
        })
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

pub(crate) fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{field} must be finite and > 0, got {v}")))
    }
}

/// Thresholds of the acceptance suite. Defaults were fixed by a pilot run;
/// a JSON file may override any subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceThresholds {
    pub homog_sizes: Vec<usize>,
    /// Bisection tolerance for the golden check. Top modes at N = 512 sit
    /// ~4e-5 apart, so the default 1e-12 tilts them by ~1e-8.
    pub homog_tol: f64,
    pub homog_eigenvalue_rel: f64,
    pub homog_vector_sup: f64,
    pub homog_runtime_secs: f64,

    pub oracle_envs: usize,
    pub oracle_max_n: usize,
    pub oracle_rel: f64,
    pub oracle_runtime_secs: f64,
    pub oracle_seed: u64,

    pub gap_dist: DistSpec,
    pub gap_seeds: u64,
    pub gap_n_list: Vec<usize>,
    pub gap_band: (f64, f64),
    pub gap_runtime_secs: f64,

    pub shape_sup: f64,
    pub deriv_sup: f64,

    pub higher_modes: usize,
    pub higher_ratio_tol: f64,
    pub higher_shape_sup: f64,

    pub trajectory_n: usize,
    pub trajectory_alpha: f64,
    pub trajectory_segment_sup: [f64; 3],

    pub theta_cases: usize,
    pub theta_step_slack: f64,
    pub theta_seed: u64,

    pub heavy_dist: DistSpec,
    pub heavy_n_list: Vec<usize>,
    pub heavy_seeds: u64,
    pub heavy_slope_max: f64,
    pub heavy_slope_band: (f64, f64),
}

impl Default for AcceptanceThresholds {
    fn default() -> Self {
        let ladder = |lo: u32, hi: u32| (lo..=hi).map(|k| 1usize << k).collect::<Vec<_>>();
        let mut homog_sizes: Vec<usize> = (2..=64).collect();
        homog_sizes.extend([128, 512]);
        AcceptanceThresholds {
            homog_sizes,
            homog_tol: 1e-15,
            homog_eigenvalue_rel: 1e-10,
            homog_vector_sup: 1e-8,
            homog_runtime_secs: 10.0,

            oracle_envs: 200,
            oracle_max_n: 64,
            oracle_rel: 1e-8,
            oracle_runtime_secs: 30.0,
            oracle_seed: 2024,

            gap_dist: DistSpec::Iid(conductance_spectrum::ResistanceLaw::Uniform { low: 0.5, high: 1.5 }),
            gap_seeds: 5,
            gap_n_list: ladder(7, 13),
            gap_band: (0.95, 1.05),
            gap_runtime_secs: 300.0,

            shape_sup: 0.05,
            deriv_sup: 0.15,

            higher_modes: 5,
            higher_ratio_tol: 0.05,
            higher_shape_sup: 0.1,

            trajectory_n: 4096,
            trajectory_alpha: DEFAULT_ALPHA,
            trajectory_segment_sup: [0.05; 3],

            theta_cases: 1000,
            theta_step_slack: 1e-12,
            theta_seed: 7,

            heavy_dist: DistSpec::Iid(conductance_spectrum::ResistanceLaw::Pareto { alpha: 0.5 }),
            heavy_n_list: ladder(7, 12),
            heavy_seeds: 5,
            heavy_slope_max: -2.0,
            heavy_slope_band: (-3.6, -2.4),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_threshold_file_keeps_defaults() {
        let t: AcceptanceThresholds = serde_json::from_str(r#"{"shape_sup": 0.01}"#).unwrap();
        assert_eq!(t.shape_sup, 0.01);
        assert_eq!(t.deriv_sup, AcceptanceThresholds::default().deriv_sup);
        assert_eq!(t.gap_n_list.first(), Some(&128));
        assert_eq!(t.gap_n_list.last(), Some(&8192));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"tolerance": 1e-9}"#).is_err());
        let c: ConfigFile = serde_json::from_str(r#"{"dist": "uniform:0.5,1.5", "seeds": 3}"#).unwrap();
        assert_eq!(c.seeds, Some(3));
        assert!(matches!(c.dist, Some(DistSpec::Iid(_))));
    }

    #[test]
    fn thresholds_round_trip() {
        let t = AcceptanceThresholds::default();
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<AcceptanceThresholds>(&text).unwrap(), t);
    }
}
