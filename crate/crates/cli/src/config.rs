//! Run configuration: schema-validated TOML, unknown keys rejected.

use serde::Deserialize;

use qplab_core::arithmetic::{cf_expand_decimal, cf_expand_quotients, ContinuedFraction};
use qplab_core::model::Potential;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Significant decimal digits kept when parsing decimal frequencies.
    pub precision: Option<usize>,
    pub frequency: FrequencySpec,
    pub potential: Option<PotentialSpec>,
    pub energy: Option<EnergySpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub quotients: Option<Vec<u64>>,
    pub decimal: Option<String>,
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Cosine coefficients `c_0, c_1, ...` of
    /// `v(theta) = c_0 + sum_k c_k 2 cos(2 pi k theta)`.
    pub cosine: Vec<f64>,
    pub eps0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    pub values: Option<Vec<f64>>,
    pub grid: Option<EnergyGrid>,
    pub harvest: Option<Harvest>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harvest {
    pub box_half_width: usize,
    pub window: [f64; 2],
    /// "mid-spectrum" (eigenvalue nearest 0) or "center-weight" (pair most
    /// concentrated at the origin).
    #[serde(default)]
    pub pick: HarvestPick,
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HarvestPick {
    #[default]
    MidSpectrum,
    CenterWeight,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Cocycle length for Lyapunov/acceleration tasks.
    pub n: Option<usize>,
    /// Scale for g-based tasks (deviation, constants).
    pub m: Option<usize>,
    /// Phase-grid size for Lyapunov averages.
    pub grid: Option<usize>,
    /// Scan grid for deviation sets (>= 2^14).
    pub base_grid: Option<usize>,
    /// Level offset delta (deviation) or working delta (zeros tasks).
    pub delta: Option<f64>,
    /// Working delta_1 for constants/partitions.
    pub delta1_working: Option<f64>,
    /// Imaginary phase for Lyapunov tasks.
    pub eps: Option<f64>,
    /// Acceleration fit window.
    pub eps_window: Option<[f64; 2]>,
    pub eps_points: Option<usize>,
    /// Convergent index (zeros task scale, cf diagnostics).
    pub scale: Option<usize>,
    /// Phase of the box operator, decimal string.
    pub theta: Option<String>,
    pub box_half_width: Option<usize>,
    pub energy_window: Option<[f64; 2]>,
    /// Fourier range for constants.
    pub k_max: Option<usize>,
    /// Site range [lo, hi] for decay audits.
    pub site_range: Option<[i64; 2]>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<(RunConfig, String), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("schema violation: {e}")))?;
        Ok((cfg, text))
    }

    /// Build the continued fraction per the frequency spec; `precision`
    /// truncates decimal inputs to that many fractional digits.
    pub fn frequency_cf(&self, precision: usize) -> Result<ContinuedFraction, ConfigError> {
        match (&self.frequency.quotients, &self.frequency.decimal) {
            (Some(q), None) => {
                cf_expand_quotients(q).map_err(|e| ConfigError(e.to_string()))
            }
            (None, Some(d)) => {
                let depth = self.frequency.depth.unwrap_or(20);
                let truncated = truncate_decimal(d, precision);
                cf_expand_decimal(&truncated, depth).map_err(|e| ConfigError(e.to_string()))
            }
            _ => Err(ConfigError(
                "frequency needs exactly one of `quotients` or `decimal`".into(),
            )),
        }
    }

    pub fn potential(&self) -> Result<Potential<f64>, ConfigError> {
        let spec = self
            .potential
            .as_ref()
            .ok_or_else(|| ConfigError("this task needs a [potential] section".into()))?;
        Potential::new(spec.cosine.clone(), spec.eps0.unwrap_or(0.05))
            .map_err(|e| ConfigError(e.to_string()))
    }
}

pub fn truncate_decimal(s: &str, digits: usize) -> String {
    match s.split_once('.') {
        Some((i, f)) if f.len() > digits => format!("{i}.{}", &f[..digits]),
        _ => s.to_string(),
    }
}
