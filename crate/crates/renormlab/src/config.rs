//! Run configuration: JSON file plus command-line overrides.

use crate::maps::Family;
use crate::{Error, MapSpec, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Output format for report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A map entry in the config file. `lambda` may be omitted, in which case
/// commands that need a fixed map resolve it to the accumulation parameter
/// of the doubling cascade for the given family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub family: Family,
    pub t: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub a: f64,
}

impl MapConfig {
    /// Concrete map; errors if `lambda` is absent.
    pub fn to_spec(&self) -> Result<MapSpec> {
        let lambda = self.lambda.ok_or_else(|| {
            Error::InvalidParameter("map.lambda is required for this command".into())
        })?;
        MapSpec::new(self.family, self.t, lambda, self.a)
    }

    /// Concrete map, computing the cascade accumulation parameter when
    /// `lambda` is absent.
    pub fn resolve(&self, cascade_depth: usize) -> Result<MapSpec> {
        match self.lambda {
            Some(lambda) => MapSpec::new(self.family, self.t, lambda, self.a),
            None => {
                let params =
                    crate::cascade::feigenbaum_parameter(self.family, self.t, self.a, cascade_depth)?;
                MapSpec::new(self.family, self.t, params.lambda_inf, self.a)
            }
        }
    }
}

/// Parsed configuration file with all optional knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Primary map (the target side `f` for conjugacy runs).
    pub map: MapConfig,
    /// Source side `g` for conjugacy runs; defaults to `map`.
    #[serde(default)]
    pub second_map: Option<MapConfig>,
    /// Cascade depth / scaffold depth, per command.
    #[serde(default)]
    pub depth: Option<usize>,
    /// Partition truncation level.
    #[serde(default)]
    pub n_max: Option<usize>,
    /// Maximum word length for distortion tables.
    #[serde(default)]
    pub word_len: Option<usize>,
    /// Level cap for word enumeration.
    #[serde(default)]
    pub level_cap: Option<usize>,
    /// Distortion sample points per word.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Dyadic scales `s` (meaning `d = 2^-s`) for quasisymmetry rows.
    #[serde(default)]
    pub scales: Option<Vec<u32>>,
    /// Itinerary truncation depth for conjugacy evaluation.
    #[serde(default)]
    pub itinerary_depth: Option<usize>,
    /// Grid size for quasisymmetry rows.
    #[serde(default)]
    pub qs_grid: Option<usize>,
    /// `K` values for the comparison-map root table.
    #[serde(default)]
    pub k_values: Option<Vec<f64>>,
    /// Seed for sampled checks.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))
    }

    /// Apply command-line overrides on top of the file values.
    pub fn with_overrides(
        mut self,
        depth: Option<usize>,
        format: Option<Format>,
        out: Option<PathBuf>,
    ) -> RunConfig {
        if depth.is_some() {
            self.depth = depth;
        }
        if format.is_some() {
            self.format = format;
        }
        if out.is_some() {
            self.out = out;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"map": {"family": "affine", "t": 2.0}}"#).unwrap();
        assert_eq!(cfg.map.t, 2.0);
        assert!(cfg.map.lambda.is_none());
        assert!(cfg.second_map.is_none());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let r: std::result::Result<RunConfig, _> =
            serde_json::from_str(r#"{"map": {"family": "affine", "t": 2.0}, "bogus": 1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"map": {"family": "affine", "t": 2.0}, "depth": 4}"#)
                .unwrap();
        let cfg = cfg.with_overrides(Some(7), Some(Format::Csv), None);
        assert_eq!(cfg.depth, Some(7));
        assert_eq!(cfg.format, Some(Format::Csv));
    }

    #[test]
    fn invalid_map_is_rejected_at_resolution() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"map": {"family": "affine", "t": 0.5, "lambda": 0.6}}"#,
        )
        .unwrap();
        assert!(cfg.map.to_spec().is_err());
    }
}
