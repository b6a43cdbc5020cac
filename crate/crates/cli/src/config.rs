//! Run configuration: command-line flags layered over an optional JSON file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::input::parse_list;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Sphere,
    Flat,
    Hyperbolic,
    Operator,
    #[value(name = "operator_product")]
    OperatorProduct,
    Monomial,
    Marginal,
    /// Curvature-corrected products (predict only).
    Kappa,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Pretty,
}

pub const DEFAULT_TRIALS: u64 = 10_000;

/// Every setting a command can use. All fields are optional; unknown fields
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub geometry: Option<Geometry>,
    pub n_dim: Option<usize>,
    pub angles: Option<Vec<f64>>,
    pub steps: Option<Vec<f64>>,
    pub arcs: Option<Vec<f64>>,
    pub spectrum: Option<Vec<f64>>,
    pub spectra: Option<Vec<Vec<f64>>>,
    pub spectra_file: Option<Vec<PathBuf>>,
    pub factors: Option<usize>,
    pub curvature_file: Option<PathBuf>,
    pub angle_unit: Option<AngleUnit>,
    pub observable: Option<String>,
    pub monomial: Option<String>,
    pub moment: Option<u32>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<OutputFormat>,
    pub output_path: Option<PathBuf>,
    pub expect_mean: Option<f64>,
    pub z_threshold: Option<f64>,
    pub std_tolerance: Option<f64>,
    pub sweep_n_dim: Option<Vec<usize>>,
    pub sweep_m: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("--config: {e}")))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: top.$f.or(self.$f)),* } };
        }
        pick!(
            experiment,
            geometry,
            n_dim,
            angles,
            steps,
            arcs,
            spectrum,
            spectra,
            spectra_file,
            factors,
            curvature_file,
            angle_unit,
            observable,
            monomial,
            moment,
            trials,
            seed,
            workers,
            output,
            output_path,
            expect_mean,
            z_threshold,
            std_tolerance,
            sweep_n_dim,
            sweep_m
        )
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any of the flag fields; flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Label written to the `experiment` column.
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long, value_enum)]
    pub geometry: Option<Geometry>,
    #[arg(long)]
    pub n_dim: Option<usize>,
    /// Sphere step angles: comma list or @file.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// Flat step lengths: comma list or @file.
    #[arg(long, allow_hyphen_values = true)]
    pub steps: Option<String>,
    /// Hyperbolic arc lengths: comma list or @file.
    #[arg(long, allow_hyphen_values = true)]
    pub arcs: Option<String>,
    /// Operator spectrum: comma list or @file.
    #[arg(long, allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    /// One-column spectrum file; repeat for a product of operators.
    #[arg(long, value_name = "PATH")]
    pub spectra_file: Vec<PathBuf>,
    /// Repeat the spectra to this many factors.
    #[arg(long)]
    pub factors: Option<usize>,
    /// Steps `d k1 k2 …`, one per line.
    #[arg(long, value_name = "PATH")]
    pub curvature_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub angle_unit: Option<AngleUnit>,
    /// sq_norm | norm (flat), norm_ratio | cosine (operator).
    #[arg(long)]
    pub observable: Option<String>,
    /// x1_sq | x1_4 | x1sq_x2sq.
    #[arg(long)]
    pub monomial: Option<String>,
    /// Power of x₁ for the marginal geometry.
    #[arg(long)]
    pub moment: Option<u32>,
    /// Monte Carlo trials [default: 10000].
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Caps worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    #[arg(long, value_name = "PATH")]
    pub output_path: Option<PathBuf>,
    /// Replaces the predicted mean (testing hook).
    #[arg(long, allow_hyphen_values = true)]
    pub expect_mean: Option<f64>,
    #[arg(long)]
    pub z_threshold: Option<f64>,
    #[arg(long)]
    pub std_tolerance: Option<f64>,
    /// Dimensions to sweep (table): comma list or @file.
    #[arg(long)]
    pub sweep_n_dim: Option<String>,
    /// Step counts to sweep (table): comma list or @file.
    #[arg(long)]
    pub sweep_m: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        fn list<T: std::str::FromStr>(
            field: &str,
            v: &Option<String>,
        ) -> Result<Option<Vec<T>>, CliError> {
            v.as_deref().map(|s| parse_list(field, s)).transpose()
        }
        Ok(RunConfig {
            experiment: self.experiment.clone(),
            geometry: self.geometry,
            n_dim: self.n_dim,
            angles: list("--angles", &self.angles)?,
            steps: list("--steps", &self.steps)?,
            arcs: list("--arcs", &self.arcs)?,
            spectrum: list("--spectrum", &self.spectrum)?,
            spectra: None,
            spectra_file: (!self.spectra_file.is_empty()).then(|| self.spectra_file.clone()),
            factors: self.factors,
            curvature_file: self.curvature_file.clone(),
            angle_unit: self.angle_unit,
            observable: self.observable.clone(),
            monomial: self.monomial.clone(),
            moment: self.moment,
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            output: self.output,
            output_path: self.output_path.clone(),
            expect_mean: self.expect_mean,
            z_threshold: self.z_threshold,
            std_tolerance: self.std_tolerance,
            sweep_n_dim: list("--sweep-n-dim", &self.sweep_n_dim)?,
            sweep_m: list("--sweep-m", &self.sweep_m)?,
        })
    }

    /// The config file, if any, with the flags laid over it.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("--config: cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        Ok(base.overlay(self.to_config()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file =
            RunConfig::from_json(r#"{"geometry":"sphere","n_dim":50,"angles":[1.0]}"#).unwrap();
        let flags = RunConfig {
            n_dim: Some(80),
            ..RunConfig::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.n_dim, Some(80));
        assert_eq!(merged.geometry, Some(Geometry::Sphere));
        assert_eq!(merged.angles, Some(vec![1.0]));
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = RunConfig::from_json(r#"{"n_dims":3}"#).unwrap_err();
        assert!(err.message.contains("n_dims"));
        assert!(RunConfig::from_json(r#"{"geometry":"operator_product"}"#).is_ok());
    }
}
