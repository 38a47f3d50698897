//! Experiment configurations, one strict JSON schema per subcommand.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use eddylab_core::cell::{DEFAULT_N_CAP, DEFAULT_TOL};
use eddylab_core::exit_pde::{Domain, TestFunction};
use eddylab_core::transport::SimConfig;
use eddylab_core::{Eddy, FlowSpec, SpdTensor};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Which data files a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

fn one() -> f64 {
    1.0
}

fn default_n() -> usize {
    256
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_cap() -> usize {
    DEFAULT_N_CAP
}

fn default_steps() -> usize {
    10
}

fn default_per_period() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogenizeConfig {
    pub a: SpdTensor,
    pub eddy: Eddy,
    /// Amplitude multiplying the eddy.
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Escalate the grid up to `n_cap` instead of refusing.
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default = "default_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreConfig {
    pub flow: FlowSpec,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Replaces `γₖ` by `gᵏ` for each listed `g`, one run per value.
    #[serde(default)]
    pub gamma_sweep: Option<Vec<f64>>,
    /// `ζ` samples of `V` for the fixed point `V(ζ₀) = γ₁/γ₀`.
    #[serde(default)]
    pub fixed_point_zetas: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitPdeConfig {
    pub flow: FlowSpec,
    /// Molecular conductivity; `κI` when absent.
    #[serde(default)]
    pub a: Option<SpdTensor>,
    /// Largest included scale; all scales when absent.
    #[serde(default)]
    pub n_max: Option<usize>,
    pub domain: Domain,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub sandwich: bool,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub flow: FlowSpec,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub sim: SimConfig,
    /// Simulate independent-noise pairs instead of single tracers.
    #[serde(default)]
    pub pairs: bool,
    /// Pair outer radius as a multiple of `r`; `max(4r, R_{n(r)+1})` when absent.
    #[serde(default)]
    pub l_factor: Option<f64>,
    /// Event exponent; `0.9 ln γ_min / ln ρ_max` when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VCurveConfig {
    pub eddy: Eddy,
    pub zetas: Vec<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub n_cap: usize,
    /// Solve `V(ζ₀) = γ` on the curve.
    #[serde(default)]
    pub fixed_point_gamma: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub flow: FlowSpec,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoScaleConfig {
    pub a: SpdTensor,
    pub p: Eddy,
    pub k: Eddy,
    pub ratios: Vec<usize>,
    #[serde(default = "default_per_period")]
    pub per_period: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    pub p: Eddy,
    pub k: Eddy,
    pub r: usize,
    pub shift: [f64; 2],
    pub zetas: Vec<f64>,
    #[serde(default = "default_per_period")]
    pub per_period: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Output settings shared by every config.
pub trait Outputs {
    fn out(&self) -> Option<&Path>;
    fn format(&self) -> Option<Format>;
}

macro_rules! outputs {
    ($($t:ty),*) => {$(
        impl Outputs for $t {
            fn out(&self) -> Option<&Path> {
                self.out.as_deref()
            }
            fn format(&self) -> Option<Format> {
                self.format
            }
        }
    )*};
}

outputs!(
    HomogenizeConfig,
    CoreConfig,
    ExitPdeConfig,
    SimulateConfig,
    VCurveConfig,
    ValidateConfig,
    TwoScaleConfig,
    SensitivityConfig
);

/// Reads and parses a config file.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) {
        let cfg: T = serde_json::from_str(text).unwrap();
        let back: T = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    const FLOW: &str = r#"{"kappa": 0.3, "scales": [{"gamma": 1.0, "r": 1.0, "eddy": {"kind": "cellular", "n": 16}},
        {"gamma": 2.0, "r": 4.0, "eddy": {"kind": "grid", "n": 2, "data": [0.0, 0.1, 0.30000000000000004, -1e-300]}}]}"#;

    #[test]
    fn configs_round_trip() {
        round_trip::<HomogenizeConfig>(
            r#"{"a": {"a11": 1.0, "a12": 0.1, "a22": 0.7}, "eddy": {"kind": "implosive", "n": 64}, "format": "csv"}"#,
        );
        round_trip::<CoreConfig>(&format!(r#"{{"flow": {FLOW}, "gamma_sweep": [1.5, 2.5]}}"#));
        round_trip::<ExitPdeConfig>(&format!(
            r#"{{"flow": {FLOW}, "domain": {{"shape": "square", "side": 2.0}}, "test_functions": ["paraboloid", {{"grid": [0.5]}}]}}"#
        ));
        round_trip::<SimulateConfig>(&format!(
            r#"{{"flow": {FLOW}, "radii": [4.0], "sim": {{"seed": 18446744073709551615, "dt_factor": 0.1}}}}"#
        ));
        round_trip::<VCurveConfig>(r#"{"eddy": {"kind": "cellular", "n": 16}, "zetas": [0.1], "fixed_point_gamma": 2.0}"#);
        round_trip::<ValidateConfig>(&format!(r#"{{"flow": {FLOW}, "out": "x/y"}}"#));
        round_trip::<TwoScaleConfig>(
            r#"{"a": {"a11": 0.5, "a12": 0.0, "a22": 0.5}, "p": {"kind": "cellular", "n": 16}, "k": {"kind": "shear", "n": 16}, "ratios": [2]}"#,
        );
        round_trip::<SensitivityConfig>(
            r#"{"p": {"kind": "cellular", "n": 16}, "k": {"kind": "cellular", "n": 16}, "r": 2, "shift": [0.25, 0.0], "zetas": [0.5]}"#,
        );
    }

    #[test]
    fn nested_unknown_keys_are_rejected() {
        let text = format!(r#"{{"flow": {FLOW}, "radii": [4.0], "sim": {{"particles": 10}}}}"#);
        let err = serde_json::from_str::<SimulateConfig>(&text).unwrap_err().to_string();
        assert!(err.contains("particles"));
        let text = r#"{"flow": {"kappa": 1.0, "scales": []}, "domain": {"shape": "disk", "radius": 1.0, "r": 2}}"#;
        assert!(serde_json::from_str::<ExitPdeConfig>(text).is_err());
    }
}
