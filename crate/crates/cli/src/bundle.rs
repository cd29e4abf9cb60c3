//! Result bundles: JSON documents carrying fit outputs, uncertainties,
//! provenance and the plot-ready arrays the `emit-plot-data` command
//! serves without recomputation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub rng_algorithm: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "squidmw".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: crate::rng::RNG_ALGORITHM.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub config_digest: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultBundle {
    pub tool: ToolInfo,
    pub pipeline: String,
    pub provenance: Provenance,
    pub results: PipelineResults,
    /// Plot-ready CSV companions written next to the bundle.
    pub companions: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PipelineResults {
    Resonance(ResonanceResults),
    Flux(FluxResults),
    Thermal(ThermalResults),
    Kerr(KerrResults),
    Calibration(CalibrationResults),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceResults {
    pub traces: Vec<TraceFit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFit {
    pub source: String,
    pub f0_hz: f64,
    pub kappa_i_hz: f64,
    pub kappa_e_hz: f64,
    pub theta_rad: f64,
    pub residual_rms: f64,
    pub f0_sigma_hz: Option<f64>,
    pub background: BackgroundRecord,
    /// Corrected trace: (freq_hz, data_re, data_im, fit_re, fit_im).
    pub corrected: Vec<[f64; 5]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundRecord {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxResults {
    /// Per-trace extraction: coil current, flux, resonance, linewidths.
    pub points: Vec<FluxPointRecord>,
    pub fit: FluxFitRecord,
    /// Model curve (phi_ext, f0_hz) from the fitted parameters.
    pub fit_curve: Vec<[f64; 2]>,
    /// (phi_ext, responsivity in Hz per flux quantum).
    pub responsivity_curve: Vec<[f64; 2]>,
    /// Inferred constriction current-phase relation (phase_rad, current_a).
    pub cpr_curve: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxPointRecord {
    pub source: String,
    pub coil_current_a: f64,
    pub phi_ext: f64,
    pub branch: i32,
    pub f0_hz: f64,
    pub kappa_i_hz: f64,
    pub kappa_e_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxFitRecord {
    pub l_j0_h: f64,
    pub l_lin_h: f64,
    pub i_0_a: f64,
    pub beta_l: f64,
    pub period_a_per_phi0: f64,
    pub offset_a: f64,
    pub residual_rms_hz: f64,
    pub uncertainties: Option<Vec<f64>>,
    pub conditioning_warning: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalResults {
    pub series: Vec<ThermalSeriesRecord>,
    /// (t_k, beta_l, extrapolated_flag).
    pub beta_curve: Vec<BetaRecord>,
    /// Predicted sweetspot resonance (t_k, f0_hz).
    pub sweetspot_curve: Vec<[f64; 2]>,
    /// Zero-temperature extrapolations, flagged as model-based.
    pub beta_at_zero: Option<f64>,
    pub i_c_a: Option<f64>,
    pub t_cc_k: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSeriesRecord {
    /// "bare_resonance" | "total_linewidth" | "critical_current" | "linear_inductance"
    pub kind: String,
    /// (t_k, value) in file units: Hz for rates/frequencies, A and H as-is.
    pub data: Vec<[f64; 2]>,
    pub fit_curve: Vec<[f64; 2]>,
    pub params: Vec<NamedValue>,
    pub masked_points: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaRecord {
    pub t_k: f64,
    pub beta_l: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrResults {
    pub phi_ext: f64,
    pub observations: Vec<KerrObservation>,
    pub fit: KerrFitRecord,
    /// Theory curves over flux from the configured device parameters:
    /// (phi_ext, kerr_hz).
    pub theory_full: Vec<[f64; 2]>,
    pub theory_simplified: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrObservation {
    pub source: String,
    pub generator_power_dbm: f64,
    pub on_chip_power_w: f64,
    pub n_c: f64,
    pub n_c_plus: f64,
    pub n_c_minus: f64,
    pub shift_hz: f64,
    pub kappa_p_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrFitRecord {
    pub kerr_hz: f64,
    pub kappa_nl_hz: f64,
    pub kerr_plus_hz: f64,
    pub kerr_minus_hz: f64,
    pub kerr_sigma_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationResults {
    /// (freq_hz, attenuation_db_smoothed, attenuation_db_raw).
    pub profile: Vec<[f64; 3]>,
    pub median_db: f64,
    pub band_db: f64,
}

impl ResultBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Data(format!("bundle serialization: {e}")))?;
        crate::io::write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<ResultBundle> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read bundle {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Data(format!("{} at {}: {}", path.display(), e.path(), e.inner()))
        })
    }
}
