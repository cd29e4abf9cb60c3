//! Run configuration: device parameters, pipeline knobs and calibration
//! constants. JSON with strict schema validation; unknown keys are rejected
//! with their location.

use serde::{Deserialize, Serialize};
use squidmw_core::calib::{HemtModel, NoiseCalibration};
use squidmw_core::circuit::CircuitParams;
use squidmw_core::consts::hz_to_angular;
use squidmw_core::fit::CorrectionPolicy;
use squidmw_core::flux::{JumpPolicy, SquidParams};
use squidmw_core::thermal::{ConstrictionThermal, FilmParams};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub name: String,
    /// Reference temperature of the tabulated junction values (K).
    #[serde(default = "default_t_ref")]
    pub t_ref_k: f64,
    pub film: FilmConfig,
    /// Total capacitance C + C_c (F).
    pub c_tot_f: f64,
    /// Coupling capacitance (F).
    pub c_c_f: f64,
    /// Feedline impedance (Ohm).
    #[serde(default = "default_z0")]
    pub z0_ohm: f64,
    pub squid: SquidConfig,
    pub thermal: ThermalConfig,
    pub linewidths: LinewidthConfig,
}

fn default_t_ref() -> f64 {
    2.5
}
fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmConfig {
    pub lambda0_m: f64,
    pub t_c_k: f64,
    pub d_nb_m: f64,
    pub l_g_h: f64,
    pub g: f64,
    pub l_loop_g_h: f64,
    pub g_loop: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidConfig {
    /// Sweetspot Josephson inductance at t_ref (H).
    pub l_j0_h: f64,
    /// Linear constriction inductance at t_ref (H).
    pub l_lin_h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    pub i_c_a: f64,
    pub t_cc_k: f64,
    pub l_off_h: f64,
    pub l_lin0_h: f64,
    /// Quasiparticle-loss prefactor (s^3/m^3).
    #[serde(default)]
    pub a_kappa: f64,
}

/// Linewidths as plain cyclic frequencies (Hz).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinewidthConfig {
    pub kappa_e_b_hz: f64,
    pub kappa_i_b_hz: f64,
    pub kappa_e_hz: f64,
    pub kappa_i_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Resonance-mask half width in total linewidths.
    pub mask_linewidths: f64,
    /// Minimum dip depth before a trace counts as resonance-free.
    pub min_dip_depth: f64,
    /// Guard band dropped around the pump tone (Hz, full width).
    pub pump_guard_band_hz: f64,
    /// Flux-sweep branch handover: "metastable" or "ground-state".
    pub branch_policy: String,
    /// Coil calibration used by the simulator (A per flux quantum, A).
    pub coil_period_a: f64,
    pub coil_offset_a: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mask_linewidths: 5.0,
            min_dip_depth: 0.05,
            pump_guard_band_hz: 0.8e6,
            branch_policy: "metastable".to_string(),
            coil_period_a: 1.0e-3,
            coil_offset_a: 0.1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Attenuator (sample) temperature (K).
    pub t_s_k: f64,
    /// VNA intermediate-frequency bandwidth (Hz).
    pub f_ifbw_hz: f64,
    /// Loss between sample and amplifier (dB).
    pub post_sample_loss_db: f64,
    /// Amplifier noise-temperature model T(f) = t0 + slope * f_GHz.
    pub hemt_t0_k: f64,
    pub hemt_slope_k_per_ghz: f64,
    /// Input-line attenuation applied to generator powers (dB, negative).
    pub attenuation_db: f64,
    /// Extra attenuation on the pump path (directional coupler plus cable).
    pub two_tone_extra_db: f64,
    /// On-chip power uncertainty policy (dB).
    pub power_uncertainty_db: f64,
    /// Median smoothing window of the attenuation profile (points).
    pub smooth_window_points: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            t_s_k: 2.5,
            f_ifbw_hz: 1.0,
            post_sample_loss_db: 1.0,
            hemt_t0_k: 7.46,
            hemt_slope_k_per_ghz: -3.0 / (7.0 * std::f64::consts::PI),
            attenuation_db: -39.0,
            two_tone_extra_db: 11.0,
            power_uncertainty_db: 1.0,
            smooth_window_points: 51,
        }
    }
}

impl RunConfig {
    /// Build a config from one of the library's device presets. Devices
    /// below the hysteresis threshold default to ground-state branch
    /// following, matching how their sweeps present.
    pub fn from_preset(preset: &squidmw_core::presets::DevicePreset) -> RunConfig {
        use squidmw_core::consts::angular_to_hz;
        let hysteretic = preset
            .squid_ref()
            .map(|s| s.beta_l() > 2.0 / std::f64::consts::PI)
            .unwrap_or(true);
        let pipeline = PipelineConfig {
            branch_policy: if hysteretic { "metastable" } else { "ground-state" }.to_string(),
            ..PipelineConfig::default()
        };
        RunConfig {
            device: DeviceConfig {
                name: preset.name.to_string(),
                t_ref_k: squidmw_core::presets::T_REF,
                film: FilmConfig {
                    lambda0_m: preset.film.lambda0,
                    t_c_k: preset.film.t_c,
                    d_nb_m: preset.film.d_nb,
                    l_g_h: preset.film.l_g,
                    g: preset.film.g,
                    l_loop_g_h: preset.film.l_loop_g,
                    g_loop: preset.film.g_loop,
                },
                c_tot_f: preset.c_tot,
                c_c_f: preset.c_c,
                z0_ohm: preset.z0,
                squid: SquidConfig { l_j0_h: preset.l_j0_ref, l_lin_h: preset.l_lin_ref },
                thermal: ThermalConfig {
                    i_c_a: preset.thermal.i_c,
                    t_cc_k: preset.thermal.t_cc,
                    l_off_h: preset.thermal.l_off,
                    l_lin0_h: preset.thermal.l_lin0,
                    a_kappa: 0.0,
                },
                linewidths: LinewidthConfig {
                    kappa_e_b_hz: angular_to_hz(preset.kappa_e_b),
                    kappa_i_b_hz: angular_to_hz(preset.kappa_i_b),
                    kappa_e_hz: angular_to_hz(preset.kappa_e),
                    kappa_i_hz: angular_to_hz(preset.kappa_i),
                },
            },
            pipeline,
            calibration: CalibrationConfig::default(),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
            .map_err(|e| CliError::Data(format!("config {}: {e}", path.display())))
    }

    /// Strict parse; unknown or malformed keys are reported with their path.
    pub fn parse(text: &str) -> std::result::Result<RunConfig, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig =
            serde_path_to_error::deserialize(de).map_err(|e| format!("at {}: {}", e.path(), e.inner()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let d = &self.device;
        for (name, v) in [
            ("device.c_tot_f", d.c_tot_f),
            ("device.c_c_f", d.c_c_f),
            ("device.squid.l_j0_h", d.squid.l_j0_h),
            ("device.film.lambda0_m", d.film.lambda0_m),
            ("device.film.t_c_k", d.film.t_c_k),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("at {name}: must be a positive finite number"));
            }
        }
        if d.t_ref_k >= d.film.t_c_k {
            return Err("at device.t_ref_k: reference temperature above the film T_c".to_string());
        }
        match self.pipeline.branch_policy.as_str() {
            "metastable" | "ground-state" => Ok(()),
            other => Err(format!(
                "at pipeline.branch_policy: unknown policy {other:?} (expected \"metastable\" or \"ground-state\")"
            )),
        }
    }

    pub fn film(&self) -> FilmParams {
        let f = &self.device.film;
        FilmParams {
            lambda0: f.lambda0_m,
            t_c: f.t_c_k,
            d_nb: f.d_nb_m,
            l_g: f.l_g_h,
            g: f.g,
            l_loop_g: f.l_loop_g_h,
            g_loop: f.g_loop,
        }
    }

    pub fn constriction_thermal(&self) -> ConstrictionThermal {
        let t = &self.device.thermal;
        ConstrictionThermal { i_c: t.i_c_a, t_cc: t.t_cc_k, l_off: t.l_off_h, l_lin0: t.l_lin0_h }
    }

    /// Circuit electricals at temperature `t` through the two-fluid chain.
    pub fn circuit_at(&self, t: f64) -> Result<CircuitParams> {
        let film = self.film();
        let profile = squidmw_core::thermal::penetration_profile(t, &film)?;
        Ok(CircuitParams {
            l: profile.l_total,
            c: self.device.c_tot_f - self.device.c_c_f,
            c_c: self.device.c_c_f,
            z0: self.device.z0_ohm,
            l_loop: squidmw_core::thermal::loop_inductance(t, &film)?,
            r: None,
        })
    }

    /// SQUID parameters at the reference temperature (tabulated values).
    pub fn squid_ref(&self) -> Result<SquidParams> {
        let circuit = self.circuit_at(self.device.t_ref_k)?;
        Ok(SquidParams::from_l_j0(
            self.device.squid.l_j0_h,
            self.device.squid.l_lin_h,
            circuit.l_loop,
        )?)
    }

    pub fn noise_calibration(&self) -> NoiseCalibration {
        let c = &self.calibration;
        NoiseCalibration {
            t_s: c.t_s_k,
            f_ifbw: c.f_ifbw_hz,
            post_sample_loss_db: c.post_sample_loss_db,
            hemt: HemtModel { t0: c.hemt_t0_k, slope_per_ghz: c.hemt_slope_k_per_ghz },
        }
    }

    pub fn correction_policy(&self) -> CorrectionPolicy {
        CorrectionPolicy {
            mask_linewidths: self.pipeline.mask_linewidths,
            min_dip_depth: self.pipeline.min_dip_depth,
        }
    }

    pub fn jump_policy(&self) -> JumpPolicy {
        match self.pipeline.branch_policy.as_str() {
            "ground-state" => JumpPolicy::GroundState,
            _ => JumpPolicy::Metastable,
        }
    }

    /// On-chip power (W) from a generator setting (dBm) on the pump path.
    pub fn pump_power_on_chip_w(&self, generator_dbm: f64) -> f64 {
        let db = generator_dbm + self.calibration.attenuation_db - self.calibration.two_tone_extra_db;
        1e-3 * 10f64.powf(db / 10.0)
    }

    /// Bare resonance at temperature t (rad/s).
    pub fn omega_b_at(&self, t: f64) -> Result<f64> {
        Ok(squidmw_core::thermal::resonance_at_temperature(
            t,
            &self.film(),
            self.device.c_tot_f,
        )?)
    }

    pub fn kappa_e(&self) -> f64 {
        hz_to_angular(self.device.linewidths.kappa_e_hz)
    }

    pub fn kappa_0(&self) -> f64 {
        hz_to_angular(self.device.linewidths.kappa_e_hz + self.device.linewidths.kappa_i_hz)
    }
}
