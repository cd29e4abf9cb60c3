//! Input-line attenuation estimation from the cryogenic amplifier noise
//! floor: repeated traces give a per-frequency signal-to-noise ratio, which
//! together with the amplifier noise temperature and the attenuator
//! temperature fixes the power arriving at the chip.

use num_complex::Complex64;

use crate::consts::{angular_to_hz, K_B};
use crate::error::{Error, Result};

/// Affine amplifier noise-temperature model T(omega) = t0 + slope_per_ghz * f_GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HemtModel {
    pub t0: f64,
    pub slope_per_ghz: f64,
}

impl Default for HemtModel {
    /// Datasheet model for the installed amplifier, valid 3.8-5.2 GHz.
    fn default() -> Self {
        HemtModel { t0: 7.46, slope_per_ghz: -3.0 / (7.0 * std::f64::consts::PI) }
    }
}

impl HemtModel {
    /// Noise temperature at angular frequency `omega` (K).
    pub fn noise_temperature(&self, omega: f64) -> f64 {
        self.t0 + self.slope_per_ghz * (angular_to_hz(omega) / 1e9)
    }
}

/// Validity window of the amplifier model (rad/s).
pub const HEMT_BAND: (f64, f64) = (
    2.0 * std::f64::consts::PI * 3.8e9,
    2.0 * std::f64::consts::PI * 5.2e9,
);

/// Inputs of the noise-based power calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCalibration {
    /// Temperature of the attenuator closest to the sample (K).
    pub t_s: f64,
    /// Measurement IF bandwidth (Hz).
    pub f_ifbw: f64,
    /// Fixed loss between the sample and the amplifier input (dB, positive).
    pub post_sample_loss_db: f64,
    pub hemt: HemtModel,
}

impl NoiseCalibration {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_s > 0.0) {
            return Err(Error::domain(format!("T_s must be > 0, got {}", self.t_s)));
        }
        if !(self.f_ifbw > 0.0) {
            return Err(Error::domain(format!("f_IFBW must be > 0, got {}", self.f_ifbw)));
        }
        Ok(())
    }
}

/// Thermal noise power referenced to the amplifier input (dBm),
/// P = 10 log10(k_B (T_HEMT + T_s)/1 mW) + 10 log10(f_IFBW/Hz).
///
/// The returned flag is false when `omega` lies outside the band where the
/// amplifier model is specified.
pub fn hemt_noise_floor(omega: f64, cal: &NoiseCalibration) -> Result<(f64, bool)> {
    cal.validate()?;
    let t = cal.hemt.noise_temperature(omega) + cal.t_s;
    if !(t > 0.0) {
        return Err(Error::domain(format!(
            "total noise temperature is non-positive at omega = {omega:.3e}"
        )));
    }
    let p_dbm = 10.0 * (K_B * t / 1e-3).log10() + 10.0 * cal.f_ifbw.log10();
    let in_band = omega >= HEMT_BAND.0 && omega <= HEMT_BAND.1;
    Ok((p_dbm, in_band))
}

/// Frequency-resolved attenuation estimate with a policy uncertainty band.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationProfile {
    /// Angular frequency grid (rad/s).
    pub omega: Vec<f64>,
    /// Median-smoothed attenuation (dB, negative for loss).
    pub attenuation_db: Vec<f64>,
    /// Raw per-frequency estimates before smoothing (dB).
    pub raw_db: Vec<f64>,
    /// Half-width of the uncertainty band (dB), at least the +-1 dB policy.
    pub band_db: f64,
}

impl AttenuationProfile {
    /// Attenuation at `omega` by nearest-grid-point lookup (dB).
    pub fn at(&self, omega: f64) -> f64 {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &w) in self.omega.iter().enumerate() {
            let d = (w - omega).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        self.attenuation_db[best]
    }

    /// Median attenuation over the profile (dB).
    pub fn median(&self) -> f64 {
        median(&mut self.attenuation_db.clone())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Estimate the input-line attenuation from repeated VNA traces.
///
/// `traces` holds one complex trace per repetition, all on `omega`.
/// `output_power_dbm` is the generator setting. Per frequency, the SNR is
/// the mean-to-standard-deviation ratio across repetitions; the received
/// power is the noise floor plus 20 log10(SNR); removing the post-sample
/// loss and the generator power gives the (negative) attenuation. Resonance
/// dips are suppressed by the median smoothing window.
pub fn attenuation_profile(
    omega: &[f64],
    traces: &[Vec<Complex64>],
    output_power_dbm: f64,
    cal: &NoiseCalibration,
    smooth_window: usize,
    policy_band_db: f64,
) -> Result<AttenuationProfile> {
    cal.validate()?;
    if traces.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 repeated traces, got {}",
            traces.len()
        )));
    }
    if traces.len() < 50 {
        // The published procedure uses 200; fewer than 50 makes the SNR
        // estimate itself the dominant error.
        return Err(Error::data_quality(format!(
            "only {} repetitions; at least 50 are needed for a stable SNR estimate",
            traces.len()
        )));
    }
    for (i, t) in traces.iter().enumerate() {
        if t.len() != omega.len() {
            return Err(Error::alignment(format!(
                "trace {i} has {} points, grid has {}",
                t.len(),
                omega.len()
            )));
        }
    }

    let n = traces.len() as f64;
    let mut raw_db = Vec::with_capacity(omega.len());
    for (j, &w) in omega.iter().enumerate() {
        let mean = traces.iter().map(|t| t[j]).sum::<Complex64>() / n;
        let var = traces
            .iter()
            .map(|t| (t[j] - mean).norm_sqr())
            .sum::<f64>()
            / (n - 1.0);
        if var == 0.0 {
            return Err(Error::data_quality(format!(
                "zero variance across repetitions at omega = {w:.6e}; SNR is undefined"
            )));
        }
        let snr = mean.norm() / var.sqrt();
        let (floor_dbm, _) = hemt_noise_floor(w, cal)?;
        let received_dbm = floor_dbm + 20.0 * snr.log10();
        let at_chip_dbm = received_dbm + cal.post_sample_loss_db;
        raw_db.push(at_chip_dbm - output_power_dbm);
    }

    let window = smooth_window.max(1) | 1; // force odd
    let half = window / 2;
    let mut smoothed = Vec::with_capacity(raw_db.len());
    for j in 0..raw_db.len() {
        let lo = j.saturating_sub(half);
        let hi = (j + half + 1).min(raw_db.len());
        smoothed.push(median(&mut raw_db[lo..hi].to_vec()));
    }

    Ok(AttenuationProfile {
        omega: omega.to_vec(),
        attenuation_db: smoothed,
        raw_db,
        band_db: policy_band_db.max(1.0),
    })
}
