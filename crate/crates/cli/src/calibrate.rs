//! Attenuation calibration from a bundle of repeated traces.

use std::path::{Path, PathBuf};

use squidmw_core::calib::attenuation_profile;
use squidmw_core::consts::angular_to_hz;

use crate::bundle::*;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{read_trace, write_csv};

pub fn run(
    cfg: &RunConfig,
    config_digest: &str,
    inputs: &[PathBuf],
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<ResultBundle> {
    if inputs.is_empty() {
        return Err(CliError::Usage("no trace files given".to_string()));
    }
    std::fs::create_dir_all(out_dir)?;

    let mut omega: Option<Vec<f64>> = None;
    let mut traces = Vec::new();
    let mut power_dbm: Option<f64> = None;
    let mut inputs_prov = Vec::new();
    for path in inputs {
        let (trace, meta) = read_trace(path)?;
        if meta.f_ifbw_hz.is_none() {
            return Err(CliError::Data(format!(
                "{}: calibration needs f_ifbw_hz in the sidecar",
                path.display()
            )));
        }
        if let Some(f) = meta.f_ifbw_hz {
            if (f - cfg.calibration.f_ifbw_hz).abs() > 1e-9 * f.abs().max(1.0) {
                return Err(CliError::Data(format!(
                    "{}: sidecar f_ifbw_hz = {f} disagrees with the configured {}",
                    path.display(),
                    cfg.calibration.f_ifbw_hz
                )));
            }
        }
        match (&power_dbm, meta.vna_power_dbm) {
            (None, Some(p)) => power_dbm = Some(p),
            (Some(prev), Some(p)) if (prev - p).abs() > 1e-9 => {
                return Err(CliError::Data(format!(
                    "{}: generator power {p} dBm differs from earlier traces ({prev} dBm)",
                    path.display()
                )));
            }
            (_, None) => {
                return Err(CliError::Data(format!(
                    "{}: calibration needs vna_power_dbm in the sidecar",
                    path.display()
                )));
            }
            _ => {}
        }
        match &omega {
            None => omega = Some(trace.omega.clone()),
            Some(grid) => {
                if grid.len() != trace.omega.len()
                    || grid
                        .iter()
                        .zip(&trace.omega)
                        .any(|(a, b)| (a - b).abs() > 1e-3)
                {
                    return Err(CliError::Data(format!(
                        "{}: frequency grid differs from the first trace",
                        path.display()
                    )));
                }
            }
        }
        traces.push(trace.s21);
        inputs_prov.push(InputRecord {
            path: path.display().to_string(),
            digest: crate::digest::digest_file(path)
                .map_err(|e| CliError::Data(format!("cannot digest {}: {e}", path.display())))?,
        });
    }
    let omega = omega.expect("at least one input");
    let cal = cfg.noise_calibration();
    let profile = attenuation_profile(
        &omega,
        &traces,
        power_dbm.expect("power checked above"),
        &cal,
        cfg.calibration.smooth_window_points,
        cfg.calibration.power_uncertainty_db,
    )
    .map_err(CliError::from)?;

    let rows: Vec<Vec<f64>> = profile
        .omega
        .iter()
        .zip(profile.attenuation_db.iter().zip(&profile.raw_db))
        .map(|(&w, (&a, &r))| vec![angular_to_hz(w), a, r])
        .collect();
    write_csv(
        &out_dir.join("attenuation_profile.csv"),
        "freq_hz,attenuation_db,attenuation_db_raw",
        &rows,
    )?;

    let results = CalibrationResults {
        profile: rows.iter().map(|r| [r[0], r[1], r[2]]).collect(),
        median_db: profile.median(),
        band_db: profile.band_db,
    };
    let bundle = ResultBundle {
        tool: ToolInfo::current(),
        pipeline: "calibration".to_string(),
        provenance: Provenance {
            config_digest: config_digest.to_string(),
            seed,
            inputs: inputs_prov,
        },
        results: PipelineResults::Calibration(results),
        companions: vec!["attenuation_profile.csv".to_string()],
    };
    let path = out_dir.join("result.json");
    bundle.save(&path)?;
    ResultBundle::load(&path)?;
    Ok(bundle)
}
