//! Figure-keyed plot-data emission: long-format CSVs copied from the arrays
//! stored in a result bundle, never recomputed.

use std::path::Path;

use crate::bundle::{PipelineResults, ResultBundle};
use crate::error::{CliError, Result};
use crate::io::write_csv;

pub const FIGURE_IDS: [&str; 14] = [
    "1f", "2c", "3a", "3b", "3c", "4b", "4c", "4d", "S5", "S8", "S9", "S10", "S11", "S12",
];

pub fn emit(bundle: &ResultBundle, figure: &str, out_dir: &Path) -> Result<Vec<String>> {
    if !FIGURE_IDS.contains(&figure) {
        return Err(CliError::Usage(format!(
            "unknown figure id {figure:?}; valid ids: {}",
            FIGURE_IDS.join(", ")
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let unsupported = |need: &str| {
        CliError::Data(format!(
            "figure {figure} needs a {need} bundle, got a {} bundle",
            bundle.pipeline
        ))
    };

    let mut written = Vec::new();
    let mut emit_csv = |name: String, header: &str, rows: Vec<Vec<f64>>| -> Result<()> {
        write_csv(&out_dir.join(&name), header, &rows)?;
        written.push(name);
        Ok(())
    };

    match figure {
        "1f" => {
            let res = match &bundle.results {
                PipelineResults::Resonance(r) => r,
                _ => return Err(unsupported("resonance")),
            };
            for (i, t) in res.traces.iter().enumerate() {
                emit_csv(
                    format!("fig1f_trace{i:02}.csv"),
                    "freq_hz,data_re,data_im,fit_re,fit_im",
                    t.corrected.iter().map(|r| r.to_vec()).collect(),
                )?;
            }
        }
        "2c" | "3a" => {
            let res = match &bundle.results {
                PipelineResults::Flux(r) => r,
                _ => return Err(unsupported("flux")),
            };
            emit_csv(
                format!("fig{figure}_points.csv"),
                "phi_ext,f0_hz",
                res.points.iter().map(|p| vec![p.phi_ext, p.f0_hz]).collect(),
            )?;
            emit_csv(
                format!("fig{figure}_fit.csv"),
                "phi_ext,f0_hz",
                res.fit_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "3b" => {
            let series = thermal_series(bundle, "critical_current", figure)?;
            emit_csv(
                "fig3b_data.csv".to_string(),
                "t_k,i0_a",
                series.data.iter().map(|r| r.to_vec()).collect(),
            )?;
            emit_csv(
                "fig3b_fit.csv".to_string(),
                "t_k,i0_a",
                series.fit_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "3c" => {
            let res = match &bundle.results {
                PipelineResults::Thermal(r) => r,
                _ => return Err(unsupported("thermal")),
            };
            emit_csv(
                "fig3c_beta.csv".to_string(),
                "t_k,beta_l,extrapolated",
                res.beta_curve
                    .iter()
                    .map(|b| vec![b.t_k, b.beta_l, if b.extrapolated { 1.0 } else { 0.0 }])
                    .collect(),
            )?;
        }
        "4b" => {
            let res = kerr_results(bundle, figure)?;
            emit_csv(
                "fig4b_shift.csv".to_string(),
                "n_c,shift_hz",
                res.observations.iter().map(|o| vec![o.n_c, o.shift_hz]).collect(),
            )?;
        }
        "4c" => {
            let res = kerr_results(bundle, figure)?;
            emit_csv(
                "fig4c_linewidth.csv".to_string(),
                "n_c,kappa_p_hz",
                res.observations.iter().map(|o| vec![o.n_c, o.kappa_p_hz]).collect(),
            )?;
        }
        "4d" => {
            let res = kerr_results(bundle, figure)?;
            emit_csv(
                "fig4d_measured.csv".to_string(),
                "phi_ext,kerr_hz,kerr_plus_hz,kerr_minus_hz",
                vec![vec![
                    res.phi_ext,
                    res.fit.kerr_hz,
                    res.fit.kerr_plus_hz,
                    res.fit.kerr_minus_hz,
                ]],
            )?;
            emit_csv(
                "fig4d_theory_full.csv".to_string(),
                "phi_ext,kerr_hz",
                res.theory_full.iter().map(|r| r.to_vec()).collect(),
            )?;
            emit_csv(
                "fig4d_theory_simplified.csv".to_string(),
                "phi_ext,kerr_hz",
                res.theory_simplified.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S5" => {
            let series = thermal_series(bundle, "total_linewidth", figure)?;
            emit_csv(
                "figS5_linewidth.csv".to_string(),
                "t_k,kappa_b_hz",
                series.data.iter().map(|r| r.to_vec()).collect(),
            )?;
            emit_csv(
                "figS5_fit.csv".to_string(),
                "t_k,kappa_b_hz",
                series.fit_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S8" => {
            let res = match &bundle.results {
                PipelineResults::Thermal(r) => r,
                _ => return Err(unsupported("thermal")),
            };
            emit_csv(
                "figS8_sweetspot.csv".to_string(),
                "t_k,f0_hz",
                res.sweetspot_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S9" => {
            let series = thermal_series(bundle, "linear_inductance", figure)?;
            emit_csv(
                "figS9_llin.csv".to_string(),
                "t_k,l_lin_h",
                series.data.iter().map(|r| r.to_vec()).collect(),
            )?;
            emit_csv(
                "figS9_fit.csv".to_string(),
                "t_k,l_lin_h",
                series.fit_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S10" => {
            let res = match &bundle.results {
                PipelineResults::Flux(r) => r,
                _ => return Err(unsupported("flux")),
            };
            emit_csv(
                "figS10_cpr.csv".to_string(),
                "phase_rad,current_a",
                res.cpr_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S11" => {
            let res = match &bundle.results {
                PipelineResults::Flux(r) => r,
                _ => return Err(unsupported("flux")),
            };
            emit_csv(
                "figS11_responsivity.csv".to_string(),
                "phi_ext,responsivity_hz_per_phi0",
                res.responsivity_curve.iter().map(|r| r.to_vec()).collect(),
            )?;
        }
        "S12" => {
            let res = match &bundle.results {
                PipelineResults::Flux(r) => r,
                _ => return Err(unsupported("flux")),
            };
            emit_csv(
                "figS12_kappa_i.csv".to_string(),
                "phi_ext,kappa_i_hz",
                res.points.iter().map(|p| vec![p.phi_ext, p.kappa_i_hz]).collect(),
            )?;
        }
        _ => unreachable!("validated against FIGURE_IDS"),
    }
    Ok(written)
}

fn thermal_series<'a>(
    bundle: &'a ResultBundle,
    kind: &str,
    figure: &str,
) -> Result<&'a crate::bundle::ThermalSeriesRecord> {
    let res = match &bundle.results {
        PipelineResults::Thermal(r) => r,
        _ => {
            return Err(CliError::Data(format!(
                "figure {figure} needs a thermal bundle, got a {} bundle",
                bundle.pipeline
            )));
        }
    };
    res.series.iter().find(|s| s.kind == kind).ok_or_else(|| {
        CliError::Data(format!(
            "figure {figure}: the bundle has no {kind:?} series (available: {})",
            res.series.iter().map(|s| s.kind.as_str()).collect::<Vec<_>>().join(", ")
        ))
    })
}

fn kerr_results<'a>(bundle: &'a ResultBundle, figure: &str) -> Result<&'a crate::bundle::KerrResults> {
    match &bundle.results {
        PipelineResults::Kerr(r) => Ok(r),
        _ => Err(CliError::Data(format!(
            "figure {figure} needs a kerr bundle, got a {} bundle",
            bundle.pipeline
        ))),
    }
}
