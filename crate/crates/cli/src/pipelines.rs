//! Fit pipelines: resonance, flux, thermal and Kerr. Each consumes trace or
//! series files, runs the corresponding extraction chain and produces a
//! [`ResultBundle`] with plot-ready companions.

use std::path::{Path, PathBuf};

use squidmw_core::consts::{angular_to_hz, hz_to_angular};
use squidmw_core::fit::{
    analyze_trace, fit_kerr, fit_thermal, fit_tuning_curve_seeded, kappa_e_profile, notch_model,
    DomainPolicy, FluxAxis, KerrFitConfig, ResonanceFit, ThermalFitParams, ThermalSeries,
};
use squidmw_core::flux::{cpr_curve, solve_central_on_branch, tuning_curve, SquidParams, SweepDirection};
use squidmw_core::kerr::{kerr_at_flux_point, kerr_simplified};
use squidmw_core::response::TwoToneObservation;
use squidmw_core::thermal::{
    bardeen_critical_current, beta_vs_temperature, llin_vs_temperature,
    quasiparticle_linewidth_internal, resonance_at_temperature, sweetspot_resonance_at_temperature,
    ConstrictionThermal,
};
use squidmw_core::trace::ComplexTrace;

use crate::bundle::*;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{read_series, read_trace, write_csv, TraceMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Resonance,
    Flux,
    Thermal,
    Kerr,
}

impl std::str::FromStr for Pipeline {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resonance" => Ok(Pipeline::Resonance),
            "flux" => Ok(Pipeline::Flux),
            "thermal" => Ok(Pipeline::Thermal),
            "kerr" => Ok(Pipeline::Kerr),
            other => Err(CliError::Usage(format!(
                "unknown pipeline {other:?}; expected one of resonance, flux, thermal, kerr"
            ))),
        }
    }
}

pub struct PipelineInput {
    pub config: RunConfig,
    pub config_digest: String,
    pub inputs: Vec<PathBuf>,
    pub reference: Option<PathBuf>,
    /// A flux-pipeline bundle supplying the kappa_e(omega) profile for the
    /// Kerr pipeline.
    pub flux_bundle: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: usize,
}

pub fn run(pipeline: Pipeline, input: &PipelineInput, out_dir: &Path) -> Result<ResultBundle> {
    if input.inputs.is_empty() {
        return Err(CliError::Usage("no input files given".to_string()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut inputs_prov = Vec::new();
    for p in &input.inputs {
        inputs_prov.push(InputRecord {
            path: p.display().to_string(),
            digest: crate::digest::digest_file(p)
                .map_err(|e| CliError::Data(format!("cannot digest {}: {e}", p.display())))?,
        });
    }
    let provenance = Provenance {
        config_digest: input.config_digest.clone(),
        seed: input.seed,
        inputs: inputs_prov,
    };

    let (results, companions) = match pipeline {
        Pipeline::Resonance => resonance_pipeline(input, out_dir)?,
        Pipeline::Flux => flux_pipeline(input, out_dir)?,
        Pipeline::Thermal => thermal_pipeline(input, out_dir)?,
        Pipeline::Kerr => kerr_pipeline(input, out_dir)?,
    };

    let bundle = ResultBundle {
        tool: ToolInfo::current(),
        pipeline: match pipeline {
            Pipeline::Resonance => "resonance",
            Pipeline::Flux => "flux",
            Pipeline::Thermal => "thermal",
            Pipeline::Kerr => "kerr",
        }
        .to_string(),
        provenance,
        results,
        companions,
    };
    let path = out_dir.join("result.json");
    bundle.save(&path)?;
    // Success paths validate their own output: the saved bundle must parse
    // back against the schema.
    ResultBundle::load(&path)?;
    Ok(bundle)
}

/// Fit every trace, preserving input order; `jobs > 1` fans the fits out
/// over threads.
fn fit_all_traces(
    input: &PipelineInput,
    paths: &[PathBuf],
) -> Result<Vec<(ComplexTrace, TraceMeta, squidmw_core::fit::CorrectedTrace, ResonanceFit)>> {
    let reference = match &input.reference {
        Some(p) => Some(read_trace(p)?.0),
        None => None,
    };
    let policy = input.config.correction_policy();

    let work = |path: &PathBuf| -> Result<(ComplexTrace, TraceMeta, squidmw_core::fit::CorrectedTrace, ResonanceFit)> {
        let (trace, meta) = read_trace(path)?;
        let (corrected, fit) = analyze_trace(&trace, reference.as_ref(), &policy)
            .map_err(|e| CliError::Fit(format!("{}: {e}", path.display())))?;
        Ok((trace, meta, corrected, fit))
    };

    if input.jobs <= 1 || paths.len() < 2 {
        return paths.iter().map(work).collect();
    }
    // Deterministic fan-out: chunk by index, join in order.
    let mut slots: Vec<Option<Result<_>>> = (0..paths.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = paths.len().div_ceil(input.jobs);
        let mut handles = Vec::new();
        for (ci, chunk_paths) in paths.chunks(chunk).enumerate() {
            let work = &work;
            handles.push((
                ci * chunk,
                scope.spawn(move || chunk_paths.iter().map(work).collect::<Vec<_>>()),
            ));
        }
        for (base, h) in handles {
            for (off, res) in h.join().expect("fit worker panicked").into_iter().enumerate() {
                slots[base + off] = Some(res);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("all slots filled")).collect()
}

fn trace_fit_record(
    source: &Path,
    corrected: &squidmw_core::fit::CorrectedTrace,
    fit: &ResonanceFit,
) -> TraceFit {
    let corrected_rows: Vec<[f64; 5]> = corrected
        .trace
        .omega
        .iter()
        .zip(&corrected.trace.s21)
        .map(|(&w, s)| {
            let m = notch_model(w, fit.omega_0, fit.kappa_i, fit.kappa_e, fit.theta);
            [angular_to_hz(w), s.re, s.im, m.re, m.im]
        })
        .collect();
    let bg = &fit.background;
    TraceFit {
        source: source.display().to_string(),
        f0_hz: angular_to_hz(fit.omega_0),
        kappa_i_hz: angular_to_hz(fit.kappa_i),
        kappa_e_hz: angular_to_hz(fit.kappa_e),
        theta_rad: bg.theta,
        residual_rms: fit.residual_rms,
        f0_sigma_hz: fit.uncertainties.map(|u| angular_to_hz(u[0])),
        background: BackgroundRecord {
            a0: bg.a0,
            a1: bg.a1,
            a2: bg.a2,
            phi0: bg.phi0,
            phi1: bg.phi1,
            theta: bg.theta,
        },
        corrected: corrected_rows,
    }
}

fn resonance_pipeline(
    input: &PipelineInput,
    out_dir: &Path,
) -> Result<(PipelineResults, Vec<String>)> {
    let fits = fit_all_traces(input, &input.inputs)?;
    let mut traces = Vec::new();
    let mut companions = Vec::new();
    for (path, (_, _, corrected, fit)) in input.inputs.iter().zip(&fits) {
        let record = trace_fit_record(path, corrected, fit);
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
        let companion = format!("corrected_{stem}.csv");
        write_csv(
            &out_dir.join(&companion),
            "freq_hz,data_re,data_im,fit_re,fit_im",
            &record.corrected.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        )?;
        companions.push(companion);
        traces.push(record);
    }
    Ok((PipelineResults::Resonance(ResonanceResults { traces }), companions))
}

fn flux_pipeline(input: &PipelineInput, out_dir: &Path) -> Result<(PipelineResults, Vec<String>)> {
    let cfg = &input.config;
    let t_ref = cfg.device.t_ref_k;
    let circuit = cfg.circuit_at(t_ref)?;
    let omega_b = cfg.omega_b_at(t_ref)?;

    let fits = fit_all_traces(input, &input.inputs)?;
    let mut points = Vec::new();
    for (path, (_, meta, _, fit)) in input.inputs.iter().zip(&fits) {
        let coil = meta.coil_current_a.ok_or_else(|| {
            CliError::Data(format!(
                "{}: flux pipeline needs coil_current_a in the sidecar",
                path.display()
            ))
        })?;
        points.push((path, coil, fit));
    }
    points.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let fit_input: Vec<(f64, f64)> = points.iter().map(|(_, c, f)| (*c, f.omega_0)).collect();
    let flux_fit = fit_tuning_curve_seeded(
        &fit_input,
        &circuit,
        omega_b,
        FluxAxis::CoilCurrent,
        None,
        Some((cfg.pipeline.coil_period_a, cfg.pipeline.coil_offset_a)),
    )
    .map_err(CliError::from)?;

    let squid = SquidParams::from_l_j0(flux_fit.l_j0, flux_fit.l_lin, circuit.l_loop)
        .map_err(CliError::from)?;
    let point_records: Vec<FluxPointRecord> = points
        .iter()
        .zip(&flux_fit.branch_assignments)
        .map(|((path, coil, fit), &branch)| FluxPointRecord {
            source: path.display().to_string(),
            coil_current_a: *coil,
            phi_ext: (coil - flux_fit.offset) / flux_fit.period,
            branch,
            f0_hz: angular_to_hz(fit.omega_0),
            kappa_i_hz: angular_to_hz(fit.kappa_i),
            kappa_e_hz: angular_to_hz(fit.kappa_e),
        })
        .collect();

    // Model curve and responsivity over the covered flux range.
    let phi_lo = point_records.iter().map(|p| p.phi_ext).fold(f64::INFINITY, f64::min);
    let phi_hi = point_records.iter().map(|p| p.phi_ext).fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<f64> = (0..=400)
        .map(|i| phi_lo + (phi_hi - phi_lo) * i as f64 / 400.0)
        .collect();
    let curve = tuning_curve(&circuit, &squid, omega_b, &grid, SweepDirection::Up, cfg.jump_policy())
        .map_err(CliError::from)?;
    let fit_curve: Vec<[f64; 2]> = curve
        .points
        .iter()
        .filter_map(|p| p.omega_0.map(|w| [p.phi_ext, angular_to_hz(w)]))
        .collect();
    let responsivity_curve: Vec<[f64; 2]> = curve
        .points
        .iter()
        .filter_map(|p| p.responsivity.map(|r| [p.phi_ext, angular_to_hz(r)]))
        .collect();

    let currents: Vec<f64> = (0..=100).map(|i| squid.i_0 * i as f64 / 100.0).collect();
    let cpr: Vec<[f64; 2]> = cpr_curve(&currents, squid.i_0, squid.l_lin, 0)
        .map_err(CliError::from)?
        .into_iter()
        .map(|(phase, current)| [phase, current])
        .collect();

    let results = FluxResults {
        points: point_records,
        fit: FluxFitRecord {
            l_j0_h: flux_fit.l_j0,
            l_lin_h: flux_fit.l_lin,
            i_0_a: squid.i_0,
            beta_l: flux_fit.beta_l,
            period_a_per_phi0: flux_fit.period,
            offset_a: flux_fit.offset,
            residual_rms_hz: angular_to_hz(flux_fit.residual_rms),
            uncertainties: flux_fit.uncertainties.clone(),
            conditioning_warning: flux_fit.conditioning_warning.clone(),
        },
        fit_curve,
        responsivity_curve,
        cpr_curve: cpr,
    };

    let mut companions = Vec::new();
    let rows: Vec<Vec<f64>> = results
        .points
        .iter()
        .map(|p| vec![p.coil_current_a, p.phi_ext, p.f0_hz, p.kappa_i_hz, p.kappa_e_hz])
        .collect();
    write_csv(
        &out_dir.join("flux_points.csv"),
        "coil_current_a,phi_ext,f0_hz,kappa_i_hz,kappa_e_hz",
        &rows,
    )?;
    companions.push("flux_points.csv".to_string());
    write_csv(
        &out_dir.join("flux_fit_curve.csv"),
        "phi_ext,f0_hz",
        &results.fit_curve.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
    )?;
    companions.push("flux_fit_curve.csv".to_string());

    Ok((PipelineResults::Flux(results), companions))
}

fn thermal_pipeline(input: &PipelineInput, out_dir: &Path) -> Result<(PipelineResults, Vec<String>)> {
    let cfg = &input.config;
    let film = cfg.film();
    let c_tot = cfg.device.c_tot_f;

    // Partition inputs: trace files feed the bare-resonance and linewidth
    // fits, value series feed the junction fits.
    let mut trace_paths = Vec::new();
    let mut series_inputs: Vec<(PathBuf, Vec<(f64, f64)>, String)> = Vec::new();
    for path in &input.inputs {
        let is_series = crate::io::read_sidecar(path)?.series_kind.is_some();
        if is_series {
            let (points, meta) = read_series(path)?;
            series_inputs.push((path.clone(), points, meta.series_kind.unwrap()));
        } else {
            trace_paths.push(path.clone());
        }
    }

    let mut series_records = Vec::new();
    let mut fitted_ic_tcc: Option<(f64, f64)> = None;
    let mut fitted_llin: Option<(f64, f64)> = None;
    let mut fitted_film: Option<(f64, f64, f64)> = None;

    if !trace_paths.is_empty() {
        let fits = fit_all_traces(input, &trace_paths)?;
        let mut omega_data = Vec::new();
        let mut kappa_data = Vec::new();
        for (path, (_, meta, _, fit)) in trace_paths.iter().zip(&fits) {
            let t = meta.t_s_k.ok_or_else(|| {
                CliError::Data(format!(
                    "{}: thermal pipeline needs t_s_k in the sidecar",
                    path.display()
                ))
            })?;
            omega_data.push((t, fit.omega_0));
            kappa_data.push((t, fit.kappa_total()));
        }
        omega_data.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        kappa_data.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let bare = fit_thermal(
            &ThermalSeries::BareResonance { l_g: film.l_g, g: film.g, d_nb: film.d_nb },
            &omega_data,
            DomainPolicy::Reject,
        )
        .map_err(CliError::from)?;
        let (lambda0, t_c, c_fit) = match bare.params {
            ThermalFitParams::BareResonance { lambda0, t_c, c_tot } => (lambda0, t_c, c_tot),
            _ => unreachable!(),
        };
        fitted_film = Some((lambda0, t_c, c_fit));
        let sigmas = bare.uncertainties.clone().unwrap_or_default();
        let film_fit = squidmw_core::thermal::FilmParams {
            lambda0,
            t_c,
            ..film
        };
        series_records.push(ThermalSeriesRecord {
            kind: "bare_resonance".to_string(),
            data: omega_data.iter().map(|&(t, w)| [t, angular_to_hz(w)]).collect(),
            fit_curve: omega_data
                .iter()
                .map(|&(t, _)| {
                    let w = resonance_at_temperature(t, &film_fit, c_fit).unwrap();
                    [t, angular_to_hz(w)]
                })
                .collect(),
            params: vec![
                NamedValue { name: "lambda0_m".into(), value: lambda0, sigma: sigmas.first().copied() },
                NamedValue { name: "t_c_k".into(), value: t_c, sigma: sigmas.get(1).copied() },
                NamedValue { name: "c_tot_f".into(), value: c_fit, sigma: sigmas.get(2).copied() },
            ],
            masked_points: bare.masked.clone(),
            warnings: bare.warnings.clone(),
        });

        let kappa_e_b = hz_to_angular(cfg.device.linewidths.kappa_e_b_hz);
        let lw = fit_thermal(
            &ThermalSeries::TotalLinewidth { film: film_fit, c_tot: c_fit, kappa_e: kappa_e_b },
            &kappa_data,
            DomainPolicy::Reject,
        )
        .map_err(CliError::from)?;
        let a_kappa = match lw.params {
            ThermalFitParams::TotalLinewidth { a_kappa } => a_kappa,
            _ => unreachable!(),
        };
        series_records.push(ThermalSeriesRecord {
            kind: "total_linewidth".to_string(),
            data: kappa_data.iter().map(|&(t, k)| [t, angular_to_hz(k)]).collect(),
            fit_curve: kappa_data
                .iter()
                .map(|&(t, _)| {
                    let w = resonance_at_temperature(t, &film_fit, c_fit).unwrap();
                    let ki = quasiparticle_linewidth_internal(t, &film_fit, a_kappa, w).unwrap();
                    [t, angular_to_hz(kappa_e_b + ki)]
                })
                .collect(),
            params: vec![NamedValue {
                name: "a_kappa".into(),
                value: a_kappa,
                sigma: lw.uncertainties.as_ref().and_then(|u| u.first().copied()),
            }],
            masked_points: lw.masked.clone(),
            warnings: lw.warnings.clone(),
        });
    }

    for (path, points, kind) in &series_inputs {
        match kind.as_str() {
            "critical_current" => {
                let fit = fit_thermal(&ThermalSeries::CriticalCurrent, points, DomainPolicy::Mask)
                    .map_err(CliError::from)?;
                let (i_c, t_cc) = match fit.params {
                    ThermalFitParams::CriticalCurrent { i_c, t_cc } => (i_c, t_cc),
                    _ => unreachable!(),
                };
                fitted_ic_tcc = Some((i_c, t_cc));
                let sig = fit.uncertainties.clone().unwrap_or_default();
                series_records.push(ThermalSeriesRecord {
                    kind: kind.clone(),
                    data: points.iter().map(|&(t, v)| [t, v]).collect(),
                    fit_curve: points
                        .iter()
                        .filter(|&&(t, _)| t <= t_cc)
                        .map(|&(t, _)| [t, bardeen_critical_current(t, i_c, t_cc).unwrap()])
                        .collect(),
                    params: vec![
                        NamedValue { name: "i_c_a".into(), value: i_c, sigma: sig.first().copied() },
                        NamedValue { name: "t_cc_k".into(), value: t_cc, sigma: sig.get(1).copied() },
                    ],
                    masked_points: fit.masked.clone(),
                    warnings: fit.warnings.clone(),
                });
            }
            "linear_inductance" => {
                let t_cc = fitted_ic_tcc
                    .map(|(_, t)| t)
                    .unwrap_or(cfg.device.thermal.t_cc_k);
                let fit = fit_thermal(
                    &ThermalSeries::LinearInductance { t_cc },
                    points,
                    DomainPolicy::Mask,
                )
                .map_err(CliError::from)?;
                let (l_off, l_lin0) = match fit.params {
                    ThermalFitParams::LinearInductance { l_off, l_lin0 } => (l_off, l_lin0),
                    _ => unreachable!(),
                };
                fitted_llin = Some((l_off, l_lin0));
                let sig = fit.uncertainties.clone().unwrap_or_default();
                let model = ConstrictionThermal { i_c: 1.0, t_cc, l_off, l_lin0 };
                series_records.push(ThermalSeriesRecord {
                    kind: kind.clone(),
                    data: points.iter().map(|&(t, v)| [t, v]).collect(),
                    fit_curve: points
                        .iter()
                        .filter(|&&(t, _)| t < t_cc)
                        .map(|&(t, _)| [t, llin_vs_temperature(t, &model).unwrap()])
                        .collect(),
                    params: vec![
                        NamedValue { name: "l_off_h".into(), value: l_off, sigma: sig.first().copied() },
                        NamedValue { name: "l_lin0_h".into(), value: l_lin0, sigma: sig.get(1).copied() },
                    ],
                    masked_points: fit.masked.clone(),
                    warnings: fit.warnings.clone(),
                });
            }
            other => {
                return Err(CliError::Data(format!(
                    "{}: unknown series_kind {other:?}",
                    path.display()
                )));
            }
        }
    }

    if series_records.is_empty() {
        return Err(CliError::Usage(
            "thermal pipeline received neither traces nor value series".to_string(),
        ));
    }

    // Combined predictions where the junction models are available.
    let beta_curve;
    let sweetspot_curve;
    let beta_at_zero;
    {
        let (i_c, t_cc) =
            fitted_ic_tcc.unwrap_or((cfg.device.thermal.i_c_a, cfg.device.thermal.t_cc_k));
        let (l_off, l_lin0) =
            fitted_llin.unwrap_or((cfg.device.thermal.l_off_h, cfg.device.thermal.l_lin0_h));
        let thermal = ConstrictionThermal { i_c, t_cc, l_off, l_lin0 };
        let film_used = match fitted_film {
            Some((lambda0, t_c, _)) => squidmw_core::thermal::FilmParams { lambda0, t_c, ..film },
            None => film,
        };
        let c_used = fitted_film.map(|f| f.2).unwrap_or(c_tot);
        let grid: Vec<f64> = (0..=120).map(|i| t_cc * 0.995 * i as f64 / 120.0).collect();
        let measured = (
            series_records
                .iter()
                .flat_map(|s| s.data.iter().map(|d| d[0]))
                .fold(f64::INFINITY, f64::min),
            series_records
                .iter()
                .flat_map(|s| s.data.iter().map(|d| d[0]))
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let curve = beta_vs_temperature(&grid, &film_used, &thermal, measured)
            .map_err(CliError::from)?;
        beta_curve = curve
            .iter()
            .map(|p| BetaRecord { t_k: p.t, beta_l: p.beta_l, extrapolated: p.extrapolated })
            .collect();
        beta_at_zero = curve.first().map(|p| p.beta_l);
        sweetspot_curve = grid
            .iter()
            .filter(|&&t| t < t_cc * 0.99)
            .filter_map(|&t| {
                sweetspot_resonance_at_temperature(t, &film_used, c_used, &thermal)
                    .ok()
                    .map(|w| [t, angular_to_hz(w)])
            })
            .collect();
    }

    let results = ThermalResults {
        series: series_records,
        beta_curve,
        sweetspot_curve,
        beta_at_zero,
        i_c_a: fitted_ic_tcc.map(|v| v.0),
        t_cc_k: fitted_ic_tcc.map(|v| v.1),
    };

    let mut companions = Vec::new();
    for s in &results.series {
        let name = format!("thermal_{}.csv", s.kind);
        let rows: Vec<Vec<f64>> = s
            .data
            .iter()
            .zip(s.fit_curve.iter().chain(std::iter::repeat(&[f64::NAN; 2])))
            .map(|(d, f)| vec![d[0], d[1], f[1]])
            .collect();
        write_csv(&out_dir.join(&name), "t_k,value,fit", &rows)?;
        companions.push(name);
    }

    Ok((PipelineResults::Thermal(results), companions))
}

fn kerr_pipeline(input: &PipelineInput, out_dir: &Path) -> Result<(PipelineResults, Vec<String>)> {
    let cfg = &input.config;
    let t_ref = cfg.device.t_ref_k;
    let circuit = cfg.circuit_at(t_ref)?;
    let squid = cfg.squid_ref()?;

    // Separate pumped traces (pump settings in the sidecar) from the
    // unpumped reference resonance.
    let mut pumped = Vec::new();
    let mut unpumped_paths = Vec::new();
    for path in &input.inputs {
        let meta = crate::io::read_sidecar(path)?;
        match (meta.pump_freq_hz, meta.pump_power_dbm) {
            (Some(f), Some(p)) => pumped.push((path.clone(), f, p)),
            _ => unpumped_paths.push(path.clone()),
        }
    }
    if pumped.len() < 4 {
        return Err(CliError::Data(format!(
            "Kerr pipeline needs at least 4 pumped traces with pump_freq_hz and \
             pump_power_dbm sidecars, got {}",
            pumped.len()
        )));
    }
    if unpumped_paths.is_empty() {
        return Err(CliError::Data(
            "Kerr pipeline needs one unpumped trace for the bare resonance".to_string(),
        ));
    }

    let policy = cfg.correction_policy();
    let reference = match &input.reference {
        Some(p) => Some(read_trace(p)?.0),
        None => None,
    };
    let (unpumped_trace, _) = read_trace(&unpumped_paths[0])?;
    let (_, base_fit) = analyze_trace(&unpumped_trace, reference.as_ref(), &policy)
        .map_err(|e| CliError::Fit(format!("{}: {e}", unpumped_paths[0].display())))?;
    let omega_0 = base_fit.omega_0;
    let kappa_0 = base_fit.kappa_total();

    // Dressed-trace fits with the pump tone cut out.
    let guard = hz_to_angular(cfg.pipeline.pump_guard_band_hz) / 2.0;
    let mut observations = Vec::new();
    let mut obs_records = Vec::new();
    let mut omega_p_common = None;
    for (path, pump_freq_hz, generator_dbm) in &pumped {
        let (trace, _) = read_trace(path)?;
        let omega_p = hz_to_angular(*pump_freq_hz);
        omega_p_common.get_or_insert(omega_p);
        let cut = trace.without_band(omega_p, guard).map_err(CliError::from)?;
        let (_, fit) = analyze_trace(&cut, reference.as_ref(), &policy)
            .map_err(|e| CliError::Fit(format!("{}: {e}", path.display())))?;
        let power_w = cfg.pump_power_on_chip_w(*generator_dbm);
        observations.push(TwoToneObservation {
            pump_power: power_w,
            omega_p,
            delta_omega0: fit.omega_0 - omega_0,
            kappa_p: fit.kappa_total(),
        });
        obs_records.push((path.clone(), *generator_dbm, power_w, fit));
    }

    let omega_p = omega_p_common.expect("at least four pumped traces");
    let delta_p = omega_p - omega_0;

    // kappa_e(omega) profile: from a flux bundle when given, otherwise a
    // flat profile anchored at the unpumped fit.
    let profile_pairs: Vec<(f64, f64)> = match &input.flux_bundle {
        Some(p) => {
            let bundle = ResultBundle::load(p)?;
            match bundle.results {
                PipelineResults::Flux(f) => f
                    .points
                    .iter()
                    .map(|r| (hz_to_angular(r.f0_hz), hz_to_angular(r.kappa_e_hz)))
                    .collect(),
                _ => {
                    return Err(CliError::Data(format!(
                        "{}: expected a flux-pipeline bundle for the kappa_e profile",
                        p.display()
                    )));
                }
            }
        }
        None => (0..8)
            .map(|i| {
                (
                    omega_0 - 2.0 * kappa_0 + kappa_0 * i as f64 / 2.0,
                    base_fit.kappa_e,
                )
            })
            .collect(),
    };
    let profile = kappa_e_profile(&profile_pairs).map_err(CliError::from)?;

    let kerr_cfg = KerrFitConfig {
        power_uncertainty_db: cfg.calibration.power_uncertainty_db,
        broadening_tolerance: 0.1 * kappa_0,
        kappa_e_window: Some(kappa_0),
    };
    let fit = fit_kerr(&observations, &profile, kappa_0, delta_p, &kerr_cfg)
        .map_err(CliError::from)?;

    // Theory curves over the stable arch from the configured device.
    let beta = squid.beta_l();
    let mut theory_full = Vec::new();
    let mut theory_simplified = Vec::new();
    let mut phi = 0.0;
    while phi <= 0.95 {
        match solve_central_on_branch(phi, beta, 0) {
            Ok(flux) if flux.stability == squidmw_core::flux::FluxStability::Stable => {
                if let Ok(k) = kerr_at_flux_point(&circuit, &squid, &flux) {
                    theory_full.push([phi, angular_to_hz(k.k)]);
                }
                if let Ok(k) = kerr_simplified(&circuit, &squid, phi) {
                    theory_simplified.push([phi, angular_to_hz(k.k)]);
                }
            }
            _ => break,
        }
        phi += 0.01;
    }

    // The flux bias of this family, from the unpumped resonance on the
    // configured arch.
    let omega_b = cfg.omega_b_at(t_ref)?;
    let phi_ext = invert_flux_bias(&circuit, &squid, omega_b, omega_0);

    let results = KerrResults {
        phi_ext,
        observations: obs_records
            .iter()
            .zip(&fit.n_c)
            .zip(fit.n_c_plus.iter().zip(&fit.n_c_minus))
            .map(|(((path, dbm, watt, rfit), &n_c), (&n_plus, &n_minus))| KerrObservation {
                source: path.display().to_string(),
                generator_power_dbm: *dbm,
                on_chip_power_w: *watt,
                n_c,
                n_c_plus: n_plus,
                n_c_minus: n_minus,
                shift_hz: angular_to_hz(rfit.omega_0 - omega_0),
                kappa_p_hz: angular_to_hz(rfit.kappa_total()),
            })
            .collect(),
        fit: KerrFitRecord {
            kerr_hz: angular_to_hz(fit.kerr),
            kappa_nl_hz: angular_to_hz(fit.kappa_nl),
            kerr_plus_hz: angular_to_hz(fit.kerr_plus),
            kerr_minus_hz: angular_to_hz(fit.kerr_minus),
            kerr_sigma_hz: angular_to_hz(fit.kerr_sigma),
        },
        theory_full,
        theory_simplified,
    };

    let rows: Vec<Vec<f64>> = results
        .observations
        .iter()
        .map(|o| vec![o.n_c, o.shift_hz, o.kappa_p_hz])
        .collect();
    write_csv(&out_dir.join("kerr_observations.csv"), "n_c,shift_hz,kappa_p_hz", &rows)?;

    Ok((PipelineResults::Kerr(results), vec!["kerr_observations.csv".to_string()]))
}

/// Invert the sweetspot arch for the flux bias that produces `omega_0`.
fn invert_flux_bias(
    circuit: &squidmw_core::circuit::CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    omega_0: f64,
) -> f64 {
    let beta = squid.beta_l();
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=600 {
        let phi = 0.75 * k as f64 / 600.0;
        if let Ok(flux) = solve_central_on_branch(phi, beta, 0) {
            let cos = flux.junction_phase().cos();
            if cos <= 1e-6 {
                break;
            }
            let w = omega_b
                / (1.0 + (squid.l_lin + squid.l_j0() / cos) / (2.0 * circuit.l)).sqrt();
            let d = (w - omega_0).abs();
            if d < best.0 {
                best = (d, phi);
            }
        }
    }
    best.1
}
