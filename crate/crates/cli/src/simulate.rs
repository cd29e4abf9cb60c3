//! Synthetic-data scenarios mirroring the experiments: single resonances,
//! flux sweeps, temperature sweeps, two-tone pump ladders and
//! noise-calibration bundles. Deterministic for a given seed.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use squidmw_core::calib::hemt_noise_floor;
use squidmw_core::consts::{angular_to_hz, hz_to_angular, HBAR};
use squidmw_core::fit::BackgroundModel;
use squidmw_core::flux::{tuning_curve, SweepDirection};
use squidmw_core::kerr::kerr_at_flux;
use squidmw_core::response::{pump_shift, steady_state, two_tone_s21, BranchPolicy, CavityMode};
use squidmw_core::thermal::{
    bardeen_critical_current, llin_vs_temperature, quasiparticle_linewidth_internal,
    resonance_at_temperature,
};
use squidmw_core::trace::ComplexTrace;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{write_series, write_trace, TraceMeta};
use crate::rng::NoiseRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Resonance,
    FluxSweep,
    TemperatureSweep,
    TwoTone,
    Calibration,
}

impl std::str::FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resonance" => Ok(Scenario::Resonance),
            "flux-sweep" => Ok(Scenario::FluxSweep),
            "temperature-sweep" => Ok(Scenario::TemperatureSweep),
            "two-tone" => Ok(Scenario::TwoTone),
            "calibration" => Ok(Scenario::Calibration),
            other => Err(CliError::Usage(format!(
                "unknown scenario {other:?}; expected one of resonance, flux-sweep, \
                 temperature-sweep, two-tone, calibration"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub points: usize,
    pub noise_sigma: f64,
    pub span_hz: Option<f64>,
    pub flux_min: f64,
    pub flux_max: f64,
    pub flux_steps: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub power_min_dbm: f64,
    pub power_max_dbm: f64,
    pub power_steps: usize,
    pub kappa_nl_hz: f64,
    pub repeats: usize,
    /// Apply a non-trivial instrument background to every trace.
    pub with_background: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            points: 801,
            noise_sigma: 0.0,
            span_hz: None,
            flux_min: -0.45,
            flux_max: 0.45,
            flux_steps: 31,
            t_min: 2.4,
            t_max: 2.8,
            t_steps: 9,
            power_min_dbm: -45.0,
            power_max_dbm: -15.0,
            power_steps: 20,
            kappa_nl_hz: 50.0,
            repeats: 200,
            with_background: true,
        }
    }
}

/// Ground truth the simulator writes next to the generated files.
#[derive(Debug, Serialize)]
struct Truth<'a> {
    scenario: &'a str,
    seed: u64,
    device: &'a str,
    noise_sigma: f64,
    values: serde_json::Value,
}

fn write_truth(out_dir: &Path, truth: &Truth) -> Result<()> {
    let text = serde_json::to_string_pretty(truth)
        .map_err(|e| CliError::Data(format!("truth serialization: {e}")))?;
    crate::io::write_atomic(&out_dir.join("truth.json"), text.as_bytes())
}

fn background_for(enabled: bool, omega_mid: f64, omega_span: f64) -> BackgroundModel {
    if !enabled {
        return BackgroundModel::identity();
    }
    // A fixed instrument background: a few-percent amplitude tilt, a phase
    // winding, and a modest Fano angle.
    let (c, s) = (omega_mid, 0.5 * omega_span);
    let (b0, b1, b2) = (0.92, 0.06, -0.03);
    let (p0, p1) = (0.4, 1.1);
    BackgroundModel {
        a0: b0 - b1 * c / s + b2 * c * c / (s * s),
        a1: b1 / s - 2.0 * b2 * c / (s * s),
        a2: b2 / (s * s),
        phi0: p0 - p1 * c / s,
        phi1: p1 / s,
        theta: 0.12,
    }
}

fn notch_trace(
    omega: &[f64],
    omega_0: f64,
    kappa_i: f64,
    kappa_e: f64,
    bg: &BackgroundModel,
    sigma: f64,
    rng: &mut NoiseRng,
) -> ComplexTrace {
    let kappa = kappa_i + kappa_e;
    let s21 = omega
        .iter()
        .map(|&w| {
            let f = kappa_e / Complex64::new(kappa, 2.0 * (w - omega_0));
            let mut s = bg.apply(w, f);
            if sigma > 0.0 {
                s += rng.complex_noise(sigma);
            }
            s
        })
        .collect();
    ComplexTrace::new(omega.to_vec(), s21).expect("grid is sorted")
}

fn grid(center: f64, span: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| center - 0.5 * span + span * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn run(
    cfg: &RunConfig,
    scenario: Scenario,
    opts: &SimOptions,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<String>> {
    if opts.points < 64 {
        return Err(CliError::Usage(format!(
            "at --points: need at least 64 samples per trace, got {}",
            opts.points
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    match scenario {
        Scenario::Resonance => resonance(cfg, opts, seed, out_dir),
        Scenario::FluxSweep => flux_sweep(cfg, opts, seed, out_dir),
        Scenario::TemperatureSweep => temperature_sweep(cfg, opts, seed, out_dir),
        Scenario::TwoTone => two_tone(cfg, opts, seed, out_dir),
        Scenario::Calibration => calibration(cfg, opts, seed, out_dir),
    }
}

fn resonance(cfg: &RunConfig, opts: &SimOptions, seed: u64, out: &Path) -> Result<Vec<String>> {
    let mut rng = NoiseRng::new(seed);
    let t_ref = cfg.device.t_ref_k;
    let circuit = cfg.circuit_at(t_ref)?;
    let squid = cfg.squid_ref()?;
    let omega_b = cfg.omega_b_at(t_ref)?;
    let res = squidmw_core::flux::resonance_at_flux(&circuit, &squid, omega_b, 0.0, 0.0)?;
    let omega_0 = res
        .omega_0
        .ok_or_else(|| CliError::Data("sweetspot resonance is not real".to_string()))?;
    let kappa_i = hz_to_angular(cfg.device.linewidths.kappa_i_hz);
    let kappa_e = cfg.kappa_e();
    let span = opts
        .span_hz
        .map(hz_to_angular)
        .unwrap_or(20.0 * (kappa_i + kappa_e));
    let omega = grid(omega_0, span, opts.points);
    let bg = background_for(opts.with_background, omega_0, span);

    let trace = notch_trace(&omega, omega_0, kappa_i, kappa_e, &bg, opts.noise_sigma, &mut rng);
    let meta = TraceMeta { t_s_k: Some(t_ref), ..Default::default() };
    write_trace(&out.join("resonance_000.csv"), &trace, Some(&meta))?;
    write_truth(
        out,
        &Truth {
            scenario: "resonance",
            seed,
            device: &cfg.device.name,
            noise_sigma: opts.noise_sigma,
            values: serde_json::json!({
                "f0_hz": angular_to_hz(omega_0),
                "kappa_i_hz": angular_to_hz(kappa_i),
                "kappa_e_hz": angular_to_hz(kappa_e),
                "theta_rad": bg.theta,
            }),
        },
    )?;
    Ok(vec!["resonance_000.csv".to_string()])
}

fn flux_sweep(cfg: &RunConfig, opts: &SimOptions, seed: u64, out: &Path) -> Result<Vec<String>> {
    if opts.flux_steps < 8 || !(opts.flux_max > opts.flux_min) {
        return Err(CliError::Usage(
            "at --flux-steps/--flux-min/--flux-max: need an increasing grid of at least 8 points"
                .to_string(),
        ));
    }
    let mut rng = NoiseRng::new(seed);
    let t_ref = cfg.device.t_ref_k;
    let circuit = cfg.circuit_at(t_ref)?;
    let squid = cfg.squid_ref()?;
    let omega_b = cfg.omega_b_at(t_ref)?;
    let kappa_i = hz_to_angular(cfg.device.linewidths.kappa_i_hz);
    let kappa_e = cfg.kappa_e();

    let phis: Vec<f64> = (0..opts.flux_steps)
        .map(|i| {
            opts.flux_min
                + (opts.flux_max - opts.flux_min) * i as f64 / (opts.flux_steps - 1) as f64
        })
        .collect();
    let curve = tuning_curve(&circuit, &squid, omega_b, &phis, SweepDirection::Up, cfg.jump_policy())?;

    let sweet = squidmw_core::flux::resonance_at_flux(&circuit, &squid, omega_b, 0.0, 0.0)?
        .omega_0
        .expect("sweetspot is real");
    let arch_span = 3.0 * (sweet
        - curve
            .points
            .iter()
            .filter_map(|p| p.omega_0)
            .fold(f64::INFINITY, f64::min))
        .max(20.0 * (kappa_i + kappa_e));

    let mut files = Vec::new();
    for (i, p) in curve.points.iter().enumerate() {
        let Some(omega_0) = p.omega_0 else { continue };
        let omega = grid(omega_0, arch_span.min(hz_to_angular(400e6)), opts.points);
        let bg = background_for(opts.with_background, omega[opts.points / 2], omega[opts.points - 1] - omega[0]);
        let trace = notch_trace(&omega, omega_0, kappa_i, kappa_e, &bg, opts.noise_sigma, &mut rng);
        let coil = cfg.pipeline.coil_offset_a + cfg.pipeline.coil_period_a * p.phi_ext;
        let meta = TraceMeta {
            t_s_k: Some(t_ref),
            coil_current_a: Some(coil),
            ..Default::default()
        };
        let name = format!("flux_{i:03}.csv");
        write_trace(&out.join(&name), &trace, Some(&meta))?;
        files.push(name);
    }
    write_truth(
        out,
        &Truth {
            scenario: "flux-sweep",
            seed,
            device: &cfg.device.name,
            noise_sigma: opts.noise_sigma,
            values: serde_json::json!({
                "l_j0_h": squid.l_j0(),
                "l_lin_h": squid.l_lin,
                "i_0_a": squid.i_0,
                "beta_l": squid.beta_l(),
                "period_a_per_phi0": cfg.pipeline.coil_period_a,
                "offset_a": cfg.pipeline.coil_offset_a,
                "f_bare_hz": angular_to_hz(omega_b),
            }),
        },
    )?;
    Ok(files)
}

fn temperature_sweep(cfg: &RunConfig, opts: &SimOptions, seed: u64, out: &Path) -> Result<Vec<String>> {
    if opts.t_steps < 4 || !(opts.t_max > opts.t_min) {
        return Err(CliError::Usage(
            "at --t-steps/--t-min/--t-max: need an increasing grid of at least 4 points".to_string(),
        ));
    }
    let mut rng = NoiseRng::new(seed);
    let film = cfg.film();
    let thermal = cfg.constriction_thermal();
    let c_tot = cfg.device.c_tot_f;
    let kappa_e_b = hz_to_angular(cfg.device.linewidths.kappa_e_b_hz);

    // Quasiparticle prefactor: taken from the config when set, otherwise
    // derived from the tabulated internal linewidth at the reference point.
    let a_kappa = if cfg.device.thermal.a_kappa > 0.0 {
        cfg.device.thermal.a_kappa
    } else {
        let t_ref = cfg.device.t_ref_k;
        let w = resonance_at_temperature(t_ref, &film, c_tot)?;
        let unit = quasiparticle_linewidth_internal(t_ref, &film, 1.0, w)?;
        hz_to_angular(cfg.device.linewidths.kappa_i_b_hz) / unit
    };

    let ts: Vec<f64> = (0..opts.t_steps)
        .map(|i| opts.t_min + (opts.t_max - opts.t_min) * i as f64 / (opts.t_steps - 1) as f64)
        .collect();

    let mut files = Vec::new();
    // Pre-cut traces: omega_b(T) with quasiparticle broadening.
    for (i, &t) in ts.iter().enumerate() {
        let omega_b = resonance_at_temperature(t, &film, c_tot)?;
        let kappa_i = quasiparticle_linewidth_internal(t, &film, a_kappa, omega_b)?;
        let span = 20.0 * (kappa_i + kappa_e_b);
        let omega = grid(omega_b, span, opts.points);
        let bg = background_for(opts.with_background, omega_b, span);
        let trace = notch_trace(&omega, omega_b, kappa_i, kappa_e_b, &bg, opts.noise_sigma, &mut rng);
        let name = format!("precut_{i:03}.csv");
        write_trace(&out.join(&name), &trace, Some(&TraceMeta { t_s_k: Some(t), ..Default::default() }))?;
        files.push(name);
    }

    // Value series for the junction observables, with noise proportional
    // to the trace noise level.
    let i0_series: Vec<(f64, f64)> = ts
        .iter()
        .filter(|&&t| t < thermal.t_cc)
        .map(|&t| {
            let i0 = bardeen_critical_current(t, thermal.i_c, thermal.t_cc).unwrap();
            (t, i0 * (1.0 + opts.noise_sigma * rng.standard_normal()))
        })
        .collect();
    write_series(&out.join("critical_current.csv"), "critical_current", &i0_series)?;
    files.push("critical_current.csv".to_string());

    let llin_series: Vec<(f64, f64)> = ts
        .iter()
        .filter(|&&t| t < thermal.t_cc)
        .map(|&t| {
            let l = llin_vs_temperature(t, &thermal).unwrap();
            (t, l * (1.0 + opts.noise_sigma * rng.standard_normal()))
        })
        .collect();
    write_series(&out.join("linear_inductance.csv"), "linear_inductance", &llin_series)?;
    files.push("linear_inductance.csv".to_string());

    write_truth(
        out,
        &Truth {
            scenario: "temperature-sweep",
            seed,
            device: &cfg.device.name,
            noise_sigma: opts.noise_sigma,
            values: serde_json::json!({
                "lambda0_m": film.lambda0,
                "t_c_k": film.t_c,
                "c_tot_f": c_tot,
                "a_kappa": a_kappa,
                "i_c_a": thermal.i_c,
                "t_cc_k": thermal.t_cc,
                "l_off_h": thermal.l_off,
                "l_lin0_h": thermal.l_lin0,
            }),
        },
    )?;
    Ok(files)
}

fn two_tone(cfg: &RunConfig, opts: &SimOptions, seed: u64, out: &Path) -> Result<Vec<String>> {
    if opts.power_steps < 4 || !(opts.power_max_dbm > opts.power_min_dbm) {
        return Err(CliError::Usage(
            "at --power-steps/--power-min/--power-max: need at least 4 increasing powers"
                .to_string(),
        ));
    }
    let mut rng = NoiseRng::new(seed);
    let t_ref = cfg.device.t_ref_k;
    let circuit = cfg.circuit_at(t_ref)?;
    let squid = cfg.squid_ref()?;
    let omega_b = cfg.omega_b_at(t_ref)?;
    let phi = 0.5 * (opts.flux_min + opts.flux_max);
    let res = squidmw_core::flux::resonance_at_flux(&circuit, &squid, omega_b, phi, phi)?;
    let omega_0 = res
        .omega_0
        .ok_or_else(|| CliError::Data(format!("no real resonance at phi_ext = {phi}")))?;
    let kappa_i = hz_to_angular(cfg.device.linewidths.kappa_i_hz);
    let kappa_e = cfg.kappa_e();
    let kappa_0 = kappa_i + kappa_e;
    let kerr = kerr_at_flux(&circuit, &squid, phi)?.k;
    let mode = CavityMode {
        omega_c: omega_0,
        kappa: kappa_0,
        kappa_e,
        kerr,
        kappa_nl: hz_to_angular(opts.kappa_nl_hz),
    };
    let delta_p = 0.75 * kappa_0;
    let omega_p = omega_0 + delta_p;
    let span = 24.0 * kappa_0;
    let omega = grid(omega_0, span, opts.points);
    let bg = background_for(opts.with_background, omega_0, span);

    // Unpumped reference resonance.
    let mut files = Vec::new();
    let unpumped = notch_trace(&omega, omega_0, kappa_i, kappa_e, &bg, opts.noise_sigma, &mut rng);
    write_trace(
        &out.join("two_tone_unpumped.csv"),
        &unpumped,
        Some(&TraceMeta { t_s_k: Some(t_ref), ..Default::default() }),
    )?;
    files.push("two_tone_unpumped.csv".to_string());

    let mut truth_points = Vec::new();
    for k in 0..opts.power_steps {
        let dbm = opts.power_min_dbm
            + (opts.power_max_dbm - opts.power_min_dbm) * k as f64 / (opts.power_steps - 1) as f64;
        let power_w = cfg.pump_power_on_chip_w(dbm);
        let flux = power_w / (HBAR * omega_p);
        let st = steady_state(&mode, delta_p, flux)?;
        let n_c = BranchPolicy::FollowFromBelow.select(&st);
        let (shift, kappa_p) = pump_shift(&mode, delta_p, n_c)?;
        let mut trace = two_tone_s21(&mode, (omega_p, n_c), &omega)?;
        // The dressed response rides on the instrument background plus a
        // leaked pump spike.
        let s21: Vec<Complex64> = trace
            .omega
            .iter()
            .zip(&trace.s21)
            .map(|(&w, s)| {
                let f = Complex64::new(1.0, 0.0) - s;
                let mut v = bg.apply(w, f);
                if opts.noise_sigma > 0.0 {
                    v += rng.complex_noise(opts.noise_sigma);
                }
                v
            })
            .collect();
        trace = ComplexTrace::new(trace.omega.clone(), s21).expect("sorted grid");
        let pump_bin = trace.omega.iter().position(|&w| w >= omega_p).unwrap_or(0);
        trace.s21[pump_bin] += Complex64::new(25.0, -10.0);

        let name = format!("two_tone_{k:03}.csv");
        write_trace(
            &out.join(&name),
            &trace,
            Some(&TraceMeta {
                t_s_k: Some(t_ref),
                pump_freq_hz: Some(angular_to_hz(omega_p)),
                pump_power_dbm: Some(dbm),
                ..Default::default()
            }),
        )?;
        files.push(name);
        truth_points.push(serde_json::json!({
            "generator_power_dbm": dbm,
            "n_c": n_c,
            "shift_hz": angular_to_hz(shift),
            "kappa_p_hz": angular_to_hz(kappa_p),
        }));
    }
    write_truth(
        out,
        &Truth {
            scenario: "two-tone",
            seed,
            device: &cfg.device.name,
            noise_sigma: opts.noise_sigma,
            values: serde_json::json!({
                "phi_ext": phi,
                "f0_hz": angular_to_hz(omega_0),
                "kappa_0_hz": angular_to_hz(kappa_0),
                "kerr_hz": angular_to_hz(kerr),
                "kappa_nl_hz": opts.kappa_nl_hz,
                "pump_freq_hz": angular_to_hz(omega_p),
                "points": truth_points,
            }),
        },
    )?;
    Ok(files)
}

fn calibration(cfg: &RunConfig, opts: &SimOptions, seed: u64, out: &Path) -> Result<Vec<String>> {
    if opts.repeats < 50 {
        return Err(CliError::Usage(format!(
            "at --repeats: the SNR estimate needs at least 50 repeats, got {}",
            opts.repeats
        )));
    }
    let mut rng = NoiseRng::new(seed);
    let cal = cfg.noise_calibration();
    let p_gen_dbm = 0.0;
    let omega: Vec<f64> = (0..opts.points)
        .map(|i| hz_to_angular(3.9e9 + 1.2e9 * i as f64 / (opts.points - 1) as f64))
        .collect();
    let sigma: Vec<f64> = omega
        .iter()
        .map(|&w| {
            let floor_dbm = hemt_noise_floor(w, &cal).unwrap().0;
            let received = p_gen_dbm + cfg.calibration.attenuation_db - cal.post_sample_loss_db;
            10f64.powf((floor_dbm - received) / 20.0)
        })
        .collect();

    let mut files = Vec::new();
    for r in 0..opts.repeats {
        let s21: Vec<Complex64> = omega
            .iter()
            .zip(&sigma)
            .map(|(_, &s)| Complex64::new(1.0, 0.0) + rng.complex_noise(s))
            .collect();
        let trace = ComplexTrace::new(omega.clone(), s21).expect("sorted grid");
        let name = format!("cal_{r:03}.csv");
        write_trace(
            &out.join(&name),
            &trace,
            Some(&TraceMeta {
                t_s_k: Some(cfg.calibration.t_s_k),
                vna_power_dbm: Some(p_gen_dbm),
                f_ifbw_hz: Some(cfg.calibration.f_ifbw_hz),
                ..Default::default()
            }),
        )?;
        files.push(name);
    }
    write_truth(
        out,
        &Truth {
            scenario: "calibration",
            seed,
            device: &cfg.device.name,
            noise_sigma: opts.noise_sigma,
            values: serde_json::json!({
                "attenuation_db": cfg.calibration.attenuation_db,
                "generator_power_dbm": p_gen_dbm,
            }),
        },
    )?;
    Ok(files)
}
