//! Round-trip identities: every fit recovers the parameters of noiseless
//! synthetic data generated by the corresponding forward model, and stays
//! within statistical bounds under complex Gaussian noise.

mod common;

use common::{fit_circle, rel_diff, GaussianSource};
use num_complex::Complex64;
use squidmw_core::circuit::CircuitParams;
use squidmw_core::consts::hz_to_angular;
use squidmw_core::fit::{
    analyze_trace, correct_trace, fit_resonance, fit_thermal, fit_tuning_curve,
    BackgroundModel, CorrectionPolicy, DomainPolicy, FluxAxis, SeedPolicy, ThermalFitParams,
    ThermalSeries,
};
use squidmw_core::flux::{solve_central_on_branch, SquidParams};
use squidmw_core::presets::{device_2d, device_3d1, device_3d2};
use squidmw_core::thermal::{
    bardeen_critical_current, llin_vs_temperature, resonance_at_temperature, FilmParams,
};
use squidmw_core::trace::ComplexTrace;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn grid_around(omega_0: f64, span: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| omega_0 - 0.5 * span + span * i as f64 / (n - 1) as f64)
        .collect()
}

fn synth_notch(
    omega: &[f64],
    omega_0: f64,
    kappa_i: f64,
    kappa_e: f64,
    bg: &BackgroundModel,
    noise_sigma: f64,
    seed: u64,
) -> ComplexTrace {
    let mut noise = GaussianSource::new(seed);
    let s21 = omega
        .iter()
        .map(|&w| {
            let kappa = kappa_i + kappa_e;
            let f = kappa_e / Complex64::new(kappa, 2.0 * (w - omega_0));
            let mut s = bg.apply(w, f);
            if noise_sigma > 0.0 {
                s += noise.next_complex(noise_sigma);
            }
            s
        })
        .collect();
    ComplexTrace::new(omega.to_vec(), s21).unwrap()
}

#[test]
fn noiseless_notch_recovery_to_1e8() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let omega = grid_around(omega_0, TWO_PI * 120e6, 1201);
    let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &BackgroundModel::identity(), 0.0, 0);
    let fit = fit_resonance(&trace, SeedPolicy::Automatic).unwrap();
    assert!(rel_diff(fit.omega_0, omega_0) < 1e-10);
    assert!(rel_diff(fit.kappa_i, kappa_i) < 1e-8);
    assert!(rel_diff(fit.kappa_e, kappa_e) < 1e-8);
    assert!(fit.theta.abs() < 1e-8);
}

#[test]
fn noisy_notch_monte_carlo_frequency_bound() {
    // SNR 100 (sigma = 0.01 on a unit trace) on a deep notch: over 100
    // seeds the frequency error stays below kappa/1000. The information
    // bound scales with the dip depth, so this uses the strongly coupled
    // (pre-cut-like) linewidths and a grid dense across the linewidth.
    let omega_0 = hz_to_angular(4.308e9);
    let (kappa_i, kappa_e) = (TWO_PI * 73e3, TWO_PI * 1.2e6);
    let kappa = kappa_i + kappa_e;
    let omega = grid_around(omega_0, 8.0 * kappa, 4001);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let trace = synth_notch(
            &omega,
            omega_0,
            kappa_i,
            kappa_e,
            &BackgroundModel::identity(),
            0.01,
            seed,
        );
        let fit = fit_resonance(&trace, SeedPolicy::Automatic).unwrap();
        worst = worst.max((fit.omega_0 - omega_0).abs());
    }
    assert!(worst < kappa / 1e3, "worst frequency error {worst:.3e} vs {:.3e}", kappa / 1e3);
}

#[test]
fn swapped_seeds_converge_to_same_minimum() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let omega = grid_around(omega_0, TWO_PI * 100e6, 801);
    let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &BackgroundModel::identity(), 0.0, 0);
    let a = fit_resonance(
        &trace,
        SeedPolicy::Explicit { omega_0, kappa_i, kappa_e },
    )
    .unwrap();
    let b = fit_resonance(
        &trace,
        SeedPolicy::Explicit { omega_0, kappa_i: kappa_e, kappa_e: kappa_i },
    )
    .unwrap();
    assert!(rel_diff(a.omega_0, b.omega_0) < 1e-10);
    assert!(rel_diff(a.kappa_i, b.kappa_i) < 1e-6);
    assert!(rel_diff(a.kappa_e, b.kappa_e) < 1e-6);
}

fn random_background(noise: &mut GaussianSource, omega_mid: f64, omega_span: f64) -> BackgroundModel {
    // Amplitude varying by tens of percent over the window, a phase winding
    // of a few radians, and a Fano angle up to ~0.4 rad.
    let b0 = 0.8 + 0.1 * noise.next().abs();
    let b1 = 0.1 * noise.next();
    let b2 = 0.05 * noise.next();
    let p0 = 0.5 * noise.next();
    let p1 = 1.5 * noise.next();
    let theta = 0.2 * noise.next();
    let (c, s) = (omega_mid, 0.5 * omega_span);
    BackgroundModel {
        a0: b0 - b1 * c / s + b2 * c * c / (s * s),
        a1: b1 / s - 2.0 * b2 * c / (s * s),
        a2: b2 / (s * s),
        phi0: p0 - p1 * c / s,
        phi1: p1 / s,
        theta,
    }
}

#[test]
fn background_correction_recovers_model_parameters() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let span = TWO_PI * 200e6;
    let omega = grid_around(omega_0, span, 1601);
    let mut rng = GaussianSource::new(7);
    for _ in 0..8 {
        let bg = random_background(&mut rng, omega_0, span);
        let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &bg, 0.0, 0);
        let corrected = correct_trace(&trace, None, &CorrectionPolicy::default()).unwrap();
        assert!(corrected.resonance_found);
        let got = corrected.background;
        for (have, want) in [
            (got.amplitude(omega[0]), bg.amplitude(omega[0])),
            (got.amplitude(omega_0), bg.amplitude(omega_0)),
            (got.amplitude(*omega.last().unwrap()), bg.amplitude(*omega.last().unwrap())),
        ] {
            assert!(rel_diff(have, want) < 0.01, "amplitude {have} vs {want}");
        }
        assert!((got.theta - bg.theta).abs() < 1e-3, "theta {} vs {}", got.theta, bg.theta);
        // Phase polynomial compared through the winding across the window.
        let wind_have = got.phi1 * span;
        let wind_want = bg.phi1 * span;
        assert!((wind_have - wind_want).abs() < 0.02, "{wind_have} vs {wind_want}");
    }
}

#[test]
fn identity_background_correction_is_exact() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let omega = grid_around(omega_0, TWO_PI * 150e6, 1201);
    let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &BackgroundModel::identity(), 0.0, 0);
    let corrected = correct_trace(&trace, None, &CorrectionPolicy::default()).unwrap();
    let max_dev = corrected
        .trace
        .s21
        .iter()
        .zip(&trace.s21)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    assert!(max_dev < 1e-10, "max deviation {max_dev}");
}

#[test]
fn ideal_notch_traces_a_circle_with_bounded_phase_excursion() {
    // The linear notch response is a circle of diameter kappa_e/kappa
    // anchored at unity; its largest phase excursion follows from that
    // geometry as asin(r/(1 - r)).
    let mode = squidmw_core::response::CavityMode {
        omega_c: hz_to_angular(4.197e9),
        kappa: TWO_PI * 7.9e6,
        kappa_e: TWO_PI * 1.4e6,
        kerr: 0.0,
        kappa_nl: 0.0,
    };
    let grid = grid_around(mode.omega_c, 60.0 * mode.kappa, 6001);
    let trace = squidmw_core::response::s21_linear(&grid, &mode).unwrap();
    let pts: Vec<(f64, f64)> = trace.s21.iter().map(|s| (s.re, s.im)).collect();
    let (cx, cy, r) = fit_circle(&pts);
    let d_expected = mode.kappa_e / mode.kappa;
    assert!((2.0 * r - d_expected).abs() / d_expected < 1e-3, "diameter {}", 2.0 * r);
    assert!(((cx + r) - 1.0).abs() < 1e-3 && cy.abs() < 1e-3, "anchor ({cx}, {cy})");
    let max_phase = trace.s21.iter().map(|s| s.arg().abs()).fold(0.0f64, f64::max);
    let expected = (r / (1.0 - r)).asin();
    assert!(
        (max_phase - expected).abs() / expected < 0.01,
        "phase excursion {max_phase} vs {expected}"
    );
}

#[test]
fn corrected_circle_has_anchor_at_unity_and_expected_diameter() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let kappa = kappa_i + kappa_e;
    let span = TWO_PI * 200e6;
    let omega = grid_around(omega_0, span, 1601);
    let mut rng = GaussianSource::new(11);
    let bg = random_background(&mut rng, omega_0, span);
    let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &bg, 0.0, 0);
    let corrected = correct_trace(&trace, None, &CorrectionPolicy::default()).unwrap();
    let pts: Vec<(f64, f64)> = corrected.trace.s21.iter().map(|s| (s.re, s.im)).collect();
    let (cx, cy, r) = fit_circle(&pts);
    let d = kappa_e / kappa;
    assert!((2.0 * r - d).abs() / d < 0.01, "diameter {} vs {}", 2.0 * r, d);
    // Anchor (off-resonant point) at 1 + 0i: center sits at 1 - r.
    assert!(((cx + r) - 1.0).abs() < 0.01, "anchor x {}", cx + r);
    assert!(cy.abs() < 0.01, "anchor y {cy}");
}

#[test]
fn background_ensemble_leaves_extracted_parameters_invariant() {
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let span = TWO_PI * 200e6;
    let omega = grid_around(omega_0, span, 1601);
    let mut rng = GaussianSource::new(23);
    for trial in 0..12 {
        let bg = random_background(&mut rng, omega_0, span);
        let trace = synth_notch(&omega, omega_0, kappa_i, kappa_e, &bg, 0.0, 0);
        let (_, fit) = analyze_trace(&trace, None, &CorrectionPolicy::default()).unwrap();
        assert!(rel_diff(fit.omega_0, omega_0) < 1e-3, "trial {trial}");
        assert!(rel_diff(fit.kappa_i, kappa_i) < 1e-3, "trial {trial}: {}", fit.kappa_i);
        assert!(rel_diff(fit.kappa_e, kappa_e) < 1e-3, "trial {trial}: {}", fit.kappa_e);
    }
}

#[test]
fn reference_division_then_fit_matches_direct_synthesis() {
    // A measured reference trace (resonance-free background sweep) divides
    // off multiplicative structure beyond the quadratic model.
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let span = TWO_PI * 200e6;
    let omega = grid_around(omega_0, span, 1601);
    // Wiggly background: a standing-wave ripple on top of a polynomial.
    let ripple = |w: f64| 1.0 + 0.2 * ((w - omega[0]) / span * 9.0).sin();
    let reference: Vec<Complex64> = omega
        .iter()
        .map(|&w| Complex64::from_polar(ripple(w), 0.3 * ((w - omega[0]) / span * 5.0).cos()))
        .collect();
    let reference = ComplexTrace::new(omega.clone(), reference).unwrap();
    let mut rng = GaussianSource::new(31);
    let bg = random_background(&mut rng, omega_0, span);
    let ideal = synth_notch(&omega, omega_0, kappa_i, kappa_e, &bg, 0.0, 0);
    let raw = ComplexTrace::new(
        omega.clone(),
        ideal.s21.iter().zip(&reference.s21).map(|(a, b)| a * b).collect(),
    )
    .unwrap();
    let (_, fit) = analyze_trace(&raw, Some(&reference), &CorrectionPolicy::default()).unwrap();
    assert!(rel_diff(fit.omega_0, omega_0) < 1e-4);
    assert!(rel_diff(fit.kappa_i, kappa_i) < 1e-2);
    assert!(rel_diff(fit.kappa_e, kappa_e) < 1e-2);
}

#[test]
fn resonance_free_trace_is_flagged() {
    let omega = grid_around(hz_to_angular(4.2e9), TWO_PI * 100e6, 401);
    let s21: Vec<Complex64> = omega.iter().map(|_| Complex64::new(0.93, 0.02)).collect();
    let trace = ComplexTrace::new(omega, s21).unwrap();
    let corrected = correct_trace(&trace, None, &CorrectionPolicy::default()).unwrap();
    assert!(!corrected.resonance_found);
}

fn arch_points(
    circuit: &CircuitParams,
    squid: &SquidParams,
    omega_b: f64,
    phis: &[f64],
    branch: i32,
) -> Vec<(f64, f64)> {
    phis.iter()
        .map(|&phi| {
            let flux = solve_central_on_branch(phi, squid.beta_l(), branch).unwrap();
            let cos = flux.junction_phase().cos();
            let w = omega_b / (1.0 + (squid.l_lin + squid.l_j0() / cos) / (2.0 * circuit.l)).sqrt();
            (phi, w)
        })
        .collect()
}

#[test]
fn flux_fit_noiseless_identity() {
    let dev = device_3d2();
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let omega_b = dev.omega_b_at(2.5).unwrap();
    let phis: Vec<f64> = (0..81).map(|i| -0.45 + 0.9 * i as f64 / 80.0).collect();
    let pts = arch_points(&circuit, &squid, omega_b, &phis, 0);
    let fit = fit_tuning_curve(&pts, &circuit, omega_b, FluxAxis::Flux, None).unwrap();
    assert!(rel_diff(fit.l_j0, squid.l_j0()) < 1e-6, "L_J0 {} vs {}", fit.l_j0, squid.l_j0());
    assert!(rel_diff(fit.l_lin, squid.l_lin) < 1e-6);
    assert!(rel_diff(fit.beta_l, squid.beta_l()) < 1e-6);
    // The screening identity between the fit outputs holds exactly.
    let beta_check = (circuit.l_loop + 2.0 * fit.l_lin) / (std::f64::consts::PI * fit.l_j0);
    assert!(rel_diff(fit.beta_l, beta_check) < 1e-12);
}

#[test]
fn flux_fit_recovers_under_frequency_noise() {
    // 50 kHz frequency noise on the arch of the most tunable device: the
    // junction parameters come back within 5%.
    let dev = device_3d2();
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let omega_b = dev.omega_b_at(2.5).unwrap();
    let phis: Vec<f64> = (0..161).map(|i| -0.48 + 0.96 * i as f64 / 160.0).collect();
    let mut pts = arch_points(&circuit, &squid, omega_b, &phis, 0);
    let mut noise = GaussianSource::new(5);
    for p in pts.iter_mut() {
        p.1 += TWO_PI * 50e3 * noise.next();
    }
    let fit = fit_tuning_curve(&pts, &circuit, omega_b, FluxAxis::Flux, None).unwrap();
    assert!(rel_diff(fit.l_j0, squid.l_j0()) < 0.05, "L_J0 {} vs {}", fit.l_j0, squid.l_j0());
    assert!(rel_diff(fit.l_lin, squid.l_lin) < 0.05, "L_lin {} vs {}", fit.l_lin, squid.l_lin);
    let i_0 = squidmw_core::consts::PHI0 / (TWO_PI * fit.l_j0);
    assert!(rel_diff(i_0, squid.i_0) < 0.05);
}

#[test]
fn flux_fit_calibrates_coil_current_axis() {
    let dev = device_3d1();
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let omega_b = dev.omega_b_at(2.5).unwrap();
    let (period, offset) = (0.731e-3, 0.112e-3); // A per flux quantum, A
    let phis: Vec<f64> = (0..321).map(|i| -1.45 + 2.9 * i as f64 / 320.0).collect();
    let pts: Vec<(f64, f64)> = arch_points(
        &circuit,
        &squid,
        omega_b,
        &phis
            .iter()
            .map(|p| p - p.round())
            .collect::<Vec<_>>(),
        0,
    )
    .iter()
    .zip(&phis)
    .map(|(&(_, w), &phi)| (offset + period * phi, w))
    .collect();
    let fit = fit_tuning_curve(&pts, &circuit, omega_b, FluxAxis::CoilCurrent, None).unwrap();
    assert!(rel_diff(fit.period, period) < 1e-4, "period {} vs {period}", fit.period);
    assert!((fit.offset - offset).abs() / period < 1e-3);
    assert!(rel_diff(fit.l_j0, squid.l_j0()) < 1e-4);
    assert!(rel_diff(fit.l_lin, squid.l_lin) < 1e-4);
}

#[test]
fn hysteretic_arch_family_fits_without_mixing_branches() {
    // Two overlapping archs of the strongly screened device, labeled by
    // branch as a sweep would see them.
    let dev = device_2d();
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let omega_b = dev.omega_b_at(2.5).unwrap();
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for branch in [0i32, 1] {
        for k in 0..90 {
            let psi = -0.9 + 1.8 * k as f64 / 89.0;
            let phi = branch as f64 + psi;
            let flux = solve_central_on_branch(phi, squid.beta_l(), branch).unwrap();
            if flux.junction_phase().cos() <= 0.05 {
                continue;
            }
            let w = omega_b
                / (1.0
                    + (squid.l_lin + squid.l_j0() / flux.junction_phase().cos())
                        / (2.0 * circuit.l))
                    .sqrt();
            pts.push((phi, w));
            labels.push(branch);
        }
    }
    let mut noise = GaussianSource::new(17);
    for p in pts.iter_mut() {
        p.1 += TWO_PI * 20e3 * noise.next();
    }
    let fit =
        fit_tuning_curve(&pts, &circuit, omega_b, FluxAxis::Flux, Some(&labels)).unwrap();
    assert!(rel_diff(fit.l_j0, squid.l_j0()) < 0.05, "L_J0 {} vs {}", fit.l_j0, squid.l_j0());
    // The residual stays at the injected noise floor: no branch mixing.
    assert!(fit.residual_rms < 3.0 * TWO_PI * 20e3, "rms {}", fit.residual_rms);
}

#[test]
fn thermal_fit_bare_resonance_noiseless_identity() {
    let film = device_3d1().film;
    let c_tot = 2.404e-12;
    let grid: Vec<f64> = (0..25).map(|i| 1.6 + 4.8 * i as f64 / 24.0).collect();
    let data: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| (t, resonance_at_temperature(t, &film, c_tot).unwrap()))
        .collect();
    let fit = fit_thermal(
        &ThermalSeries::BareResonance { l_g: film.l_g, g: film.g, d_nb: film.d_nb },
        &data,
        DomainPolicy::Reject,
    )
    .unwrap();
    match fit.params {
        ThermalFitParams::BareResonance { lambda0, t_c, c_tot: c } => {
            assert!(rel_diff(lambda0, film.lambda0) < 1e-6, "lambda0 {lambda0}");
            assert!(rel_diff(t_c, film.t_c) < 1e-6, "t_c {t_c}");
            assert!(rel_diff(c, c_tot) < 1e-6, "c_tot {c}");
        }
        _ => panic!("wrong params kind"),
    }
}

#[test]
fn thermal_fit_critical_current_recovery_and_domain_policy() {
    let (i_c, t_cc) = (29.9e-6, 3.47);
    let grid: Vec<f64> = (0..9).map(|i| 2.4 + 0.05 * i as f64).collect();
    let clean: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| (t, bardeen_critical_current(t, i_c, t_cc).unwrap()))
        .collect();

    // Noiseless identity.
    let fit = fit_thermal(&ThermalSeries::CriticalCurrent, &clean, DomainPolicy::Reject).unwrap();
    match fit.params {
        ThermalFitParams::CriticalCurrent { i_c: ic, t_cc: tc } => {
            assert!(rel_diff(ic, i_c) < 1e-6);
            assert!(rel_diff(tc, t_cc) < 1e-6);
        }
        _ => panic!("wrong params kind"),
    }

    // 0.1 uA noise keeps T_cc within 2% (worst over 20 seeds).
    for seed in 0..20 {
        let mut noise = GaussianSource::new(100 + seed);
        let noisy: Vec<(f64, f64)> =
            clean.iter().map(|&(t, i)| (t, i + 0.1e-6 * noise.next())).collect();
        let fit =
            fit_thermal(&ThermalSeries::CriticalCurrent, &noisy, DomainPolicy::Reject).unwrap();
        match fit.params {
            ThermalFitParams::CriticalCurrent { t_cc: tc, .. } => {
                assert!(rel_diff(tc, t_cc) < 0.02, "seed {seed}: T_cc {tc}");
            }
            _ => unreachable!(),
        }
    }

    // A point above T_cc is rejected or masked, never silently fitted.
    let mut with_outlier = clean.clone();
    with_outlier.push((3.6, 0.4e-6));
    let err = fit_thermal(&ThermalSeries::CriticalCurrent, &with_outlier, DomainPolicy::Reject);
    assert!(err.is_err());
    let masked =
        fit_thermal(&ThermalSeries::CriticalCurrent, &with_outlier, DomainPolicy::Mask).unwrap();
    assert_eq!(masked.masked, vec![with_outlier.len() - 1]);
    match masked.params {
        ThermalFitParams::CriticalCurrent { t_cc: tc, .. } => assert!(rel_diff(tc, t_cc) < 1e-6),
        _ => unreachable!(),
    }
}

#[test]
fn thermal_fit_linear_inductance_roundtrip() {
    let th = device_3d1().thermal;
    let grid: Vec<f64> = (0..9).map(|i| 2.4 + 0.05 * i as f64).collect();
    let mut noise = GaussianSource::new(3);
    let data: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| {
            (t, llin_vs_temperature(t, &th).unwrap() * (1.0 + 2e-3 * noise.next()))
        })
        .collect();
    let fit = fit_thermal(
        &ThermalSeries::LinearInductance { t_cc: th.t_cc },
        &data,
        DomainPolicy::Reject,
    )
    .unwrap();
    match fit.params {
        ThermalFitParams::LinearInductance { l_off, l_lin0 } => {
            let have = l_off + l_lin0 / (1.0 - (2.5 / th.t_cc).powi(4));
            let want = llin_vs_temperature(2.5, &th).unwrap();
            assert!(rel_diff(have, want) < 0.01, "L_lin(2.5 K): {have} vs {want}");
        }
        _ => panic!("wrong params kind"),
    }
}

#[test]
fn thermal_fit_total_linewidth_single_parameter() {
    let film = device_3d1().film;
    let c_tot = 2.404e-12;
    let kappa_e = TWO_PI * 1.2e6;
    let a_kappa = 9.7e-15;
    let grid: Vec<f64> = (0..12).map(|i| 2.4 + 0.3 * i as f64).collect();
    let data: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| {
            let w = resonance_at_temperature(t, &film, c_tot).unwrap();
            let ki = squidmw_core::thermal::quasiparticle_linewidth_internal(t, &film, a_kappa, w)
                .unwrap();
            (t, kappa_e + ki)
        })
        .collect();
    let fit = fit_thermal(
        &ThermalSeries::TotalLinewidth { film, c_tot, kappa_e },
        &data,
        DomainPolicy::Reject,
    )
    .unwrap();
    match fit.params {
        ThermalFitParams::TotalLinewidth { a_kappa: a } => {
            assert!(rel_diff(a, a_kappa) < 1e-10, "A_kappa {a}");
        }
        _ => panic!("wrong params kind"),
    }
}

#[test]
fn fit_uncertainties_shrink_with_replication() {
    // Same noise level, 4x the points: one-sigma bounds shrink by ~2.
    let omega_0 = hz_to_angular(4.197e9);
    let (kappa_i, kappa_e) = (TWO_PI * 6.5e6, TWO_PI * 1.4e6);
    let run = |n: usize, seed: u64| -> f64 {
        let omega = grid_around(omega_0, TWO_PI * 100e6, n);
        let trace = synth_notch(
            &omega,
            omega_0,
            kappa_i,
            kappa_e,
            &BackgroundModel::identity(),
            0.01,
            seed,
        );
        let fit = fit_resonance(&trace, SeedPolicy::Automatic).unwrap();
        fit.uncertainties.unwrap()[0]
    };
    let mut ratio_sum = 0.0;
    for seed in 0..6 {
        ratio_sum += run(401, seed) / run(1601, seed);
    }
    let mean_ratio = ratio_sum / 6.0;
    assert!((mean_ratio - 2.0).abs() < 0.5, "mean uncertainty ratio {mean_ratio}");
}

#[test]
fn bare_resonance_fit_rejects_short_series() {
    let film: FilmParams = device_3d1().film;
    let data = vec![(2.4, 1.0e10), (2.5, 0.99e10), (2.6, 0.98e10)];
    assert!(fit_thermal(
        &ThermalSeries::BareResonance { l_g: film.l_g, g: film.g, d_nb: film.d_nb },
        &data,
        DomainPolicy::Reject
    )
    .is_err());
}
