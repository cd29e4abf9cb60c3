//! Kerr-model equivalences: closed form vs coefficient pipeline, and the
//! Taylor coefficients against numerical differentiation of the
//! constraint-solved potential.

mod common;

use common::{potential_coefficients_oracle, rel_diff};
use squidmw_core::circuit::CircuitParams;
use squidmw_core::flux::{solve_total_flux, SquidParams};
use squidmw_core::kerr::{
    kerr_at_flux, kerr_from_coefficients, kerr_simplified, potential_coefficients,
};
use squidmw_core::presets::all_devices;

#[test]
fn oracle_self_check_on_known_series() {
    // d^3/dx^3 of sin(a x) at 0 is -a^3 through the same machinery.
    for a in [0.7, 1.3, 2.1] {
        let coeffs = common::chebyshev_coefficients(|x: f64| (a * x).sin(), 0.0, 0.3, 24);
        let d1 = common::chebyshev_derivative(&coeffs);
        let d3 = common::chebyshev_derivative(&common::chebyshev_derivative(&d1));
        let got1 = common::chebyshev_eval(&d1, 0.0) / 0.3;
        let got3 = common::chebyshev_eval(&d3, 0.0) / 0.3f64.powi(3);
        assert!((got1 - a).abs() < 1e-9, "first derivative {got1} vs {a}");
        assert!((got3 + a.powi(3)).abs() < 1e-7 * a.powi(3), "third derivative {got3}");
    }
}

#[test]
fn taylor_coefficients_match_finite_difference_oracle() {
    // zeta in [0, 2], |phi0| <= 1.3; c4 agreement to 1e-5 relative.
    let zetas = [0.0, 0.25, 0.5, 0.9, 1.3, 1.7, 2.0];
    let phi0s = [-1.3, -1.0, -0.6, -0.2, 0.0, 0.3, 0.7, 1.0, 1.3];
    for &zeta in &zetas {
        for &phi0 in &phi0s {
            let closed = potential_coefficients(zeta, phi0).unwrap();
            let (c2_oracle, c4_oracle) = potential_coefficients_oracle(zeta, phi0);
            assert!(
                rel_diff(closed.c2, c2_oracle) < 1e-7,
                "c2 at (zeta={zeta}, phi0={phi0}): {} vs oracle {}",
                closed.c2,
                c2_oracle
            );
            assert!(
                rel_diff(closed.c4, c4_oracle) < 1e-5,
                "c4 at (zeta={zeta}, phi0={phi0}): {} vs oracle {}",
                closed.c4,
                c4_oracle
            );
        }
    }
}

#[test]
fn published_point_c4_oracle() {
    let closed = potential_coefficients(0.5, 1.0).unwrap();
    let (_, c4_oracle) = potential_coefficients_oracle(0.5, 1.0);
    assert!(rel_diff(closed.c4, c4_oracle) < 1e-5);
}

#[test]
fn closed_form_equals_coefficient_pipeline_over_grid() {
    // The pipeline (c2, c4, participation cubed) and the closed-form
    // screening expression agree to 1e-10 relative over the whole grid.
    for dev in all_devices() {
        let circuit = dev.circuit_at(2.5).unwrap();
        let squid = dev.squid_ref().unwrap();
        let zeta = squid.l_arm() / squid.l_j0();
        let mut phi0 = -1.3f64;
        while phi0 <= 1.3 {
            if phi0.cos() > 1e-6 {
                let e = potential_coefficients(zeta, phi0).unwrap();
                let pipeline = kerr_from_coefficients(&circuit, &squid, &e).unwrap();
                let closed = closed_form_at_phase(&circuit, &squid, phi0);
                assert!(
                    rel_diff(pipeline, closed) < 1e-10,
                    "{}: phi0 = {phi0}: {pipeline} vs {closed}",
                    dev.name
                );
            }
            phi0 += 0.05;
        }
    }
}

fn closed_form_at_phase(circuit: &CircuitParams, squid: &SquidParams, phi0: f64) -> f64 {
    use squidmw_core::consts::{E_CHARGE, HBAR};
    let l_j = squid.l_j0() / phi0.cos();
    let l_arm = squid.l_arm();
    let lambda = l_arm / (l_arm + l_j);
    let participation = l_j / (2.0 * circuit.l + squid.l_lin + l_j);
    -E_CHARGE * E_CHARGE / (2.0 * HBAR * circuit.c_tot())
        * participation.powi(3)
        * (1.0 + 3.0 * lambda * phi0.tan().powi(2))
}

#[test]
fn screening_correction_grows_toward_a_factor_of_four() {
    // Ratio of the full expression to the plain participation form along
    // the observable arch of the intermediate device.
    let dev = squidmw_core::presets::device_3d1();
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let beta = squid.beta_l();

    let ratio_at = |phi_ext: f64| -> f64 {
        let flux = squidmw_core::flux::solve_central_on_branch(phi_ext, beta, 0).unwrap();
        let full = squidmw_core::kerr::kerr_at_flux_point(&circuit, &squid, &flux).unwrap().k;
        let phase = flux.junction_phase();
        let simple = closed_form_at_phase(&circuit, &squid, phase)
            / (1.0 + 3.0 * squid.l_arm() / (squid.l_arm() + squid.l_j0() / phase.cos())
                * phase.tan().powi(2));
        full / simple
    };
    let mut prev = 1.0;
    let mut phi = 0.0;
    while phi <= 0.65 {
        let r = ratio_at(phi);
        assert!(r >= prev - 1e-12, "ratio not growing at {phi}");
        prev = r;
        phi += 0.05;
    }
    let edge = ratio_at(0.65);
    assert!((3.5..5.5).contains(&edge), "ratio at the arch edge: {edge}");
}

#[test]
fn kerr_sign_and_magnitudes_across_devices() {
    // Sweetspot magnitudes: the thin-film circuits carry hundreds of Hz to
    // kHz, the thick 2D device around a hertz.
    let per_device = [(0.3, 3.0), (100.0, 500.0), (500.0, 5000.0)];
    for (dev, (lo, hi)) in all_devices().iter().zip(per_device) {
        let circuit = dev.circuit_at(2.5).unwrap();
        let squid = dev.squid_ref().unwrap();
        let k = kerr_at_flux(&circuit, &squid, 0.0).unwrap().k;
        let k_hz = (k / std::f64::consts::TAU).abs();
        assert!(k < 0.0, "{}", dev.name);
        assert!(
            (lo..hi).contains(&k_hz),
            "{}: |K|/2pi = {k_hz} Hz outside [{lo}, {hi}]",
            dev.name
        );
        // Simplified form is weaker in magnitude away from the sweetspot.
        for phi in [0.2, 0.4] {
            let full = kerr_at_flux(&circuit, &squid, phi).unwrap().k;
            let simple = kerr_simplified(&circuit, &squid, phi).unwrap().k;
            assert!(simple.abs() <= full.abs());
        }
    }

    // Along its arch the intermediate device climbs from hundreds of Hz
    // into the kHz range.
    let dev = &all_devices()[1];
    let circuit = dev.circuit_at(2.5).unwrap();
    let squid = dev.squid_ref().unwrap();
    let flux = squidmw_core::flux::solve_central_on_branch(0.5, squid.beta_l(), 0).unwrap();
    let k_edge = squidmw_core::kerr::kerr_at_flux_point(&circuit, &squid, &flux).unwrap().k;
    assert!(
        (k_edge / std::f64::consts::TAU).abs() > 900.0,
        "|K| at large flux: {:.0} Hz",
        (k_edge / std::f64::consts::TAU).abs()
    );
}

#[test]
fn kerr_negative_on_stable_branch_for_all_devices() {
    for dev in all_devices() {
        let circuit = dev.circuit_at(2.5).unwrap();
        let squid = dev.squid_ref().unwrap();
        let beta = squid.beta_l();
        let mut phi = 0.0;
        loop {
            let flux = match squidmw_core::flux::solve_central_on_branch(phi, beta, 0) {
                Ok(f) => f,
                Err(_) => break,
            };
            if flux.stability != squidmw_core::flux::FluxStability::Stable {
                break;
            }
            if flux.junction_phase().cos() > 1e-3 {
                let k = squidmw_core::kerr::kerr_at_flux_point(&circuit, &squid, &flux)
                    .unwrap()
                    .k;
                assert!(k < 0.0, "{} at phi_ext = {phi}", dev.name);
            }
            phi += 0.02;
        }
        let _ = solve_total_flux(0.0, beta, 0.0).unwrap();
    }
}
