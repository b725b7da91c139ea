use cqnc_core::oracle::{spectrum_from_statespace, LinearSystem, NoiseCorrelations};
use cqnc_core::response::{chi_m, chi_mech_loaded, compose_rigidity, decompose_rigidity, rigidity_cqnc_general, rigidity_free};
use cqnc_core::spectra::{noise_spectrum_balanced, noise_spectrum_free};
use cqnc_core::units::{rescale_force_spectrum, torque_sensitivity};
use cqnc_core::{AncillaCoupling, Complex64, SIContext, SystemParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (1e-4..1e-2f64, 5e-3..0.5f64, prop_oneof![-2.0..-0.2f64, 0.2..2.0f64], 0.01..0.4f64, 0.0..100.0f64).prop_map(
        |(gamma_m, kappa_b, delta_b, big_g, n_th)| SystemParams { omega_m: 1.0, gamma_m, kappa_b, delta_b, big_g, n_th },
    )
}

fn ancilla() -> impl Strategy<Value = AncillaCoupling> {
    (0.0..0.4f64, 0.0..0.4f64, prop_oneof![-2.0..-0.2f64, 0.2..2.0f64], 1e-4..0.1f64)
        .prop_map(|(g1, g2, delta_c, kappa_c)| AncillaCoupling { g1, g2, delta_c, kappa_c })
}

proptest! {
    #[test]
    fn rigidity_round_trip(w in 0.05..3.0f64, re in -1.0..1.0f64, im in -1.0..1.0f64) {
        let sigma = Complex64::new(re, im);
        let (d, g) = decompose_rigidity(w, sigma, 1.0);
        let back = compose_rigidity(w, d, g, 1.0);
        prop_assert!((back - sigma).norm() <= 1e-12 * sigma.norm().max(1e-12));
    }

    #[test]
    fn loaded_minus_bare_is_rigidity(p in params(), w in 0.05..3.0f64) {
        let lhs = chi_mech_loaded(w, &p).unwrap().value.inv() - chi_m(w, &p).value.inv();
        let sigma = rigidity_free(w, &p).value;
        prop_assert!((lhs - sigma).norm() <= 1e-12 * sigma.norm().max(1.0));
    }

    #[test]
    fn spectra_nonnegative(p in params(), a in ancilla(), w in 0.05..3.0f64) {
        prop_assert!(noise_spectrum_free(w, &p).unwrap().total >= 0.0);
        let sys = LinearSystem::controlled(&p, &a, 0.0);
        prop_assert!(spectrum_from_statespace(&sys, &NoiseCorrelations::vacuum(&sys, p.s_th()), w).unwrap() >= 0.0);
        let bal = AncillaCoupling { g2: a.g1, ..a };
        for v in noise_spectrum_balanced(w, &p, &bal).unwrap().components.values() {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn general_rigidity_without_ancilla_is_free(p in params(), a in ancilla(), w in 0.05..3.0f64) {
        let off = AncillaCoupling { g1: 0.0, g2: 0.0, ..a };
        let x = rigidity_cqnc_general(w, &p, &off).unwrap().value;
        let y = rigidity_free(w, &p).value;
        prop_assert!((x - y).norm() <= 1e-12 * y.norm());
    }

    #[test]
    fn rescale_is_linear(s in 0.0..1e3f64, t in 1e-6..1e3f64, k in 0.0..10.0f64, mass in 1e-18..1e-9f64, wm in 1e3..1e9f64) {
        let ctx = SIContext::new(mass, wm);
        let lin = rescale_force_spectrum(k * s + t, &ctx);
        let sum = k * rescale_force_spectrum(s, &ctx) + rescale_force_spectrum(t, &ctx);
        prop_assert!((lin - sum).abs() <= 1e-12 * lin);
        let r = rescale_force_spectrum(s, &ctx) / rescale_force_spectrum(t, &ctx);
        prop_assert!((r - s / t).abs() <= 1e-14 * (s / t).max(1e-300));
    }

    #[test]
    fn torque_is_square_root(s in 1e-6..1e3f64, arm in 1e-7..1e-3f64) {
        let ctx = SIContext { mirror_arm_r: Some(arm), ..SIContext::new(4.27e-16, 3.08e7) };
        let a = torque_sensitivity(s, &ctx).unwrap();
        let b = torque_sensitivity(4.0 * s, &ctx).unwrap();
        prop_assert!((b / a - 2.0).abs() < 1e-14);
    }
}
