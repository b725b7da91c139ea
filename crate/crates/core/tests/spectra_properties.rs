mod common;

use common::{rel, rng, system};
use cqnc_core::response::{gamma_opt_c_series, optical_spring_cqnc, optical_spring_free};
use cqnc_core::spectra::{
    linear_grid, log_grid, noise_spectrum_cqnc, noise_spectrum_free, sql_optimal_g, sql_spectrum,
};
use cqnc_core::{matched_ancilla, Components, SystemParams};

fn free_total(w: f64, p: &SystemParams) -> f64 {
    noise_spectrum_free(w, p).unwrap().total
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[test]
fn sql_is_the_minimum_over_coupling() {
    let p = SystemParams::canonical();
    for w in linear_grid(0.8, 1.2, 20) {
        let (lg, s_min) = golden_min(|lg| free_total(w, &p.with_g(lg.exp())), (1e-4f64).ln(), 2f64.ln());
        assert!(rel(sql_spectrum(w, &p), s_min) < 1e-8, "w {w}: {} {s_min}", sql_spectrum(w, &p));
        assert!(rel(sql_optimal_g(w, &p), lg.exp()) < 1e-4);
    }
}

#[test]
fn sql_is_tangent_to_every_spectrum() {
    let p = SystemParams::canonical();
    for g in [0.01, 0.05, 0.2] {
        for w in linear_grid(0.9, 1.1, 41) {
            assert!(free_total(w, &p.with_g(g)) >= sql_spectrum(w, &p) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn free_parts_scale_with_coupling() {
    for seed in 0..10 {
        let p = system(&mut rng(1000 + seed));
        let w = 0.93;
        let parts = |g: f64| noise_spectrum_free(w, &p.with_g(g)).unwrap().components.values();
        let (a, b) = (parts(p.big_g), parts(2.0 * p.big_g));
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
        assert!(rel(b[2], 4.0 * a[2]) < 1e-14);
        assert!(rel(b[3], a[3] / 4.0) < 1e-14);
    }
}

fn tied(x: f64) -> (SystemParams, cqnc_core::AncillaCoupling) {
    let p = SystemParams::canonical().with_delta_b(x);
    let mut a = matched_ancilla(&p);
    a.delta_c = x;
    (p, a)
}

#[test]
fn tied_detuning_ratio_extrema() {
    let grid = linear_grid(-1.5, 1.5, 301);
    let ratio: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let (p, a) = tied(x);
            noise_spectrum_cqnc(1.0, &p, &a).unwrap().total / free_total(1.0, &p)
        })
        .collect();
    let arg = |better: fn(f64, f64) -> bool| {
        (0..ratio.len()).fold(0, |k, j| if better(ratio[j], ratio[k]) { j } else { k })
    };
    assert!((grid[arg(|a, b| a < b)] + 1.0).abs() < 1e-9);
    assert!((grid[arg(|a, b| a > b)] - 1.0).abs() < 1e-9);
}

#[test]
fn free_spectrum_rebounds_controlled_does_not() {
    let p = SystemParams::canonical();
    let gs = log_grid(1e-3, 0.4, 200);
    let free: Vec<f64> = gs.iter().map(|&g| free_total(1.0, &p.with_g(g))).collect();
    let k = (0..free.len()).fold(0, |k, j| if free[j] < free[k] { j } else { k });
    assert!(k > 0 && k + 1 < free.len());
    assert!(free[free.len() - 1] > 2.0 * free[k]);

    let g_max = cqnc_core::stability::g_max_search(&p, &cqnc_core::CouplingRule::Matched).unwrap().g_max;
    let ctl: Vec<f64> = gs
        .iter()
        .filter(|&&g| g >= gs[k] && g < g_max)
        .map(|&g| {
            let q = p.with_g(g);
            noise_spectrum_cqnc(1.0, &q, &matched_ancilla(&q)).unwrap().total
        })
        .collect();
    for w in ctl.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn matched_damping_positive() {
    let p = SystemParams::canonical();
    for g in log_grid(1e-2, 0.3, 100) {
        let q = p.with_g(g);
        let a = matched_ancilla(&q);
        let s = optical_spring_cqnc(1.0, &q, &a).unwrap();
        assert!(s.gamma_eff > 0.0, "G {g}: {}", s.gamma_eff);
        let lead = q.gamma_m + gamma_opt_c_series(&q, &a);
        assert!(s.gamma_eff / lead > 0.5 && s.gamma_eff / lead < 2.0 || g < 0.03);
    }
}

#[test]
fn free_stiffness_positive_near_resonance() {
    // the spring shift peaks at ~G^2 / (2 kappa_b) just off resonance, so the
    // stiffness stays positive only while G^2 < 2 kappa_b
    for g in [0.01, 0.1, 0.14] {
        for db in [-1.0, 1.0] {
            let p = SystemParams::canonical().with_g(g).with_delta_b(db);
            for w in linear_grid(0.8, 1.2, 401) {
                assert!(optical_spring_free(w, &p).omega_eff_sq > 0.0, "G {g} Delta_b {db} w {w}");
            }
        }
    }
    let p = SystemParams::canonical();
    assert!(optical_spring_free(1.003, &p).omega_eff_sq < 0.0);
}

#[test]
fn blue_free_damping_follows_leading_order() {
    let p = SystemParams::canonical();
    for g in linear_grid(0.05, 0.2, 16) {
        let q = p.with_g(g);
        let s = optical_spring_free(1.0, &q);
        let lead = q.gamma_m - g * g / q.kappa_b;
        assert!(rel(s.gamma_eff, lead) < 0.05);
    }
}

#[test]
fn controlled_parts_nonnegative() {
    for seed in 0..20 {
        let mut r = rng(1100 + seed);
        let p = system(&mut r);
        let a = common::imbalanced(&mut r);
        for w in linear_grid(0.5, 1.5, 50) {
            let s = noise_spectrum_cqnc(w, &p, &a).unwrap();
            let Components::Controlled { ancilla_background, interference, shot, .. } = s.components else {
                panic!()
            };
            assert!(ancilla_background >= 0.0 && interference >= 0.0 && shot >= 0.0);
        }
    }
}
