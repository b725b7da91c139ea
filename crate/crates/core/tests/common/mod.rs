#![allow(dead_code)]

use cqnc_core::{AncillaCoupling, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn signed(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let x = r.random_range(lo..hi);
    if r.random_bool(0.5) {
        x
    } else {
        -x
    }
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo.ln()..hi.ln()).exp()
}

pub fn system(r: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        omega_m: 1.0,
        gamma_m: log_uniform(r, 1e-4, 1e-2),
        kappa_b: log_uniform(r, 5e-3, 0.5),
        delta_b: signed(r, 0.2, 2.0),
        big_g: r.random_range(0.01..0.4),
        n_th: r.random_range(0.0..100.0),
    }
}

pub fn balanced(r: &mut ChaCha8Rng) -> AncillaCoupling {
    let g = r.random_range(0.005..0.3);
    AncillaCoupling {
        g1: g,
        g2: g,
        delta_c: signed(r, 0.2, 2.0),
        kappa_c: log_uniform(r, 1e-4, 0.1),
    }
}

pub fn imbalanced(r: &mut ChaCha8Rng) -> AncillaCoupling {
    AncillaCoupling {
        g1: r.random_range(0.0..0.4),
        g2: r.random_range(0.0..0.4),
        ..balanced(r)
    }
}

/// Wider draws for the stability checks, including strongly unstable points.
pub fn stability_system(r: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        omega_m: 1.0,
        gamma_m: log_uniform(r, 1e-4, 5e-2),
        kappa_b: log_uniform(r, 1e-3, 0.5),
        delta_b: signed(r, 0.1, 2.0),
        big_g: r.random_range(0.0..1.0),
        n_th: 0.0,
    }
}

pub fn stability_ancilla(r: &mut ChaCha8Rng) -> AncillaCoupling {
    AncillaCoupling {
        g1: r.random_range(0.0..0.6),
        g2: r.random_range(0.0..0.6),
        delta_c: signed(r, 0.1, 2.0),
        kappa_c: log_uniform(r, 1e-4, 0.1),
    }
}
