//! Homodyne transfer functions, force-noise spectra with and without the
//! ancilla, the standard quantum limit and the cancellation ratio.
//!
//! All spectra assume phase-quadrature readout (`phi = 0`). The transfer
//! functions keep `phi` general.

use crate::oracle::{noise_breakdown, LinearSystem};
use crate::params::{AncillaCoupling, CouplingRule, G2Convention, SystemParams};
use crate::response::{chi_b, chi_c, chi_m, chi_mech_loaded, optical_spring_cqnc};
use crate::stability::{g_max_search, GMaxResult};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Off,
    Balanced,
    Imbalanced,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::Off => "off",
            ControlMode::Balanced => "balanced",
            ControlMode::Imbalanced => "imbalanced",
        }
    }
}

/// Signal and noise transfer onto the measured quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSet {
    pub omega: f64,
    pub chi_f: Complex64,
    pub chi_x: Complex64,
    pub chi_p: Complex64,
}

pub fn transfer_functions(omega: f64, params: &SystemParams, phi: f64) -> Result<TransferSet> {
    let chi = chi_mech_loaded(omega, params)?.value;
    let (kb, db, g) = (params.kappa_b, params.delta_b, params.big_g);
    let u = Complex64::new(kb, -omega);
    let den = u * u + db * db;
    let (s, c) = phi.sin_cos();
    let lo = db * s + u * c;
    let g2 = g * g;
    Ok(TransferSet {
        omega,
        chi_f: -2.0 * kb.sqrt() * g * lo / den * chi,
        chi_x: ((kb * kb + omega * omega - db * db) * s - 2.0 * kb * db * c) / den
            + 4.0 * kb * g2 * u * lo / (den * den) * chi,
        chi_p: ((kb * kb + omega * omega - db * db) * c + 2.0 * kb * db * s) / den
            + 4.0 * kb * g2 * db * lo / (den * den) * chi,
    })
}

/// Per-frequency noise decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Components {
    Free {
        thermal: f64,
        background: f64,
        backaction: f64,
        shot: f64,
    },
    Controlled {
        thermal: f64,
        ancilla_background: f64,
        interference: f64,
        shot: f64,
    },
}

impl Components {
    pub fn names(&self) -> [&'static str; 4] {
        match self {
            Components::Free { .. } => ["thermal", "background", "backaction", "shot"],
            Components::Controlled { .. } => ["thermal", "ancilla_background", "interference", "shot"],
        }
    }

    pub fn values(&self) -> [f64; 4] {
        match *self {
            Components::Free { thermal, background, backaction, shot } => [thermal, background, backaction, shot],
            Components::Controlled { thermal, ancilla_background, interference, shot } => {
                [thermal, ancilla_background, interference, shot]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub omega: f64,
    pub total: f64,
    pub components: Components,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega_grid: Vec<f64>,
    pub total: Vec<f64>,
    pub components: Vec<Components>,
    pub control_mode: ControlMode,
}

impl SpectrumResult {
    fn collect(mode: ControlMode, samples: Vec<SpectrumSample>) -> Self {
        Self {
            omega_grid: samples.iter().map(|s| s.omega).collect(),
            total: samples.iter().map(|s| s.total).collect(),
            components: samples.iter().map(|s| s.components).collect(),
            control_mode: mode,
        }
    }
}

fn shot_term(omega: f64, p: &SystemParams) -> f64 {
    let (kb, db, gm, wm) = (p.kappa_b, p.delta_b, p.gamma_m, p.omega_m);
    let w2 = omega * omega;
    let d = w2 - wm * wm;
    let a = db * db - w2 + kb * kb;
    (a * a + 4.0 * kb * kb * w2) * (w2 * gm * gm + d * d)
        / (8.0 * p.big_g * p.big_g * kb * wm * wm * (w2 + kb * kb))
}

fn zero_coupling(omega: f64, p: &SystemParams) -> Result<()> {
    if p.big_g == 0.0 {
        Err(Error::Singular { what: "shot noise (G = 0)", omega, modulus: 0.0 })
    } else {
        Ok(())
    }
}

/// Force-noise spectrum without the ancilla, split into thermal,
/// background, backaction (`~ G^2`) and shot (`~ G^-2`) parts.
pub fn noise_spectrum_free(omega: f64, params: &SystemParams) -> Result<SpectrumSample> {
    zero_coupling(omega, params)?;
    let p = params;
    let (kb, db, wm) = (p.kappa_b, p.delta_b, p.omega_m);
    let w2 = omega * omega;
    let d = w2 - wm * wm;
    let thermal = p.s_th();
    let background = db * (db * db - w2 + 3.0 * kb * kb) * d / (2.0 * kb * wm * (w2 + kb * kb));
    let backaction = p.big_g * p.big_g * (db * db + 4.0 * kb * kb) / (2.0 * kb * (w2 + kb * kb));
    let shot = shot_term(omega, p);
    Ok(SpectrumSample {
        omega,
        total: thermal + background + backaction + shot,
        components: Components::Free { thermal, background, backaction, shot },
    })
}

/// Closed-form spectrum for balanced coupling (`g1 == g2`).
pub fn noise_spectrum_balanced(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<SpectrumSample> {
    if !ancilla.is_balanced() {
        return Err(Error::ModeMismatch("balanced control requires g1 == g2".into()));
    }
    zero_coupling(omega, params)?;
    let p = params;
    let (kb, db, g) = (p.kappa_b, p.delta_b, p.big_g);
    let (kc, dc, gc) = (ancilla.kappa_c, ancilla.delta_c, ancilla.g_c());
    let (g2, gc2) = (g * g, gc * gc);
    let xb = chi_b(omega, kb).value;
    let xm = chi_m(omega, p).value;
    let xc = chi_c(omega, ancilla).value;
    let v = Complex64::new(kc, -omega);
    let dd = v * v + dc * dc;
    let xm2 = xm.norm_sqr();

    let t1 = gc2 * kc * (v / dd).norm_sqr() / (2.0 * g2 * xm2);
    let t2 = gc2 * kc * xc.norm_sqr() / (2.0 * g2 * xm2);
    let anti = gc2 * xc + 2.0 * g2 * xm;
    let t3 = 0.5 * (kb.sqrt() * xb * (db - anti) / (g * xm)).norm_sqr();
    let t4 = 0.5
        * ((1.0 - 2.0 * kb * xb + db * db * xb * xb - db * xb * xb * anti)
            / (2.0 * g * kb.sqrt() * xb * xm))
            .norm_sqr();
    let thermal = p.s_th();
    Ok(SpectrumSample {
        omega,
        total: thermal + t1 + t2 + t3 + t4,
        components: Components::Controlled {
            thermal,
            ancilla_background: t1 + t2,
            interference: t3,
            shot: t4,
        },
    })
}

/// Spectrum with the ancilla. Balanced coupling uses the closed form; any
/// imbalance is evaluated by the state-space solver.
pub fn noise_spectrum_cqnc(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<SpectrumSample> {
    if ancilla.is_balanced() {
        return noise_spectrum_balanced(omega, params, ancilla);
    }
    noise_spectrum_statespace(omega, params, ancilla)
}

/// Spectrum with the ancilla from the state-space solver, for any coupling.
/// The probe amplitude and phase quadratures play the roles of the
/// interference and shot terms.
pub fn noise_spectrum_statespace(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<SpectrumSample> {
    zero_coupling(omega, params)?;
    let sys = LinearSystem::controlled(params, ancilla, 0.0);
    let b = noise_breakdown(&sys, omega, params.s_th())?;
    Ok(SpectrumSample {
        omega,
        total: b.total(),
        components: Components::Controlled {
            thermal: b.thermal,
            ancilla_background: b.ancilla,
            interference: b.probe_amplitude,
            shot: b.probe_phase,
        },
    })
}

/// Spectrum once the backaction has been cancelled:
/// `S_th + kappa_c |v/D|^2 / |chi_m|^2 + kappa_c + shot`.
pub fn noise_spectrum_post_cancellation(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<f64> {
    zero_coupling(omega, params)?;
    Ok(sql_spectrum_cqnc(omega, params, ancilla) + shot_term(omega, params))
}

/// Lower envelope of the cancelled spectrum (shot noise dropped).
pub fn sql_spectrum_cqnc(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> f64 {
    let kc = ancilla.kappa_c;
    let v = Complex64::new(kc, -omega);
    let dd = v * v + ancilla.delta_c * ancilla.delta_c;
    params.s_th() + kc * (v / dd).norm_sqr() / chi_m(omega, params).value.norm_sqr() + kc
}

fn sql_parts(omega: f64, p: &SystemParams) -> (f64, f64, f64) {
    let (kb, db, gm, wm) = (p.kappa_b, p.delta_b, p.gamma_m, p.omega_m);
    let w2 = omega * omega;
    let d = w2 - wm * wm;
    let a = db * db - w2 + kb * kb;
    let optical = a * a + 4.0 * kb * kb * w2;
    let mech = w2 * gm * gm + d * d;
    (optical, mech, db * db + 4.0 * kb * kb)
}

/// Coupling that minimizes the free spectrum at `omega`.
pub fn sql_optimal_g(omega: f64, params: &SystemParams) -> f64 {
    let (optical, mech, back) = sql_parts(omega, params);
    let wm = params.omega_m;
    (optical * mech / (4.0 * wm * wm * back)).powf(0.25)
}

/// Standard quantum limit: the free spectrum at its optimal coupling.
pub fn sql_spectrum(omega: f64, params: &SystemParams) -> f64 {
    let p = params;
    let (kb, db, wm) = (p.kappa_b, p.delta_b, p.omega_m);
    let (optical, mech, back) = sql_parts(omega, p);
    let w2 = omega * omega;
    let d = w2 - wm * wm;
    p.s_th()
        + (db * (db * db - w2 + 3.0 * kb * kb) * d + (back * mech).sqrt() * optical.sqrt())
            / (2.0 * kb * wm * (w2 + kb * kb))
}

/// `R = 1 - S^c(omega_m) / S(omega_m)`.
pub fn cancellation_ratio(params: &SystemParams, ancilla: &AncillaCoupling) -> Result<f64> {
    let w = params.omega_m;
    let s = noise_spectrum_free(w, params)?.total;
    let sc = noise_spectrum_cqnc(w, params, ancilla)?.total;
    Ok(1.0 - sc / s)
}

/// Evaluate the free spectrum on a grid.
pub fn spectrum_free(grid: &[f64], params: &SystemParams) -> Result<SpectrumResult> {
    let samples = grid.iter().map(|&w| noise_spectrum_free(w, params)).collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult::collect(ControlMode::Off, samples))
}

/// Evaluate the controlled spectrum on a grid.
pub fn spectrum_cqnc(grid: &[f64], params: &SystemParams, ancilla: &AncillaCoupling) -> Result<SpectrumResult> {
    let samples = grid
        .iter()
        .map(|&w| noise_spectrum_cqnc(w, params, ancilla))
        .collect::<Result<Vec<_>>>()?;
    let mode = if ancilla.is_balanced() { ControlMode::Balanced } else { ControlMode::Imbalanced };
    Ok(SpectrumResult::collect(mode, samples))
}

/// `n` points from `min` to `max`, both included.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    let step = (max - min) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { max } else { min + step * k as f64 }).collect()
}

/// `n` logarithmically spaced points from `min` to `max` (both positive).
pub fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (min.ln(), max.ln());
    linear_grid(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(k, x)| match k {
            0 => min,
            _ if k + 1 == n => max,
            _ => x.exp(),
        })
        .collect()
}

/// `center +- d` with `d` log-spaced over `[d_min, d_max]`, plus `center`.
pub fn symmetric_log_grid(center: f64, d_min: f64, d_max: f64, per_side: usize) -> Vec<f64> {
    let d = log_grid(d_min, d_max, per_side);
    let mut g: Vec<f64> = d.iter().rev().map(|x| center - x).collect();
    g.push(center);
    g.extend(d.iter().map(|x| center + x));
    g
}

/// 2001 points clustered around `omega = 1`, spanning `[0.5, 1.5]`.
pub fn default_grid() -> Vec<f64> {
    symmetric_log_grid(1.0, 1e-4, 0.5, 1000)
}

/// One row of the working-range table at fixed counter-rotating coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub g_n_ratio: f64,
    pub convention: G2Convention,
    /// Half-width of the positive-damping interval around `omega = 1`.
    pub delta_omega: f64,
    pub delta_omega_lower: f64,
    pub delta_omega_upper: f64,
    /// Cancellation ratio at `omega = 1`.
    pub r: f64,
    /// Effective damping at `omega = 1`, in units of `gamma_m`.
    pub gamma_eff_ratio: f64,
    pub g_max: f64,
    pub g_max_result: GMaxResult,
}

const EDGE_STEP: f64 = 1e-5;
const EDGE_SPAN: f64 = 0.5;

fn positive_edge(p: &SystemParams, a: &AncillaCoupling, sign: f64) -> Result<f64> {
    let gamma = |d: f64| -> Result<f64> { Ok(optical_spring_cqnc(p.omega_m + sign * d, p, a)?.gamma_eff) };
    let mut d = 0.0;
    while d < EDGE_SPAN {
        let next = d + EDGE_STEP;
        if gamma(next)? <= 0.0 {
            let (mut lo, mut hi) = (d, next);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if gamma(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        d = next;
    }
    Ok(EDGE_SPAN)
}

/// Working range, cancellation ratio, damping and coupling threshold for
/// `g_n = ratio * sqrt(2) G` at fixed `g2`.
pub fn table1_row(params: &SystemParams, g_n_ratio: f64, convention: G2Convention) -> Result<Table1Row> {
    if !(g_n_ratio > 0.0 && g_n_ratio < 1.0) {
        return Err(Error::InvalidParams("g_n / (sqrt2 G) must lie in (0, 1)".into()));
    }
    let rule = CouplingRule::FixedG2 { g_n_ratio, convention };
    let a = rule.ancilla(params).expect("rule has an ancilla");
    let spring = optical_spring_cqnc(params.omega_m, params, &a)?;
    if spring.gamma_eff <= 0.0 {
        return Err(Error::NoPositiveInterval);
    }
    let upper = positive_edge(params, &a, 1.0)?;
    let lower = positive_edge(params, &a, -1.0)?;
    let gm = g_max_search(params, &rule)?;
    Ok(Table1Row {
        g_n_ratio,
        convention,
        delta_omega: upper.min(lower),
        delta_omega_lower: lower,
        delta_omega_upper: upper,
        r: cancellation_ratio(params, &a)?,
        gamma_eff_ratio: spring.gamma_eff / params.gamma_m,
        g_max: gm.g_max,
        g_max_result: gm,
    })
}

/// The five tabulated imbalance ratios.
pub const TABLE1_RATIOS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::matched_ancilla;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn transfer_examples() {
        let p = SystemParams::canonical();
        assert_eq!(transfer_functions(1.0, &p.with_g(0.0), 0.0).unwrap().chi_f.norm(), 0.0);
        let t = transfer_functions(0.9, &p, 0.0).unwrap();
        let u = Complex64::new(p.kappa_b, -0.9);
        let chi = chi_mech_loaded(0.9, &p).unwrap().value;
        let want = -2.0 * p.kappa_b.sqrt() * p.big_g * u * chi / (u * u + 1.0);
        assert!((t.chi_f - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn free_resonance_values() {
        let p = SystemParams::canonical();
        let s = noise_spectrum_free(1.0, &p).unwrap();
        let Components::Free { thermal, background, backaction, shot } = s.components else { panic!() };
        assert_eq!(background, 0.0);
        assert!((backaction - 2.0).abs() < 1e-3);
        assert!((thermal - 0.024).abs() < 1e-15);
        assert_eq!(s.total, thermal + background + backaction + shot);
    }

    #[test]
    fn free_scaling_in_g() {
        let p = SystemParams::canonical();
        for w in [0.6, 0.99, 1.0, 1.2] {
            let a = noise_spectrum_free(w, &p.with_g(0.1)).unwrap().components.values();
            let b = noise_spectrum_free(w, &p.with_g(0.2)).unwrap().components.values();
            assert_eq!(a[0], b[0]);
            assert_eq!(a[1], b[1]);
            assert!(rel(b[2], 4.0 * a[2]) < 1e-14);
            assert!(rel(b[3], a[3] / 4.0) < 1e-14);
        }
    }

    #[test]
    fn zero_g_is_a_pole() {
        let p = SystemParams::canonical().with_g(0.0);
        assert!(matches!(noise_spectrum_free(1.0, &p), Err(Error::Singular { .. })));
    }

    #[test]
    fn sql_examples() {
        let p = SystemParams::canonical();
        let gl = sql_optimal_g(1.0, &p);
        assert!(rel(gl, (p.kappa_b * p.gamma_m).sqrt()) < 1e-3, "{gl}");
        let s = |g| noise_spectrum_free(1.0, &p.with_g(g)).unwrap().total;
        assert!(s(gl * 1.01) > s(gl) && s(gl * 0.99) > s(gl));
        assert!(rel(sql_spectrum(1.0, &p), p.s_th() + p.gamma_m) < 0.05);
        assert_eq!(sql_optimal_g(0.8, &p), sql_optimal_g(0.8, &p.with_delta_b(1.0)));
        let tiny = SystemParams { gamma_m: 1e-12, ..p };
        assert!(sql_optimal_g(1.0, &tiny) < 1e-6);
        for w in [0.7, 0.9, 1.05, 1.3] {
            let gl = sql_optimal_g(w, &p);
            let at = noise_spectrum_free(w, &p.with_g(gl)).unwrap().total;
            assert!(rel(at, sql_spectrum(w, &p)) < 1e-10);
        }
    }

    #[test]
    fn sql_above_thermal_on_blue_grid() {
        let p = SystemParams::canonical();
        for w in default_grid() {
            assert!(sql_spectrum(w, &p) >= p.s_th());
        }
    }

    #[test]
    fn decoupled_ancilla_is_free() {
        let p = SystemParams::canonical();
        let mut a = matched_ancilla(&p);
        a.g1 = 0.0;
        a.g2 = 0.0;
        for w in [0.5, 1.0, 1.1] {
            let x = noise_spectrum_free(w, &p).unwrap().total;
            let y = noise_spectrum_balanced(w, &p, &a).unwrap().total;
            assert!(rel(y, x) < 1e-12);
        }
    }

    #[test]
    fn matched_resonance_value() {
        let p = SystemParams::canonical();
        let a = matched_ancilla(&p);
        let s = noise_spectrum_balanced(1.0, &p, &a).unwrap().total;
        let shot = shot_term(1.0, &p);
        assert!(rel(s - shot, p.s_th() + 2.0 * a.kappa_c) < 1e-3);
    }

    #[test]
    fn balanced_guard() {
        let p = SystemParams::canonical();
        let a = AncillaCoupling { g1: 0.2, ..matched_ancilla(&p) };
        let e = noise_spectrum_balanced(1.0, &p, &a).unwrap_err();
        assert_eq!(e.to_string(), "balanced control requires g1 == g2");
    }

    #[test]
    fn post_cancellation_close_to_exact() {
        let p = SystemParams::canonical();
        let a = matched_ancilla(&p);
        for w in linear_grid(0.9, 1.1, 201) {
            let exact = noise_spectrum_balanced(w, &p, &a).unwrap().total;
            let post = noise_spectrum_post_cancellation(w, &p, &a).unwrap();
            assert!(rel(post, exact) < 1e-4, "w={w}: {}", rel(post, exact));
        }
    }

    #[test]
    fn grids() {
        let g = default_grid();
        assert_eq!(g.len(), 2001);
        assert_eq!(g[1000], 1.0);
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[2000] - 1.5).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let l = log_grid(1e-3, 0.4, 7);
        assert_eq!((l[0], l[6]), (1e-3, 0.4));
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn table_rejects_bad_ratio() {
        assert!(table1_row(&SystemParams::canonical(), 1.0, G2Convention::Half).is_err());
    }
}
