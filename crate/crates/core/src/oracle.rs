//! Direct state-space evaluation of transfer functions and noise spectra.
//!
//! The frequency-domain Langevin system `-i w v = A v + B u` is solved by LU
//! for every probe frequency; the homodyne output follows from the
//! input-output relation `b_out = sqrt(2 kappa_b) b - b_in`. Nothing here
//! uses the closed-form spectra, so agreement with them is a real check.

use crate::params::{AncillaCoupling, SystemParams};
use crate::stability::{jacobian_cqnc, jacobian_free};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Pivot ratio below which the resolvent is reported singular.
pub const SINGULAR_TOL: f64 = 1e-15;
/// Signal transfer below this modulus has no force-referred noise.
pub const ZERO_SIGNAL_TOL: f64 = 1e-30;

/// Bosonic mode an input operator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Probe,
    Ancilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    /// Vacuum input `o_in` (`dagger = false`) or `o_in†`.
    Vacuum { mode: Mode, dagger: bool },
    /// Brownian plus external force on the momentum equation.
    Force,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    /// Drift matrix in the operator basis.
    pub drift: DMatrix<Complex64>,
    /// Column `k` maps input `k` onto the state equations.
    pub input_map: DMatrix<Complex64>,
    /// Measured quadrature as a linear form of the state.
    pub output_row: DVector<Complex64>,
    /// Direct input contribution to the measured quadrature.
    pub feedthrough: DVector<Complex64>,
    pub inputs: Vec<Input>,
    /// State index of the mechanical position.
    pub x_index: usize,
}

fn homodyne_weights(phi: f64) -> (Complex64, Complex64) {
    // M = sin(phi) x + cos(phi) p with x = (o + o†)/sqrt2, p = -i (o - o†)/sqrt2
    let (s, c) = phi.sin_cos();
    (
        Complex64::new(s, -c) * FRAC_1_SQRT_2,
        Complex64::new(s, c) * FRAC_1_SQRT_2,
    )
}

impl LinearSystem {
    fn build(drift: DMatrix<Complex64>, inputs: Vec<Input>, kappas: &[(Mode, f64)], phi: f64, kappa_b: f64) -> Self {
        let n = drift.nrows();
        let m = inputs.len();
        let mode_row = |mode: Mode, dagger: bool| -> usize {
            let base = match mode {
                Mode::Probe => 0,
                Mode::Ancilla => 2,
            };
            base + dagger as usize
        };
        let mut input_map = DMatrix::zeros(n, m);
        for (k, inp) in inputs.iter().enumerate() {
            match *inp {
                Input::Vacuum { mode, dagger } => {
                    let kappa = kappas.iter().find(|(md, _)| *md == mode).map(|(_, k)| *k).unwrap();
                    input_map[(mode_row(mode, dagger), k)] = Complex64::new((2.0 * kappa).sqrt(), 0.0);
                }
                Input::Force => input_map[(n - 1, k)] = Complex64::new(1.0, 0.0),
            }
        }
        let (w, wd) = homodyne_weights(phi);
        let root = (2.0 * kappa_b).sqrt();
        let mut output_row = DVector::zeros(n);
        output_row[0] = w * root;
        output_row[1] = wd * root;
        let mut feedthrough = DVector::zeros(m);
        for (k, inp) in inputs.iter().enumerate() {
            if let Input::Vacuum { mode: Mode::Probe, dagger } = *inp {
                feedthrough[k] = -if dagger { wd } else { w };
            }
        }
        Self { drift, input_map, output_row, feedthrough, inputs, x_index: n - 2 }
    }

    /// Probe and mechanics only.
    pub fn free(params: &SystemParams, phi: f64) -> Self {
        let inputs = vec![
            Input::Vacuum { mode: Mode::Probe, dagger: false },
            Input::Vacuum { mode: Mode::Probe, dagger: true },
            Input::Force,
        ];
        Self::build(
            jacobian_free(params).entries,
            inputs,
            &[(Mode::Probe, params.kappa_b)],
            phi,
            params.kappa_b,
        )
    }

    /// Probe, ancilla and mechanics.
    pub fn controlled(params: &SystemParams, ancilla: &AncillaCoupling, phi: f64) -> Self {
        let inputs = vec![
            Input::Vacuum { mode: Mode::Probe, dagger: false },
            Input::Vacuum { mode: Mode::Probe, dagger: true },
            Input::Vacuum { mode: Mode::Ancilla, dagger: false },
            Input::Vacuum { mode: Mode::Ancilla, dagger: true },
            Input::Force,
        ];
        Self::build(
            jacobian_cqnc(params, ancilla).entries,
            inputs,
            &[(Mode::Probe, params.kappa_b), (Mode::Ancilla, ancilla.kappa_c)],
            phi,
            params.kappa_b,
        )
    }

    pub fn force_index(&self) -> usize {
        self.inputs.iter().position(|i| *i == Input::Force).unwrap()
    }

    /// State response `(-i w I - A)^-1 B`.
    pub fn state_response(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let n = self.drift.nrows();
        let m = DMatrix::<Complex64>::identity(n, n) * Complex64::new(0.0, -omega) - &self.drift;
        let lu = m.lu();
        let u = lu.u();
        let piv: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
        let max = piv.iter().cloned().fold(0.0, f64::max);
        let min = piv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || min / max < SINGULAR_TOL {
            return Err(Error::Singular { what: "state-space resolvent", omega, modulus: min / max.max(1e-300) });
        }
        lu.solve(&self.input_map).ok_or(Error::Singular { what: "state-space resolvent", omega, modulus: 0.0 })
    }
}

/// Pairwise correlations of the inputs plus the flat thermal force level.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCorrelations {
    /// `table[(k, l)]` multiplies `delta(w + w')` in `<u_k(w) u_l(w')>`.
    pub table: DMatrix<f64>,
    pub s_th: f64,
}

impl NoiseCorrelations {
    /// Vacuum optical inputs: only `<o_in o_in†>` of the same mode survives.
    pub fn vacuum(system: &LinearSystem, s_th: f64) -> Self {
        let m = system.inputs.len();
        let table = DMatrix::from_fn(m, m, |k, l| match (system.inputs[k], system.inputs[l]) {
            (
                Input::Vacuum { mode: a, dagger: false },
                Input::Vacuum { mode: b, dagger: true },
            ) if a == b => 1.0,
            _ => 0.0,
        });
        Self { table, s_th }
    }
}

/// Transfer of every input onto the measured quadrature at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputCoefficients {
    pub omega: f64,
    pub values: Vec<Complex64>,
    pub force_index: usize,
}

impl OutputCoefficients {
    /// Signal transfer `chi_F`.
    pub fn chi_f(&self) -> Complex64 {
        self.values[self.force_index]
    }

    /// Force-referred noise coefficients `M_k / chi_F` for every input.
    pub fn force_referred(&self) -> Result<Vec<Complex64>> {
        let cf = self.chi_f();
        if cf.norm() < ZERO_SIGNAL_TOL {
            return Err(Error::ZeroSignal { omega: self.omega, modulus: cf.norm() });
        }
        Ok(self.values.iter().map(|v| v / cf).collect())
    }
}

pub fn solve_frequency(system: &LinearSystem, omega: f64) -> Result<OutputCoefficients> {
    let t = system.state_response(omega)?;
    let row = system.output_row.transpose() * t;
    let values = (0..system.inputs.len()).map(|k| row[k] + system.feedthrough[k]).collect();
    Ok(OutputCoefficients { omega, values, force_index: system.force_index() })
}

fn s_ff(c_pos: &[Complex64], c_neg: &[Complex64], corr: &NoiseCorrelations, skip: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &a) in c_pos.iter().enumerate() {
        for (l, &b) in c_neg.iter().enumerate() {
            if k == skip || l == skip {
                continue;
            }
            let w = corr.table[(k, l)];
            if w != 0.0 {
                acc += a * b * w;
            }
        }
    }
    acc
}

/// Symmetrized force-referred noise `S_th + (S_FF(w) + S_FF(-w)) / 2`.
pub fn spectrum_from_statespace(system: &LinearSystem, corr: &NoiseCorrelations, omega: f64) -> Result<f64> {
    let pos = solve_frequency(system, omega)?.force_referred()?;
    let neg = solve_frequency(system, -omega)?.force_referred()?;
    let f = system.force_index();
    let sym = 0.5 * (s_ff(&pos, &neg, corr, f) + s_ff(&neg, &pos, corr, f));
    Ok(corr.s_th + sym.re)
}

/// Force-referred quadrature coefficients `(c_x, c_p)` of one mode's input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCoefficients {
    pub x: Complex64,
    pub p: Complex64,
}

/// Noise split by input quadrature, force referred, at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown {
    pub thermal: f64,
    /// `|c_x|^2 / 2` of the probe input.
    pub probe_amplitude: f64,
    /// `|c_p|^2 / 2` of the probe input.
    pub probe_phase: f64,
    /// Both ancilla quadratures.
    pub ancilla: f64,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.thermal + self.probe_amplitude + self.probe_phase + self.ancilla
    }
}

/// `(c_x, c_p)` for the given mode, built from the operator coefficients:
/// `c_x = (c_o + c_o†)/sqrt2`, `c_p = i (c_o - c_o†)/sqrt2`.
pub fn quadrature_coefficients(system: &LinearSystem, omega: f64, mode: Mode) -> Result<Option<QuadratureCoefficients>> {
    let c = solve_frequency(system, omega)?.force_referred()?;
    let find = |dagger| system.inputs.iter().position(|i| *i == Input::Vacuum { mode, dagger });
    Ok(match (find(false), find(true)) {
        (Some(a), Some(b)) => Some(QuadratureCoefficients {
            x: (c[a] + c[b]) * FRAC_1_SQRT_2,
            p: Complex64::new(0.0, 1.0) * (c[a] - c[b]) * FRAC_1_SQRT_2,
        }),
        _ => None,
    })
}

pub fn noise_breakdown(system: &LinearSystem, omega: f64, s_th: f64) -> Result<NoiseBreakdown> {
    let probe = quadrature_coefficients(system, omega, Mode::Probe)?.expect("probe input present");
    let anc = quadrature_coefficients(system, omega, Mode::Ancilla)?;
    Ok(NoiseBreakdown {
        thermal: s_th,
        probe_amplitude: 0.5 * probe.x.norm_sqr(),
        probe_phase: 0.5 * probe.p.norm_sqr(),
        ancilla: anc.map_or(0.0, |q| 0.5 * (q.x.norm_sqr() + q.p.norm_sqr())),
    })
}

/// Mechanical position response to a unit force.
pub fn mechanical_response(system: &LinearSystem, omega: f64) -> Result<Complex64> {
    let t = system.state_response(omega)?;
    Ok(t[(system.x_index, system.force_index())])
}

/// Rigidity read off the state-space mechanical response.
pub fn rigidity_from_statespace(system: &LinearSystem, params: &SystemParams, omega: f64) -> Result<Complex64> {
    let chi = mechanical_response(system, omega)?;
    let wm = params.omega_m;
    let bare_inv = Complex64::new(wm * wm - omega * omega, -omega * params.gamma_m) / wm;
    Ok(chi.inv() - bare_inv)
}
