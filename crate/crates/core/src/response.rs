//! Susceptibilities, optical rigidity, optical-spring shifts and the
//! normal-mode eigenfrequencies of the probe/mechanics pair.

use crate::params::{AncillaCoupling, SystemParams};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Denominators smaller than this in modulus are reported as poles.
pub const POLE_TOL: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A complex response sampled at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResponse {
    pub omega: f64,
    pub value: Complex64,
}

impl ComplexResponse {
    pub fn new(omega: f64, value: Complex64) -> Self {
        Self { omega, value }
    }
}

/// Frequency shift and extra damping extracted from a rigidity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSpring {
    pub delta_omega_m: f64,
    pub gamma_opt: f64,
    pub omega_eff_sq: f64,
    pub gamma_eff: f64,
}

impl OpticalSpring {
    /// Split `Sigma = (2 w dw_m - i w gamma_opt) / omega_m`.
    pub fn from_rigidity(omega: f64, sigma: Complex64, params: &SystemParams) -> Self {
        let (delta_omega_m, gamma_opt) = decompose_rigidity(omega, sigma, params.omega_m);
        Self {
            delta_omega_m,
            gamma_opt,
            omega_eff_sq: params.omega_m * params.omega_m + 2.0 * omega * delta_omega_m,
            gamma_eff: params.gamma_m + gamma_opt,
        }
    }
}

/// `(delta_omega_m, gamma_opt)` from a rigidity value.
pub fn decompose_rigidity(omega: f64, sigma: Complex64, omega_m: f64) -> (f64, f64) {
    (
        omega_m * sigma.re / (2.0 * omega),
        -omega_m * sigma.im / omega,
    )
}

/// Inverse of [`decompose_rigidity`].
pub fn compose_rigidity(omega: f64, delta_omega_m: f64, gamma_opt: f64, omega_m: f64) -> Complex64 {
    Complex64::new(2.0 * omega * delta_omega_m, -omega * gamma_opt) / omega_m
}

/// Probe-mode susceptibility `1 / (kappa_b - i w)`.
pub fn chi_b(omega: f64, kappa_b: f64) -> ComplexResponse {
    ComplexResponse::new(omega, Complex64::new(kappa_b, -omega).inv())
}

/// Bare mechanical susceptibility `omega_m / (omega_m^2 - w^2 - i w gamma_m)`.
pub fn chi_m(omega: f64, params: &SystemParams) -> ComplexResponse {
    let wm = params.omega_m;
    let den = Complex64::new(wm * wm - omega * omega, -omega * params.gamma_m);
    ComplexResponse::new(omega, c(wm) / den)
}

/// Ancilla susceptibility `Delta_c / ((kappa_c - i w)^2 + Delta_c^2)`.
pub fn chi_c(omega: f64, ancilla: &AncillaCoupling) -> ComplexResponse {
    let v = Complex64::new(ancilla.kappa_c, -omega);
    let dc = ancilla.delta_c;
    ComplexResponse::new(omega, c(dc) / (v * v + dc * dc))
}

/// Inverse bare mechanical response `(omega_m^2 - i w gamma_m - w^2) / omega_m`.
fn mech_inverse(omega: f64, params: &SystemParams) -> Complex64 {
    let wm = params.omega_m;
    Complex64::new(wm * wm - omega * omega, -omega * params.gamma_m) / wm
}

/// Mechanical susceptibility dressed by the probe mode.
pub fn chi_mech_loaded(omega: f64, params: &SystemParams) -> Result<ComplexResponse> {
    let bracket = mech_inverse(omega, params) + rigidity_free(omega, params).value;
    if bracket.norm() < POLE_TOL {
        return Err(Error::Singular {
            what: "loaded mechanical susceptibility",
            omega,
            modulus: bracket.norm(),
        });
    }
    Ok(ComplexResponse::new(omega, bracket.inv()))
}

/// Optical rigidity without the ancilla, `-2 G^2 Delta_b / ((kappa_b - i w)^2 + Delta_b^2)`.
pub fn rigidity_free(omega: f64, params: &SystemParams) -> ComplexResponse {
    let u = Complex64::new(params.kappa_b, -omega);
    let db = params.delta_b;
    let g2 = params.big_g * params.big_g;
    ComplexResponse::new(omega, c(-2.0 * g2 * db) / (u * u + db * db))
}

pub fn optical_spring_free(omega: f64, params: &SystemParams) -> OpticalSpring {
    OpticalSpring::from_rigidity(omega, rigidity_free(omega, params).value, params)
}

fn checked(what: &'static str, omega: f64, den: Complex64) -> Result<Complex64> {
    if den.norm() < POLE_TOL {
        Err(Error::Singular { what, omega, modulus: den.norm() })
    } else {
        Ok(den)
    }
}

/// Rigidity with a balanced ancilla (`g1 = g2`), which only enters through `g_c`.
pub fn rigidity_cqnc_balanced(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<ComplexResponse> {
    let u = Complex64::new(params.kappa_b, -omega);
    let db = params.delta_b;
    let gc = ancilla.g_c();
    let xc = chi_c(omega, ancilla).value;
    let den = checked("controlled rigidity", omega, u * u + db * db - gc * gc * db * xc)?;
    let g2 = params.big_g * params.big_g;
    Ok(ComplexResponse::new(omega, c(-2.0 * g2 * db) / den))
}

/// Rigidity for arbitrary `g1`, `g2`.
///
/// With `u = kappa_b - i w`, `v = kappa_c - i w`, `D = v^2 + Delta_c^2`:
/// `Sigma = -2 G^2 beta / (a^2 + beta gamma)` where
/// `a = u + g_n g_c v / D`, `beta = Delta_b - g_n^2 Delta_c / D`,
/// `gamma = Delta_b - g_c^2 Delta_c / D`.
pub fn rigidity_cqnc_general(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<ComplexResponse> {
    let u = Complex64::new(params.kappa_b, -omega);
    let v = Complex64::new(ancilla.kappa_c, -omega);
    let dc = ancilla.delta_c;
    let d = checked("ancilla response", omega, v * v + dc * dc)?;
    let (gc, gn) = (ancilla.g_c(), ancilla.g_n());
    let a = u + gn * gc * v / d;
    let beta = params.delta_b - gn * gn * dc / d;
    let gamma = params.delta_b - gc * gc * dc / d;
    let den = checked("controlled rigidity", omega, a * a + beta * gamma)?;
    let g2 = params.big_g * params.big_g;
    Ok(ComplexResponse::new(omega, -2.0 * g2 * beta / den))
}

/// The controlled rigidity. Uses the balanced expression when `g_n = 0`.
pub fn rigidity_cqnc(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<ComplexResponse> {
    if ancilla.is_balanced() {
        rigidity_cqnc_balanced(omega, params, ancilla)
    } else {
        rigidity_cqnc_general(omega, params, ancilla)
    }
}

/// The closed form for the imbalanced rigidity as printed in the original
/// analysis. It coincides with [`rigidity_cqnc_general`] only at `g_n = 0`
/// and is kept for comparison.
pub fn rigidity_cqnc_published(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<ComplexResponse> {
    let db = params.delta_b;
    let dc = ancilla.delta_c;
    let (gc, gn) = (ancilla.g_c(), ancilla.g_n());
    let xb = chi_b(omega, params.kappa_b).value;
    let xcn = Complex64::new(ancilla.kappa_c, -omega).inv();
    let xcp = Complex64::new(ancilla.kappa_c, omega).inv();
    let xc = chi_c(omega, ancilla).value;
    let g2 = params.big_g * params.big_g;
    let num = 2.0 * g2 * dc * xb * xb * (db + I * gn * gn / xcp * xcn * xc);
    let den = -dc * (1.0 + db * db * xb * xb + gn * gc * xb * xcn)
        + xb * xc
            * (gc * gc * db * dc * xb + I * gn * gn * (gc * gc - db * dc) / xcp * xcn * xb
                + gn * gc * (dc * dc * xcn - xcn.inv()));
    let den = checked("published controlled rigidity", omega, den)?;
    Ok(ComplexResponse::new(omega, num / den))
}

pub fn optical_spring_cqnc(omega: f64, params: &SystemParams, ancilla: &AncillaCoupling) -> Result<OpticalSpring> {
    let s = rigidity_cqnc(omega, params, ancilla)?;
    Ok(OpticalSpring::from_rigidity(omega, s.value, params))
}

/// Leading small-linewidth expansion of the controlled damping,
/// `-2 kappa_c + 4 kappa_b kappa_c^2 / G^2`.
pub fn gamma_opt_c_series(params: &SystemParams, ancilla: &AncillaCoupling) -> f64 {
    let kc = ancilla.kappa_c;
    -2.0 * kc + 4.0 * params.kappa_b * kc * kc / (params.big_g * params.big_g)
}

/// Hybridized eigenfrequencies of the probe/mechanics pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmsModes {
    /// `(omega_plus, omega_minus)` from the full complex expression.
    pub exact: (Complex64, Complex64),
    /// `(omega_plus, omega_minus)` from `sqrt(omega_m^2 +- sqrt(2 G^2 Delta_b omega_m))`.
    pub approx: (Complex64, Complex64),
}

impl NmsModes {
    pub fn splitting_exact(&self) -> f64 {
        self.exact.0.re - self.exact.1.re
    }

    pub fn splitting_approx(&self) -> f64 {
        self.approx.0.re - self.approx.1.re
    }
}

fn right_half_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

fn ordered(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    if a.re >= b.re {
        (a, b)
    } else {
        (b, a)
    }
}

/// Normal-mode eigenfrequencies, ordered by real part (descending).
pub fn nms_eigenfrequencies(params: &SystemParams) -> NmsModes {
    let db = Complex64::new(params.delta_b, -params.kappa_b);
    let wm = Complex64::new(params.omega_m, -params.gamma_m);
    let g2 = params.big_g * params.big_g;
    let (db2, wm2) = (db * db, wm * wm);
    let inner = ((db2 - wm2) * (db2 - wm2) + 8.0 * g2 * wm * db).sqrt();
    let mean = (db2 + wm2) * 0.5;
    let exact = ordered(
        right_half_sqrt(mean + 0.5 * inner),
        right_half_sqrt(mean - 0.5 * inner),
    );

    let wm_r = params.omega_m;
    let shift = c(2.0 * g2 * params.delta_b * wm_r).sqrt();
    let approx = ordered(
        right_half_sqrt(wm_r * wm_r + shift),
        right_half_sqrt(wm_r * wm_r - shift),
    );
    NmsModes { exact, approx }
}
