//! SI conversion of dimensionless spectra and the hardware-to-parameter maps
//! of the two physical platforms.
//!
//! Dimensionless spectra are in units of `omega_m`; before rescaling they are
//! multiplied by `omega_m` in rad/s, so `S~ = hbar m omega_m (S omega_m)`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

fn hbar() -> f64 {
    HBAR
}

fn k_b() -> f64 {
    K_B
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SIContext {
    #[serde(default = "hbar")]
    pub hbar: f64,
    #[serde(default = "k_b")]
    pub k_b: f64,
    /// Oscillator mass, kg.
    pub mass: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m_si: f64,
    /// Lever arm for torque figures, m.
    pub mirror_arm_r: Option<f64>,
    /// Bath temperature, K.
    pub temperature: Option<f64>,
}

impl SIContext {
    pub fn new(mass: f64, omega_m_si: f64) -> Self {
        Self { hbar: HBAR, k_b: K_B, mass, omega_m_si, mirror_arm_r: None, temperature: None }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.hbar > 0.0
            && self.k_b > 0.0
            && self.mass > 0.0
            && self.omega_m_si > 0.0
            && self.mirror_arm_r.is_none_or(|r| r > 0.0)
            && self.temperature.is_none_or(|t| t > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config("[si] values must be positive".into()))
        }
    }

    /// `hbar m omega_m`.
    pub fn prefactor(&self) -> f64 {
        self.hbar * self.mass * self.omega_m_si
    }
}

/// Force spectrum in N^2/Hz.
pub fn rescale_force_spectrum(s_dimensionless: f64, ctx: &SIContext) -> f64 {
    ctx.prefactor() * (s_dimensionless * ctx.omega_m_si)
}

/// Torque sensitivity `r sqrt(hbar m omega_m S)` in N m / sqrt(Hz).
pub fn torque_sensitivity(s_dimensionless: f64, ctx: &SIContext) -> Result<f64> {
    let r = ctx
        .mirror_arm_r
        .ok_or_else(|| Error::InvalidParams("torque figure needs mirror_arm_r".into()))?;
    Ok(r * rescale_force_spectrum(s_dimensionless, ctx).sqrt())
}

/// Bose occupation of the mechanical mode at the context temperature.
pub fn thermal_occupation(ctx: &SIContext) -> Result<f64> {
    let t = ctx
        .temperature
        .ok_or_else(|| Error::InvalidParams("thermal occupation needs a temperature".into()))?;
    if !(t > 0.0) {
        return Err(Error::InvalidParams("temperature must be positive".into()));
    }
    Ok(1.0 / (ctx.hbar * ctx.omega_m_si / (ctx.k_b * t)).exp_m1())
}

/// Rate in rad/s expressed in units of the mechanical frequency.
pub fn normalized_rate(rate_si: f64, ctx: &SIContext) -> f64 {
    rate_si / ctx.omega_m_si
}

/// Membrane-in-the-middle cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneMap {
    /// Sub-cavity frequency, rad/s.
    pub omega: f64,
    /// Frequency shift per unit displacement, rad/(s m).
    pub f: f64,
    /// Inter-cavity coupling, rad/s.
    pub j: f64,
    /// Cavity length, m.
    pub length: Option<f64>,
}

/// Birefringent twisted cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistedMap {
    pub n_o: f64,
    pub n_e: f64,
    pub length: f64,
    pub c: f64,
}

/// Beam splitter and parametric crystal coupling the probe to the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncillaHardware {
    pub reflectivity: f64,
    pub crystal_length: f64,
    pub gain: f64,
    pub cavity_length: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HardwareMap {
    Membrane(MembraneMap),
    Twisted(TwistedMap),
}

/// Normal modes at the linearization point `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_m: f64,
    /// `-omega / L` when a length is known.
    pub f_high_reflectivity: Option<f64>,
}

pub fn normal_mode_params(map: &MembraneMap) -> Result<NormalModes> {
    if !(map.j >= 0.0) {
        return Err(Error::InvalidParams("J >= 0 violated".into()));
    }
    Ok(NormalModes {
        omega_a: map.omega + map.j,
        omega_b: map.omega - map.j,
        g_m: map.f,
        f_high_reflectivity: map.length.map(|l| high_reflectivity_shift(map.omega, l)),
    })
}

/// Frequency pull per unit displacement of a highly reflective membrane.
pub fn high_reflectivity_shift(omega: f64, length: f64) -> f64 {
    -omega / length
}

/// Optomechanical coupling of the twisted cavity.
pub fn twisted_coupling(map: &TwistedMap) -> Result<f64> {
    if !(map.n_o > 0.0 && map.n_e > 0.0 && map.length > 0.0) {
        return Err(Error::InvalidParams("n_o, n_e, L > 0 violated".into()));
    }
    let pre = map.c / (16.0 * map.length * (map.n_e * map.n_o).sqrt());
    Ok(-pre * (1.0 / (map.n_o * map.n_o) - 1.0 / (map.n_e * map.n_e)))
}

/// `(g1, g2) = (r c / L, Gamma l c / L)`.
pub fn ancilla_from_hardware(hw: &AncillaHardware) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&hw.reflectivity) {
        return Err(Error::InvalidParams("reflectivity in [0, 1] violated".into()));
    }
    if !(hw.cavity_length > 0.0) || hw.crystal_length > hw.cavity_length {
        return Err(Error::InvalidParams("crystal length <= cavity length violated".into()));
    }
    let scale = hw.c / hw.cavity_length;
    Ok((hw.reflectivity * scale, hw.gain * hw.crystal_length * scale))
}
