//! Parameter types, validation and derived steady-state quantities.
//!
//! Every rate and frequency is expressed in units of the mechanical
//! frequency. `omega_m` is kept as a field so formulas stay readable, but the
//! presets always set it to 1.

pub mod config;
pub mod presets;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};

fn one() -> f64 {
    1.0
}

/// Core parameters of the probe mode and the mechanical oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(default = "one")]
    pub omega_m: f64,
    pub gamma_m: f64,
    pub kappa_b: f64,
    /// Probe detuning, signed. Negative is the blue sideband.
    pub delta_b: f64,
    /// Enhanced coupling `G = |alpha| g`.
    pub big_g: f64,
    #[serde(default)]
    pub n_th: f64,
}

impl SystemParams {
    /// The reference working point: blue sideband, `G = 0.2`.
    pub fn canonical() -> Self {
        Self {
            omega_m: 1.0,
            gamma_m: 1.2e-3,
            kappa_b: 1e-2,
            delta_b: -1.0,
            big_g: 0.2,
            n_th: 10.0,
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.big_g = g;
        self
    }

    pub fn with_delta_b(mut self, delta_b: f64) -> Self {
        self.delta_b = delta_b;
        self
    }

    /// Flat thermal force spectrum `2 gamma_m n_th`.
    pub fn s_th(&self) -> f64 {
        2.0 * self.gamma_m * self.n_th
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel { s_th: self.s_th() }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::canonical()
    }
}

/// Driven-mode parameters. Only used to derive `G` and the steady-state amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpParams {
    #[serde(default)]
    pub delta_a: f64,
    pub kappa_a: f64,
    pub drive_e: f64,
    pub g_bare: f64,
}

/// Probe/ancilla coupling: beam-splitter `g1`, down-conversion `g2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncillaCoupling {
    pub g1: f64,
    pub g2: f64,
    pub delta_c: f64,
    pub kappa_c: f64,
}

impl AncillaCoupling {
    /// Build from the sum/difference couplings.
    pub fn from_gc_gn(g_c: f64, g_n: f64, delta_c: f64, kappa_c: f64) -> Self {
        Self {
            g1: 0.5 * (g_c + g_n),
            g2: 0.5 * (g_c - g_n),
            delta_c,
            kappa_c,
        }
    }

    pub fn g_c(&self) -> f64 {
        self.g1 + self.g2
    }

    pub fn g_n(&self) -> f64 {
        self.g1 - self.g2
    }

    pub fn is_balanced(&self) -> bool {
        self.g1 == self.g2
    }

    /// A decoupled ancilla: no coupling, matched detuning and linewidth.
    pub fn off(params: &SystemParams) -> Self {
        Self {
            g1: 0.0,
            g2: 0.0,
            delta_c: -params.omega_m,
            kappa_c: 0.5 * params.gamma_m,
        }
    }
}

/// Local-oscillator phase of the homodyne readout.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomodyneSettings {
    #[serde(default)]
    pub phi: f64,
}

impl HomodyneSettings {
    pub fn is_valid(&self) -> bool {
        (0.0..TAU).contains(&self.phi)
    }
}

/// Thermal force noise level. Always derived from `SystemParams`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub s_th: f64,
}

/// List of violated invariants. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: &str) {
        if !ok {
            self.violations.push(format!("{msg} violated"));
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

/// Collect every violated invariant of the parameter set.
pub fn validate(params: &SystemParams, ancilla: Option<&AncillaCoupling>) -> ValidationReport {
    let mut r = ValidationReport::default();
    let p = params;
    r.check(
        [p.omega_m, p.gamma_m, p.kappa_b, p.delta_b, p.big_g, p.n_th]
            .iter()
            .all(|v| v.is_finite()),
        "all rates finite",
    );
    r.check(p.omega_m > 0.0, "omega_m > 0");
    r.check(p.gamma_m > 0.0, "gamma_m > 0");
    r.check(p.kappa_b > 0.0, "kappa_b > 0");
    r.check(p.big_g >= 0.0, "big_g >= 0");
    r.check(p.n_th >= 0.0, "n_th >= 0");
    if let Some(a) = ancilla {
        r.check(
            [a.g1, a.g2, a.delta_c, a.kappa_c].iter().all(|v| v.is_finite()),
            "all ancilla rates finite",
        );
        r.check(a.g1 >= 0.0, "g1 >= 0");
        r.check(a.g2 >= 0.0, "g2 >= 0");
        r.check(a.kappa_c > 0.0, "kappa_c > 0");
        r.check(a.g_c() >= a.g_n().abs(), "g_c >= |g_n|");
    }
    r
}

/// Steady-state driven-mode amplitude `E / (i Delta_a + kappa_a)`.
pub fn steady_alpha(pump: &PumpParams) -> Complex64 {
    Complex64::new(pump.drive_e, 0.0) / Complex64::new(pump.kappa_a, pump.delta_a)
}

/// `G = |alpha| g`.
pub fn enhanced_coupling(pump: &PumpParams) -> f64 {
    steady_alpha(pump).norm() * pump.g_bare
}

/// Ancilla settings that cancel the backaction at the mechanical resonance:
/// `g1 = g2 = G/sqrt(2)`, `Delta_c = -omega_m`, `kappa_c = gamma_m / 2`.
pub fn matched_ancilla(params: &SystemParams) -> AncillaCoupling {
    let g = params.big_g / SQRT_2;
    AncillaCoupling {
        g1: g,
        g2: g,
        delta_c: -params.omega_m,
        kappa_c: 0.5 * params.gamma_m,
    }
}

/// How `g2` is held when the imbalance is tabulated at fixed counter-rotating coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Convention {
    /// `g2 = sqrt(2) G / 2`
    Half,
    /// `g2 = sqrt(2) G`
    Full,
}

impl G2Convention {
    pub fn g2(&self, big_g: f64) -> f64 {
        match self {
            G2Convention::Half => SQRT_2 * big_g / 2.0,
            G2Convention::Full => SQRT_2 * big_g,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            G2Convention::Half => "g2=sqrt2G/2",
            G2Convention::Full => "g2=sqrt2G",
        }
    }
}

/// Rule that produces the ancilla coupling for a given `G`. Used wherever `G`
/// is varied and the ancilla has to follow it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingRule {
    /// No ancilla.
    Free,
    /// Ancilla fixed independently of `G`.
    Fixed(AncillaCoupling),
    /// Fully matched ancilla at every `G`.
    Matched,
    /// `g_c = sqrt(2) G`, `g_n = ratio * sqrt(2) G`.
    FixedGc { g_n_ratio: f64 },
    /// `g2` per convention, `g_n = ratio * sqrt(2) G`, `g1 = g2 + g_n`.
    FixedG2 { g_n_ratio: f64, convention: G2Convention },
}

impl CouplingRule {
    /// Ancilla for the given system, or `None` for the free system.
    /// Detuning and linewidth always take the matched values.
    pub fn ancilla(&self, params: &SystemParams) -> Option<AncillaCoupling> {
        let m = matched_ancilla(params);
        let sg = SQRT_2 * params.big_g;
        match *self {
            CouplingRule::Free => None,
            CouplingRule::Fixed(a) => Some(a),
            CouplingRule::Matched => Some(m),
            CouplingRule::FixedGc { g_n_ratio } => {
                Some(AncillaCoupling::from_gc_gn(sg, g_n_ratio * sg, m.delta_c, m.kappa_c))
            }
            CouplingRule::FixedG2 { g_n_ratio, convention } => {
                let g2 = convention.g2(params.big_g);
                Some(AncillaCoupling {
                    g1: g2 + g_n_ratio * sg,
                    g2,
                    delta_c: m.delta_c,
                    kappa_c: m.kappa_c,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_rules() {
        let p = SystemParams::canonical();
        assert!(CouplingRule::Free.ancilla(&p).is_none());
        assert_eq!(CouplingRule::Matched.ancilla(&p), Some(matched_ancilla(&p)));
        let a = CouplingRule::FixedGc { g_n_ratio: 1.0 }.ancilla(&p).unwrap();
        assert!((a.g2).abs() < 1e-16);
        let a = CouplingRule::FixedG2 { g_n_ratio: 0.5, convention: G2Convention::Half }
            .ancilla(&p)
            .unwrap();
        assert!((a.g2 - 0.1414213562373095).abs() < 1e-15);
        assert!((a.g_n() - 0.5 * SQRT_2 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn canonical_is_valid() {
        let p = SystemParams::canonical();
        let a = matched_ancilla(&p);
        assert!(validate(&p, Some(&a)).is_valid());
    }

    #[test]
    fn zero_kappa_b_is_reported() {
        let mut p = SystemParams::canonical();
        p.kappa_b = 0.0;
        let r = validate(&p, None);
        assert_eq!(r.violations, vec!["kappa_b > 0 violated".to_string()]);
    }

    #[test]
    fn validation_collects_everything() {
        let p = SystemParams {
            omega_m: 1.0,
            gamma_m: -1.0,
            kappa_b: 0.0,
            delta_b: -1.0,
            big_g: -0.1,
            n_th: -1.0,
        };
        assert_eq!(validate(&p, None).violations.len(), 4);
    }

    #[test]
    fn imbalanced_is_valid() {
        let p = SystemParams::canonical();
        let a = AncillaCoupling {
            g1: 0.1,
            g2: 0.3,
            delta_c: -1.0,
            kappa_c: 6e-4,
        };
        assert!(validate(&p, Some(&a)).is_valid());
        assert!((a.g_n() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn alpha_examples() {
        let a = steady_alpha(&PumpParams { delta_a: 0.0, kappa_a: 1.0, drive_e: 1.0, g_bare: 0.1 });
        assert_eq!(a, Complex64::new(1.0, 0.0));
        let a = steady_alpha(&PumpParams { delta_a: 0.0, kappa_a: 1.0, drive_e: 0.0, g_bare: 0.1 });
        assert_eq!(a.norm(), 0.0);
        let pump = PumpParams { delta_a: 1.0, kappa_a: 1.0, drive_e: 2.0, g_bare: 0.1 };
        assert!((steady_alpha(&pump).norm_sqr() - 2.0).abs() < 1e-14);
        // fixed point of the driven-mode equation with x = 0
        let alpha = steady_alpha(&pump);
        let lhs = Complex64::new(pump.kappa_a, pump.delta_a) * alpha;
        assert!((lhs - pump.drive_e).norm() < 1e-15);
        assert!((enhanced_coupling(&pump) - 0.1 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn coupling_from_alpha() {
        let pump = PumpParams { delta_a: 0.0, kappa_a: 1.0, drive_e: 10.0, g_bare: 0.02 };
        assert!((enhanced_coupling(&pump) - 0.2).abs() < 1e-15);
        let pump = PumpParams { g_bare: 0.0, ..pump };
        assert_eq!(enhanced_coupling(&pump), 0.0);
    }

    #[test]
    fn matched_values() {
        let p = SystemParams::canonical();
        let a = matched_ancilla(&p);
        assert!((a.g1 - 0.1414).abs() < 1e-4);
        assert_eq!(a.g1, a.g2);
        assert_eq!(a.delta_c, -1.0);
        assert!((a.kappa_c - 6e-4).abs() < 1e-18);
        assert_eq!(a.g_n(), 0.0);
        assert!((a.g_c() - SQRT_2 * p.big_g).abs() < 1e-15);

        let a0 = matched_ancilla(&p.with_g(0.0));
        assert_eq!((a0.g1, a0.g2, a0.delta_c), (0.0, 0.0, -1.0));
    }

    #[test]
    fn s_th_exact() {
        let p = SystemParams::canonical();
        assert_eq!(p.noise_model().s_th, 2.0 * p.gamma_m * p.n_th);
        assert!((p.s_th() - 0.024).abs() < 1e-15);
    }

    #[test]
    fn homodyne_range() {
        assert!(HomodyneSettings { phi: 0.0 }.is_valid());
        assert!(!HomodyneSettings { phi: TAU }.is_valid());
    }
}
