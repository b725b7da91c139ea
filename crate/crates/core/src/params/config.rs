//! Sectioned key/value configuration files.
//!
//! ```toml
//! [preset]
//! id = "canonical"
//!
//! [system]
//! gamma_m = 1.2e-3
//! kappa_b = 1e-2
//! delta_b = -1.0
//! big_g = 0.2
//! n_th = 10.0
//!
//! [ancilla]
//! matched = true
//! ```
//!
//! `[ancilla]` either sets `matched = true` (fields given explicitly override
//! the matched values) or lists all of `g1`, `g2`, `delta_c`, `kappa_c`.

use super::{matched_ancilla, validate, AncillaCoupling, HomodyneSettings, PumpParams, SystemParams};
use crate::units::SIContext;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetInfo {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncillaSection {
    #[serde(default)]
    pub matched: bool,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub delta_c: Option<f64>,
    pub kappa_c: Option<f64>,
}

impl AncillaSection {
    /// Concrete coupling for the given system. Matched sections follow `G`.
    pub fn resolve(&self, params: &SystemParams) -> Result<AncillaCoupling> {
        if self.matched {
            let m = matched_ancilla(params);
            return Ok(AncillaCoupling {
                g1: self.g1.unwrap_or(m.g1),
                g2: self.g2.unwrap_or(m.g2),
                delta_c: self.delta_c.unwrap_or(m.delta_c),
                kappa_c: self.kappa_c.unwrap_or(m.kappa_c),
            });
        }
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("[ancilla] needs `{name}` unless matched = true")))
        };
        Ok(AncillaCoupling {
            g1: need(self.g1, "g1")?,
            g2: need(self.g2, "g2")?,
            delta_c: need(self.delta_c, "delta_c")?,
            kappa_c: need(self.kappa_c, "kappa_c")?,
        })
    }
}

/// Raw `[sweep]` block. Checked by the command-line front end.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub spacing: String,
    #[serde(default)]
    pub outputs: Vec<String>,
    /// Evaluation frequency for non-frequency axes.
    #[serde(default = "one")]
    pub omega: f64,
    /// Keep `delta_b` equal to `delta_c` while sweeping `delta_c`.
    #[serde(default)]
    pub tie_delta_b: bool,
    /// Which coupling stays fixed on a `g_n` axis: `"g_c"` or `"g2"`.
    #[serde(default)]
    pub hold: Option<String>,
    /// Value of the held coupling. Defaults to `sqrt(2) G` for `g_c` and
    /// `sqrt(2) G / 2` for `g2`.
    #[serde(default)]
    pub hold_value: Option<f64>,
}

fn linear() -> String {
    "linear".into()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub preset: PresetInfo,
    pub system: SystemParams,
    pub pump: Option<PumpParams>,
    pub ancilla: Option<AncillaSection>,
    pub homodyne: Option<HomodyneSettings>,
    pub si: Option<SIContext>,
    pub sweep: Option<SweepSection>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ancilla(&self) -> Result<Option<AncillaCoupling>> {
        self.ancilla.map(|a| a.resolve(&self.system)).transpose()
    }

    pub fn phi(&self) -> f64 {
        self.homodyne.map_or(0.0, |h| h.phi)
    }

    /// Run parameter validation and turn violations into a config error.
    pub fn check(&self) -> Result<()> {
        let anc = self.ancilla()?;
        let report = validate(&self.system, anc.as_ref());
        if !report.is_valid() {
            return Err(Error::Config(report.to_string()));
        }
        if let Some(h) = self.homodyne {
            if !h.is_valid() {
                return Err(Error::Config("phi in [0, 2pi) violated".into()));
            }
        }
        if let Some(p) = self.pump {
            if !(p.kappa_a > 0.0) || !(p.g_bare >= 0.0) {
                return Err(Error::Config("pump needs kappa_a > 0 and g_bare >= 0".into()));
            }
        }
        if let Some(si) = &self.si {
            si.check()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let c = Config::parse(
            "[system]\ngamma_m = 1.2e-3\nkappa_b = 0.01\ndelta_b = -1.0\nbig_g = 0.2\n",
        )
        .unwrap();
        assert_eq!(c.system.omega_m, 1.0);
        assert_eq!(c.system.n_th, 0.0);
        assert!(c.ancilla().unwrap().is_none());
    }

    #[test]
    fn matched_with_override() {
        let c = Config::parse(
            "[system]\ngamma_m = 1.2e-3\nkappa_b = 0.01\ndelta_b = -1.0\nbig_g = 0.2\n[ancilla]\nmatched = true\ng1 = 0.3\n",
        )
        .unwrap();
        let a = c.ancilla().unwrap().unwrap();
        assert_eq!(a.g1, 0.3);
        assert!((a.g2 - 0.2 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn incomplete_ancilla_is_config_error() {
        let c = Config::parse(
            "[system]\ngamma_m = 1.2e-3\nkappa_b = 0.01\ndelta_b = -1.0\nbig_g = 0.2\n[ancilla]\ng1 = 0.3\n",
        )
        .unwrap();
        assert!(matches!(c.ancilla(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        let r = Config::parse("[system]\ngamma_m = 1\nkappa_b = 1\ndelta_b = 1\nbig_g = 1\nfoo = 2\n");
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn text_round_trip() {
        for name in super::super::presets::names() {
            let c = super::super::presets::load(name).unwrap();
            let back = Config::parse(&c.to_text()).unwrap();
            assert_eq!(c, back, "{name}");
        }
    }
}
