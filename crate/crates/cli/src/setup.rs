//! Resolved run configuration: parameters, ancilla and control mode.

use crate::error::{CliError, Result};
use cqnc_core::params::config::AncillaSection;
use cqnc_core::spectra::{noise_spectrum_balanced, noise_spectrum_statespace};
use cqnc_core::{AncillaCoupling, Config, ControlMode, CouplingRule, SpectrumSample, SystemParams};

#[derive(Debug, Clone)]
pub struct Setup {
    pub config: Config,
    pub control: ControlMode,
    /// Whether the control mode came from the command line.
    pub explicit: bool,
}

impl Setup {
    /// `control = None` picks `balanced` or `imbalanced` from the ancilla, or
    /// `off` without one.
    pub fn new(config: Config, control: Option<ControlMode>) -> Result<Self> {
        config.check()?;
        let anc = config.ancilla()?;
        let explicit = control.is_some();
        let control = match (control, anc) {
            (None, None) => ControlMode::Off,
            (None, Some(a)) if a.is_balanced() => ControlMode::Balanced,
            (None, Some(_)) => ControlMode::Imbalanced,
            (Some(ControlMode::Off), _) => ControlMode::Off,
            (Some(mode), None) => {
                return Err(CliError::Usage(format!("--control {} needs an [ancilla] section", mode.as_str())))
            }
            (Some(ControlMode::Balanced), Some(a)) if !a.is_balanced() => {
                return Err(cqnc_core::Error::ModeMismatch("balanced control requires g1 == g2".into()).into())
            }
            (Some(mode), Some(_)) => mode,
        };
        Ok(Self { config, control, explicit })
    }

    pub fn preset(&self) -> &str {
        match self.config.preset.id.as_str() {
            "" => "custom",
            id => id,
        }
    }

    pub fn params(&self) -> SystemParams {
        self.config.system
    }

    fn section(&self) -> Option<&AncillaSection> {
        match self.control {
            ControlMode::Off => None,
            _ => self.config.ancilla.as_ref(),
        }
    }

    /// Ancilla for `params`; a matched section follows `G`.
    pub fn ancilla_for(&self, params: &SystemParams) -> Result<Option<AncillaCoupling>> {
        Ok(self.section().map(|s| s.resolve(params)).transpose()?)
    }

    pub fn ancilla(&self) -> Result<Option<AncillaCoupling>> {
        self.ancilla_for(&self.params())
    }

    pub fn require_ancilla(&self, what: &str) -> Result<AncillaCoupling> {
        self.ancilla()?.ok_or_else(|| {
            CliError::Usage(format!("{what} needs an ancilla (--control balanced|imbalanced and an [ancilla] section)"))
        })
    }

    /// How the ancilla follows `G` in threshold searches.
    pub fn rule(&self) -> Result<CouplingRule> {
        Ok(match self.section() {
            None => CouplingRule::Free,
            Some(s) if s.matched && *s == (AncillaSection { matched: true, ..Default::default() }) => {
                CouplingRule::Matched
            }
            Some(s) => CouplingRule::Fixed(s.resolve(&self.params())?),
        })
    }

    pub fn dimension(&self) -> usize {
        match self.control {
            ControlMode::Off => 4,
            _ => 6,
        }
    }

    /// Controlled spectrum by the route the control mode asks for.
    pub fn controlled_spectrum(&self, omega: f64, params: &SystemParams, a: &AncillaCoupling) -> Result<SpectrumSample> {
        Ok(match self.control {
            ControlMode::Balanced => noise_spectrum_balanced(omega, params, a)?,
            _ => noise_spectrum_statespace(omega, params, a)?,
        })
    }
}
