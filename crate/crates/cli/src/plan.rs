//! Parameter sweeps: validated plan, per-point evaluation and tabulation.

use crate::error::{CliError, Result};
use crate::setup::Setup;
use crate::table::{Metadata, OutputTable, POLE_COLUMN};
use cqnc_core::params::config::SweepSection;
use cqnc_core::response::{chi_mech_loaded, nms_eigenfrequencies, optical_spring_cqnc, optical_spring_free};
use cqnc_core::spectra::{
    linear_grid, log_grid, noise_spectrum_free, sql_optimal_g, sql_spectrum, sql_spectrum_cqnc, transfer_functions,
};
use cqnc_core::stability::{characteristic_coefficients, hurwitz_determinants, hurwitz_stable, jacobian_cqnc, jacobian_free};
use cqnc_core::{validate, AncillaCoupling, ControlMode, SystemParams};
use rayon::prelude::*;
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Omega,
    G,
    DeltaC,
    GN,
    Phi,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Omega, Axis::G, Axis::DeltaC, Axis::GN, Axis::Phi];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Omega => "omega",
            Axis::G => "G",
            Axis::DeltaC => "delta_c",
            Axis::GN => "g_n",
            Axis::Phi => "phi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown axis `{s}`; expected one of: {}", names(Self::ALL.map(|a| a.name())))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    S,
    SC,
    Ratio,
    R,
    GammaEff,
    GammaEffC,
    GL,
    SL,
    SLC,
    OmegaPm,
    Di,
    Stable,
    Chi,
    ChiF,
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::S,
        Quantity::SC,
        Quantity::Ratio,
        Quantity::R,
        Quantity::GammaEff,
        Quantity::GammaEffC,
        Quantity::GL,
        Quantity::SL,
        Quantity::SLC,
        Quantity::OmegaPm,
        Quantity::Di,
        Quantity::Stable,
        Quantity::Chi,
        Quantity::ChiF,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::S => "S",
            Quantity::SC => "S_c",
            Quantity::Ratio => "ratio",
            Quantity::R => "R",
            Quantity::GammaEff => "gamma_eff",
            Quantity::GammaEffC => "gamma_eff_c",
            Quantity::GL => "G_L",
            Quantity::SL => "S_L",
            Quantity::SLC => "S_L_c",
            Quantity::OmegaPm => "omega_pm",
            Quantity::Di => "D_i",
            Quantity::Stable => "stable",
            Quantity::Chi => "chi",
            Quantity::ChiF => "chi_F",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown quantity `{s}`; expected one of: {}", names(Self::ALL.map(|q| q.name())))))
    }

    fn needs_ancilla(&self) -> bool {
        matches!(self, Quantity::SC | Quantity::Ratio | Quantity::R | Quantity::GammaEffC | Quantity::SLC)
    }

    fn columns(&self, dimension: usize) -> Vec<String> {
        match self {
            Quantity::OmegaPm => vec!["omega_plus".into(), "omega_minus".into(), "splitting".into()],
            Quantity::Di => (1..=dimension).map(|k| format!("D_{k}")).collect(),
            Quantity::Chi => vec!["chi_re".into(), "chi_im".into()],
            Quantity::ChiF => vec!["chi_F_re".into(), "chi_F_im".into()],
            q => vec![q.name().into()],
        }
    }
}

fn names<const N: usize>(all: [&str; N]) -> String {
    all.join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hold {
    Gc,
    G2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub outputs: Vec<Quantity>,
    /// Evaluation frequency when the axis is not `omega`.
    pub omega: f64,
    pub tie_delta_b: bool,
    pub hold: Option<(Hold, Option<f64>)>,
}

impl SweepPlan {
    pub fn from_section(s: &SweepSection) -> Result<Self> {
        let axis = Axis::parse(&s.axis)?;
        let spacing = match s.spacing.as_str() {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(CliError::Usage(format!("unknown spacing `{other}`; expected linear or log"))),
        };
        let outputs = s.outputs.iter().map(|q| Quantity::parse(q)).collect::<Result<Vec<_>>>()?;
        let hold = match s.hold.as_deref() {
            None => None,
            Some("g_c") => Some((Hold::Gc, s.hold_value)),
            Some("g2") => Some((Hold::G2, s.hold_value)),
            Some(other) => return Err(CliError::Usage(format!("unknown hold `{other}`; expected g_c or g2"))),
        };
        let plan = Self {
            axis,
            min: s.min,
            max: s.max,
            points: s.points,
            spacing,
            outputs,
            omega: s.omega,
            tie_delta_b: s.tie_delta_b,
            hold,
        };
        plan.check()?;
        Ok(plan)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Usage(format!("[sweep] {m}")));
        if self.points < 2 {
            return bad("needs points >= 2");
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return bad("needs finite min < max");
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return bad("log spacing needs min > 0");
        }
        if self.outputs.is_empty() {
            return bad("needs at least one output");
        }
        if self.axis == Axis::GN && self.hold.is_none() {
            return bad("a g_n axis needs hold = \"g_c\" or \"g2\"");
        }
        if self.tie_delta_b && self.axis != Axis::DeltaC {
            return bad("tie_delta_b only applies to a delta_c axis");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linear_grid(self.min, self.max, self.points),
            Spacing::Log => log_grid(self.min, self.max, self.points),
        }
    }
}

/// Everything needed to evaluate the quantities at one sweep point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub params: SystemParams,
    pub ancilla: Option<AncillaCoupling>,
    pub omega: f64,
    pub phi: f64,
}

fn point(plan: &SweepPlan, setup: &Setup, x: f64) -> Result<Point> {
    let mut params = setup.params();
    let mut omega = plan.omega;
    let mut phi = setup.config.phi();
    if plan.axis == Axis::G {
        params.big_g = x;
    }
    if plan.axis == Axis::DeltaC && plan.tie_delta_b {
        params.delta_b = x;
    }
    let mut ancilla = setup.ancilla_for(&params)?;
    match plan.axis {
        Axis::Omega => omega = x,
        Axis::Phi => phi = x,
        Axis::G => {}
        Axis::DeltaC => {
            let a = ancilla.as_mut().ok_or_else(|| CliError::Usage("a delta_c axis needs an ancilla".into()))?;
            a.delta_c = x;
        }
        Axis::GN => {
            let a = ancilla.as_mut().ok_or_else(|| CliError::Usage("a g_n axis needs an ancilla".into()))?;
            let sg = SQRT_2 * params.big_g;
            match plan.hold.expect("checked") {
                (Hold::Gc, v) => *a = AncillaCoupling::from_gc_gn(v.unwrap_or(sg), x, a.delta_c, a.kappa_c),
                (Hold::G2, v) => {
                    a.g2 = v.unwrap_or(sg / 2.0);
                    a.g1 = a.g2 + x;
                }
            }
        }
    }
    let report = validate(&params, ancilla.as_ref());
    if !report.is_valid() {
        return Err(CliError::Usage(format!("{} = {x}: {report}", plan.axis.name())));
    }
    Ok(Point { params, ancilla, omega, phi })
}

fn soft<T>(r: cqnc_core::Result<T>) -> Result<Option<T>> {
    use cqnc_core::Error as E;
    match r {
        Ok(v) => Ok(Some(v)),
        Err(E::Singular { .. } | E::ZeroSignal { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Values of one quantity, or `None` at a pole.
fn evaluate(q: Quantity, pt: &Point, setup: &Setup) -> Result<Option<Vec<f64>>> {
    let (p, w) = (&pt.params, pt.omega);
    let anc = || pt.ancilla.ok_or_else(|| CliError::Usage(format!("`{}` needs an ancilla", q.name())));
    let s = || soft(noise_spectrum_free(w, p).map(|s| s.total));
    let sc = || -> Result<Option<f64>> {
        let a = anc()?;
        match setup.controlled_spectrum(w, p, &a) {
            Ok(s) => Ok(Some(s.total)),
            Err(CliError::Core(e)) => soft(Err::<f64, _>(e)),
            Err(e) => Err(e),
        }
    };
    Ok(match q {
        Quantity::S => s()?.map(|v| vec![v]),
        Quantity::SC => sc()?.map(|v| vec![v]),
        Quantity::Ratio => s()?.zip(sc()?).map(|(s, c)| vec![c / s]),
        Quantity::R => s()?.zip(sc()?).map(|(s, c)| vec![1.0 - c / s]),
        Quantity::GammaEff => Some(vec![optical_spring_free(w, p).gamma_eff / p.gamma_m]),
        Quantity::GammaEffC => soft(optical_spring_cqnc(w, p, &anc()?))?.map(|s| vec![s.gamma_eff / p.gamma_m]),
        Quantity::GL => Some(vec![sql_optimal_g(w, p)]),
        Quantity::SL => Some(vec![sql_spectrum(w, p)]),
        Quantity::SLC => Some(vec![sql_spectrum_cqnc(w, p, &anc()?)]),
        Quantity::OmegaPm => {
            let m = nms_eigenfrequencies(p);
            Some(vec![m.exact.0.re, m.exact.1.re, m.splitting_exact()])
        }
        Quantity::Di | Quantity::Stable => {
            let spec = match pt.ancilla {
                Some(a) => jacobian_cqnc(p, &a),
                None => jacobian_free(p),
            };
            let c = characteristic_coefficients(&spec)?;
            if q == Quantity::Stable {
                Some(vec![flag(hurwitz_stable(&c))])
            } else {
                Some(hurwitz_determinants(&c))
            }
        }
        Quantity::Chi => soft(chi_mech_loaded(w, p))?.map(|c| vec![c.value.re, c.value.im]),
        Quantity::ChiF => soft(transfer_functions(w, p, pt.phi))?.map(|t| vec![t.chi_f.re, t.chi_f.im]),
    })
}

/// Evaluate the plan. Points run in parallel; rows come out in axis order.
pub fn run_sweep(plan: &SweepPlan, setup: &Setup, mut metadata: Metadata) -> Result<OutputTable> {
    let mut owned;
    let mut setup = setup;
    if plan.axis == Axis::GN && setup.control == ControlMode::Balanced {
        // g_n != 0 leaves the balanced closed form behind
        if setup.explicit {
            return Err(CliError::Usage("a g_n axis leaves g1 == g2; use --control imbalanced".into()));
        }
        owned = setup.clone();
        owned.control = ControlMode::Imbalanced;
        setup = &owned;
    }
    let dimension = setup.dimension();
    for q in &plan.outputs {
        if q.needs_ancilla() && setup.control == ControlMode::Off {
            return Err(CliError::Usage(format!(
                "`{}` needs an ancilla (--control balanced|imbalanced and an [ancilla] section)",
                q.name()
            )));
        }
    }
    let widths: Vec<usize> = plan.outputs.iter().map(|q| q.columns(dimension).len()).collect();
    let grid = plan.grid();
    let rows = grid
        .par_iter()
        .map(|&x| -> Result<(Vec<f64>, bool)> {
            let pt = point(plan, setup, x)?;
            let mut row = vec![x];
            let mut pole = false;
            for (q, &n) in plan.outputs.iter().zip(&widths) {
                match evaluate(*q, &pt, setup)? {
                    Some(v) => row.extend(v),
                    None => {
                        pole = true;
                        row.extend(std::iter::repeat_n(f64::NAN, n));
                    }
                }
            }
            Ok((row, pole))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec![plan.axis.name().to_string()];
    for q in &plan.outputs {
        columns.extend(q.columns(dimension));
    }
    let any_pole = rows.iter().any(|(_, p)| *p);
    if any_pole {
        columns.push(POLE_COLUMN.into());
    }
    metadata
        .flag("axis", plan.axis.name())
        .flag("spacing", if plan.spacing == Spacing::Log { "log" } else { "linear" })
        .flag("omega", plan.omega)
        .flag("control", setup.control.as_str())
        .flag("phi", setup.config.phi());
    if plan.outputs.iter().any(|q| matches!(q, Quantity::GammaEff | Quantity::GammaEffC)) {
        metadata.flag("gamma_eff_units", "gamma_m");
    }
    if plan.tie_delta_b {
        metadata.flag("tie_delta_b", true);
    }
    if let Some((h, v)) = plan.hold {
        let p = setup.params();
        let value = v.unwrap_or(match h {
            Hold::Gc => SQRT_2 * p.big_g,
            Hold::G2 => SQRT_2 * p.big_g / 2.0,
        });
        metadata.flag("hold", if h == Hold::Gc { "g_c" } else { "g2" }).flag("hold_value", value);
    }
    if setup.control != ControlMode::Off {
        metadata.flag("ancilla", if setup.config.ancilla.is_some_and(|a| a.matched) { "matched" } else { "fixed" });
    }
    let mut table = OutputTable::new(columns, metadata);
    for (mut row, pole) in rows {
        if any_pole {
            row.push(flag(pole));
        }
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqnc_core::params::presets;

    fn plan(name: &str) -> (SweepPlan, Setup) {
        let c = presets::load(name).unwrap();
        let p = SweepPlan::from_section(c.sweep.as_ref().unwrap()).unwrap();
        (p, Setup::new(c, None).unwrap())
    }

    #[test]
    fn every_sweep_preset_is_a_valid_plan() {
        for name in ["fig2", "fig4a", "fig4b", "fig5", "fig6"] {
            let (p, _) = plan(name);
            assert_eq!(p.grid().len(), p.points);
        }
    }

    #[test]
    fn vocabulary_errors_list_choices() {
        let e = Quantity::parse("Sc").unwrap_err().to_string();
        assert!(e.contains("S_c") && e.contains("omega_pm"));
        assert!(Axis::parse("kappa").is_err());
    }

    #[test]
    fn held_gc_gives_zero_r_crossing_structure() {
        let (p, s) = plan("fig5");
        let t = run_sweep(&p, &s, Metadata::default()).unwrap();
        assert_eq!(t.rows.len(), 101);
        let r = t.column("R").unwrap();
        let k = (0..r.len()).fold(0, |k, j| if r[j] > r[k] { j } else { k });
        assert_eq!(k, 50);
    }

    #[test]
    fn order_follows_axis() {
        let (p, s) = plan("fig4b");
        let t = run_sweep(&p, &s, Metadata::default()).unwrap();
        let g = t.column("G").unwrap();
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
