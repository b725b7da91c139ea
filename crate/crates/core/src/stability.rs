//! Routh–Hurwitz analysis of the linearized dynamics, with an eigenvalue
//! cross-check and a bisection search for the coupling threshold.
//!
//! Jacobians are written in the operator basis `[b, b†, x, p]` (free) or
//! `[b, b†, c, c†, x, p]` (with ancilla).

use crate::params::{AncillaCoupling, CouplingRule, SystemParams};
use crate::response::{optical_spring_free, OpticalSpring};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Imaginary residue allowed on a characteristic coefficient.
pub const IMAG_TOL: f64 = 1e-10;
/// Bisection tolerance of [`g_max_search`], in units of `omega_m`.
pub const GMAX_TOL: f64 = 1e-4;
/// Upper end of the coupling bracket searched by [`g_max_search`].
pub const GMAX_UPPER: f64 = 2.0;
const GMAX_LOWER: f64 = 1e-6;
/// Coarse step of the threshold scan.
pub const GMAX_SCAN_STEP: f64 = 1e-2;

/// Where a Jacobian came from. Closed-form coefficients exist for some sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianSource {
    Free(SystemParams),
    Controlled(SystemParams, AncillaCoupling),
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianSpec {
    pub dimension: usize,
    pub entries: DMatrix<Complex64>,
    pub source: JacobianSource,
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Free probe/mechanics Jacobian.
pub fn jacobian_free(params: &SystemParams) -> JacobianSpec {
    let (db, kb, g, wm, gm) = (params.delta_b, params.kappa_b, params.big_g, params.omega_m, params.gamma_m);
    let z = cx(0.0, 0.0);
    #[rustfmt::skip]
    let rows = [
        cx(-kb, -db), z,            cx(0.0, -g), z,
        z,            cx(-kb, db),  cx(0.0, g),  z,
        z,            z,            z,           cx(wm, 0.0),
        cx(-g, 0.0),  cx(-g, 0.0),  cx(-wm, 0.0), cx(-gm, 0.0),
    ];
    JacobianSpec {
        dimension: 4,
        entries: DMatrix::from_row_slice(4, 4, &rows),
        source: JacobianSource::Free(*params),
    }
}

/// Jacobian with the ancilla mode coupled to the probe.
pub fn jacobian_cqnc(params: &SystemParams, ancilla: &AncillaCoupling) -> JacobianSpec {
    let (db, kb, g, wm, gm) = (params.delta_b, params.kappa_b, params.big_g, params.omega_m, params.gamma_m);
    let (dc, kc, g1, g2) = (ancilla.delta_c, ancilla.kappa_c, ancilla.g1, ancilla.g2);
    let z = cx(0.0, 0.0);
    #[rustfmt::skip]
    let rows = [
        cx(-kb, -db), z,           cx(0.0, -g1), cx(0.0, -g2), cx(0.0, -g), z,
        z,            cx(-kb, db), cx(0.0, g2),  cx(0.0, g1),  cx(0.0, g),  z,
        cx(0.0, -g1), cx(0.0, -g2), cx(-kc, -dc), z,           z,           z,
        cx(0.0, g2),  cx(0.0, g1),  z,           cx(-kc, dc),  z,           z,
        z,            z,            z,           z,            z,           cx(wm, 0.0),
        cx(-g, 0.0),  cx(-g, 0.0),  z,           z,            cx(-wm, 0.0), cx(-gm, 0.0),
    ];
    JacobianSpec {
        dimension: 6,
        entries: DMatrix::from_row_slice(6, 6, &rows),
        source: JacobianSource::Controlled(*params, *ancilla),
    }
}

/// Jacobian for `params` with the ancilla produced by `rule`.
pub fn jacobian_for(params: &SystemParams, rule: &CouplingRule) -> JacobianSpec {
    match rule.ancilla(params) {
        None => jacobian_free(params),
        Some(a) => jacobian_cqnc(params, &a),
    }
}

/// `[1, a_1, ..., a_4]` of the free system in closed form.
pub fn coefficients_free_closed(p: &SystemParams) -> Vec<f64> {
    let (db, kb, g, wm, gm) = (p.delta_b, p.kappa_b, p.big_g, p.omega_m, p.gamma_m);
    let b2 = db * db + kb * kb;
    vec![
        1.0,
        gm + 2.0 * kb,
        db * db + 2.0 * gm * kb + kb * kb + wm * wm,
        gm * b2 + 2.0 * kb * wm * wm,
        -2.0 * g * g * db * wm + wm * wm * b2,
    ]
}

/// `[1, a_1, ..., a_6]` of the balanced controlled system in closed form.
pub fn coefficients_cqnc_closed(p: &SystemParams, a: &AncillaCoupling) -> Result<Vec<f64>> {
    if !a.is_balanced() {
        return Err(Error::ModeMismatch(
            "closed-form coefficients need balanced coupling (g1 == g2)".into(),
        ));
    }
    let (db, kb, g, wm, gm) = (p.delta_b, p.kappa_b, p.big_g, p.omega_m, p.gamma_m);
    let (dc, kc, gc) = (a.delta_c, a.kappa_c, a.g_c());
    let (g2, gc2, wm2, db2, dc2) = (g * g, gc * gc, wm * wm, db * db, dc * dc);
    let ks = kb + kc;
    let a1 = gm + 2.0 * ks;
    let a2 = wm2 + db2 + dc2 + 2.0 * (gm * kc + gm * kb + kc * kb) + ks * ks;
    let a3 = db2 * (gm + 2.0 * kc) + dc2 * (gm + 2.0 * kb) + 2.0 * wm2 * ks + gm * ks * ks
        + 2.0 * kb * kc * (gm + kb + kc);
    let a4 = -db * (2.0 * g2 * wm + gc2 * dc) + dc2 * wm2 + db2 * wm2 + db2 * dc2
        + wm2 * (ks * ks + 2.0 * kb * kc)
        + db2 * kc * (2.0 * gm + kc)
        + dc2 * kb * (2.0 * gm + kb)
        + kb * kc * (2.0 * gm * kb + 2.0 * gm * kc + kb * kc);
    let a5 = -db * (4.0 * g2 * wm * kc + gc2 * dc * gm)
        + gm * (db2 + kb * kb) * (dc2 + kc * kc)
        + 2.0 * wm2 * (dc2 * kb + db2 * kc + kc * kb * ks);
    let a6 = -db * wm * (gc2 * dc * wm + 2.0 * g2 * (dc2 + kc * kc))
        + wm2 * (db2 + kb * kb) * (dc2 + kc * kc);
    Ok(vec![1.0, a1, a2, a3, a4, a5, a6])
}

/// `[1, a_1, ..., a_n]` of `det(lambda I - A)` by Faddeev–LeVerrier.
pub fn numeric_coefficients(spec: &JacobianSpec) -> Result<Vec<f64>> {
    let a = &spec.entries;
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut c = vec![Complex64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        m = a * &m + &id * c[k - 1];
        let am = a * &m;
        c[k] = -am.trace() / k as f64;
    }
    c.iter()
        .enumerate()
        .map(|(k, v)| {
            if v.im.abs() > IMAG_TOL {
                Err(Error::ImaginaryResidue { index: k, residue: v.im.abs() })
            } else {
                Ok(v.re)
            }
        })
        .collect()
}

/// Characteristic coefficients `[1, a_1, ..., a_n]`. Closed forms are used
/// for the free system and for balanced coupling, the numeric expansion
/// otherwise.
pub fn characteristic_coefficients(spec: &JacobianSpec) -> Result<Vec<f64>> {
    match &spec.source {
        JacobianSource::Free(p) => Ok(coefficients_free_closed(p)),
        JacobianSource::Controlled(p, a) if a.is_balanced() => coefficients_cqnc_closed(p, a),
        _ => numeric_coefficients(spec),
    }
}

/// Hurwitz matrix of `[a_0, a_1, ..., a_n]`: `H[i][j] = a_{2j - i + 1}`.
pub fn hurwitz_matrix(coefficients: &[f64]) -> DMatrix<f64> {
    let n = coefficients.len() - 1;
    DMatrix::from_fn(n, n, |i, j| {
        let k = 2 * j as isize - i as isize + 1;
        if k < 0 || k as usize > n {
            0.0
        } else {
            coefficients[k as usize]
        }
    })
}

/// Leading principal minors `D_1..D_n`. The last one uses `D_n = D_{n-1} a_n`.
pub fn hurwitz_determinants(coefficients: &[f64]) -> Vec<f64> {
    let n = coefficients.len() - 1;
    let h = hurwitz_matrix(coefficients);
    let mut d: Vec<f64> = (1..n).map(|k| h.view((0, 0), (k, k)).determinant()).collect();
    let last = d.last().copied().unwrap_or(1.0) * coefficients[n];
    d.push(last);
    d
}

/// Name of the first failing Routh–Hurwitz condition, or `"none"`.
pub fn binding_constraint(coefficients: &[f64], determinants: &[f64]) -> String {
    if let Some(k) = coefficients.iter().skip(1).position(|&a| a <= 0.0) {
        return format!("a_{}", k + 1);
    }
    match determinants.iter().position(|&d| d <= 0.0) {
        Some(k) => format!("D_{}", k + 1),
        None => "none".into(),
    }
}

/// All eigenvalues of the Jacobian, from a complex Schur decomposition.
pub fn eigenvalues(spec: &JacobianSpec) -> Result<Vec<Complex64>> {
    let schur = spec
        .entries
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `[1, a_1, ..., a_n]`
    pub coefficients: Vec<f64>,
    /// `[D_1, ..., D_n]`
    pub hurwitz_determinants: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// Routh–Hurwitz verdict.
    pub stable: bool,
    /// Eigenvalue verdict.
    pub eigen_stable: bool,
    /// Largest real part among the eigenvalues (negative when stable).
    pub max_real_part: f64,
    pub binding_constraint: String,
}

impl StabilityReport {
    pub fn routes_agree(&self) -> bool {
        self.stable == self.eigen_stable
    }
}

pub fn hurwitz_stable(coefficients: &[f64]) -> bool {
    coefficients.iter().skip(1).all(|&a| a > 0.0)
        && hurwitz_determinants(coefficients).iter().all(|&d| d > 0.0)
}

/// Full report: coefficients, Hurwitz chain and eigenvalues.
pub fn eigen_stability(spec: &JacobianSpec) -> Result<StabilityReport> {
    let coefficients = characteristic_coefficients(spec)?;
    let hurwitz_determinants = hurwitz_determinants(&coefficients);
    let eigenvalues = eigenvalues(spec)?;
    let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        stable: hurwitz_stable(&coefficients),
        eigen_stable: max_real_part < 0.0,
        binding_constraint: binding_constraint(&coefficients, &hurwitz_determinants),
        coefficients,
        hurwitz_determinants,
        eigenvalues,
        max_real_part,
    })
}

/// Bound on `|alpha|^2` from the sign of `a_4` of the free system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaBound {
    /// Red detuning: `|alpha|^2` must stay below this.
    Upper(f64),
    /// Blue detuning: `a_4 > 0` for every drive.
    Unbounded,
}

impl AlphaBound {
    pub fn holds(&self, alpha_sq: f64) -> bool {
        match *self {
            AlphaBound::Upper(b) => alpha_sq < b,
            AlphaBound::Unbounded => true,
        }
    }
}

pub fn alpha_bound_free(params: &SystemParams, g_bare: f64) -> Result<AlphaBound> {
    let db = params.delta_b;
    if db == 0.0 {
        return Err(Error::Degenerate("Delta_b = 0".into()));
    }
    if !(g_bare > 0.0) {
        return Err(Error::Degenerate("bare coupling must be positive".into()));
    }
    if db < 0.0 {
        return Ok(AlphaBound::Unbounded);
    }
    let kb = params.kappa_b;
    Ok(AlphaBound::Upper(
        (db * db + kb * kb) * params.omega_m / (2.0 * db.abs() * g_bare * g_bare),
    ))
}

/// The same bound expressed on `G`; `None` when unbounded.
pub fn coupling_bound_free(params: &SystemParams) -> Result<Option<f64>> {
    Ok(match alpha_bound_free(params, 1.0)? {
        AlphaBound::Upper(b) => Some(b.sqrt()),
        AlphaBound::Unbounded => None,
    })
}

/// Every stability verdict available for the free system at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeVerdicts {
    pub alpha_bound: Option<f64>,
    pub alpha_bound_holds: bool,
    pub report: StabilityReport,
    pub spring: OpticalSpring,
    pub spring_stable: bool,
}

pub fn free_verdicts(params: &SystemParams, omega: f64) -> Result<FreeVerdicts> {
    let bound = coupling_bound_free(params)?;
    let spring = optical_spring_free(omega, params);
    Ok(FreeVerdicts {
        alpha_bound: bound,
        alpha_bound_holds: bound.is_none_or(|b| params.big_g < b),
        report: eigen_stability(&jacobian_free(params))?,
        spring_stable: spring.gamma_eff > 0.0 && spring.omega_eff_sq > 0.0,
        spring,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GMaxResult {
    pub g_max: f64,
    /// `false` when the system is still stable at the top of the bracket.
    pub bounded: bool,
    /// Eigenvalue verdict at `g_max - 2 tol`.
    pub eigen_stable_below: bool,
    /// Eigenvalue verdict at `g_max + 2 tol`.
    pub eigen_stable_above: bool,
}

fn hurwitz_at(params: &SystemParams, rule: &CouplingRule, g: f64) -> Result<bool> {
    let p = params.with_g(g);
    Ok(hurwitz_stable(&characteristic_coefficients(&jacobian_for(&p, rule))?))
}

fn eigen_at(params: &SystemParams, rule: &CouplingRule, g: f64) -> Result<bool> {
    let p = params.with_g(g);
    let ev = eigenvalues(&jacobian_for(&p, rule))?;
    Ok(ev.iter().all(|z| z.re < 0.0))
}

/// Upper edge of the stable interval that starts at `G -> 0`. The bracket
/// `(0, 2]` is scanned in steps of `GMAX_SCAN_STEP` and the first sign
/// change is bisected; stability can return at larger `G`, so a plain
/// bisection on the whole bracket is not enough. The ancilla follows `rule`
/// at each trial coupling.
pub fn g_max_search(params: &SystemParams, rule: &CouplingRule) -> Result<GMaxResult> {
    if !hurwitz_at(params, rule, GMAX_LOWER)? {
        return Err(Error::UnstableAtLowerBracket(GMAX_LOWER));
    }
    let mut lo = GMAX_LOWER;
    let mut hi = None;
    let steps = (GMAX_UPPER / GMAX_SCAN_STEP).round() as usize;
    for k in 1..=steps {
        let g = (k as f64 * GMAX_SCAN_STEP).min(GMAX_UPPER);
        if hurwitz_at(params, rule, g)? {
            lo = g;
        } else {
            hi = Some(g);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return Ok(GMaxResult {
            g_max: GMAX_UPPER,
            bounded: false,
            eigen_stable_below: eigen_at(params, rule, GMAX_UPPER - 2.0 * GMAX_TOL)?,
            eigen_stable_above: true,
        });
    };
    while hi - lo > 0.25 * GMAX_TOL {
        let mid = 0.5 * (lo + hi);
        if hurwitz_at(params, rule, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g_max = 0.5 * (lo + hi);
    Ok(GMaxResult {
        g_max,
        bounded: true,
        eigen_stable_below: eigen_at(params, rule, g_max - 2.0 * GMAX_TOL)?,
        eigen_stable_above: eigen_at(params, rule, g_max + 2.0 * GMAX_TOL)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::matched_ancilla;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn decoupled_alpha_zero() {
        let p = SystemParams::canonical().with_g(0.0);
        let c = coefficients_free_closed(&p);
        assert_eq!(c[4], p.omega_m.powi(2) * (p.delta_b.powi(2) + p.kappa_b.powi(2)));
        assert!(hurwitz_determinants(&c).iter().all(|&d| d > 0.0));
        let r = eigen_stability(&jacobian_free(&p)).unwrap();
        assert!(r.stable && r.eigen_stable);
        assert_eq!(r.binding_constraint, "none");
        let mut re: Vec<f64> = r.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + p.kappa_b).abs() < 1e-12 && (re[1] + p.kappa_b).abs() < 1e-12);
        assert!((re[2] + p.gamma_m / 2.0).abs() < 1e-12 && (re[3] + p.gamma_m / 2.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_a1() {
        let c = coefficients_free_closed(&SystemParams::canonical());
        assert!((c[1] - 0.0212).abs() < 1e-15);
        let n = numeric_coefficients(&jacobian_free(&SystemParams::canonical())).unwrap();
        for (x, y) in c.iter().zip(&n) {
            assert!(rel(*y, *x) < 1e-12, "{x} {y}");
        }
    }

    #[test]
    fn closed_controlled_matches_numeric() {
        let p = SystemParams::canonical();
        let a = matched_ancilla(&p);
        let spec = jacobian_cqnc(&p, &a);
        let c = coefficients_cqnc_closed(&p, &a).unwrap();
        let n = numeric_coefficients(&spec).unwrap();
        for (x, y) in c.iter().zip(&n) {
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-6), "{x} {y}");
        }
    }

    #[test]
    fn last_determinant_structure() {
        let p = SystemParams::canonical();
        let c = coefficients_cqnc_closed(&p, &matched_ancilla(&p)).unwrap();
        let d = hurwitz_determinants(&c);
        assert_eq!(d[5], d[4] * c[6]);
        // the full 6x6 LU loses a few digits on determinants this small
        let full = hurwitz_matrix(&c).determinant();
        assert!(rel(full, d[5]) < 1e-4, "{full} {}", d[5]);
    }

    #[test]
    fn canonical_controlled_stable_then_unstable() {
        let p = SystemParams::canonical();
        let r = eigen_stability(&jacobian_cqnc(&p, &matched_ancilla(&p))).unwrap();
        assert!(r.stable && r.eigen_stable);
        let p4 = p.with_g(0.4);
        let r = eigen_stability(&jacobian_cqnc(&p4, &matched_ancilla(&p4))).unwrap();
        assert!(!r.stable && !r.eigen_stable);
        assert_ne!(r.binding_constraint, "none");
    }

    #[test]
    fn red_detuned_binding_a4() {
        let p = SystemParams::canonical().with_delta_b(1.0).with_g(0.8);
        let r = eigen_stability(&jacobian_free(&p)).unwrap();
        assert!(!r.stable && !r.eigen_stable);
        assert_eq!(r.binding_constraint, "a_4");
    }

    #[test]
    fn alpha_bounds() {
        let red = SystemParams { kappa_b: 1e-9, ..SystemParams::canonical().with_delta_b(1.0) };
        let gb = coupling_bound_free(&red).unwrap().unwrap();
        assert!((gb - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        let blue = SystemParams::canonical();
        assert_eq!(alpha_bound_free(&blue, 0.01).unwrap(), AlphaBound::Unbounded);
        let zero = SystemParams::canonical().with_delta_b(0.0);
        assert!(matches!(alpha_bound_free(&zero, 0.01), Err(Error::Degenerate(_))));
        // bound in |alpha|^2 form
        let AlphaBound::Upper(b) = alpha_bound_free(&red, 0.01).unwrap() else { panic!() };
        assert!(rel(b, 1.0 / (2.0 * 1e-4)) < 1e-9);
    }

    #[test]
    fn alpha_bound_is_a4_sign_change() {
        let p = SystemParams::canonical().with_delta_b(1.0);
        let gb = coupling_bound_free(&p).unwrap().unwrap();
        let a4 = |g: f64| coefficients_free_closed(&p.with_g(g))[4];
        assert!(a4(gb).abs() < 1e-12);
        assert!(a4(gb * (1.0 - 1e-6)) > 0.0 && a4(gb * (1.0 + 1e-6)) < 0.0);
    }

    #[test]
    fn free_blue_verdicts_are_distinct() {
        let v = free_verdicts(&SystemParams::canonical(), 1.0).unwrap();
        assert!(v.alpha_bound_holds);
        assert!(v.alpha_bound.is_none());
        assert!(!v.spring_stable);
        assert!(v.spring.gamma_eff < 0.0);
        assert!(v.report.routes_agree());
    }

    #[test]
    fn red_gmax() {
        let p = SystemParams::canonical().with_delta_b(1.0);
        let r = g_max_search(&p, &CouplingRule::Free).unwrap();
        assert!((r.g_max - 0.707).abs() < 0.01, "{}", r.g_max);
        assert!(r.eigen_stable_below && !r.eigen_stable_above);
    }

    #[test]
    fn matched_gmax_is_a_true_boundary() {
        let r = g_max_search(&SystemParams::canonical(), &CouplingRule::Matched).unwrap();
        assert!(r.bounded);
        assert!(r.eigen_stable_below && !r.eigen_stable_above, "{r:?}");
    }

    #[test]
    fn eigenvalue_sum_and_product() {
        let p = SystemParams::canonical();
        let spec = jacobian_cqnc(&p, &matched_ancilla(&p));
        let ev = eigenvalues(&spec).unwrap();
        let c = numeric_coefficients(&spec).unwrap();
        let sum: Complex64 = ev.iter().sum();
        let prod: Complex64 = ev.iter().product();
        assert!((sum.re + c[1]).abs() < 1e-12);
        assert!((prod.re - c[6]).abs() < 1e-10 * c[6].abs().max(1e-3));
    }
}
