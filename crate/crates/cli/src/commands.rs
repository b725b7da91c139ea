//! One function per subcommand. Each returns a table plus an optional
//! human-readable report for stderr.

use crate::args::{Cli, Command, ControlArg, FormatArg, GridArgs, NmsArgs, PresetAction, RescaleArgs, SpacingArg, StabilityArgs};
use crate::error::{CliError, Result};
use crate::plan::{run_sweep, SweepPlan};
use crate::setup::Setup;
use crate::table::{Format, Metadata, OutputTable, POLE_COLUMN};
use cqnc_core::params::presets;
use cqnc_core::response::nms_eigenfrequencies;
use cqnc_core::spectra::{
    default_grid, linear_grid, log_grid, noise_spectrum_free, sql_optimal_g, sql_spectrum, sql_spectrum_cqnc,
    table1_row, TABLE1_RATIOS,
};
use cqnc_core::stability::{eigen_stability, free_verdicts, g_max_search, jacobian_cqnc, jacobian_free, StabilityReport};
use cqnc_core::units::{rescale_force_spectrum, thermal_occupation, torque_sensitivity};
use cqnc_core::{AncillaCoupling, Config, ControlMode, CouplingRule, G2Convention, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Result of a command.
#[derive(Debug)]
pub enum Output {
    Table { table: OutputTable, report: Option<String> },
    Text(String),
}

pub fn format(f: FormatArg) -> Format {
    match f {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    }
}

fn control(c: Option<ControlArg>) -> Option<ControlMode> {
    c.map(|c| match c {
        ControlArg::Off => ControlMode::Off,
        ControlArg::Balanced => ControlMode::Balanced,
        ControlArg::Imbalanced => ControlMode::Imbalanced,
    })
}

pub fn load_config(cli: &Cli) -> Result<Config> {
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
        return Ok(Config::parse(&text)?);
    }
    let name = cli.preset.as_deref().unwrap_or("canonical");
    presets::load(name).map_err(|_| {
        CliError::Usage(format!("unknown preset `{name}`; expected one of: {}", presets::names().collect::<Vec<_>>().join(", ")))
    })
}

pub fn run(cli: &Cli) -> Result<Output> {
    if let Command::Preset { action } = &cli.command {
        return preset(action);
    }
    let setup = Setup::new(load_config(cli)?, control(cli.control))?;
    let name = match &cli.command {
        Command::Spectrum(_) => "spectrum",
        Command::Sweep => "sweep",
        Command::Stability(_) => "stability",
        Command::Sql(_) => "sql",
        Command::Nms(_) => "nms",
        Command::Rescale(_) => "rescale",
        Command::Preset { .. } => unreachable!(),
    };
    let meta = Metadata::new(setup.preset(), name, cli.seed);
    match &cli.command {
        Command::Spectrum(g) => spectrum(&setup, g, meta),
        Command::Sweep => sweep(&setup, meta),
        Command::Stability(a) => stability(&setup, a, cli.seed, meta),
        Command::Sql(g) => sql(&setup, g, meta),
        Command::Nms(a) => nms(&setup, a, meta),
        Command::Rescale(a) => rescale(&setup, a, meta),
        Command::Preset { .. } => unreachable!(),
    }
}

fn table(table: OutputTable) -> Result<Output> {
    Ok(Output::Table { table, report: None })
}

fn grid(g: &GridArgs, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    if g.min.is_none() && g.max.is_none() && g.points.is_none() && g.spacing.is_none() {
        return Ok(default());
    }
    let (Some(min), Some(max)) = (g.min, g.max) else {
        return Err(CliError::Usage("--min and --max go together".into()));
    };
    let n = g.points.unwrap_or(201);
    if n < 2 || !(min < max) {
        return Err(CliError::Usage("grid needs min < max and at least 2 points".into()));
    }
    Ok(match g.spacing.unwrap_or(SpacingArg::Linear) {
        SpacingArg::Linear => linear_grid(min, max, n),
        SpacingArg::Log if min > 0.0 => log_grid(min, max, n),
        SpacingArg::Log => return Err(CliError::Usage("log spacing needs --min > 0".into())),
    })
}

fn system_flags(meta: &mut Metadata, setup: &Setup, p: &SystemParams, a: Option<&AncillaCoupling>) {
    meta.flag("control", setup.control.as_str())
        .flag("G", p.big_g)
        .flag("delta_b", p.delta_b)
        .flag("kappa_b", p.kappa_b)
        .flag("gamma_m", p.gamma_m)
        .flag("n_th", p.n_th);
    if let Some(a) = a {
        meta.flag("g1", a.g1).flag("g2", a.g2).flag("delta_c", a.delta_c).flag("kappa_c", a.kappa_c);
    }
}

fn spectrum(setup: &Setup, g: &GridArgs, mut meta: Metadata) -> Result<Output> {
    let ws = grid(g, default_grid)?;
    let p = setup.params();
    let anc = setup.ancilla()?;
    let mut columns: Vec<String> = ["omega", "S", "thermal", "background", "backaction", "shot"].map(String::from).into();
    if anc.is_some() {
        columns.extend(["S_c", "S_c_thermal", "ancilla_background", "interference", "S_c_shot"].map(String::from));
    }
    let rows = ws
        .par_iter()
        .map(|&w| -> Result<(Vec<f64>, bool)> {
            let mut row = vec![w];
            let mut pole = false;
            let mut put = |r: Result<Option<[f64; 5]>>| -> Result<()> {
                match r? {
                    Some(v) => row.extend(v),
                    None => {
                        pole = true;
                        row.extend([f64::NAN; 5]);
                    }
                }
                Ok(())
            };
            put(soft(noise_spectrum_free(w, &p)).map(|s| s.map(|s| five(s.total, s.components.values()))))?;
            if let Some(a) = anc {
                put(match setup.controlled_spectrum(w, &p, &a) {
                    Ok(s) => Ok(Some(five(s.total, s.components.values()))),
                    Err(CliError::Core(e)) => soft::<()>(Err(e)).map(|_| None),
                    Err(e) => Err(e),
                })?;
            }
            Ok((row, pole))
        })
        .collect::<Result<Vec<_>>>()?;
    let any_pole = rows.iter().any(|r| r.1);
    if any_pole {
        columns.push(POLE_COLUMN.into());
    }
    system_flags(&mut meta, setup, &p, anc.as_ref());
    meta.flag("phi", 0.0).flag(
        "route",
        match setup.control {
            ControlMode::Off => "closed form",
            ControlMode::Balanced => "closed form (balanced)",
            ControlMode::Imbalanced => "state space",
        },
    );
    let mut t = OutputTable::new(columns, meta);
    for (mut row, pole) in rows {
        if any_pole {
            row.push(if pole { 1.0 } else { 0.0 });
        }
        t.push(row);
    }
    table(t)
}

fn five(total: f64, parts: [f64; 4]) -> [f64; 5] {
    [total, parts[0], parts[1], parts[2], parts[3]]
}

fn soft<T>(r: cqnc_core::Result<T>) -> Result<Option<T>> {
    use cqnc_core::Error as E;
    match r {
        Ok(v) => Ok(Some(v)),
        Err(E::Singular { .. } | E::ZeroSignal { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn sweep(setup: &Setup, meta: Metadata) -> Result<Output> {
    let section = setup
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("sweep needs a [sweep] section in the configuration".into()))?;
    let plan = SweepPlan::from_section(section)?;
    table(run_sweep(&plan, setup, meta)?)
}

fn report_text(r: &StabilityReport) -> String {
    let mut s = String::new();
    for (k, a) in r.coefficients.iter().enumerate().skip(1) {
        let _ = writeln!(s, "a_{k} = {a:e}");
    }
    for (k, d) in r.hurwitz_determinants.iter().enumerate() {
        let _ = writeln!(s, "D_{} = {d:e}", k + 1);
    }
    for z in &r.eigenvalues {
        let _ = writeln!(s, "lambda = {:e} {:+e}i", z.re, z.im);
    }
    let verdict = |b: bool| if b { "stable" } else { "unstable" };
    let _ = writeln!(s, "Routh-Hurwitz: {}", verdict(r.stable));
    let _ = writeln!(s, "eigenvalues:   {} (max Re = {:e})", verdict(r.eigen_stable), r.max_real_part);
    let _ = writeln!(s, "binding constraint: {}", r.binding_constraint);
    s
}

fn stability(setup: &Setup, a: &StabilityArgs, seed: Option<u64>, mut meta: Metadata) -> Result<Output> {
    if a.table1 {
        return table1(setup, meta);
    }
    if let Some(n) = a.draws {
        return draws(n, seed.unwrap_or(0), meta);
    }
    let p = setup.params();
    if a.find_gmax {
        let rule = setup.rule()?;
        let r = g_max_search(&p, &rule)?;
        meta.flag("control", setup.control.as_str()).flag(
            "rule",
            match rule {
                CouplingRule::Free => "free",
                CouplingRule::Matched => "matched at every G",
                _ => "fixed ancilla",
            },
        );
        let mut t = OutputTable::new(
            ["G_max", "bounded", "eigen_stable_below", "eigen_stable_above"].map(String::from).into(),
            meta,
        );
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        t.push(vec![r.g_max, b(r.bounded), b(r.eigen_stable_below), b(r.eigen_stable_above)]);
        let report = format!(
            "G_max = {} ({})\n",
            r.g_max,
            if r.bounded { "first loss of stability" } else { "stable over the whole bracket" }
        );
        return Ok(Output::Table { table: t, report: Some(report) });
    }

    let anc = setup.ancilla()?;
    let spec = match anc {
        Some(x) => jacobian_cqnc(&p, &x),
        None => jacobian_free(&p),
    };
    let r = eigen_stability(&spec)?;
    let mut report = report_text(&r);
    system_flags(&mut meta, setup, &p, anc.as_ref());
    meta.flag("binding_constraint", &r.binding_constraint);
    if anc.is_none() {
        let v = free_verdicts(&p, p.omega_m)?;
        meta.flag("alpha_bound_holds", v.alpha_bound_holds).flag("spring_stable", v.spring_stable);
        let _ = writeln!(
            report,
            "drive bound on G: {}; optical spring at omega_m: gamma_eff = {:e}, omega_eff^2 = {:e}",
            v.alpha_bound.map_or("none".to_string(), |b| b.to_string()),
            v.spring.gamma_eff,
            v.spring.omega_eff_sq
        );
    }
    let n = r.coefficients.len() - 1;
    let mut columns = vec!["G".to_string()];
    columns.extend((1..=n).map(|k| format!("a_{k}")));
    columns.extend((1..=n).map(|k| format!("D_{k}")));
    columns.extend(["max_re", "stable", "eigen_stable"].map(String::from));
    let mut row = vec![p.big_g];
    row.extend(&r.coefficients[1..]);
    row.extend(&r.hurwitz_determinants);
    row.extend([r.max_real_part, r.stable as u8 as f64, r.eigen_stable as u8 as f64]);
    let mut t = OutputTable::new(columns, meta);
    t.push(row);
    Ok(Output::Table { table: t, report: Some(report) })
}

fn table1(setup: &Setup, mut meta: Metadata) -> Result<Output> {
    let p = setup.params();
    let jobs: Vec<(G2Convention, f64)> = [G2Convention::Half, G2Convention::Full]
        .into_iter()
        .flat_map(|c| TABLE1_RATIOS.map(|r| (c, r)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(c, r)| table1_row(&p, r, c))
        .collect::<cqnc_core::Result<Vec<_>>>()?;
    meta.flag("convention", "g2 / (sqrt2 G): 0.5 or 1")
        .flag("omega", 1.0)
        .flag("G", p.big_g)
        .flag("delta_omega", "symmetric half-width with gamma_eff_c > 0");
    let columns = [
        "convention",
        "g_n_ratio",
        "delta_omega",
        "delta_omega_lower",
        "delta_omega_upper",
        "R",
        "gamma_eff_ratio",
        "G_max",
        "bounded",
    ]
    .map(String::from)
    .into();
    let mut t = OutputTable::new(columns, meta);
    let mut report = String::new();
    for row in &rows {
        let c = match row.convention {
            G2Convention::Half => 0.5,
            G2Convention::Full => 1.0,
        };
        t.push(vec![
            c,
            row.g_n_ratio,
            row.delta_omega,
            row.delta_omega_lower,
            row.delta_omega_upper,
            row.r,
            row.gamma_eff_ratio,
            row.g_max,
            row.g_max_result.bounded as u8 as f64,
        ]);
        let _ = writeln!(
            report,
            "{:<12} g_n/sqrt2G = {:.1}: delta_omega = {:.4}, R = {:.4}, gamma_eff/gamma_m = {:.4}, G_max = {:.4}",
            row.convention.label(),
            row.g_n_ratio,
            row.delta_omega,
            row.r,
            row.gamma_eff_ratio,
            row.g_max
        );
    }
    Ok(Output::Table { table: t, report: Some(report) })
}

/// Margin on the largest real part below which a draw is not compared.
pub const DRAW_MARGIN: f64 = 1e-8;

fn draws(n: usize, seed: u64, mut meta: Metadata) -> Result<Output> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_uniform = |r: &mut ChaCha8Rng, lo: f64, hi: f64| r.random_range(f64::ln(lo)..f64::ln(hi)).exp();
    let mut t = OutputTable::new(
        [
            "draw", "dimension", "G", "delta_b", "kappa_b", "gamma_m", "g1", "g2", "delta_c", "kappa_c", "hurwitz_stable",
            "eigen_stable", "max_re", "excluded", "agree",
        ]
        .map(String::from)
        .into(),
        meta.clone(),
    );
    let (mut checked, mut agree) = (0, 0);
    for k in 0..n {
        let sign = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = SystemParams {
            omega_m: 1.0,
            gamma_m: log_uniform(&mut rng, 1e-4, 5e-2),
            kappa_b: log_uniform(&mut rng, 1e-3, 0.5),
            delta_b: sign(&mut rng) * rng.random_range(0.1..2.0),
            big_g: rng.random_range(0.0..1.0),
            n_th: 0.0,
        };
        let a = if k % 2 == 1 {
            Some(AncillaCoupling {
                g1: rng.random_range(0.0..0.6),
                g2: rng.random_range(0.0..0.6),
                delta_c: sign(&mut rng) * rng.random_range(0.1..2.0),
                kappa_c: log_uniform(&mut rng, 1e-4, 0.1),
            })
        } else {
            None
        };
        let r = eigen_stability(&match a {
            Some(a) => jacobian_cqnc(&p, &a),
            None => jacobian_free(&p),
        })?;
        let excluded = r.max_real_part.abs() < DRAW_MARGIN;
        if !excluded {
            checked += 1;
            agree += r.routes_agree() as usize;
        }
        let an = a.unwrap_or(AncillaCoupling { g1: 0.0, g2: 0.0, delta_c: 0.0, kappa_c: 0.0 });
        t.push(vec![
            k as f64,
            if a.is_some() { 6.0 } else { 4.0 },
            p.big_g,
            p.delta_b,
            p.kappa_b,
            p.gamma_m,
            an.g1,
            an.g2,
            an.delta_c,
            an.kappa_c,
            r.stable as u8 as f64,
            r.eigen_stable as u8 as f64,
            r.max_real_part,
            excluded as u8 as f64,
            r.routes_agree() as u8 as f64,
        ]);
    }
    meta.flag("draws", n).flag("margin", DRAW_MARGIN).flag("seed_used", seed);
    t.metadata = meta;
    let report = format!("{agree} of {checked} compared draws agree ({} inside the margin band)\n", n - checked);
    Ok(Output::Table { table: t, report: Some(report) })
}

fn sql(setup: &Setup, g: &GridArgs, mut meta: Metadata) -> Result<Output> {
    let ws = grid(g, default_grid)?;
    let p = setup.params();
    let anc = setup.ancilla()?;
    let mut columns: Vec<String> = ["omega", "S_L", "G_L"].map(String::from).into();
    if anc.is_some() {
        columns.push("S_L_c".into());
    }
    system_flags(&mut meta, setup, &p, anc.as_ref());
    let mut t = OutputTable::new(columns, meta);
    for w in ws {
        let mut row = vec![w, sql_spectrum(w, &p), sql_optimal_g(w, &p)];
        if let Some(a) = &anc {
            row.push(sql_spectrum_cqnc(w, &p, a));
        }
        t.push(row);
    }
    table(t)
}

fn nms(setup: &Setup, a: &NmsArgs, mut meta: Metadata) -> Result<Output> {
    let p = setup.params();
    let gs = match (a.g_min, a.g_max) {
        (Some(lo), Some(hi)) => grid(
            &GridArgs { min: Some(lo), max: Some(hi), points: Some(a.points), spacing: Some(a.spacing) },
            Vec::new,
        )?,
        _ => vec![p.big_g],
    };
    meta.flag("delta_b", p.delta_b).flag("kappa_b", p.kappa_b).flag("gamma_m", p.gamma_m).flag(
        "branch",
        "principal root reflected to Re >= 0, ordered by Re",
    );
    let mut t = OutputTable::new(
        [
            "G",
            "omega_plus_re",
            "omega_plus_im",
            "omega_minus_re",
            "omega_minus_im",
            "splitting_exact",
            "splitting_approx",
        ]
        .map(String::from)
        .into(),
        meta,
    );
    for g in gs {
        let m = nms_eigenfrequencies(&p.with_g(g));
        t.push(vec![
            g,
            m.exact.0.re,
            m.exact.0.im,
            m.exact.1.re,
            m.exact.1.im,
            m.splitting_exact(),
            m.splitting_approx(),
        ]);
    }
    table(t)
}

fn rescale(setup: &Setup, a: &RescaleArgs, mut meta: Metadata) -> Result<Output> {
    let si = setup
        .config
        .si
        .ok_or_else(|| CliError::Usage("rescale needs an [si] section in the configuration".into()))?;
    let mut p = setup.params();
    match si.temperature {
        Some(t) => {
            p.n_th = thermal_occupation(&si)?;
            meta.flag("temperature", t).flag("n_th_source", "temperature");
        }
        None => {
            meta.flag("temperature", "unset").flag("n_th_source", "config");
        }
    }
    let anc = setup.ancilla_for(&p)?;
    if a.torque && anc.is_none() {
        return Err(CliError::Usage("--torque needs an ancilla (the figure uses S_L^c)".into()));
    }
    if a.torque && si.mirror_arm_r.is_none() {
        return Err(CliError::Usage("--torque needs mirror_arm_r in [si]".into()));
    }
    let ws = grid(&a.grid, || vec![p.omega_m])?;
    system_flags(&mut meta, setup, &p, anc.as_ref());
    meta.flag("mass", si.mass)
        .flag("omega_m_si", si.omega_m_si)
        .flag("hbar", si.hbar)
        .flag("spectrum_units", "N^2/Hz")
        .flag("scale", "hbar m omega_m (S omega_m_si), S read in rad/s");
    if a.torque {
        meta.flag("mirror_arm_r", si.mirror_arm_r.unwrap()).flag("torque_units", "N m/sqrt(Hz)");
    }
    let mut columns: Vec<String> = ["omega", "S", "S_si"].map(String::from).into();
    if anc.is_some() {
        columns.extend(["S_c", "S_c_si", "ratio", "ratio_si"].map(String::from));
    }
    if a.torque {
        columns.extend(["S_L_c", "torque"].map(String::from));
    }
    let mut t = OutputTable::new(columns, meta);
    for w in ws {
        let s = noise_spectrum_free(w, &p)?.total;
        let mut row = vec![w, s, rescale_force_spectrum(s, &si)];
        if let Some(x) = &anc {
            let sc = setup.controlled_spectrum(w, &p, x)?.total;
            let (ss, scs) = (rescale_force_spectrum(s, &si), rescale_force_spectrum(sc, &si));
            row.extend([sc, scs, sc / s, scs / ss]);
            if a.torque {
                let sl = sql_spectrum_cqnc(w, &p, x);
                row.extend([sl, torque_sensitivity(sl, &si)?]);
            }
        }
        t.push(row);
    }
    table(t)
}

fn preset(action: &PresetAction) -> Result<Output> {
    match action {
        PresetAction::List => {
            let mut s = String::new();
            for name in presets::names() {
                let c = presets::load(name)?;
                let _ = writeln!(s, "{name:<10} {}", c.preset.description);
            }
            Ok(Output::Text(s))
        }
        PresetAction::Show { name } => presets::source(name)
            .map(|s| Output::Text(s.to_string()))
            .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`"))),
    }
}
