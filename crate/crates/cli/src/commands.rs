use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{bail, Context};
use bps_core::asymptotics::{asymptotics_report, large_t_limit, AsymptoticsConfig, AsymptoticsReport};
use bps_core::bps_automorphism::dt_invariants;
use bps_core::flat_section::{check_jump, eval_flat_section, ExponentialFactor, JumpReport, QuadratureConfig};
use bps_core::gv_partition::{
    check_bridgeland_iwaki, check_main_theorem, f_beta_genus_form, KSum, Point, SeriesComparison, SignMode,
    TheoremReport,
};
use bps_core::lattice::{BpsStructure, BpsStructureDoc, LatticeElement, Ray};
use bps_core::maulik_toda::{
    first_asymmetry, gv_from_sheaf, omega_from_sheaf, sheaf_from_gv, GenusSeries, GvTable, MtGeometry, OmegaTable,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::{charge_label, grid, num, read, verdict, write_json, write_text};
use crate::{BpsInput, Cli, Command, Exponential, GvInput, RunConfig};

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = &cli.run;
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    match &cli.command {
        Command::Convert { gv, bps } => convert(cfg, gv.as_deref(), bps.as_deref()),
        Command::FlatSection { input, ray_angle, t_min, t_max, points, grid: kind, exponential } => {
            let ts = grid(*t_min, *t_max, *points, *kind)?;
            flat_section(cfg, input, *ray_angle, &ts, *exponential)
        }
        Command::JumpCheck { input, ray_angle, t_abs } => {
            let (bps, target) = load_bps(input)?;
            let report = jump(cfg, &bps, &target, *ray_angle, *t_abs)?;
            let path = write_json(&cfg.out, "jump.json", cfg.precision, &report)?;
            println!("jump ray {:.6}: {} ({})", report.ray_angle, verdict(report.passed), path.display());
            Ok(report.passed)
        }
        Command::VerifyTheorem { input, omega, check_limit, bps, target, asymptotics } => {
            verify(cfg, input, omega.as_deref(), *check_limit, bps.as_deref(), target.as_deref(), *asymptotics)
        }
        Command::Asymptotics { input } => {
            let (gv, classes, geom) = load_gv(input)?;
            let mut reports = Vec::new();
            for class in &classes {
                let r = asymptotics_for(cfg, input, &gv.genus_series(class), class, geom.as_ref())?;
                println!("asymptotics class {:?}: {}", class, verdict(r.passed));
                reports.push(ClassReport { class: class.clone(), report: r });
            }
            let ok = reports.iter().all(|r| r.report.passed);
            let exponents: Vec<_> =
                reports.iter().map(|r| ClassReport { class: r.class.clone(), report: &r.report.product.rows }).collect();
            write_json(&cfg.out, "exponents.json", cfg.precision, &exponents)?;
            write_json(&cfg.out, "asymptotics.json", cfg.precision, &reports)?;
            Ok(ok)
        }
        Command::EmitCurve { input, t_min, t_max, points, grid: kind } => {
            let ts = grid(*t_min, *t_max, *points, *kind)?;
            emit_curve(cfg, input, &ts)
        }
    }
}

#[derive(Serialize)]
struct ClassReport<T> {
    class: Vec<i64>,
    report: T,
}

fn load_gv(input: &GvInput) -> anyhow::Result<(GvTable, Vec<Vec<i64>>, Option<MtGeometry>)> {
    let gv = GvTable::from_json(&read(&input.gv)?).with_context(|| format!("in {}", input.gv.display()))?;
    let classes: Vec<Vec<i64>> = match &input.class {
        Some(c) => {
            if !gv.classes.contains_key(c) {
                bail!("class {c:?} is not in {}", input.gv.display());
            }
            vec![c.clone()]
        }
        None => gv.classes.keys().cloned().collect(),
    };
    let geom = match &input.geometry {
        Some(p) => Some(MtGeometry::from_json(&read(p)?).with_context(|| format!("in {}", p.display()))?),
        None => None,
    };
    Ok((gv, classes, geom))
}

fn point_data(input: &GvInput, class: &[i64], geom: Option<&MtGeometry>) -> anyhow::Result<(f64, i64)> {
    match geom {
        Some(g) => {
            let degree = g.degree(class)?;
            let d = if g.divisor.is_some() || g.intersections.is_some() { g.divisor_pairing(class) } else { input.d_beta };
            Ok((degree, d))
        }
        None => Ok((input.degree, input.d_beta)),
    }
}

fn load_bps(input: &BpsInput) -> anyhow::Result<(BpsStructure, LatticeElement)> {
    let bps = load_structure(&input.bps)?;
    if input.target.len() != bps.rank() {
        bail!("--target has {} coordinates but the lattice has rank {}", input.target.len(), bps.rank());
    }
    Ok((bps, LatticeElement(input.target.clone())))
}

fn load_structure(path: &Path) -> anyhow::Result<BpsStructure> {
    let doc: BpsStructureDoc =
        serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    doc.into_structure().with_context(|| format!("in {}", path.display()))
}

fn quadrature(cfg: &RunConfig) -> QuadratureConfig {
    QuadratureConfig { s_order: cfg.s_order, k_max: cfg.k_max, ..QuadratureConfig::default() }
}

#[derive(Serialize)]
struct ConvertRow {
    class: Vec<i64>,
    sheaf: BTreeMap<i64, i64>,
    omega: OmegaTable,
}

#[derive(Serialize)]
struct DtRow {
    ray_angle: f64,
    table: serde_json::Value,
}

fn convert(cfg: &RunConfig, gv: Option<&Path>, bps: Option<&Path>) -> anyhow::Result<bool> {
    if gv.is_none() && bps.is_none() {
        bail!("convert needs --gv and/or --bps");
    }
    if let Some(path) = gv {
        let table = GvTable::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))?;
        let mut rows = Vec::new();
        for class in table.classes.keys() {
            let sheaf = sheaf_from_gv(&table, class);
            let back = gv_from_sheaf(&sheaf)?;
            let expected: GenusSeries = table.genus_series(class).into_iter().filter(|(_, v)| *v != 0).collect();
            if back != expected {
                bail!("class {class:?}: round trip through the sheaf table is not the identity");
            }
            rows.push(ConvertRow { class: class.clone(), omega: omega_from_sheaf(&sheaf), sheaf });
        }
        let sheaf: Vec<_> = rows.iter().map(|r| ClassReport { class: r.class.clone(), report: &r.sheaf }).collect();
        let omega: Vec<_> = rows.iter().map(|r| ClassReport { class: r.class.clone(), report: &r.omega }).collect();
        println!("{}", write_json(&cfg.out, "sheaf.json", cfg.precision, &sheaf)?.display());
        println!("{}", write_json(&cfg.out, "omega.json", cfg.precision, &omega)?.display());
    }
    if let Some(path) = bps {
        let structure = load_structure(path)?;
        let mut rows = Vec::new();
        for ray in structure.active_rays(cfg.s_order)? {
            let table = dt_invariants(&structure, ray, cfg.s_order)?;
            rows.push(DtRow { ray_angle: ray.angle(), table: table.to_json() });
        }
        println!("{}", write_json(&cfg.out, "dt.json", cfg.precision, &rows)?.display());
    }
    Ok(true)
}

fn flat_section(cfg: &RunConfig, input: &BpsInput, angle: f64, ts: &[f64], exp: Exponential) -> anyhow::Result<bool> {
    let (bps, target) = load_bps(input)?;
    let ray = Ray::from_angle(angle);
    let mut q = quadrature(cfg);
    q.exponential = match exp {
        Exponential::Plus => ExponentialFactor::Plus,
        Exponential::Minus => ExponentialFactor::Minus,
    };
    let mut samples = Vec::with_capacity(ts.len());
    let mut keys = BTreeSet::new();
    for &t in ts {
        let s = eval_flat_section(&bps, ray, ray.point(t), &target, &q).with_context(|| format!("at |t| = {t}"))?;
        let coeffs: BTreeMap<(u32, Vec<i64>), Complex64> =
            s.value.terms().map(|(m, c)| ((m.s_power, m.charge.0.clone()), *c)).collect();
        keys.extend(coeffs.keys().cloned());
        samples.push((t, s.t, coeffs));
    }
    let p = cfg.precision;
    let mut csv = String::from("t_abs,t_re,t_im,s,charge,re,im\n");
    for (t_abs, t, coeffs) in &samples {
        for key in &keys {
            let c = coeffs.get(key).copied().unwrap_or_default();
            csv += &format!(
                "{},{},{},{},{},{},{}\n",
                num(*t_abs, p),
                num(t.re, p),
                num(t.im, p),
                key.0,
                charge_label(&key.1),
                num(c.re, p),
                num(c.im, p)
            );
        }
    }
    println!("{}", write_text(&cfg.out, "flat_section.csv", &csv)?.display());
    Ok(true)
}

fn jump(
    cfg: &RunConfig,
    bps: &BpsStructure,
    target: &LatticeElement,
    angle: Option<f64>,
    t_abs: f64,
) -> anyhow::Result<JumpReport> {
    let ray = match angle {
        Some(a) => Ray::from_angle(a),
        None => *bps.active_rays(cfg.s_order)?.first().context("the structure has no active ray")?,
    };
    Ok(check_jump(bps, ray, t_abs, target, &quadrature(cfg), cfg.tol)?)
}

#[derive(Deserialize)]
struct OmegaEntry {
    class: Vec<i64>,
    omega: OmegaTable,
}

#[derive(Serialize)]
struct SymmetryRow {
    class: Vec<i64>,
    /// Smallest `n` with `Omega(n) != Omega(-n)`.
    offending_n: Option<i64>,
}

#[derive(Serialize)]
struct VerifyReport {
    sign_mode: SignMode,
    theorem: Vec<ClassReport<TheoremReport>>,
    /// The `eps -> 0` genus-zero limit; affects the verdict only with `--check-limit`.
    limit: Vec<ClassReport<SeriesComparison>>,
    omega_symmetry: Vec<SymmetryRow>,
    jump: Option<JumpReport>,
    asymptotics: Vec<ClassReport<AsymptoticsReport>>,
    passed: bool,
}

fn verify(
    cfg: &RunConfig,
    input: &GvInput,
    omega: Option<&Path>,
    check_limit: bool,
    bps: Option<&Path>,
    target: Option<&[i64]>,
    with_asymptotics: bool,
) -> anyhow::Result<bool> {
    let (gv, classes, geom) = load_gv(input)?;
    let mut ok = true;
    let mut report = VerifyReport {
        sign_mode: cfg.sign_mode,
        theorem: Vec::new(),
        limit: Vec::new(),
        omega_symmetry: Vec::new(),
        jump: None,
        asymptotics: Vec::new(),
        passed: true,
    };
    for class in &classes {
        let gs = gv.genus_series(class);
        let t = check_main_theorem(&gs, cfg.u_order, cfg.q_order, cfg.sign_mode)?;
        match cfg.sign_mode {
            SignMode::Resolved => {
                println!("theorem class {class:?}: {}", verdict(t.passed));
                ok &= t.passed;
            }
            SignMode::Literal => println!(
                "theorem class {class:?} (literal mode, informational): {} differing coefficients",
                t.comparison.discrepancies.len()
            ),
        }
        report.theorem.push(ClassReport { class: class.clone(), report: t });
        let l = check_bridgeland_iwaki(&gs, cfg.u_order, cfg.q_order)?;
        if check_limit {
            println!("limit class {class:?}: {}", verdict(l.passed));
            ok &= l.passed;
        }
        report.limit.push(ClassReport { class: class.clone(), report: l });
        if with_asymptotics {
            let a = asymptotics_for(cfg, input, &gs, class, geom.as_ref())?;
            println!("asymptotics class {class:?}: {}", verdict(a.passed));
            ok &= a.passed;
            report.asymptotics.push(ClassReport { class: class.clone(), report: a });
        }
    }
    if let Some(path) = omega {
        let entries: Vec<OmegaEntry> =
            serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        for e in entries {
            let offending_n = first_asymmetry(&e.omega);
            match offending_n {
                Some(n) => println!("omega symmetry class {:?}: FAIL at n = {n}", e.class),
                None => println!("omega symmetry class {:?}: PASS", e.class),
            }
            ok &= offending_n.is_none();
            report.omega_symmetry.push(SymmetryRow { class: e.class, offending_n });
        }
    }
    if let Some(path) = bps {
        let target = target.context("--bps needs --target")?;
        let (structure, target) = load_bps(&BpsInput { bps: path.to_path_buf(), target: target.to_vec() })?;
        let j = jump(cfg, &structure, &target, None, 1.0)?;
        println!("jump: {}", verdict(j.passed));
        ok &= j.passed;
        report.jump = Some(j);
    }
    report.passed = ok;
    println!("{}", write_json(&cfg.out, "verify.json", cfg.precision, &report)?.display());
    Ok(ok)
}

fn asymptotics_for(
    cfg: &RunConfig,
    input: &GvInput,
    gs: &GenusSeries,
    class: &[i64],
    geom: Option<&MtGeometry>,
) -> anyhow::Result<AsymptoticsReport> {
    let (degree, d_beta) = point_data(input, class, geom)?;
    let a = AsymptoticsConfig { epsilon: input.epsilon, degree, d_beta, m_q: cfg.q_order, ..AsymptoticsConfig::default() };
    Ok(asymptotics_report(gs, &a)?)
}

fn emit_curve(cfg: &RunConfig, input: &GvInput, ts: &[f64]) -> anyhow::Result<bool> {
    let (gv, classes, geom) = load_gv(input)?;
    let p = cfg.precision;
    let mut csv = String::from("class,t,f_re,f_im,limit_re,limit_im,distance\n");
    for class in &classes {
        let gs = gv.genus_series(class);
        let (degree, _) = point_data(input, class, geom.as_ref())?;
        let limit = large_t_limit(&gs, input.epsilon, degree, cfg.q_order);
        for &t in ts {
            let f = f_beta_genus_form(Point { t, epsilon: input.epsilon, degree }, &gs, KSum::Closed, cfg.q_order, false);
            csv += &format!(
                "{},{},{},{},{},{},{}\n",
                charge_label(class),
                num(t, p),
                num(f.re, p),
                num(f.im, p),
                num(limit.re, p),
                num(limit.im, p),
                num((f - limit).norm(), p)
            );
        }
    }
    println!("{}", write_text(&cfg.out, "curve.csv", &csv)?.display());
    Ok(true)
}
