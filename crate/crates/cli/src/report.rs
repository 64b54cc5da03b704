//! Line-oriented `key: value` reports.

use std::fmt::Write;

use billiard_core::atoms::{nonsaddle_atom, saddle_atom, AtomReport};
use billiard_core::cells::CellKind;
use billiard_core::decomposition::partition;
use billiard_core::diagram::bifurcation_diagram;
use billiard_core::domain::{classify_elementary, BilliardDomain};
use billiard_core::dynamics::{sample_fiber_point, trajectory, PhasePoint, Termination, Trajectory};
use billiard_core::fiber::FiberSurface;
use billiard_core::topology::regular_fiber_on;
use billiard_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::num;

const SAME_LEVEL: f64 = 1e-9;

pub fn validate(d: &BilliardDomain) -> (String, bool) {
    let rep = d.validate();
    let mut s = String::new();
    writeln!(s, "arcs: {}", d.arcs.len()).unwrap();
    writeln!(s, "corners: {}", d.corners.len()).unwrap();
    writeln!(s, "complexity: {}", d.complexity).unwrap();
    writeln!(s, "homogeneity: {:?}", d.homogeneity).unwrap();
    if rep.is_valid() && d.complexity == 0 {
        if let Ok(t) = classify_elementary(d) {
            writeln!(s, "elementary_type: {t}").unwrap();
        }
    }
    for v in &rep.violations {
        writeln!(s, "violation: {v}").unwrap();
    }
    writeln!(s, "valid: {}", rep.is_valid()).unwrap();
    (s, rep.is_valid())
}

/// Start of a simulated trajectory: on level λ if given, otherwise a uniform
/// interior point with a uniform direction.
pub fn initial_point(d: &BilliardDomain, lambda: Option<f64>, seed: u64) -> Result<PhasePoint, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Some(l) = lambda {
        return sample_fiber_point(d, l, &mut rng)
            .ok_or_else(|| CliError::Core(billiard_core::BilliardError::Domain(format!("no phase point on level {l}"))));
    }
    let poly = d.boundary_polygon();
    let (x0, x1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.x), b.max(q.x)));
    let (y0, y1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.y), b.max(q.y)));
    loop {
        let x = Vec2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if !d.contains(x) {
            continue;
        }
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        if let Ok(p) = PhasePoint::new(&d.family, x, Vec2::new(t.cos(), t.sin())) {
            return Ok(p);
        }
    }
}

pub fn run_trajectory(d: &BilliardDomain, steps: usize, lambda: Option<f64>, seed: u64) -> Result<Trajectory, CliError> {
    let p = initial_point(d, lambda, seed)?;
    Ok(trajectory(&p, d, steps)?)
}

pub fn simulate(d: &BilliardDomain, steps: usize, lambda: Option<f64>, seed: u64) -> Result<String, CliError> {
    let t = run_trajectory(d, steps, lambda, seed)?;
    let r = &t.report;
    let mut s = String::new();
    let p = t.steps.first().map(|q| q.start).unwrap_or_default();
    writeln!(s, "seed: {seed}").unwrap();
    writeln!(s, "start: {} {}", num(p.x), num(p.y)).unwrap();
    writeln!(s, "initial_lambda: {}", num(r.initial_lambda)).unwrap();
    writeln!(s, "steps: {}", r.steps).unwrap();
    let term = match r.termination {
        Termination::StepLimit => "step_limit".to_string(),
        Termination::SingularVertex(c) => format!("singular_vertex {c}"),
    };
    writeln!(s, "termination: {term}").unwrap();
    writeln!(s, "max_drift: {:.3e}", r.max_drift).unwrap();
    writeln!(s, "max_tangency_defect: {:.3e}", r.max_tangency_defect).unwrap();
    Ok(s)
}

pub fn diagram(d: &BilliardDomain) -> String {
    let bd = bifurcation_diagram(d);
    let parts: Vec<String> = bd.critical_values.iter().map(|c| format!("{} {}", num(c.lambda), c.kind.as_str())).collect();
    let mut s = String::new();
    writeln!(s, "critical_values: {}", parts.join("; ")).unwrap();
    writeln!(s, "epsilon: {}", num(bd.epsilon())).unwrap();
    s
}

fn describe(f: &FiberSurface) -> String {
    let n = f.components.len();
    let noun = if n == 1 { "component" } else { "components" };
    let list = |v: Vec<String>| if v.is_empty() { "-".to_string() } else { v.join(",") };
    let genus = list(f.components.iter().map(|c| c.genus.map_or("?".into(), |g| g.to_string())).collect());
    let punct = list(f.components.iter().map(|c| c.punctures.to_string()).collect());
    format!("{n} {noun}, genus {genus}, punctures {punct}")
}

pub fn fiber(d: &BilliardDomain, lambda: f64, subdiv: usize) -> Result<String, CliError> {
    let p = partition(d)?;
    let f = regular_fiber_on(d, &p, lambda, subdiv)?;
    let agree = f.predicted.genera() == f.oracle.genera();
    let mut s = String::new();
    writeln!(s, "lambda: {}", num(lambda)).unwrap();
    writeln!(s, "region_components: {}", f.region.components.len()).unwrap();
    writeln!(s, "chi: {}", f.oracle.chi()).unwrap();
    writeln!(s, "fiber: {}; oracle: {}", describe(&f.predicted), if agree { "agree" } else { "disagree" }).unwrap();
    Ok(s)
}

#[derive(Serialize)]
struct AtomJson<'a> {
    critical_value: f64,
    below: Option<Vec<usize>>,
    above: Option<Vec<usize>>,
    cells: [usize; 4],
    chi: i64,
    level_chi: i64,
    atoms: Vec<(String, &'a billiard_core::atoms::TwoAtom)>,
    gluing_table: &'a [billiard_core::gluing::GluingRow],
    checks: &'a [billiard_core::atoms::TheoremCheck],
}

fn atom_report(d: &BilliardDomain, lambda: Option<f64>) -> Result<AtomReport, CliError> {
    let p = partition(d)?;
    let b = d.family.b;
    match lambda {
        None => Ok(saddle_atom(d, &p)?),
        Some(l) if (l - b).abs() <= SAME_LEVEL => Ok(saddle_atom(d, &p)?),
        Some(l) => {
            let Some(i) = p.cut_arcs.iter().position(|a| (a.lambda_i - l).abs() <= SAME_LEVEL) else {
                let known: Vec<String> = p.cut_arcs.iter().map(|a| num(a.lambda_i)).collect();
                return Err(CliError::Core(billiard_core::BilliardError::Domain(format!(
                    "λ = {l} is neither b nor a cut-arc level (cut arcs: {})",
                    if known.is_empty() { "none".into() } else { known.join(", ") }
                ))));
            };
            Ok(nonsaddle_atom(d, &p, i)?)
        }
    }
}

/// Text report and JSON document for the 3-atom at λ (default `b`).
pub fn atom(d: &BilliardDomain, lambda: Option<f64>) -> Result<(String, String), CliError> {
    let r = atom_report(d, lambda)?;
    let cx = &r.complex;
    let mut s = String::new();
    writeln!(s, "critical_value: {}", num(r.critical_value)).unwrap();
    writeln!(s, "below: {}", describe(&r.below)).unwrap();
    writeln!(s, "above: {}", describe(&r.above)).unwrap();
    for dim in 0..4 {
        let (f, sc) = (cx.count(dim, CellKind::First), cx.count(dim, CellKind::Second));
        writeln!(s, "cells_{dim}: {} (first {f}, second {sc})", f + sc).unwrap();
    }
    writeln!(s, "chi: {}", cx.chi()).unwrap();
    writeln!(s, "level_chi: {}", cx.level_chi).unwrap();
    for (t, a) in &r.atoms {
        writeln!(s, "atom: {t} {} vertices {} tori {}/{}", a.name, a.vertices, a.tori_below, a.tori_above).unwrap();
    }
    for row in &r.gluing_table {
        writeln!(s, "gluing: {} {:?} {}", row.cylinder, row.circle, row.labels.join(",")).unwrap();
    }
    for c in &r.theorem_checks {
        let line = format!("check: {} {} {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        writeln!(s, "{}", line.trim_end()).unwrap();
    }
    let json = AtomJson {
        critical_value: r.critical_value,
        below: r.below.genera(),
        above: r.above.genera(),
        cells: [0, 1, 2, 3].map(|k| cx.count_dim(k)),
        chi: cx.chi(),
        level_chi: cx.level_chi,
        atoms: r.atoms.iter().map(|(t, a)| (t.to_string(), a)).collect(),
        gluing_table: &r.gluing_table,
        checks: &r.theorem_checks,
    };
    let mut doc = serde_json::to_string_pretty(&json).expect("atom reports serialize");
    doc.push('\n');
    if !r.all_pass() {
        let failed: Vec<&str> = r.theorem_checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(CliError::Core(billiard_core::BilliardError::Integrity(format!(
            "{s}failed checks: {}",
            failed.join(", ")
        ))));
    }
    Ok((s, doc))
}
