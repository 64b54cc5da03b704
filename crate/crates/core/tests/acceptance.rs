//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 8 gate the exit status; criterion 9 is reported only.

use std::time::Instant;

use billiard_core::atoms::{genus_conservation_check, nonsaddle_atom, saddle_atom};
use billiard_core::build::domain_from_rects;
use billiard_core::catalog::{self, deform_rects, mirror_rects, split_rects, CatalogDomain};
use billiard_core::cells::build_cell_complex;
use billiard_core::decomposition::{partition, Partition};
use billiard_core::diagram::bifurcation_diagram;
use billiard_core::domain::{classify_elementary, BilliardDomain};
use billiard_core::dynamics::{trajectory, PhasePoint};
use billiard_core::gr::{side_level, ArcSide};
use billiard_core::topology::{monte_carlo_connectivity, regular_fiber_on};
use billiard_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn setup(cd: &CatalogDomain) -> (BilliardDomain, Partition) {
    let d = cd.build().expect("catalog domain builds");
    let p = partition(&d).expect("catalog domain partitions");
    (d, p)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_phase_point(d: &BilliardDomain, rng: &mut ChaCha8Rng) -> PhasePoint {
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
            return p;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let names = ["A2", "A'2", "B0", "NC1", "NC2"];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut drift, mut defect, mut reflections) = (0.0f64, 0.0f64, 0usize);
    for name in names {
        let (d, _) = setup(&catalog::by_name(name).unwrap());
        for _ in 0..100 {
            let p = random_phase_point(&d, &mut rng);
            let t = trajectory(&p, &d, 1000).map_err(|e| format!("{name}: {e}"))?;
            drift = drift.max(t.report.max_drift);
            defect = defect.max(t.report.max_tangency_defect);
            reflections += t.report.steps;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(drift <= 1e-9, || format!("max drift {drift:.2e}"))?;
    ensure(defect <= 1e-8, || format!("max tangency defect {defect:.2e}"))?;
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{reflections} segments, max drift {drift:.1e}, max defect {defect:.1e}, {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut moves = 0;
    for cd in catalog::elementary() {
        let want = cd.expected.unwrap();
        let (d, _) = setup(&cd);
        let got = classify_elementary(&d).map_err(|e| format!("{}: {e}", cd.name))?;
        ensure(got == want, || format!("{} classified as {got}", cd.name))?;
        let mut rects = cd.rects.clone();
        for k in 0..3 {
            let next = match k {
                0 => (0..50).find_map(|_| deform_rects(&cd.family, &rects, &mut rng)),
                1 => Some(mirror_rects(&rects)),
                _ => split_rects(&rects, &mut rng),
            };
            let Some(next) = next else { return Err(format!("{}: move {k} unavailable", cd.name)) };
            rects = next;
            let d = domain_from_rects(cd.family, &rects).map_err(|e| format!("{}: {e}", cd.name))?;
            let got = classify_elementary(&d).map_err(|e| format!("{} after move {k}: {e}", cd.name))?;
            ensure(got == want, || format!("{} after move {k}: {got}", cd.name))?;
            moves += 1;
        }
    }
    Ok(format!("12 classes, {moves} moves keep the type"))
}

/// Regular levels at the quarter points of every gap between critical values.
fn regular_levels(d: &BilliardDomain) -> Vec<f64> {
    let crit = bifurcation_diagram(d).lambdas();
    crit.windows(2).flat_map(|w| [0.25, 0.5, 0.75].map(|t| w[0] + t * (w[1] - w[0]))).collect()
}

const THEOREM2_DOMAINS: [&str; 5] = ["A2", "B1", "NC1", "NC2", "NC1-shifted"];

fn criterion_3() -> Outcome {
    let mut count = 0;
    let mut ks = Vec::new();
    for name in THEOREM2_DOMAINS {
        let (d, p) = setup(&catalog::by_name(name).unwrap());
        ks.push(d.complexity);
        for l in regular_levels(&d) {
            let a = regular_fiber_on(&d, &p, l, 2).map_err(|e| format!("{name} λ={l}: {e}"))?;
            let b = regular_fiber_on(&d, &p, l, 4).map_err(|e| format!("{name} λ={l}: {e}"))?;
            ensure(a.oracle.genera() == b.oracle.genera(), || format!("{name} λ={l}: refinement changed genera"))?;
            ensure(a.oracle.genera() == a.predicted.genera(), || format!("{name} λ={l}: oracle vs prediction"))?;
            count += 1;
        }
    }
    ks.sort_unstable();
    ks.dedup();
    ensure(ks == [0, 1, 2], || format!("complexities {ks:?}"))?;
    Ok(format!("{count} regular levels on {} domains, k in {ks:?}", THEOREM2_DOMAINS.len()))
}

fn criterion_4() -> Outcome {
    let table = [
        ("A2", "B"),
        ("A1", "A*"),
        ("A0", "B"),
        ("A'2", "T2xI"),
        ("A'1", "T2xI"),
        ("A'0", "T2xI"),
        ("B0", "T2xI"),
        ("B1", "B_1"),
        ("B2", "B_2"),
        ("B'1", "T2xI"),
        ("B'2", "B_1"),
        ("B''2", "T2xI"),
    ];
    for (name, atom) in table {
        let (d, p) = setup(&catalog::by_name(name).unwrap());
        let r = saddle_atom(&d, &p).map_err(|e| format!("{name}: {e}"))?;
        let got = r.atoms.first().map(|(_, a)| a.name.to_string()).unwrap_or_default();
        ensure(got == atom, || format!("{name}: atom {got}, expected {atom}"))?;
        let failed: Vec<_> = r.theorem_checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        ensure(failed.is_empty(), || format!("{name}: failed {failed:?}"))?;
    }
    Ok("12 elementary atoms match the table, tori and singular circles agree".into())
}

fn criterion_5() -> Outcome {
    let mut levels = 0;
    for name in ["NC1", "NC2"] {
        let (d, p) = setup(&catalog::by_name(name).unwrap());
        for i in 0..p.cut_arcs.len() {
            let r = nonsaddle_atom(&d, &p, i).map_err(|e| format!("{name} arc {i}: {e}"))?;
            for check in ["thm3.cylinder_families", "thm3.graph_level_independent", "thm3.two_way_chi"] {
                let c = r.check(check).ok_or_else(|| format!("{name}: {check} missing"))?;
                ensure(c.pass, || format!("{name} arc {i}: {check}: {}", c.detail))?;
            }
            ensure(r.all_pass(), || format!("{name} arc {i}: {:?}", r.theorem_checks))?;
            levels += 1;
        }
    }
    Ok(format!("{levels} arc levels: families, level independence, two-way chi, side fibers"))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for (name, equal) in [("NC1", true), ("NC2", true), ("NC3", false)] {
        let (d, p) = setup(&catalog::by_name(name).unwrap());
        let g = genus_conservation_check(&d, &p).map_err(|e| format!("{name}: {e}"))?;
        ensure(g.pass() && (g.below == g.above) == equal, || format!("{name}: {g:?}"))?;
        parts.push(format!("{name} {}->{}", g.below, g.above));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut domains = catalog::elementary();
    domains.extend(catalog::test_domains());
    let (mut complexes, mut checked) = (0, 0);
    for cd in &domains {
        let (d, p) = setup(cd);
        for c in bifurcation_diagram(&d).lambdas() {
            let a = build_cell_complex(&d, &p, c, 1).map_err(|e| format!("{} c={c}: {e}", cd.name))?;
            let b = build_cell_complex(&d, &p, c, 2).map_err(|e| format!("{} c={c}: {e}", cd.name))?;
            a.validate().map_err(|e| format!("{} c={c}: {e}", cd.name))?;
            b.validate().map_err(|e| format!("{} c={c} refined: {e}", cd.name))?;
            ensure(a.chi() == b.chi() && a.punctured_chi() == b.punctured_chi(), || {
                format!("{} c={c}: chi {} vs {} after refinement", cd.name, a.chi(), b.chi())
            })?;
            ensure(a.chi() == a.at_chi(), || format!("{} c={c}: chi(U) {} vs level {}", cd.name, a.chi(), a.at_chi()))?;
            for arc in &p.cut_arcs {
                let m = a.arc_multiplicities(arc);
                ensure(m.pass(), || format!("{} c={c}: {:?}", cd.name, m.failures))?;
                checked += m.checked;
            }
            complexes += 1;
        }
    }
    Ok(format!("{complexes} complexes valid and refinement-stable, {checked} multiplicity checks"))
}

fn criterion_8() -> Outcome {
    let (mut levels, mut segments) = (0, 0);
    for name in THEOREM2_DOMAINS {
        let (d, _) = setup(&catalog::by_name(name).unwrap());
        for l in regular_levels(&d) {
            let r = monte_carlo_connectivity(&d, l, 500, 200, 0).map_err(|e| format!("{name} λ={l}: {e}"))?;
            ensure(r.crossings == 0, || format!("{name} λ={l}: {r:?}"))?;
            segments += r.segments;
            levels += 1;
        }
    }
    Ok(format!("{levels} levels, {segments} segments, no component crossings"))
}

/// The figure domain is drawn, not specified, and the published cells live
/// on a coarser subdivision than ours, so counts are reported, not matched.
fn criterion_9() -> Outcome {
    let (d, p) = setup(&catalog::nc2());
    let eps = bifurcation_diagram(&d).epsilon();
    let c = side_level(&p.cut_arcs[0], ArcSide::At, eps);
    let cx = build_cell_complex(&d, &p, c, 1).map_err(|e| e.to_string())?;
    Err(format!(
        "not reproduced: the figure's domain is only drawn, and the published cells \
         (17/46/46/12) are cut along partition quadrics only, while this complex is cut along every grid \
         line; NC2 at λ={c}: {}/{}/{}/{} cells",
        cx.count_dim(0),
        cx.count_dim(1),
        cx.count_dim(2),
        cx.count_dim(3)
    ))
}

fn main() {
    let criteria: [(u8, fn() -> Outcome, bool); 9] = [
        (1, criterion_1, true),
        (2, criterion_2, true),
        (3, criterion_3, true),
        (4, criterion_4, true),
        (5, criterion_5, true),
        (6, criterion_6, true),
        (7, criterion_7, true),
        (8, criterion_8, true),
        (9, criterion_9, false),
    ];
    let mut gating_failures = 0;
    for (n, run, gating) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if gating { "" } else { " (non-gating)" };
        match outcome {
            Ok(msg) => println!("criterion {n}: PASS{tag} [{secs:.1}s] {msg}"),
            Err(msg) => {
                println!("criterion {n}: FAIL{tag} [{secs:.1}s] {msg}");
                if gating {
                    gating_failures += 1;
                }
            }
        }
    }
    if gating_failures > 0 {
        std::process::exit(1);
    }
}
