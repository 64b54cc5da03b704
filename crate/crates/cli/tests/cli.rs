use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use billiard_cli::svg::Viewport;
use billiard_cli::{load_domain, DomainFile};
use billiard_core::catalog;
use billiard_core::domain::BilliardDomain;
use billiard_core::{QuadricKind, Vec2};

fn domains() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("domains")
}

fn file(name: &str) -> PathBuf {
    domains().join(format!("{}.json", name.to_lowercase().replace('\'', "p")))
}

fn billiard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = billiard(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    billiard(args).status.code().unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

fn temp_domain(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("domain.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn a2_text() -> String {
    std::fs::read_to_string(file("A2")).unwrap()
}

#[test]
fn shipped_domain_files_match_the_catalog() {
    let mut all = catalog::elementary();
    all.extend(catalog::test_domains());
    for cd in all {
        let d = cd.build().unwrap();
        let text = std::fs::read_to_string(file(cd.name)).unwrap();
        assert_eq!(text, DomainFile::from_domain(&d).to_json(), "{}", cd.name);
        let back = load_domain(&file(cd.name)).unwrap();
        assert_eq!(back.arcs, d.arcs, "{}", cd.name);
    }
}

#[test]
fn every_shipped_domain_validates() {
    for cd in catalog::elementary() {
        let f = file(cd.name);
        let rep = run_ok(&["validate", f.to_str().unwrap()]);
        assert_eq!(value(&rep, "valid"), "true");
        assert_eq!(value(&rep, "elementary_type"), cd.expected.unwrap().to_string());
    }
    let rep = run_ok(&["validate", file("NC2").to_str().unwrap()]);
    assert_eq!(value(&rep, "complexity"), "2");
}

#[test]
fn diagram_of_a2() {
    let rep = run_ok(&["diagram", file("A2").to_str().unwrap()]);
    assert_eq!(value(&rep, "critical_values"), "0 local_min; 1 saddle_b; 2 local_max");
}

#[test]
fn simulate_a2_keeps_the_caustic() {
    let f = file("A2");
    let rep = run_ok(&["simulate", f.to_str().unwrap(), "--steps", "1000"]);
    assert_eq!(value(&rep, "steps"), "1000");
    let drift: f64 = value(&rep, "max_drift").parse().unwrap();
    let defect: f64 = value(&rep, "max_tangency_defect").parse().unwrap();
    assert!(drift <= 1e-9 && defect <= 1e-8, "{rep}");
}

#[test]
fn simulate_on_a_given_level() {
    let f = file("NC1");
    let rep = run_ok(&["simulate", f.to_str().unwrap(), "--steps", "200", "--lambda", "0.5", "--seed", "3"]);
    let l: f64 = value(&rep, "initial_lambda").parse().unwrap();
    assert!((l - 0.5).abs() < 1e-6);
}

#[test]
fn fiber_of_nc1_below_the_vertex_level() {
    let rep = run_ok(&["fiber", file("NC1").to_str().unwrap(), "--lambda", "0.5"]);
    assert_eq!(value(&rep, "fiber"), "1 component, genus 2, punctures 1; oracle: agree");
    let fine = run_ok(&["fiber", file("NC1").to_str().unwrap(), "--lambda", "0.5", "--resolution", "4"]);
    assert_eq!(value(&fine, "fiber"), value(&rep, "fiber"));
}

#[test]
fn atom_reports() {
    let rep = run_ok(&["atom", file("A1").to_str().unwrap()]);
    assert!(rep.contains("atom: A_1 A* vertices 1 tori 1/1"), "{rep}");
    assert!(!rep.contains("FAIL"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atom.json");
    let rep = run_ok(&["atom", file("NC1").to_str().unwrap(), "--lambda", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(value(&rep, "critical_value"), "1.5");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["chi"], 0);
    assert!(json["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["validate", dir.path().join("missing.json").to_str().unwrap()]), 2);
    let p = temp_domain(&dir, "{ not json");
    assert_eq!(code(&["validate", p.to_str().unwrap()]), 2);
    let p = temp_domain(&dir, &a2_text().replacen("\"family\"", "\"extra\": 1, \"family\"", 1));
    assert_eq!(code(&["validate", p.to_str().unwrap()]), 2);
    let p = temp_domain(&dir, &a2_text().replacen("\"ellipse\"", "\"hyperbola\"", 1));
    assert_eq!(code(&["validate", p.to_str().unwrap()]), 2);
    let a2 = file("A2");
    assert_eq!(code(&["simulate", a2.to_str().unwrap()]), 2);
    assert_eq!(code(&["fiber", a2.to_str().unwrap()]), 2);
    assert_eq!(code(&["bounce", a2.to_str().unwrap()]), 2);
}

#[test]
fn invalid_domains_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut df = DomainFile::parse(&a2_text()).unwrap();
    df.arcs[0].lambda = -0.2;
    let p = temp_domain(&dir, &df.to_json());
    let out = billiard(&["validate", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rep = String::from_utf8(out.stdout).unwrap();
    assert_eq!(value(&rep, "valid"), "false");
    assert!(rep.contains("violation: "));
    assert_eq!(code(&["diagram", p.to_str().unwrap()]), 3);
}

#[test]
fn domain_errors_exit_4() {
    let nc1 = file("NC1");
    assert_eq!(code(&["fiber", nc1.to_str().unwrap(), "--lambda", "1.5"]), 4);
    assert_eq!(code(&["atom", nc1.to_str().unwrap(), "--lambda", "0.45"]), 4);
}

#[test]
fn unwritable_output_exits_1() {
    let a2 = file("A2");
    assert_eq!(code(&["render", a2.to_str().unwrap(), "--out", "/nonexistent/dir/x.svg"]), 1);
}

fn paths(svg: &str) -> usize {
    svg.matches("<path ").count()
}

fn trajectory_lines(svg: &str) -> Vec<[f64; 4]> {
    let g = svg.split("<g id=\"trajectory\"").nth(1).map(|s| s.split("</g>").next().unwrap()).unwrap_or("");
    g.lines()
        .filter(|l| l.starts_with("<line"))
        .map(|l| {
            let attr = |k: &str| -> f64 {
                let s = l.split(&format!("{k}=\"")).nth(1).unwrap();
                s[..s.find('"').unwrap()].parse().unwrap()
            };
            [attr("x1"), attr("y1"), attr("x2"), attr("y2")]
        })
        .collect()
}

/// Distance in viewport units from `p` to the nearest boundary arc.
fn boundary_distance(d: &BilliardDomain, vp: &Viewport, p: Vec2) -> f64 {
    let fam = &d.family;
    d.arcs
        .iter()
        .filter(|a| a.contains_point(fam, p, 1e-6))
        .map(|a| {
            let l = a.quadric.lambda;
            let world = match a.quadric.kind {
                QuadricKind::Degenerate => p.y.abs(),
                QuadricKind::VerticalLine => p.x.abs(),
                _ => {
                    let g = Vec2::new(2.0 * (fam.b - l) * p.x, 2.0 * (fam.a - l) * p.y);
                    fam.quadric_form(l, p).abs() / g.norm()
                }
            };
            world * vp.scale
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn render_layers() {
    let a2 = file("A2");
    let a2 = a2.to_str().unwrap();
    let plain = run_ok(&["render", a2]);
    assert!(plain.starts_with("<?xml") && plain.contains("version=\"1.1\""));
    assert_eq!(paths(&plain), 1);
    assert!(trajectory_lines(&plain).is_empty());
    let with_caustic = run_ok(&["render", a2, "--lambda", "0.5"]);
    assert_eq!(paths(&with_caustic), 2);

    let svg = run_ok(&["render", a2, "--steps", "50", "--seed", "7"]);
    let lines = trajectory_lines(&svg);
    assert_eq!(lines.len(), 50);
    let d = load_domain(Path::new(a2)).unwrap();
    let vp = Viewport::fit(&d);
    for (k, l) in lines.iter().enumerate() {
        let end = vp.to_world(l[2], l[3]);
        assert!(boundary_distance(&d, &vp, end) <= 1e-6, "segment {k} end");
        if k > 0 {
            let start = vp.to_world(l[0], l[1]);
            assert!(boundary_distance(&d, &vp, start) <= 1e-6, "segment {k} start");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let nc1 = file("NC1");
    let nc1 = nc1.to_str().unwrap();
    for args in [
        vec!["render", nc1, "--lambda", "0.5", "--steps", "40", "--seed", "2"],
        vec!["simulate", nc1, "--steps", "300", "--seed", "9"],
        vec!["atom", nc1],
    ] {
        assert_eq!(billiard(&args).stdout, billiard(&args).stdout, "{args:?}");
    }
}
