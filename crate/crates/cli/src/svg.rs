//! Deterministic SVG 1.1 rendering of a domain with optional overlays.

use std::fmt::Write;

use billiard_core::diagram::bifurcation_diagram;
use billiard_core::domain::BilliardDomain;
use billiard_core::Vec2;

use crate::error::CliError;
use crate::report::run_trajectory;

pub const WIDTH: f64 = 600.0;
pub const MARGIN: f64 = 20.0;
pub const STRIP: f64 = 70.0;
const CONIC_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overlays {
    pub caustic: Option<f64>,
    /// Trajectory of this many steps (on the caustic level if one is given).
    pub steps: Option<usize>,
    pub seed: u64,
}

/// World to viewport map: uniform scale, y axis flipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x0: f64,
    pub y1: f64,
    pub scale: f64,
    pub plot_height: f64,
}

impl Viewport {
    pub fn fit(d: &BilliardDomain) -> Self {
        let poly = d.boundary_polygon();
        let (x0, x1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.x), b.max(q.x)));
        let (y0, y1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.y), b.max(q.y)));
        let scale = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(y1 - y0);
        Self { x0, y1, scale, plot_height: (y1 - y0) * scale + 2.0 * MARGIN }
    }

    pub fn to_view(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.x0) * self.scale + MARGIN, (self.y1 - p.y) * self.scale + MARGIN)
    }

    pub fn to_world(&self, x: f64, y: f64) -> Vec2 {
        Vec2::new((x - MARGIN) / self.scale + self.x0, self.y1 - (y - MARGIN) / self.scale)
    }

    fn visible(&self, (x, y): (f64, f64)) -> bool {
        (0.0..=WIDTH).contains(&x) && (0.0..=self.plot_height).contains(&y)
    }
}

fn f6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn boundary_path(d: &BilliardDomain, vp: &Viewport) -> String {
    let mut s = String::new();
    for (k, p) in d.boundary_polygon().iter().enumerate() {
        let (x, y) = vp.to_view(*p);
        write!(s, "{}{} {} ", if k == 0 { "M" } else { "L" }, f6(x), f6(y)).unwrap();
    }
    s.push('Z');
    s
}

/// World points of the quadric λ, one polyline per branch.
fn conic_branches(d: &BilliardDomain, lambda: f64, reach: f64) -> Vec<Vec<Vec2>> {
    let (a, b) = (d.family.a, d.family.b);
    let n = CONIC_SAMPLES;
    if lambda < b {
        let (p, q) = ((a - lambda).sqrt(), (b - lambda).sqrt());
        let pts = (0..=n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                Vec2::new(p * t.cos(), q * t.sin())
            })
            .collect();
        vec![pts]
    } else if lambda == b {
        vec![vec![Vec2::new(-reach, 0.0), Vec2::new(reach, 0.0)]]
    } else if lambda < a {
        let (p, q) = ((a - lambda).sqrt(), (lambda - b).sqrt());
        let tmax = (reach / q).asinh();
        [-1.0, 1.0]
            .iter()
            .map(|sx| {
                (0..=n)
                    .map(|k| {
                        let t = -tmax + 2.0 * tmax * k as f64 / n as f64;
                        Vec2::new(sx * p * t.cosh(), q * t.sinh())
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![vec![Vec2::new(0.0, -reach), Vec2::new(0.0, reach)]]
    }
}

fn caustic_path(d: &BilliardDomain, vp: &Viewport, lambda: f64) -> String {
    let reach = 2.0 * (WIDTH + vp.plot_height) / vp.scale + vp.x0.abs() + vp.y1.abs();
    let mut s = String::new();
    for branch in conic_branches(d, lambda, reach) {
        let mut pen_down = false;
        for p in branch {
            let v = vp.to_view(p);
            if !vp.visible(v) {
                pen_down = false;
                continue;
            }
            write!(s, "{}{} {} ", if pen_down { "L" } else { "M" }, f6(v.0), f6(v.1)).unwrap();
            pen_down = true;
        }
    }
    s.trim_end().to_string()
}

fn strip(d: &BilliardDomain, vp: &Viewport, mark: Option<f64>) -> String {
    let bd = bifurcation_diagram(d);
    let mut ls = bd.lambdas();
    ls.extend(mark);
    let lo = ls.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    let x_of = |l: f64| MARGIN + (l - lo + pad) / (hi - lo + 2.0 * pad) * (WIDTH - 2.0 * MARGIN);
    let y = vp.plot_height + STRIP / 2.0;
    let mut s = String::new();
    writeln!(s, "<g id=\"diagram\">").unwrap();
    writeln!(
        s,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>",
        f6(MARGIN),
        f6(y),
        f6(WIDTH - MARGIN),
        f6(y)
    )
    .unwrap();
    for c in &bd.critical_values {
        let x = x_of(c.lambda);
        writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>", f6(x), f6(y)).unwrap();
        writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{} {}</text>",
            f6(x),
            f6(y + 16.0),
            crate::num(c.lambda),
            c.kind.as_str()
        )
        .unwrap();
    }
    if let Some(l) = mark {
        let x = x_of(l);
        writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"red\" stroke-width=\"1\"/>",
            f6(x),
            f6(y - 8.0),
            f6(x),
            f6(y + 8.0)
        )
        .unwrap();
    }
    s.push_str("</g>\n");
    s
}

pub fn render(d: &BilliardDomain, ov: &Overlays) -> Result<String, CliError> {
    let vp = Viewport::fit(d);
    let height = vp.plot_height + STRIP;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        f6(WIDTH),
        f6(height),
        f6(WIDTH),
        f6(height)
    )
    .unwrap();
    writeln!(s, "<path id=\"domain\" d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>", boundary_path(d, &vp))
        .unwrap();
    if let Some(l) = ov.caustic {
        if l > d.family.a {
            return Err(CliError::Parse(format!("caustic λ = {l} exceeds a = {}", d.family.a)));
        }
        writeln!(
            s,
            "<path id=\"caustic\" d=\"{}\" fill=\"none\" stroke=\"blue\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
            caustic_path(d, &vp, l)
        )
        .unwrap();
    }
    if let Some(n) = ov.steps {
        let t = run_trajectory(d, n, ov.caustic, ov.seed)?;
        writeln!(s, "<g id=\"trajectory\" stroke=\"red\" stroke-width=\"0.5\">").unwrap();
        for st in &t.steps {
            let (a, b) = (vp.to_view(st.start), vp.to_view(st.end));
            writeln!(s, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>", f6(a.0), f6(a.1), f6(b.0), f6(b.1)).unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str(&strip(d, &vp, ov.caustic));
    s.push_str("</svg>\n");
    Ok(s)
}
