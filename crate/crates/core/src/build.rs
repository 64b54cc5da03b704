//! Domains assembled from rectangles of elliptic coordinates.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::domain::{BilliardDomain, BoundaryArc, Orientation};
use crate::error::{domain_err, invalid, Result};
use crate::geometry::{Branch, ConfocalFamily, QuadricRef};
use crate::grid::{Grid, PhiLine, PhiPos, Side, ULine};

/// Cells with `λ_e` in `lambda_e` and unfolded angle running counter-clockwise
/// from `phi[0]` to `phi[1]`. Equal endpoints mean the whole circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ERect {
    pub lambda_e: [f64; 2],
    pub phi: [PhiPos; 2],
}

impl ERect {
    pub const fn new(lambda_e: [f64; 2], phi: [PhiPos; 2]) -> Self {
        Self { lambda_e, phi }
    }

    fn u_range(&self, fam: &ConfocalFamily) -> (f64, f64) {
        let u0 = ULine::from_lambda(fam, self.lambda_e[0].max(self.lambda_e[1])).u;
        let u1 = ULine::from_lambda(fam, self.lambda_e[0].min(self.lambda_e[1])).u;
        (u0, u1)
    }

    fn phi_range(&self, fam: &ConfocalFamily) -> (f64, f64) {
        let s = PhiLine::at(fam, self.phi[0]).phi;
        let mut e = PhiLine::at(fam, self.phi[1]).phi;
        while e <= s + 1e-12 {
            e += TAU;
        }
        (s, e)
    }

    fn contains(&self, fam: &ConfocalFamily, u: f64, phi: f64) -> bool {
        let (u0, u1) = self.u_range(fam);
        let (s, e) = self.phi_range(fam);
        let mut p = phi.rem_euclid(TAU);
        if p < s {
            p += TAU;
        }
        u > u0 && u < u1 && p > s && p < e
    }

    fn lines(&self, fam: &ConfocalFamily) -> (Vec<ULine>, Vec<PhiLine>) {
        (
            self.lambda_e.iter().map(|&l| ULine::from_lambda(fam, l)).collect(),
            self.phi.iter().map(|&p| PhiLine::at(fam, p)).collect(),
        )
    }
}

/// Grid whose inside cells are the union of the rectangles.
pub fn grid_from_rects(fam: ConfocalFamily, rects: &[ERect]) -> Grid {
    let mut us = Vec::new();
    let mut ps = Vec::new();
    for r in rects {
        let (u, p) = r.lines(&fam);
        us.extend(u);
        ps.extend(p);
    }
    let mut g = Grid::new(fam, us, ps);
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let (u, p) = g.cell_center(i, j);
            let k = g.idx(i, j);
            g.inside[k] = rects.iter().any(|r| r.contains(&fam, u, p));
        }
    }
    g
}

pub fn domain_from_rects(fam: ConfocalFamily, rects: &[ERect]) -> Result<BilliardDomain> {
    if rects.is_empty() {
        return invalid("no rectangles given");
    }
    domain_from_cells(&grid_from_rects(fam, rects))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Carrier {
    /// Ellipse line `u_i`, `i > 0`, within one quadrant.
    Ell(usize, u8),
    /// The focal segment seen from the upper (`true`) or lower lip.
    Seg(bool),
    /// Hyperbola-type line `φ_j`.
    V(usize),
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: (usize, usize),
    to: (usize, usize),
    carrier: Carrier,
    /// Side of the carrier the domain lies on, for lines through `φ = 0, π/2, π, 3π/2`.
    side: i8,
}

fn quadrant(phi: f64) -> u8 {
    let p = phi.rem_euclid(TAU);
    ((p / FRAC_PI_2).floor() as u8).min(3)
}

fn quadrant_signs(q: u8) -> [i8; 2] {
    match q {
        0 => [1, 1],
        1 => [-1, 1],
        2 => [-1, -1],
        _ => [1, -1],
    }
}

/// Traces the boundary of the inside cells into a closed chain of arcs.
pub fn domain_from_cells(g: &Grid) -> Result<BilliardDomain> {
    let fam = g.family;
    let cols = g.cols();
    let canon = |i: usize, j: usize| {
        let (a, b, _) = g.canonical_vertex(i, j % cols);
        (a, b)
    };
    let mut edges = Vec::new();
    for i in 0..g.rows() {
        for j in 0..cols {
            if !g.is_inside(i, j) {
                continue;
            }
            let jn = j + 1;
            let (p0, p1) = g.col_range(j);
            let mid = 0.5 * (p0 + p1);
            if !g.neighbor_inside(i, j, Side::Start) {
                let side = if quadrant(mid) < 2 { 1 } else { -1 };
                let xside = if (FRAC_PI_2..3.0 * FRAC_PI_2).contains(&p0) { -1 } else { 1 };
                edges.push(Edge {
                    from: canon(i, j),
                    to: canon(i + 1, j),
                    carrier: Carrier::V(j),
                    side: if g.phis[j].lambda == fam.a { xside } else { side },
                });
            }
            if !g.neighbor_inside(i, j, Side::High) {
                edges.push(Edge {
                    from: canon(i + 1, j),
                    to: canon(i + 1, jn),
                    carrier: Carrier::Ell(i + 1, quadrant(mid)),
                    side: 0,
                });
            }
            if !g.neighbor_inside(i, j, Side::End) {
                let side = if quadrant(mid) < 2 { 1 } else { -1 };
                let xside = if (FRAC_PI_2..3.0 * FRAC_PI_2).contains(&p1) { 1 } else { -1 };
                edges.push(Edge {
                    from: canon(i + 1, jn),
                    to: canon(i, jn),
                    carrier: Carrier::V(jn % cols),
                    side: if g.phis[jn % cols].lambda == fam.a { xside } else { side },
                });
            }
            if !g.neighbor_inside(i, j, Side::Low) {
                let carrier = if i == 0 { Carrier::Seg(mid < PI) } else { Carrier::Ell(i, quadrant(mid)) };
                edges.push(Edge { from: canon(i, jn), to: canon(i, j), carrier, side: 0 });
            }
        }
    }
    if edges.is_empty() {
        return domain_err("no inside cells");
    }
    let mut by_start: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        if by_start.insert(e.from, k).is_some() {
            return domain_err("boundary touches itself at a vertex");
        }
    }
    let mut chain = vec![0usize];
    let mut cur = edges[0].to;
    while cur != edges[0].from {
        let Some(&k) = by_start.get(&cur) else {
            return domain_err("boundary does not close");
        };
        chain.push(k);
        cur = edges[k].to;
        if chain.len() > edges.len() {
            return domain_err("boundary does not close");
        }
    }
    if chain.len() != edges.len() {
        return domain_err("domain is not simply connected");
    }
    // Rotate so the chain starts at a carrier change.
    let n = chain.len();
    if let Some(s) = (0..n).find(|&k| edges[chain[k]].carrier != edges[chain[(k + n - 1) % n]].carrier) {
        chain.rotate_left(s);
    }
    let mut runs: Vec<(Edge, (usize, usize))> = Vec::new();
    for &k in &chain {
        let e = edges[k];
        match runs.last_mut() {
            Some((r, end)) if r.carrier == e.carrier => *end = e.to,
            _ => runs.push((e, e.to)),
        }
    }
    let arcs = runs
        .iter()
        .map(|(e, end)| arc_of_run(g, e, *end))
        .collect::<Result<Vec<_>>>()?;
    BilliardDomain::from_arcs(fam, arcs)
}

fn oriented(a: f64, b: f64) -> ([f64; 2], Orientation) {
    if a <= b {
        ([a, b], Orientation::Forward)
    } else {
        ([b, a], Orientation::Backward)
    }
}

fn arc_of_run(g: &Grid, e: &Edge, end: (usize, usize)) -> Result<BoundaryArc> {
    let fam = g.family;
    let (a, b) = (fam.a, fam.b);
    let start = e.from;
    let arc = match e.carrier {
        Carrier::Ell(i, q) => {
            let (range, orientation) = oriented(g.phis[start.1].lambda, g.phis[end.1].lambda);
            BoundaryArc {
                quadric: QuadricRef::ellipse(&fam, g.us[i].lambda)?,
                range,
                signs: quadrant_signs(q),
                orientation,
            }
        }
        Carrier::Seg(upper) => {
            let x = |j: usize| fam.c() * g.phis[j].phi.cos();
            let (range, orientation) = oriented(x(start.1), x(end.1));
            BoundaryArc {
                quadric: QuadricRef::new(&fam, b, Branch::BetweenFoci)?,
                range,
                signs: [1, if upper { 1 } else { -1 }],
                orientation,
            }
        }
        Carrier::V(j) => {
            let lam = g.phis[j].lambda;
            let phi = g.phis[j].phi;
            let l0 = g.us[start.0].lambda;
            let l1 = g.us[end.0].lambda;
            if lam == b {
                let sgn = if phi < FRAC_PI_2 || phi > 3.0 * FRAC_PI_2 { 1.0 } else { -1.0 };
                let branch = if sgn > 0.0 { Branch::OutsideRightRay } else { Branch::OutsideLeftRay };
                let (range, orientation) =
                    oriented(sgn * (a - l0).sqrt(), sgn * (a - l1).sqrt());
                BoundaryArc {
                    quadric: QuadricRef::new(&fam, b, branch)?,
                    range,
                    signs: [sgn as i8, e.side],
                    orientation,
                }
            } else if lam == a {
                let (range, orientation) = oriented(l0, l1);
                BoundaryArc {
                    quadric: QuadricRef::new(&fam, a, Branch::Full)?,
                    range,
                    signs: [e.side, if phi < PI { 1 } else { -1 }],
                    orientation,
                }
            } else {
                let q = quadrant(phi);
                let signs = quadrant_signs(q);
                let branch = if signs[0] > 0 { Branch::Right } else { Branch::Left };
                let (range, orientation) = oriented(l0, l1);
                BoundaryArc { quadric: QuadricRef::hyperbola(&fam, lam, branch)?, range, signs, orientation }
            }
        }
    };
    Ok(arc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(2.0, 1.0).unwrap()
    }

    fn p(l: f64, q: u8) -> PhiPos {
        PhiPos::new(l, q)
    }

    #[test]
    fn full_ellipse_has_four_smooth_arcs() {
        let d = domain_from_rects(fam(), &[ERect::new([0.0, 1.0], [p(1.0, 0), p(1.0, 0)])]).unwrap();
        assert_eq!(d.arcs.len(), 4);
        assert!(d.corners.is_empty());
        assert!((d.area() - PI * 2f64.sqrt()).abs() < 1e-3);
        assert!((d.cell_area() - PI * 2f64.sqrt()).abs() < 1e-12);
        assert!(d.validate().is_valid(), "{:?}", d.validate());
    }

    #[test]
    fn half_ellipse_runs_along_focal_line() {
        let d = domain_from_rects(fam(), &[ERect::new([0.0, 1.0], [p(1.0, 0), p(1.0, 1)])]).unwrap();
        assert_eq!(d.corners.len(), 2);
        assert_eq!(d.complexity, 0);
        assert!(d.validate().is_valid(), "{:?}", d.validate());
    }

    #[test]
    fn arcs_rebuild_the_same_cells() {
        let f = fam();
        let rects = [
            ERect::new([0.0, 0.6], [p(1.2, 0), p(1.5, 0)]),
            ERect::new([0.0, 0.3], [p(1.5, 0), p(1.8, 0)]),
        ];
        let g = grid_from_rects(f, &rects);
        let d = domain_from_cells(&g).unwrap();
        assert_eq!(d.complexity, 1);
        let h = d.grid();
        assert_eq!(h.rows(), g.rows());
        assert_eq!(h.cols(), g.cols());
        assert_eq!(h.inside, g.inside);
    }
}
