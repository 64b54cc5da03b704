//! Billiard domains bounded by arcs of confocal quadrics.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, invalid, Result};
use crate::geometry::{
    elliptic_coords, Branch, ConfocalFamily, QuadricKind, QuadricRef, Vec2, EPS_GEO,
};
use crate::grid::{Grid, PhiLine, PhiPos, ULine};

const ARC_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Forward,
    Backward,
}

/// One boundary arc: a piece of a family quadric inside one closed quadrant.
///
/// `range` is in `λ_h` for ellipse arcs, in `λ_e` for hyperbola and
/// vertical-line arcs, and in `x` for pieces of the focal line. For focal-line
/// pieces `signs[1]` names the side of the line the domain lies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub quadric: QuadricRef,
    pub range: [f64; 2],
    pub signs: [i8; 2],
    pub orientation: Orientation,
}

fn quad_phi(p0: f64, sx: i8, sy: i8) -> f64 {
    match (sx >= 0, sy >= 0) {
        (true, true) => p0,
        (false, true) => PI - p0,
        (false, false) => PI + p0,
        (true, false) => TAU - p0,
    }
}

fn quarter_of(sx: i8, sy: i8) -> u8 {
    match (sx >= 0, sy >= 0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

impl BoundaryArc {
    fn ordered(&self) -> (f64, f64) {
        let (lo, hi) = (self.range[0].min(self.range[1]), self.range[0].max(self.range[1]));
        match self.orientation {
            Orientation::Forward => (lo, hi),
            Orientation::Backward => (hi, lo),
        }
    }

    fn w_at(&self, fam: &ConfocalFamily, t: f64) -> (f64, f64) {
        let [sx, sy] = self.signs;
        let q = &self.quadric;
        let c = fam.c();
        match q.kind {
            QuadricKind::Ellipse => (fam.u_of(q.lambda), quad_phi(fam.phi0_of(t), sx, sy)),
            QuadricKind::Hyperbola => (fam.u_of(t), quad_phi(fam.phi0_of(q.lambda), sx, sy)),
            QuadricKind::VerticalLine => {
                (fam.u_of(t), if sy >= 0 { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 })
            }
            QuadricKind::Degenerate => match q.branch {
                Branch::OutsideRightRay => {
                    ((t.abs() / c).max(1.0).acosh(), if sy >= 0 { 0.0 } else { TAU })
                }
                Branch::OutsideLeftRay => ((t.abs() / c).max(1.0).acosh(), PI),
                _ => {
                    let p = (t / c).clamp(-1.0, 1.0).acos();
                    (0.0, if sy >= 0 { p } else { TAU - p })
                }
            },
        }
    }

    /// Unfolded coordinates of the start and end points.
    pub fn w_endpoints(&self, fam: &ConfocalFamily) -> ((f64, f64), (f64, f64)) {
        let (t0, t1) = self.ordered();
        (self.w_at(fam, t0), self.w_at(fam, t1))
    }

    pub fn endpoints(&self, fam: &ConfocalFamily) -> (Vec2, Vec2) {
        let ((u0, p0), (u1, p1)) = self.w_endpoints(fam);
        (fam.from_unfolded(u0, p0), fam.from_unfolded(u1, p1))
    }

    /// `n + 1` points from start to end, uniform in the unfolded coordinate.
    pub fn sample(&self, fam: &ConfocalFamily, n: usize) -> Vec<Vec2> {
        let ((u0, p0), (u1, p1)) = self.w_endpoints(fam);
        (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                fam.from_unfolded(u0 + s * (u1 - u0), p0 + s * (p1 - p0))
            })
            .collect()
    }

    /// Unit tangent in the traversal direction at parameter `s ∈ [0, 1]`.
    pub fn tangent(&self, fam: &ConfocalFamily, s: f64) -> Vec2 {
        let ((u0, p0), (u1, p1)) = self.w_endpoints(fam);
        let h = 1e-6;
        let (sa, sb) = if s < 0.5 { (s, s + h) } else { (s - h, s) };
        let at = |s: f64| fam.from_unfolded(u0 + s * (u1 - u0), p0 + s * (p1 - p0));
        (at(sb) - at(sa)).normalized()
    }

    /// Is a point of the underlying quadric within this arc (up to `tol`)?
    pub fn contains_point(&self, fam: &ConfocalFamily, p: Vec2, tol: f64) -> bool {
        let (lo, hi) = (self.range[0].min(self.range[1]), self.range[0].max(self.range[1]));
        let [sx, sy] = self.signs;
        let quad_ok = |p: Vec2| p.x * sx as f64 >= -tol && p.y * sy as f64 >= -tol;
        let q = &self.quadric;
        match q.kind {
            QuadricKind::Ellipse => {
                let e = elliptic_coords(fam, p);
                quad_ok(p) && e.lambda_h >= lo - tol && e.lambda_h <= hi + tol
            }
            QuadricKind::Hyperbola => {
                let e = elliptic_coords(fam, p);
                quad_ok(p) && e.lambda_e >= lo - tol && e.lambda_e <= hi + tol
            }
            QuadricKind::VerticalLine => {
                let e = elliptic_coords(fam, p);
                p.y * sy as f64 >= -tol && e.lambda_e >= lo - tol && e.lambda_e <= hi + tol
            }
            QuadricKind::Degenerate => p.x >= lo - tol && p.x <= hi + tol,
        }
    }

    /// Unit normal of the underlying quadric at `p` (orientation arbitrary).
    pub fn normal_at(&self, fam: &ConfocalFamily, p: Vec2) -> Vec2 {
        let l = self.quadric.lambda;
        match self.quadric.kind {
            QuadricKind::Degenerate => Vec2::new(0.0, 1.0),
            QuadricKind::VerticalLine => Vec2::new(1.0, 0.0),
            _ => Vec2::new(p.x / (fam.a - l), p.y / (fam.b - l)).normalized(),
        }
    }

    /// Is this arc a piece of an ellipse-type coordinate line (`u` fixed)?
    pub fn is_elliptic(&self) -> bool {
        match self.quadric.kind {
            QuadricKind::Ellipse => true,
            QuadricKind::Degenerate => self.quadric.branch == Branch::BetweenFoci,
            _ => false,
        }
    }

    /// Grid lines carrying this arc and its endpoints.
    pub fn lines(&self, fam: &ConfocalFamily) -> (Vec<ULine>, Vec<PhiLine>) {
        let [sx, sy] = self.signs;
        let q = &self.quadric;
        let mut us = Vec::new();
        let mut ps = Vec::new();
        match q.kind {
            QuadricKind::Ellipse => {
                us.push(ULine::from_lambda(fam, q.lambda));
                for t in self.range {
                    ps.push(PhiLine::at(fam, PhiPos::new(t, quarter_of(sx, sy))));
                }
            }
            QuadricKind::Hyperbola | QuadricKind::VerticalLine => {
                ps.push(PhiLine::at(fam, PhiPos::new(q.lambda, quarter_of(sx, sy))));
                for t in self.range {
                    us.push(ULine::from_lambda(fam, t));
                }
            }
            QuadricKind::Degenerate => {
                for t in self.range {
                    let (u, p) = self.w_at(fam, t);
                    if q.branch == Branch::BetweenFoci {
                        ps.push(PhiLine::from_phi(fam, p));
                    } else {
                        let mut l = ULine::from_u(fam, u);
                        l.exact = false;
                        us.push(l);
                    }
                }
            }
        }
        (us, ps)
    }

    fn check(&self, fam: &ConfocalFamily) -> Option<String> {
        let q = &self.quadric;
        let [lo, hi] = [self.range[0].min(self.range[1]), self.range[0].max(self.range[1])];
        let (a, b, c) = (fam.a, fam.b, fam.c());
        if self.signs.iter().any(|s| s.abs() != 1) {
            return Some("signs must be ±1".into());
        }
        if !(lo.is_finite() && hi.is_finite()) || lo == hi {
            return Some("empty or non-finite range".into());
        }
        if fam.kind_of(q.lambda) != Some(q.kind) {
            return Some(format!("kind {:?} does not match lambda {}", q.kind, q.lambda));
        }
        let tol = 1e-12;
        match q.kind {
            QuadricKind::Ellipse if lo < b - tol || hi > a + tol => {
                Some("ellipse range must lie in [b, a]".into())
            }
            QuadricKind::Hyperbola | QuadricKind::VerticalLine if hi > b + tol => {
                Some("hyperbola range must lie at or below b".into())
            }
            QuadricKind::Hyperbola
                if (q.branch == Branch::Right && self.signs[0] < 0)
                    || (q.branch == Branch::Left && self.signs[0] > 0) =>
            {
                Some("branch disagrees with signs".into())
            }
            QuadricKind::Degenerate => match q.branch {
                Branch::BetweenFoci if lo < -c - tol || hi > c + tol => {
                    Some("segment range must lie between the foci".into())
                }
                Branch::OutsideRightRay if lo < c - tol => Some("right ray range must be ≥ c".into()),
                Branch::OutsideLeftRay if hi > -c + tol => Some("left ray range must be ≤ −c".into()),
                Branch::Full | Branch::Left | Branch::Right => {
                    Some("degenerate arc needs a focal-line branch".into())
                }
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleClass {
    Quarter,
    ThreeQuarter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub point: Vec2,
    pub angle_class: AngleClass,
    /// Incoming and outgoing arc indices.
    pub incident_arcs: (usize, usize),
    /// Parameters of the ellipse-type and hyperbola-type lines through the corner.
    pub lambda_e: f64,
    pub lambda_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Homogeneity {
    HomogElliptic,
    HomogHyperbolic,
    Both,
    NonHomogeneous,
}

impl Homogeneity {
    pub fn is_homogeneous(self) -> bool {
        self != Homogeneity::NonHomogeneous
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    ArcInconsistent { arc: usize, reason: String },
    Closure { arc: usize, gap: f64 },
    SelfIntersection { arcs: (usize, usize) },
    BadAngle { junction: usize, degrees: f64 },
    CornerMismatch { from_arcs: usize, from_cells: usize },
    FocusOnBoundary { focus: Vec2 },
    Orientation,
    Disconnected { loops: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArcInconsistent { arc, reason } => write!(f, "arc {arc}: {reason}"),
            Violation::Closure { arc, gap } => {
                write!(f, "closure: arc {arc} ends {gap:.3e} away from the next arc")
            }
            Violation::SelfIntersection { arcs } => {
                write!(f, "simplicity: arcs {} and {} meet", arcs.0, arcs.1)
            }
            Violation::BadAngle { junction, degrees } => {
                write!(f, "corner after arc {junction}: angle {degrees:.3} deg is not 90/270")
            }
            Violation::CornerMismatch { from_arcs, from_cells } => write!(
                f,
                "corners: {from_arcs} reflex by tangents, {from_cells} by cell count"
            ),
            Violation::FocusOnBoundary { focus } => {
                write!(f, "focus ({}, {}) on a non-straight part of the boundary", focus.x, focus.y)
            }
            Violation::Orientation => write!(f, "boundary encloses zero area"),
            Violation::Disconnected { loops } => write!(f, "interior has {loops} pieces"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A billiard table: a simply connected domain bounded by confocal arcs.
#[derive(Debug, Clone)]
pub struct BilliardDomain {
    pub family: ConfocalFamily,
    pub arcs: Vec<BoundaryArc>,
    pub corners: Vec<Corner>,
    pub complexity: usize,
    pub homogeneity: Homogeneity,
    grid: Grid,
    polygon: Vec<Vec2>,
    signed_area: f64,
}

impl BilliardDomain {
    /// Builds a domain and its derived data. Geometric defects are not errors
    /// here; [`validate`](Self::validate) reports them.
    pub fn from_arcs(family: ConfocalFamily, arcs: Vec<BoundaryArc>) -> Result<Self> {
        if arcs.len() < 2 {
            return invalid("a domain needs at least two arcs");
        }
        let mut polygon = Vec::with_capacity(arcs.len() * ARC_SAMPLES);
        for arc in &arcs {
            let s = arc.sample(&family, ARC_SAMPLES);
            polygon.extend_from_slice(&s[..ARC_SAMPLES]);
        }
        let signed_area = shoelace(&polygon);
        let mut us = Vec::new();
        let mut ps = Vec::new();
        for arc in &arcs {
            let (u, p) = arc.lines(&family);
            us.extend(u);
            ps.extend(p);
        }
        let mut grid = Grid::new(family, us, ps);
        for i in 0..grid.rows() {
            for j in 0..grid.cols() {
                let (u, p) = grid.cell_center(i, j);
                let k = grid.idx(i, j);
                grid.inside[k] = point_in_polygon(&polygon, family.from_unfolded(u, p));
            }
        }
        let mut d = Self {
            family,
            arcs,
            corners: Vec::new(),
            complexity: 0,
            homogeneity: Homogeneity::Both,
            grid,
            polygon,
            signed_area,
        };
        d.corners = d.junctions().into_iter().filter_map(|j| j.corner).collect();
        d.complexity = d
            .corners
            .iter()
            .filter(|c| c.angle_class == AngleClass::ThreeQuarter)
            .count();
        d.homogeneity = homogeneity_of(&d.grid);
        Ok(d)
    }

    /// Coarse cell grid of the domain.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn area(&self) -> f64 {
        self.signed_area.abs()
    }

    /// Area as the exact sum of inside cells.
    pub fn cell_area(&self) -> f64 {
        let g = &self.grid;
        (0..g.rows())
            .flat_map(|i| (0..g.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| g.is_inside(i, j))
            .map(|(i, j)| g.cell_area(i, j))
            .sum()
    }

    pub fn contains(&self, p: Vec2) -> bool {
        point_in_polygon(&self.polygon, p)
    }

    pub fn boundary_polygon(&self) -> &[Vec2] {
        &self.polygon
    }

    fn junctions(&self) -> Vec<Junction> {
        let fam = &self.family;
        let n = self.arcs.len();
        let ccw = self.signed_area >= 0.0;
        (0..n)
            .map(|k| {
                let (a, b) = (&self.arcs[k], &self.arcs[(k + 1) % n]);
                let gap = a.endpoints(fam).1.dist(b.endpoints(fam).0);
                let t1 = a.tangent(fam, 1.0);
                let t2 = b.tangent(fam, 0.0);
                let mut ang = t1.cross(t2).atan2(t1.dot(t2)).to_degrees();
                if !ccw {
                    ang = -ang;
                }
                let point = a.endpoints(fam).1;
                let class = if (ang - 90.0).abs() < 5.0 {
                    Some(AngleClass::Quarter)
                } else if (ang + 90.0).abs() < 5.0 {
                    Some(AngleClass::ThreeQuarter)
                } else {
                    None
                };
                let corner = class.map(|angle_class| {
                    let (e, h) = if a.is_elliptic() { (a, b) } else { (b, a) };
                    let lambda_e = e.quadric.lambda.min(self.family.b);
                    let lambda_h = match h.quadric.kind {
                        QuadricKind::Degenerate => self.family.b,
                        _ => h.quadric.lambda,
                    };
                    Corner { point, angle_class, incident_arcs: (k, (k + 1) % n), lambda_e, lambda_h }
                });
                Junction { gap, angle: ang, corner }
            })
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let fam = &self.family;
        let mut v = Vec::new();
        for (k, arc) in self.arcs.iter().enumerate() {
            if let Some(reason) = arc.check(fam) {
                v.push(Violation::ArcInconsistent { arc: k, reason });
            }
        }
        let junctions = self.junctions();
        for (k, j) in junctions.iter().enumerate() {
            if j.gap > EPS_GEO {
                v.push(Violation::Closure { arc: k, gap: j.gap });
            } else if j.corner.is_none() && j.angle.abs() > 5.0 {
                v.push(Violation::BadAngle { junction: k, degrees: j.angle });
            }
        }
        if self.area() < 1e-12 {
            v.push(Violation::Orientation);
        }
        v.extend(self.self_intersections());
        let from_cells = self.grid.reflex_vertices().len();
        if from_cells != self.complexity {
            v.push(Violation::CornerMismatch { from_arcs: self.complexity, from_cells });
        }
        for f in fam.foci() {
            if let Some(bad) = self.focus_violation(f, &junctions) {
                v.push(bad);
            }
        }
        let pieces = cell_components(&self.grid);
        if pieces > 1 {
            v.push(Violation::Disconnected { loops: pieces });
        }
        ValidationReport { violations: v }
    }

    fn self_intersections(&self) -> Vec<Violation> {
        let fam = &self.family;
        let n = self.arcs.len();
        let m = 32;
        let samples: Vec<Vec<Vec2>> = self.arcs.iter().map(|a| a.sample(fam, m)).collect();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent_next = j == i + 1;
                let adjacent_prev = i == 0 && j == n - 1;
                let mut hit = false;
                'outer: for s in 0..m {
                    for t in 0..m {
                        if adjacent_next && s == m - 1 && t == 0 {
                            continue;
                        }
                        if adjacent_prev && s == 0 && t == m - 1 {
                            continue;
                        }
                        if n == 2 && ((s == m - 1 && t == 0) || (s == 0 && t == m - 1)) {
                            continue;
                        }
                        let d = segment_distance(
                            samples[i][s],
                            samples[i][s + 1],
                            samples[j][t],
                            samples[j][t + 1],
                        );
                        if d < 1e-7 {
                            hit = true;
                            break 'outer;
                        }
                    }
                }
                if hit {
                    out.push(Violation::SelfIntersection { arcs: (i, j) });
                }
            }
        }
        out
    }

    fn focus_violation(&self, f: Vec2, junctions: &[Junction]) -> Option<Violation> {
        let fam = &self.family;
        let on_boundary = self.polygon.iter().any(|p| p.dist(f) < 1e-7)
            || self.arcs.iter().any(|a| {
                a.quadric.kind == QuadricKind::Degenerate && a.contains_point(fam, f, 1e-12)
            });
        if !on_boundary {
            return None;
        }
        let n = self.arcs.len();
        for (k, j) in junctions.iter().enumerate() {
            let p = self.arcs[k].endpoints(fam).1;
            if p.dist(f) > 1e-9 {
                continue;
            }
            let (a, b) = (&self.arcs[k], &self.arcs[(k + 1) % n]);
            let kinds = [a.quadric.branch, b.quadric.branch];
            let straight = j.corner.is_none()
                && a.quadric.kind == QuadricKind::Degenerate
                && b.quadric.kind == QuadricKind::Degenerate
                && kinds.contains(&Branch::BetweenFoci)
                && (kinds.contains(&Branch::OutsideLeftRay) || kinds.contains(&Branch::OutsideRightRay));
            return if straight { None } else { Some(Violation::FocusOnBoundary { focus: f }) };
        }
        Some(Violation::FocusOnBoundary { focus: f })
    }

    pub fn reflex_corners(&self) -> impl Iterator<Item = &Corner> {
        self.corners.iter().filter(|c| c.angle_class == AngleClass::ThreeQuarter)
    }

    /// Does the closed domain meet the y-axis?
    pub fn meets_y_axis(&self) -> bool {
        let g = &self.grid;
        let (j1, j2) = g.y_axis_cols();
        (0..g.rows()).any(|i| {
            [j1, j2].iter().any(|&j| g.is_inside(i, j) || g.is_inside(i, g.prev_col(j)))
        })
    }

    /// Mirror image across the x-axis.
    pub fn mirrored_x(&self) -> Result<Self> {
        let arcs: Vec<BoundaryArc> = self
            .arcs
            .iter()
            .rev()
            .map(|a| {
                let mut m = *a;
                m.signs[1] = -m.signs[1];
                m.orientation = match a.orientation {
                    Orientation::Forward => Orientation::Backward,
                    Orientation::Backward => Orientation::Forward,
                };
                m
            })
            .collect();
        Self::from_arcs(self.family, arcs)
    }
}

struct Junction {
    gap: f64,
    angle: f64,
    corner: Option<Corner>,
}

/// Homogeneity class from which parts of the focal line the closed domain meets.
pub fn homogeneity_of(g: &Grid) -> Homogeneity {
    let f = focal_contact(g);
    match (f.segment_edges > 0, f.ray_edges > 0) {
        (false, false) => Homogeneity::Both,
        (true, false) => Homogeneity::HomogHyperbolic,
        (false, true) => Homogeneity::HomogElliptic,
        (true, true) => Homogeneity::NonHomogeneous,
    }
}

/// How a cell set meets the focal line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FocalContact {
    pub segment_edges: usize,
    pub segment_walls: usize,
    pub ray_edges: usize,
    /// Maximal runs of ray edges in the closed set.
    pub ray_runs: usize,
    /// Maximal runs of ray edges that are walls.
    pub ray_wall_runs: usize,
    pub foci: usize,
}

pub fn focal_contact(g: &Grid) -> FocalContact {
    let mut fc = FocalContact::default();
    let (_, jpi) = g.focal_cols();
    for j in 0..g.cols() {
        let (p0, p1) = g.col_range(j);
        if p1 > PI + 1e-12 || p0 < -1e-12 {
            continue;
        }
        let a = g.is_inside(0, j);
        let b = g.is_inside(0, g.mirror_col(j));
        if a || b {
            fc.segment_edges += 1;
        }
        if a != b {
            fc.segment_walls += 1;
        }
    }
    for &j in &[0, jpi] {
        let jp = g.prev_col(j);
        let mut in_run = false;
        let mut in_wall_run = false;
        for i in 0..g.rows() {
            let (a, b) = (g.is_inside(i, jp), g.is_inside(i, j));
            let closed = a || b;
            let wall = a != b;
            if closed {
                fc.ray_edges += 1;
                if !in_run {
                    fc.ray_runs += 1;
                }
            }
            if wall && !in_wall_run {
                fc.ray_wall_runs += 1;
            }
            in_run = closed;
            in_wall_run = wall;
        }
        let focal = g.vertex_star(0, j).iter().any(|c| g.is_inside(c.i, c.j));
        if focal {
            fc.foci += 1;
        }
    }
    fc
}

/// Number of connected pieces of the inside cells (adjacency across shared sides, with the fold).
pub fn cell_components(g: &Grid) -> usize {
    use crate::grid::Side;
    let n = g.inside.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if !g.inside[start] || seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(c) = stack.pop() {
            let (i, j) = g.ij(c);
            for side in [Side::Low, Side::High, Side::Start, Side::End] {
                if let Some((a, b)) = g.neighbor(i, j, side) {
                    let k = g.idx(a, b);
                    if g.inside[k] && !seen[k] {
                        seen[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Series {
    A,
    B,
}

/// Prime marks of Statement 1: how much of the focal line is boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Primes {
    None,
    One,
    Two,
}

/// One of the twelve elementary classes: `A_f`, `A'_f` (f = 0, 1, 2) and
/// `B_0, B_1, B_2, B'_1, B'_2, B''_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementaryType {
    pub series: Series,
    pub primes: Primes,
    pub n_or_f: usize,
}

impl ElementaryType {
    pub const ALL: [ElementaryType; 12] = [
        Self::new(Series::A, Primes::None, 0),
        Self::new(Series::A, Primes::None, 1),
        Self::new(Series::A, Primes::None, 2),
        Self::new(Series::A, Primes::One, 0),
        Self::new(Series::A, Primes::One, 1),
        Self::new(Series::A, Primes::One, 2),
        Self::new(Series::B, Primes::None, 0),
        Self::new(Series::B, Primes::None, 1),
        Self::new(Series::B, Primes::None, 2),
        Self::new(Series::B, Primes::One, 1),
        Self::new(Series::B, Primes::One, 2),
        Self::new(Series::B, Primes::Two, 2),
    ];

    pub const fn new(series: Series, primes: Primes, n_or_f: usize) -> Self {
        Self { series, primes, n_or_f }
    }

    pub fn tag(&self) -> String {
        let s = match self.series {
            Series::A => "A",
            Series::B => "B",
        };
        let p = match self.primes {
            Primes::None => "",
            Primes::One => "'",
            Primes::Two => "''",
        };
        format!("{s}{p}_{}", self.n_or_f)
    }
}

impl fmt::Display for ElementaryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Elementary class of a cell set with no reflex vertices.
pub fn classify_cells(g: &Grid) -> Result<ElementaryType> {
    if !g.reflex_vertices().is_empty() {
        return domain_err("classification needs an elementary domain (k = 0)");
    }
    let fc = focal_contact(g);
    let t = if fc.segment_edges > 0 {
        let primes = if fc.segment_walls > 0 { Primes::One } else { Primes::None };
        ElementaryType::new(Series::A, primes, fc.foci)
    } else {
        let primes = match fc.ray_wall_runs {
            0 => Primes::None,
            1 => Primes::One,
            _ => Primes::Two,
        };
        ElementaryType::new(Series::B, primes, fc.ray_runs)
    };
    if !ElementaryType::ALL.contains(&t) {
        return domain_err(format!("cell set does not fit any elementary class ({})", t.tag()));
    }
    Ok(t)
}

pub fn classify_elementary(domain: &BilliardDomain) -> Result<ElementaryType> {
    if domain.complexity > 0 {
        return domain_err(format!("domain has complexity {} > 0", domain.complexity));
    }
    classify_cells(domain.grid())
}

pub fn complexity(domain: &BilliardDomain) -> usize {
    domain.complexity
}

pub fn homogeneity_class(domain: &BilliardDomain) -> Homogeneity {
    domain.homogeneity
}

pub fn validate(domain: &BilliardDomain) -> ValidationReport {
    domain.validate()
}

fn shoelace(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        s += poly[k].cross(poly[(k + 1) % n]);
    }
    0.5 * s
}

fn point_in_polygon(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let l2 = ab.dot(ab);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + t * ab)
}

fn segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}
