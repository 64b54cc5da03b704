//! Rectilinear cell grid in unfolded elliptic coordinates `(u, φ)`.
//!
//! `x + iy = c·cosh(u + iφ)` maps the half-cylinder `u ≥ 0, φ ∈ S¹` onto the
//! plane; the line `u = 0` covers the inter-focal segment twice, with
//! `(0, φ) ≡ (0, −φ)`. Grid lines are ellipses (`u` fixed) and hyperbola
//! branches (`φ` fixed), so every boundary arc, caustic and cut quadric runs
//! exactly along grid lines.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::geometry::ConfocalFamily;

const LINE_TOL: f64 = 1e-12;

/// An ellipse line `u = const` with its family parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ULine {
    pub lambda: f64,
    pub u: f64,
    pub exact: bool,
}

impl ULine {
    pub fn from_lambda(family: &ConfocalFamily, lambda: f64) -> Self {
        let u = if lambda >= family.b { 0.0 } else { family.u_of(lambda) };
        let lambda = lambda.min(family.b);
        Self { lambda, u, exact: true }
    }

    pub fn from_u(family: &ConfocalFamily, u: f64) -> Self {
        let lambda = if u == 0.0 { family.b } else { family.lambda_of_u(u) };
        Self { lambda, u, exact: u == 0.0 }
    }
}

/// Position of a hyperbola line: parameter `λ_h` and quarter `0..4`
/// (quarter `q` holds `φ₀, π−φ₀, π+φ₀, 2π−φ₀` respectively).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPos {
    pub lambda_h: f64,
    pub quarter: u8,
}

impl PhiPos {
    pub const fn new(lambda_h: f64, quarter: u8) -> Self {
        Self { lambda_h, quarter }
    }

    /// Angle in `[0, 2π]`; quarter 3 with `λ_h = b` gives `2π`.
    pub fn phi(&self, family: &ConfocalFamily) -> f64 {
        let p0 = family.phi0_of(self.lambda_h);
        match self.quarter % 4 {
            0 => p0,
            1 => PI - p0,
            2 => PI + p0,
            _ => TAU - p0,
        }
    }
}

/// A hyperbola line `φ = const` with its family parameter `λ_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiLine {
    pub lambda: f64,
    pub phi: f64,
    pub exact: bool,
}

impl PhiLine {
    pub fn at(family: &ConfocalFamily, pos: PhiPos) -> Self {
        let phi = pos.phi(family).rem_euclid(TAU);
        let phi = if phi >= TAU - LINE_TOL { 0.0 } else { phi };
        Self { lambda: pos.lambda_h.clamp(family.b, family.a), phi, exact: true }
    }

    pub fn from_phi(family: &ConfocalFamily, phi: f64) -> Self {
        let phi = phi.rem_euclid(TAU);
        Self { lambda: family.lambda_of_phi(phi), phi, exact: false }
    }

    /// All four positions of hyperbola `λ_h` (two when it is degenerate).
    pub fn all_of(family: &ConfocalFamily, lambda_h: f64) -> Vec<PhiLine> {
        (0..4).map(|q| PhiLine::at(family, PhiPos::new(lambda_h, q))).collect()
    }
}

/// Which side of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `u = u_i` (toward the focal segment).
    Low,
    /// `u = u_{i+1}`.
    High,
    /// `φ = φ_j`.
    Start,
    /// `φ = φ_{j+1}`.
    End,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub family: ConfocalFamily,
    /// Ascending, first line is `u = 0`.
    pub us: Vec<ULine>,
    /// Ascending in `[0, 2π)`, first line is `φ = 0`, closed under `φ → −φ`.
    pub phis: Vec<PhiLine>,
    mirror: Vec<usize>,
    /// Row-major flags, `rows() × cols()`.
    pub inside: Vec<bool>,
}

impl Grid {
    /// Builds a grid from arbitrary lines; adds `u = 0`, the axes and mirror
    /// images, merges lines closer than `1e-12` (keeping exact parameters).
    pub fn new(family: ConfocalFamily, us: Vec<ULine>, phis: Vec<PhiLine>) -> Self {
        let us = merge_lines(
            std::iter::once(ULine::from_lambda(&family, family.b)).chain(us).collect(),
            |l| l.u,
            |l| l.exact,
        );
        let mut all_phis: Vec<PhiLine> = Vec::new();
        for q in 0..4 {
            all_phis.push(PhiLine::at(&family, PhiPos::new(family.b, q)));
            all_phis.push(PhiLine::at(&family, PhiPos::new(family.a, q)));
        }
        for p in phis {
            let mut m = p;
            m.phi = (TAU - p.phi).rem_euclid(TAU);
            if m.phi >= TAU - LINE_TOL {
                m.phi = 0.0;
            }
            all_phis.push(p);
            all_phis.push(m);
        }
        let phis = merge_lines(all_phis, |l| l.phi, |l| l.exact);
        let mirror = (0..phis.len())
            .map(|j| {
                let target = (TAU - phis[j].phi).rem_euclid(TAU);
                nearest_cyclic(&phis, target)
            })
            .collect();
        let cells = (us.len() - 1) * phis.len();
        Self { family, us, phis, mirror, inside: vec![false; cells] }
    }

    pub fn rows(&self) -> usize {
        self.us.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.phis.len()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cols() + j
    }

    pub fn ij(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols(), cell % self.cols())
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.idx(i, j)]
    }

    /// Index of the line at `−φ_j`.
    pub fn mirror_line(&self, j: usize) -> usize {
        self.mirror[j]
    }

    /// Column whose interval is the mirror image of column `j`.
    pub fn mirror_col(&self, j: usize) -> usize {
        self.mirror[(j + 1) % self.cols()]
    }

    pub fn next_col(&self, j: usize) -> usize {
        (j + 1) % self.cols()
    }

    pub fn prev_col(&self, j: usize) -> usize {
        (j + self.cols() - 1) % self.cols()
    }

    /// `φ` range of column `j`; the last column ends at `2π`.
    pub fn col_range(&self, j: usize) -> (f64, f64) {
        let lo = self.phis[j].phi;
        let hi = if j + 1 == self.cols() { TAU } else { self.phis[j + 1].phi };
        (lo, hi)
    }

    pub fn row_range(&self, i: usize) -> (f64, f64) {
        (self.us[i].u, self.us[i + 1].u)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let (u0, u1) = self.row_range(i);
        let (p0, p1) = self.col_range(j);
        (0.5 * (u0 + u1), 0.5 * (p0 + p1))
    }

    /// `λ_e` range `(smaller, larger)` over the row.
    pub fn row_lambdas(&self, i: usize) -> (f64, f64) {
        (self.us[i + 1].lambda, self.us[i].lambda)
    }

    /// `λ_h` range `(smaller, larger)` over the column (monotone inside a quadrant).
    pub fn col_lambdas(&self, j: usize) -> (f64, f64) {
        let l0 = self.phis[j].lambda;
        let l1 = self.phis[self.next_col(j)].lambda;
        (l0.min(l1), l0.max(l1))
    }

    /// Exact planar area of a cell: `∫∫ c²(sinh²u + sin²φ) du dφ`.
    pub fn cell_area(&self, i: usize, j: usize) -> f64 {
        let (u0, u1) = self.row_range(i);
        let (p0, p1) = self.col_range(j);
        let su = |u: f64| (2.0 * u).sinh() / 4.0 - u / 2.0;
        let sp = |p: f64| p / 2.0 - (2.0 * p).sin() / 4.0;
        let c2 = self.family.a - self.family.b;
        c2 * ((su(u1) - su(u0)) * (p1 - p0) + (u1 - u0) * (sp(p1) - sp(p0)))
    }

    /// Neighbour across a side, with the fold at `u = 0`. `None` past the last row.
    pub fn neighbor(&self, i: usize, j: usize, side: Side) -> Option<(usize, usize)> {
        match side {
            Side::Low if i == 0 => Some((0, self.mirror_col(j))),
            Side::Low => Some((i - 1, j)),
            Side::High if i + 1 >= self.rows() => None,
            Side::High => Some((i + 1, j)),
            Side::Start => Some((i, self.prev_col(j))),
            Side::End => Some((i, self.next_col(j))),
        }
    }

    pub fn neighbor_inside(&self, i: usize, j: usize, side: Side) -> bool {
        self.neighbor(i, j, side).is_some_and(|(a, b)| self.is_inside(a, b))
    }

    pub fn locate_row(&self, u: f64) -> Option<usize> {
        if u < 0.0 || u > self.us.last().unwrap().u {
            return None;
        }
        let k = self.us.partition_point(|l| l.u <= u);
        Some(k.saturating_sub(1).min(self.rows() - 1))
    }

    pub fn locate_col(&self, phi: f64) -> usize {
        let phi = phi.rem_euclid(TAU);
        let k = self.phis.partition_point(|l| l.phi <= phi);
        k.saturating_sub(1)
    }

    /// Adds lines and splits every interval into `subdiv` equal parts; the new
    /// grid inherits `inside` flags from the cells containing its cell centres.
    pub fn refined(&self, extra_us: &[ULine], extra_phis: &[PhiLine], subdiv: usize) -> Grid {
        let subdiv = subdiv.max(1);
        let fam = self.family;
        let mut us: Vec<ULine> = self.us.clone();
        us.extend_from_slice(extra_us);
        let mut phis: Vec<PhiLine> = self.phis.clone();
        phis.extend_from_slice(extra_phis);
        let base = Grid::new(fam, us, phis);
        let mut us = base.us.clone();
        let mut phis = base.phis.clone();
        if subdiv > 1 {
            for w in base.us.windows(2) {
                for k in 1..subdiv {
                    let t = k as f64 / subdiv as f64;
                    us.push(ULine::from_u(&fam, w[0].u + t * (w[1].u - w[0].u)));
                }
            }
            for j in 0..base.cols() {
                let (p0, p1) = base.col_range(j);
                for k in 1..subdiv {
                    let t = k as f64 / subdiv as f64;
                    phis.push(PhiLine::from_phi(&fam, p0 + t * (p1 - p0)));
                }
            }
        }
        let mut g = Grid::new(fam, us, phis);
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let (u, p) = g.cell_center(i, j);
                let flag = self
                    .locate_row(u)
                    .map(|r| self.is_inside(r, self.locate_col(p)))
                    .unwrap_or(false);
                let k = g.idx(i, j);
                g.inside[k] = flag;
            }
        }
        g
    }

    /// Per-cell data of this grid carried over to a refinement `fine`
    /// through cell centres.
    pub fn transfer<T: Clone>(&self, fine: &Grid, data: &[T], outside: T) -> Vec<T> {
        (0..fine.rows() * fine.cols())
            .map(|c| {
                let (i, j) = fine.ij(c);
                let (u, p) = fine.cell_center(i, j);
                match self.locate_row(u) {
                    Some(r) => data[self.idx(r, self.locate_col(p))].clone(),
                    None => outside.clone(),
                }
            })
            .collect()
    }

    /// Lines lying on the coordinate axes: `(φ = 0, φ = π)` indices.
    pub fn focal_cols(&self) -> (usize, usize) {
        (0, nearest_cyclic(&self.phis, PI))
    }

    pub fn y_axis_cols(&self) -> (usize, usize) {
        (nearest_cyclic(&self.phis, FRAC_PI_2), nearest_cyclic(&self.phis, 3.0 * FRAC_PI_2))
    }

    pub fn find_u(&self, lambda: f64) -> Option<usize> {
        self.us.iter().position(|l| (l.lambda - lambda).abs() <= 1e-12)
    }

    pub fn find_phis(&self, lambda: f64) -> Vec<usize> {
        (0..self.cols())
            .filter(|&j| (self.phis[j].lambda - lambda).abs() <= 1e-12)
            .collect()
    }
}

fn nearest_cyclic(phis: &[PhiLine], target: f64) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (k, l) in phis.iter().enumerate() {
        let d = (l.phi - target).abs();
        let d = d.min(TAU - d);
        if d < bd {
            bd = d;
            best = k;
        }
    }
    best
}

fn merge_lines<L: Copy>(mut v: Vec<L>, key: impl Fn(&L) -> f64, exact: impl Fn(&L) -> bool) -> Vec<L> {
    v.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let mut out: Vec<L> = Vec::with_capacity(v.len());
    for l in v {
        match out.last_mut() {
            Some(prev) if (key(&l) - key(prev)).abs() <= LINE_TOL => {
                if exact(&l) && !exact(prev) {
                    *prev = l;
                }
            }
            _ => out.push(l),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn axes_and_symmetry() {
        let f = fam();
        let g = Grid::new(f, vec![ULine::from_lambda(&f, 0.0)], vec![PhiLine::at(&f, PhiPos::new(1.5, 0))]);
        assert_eq!(g.us.len(), 2);
        assert_eq!(g.cols(), 6);
        for j in 0..g.cols() {
            assert_eq!(g.mirror_line(g.mirror_line(j)), j);
            let (a, b) = g.col_range(j);
            let (c, d) = g.col_range(g.mirror_col(j));
            assert!((TAU - b - c).abs() < 1e-12 && (TAU - a - d).abs() < 1e-12);
        }
        assert_eq!(g.focal_cols(), (0, 3));
    }

    #[test]
    fn ellipse_area_is_exact() {
        let f = fam();
        let mut g = Grid::new(f, vec![ULine::from_lambda(&f, 0.0)], vec![]);
        g.inside.iter_mut().for_each(|x| *x = true);
        let area: f64 = (0..g.cols()).map(|j| g.cell_area(0, j)).sum();
        assert!((area - PI * 2f64.sqrt()).abs() < 1e-12);
        let r = g.refined(&[], &[], 3);
        let area2: f64 = (0..r.rows())
            .flat_map(|i| (0..r.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| r.is_inside(i, j))
            .map(|(i, j)| r.cell_area(i, j))
            .sum();
        assert!((area2 - area).abs() < 1e-12);
    }

    #[test]
    fn exact_lines_survive_merging() {
        let f = fam();
        let approx = PhiLine::from_phi(&f, f.phi0_of(1.6));
        let exact = PhiLine::at(&f, PhiPos::new(1.6, 0));
        let g = Grid::new(f, vec![], vec![approx, exact]);
        assert_eq!(g.find_phis(1.6).len(), 2);
    }
}

/// A cell incident to a grid vertex; `flipped` marks cells on the opposite
/// lip of the fold, whose velocity branches are negated in the vertex frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarCell {
    pub i: usize,
    pub j: usize,
    pub flipped: bool,
}

impl Grid {
    /// Canonical representative of vertex `(i, j)`: on `u = 0` the upper-lip
    /// line. Returns the line index and whether the frame is negated.
    pub fn canonical_vertex(&self, i: usize, j: usize) -> (usize, usize, bool) {
        let j = j % self.cols();
        if i == 0 && self.phis[j].phi > PI + 1e-12 {
            (0, self.mirror_line(j), true)
        } else {
            (i, j, false)
        }
    }

    /// Distinct cells around vertex `(i, j)`, in the frame of its canonical form.
    pub fn vertex_star(&self, i: usize, j: usize) -> Vec<StarCell> {
        let (i, j, _) = self.canonical_vertex(i, j);
        let jp = self.prev_col(j);
        let mut out: Vec<StarCell> = Vec::with_capacity(4);
        let mut push = |c: StarCell| {
            if !out.iter().any(|o| o.i == c.i && o.j == c.j) {
                out.push(c);
            }
        };
        if i > 0 {
            push(StarCell { i: i - 1, j: jp, flipped: false });
            push(StarCell { i: i - 1, j, flipped: false });
        }
        if i < self.rows() {
            push(StarCell { i, j: jp, flipped: false });
            push(StarCell { i, j, flipped: false });
        }
        if i == 0 {
            push(StarCell { i: 0, j: self.mirror_col(jp), flipped: true });
            push(StarCell { i: 0, j: self.mirror_col(j), flipped: true });
        }
        out
    }

    /// Is vertex `(i, j)` a focus (`u = 0`, `φ ∈ {0, π}`)?
    pub fn is_focus_vertex(&self, i: usize, j: usize) -> bool {
        i == 0 && self.mirror_line(j % self.cols()) == j % self.cols()
    }

    /// Vertices with exactly three of four incident cells inside.
    pub fn reflex_vertices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..=self.rows() {
            for j in 0..self.cols() {
                let (ci, cj, _) = self.canonical_vertex(i, j);
                if (ci, cj) != (i, j) {
                    continue;
                }
                let star = self.vertex_star(i, j);
                let n_in = star.iter().filter(|c| self.is_inside(c.i, c.j)).count();
                if star.len() == 4 && n_in == 3 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn vertex_point(&self, i: usize, j: usize) -> crate::geometry::Vec2 {
        self.family.from_unfolded(self.us[i].u, self.phis[j % self.cols()].phi)
    }
}
