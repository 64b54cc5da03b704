//! A CW complex for the neighbourhood `U = Λ⁻¹[c − ε, c + ε]` of a critical
//! level.
//!
//! The level axis is cut at every grid-line parameter in the window, so over
//! an interval `τ` each grid element `σ` of the domain is either entirely in
//! the region of motion (a product cell `σ × τ`), entirely outside, or crossed
//! by the moving caustic. In the last case the part of `σ × τ` inside the
//! region is a wedge, bounded by a diagonal cell on which the caustic
//! identifies two branches. Cells lying in a single level are of the first
//! kind (they are the cells of that level complex); the others are of the
//! second kind.

use std::collections::{BTreeMap, HashMap, HashSet};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::decomposition::{CutArc, Partition};
use crate::gr::edge_in_region;
use crate::diagram::bifurcation_diagram;
use crate::domain::BilliardDomain;
use crate::error::{domain_err, integrity, Result};
use crate::fiber::{cell_side_edge, edge_cells, edge_ends, level_grid, Elem, LevelComplex, LevelOptions, Node, FLIP_PHI, FLIP_U, NEGATE};
use crate::grid::{Grid, Side};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelTag {
    BelowC,
    AtC,
    AboveC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// Inside one level.
    First,
    /// Spanning an interval of levels.
    Second,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub dim: usize,
    pub kind: CellKind,
    pub level: LevelTag,
    /// Lies over a reflex corner of the domain.
    pub over_reflex: bool,
    /// Grid element of a representative lift.
    #[serde(skip)]
    pub elem: Elem,
    /// Level index (first kind) or level-interval index (second kind).
    pub slot: usize,
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellComplex {
    #[serde(skip)]
    pub grid: Grid,
    pub critical_value: f64,
    pub epsilon: f64,
    /// Levels of the first-kind cells, ascending.
    pub levels: Vec<f64>,
    pub cells: Vec<Cell>,
    /// χ of the level complex at `c`.
    pub level_chi: i64,
    /// Same, with the lifts of reflex corners removed.
    pub level_chi_punctured: i64,
    /// Interval-cell identifications that merged two classes of a level
    /// complex (expected zero).
    pub inconsistent_merges: usize,
}

impl CellComplex {
    pub fn count(&self, dim: usize, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.dim == dim && c.kind == kind).count()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.cells.iter().filter(|c| c.dim == dim).count()
    }

    pub fn count_tag(&self, dim: usize, level: LevelTag) -> usize {
        self.cells.iter().filter(|c| c.dim == dim && c.level == level).count()
    }

    fn alt_sum(&self, keep: impl Fn(&Cell) -> bool) -> i64 {
        self.cells.iter().filter(|c| keep(c)).map(|c| if c.dim % 2 == 0 { 1 } else { -1 }).sum()
    }

    pub fn chi(&self) -> i64 {
        self.alt_sum(|_| true)
    }

    /// χ of the critical level as a subcomplex of `U`.
    pub fn at_chi(&self) -> i64 {
        self.alt_sum(|c| c.level == LevelTag::AtC && c.kind == CellKind::First)
    }

    /// Compactly supported χ of `U` with the reflex-corner lifts removed.
    pub fn punctured_chi(&self) -> i64 {
        self.alt_sum(|c| !c.over_reflex)
    }

    /// Every boundary cell exists and has lower dimension; every cell of
    /// positive dimension has a boundary.
    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.cells.iter().enumerate() {
            if c.dim > 0 && c.boundary.is_empty() {
                return integrity(format!("cell {k} of dimension {} has empty boundary", c.dim));
            }
            for &b in &c.boundary {
                let Some(bc) = self.cells.get(b) else {
                    return integrity(format!("cell {k}: boundary cell {b} missing"));
                };
                if bc.dim >= c.dim {
                    return integrity(format!("cell {k} (dim {}) has boundary cell {b} of dim {}", c.dim, bc.dim));
                }
            }
        }
        if self.inconsistent_merges > 0 {
            return integrity(format!("{} level-complex classes merged by interval cells", self.inconsistent_merges));
        }
        Ok(())
    }
}

/// Lift counts over the edges of a cut arc.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MultiplicityCheck {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl MultiplicityCheck {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

impl CellComplex {
    /// Every grid edge of the arc carries two lifts on a wall and four inside
    /// the table, both as first-kind 1-cells at each level other than `c` and
    /// as second-kind 2-cells over each level interval.
    pub fn arc_multiplicities(&self, arc: &CutArc) -> MultiplicityCheck {
        let g = &self.grid;
        let mut out = MultiplicityCheck::default();
        let mut first: HashMap<(Elem, usize), usize> = HashMap::new();
        let mut second: HashMap<(Elem, usize), usize> = HashMap::new();
        for c in &self.cells {
            match (c.kind, c.dim) {
                (CellKind::First, 1) => *first.entry((c.elem, c.slot)).or_default() += 1,
                (CellKind::Second, 2) => *second.entry((c.elem, c.slot)).or_default() += 1,
                _ => {}
            }
        }
        let w = Window { g, levels: self.levels.clone() };
        for e in arc.lines.edges(g) {
            if !edge_cells(g, e).iter().flatten().any(|&(i, j)| g.is_inside(i, j)) {
                continue;
            }
            let want = if is_wall(g, e) { 2 } else { 4 };
            for (li, &l) in self.levels.iter().enumerate() {
                if (l - self.critical_value).abs() <= TOL || !edge_in_region(g, e, l) {
                    continue;
                }
                out.checked += 1;
                let got = first.get(&(e, li)).copied().unwrap_or(0);
                if got != want {
                    out.failures.push(format!("{e:?} at level {l}: {got} lifts, expected {want}"));
                }
            }
            for t in 0..self.levels.len() - 1 {
                if !matches!(w.shape(e, t), Ok(Some(_))) {
                    continue;
                }
                out.checked += 1;
                let got = second.get(&(e, t)).copied().unwrap_or(0);
                if got != want {
                    out.failures.push(format!("{e:?} over interval {t}: {got} lifts, expected {want}"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Shape {
    Prod,
    Wedge,
    Diag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Ref {
    Interval(Elem, usize, Shape),
    Point(usize, Elem),
}

struct Window<'a> {
    g: &'a Grid,
    levels: Vec<f64>,
}

impl Window<'_> {
    fn above_b(&self, t: usize) -> bool {
        0.5 * (self.levels[t] + self.levels[t + 1]) > self.g.family.b
    }

    /// Range of the parameter that decides region membership on interval `t`.
    fn range(&self, s: Elem, t: usize) -> (f64, f64) {
        let g = self.g;
        if self.above_b(t) {
            match s {
                Elem::Vertex(_, j) | Elem::VEdge(_, j) => (g.phis[j].lambda, g.phis[j].lambda),
                Elem::HEdge(_, j) | Elem::Face(_, j) => g.col_lambdas(j),
                _ => unreachable!(),
            }
        } else {
            match s {
                Elem::Vertex(i, _) | Elem::HEdge(i, _) => (g.us[i].lambda, g.us[i].lambda),
                Elem::VEdge(i, _) | Elem::Face(i, _) => g.row_lambdas(i),
                _ => unreachable!(),
            }
        }
    }

    /// Shape of `σ × τ` within the region, `None` if it misses the region.
    fn shape(&self, s: Elem, t: usize) -> Result<Option<Shape>> {
        let (l0, l1) = (self.levels[t], self.levels[t + 1]);
        let (m, mx) = self.range(s, t);
        let inside = if self.above_b(t) { m >= l1 - TOL } else { mx <= l0 + TOL };
        let outside = if self.above_b(t) { mx <= l0 + TOL } else { m >= l1 - TOL };
        if inside {
            Ok(Some(Shape::Prod))
        } else if outside {
            Ok(None)
        } else if (m - l0).abs() <= TOL && (mx - l1).abs() <= TOL {
            Ok(Some(Shape::Wedge))
        } else {
            domain_err(format!("grid element {s:?} straddles the level window ({m}, {mx}) vs ({l0}, {l1})"))
        }
    }

    /// End of interval `t` at which a wedge over `σ` covers all of `σ`.
    fn full_end(&self, t: usize) -> usize {
        if self.above_b(t) {
            t
        } else {
            t + 1
        }
    }

    fn level_index(&self, l: f64) -> Option<usize> {
        self.levels.iter().position(|&x| (x - l).abs() <= TOL)
    }

    fn facets(&self, s: Elem) -> Vec<(Elem, bool)> {
        let g = self.g;
        match s {
            Elem::Face(i, j) => [Side::Start, Side::High, Side::End, Side::Low]
                .into_iter()
                .map(|side| cell_side_edge(g, i, j, side))
                .collect(),
            Elem::HEdge(..) | Elem::VEdge(..) => {
                edge_ends(g, s).into_iter().map(|(a, b, neg)| (Elem::Vertex(a, b), neg)).collect()
            }
            _ => vec![],
        }
    }

    fn boundary(&self, r: Ref) -> Result<Vec<(Ref, bool)>> {
        let Ref::Interval(s, t, shape) = r else { return Ok(vec![]) };
        let mut out = Vec::new();
        match shape {
            Shape::Prod => {
                for (f, neg) in self.facets(s) {
                    out.push((Ref::Interval(f, t, Shape::Prod), neg));
                }
                out.push((Ref::Point(t, s), false));
                out.push((Ref::Point(t + 1, s), false));
            }
            Shape::Wedge => {
                for (f, neg) in self.facets(s) {
                    if let Some(sh) = self.shape(f, t)? {
                        out.push((Ref::Interval(f, t, sh), neg));
                    }
                }
                out.push((Ref::Interval(s, t, Shape::Diag), false));
                out.push((Ref::Point(self.full_end(t), s), false));
            }
            Shape::Diag => {
                for (f, neg) in self.facets(s) {
                    match self.shape(f, t)? {
                        Some(Shape::Wedge) => out.push((Ref::Interval(f, t, Shape::Diag), neg)),
                        _ => {
                            let (m, _) = self.range(f, t);
                            if let Some(li) = self.level_index(m) {
                                out.push((Ref::Point(li, f), neg));
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn is_wall(g: &Grid, e: Elem) -> bool {
    edge_cells(g, e).iter().any(|c| !c.is_some_and(|(i, j)| g.is_inside(i, j)))
}

/// Level parameters cutting the window `[lo, hi]`: the ends, `c`, `b` when
/// inside, and every grid line of the deciding family in between.
fn window_levels(g: &Grid, lo: f64, c: f64, hi: f64) -> Vec<f64> {
    let b = g.family.b;
    let mut v = vec![lo, c, hi];
    if lo < b && b < hi {
        v.push(b);
    }
    v.extend(g.us.iter().map(|l| l.lambda).filter(|&x| x > lo && x < hi && x <= b));
    v.extend(g.phis.iter().map(|l| l.lambda).filter(|&x| x > lo && x < hi && x >= b));
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= TOL);
    v
}

/// Builds the complex of `U` around critical value `c` on the domain grid
/// refined by `subdiv`.
pub fn build_cell_complex(domain: &BilliardDomain, p: &Partition, c: f64, subdiv: usize) -> Result<CellComplex> {
    let diagram = bifurcation_diagram(domain);
    if !diagram.is_critical(c) {
        return domain_err(format!("{c} is not a critical value"));
    }
    let eps = diagram.epsilon();
    let (lo, hi) = (c - eps, c + eps);
    let g = level_grid(&p.grid, &[lo, c, hi], subdiv);
    build_on(&g, c, eps, lo, hi)
}

fn build_on(g: &Grid, c: f64, eps: f64, lo: f64, hi: f64) -> Result<CellComplex> {
    let levels = window_levels(g, lo, c, hi);
    let w = Window { g, levels: levels.clone() };
    let lcs: Vec<LevelComplex> =
        levels.iter().map(|&l| LevelComplex::build(g, l, &LevelOptions::standard())).collect();

    // Ids: first-kind cells per level, then interval cells.
    let mut base = Vec::with_capacity(lcs.len());
    let mut total = 0;
    for lc in &lcs {
        base.push(total);
        total += lc.num_classes();
    }
    let point_total = total;

    let mut ids: HashMap<(Ref, u8), usize> = HashMap::new();
    let mut keys: Vec<(Ref, u8)> = Vec::new();
    let mut bounds: Vec<Vec<(Ref, bool)>> = Vec::new();
    let mut stack: Vec<Ref> = Vec::new();
    let mut seen: HashMap<Ref, usize> = HashMap::new();
    for t in 0..levels.len() - 1 {
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                if !g.is_inside(i, j) {
                    continue;
                }
                if let Some(sh) = w.shape(Elem::Face(i, j), t)? {
                    stack.push(Ref::Interval(Elem::Face(i, j), t, sh));
                }
            }
        }
    }
    while let Some(r) = stack.pop() {
        if seen.contains_key(&r) {
            continue;
        }
        let bd = w.boundary(r)?;
        for &(x, _) in &bd {
            if matches!(x, Ref::Interval(..)) && !seen.contains_key(&x) {
                stack.push(x);
            }
        }
        seen.insert(r, bounds.len());
        bounds.push(bd);
        for b in 0..4u8 {
            ids.insert((r, b), point_total + keys.len());
            keys.push((r, b));
        }
    }
    total += keys.len();

    let point_id = |li: usize, s: Elem, b: u8| -> Option<usize> {
        lcs[li].class_of(&Node { elem: s, sheet: 0, branch: b }).map(|k| base[li] + k)
    };

    let mut uf = UnionFind::<usize>::new(total.max(1));
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &(r, b) in &keys {
        let Ref::Interval(s, t, shape) = r else { continue };
        let mut flips = Vec::new();
        if shape == Shape::Diag {
            flips.push(if w.above_b(t) { FLIP_PHI } else { FLIP_U });
        }
        if matches!(s, Elem::HEdge(..) | Elem::VEdge(..)) && shape != Shape::Diag && is_wall(g, s) {
            flips.push(if matches!(s, Elem::HEdge(..)) { FLIP_U } else { FLIP_PHI });
        }
        for f in flips {
            pairs.push((ids[&(r, b)], ids[&(r, b ^ f)]));
        }
    }
    for &(x, y) in &pairs {
        uf.union(x, y);
    }

    // Close the identifications under taking boundaries.
    let resolve = |x: Ref, b: u8| -> Option<usize> {
        match x {
            Ref::Interval(..) => ids.get(&(x, b)).copied(),
            Ref::Point(li, s) => point_id(li, s, b),
        }
    };
    let reflex: HashSet<Elem> = g.reflex_vertices().into_iter().map(|(i, j)| Elem::Vertex(i, j)).collect();
    let mut point_elem = vec![Elem::Vertex(0, 0); point_total];
    for (li, lc) in lcs.iter().enumerate() {
        for k in 0..lc.num_classes() {
            point_elem[base[li] + k] = lc.class_rep(k).elem;
        }
    }
    let mut inconsistent = 0usize;
    let mut point_uf = UnionFind::<usize>::new(point_total.max(1));
    loop {
        let mut changed = false;
        for (k, &(r, b)) in keys.iter().enumerate() {
            let me = point_total + k;
            for f in [FLIP_U, FLIP_PHI, NEGATE] {
                let other = ids[&(r, b ^ f)];
                if other < me || !uf.equiv(me, other) {
                    continue;
                }
                for &(x, neg) in &bounds[seen[&r]] {
                    let bx = if neg { b ^ NEGATE } else { b };
                    let (Some(p), Some(q)) = (resolve(x, bx), resolve(x, bx ^ f)) else { continue };
                    if !uf.equiv(p, q) {
                        uf.union(p, q);
                        changed = true;
                        if p < point_total && q < point_total && !point_uf.equiv(p, q) {
                            point_uf.union(p, q);
                            if !reflex.contains(&point_elem[p]) {
                                inconsistent += 1;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Quotient cells.
    let tag = |l: f64| {
        if (l - c).abs() <= TOL {
            LevelTag::AtC
        } else if l < c {
            LevelTag::BelowC
        } else {
            LevelTag::AboveC
        }
    };
    let mut root_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let mut raw_bounds: Vec<Vec<usize>> = Vec::new();
    for (li, lc) in lcs.iter().enumerate() {
        for k in 0..lc.num_classes() {
            let r = uf.find(base[li] + k);
            if root_index.contains_key(&r) {
                continue;
            }
            root_index.insert(r, cells.len());
            let dim = lc.class_dim(k);
            let bd: Vec<usize> = match dim {
                2 => lc.face_boundary(k).iter().map(|&(e, _)| base[li] + e).chain(lc.face_extras(k).into_iter().map(|x| base[li] + x)).collect(),
                1 => lc.edge_vertices(k).into_iter().map(|v| base[li] + v).collect(),
                _ => vec![],
            };
            let over_reflex = reflex.contains(&point_elem[base[li] + k]);
            let elem = point_elem[base[li] + k];
            cells.push(Cell { dim, kind: CellKind::First, level: tag(levels[li]), over_reflex, elem, slot: li, boundary: vec![] });
            raw_bounds.push(bd);
        }
    }
    for (k, &(r, b)) in keys.iter().enumerate() {
        let root = uf.find(point_total + k);
        if root_index.contains_key(&root) {
            continue;
        }
        let Ref::Interval(s, t, shape) = r else { unreachable!() };
        let dim = s.dim() + usize::from(shape != Shape::Diag);
        let mid = 0.5 * (levels[t] + levels[t + 1]);
        root_index.insert(root, cells.len());
        let bd: Vec<usize> = bounds[seen[&r]]
            .iter()
            .filter_map(|&(x, neg)| resolve(x, if neg { b ^ NEGATE } else { b }))
            .collect();
        let over_reflex = reflex.contains(&s);
        cells.push(Cell { dim, kind: CellKind::Second, level: tag(mid), over_reflex, elem: s, slot: t, boundary: vec![] });
        raw_bounds.push(bd);
    }
    for (cell, bd) in cells.iter_mut().zip(raw_bounds) {
        let mut v: Vec<usize> = bd.into_iter().map(|x| root_index[&uf.find(x)]).collect();
        v.sort_unstable();
        v.dedup();
        cell.boundary = v;
    }

    let at = levels.iter().position(|&l| (l - c).abs() <= TOL).unwrap();
    Ok(CellComplex {
        grid: g.clone(),
        critical_value: c,
        epsilon: eps,
        levels,
        cells,
        level_chi: lcs[at].chi(),
        level_chi_punctured: lcs[at].chi()
            - (0..lcs[at].num_classes()).filter(|&k| reflex.contains(&lcs[at].class_rep(k).elem)).count() as i64,
        inconsistent_merges: inconsistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::decomposition::partition;
    use crate::gluing::glue_cylinders;
    use crate::gr::{side_level, ArcSide};

    fn all_domains() -> Vec<catalog::CatalogDomain> {
        let mut v = catalog::elementary();
        v.extend(catalog::test_domains());
        v
    }

    #[test]
    fn complexes_retract_onto_critical_level() {
        for cd in all_domains() {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            for c in bifurcation_diagram(&d).lambdas() {
                let cx = build_cell_complex(&d, &p, c, 1).unwrap();
                let tag = format!("{} c={c}", cd.name);
                cx.validate().unwrap_or_else(|e| panic!("{tag}: {e}"));
                assert_eq!(cx.chi(), cx.at_chi(), "{tag}");
                assert_eq!(cx.punctured_chi(), cx.level_chi_punctured, "{tag}");
                for k in 0..=3 {
                    assert!(cx.count_dim(k) > 0, "{tag}: no {k}-cells");
                }
                assert_eq!(cx.count(3, CellKind::First), 0, "{tag}");
                assert_eq!(cx.count(0, CellKind::Second), 0, "{tag}");
            }
        }
    }

    #[test]
    fn refinement_keeps_chi() {
        for cd in [catalog::nc1(), catalog::nc3(), catalog::elementary().remove(0)] {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            for c in bifurcation_diagram(&d).lambdas() {
                let a = build_cell_complex(&d, &p, c, 1).unwrap();
                let b = build_cell_complex(&d, &p, c, 2).unwrap();
                assert!(b.cells.len() > a.cells.len());
                assert_eq!((a.chi(), a.punctured_chi()), (b.chi(), b.punctured_chi()), "{} c={c}", cd.name);
            }
        }
    }

    #[test]
    fn regular_value_is_rejected() {
        let d = catalog::nc1().build().unwrap();
        let p = partition(&d).unwrap();
        assert!(matches!(build_cell_complex(&d, &p, 0.45, 1), Err(crate::error::BilliardError::Domain(_))));
    }

    #[test]
    fn nc1_arc_level_two_ways() {
        let d = catalog::nc1().build().unwrap();
        let p = partition(&d).unwrap();
        let eps = bifurcation_diagram(&d).epsilon();
        for (i, arc) in p.cut_arcs.iter().enumerate() {
            let c = side_level(arc, ArcSide::At, eps);
            let cx = build_cell_complex(&d, &p, c, 1).unwrap();
            let glued = glue_cylinders(&d, &p, i, ArcSide::At, 1).unwrap();
            assert_eq!(glued.chi(), cx.level_chi);
            assert_eq!(cx.chi() - cx.at_chi(), 0);
            assert_eq!((cx.chi(), cx.level_chi, cx.punctured_chi()), (0, 0, -1));
        }
    }

    #[test]
    fn caustic_through_reflex_corner() {
        let d = catalog::nc1().build().unwrap();
        let p = partition(&d).unwrap();
        let cx = build_cell_complex(&d, &p, 0.3, 1).unwrap();
        // The closure in U merges the two corner lifts of the level complex.
        assert_eq!((cx.chi(), cx.level_chi, cx.punctured_chi(), cx.level_chi_punctured), (-1, 0, -2, -2));
    }

    #[test]
    fn elementary_saddle_level() {
        for cd in catalog::elementary() {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            let b = d.family.b;
            if !bifurcation_diagram(&d).is_critical(b) {
                continue;
            }
            let cx = build_cell_complex(&d, &p, b, 1).unwrap();
            assert_eq!(cx.chi(), 0, "{}", cd.name);
            assert!(cx.cells.iter().all(|c| !c.over_reflex));
        }
    }

    #[test]
    fn arc_multiplicities_hold() {
        for cd in catalog::test_domains() {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            let eps = bifurcation_diagram(&d).epsilon();
            for arc in &p.cut_arcs {
                for c in [side_level(arc, ArcSide::At, eps), d.family.b] {
                    let cx = build_cell_complex(&d, &p, c, 1).unwrap();
                    let m = cx.arc_multiplicities(arc);
                    assert!(m.pass() && m.checked > 0, "{} c={c}: {} checked, {:?}", cd.name, m.checked, m.failures);
                }
            }
        }
    }
}
