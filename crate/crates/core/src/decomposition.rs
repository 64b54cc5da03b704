//! Partitions of homogeneous domains into elementary pieces, cut arcs, motion
//! regions and arc neighbourhoods.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::build::domain_from_cells;
use crate::domain::{classify_cells, BilliardDomain, ElementaryType, Homogeneity};
use crate::error::{domain_err, integrity, invalid, Result};
use crate::fiber::{cell_in_region, cell_side_edge, edge_cells, edge_ends, level_grid, Elem, FLIP_PHI, FLIP_U};
use crate::grid::{Grid, PhiLine, Side, ULine};

const SIDES: [Side; 4] = [Side::Start, Side::High, Side::End, Side::Low];
const PARAM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutRule {
    /// Cut along hyperbola branches through the singular vertices.
    Hyperbolic,
    /// Cut along ellipses through the singular vertices.
    Elliptic,
}

/// The lines of a cut quadric, as coordinates so they survive refinement.
#[derive(Debug, Clone, PartialEq)]
pub enum CutLines {
    /// φ values of the cut hyperbola branch(es).
    Phi(Vec<f64>),
    /// u value of the cut ellipse.
    U(f64),
}

impl CutLines {
    /// Canonical edges of `g` lying on these lines.
    pub fn edges(&self, g: &Grid) -> Vec<Elem> {
        match self {
            CutLines::Phi(phis) => phis
                .iter()
                .filter_map(|&p| phi_index(g, p))
                .flat_map(|j| (0..g.rows()).map(move |i| Elem::VEdge(i, j)))
                .collect(),
            CutLines::U(u) => {
                let Some(i) = g.us.iter().position(|l| (l.u - u).abs() <= 1e-12) else { return vec![] };
                (0..g.cols())
                    .filter(|&j| i > 0 || g.col_range(j).0 < std::f64::consts::PI - 1e-12)
                    .map(|j| Elem::HEdge(i, j))
                    .collect()
            }
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, CutLines::U(_))
    }
}

fn phi_index(g: &Grid, phi: f64) -> Option<usize> {
    g.phis.iter().position(|l| (l.phi - phi).abs() <= 1e-9)
}

#[derive(Debug, Clone)]
pub struct ArcSegment {
    /// `true` on the domain's true boundary, `false` on an internal interface.
    pub plus: bool,
    /// Consecutive canonical edges.
    pub edges: Vec<Elem>,
    /// Canonical end vertices.
    pub ends: [(usize, usize); 2],
}

#[derive(Debug, Clone)]
pub struct CutArc {
    pub lambda_i: f64,
    pub lines: CutLines,
    pub segments: Vec<ArcSegment>,
    /// Singular (3π/2) vertices on the arc.
    pub singular_points: Vec<(usize, usize)>,
    /// Convex (π/2) corners on the arc.
    pub corner_points: Vec<(usize, usize)>,
    /// Strip components on the inside of the quadric (larger parameter).
    pub nu: usize,
    /// Strip components on the outside.
    pub xi: usize,
}

impl CutArc {
    /// Strip components on the side that stays in the motion region when the
    /// level passes the arc.
    pub fn persisting(&self) -> usize {
        if self.lines.is_elliptic() {
            self.xi
        } else {
            self.nu
        }
    }

    pub fn vanishing(&self) -> usize {
        if self.lines.is_elliptic() {
            self.nu
        } else {
            self.xi
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartitionElement {
    pub kind: ElementaryType,
    /// Cells of the partition grid.
    pub cells: Vec<usize>,
    pub area: f64,
    pub domain: BilliardDomain,
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub rule: CutRule,
    /// Domain grid; cut lines are domain grid lines already.
    pub grid: Grid,
    /// Element index per cell.
    pub labels: Vec<Option<usize>>,
    pub elements: Vec<PartitionElement>,
    pub cut_arcs: Vec<CutArc>,
}

impl Partition {
    #[allow(non_snake_case)]
    pub fn N(&self) -> usize {
        self.elements.len()
    }

    pub fn n(&self) -> usize {
        self.cut_arcs.len()
    }

    /// Canonical edges of every cut on grid `g`.
    pub fn cut_edges(&self, g: &Grid) -> BTreeSet<Elem> {
        self.cut_arcs.iter().flat_map(|a| a.lines.edges(g)).collect()
    }

    /// Element labels carried over to a refinement of the partition grid.
    pub fn labels_on(&self, g: &Grid) -> Vec<Option<usize>> {
        self.grid.transfer(g, &self.labels, None)
    }
}

pub fn default_rule(h: Homogeneity) -> CutRule {
    match h {
        Homogeneity::HomogElliptic => CutRule::Elliptic,
        _ => CutRule::Hyperbolic,
    }
}

/// Partition with the default rule for the domain's homogeneity class.
pub fn partition(domain: &BilliardDomain) -> Result<Partition> {
    partition_with(domain, default_rule(domain.homogeneity))
}

pub fn partition_with(domain: &BilliardDomain, rule: CutRule) -> Result<Partition> {
    let g = domain.grid().clone();
    let reflex = g.reflex_vertices();
    if !reflex.is_empty() && !domain.homogeneity.is_homogeneous() {
        return domain_err("partition needs a homogeneous domain");
    }
    if !reflex.is_empty() {
        match (rule, domain.homogeneity) {
            (CutRule::Hyperbolic, Homogeneity::HomogElliptic) | (CutRule::Elliptic, Homogeneity::HomogHyperbolic) => {
                return domain_err(format!("{rule:?} cuts do not apply to a {:?} domain", domain.homogeneity));
            }
            _ => {}
        }
    }

    // Cut quadrics: one per distinct parameter.
    let mut cuts: BTreeMap<u64, (f64, CutLines)> = BTreeMap::new();
    for &(i, j) in &reflex {
        match rule {
            CutRule::Hyperbolic => {
                let lam = g.phis[j].lambda;
                let branch = [g.phis[j].phi, g.phis[g.mirror_line(j)].phi];
                let e = cuts.entry(key(lam)).or_insert((lam, CutLines::Phi(vec![])));
                if let CutLines::Phi(v) = &mut e.1 {
                    for p in branch {
                        if !v.iter().any(|&q| (q - p).abs() <= 1e-9) {
                            v.push(p);
                        }
                    }
                    v.sort_by(f64::total_cmp);
                }
            }
            CutRule::Elliptic => {
                let lam = g.us[i].lambda;
                cuts.insert(key(lam), (lam, CutLines::U(g.us[i].u)));
            }
        }
    }
    let cut_lines: Vec<(f64, CutLines)> = cuts.into_values().collect();
    let cut_edges: BTreeSet<Elem> = cut_lines.iter().flat_map(|(_, l)| l.edges(&g)).collect();

    let mask: Vec<bool> = g.inside.clone();
    let comps = cell_components_cut(&g, &mask, &cut_edges);
    let mut labels: Vec<Option<usize>> = vec![None; mask.len()];
    let mut elements = Vec::with_capacity(comps.len());
    for (k, cells) in comps.iter().enumerate() {
        let mut eg = g.clone();
        eg.inside.iter_mut().for_each(|x| *x = false);
        for &c in cells {
            eg.inside[c] = true;
            labels[c] = Some(k);
        }
        let kind = classify_cells(&eg)?;
        let dom = domain_from_cells(&eg)?;
        let area = cells.iter().map(|&c| {
            let (i, j) = g.ij(c);
            g.cell_area(i, j)
        });
        elements.push(PartitionElement { kind, cells: cells.clone(), area: area.sum(), domain: dom });
    }

    let cut_arcs = cut_lines
        .into_iter()
        .map(|(lam, lines)| cut_arc(&g, lam, lines))
        .collect::<Vec<_>>();
    let p = Partition { rule, grid: g, labels, elements, cut_arcs };
    check_partition(domain, &p)?;
    Ok(p)
}

fn key(x: f64) -> u64 {
    // Parameters are compared after rounding to 1e-12.
    ((x * 1e12).round() as i64) as u64
}

fn check_partition(domain: &BilliardDomain, p: &Partition) -> Result<()> {
    let k = domain.complexity;
    if p.N() <= p.n() {
        return integrity(format!("partition has N = {} ≤ n = {}", p.N(), p.n()));
    }
    if k > 0 && p.N() > 2 * k {
        return integrity(format!("partition has N = {} > 2k = {}", p.N(), 2 * k));
    }
    let total: f64 = p.elements.iter().map(|e| e.area).sum();
    let g = &p.grid;
    let exact: f64 = (0..g.rows() * g.cols())
        .filter(|&c| g.inside[c])
        .map(|c| {
            let (i, j) = g.ij(c);
            g.cell_area(i, j)
        })
        .sum();
    if (total - exact).abs() > 1e-8 * exact {
        return integrity("partition elements do not tile the domain");
    }
    Ok(())
}

/// Connected components of the masked cells; adjacency does not cross `cuts`
/// and follows the fold at `u = 0`.
pub fn cell_components_cut(g: &Grid, mask: &[bool], cuts: &BTreeSet<Elem>) -> Vec<Vec<usize>> {
    let n = mask.len();
    let mut uf = UnionFind::<usize>::new(n.max(1));
    for c in 0..n {
        if !mask[c] {
            continue;
        }
        let (i, j) = g.ij(c);
        for side in SIDES {
            let Some((a, b)) = g.neighbor(i, j, side) else { continue };
            let d = g.idx(a, b);
            if !mask[d] {
                continue;
            }
            let (e, _) = cell_side_edge(g, i, j, side);
            if !cuts.contains(&e) {
                uf.union(c, d);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for c in (0..n).filter(|&c| mask[c]) {
        groups.entry(uf.find(c)).or_default().push(c);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

/// Star of vertex `(i, j)`: number of cells and number inside `mask`.
fn star_count(g: &Grid, mask: &[bool], v: (usize, usize)) -> (usize, usize) {
    let star = g.vertex_star(v.0, v.1);
    let n_in = star.iter().filter(|c| mask[g.idx(c.i, c.j)]).count();
    (star.len(), n_in)
}

/// Arc edges of `lines` touching `mask`, with their marks: `true` for "+"
/// (exactly one side in the domain).
pub fn marked_arc_edges(g: &Grid, lines: &CutLines, mask: &[bool]) -> Vec<(Elem, bool)> {
    lines
        .edges(g)
        .into_iter()
        .filter_map(|e| {
            let [a, b] = edge_cells(g, e);
            let ia = a.is_some_and(|(i, j)| mask[g.idx(i, j)]);
            let ib = b.is_some_and(|(i, j)| mask[g.idx(i, j)]);
            (ia || ib).then_some((e, !(ia && ib)))
        })
        .collect()
}

/// Splits arc edges into maximal chains between special vertices. Chains
/// are ordered; a closed chain without special vertices is returned once.
pub fn arc_chains(g: &Grid, edges: &[Elem], special: &dyn Fn((usize, usize)) -> bool) -> Vec<(Vec<Elem>, [(usize, usize); 2])> {
    let mut inc: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let ends: Vec<[(usize, usize); 2]> = edges
        .iter()
        .map(|&e| {
            let [a, b] = edge_ends(g, e);
            [(a.0, a.1), (b.0, b.1)]
        })
        .collect();
    for (k, en) in ends.iter().enumerate() {
        for &v in en {
            inc.entry(v).or_default().push(k);
        }
    }
    let is_stop = |v: (usize, usize)| special(v) || inc.get(&v).map_or(0, |x| x.len()) != 2;
    let mut used = vec![false; edges.len()];
    let mut out = Vec::new();
    let walk = |start_v: (usize, usize), first: usize, used: &mut Vec<bool>| {
        let mut chain = Vec::new();
        let mut v = start_v;
        let mut e = first;
        loop {
            used[e] = true;
            chain.push(edges[e]);
            let w = if ends[e][0] == v { ends[e][1] } else { ends[e][0] };
            v = w;
            if is_stop(v) || v == start_v {
                break;
            }
            match inc[&v].iter().find(|&&x| !used[x]) {
                Some(&x) => e = x,
                None => break,
            }
        }
        (chain, [start_v, v])
    };
    let stops: Vec<(usize, usize)> = inc.keys().copied().filter(|&v| is_stop(v)).collect();
    for v in stops {
        for &e in &inc[&v] {
            if !used[e] {
                out.push(walk(v, e, &mut used));
            }
        }
    }
    for e in 0..edges.len() {
        if !used[e] {
            out.push(walk(ends[e][0], e, &mut used));
        }
    }
    out
}

fn cut_arc(g: &Grid, lambda_i: f64, lines: CutLines) -> CutArc {
    let mask = &g.inside;
    let marked = marked_arc_edges(g, &lines, mask);
    let plus: BTreeMap<Elem, bool> = marked.iter().copied().collect();
    let verts: BTreeSet<(usize, usize)> = marked
        .iter()
        .flat_map(|&(e, _)| edge_ends(g, e).map(|v| (v.0, v.1)))
        .collect();
    let mut singular_points = Vec::new();
    let mut corner_points = Vec::new();
    for &v in &verts {
        match star_count(g, mask, v) {
            (4, 3) => singular_points.push(v),
            (4, 1) => corner_points.push(v),
            _ => {}
        }
    }
    let edges: Vec<Elem> = marked.iter().map(|x| x.0).collect();
    let sp = singular_points.clone();
    let cp = corner_points.clone();
    // Mark changes also split chains.
    let mut mark_change: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &v in &verts {
        let ms: BTreeSet<bool> = marked
            .iter()
            .filter(|(e, _)| edge_ends(g, *e).iter().any(|w| (w.0, w.1) == v))
            .map(|x| x.1)
            .collect();
        if ms.len() > 1 {
            mark_change.insert(v);
        }
    }
    let special = move |v: (usize, usize)| sp.contains(&v) || cp.contains(&v) || mark_change.contains(&v);
    let segments = arc_chains(g, &edges, &special)
        .into_iter()
        .map(|(chain, ends)| ArcSegment { plus: plus[&chain[0]], edges: chain, ends })
        .collect();
    let (nu, xi) = side_components(g, &lines, lambda_i, mask);
    CutArc { lambda_i, lines, segments, singular_points, corner_points, nu, xi }
}

/// Is cell `c` on the larger-parameter side of arc edge `e` with parameter λ?
fn on_inner_side(g: &Grid, e: Elem, c: (usize, usize), lambda_i: f64) -> bool {
    match e {
        Elem::VEdge(..) => g.col_lambdas(c.1).1 > lambda_i + PARAM_TOL,
        Elem::HEdge(0, j) => c.1 == j,
        Elem::HEdge(i, _) => c.0 + 1 == i,
        _ => false,
    }
}

/// Components of the thin strip on each side of the arc: (inner, outer).
fn side_components(g: &Grid, lines: &CutLines, lambda_i: f64, mask: &[bool]) -> (usize, usize) {
    let arc: BTreeSet<Elem> = lines.edges(g).into_iter().collect();
    let mut inner = vec![false; mask.len()];
    let mut outer = vec![false; mask.len()];
    for &e in &arc {
        for c in edge_cells(g, e).into_iter().flatten() {
            let k = g.idx(c.0, c.1);
            if !mask[k] {
                continue;
            }
            if on_inner_side(g, e, c, lambda_i) {
                inner[k] = true;
            } else {
                outer[k] = true;
            }
        }
    }
    (
        cell_components_cut(g, &inner, &arc).len(),
        cell_components_cut(g, &outer, &arc).len(),
    )
}

#[derive(Debug, Clone)]
pub struct Strip {
    pub epsilon: f64,
    pub grid: Grid,
    pub cells: Vec<usize>,
    /// Pieces on the larger-parameter side of the arc.
    pub inside: Vec<Vec<usize>>,
    pub outside: Vec<Vec<usize>>,
}

impl Strip {
    pub fn nu(&self) -> usize {
        self.inside.len()
    }

    pub fn xi(&self) -> usize {
        self.outside.len()
    }
}

/// Extra grid lines at parameter distance `eps` from cut arc `arc`.
pub fn strip_lines(g: &Grid, arc: &CutArc, eps: f64) -> (Vec<ULine>, Vec<PhiLine>) {
    let fam = g.family;
    let l = arc.lambda_i;
    match &arc.lines {
        CutLines::U(_) => {
            let us = [l - eps, l + eps]
                .into_iter()
                .filter(|&x| x < fam.b)
                .map(|x| ULine::from_lambda(&fam, x))
                .collect();
            (us, vec![])
        }
        CutLines::Phi(_) => {
            let ps = [l - eps, l + eps]
                .into_iter()
                .filter(|&x| x > fam.b && x < fam.a)
                .flat_map(|x| PhiLine::all_of(&fam, x))
                .collect();
            (vec![], ps)
        }
    }
}

/// Cells of `g` within parameter distance `eps` of the cut lines, assuming
/// the strip boundaries are grid lines.
pub fn strip_cells(g: &Grid, arc: &CutArc, eps: f64) -> Vec<usize> {
    let l = arc.lambda_i;
    let near = |x: f64| x >= l - eps - PARAM_TOL && x <= l + eps + PARAM_TOL;
    let arc_edges: BTreeSet<Elem> = arc.lines.edges(g).into_iter().collect();
    // Grow from arc-adjacent cells, staying within the parameter band.
    let mut mark = vec![false; g.rows() * g.cols()];
    let mut stack: Vec<usize> = Vec::new();
    for &e in &arc_edges {
        for c in edge_cells(g, e).into_iter().flatten() {
            let k = g.idx(c.0, c.1);
            if g.inside[k] && !mark[k] {
                mark[k] = true;
                stack.push(k);
            }
        }
    }
    let in_band = |c: usize| {
        let (i, j) = g.ij(c);
        match arc.lines {
            CutLines::Phi(_) => {
                let (a, b) = g.col_lambdas(j);
                near(a) && near(b)
            }
            CutLines::U(_) => {
                let (a, b) = g.row_lambdas(i);
                near(a) && near(b)
            }
        }
    };
    stack.retain(|&c| in_band(c));
    mark.iter_mut().for_each(|x| *x = false);
    for &c in &stack {
        mark[c] = true;
    }
    while let Some(c) = stack.pop() {
        let (i, j) = g.ij(c);
        for side in SIDES {
            let Some((a, b)) = g.neighbor(i, j, side) else { continue };
            let d = g.idx(a, b);
            if g.inside[d] && !mark[d] && in_band(d) {
                mark[d] = true;
                stack.push(d);
            }
        }
    }
    (0..mark.len()).filter(|&c| mark[c]).collect()
}

/// Critical parameters of the domain's own lines: every arc parameter and `b`.
fn line_parameters(g: &Grid, elliptic: bool) -> Vec<f64> {
    let mut v: Vec<f64> = if elliptic {
        g.us.iter().filter(|l| l.exact).map(|l| l.lambda).collect()
    } else {
        g.phis.iter().filter(|l| l.exact).map(|l| l.lambda).collect()
    };
    v.push(g.family.b);
    v
}

/// Interfaces between partition elements: per unordered element pair, the
/// singular-point count of each connected shared segment.
fn interfaces(p: &Partition) -> BTreeMap<(usize, usize), Vec<usize>> {
    let g = &p.grid;
    let singular: BTreeSet<(usize, usize)> = p.cut_arcs.iter().flat_map(|a| a.singular_points.iter().copied()).collect();
    let mut edges: Vec<(Elem, (usize, usize))> = Vec::new();
    for e in p.cut_edges(g) {
        let [Some(c0), Some(c1)] = edge_cells(g, e) else { continue };
        let (Some(a), Some(b)) = (p.labels[g.idx(c0.0, c0.1)], p.labels[g.idx(c1.0, c1.1)]) else { continue };
        if a != b {
            edges.push((e, (a.min(b), a.max(b))));
        }
    }
    let mut uf = UnionFind::<usize>::new(edges.len().max(1));
    let mut by_vertex: BTreeMap<((usize, usize), (usize, usize)), usize> = BTreeMap::new();
    for (k, &(e, pair)) in edges.iter().enumerate() {
        for v in edge_ends(g, e) {
            if let Some(&other) = by_vertex.get(&((v.0, v.1), pair)) {
                uf.union(k, other);
            } else {
                by_vertex.insert(((v.0, v.1), pair), k);
            }
        }
    }
    let mut points: BTreeMap<usize, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (k, &(e, _)) in edges.iter().enumerate() {
        let set = points.entry(uf.find(k)).or_default();
        for v in edge_ends(g, e) {
            if singular.contains(&(v.0, v.1)) {
                set.insert((v.0, v.1));
            }
        }
    }
    let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (root, pts) in points {
        out.entry(edges[root].1).or_default().push(pts.len());
    }
    for v in out.values_mut() {
        v.sort_unstable();
    }
    out
}

/// Equivalence of partitioned domains: a bijection of elements preserving the
/// elementary type and, for every shared segment, its singular-point count.
pub fn equivalent(d1: &BilliardDomain, d2: &BilliardDomain, p1: &Partition, p2: &Partition) -> Result<bool> {
    for d in [d1, d2] {
        if d.complexity > 0 && !d.homogeneity.is_homogeneous() {
            return domain_err("equivalence needs homogeneous domains");
        }
    }
    if p1.N() != p2.N() {
        return Ok(false);
    }
    let (f1, f2) = (interfaces(p1), interfaces(p2));
    if f1.len() != f2.len() {
        return Ok(false);
    }
    let mut image = vec![usize::MAX; p1.N()];
    let mut used = vec![false; p2.N()];
    Ok(search(0, p1, p2, &f1, &f2, &mut image, &mut used))
}

fn search(
    k: usize,
    p1: &Partition,
    p2: &Partition,
    f1: &BTreeMap<(usize, usize), Vec<usize>>,
    f2: &BTreeMap<(usize, usize), Vec<usize>>,
    image: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if k == image.len() {
        return f1.iter().all(|(&(a, b), v)| {
            let (x, y) = (image[a], image[b]);
            f2.get(&(x.min(y), x.max(y))) == Some(v)
        });
    }
    for t in 0..used.len() {
        if used[t] || p1.elements[k].kind != p2.elements[t].kind {
            continue;
        }
        image[k] = t;
        used[t] = true;
        if search(k + 1, p1, p2, f1, f2, image, used) {
            return true;
        }
        used[t] = false;
    }
    false
}

/// The strip around cut arc `i` and its pieces on either side.
pub fn arc_neighborhood(domain: &BilliardDomain, p: &Partition, i: usize, epsilon: f64) -> Result<Strip> {
    let _ = domain;
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    if !(epsilon > 0.0) {
        return invalid("epsilon must be positive");
    }
    let l = arc.lambda_i;
    for x in line_parameters(&p.grid, arc.lines.is_elliptic()) {
        if (x - l).abs() > PARAM_TOL && (x - l).abs() <= epsilon {
            return domain_err(format!("strip of width {epsilon} around {l} reaches the quadric {x}"));
        }
    }
    let (us, phis) = strip_lines(&p.grid, arc, epsilon);
    Ok(strip_on(p.grid.refined(&us, &phis, 1), arc, epsilon))
}

/// The strip of width `epsilon` around `arc` on a grid that already carries
/// the strip lines.
pub fn strip_on(g: Grid, arc: &CutArc, epsilon: f64) -> Strip {
    let l = arc.lambda_i;
    let cells = strip_cells(&g, arc, epsilon);
    let arc_edges: BTreeSet<Elem> = arc.lines.edges(&g).into_iter().collect();
    let mut inner = vec![false; g.rows() * g.cols()];
    let mut outer = vec![false; g.rows() * g.cols()];
    for &c in &cells {
        let (ci, cj) = g.ij(c);
        let inside = match arc.lines {
            CutLines::Phi(_) => g.col_lambdas(cj).1 > l + PARAM_TOL,
            CutLines::U(_) => {
                if l == g.family.b {
                    g.col_range(cj).0 < std::f64::consts::PI
                } else {
                    g.row_lambdas(ci).1 > l + PARAM_TOL
                }
            }
        };
        if inside {
            inner[c] = true;
        } else {
            outer[c] = true;
        }
    }
    let inside = cell_components_cut(&g, &inner, &arc_edges);
    let outside = cell_components_cut(&g, &outer, &arc_edges);
    Strip { epsilon, grid: g, cells, inside, outside }
}

#[derive(Debug, Clone)]
pub struct InducedPiece {
    pub element: usize,
    pub cells: Vec<usize>,
    pub kind: Option<ElementaryType>,
}

#[derive(Debug, Clone)]
pub struct RegionComponent {
    pub cells: Vec<usize>,
    /// Singular vertices strictly inside the component (k′).
    pub singular_count: usize,
    pub pieces: Vec<InducedPiece>,
    /// Order of the group generated by the branch flips along the
    /// component's boundary.
    pub flip_order: usize,
}

impl RegionComponent {
    pub fn predicted_genus(&self) -> usize {
        self.singular_count + 1
    }

    /// Number of fiber components over this region component.
    pub fn predicted_fibers(&self) -> usize {
        4 / self.flip_order
    }
}

#[derive(Debug, Clone)]
pub struct MotionRegion {
    pub lambda: f64,
    pub grid: Grid,
    pub components: Vec<RegionComponent>,
}

impl MotionRegion {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Intersection of the domain with the region of possible motion at λ.
pub fn motion_region(domain: &BilliardDomain, lambda: f64, p: &Partition) -> Result<MotionRegion> {
    motion_region_on(domain, lambda, p, 1)
}

pub fn motion_region_on(domain: &BilliardDomain, lambda: f64, p: &Partition, subdiv: usize) -> Result<MotionRegion> {
    let fam = domain.family;
    if lambda > fam.a {
        return invalid(format!("λ = {lambda} exceeds a = {}", fam.a));
    }
    let g = level_grid(&p.grid, &[lambda], subdiv);
    let labels = p.labels_on(&g);
    let n = g.rows() * g.cols();
    let region: Vec<bool> = (0..n)
        .map(|c| {
            let (i, j) = g.ij(c);
            g.inside[c] && cell_in_region(&g, i, j, lambda)
        })
        .collect();
    let comps = cell_components_cut(&g, &region, &BTreeSet::new());
    let reflex = g.reflex_vertices();
    let cut_edges = p.cut_edges(&g);
    let mut components = Vec::with_capacity(comps.len());
    for cells in comps {
        let set: BTreeSet<usize> = cells.iter().copied().collect();
        let singular_count = reflex
            .iter()
            .filter(|&&(i, j)| {
                g.vertex_star(i, j)
                    .iter()
                    .filter(|c| g.is_inside(c.i, c.j))
                    .all(|c| set.contains(&g.idx(c.i, c.j)))
            })
            .count();
        let mut pieces = Vec::new();
        let mut by_elem: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
        for &c in &cells {
            if let Some(e) = labels[c] {
                by_elem.entry(e).or_insert_with(|| vec![false; n])[c] = true;
            }
        }
        for (e, mask) in by_elem {
            for pc in cell_components_cut(&g, &mask, &cut_edges) {
                let mut pg = g.clone();
                pg.inside = vec![false; n];
                for &c in &pc {
                    pg.inside[c] = true;
                }
                let kind = classify_cells(&pg).ok();
                pieces.push(InducedPiece { element: e, cells: pc, kind });
            }
        }
        let flip_order = flip_order(&g, &set, &region);
        components.push(RegionComponent { cells, singular_count, pieces, flip_order });
    }
    Ok(MotionRegion { lambda, grid: g, components })
}

pub(crate) fn flip_order(g: &Grid, set: &BTreeSet<usize>, region: &[bool]) -> usize {
    let mut gens: BTreeSet<u8> = BTreeSet::new();
    for &c in set {
        let (i, j) = g.ij(c);
        for side in SIDES {
            let nb = g.neighbor(i, j, side);
            let inside = nb.is_some_and(|(a, b)| region[g.idx(a, b)]);
            let (e, _) = cell_side_edge(g, i, j, side);
            // The fold only changes the frame; it adds no flip of its own.
            if !inside {
                gens.insert(if matches!(e, Elem::HEdge(..)) { FLIP_U } else { FLIP_PHI });
            }
        }
    }
    let mut group: BTreeSet<u8> = [0u8].into();
    loop {
        let next: BTreeSet<u8> = group.iter().flat_map(|&x| gens.iter().map(move |&y| x ^ y)).chain(group.iter().copied()).collect();
        if next.len() == group.len() {
            break;
        }
        group = next;
    }
    group.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn part(name: &str) -> (BilliardDomain, Partition) {
        let d = catalog::by_name(name).unwrap().build().unwrap();
        let p = partition(&d).unwrap();
        (d, p)
    }

    #[test]
    fn elementary_partition_is_trivial() {
        for c in catalog::elementary() {
            let d = c.build().unwrap();
            let p = partition(&d).unwrap();
            assert_eq!((p.N(), p.n()), (1, 0), "{}", c.name);
            assert_eq!(p.elements[0].kind, c.expected.unwrap());
        }
    }

    #[test]
    fn test_domain_partitions() {
        for (name, nn, n, nu, xi) in [("NC1", 2, 1, 1, 1), ("NC2", 3, 1, 2, 1), ("COMB", 5, 1, 2, 3), ("NC3", 2, 1, 1, 1)] {
            let (_, p) = part(name);
            assert_eq!((p.N(), p.n()), (nn, n), "{name}");
            assert_eq!((p.cut_arcs[0].nu, p.cut_arcs[0].xi), (nu, xi), "{name}");
        }
    }

    #[test]
    fn nc1_cut_arc_marks() {
        let (_, p) = part("NC1");
        let arc = &p.cut_arcs[0];
        assert_eq!(arc.lambda_i, 1.5);
        assert_eq!(arc.singular_points.len(), 1);
        assert_eq!(arc.corner_points.len(), 1);
        let plus: Vec<bool> = arc.segments.iter().map(|s| s.plus).collect();
        assert_eq!(plus.len(), 2);
        assert_eq!(plus.iter().filter(|&&x| x).count(), 1);
    }

    #[test]
    fn strip_matches_cut_arc() {
        for name in ["NC1", "NC2", "COMB"] {
            let (d, p) = part(name);
            let s = arc_neighborhood(&d, &p, 0, 0.05).unwrap();
            assert_eq!((s.nu(), s.xi()), (p.cut_arcs[0].nu, p.cut_arcs[0].xi), "{name}");
        }
        let (d, p) = part("NC1");
        assert!(arc_neighborhood(&d, &p, 0, 0.35).is_err());
    }

    #[test]
    fn motion_region_examples() {
        let (d, p) = part("A2");
        let r = motion_region(&d, 1.0, &p).unwrap();
        assert_eq!(r.components.len(), 1);
        let r = motion_region(&d, 0.5, &p).unwrap();
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].singular_count, 0);
        assert_eq!(r.components[0].predicted_fibers(), 2);
        let (d, p) = part("NC1");
        let below = motion_region(&d, 1.45, &p).unwrap();
        let above = motion_region(&d, 1.55, &p).unwrap();
        assert_eq!(below.components[0].singular_count, 1);
        assert_eq!(above.components[0].singular_count, 0);
    }

    #[test]
    fn equivalence_of_partitions() {
        let build = |cd: crate::catalog::CatalogDomain| {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            (d, p)
        };
        let (a, pa) = build(catalog::nc1());
        let (s, ps) = build(catalog::nc1_shifted());
        let mut m = catalog::nc1();
        m.rects = catalog::mirror_rects(&m.rects);
        let (mi, pm) = build(m);
        assert!(equivalent(&a, &a, &pa, &pa).unwrap());
        assert!(equivalent(&a, &mi, &pa, &pm).unwrap());
        // Same pieces, but two singular points on the shared arc instead of one.
        assert!(!equivalent(&a, &s, &pa, &ps).unwrap());
        let (n2, p2) = build(catalog::nc2());
        assert!(!equivalent(&a, &n2, &pa, &p2).unwrap());
        let (c, pc) = build(catalog::comb());
        assert!(equivalent(&c, &c, &pc, &pc).unwrap());
    }
}
