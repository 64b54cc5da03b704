//! Graphs over cut arcs: the preimage of a cut arc on one level of the
//! caustic integral.
//!
//! Branch conventions along an arc: the *along* sign is the direction of motion
//! along the arc, the *across* sign the direction of crossing it. For a
//! hyperbolic arc, along is the sign of `u̇` (↑: towards larger ellipses) and
//! across is R when `λ_h` decreases. For an elliptic arc, along is ↑ when `λ_h`
//! increases and across is R when `u̇ > 0`.
//!
//! | segment | edges | lifts                       |
//! |---------|-------|-----------------------------|
//! | `+`     | ↑, ↓  | R and L identified          |
//! | `−`     | 1..4  | 1 = ↑R, 2 = ↓R, 3 = ↑L, 4 = ↓L |
//!
//! A black point is one vertex; a white point is two (`w^r`, `w^l`), glued
//! along the arc direction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::decomposition::{arc_chains, strip_lines, CutArc, CutLines, Partition};
use crate::diagram::bifurcation_diagram;
use crate::domain::BilliardDomain;
use crate::dynamics::BranchSigns;
use crate::error::{integrity, invalid, Result};
use crate::fiber::{branch_signs, cell_in_region, cell_side_edge, edge_cells, edge_ends, is_level_b, level_grid, Elem, LevelComplex, Node, FLIP_PHI, FLIP_U, NEGATE};
use crate::geometry::Vec2;
use crate::grid::Grid;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Label {
    Up,
    Down,
    One,
    Two,
    Three,
    Four,
}

impl Label {
    fn from_signs(plus: bool, up: bool, right: bool) -> Self {
        match (plus, up, right) {
            (true, true, _) => Label::Up,
            (true, false, _) => Label::Down,
            (false, true, true) => Label::One,
            (false, false, true) => Label::Two,
            (false, true, false) => Label::Three,
            (false, false, false) => Label::Four,
        }
    }

    /// Side of the arc whose cylinders carry this label (`None` for ↑, ↓).
    pub fn right(&self) -> Option<bool> {
        match self {
            Label::One | Label::Two => Some(true),
            Label::Three | Label::Four => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::Up => "↑",
            Label::Down => "↓",
            Label::One => "1",
            Label::Two => "2",
            Label::Three => "3",
            Label::Four => "4",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Black { puncture: bool },
    White,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrPoint {
    pub kind: PointKind,
    /// Crossing of the focal line marked only in the graph at `λ = b`.
    pub focal: bool,
    #[serde(skip)]
    pub position: Option<(usize, usize)>,
    #[serde(skip)]
    pub xy: Option<Vec2>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrSegment {
    pub plus: bool,
    pub ends: [usize; 2],
    #[serde(skip)]
    pub grid_edges: Vec<Elem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Black { puncture: bool },
    WhiteRight,
    WhiteLeft,
    /// `w^r = w^l`: a white point that only ends `+` segments.
    WhiteMerged,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrVertex {
    pub point: usize,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrEdge {
    pub segment: usize,
    pub label: Label,
    pub ends: [usize; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberGraph {
    pub arc: usize,
    pub lambda_i: f64,
    pub alpha: f64,
    pub elliptic: bool,
    pub points: Vec<GrPoint>,
    pub segments: Vec<GrSegment>,
    pub vertices: Vec<GrVertex>,
    pub edges: Vec<GrEdge>,
    #[serde(skip)]
    pub(crate) node_edge: HashMap<(Elem, u8), usize>,
    #[serde(skip)]
    pub(crate) node_vertex: HashMap<((usize, usize), u8), usize>,
}

impl FiberGraph {
    pub fn empty(arc: usize, lambda_i: f64, alpha: f64, elliptic: bool) -> Self {
        Self {
            arc,
            lambda_i,
            alpha,
            elliptic,
            points: vec![],
            segments: vec![],
            vertices: vec![],
            edges: vec![],
            node_edge: HashMap::new(),
            node_vertex: HashMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.vertices.is_empty()
    }

    pub fn chi(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64
    }

    pub fn black_count(&self) -> usize {
        self.points.iter().filter(|p| matches!(p.kind, PointKind::Black { .. })).count()
    }

    pub fn white_count(&self) -> usize {
        self.points.iter().filter(|p| p.kind == PointKind::White).count()
    }

    /// `|B| + 2|W|`, the vertex count before `w^r` and `w^l` are merged at
    /// white points that only end `+` segments.
    pub fn literal_vertex_count(&self) -> usize {
        self.black_count() + 2 * self.white_count()
    }

    pub fn punctures(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Black { puncture: true }).count()
    }

    pub fn plus_segments(&self) -> usize {
        self.segments.iter().filter(|s| s.plus).count()
    }

    pub fn minus_segments(&self) -> usize {
        self.segments.len() - self.plus_segments()
    }

    /// Connected components as lists of edge indices (isolated vertices give
    /// empty lists).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut uf = UnionFind::<usize>::new(n.max(1));
        for e in &self.edges {
            uf.union(e.ends[0], e.ends[1]);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = (0..n).map(|v| (uf.find(v), vec![])).collect();
        for (k, e) in self.edges.iter().enumerate() {
            groups.get_mut(&uf.find(e.ends[0])).unwrap().push(k);
        }
        groups.into_values().collect()
    }

    /// Gr edge carrying the lift `(grid edge, branch)`.
    pub fn edge_of(&self, e: Elem, b: u8) -> Option<usize> {
        self.node_edge.get(&(e, b)).copied()
    }

    /// Name of edge `k`, e.g. `λ^↑_{1,2}`.
    pub fn edge_name(&self, k: usize) -> String {
        let e = &self.edges[k];
        format!("λ^{}_{{{},{}}}", e.label, self.arc + 1, e.segment + 1)
    }

    /// `2·|+ segments| + 4·|− segments| = |edges|`, `|B| + 2|W| = |vertices|`
    /// when no white point ends a `+` segment.
    pub fn bookkeeping(&self) -> (bool, bool) {
        let edges_ok = 2 * self.plus_segments() + 4 * self.minus_segments() == self.edges.len();
        let merged = self.vertices.iter().filter(|v| v.kind == VertexKind::WhiteMerged).count();
        let verts_ok = self.black_count() + 2 * self.white_count() == self.vertices.len() + merged;
        (edges_ok, verts_ok)
    }

    /// The graph built from point and segment marks alone: `points[t]` and
    /// `points[t + 1]` bound segment `t`, marked `plus[t]`.
    pub fn from_marks(points: &[PointKind], plus: &[bool]) -> Self {
        assert_eq!(points.len(), plus.len() + 1, "one mark per segment");
        let mut g = FiberGraph::empty(0, f64::NAN, f64::NAN, false);
        let mut at: Vec<Vec<usize>> = Vec::new();
        for (k, &kind) in points.iter().enumerate() {
            g.points.push(GrPoint { kind, focal: false, position: None, xy: None });
            let mut ids = Vec::new();
            match kind {
                PointKind::Black { puncture } => {
                    ids.push(g.vertices.len());
                    g.vertices.push(GrVertex { point: k, kind: VertexKind::Black { puncture } });
                }
                PointKind::White => {
                    for kind in [VertexKind::WhiteRight, VertexKind::WhiteLeft] {
                        ids.push(g.vertices.len());
                        g.vertices.push(GrVertex { point: k, kind });
                    }
                }
            }
            at.push(ids);
        }
        let end = |p: usize, right: bool| -> usize {
            let ids = &at[p];
            if ids.len() == 1 || right {
                ids[0]
            } else {
                ids[1]
            }
        };
        for (t, &pl) in plus.iter().enumerate() {
            g.segments.push(GrSegment { plus: pl, ends: [t, t + 1], grid_edges: vec![] });
            let lifts: &[(bool, bool)] =
                if pl { &[(true, true), (false, false)] } else { &[(true, true), (false, true), (true, false), (false, false)] };
            for &(up, right) in lifts {
                let label = Label::from_signs(pl, up, right);
                g.edges.push(GrEdge { segment: t, label, ends: [end(t, right), end(t + 1, right)] });
            }
        }
        g
    }
}

/// Does the closed motion region at level α contain edge `e`?
pub fn edge_in_region(g: &Grid, e: Elem, alpha: f64) -> bool {
    let fam = g.family;
    if is_level_b(&fam, alpha) {
        return true;
    }
    match e {
        Elem::HEdge(i, j) | Elem::VEdge(i, j) if alpha < fam.b => {
            let _ = j;
            g.us[i].lambda <= alpha + TOL
        }
        Elem::VEdge(_, j) => g.phis[j].lambda >= alpha - TOL,
        Elem::HEdge(_, j) => g.col_lambdas(j).0 >= alpha - TOL,
        _ => false,
    }
}

/// Inside cells around a vertex, out of four (missing cells count as outside).
fn inside_around(g: &Grid, v: (usize, usize)) -> usize {
    g.vertex_star(v.0, v.1).iter().filter(|c| g.is_inside(c.i, c.j)).count()
}

fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// (along is ↑, across is R) for the lift with branch `b` in the frame of an
/// element lying on line `j` (hyperbolic) or in column `j` (elliptic).
fn lift_signs(g: &Grid, elliptic: bool, j: usize, s: BranchSigns) -> (bool, bool) {
    if elliptic {
        let (p0, p1) = g.col_range(j);
        let s2 = sign((p0 + p1).sin());
        ((s.1 * s2) > 0, s.0 > 0)
    } else {
        let s2 = sign((2.0 * g.phis[j].phi).sin());
        (s.0 > 0, (s.1 * s2) < 0)
    }
}

/// Branch flips realised at vertex `v` on level α: one per edge at `v` that
/// separates a cell of the region from a cell outside it or outside the domain.
fn reflection_flips(g: &Grid, v: (usize, usize), alpha: f64) -> BTreeSet<u8> {
    use crate::grid::Side;
    let live = |c: Option<(usize, usize)>| c.is_some_and(|(i, j)| g.is_inside(i, j) && cell_in_region(g, i, j, alpha));
    let mut out = BTreeSet::new();
    for c in g.vertex_star(v.0, v.1) {
        for side in [Side::Low, Side::High, Side::Start, Side::End] {
            let (e, _) = cell_side_edge(g, c.i, c.j, side);
            if !edge_ends(g, e).iter().any(|w| (w.0, w.1) == v) {
                continue;
            }
            let [x, y] = edge_cells(g, e);
            if live(x) != live(y) {
                out.insert(if matches!(e, Elem::HEdge(..)) { FLIP_U } else { FLIP_PHI });
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    E(Elem, u8),
    V((usize, usize), u8),
}

struct Nodes {
    idx: HashMap<Key, usize>,
    keys: Vec<Key>,
    pairs: Vec<(usize, usize)>,
}

impl Nodes {
    fn id(&mut self, k: Key) -> usize {
        if let Some(&i) = self.idx.get(&k) {
            return i;
        }
        self.keys.push(k);
        self.idx.insert(k, self.keys.len() - 1);
        self.keys.len() - 1
    }

    fn join(&mut self, a: Key, b: Key) {
        let (x, y) = (self.id(a), self.id(b));
        self.pairs.push((x, y));
    }
}

/// Builds the graph of cut arc `arc` at level α on grid `g` (domain cells
/// marked inside). `focal_white` adds white points where the arc crosses the
/// focal line; `caustic` builds the true preimage when the arc is itself the
/// caustic: R and L are identified on every segment and edges whose domain
/// cells all left the region are dropped.
pub fn build_gr_on(g: &Grid, arc: &CutArc, arc_index: usize, alpha: f64, focal_white: bool, caustic: bool) -> FiberGraph {
    let elliptic = arc.lines.is_elliptic();
    let (across, along) = if elliptic { (FLIP_U, FLIP_PHI) } else { (FLIP_PHI, FLIP_U) };
    let mut out = FiberGraph::empty(arc_index, arc.lambda_i, alpha, elliptic);

    let touches =
        |e: Elem| edge_cells(g, e).iter().flatten().any(|&(i, j)| g.is_inside(i, j) && (!caustic || cell_in_region(g, i, j, alpha)));
    let play: Vec<Elem> = arc.lines.edges(g).into_iter().filter(|&e| touches(e) && edge_in_region(g, e, alpha)).collect();
    if play.is_empty() {
        return out;
    }
    let plus_of: HashMap<Elem, bool> = play
        .iter()
        .map(|&e| (e, !edge_cells(g, e).iter().all(|c| c.is_some_and(|(i, j)| g.is_inside(i, j)))))
        .collect();

    let mut degree: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &e in &play {
        for v in edge_ends(g, e) {
            *degree.entry((v.0, v.1)).or_default() += 1;
        }
    }
    let focal = |v: (usize, usize)| {
        if elliptic {
            v.0 > 0 && is_level_b(&g.family, g.phis[v.1].lambda)
        } else {
            v.0 == 0
        }
    };
    let mut kinds: BTreeMap<(usize, usize), (PointKind, bool)> = BTreeMap::new();
    for (&v, &d) in &degree {
        let n_in = inside_around(g, v);
        if n_in == 1 || n_in == 3 {
            kinds.insert(v, (PointKind::Black { puncture: n_in == 3 }, false));
        } else if d == 1 {
            kinds.insert(v, (PointKind::White, false));
        } else if focal_white && focal(v) {
            kinds.insert(v, (PointKind::White, true));
        }
    }
    let special_set: BTreeSet<(usize, usize)> = kinds.keys().copied().collect();
    let mut chains = arc_chains(g, &play, &|v| special_set.contains(&v));
    // A closed chain without marked points gets one white point.
    let mut extra = Vec::new();
    for (_, ends) in &chains {
        if !kinds.contains_key(&ends[0]) {
            extra.push(ends[0]);
        }
    }
    if !extra.is_empty() {
        for v in extra {
            kinds.insert(v, (PointKind::White, false));
        }
        let special_set: BTreeSet<(usize, usize)> = kinds.keys().copied().collect();
        chains = arc_chains(g, &play, &|v| special_set.contains(&v));
    }

    let point_index: BTreeMap<(usize, usize), usize> = kinds.keys().enumerate().map(|(k, &v)| (v, k)).collect();
    for (&v, &(kind, is_focal)) in &kinds {
        out.points.push(GrPoint { kind, focal: is_focal, position: Some(v), xy: Some(g.vertex_point(v.0, v.1)) });
    }
    let mut chain_of: HashMap<Elem, usize> = HashMap::new();
    for (t, (edges, ends)) in chains.iter().enumerate() {
        for &e in edges {
            chain_of.insert(e, t);
        }
        out.segments.push(GrSegment {
            plus: plus_of[&edges[0]],
            ends: [point_index[&ends[0]], point_index[&ends[1]]],
            grid_edges: edges.clone(),
        });
    }

    // Identifications on lifts.
    let mut nodes = Nodes { idx: HashMap::new(), keys: Vec::new(), pairs: Vec::new() };
    let mut incid: Vec<(usize, (usize, usize), usize, Elem)> = Vec::new();
    for &e in &play {
        let ends = edge_ends(g, e);
        let glue_across = plus_of[&e] || caustic;
        for b in 0..4u8 {
            let en = nodes.id(Key::E(e, b));
            for &(vi, vj, neg) in &ends {
                let v = (vi, vj);
                let vb = if neg { b ^ NEGATE } else { b };
                if kinds.contains_key(&v) {
                    let vn = nodes.id(Key::V(v, vb));
                    incid.push((en, v, vn, e));
                    if glue_across {
                        nodes.join(Key::V(v, vb), Key::V(v, vb ^ across));
                    }
                } else {
                    nodes.join(Key::E(e, b), Key::V(v, vb));
                }
            }
            if glue_across {
                nodes.join(Key::E(e, b), Key::E(e, b ^ across));
            }
        }
    }
    for (&v, &(kind, _)) in &kinds {
        for x in 0..4u8 {
            match kind {
                PointKind::Black { .. } if caustic => {
                    for f in reflection_flips(g, v, alpha) {
                        nodes.join(Key::V(v, x), Key::V(v, x ^ f));
                    }
                }
                PointKind::Black { .. } => nodes.join(Key::V(v, x), Key::V(v, 0)),
                PointKind::White => nodes.join(Key::V(v, x), Key::V(v, x ^ along)),
            }
        }
    }
    let mut uf = UnionFind::<usize>::new(nodes.keys.len());
    for &(a, b) in &nodes.pairs {
        uf.union(a, b);
    }

    // Vertices.
    let mut vclass: BTreeMap<usize, usize> = BTreeMap::new();
    for (&v, &(kind, _)) in &kinds {
        let mut roots: Vec<(usize, u8)> = (0..4u8).map(|x| (uf.find(nodes.idx[&Key::V(v, x)]), x)).collect();
        roots.sort();
        roots.dedup_by_key(|r| r.0);
        let n_roots = roots.len();
        for (r, x) in roots {
            let vk = match kind {
                PointKind::Black { puncture } => VertexKind::Black { puncture },
                PointKind::White if n_roots == 1 => VertexKind::WhiteMerged,
                PointKind::White => {
                    let (_, right) = lift_signs(g, elliptic, v.1, branch_signs(x));
                    if right {
                        VertexKind::WhiteRight
                    } else {
                        VertexKind::WhiteLeft
                    }
                }
            };
            vclass.insert(r, out.vertices.len());
            out.vertices.push(GrVertex { point: point_index[&v], kind: vk });
        }
        for x in 0..4u8 {
            let r = uf.find(nodes.idx[&Key::V(v, x)]);
            out.node_vertex.insert((v, x), vclass[&r]);
        }
    }

    // Edges, labelled from the first grid edge of their segment.
    let mut eclass: BTreeMap<usize, usize> = BTreeMap::new();
    for (t, seg) in out.segments.iter().enumerate() {
        let first = seg.grid_edges[0];
        let j = match first {
            Elem::VEdge(_, j) | Elem::HEdge(_, j) => j,
            _ => unreachable!(),
        };
        for b in 0..4u8 {
            let r = uf.find(nodes.idx[&Key::E(first, b)]);
            if eclass.contains_key(&r) {
                continue;
            }
            let (up, right) = lift_signs(g, elliptic, j, branch_signs(b));
            let label = Label::from_signs(seg.plus || caustic, up, right);
            eclass.insert(r, out.edges.len());
            out.edges.push(GrEdge { segment: t, label, ends: [usize::MAX; 2] });
        }
    }
    for &e in &play {
        for b in 0..4u8 {
            let r = uf.find(nodes.idx[&Key::E(e, b)]);
            out.node_edge.insert((e, b), eclass[&r]);
        }
    }
    let mut ends_of: BTreeMap<usize, BTreeSet<(usize, usize, usize)>> = BTreeMap::new();
    for &(en, v, vn, ge) in &incid {
        let k = eclass[&uf.find(en)];
        ends_of.entry(k).or_default().insert((chain_of[&ge], point_index[&v], vclass[&uf.find(vn)]));
    }
    for (k, m) in ends_of {
        let vs: Vec<usize> = m.into_iter().map(|x| x.2).collect();
        out.edges[k].ends = [vs[0], *vs.last().unwrap()];
    }
    out
}

/// Checks the graph against the arc subcomplex of a level complex on the
/// same grid: lifts of each grid edge fall into the same classes, and marked
/// vertices correspond one to one.
pub fn check_against_level(gr: &FiberGraph, lc: &LevelComplex) -> Result<()> {
    let mut lc_to_gr: HashMap<usize, usize> = HashMap::new();
    let mut per_edge: BTreeMap<Elem, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for (&(e, b), &k) in &gr.node_edge {
        let Some(c) = lc.class_of(&Node { elem: e, sheet: 0, branch: b }) else {
            return integrity(format!("lift ({e:?}, {b}) missing from the level complex"));
        };
        if *lc_to_gr.entry(c).or_insert(k) != k {
            return integrity(format!("level-complex edge class of ({e:?}, {b}) spans two graph edges"));
        }
        let entry = per_edge.entry(e).or_default();
        entry.0.insert(c);
        entry.1.insert(k);
    }
    for (e, (lcs, grs)) in &per_edge {
        if lcs.len() != grs.len() {
            return integrity(format!("{e:?}: {} lifts in the level complex, {} in the graph", lcs.len(), grs.len()));
        }
    }
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut back: HashMap<usize, usize> = HashMap::new();
    for (&(v, x), &k) in &gr.node_vertex {
        let Some(c) = lc.class_of(&Node { elem: Elem::Vertex(v.0, v.1), sheet: 0, branch: x }) else {
            return integrity(format!("vertex lift ({v:?}, {x}) missing from the level complex"));
        };
        if *fwd.entry(k).or_insert(c) != c || *back.entry(c).or_insert(k) != k {
            return integrity(format!("vertex classes at {v:?} differ"));
        }
    }
    Ok(())
}

/// Is the cut arc a hyperbola crossing the focal segment, or an ellipse
/// crossing the focal rays?
pub fn crosses_focal_line(g: &Grid, arc: &CutArc) -> bool {
    match &arc.lines {
        CutLines::Phi(_) => arc.lines.edges(g).iter().any(|&e| {
            edge_ends(g, e).iter().any(|v| v.0 == 0) && edge_cells(g, e).iter().flatten().any(|&(i, j)| g.is_inside(i, j))
        }),
        CutLines::U(_) => arc.lines.edges(g).iter().any(|&e| {
            edge_ends(g, e).iter().any(|v| is_level_b(&g.family, g.phis[v.1].lambda))
                && edge_cells(g, e).iter().flatten().any(|&(i, j)| g.is_inside(i, j))
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcSide {
    /// The arc lies inside the motion region.
    Below,
    /// The arc is the caustic.
    At,
    /// The arc has left the motion region.
    Above,
}

/// Level used for `side` of arc `arc`: `λᵢ ∓ ε` with the sign chosen so that
/// `Below` keeps the arc in the region.
pub fn side_level(arc: &CutArc, side: ArcSide, epsilon: f64) -> f64 {
    let s = if arc.lines.is_elliptic() { -1.0 } else { 1.0 };
    match side {
        ArcSide::Below => arc.lambda_i - s * epsilon,
        ArcSide::At => arc.lambda_i,
        ArcSide::Above => arc.lambda_i + s * epsilon / 2.0,
    }
}

/// Grid carrying the domain lines, the strip lines of `arc` and the caustic at α.
pub fn arc_level_grid(p: &Partition, arc: &CutArc, epsilon: f64, alpha: f64, subdiv: usize) -> Grid {
    let (us, phis) = strip_lines(&p.grid, arc, epsilon);
    level_grid(&p.grid.refined(&us, &phis, 1), &[alpha], subdiv)
}

/// The graph of cut arc `i` on one side of its level, with ε taken from the
/// bifurcation diagram.
pub fn build_gr(domain: &BilliardDomain, p: &Partition, i: usize, side: ArcSide, subdiv: usize) -> Result<FiberGraph> {
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    let eps = bifurcation_diagram(domain).epsilon();
    let alpha = side_level(arc, side, eps);
    let g = arc_level_grid(p, arc, eps, alpha, subdiv);
    Ok(build_gr_on(&g, arc, i, alpha, false, false))
}

/// Preimage of cut arc `i` on its own level, where the arc is the caustic.
pub fn caustic_graph(domain: &BilliardDomain, p: &Partition, i: usize, subdiv: usize) -> Result<FiberGraph> {
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    let eps = bifurcation_diagram(domain).epsilon();
    let g = arc_level_grid(p, arc, eps, arc.lambda_i, subdiv);
    Ok(build_gr_on(&g, arc, i, arc.lambda_i, false, true))
}

/// Graphs of cut arc `i` on the levels `b − ε`, `b` (focal crossings marked
/// white) and `b + ε`.
pub fn saddle_graphs(domain: &BilliardDomain, p: &Partition, i: usize, subdiv: usize) -> Result<[FiberGraph; 3]> {
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    let b = domain.family.b;
    let eps = bifurcation_diagram(domain).epsilon();
    let at = |alpha: f64, focal: bool| {
        let g = level_grid(&p.grid, &[alpha], subdiv);
        build_gr_on(&g, arc, i, alpha, focal, false)
    };
    Ok([at(b - eps, false), at(b, true), at(b + eps, false)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::decomposition::partition;
    use crate::fiber::LevelOptions;

    #[test]
    fn literal_counts() {
        let w = PointKind::White;
        let b = PointKind::Black { puncture: false };
        let g = FiberGraph::from_marks(&[w, b, w], &[true, true]);
        assert_eq!((g.vertices.len(), g.edges.len()), (5, 4));
        let g = FiberGraph::from_marks(&[w, b, w], &[false, false]);
        assert_eq!((g.vertices.len(), g.edges.len()), (5, 8));
        assert_eq!(g.bookkeeping(), (true, true));
        let labels: BTreeSet<Label> = g.edges.iter().filter(|e| e.segment == 0).map(|e| e.label).collect();
        assert_eq!(labels.len(), 4);
    }

    fn nc1() -> (BilliardDomain, Partition) {
        let d = catalog::nc1().build().unwrap();
        let p = partition(&d).unwrap();
        (d, p)
    }

    #[test]
    fn nc1_graph() {
        let (d, p) = nc1();
        assert_eq!(p.cut_arcs.len(), 1);
        let gr = build_gr(&d, &p, 0, ArcSide::Below, 1).unwrap();
        assert_eq!(gr.punctures(), 1);
        assert_eq!(gr.black_count(), 2);
        assert_eq!(gr.bookkeeping(), (true, true));
        assert_eq!((gr.vertices.len(), gr.edges.len()), (4, 6));
        assert_eq!(gr.components().len(), 1);
    }

    #[test]
    fn graph_matches_level_complex() {
        let (d, p) = nc1();
        let arc = &p.cut_arcs[0];
        let eps = bifurcation_diagram(&d).epsilon();
        for side in [ArcSide::Below, ArcSide::At] {
            let alpha = side_level(arc, side, eps);
            let g = arc_level_grid(&p, arc, eps, alpha, 1);
            let gr = build_gr_on(&g, arc, 0, alpha, false, side == ArcSide::At);
            let lc = LevelComplex::build(&g, alpha, &LevelOptions::standard());
            check_against_level(&gr, &lc).unwrap();
        }
        let quotient = caustic_graph(&d, &p, 0, 1).unwrap();
        assert_eq!((quotient.vertices.len(), quotient.edges.len()), (2, 2));
        assert_eq!(quotient.edges.iter().map(|e| e.label).collect::<BTreeSet<_>>(), BTreeSet::from([Label::Up, Label::Down]));
        assert!(build_gr(&d, &p, 0, ArcSide::Above, 1).unwrap().is_empty());
    }

    #[test]
    fn graph_is_level_independent_below() {
        let (_, p) = nc1();
        let arc = &p.cut_arcs[0];
        let shape = |gr: &FiberGraph| {
            let mut l: Vec<Label> = gr.edges.iter().map(|e| e.label).collect();
            l.sort();
            (gr.vertices.len(), gr.points.len(), gr.segments.len(), l, gr.punctures())
        };
        let base = shape(&build_gr_on(&arc_level_grid(&p, arc, 0.05, 1.45, 1), arc, 0, 1.45, false, false));
        for alpha in [1.46, 1.48, 1.499, 1.5] {
            let g = arc_level_grid(&p, arc, 0.05, alpha, 1);
            assert_eq!(shape(&build_gr_on(&g, arc, 0, alpha, false, false)), base, "α = {alpha}");
        }
    }

    #[test]
    fn elementary_has_no_graphs() {
        let d = catalog::elementary()[0].build().unwrap();
        let p = partition(&d).unwrap();
        assert!(p.cut_arcs.is_empty());
        assert!(saddle_graphs(&d, &p, 0, 1).is_err());
    }

    #[test]
    fn catalog_graphs_match_level_complex() {
        for cd in catalog::test_domains() {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            let eps = bifurcation_diagram(&d).epsilon();
            for (i, arc) in p.cut_arcs.iter().enumerate() {
                for (side, caustic) in [(ArcSide::Below, false), (ArcSide::At, true)] {
                    let alpha = side_level(arc, side, eps);
                    let g = arc_level_grid(&p, arc, eps, alpha, 1);
                    let gr = build_gr_on(&g, arc, i, alpha, false, caustic);
                    let lc = LevelComplex::build(&g, alpha, &LevelOptions::standard());
                    check_against_level(&gr, &lc).unwrap_or_else(|e| panic!("{} arc {i} {side:?}: {e}", cd.name));
                    if !caustic {
                        assert_eq!(gr.bookkeeping(), (true, true), "{} arc {i}", cd.name);
                    }
                }
                let [lo, at, hi] = saddle_graphs(&d, &p, i, 1).unwrap();
                let b = d.family.b;
                for (gr, alpha) in [(&lo, b - eps), (&hi, b + eps)] {
                    let g = level_grid(&p.grid, &[alpha], 1);
                    let lc = LevelComplex::build(&g, alpha, &LevelOptions::standard());
                    check_against_level(gr, &lc).unwrap_or_else(|e| panic!("{} arc {i} α={alpha}: {e}", cd.name));
                }
                let crossings = at.points.iter().filter(|q| q.focal).count();
                assert_eq!(at.literal_vertex_count(), hi.literal_vertex_count() + 2 * crossings, "{} arc {i}", cd.name);
                assert_eq!(at.segments.len(), hi.segments.len() + crossings, "{} arc {i}", cd.name);
                let g = level_grid(&p.grid, &[b], 1);
                let lc = LevelComplex::build(&g, b, &LevelOptions::standard());
                check_against_level(&at, &lc).unwrap_or_else(|e| panic!("{} arc {i} at b: {e}", cd.name));
                if cd.name == "NC1-sym" {
                    assert_eq!(crossings, 1);
                    assert_eq!((hi.vertices.len(), hi.edges.len(), at.vertices.len(), at.edges.len()), (6, 10, 7, 12));
                }
            }
        }
    }
}
