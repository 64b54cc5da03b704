//! Cellular model of a level set `{Λ = λ}` of the billiard.
//!
//! Each grid cell of the motion region carries four copies, one per velocity
//! branch `(sign u̇, sign φ̇)`. Copies are glued along cell edges and vertices
//! according to:
//!
//! * the fold at `u = 0` (branch negated),
//! * the reflection law on walls (hyperbola walls flip `sφ`, ellipse walls `su`),
//! * caustic tangency (the momentum that vanishes flips its sign),
//! * at `λ = b`, the focal segment (`su`) and the focal rays (`sφ`).
//!
//! At `λ = b` a focus interior to the region is blown up into a circle of
//! directions with four marked points `±e₁, ±e₂`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use petgraph::unionfind::UnionFind;

use crate::dynamics::{branch_velocity, BranchSigns};
use crate::geometry::ConfocalFamily;
use crate::grid::{Grid, PhiLine, ULine};

pub const FLIP_U: u8 = 2;
pub const FLIP_PHI: u8 = 1;
pub const NEGATE: u8 = 3;
const LEVEL_TOL: f64 = 1e-12;

/// Branch index: bit 1 set when `u̇ < 0`, bit 0 set when `φ̇ < 0`.
pub fn branch_index(s: BranchSigns) -> u8 {
    (if s.0 < 0 { 2 } else { 0 }) | (if s.1 < 0 { 1 } else { 0 })
}

pub fn branch_signs(b: u8) -> BranchSigns {
    (if b & 2 == 0 { 1 } else { -1 }, if b & 1 == 0 { 1 } else { -1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Face(usize, usize),
    /// Edge on u-line `i` spanning column `j`; on `u = 0` always the upper lip.
    HEdge(usize, usize),
    /// Edge on φ-line `j` spanning row `i`.
    VEdge(usize, usize),
    /// Canonical grid vertex.
    Vertex(usize, usize),
    /// Blown-up focus `f` (0: `φ = 0`, 1: `φ = π`), direction `k·π/2`.
    FocusPoint(u8, u8),
    /// Arc of the blown-up focus from direction `k` to `k + 1`.
    FocusArc(u8, u8),
}

impl Elem {
    pub fn dim(&self) -> usize {
        match self {
            Elem::Face(..) => 2,
            Elem::HEdge(..) | Elem::VEdge(..) | Elem::FocusArc(..) => 1,
            Elem::Vertex(..) | Elem::FocusPoint(..) => 0,
        }
    }
}

/// A copy of a grid element: `sheet` separates the two sides of an edge where
/// the reflection law was removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub elem: Elem,
    pub sheet: u8,
    pub branch: u8,
}

#[derive(Debug, Clone, Default)]
pub struct LevelOptions {
    /// Cells to keep (row-major); `None` keeps all domain cells.
    pub select: Option<Vec<bool>>,
    /// Canonical edges on which the reflection law (or the caustic
    /// identification) is removed.
    pub open_edges: HashSet<Elem>,
    /// Blow up foci interior to the region at `λ = b`.
    pub blow_up_foci: bool,
}

impl LevelOptions {
    pub fn standard() -> Self {
        Self { blow_up_foci: true, ..Default::default() }
    }
}

pub fn is_level_b(family: &ConfocalFamily, lambda: f64) -> bool {
    (lambda - family.b).abs() <= LEVEL_TOL
}

/// Is the whole cell `(i, j)` inside the region of possible motion on level λ?
/// The caustic must be a grid line.
pub fn cell_in_region(g: &Grid, i: usize, j: usize, lambda: f64) -> bool {
    let b = g.family.b;
    if is_level_b(&g.family, lambda) {
        true
    } else if lambda < b {
        g.us[i].lambda <= lambda + LEVEL_TOL
    } else {
        g.col_lambdas(j).0 >= lambda - LEVEL_TOL
    }
}

/// Refines `base` so that the caustics of every λ listed are grid lines.
pub fn level_grid(base: &Grid, lambdas: &[f64], subdiv: usize) -> Grid {
    let fam = base.family;
    let mut us: Vec<ULine> = Vec::new();
    let mut phis: Vec<PhiLine> = Vec::new();
    for &l in lambdas {
        if l < fam.b - LEVEL_TOL {
            us.push(ULine::from_lambda(&fam, l));
        } else if l > fam.b + LEVEL_TOL && l < fam.a {
            phis.extend(PhiLine::all_of(&fam, l));
        }
    }
    base.refined(&us, &phis, subdiv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SideState {
    Selected,
    Open,
    Caustic,
    Wall,
}

#[derive(Debug, Clone, Copy)]
struct FaceSide {
    elem: Elem,
    negated: bool,
    orient: i8,
    sheet_side: u8,
    neighbor: Option<(usize, usize)>,
}

/// Topological summary of one connected component of a level complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentInfo {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    pub boundary_circles: usize,
    pub nonmanifold_edges: usize,
    pub orientable: bool,
    pub punctures: usize,
}

impl ComponentInfo {
    /// Genus of a compact orientable surface with this χ and boundary.
    pub fn genus(&self) -> Option<usize> {
        if !self.orientable || self.nonmanifold_edges > 0 {
            return None;
        }
        let twice = 2 - self.chi - self.boundary_circles as i64;
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as usize)
    }
}

#[derive(Debug, Clone)]
pub struct LevelComplex {
    pub lambda: f64,
    pub grid: Grid,
    index: HashMap<Node, usize>,
    class_of: Vec<usize>,
    class_reps: Vec<Node>,
    class_dim: Vec<usize>,
    face_edges: BTreeMap<usize, Vec<(usize, i8)>>,
    face_extra: BTreeMap<usize, BTreeSet<usize>>,
    edge_verts: BTreeMap<usize, BTreeSet<usize>>,
    comp_of_class: Vec<usize>,
    pub components: Vec<ComponentInfo>,
    pub critical_circles: usize,
}

impl LevelComplex {
    /// Builds the complex on `grid`, whose `inside` flags describe the domain.
    pub fn build(grid: &Grid, lambda: f64, opts: &LevelOptions) -> LevelComplex {
        Builder::new(grid, lambda, opts).run()
    }

    pub fn class_count(&self, dim: usize) -> usize {
        self.class_dim.iter().filter(|&&d| d == dim).count()
    }

    pub fn chi(&self) -> i64 {
        self.class_count(0) as i64 - self.class_count(1) as i64 + self.class_count(2) as i64
    }

    pub fn is_empty(&self) -> bool {
        self.class_reps.is_empty()
    }

    pub fn class_of(&self, n: &Node) -> Option<usize> {
        self.index.get(n).map(|&k| self.class_of[k])
    }

    pub fn class_rep(&self, class: usize) -> Node {
        self.class_reps[class]
    }

    pub fn class_dim(&self, class: usize) -> usize {
        self.class_dim[class]
    }

    pub fn num_classes(&self) -> usize {
        self.class_reps.len()
    }

    /// All nodes (element copies) present in the complex.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.index.keys()
    }

    pub fn component_of_class(&self, class: usize) -> usize {
        self.comp_of_class[class]
    }

    /// Component containing the face copy of cell `(i, j)` with branch `b`.
    pub fn face_component(&self, i: usize, j: usize, b: u8) -> Option<usize> {
        self.class_of(&Node { elem: Elem::Face(i, j), sheet: 0, branch: b })
            .map(|c| self.comp_of_class[c])
    }

    /// Edge classes on the boundary of a face class, with orientation signs.
    pub fn face_boundary(&self, face: usize) -> &[(usize, i8)] {
        self.face_edges.get(&face).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Vertex classes of an edge class.
    pub fn edge_vertices(&self, edge: usize) -> Vec<usize> {
        self.edge_verts.get(&edge).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Extra cells (blow-up arcs and points) in the closure of a face class.
    pub fn face_extras(&self, face: usize) -> Vec<usize> {
        self.face_extra.get(&face).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Number of faces incident to each edge class.
    pub fn edge_face_counts(&self) -> HashMap<usize, usize> {
        let mut m: HashMap<usize, usize> = HashMap::new();
        for (&f, es) in &self.face_edges {
            let mut seen = BTreeSet::new();
            for &(e, _) in es {
                if seen.insert(e) {
                    *m.entry(e).or_default() += 1;
                }
            }
            for &x in self.face_extra.get(&f).into_iter().flatten() {
                if self.class_dim[x] == 1 {
                    *m.entry(x).or_default() += 1;
                }
            }
        }
        m
    }

    pub fn surface(&self) -> FiberSurface {
        FiberSurface {
            components: self
                .components
                .iter()
                .map(|c| SurfaceComponent {
                    genus: c.genus(),
                    chi: c.chi,
                    boundary_circles: c.boundary_circles,
                    punctures: c.punctures,
                    orientable: c.orientable,
                })
                .collect(),
            critical_circles: self.critical_circles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceComponent {
    pub genus: Option<usize>,
    pub chi: i64,
    pub boundary_circles: usize,
    pub punctures: usize,
    pub orientable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberSurface {
    pub components: Vec<SurfaceComponent>,
    pub critical_circles: usize,
}

impl FiberSurface {
    pub fn chi(&self) -> i64 {
        self.components.iter().map(|c| c.chi).sum()
    }

    /// Genera sorted ascending; `None` if some component is not a surface.
    pub fn genera(&self) -> Option<Vec<usize>> {
        let mut g: Vec<usize> = self.components.iter().map(|c| c.genus).collect::<Option<_>>()?;
        g.sort_unstable();
        Some(g)
    }
}

struct Builder<'a> {
    g: &'a Grid,
    lambda: f64,
    at_b: bool,
    opts: &'a LevelOptions,
    region: Vec<bool>,
    sel: Vec<bool>,
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    idents: Vec<(usize, usize)>,
    face_edges: Vec<(usize, Vec<(usize, i8)>)>,
    face_extra: Vec<(usize, usize)>,
    edge_verts: Vec<(usize, usize)>,
    blown: Vec<(u8, usize)>,
}

impl<'a> Builder<'a> {
    fn new(g: &'a Grid, lambda: f64, opts: &'a LevelOptions) -> Self {
        let n = g.rows() * g.cols();
        let region: Vec<bool> = (0..n)
            .map(|c| {
                let (i, j) = g.ij(c);
                g.inside[c] && cell_in_region(g, i, j, lambda)
            })
            .collect();
        let sel: Vec<bool> = (0..n)
            .map(|c| region[c] && opts.select.as_ref().map_or(true, |s| s[c]))
            .collect();
        let (f0, fpi) = g.focal_cols();
        Self {
            g,
            lambda,
            at_b: is_level_b(&g.family, lambda),
            opts,
            region,
            sel,
            nodes: Vec::new(),
            index: HashMap::new(),
            idents: Vec::new(),
            face_edges: Vec::new(),
            face_extra: Vec::new(),
            edge_verts: Vec::new(),
            blown: vec![(0, f0), (1, fpi)],
        }
    }

    fn node(&mut self, n: Node) -> usize {
        if let Some(&k) = self.index.get(&n) {
            return k;
        }
        let k = self.nodes.len();
        self.nodes.push(n);
        self.index.insert(n, k);
        k
    }

    fn state(&self, cell: Option<(usize, usize)>) -> SideState {
        let Some((i, j)) = cell else { return SideState::Wall };
        let c = self.g.idx(i, j);
        if !self.g.inside[c] {
            SideState::Wall
        } else if !self.region[c] {
            SideState::Caustic
        } else if !self.sel[c] {
            SideState::Open
        } else {
            SideState::Selected
        }
    }

    fn is_lower(&self, j: usize) -> bool {
        self.g.col_range(j).0 >= PI - 1e-12
    }

    fn sides(&self, i: usize, j: usize) -> [FaceSide; 4] {
        let g = self.g;
        let low = if i == 0 {
            let m = g.mirror_col(j);
            if self.is_lower(j) {
                FaceSide { elem: Elem::HEdge(0, m), negated: true, orient: 1, sheet_side: 1, neighbor: Some((0, m)) }
            } else {
                FaceSide { elem: Elem::HEdge(0, j), negated: false, orient: -1, sheet_side: 0, neighbor: Some((0, m)) }
            }
        } else {
            FaceSide { elem: Elem::HEdge(i, j), negated: false, orient: -1, sheet_side: 0, neighbor: Some((i - 1, j)) }
        };
        let high = FaceSide {
            elem: Elem::HEdge(i + 1, j),
            negated: false,
            orient: 1,
            sheet_side: 1,
            neighbor: (i + 1 < g.rows()).then_some((i + 1, j)),
        };
        let start = FaceSide {
            elem: Elem::VEdge(i, j),
            negated: false,
            orient: 1,
            sheet_side: 0,
            neighbor: Some((i, g.prev_col(j))),
        };
        let end = FaceSide {
            elem: Elem::VEdge(i, g.next_col(j)),
            negated: false,
            orient: -1,
            sheet_side: 1,
            neighbor: Some((i, g.next_col(j))),
        };
        [start, high, end, low]
    }

    fn endpoints(&self, e: Elem) -> [(usize, usize, bool); 2] {
        edge_ends(self.g, e)
    }

    fn focus_of(&self, v: (usize, usize)) -> Option<u8> {
        if v.0 != 0 {
            return None;
        }
        self.blown.iter().find(|&&(_, j)| j == v.1).map(|&(f, _)| f)
    }

    fn run(mut self) -> LevelComplex {
        let g = self.g;
        let cells: Vec<(usize, usize)> =
            (0..g.rows() * g.cols()).filter(|&c| self.sel[c]).map(|c| g.ij(c)).collect();

        // Edge registry: canonical edge -> incident selected sides.
        let mut edge_sides: BTreeMap<Elem, Vec<FaceSide>> = BTreeMap::new();
        for &(i, j) in &cells {
            for s in self.sides(i, j) {
                edge_sides.entry(s.elem).or_default().push(s);
            }
        }
        let two_sheet: HashSet<Elem> = edge_sides
            .iter()
            .filter(|(e, v)| v.len() == 2 && self.opts.open_edges.contains(e))
            .map(|(e, _)| *e)
            .collect();
        let sheet_of = |s: &FaceSide| if two_sheet.contains(&s.elem) { s.sheet_side } else { 0 };

        // Interior foci at λ = b.
        let mut interior_foci: Vec<(u8, usize)> = Vec::new();
        if self.at_b && self.opts.blow_up_foci {
            for &(f, jf) in &self.blown.clone() {
                let star = g.vertex_star(0, jf);
                let all_sel = star.iter().all(|c| self.sel[g.idx(c.i, c.j)]);
                let touching: Vec<Elem> = edge_sides
                    .keys()
                    .filter(|e| self.endpoints(**e).iter().any(|&(a, b, _)| (a, b) == (0, jf)))
                    .copied()
                    .collect();
                let clean = touching
                    .iter()
                    .all(|e| edge_sides[e].len() == 2 && !self.opts.open_edges.contains(e));
                if all_sel && clean {
                    interior_foci.push((f, jf));
                }
            }
        }
        self.blown = interior_foci;

        // Vertex sheets around vertices touching two-sheet edges.
        let mut vsheet: HashMap<((usize, usize), Elem, u8), u8> = HashMap::new();
        if !two_sheet.is_empty() {
            let mut fans: BTreeMap<(usize, usize), Vec<((Elem, u8), (Elem, u8))>> = BTreeMap::new();
            for &(i, j) in &cells {
                let sd = self.sides(i, j);
                // Corners: (start, low), (low, end), (end, high), (high, start).
                let corners = [
                    ((i, j), 0usize, 3usize),
                    ((i, g.next_col(j)), 3, 2),
                    ((i + 1, g.next_col(j)), 2, 1),
                    ((i + 1, j), 1, 0),
                ];
                for (v, a, b) in corners {
                    let (ci, cj, _) = g.canonical_vertex(v.0, v.1);
                    fans.entry((ci, cj))
                        .or_default()
                        .push(((sd[a].elem, sheet_of(&sd[a])), (sd[b].elem, sheet_of(&sd[b]))));
                }
            }
            for (v, pairs) in fans {
                let touches = pairs.iter().any(|(a, b)| two_sheet.contains(&a.0) || two_sheet.contains(&b.0));
                if !touches {
                    continue;
                }
                let mut keys: Vec<(Elem, u8)> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
                keys.sort();
                keys.dedup();
                let mut uf = UnionFind::<usize>::new(keys.len());
                let pos = |k: &(Elem, u8)| keys.binary_search(k).unwrap();
                for (a, b) in &pairs {
                    uf.union(pos(a), pos(b));
                }
                let mut ids: BTreeMap<usize, u8> = BTreeMap::new();
                for (n, k) in keys.iter().enumerate() {
                    let r = uf.find(n);
                    let next = ids.len() as u8;
                    let id = *ids.entry(r).or_insert(next);
                    vsheet.insert((v, k.0, k.1), id);
                }
            }
        }

        // Faces and their edges.
        for &(i, j) in &cells {
            let sd = self.sides(i, j);
            for b in 0..4u8 {
                let f = self.node(Node { elem: Elem::Face(i, j), sheet: 0, branch: b });
                let mut bd = Vec::with_capacity(4);
                for s in &sd {
                    let eb = if s.negated { b ^ NEGATE } else { b };
                    let e = self.node(Node { elem: s.elem, sheet: sheet_of(s), branch: eb });
                    bd.push((e, s.orient));
                }
                self.face_edges.push((f, bd));
            }
        }

        // Edge flips and edge endpoints.
        let fam = g.family;
        for (&e, sides) in &edge_sides {
            let flip_kind = match e {
                Elem::HEdge(..) => FLIP_U,
                _ => FLIP_PHI,
            };
            let mut flips: Vec<u8> = Vec::new();
            if sides.len() == 1 {
                match self.state(sides[0].neighbor) {
                    SideState::Wall if !self.opts.open_edges.contains(&e) => flips.push(flip_kind),
                    SideState::Caustic if !self.opts.open_edges.contains(&e) => flips.push(flip_kind),
                    _ => {}
                }
            }
            if self.at_b {
                match e {
                    Elem::HEdge(0, _) => flips.push(FLIP_U),
                    Elem::VEdge(_, j) if (g.phis[j].lambda - fam.b).abs() <= LEVEL_TOL => flips.push(FLIP_PHI),
                    _ => {}
                }
            }
            let sheets: BTreeSet<u8> = sides.iter().map(&sheet_of).collect();
            let ends = self.endpoints(e);
            for &sh in &sheets {
                let mut ends_of = [[0usize; 2]; 4];
                for b in 0..4u8 {
                    let en = self.node(Node { elem: e, sheet: sh, branch: b });
                    for (k, &(vi, vj, neg)) in ends.iter().enumerate() {
                        let vn = if let Some(f) = self.focus_of((vi, vj)) {
                            let d = self.edge_direction(e, b);
                            self.node(Node { elem: Elem::FocusPoint(f, d), sheet: 0, branch: 0 })
                        } else {
                            let vs = vsheet.get(&((vi, vj), e, sh)).copied().unwrap_or(0);
                            let vb = if neg { b ^ NEGATE } else { b };
                            self.node(Node { elem: Elem::Vertex(vi, vj), sheet: vs, branch: vb })
                        };
                        self.edge_verts.push((en, vn));
                        ends_of[b as usize][k] = vn;
                    }
                }
                for b in 0..4u8 {
                    let en = self.index[&Node { elem: e, sheet: sh, branch: b }];
                    for &fl in &flips {
                        let other = self.index[&Node { elem: e, sheet: sh, branch: b ^ fl }];
                        self.idents.push((en, other));
                        for k in 0..2 {
                            self.idents.push((ends_of[b as usize][k], ends_of[(b ^ fl) as usize][k]));
                        }
                    }
                }
            }
        }

        // Faces at blown-up foci.
        for (f, jf) in self.blown.clone() {
            for c in g.vertex_star(0, jf) {
                for b in 0..4u8 {
                    let fnode = self.index[&Node { elem: Elem::Face(c.i, c.j), sheet: 0, branch: b }];
                    let (dirs, arcs) = self.face_sweep(c.j, jf, b);
                    for d in dirs {
                        let x = self.node(Node { elem: Elem::FocusPoint(f, d), sheet: 0, branch: 0 });
                        self.face_extra.push((fnode, x));
                    }
                    for k in arcs {
                        let x = self.node(Node { elem: Elem::FocusArc(f, k), sheet: 0, branch: 0 });
                        self.face_extra.push((fnode, x));
                        for d in [k, (k + 1) % 4] {
                            let y = self.node(Node { elem: Elem::FocusPoint(f, d), sheet: 0, branch: 0 });
                            self.edge_verts.push((x, y));
                        }
                    }
                }
            }
        }

        self.finish()
    }

    /// Direction index (`k·π/2`) of the limit velocity where an edge meets a
    /// blown-up focus.
    fn edge_direction(&self, e: Elem, b: u8) -> u8 {
        let g = self.g;
        let fam = g.family;
        let h = 1e-7;
        let (u, phi) = match e {
            Elem::HEdge(0, j) => {
                let (p0, p1) = g.col_range(j);
                let phi_f = if self.is_focus_line(j) { p0 } else { p1 };
                let phi = if phi_f == p0 { p0 + h } else { p1 - h };
                (0.0, phi)
            }
            Elem::VEdge(0, j) => (h, g.phis[j].phi),
            _ => unreachable!(),
        };
        let v = branch_velocity(&fam, u, phi, self.lambda, branch_signs(b)).unwrap_or_default();
        quadrant(v.y.atan2(v.x))
    }

    fn is_focus_line(&self, j: usize) -> bool {
        g_is_focus_line(self.g, j)
    }

    /// Directions swept by the face copy `(cell in column j, branch b)` around
    /// the focus on line `jf`: marked points and arcs covered.
    fn face_sweep(&self, j: usize, jf: usize, b: u8) -> (Vec<u8>, Vec<u8>) {
        let g = self.g;
        let fam = g.family;
        let phi_f = g.phis[jf].phi;
        let (p0, _) = g.col_range(j);
        let (lo, hi) = if (p0 - phi_f).abs() < 1e-12 { (0.0, FRAC_PI_2) } else { (-FRAC_PI_2, 0.0) };
        let rho = 1e-6;
        let n = 64;
        let mut angles: Vec<f64> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let psi = lo + (hi - lo) * (0.002 + 0.996 * k as f64 / n as f64);
            let u = rho * psi.cos();
            let phi = phi_f + rho * psi.sin();
            let Some(v) = branch_velocity(&fam, u.max(0.0), phi, self.lambda, branch_signs(b)) else { continue };
            let mut a = v.y.atan2(v.x);
            if let Some(&prev) = angles.last() {
                while a - prev > PI {
                    a -= TAU;
                }
                while a - prev < -PI {
                    a += TAU;
                }
            }
            angles.push(a);
        }
        let (a0, a1) = (angles[0], *angles.last().unwrap());
        if (a1 - a0).abs() < 0.05 {
            return (vec![quadrant(a0)], vec![]);
        }
        let (mn, mx) = (a0.min(a1), a0.max(a1));
        let tol = 1e-2;
        let n0 = ((mn - tol) / FRAC_PI_2).ceil() as i64;
        let n1 = ((mx + tol) / FRAC_PI_2).floor() as i64;
        let dirs: Vec<u8> = (n0..=n1).map(|m| m.rem_euclid(4) as u8).collect();
        let arcs: Vec<u8> = (n0..n1).map(|m| m.rem_euclid(4) as u8).collect();
        (dirs, arcs)
    }

    fn finish(self) -> LevelComplex {
        let n = self.nodes.len();
        let mut uf = UnionFind::<usize>::new(n.max(1));
        for &(a, b) in &self.idents {
            uf.union(a, b);
        }
        let mut class_id: HashMap<usize, usize> = HashMap::new();
        let mut class_of = vec![0usize; n];
        let mut class_reps: Vec<Node> = Vec::new();
        let mut class_dim: Vec<usize> = Vec::new();
        // Deterministic numbering: iterate nodes in sorted order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| self.nodes[k]);
        for &k in &order {
            let r = uf.find(k);
            let next = class_reps.len();
            let id = *class_id.entry(r).or_insert_with(|| {
                class_reps.push(self.nodes[r]);
                class_dim.push(self.nodes[r].elem.dim());
                next
            });
            class_of[k] = id;
        }
        let nc = class_reps.len();

        let mut face_edges: BTreeMap<usize, Vec<(usize, i8)>> = BTreeMap::new();
        for (f, bd) in &self.face_edges {
            face_edges.insert(class_of[*f], bd.iter().map(|&(e, o)| (class_of[e], o)).collect());
        }
        let mut face_extra: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(f, x) in &self.face_extra {
            face_extra.entry(class_of[f]).or_default().insert(class_of[x]);
        }
        let mut edge_verts: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(e, v) in &self.edge_verts {
            edge_verts.entry(class_of[e]).or_default().insert(class_of[v]);
        }

        // Connectivity.
        let mut cu = UnionFind::<usize>::new(nc.max(1));
        for (&f, bd) in &face_edges {
            for &(e, _) in bd {
                cu.union(f, e);
            }
        }
        for (&f, xs) in &face_extra {
            for &x in xs {
                cu.union(f, x);
            }
        }
        for (&e, vs) in &edge_verts {
            for &v in vs {
                cu.union(e, v);
            }
        }
        let mut comp_id: BTreeMap<usize, usize> = BTreeMap::new();
        let mut comp_of_class = vec![0usize; nc];
        for c in 0..nc {
            let r = cu.find(c);
            let next = comp_id.len();
            comp_of_class[c] = *comp_id.entry(r).or_insert(next);
        }
        let ncomp = comp_id.len();

        let mut lc = LevelComplex {
            lambda: self.lambda,
            grid: self.g.clone(),
            index: self.index,
            class_of,
            class_reps,
            class_dim,
            face_edges,
            face_extra,
            edge_verts,
            comp_of_class,
            components: Vec::new(),
            critical_circles: 0,
        };
        lc.components = summarize(&lc, ncomp);
        lc.critical_circles = critical_circles(&lc);
        lc
    }
}

/// Endpoints of a canonical edge as canonical vertices with frame flags.
pub fn edge_ends(g: &Grid, e: Elem) -> [(usize, usize, bool); 2] {
    match e {
        Elem::HEdge(i, j) => [g.canonical_vertex(i, j), g.canonical_vertex(i, g.next_col(j))],
        Elem::VEdge(i, j) => [g.canonical_vertex(i, j), g.canonical_vertex(i + 1, j)],
        _ => panic!("not a grid edge: {e:?}"),
    }
}

/// The two cells on either side of a canonical edge (`None` past the last row).
pub fn edge_cells(g: &Grid, e: Elem) -> [Option<(usize, usize)>; 2] {
    match e {
        Elem::HEdge(0, j) => [Some((0, j)), Some((0, g.mirror_col(j)))],
        Elem::HEdge(i, j) => [Some((i - 1, j)), (i < g.rows()).then_some((i, j))],
        Elem::VEdge(i, j) => [Some((i, g.prev_col(j))), Some((i, j))],
        _ => panic!("not a grid edge: {e:?}"),
    }
}

/// Canonical form of the edge on side `side` of cell `(i, j)`, and whether the
/// canonical frame negates the branch.
pub fn cell_side_edge(g: &Grid, i: usize, j: usize, side: crate::grid::Side) -> (Elem, bool) {
    use crate::grid::Side;
    match side {
        Side::Start => (Elem::VEdge(i, j), false),
        Side::End => (Elem::VEdge(i, g.next_col(j)), false),
        Side::High => (Elem::HEdge(i + 1, j), false),
        Side::Low if i > 0 => (Elem::HEdge(i, j), false),
        Side::Low if g.col_range(j).0 >= PI - 1e-12 => (Elem::HEdge(0, g.mirror_col(j)), true),
        Side::Low => (Elem::HEdge(0, j), false),
    }
}

fn g_is_focus_line(g: &Grid, j: usize) -> bool {
    let (f0, fpi) = g.focal_cols();
    j == f0 || j == fpi
}

fn quadrant(angle: f64) -> u8 {
    ((angle / FRAC_PI_2).round() as i64).rem_euclid(4) as u8
}

fn summarize(lc: &LevelComplex, ncomp: usize) -> Vec<ComponentInfo> {
    let nc = lc.num_classes();
    let mut comps: Vec<ComponentInfo> = (0..ncomp)
        .map(|_| ComponentInfo {
            vertices: 0,
            edges: 0,
            faces: 0,
            chi: 0,
            boundary_circles: 0,
            nonmanifold_edges: 0,
            orientable: true,
            punctures: 0,
        })
        .collect();
    for c in 0..nc {
        let k = lc.comp_of_class[c];
        match lc.class_dim[c] {
            0 => comps[k].vertices += 1,
            1 => comps[k].edges += 1,
            _ => comps[k].faces += 1,
        }
    }
    for c in &mut comps {
        c.chi = c.vertices as i64 - c.edges as i64 + c.faces as i64;
    }

    let counts = lc.edge_face_counts();
    // Boundary circles: components of the graph of one-face edges.
    let mut bu = UnionFind::<usize>::new(nc.max(1));
    let mut bverts: BTreeSet<usize> = BTreeSet::new();
    for (&e, &n) in &counts {
        if n == 1 {
            let vs = lc.edge_vertices(e);
            for &v in &vs {
                bu.union(e, v);
                bverts.insert(v);
            }
            bverts.insert(e);
        }
        if n > 2 {
            comps[lc.comp_of_class[e]].nonmanifold_edges += 1;
        }
    }
    let roots: BTreeSet<usize> = bverts.iter().map(|&x| bu.find(x)).collect();
    for r in roots {
        comps[lc.comp_of_class[r]].boundary_circles += 1;
    }

    // Orientability via consistent face signs across two-face edges.
    let mut by_edge: HashMap<usize, Vec<(usize, i8)>> = HashMap::new();
    for (&f, bd) in &lc.face_edges {
        for &(e, o) in bd {
            by_edge.entry(e).or_default().push((f, o));
        }
    }
    let mut sign: HashMap<usize, i8> = HashMap::new();
    for &f0 in lc.face_edges.keys() {
        if sign.contains_key(&f0) {
            continue;
        }
        sign.insert(f0, 1);
        let mut stack = vec![f0];
        while let Some(f) = stack.pop() {
            let sf = sign[&f];
            for &(e, o) in &lc.face_edges[&f] {
                let inc = &by_edge[&e];
                if inc.len() != 2 {
                    continue;
                }
                for &(h, p) in inc {
                    if h == f && inc.iter().filter(|x| x.0 == f).count() == 1 {
                        continue;
                    }
                    let want = -sf * o * p;
                    if h == f {
                        // A face glued to itself along e.
                        if o == p {
                            comps[lc.comp_of_class[f]].orientable = false;
                        }
                        continue;
                    }
                    match sign.get(&h) {
                        Some(&s) if s != want => comps[lc.comp_of_class[f]].orientable = false,
                        Some(_) => {}
                        None => {
                            sign.insert(h, want);
                            stack.push(h);
                        }
                    }
                }
            }
        }
    }

    // Punctures: reflex corners of the domain lying in the region.
    let g = &lc.grid;
    for (i, j) in g.reflex_vertices() {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for sh in 0..4u8 {
            for b in 0..4u8 {
                if let Some(c) = lc.class_of(&Node { elem: Elem::Vertex(i, j), sheet: sh, branch: b }) {
                    seen.insert(lc.comp_of_class[c]);
                }
            }
        }
        for k in seen {
            comps[k].punctures += 1;
        }
    }
    comps
}

/// Components of the non-manifold locus (edges with more than two faces).
fn critical_circles(lc: &LevelComplex) -> usize {
    let counts = lc.edge_face_counts();
    let nm: Vec<usize> = counts.iter().filter(|(_, &n)| n > 2).map(|(&e, _)| e).collect();
    if nm.is_empty() {
        return 0;
    }
    let mut uf = UnionFind::<usize>::new(lc.num_classes());
    for &e in &nm {
        for v in lc.edge_vertices(e) {
            uf.union(e, v);
        }
    }
    nm.iter().map(|&e| uf.find(e)).collect::<BTreeSet<_>>().len()
}

/// Level complex of `domain` at λ on a grid refined by `subdiv` and the caustic.
pub fn level_complex(
    domain: &crate::domain::BilliardDomain,
    lambda: f64,
    subdiv: usize,
    opts: &LevelOptions,
) -> LevelComplex {
    let g = level_grid(domain.grid(), &[lambda], subdiv);
    LevelComplex::build(&g, lambda, opts)
}

/// Topology of the fiber `{Λ = λ}` of the whole domain.
pub fn fiber_surface(domain: &crate::domain::BilliardDomain, lambda: f64, subdiv: usize) -> FiberSurface {
    level_complex(domain, lambda, subdiv, &LevelOptions::standard()).surface()
}
