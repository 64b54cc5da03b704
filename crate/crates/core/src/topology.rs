//! Regular fibers: the genus prediction from the motion region, checked
//! against the glued level complex.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decomposition::{cell_components_cut, flip_order, motion_region_on, MotionRegion, Partition};
use crate::diagram::bifurcation_diagram;
use crate::domain::BilliardDomain;
use crate::dynamics::{branch_of, sample_fiber_point, trajectory};
use crate::error::{domain_err, integrity, invalid, Result};
use crate::fiber::{
    branch_index, cell_in_region, edge_cells, level_complex, edge_ends, is_level_b, level_grid, Elem, FiberSurface, LevelComplex, LevelOptions,
    SurfaceComponent,
};
use crate::geometry::Vec2;
use crate::grid::Grid;

/// Default subdivision of the coarse grid for oracle complexes.
pub const DEFAULT_SUBDIV: usize = 2;
const CRIT_TOL: f64 = 1e-9;

/// Euler characteristic of a fiber (sum over components).
pub fn euler_characteristic(s: &FiberSurface) -> i64 {
    s.chi()
}

/// Genus of a compact orientable surface component.
pub fn genus_of(c: &SurfaceComponent) -> Result<usize> {
    if !c.orientable {
        return integrity("non-orientable gluing");
    }
    match c.genus {
        Some(g) => Ok(g),
        None => integrity(format!("component with χ = {} is not a surface", c.chi)),
    }
}

fn closed(genus: usize, punctures: usize, copies: usize) -> impl Iterator<Item = SurfaceComponent> {
    (0..copies).map(move |_| SurfaceComponent {
        genus: Some(genus),
        chi: 2 - 2 * genus as i64,
        boundary_circles: 0,
        punctures,
        orientable: true,
    })
}

/// The fiber predicted from the motion region: per region component, closed
/// surfaces of genus `k′ + 1` with `k′` punctures.
pub fn predicted_fiber(region: &MotionRegion) -> FiberSurface {
    let components = region
        .components
        .iter()
        .flat_map(|c| closed(c.predicted_genus(), c.singular_count, c.predicted_fibers()))
        .collect();
    FiberSurface { components, critical_circles: 0 }
}

fn signature(s: &FiberSurface) -> Vec<(Option<usize>, usize, i64, usize)> {
    let mut v: Vec<_> = s.components.iter().map(|c| (c.genus, c.punctures, c.chi, c.boundary_circles)).collect();
    v.sort();
    v
}

#[derive(Debug, Clone)]
pub struct RegularFiber {
    pub lambda: f64,
    pub region: MotionRegion,
    pub predicted: FiberSurface,
    pub oracle: FiberSurface,
}

fn check_regular(domain: &BilliardDomain, lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return invalid("λ must be finite");
    }
    let d = bifurcation_diagram(domain);
    if let Some(c) = d.critical_values.iter().find(|c| (c.lambda - lambda).abs() < CRIT_TOL) {
        return domain_err(format!("λ = {lambda} is a critical value ({})", c.kind.as_str()));
    }
    Ok(())
}

/// Regular fiber at λ with both the prediction and the oracle.
pub fn regular_fiber_on(domain: &BilliardDomain, p: &Partition, lambda: f64, subdiv: usize) -> Result<RegularFiber> {
    check_regular(domain, lambda)?;
    let empty = FiberSurface { components: vec![], critical_circles: 0 };
    if lambda > domain.family.a {
        let g = p.grid.clone();
        let region = MotionRegion { lambda, grid: g, components: vec![] };
        return Ok(RegularFiber { lambda, region, predicted: empty.clone(), oracle: empty });
    }
    let region = motion_region_on(domain, lambda, p, subdiv)?;
    let predicted = predicted_fiber(&region);
    let oracle = LevelComplex::build(&region.grid, lambda, &LevelOptions::standard()).surface();
    if signature(&predicted) != signature(&oracle) {
        return integrity(format!(
            "λ = {lambda}: prediction {:?} disagrees with glued complex {:?}",
            signature(&predicted),
            signature(&oracle)
        ));
    }
    Ok(RegularFiber { lambda, region, predicted, oracle })
}

/// Fiber component of the phase point `(x, v)`: the grid cell of `x` and the
/// signs of the unfolded velocity pick a face of the level complex.
pub fn component_at(lc: &LevelComplex, x: Vec2, v: Vec2) -> Option<usize> {
    let g = &lc.grid;
    let w = g.family.to_unfolded(x);
    let i = g.locate_row(w.u)?;
    let j = g.locate_col(w.phi);
    let (du, dphi) = branch_of(w.u, w.phi, v);
    if du == 0.0 || dphi == 0.0 {
        return None;
    }
    let b = branch_index((if du > 0.0 { 1 } else { -1 }, if dphi > 0.0 { 1 } else { -1 }));
    lc.face_component(i, j, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub samples: usize,
    /// Trajectory segments whose midpoint was located.
    pub segments: usize,
    /// Segments located in a component other than the starting one.
    pub crossings: usize,
    /// Sample points or midpoints that fell on a cell boundary.
    pub unlocated: usize,
}

/// Follows `samples` random trajectories of `steps` reflections on the regular
/// level λ and checks that each stays in the fiber component it starts in.
pub fn monte_carlo_connectivity(
    domain: &BilliardDomain,
    lambda: f64,
    samples: usize,
    steps: usize,
    seed: u64,
) -> Result<ConnectivityReport> {
    check_regular(domain, lambda)?;
    let lc = level_complex(domain, lambda, DEFAULT_SUBDIV, &LevelOptions::standard());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ConnectivityReport { samples: 0, segments: 0, crossings: 0, unlocated: 0 };
    for _ in 0..samples {
        let Some(p0) = sample_fiber_point(domain, lambda, &mut rng) else {
            return domain_err(format!("no phase point found on level {lambda}"));
        };
        rep.samples += 1;
        let Some(start) = component_at(&lc, p0.x, p0.v) else {
            rep.unlocated += 1;
            continue;
        };
        for seg in trajectory(&p0, domain, steps)?.steps {
            let mid = Vec2::new(0.5 * (seg.start.x + seg.end.x), 0.5 * (seg.start.y + seg.end.y));
            match component_at(&lc, mid, seg.velocity) {
                Some(c) => {
                    rep.segments += 1;
                    if c != start {
                        rep.crossings += 1;
                    }
                }
                None => rep.unlocated += 1,
            }
        }
    }
    Ok(rep)
}

/// Regular fiber at λ; fails if λ is critical or the two computations differ.
pub fn regular_fiber(domain: &BilliardDomain, p: &Partition, lambda: f64) -> Result<FiberSurface> {
    regular_fiber_on(domain, p, lambda, DEFAULT_SUBDIV).map(|r| r.predicted)
}

/// One component of the motion region of the cut domain, with its cut data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutComponent {
    /// Singular vertices inside (g).
    pub singular_count: usize,
    /// Components of the cut hyperbola inside the region (ν).
    pub cut_arcs: usize,
    /// Fiber components over this region component when the billiard law holds on θ.
    pub closed_fibers: usize,
    pub predicted_chi: i64,
    pub predicted_boundary: usize,
    pub oracle_chi: i64,
    pub oracle_boundary: usize,
}

impl CutComponent {
    /// Genus before cutting (`g + 1`).
    pub fn genus(&self) -> usize {
        self.singular_count + 1
    }

    pub fn agrees(&self) -> bool {
        self.predicted_chi == self.oracle_chi && self.predicted_boundary == self.oracle_boundary
    }
}

#[derive(Debug, Clone)]
pub struct CutFiber {
    pub theta: f64,
    pub lambda: f64,
    pub components: Vec<CutComponent>,
    pub oracle: FiberSurface,
}

impl CutFiber {
    pub fn agrees(&self) -> bool {
        self.components.iter().all(|c| c.agrees())
    }
}

/// Fiber of the part of the domain between the branches of hyperbola θ, with
/// the reflection law removed on θ.
///
/// Each region component with `g` singular vertices and `ν` cut arcs is
/// predicted to be a genus `g + 1` surface with `ν` handles cut: `χ = −2g`
/// and `2ν` boundary circles.
pub fn cut_fiber_prediction(domain: &BilliardDomain, p: &Partition, theta: f64, lambda: f64) -> Result<CutFiber> {
    cut_fiber_on(domain, p, theta, lambda, DEFAULT_SUBDIV)
}

pub fn cut_fiber_on(domain: &BilliardDomain, p: &Partition, theta: f64, lambda: f64, subdiv: usize) -> Result<CutFiber> {
    let fam = domain.family;
    if !(theta > fam.b && theta < fam.a) {
        return invalid(format!("θ = {theta} is not a hyperbola parameter in ({}, {})", fam.b, fam.a));
    }
    if let Some(c) = domain.corners.iter().find(|c| (c.lambda_h - theta).abs() < CRIT_TOL) {
        return domain_err(format!("θ = {theta} passes through the corner at ({}, {})", c.point.x, c.point.y));
    }
    check_regular(domain, lambda)?;
    if is_level_b(&fam, lambda) || lambda > fam.a {
        return domain_err(format!("λ = {lambda} is not a regular level"));
    }
    let base = level_grid(&p.grid, &[theta], 1);
    let mut g = level_grid(&base, &[lambda], subdiv);
    let n = g.rows() * g.cols();
    let full_inside = g.inside.clone();
    for c in 0..n {
        let (_, j) = g.ij(c);
        g.inside[c] = full_inside[c] && g.col_lambdas(j).0 >= theta - CRIT_TOL;
    }
    let region: Vec<bool> = (0..n)
        .map(|c| {
            let (i, j) = g.ij(c);
            g.inside[c] && cell_in_region(&g, i, j, lambda)
        })
        .collect();

    // Cut edges: θ-line edges between a cell of the cut domain and a cell of
    // the original domain outside it.
    let mut open: HashSet<Elem> = HashSet::new();
    for j in 0..g.cols() {
        if (g.phis[j].lambda - theta).abs() > CRIT_TOL {
            continue;
        }
        for i in 0..g.rows() {
            let e = Elem::VEdge(i, j);
            let cells = edge_cells(&g, e);
            let ins: Vec<bool> = cells.iter().map(|c| c.is_some_and(|(a, b)| g.inside[g.idx(a, b)])).collect();
            let dom: Vec<bool> = cells.iter().map(|c| c.is_some_and(|(a, b)| full_inside[g.idx(a, b)])).collect();
            if ins[0] != ins[1] && dom[0] && dom[1] {
                open.insert(e);
            }
        }
    }

    let opts = LevelOptions { open_edges: open.clone(), ..LevelOptions::standard() };
    let lc = LevelComplex::build(&g, lambda, &opts);
    let lc = &lc;
    let comps = cell_components_cut(&g, &region, &BTreeSet::new());
    let reflex = g.reflex_vertices();
    let mut out = Vec::with_capacity(comps.len());
    for cells in comps {
        let set: BTreeSet<usize> = cells.iter().copied().collect();
        let singular_count = reflex
            .iter()
            .filter(|&&(i, j)| {
                g.vertex_star(i, j).iter().filter(|c| g.is_inside(c.i, c.j)).all(|c| set.contains(&g.idx(c.i, c.j)))
            })
            .count();
        let arc_edges: Vec<Elem> = open
            .iter()
            .filter(|e| edge_cells(&g, **e).iter().flatten().any(|&(a, b)| set.contains(&g.idx(a, b))))
            .copied()
            .collect();
        let cut_arcs = edge_chains(&g, &arc_edges);
        let closed_fibers = 4 / flip_order(&g, &set, &region);
        let (predicted_chi, predicted_boundary) = if cut_arcs == 0 {
            (closed_fibers as i64 * -2 * singular_count as i64, 0)
        } else {
            (-2 * singular_count as i64, 2 * cut_arcs)
        };
        let fiber_comps: BTreeSet<usize> = cells
            .iter()
            .flat_map(|&c| {
                let (i, j) = g.ij(c);
                (0..4u8).filter_map(move |b| lc.face_component(i, j, b))
            })
            .collect();
        let oracle_chi = fiber_comps.iter().map(|&k| lc.components[k].chi).sum();
        let oracle_boundary = fiber_comps.iter().map(|&k| lc.components[k].boundary_circles).sum();
        out.push(CutComponent {
            singular_count,
            cut_arcs,
            closed_fibers,
            predicted_chi,
            predicted_boundary,
            oracle_chi,
            oracle_boundary,
        });
    }
    let oracle = lc.surface();
    Ok(CutFiber { theta, lambda, components: out, oracle })
}

/// Number of connected chains formed by grid edges sharing endpoints.
fn edge_chains(g: &Grid, edges: &[Elem]) -> usize {
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs = Vec::with_capacity(edges.len());
    for &e in edges {
        let [a, b] = edge_ends(g, e);
        let n = ids.len();
        let ia = *ids.entry((a.0, a.1)).or_insert(n);
        let n = ids.len();
        let ib = *ids.entry((b.0, b.1)).or_insert(n);
        pairs.push((ia, ib));
    }
    let mut uf = UnionFind::<usize>::new(ids.len().max(1));
    for &(a, b) in &pairs {
        uf.union(a, b);
    }
    pairs.iter().map(|&(a, _)| uf.find(a)).collect::<BTreeSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::decomposition::partition;

    fn setup(name: &str) -> (BilliardDomain, Partition) {
        let d = catalog::by_name(name).unwrap().build().unwrap();
        let p = partition(&d).unwrap();
        (d, p)
    }

    #[test]
    fn full_ellipse_two_tori_below_b() {
        let (d, p) = setup("A2");
        let f = regular_fiber(&d, &p, 0.5).unwrap();
        assert_eq!(f.genera(), Some(vec![1, 1]));
        assert!(f.components.iter().all(|c| c.punctures == 0));
        assert_eq!(euler_characteristic(&f), 0);
    }

    #[test]
    fn prediction_matches_oracle_between_critical_values() {
        let mut all = catalog::elementary();
        all.extend(catalog::test_domains());
        for cd in all {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            for l in bifurcation_diagram(&d).regular_samples() {
                let r = regular_fiber_on(&d, &p, l, 1);
                assert!(r.is_ok(), "{} at {l}: {:?}", cd.name, r.err());
            }
        }
    }

    #[test]
    fn nc1_genus_two() {
        let (d, p) = setup("NC1");
        let f = regular_fiber(&d, &p, 1.3).unwrap();
        assert_eq!(f.components.len(), 1);
        assert_eq!(genus_of(&f.components[0]).unwrap(), 2);
        assert_eq!(f.components[0].punctures, 1);
    }

    #[test]
    fn empty_above_max_and_error_at_critical() {
        let (d, p) = setup("NC1");
        assert!(regular_fiber(&d, &p, 1.9).unwrap().components.is_empty());
        assert!(regular_fiber(&d, &p, 2.5).unwrap().components.is_empty());
        assert!(matches!(regular_fiber(&d, &p, 1.5), Err(crate::BilliardError::Domain(_))));
        assert!(matches!(regular_fiber(&d, &p, 1.0), Err(crate::BilliardError::Domain(_))));
    }

    #[test]
    fn cut_fiber_nc1() {
        let (d, p) = setup("NC1");
        let c = cut_fiber_prediction(&d, &p, 1.35, 1.3).unwrap();
        assert_eq!(c.components.len(), 1);
        let k = &c.components[0];
        assert_eq!((k.genus(), k.singular_count, k.cut_arcs), (2, 1, 1));
        assert!(k.agrees(), "{k:?}");
        assert_eq!(c.oracle.genera(), Some(vec![1]));
        assert_eq!(c.oracle.components[0].boundary_circles, 2);
    }

    #[test]
    fn cut_fiber_elementary_is_annulus() {
        let (d, p) = setup("A'1");
        let c = cut_fiber_prediction(&d, &p, 1.3, 1.2).unwrap();
        assert!(c.agrees(), "{:?}", c.components);
        assert_eq!(c.components[0].cut_arcs, 1);
        assert_eq!(c.oracle.genera(), Some(vec![0]));
        // Both branches of the hyperbola cross the half ellipse: two parallel cuts.
        let (d, p) = setup("A'2");
        let c = cut_fiber_prediction(&d, &p, 1.5, 1.2).unwrap();
        assert!(c.agrees(), "{:?}", c.components);
        assert_eq!(c.components[0].cut_arcs, 2);
        assert_eq!(c.oracle.genera(), Some(vec![0, 0]));
    }

    #[test]
    fn cut_fiber_through_corner_fails() {
        let (d, p) = setup("NC1");
        assert!(matches!(cut_fiber_prediction(&d, &p, 1.5, 1.3), Err(crate::BilliardError::Domain(_))));
    }

    #[test]
    fn cut_missing_region_equals_regular_fiber() {
        let (d, p) = setup("NC1");
        let c = cut_fiber_prediction(&d, &p, 1.35, 1.45).unwrap();
        assert!(c.agrees());
        assert!(c.components.iter().all(|k| k.cut_arcs == 0));
    }

    #[test]
    fn trajectories_stay_in_their_component() {
        for (name, lambda) in [("NC1", 0.45), ("NC1", 1.3), ("A2", 0.5), ("A2", 1.5), ("NC3", 0.5)] {
            let (d, _) = setup(name);
            let r = monte_carlo_connectivity(&d, lambda, 20, 50, 0).unwrap();
            assert_eq!(r.crossings, 0, "{name} {lambda}: {r:?}");
            assert!(r.segments > 500, "{name} {lambda}: {r:?}");
        }
    }
}
