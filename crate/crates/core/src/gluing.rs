//! Gluing the graph of a cut arc with the cylinders over the strip pieces.
//!
//! Near a cut arc the fiber splits into three parts: the graph over the arc,
//! one or two cylinders over each strip piece, and the rest of the fiber over
//! the domain minus the strip. Each part is built as its own level complex
//! with the shared edges left open, then the parts are glued back and the
//! result is compared with the level complex of the whole domain.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::decomposition::{strip_on, CutArc, Partition, Strip};
use crate::diagram::bifurcation_diagram;
use crate::domain::BilliardDomain;
use crate::error::{integrity, invalid, Result};
use crate::fiber::{branch_signs, cell_in_region, edge_cells, Elem, LevelComplex, LevelOptions, Node};
use crate::gr::{arc_level_grid, build_gr_on, side_level, ArcSide, FiberGraph};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderSide {
    Right,
    Left,
    /// `C^R` and `C^L` joined along the caustic.
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cylinder {
    pub name: String,
    pub piece: usize,
    /// On the larger-parameter side of the arc.
    pub inner: bool,
    pub side: CylinderSide,
    pub chi: i64,
    pub boundary_circles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleKind {
    /// Glued to the graph.
    Arc,
    /// Glued to the rest of the fiber.
    Far,
}

#[derive(Debug, Clone, Serialize)]
pub struct GluingRow {
    pub cylinder: String,
    pub circle: CircleKind,
    /// Graph edge names for arc circles; outer component numbers for far ones.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assembly {
    pub arc: usize,
    pub side: ArcSide,
    pub alpha: f64,
    pub graph: FiberGraph,
    pub cylinders: Vec<Cylinder>,
    pub table: Vec<GluingRow>,
    pub outer_chi: i64,
    /// Boundary arcs of cylinders glued onto each graph edge.
    pub label_use: BTreeMap<String, usize>,
    /// χ per assembled component, sorted.
    pub component_chi: Vec<i64>,
    pub oracle_component_chi: Vec<i64>,
}

impl Assembly {
    pub fn chi(&self) -> i64 {
        self.component_chi.iter().sum()
    }

    pub fn oracle_chi(&self) -> i64 {
        self.oracle_component_chi.iter().sum()
    }

    pub fn agrees(&self) -> bool {
        self.component_chi == self.oracle_component_chi
    }

    pub fn labels_used_twice(&self) -> bool {
        self.label_use.values().all(|&n| n == 2)
    }

    /// Number of cylinders `C^R_p`, `C^L_p`, counting a merged pair as two.
    pub fn family_size(&self) -> usize {
        self.cylinders.iter().map(|c| if c.side == CylinderSide::Both { 2 } else { 1 }).sum()
    }
}

fn across_right(g: &Grid, elliptic: bool, j: usize, b: u8) -> bool {
    let s = branch_signs(b);
    if elliptic {
        s.0 > 0
    } else {
        let (p0, p1) = g.col_range(j);
        let s2 = if (p0 + p1).sin() < 0.0 { -1 } else { 1 };
        s.1 * s2 < 0
    }
}

struct Part {
    lc: LevelComplex,
    base: usize,
}

/// Assembles the fiber near cut arc `i` on one side of its level and checks
/// it against the level complex of the whole domain.
pub fn glue_cylinders(domain: &BilliardDomain, p: &Partition, i: usize, side: ArcSide, subdiv: usize) -> Result<Assembly> {
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    let eps = bifurcation_diagram(domain).epsilon();
    let alpha = side_level(arc, side, eps);
    if crate::fiber::is_level_b(&domain.family, alpha) {
        return invalid("gluing is defined away from the level b");
    }
    let g = arc_level_grid(p, arc, eps, alpha, subdiv);
    let strip = strip_on(g.clone(), arc, eps);
    let graph = build_gr_on(&g, arc, i, alpha, false, side == ArcSide::At);
    assemble(&g, arc, &strip, graph, side, alpha)
}

fn assemble(g: &Grid, arc: &CutArc, strip: &Strip, graph: FiberGraph, side: ArcSide, alpha: f64) -> Result<Assembly> {
    let n = g.rows() * g.cols();
    let elliptic = arc.lines.is_elliptic();
    let live = |c: usize| {
        let (ci, cj) = g.ij(c);
        g.inside[c] && cell_in_region(g, ci, cj, alpha)
    };
    let mut in_strip = vec![false; n];
    for &c in &strip.cells {
        in_strip[c] = true;
    }
    let arc_edges: HashSet<Elem> = arc.lines.edges(g).into_iter().collect();
    // Far edges: between a live strip cell and a live cell off the strip.
    let mut far: HashSet<Elem> = HashSet::new();
    for c in 0..n {
        if !in_strip[c] || !live(c) {
            continue;
        }
        let (ci, cj) = g.ij(c);
        for s in [crate::grid::Side::Low, crate::grid::Side::High, crate::grid::Side::Start, crate::grid::Side::End] {
            let (e, _) = crate::fiber::cell_side_edge(g, ci, cj, s);
            if arc_edges.contains(&e) {
                continue;
            }
            let other = edge_cells(g, e).into_iter().flatten().map(|(a, b)| g.idx(a, b)).find(|&d| d != c);
            if other.is_some_and(|d| !in_strip[d] && live(d)) {
                far.insert(e);
            }
        }
    }
    let open: HashSet<Elem> = arc_edges.union(&far).copied().collect();

    let mask = |cells: &[usize]| {
        let mut m = vec![false; n];
        for &c in cells {
            m[c] = true;
        }
        m
    };
    let build = |select: Vec<bool>| {
        let opts = LevelOptions { select: Some(select), open_edges: open.clone(), blow_up_foci: true };
        LevelComplex::build(g, alpha, &opts)
    };

    // Pieces: inner first, then outer.
    let pieces: Vec<(bool, &Vec<usize>)> =
        strip.inside.iter().map(|c| (true, c)).chain(strip.outside.iter().map(|c| (false, c))).collect();
    let mut parts: Vec<(usize, bool, Part)> = Vec::new();
    let mut total = 0usize;
    for (k, (inner, cells)) in pieces.iter().enumerate() {
        let lc = build(mask(cells));
        if lc.is_empty() {
            continue;
        }
        let m = lc.components.len();
        parts.push((k, *inner, Part { lc, base: total }));
        total += m;
    }
    let outer_mask: Vec<bool> = (0..n).map(|c| !in_strip[c]).collect();
    let outer = build(outer_mask);
    let outer_base = total;
    total += outer.components.len();
    let gr_edge_base = total;
    total += graph.edges.len();
    let gr_vertex_base = total;
    total += graph.vertices.len();

    let mut uf = UnionFind::<usize>::new(total.max(1));
    let mut cylinders = Vec::new();
    let mut table = Vec::new();
    let mut label_use: BTreeMap<String, usize> = (0..graph.edges.len()).map(|k| (graph.edge_name(k), 0)).collect();
    for (k, e) in graph.edges.iter().enumerate() {
        for v in e.ends {
            uf.union(gr_edge_base + k, gr_vertex_base + v);
        }
    }

    for (piece, inner, part) in &parts {
        let lc = &part.lc;
        let cells = pieces[*piece].1;
        for (ci, comp) in lc.components.iter().enumerate() {
            let mut sides = BTreeSet::new();
            for &c in cells.iter() {
                let (a, b) = g.ij(c);
                for br in 0..4u8 {
                    if lc.face_component(a, b, br) == Some(ci) {
                        sides.insert(across_right(g, elliptic, b, br));
                    }
                }
            }
            let cside = match (sides.contains(&true), sides.contains(&false)) {
                (true, false) => CylinderSide::Right,
                (false, true) => CylinderSide::Left,
                _ => CylinderSide::Both,
            };
            let tag = match cside {
                CylinderSide::Right => "R",
                CylinderSide::Left => "L",
                CylinderSide::Both => "RL",
            };
            let name = format!("C^{tag}_{}", piece + 1);
            cylinders.push(Cylinder {
                name: name.clone(),
                piece: *piece,
                inner: *inner,
                side: cside,
                chi: comp.chi,
                boundary_circles: comp.boundary_circles,
            });
            let (mut arc_labels, mut far_labels) = (BTreeSet::new(), BTreeSet::new());
            for node in lc.nodes() {
                let Some(class) = lc.class_of(node) else { continue };
                if lc.component_of_class(class) != ci {
                    continue;
                }
                if arc_edges.contains(&node.elem) {
                    let Some(k) = graph.edge_of(node.elem, node.branch) else {
                        return integrity(format!("{name}: lift {:?}/{} has no graph edge", node.elem, node.branch));
                    };
                    uf.union(part.base + ci, gr_edge_base + k);
                    arc_labels.insert(graph.edge_name(k));
                } else if far.contains(&node.elem) {
                    let probe = Node { elem: node.elem, sheet: 0, branch: node.branch };
                    let Some(oc) = outer.class_of(&probe) else {
                        return integrity(format!("{name}: far lift {:?}/{} missing outside the strip", node.elem, node.branch));
                    };
                    let oc = outer.component_of_class(oc);
                    uf.union(part.base + ci, outer_base + oc);
                    far_labels.insert(format!("outer_{}", oc + 1));
                }
            }
            if !arc_labels.is_empty() {
                table.push(GluingRow { cylinder: name.clone(), circle: CircleKind::Arc, labels: arc_labels.into_iter().collect() });
            }
            if !far_labels.is_empty() {
                table.push(GluingRow { cylinder: name, circle: CircleKind::Far, labels: far_labels.into_iter().collect() });
            }
        }
    }

    // Each boundary arc over a segment crosses its first grid edge once.
    for (k, e) in graph.edges.iter().enumerate() {
        let first = graph.segments[e.segment].grid_edges[0];
        let mut n = 0;
        for (_, _, part) in &parts {
            let classes: BTreeSet<usize> = (0..4u8)
                .filter(|&b| graph.edge_of(first, b) == Some(k))
                .filter_map(|b| part.lc.class_of(&Node { elem: first, sheet: 0, branch: b }))
                .collect();
            n += classes.len();
        }
        *label_use.get_mut(&graph.edge_name(k)).unwrap() = n;
    }

    // χ per assembled component; shared circles contribute nothing.
    let mut chi: BTreeMap<usize, i64> = BTreeMap::new();
    for (_, _, part) in &parts {
        for (ci, comp) in part.lc.components.iter().enumerate() {
            *chi.entry(uf.find(part.base + ci)).or_default() += comp.chi;
        }
    }
    for (oc, comp) in outer.components.iter().enumerate() {
        *chi.entry(uf.find(outer_base + oc)).or_default() += comp.chi;
    }
    for k in 0..graph.edges.len() {
        *chi.entry(uf.find(gr_edge_base + k)).or_default() -= 1;
    }
    for v in 0..graph.vertices.len() {
        *chi.entry(uf.find(gr_vertex_base + v)).or_default() += 1;
    }
    let mut component_chi: Vec<i64> = chi.into_values().collect();
    component_chi.sort_unstable();

    let full = LevelComplex::build(g, alpha, &LevelOptions::standard());
    let mut oracle_component_chi: Vec<i64> = full.components.iter().map(|c| c.chi).collect();
    oracle_component_chi.sort_unstable();

    Ok(Assembly {
        arc: graph.arc,
        side,
        alpha,
        outer_chi: outer.chi(),
        graph,
        cylinders,
        table,
        label_use,
        component_chi,
        oracle_component_chi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::decomposition::partition;

    #[test]
    fn catalog_assemblies_match_oracle() {
        for cd in catalog::test_domains() {
            let d = cd.build().unwrap();
            let p = partition(&d).unwrap();
            for (i, arc) in p.cut_arcs.iter().enumerate() {
                for side in [ArcSide::Below, ArcSide::At, ArcSide::Above] {
                    let a = glue_cylinders(&d, &p, i, side, 1).unwrap();
                    let tag = format!("{} arc {i} {side:?}", cd.name);
                    assert!(a.agrees(), "{tag}: {:?} vs {:?}", a.component_chi, a.oracle_component_chi);
                    let expected = match side {
                        ArcSide::Below => 2 * arc.nu + 2 * arc.xi,
                        _ => 2 * arc.persisting(),
                    };
                    assert_eq!(a.family_size(), expected, "{tag}");
                    assert!(a.labels_used_twice(), "{tag}: {:?}", a.label_use);
                    assert!(a.cylinders.iter().all(|c| c.chi == 0 && c.boundary_circles == 2), "{tag}");
                }
            }
        }
    }

    #[test]
    fn nc1_gluing_table() {
        let d = catalog::nc1().build().unwrap();
        let p = partition(&d).unwrap();
        let a = glue_cylinders(&d, &p, 0, ArcSide::Below, 1).unwrap();
        assert_eq!(a.component_chi, vec![-2]);
        let names: Vec<&str> = a.cylinders.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["C^L_1", "C^R_1", "C^RL_2"]);
        let arc_rows: Vec<(&str, usize)> = a
            .table
            .iter()
            .filter(|r| r.circle == CircleKind::Arc)
            .map(|r| (r.cylinder.as_str(), r.labels.len()))
            .collect();
        assert_eq!(arc_rows, [("C^L_1", 2), ("C^R_1", 2), ("C^RL_2", 6)]);
    }
}
