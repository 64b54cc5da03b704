//! Atoms at critical levels: the elementary lookup at `Λ = b`, reports for
//! arc levels and for the saddle level, and genus conservation across `b`.

use std::fmt;

use serde::Serialize;

use crate::cells::{build_cell_complex, CellComplex};
use crate::decomposition::Partition;
use crate::diagram::bifurcation_diagram;
use crate::domain::{AngleClass, BilliardDomain, ElementaryType, Primes, Series};
use crate::error::{domain_err, invalid, Result};
use crate::fiber::{level_complex, FiberSurface, LevelOptions};
use crate::gluing::{glue_cylinders, GluingRow};
use crate::gr::{build_gr, saddle_graphs, side_level, ArcSide, FiberGraph};
use crate::topology::regular_fiber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AtomName {
    B,
    AStar,
    /// `B_n`, `n` saddle circles.
    Bn(usize),
    /// No bifurcation: the neighbourhood is a torus times an interval.
    TorusCylinder,
}

impl fmt::Display for AtomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomName::B => write!(f, "B"),
            AtomName::AStar => write!(f, "A*"),
            AtomName::Bn(n) => write!(f, "B_{n}"),
            AtomName::TorusCylinder => write!(f, "T2xI"),
        }
    }
}

/// Combinatorics of a 3-atom: the saddle circles (vertices of `K`) and the
/// boundary tori on each side of the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoAtom {
    pub name: AtomName,
    pub vertices: usize,
    pub tori_below: usize,
    pub tori_above: usize,
    /// Rings of `K` after cutting at its vertices, over the top and bottom
    /// halves of the table.
    pub top_bottom_split: Option<(usize, usize)>,
}

impl TwoAtom {
    fn new(name: AtomName) -> Self {
        let (vertices, tori_below, tori_above) = match name {
            AtomName::B => (1, 2, 1),
            AtomName::AStar => (1, 1, 1),
            AtomName::Bn(n) => (n, 1, n + 1),
            AtomName::TorusCylinder => (0, 1, 1),
        };
        let split = (vertices > 0).then_some((vertices, vertices));
        TwoAtom { name, vertices, tori_below, tori_above, top_bottom_split: split }
    }

    /// Edges of `K`: every vertex has degree four.
    pub fn edges(&self) -> usize {
        2 * self.vertices
    }
}

/// The 3-atom of an elementary billiard at `Λ = b`.
pub fn elementary_atom(t: ElementaryType) -> TwoAtom {
    use Primes::*;
    use Series::*;
    let name = match (t.series, t.primes, t.n_or_f) {
        (A, None, 2) | (A, None, 0) => AtomName::B,
        (A, None, 1) => AtomName::AStar,
        (B, None, n) if n > 0 => AtomName::Bn(n),
        (B, One, n) if n > 1 => AtomName::Bn(n - 1),
        _ => AtomName::TorusCylinder,
    };
    TwoAtom::new(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AtomReport {
    pub critical_value: f64,
    pub below: FiberSurface,
    pub above: FiberSurface,
    pub complex: CellComplex,
    pub graphs: Vec<FiberGraph>,
    pub gluing_table: Vec<GluingRow>,
    /// Per partition element, at the saddle level only.
    pub atoms: Vec<(ElementaryType, TwoAtom)>,
    pub theorem_checks: Vec<TheoremCheck>,
}

impl AtomReport {
    pub fn all_pass(&self) -> bool {
        self.theorem_checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&TheoremCheck> {
        self.theorem_checks.iter().find(|c| c.name == name)
    }
}

fn check(out: &mut Vec<TheoremCheck>, name: &str, pass: bool, detail: String) {
    out.push(TheoremCheck { name: name.to_string(), pass, detail });
}

/// Sums of `genus − 1` over the regular fibers at `b ∓ ε`.
#[derive(Debug, Clone, Serialize)]
pub struct GenusConservation {
    pub below: i64,
    pub above: i64,
    pub reflex_on_focal_line: usize,
}

impl GenusConservation {
    /// The sums agree exactly when no reflex corner lies on the focal line.
    pub fn pass(&self) -> bool {
        (self.below == self.above) == (self.reflex_on_focal_line == 0)
    }
}

fn excess(s: &FiberSurface) -> Result<i64> {
    let Some(g) = s.genera() else {
        return crate::error::integrity("regular fiber is not a surface");
    };
    Ok(g.iter().map(|&x| x as i64 - 1).sum())
}

/// Elementary tables need no partition, so only domains with reflex corners
/// must be homogeneous.
fn require_homogeneous(domain: &BilliardDomain) -> Result<()> {
    if domain.complexity == 0 || domain.homogeneity.is_homogeneous() {
        Ok(())
    } else {
        domain_err("domain is not homogeneous")
    }
}

pub fn genus_conservation_check(domain: &BilliardDomain, p: &Partition) -> Result<GenusConservation> {
    require_homogeneous(domain)?;
    let eps = bifurcation_diagram(domain).epsilon();
    let b = domain.family.b;
    let below = excess(&regular_fiber(domain, p, b - eps)?)?;
    let above = excess(&regular_fiber(domain, p, b + eps)?)?;
    let tol = 1e-9 * domain.family.a.max(1.0);
    let reflex_on_focal_line = domain
        .corners
        .iter()
        .filter(|c| c.angle_class == AngleClass::ThreeQuarter && c.point.y.abs() <= tol)
        .count();
    Ok(GenusConservation { below, above, reflex_on_focal_line })
}

fn side_fibers(domain: &BilliardDomain, p: &Partition, c: f64, eps: f64) -> Result<(FiberSurface, FiberSurface)> {
    Ok((regular_fiber(domain, p, c - eps)?, regular_fiber(domain, p, c + eps)?))
}

fn complex_checks(out: &mut Vec<TheoremCheck>, cx: &CellComplex) {
    let valid = cx.validate();
    check(out, "complex.valid", valid.is_ok(), valid.err().map(|e| e.to_string()).unwrap_or_default());
    check(
        out,
        "complex.retracts_to_level",
        cx.chi() == cx.at_chi(),
        format!("chi(U) = {}, chi(level in U) = {}", cx.chi(), cx.at_chi()),
    );
    check(
        out,
        "complex.level_chi",
        cx.punctured_chi() == cx.level_chi_punctured,
        format!("punctured chi(U) = {}, punctured chi(level) = {}", cx.punctured_chi(), cx.level_chi_punctured),
    );
}

/// Report for the level of cut arc `i` (not the saddle level).
pub fn nonsaddle_atom(domain: &BilliardDomain, p: &Partition, i: usize) -> Result<AtomReport> {
    let Some(arc) = p.cut_arcs.get(i) else {
        return invalid(format!("no cut arc with index {i}"));
    };
    let eps = bifurcation_diagram(domain).epsilon();
    let c = side_level(arc, ArcSide::At, eps);
    if (c - domain.family.b).abs() < 1e-12 {
        return domain_err("the arc lies on the saddle level b");
    }
    let (below, above) = side_fibers(domain, p, c, eps)?;
    let complex = build_cell_complex(domain, p, c, 1)?;
    let mut checks = Vec::new();

    let glued = [ArcSide::Below, ArcSide::At, ArcSide::Above].map(|s| glue_cylinders(domain, p, i, s, 1));
    let [lo, at, hi] = glued;
    let (lo, at, hi) = (lo?, at?, hi?);

    let outer = [lo.outer_chi, at.outer_chi, hi.outer_chi];
    check(
        &mut checks,
        "thm3.outer_product",
        outer.iter().all(|&x| x == outer[0]),
        format!("outer chi across the window {outer:?}"),
    );

    let gr_lo = build_gr(domain, p, i, ArcSide::Below, 1)?;
    let gr_at = build_gr(domain, p, i, ArcSide::At, 1)?;
    let same = gr_lo.vertices.len() == gr_at.vertices.len()
        && gr_lo.edges.iter().map(|e| (e.segment, e.label)).eq(gr_at.edges.iter().map(|e| (e.segment, e.label)));
    check(
        &mut checks,
        "thm3.graph_level_independent",
        same,
        format!("{}/{} vs {}/{}", gr_lo.vertices.len(), gr_lo.edges.len(), gr_at.vertices.len(), gr_at.edges.len()),
    );

    let want_lo = 2 * arc.nu + 2 * arc.xi;
    let want_hi = 2 * arc.persisting();
    check(
        &mut checks,
        "thm3.cylinder_families",
        lo.family_size() == want_lo && at.family_size() == want_hi && hi.family_size() == want_hi,
        format!(
            "{} / {} / {} against {want_lo} / {want_hi} / {want_hi}",
            lo.family_size(),
            at.family_size(),
            hi.family_size()
        ),
    );
    check(
        &mut checks,
        "thm3.gluing_matches_oracle",
        lo.agrees() && at.agrees() && hi.agrees(),
        format!("chi {} / {} / {}", lo.chi(), at.chi(), hi.chi()),
    );
    check(&mut checks, "thm3.labels_used_twice", lo.labels_used_twice(), format!("{:?}", lo.label_use));
    check(
        &mut checks,
        "thm3.two_way_chi",
        at.chi() == complex.level_chi && complex.chi() == complex.at_chi(),
        format!("gluing {}, level complex {}, U {}", at.chi(), complex.level_chi, complex.chi()),
    );
    complex_checks(&mut checks, &complex);

    Ok(AtomReport {
        critical_value: c,
        below,
        above,
        complex,
        graphs: vec![gr_lo, gr_at],
        gluing_table: lo.table.clone(),
        atoms: vec![],
        theorem_checks: checks,
    })
}

/// Report for the saddle level `Λ = b`.
pub fn saddle_atom(domain: &BilliardDomain, p: &Partition) -> Result<AtomReport> {
    require_homogeneous(domain)?;
    let diagram = bifurcation_diagram(domain);
    let b = domain.family.b;
    let eps = diagram.epsilon();
    let (below, above) = side_fibers(domain, p, b, eps)?;
    let complex = build_cell_complex(domain, p, b, 1)?;
    let at = level_complex(domain, b, 1, &LevelOptions::standard()).surface();
    let atoms: Vec<(ElementaryType, TwoAtom)> = p.elements.iter().map(|e| (e.kind, elementary_atom(e.kind))).collect();
    let mut checks = Vec::new();

    let vertices: usize = atoms.iter().map(|(_, a)| a.vertices).sum();
    check(
        &mut checks,
        "thm5.saddle_circles",
        vertices == at.critical_circles,
        format!("element atoms {vertices}, level {}", at.critical_circles),
    );
    if let [(t, a)] = atoms.as_slice() {
        let ok = below.components.len() == a.tori_below
            && above.components.len() == a.tori_above
            && below.genera().is_some_and(|g| g.iter().all(|&x| x == 1))
            && above.genera().is_some_and(|g| g.iter().all(|&x| x == 1));
        check(
            &mut checks,
            "thm1.lookup",
            ok,
            format!(
                "{t}: atom {} expects {}/{} tori, fibers have {}/{}",
                a.name,
                a.tori_below,
                a.tori_above,
                below.components.len(),
                above.components.len()
            ),
        );
    }
    let mut graphs = Vec::new();
    for i in 0..p.cut_arcs.len() {
        let [lt, eq, gt] = saddle_graphs(domain, p, i, 1)?;
        let crossings = eq.points.iter().filter(|q| q.focal).count();
        check(
            &mut checks,
            &format!("thm5.focal_split.arc{}", i + 1),
            eq.literal_vertex_count() == gt.literal_vertex_count() + 2 * crossings
                && eq.segments.len() == gt.segments.len() + crossings,
            format!(
                "{crossings} focal crossings; Gr< {}/{}, Gr= {}/{}, Gr> {}/{}",
                lt.vertices.len(),
                lt.edges.len(),
                eq.vertices.len(),
                eq.edges.len(),
                gt.vertices.len(),
                gt.edges.len()
            ),
        );
        graphs.extend([lt, eq, gt]);
    }
    let gc = genus_conservation_check(domain, p)?;
    check(
        &mut checks,
        "thm4.genus_conservation",
        gc.pass(),
        format!("sum(g-1) {} -> {}, reflex corners on the focal line {}", gc.below, gc.above, gc.reflex_on_focal_line),
    );
    complex_checks(&mut checks, &complex);

    Ok(AtomReport {
        critical_value: b,
        below,
        above,
        complex,
        graphs,
        gluing_table: vec![],
        atoms,
        theorem_checks: checks,
    })
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
    fn theorem_one_table() {
        let table = [
            ("A2", "B", 1, 2, 1),
            ("A1", "A*", 1, 1, 1),
            ("A0", "B", 1, 2, 1),
            ("A'2", "T2xI", 0, 1, 1),
            ("A'1", "T2xI", 0, 1, 1),
            ("A'0", "T2xI", 0, 1, 1),
            ("B0", "T2xI", 0, 1, 1),
            ("B1", "B_1", 1, 1, 2),
            ("B2", "B_2", 2, 1, 3),
            ("B'1", "T2xI", 0, 1, 1),
            ("B'2", "B_1", 1, 1, 2),
            ("B''2", "T2xI", 0, 1, 1),
        ];
        for cd in catalog::elementary() {
            let row = table.iter().find(|r| r.0 == cd.name).unwrap();
            let a = elementary_atom(cd.expected.unwrap());
            assert_eq!((a.name.to_string().as_str(), a.vertices, a.tori_below, a.tori_above), (row.1, row.2, row.3, row.4));
            assert_eq!(a.edges(), 2 * a.vertices);
        }
    }

    #[test]
    fn saddle_reports_on_elementary_domains() {
        for cd in catalog::elementary() {
            let (d, p) = setup(cd.name);
            let r = saddle_atom(&d, &p).unwrap();
            assert!(r.all_pass(), "{}: {:?}", cd.name, r.theorem_checks);
            assert!(r.check("thm1.lookup").is_some());
            assert!(r.graphs.is_empty());
        }
    }

    #[test]
    fn saddle_reports_on_test_domains() {
        for cd in catalog::test_domains() {
            let (d, p) = setup(cd.name);
            let r = saddle_atom(&d, &p).unwrap();
            assert!(r.all_pass(), "{}: {:?}", cd.name, r.theorem_checks);
            assert_eq!(r.graphs.len(), 3 * p.cut_arcs.len());
        }
    }

    #[test]
    fn nonsaddle_reports() {
        for cd in catalog::test_domains() {
            let (d, p) = setup(cd.name);
            for i in 0..p.cut_arcs.len() {
                let r = nonsaddle_atom(&d, &p, i).unwrap();
                assert!(r.all_pass(), "{} arc {i}: {:?}", cd.name, r.theorem_checks);
            }
        }
    }

    #[test]
    fn nc1_arc_report() {
        let (d, p) = setup("NC1");
        let r = nonsaddle_atom(&d, &p, 0).unwrap();
        assert_eq!(r.critical_value, 1.5);
        assert_eq!(r.below.genera(), Some(vec![2]));
        assert_eq!(r.above.genera(), Some(vec![1]));
        let arc_rows = r.gluing_table.iter().filter(|row| row.circle == crate::gluing::CircleKind::Arc).count();
        assert_eq!(arc_rows, 3);
        assert!(nonsaddle_atom(&d, &p, 7).is_err());
    }

    #[test]
    fn genus_conservation() {
        for (name, equal) in [("NC1", true), ("NC2", true), ("NC3", false), ("A2", true), ("NC1-sym", true)] {
            let (d, p) = setup(name);
            let g = genus_conservation_check(&d, &p).unwrap();
            assert!(g.pass(), "{name}: {g:?}");
            assert_eq!(g.below == g.above, equal, "{name}");
            assert_eq!(g.reflex_on_focal_line == 0, equal, "{name}");
        }
    }
}
