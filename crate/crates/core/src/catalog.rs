//! Canonical and test domains over the family `a = 2, b = 1`.
//!
//! Every domain is a union of [`ERect`]s, so equivalence moves (deformation,
//! mirror, splitting) act on the rectangle list.

use rand::Rng;

use crate::build::{domain_from_rects, ERect};
use crate::domain::{BilliardDomain, ElementaryType, Primes, Series};
use crate::error::Result;
use crate::geometry::ConfocalFamily;
use crate::grid::PhiPos;

pub fn standard_family() -> ConfocalFamily {
    ConfocalFamily { a: 2.0, b: 1.0 }
}

const fn p(l: f64, q: u8) -> PhiPos {
    PhiPos::new(l, q)
}

const fn r(e0: f64, e1: f64, p0: PhiPos, p1: PhiPos) -> ERect {
    ERect::new([e0, e1], [p0, p1])
}

#[derive(Debug, Clone)]
pub struct CatalogDomain {
    pub name: &'static str,
    pub family: ConfocalFamily,
    pub rects: Vec<ERect>,
    pub expected: Option<ElementaryType>,
}

impl CatalogDomain {
    fn new(name: &'static str, rects: Vec<ERect>, expected: Option<ElementaryType>) -> Self {
        Self { name, family: standard_family(), rects, expected }
    }

    pub fn build(&self) -> Result<BilliardDomain> {
        domain_from_rects(self.family, &self.rects)
    }
}

/// The twelve elementary classes, each from its verbal description.
pub fn elementary() -> Vec<CatalogDomain> {
    use Primes::*;
    use Series::*;
    let t = |s, pr, n| Some(ElementaryType::new(s, pr, n));
    vec![
        CatalogDomain::new("A2", vec![r(0.0, 1.0, p(1.0, 0), p(1.0, 0))], t(A, None, 2)),
        CatalogDomain::new(
            "A1",
            vec![r(0.0, 1.0, p(1.5, 2), p(1.5, 1))],
            t(A, None, 1),
        ),
        CatalogDomain::new(
            "A0",
            vec![r(0.0, 1.0, p(1.5, 0), p(1.5, 1)), r(0.0, 1.0, p(1.5, 2), p(1.5, 3))],
            t(A, None, 0),
        ),
        CatalogDomain::new("A'2", vec![r(0.0, 1.0, p(1.0, 0), p(1.0, 1))], t(A, One, 2)),
        CatalogDomain::new("A'1", vec![r(0.0, 1.0, p(1.0, 0), p(1.5, 1))], t(A, One, 1)),
        CatalogDomain::new("A'0", vec![r(0.0, 1.0, p(1.5, 0), p(1.5, 1))], t(A, One, 0)),
        CatalogDomain::new("B0", vec![r(0.0, 0.5, p(1.2, 0), p(1.8, 0))], t(B, None, 0)),
        CatalogDomain::new("B1", vec![r(0.0, 0.5, p(1.2, 3), p(1.2, 0))], t(B, None, 1)),
        CatalogDomain::new("B2", vec![r(0.0, 0.5, p(1.2, 3), p(1.2, 2))], t(B, None, 2)),
        CatalogDomain::new("B'1", vec![r(0.0, 0.5, p(1.0, 0), p(1.2, 0))], t(B, One, 1)),
        CatalogDomain::new("B'2", vec![r(0.0, 0.5, p(1.0, 0), p(1.2, 2))], t(B, One, 2)),
        CatalogDomain::new("B''2", vec![r(0.0, 0.5, p(1.0, 0), p(1.0, 1))], t(B, Two, 2)),
    ]
}

/// Two quadrilaterals across hyperbola 1.5; one reflex vertex at `(0.3, 1.5)`.
pub fn nc1() -> CatalogDomain {
    CatalogDomain::new(
        "NC1",
        vec![r(0.0, 0.6, p(1.2, 0), p(1.5, 0)), r(0.0, 0.3, p(1.5, 0), p(1.8, 0))],
        None,
    )
}

/// Three pieces; reflex vertices `(0.2, 1.5)` and `(0.4, 1.5)`.
pub fn nc2() -> CatalogDomain {
    CatalogDomain::new(
        "NC2",
        vec![
            r(0.0, 0.6, p(1.2, 0), p(1.5, 0)),
            r(0.0, 0.2, p(1.5, 0), p(1.8, 0)),
            r(0.4, 0.6, p(1.5, 0), p(1.7, 0)),
        ],
        None,
    )
}

/// Upper and lower halves of different widths; the reflex vertex sits on the
/// focal segment at `x = √0.4`.
pub fn nc3() -> CatalogDomain {
    CatalogDomain::new(
        "NC3",
        vec![r(0.0, 1.0, p(1.2, 0), p(1.2, 1)), r(0.0, 1.0, p(1.2, 2), p(1.6, 3))],
        None,
    )
}

/// Comb across hyperbola 1.5 with two pieces inside and three outside.
pub fn comb() -> CatalogDomain {
    CatalogDomain::new(
        "COMB",
        vec![
            r(0.0, 0.2, p(1.5, 0), p(1.7, 0)),
            r(0.3, 0.5, p(1.5, 0), p(1.7, 0)),
            r(0.0, 0.1, p(1.3, 0), p(1.5, 0)),
            r(0.15, 0.35, p(1.3, 0), p(1.5, 0)),
            r(0.45, 0.5, p(1.3, 0), p(1.5, 0)),
        ],
        None,
    )
}

/// Same elementary pieces as [`nc1`], but two reflex vertices on the shared arc.
pub fn nc1_shifted() -> CatalogDomain {
    CatalogDomain::new(
        "NC1-shifted",
        vec![r(0.0, 0.6, p(1.2, 0), p(1.5, 0)), r(0.2, 0.4, p(1.5, 0), p(1.8, 0))],
        None,
    )
}

/// An NC1-like piece reaching the focal segment, joined with its mirror image:
/// reflex vertices at `(0.3, 1.5)` above and below the x-axis, and the cut
/// hyperbola crosses the focal line between them.
pub fn nc1_symmetric() -> CatalogDomain {
    let mut rects = vec![r(0.0, 1.0, p(1.2, 0), p(1.5, 0)), r(0.0, 0.3, p(1.5, 0), p(1.8, 0))];
    rects.extend(mirror_rects(&rects));
    CatalogDomain::new("NC1-sym", rects, None)
}

/// Non-elementary test domains.
pub fn test_domains() -> Vec<CatalogDomain> {
    vec![nc1(), nc2(), nc3(), comb(), nc1_shifted(), nc1_symmetric()]
}

pub fn by_name(name: &str) -> Option<CatalogDomain> {
    let mut all = elementary();
    all.extend(test_domains());
    all.into_iter().find(|d| d.name.eq_ignore_ascii_case(name))
}

/// Rectangles mirrored across the x-axis.
pub fn mirror_rects(rects: &[ERect]) -> Vec<ERect> {
    let m = |q: PhiPos| PhiPos::new(q.lambda_h, 3 - q.quarter % 4);
    rects
        .iter()
        .map(|x| ERect::new(x.lambda_e, [m(x.phi[1]), m(x.phi[0])]))
        .collect()
}

/// Splits one rectangle in two along an interior ellipse or hyperbola.
/// Returns `None` if the chosen rectangle has no room.
pub fn split_rects<R: Rng>(rects: &[ERect], rng: &mut R) -> Option<Vec<ERect>> {
    let k = rng.gen_range(0..rects.len());
    let x = rects[k];
    let mut out: Vec<ERect> = rects.to_vec();
    out.remove(k);
    let (e0, e1) = (x.lambda_e[0].min(x.lambda_e[1]), x.lambda_e[0].max(x.lambda_e[1]));
    let t = rng.gen_range(0.3..0.7);
    let cut = e0 + t * (e1 - e0);
    out.push(ERect::new([e0, cut], x.phi));
    out.push(ERect::new([cut, e1], x.phi));
    Some(out)
}

/// Moves one free parameter value (one arc's quadric) by a small amount,
/// keeping the order of all parameters and the special values `b`, `a` fixed.
pub fn deform_rects<R: Rng>(fam: &ConfocalFamily, rects: &[ERect], rng: &mut R) -> Option<Vec<ERect>> {
    let mut vals: Vec<f64> = Vec::new();
    for x in rects {
        vals.extend(x.lambda_e);
        vals.extend(x.phi.iter().map(|q| q.lambda_h));
    }
    vals.push(fam.b);
    vals.push(fam.a);
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let free: Vec<f64> = vals.iter().copied().filter(|&v| v != fam.b && v != fam.a).collect();
    if free.is_empty() {
        return None;
    }
    let v = free[rng.gen_range(0..free.len())];
    let k = vals.iter().position(|&x| x == v).unwrap();
    let lo = if k == 0 { v - 0.2 } else { vals[k - 1] };
    let hi = if k + 1 == vals.len() { v + 0.2 } else { vals[k + 1] };
    let nv = v + rng.gen_range(-0.3..0.3) * (hi - lo).min(0.2);
    if nv <= lo || nv >= hi {
        return None;
    }
    let sub = |x: f64| if x == v { nv } else { x };
    Some(
        rects
            .iter()
            .map(|x| {
                ERect::new(
                    [sub(x.lambda_e[0]), sub(x.lambda_e[1])],
                    [PhiPos::new(sub(x.phi[0].lambda_h), x.phi[0].quarter), PhiPos::new(sub(x.phi[1].lambda_h), x.phi[1].quarter)],
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{classify_elementary, Homogeneity};

    #[test]
    fn elementary_catalog_classifies() {
        for d in elementary() {
            let dom = d.build().unwrap();
            let rep = dom.validate();
            assert!(rep.is_valid(), "{}: {:?}", d.name, rep.violations);
            assert_eq!(dom.complexity, 0, "{}", d.name);
            assert_eq!(classify_elementary(&dom).unwrap(), d.expected.unwrap(), "{}", d.name);
        }
    }

    #[test]
    fn test_domains_have_expected_complexity() {
        for (d, k, h) in [
            (nc1(), 1, Homogeneity::Both),
            (nc2(), 2, Homogeneity::Both),
            (nc3(), 1, Homogeneity::HomogHyperbolic),
            (comb(), 6, Homogeneity::Both),
            (nc1_shifted(), 2, Homogeneity::Both),
            (nc1_symmetric(), 2, Homogeneity::HomogHyperbolic),
        ] {
            let dom = d.build().unwrap();
            let rep = dom.validate();
            assert!(rep.is_valid(), "{}: {:?}", d.name, rep.violations);
            assert_eq!(dom.complexity, k, "{}", d.name);
            assert_eq!(dom.homogeneity, h, "{}", d.name);
        }
    }

    #[test]
    fn full_ellipse_is_not_homogeneous() {
        let dom = elementary()[0].build().unwrap();
        assert_eq!(dom.homogeneity, Homogeneity::NonHomogeneous);
    }
}
