use billiard_core::build::domain_from_rects;
use billiard_core::catalog::{self, deform_rects, mirror_rects, split_rects};
use billiard_core::cells::build_cell_complex;
use billiard_core::decomposition::{equivalent, partition};
use billiard_core::diagram::bifurcation_diagram;
use billiard_core::domain::{classify_elementary, BilliardDomain};
use billiard_core::dynamics::{trajectory, PhasePoint};
use billiard_core::topology::regular_fiber_on;
use billiard_core::{
    ray_quadric_intersection, reflect, Branch, ConfocalFamily, QuadricKind, QuadricRef, Vec2,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fam() -> ConfocalFamily {
    ConfocalFamily::new(2.0, 1.0).unwrap()
}

fn interior_point(d: &BilliardDomain, rng: &mut ChaCha8Rng) -> Vec2 {
    let poly = d.boundary_polygon();
    let (x0, x1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.x), b.max(q.x)));
    let (y0, y1) = poly.iter().fold((f64::MAX, f64::MIN), |(a, b), q| (a.min(q.y), b.max(q.y)));
    loop {
        let x = Vec2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if d.contains(x) {
            return x;
        }
    }
}

const FLOW_DOMAINS: [&str; 5] = ["A2", "A'1", "B1", "NC1", "NC2"];

proptest! {
    #[test]
    fn unfolded_roundtrip(u in 0.01f64..2.5, phi in 0.0f64..std::f64::consts::TAU) {
        let f = fam();
        let p = f.from_unfolded(u, phi);
        let w = f.to_unfolded(p);
        let q = f.from_unfolded(w.u, w.phi);
        prop_assert!((p - q).norm() < 1e-9 * (1.0 + p.norm()));
        prop_assert!((w.u - u).abs() < 1e-8);
    }

    #[test]
    fn reflection_is_an_isometric_involution(
        vx in -3.0f64..3.0, vy in -3.0f64..3.0, t in 0.0f64..std::f64::consts::TAU,
    ) {
        let v = Vec2::new(vx, vy);
        let tan = Vec2::new(t.cos(), t.sin());
        let r = reflect(v, tan);
        prop_assert!((r.norm() - v.norm()).abs() < 1e-12 * (1.0 + v.norm()));
        prop_assert!((reflect(r, tan) - v).norm() < 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn ray_hits_lie_on_the_quadric(
        r in 0.0f64..0.9, s in 0.0f64..std::f64::consts::TAU, t in 0.0f64..std::f64::consts::TAU,
        lambda in -2.0f64..0.9,
    ) {
        let f = fam();
        let q = QuadricRef { lambda, kind: QuadricKind::Ellipse, branch: Branch::Full };
        let origin = Vec2::new(r * (2.0 - lambda).sqrt() * s.cos(), r * (1.0 - lambda).sqrt() * s.sin());
        let hits = ray_quadric_intersection(&f, origin, Vec2::new(t.cos(), t.sin()), &q);
        prop_assert_eq!(hits.len(), 1);
        let (_, p) = hits[0];
        prop_assert!(f.quadric_form(lambda, p).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn caustic_is_conserved(k in 0usize..FLOW_DOMAINS.len(), seed in any::<u64>()) {
        let d = catalog::by_name(FLOW_DOMAINS[k]).unwrap().build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = interior_point(&d, &mut rng);
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = PhasePoint::new(&d.family, x, Vec2::new(a.cos(), a.sin())).unwrap();
        let t = trajectory(&p, &d, 300).unwrap();
        prop_assert!(t.report.max_drift <= 1e-9, "drift {}", t.report.max_drift);
        prop_assert!(t.report.max_tangency_defect <= 1e-8, "defect {}", t.report.max_tangency_defect);
    }

    #[test]
    fn moves_keep_the_elementary_type(k in 0usize..12, moves in prop::collection::vec(0u8..3, 1..5), seed in any::<u64>()) {
        let cd = catalog::elementary().swap_remove(k);
        let want = cd.expected.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rects = cd.rects.clone();
        for m in moves {
            let next = match m {
                0 => (0..50).find_map(|_| deform_rects(&cd.family, &rects, &mut rng)),
                1 => Some(mirror_rects(&rects)),
                _ => split_rects(&rects, &mut rng),
            };
            if let Some(next) = next {
                rects = next;
            }
            let d = domain_from_rects(cd.family, &rects).unwrap();
            prop_assert_eq!(classify_elementary(&d).unwrap(), want);
        }
    }

    #[test]
    fn predicted_fiber_matches_oracle(k in 0usize..6, gap in any::<prop::sample::Index>(), t in 0.05f64..0.95) {
        let names = ["A2", "B2", "A'0", "NC1", "NC2", "NC3"];
        let d = catalog::by_name(names[k]).unwrap().build().unwrap();
        let p = partition(&d).unwrap();
        let crit = bifurcation_diagram(&d).lambdas();
        let i = gap.index(crit.len() - 1);
        let l = crit[i] + t * (crit[i + 1] - crit[i]);
        let f = regular_fiber_on(&d, &p, l, 2).unwrap();
        prop_assert_eq!(f.oracle.genera(), f.predicted.genera());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn equivalence_is_reflexive_and_mirror_invariant(k in 0usize..12) {
        let d = catalog::elementary().swap_remove(k).build().unwrap();
        let m = d.mirrored_x().unwrap();
        let (pd, pm) = (partition(&d).unwrap(), partition(&m).unwrap());
        prop_assert!(equivalent(&d, &d, &pd, &pd).unwrap());
        prop_assert!(equivalent(&d, &m, &pd, &pm).unwrap());
    }

    #[test]
    fn cell_complex_chi_survives_refinement(k in 0usize..12, c in any::<prop::sample::Index>()) {
        let d = catalog::elementary().swap_remove(k).build().unwrap();
        let p = partition(&d).unwrap();
        let crit = bifurcation_diagram(&d).lambdas();
        let c = crit[c.index(crit.len())];
        let a = build_cell_complex(&d, &p, c, 1).unwrap();
        let b = build_cell_complex(&d, &p, c, 2).unwrap();
        prop_assert!(a.validate().is_ok());
        prop_assert_eq!(a.chi(), b.chi());
        prop_assert_eq!(a.chi(), a.level_chi);
    }
}
