//! Fixtures shared by the benchmarks.

use billiard_core::catalog;
use billiard_core::decomposition::{partition, Partition};
use billiard_core::domain::BilliardDomain;
use billiard_core::dynamics::PhasePoint;
use billiard_core::Vec2;

pub fn fixture(name: &str) -> (BilliardDomain, Partition) {
    let d = catalog::by_name(name).expect("catalog name").build().expect("catalog domain builds");
    let p = partition(&d).expect("catalog domain partitions");
    (d, p)
}

/// A fixed interior phase point on a generic level.
pub fn start(d: &BilliardDomain) -> PhasePoint {
    let poly = d.boundary_polygon();
    let n = poly.len() as f64;
    let c = poly.iter().fold(Vec2::new(0.0, 0.0), |a, q| Vec2::new(a.x + q.x / n, a.y + q.y / n));
    let x = if d.contains(c) { c } else { Vec2::new(0.5 * (c.x + poly[0].x), 0.5 * (c.y + poly[0].y)) };
    PhasePoint::new(&d.family, x, Vec2::new(0.6, 0.8)).expect("generic direction")
}
