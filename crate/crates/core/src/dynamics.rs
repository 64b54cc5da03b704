//! The billiard flow at unit speed.

use num_complex::Complex64;
use rand::Rng;

use crate::domain::{AngleClass, BilliardDomain};
use crate::error::{integrity, invalid, Result};
use crate::geometry::{
    caustic_parameter, focus_incidence, ray_quadric_intersection, reflect, tangency_residual,
    CausticValue, ConfocalFamily, Vec2,
};

/// Hits closer than this (in arc length) to a corner count as corner hits.
pub const EPS_CORNER: f64 = 1e-9;
const ARC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Vec2,
    pub v: Vec2,
    pub caustic: CausticValue,
    pub on_boundary: Option<usize>,
}

impl PhasePoint {
    pub fn new(family: &ConfocalFamily, x: Vec2, v: Vec2) -> Result<Self> {
        let caustic = caustic_parameter(family, x, v)?;
        Ok(Self { x, v: v.normalized(), caustic, on_boundary: None })
    }

    pub fn lambda(&self) -> f64 {
        self.caustic.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEvent {
    Reflection(usize),
    QuarterCorner(usize),
    TerminatedAtSingularVertex(usize),
    /// Free flight ended inside the domain (only from [`flight`]).
    InteriorStop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub start: Vec2,
    pub end: Vec2,
    pub length: f64,
    pub velocity: Vec2,
    pub event: StepEvent,
}

fn nearest_hit(p: &PhasePoint, domain: &BilliardDomain) -> Option<(f64, Vec2, usize)> {
    let fam = &domain.family;
    let mut best: Option<(f64, Vec2, usize)> = None;
    for (k, arc) in domain.arcs.iter().enumerate() {
        for (t, q) in ray_quadric_intersection(fam, p.x, p.v, &arc.quadric) {
            if !arc.contains_point(fam, q, ARC_TOL) {
                continue;
            }
            if best.is_none_or(|b| t < b.0) {
                best = Some((t, q, k));
            }
            break;
        }
    }
    best
}

/// Advances `p` to the next boundary event. `None` as the next point means the
/// trajectory ended in a reflex corner.
pub fn step(p: &PhasePoint, domain: &BilliardDomain) -> Result<(TrajectoryStep, Option<PhasePoint>)> {
    let fam = &domain.family;
    let Some((t, hit, k)) = nearest_hit(p, domain) else {
        return integrity(format!(
            "no boundary ahead of x=({:.17e}, {:.17e}) v=({:.17e}, {:.17e})",
            p.x.x, p.x.y, p.v.x, p.v.y
        ));
    };
    let corner = domain
        .corners
        .iter()
        .enumerate()
        .find(|(_, c)| c.point.dist(hit) <= EPS_CORNER);
    let mut seg = TrajectoryStep { start: p.x, end: hit, length: t, velocity: p.v, event: StepEvent::Reflection(k) };
    if let Some((ci, c)) = corner {
        seg.end = c.point;
        return Ok(match c.angle_class {
            AngleClass::ThreeQuarter => {
                seg.event = StepEvent::TerminatedAtSingularVertex(ci);
                (seg, None)
            }
            AngleClass::Quarter => {
                seg.event = StepEvent::QuarterCorner(ci);
                let next = PhasePoint {
                    x: c.point,
                    v: -p.v,
                    caustic: caustic_parameter(fam, c.point, -p.v)?,
                    on_boundary: Some(c.incident_arcs.1),
                };
                (seg, Some(next))
            }
        });
    }
    let normal = domain.arcs[k].normal_at(fam, hit);
    let v = reflect(p.v, normal.perp()).normalized();
    let next = PhasePoint { x: hit, v, caustic: caustic_parameter(fam, hit, v)?, on_boundary: Some(k) };
    Ok((seg, Some(next)))
}

/// Free flight for at most `distance`; stops early at the boundary.
pub fn flight(p: &PhasePoint, domain: &BilliardDomain, distance: f64) -> Result<(TrajectoryStep, Option<PhasePoint>)> {
    let (seg, next) = step(p, domain)?;
    if seg.length <= distance {
        return Ok((seg, next));
    }
    let x = p.x + distance * p.v;
    let stop = TrajectoryStep { end: x, length: distance, event: StepEvent::InteriorStop, ..seg };
    Ok((stop, Some(PhasePoint { x, on_boundary: None, ..*p })))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    StepLimit,
    SingularVertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub initial_lambda: f64,
    /// `max |λ_k − λ_0| / max(|λ_0|, a)`.
    pub max_drift: f64,
    /// Largest distance of a segment's line from the initial caustic
    /// (from the nearer focus when `λ_0 = b`).
    pub max_tangency_defect: f64,
    pub termination: Termination,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub report: ConservationReport,
}

pub fn trajectory(p0: &PhasePoint, domain: &BilliardDomain, max_steps: usize) -> Result<Trajectory> {
    if max_steps == 0 {
        return invalid("max_steps must be at least 1");
    }
    let fam = &domain.family;
    let l0 = p0.caustic.lambda;
    let scale = l0.abs().max(fam.a);
    let focal = l0 == fam.b;
    let mut report = ConservationReport {
        initial_lambda: l0,
        max_drift: 0.0,
        max_tangency_defect: 0.0,
        termination: Termination::StepLimit,
        steps: 0,
    };
    let mut steps = Vec::with_capacity(max_steps);
    let mut p = *p0;
    for _ in 0..max_steps {
        let defect = if focal {
            focus_incidence(fam, p.x, p.v)
        } else {
            tangency_residual(fam, p.x, p.v, l0)
        };
        report.max_tangency_defect = report.max_tangency_defect.max(defect);
        let (seg, next) = step(&p, domain)?;
        steps.push(seg);
        report.steps += 1;
        match next {
            Some(n) => {
                report.max_drift = report.max_drift.max((n.caustic.lambda - l0).abs() / scale);
                p = n;
            }
            None => {
                if let StepEvent::TerminatedAtSingularVertex(c) = seg.event {
                    report.termination = Termination::SingularVertex(c);
                }
                break;
            }
        }
    }
    Ok(Trajectory { steps, report })
}

/// Velocity branch `(su, sφ)`: signs of `u̇` and `φ̇` in unfolded coordinates.
pub type BranchSigns = (i8, i8);

/// Squared momenta `(p_u², p_φ²)` at unfolded `(u, φ)` on level λ.
pub fn momenta_sq(family: &ConfocalFamily, u: f64, phi: f64, lambda: f64) -> (f64, f64) {
    let c2 = family.a - family.b;
    let sh = u.sinh();
    let sn = phi.sin();
    (c2 * sh * sh + (lambda - family.b), c2 * sn * sn - (lambda - family.b))
}

/// Unit velocity of branch `s` at unfolded `(u, φ)` on level λ, if the point is
/// in the region of possible motion.
pub fn branch_velocity(family: &ConfocalFamily, u: f64, phi: f64, lambda: f64, s: BranchSigns) -> Option<Vec2> {
    let (pu2, pf2) = momenta_sq(family, u, phi, lambda);
    if pu2 < 0.0 || pf2 < 0.0 {
        return None;
    }
    let dw = Complex64::new(s.0 as f64 * pu2.sqrt(), s.1 as f64 * pf2.sqrt());
    let dz = Complex64::new(u, phi).sinh() * dw;
    let n = dz.norm();
    (n > 0.0).then(|| Vec2::new(dz.re / n, dz.im / n))
}

/// Branch of `(x, v)` in the unfolded chart `(u, φ)` returned by `to_unfolded`.
pub fn branch_of(u: f64, phi: f64, v: Vec2) -> (f64, f64) {
    let s = Complex64::new(u, phi).sinh();
    let dw = Complex64::new(v.x, v.y) / s;
    (dw.re, dw.im)
}

/// Uniform random point of the domain inside the region of possible motion,
/// with a uniformly chosen velocity branch.
pub fn sample_fiber_point<R: Rng>(domain: &BilliardDomain, lambda: f64, rng: &mut R) -> Option<PhasePoint> {
    let fam = &domain.family;
    let poly = domain.boundary_polygon();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for q in poly {
        x0 = x0.min(q.x);
        x1 = x1.max(q.x);
        y0 = y0.min(q.y);
        y1 = y1.max(q.y);
    }
    for _ in 0..100_000 {
        let x = Vec2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if !domain.contains(x) {
            continue;
        }
        let w = fam.to_unfolded(x);
        let s = (if rng.gen() { 1 } else { -1 }, if rng.gen() { 1 } else { -1 });
        let Some(v) = branch_velocity(fam, w.u, w.phi, lambda, s) else { continue };
        let (pu2, pf2) = momenta_sq(fam, w.u, w.phi, lambda);
        if pu2 < 1e-8 || pf2 < 1e-8 {
            continue;
        }
        if let Ok(p) = PhasePoint::new(fam, x, v) {
            return Some(p);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn a2() -> BilliardDomain {
        catalog::elementary()[0].build().unwrap()
    }

    #[test]
    fn reflection_keeps_caustic_at_top_of_ellipse() {
        let d = a2();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = PhasePoint::new(&d.family, Vec2::new(0.0, 0.5), Vec2::new(0.0, 1.0)).unwrap();
        let (seg, next) = step(&p, &d).unwrap();
        assert!(seg.end.dist(Vec2::new(0.0, 1.0)) < 1e-12);
        let before = caustic_parameter(&d.family, Vec2::new(0.0, 1.0), Vec2::new(h, -h)).unwrap();
        let after = caustic_parameter(&d.family, Vec2::new(0.0, 1.0), Vec2::new(h, h)).unwrap();
        assert!((before.raw_lambda - 0.5).abs() < 1e-12 && (after.raw_lambda - 0.5).abs() < 1e-12);
        assert!((before.lambda - 1.0).abs() < 1e-12 && (after.lambda - 1.0).abs() < 1e-12);
        assert!(next.unwrap().v.dist(Vec2::new(0.0, -1.0)) < 1e-12);
    }

    #[test]
    fn branch_velocity_has_requested_caustic() {
        let f = catalog::standard_family();
        for &(u, phi, l) in &[(0.3, 0.7, 0.5), (0.9, 2.0, 0.2), (0.2, 1.1, 1.4), (0.5, 4.0, 1.2)] {
            for s in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let Some(v) = branch_velocity(&f, u, phi, l, s) else { continue };
                let x = f.from_unfolded(u, phi);
                let c = caustic_parameter(&f, x, v).unwrap();
                assert!((c.lambda - l).abs() < 1e-12, "{u} {phi} {l} {s:?}: {}", c.lambda);
                let (du, dp) = branch_of(u, phi, v);
                assert_eq!((du.signum() as i8, dp.signum() as i8), s);
            }
        }
    }

    #[test]
    fn corner_rules() {
        let d = catalog::nc1().build().unwrap();
        let f = d.family;
        let reflex = d.reflex_corners().next().unwrap().point;
        let quarter = d.corners.iter().find(|c| c.angle_class == AngleClass::Quarter).unwrap().point;
        let inside = f.from_unfolded(0.5 * (f.u_of(0.3) + f.u_of(0.6)), f.phi0_of(1.35));
        let p = PhasePoint::new(&f, inside, reflex - inside).unwrap();
        let t = trajectory(&p, &d, 10).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(matches!(t.report.termination, Termination::SingularVertex(_)));
        let p = PhasePoint::new(&f, inside, quarter - inside).unwrap();
        let (seg, next) = step(&p, &d).unwrap();
        assert!(matches!(seg.event, StepEvent::QuarterCorner(_)));
        assert!(next.unwrap().v.dist(-p.v) < 1e-15);
    }

    #[test]
    fn random_trajectories_conserve_caustic() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let doms = [
            catalog::elementary()[0].clone(),
            catalog::elementary()[3].clone(),
            catalog::elementary()[6].clone(),
            catalog::nc1(),
            catalog::nc2(),
        ];
        for cd in doms {
            let d = cd.build().unwrap();
            for _ in 0..20 {
                let lam = rng.gen_range(-0.5..1.9);
                let Some(p) = sample_fiber_point(&d, lam, &mut rng) else { continue };
                let t = trajectory(&p, &d, 1000).unwrap();
                assert!(t.report.max_drift <= 1e-9, "{}: drift {}", cd.name, t.report.max_drift);
                assert!(t.report.max_tangency_defect <= 1e-8, "{}: defect {}", cd.name, t.report.max_tangency_defect);
            }
        }
    }
}
