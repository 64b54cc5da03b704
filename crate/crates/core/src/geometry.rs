//! Analytic geometry of the confocal family
//! `(b−λ)x² + (a−λ)y² = (a−λ)(b−λ)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Absolute tolerance for incidence, tangency and corner tests.
pub const EPS_GEO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// The pair `a > b > 0` fixing the confocal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfocalFamily {
    pub a: f64,
    pub b: f64,
}

impl ConfocalFamily {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > b && b > 0.0) {
            return invalid(format!("family needs a > b > 0, got a={a}, b={b}"));
        }
        Ok(Self { a, b })
    }

    /// Focal half-distance `c = sqrt(a − b)`.
    pub fn c(&self) -> f64 {
        (self.a - self.b).sqrt()
    }

    pub fn foci(&self) -> [Vec2; 2] {
        let c = self.c();
        [Vec2::new(-c, 0.0), Vec2::new(c, 0.0)]
    }

    pub fn kind_of(&self, lambda: f64) -> Option<QuadricKind> {
        if lambda < self.b {
            Some(QuadricKind::Ellipse)
        } else if lambda == self.b {
            Some(QuadricKind::Degenerate)
        } else if lambda < self.a {
            Some(QuadricKind::Hyperbola)
        } else if lambda == self.a {
            Some(QuadricKind::VerticalLine)
        } else {
            None
        }
    }

    /// `(b−λ)x² + (a−λ)y² − (a−λ)(b−λ)`; zero on quadric λ.
    pub fn quadric_form(&self, lambda: f64, p: Vec2) -> f64 {
        let (a, b) = (self.a, self.b);
        (b - lambda) * p.x * p.x + (a - lambda) * p.y * p.y - (a - lambda) * (b - lambda)
    }

    /// Planar point of unfolded coordinates: `x + iy = c·cosh(u + iφ)`.
    pub fn from_unfolded(&self, u: f64, phi: f64) -> Vec2 {
        let c = self.c();
        Vec2::new(c * u.cosh() * phi.cos(), c * u.sinh() * phi.sin())
    }

    /// Inverse of [`from_unfolded`](Self::from_unfolded) with `u ≥ 0`, `φ ∈ [0, 2π)`.
    ///
    /// Points of the inter-focal segment get the upper-lip angle `φ ∈ [0, π]`.
    pub fn to_unfolded(&self, p: Vec2) -> Unfolded {
        let z = Complex64::new(p.x, p.y) / self.c();
        let mut w = z.acosh();
        if w.re < 0.0 {
            w = -w;
        }
        let mut phi = w.im;
        if w.re == 0.0 {
            phi = phi.abs();
        }
        let tau = std::f64::consts::TAU;
        phi = phi.rem_euclid(tau);
        if phi >= tau {
            phi = 0.0;
        }
        Unfolded { u: w.re.max(0.0), phi }
    }

    /// Unfolded `u` of the ellipse `λ_e` (`λ_e ≤ b`).
    pub fn u_of(&self, lambda_e: f64) -> f64 {
        let r = ((self.a - lambda_e) / (self.a - self.b)).max(1.0).sqrt();
        r.acosh()
    }

    /// Ellipse parameter through unfolded `u`.
    pub fn lambda_of_u(&self, u: f64) -> f64 {
        let ch = u.cosh();
        self.a - (self.a - self.b) * ch * ch
    }

    /// First-quarter unfolded angle `φ₀ ∈ [0, π/2]` of the hyperbola `λ_h`.
    pub fn phi0_of(&self, lambda_h: f64) -> f64 {
        let r = ((self.a - lambda_h) / (self.a - self.b)).clamp(0.0, 1.0).sqrt();
        r.acos()
    }

    /// Hyperbola parameter through unfolded angle `φ`.
    pub fn lambda_of_phi(&self, phi: f64) -> f64 {
        let co = phi.cos();
        self.a - (self.a - self.b) * co * co
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unfolded {
    pub u: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadricKind {
    Ellipse,
    Degenerate,
    Hyperbola,
    VerticalLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Full,
    Left,
    Right,
    BetweenFoci,
    OutsideLeftRay,
    OutsideRightRay,
}

/// A quadric of the family, possibly restricted to one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricRef {
    pub lambda: f64,
    pub kind: QuadricKind,
    pub branch: Branch,
}

impl QuadricRef {
    pub fn new(family: &ConfocalFamily, lambda: f64, branch: Branch) -> Result<Self> {
        let Some(kind) = family.kind_of(lambda) else {
            return invalid(format!("lambda {lambda} exceeds a = {}", family.a));
        };
        let ok = match kind {
            QuadricKind::Ellipse | QuadricKind::VerticalLine => branch == Branch::Full,
            QuadricKind::Hyperbola => {
                matches!(branch, Branch::Full | Branch::Left | Branch::Right)
            }
            QuadricKind::Degenerate => !matches!(branch, Branch::Left | Branch::Right),
        };
        if !ok {
            return invalid(format!("branch {branch:?} not allowed for {kind:?}"));
        }
        Ok(Self { lambda, kind, branch })
    }

    pub fn ellipse(family: &ConfocalFamily, lambda: f64) -> Result<Self> {
        if lambda >= family.b {
            return invalid(format!("ellipse needs lambda < b, got {lambda}"));
        }
        Self::new(family, lambda, Branch::Full)
    }

    pub fn hyperbola(family: &ConfocalFamily, lambda: f64, branch: Branch) -> Result<Self> {
        if !(lambda > family.b && lambda <= family.a) {
            return invalid(format!("hyperbola needs b < lambda <= a, got {lambda}"));
        }
        let branch = if lambda == family.a { Branch::Full } else { branch };
        Self::new(family, lambda, branch)
    }

    /// Does a point lying on the full quadric belong to this branch?
    pub fn branch_contains(&self, family: &ConfocalFamily, p: Vec2) -> bool {
        let c = family.c();
        match self.branch {
            Branch::Full => true,
            Branch::Left => p.x <= 0.0,
            Branch::Right => p.x >= 0.0,
            Branch::BetweenFoci => p.x.abs() <= c + EPS_GEO,
            Branch::OutsideLeftRay => p.x <= -c + EPS_GEO,
            Branch::OutsideRightRay => p.x >= c - EPS_GEO,
        }
    }
}

/// Elliptic coordinates: the ellipse and hyperbola of the family through a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub lambda_e: f64,
    pub lambda_h: f64,
}

/// Both family parameters through `p`, with `λ_e ≤ b ≤ λ_h ≤ a`.
pub fn elliptic_coords(family: &ConfocalFamily, p: Vec2) -> EllipticCoords {
    let (a, b) = (family.a, family.b);
    let (x2, y2) = (p.x * p.x, p.y * p.y);
    if p.y == 0.0 {
        let t = a - x2;
        return EllipticCoords { lambda_e: t.min(b), lambda_h: t.max(b).min(a) };
    }
    if p.x == 0.0 {
        return EllipticCoords { lambda_e: b - y2, lambda_h: a };
    }
    // λ² − Sλ + P = 0 with S = a+b−x²−y², P = ab − bx² − ay².
    let s = a + b - x2 - y2;
    let prod = a * b - b * x2 - a * y2;
    let disc = (s * s - 4.0 * prod).max(0.0).sqrt();
    let (lo, hi) = if s >= 0.0 {
        let hi = 0.5 * (s + disc);
        (prod / hi, hi)
    } else {
        let lo = 0.5 * (s - disc);
        (lo, prod / lo)
    };
    EllipticCoords { lambda_e: lo.min(b), lambda_h: hi.clamp(b, a) }
}

/// The caustic integral of the line through `x` with direction `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausticValue {
    /// Family parameter of the quadric tangent to the line.
    pub lambda: f64,
    /// `Λ = ẋ²/a + ẏ²/b − (ẋy − xẏ)²/(ab)` at unit speed.
    pub raw_lambda: f64,
}

pub fn caustic_parameter(family: &ConfocalFamily, x: Vec2, v: Vec2) -> Result<CausticValue> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return invalid("caustic parameter needs a nonzero velocity");
    }
    let v = (1.0 / n) * v;
    let (a, b) = (family.a, family.b);
    let m = v.x * x.y - x.x * v.y;
    let raw = v.x * v.x / a + v.y * v.y / b - m * m / (a * b);
    let lambda = a * v.y * v.y + b * v.x * v.x - m * m;
    Ok(CausticValue { lambda, raw_lambda: raw })
}

/// All hits of the open ray `origin + t·dir`, `t > EPS_GEO`, with branch `q`,
/// sorted by `t`.
pub fn ray_quadric_intersection(
    family: &ConfocalFamily,
    origin: Vec2,
    dir: Vec2,
    q: &QuadricRef,
) -> Vec<(f64, Vec2)> {
    let (a, b, l) = (family.a, family.b, q.lambda);
    let mut ts: Vec<f64> = Vec::with_capacity(2);
    match q.kind {
        QuadricKind::Degenerate => {
            if dir.y != 0.0 {
                ts.push(-origin.y / dir.y);
            }
        }
        QuadricKind::VerticalLine => {
            if dir.x != 0.0 {
                ts.push(-origin.x / dir.x);
            }
        }
        _ => {
            let qa = (b - l) * dir.x * dir.x + (a - l) * dir.y * dir.y;
            let qb = 2.0 * ((b - l) * origin.x * dir.x + (a - l) * origin.y * dir.y);
            let qc = family.quadric_form(l, origin);
            ts.extend(solve_quadratic(qa, qb, qc));
        }
    }
    let mut hits: Vec<(f64, Vec2)> = ts
        .into_iter()
        .filter(|t| *t > EPS_GEO && t.is_finite())
        .map(|t| (t, origin + t * dir))
        .filter(|(_, p)| q.branch_contains(family, *p))
        .collect();
    hits.sort_by(|p, q| p.0.total_cmp(&q.0));
    hits
}

/// Real roots of `a t² + b t + c`, numerically stable.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-14 * b * b {
            return vec![-b / (2.0 * a)];
        }
        return Vec::new();
    }
    let sq = disc.sqrt();
    let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
    let qq = -0.5 * (b + sgn * sq);
    let r1 = qq / a;
    let r2 = if qq != 0.0 { c / qq } else { r1 };
    vec![r1, r2]
}

/// Result of a tangency audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tangency {
    /// Distance between the line and the nearest parallel tangent line of quadric λ.
    Tangent { lambda: f64, residual: f64 },
    /// λ = b: the line should pass through a focus; residual is the distance to the nearer one.
    Focal { residual: f64 },
}

impl Tangency {
    pub fn residual(&self) -> f64 {
        match *self {
            Tangency::Tangent { residual, .. } | Tangency::Focal { residual } => residual,
        }
    }
}

/// Audits the line through `(x, v)` against its caustic.
pub fn tangency_defect(family: &ConfocalFamily, x: Vec2, v: Vec2) -> Result<Tangency> {
    let cv = caustic_parameter(family, x, v)?;
    if (cv.lambda - family.b).abs() <= 1e-12 * family.a {
        return Ok(Tangency::Focal { residual: focus_incidence(family, x, v) });
    }
    Ok(Tangency::Tangent { lambda: cv.lambda, residual: tangency_residual(family, x, v, cv.lambda) })
}

/// Distance between the line through `(x, v)` and the nearest tangent line of
/// quadric `lambda` with the same direction. Uses the dual conic, so it does not
/// rely on the caustic formula.
pub fn tangency_residual(family: &ConfocalFamily, x: Vec2, v: Vec2, lambda: f64) -> f64 {
    let v = v.normalized();
    let n = v.perp();
    let d = n.dot(x);
    let s = (family.a - lambda) * n.x * n.x + (family.b - lambda) * n.y * n.y;
    if s < 0.0 {
        return (-s).sqrt() + d.abs();
    }
    let r = s.sqrt();
    (r - d).abs().min((r + d).abs())
}

/// Distance from the line through `(x, v)` to the nearer focus.
pub fn focus_incidence(family: &ConfocalFamily, x: Vec2, v: Vec2) -> f64 {
    let n = v.normalized().perp();
    family
        .foci()
        .iter()
        .map(|f| n.dot(*f - x).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Predicate for the region of possible motion at caustic value λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionRegionPredicate {
    pub family: ConfocalFamily,
    pub lambda: f64,
}

impl MotionRegionPredicate {
    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_tol(p, 0.0)
    }

    /// Membership with an absolute slack on the defining quadric form.
    pub fn contains_tol(&self, p: Vec2, tol: f64) -> bool {
        let (a, b, l) = (self.family.a, self.family.b, self.lambda);
        if l == b {
            return true;
        }
        if l == a {
            return p.x.abs() <= tol;
        }
        let f = p.x * p.x / (a - l) + p.y * p.y / (b - l) - 1.0;
        if l < b {
            f >= -tol
        } else {
            f <= tol
        }
    }
}

pub fn classify_motion_region(family: &ConfocalFamily, lambda: f64) -> Result<MotionRegionPredicate> {
    if !(lambda <= family.a) {
        return invalid(format!("lambda {lambda} exceeds a = {}", family.a));
    }
    Ok(MotionRegionPredicate { family: *family, lambda })
}

/// Mirror reflection of `v` across the line spanned by `tangent`.
pub fn reflect(v: Vec2, tangent: Vec2) -> Vec2 {
    let t = tangent.normalized();
    let along = v.dot(t);
    (2.0 * along) * t - v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fam() -> ConfocalFamily {
        ConfocalFamily::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_family() {
        assert!(ConfocalFamily::new(1.0, 2.0).is_err());
        assert!(ConfocalFamily::new(2.0, 0.0).is_err());
    }

    #[test]
    fn elliptic_coords_examples() {
        let f = fam();
        let e = elliptic_coords(&f, Vec2::new(0.0, 1.0));
        assert_eq!((e.lambda_e, e.lambda_h), (0.0, 2.0));
        let e = elliptic_coords(&f, Vec2::new(1.0, 0.0));
        assert_eq!((e.lambda_e, e.lambda_h), (1.0, 1.0));
        let e = elliptic_coords(&f, Vec2::new(1.2, 0.0));
        assert_abs_diff_eq!(e.lambda_e, 0.56, epsilon = 1e-15);
        assert_eq!(e.lambda_h, 1.0);
    }

    #[test]
    fn caustic_examples() {
        let f = fam();
        let cv = caustic_parameter(&f, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(cv.lambda, 1.0);
        assert_eq!(cv.raw_lambda, 0.5);
        let x = Vec2::new(1.5f64.sqrt(), 0.0);
        let cv = caustic_parameter(&f, x, Vec2::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(cv.lambda, 0.5, epsilon = 1e-15);
        let cv3 = caustic_parameter(&f, x, Vec2::new(0.0, 3.0)).unwrap();
        assert_eq!(cv.lambda, cv3.lambda);
        assert!(caustic_parameter(&f, x, Vec2::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn ray_examples() {
        let f = fam();
        let q = QuadricRef::ellipse(&f, 0.0).unwrap();
        let hits = ray_quadric_intersection(&f, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), &q);
        assert_eq!(hits.len(), 1);
        assert_abs_diff_eq!(hits[0].0, 2f64.sqrt(), epsilon = 1e-15);
        let hits = ray_quadric_intersection(&f, Vec2::new(2.0, -5.0), Vec2::new(0.0, 1.0), &q);
        assert!(hits.is_empty());
        let start = Vec2::new(0.0, 1.0);
        let hits = ray_quadric_intersection(&f, start, Vec2::new(1.0, 0.0), &q);
        assert!(hits.is_empty());
    }

    #[test]
    fn degenerate_branches() {
        let f = fam();
        let seg = QuadricRef::new(&f, 1.0, Branch::BetweenFoci).unwrap();
        let ray = QuadricRef::new(&f, 1.0, Branch::OutsideRightRay).unwrap();
        let o = Vec2::new(0.5, 1.0);
        let d = Vec2::new(0.0, -1.0);
        assert_eq!(ray_quadric_intersection(&f, o, d, &seg).len(), 1);
        assert!(ray_quadric_intersection(&f, o, d, &ray).is_empty());
        assert!(QuadricRef::new(&f, 0.5, Branch::Left).is_err());
    }

    #[test]
    fn tangency_examples() {
        let f = fam();
        let x = Vec2::new(1.5f64.sqrt(), 0.0);
        let t = tangency_defect(&f, x, Vec2::new(0.0, 1.0)).unwrap();
        assert!(t.residual() < 1e-9);
        let t = tangency_defect(&f, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!(matches!(t, Tangency::Focal { residual } if residual < 1e-12));
    }

    #[test]
    fn region_examples() {
        let f = fam();
        assert!(!classify_motion_region(&f, 0.5).unwrap().contains(Vec2::new(0.0, 0.0)));
        assert!(classify_motion_region(&f, 1.0).unwrap().contains(Vec2::new(0.3, 0.1)));
        assert!(classify_motion_region(&f, 1.5).unwrap().contains(Vec2::new(0.0, 0.0)));
        assert!(classify_motion_region(&f, 2.5).is_err());
    }

    #[test]
    fn reflect_examples() {
        let h = 0.5f64.sqrt();
        let r = reflect(Vec2::new(h, -h), Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(r.x, h, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, h, epsilon = 1e-15);
        let r = reflect(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(r, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn unfolded_roundtrip() {
        let f = fam();
        for &(u, phi) in &[(0.3, 0.4), (1.0, 2.0), (0.7, 4.0), (0.2, 5.9), (0.0, 1.1)] {
            let p = f.from_unfolded(u, phi);
            let w = f.to_unfolded(p);
            assert_abs_diff_eq!(w.u, u, epsilon = 1e-12);
            assert_abs_diff_eq!(w.phi, phi, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(f.lambda_of_u(f.u_of(0.3)), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(f.lambda_of_phi(f.phi0_of(1.5)), 1.5, epsilon = 1e-14);
    }
}
