//! Critical values of the caustic integral.

use serde::Serialize;

use crate::domain::{AngleClass, BilliardDomain};
use crate::geometry::QuadricKind;

const SAME: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    LocalMin,
    LocalMax,
    SingularVertexLevel,
    SaddleB,
}

impl CriticalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalKind::LocalMin => "local_min",
            CriticalKind::LocalMax => "local_max",
            CriticalKind::SingularVertexLevel => "singular_vertex_level",
            CriticalKind::SaddleB => "saddle_b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalSource {
    Arc(usize),
    Corner(usize),
    YAxis,
    FocalLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValue {
    pub lambda: f64,
    pub kind: CriticalKind,
    pub sources: Vec<CriticalSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationDiagram {
    /// Sorted by λ, one entry per distinct value.
    pub critical_values: Vec<CriticalValue>,
}

impl BifurcationDiagram {
    pub fn lambdas(&self) -> Vec<f64> {
        self.critical_values.iter().map(|c| c.lambda).collect()
    }

    pub fn find(&self, lambda: f64) -> Option<&CriticalValue> {
        self.critical_values.iter().find(|c| (c.lambda - lambda).abs() <= SAME)
    }

    pub fn is_critical(&self, lambda: f64) -> bool {
        self.find(lambda).is_some()
    }

    pub fn count(&self, kind: CriticalKind) -> usize {
        self.critical_values.iter().filter(|c| c.kind == kind).count()
    }

    /// Smallest gap between consecutive critical values (infinite for one value).
    pub fn min_gap(&self) -> f64 {
        self.critical_values
            .windows(2)
            .map(|w| w[1].lambda - w[0].lambda)
            .fold(f64::INFINITY, f64::min)
    }

    /// Strip width and sampling offset: a quarter of the smallest gap.
    pub fn epsilon(&self) -> f64 {
        let g = self.min_gap();
        if g.is_finite() {
            g / 4.0
        } else {
            0.25
        }
    }

    /// One regular level strictly between each pair of consecutive critical
    /// values, plus one below the first and one above the last.
    pub fn regular_samples(&self) -> Vec<f64> {
        let v = self.lambdas();
        let mut out = Vec::new();
        if let (Some(first), Some(last)) = (v.first(), v.last()) {
            out.push(first - self.epsilon());
            out.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            out.push(last + self.epsilon());
        }
        out
    }
}

/// Collects the critical values: parameters of the boundary ellipse arcs
/// (minima) and hyperbola arcs (maxima) that carry no 3π/2 vertex, `a` when the
/// domain meets the y-axis, `b`, and both parameters through each 3π/2 vertex.
pub fn bifurcation_diagram(domain: &BilliardDomain) -> BifurcationDiagram {
    let fam = &domain.family;
    let mut raw: Vec<(f64, CriticalKind, CriticalSource)> = Vec::new();
    let mut singular_arc = vec![false; domain.arcs.len()];
    for (ci, c) in domain.corners.iter().enumerate() {
        if c.angle_class != AngleClass::ThreeQuarter {
            continue;
        }
        singular_arc[c.incident_arcs.0] = true;
        singular_arc[c.incident_arcs.1] = true;
        raw.push((c.lambda_e, CriticalKind::SingularVertexLevel, CriticalSource::Corner(ci)));
        raw.push((c.lambda_h, CriticalKind::SingularVertexLevel, CriticalSource::Corner(ci)));
    }
    for (k, arc) in domain.arcs.iter().enumerate() {
        if singular_arc[k] {
            continue;
        }
        let kind = match arc.quadric.kind {
            QuadricKind::Ellipse => CriticalKind::LocalMin,
            QuadricKind::Hyperbola | QuadricKind::VerticalLine => CriticalKind::LocalMax,
            QuadricKind::Degenerate => continue,
        };
        raw.push((arc.quadric.lambda, kind, CriticalSource::Arc(k)));
    }
    if domain.meets_y_axis() {
        raw.push((fam.a, CriticalKind::LocalMax, CriticalSource::YAxis));
    }
    raw.push((fam.b, CriticalKind::SaddleB, CriticalSource::FocalLevel));
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut out: Vec<CriticalValue> = Vec::new();
    for (l, kind, src) in raw {
        match out.last_mut() {
            Some(last) if (last.lambda - l).abs() <= SAME => {
                last.kind = last.kind.max(kind);
                if !last.sources.contains(&src) {
                    last.sources.push(src);
                }
            }
            _ => out.push(CriticalValue { lambda: l, kind, sources: vec![src] }),
        }
    }
    for cv in &mut out {
        if cv.kind == CriticalKind::SaddleB {
            cv.lambda = fam.b;
        }
    }
    BifurcationDiagram { critical_values: out }
}
