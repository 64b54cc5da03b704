//! JSON domain files.

use billiard_core::domain::{BilliardDomain, BoundaryArc, Orientation};
use billiard_core::{Branch, ConfocalFamily, QuadricKind, QuadricRef};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRecord {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcRecord {
    pub lambda: f64,
    pub kind: QuadricKind,
    pub branch: Branch,
    pub range: [f64; 2],
    pub signs: [i8; 2],
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub family: FamilyRecord,
    pub arcs: Vec<ArcRecord>,
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_domain(d: &BilliardDomain) -> Self {
        let arcs = d
            .arcs
            .iter()
            .map(|a| ArcRecord {
                lambda: a.quadric.lambda,
                kind: a.quadric.kind,
                branch: a.quadric.branch,
                range: a.range,
                signs: a.signs,
                orientation: a.orientation,
            })
            .collect();
        Self { family: FamilyRecord { a: d.family.a, b: d.family.b }, arcs }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("domain files serialize");
        s.push('\n');
        s
    }

    /// Builds the domain. The declared kind of each arc must match its λ.
    pub fn build(&self) -> Result<BilliardDomain, CliError> {
        let fam = ConfocalFamily::new(self.family.a, self.family.b).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (k, r) in self.arcs.iter().enumerate() {
            let q = QuadricRef::new(&fam, r.lambda, r.branch).map_err(|e| CliError::Parse(format!("arc {k}: {e}")))?;
            if q.kind != r.kind {
                return Err(CliError::Parse(format!(
                    "arc {k}: lambda {} is a {:?}, not a {:?}",
                    r.lambda, q.kind, r.kind
                )));
            }
            arcs.push(BoundaryArc { quadric: q, range: r.range, signs: r.signs, orientation: r.orientation });
        }
        BilliardDomain::from_arcs(fam, arcs).map_err(|e| CliError::Parse(e.to_string()))
    }
}
