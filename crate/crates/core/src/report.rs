//! Serialized report documents.

use serde::{Deserialize, Serialize};

use crate::error::OmegaError;
use crate::index::{OmegaResult, SpectralReport};

pub const OMEGA_SCHEMA: &str = "omega-report-v1";
pub const SWEEP_SCHEMA: &str = "omega-sweep-v1";
pub const SPHERE_SCHEMA: &str = "sphere-report-v1";
pub const BOUNDS_SCHEMA: &str = "bounds-report-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutEntry {
    pub n: usize,
    pub m_n: usize,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scaling {
    pub lambda_a: f64,
    pub mu_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaReportDoc {
    pub schema_version: String,
    pub omega: i64,
    pub cuts: Vec<CutEntry>,
    pub epsilon: f64,
    pub defect: f64,
    pub theorem_bound: f64,
    pub orientation: String,
    pub scaling: Scaling,
    pub warnings: Vec<String>,
}

impl OmegaReportDoc {
    pub fn from_result(result: &OmegaResult) -> Self {
        Self {
            schema_version: OMEGA_SCHEMA.to_string(),
            omega: result.omega,
            cuts: result.reports.iter().map(cut_entry).collect(),
            epsilon: result.epsilon,
            defect: result.defect,
            theorem_bound: result.theorem_bound,
            orientation: result.orientation.to_string(),
            scaling: Scaling { lambda_a: result.lambda_a, mu_b: result.mu_b },
            warnings: result.warnings.clone(),
        }
    }

    /// Schema tag matches and every cut reproduces `omega`.
    pub fn is_consistent(&self) -> bool {
        self.schema_version == OMEGA_SCHEMA
            && !self.cuts.is_empty()
            && self.cuts.iter().all(|c| c.m_n as i64 - c.n as i64 == self.omega)
    }
}

fn cut_entry(r: &SpectralReport) -> CutEntry {
    CutEntry { n: r.cut, m_n: r.m_n, gap: r.gap }
}

/// Machine-readable failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub error: String,
    pub message: String,
}

impl From<&OmegaError> for ErrorDoc {
    fn from(e: &OmegaError) -> Self {
        Self { error: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<OmegaReportDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepDoc {
    pub schema_version: String,
    pub axis: String,
    pub points: Vec<SweepPoint>,
    /// True when every point succeeded with the same index.
    pub omega_constant: bool,
    pub omega: Option<i64>,
}

impl SweepDoc {
    pub fn new(axis: &str, points: Vec<SweepPoint>) -> Self {
        let omegas: Vec<Option<i64>> = points.iter().map(|p| p.report.as_ref().map(|r| r.omega)).collect();
        let first = omegas.first().copied().flatten();
        let omega_constant = first.is_some() && omegas.iter().all(|w| *w == first);
        Self {
            schema_version: SWEEP_SCHEMA.to_string(),
            axis: axis.to_string(),
            points,
            omega_constant,
            omega: if omega_constant { first } else { None },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDoc {
    pub schema_version: String,
    pub dim: usize,
    pub relation_defect: f64,
    pub nonhermitian_defect: f64,
}

/// `index,eigenvalue` rows with round-trip doubles.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, v) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{v:?}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_keeps_full_precision() {
        let csv = spectrum_csv(&[0.0, 1.0, 0.1 + 0.2]);
        assert_eq!(csv, "index,eigenvalue\n0,0.0\n1,1.0\n2,0.30000000000000004\n");
    }

    #[test]
    fn sweep_summary() {
        let doc = |omega| OmegaReportDoc {
            schema_version: OMEGA_SCHEMA.into(),
            omega,
            cuts: vec![CutEntry { n: 3, m_n: (3 + omega) as usize, gap: 0.4 }],
            epsilon: 0.0,
            defect: 0.0,
            theorem_bound: 0.0,
            orientation: "literal".into(),
            scaling: Scaling { lambda_a: 1.0, mu_b: 1.0 },
            warnings: vec![],
        };
        let ok = |v, w| SweepPoint { value: v, report: Some(doc(w)), error: None };
        assert!(SweepDoc::new("cut", vec![ok(1.0, 1), ok(2.0, 1)]).omega_constant);
        assert!(!SweepDoc::new("cut", vec![ok(1.0, 1), ok(2.0, 0)]).omega_constant);
        let failed = SweepPoint {
            value: 3.0,
            report: None,
            error: Some(ErrorDoc { error: "GapViolation".into(), message: String::new() }),
        };
        let mixed = SweepDoc::new("cut", vec![ok(1.0, 1), failed]);
        assert!(!mixed.omega_constant);
        assert_eq!(mixed.omega, None);
        assert!(doc(1).is_consistent());
    }
}
