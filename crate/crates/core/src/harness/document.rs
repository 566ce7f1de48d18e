//! The problem file format.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, Quadratic, QuadraticMatrix, SimpleConvexTerm, Vector};

use super::generate::GeneratorSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixDoc {
    Dense(Vec<Vec<f64>>),
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum PsiDoc {
    Zero,
    Ball { delta: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    L1 { weight: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub kind: String,
    pub matrix: MatrixDoc,
    pub b: Vec<f64>,
    pub psi: PsiDoc,
    /// How the file was produced, when it came from `generate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

impl PsiDoc {
    pub fn to_term(&self) -> Result<SimpleConvexTerm> {
        match self {
            PsiDoc::Zero => Ok(SimpleConvexTerm::Zero),
            PsiDoc::Ball { delta } => SimpleConvexTerm::ball(*delta),
            PsiDoc::Box { lower, upper } => {
                SimpleConvexTerm::boxed(Vector::from_row_slice(lower), Vector::from_row_slice(upper))
            }
            PsiDoc::L1 { weight } => SimpleConvexTerm::l1(*weight),
        }
    }

    pub fn from_term(t: &SimpleConvexTerm) -> Self {
        match t {
            SimpleConvexTerm::Zero => PsiDoc::Zero,
            SimpleConvexTerm::Ball { radius } => PsiDoc::Ball { delta: *radius },
            SimpleConvexTerm::Box { lower, upper } => {
                PsiDoc::Box { lower: lower.as_slice().to_vec(), upper: upper.as_slice().to_vec() }
            }
            SimpleConvexTerm::L1 { weight } => PsiDoc::L1 { weight: *weight },
        }
    }
}

impl ProblemDocument {
    pub fn from_problem(problem: &CompositeProblem) -> Result<Self> {
        let q = problem
            .as_quadratic()
            .ok_or_else(|| Error::InvalidParameter("only quadratic problems can be serialized".into()))?;
        let matrix = match q.matrix() {
            QuadraticMatrix::Dense(a) => MatrixDoc::Dense(a.row_iter().map(|r| r.iter().copied().collect()).collect()),
            QuadraticMatrix::Diagonal(d) => MatrixDoc::Diagonal(d.as_slice().to_vec()),
        };
        Ok(Self {
            kind: "quadratic".into(),
            matrix,
            b: q.b().as_slice().to_vec(),
            psi: PsiDoc::from_term(problem.psi()),
            generator: None,
        })
    }

    pub fn to_problem(&self) -> Result<CompositeProblem> {
        if self.kind != "quadratic" {
            return Err(Error::InvalidParameter(format!("unsupported problem kind {:?}", self.kind)));
        }
        let n = self.b.len();
        let b = Vector::from_row_slice(&self.b);
        let q = match &self.matrix {
            MatrixDoc::Dense(rows) => {
                if rows.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
                }
                if let Some(r) = rows.iter().find(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: r.len() });
                }
                Quadratic::dense(DMatrix::from_fn(n, n, |i, j| rows[i][j]), b)?
            }
            MatrixDoc::Diagonal(d) => Quadratic::diagonal(Vector::from_row_slice(d), b)?,
        };
        CompositeProblem::quadratic(q, self.psi.to_term()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("problem file: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_shape() {
        let text = r#"{"kind":"quadratic","matrix":{"diagonal":[1.0,100.0]},"b":[1.0,1.0],"psi":{"variant":"ball","delta":1.0}}"#;
        let doc = ProblemDocument::from_json(text).unwrap();
        let p = doc.to_problem().unwrap();
        assert_eq!(p.lipschitz(), 100.0);
        assert_eq!(p.strong_convexity(), 1.0);
        assert_eq!(p.ball_radius(), Some(1.0));
        let again: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(again["psi"]["variant"], "ball");
        assert!(again.get("generator").is_none());
    }

    #[test]
    fn dense_round_trip() {
        let text = r#"{"kind":"quadratic","matrix":{"dense":[[2.0,1.0],[1.0,2.0]]},"b":[0.5,-1.0],"psi":{"variant":"l1","weight":0.1}}"#;
        let doc = ProblemDocument::from_json(text).unwrap();
        let back = ProblemDocument::from_problem(&doc.to_problem().unwrap()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn rejects_ragged_and_asymmetric() {
        let ragged = r#"{"kind":"quadratic","matrix":{"dense":[[1.0],[0.0,1.0]]},"b":[0,0],"psi":{"variant":"zero"}}"#;
        assert!(ProblemDocument::from_json(ragged).unwrap().to_problem().is_err());
        let asym = r#"{"kind":"quadratic","matrix":{"dense":[[1.0,2.0],[0.0,1.0]]},"b":[0,0],"psi":{"variant":"zero"}}"#;
        assert!(matches!(
            ProblemDocument::from_json(asym).unwrap().to_problem(),
            Err(Error::NotSymmetric(_))
        ));
        assert!(ProblemDocument::from_json(r#"{"kind":"cubic"}"#).is_err());
    }
}
