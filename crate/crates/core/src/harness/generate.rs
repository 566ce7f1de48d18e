//! Seeded generation of quadratic test problems.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, Quadratic, Vector};

use super::document::{MatrixDoc, ProblemDocument, PsiDoc};

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumLaw {
    /// Endpoints `a`, `b` exactly, interior log-uniform.
    LogUniform { lo: f64, hi: f64 },
    /// Geometric spacing from `a` to `b`.
    LogSpaced { lo: f64, hi: f64 },
    /// Two tight clusters at the ends of `[a, b]`.
    Clustered { lo: f64, hi: f64 },
    /// `λ₁ = −c`; the rest log-uniform in `[b/100, b]` with `λ_n = b`.
    OneNegative { c: f64, hi: f64 },
    /// `λ₁ = 0`; the rest log-uniform in `[a, b]` with both ends attained.
    Singular { lo: f64, hi: f64 },
    /// `m` equally spaced values in `[a, b]`, each repeated.
    Distinct { m: usize, lo: f64, hi: f64 },
    Identity,
}

fn parse_f(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::InvalidParameter(format!("not a number: {s:?}")))
}

impl FromStr for SpectrumLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("invalid spectrum law {s:?}"));
        let two = |parts: &[&str]| -> Result<(f64, f64)> {
            if parts.len() != 3 {
                return Err(bad());
            }
            let (lo, hi) = (parse_f(parts[1])?, parse_f(parts[2])?);
            Ok((lo, hi))
        };
        let law = match parts[0] {
            "identity" if parts.len() == 1 => SpectrumLaw::Identity,
            "log-uniform" => {
                let (lo, hi) = two(&parts)?;
                SpectrumLaw::LogUniform { lo, hi }
            }
            "log-spaced" => {
                let (lo, hi) = two(&parts)?;
                SpectrumLaw::LogSpaced { lo, hi }
            }
            "clustered" => {
                let (lo, hi) = two(&parts)?;
                SpectrumLaw::Clustered { lo, hi }
            }
            "one-negative" => {
                let (c, hi) = two(&parts)?;
                SpectrumLaw::OneNegative { c, hi }
            }
            "singular" => {
                let (lo, hi) = two(&parts)?;
                SpectrumLaw::Singular { lo, hi }
            }
            "distinct" if parts.len() == 4 => SpectrumLaw::Distinct {
                m: parts[1].parse().map_err(|_| bad())?,
                lo: parse_f(parts[2])?,
                hi: parse_f(parts[3])?,
            },
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for SpectrumLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumLaw::LogUniform { lo, hi } => write!(f, "log-uniform:{lo}:{hi}"),
            SpectrumLaw::LogSpaced { lo, hi } => write!(f, "log-spaced:{lo}:{hi}"),
            SpectrumLaw::Clustered { lo, hi } => write!(f, "clustered:{lo}:{hi}"),
            SpectrumLaw::OneNegative { c, hi } => write!(f, "one-negative:{c}:{hi}"),
            SpectrumLaw::Singular { lo, hi } => write!(f, "singular:{lo}:{hi}"),
            SpectrumLaw::Distinct { m, lo, hi } => write!(f, "distinct:{m}:{lo}:{hi}"),
            SpectrumLaw::Identity => write!(f, "identity"),
        }
    }
}

impl SpectrumLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpectrumLaw::LogUniform { lo, hi }
            | SpectrumLaw::LogSpaced { lo, hi }
            | SpectrumLaw::Clustered { lo, hi }
            | SpectrumLaw::Singular { lo, hi } => lo > 0.0 && hi >= lo && hi.is_finite(),
            SpectrumLaw::OneNegative { c, hi } => c > 0.0 && hi > 0.0 && c.is_finite() && hi.is_finite(),
            SpectrumLaw::Distinct { m, lo, hi } => m >= 1 && lo.is_finite() && hi >= lo && hi.is_finite(),
            SpectrumLaw::Identity => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid spectrum law {self}")))
        }
    }

    /// Eigenvalues in ascending order.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(0.0..=1.0) * (hi / lo).ln()).exp() * lo;
        // Endpoints pinned so that the extremal eigenvalues are exact.
        let pinned = |rng: &mut ChaCha8Rng, count: usize, lo: f64, hi: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..count).map(|_| log_uniform(rng, lo, hi)).collect();
            if count >= 1 {
                v[0] = lo;
            }
            if count >= 2 {
                v[count - 1] = hi;
            }
            v
        };
        let mut out = match *self {
            SpectrumLaw::Identity => vec![1.0; n],
            SpectrumLaw::LogUniform { lo, hi } => pinned(rng, n, lo, hi),
            SpectrumLaw::LogSpaced { lo, hi } => (0..n)
                .map(|i| if n == 1 { lo } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) })
                .collect(),
            SpectrumLaw::Clustered { lo, hi } => {
                let mut v: Vec<f64> = (0..n)
                    .map(|i| {
                        let u: f64 = rng.gen_range(0.0..0.05);
                        if i < n / 2 { lo * (1.0 + u) } else { hi * (1.0 - u) }
                    })
                    .collect();
                v[0] = lo;
                if n >= 2 {
                    v[n - 1] = hi;
                }
                v
            }
            SpectrumLaw::OneNegative { c, hi } => {
                let mut v = vec![-c];
                v.extend(pinned(rng, n.saturating_sub(1), hi / 100.0, hi));
                if n >= 2 {
                    v[n - 1] = hi;
                }
                v
            }
            SpectrumLaw::Singular { lo, hi } => {
                let mut v = vec![0.0];
                v.extend(pinned(rng, n.saturating_sub(1), lo, hi));
                v
            }
            SpectrumLaw::Distinct { m, lo, hi } => (0..n)
                .map(|i| if m == 1 { lo } else { lo + (hi - lo) * (i % m) as f64 / (m - 1) as f64 })
                .collect(),
        };
        out.truncate(n);
        out.sort_by(f64::total_cmp);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Dense,
    Diagonal,
}

/// Parses `zero`, `ball:R`, `l1:W` or `box:LO:HI` (the same bounds in every coordinate).
pub fn parse_psi(s: &str, n: usize) -> Result<PsiDoc> {
    let parts: Vec<&str> = s.split(':').collect();
    let psi = match parts.as_slice() {
        ["zero"] => PsiDoc::Zero,
        ["ball", r] => PsiDoc::Ball { delta: parse_f(r)? },
        ["l1", w] => PsiDoc::L1 { weight: parse_f(w)? },
        ["box", lo, hi] => PsiDoc::Box { lower: vec![parse_f(lo)?; n], upper: vec![parse_f(hi)?; n] },
        _ => return Err(Error::InvalidParameter(format!("invalid psi {s:?}"))),
    };
    psi.to_term()?;
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: String,
    pub n: usize,
    pub seed: u64,
    pub spectrum: String,
    pub psi: String,
    pub structure: Structure,
    /// Explicit linear term; drawn from a standard normal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
}

impl GeneratorSpec {
    pub fn new(n: usize, seed: u64, spectrum: &str, psi: &str) -> Self {
        Self {
            kind: "quadratic".into(),
            n,
            seed,
            spectrum: spectrum.into(),
            psi: psi.into(),
            structure: Structure::Dense,
            b: None,
        }
    }

    pub fn diagonal(mut self) -> Self {
        self.structure = Structure::Diagonal;
        self
    }

    pub fn with_b(mut self, b: Vec<f64>) -> Self {
        self.b = Some(b);
        self
    }
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // Sign fix so the factor is uniformly distributed.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn generate(spec: &GeneratorSpec) -> Result<ProblemDocument> {
    if spec.kind != "quadratic" {
        return Err(Error::InvalidParameter(format!("unsupported kind {:?}", spec.kind)));
    }
    if spec.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let n = spec.n;
    let law: SpectrumLaw = spec.spectrum.parse()?;
    let psi = parse_psi(&spec.psi, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lam = law.sample(n, &mut rng);

    let matrix = match spec.structure {
        Structure::Diagonal => MatrixDoc::Diagonal(lam.clone()),
        Structure::Dense if lam.iter().all(|&l| l == lam[0]) => {
            MatrixDoc::Dense((0..n).map(|i| (0..n).map(|j| if i == j { lam[0] } else { 0.0 }).collect()).collect())
        }
        Structure::Dense => {
            let q = random_orthogonal(n, &mut rng);
            let a = &q * DMatrix::from_diagonal(&Vector::from_row_slice(&lam)) * q.transpose();
            let a = (&a + a.transpose()) * 0.5;
            MatrixDoc::Dense(a.row_iter().map(|r| r.iter().copied().collect()).collect())
        }
    };
    let b = match &spec.b {
        Some(b) if b.len() != n => return Err(Error::DimensionMismatch { expected: n, got: b.len() }),
        Some(b) => b.clone(),
        None => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
    };
    let doc = ProblemDocument { kind: "quadratic".into(), matrix, b, psi, generator: Some(spec.clone()) };
    doc.to_problem()?;
    Ok(doc)
}

/// Convenience wrapper returning the problem directly.
pub fn generate_problem(spec: &GeneratorSpec) -> Result<CompositeProblem> {
    generate(spec)?.to_problem()
}

/// Diagonal quadratic with the given spectrum and `b`, without going through a document.
pub fn diagonal_problem(lam: &[f64], b: &[f64], psi: &PsiDoc) -> Result<CompositeProblem> {
    let q = Quadratic::diagonal(Vector::from_row_slice(lam), Vector::from_row_slice(b))?;
    CompositeProblem::quadratic(q, psi.to_term()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticMatrix;

    #[test]
    fn canonical_instance() {
        let spec = GeneratorSpec::new(2, 1, "identity", "ball:1").with_b(vec![2.0, 0.0]);
        let p = generate_problem(&spec).unwrap();
        let q = p.as_quadratic().unwrap();
        match q.matrix() {
            QuadraticMatrix::Dense(a) => assert_eq!(*a, DMatrix::identity(2, 2)),
            _ => panic!("expected dense"),
        }
        assert_eq!(p.ball_radius(), Some(1.0));
    }

    #[test]
    fn deterministic_bytes() {
        let spec = GeneratorSpec::new(12, 7, "log-uniform:1:100", "l1:0.1");
        assert_eq!(generate(&spec).unwrap().to_json(), generate(&spec).unwrap().to_json());
        let other = GeneratorSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().to_json(), generate(&other).unwrap().to_json());
    }

    #[test]
    fn extremal_eigenvalues_pinned() {
        let p = generate_problem(&GeneratorSpec::new(40, 3, "log-uniform:1:100", "zero")).unwrap();
        assert!((p.lipschitz() - 100.0).abs() < 1e-10);
        assert!((p.strong_convexity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn laws_parse_and_reject() {
        assert!("log-uniform:1:100".parse::<SpectrumLaw>().is_ok());
        assert!("distinct:3:1:5".parse::<SpectrumLaw>().is_ok());
        for bad in ["log-uniform:0:1", "uniform:1:2", "one-negative:-1:4", "clustered:5:1", "identity:2"] {
            assert!(bad.parse::<SpectrumLaw>().is_err(), "{bad}");
        }
        assert!(parse_psi("ball:-1", 3).is_err());
        assert!(parse_psi("box:1:0", 3).is_err());
    }

    #[test]
    fn one_negative_and_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = SpectrumLaw::OneNegative { c: 1.0, hi: 10.0 }.sample(6, &mut rng);
        assert_eq!(l[0], -1.0);
        assert_eq!(l[5], 10.0);
        assert!(l[1] > 0.0);
        let s = SpectrumLaw::Singular { lo: 0.5, hi: 4.0 }.sample(5, &mut rng);
        assert_eq!((s[0], s[1], s[4]), (0.0, 0.5, 4.0));
        let d = SpectrumLaw::Distinct { m: 3, lo: 1.0, hi: 3.0 }.sample(7, &mut rng);
        assert_eq!(d, vec![1.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }
}
