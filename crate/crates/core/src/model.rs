//! Problem model: vectors, smooth oracles, simple convex terms and `F = f + Ψ`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Builds a vector, rejecting NaN and infinite entries.
pub fn vector(entries: Vec<f64>) -> Result<Vector> {
    let v = Vector::from_vec(entries);
    check_finite(&v)?;
    Ok(v)
}

pub fn check_finite(v: &Vector) -> Result<()> {
    match v.iter().position(|e| !e.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

pub fn check_dim(v: &Vector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    Convex,
    Nonconvex,
}

pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    /// Gradient Lipschitz constant `L`.
    fn lipschitz(&self) -> f64;
    /// Strong convexity modulus `α` (zero when merely convex or nonconvex).
    fn strong_convexity(&self) -> f64;
    fn curvature(&self) -> Curvature;
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadraticMatrix {
    Dense(DMatrix<f64>),
    Diagonal(Vector),
}

/// `f(x) = ½ xᵀAx − bᵀx` with a precomputed spectrum.
#[derive(Clone, Debug)]
pub struct Quadratic {
    matrix: QuadraticMatrix,
    b: Vector,
    eigenvalues: Vector,
    eigenvectors: Option<DMatrix<f64>>,
    lambda_min: f64,
    lambda_max: f64,
    lipschitz: f64,
    alpha: f64,
    curvature: Curvature,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl Quadratic {
    pub fn dense(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty problem".into()));
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows().max(a.ncols()) });
        }
        if let Some(i) = a.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        check_finite(&b)?;
        let scale = a.amax().max(1.0);
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let a = (&a + a.transpose()) * 0.5;
        let (values, vectors) = crate::linalg::sym_eigen(&a)?;
        Self::build(QuadraticMatrix::Dense(a), b, values, Some(vectors))
    }

    pub fn diagonal(d: Vector, b: Vector) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidParameter("empty problem".into()));
        }
        check_dim(&d, b.len())?;
        check_finite(&d)?;
        check_finite(&b)?;
        Self::build(QuadraticMatrix::Diagonal(d.clone()), b, d, None)
    }

    fn build(
        matrix: QuadraticMatrix,
        b: Vector,
        eigenvalues: Vector,
        eigenvectors: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let mut lo = eigenvalues.min();
        let hi = eigenvalues.max();
        // Rounding in a dense eigensolve leaves ±1e-15-sized noise on zero eigenvalues.
        let snap = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
        if lo.abs() <= snap {
            lo = 0.0;
        }
        let lipschitz = hi.max(-lo);
        if lipschitz <= 0.0 {
            return Err(Error::InvalidParameter("quadratic has zero curvature (L = 0)".into()));
        }
        let curvature = if lo >= 0.0 { Curvature::Convex } else { Curvature::Nonconvex };
        Ok(Self {
            matrix,
            b,
            eigenvalues,
            eigenvectors,
            lambda_min: lo,
            lambda_max: hi,
            lipschitz,
            alpha: lo.max(0.0),
            curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &QuadraticMatrix {
        &self.matrix
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    /// Eigenvalues in the order matching [`Quadratic::eigenvectors`]; unsorted.
    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    /// `None` for the diagonal representation, whose eigenbasis is the identity.
    pub fn eigenvectors(&self) -> Option<&DMatrix<f64>> {
        self.eigenvectors.as_ref()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.matrix, QuadraticMatrix::Diagonal(_))
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match &self.matrix {
            QuadraticMatrix::Dense(a) => a * x,
            QuadraticMatrix::Diagonal(d) => d.component_mul(x),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.matrix {
            QuadraticMatrix::Dense(a) => a.clone(),
            QuadraticMatrix::Diagonal(d) => DMatrix::from_diagonal(d),
        }
    }

    /// `VᵀAV` for a basis stored column-wise.
    pub fn project(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let av = match &self.matrix {
            QuadraticMatrix::Dense(a) => a * basis,
            QuadraticMatrix::Diagonal(d) => {
                let mut m = basis.clone();
                for (i, mut row) in m.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                m
            }
        };
        let p = basis.transpose() * av;
        (&p + p.transpose()) * 0.5
    }

    /// `f(x) − f(r)` evaluated as `½dᵀAd + ∇f(r)ᵀd` with `d = x − r`, which
    /// avoids the cancellation of subtracting two nearly equal values.
    pub fn value_difference(&self, x: &Vector, r: &Vector) -> f64 {
        let d = x - r;
        let grad_r = self.apply(r) - &self.b;
        0.5 * d.dot(&self.apply(&d)) + grad_r.dot(&d)
    }
}

impl SmoothOracle for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.apply(x)) - self.b.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.apply(x) - &self.b
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.alpha
    }

    fn curvature(&self) -> Curvature {
        self.curvature
    }
}

type ValueFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// A user-supplied smooth function with caller-certified constants.
#[derive(Clone)]
pub struct CustomOracle {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradientFn>,
    lipschitz: f64,
    alpha: f64,
    curvature: Curvature,
}

impl CustomOracle {
    pub fn new(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        lipschitz: f64,
        alpha: f64,
        curvature: Curvature,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("empty problem".into()));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidParameter(format!("L must be positive, got {lipschitz}")));
        }
        if !(alpha >= 0.0 && alpha <= lipschitz) {
            return Err(Error::InvalidParameter(format!("need 0 <= alpha <= L, got {alpha}")));
        }
        if alpha > 0.0 && curvature == Curvature::Nonconvex {
            return Err(Error::InvalidParameter("alpha > 0 requires a convex oracle".into()));
        }
        Ok(Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lipschitz,
            alpha,
            curvature,
        })
    }
}

impl fmt::Debug for CustomOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOracle")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("alpha", &self.alpha)
            .field("curvature", &self.curvature)
            .finish()
    }
}

impl SmoothOracle for CustomOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn strong_convexity(&self) -> f64 {
        self.alpha
    }
    fn curvature(&self) -> Curvature {
        self.curvature
    }
}

#[derive(Clone, Debug)]
pub enum SmoothFunction {
    Quadratic(Quadratic),
    Custom(CustomOracle),
}

impl SmoothFunction {
    fn inner(&self) -> &dyn SmoothOracle {
        match self {
            SmoothFunction::Quadratic(q) => q,
            SmoothFunction::Custom(c) => c,
        }
    }
}

impl SmoothOracle for SmoothFunction {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner().value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.inner().gradient(x)
    }
    fn lipschitz(&self) -> f64 {
        self.inner().lipschitz()
    }
    fn strong_convexity(&self) -> f64 {
        self.inner().strong_convexity()
    }
    fn curvature(&self) -> Curvature {
        self.inner().curvature()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimpleConvexTerm {
    Zero,
    Ball { radius: f64 },
    Box { lower: Vector, upper: Vector },
    L1 { weight: f64 },
}

impl SimpleConvexTerm {
    pub fn ball(radius: f64) -> Result<Self> {
        let t = SimpleConvexTerm::Ball { radius };
        t.validate()?;
        Ok(t)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let t = SimpleConvexTerm::Box { lower, upper };
        t.validate()?;
        Ok(t)
    }

    pub fn l1(weight: f64) -> Result<Self> {
        let t = SimpleConvexTerm::L1 { weight };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SimpleConvexTerm::Zero => Ok(()),
            SimpleConvexTerm::Ball { radius } => {
                if radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")))
                }
            }
            SimpleConvexTerm::Box { lower, upper } => {
                check_dim(upper, lower.len())?;
                if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
                    return Err(Error::InvalidParameter("box bounds contain NaN".into()));
                }
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return Err(Error::InvalidParameter("box requires lower <= upper".into()));
                }
                Ok(())
            }
            SimpleConvexTerm::L1 { weight } => {
                if weight.is_finite() && *weight >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("l1 weight must be >= 0, got {weight}")))
                }
            }
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, SimpleConvexTerm::Ball { .. } | SimpleConvexTerm::Box { .. })
    }

    /// `Ψ(x)`, with `+∞` outside an indicator's set (up to a feasibility tolerance).
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            SimpleConvexTerm::Zero => 0.0,
            SimpleConvexTerm::Ball { radius } => {
                if x.norm() <= radius + 1e-12 * (1.0 + radius) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            SimpleConvexTerm::Box { lower, upper } => {
                let inside = x.iter().zip(lower.iter().zip(upper.iter())).all(|(v, (l, u))| {
                    *v >= l - 1e-12 * (1.0 + l.abs()) && *v <= u + 1e-12 * (1.0 + u.abs())
                });
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            SimpleConvexTerm::L1 { weight } => weight * x.lp_norm(1),
        }
    }
}

/// `F = f + Ψ` on `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct CompositeProblem {
    f: SmoothFunction,
    psi: SimpleConvexTerm,
}

impl CompositeProblem {
    pub fn new(f: SmoothFunction, psi: SimpleConvexTerm) -> Result<Self> {
        psi.validate()?;
        if let SimpleConvexTerm::Box { lower, .. } = &psi {
            check_dim(lower, f.dim())?;
        }
        Ok(Self { f, psi })
    }

    pub fn quadratic(q: Quadratic, psi: SimpleConvexTerm) -> Result<Self> {
        Self::new(SmoothFunction::Quadratic(q), psi)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn f(&self) -> &SmoothFunction {
        &self.f
    }

    pub fn psi(&self) -> &SimpleConvexTerm {
        &self.psi
    }

    pub fn as_quadratic(&self) -> Option<&Quadratic> {
        match &self.f {
            SmoothFunction::Quadratic(q) => Some(q),
            SmoothFunction::Custom(_) => None,
        }
    }

    pub fn ball_radius(&self) -> Option<f64> {
        match self.psi {
            SimpleConvexTerm::Ball { radius } => Some(radius),
            _ => None,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.f.lipschitz()
    }

    pub fn strong_convexity(&self) -> f64 {
        self.f.strong_convexity()
    }

    pub fn curvature(&self) -> Curvature {
        self.f.curvature()
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.f.gradient(x)
    }

    /// `F(x)`; callers guarantee the dimension.
    pub fn objective(&self, x: &Vector) -> f64 {
        let psi = self.psi.value(x);
        if psi.is_infinite() {
            return psi;
        }
        self.f.value(x) + psi
    }

    /// Checked `F(x)`.
    pub fn eval_objective(&self, x: &Vector) -> Result<f64> {
        check_dim(x, self.dim())?;
        check_finite(x)?;
        Ok(self.objective(x))
    }

    /// `F(x) − F(r)`, using the cancellation-free form for quadratics.
    pub fn objective_difference(&self, x: &Vector, r: &Vector) -> f64 {
        let (px, pr) = (self.psi.value(x), self.psi.value(r));
        if px.is_infinite() || pr.is_infinite() {
            return px - pr;
        }
        match &self.f {
            SmoothFunction::Quadratic(q) => q.value_difference(x, r) + (px - pr),
            SmoothFunction::Custom(c) => c.value(x) + px - c.value(r) - pr,
        }
    }
}
