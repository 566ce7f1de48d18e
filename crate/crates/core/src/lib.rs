//! Composite first-order methods with machine-checked convergence certificates.
//!
//! The objective is `F = f + Ψ` where `f` is a smooth oracle (a quadratic in
//! practice) and `Ψ` is a simple convex term with a closed-form prox.

pub mod chebyshev;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod idealized;
pub mod linalg;
pub mod line_search;
pub mod model;
pub mod prox;
pub mod solvers;
pub mod trace;
pub mod trs;

pub use error::{Error, Result};
pub use model::{CompositeProblem, Curvature, Quadratic, SimpleConvexTerm, SmoothFunction, Vector};
