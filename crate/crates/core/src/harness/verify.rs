//! Per-iteration checks of every proven inequality, run over seeded instances.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{self, SpectralData};
use crate::error::{Error, Result};
use crate::idealized::{ia_convex_run, ia_strong_run, IaState};
use crate::model::{CompositeProblem, Curvature, SmoothOracle, Vector};
use crate::prox::{prox, prox_grad};
use crate::solvers::{convex_potential, sublinear_bound, Ag, FistaState, GdConvexState, GdStrongState, Optimum, Sigma0};
use crate::trs::dense::dense_matrix_trs;
use crate::trs::{dense_trs_oracle, LanczosOptions, LanczosState};

use super::document::ProblemDocument;
use super::generate::{generate, GeneratorSpec};
use super::run::{reference_optimum, Algorithm};

/// Every check `verify` can emit, with the result it certifies.
pub const CHECK_REGISTRY: &[(&str, &str)] = &[
    ("ag.sigma_bound", "Lemma: ‖y_k−x*‖² + 2(F(x_k)−F*)/α ≤ σ̃²_k"),
    ("ag.sigma_recurrence", "Accelerated gradient: σ̃² recurrence and contraction by 1−1/√κ"),
    ("ag.y_identity", "Lemma: y_{k+1} = κ^{-1/2} w̿_k + (1−κ^{-1/2}) y_k"),
    ("chebyshev.comparator_feasible", "Trust-region Lanczos analysis: the comparator y is feasible"),
    ("chebyshev.linear_bound", "Theorem: f(x_k)−f(x*) ≤ 6c_k(f(x₀)−f(x*))"),
    ("chebyshev.normalization", "Chebyshev construction: q^A(0) = q^B(0) = 1"),
    ("chebyshev.range", "Chebyshev construction: q^A, q^B take values in [0, 1] on the spectral interval"),
    ("chebyshev.sublinear_bound", "Sublinear rate: f(x_k)−f(x*) ≤ 3(λ_n+μ*)Δ²/(2(k+1)²)"),
    ("fista.potential", "Accelerated gradient, convex setting: Φ_{k+1} ≤ Φ_k"),
    ("fista.rate", "Accelerated gradient, convex setting: O(1/k²) rate"),
    ("gd_convex.descent", "Lemma: F(z̄_k) ≤ F(z̄_{k−1}) − ‖G_{1/L}(z_k)‖²/(2L)"),
    ("gd_convex.potential", "Theorem: Convergence of GD, convex case"),
    ("gd_convex.rate", "Corollary: O(1/k²) rate of GD, convex case"),
    ("gd_nonconvex.stationarity", "Corollary: stationarity rate of modified GD"),
    ("gd_nonconvex.sufficient_decrease", "Modified GD: sufficient decrease test"),
    ("gd_strong.contraction", "Theorem: Convergence of geometric descent"),
    ("gd_strong.descent", "Geometric descent, step 3: F(z̄_k) ≤ F(z̄_{k−1}) − ‖G_{1/L}(z_k)‖²/(2L)"),
    ("gd_strong.soundness", "Theorem: ξ̃²_k ≥ ‖y_k−x*‖² + 2(F(z̄_{k−1})−F*)/α"),
    ("ia.nesting", "Idealized framework: nested affine subspaces"),
    ("ia.projection", "Idealized framework: y_k is the projection of x* onto M_k"),
    ("ia.z_conditions", "Idealized framework: conditions on the auxiliary point z_k"),
    ("ia_convex.descent", "Theorem: Convergence of IA, convex and nonconvex (descent)"),
    ("ia_convex.potential", "Theorem: Convergence of IA, convex and nonconvex (Φ_{k+1} ≤ Φ_k)"),
    ("ia_convex.rate", "Corollary: O(1/k²) rate of IA"),
    ("ia_convex.stationarity", "Corollary: stationarity rate of IA"),
    ("ia_strong.contraction", "Theorem: Convergence of IA"),
    ("line_search.sign_conditions", "Lemma: existence of the auxiliary point z"),
    ("prox.optimum_stationarity", "Lemma: the prox-gradient mapping measures near-stationarity"),
    ("trs.kkt", "Theorem: optimality conditions of the trust-region subproblem"),
    ("trs.krylov_optimality", "Trust-region Lanczos: x_k minimizes f over the Krylov ball"),
    ("trs.linear_rate", "Theorem: linear convergence rate of trust-region Lanczos"),
    ("trs.monotone", "Trust-region Lanczos: F(x_k) is nonincreasing"),
    ("trs.sublinear_rate", "Theorem: sublinear convergence rate of trust-region Lanczos"),
    ("trs.tridiagonal", "Trust-region Lanczos: T_k = Q_kᵀAQ_k"),
];

pub fn anchor_for(name: &str) -> Option<&'static str> {
    CHECK_REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// What `verify` exercises: one algorithm, or the Chebyshev bounds alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyTarget {
    Algorithm(Algorithm),
    Chebyshev,
}

impl FromStr for VerifyTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "chebyshev" {
            Ok(VerifyTarget::Chebyshev)
        } else {
            s.parse().map(VerifyTarget::Algorithm)
        }
    }
}

impl fmt::Display for VerifyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyTarget::Algorithm(a) => a.fmt(f),
            VerifyTarget::Chebyshev => f.write_str("chebyshev"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub paper_anchor: String,
    pub seed: u64,
    pub passed: bool,
    /// Largest amount by which the inequality failed beyond its slack; 0 when it held.
    pub worst_violation: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub algorithm: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Halve `c_k` in the Chebyshev checks, which must then fail.
    pub negative_control: bool,
    /// Worker cap; `None` reads `COMPASS_THREADS`.
    pub threads: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-8, negative_control: false, threads: None }
    }
}

/// Accumulates the worst excess of one inequality over many evaluations.
#[derive(Clone, Debug)]
pub struct Tally {
    name: &'static str,
    worst: f64,
    failed: bool,
    count: usize,
}

impl Tally {
    pub fn new(name: &'static str) -> Self {
        debug_assert!(anchor_for(name).is_some(), "unregistered check {name}");
        Self { name, worst: 0.0, failed: false, count: 0 }
    }

    /// Records `lhs ≤ rhs + allowance`.
    pub fn le(&mut self, lhs: f64, rhs: f64, allowance: f64) {
        self.count += 1;
        let excess = lhs - rhs - allowance;
        if excess.is_nan() {
            self.failed = true;
            self.worst = f64::INFINITY;
        } else if excess > 0.0 {
            self.failed = true;
            self.worst = self.worst.max(excess);
        }
    }

    pub fn holds(&mut self, ok: bool) {
        self.count += 1;
        if !ok {
            self.failed = true;
            self.worst = self.worst.max(1.0);
        }
    }

    fn finish(self, seed: u64) -> CheckResult {
        CheckResult {
            check_name: self.name.to_string(),
            paper_anchor: anchor_for(self.name).unwrap_or("unregistered").to_string(),
            seed,
            passed: !self.failed,
            worst_violation: self.worst,
            evaluations: self.count,
        }
    }
}

fn need_optimum(problem: &CompositeProblem) -> Result<Optimum> {
    reference_optimum(problem)?.ok_or_else(|| Error::Incompatible("checks need a reference minimizer".into()))
}

/// Starting point for a seed: the origin for seed 0, otherwise a seeded
/// Gaussian pulled into the domain of `Ψ`.
pub fn seeded_start(problem: &CompositeProblem, seed: u64) -> Vector {
    let n = problem.dim();
    if seed == 0 {
        return Vector::zeros(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let v = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    if problem.psi().is_indicator() {
        prox(problem.psi(), 1.0, &v)
    } else {
        v
    }
}

/// Rounding level of a computed gap `F(p) − F*` near the optimum, set by
/// the magnitudes entering `F*` and the accuracy of the reference `x*`.
pub fn gap_floor(problem: &CompositeProblem, opt: &Optimum) -> f64 {
    let xs = opt.x.norm();
    let g = problem.gradient(&opt.x).norm();
    64.0 * f64::EPSILON * (opt.value.abs() + xs * (g + problem.lipschitz() * xs))
}

/// Weight with which a line-search residual enters the convex potential
/// bound at index `k`: `2γ_k` from the `y`-condition plus `k(k+1)/(2L)` from
/// the descent lemma.
fn convex_residual_weight(k: usize, l: f64) -> f64 {
    let k = k as f64;
    (k + 1.0) / l + k * (k + 1.0) / (2.0 * l)
}

pub fn check_gd_strong(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize, tol: f64) -> Result<Vec<Tally>> {
    let alpha = problem.strong_convexity();
    let l = problem.lipschitz();
    let q = 1.0 - (alpha / l).sqrt();
    let floor = 2.0 * gap_floor(problem, opt) / alpha;
    let mut contraction = Tally::new("gd_strong.contraction");
    let mut soundness = Tally::new("gd_strong.soundness");
    let mut descent = Tally::new("gd_strong.descent");
    let mut signs = Tally::new("line_search.sign_conditions");
    let mut s = GdStrongState::init(problem, x0)?;
    for _ in 0..max_iters {
        let rhs = (&s.y - &opt.x).norm_squared() + 2.0 * opt.gap(problem, s.zbar()) / alpha;
        soundness.le(rhs, s.xi_sq, 1e-9 * s.xi_sq + floor);
        if s.converged(tol) {
            break;
        }
        let (prev_xi, x, y) = (s.xi_sq, s.zbar().clone(), s.y.clone());
        s.step(problem)?;
        contraction.le(s.xi_sq, q * prev_xi * (1.0 + 1e-10), 0.0);
        let step = s.last_step.as_ref().expect("just stepped");
        sign_conditions(&mut signs, &x, &y, &s.z, &s.prox_z.grad_map, step.allowance);
        // σ̃²_k bounds the distance from y_k with the new point z̄_k.
        let sigma_rhs = (&step.prev_y - &opt.x).norm_squared() + 2.0 * opt.gap(problem, s.zbar()) / alpha;
        soundness.le(sigma_rhs, step.sigma_sq, 1e-9 * step.sigma_sq.abs() + floor + 2.0 * step.allowance / alpha);
        let g = s.prox_z.norm();
        descent.le(s.f_zbar, step.prev_f_zbar - g * g / (2.0 * l), step.allowance + gap_floor(problem, opt));
    }
    Ok(vec![contraction, descent, soundness, signs])
}

/// `G(z)ᵀ(y−z) ≥ 0` and `G(z)ᵀ(x−z) ≥ 0`, up to the line search's own
/// residual bound plus rounding.
fn sign_conditions(t: &mut Tally, x: &Vector, y: &Vector, z: &Vector, g: &Vector, allowance: f64) {
    let allow = allowance + 4.0 * f64::EPSILON * g.norm() * (y - x).norm();
    t.le(0.0, g.dot(&(y - z)), allow);
    t.le(0.0, g.dot(&(x - z)), allow);
}

pub fn check_ag(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize, tol: f64) -> Result<Vec<Tally>> {
    let alpha = problem.strong_convexity();
    let floor = 2.0 * gap_floor(problem, opt) / alpha;
    let mut bound = Tally::new("ag.sigma_bound");
    let mut recurrence = Tally::new("ag.sigma_recurrence");
    let mut identity = Tally::new("ag.y_identity");
    let mut a = Ag::new(problem, x0, &Sigma0::Exact(opt.clone()))?;
    let kappa = a.state.kappa;
    let (sk, inv) = (kappa.sqrt(), 1.0 / kappa.sqrt());
    for _ in 0..max_iters {
        let lhs = (&a.audit.y - &opt.x).norm_squared() + 2.0 * opt.gap(problem, &a.state.x) / alpha;
        bound.le(lhs, a.audit.sigma_sq, 1e-9 * a.audit.sigma_sq.abs() + floor);
        let scale = 1.0 + a.audit.y.norm();
        identity.le((&a.audit.y - a.state.y_from_w()).norm(), 0.0, 1e-10 * scale);
        identity.le((&a.audit.y - a.state.y_momentum()).norm(), 0.0, 1e-10 * scale);
        if a.converged(tol, problem.lipschitz()) {
            break;
        }
        let (prev, wx) = (a.audit.sigma_sq, (&a.state.w - &a.state.x).norm_squared());
        a.step(problem);
        let predicted = (1.0 - inv) * prev - (sk - inv) * wx;
        recurrence.le((a.audit.sigma_sq - predicted).abs(), 0.0, 1e-12 * (1.0 + prev.abs()));
        recurrence.le(a.audit.sigma_sq, (1.0 - inv) * prev, 1e-12 * prev.abs());
    }
    Ok(vec![bound, recurrence, identity])
}

pub fn check_gd_convex(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize, tol: f64) -> Result<Vec<Tally>> {
    let l = problem.lipschitz();
    let floor = gap_floor(problem, opt);
    let mut potential = Tally::new("gd_convex.potential");
    let mut descent = Tally::new("gd_convex.descent");
    let mut rate = Tally::new("gd_convex.rate");
    let mut signs = Tally::new("line_search.sign_conditions");
    let mut s = GdConvexState::init(problem, x0, None);
    let mut phi = convex_potential(problem, &s.y, s.zbar(), s.k, opt);
    for _ in 0..max_iters {
        if s.g_norm() <= tol * l {
            break;
        }
        let (x, y, k) = (s.zbar().clone(), s.y.clone(), s.k);
        s.step(problem)?;
        let step = s.last_step.as_ref().expect("just stepped");
        sign_conditions(&mut signs, &x, &y, &step.searched_z, &step.searched_prox.grad_map, step.allowance);
        let g = step.searched_prox.norm();
        let f_searched = problem.objective(&step.searched_prox.point);
        descent.le(f_searched, step.prev_f_zbar - g * g / (2.0 * l), step.allowance + floor);
        let next = convex_potential(problem, &s.y, s.zbar(), s.k, opt);
        let weight = (s.k * (s.k + 1)) as f64 / (2.0 * l);
        let allow = 1e-9 * phi + convex_residual_weight(k, l) * step.allowance + 2.0 * weight * floor;
        potential.le(next, phi, allow);
        phi = next;
        // State k now holds z̄_{k−1}.
        rate.le(opt.gap(problem, s.zbar()), sublinear_bound(problem, x0, s.k - 1, opt), floor);
    }
    Ok(vec![descent, potential, rate, signs])
}

pub fn check_gd_nonconvex(problem: &CompositeProblem, x0: &Vector, f_star: f64, max_iters: usize, tol: f64) -> Result<Vec<Tally>> {
    let l = problem.lipschitz();
    let mut stationarity = Tally::new("gd_nonconvex.stationarity");
    let mut decrease = Tally::new("gd_nonconvex.sufficient_decrease");
    let mut s = GdConvexState::init(problem, x0, Some(true));
    let f0_gap = problem.objective(x0) - f_star;
    let fscale = 1e-10 * (1.0 + f_star.abs());
    for _ in 0..max_iters {
        // best_g_norm covers z_0, …, z_{k−1}.
        let k = s.k - 1;
        let bound = (2.0 * l * f0_gap.max(0.0) / (k as f64 + 1.0)).sqrt();
        stationarity.le(s.best_g_norm, bound, 1e-9 * bound);
        if s.g_norm() <= tol * l {
            break;
        }
        s.step(problem)?;
        let step = s.last_step.as_ref().expect("just stepped");
        let g = step.g_norm_at_start.expect("safeguard on");
        decrease.le(s.f_zbar, step.prev_f_zbar - g * g / (2.0 * l), fscale);
    }
    Ok(vec![stationarity, decrease])
}

pub fn check_fista(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize, tol: f64) -> Result<Vec<Tally>> {
    let l = problem.lipschitz();
    let floor = gap_floor(problem, opt);
    let mut potential = Tally::new("fista.potential");
    let mut rate = Tally::new("fista.rate");
    let mut s = FistaState::init(x0);
    let mut prev: Option<f64> = None;
    for _ in 0..max_iters {
        s.step(problem);
        let phi = convex_potential(problem, &s.y(), &s.x, s.k, opt);
        if let Some(p) = prev {
            let weight = (s.k * (s.k + 1)) as f64 / (2.0 * l);
            potential.le(phi, p, 1e-9 * p + 2.0 * weight * floor);
        }
        prev = Some(phi);
        rate.le(opt.gap(problem, &s.x), sublinear_bound(problem, x0, s.k, opt), floor);
        if s.converged(tol, l) {
            break;
        }
    }
    Ok(vec![potential, rate])
}

fn ia_common(states: &[IaState], kind_strong: bool, problem: &CompositeProblem, floor: f64) -> [Tally; 3] {
    let l = problem.lipschitz();
    let mut nesting = Tally::new("ia.nesting");
    let mut projection = Tally::new("ia.projection");
    let mut zc = Tally::new("ia.z_conditions");
    for w in states[1..].windows(2) {
        let (a, b) = (&w[0].subspace, &w[1].subspace);
        let prefix = a.origin == b.origin && a.basis.len() <= b.basis.len() && a.basis.iter().zip(&b.basis).all(|(p, q)| p == q);
        nesting.holds(prefix);
    }
    for s in &states[1..] {
        projection.le(s.subspace.projection_residual(&s.x_star), 0.0, 1e-10 * (1.0 + s.x_star.norm()));
        let rounding = 4.0 * f64::EPSILON * s.g_norm_z * (&s.y - &s.x).norm();
        zc.le(0.0, s.z_inner, s.z_allowance + rounding);
        if kind_strong {
            zc.le(s.gap_zbar, s.gap_x - s.g_norm_z.powi(2) / (2.0 * l), s.z_allowance + floor);
        } else {
            zc.le(0.0, s.z_inner_x, s.z_allowance + rounding);
        }
    }
    [nesting, projection, zc]
}

pub fn check_ia_strong(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize) -> Result<Vec<Tally>> {
    let alpha = problem.strong_convexity();
    let q = 1.0 - (alpha / problem.lipschitz()).sqrt();
    let floor = gap_floor(problem, opt);
    let states = ia_strong_run(problem, x0, &opt.x, max_iters)?;
    let mut contraction = Tally::new("ia_strong.contraction");
    for w in states[1..].windows(2) {
        let (a, b) = (w[0].potential.unwrap(), w[1].potential.unwrap());
        contraction.le(b, q * a, 1e-10 * a + 4.0 * (w[0].z_allowance + floor) / alpha);
    }
    let mut out = vec![contraction];
    out.extend(ia_common(&states, true, problem, floor));
    Ok(out)
}

pub fn check_ia_convex(problem: &CompositeProblem, x0: &Vector, opt: &Optimum, max_iters: usize) -> Result<Vec<Tally>> {
    let l = problem.lipschitz();
    let floor = gap_floor(problem, opt);
    let states = ia_convex_run(problem, x0, &opt.x, max_iters)?;
    let mut descent = Tally::new("ia_convex.descent");
    for w in states.windows(2) {
        descent.le(w[1].gap_xbar, w[0].gap_xbar - w[1].g_norm_x.powi(2) / (2.0 * l), 2.0 * floor);
    }
    let mut out = vec![descent];
    out.extend(ia_common(&states, false, problem, floor));
    if problem.curvature() == Curvature::Convex {
        let mut potential = Tally::new("ia_convex.potential");
        let mut rate = Tally::new("ia_convex.rate");
        for w in states[1..].windows(2) {
            let (a, b) = (w[0].potential.unwrap(), w[1].potential.unwrap());
            let k = w[0].k;
            let weight = ((k + 1) * (k + 2)) as f64 / (2.0 * l);
            let allow = 1e-9 * a + convex_residual_weight(k, l) * w[0].z_allowance + 2.0 * weight * floor;
            potential.le(b, a, allow);
        }
        for s in &states[1..] {
            rate.le(s.gap_x, sublinear_bound(problem, x0, s.k, opt), floor);
        }
        out.extend([potential, rate]);
    } else {
        let mut stat = Tally::new("ia_convex.stationarity");
        let f0_gap = opt.gap(problem, x0);
        let mut best = f64::INFINITY;
        for s in &states {
            best = best.min(s.g_norm_x);
            let bound = (2.0 * l * f0_gap.max(0.0) / (s.k as f64 + 1.0)).sqrt();
            stat.le(best, bound, 1e-9 * bound);
        }
        out.push(stat);
    }
    Ok(out)
}

/// Runs trust-region Lanczos from the origin and checks the Krylov,
/// tridiagonal, KKT and (optionally) Chebyshev properties.
pub fn check_trs(problem: &CompositeProblem, max_iters: usize, tol: f64, algorithm_checks: bool, negative_control: bool) -> Result<Vec<Tally>> {
    let q = problem
        .as_quadratic()
        .ok_or_else(|| Error::Incompatible("needs a quadratic".into()))?;
    let delta = problem
        .ball_radius()
        .ok_or_else(|| Error::Incompatible("needs a ball constraint".into()))?;
    let oracle = dense_trs_oracle(q, delta)?;
    let n = q.dim();
    let zero = Vector::zeros(n);
    let f0_gap = -q.value_difference(&oracle.x, &zero);
    let spec = SpectralData {
        lambda_min: q.lambda_min(),
        lambda_max: q.lambda_max(),
        mu: oracle.mu,
        delta,
        f0_gap,
    };
    let factor = if negative_control { 0.5 } else { 1.0 };
    let fscale = 1e-10 * (1.0 + f0_gap.abs());

    let l = q.lipschitz();
    let alpha = q.lambda_min();
    let rate = 1.0 - (alpha.max(0.0) / l).sqrt();
    let x_star_sq = oracle.x.norm_squared();
    let mut prev_gap = f0_gap;
    let mut prev_phi: Option<f64> = None;
    let mut monotone = Tally::new("trs.monotone");
    let mut linear = Tally::new("trs.linear_rate");
    let mut sublinear = Tally::new("trs.sublinear_rate");
    let mut krylov = Tally::new("trs.krylov_optimality");
    let mut tri = Tally::new("trs.tridiagonal");
    let mut kkt = Tally::new("trs.kkt");
    let mut lin = Tally::new("chebyshev.linear_bound");
    let mut sub = Tally::new("chebyshev.sublinear_bound");
    let mut norm = Tally::new("chebyshev.normalization");
    let mut range = Tally::new("chebyshev.range");
    let mut feasible = Tally::new("chebyshev.comparator_feasible");

    let opts = LanczosOptions { tol, ..LanczosOptions::default() };
    let mut s = LanczosState::init(q, delta, opts)?;
    let interval = spec.lambda_max > spec.lambda_min && spec.lambda_min + spec.mu > 0.0;
    let diag = match q.matrix() {
        crate::model::QuadraticMatrix::Diagonal(d) => Some(d.as_slice().to_vec()),
        _ => None,
    };
    // Rounding in T built from CG coefficients grows with L‖p‖²/pᵀAp.
    let mut amplification: f64 = 1.0;
    while !s.converged && s.k < max_iters {
        let pap = s.p.dot(&q.apply(&s.p));
        amplification = amplification.max(l * s.p.norm_squared() / pap.max(f64::MIN_POSITIVE));
        s.step(q)?;
        let k = s.k;
        let gap = q.value_difference(&s.x, &oracle.x);
        if algorithm_checks {
            monotone.le(gap, prev_gap, fscale);
            let kf = k as f64;
            let bound = (2.0 * l * x_star_sq + 2.0 * f0_gap) / (kf * (kf + 1.0));
            sublinear.le(gap, bound, fscale);
        }
        prev_gap = gap;
        if algorithm_checks && n <= 60 {
            let basis = DMatrix::from_columns(&s.q[..s.t.dim()]);
            let h = q.project(&basis);
            tri.le((&h - s.t.to_dense()).amax(), 0.0, l * (1e-8 + 16.0 * f64::EPSILON * amplification));
            let g = basis.transpose() * q.b();
            let (u, _) = dense_matrix_trs(&h, &g, delta)?;
            let best = &basis * u;
            krylov.le((q.value_difference(&s.x, &best)).abs(), 0.0, 1e-8 * (1.0 + f0_gap.abs()));
            if alpha > 0.0 {
                // The Krylov spaces are the nested subspaces of the idealized
                // framework, with y_k the projection of x* onto them.
                let y = &basis * (basis.transpose() * &oracle.x);
                let phi = (&y - &oracle.x).norm_squared() + 2.0 * gap / alpha;
                if let Some(prev) = prev_phi {
                    linear.le(phi, rate * prev, 1e-9 * prev + 2.0 * fscale / alpha);
                }
                prev_phi = Some(phi);
            }
        }
        // Polynomials of degree k.
        if interval {
            let c = chebyshev::c_k(k, &spec)? * factor;
            if spec.mu > 0.0 {
                lin.le(gap, 6.0 * c * f0_gap, fscale);
            }
            norm.le((factor * chebyshev::q_a(k, 0.0, &spec)? - 1.0).abs(), 0.0, 1e-12);
        }
        sub.le(gap, chebyshev::sublinear_rate_bound(k, &spec), fscale);
        norm.le((chebyshev::q_b(k, 0.0, &spec) - 1.0).abs(), 0.0, 1e-12);
        if k <= 50 || k % 10 == 0 {
            let m = 1000;
            for i in 0..m {
                let u = i as f64 / (m - 1) as f64;
                if interval {
                    let t = spec.lambda_min + spec.mu + u * (spec.lambda_max - spec.lambda_min);
                    let v = factor * chebyshev::q_a(k, t, &spec)?;
                    range.le(v, 1.0, 1e-10);
                    range.le(0.0, v, 1e-10);
                }
                let v = chebyshev::q_b(k, u * spec.top(), &spec);
                range.le(v, 1.0, 1e-10);
                range.le(0.0, v, 1e-10);
            }
        }
        if let Some(d) = &diag {
            if d.iter().all(|l| l + spec.mu > 0.0) {
                for fam in [chebyshev::Family::A, chebyshev::Family::B] {
                    if fam == chebyshev::Family::A && !interval {
                        continue;
                    }
                    let y = chebyshev::comparator(fam, k, d, q.b().as_slice(), &spec)?;
                    feasible.le(y.norm(), delta, 1e-10 * delta);
                }
            }
        }
    }
    let sol = s.solution(q);
    let scale = 1.0 + q.b().norm();
    if s.converged {
        kkt.le(sol.kkt.stationarity, 0.0, 1e-6 * scale);
        kkt.le(sol.kkt.feasibility, 0.0, 1e-10 * delta);
        kkt.le(-sol.kkt.curvature_margin, 0.0, 1e-10 * q.lipschitz());
    }
    let mut out = vec![lin, sub, norm, range, feasible];
    if algorithm_checks {
        out.extend([krylov, tri, kkt, monotone, sublinear]);
        if alpha > 0.0 && n <= 60 {
            out.push(linear);
        }
    }
    Ok(out)
}

fn stationarity_at_optimum(problem: &CompositeProblem, opt: &Optimum) -> Tally {
    let mut t = Tally::new("prox.optimum_stationarity");
    t.le(prox_grad(problem, &opt.x).norm(), 0.0, 1e-9 * (1.0 + problem.lipschitz() * opt.x.norm()));
    t
}

/// All checks for one algorithm on one problem.
pub fn verify_problem(problem: &CompositeProblem, target: VerifyTarget, x0: &Vector, seed: u64, opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let (it, tol) = (opts.max_iters, opts.tol);
    let tallies = match target {
        VerifyTarget::Chebyshev => check_trs(problem, it, tol, false, opts.negative_control)?,
        VerifyTarget::Algorithm(algo) => {
            algo.check_compatible(problem)?;
            match algo {
                Algorithm::TrsLanczos => check_trs(problem, it, tol, true, opts.negative_control)?,
                Algorithm::GdNonconvex => {
                    let opt = need_optimum(problem)?;
                    let mut v = check_gd_nonconvex(problem, x0, opt.value, it, tol)?;
                    v.push(stationarity_at_optimum(problem, &opt));
                    v
                }
                _ => {
                    let opt = need_optimum(problem)?;
                    let mut v = match algo {
                        Algorithm::GdStrong => check_gd_strong(problem, x0, &opt, it, tol)?,
                        Algorithm::Ag => check_ag(problem, x0, &opt, it, tol)?,
                        Algorithm::GdConvex => check_gd_convex(problem, x0, &opt, it, tol)?,
                        Algorithm::Fista => check_fista(problem, x0, &opt, it, tol)?,
                        Algorithm::IaStrong => check_ia_strong(problem, x0, &opt, it)?,
                        Algorithm::IaConvex => check_ia_convex(problem, x0, &opt, it)?,
                        Algorithm::TrsLanczos | Algorithm::GdNonconvex => unreachable!(),
                    };
                    v.push(stationarity_at_optimum(problem, &opt));
                    v
                }
            }
        }
    };
    Ok(tallies.into_iter().map(|t| t.finish(seed)).collect())
}

fn thread_cap(opts: &VerifyOptions) -> Option<usize> {
    opts.threads.or_else(|| std::env::var("COMPASS_THREADS").ok()?.parse().ok()).filter(|&n| n > 0)
}

/// Instance for one seed: regenerated when the document records its
/// generator, otherwise the same problem from a seeded start.
pub fn instance_for_seed(doc: &ProblemDocument, target: VerifyTarget, seed: u64) -> Result<(CompositeProblem, Vector)> {
    let from_origin = matches!(target, VerifyTarget::Chebyshev | VerifyTarget::Algorithm(Algorithm::TrsLanczos));
    match &doc.generator {
        Some(g) => {
            let spec = GeneratorSpec { seed, ..g.clone() };
            let p = generate(&spec)?.to_problem()?;
            let x0 = Vector::zeros(p.dim());
            Ok((p, x0))
        }
        None => {
            let p = doc.to_problem()?;
            let x0 = if from_origin { Vector::zeros(p.dim()) } else { seeded_start(&p, seed) };
            Ok((p, x0))
        }
    }
}

/// Verifies every seed in parallel and merges the results in
/// `(check_name, seed)` order.
pub fn verify(doc: &ProblemDocument, target: VerifyTarget, seeds: &[u64], opts: &VerifyOptions) -> Result<VerificationReport> {
    let work = |seed: u64| -> Result<Vec<CheckResult>> {
        let (p, x0) = instance_for_seed(doc, target, seed)?;
        verify_problem(&p, target, &x0, seed, opts)
    };
    let results: Vec<Result<Vec<CheckResult>>> = match thread_cap(opts) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            pool.install(|| seeds.par_iter().map(|&s| work(s)).collect())
        }
        None => seeds.par_iter().map(|&s| work(s)).collect(),
    };
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    checks.sort_by(|a, b| a.check_name.cmp(&b.check_name).then(a.seed.cmp(&b.seed)));
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport { algorithm: target.to_string(), passed, checks })
}

/// Parses `A..B` (inclusive), `A,B,C` or a single seed.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidParameter(format!("invalid seed list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}
