//! Running one algorithm on one problem and recording its trace.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::chebyshev::{linear_rate_bound, sublinear_rate_bound, SpectralData};
use crate::error::{Error, Result};
use crate::idealized::{ia_convex_run, ia_strong_run};
use crate::model::{CompositeProblem, Curvature, SimpleConvexTerm, Vector};
use crate::prox::prox_grad;
use crate::solvers::{
    convex_potential, stationarity_rate, sublinear_bound, Ag, FistaState, GdConvexState, GdStrongState, Optimum,
    Sigma0,
};
use crate::trace::TraceRecord;
use crate::trs::{dense_trs_oracle, LanczosOptions, LanczosState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    GdStrong,
    GdConvex,
    GdNonconvex,
    Ag,
    Fista,
    TrsLanczos,
    IaStrong,
    IaConvex,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::GdStrong,
        Algorithm::GdConvex,
        Algorithm::GdNonconvex,
        Algorithm::Ag,
        Algorithm::Fista,
        Algorithm::TrsLanczos,
        Algorithm::IaStrong,
        Algorithm::IaConvex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GdStrong => "gd-strong",
            Algorithm::GdConvex => "gd-convex",
            Algorithm::GdNonconvex => "gd-nonconvex",
            Algorithm::Ag => "ag",
            Algorithm::Fista => "fista",
            Algorithm::TrsLanczos => "trs-lanczos",
            Algorithm::IaStrong => "ia-strong",
            Algorithm::IaConvex => "ia-convex",
        }
    }

    /// Rejects problems outside the algorithm's assumptions.
    pub fn check_compatible(self, problem: &CompositeProblem) -> Result<()> {
        let incompatible = |why: &str| Err(Error::Incompatible(format!("{}: {why}", self.name())));
        let convex = problem.curvature() == Curvature::Convex;
        match self {
            Algorithm::GdStrong | Algorithm::Ag | Algorithm::IaStrong if !(problem.strong_convexity() > 0.0) => {
                incompatible("needs a strongly convex f (α > 0)")
            }
            Algorithm::GdConvex | Algorithm::Fista if !convex => incompatible("needs a convex f"),
            Algorithm::TrsLanczos => match (problem.as_quadratic(), problem.psi()) {
                (Some(_), SimpleConvexTerm::Ball { .. }) if convex => Ok(()),
                (Some(_), SimpleConvexTerm::Ball { .. }) => incompatible("needs a positive semidefinite A"),
                _ => incompatible("needs a quadratic with a ball constraint"),
            },
            Algorithm::IaStrong | Algorithm::IaConvex if problem.as_quadratic().is_none() => {
                incompatible("needs a quadratic f")
            }
            Algorithm::IaConvex if !convex && !matches!(problem.psi(), SimpleConvexTerm::Ball { .. }) => {
                incompatible("nonconvex problems need a ball constraint")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Defaults to the origin.
    pub x0: Option<Vector>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-8, x0: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationCap,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::IterationCap => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<TraceRecord>,
    pub status: RunStatus,
    pub x: Vector,
    pub f_value: f64,
}

/// A minimizer good enough for verification: exact for quadratics with a
/// ball or no constraint, a long FISTA run for other convex problems, and
/// `None` when neither applies or the run does not settle (for example on
/// an objective unbounded below).
pub fn reference_optimum(problem: &CompositeProblem) -> Result<Option<Optimum>> {
    if let Some(q) = problem.as_quadratic() {
        let delta = match problem.psi() {
            SimpleConvexTerm::Zero => Some(f64::INFINITY),
            SimpleConvexTerm::Ball { radius } => Some(*radius),
            _ => None,
        };
        if let Some(delta) = delta {
            if q.dim() > 2000 {
                return Ok(None);
            }
            return match dense_trs_oracle(q, delta) {
                Ok(s) => Ok(Some(Optimum::new(problem, s.x))),
                Err(Error::HardCase) | Err(Error::InvalidParameter(_)) => Ok(None),
                Err(e) => Err(e),
            };
        }
    }
    if problem.curvature() != Curvature::Convex {
        return Ok(None);
    }
    let mut s = FistaState::init(&Vector::zeros(problem.dim()));
    let mut best = s.x.clone();
    let mut best_g = f64::INFINITY;
    for _ in 0..200_000 {
        s.step(problem);
        let g = s.last_g_norm.unwrap_or(f64::INFINITY);
        if g < best_g {
            best_g = g;
            best = s.x.clone();
        }
        if g <= 1e-13 * problem.lipschitz() * (1.0 + s.x.norm()) {
            break;
        }
    }
    if !(best_g <= 1e-9 * problem.lipschitz() * (1.0 + best.norm())) {
        return Ok(None);
    }
    Ok(Some(Optimum::new(problem, best)))
}

struct Recorder {
    start: Instant,
    records: Vec<TraceRecord>,
}

impl Recorder {
    fn new() -> Self {
        Self { start: Instant::now(), records: Vec::new() }
    }

    fn push(&mut self, k: usize, f: f64, g: Option<f64>, potential: Option<f64>, lin: Option<f64>, sub: Option<f64>) {
        self.records.push(TraceRecord {
            k,
            f_value: f,
            g_norm: g,
            potential,
            bound_linear: lin,
            bound_sublinear: sub,
            wall_time_ns: self.start.elapsed().as_nanos(),
        });
    }
}

/// Runs `algo` for at most `opts.max_iters` recorded iterations.
pub fn run(problem: &CompositeProblem, algo: Algorithm, opts: &RunOptions) -> Result<RunOutcome> {
    algo.check_compatible(problem)?;
    if opts.max_iters == 0 {
        return Err(Error::InvalidParameter("max-iters must be positive".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let n = problem.dim();
    let x0 = opts.x0.clone().unwrap_or_else(|| Vector::zeros(n));
    crate::model::check_dim(&x0, n)?;
    let l = problem.lipschitz();
    let alpha = problem.strong_convexity();
    let mut rec = Recorder::new();
    let done = |converged: bool, rec: Recorder, x: Vector| {
        let f = problem.objective(&x);
        let status = if converged { RunStatus::Converged } else { RunStatus::IterationCap };
        Ok(RunOutcome { records: rec.records, status, x, f_value: f })
    };

    match algo {
        Algorithm::GdStrong => {
            let mut s = GdStrongState::init(problem, &x0)?;
            let xi1 = s.xi_sq;
            let q = 1.0 - (alpha / l).sqrt();
            loop {
                let lin = xi1 * q.powi(s.k as i32 - 1);
                rec.push(s.k, s.f_zbar, Some(s.prox_z.norm()), Some(s.xi_sq), Some(lin), None);
                if s.converged(opts.tol) || rec.records.len() >= opts.max_iters {
                    let c = s.converged(opts.tol);
                    return done(c, rec, s.zbar().clone());
                }
                s.step(problem)?;
            }
        }
        Algorithm::GdConvex | Algorithm::GdNonconvex => {
            let safeguard = algo == Algorithm::GdNonconvex || problem.curvature() == Curvature::Nonconvex;
            let opt = reference_optimum(problem)?;
            let convex = problem.curvature() == Curvature::Convex;
            let mut s = GdConvexState::init(problem, &x0, Some(safeguard));
            loop {
                // State k holds y_k and z̄_{k−1}.
                let k = s.k;
                let (pot, sub) = match (&opt, convex) {
                    (Some(o), true) => (
                        Some(convex_potential(problem, &s.y, s.zbar(), k, o)),
                        (k >= 2).then(|| sublinear_bound(problem, &x0, k - 1, o)),
                    ),
                    (Some(o), false) => (None, Some(stationarity_rate(problem, &x0, k - 1, o.value))),
                    (None, _) => (None, None),
                };
                rec.push(k, s.f_zbar, Some(s.g_norm()), pot, None, sub);
                let c = s.g_norm() <= opts.tol * l;
                if c || rec.records.len() >= opts.max_iters {
                    return done(c, rec, s.zbar().clone());
                }
                s.step(problem)?;
            }
        }
        Algorithm::Ag => {
            let mut a = Ag::new(problem, &x0, &Sigma0::Computable)?;
            let sigma0 = a.audit.sigma_sq;
            let q = 1.0 - 1.0 / a.state.kappa.sqrt();
            loop {
                a.step(problem);
                let k = a.state.k;
                let lin = sigma0 * q.powi(k as i32);
                rec.push(k, problem.objective(&a.state.x), a.last_g_norm, Some(a.audit.sigma_sq), Some(lin), None);
                let c = a.converged(opts.tol, l);
                if c || rec.records.len() >= opts.max_iters {
                    return done(c, rec, a.state.x.clone());
                }
            }
        }
        Algorithm::Fista => {
            let opt = reference_optimum(problem)?;
            let mut s = FistaState::init(&x0);
            loop {
                s.step(problem);
                let k = s.k;
                let pot = opt.as_ref().map(|o| convex_potential(problem, &s.y(), &s.x, k, o));
                let sub = opt.as_ref().map(|o| sublinear_bound(problem, &x0, k, o));
                rec.push(k, problem.objective(&s.x), s.last_g_norm, pot, None, sub);
                let c = s.converged(opts.tol, l);
                if c || rec.records.len() >= opts.max_iters {
                    return done(c, rec, s.x.clone());
                }
            }
        }
        Algorithm::TrsLanczos => {
            let q = problem.as_quadratic().expect("checked above");
            let delta = problem.ball_radius().expect("checked above");
            if x0.norm() != 0.0 {
                return Err(Error::Incompatible("trs-lanczos starts from the origin".into()));
            }
            let lopts = LanczosOptions { tol: opts.tol, ..LanczosOptions::default() };
            let mut s = LanczosState::init(q, delta, lopts)?;
            let mut rows = Vec::new();
            while !s.converged && rows.len() < opts.max_iters {
                s.step(q)?;
                let g = prox_grad(problem, &s.x).norm();
                rows.push((s.k, problem.objective(&s.x), g, rec.start.elapsed().as_nanos()));
            }
            // The bounds need the final multiplier, known only at the end.
            let spec = SpectralData {
                lambda_min: q.lambda_min(),
                lambda_max: q.lambda_max(),
                mu: s.mu,
                delta,
                f0_gap: -q.value_difference(&s.x, &Vector::zeros(n)),
            };
            for (k, f, g, t) in rows {
                let lin = linear_rate_bound(k, &spec).ok();
                rec.records.push(TraceRecord {
                    k,
                    f_value: f,
                    g_norm: Some(g),
                    potential: None,
                    bound_linear: lin,
                    bound_sublinear: Some(sublinear_rate_bound(k, &spec)),
                    wall_time_ns: t,
                });
            }
            done(s.converged, rec, s.x.clone())
        }
        Algorithm::IaStrong | Algorithm::IaConvex => {
            let opt = reference_optimum(problem)?
                .ok_or_else(|| Error::Incompatible("no exact minimizer available for the idealized run".into()))?;
            let states = if algo == Algorithm::IaStrong {
                ia_strong_run(problem, &x0, &opt.x, opts.max_iters)?
            } else {
                ia_convex_run(problem, &x0, &opt.x, opts.max_iters)?
            };
            let phi1 = states.get(1).and_then(|s| s.potential).unwrap_or(0.0);
            let q = 1.0 - (alpha / l).sqrt();
            let mut converged = false;
            for s in &states[1..] {
                let (lin, sub) = if algo == Algorithm::IaStrong {
                    (Some(phi1 * q.powi(s.k as i32 - 1)), None)
                } else if problem.curvature() == Curvature::Convex {
                    (None, Some(sublinear_bound(problem, &x0, s.k, &opt)))
                } else {
                    (None, Some(stationarity_rate(problem, &x0, s.k, opt.value)))
                };
                rec.push(s.k, s.f_star + s.gap_x, Some(s.g_norm_x), s.potential, lin, sub);
                converged = s.g_norm_x <= opts.tol * l;
                if converged {
                    break;
                }
            }
            let x = states.last().map(|s| s.x.clone()).unwrap_or(x0);
            let converged = converged || states.len() < opts.max_iters + 1;
            done(converged, rec, x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_problem, GeneratorSpec};

    fn canonical() -> CompositeProblem {
        generate_problem(&GeneratorSpec::new(2, 1, "identity", "ball:1").with_b(vec![2.0, 0.0])).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("gd".parse::<Algorithm>().is_err());
    }

    #[test]
    fn canonical_trs() {
        let out = run(&canonical(), Algorithm::TrsLanczos, &RunOptions::default()).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert!((out.f_value + 1.5).abs() < 1e-12);
    }

    #[test]
    fn unit_condition_gd_strong_single_row() {
        let out = run(&canonical(), Algorithm::GdStrong, &RunOptions::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.status, RunStatus::Converged);
    }

    #[test]
    fn incompatible_requests() {
        let p = generate_problem(&GeneratorSpec::new(4, 2, "singular:1:10", "ball:1")).unwrap();
        for a in [Algorithm::GdStrong, Algorithm::Ag, Algorithm::IaStrong] {
            assert!(matches!(run(&p, a, &RunOptions::default()), Err(Error::Incompatible(_))), "{a}");
        }
        let l1 = generate_problem(&GeneratorSpec::new(4, 2, "log-uniform:1:10", "l1:0.1")).unwrap();
        assert!(matches!(run(&l1, Algorithm::TrsLanczos, &RunOptions::default()), Err(Error::Incompatible(_))));
        let nc = generate_problem(&GeneratorSpec::new(4, 2, "one-negative:1:10", "ball:1")).unwrap();
        assert!(matches!(run(&nc, Algorithm::Fista, &RunOptions::default()), Err(Error::Incompatible(_))));
    }

    #[test]
    fn cap_reports_status() {
        let p = generate_problem(&GeneratorSpec::new(30, 4, "log-uniform:1:1000", "zero")).unwrap();
        let out = run(&p, Algorithm::Fista, &RunOptions { max_iters: 3, ..RunOptions::default() }).unwrap();
        assert_eq!(out.status, RunStatus::IterationCap);
        assert_eq!(out.records.len(), 3);
    }
}
