//! Property tests over randomly generated instances.

use compass::chebyshev::{self, Family, SpectralData};
use compass::geometry::{enclose_optimal, enclose_with_lambda, gd_combine};
use compass::harness::generate::{generate_problem, GeneratorSpec};
use compass::harness::run::{run, Algorithm, RunOptions};
use compass::harness::verify::{anchor_for, verify_problem, VerifyOptions, VerifyTarget};
use compass::idealized::Subspace;
use compass::line_search::find_z;
use compass::model::{CompositeProblem, SimpleConvexTerm, SmoothOracle, Vector};
use compass::prox::{forward_backward, prox, prox_grad};
use compass::solvers::GdConvexState;
use compass::trace::{read_trace, write_trace, TraceRecord};
use compass::trs::{dense_trs_oracle, LanczosOptions, LanczosState};
use proptest::prelude::*;

const LAWS: [&str; 4] = ["log-uniform:1:100", "clustered:1:100", "singular:0.01:100", "one-negative:1:100"];
const PSIS: [&str; 4] = ["zero", "ball:1", "box:-0.5:1", "l1:0.3"];

fn instance(n: usize, seed: u64, law: &str, psi: &str) -> CompositeProblem {
    generate_problem(&GeneratorSpec::new(n, seed, law, psi)).unwrap()
}

fn vec_of(n: usize, scale: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0..1.0f64, n).prop_map(move |v| Vector::from_vec(v) * scale)
}

fn slack(scale: f64) -> f64 {
    1e-10 * (1.0 + scale.abs())
}

fn psi_strategy(n: usize) -> impl Strategy<Value = SimpleConvexTerm> {
    prop_oneof![
        Just(SimpleConvexTerm::Zero),
        (0.1..5.0f64).prop_map(|r| SimpleConvexTerm::ball(r).unwrap()),
        (0.0..2.0f64, 0.0..2.0f64).prop_map(move |(a, b)| {
            SimpleConvexTerm::boxed(Vector::from_element(n, -a), Vector::from_element(n, b)).unwrap()
        }),
        (0.0..2.0f64).prop_map(|w| SimpleConvexTerm::l1(w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_smoothness_and_strong_convexity(
        seed in 0..500u64,
        law in prop::sample::select(LAWS.to_vec()),
        x in vec_of(12, 3.0),
        y in vec_of(12, 3.0),
    ) {
        let p = instance(12, seed, law, "zero");
        let q = p.as_quadratic().unwrap();
        let d = &y - &x;
        // f(y) − f(x) − ∇f(x)ᵀ(y−x) = ½ dᵀAd exactly for quadratics.
        let rem = q.value_difference(&y, &x) - q.gradient(&x).dot(&d);
        let scale = q.value(&x).abs() + q.value(&y).abs();
        prop_assert!(rem.abs() <= 0.5 * q.lipschitz() * d.norm_squared() + slack(scale));
        let alpha = q.lambda_min();
        if alpha > 0.0 {
            prop_assert!(rem >= 0.5 * alpha * d.norm_squared() - slack(scale));
        }
    }

    #[test]
    fn prox_is_nonexpansive(
        psi in psi_strategy(6),
        t in 0.01..10.0f64,
        x in vec_of(6, 4.0),
        y in vec_of(6, 4.0),
    ) {
        let d = (prox(&psi, t, &x) - prox(&psi, t, &y)).norm();
        prop_assert!(d <= (&x - &y).norm() * (1.0 + 1e-12));
    }

    #[test]
    fn prox_lands_in_domain(psi in psi_strategy(6), t in 0.01..10.0f64, x in vec_of(6, 4.0)) {
        prop_assert!(psi.value(&prox(&psi, t, &x)).is_finite());
    }

    #[test]
    fn gradient_map_vanishes_at_optimum(
        seed in 0..500u64,
        law in prop::sample::select(vec!["log-uniform:1:100", "one-negative:1:100", "singular:0.01:100"]),
        radius in 0.1..3.0f64,
    ) {
        let p = instance(15, seed, law, &format!("ball:{radius}"));
        let opt = dense_trs_oracle(p.as_quadratic().unwrap(), radius).unwrap();
        let l = p.lipschitz();
        for t in [1.0 / l, 0.5 / l] {
            prop_assert!(forward_backward(&p, t, &opt.x).grad_map.norm() <= 1e-9);
        }
    }

    #[test]
    fn composite_lemmas(
        seed in 0..500u64,
        law in prop::sample::select(LAWS.to_vec()),
        psi in prop::sample::select(PSIS.to_vec()),
        x in vec_of(10, 2.0),
        raw_y in vec_of(10, 2.0),
    ) {
        let p = instance(10, seed, law, psi);
        let (l, alpha) = (p.lipschitz(), p.strong_convexity());
        let pg = prox_grad(&p, &x);
        let g = &pg.grad_map;
        let g2 = g.norm_squared() / (2.0 * l);
        let fx = p.objective(&x);
        if fx.is_finite() {
            prop_assert!(p.objective_difference(&pg.point, &x) <= -g2 + slack(fx));
        }
        let y = prox(p.psi(), 1.0, &raw_y);
        let diff = p.objective_difference(&y, &pg.point);
        let scale = p.objective(&y).abs() + p.objective(&pg.point).abs();
        if alpha >= 0.0 {
            let rhs = g.dot(&(&y - &x)) + g2 + 0.5 * alpha * (&y - &x).norm_squared();
            prop_assert!(diff >= rhs - slack(scale + rhs.abs()), "{diff} < {rhs}");
        }
    }

    #[test]
    fn enclosures_contain_the_intersection(
        rho in 0.1..3.0f64,
        sigma in 0.1..3.0f64,
        u in 0.0..1.0f64,
        lambda in 0.0..1.0f64,
        dir in vec_of(4, 1.0),
        w in (vec_of(4, 1.0), 0.0..1.0f64),
    ) {
        prop_assume!(dir.norm() > 1e-3);
        let lo = (rho - sigma).abs().max(1e-2);
        let delta = lo + u * (rho + sigma - lo);
        let (rho_sq, sigma_sq, delta_sq) = (rho * rho, sigma * sigma, delta * delta);
        prop_assume!((rho_sq - sigma_sq).abs() <= delta_sq);
        let z = Vector::zeros(4);
        let y = &dir / dir.norm() * delta;
        let opt = enclose_optimal(&z, rho_sq, &y, sigma_sq, delta_sq).unwrap();
        let fixed = enclose_with_lambda(&z, rho_sq, &y, sigma_sq, lambda, delta_sq).unwrap();
        prop_assert!(opt.radius_sq <= fixed.radius_sq + 1e-12 * (1.0 + delta_sq));
        // A random point of the smaller ball, kept if it is in both.
        let (c, r) = if rho <= sigma { (&z, rho) } else { (&y, sigma) };
        let (v, s) = w;
        prop_assume!(v.norm() > 1e-6);
        let p = c + &v / v.norm() * (r * s);
        if (&p - &z).norm() <= rho && (&p - &y).norm() <= sigma {
            prop_assert!(opt.contains(&p, 1e-10));
            prop_assert!(fixed.contains(&p, 1e-10));
        }
    }

    #[test]
    fn gd_combine_branches_meet(r2_sq in 0.2..3.0f64, eps in 0.0..0.5f64, c_frac in 0.0..0.2f64) {
        let c = c_frac * r2_sq;
        let z = Vector::zeros(3);
        let y = Vector::from_vec(vec![1.1 * r2_sq.sqrt(), 0.0, 0.0]);
        let h = 1e-10;
        let a = gd_combine(&z, &y, 2.0 * r2_sq * (1.0 - h), r2_sq, eps, c).unwrap();
        let b = gd_combine(&z, &y, 2.0 * r2_sq * (1.0 + h), r2_sq, eps, c).unwrap();
        prop_assert!((&a.enclosure.center - &b.enclosure.center).norm() <= 1e-8);
        prop_assert!((a.enclosure.radius_sq - b.enclosure.radius_sq).abs() <= 1e-8);
    }

    #[test]
    fn line_search_conditions(
        seed in 0..500u64,
        law in prop::sample::select(LAWS.to_vec()),
        psi in prop::sample::select(PSIS.to_vec()),
        x in vec_of(8, 2.0),
        y in vec_of(8, 2.0),
    ) {
        let p = instance(8, seed, law, psi);
        let r = find_z(&p, &x, &y, 1e-8).unwrap();
        let g = &r.prox.grad_map;
        let allow = r.allowance + 4.0 * f64::EPSILON * g.norm() * (&y - &x).norm();
        prop_assert!(g.dot(&(&y - &r.z)) >= -allow);
        prop_assert!(g.dot(&(&x - &r.z)) >= -allow);
        prop_assert!((0.0..=1.0).contains(&r.s));
    }

    #[test]
    fn chebyshev_polynomials_in_range(
        l1 in 0.0..10.0f64,
        width in 0.1..100.0f64,
        mu in 0.0..5.0f64,
        k in 0..40usize,
        u in 0.0..1.0f64,
    ) {
        let s = SpectralData { lambda_min: l1, lambda_max: l1 + width, mu, delta: 1.0, f0_gap: 1.0 };
        prop_assume!(l1 + mu > 0.0);
        let t = l1 + mu + u * width;
        let qa = chebyshev::q_a(k, t, &s).unwrap();
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&qa));
        let qb = chebyshev::q_b(k, u * s.top(), &s);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&qb));
        prop_assert!((chebyshev::q_a(k, 0.0, &s).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!(chebyshev::c_k(k, &s).unwrap() <= chebyshev::c_k_closed_form(k, &s) * (1.0 + 1e-12));
    }

    #[test]
    fn perfect_square_bound(eps in 0.0..=1.0f64) {
        prop_assert!((1.0 - eps) / 2.0 <= 1.0 - eps.sqrt() + 1e-15);
    }

    #[test]
    fn trace_round_trip(
        rows in prop::collection::vec(
            (0..1000usize, -1e6..1e6f64, prop::option::of(0.0..1e3f64), prop::option::of(-1.0..1e3f64), 0..u64::MAX),
            0..20,
        )
    ) {
        let records: Vec<_> = rows
            .into_iter()
            .map(|(k, f, g, pot, t)| TraceRecord {
                k,
                f_value: f,
                g_norm: g,
                potential: pot,
                bound_linear: pot.map(|v| v * 2.0),
                bound_sublinear: None,
                wall_time_ns: t as u128,
            })
            .collect();
        let mut buf = Vec::new();
        write_trace(&mut buf, &records).unwrap();
        prop_assert_eq!(read_trace(std::str::from_utf8(&buf).unwrap()).unwrap(), records);
    }

    #[test]
    fn subspace_projection_and_nesting(
        origin in vec_of(7, 2.0),
        dirs in prop::collection::vec(vec_of(7, 1.0), 1..6),
        p in vec_of(7, 3.0),
    ) {
        let mut m = Subspace::new(origin);
        let mut prev = m.clone();
        for d in &dirs {
            m.add(d);
            prop_assert_eq!(&m.basis[..prev.dim()], &prev.basis[..]);
            prop_assert!(m.projection_residual(&p) <= 1e-10 * (1.0 + p.norm()));
            prev = m.clone();
        }
        let y = m.project(&p);
        for b in &m.basis {
            prop_assert!((&p - &y).dot(b).abs() <= 1e-10 * (1.0 + p.norm()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparator_feasible_and_dominates_gap(seed in 0..500u64, radius in 0.05..2.0f64) {
        let spec = GeneratorSpec::new(30, seed, "log-uniform:0.5:50", &format!("ball:{radius}")).diagonal();
        let p = generate_problem(&spec).unwrap();
        let q = p.as_quadratic().unwrap();
        let opt = dense_trs_oracle(q, radius).unwrap();
        let d: Vec<f64> = q.eigenvalues().iter().copied().collect();
        let b = q.b().as_slice().to_vec();
        let zero = Vector::zeros(30);
        let f0_gap = q.value_difference(&zero, &opt.x);
        let s = SpectralData { lambda_min: q.lambda_min(), lambda_max: q.lambda_max(), mu: opt.mu, delta: radius, f0_gap };
        if opt.mu > 0.0 {
            prop_assert!(f0_gap >= 0.5 * opt.mu * radius * radius * (1.0 - 1e-10));
        }
        let mut st = LanczosState::init(q, radius, LanczosOptions::default()).unwrap();
        while !st.converged && st.k < 60 {
            st.step(q).unwrap();
            let gap = q.value_difference(&st.x, &opt.x);
            for fam in [Family::A, Family::B] {
                let y = chebyshev::comparator(fam, st.k, &d, &b, &s).unwrap();
                prop_assert!(y.norm() <= radius * (1.0 + 1e-10));
                let (t1, t2) = chebyshev::comparator_terms(fam, st.k, &d, &b, &s).unwrap();
                prop_assert!(t1 + t2 >= gap - slack(f0_gap));
            }
        }
    }

    #[test]
    fn gd_strong_certificates(seed in 0..500u64, law in prop::sample::select(vec!["log-uniform:1:100", "clustered:1:50"])) {
        let p = instance(20, seed, law, "ball:1");
        let x0 = Vector::zeros(20);
        let opts = VerifyOptions::default();
        for algo in [Algorithm::GdStrong, Algorithm::Ag] {
            let checks = verify_problem(&p, VerifyTarget::Algorithm(algo), &x0, seed, &opts).unwrap();
            for c in &checks {
                prop_assert!(c.passed, "{} failed on seed {seed}", c.check_name);
                prop_assert!(anchor_for(&c.check_name).is_some());
            }
        }
    }

    #[test]
    fn safeguarded_descent_budget(seed in 0..500u64, psi in prop::sample::select(vec!["ball:1", "box:-0.5:1"])) {
        let p = instance(15, seed, "one-negative:1:100", psi);
        let l = p.lipschitz();
        let x0 = Vector::zeros(15);
        let f_star = match p.ball_radius() {
            Some(r) => p.objective(&dense_trs_oracle(p.as_quadratic().unwrap(), r).unwrap().x),
            None => {
                // Crude lower bound from ‖x‖² ≤ n on the box.
                let q = p.as_quadratic().unwrap();
                -(q.b().norm() * 15f64.sqrt()) - 0.5 * q.lipschitz() * 15.0
            }
        };
        let f0 = p.objective(&x0);
        let mut s = GdConvexState::init(&p, &x0, Some(true));
        let mut spent = 0.0;
        let mut prev = s.f_zbar;
        for _ in 0..200 {
            if s.g_norm() <= 1e-8 * l {
                break;
            }
            s.step(&p).unwrap();
            let g = s.last_step.as_ref().unwrap().g_norm_at_start.unwrap();
            spent += g * g / (2.0 * l);
            prop_assert!(s.f_zbar <= prev + slack(prev));
            prev = s.f_zbar;
        }
        prop_assert!(spent <= f0 - f_star + slack(f_star));
    }

    #[test]
    fn runs_are_deterministic(
        seed in 0..500u64,
        algo in prop::sample::select(vec![Algorithm::GdStrong, Algorithm::Ag, Algorithm::GdConvex, Algorithm::Fista, Algorithm::IaStrong, Algorithm::TrsLanczos]),
    ) {
        let p = instance(12, seed, "log-uniform:1:100", "ball:1");
        let opts = RunOptions { max_iters: 40, ..RunOptions::default() };
        let (a, b) = (run(&p, algo, &opts).unwrap(), run(&p, algo, &opts).unwrap());
        let strip = |r: &[TraceRecord]| r.iter().map(|t| TraceRecord { wall_time_ns: 0, ..t.clone() }).collect::<Vec<_>>();
        prop_assert_eq!(strip(&a.records), strip(&b.records));
        prop_assert_eq!(a.x, b.x);
    }
}
