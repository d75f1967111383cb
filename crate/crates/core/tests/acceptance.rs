//! Acceptance suite: every criterion runs as one test and prints a
//! `criterion N ... PASS` line with its runtime.
//!
//! Run with `cargo test -p lasso-sens --test acceptance -- --nocapture`
//! to see the per-criterion report.

use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use lasso_sens::experiments::{
    empirical_rip, generate_matrix, run_lambda_sweep, EnsembleKind, EnsembleSpec,
    ExperimentConfig, LambdaGrid, RipMode, SignalModel,
};
use lasso_sens::linalg::{self, columns, dot, nrm1, nrm2, nrm_inf, Matrix};
use lasso_sens::rng::CounterRng;
use lasso_sens::sensitivity::{
    check_assumptions, derivative_strong, directional_derivative, fuchs_explicit, lipschitz_bounds,
    value_gradient, AssumptionReport, Tolerances, WeakVerdict,
};
use lasso_sens::solver::{
    dual_gap, objective, optimality_residual, soft_threshold, solve, solve_with, LassoSolution,
    ProblemInstance,
};

// ---------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------

fn example_instance(lambda: f64) -> ProblemInstance {
    let a = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 2.0, -2.0]]).unwrap();
    ProblemInstance::new(a, vec![1.0, 1.0], lambda).unwrap()
}

fn gaussian(m: usize, n: usize, seed: u64) -> Matrix {
    generate_matrix(&EnsembleSpec { kind: EnsembleKind::Gaussian, m, n, normalized: true, seed })
}

fn unit_columns(a: &Matrix) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..a.cols())
        .map(|j| {
            let c = a.col(j);
            let norm = nrm2(&c);
            c.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    Matrix::from_cols(a.rows(), &cols).unwrap()
}

/// Every assumption report produced anywhere in the suite flows through
/// here, so a violation of the implication chain strong => intermediate
/// => weak-holds fails the criterion that produced it (criterion 10).
fn record_chain(tag: &str, rep: &AssumptionReport) {
    assert!(
        !(rep.strong && !rep.intermediate),
        "[{tag}] strong held without intermediate"
    );
    assert!(
        !(rep.intermediate && rep.weak == WeakVerdict::Fails),
        "[{tag}] intermediate held while weak failed"
    );
    chain_log().lock().unwrap().push((rep.strong, rep.intermediate, rep.weak));
}

fn chain_log() -> &'static Mutex<Vec<(bool, bool, WeakVerdict)>> {
    static LOG: OnceLock<Mutex<Vec<(bool, bool, WeakVerdict)>>> = OnceLock::new();
    LOG.get_or_init(|| Mutex::new(Vec::new()))
}

fn checked_assumptions(
    tag: &str,
    inst: &ProblemInstance,
    sol: &LassoSolution,
) -> AssumptionReport {
    let rep = check_assumptions(inst, sol, &Tolerances::default()).expect(tag);
    record_chain(tag, &rep);
    rep
}

fn pass(criterion: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion {criterion}: PASS ({elapsed:.2} s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2} s >= {budget_s} s"
    );
}

// ---------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------

#[test]
fn criterion_01_worked_example_replay() {
    let t0 = Instant::now();

    let inst = example_instance(1.0);
    let sol = solve(&inst, 1e-10, 100_000).unwrap();
    assert!(nrm2(&linalg::sub(&sol.x, &[0.0, 0.25, 0.0])) < 1e-6);
    let rep = checked_assumptions("c1 lambda=1", &inst, &sol);
    assert_eq!(rep.weak, WeakVerdict::Holds);
    assert!(!rep.intermediate);
    assert!(!rep.strong);
    assert!(rep.strong_margin.abs() < 1e-8, "margin {}", rep.strong_margin);

    let inst = example_instance(1.5);
    let sol = solve(&inst, 1e-10, 100_000).unwrap();
    assert!(nrm2(&linalg::sub(&sol.x, &[0.0, 0.125, 0.0])) < 1e-6);
    let rep = checked_assumptions("c1 lambda=1.5", &inst, &sol);
    assert!(rep.strong);
    assert!(rep.intermediate);
    assert_eq!(rep.weak, WeakVerdict::Holds);
    assert!((rep.strong_margin - 0.5).abs() < 1e-8);

    pass("01 worked-example replay", t0, 1.0);
}

#[test]
fn criterion_02_nonuniqueness_family() {
    let t0 = Instant::now();
    let lambda = 0.5;
    let inst = example_instance(lambda);

    let mut objectives = Vec::new();
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    let mut l1s = Vec::new();
    for k in 0..10 {
        let t = 0.25 * (k as f64) / 10.0; // 10 values in [0, 0.25)
        let x = vec![0.5 - 2.0 * t, (1.5 + 4.0 * t) / 4.0, t];
        assert!(
            optimality_residual(&inst, &x) <= 1e-10,
            "family point t={t} is not optimal"
        );
        objectives.push(objective(&inst, &x));
        residuals.push(linalg::sub(inst.rhs(), &inst.matrix().matvec(&x)));
        l1s.push(nrm1(&x));
    }
    for k in 1..10 {
        assert!((objectives[k] - objectives[0]).abs() < 1e-12);
        assert!(nrm2(&linalg::sub(&residuals[k], &residuals[0])) < 1e-12);
        assert!((l1s[k] - l1s[0]).abs() < 1e-12);
    }

    // residual constancy makes the equicorrelation set identical across
    // optimal points
    let eq0 = lasso_sens::sensitivity::equicorrelation(
        &inst,
        &[0.5, 0.375, 0.0],
        Tolerances::default().eps_eq,
    );
    for k in 1..10 {
        let t = 0.25 * (k as f64) / 10.0;
        let x = vec![0.5 - 2.0 * t, (1.5 + 4.0 * t) / 4.0, t];
        let eq = lasso_sens::sensitivity::equicorrelation(&inst, &x, Tolerances::default().eps_eq);
        assert_eq!(eq, eq0, "equicorrelation differs across the solution family");
    }

    pass("02 non-uniqueness family constancy", t0, 1.0);
}

#[test]
fn criterion_03_derivative_sharpness() {
    let t0 = Instant::now();
    let inst = example_instance(1.5);
    let sol = solve(&inst, 1e-12, 100_000).unwrap();

    let w = derivative_strong(&inst, &sol, &[0.0, 0.0], 1.0, &Tolerances::default()).unwrap();
    assert!(nrm_inf(&linalg::sub(&w, &[0.0, -0.25, 0.0])) < 1e-10);

    let rep = checked_assumptions("c3", &inst, &sol);
    let bounds = lipschitz_bounds(&inst, &sol, &rep).unwrap();
    assert!(
        (bounds.lipschitz_lambda - 0.25).abs() < 1e-14,
        "lambda bound {} is not the analytic 1/4",
        bounds.lipschitz_lambda
    );

    // the bound is attained along the whole strong interval
    let x_ref = &sol.x;
    let mut warm: Option<Vec<f64>> = None;
    for k in 0..=16 {
        let lambda = 1.1 + 0.05 * k as f64;
        let inst_l = example_instance(lambda);
        let sol_l =
            solve_with(&inst_l, 1e-12, 100_000, warm.as_deref(), &Tolerances::default()).unwrap();
        let dist = nrm2(&linalg::sub(&sol_l.x, x_ref));
        assert!(
            (dist - 0.25 * (lambda - 1.5).abs()).abs() < 1e-8,
            "lambda {lambda}: distance {dist}"
        );
        warm = Some(sol_l.x);
    }

    pass("03 derivative sharpness in lambda", t0, 2.0);
}

/// Builds a random strong-assumption instance; returns it solved.
fn random_strong_instance(seed: u64) -> Option<(ProblemInstance, LassoSolution)> {
    let m = 20;
    let n = 50;
    let a = gaussian(m, n, seed);
    let mut rng = CounterRng::new(seed ^ 0xABCD_EF01);
    let mut x0 = vec![0.0; n];
    for item in x0.iter_mut().take(3) {
        *item = rng.next_sign() * (1.0 + rng.next_f64());
    }
    let mut b = a.matvec(&x0);
    for bi in b.iter_mut() {
        *bi += 0.05 * rng.next_normal();
    }
    let lambda = 0.25 * nrm_inf(&a.matvec_t(&b));
    let inst = ProblemInstance::new(a, b, lambda).ok()?;
    let sol = solve(&inst, 1e-12, 200_000).ok()?;
    if sol.support.is_empty() {
        return None;
    }
    // strong needs I = J and a healthy margin; filter cheaply before the
    // full report
    if sol.support != sol.equicorrelation {
        return None;
    }
    Some((inst, sol))
}

#[test]
fn criterion_04_finite_difference_oracle() {
    let t0 = Instant::now();
    let tols = Tolerances::default();
    let step = 1e-6;

    let mut accepted = 0;
    let mut seed = 0u64;
    while accepted < 25 {
        seed += 1;
        assert!(seed < 500, "could not assemble 25 strong instances");
        let Some((inst, sol)) = random_strong_instance(seed) else { continue };
        let rep = checked_assumptions("c4", &inst, &sol);
        if !rep.strong {
            continue;
        }
        accepted += 1;

        if accepted == 1 {
            derivative_linearity_battery(&inst, &sol);
            fd_decay_battery(&inst, &sol);
            local_lipschitz_certificate(&inst, &sol);
        }

        let m = inst.matrix().rows();
        let mut rng = CounterRng::new(seed ^ 0x5EED);
        for _ in 0..2 {
            let q: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
            let alpha = rng.next_normal();

            let w = derivative_strong(&inst, &sol, &q, alpha, &tols).unwrap();
            let dd = directional_derivative(&inst, &sol, &q, alpha, &tols).unwrap();
            assert!(
                nrm_inf(&linalg::sub(&dd.w, &w)) < 1e-10,
                "enumerated and closed-form derivatives disagree (seed {seed})"
            );

            let b2: Vec<f64> =
                inst.rhs().iter().zip(&q).map(|(bi, qi)| bi + step * qi).collect();
            let inst2 = ProblemInstance::new(
                inst.matrix().clone(),
                b2,
                inst.lambda() + step * alpha,
            )
            .unwrap();
            let sol2 = solve_with(&inst2, 1e-12, 200_000, Some(&sol.x), &tols).unwrap();
            for (i, ((x2, x1), wi)) in sol2.x.iter().zip(&sol.x).zip(&w).enumerate() {
                let fd = (x2 - x1) / step;
                assert!(
                    (fd - wi).abs() < 1e-4,
                    "seed {seed} coord {i}: fd {fd} vs derivative {wi}"
                );
            }
        }
    }

    pass("04 finite-difference derivative oracle", t0, 30.0);
}

/// The derivative map (q, alpha) -> w is linear and the enumerated route
/// agrees with the closed form, over 100 random directions.
fn derivative_linearity_battery(inst: &ProblemInstance, sol: &LassoSolution) {
    let tols = Tolerances::default();
    let m = inst.matrix().rows();
    let mut rng = CounterRng::new(0xD1CE);
    for _ in 0..100 {
        let q1: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let q2: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let (a1, a2) = (rng.next_normal(), rng.next_normal());
        let c = 2.0 * rng.next_normal();

        let w1 = derivative_strong(inst, sol, &q1, a1, &tols).unwrap();
        let dd1 = directional_derivative(inst, sol, &q1, a1, &tols).unwrap();
        assert!(nrm_inf(&linalg::sub(&dd1.w, &w1)) < 1e-10);

        let w2 = derivative_strong(inst, sol, &q2, a2, &tols).unwrap();
        let qsum: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| x + y).collect();
        let wsum = derivative_strong(inst, sol, &qsum, a1 + a2, &tols).unwrap();
        let additive: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| x + y).collect();
        assert!(nrm_inf(&linalg::sub(&wsum, &additive)) < 1e-10, "additivity");

        let qc: Vec<f64> = q1.iter().map(|x| c * x).collect();
        let wc = derivative_strong(inst, sol, &qc, c * a1, &tols).unwrap();
        let scaled: Vec<f64> = w1.iter().map(|x| c * x).collect();
        assert!(nrm_inf(&linalg::sub(&wc, &scaled)) < 1e-10, "homogeneity");
    }
}

/// One-sided difference quotients approach the derivative at first order
/// in the step (trivially fast here, since the map is locally affine).
fn fd_decay_battery(inst: &ProblemInstance, sol: &LassoSolution) {
    let tols = Tolerances::default();
    let m = inst.matrix().rows();
    let mut rng = CounterRng::new(0xFD0);
    let q: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
    let alpha = rng.next_normal();
    let w = derivative_strong(inst, sol, &q, alpha, &tols).unwrap();
    for t in [1e-4, 1e-5, 1e-6] {
        let b2: Vec<f64> = inst.rhs().iter().zip(&q).map(|(bi, qi)| bi + t * qi).collect();
        let inst2 =
            ProblemInstance::new(inst.matrix().clone(), b2, inst.lambda() + t * alpha).unwrap();
        let sol2 = solve_with(&inst2, 1e-12, 200_000, Some(&sol.x), &tols).unwrap();
        let fd: Vec<f64> =
            sol2.x.iter().zip(&sol.x).map(|(x2, x1)| (x2 - x1) / t).collect();
        let err = nrm2(&linalg::sub(&fd, &w));
        assert!(err <= 10.0 * t + 1e-6, "first-order decay violated at t={t}: {err:.3e}");
    }
}

/// On a grid of tuning parameters within five percent of the base point,
/// the lambda-mode Lipschitz bound certifies the observed movement.
fn local_lipschitz_certificate(inst: &ProblemInstance, sol: &LassoSolution) {
    let tols = Tolerances::default();
    let rep = check_assumptions(inst, sol, &tols).unwrap();
    let bounds = lipschitz_bounds(inst, sol, &rep).unwrap();
    let lambda = inst.lambda();
    for k in -5i32..=5 {
        let lp = lambda * (1.0 + 0.01 * k as f64);
        let instp = inst.with_lambda(lp).unwrap();
        let solp = solve_with(&instp, 1e-12, 200_000, Some(&sol.x), &tols).unwrap();
        let moved = nrm2(&linalg::sub(&solp.x, &sol.x));
        assert!(
            moved <= bounds.lipschitz_lambda * (lp - lambda).abs() + 10.0 * 1e-12,
            "Lipschitz certificate violated at lambda' = {lp}"
        );
    }
}

#[test]
fn criterion_05_value_function() {
    let t0 = Instant::now();
    let tols = Tolerances::default();

    // (a) central differences of the optimal value match (b - Ax, ||x||_1)
    let solve_p = |inst: &ProblemInstance, warm: Option<&[f64]>| -> (f64, Vec<f64>) {
        let sol = solve_with(inst, 1e-12, 200_000, warm, &tols).unwrap();
        (sol.objective, sol.x)
    };
    for seed in 0..10u64 {
        let m = 10;
        let n = 6;
        let a = gaussian(m, n, 100 + seed);
        let mut rng = CounterRng::new(300 + seed);
        let b: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let lambda = 0.3 * nrm_inf(&a.matvec_t(&b)).max(0.1);
        let inst = ProblemInstance::new(a.clone(), b.clone(), lambda).unwrap();
        let sol = solve(&inst, 1e-12, 200_000).unwrap();
        let (grad_b, grad_l) = value_gradient(&inst, &sol);

        let h = 1e-6;
        let mut fd = Vec::with_capacity(m + 1);
        for i in 0..m {
            let mut bp = b.clone();
            let mut bm = b.clone();
            bp[i] += h;
            bm[i] -= h;
            let (pp, _) = solve_p(&inst.with_rhs(bp).unwrap(), Some(&sol.x));
            let (pm, _) = solve_p(&inst.with_rhs(bm).unwrap(), Some(&sol.x));
            fd.push((pp - pm) / (2.0 * h));
        }
        let (pp, _) = solve_p(&inst.with_lambda(lambda + h).unwrap(), Some(&sol.x));
        let (pm, _) = solve_p(&inst.with_lambda(lambda - h).unwrap(), Some(&sol.x));
        fd.push((pp - pm) / (2.0 * h));

        let mut exact = grad_b.clone();
        exact.push(grad_l);
        let rel = nrm2(&linalg::sub(&fd, &exact)) / nrm2(&exact).max(1e-12);
        assert!(rel < 1e-5, "seed {seed}: value-gradient mismatch {rel:.3e}");
    }

    // (b) boundary limit: p -> 0.5 d^2_{range A}(b) as lambda -> 0, monotonically.
    // The instance is scaled so the stated absolute tolerance is meaningful:
    // the excess at lambda is about lambda * ||x_ls||_1.
    let a = gaussian(10, 4, 77);
    let mut rng = CounterRng::new(78);
    let b: Vec<f64> = (0..10).map(|_| 0.25 * rng.next_normal()).collect();
    let proj = linalg::project_range(&a, &b).unwrap();
    let half_dist_sq = 0.5 * dot(&linalg::sub(&b, &proj), &linalg::sub(&b, &proj));
    let lambda0 = nrm_inf(&a.matvec_t(&b));
    let mut prev_excess = f64::INFINITY;
    let mut warm: Option<Vec<f64>> = None;
    for k in 1..=6 {
        let lambda = lambda0 * 10f64.powi(-k);
        let inst = ProblemInstance::new(a.clone(), b.clone(), lambda).unwrap();
        let sol = solve_with(&inst, 1e-12, 400_000, warm.as_deref(), &tols).unwrap();
        let excess = sol.objective - half_dist_sq;
        assert!(excess >= -1e-10, "value dipped under the range-distance limit");
        assert!(excess <= prev_excess + 1e-12, "convergence is not monotone");
        prev_excess = excess;
        warm = Some(sol.x);
    }
    assert!(prev_excess.abs() < 1e-6, "boundary limit off by {prev_excess:.3e}");

    // (c) midpoint convexity in b, midpoint concavity in lambda
    for seed in 0..100u64 {
        let m = 6;
        let n = 4;
        let a = gaussian(m, n, 500 + seed);
        let mut rng = CounterRng::new(900 + seed);
        let b1: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let b2: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        let lambda1 = 0.2 + rng.next_f64();
        let lambda2 = 0.2 + rng.next_f64();

        let p = |b: &[f64], l: f64| -> f64 {
            let inst = ProblemInstance::new(a.clone(), b.to_vec(), l).unwrap();
            solve(&inst, 1e-12, 200_000).unwrap().objective
        };

        let mid_b: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| 0.5 * (x + y)).collect();
        assert!(
            p(&mid_b, lambda1) <= 0.5 * (p(&b1, lambda1) + p(&b2, lambda1)) + 1e-9,
            "convexity in b violated at seed {seed}"
        );
        assert!(
            p(&b1, 0.5 * (lambda1 + lambda2))
                >= 0.5 * (p(&b1, lambda1) + p(&b1, lambda2)) - 1e-9,
            "concavity in lambda violated at seed {seed}"
        );
    }

    pass("05 value-function gradient, limit, curvature", t0, 20.0);
}

#[test]
fn criterion_06_soft_thresholding_equivalence() {
    let t0 = Instant::now();
    let n = 20;
    let identity = Matrix::identity(n);
    let mut rng = CounterRng::new(616);
    for _ in 0..50 {
        let b: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_normal()).collect();
        let lambda = 0.1 + rng.next_f64();
        let inst = ProblemInstance::new(identity.clone(), b.clone(), lambda).unwrap();
        let sol = solve(&inst, 1e-12, 100_000).unwrap();
        let expected = soft_threshold(&b, lambda).unwrap();
        assert!(nrm_inf(&linalg::sub(&sol.x, &expected)) < 1e-10);
    }

    // signed permutation: ||Ax - b|| = ||x - A^T b||, so the solution is
    // soft thresholding of A^T b
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.next_below(i + 1));
    }
    let mut rows = vec![vec![0.0; n]; n];
    for (i, &j) in perm.iter().enumerate() {
        rows[i][j] = rng.next_sign();
    }
    let signed_perm = Matrix::from_rows(&rows).unwrap();
    let b: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_normal()).collect();
    let lambda = 0.6;
    let inst = ProblemInstance::new(signed_perm.clone(), b.clone(), lambda).unwrap();
    let sol = solve(&inst, 1e-12, 100_000).unwrap();
    let expected = soft_threshold(&signed_perm.matvec_t(&b), lambda).unwrap();
    assert!(nrm_inf(&linalg::sub(&sol.x, &expected)) < 1e-10);

    pass("06 soft-thresholding equivalence on A = I", t0, 5.0);
}

#[test]
fn criterion_07_fuchs_explicit_solution() {
    let t0 = Instant::now();
    let tols = Tolerances::default();
    let (m, n, s) = (20usize, 40usize, 2usize);

    // The coherence condition ||x0||_0 < (1 + 1/mu)/2 needs mu < 1/3 at
    // s = 2; Gaussian matrices at (m, n) = (20, 40) concentrate around
    // mu ~ 0.7, so qualifying seeds are accepted if they ever appear and
    // the dual certificate condition |A_{I0^C}^T A_{I0}^+ sgn| < 1 (which
    // the coherence bound exists to imply) is the operative filter.
    let mut coherence_qualified = 0usize;
    let mut tested = 0usize;
    let mut seed = 0u64;
    while tested < 10 && seed < 4000 {
        seed += 1;
        let a = unit_columns(&gaussian(m, n, 7000 + seed));
        let mut rng = CounterRng::new(31 * seed);
        let mut x0 = vec![0.0; n];
        for _ in 0..s {
            loop {
                let i = rng.next_below(n);
                if x0[i] == 0.0 {
                    x0[i] = rng.next_sign() * (1.0 + rng.next_f64());
                    break;
                }
            }
        }
        let fuchs = fuchs_explicit(&a, &x0, 0.0).unwrap();
        if fuchs.condition_ok {
            coherence_qualified += 1;
        } else if fuchs.dual_infnorm >= 1.0 - 1e-9 {
            continue; // explicit formula not certified for this draw
        }
        if !fuchs.lambda_max.is_finite() {
            continue;
        }
        tested += 1;

        let lambda = fuchs.lambda_max / 2.0;
        let fuchs = fuchs_explicit(&a, &x0, lambda).unwrap();
        let b = a.matvec(&x0);
        let inst = ProblemInstance::new(a.clone(), b, lambda).unwrap();
        let sol = solve(&inst, 1e-12, 200_000).unwrap();
        assert!(
            nrm2(&linalg::sub(&sol.x, &fuchs.x_bar)) < 1e-6,
            "seed {seed}: explicit and solver disagree"
        );

        let rep = checked_assumptions("c7", &inst, &sol);
        assert!(rep.strong, "seed {seed}: strong assumption should hold");

        // exact derivative magnitude obeys sqrt(s) / sigma_min^2
        let a_i0 = columns(&a, &fuchs.support).unwrap();
        let (smin, _) = linalg::svd_extremes(&a_i0).unwrap();
        assert!(
            fuchs.derivative_norm <= (s as f64).sqrt() / (smin * smin) + 1e-12,
            "seed {seed}: derivative norm exceeds its bound"
        );
    }
    assert_eq!(tested, 10, "could not assemble 10 certified instances");
    println!(
        "  (criterion 07 note: {coherence_qualified}/10 draws met the coherence \
         condition at (20, 40); the dual certificate filtered the rest)"
    );

    // The coherence-condition branch itself, on a tall matrix where it is
    // satisfiable, drives the same chain of conclusions.
    let a = unit_columns(&gaussian(200, 40, 4242));
    let mu = linalg::coherence(&a).unwrap();
    assert!(mu < 1.0 / 3.0, "tall Gaussian should have small coherence, got {mu}");
    let mut x0 = vec![0.0; 40];
    x0[3] = 1.5;
    x0[17] = -2.5;
    let fuchs0 = fuchs_explicit(&a, &x0, 0.0).unwrap();
    assert!(fuchs0.condition_ok, "coherence condition must hold at (200, 40)");
    let lambda = fuchs0.lambda_max / 2.0;
    let fuchs = fuchs_explicit(&a, &x0, lambda).unwrap();
    let b = a.matvec(&x0);
    let inst = ProblemInstance::new(a.clone(), b, lambda).unwrap();
    let sol = solve_with(&inst, 1e-12, 200_000, None, &tols).unwrap();
    assert!(nrm2(&linalg::sub(&sol.x, &fuchs.x_bar)) < 1e-6);
    let rep = checked_assumptions("c7 tall", &inst, &sol);
    assert!(rep.strong);

    pass("07 explicit coherence-regime solution", t0, 10.0);
}

/// Independent singular-value oracle for an m x 3 submatrix: closed-form
/// eigenvalues of the 3x3 Gram matrix by the trigonometric method.
fn gram3_singular_values(cols: [&[f64]; 3]) -> [f64; 3] {
    let mut g = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = dot(cols[i], cols[j]);
        }
    }
    let p1 = g[0][1] * g[0][1] + g[0][2] * g[0][2] + g[1][2] * g[1][2];
    let eigs = if p1 == 0.0 {
        [g[0][0], g[1][1], g[2][2]]
    } else {
        let q = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
        let p2 = (g[0][0] - q).powi(2) + (g[1][1] - q).powi(2) + (g[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut bmat = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                bmat[i][j] = (g[i][j] - if i == j { q } else { 0.0 }) / p;
            }
        }
        let detb = bmat[0][0] * (bmat[1][1] * bmat[2][2] - bmat[1][2] * bmat[2][1])
            - bmat[0][1] * (bmat[1][0] * bmat[2][2] - bmat[1][2] * bmat[2][0])
            + bmat[0][2] * (bmat[1][0] * bmat[2][1] - bmat[1][1] * bmat[2][0]);
        let r = (detb / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    };
    let mut sv = eigs.map(|e| e.max(0.0).sqrt());
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

#[test]
fn criterion_08_empirical_rip_vs_brute_force() {
    let t0 = Instant::now();

    // exhaustive mode against the independent Gram-eigenvalue oracle
    let a = gaussian(30, 12, 808);
    let report = empirical_rip(&a, 3, RipMode::Exhaustive, 0).unwrap();
    assert_eq!(report.subsets_checked, 220);

    let cols: Vec<Vec<f64>> = (0..12).map(|j| a.col(j)).collect();
    let mut oracle_min = f64::INFINITY;
    let mut oracle_max: f64 = 0.0;
    let mut oracle_count = 0;
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                let sv = gram3_singular_values([&cols[i], &cols[j], &cols[k]]);
                oracle_max = oracle_max.max(sv[0]);
                oracle_min = oracle_min.min(sv[2]);
                oracle_count += 1;
            }
        }
    }
    assert_eq!(oracle_count, 220);
    assert!(
        (report.min_sigma_min - oracle_min).abs() < 1e-10,
        "min: {} vs oracle {}",
        report.min_sigma_min,
        oracle_min
    );
    assert!(
        (report.max_sigma_max - oracle_max).abs() < 1e-10,
        "max: {} vs oracle {}",
        report.max_sigma_max,
        oracle_max
    );
    let expected_delta = (1.0 - oracle_min).max(oracle_max - 1.0);
    assert!((report.delta_hat - expected_delta).abs() < 1e-10);

    // 20 seeded trials: no singular 3-column submatrix at (n, m) = (40, 32)
    for seed in 0..20u64 {
        let a = gaussian(32, 40, 2000 + seed);
        let rep = empirical_rip(&a, 3, RipMode::Exhaustive, 0).unwrap();
        assert!(rep.delta_hat < 1.0, "seed {seed}: delta_hat {}", rep.delta_hat);
    }

    pass("08 empirical RIP vs brute force", t0, 30.0);
}

#[test]
fn criterion_09_lambda_sweep_bound_domination() {
    let t0 = Instant::now();
    let n = 200;
    let gamma = 0.1;

    let mut nonvacuous = 0usize;
    for (idx, &(s, m)) in [(3usize, 50usize), (3, 100), (7, 50), (7, 100)].iter().enumerate() {
        let spec = EnsembleSpec {
            kind: EnsembleKind::Gaussian,
            m,
            n,
            normalized: true,
            seed: 9100 + idx as u64,
        };
        let config = ExperimentConfig {
            spec: spec.clone(),
            s,
            gamma,
            lambda_grid: LambdaGrid { count: 101, center: None, log_span: 100.0 },
            trial_seed: 40 + idx as u64,
            signal_model: SignalModel::ShiftedGaussian,
            solver_tol: 1e-10,
            max_iter: 400_000,
        };
        let sweep = run_lambda_sweep(&config).unwrap();
        println!(
            "  (criterion 09: s={s} m={m}: strong={} s*={} L={:?} validity=[{:.4}, {:.4}] \
             lambda*={:.4} gt_err={:.3e})",
            sweep.strong_holds_at_star,
            sweep.support_size_star,
            sweep.l_bound,
            sweep.validity_lo,
            sweep.validity_hi,
            sweep.lambda_star,
            sweep.ground_truth_error,
        );

        let star_row = sweep.rows.iter().find(|r| r.lambda == sweep.lambda_star).unwrap();
        assert_eq!(star_row.error, 0.0);

        if sweep.strong_holds_at_star && sweep.l_bound.is_some() {
            // the bound dominates the error on the reported validity interval
            for row in &sweep.rows {
                if row.lambda >= sweep.validity_lo
                    && row.lambda <= sweep.validity_hi
                    && row.error > 0.0
                {
                    let ratio = row.ratio.unwrap();
                    assert!(
                        ratio >= 1.0 - 1e-9,
                        "(s={s}, m={m}): bound fails to dominate at lambda {}",
                        row.lambda
                    );
                }
            }
            if sweep.validity_lo < sweep.lambda_star && sweep.lambda_star < sweep.validity_hi {
                nonvacuous += 1;
            }
        }

        // Foucart sparsity cap with the measured isometry defect
        let a = generate_matrix(&spec);
        let rip = empirical_rip(&a, s, RipMode::Sampled { count: 1000 }, 77 + idx as u64).unwrap();
        if rip.delta_hat < 1.0 {
            let gamma_rip = (1.0 + rip.delta_hat) / (1.0 - rip.delta_hat);
            let cap = (36.0 * gamma_rip * gamma_rip * s as f64).floor() as usize;
            let threshold = 2.0 * (1.0 + rip.delta_hat) * sweep.noise_norm;
            for row in &sweep.rows {
                if row.lambda > threshold {
                    assert!(
                        row.support_size <= cap,
                        "(s={s}, m={m}): sparsity {} above cap {cap} at lambda {}",
                        row.support_size,
                        row.lambda
                    );
                }
            }
        }
    }

    // grid spacing can exceed the support-constancy radius, so not every
    // sweep is forced to carry a non-trivial interval; at least one must
    assert!(nonvacuous >= 1, "every sweep produced a degenerate validity interval");

    pass("09 lambda-sweep bound domination and sparsity caps", t0, 90.0);
}

#[test]
fn criterion_10_assumption_chain() {
    let t0 = Instant::now();

    // a dedicated batch covering all regimes: wide/tall/identity matrices,
    // lambda above and below the zero threshold, and the worked example
    let mut batch = 0;
    for seed in 0..40u64 {
        let (m, n) = match seed % 4 {
            0 => (6, 12),
            1 => (12, 6),
            2 => (10, 10),
            _ => (8, 20),
        };
        let a = if seed % 5 == 0 { Matrix::identity(m.min(n)) } else { gaussian(m, n, 3000 + seed) };
        let rows = a.rows();
        let mut rng = CounterRng::new(6000 + seed);
        let b: Vec<f64> = (0..rows).map(|_| rng.next_normal()).collect();
        let lam_top = nrm_inf(&a.matvec_t(&b));
        if lam_top <= 0.0 {
            continue;
        }
        let frac = match seed % 3 {
            0 => 0.15,
            1 => 0.6,
            _ => 1.2, // above the threshold: x = 0
        };
        let inst = ProblemInstance::new(a, b, frac * lam_top).unwrap();
        let Ok(sol) = solve(&inst, 1e-10, 400_000) else { continue };
        if check_assumptions(&inst, &sol, &Tolerances::default()).is_ok() {
            let rep = checked_assumptions("c10 batch", &inst, &sol);
            let _ = rep;
            batch += 1;
        }
    }
    // the worked example across its three regimes; in the non-unique band
    // the family points are optimal in exact arithmetic, so they can be
    // analyzed directly without a solve
    for lambda in [1.0, 1.25, 1.5, 1.75] {
        let inst = example_instance(lambda);
        let sol = solve(&inst, 1e-10, 200_000).unwrap();
        checked_assumptions("c10 example", &inst, &sol);
        batch += 1;
    }
    for lambda in [0.25, 0.5, 0.75] {
        let inst = example_instance(lambda);
        for t in [0.0, 0.25 * (1.0 - lambda)] {
            let x = vec![1.0 - lambda - 2.0 * t, (2.0 - lambda + 4.0 * t) / 4.0, t];
            let sol = LassoSolution {
                objective: objective(&inst, &x),
                dual_gap: dual_gap(&inst, &x),
                iterations: 0,
                support: lasso_sens::sensitivity::support(&x, 1e-8),
                equicorrelation: lasso_sens::sensitivity::equicorrelation(&inst, &x, 1e-6),
                x,
            };
            checked_assumptions("c10 family", &inst, &sol);
            batch += 1;
        }
    }
    assert!(batch >= 30, "chain batch too small: {batch}");

    // every report recorded by any criterion already passed the chain
    // assertions inside record_chain; surface the tally
    let log = chain_log().lock().unwrap();
    println!(
        "  (criterion 10 note: {} assumption reports checked across the suite, \
         {} in the dedicated batch)",
        log.len(),
        batch
    );

    pass("10 assumption implication chain", t0, 60.0);
}
