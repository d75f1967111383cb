//! Browser bindings for the interactive demo page.
//!
//! Three operations back the static page in `static/`:
//! `analyze_instance` solves and classifies a user-entered instance,
//! `example_path` explores the worked 2x3 counterexample as the tuning
//! parameter slides, and `sweep_curves` runs a desk-scale random-ensemble
//! sweep and returns the error/bound curves. All results are JSON strings.

// the `!(lambda > 0.0)` guard rejects NaN, unlike `lambda <= 0.0`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde_json::json;
use wasm_bindgen::prelude::*;

use lasso_sens::experiments::{
    run_lambda_sweep, EnsembleKind, EnsembleSpec, ExperimentConfig, LambdaGrid, SignalModel,
};
use lasso_sens::io;
use lasso_sens::sensitivity::{
    check_assumptions, directional_derivative, lipschitz_bounds, value_gradient, Tolerances,
};
use lasso_sens::solver::{dual_gap, objective, solve_with, LassoSolution, ProblemInstance};
use lasso_sens::Matrix;

fn err_str(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Solve a LASSO instance given as CSV text and classify it.
#[wasm_bindgen]
pub fn analyze_instance(matrix_csv: &str, rhs_csv: &str, lambda: f64) -> Result<String, String> {
    let a = io::matrix_from_csv(matrix_csv).map_err(err_str)?;
    let b = io::vector_from_csv(rhs_csv).map_err(err_str)?;
    let inst = ProblemInstance::new(a, b, lambda).map_err(err_str)?;
    let tols = Tolerances::default();
    let sol = solve_with(&inst, 1e-10, 200_000, None, &tols).map_err(err_str)?;
    let (grad_b, grad_lambda) = value_gradient(&inst, &sol);

    let mut doc = json!({
        "solution": sol,
        "value_gradient_b": grad_b,
        "value_gradient_lambda": grad_lambda,
    });
    match check_assumptions(&inst, &sol, &tols) {
        Ok(rep) => {
            if rep.intermediate {
                if let Ok(bounds) = lipschitz_bounds(&inst, &sol, &rep) {
                    doc["lipschitz_bl"] = json!(bounds.lipschitz_bl);
                    doc["lipschitz_lambda"] = json!(bounds.lipschitz_lambda);
                    doc["lipschitz_A"] = json!(bounds.lipschitz_a);
                }
            }
            doc["assumptions"] = serde_json::to_value(&rep).map_err(err_str)?;
        }
        Err(e) => {
            doc["assumptions_error"] = json!(e.to_string());
        }
    }
    serde_json::to_string(&doc).map_err(err_str)
}

fn example_matrix() -> Matrix {
    Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 2.0, -2.0]]).expect("static matrix")
}

/// The worked 2x3 counterexample at one tuning parameter: solver output,
/// assumption verdicts, the non-uniqueness band when it exists, and the
/// solution-path derivative where the map is differentiable.
#[wasm_bindgen]
pub fn example_path(lambda: f64) -> Result<String, String> {
    if !(lambda > 0.0) {
        return Err("lambda must be strictly positive".into());
    }
    let a = example_matrix();
    let inst = ProblemInstance::new(a, vec![1.0, 1.0], lambda).map_err(err_str)?;
    // the degenerate band has a non-unique solution set where the duality
    // gap closes slowly; display-grade tolerance keeps the slider fluid
    let tols = Tolerances { solver_tol: 1e-7, ..Tolerances::default() };
    let sol = solve_with(&inst, 1e-7, 150_000, None, &tols).map_err(err_str)?;

    // closed-form reference: for lambda in (0,1) the solution segment
    // x(t) = (1-l-2t, (2-l+4t)/4, t), t in [0, (1-l)/2); for lambda in
    // [1,2] the single point (0, (2-l)/4, 0); beyond 2 the origin
    let reference: Vec<f64> = if lambda < 1.0 {
        vec![1.0 - lambda, (2.0 - lambda) / 4.0, 0.0]
    } else if lambda <= 2.0 {
        vec![0.0, (2.0 - lambda) / 4.0, 0.0]
    } else {
        vec![0.0, 0.0, 0.0]
    };
    let family = (lambda < 1.0).then(|| {
        let t_max = (1.0 - lambda) / 2.0;
        json!({
            "t_max": t_max,
            "endpoint_low": [1.0 - lambda, (2.0 - lambda) / 4.0, 0.0],
            "endpoint_high": [1.0 - lambda - 2.0 * t_max, (2.0 - lambda + 4.0 * t_max) / 4.0, t_max],
        })
    });

    let mut doc = json!({
        "lambda": lambda,
        "x": sol.x,
        "objective": sol.objective,
        "dual_gap": sol.dual_gap,
        "iterations": sol.iterations,
        "support": sol.support,
        "equicorrelation": sol.equicorrelation,
        "reference": reference,
        "family": family,
    });

    // verdicts on an exactly optimal point so the classification is crisp:
    // use the closed-form reference, which solves the problem at every
    // lambda in (0, 2]
    let exact = LassoSolution {
        objective: objective(&inst, &reference),
        dual_gap: dual_gap(&inst, &reference),
        iterations: 0,
        support: lasso_sens::sensitivity::support(&reference, tols.eps_supp),
        equicorrelation: lasso_sens::sensitivity::equicorrelation(&inst, &reference, tols.eps_eq),
        x: reference.clone(),
    };
    if let Ok(rep) = check_assumptions(&inst, &exact, &Tolerances::default()) {
        if rep.strong {
            if let Ok(d) = directional_derivative(&inst, &exact, &[0.0, 0.0], 1.0, &tols) {
                doc["derivative_wrt_lambda"] = json!(d.w);
            }
            if let Ok(bounds) = lipschitz_bounds(&inst, &exact, &rep) {
                doc["lipschitz_lambda"] = json!(bounds.lipschitz_lambda);
            }
        }
        doc["assumptions"] = serde_json::to_value(&rep).map_err(err_str)?;
    }
    serde_json::to_string(&doc).map_err(err_str)
}

/// Desk-scale lambda sweep on a seeded Gaussian ensemble; returns the
/// error/bound/ratio curves and the selected tuning parameter.
#[wasm_bindgen]
pub fn sweep_curves(
    s: usize,
    m: usize,
    n: usize,
    matrix_seed: u64,
    trial_seed: u64,
    grid_count: usize,
) -> Result<String, String> {
    if m == 0 || n == 0 || s == 0 {
        return Err("s, m, n must be positive".into());
    }
    if m > 120 || n > 300 || grid_count > 201 {
        return Err("demo caps: m <= 120, n <= 300, grid <= 201".into());
    }
    if s > m.min(n) {
        return Err("sparsity exceeds min(m, n)".into());
    }
    let config = ExperimentConfig {
        spec: EnsembleSpec { kind: EnsembleKind::Gaussian, m, n, normalized: true, seed: matrix_seed },
        s,
        gamma: 0.1,
        lambda_grid: LambdaGrid { count: grid_count.max(11), center: None, log_span: 100.0 },
        trial_seed,
        signal_model: SignalModel::ShiftedGaussian,
        solver_tol: 1e-8,
        max_iter: 150_000,
    };
    let result = run_lambda_sweep(&config).map_err(err_str)?;
    serde_json::to_string(&result).map_err(err_str)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_instance_round_trips() {
        let out = analyze_instance("1.0,0.0\n0.0,1.0\n", "2.0\n-0.3\n", 0.5).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["solution"]["x"][0], 1.5);
        assert_eq!(doc["assumptions"]["strong"], true);
    }

    #[test]
    fn example_path_regimes() {
        let strong: serde_json::Value =
            serde_json::from_str(&example_path(1.5).unwrap()).unwrap();
        assert_eq!(strong["assumptions"]["strong"], true);
        assert!((strong["derivative_wrt_lambda"][1].as_f64().unwrap() + 0.25).abs() < 1e-9);
        assert!(strong["family"].is_null());

        let degenerate: serde_json::Value =
            serde_json::from_str(&example_path(0.5).unwrap()).unwrap();
        assert_eq!(degenerate["assumptions"]["strong"], false);
        assert!(!degenerate["family"].is_null());
        assert!((degenerate["family"]["t_max"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sweep_curves_smoke() {
        let out = sweep_curves(2, 15, 30, 5, 6, 11).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["rows"].as_array().unwrap().len(), 11);
    }

    #[test]
    fn demo_caps_enforced() {
        assert!(sweep_curves(2, 500, 30, 0, 0, 11).is_err());
        assert!(sweep_curves(0, 15, 30, 0, 0, 11).is_err());
    }
}
