//! Command-line surface for LASSO solving and sensitivity analysis.
//!
//! Matrices and vectors are CSV files (one row per line, vectors single
//! column); reports are JSON with a `schema_version` field. Exit status:
//! 0 on success, 1 with an error JSON on stdout for computation errors,
//! 2 for invocation errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lasso_sens::experiments::{
    bound_calculators, empirical_rip, run_lambda_sweep, BoundInputs, ExperimentConfig, RipMode,
};
use lasso_sens::io;
use lasso_sens::sensitivity::{
    check_assumptions, directional_derivative, fuchs_explicit, lipschitz_bounds, value_gradient,
    AssumptionReport, Tolerances,
};
use lasso_sens::solver::{objective, optimality_residual, solve_with, ProblemInstance};
use lasso_sens::{Error, Matrix};

const SCHEMA_VERSION: &str = "1";

#[derive(Parser)]
#[command(name = "lasso-sens", version, about = "LASSO solver and solution-map sensitivity analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// matrix CSV, one row per line
    #[arg(long)]
    matrix: PathBuf,
    /// right-hand side vector CSV, single column
    #[arg(long)]
    rhs: PathBuf,
    /// tuning parameter, strictly positive
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// relative duality-gap tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 400_000)]
    max_iter: usize,
}

#[derive(Args, Clone)]
struct EpsArgs {
    /// support threshold override
    #[arg(long)]
    eps_supp: Option<f64>,
    /// equicorrelation threshold override
    #[arg(long)]
    eps_eq: Option<f64>,
    /// strict-inequality margin override
    #[arg(long)]
    eps_strict: Option<f64>,
}

impl EpsArgs {
    fn tolerances(&self, solver_tol: f64) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            eps_supp: self.eps_supp.unwrap_or(d.eps_supp),
            eps_eq: self.eps_eq.unwrap_or(d.eps_eq),
            eps_strict: self.eps_strict.unwrap_or(d.eps_strict),
            solver_tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance; writes the solution JSON
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and classify assumptions, gradients, and Lipschitz bounds
    Analyze {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Directional derivative of the solution map for a direction (q, alpha)
    Derivative {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        eps: EpsArgs,
        /// direction in the measurement vector, CSV single column
        #[arg(long)]
        q: PathBuf,
        /// direction in the tuning parameter
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a lambda sweep experiment from a JSON config
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// per-lambda rows: lambda,error,bound,ratio
        #[arg(long)]
        out_csv: PathBuf,
        /// sidecar with lambda*, support size, sigma_min, L, verdicts, seeds
        #[arg(long)]
        out_json: PathBuf,
    },
    /// Empirical restricted-isometry verification
    Rip {
        #[arg(long)]
        matrix: PathBuf,
        /// sparsity order
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// subset draws in sampled mode
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explicit coherence-regime solution compared against the solver
    Fuchs {
        #[arg(long)]
        matrix: PathBuf,
        /// sparse representation x0, CSV single column
        #[arg(long)]
        x0: PathBuf,
        /// tuning parameter; defaults to half the sign-preservation limit
        #[arg(long)]
        lambda: Option<f64>,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form probabilistic bound calculators
    Bounds {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// subgaussian norm bound; default is the Gaussian value sqrt(8/3)
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c_abs: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the worked 2x3 counterexample and assert each of its claims
    DemoCounterexample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: &'static str,
    #[serde(flatten)]
    payload: T,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    schema_version: &'static str,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

enum CliError {
    Invocation(String),
    Module(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Module(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invocation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Module(e)) => {
            let body = ErrorJson {
                schema_version: SCHEMA_VERSION,
                error: ErrorBody { kind: e.kind(), message: e.to_string() },
            };
            println!("{}", serde_json::to_string_pretty(&body).expect("error json"));
            ExitCode::from(1)
        }
    }
}

fn require_readable(path: &Path) -> Result<(), CliError> {
    if std::fs::File::open(path).is_err() {
        return Err(CliError::Invocation(format!("cannot read {}", path.display())));
    }
    Ok(())
}

fn require_writable(path: &Path) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        if !dir.is_dir() {
            return Err(CliError::Invocation(format!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
    }
    Ok(())
}

fn emit<T: Serialize>(out: Option<&Path>, payload: T) -> Result<(), CliError> {
    let doc = Versioned { schema_version: SCHEMA_VERSION, payload };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Module(Error::Internal(e.to_string())))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Module(e.into()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_instance(args: &InstanceArgs) -> Result<ProblemInstance, CliError> {
    require_readable(&args.matrix)?;
    require_readable(&args.rhs)?;
    let a = io::read_matrix(&args.matrix)?;
    let b = io::read_vector(&args.rhs)?;
    Ok(ProblemInstance::new(a, b, args.lambda)?)
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Solve { inst, solver, eps, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            let instance = load_instance(&inst)?;
            let tols = eps.tolerances(solver.tol);
            let sol = solve_with(&instance, solver.tol, solver.max_iter, None, &tols)?;
            emit(out.as_deref(), sol)
        }
        Command::Analyze { inst, solver, eps, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            let instance = load_instance(&inst)?;
            let tols = eps.tolerances(solver.tol);
            let sol = solve_with(&instance, solver.tol, solver.max_iter, None, &tols)?;
            let assumptions = check_assumptions(&instance, &sol, &tols)?;
            let (grad_b, grad_lambda) = value_gradient(&instance, &sol);
            let report = if assumptions.intermediate {
                let bounds = lipschitz_bounds(&instance, &sol, &assumptions)?;
                AnalyzeReport {
                    assumptions,
                    solution: sol,
                    value_gradient_b: grad_b,
                    value_gradient_lambda: grad_lambda,
                    lipschitz_bl: Some(bounds.lipschitz_bl),
                    lipschitz_lambda: Some(bounds.lipschitz_lambda),
                    lipschitz_a: Some(bounds.lipschitz_a),
                    sigma_min_support: bounds.sigma_min_support,
                    sigma_max_support: bounds.sigma_max_support,
                    sigma_min_equicorrelation: bounds.sigma_min_equicorrelation,
                    sigma_max_equicorrelation: bounds.sigma_max_equicorrelation,
                }
            } else {
                AnalyzeReport {
                    assumptions,
                    solution: sol,
                    value_gradient_b: grad_b,
                    value_gradient_lambda: grad_lambda,
                    lipschitz_bl: None,
                    lipschitz_lambda: None,
                    lipschitz_a: None,
                    sigma_min_support: None,
                    sigma_max_support: None,
                    sigma_min_equicorrelation: None,
                    sigma_max_equicorrelation: None,
                }
            };
            emit(out.as_deref(), report)
        }
        Command::Derivative { inst, solver, eps, q, alpha, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            require_readable(&q)?;
            let instance = load_instance(&inst)?;
            let direction = io::read_vector(&q)?;
            let tols = eps.tolerances(solver.tol);
            let sol = solve_with(&instance, solver.tol, solver.max_iter, None, &tols)?;
            let result = directional_derivative(&instance, &sol, &direction, alpha, &tols)?;
            emit(out.as_deref(), result)
        }
        Command::Sweep { config, out_csv, out_json } => {
            require_readable(&config)?;
            require_writable(&out_csv)?;
            require_writable(&out_json)?;
            let text = std::fs::read_to_string(&config).map_err(Error::from)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Invocation(format!("bad sweep config: {e}")))?;
            if cfg.spec.m > cfg.spec.n {
                eprintln!(
                    "warning: m = {} > n = {} leaves the compressed-sensing regime",
                    cfg.spec.m, cfg.spec.n
                );
            }
            let result = run_lambda_sweep(&cfg)?;
            std::fs::write(&out_csv, result.to_csv()).map_err(Error::from)?;
            let doc = Versioned { schema_version: SCHEMA_VERSION, payload: &result };
            let mut text = serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::Module(Error::Internal(e.to_string())))?;
            text.push('\n');
            std::fs::write(&out_json, text).map_err(Error::from)?;
            Ok(())
        }
        Command::Rip { matrix, s, mode, count, seed, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            require_readable(&matrix)?;
            let a = io::read_matrix(&matrix)?;
            let mode = match mode.as_str() {
                "exhaustive" => RipMode::Exhaustive,
                "sampled" => RipMode::Sampled { count },
                other => {
                    return Err(CliError::Invocation(format!(
                        "unknown rip mode {other:?}; use exhaustive or sampled"
                    )))
                }
            };
            let report = empirical_rip(&a, s, mode, seed)?;
            emit(out.as_deref(), report)
        }
        Command::Fuchs { matrix, x0, lambda, eps, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            require_readable(&matrix)?;
            require_readable(&x0)?;
            let a = io::read_matrix(&matrix)?;
            let signal = io::read_vector(&x0)?;
            let lambda = match lambda {
                Some(l) => l,
                None => {
                    let probe = fuchs_explicit(&a, &signal, 0.0)?;
                    if probe.lambda_max.is_finite() {
                        probe.lambda_max / 2.0
                    } else {
                        1.0
                    }
                }
            };
            let explicit = fuchs_explicit(&a, &signal, lambda)?;
            let b = a.matvec(&signal);
            let report = if lambda > 0.0 {
                let tols = eps.tolerances(1e-12);
                let instance = ProblemInstance::new(a, b, lambda)?;
                let sol = solve_with(&instance, 1e-12, 400_000, None, &tols)?;
                let max_abs_diff = explicit
                    .x_bar
                    .iter()
                    .zip(&sol.x)
                    .map(|(e, s)| (e - s).abs())
                    .fold(0.0f64, f64::max);
                let assumptions = check_assumptions(&instance, &sol, &tols).ok();
                FuchsComparison {
                    lambda_used: lambda,
                    explicit,
                    solver_x: Some(sol.x),
                    max_abs_diff: Some(max_abs_diff),
                    agrees: Some(max_abs_diff < 1e-6),
                    assumptions,
                }
            } else {
                FuchsComparison {
                    lambda_used: lambda,
                    explicit,
                    solver_x: None,
                    max_abs_diff: None,
                    agrees: None,
                    assumptions: None,
                }
            };
            emit(out.as_deref(), report)
        }
        Command::Bounds { s, n, m, delta, epsilon, beta, c_abs, out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            let inputs = BoundInputs {
                s,
                n,
                m,
                delta,
                epsilon,
                beta: beta.unwrap_or((8.0f64 / 3.0).sqrt()),
                c_abs,
            };
            let outputs = bound_calculators(&inputs)?;
            emit(out.as_deref(), BoundsReport { inputs, outputs })
        }
        Command::DemoCounterexample { out } => {
            if let Some(o) = &out {
                require_writable(o)?;
            }
            let report = counterexample_report()?;
            let ok = report.all_assertions_pass;
            emit(out.as_deref(), report)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Module(Error::Internal(
                    "counterexample assertions failed; see report".into(),
                )))
            }
        }
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    assumptions: AssumptionReport,
    solution: lasso_sens::LassoSolution,
    value_gradient_b: Vec<f64>,
    value_gradient_lambda: f64,
    #[serde(serialize_with = "io::serialize_opt_extended")]
    lipschitz_bl: Option<f64>,
    #[serde(serialize_with = "io::serialize_opt_extended")]
    lipschitz_lambda: Option<f64>,
    #[serde(rename = "lipschitz_A", serialize_with = "io::serialize_opt_extended")]
    lipschitz_a: Option<f64>,
    #[serde(rename = "sigma_min_I", serialize_with = "io::serialize_opt_extended")]
    sigma_min_support: Option<f64>,
    #[serde(rename = "sigma_max_I", serialize_with = "io::serialize_opt_extended")]
    sigma_max_support: Option<f64>,
    #[serde(rename = "sigma_min_J", serialize_with = "io::serialize_opt_extended")]
    sigma_min_equicorrelation: Option<f64>,
    #[serde(rename = "sigma_max_J", serialize_with = "io::serialize_opt_extended")]
    sigma_max_equicorrelation: Option<f64>,
}

#[derive(Serialize)]
struct FuchsComparison {
    lambda_used: f64,
    explicit: lasso_sens::sensitivity::FuchsResult,
    solver_x: Option<Vec<f64>>,
    #[serde(serialize_with = "io::serialize_opt_extended")]
    max_abs_diff: Option<f64>,
    agrees: Option<bool>,
    assumptions: Option<AssumptionReport>,
}

#[derive(Serialize)]
struct BoundsReport {
    inputs: BoundInputs,
    outputs: lasso_sens::experiments::BoundOutputs,
}

#[derive(Serialize)]
struct Assertion {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct CounterexampleReport {
    unique_solution_lambda_1: Vec<f64>,
    weak_lambda_1: lasso_sens::WeakVerdict,
    strong_lambda_1: bool,
    strong_margin_lambda_1: f64,
    family_objective_spread_lambda_05: f64,
    family_max_optimality_residual_lambda_05: f64,
    solution_lambda_15: Vec<f64>,
    strong_lambda_15: bool,
    strong_margin_lambda_15: f64,
    derivative_wrt_lambda_at_15: Vec<f64>,
    assertions: Vec<Assertion>,
    all_assertions_pass: bool,
}

fn counterexample_report() -> Result<CounterexampleReport, CliError> {
    let a = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![0.0, 2.0, -2.0]])
        .expect("static example matrix");
    let b = vec![1.0, 1.0];
    let tols = Tolerances::default();
    let mut assertions: Vec<Assertion> = Vec::new();
    let mut check = |name: &'static str, pass: bool, detail: String| {
        assertions.push(Assertion { name, pass, detail });
    };

    // lambda = 1: unique solution, weak holds, strong fails
    let inst1 = ProblemInstance::new(a.clone(), b.clone(), 1.0)?;
    let sol1 = solve_with(&inst1, 1e-12, 200_000, None, &tols)?;
    let dist1 = sol1
        .x
        .iter()
        .zip([0.0, 0.25, 0.0])
        .map(|(x, e)| (x - e).abs())
        .fold(0.0f64, f64::max);
    check(
        "unique_solution_lambda_1",
        dist1 < 1e-6,
        format!("max deviation from (0, 1/4, 0): {dist1:.3e}"),
    );
    let rep1 = check_assumptions(&inst1, &sol1, &tols)?;
    check(
        "weak_holds_lambda_1",
        rep1.weak == lasso_sens::WeakVerdict::Holds,
        format!("verdict {:?}, LP optimum {:?}", rep1.weak, rep1.weak_optimum),
    );
    check(
        "strong_fails_lambda_1",
        !rep1.strong && rep1.strong_margin.abs() < 1e-8,
        format!("margin {:.3e}", rep1.strong_margin),
    );

    // lambda = 1/2: the solution family shares objective and residual
    let inst_half = ProblemInstance::new(a.clone(), b.clone(), 0.5)?;
    let mut max_resid: f64 = 0.0;
    let mut objs = Vec::new();
    for k in 0..10 {
        let t = 0.25 * k as f64 / 10.0;
        let x = vec![0.5 - 2.0 * t, (1.5 + 4.0 * t) / 4.0, t];
        max_resid = max_resid.max(optimality_residual(&inst_half, &x));
        objs.push(objective(&inst_half, &x));
    }
    let spread = objs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - objs.iter().cloned().fold(f64::INFINITY, f64::min);
    check(
        "family_optimal_lambda_05",
        max_resid <= 1e-10,
        format!("max optimality residual {max_resid:.3e}"),
    );
    check(
        "family_objective_constant_lambda_05",
        spread < 1e-12,
        format!("objective spread {spread:.3e}"),
    );

    // lambda = 3/2: strong regime with the explicit derivative
    let inst15 = ProblemInstance::new(a.clone(), b.clone(), 1.5)?;
    let sol15 = solve_with(&inst15, 1e-12, 200_000, None, &tols)?;
    let dist15 = sol15
        .x
        .iter()
        .zip([0.0, 0.125, 0.0])
        .map(|(x, e)| (x - e).abs())
        .fold(0.0f64, f64::max);
    check(
        "solution_lambda_15",
        dist15 < 1e-6,
        format!("max deviation from (0, 1/8, 0): {dist15:.3e}"),
    );
    let rep15 = check_assumptions(&inst15, &sol15, &tols)?;
    check(
        "strong_holds_lambda_15",
        rep15.strong && (rep15.strong_margin - 0.5).abs() < 1e-8,
        format!("margin {:.6}", rep15.strong_margin),
    );
    let deriv = directional_derivative(&inst15, &sol15, &[0.0, 0.0], 1.0, &tols)?;
    let ddist = deriv
        .w
        .iter()
        .zip([0.0, -0.25, 0.0])
        .map(|(x, e)| (x - e).abs())
        .fold(0.0f64, f64::max);
    check(
        "derivative_wrt_lambda_15",
        ddist < 1e-9,
        format!("max deviation from (0, -1/4, 0): {ddist:.3e}"),
    );

    let all = assertions.iter().all(|a| a.pass);
    Ok(CounterexampleReport {
        unique_solution_lambda_1: sol1.x,
        weak_lambda_1: rep1.weak,
        strong_lambda_1: rep1.strong,
        strong_margin_lambda_1: rep1.strong_margin,
        family_objective_spread_lambda_05: spread,
        family_max_optimality_residual_lambda_05: max_resid,
        solution_lambda_15: sol15.x,
        strong_lambda_15: rep15.strong,
        strong_margin_lambda_15: rep15.strong_margin,
        derivative_wrt_lambda_at_15: deriv.w,
        assertions,
        all_assertions_pass: all,
    })
}
