//! Random-ensemble experiments: matrix generation, empirical restricted
//! isometry, probabilistic bound calculators, and the lambda-sweep pipeline
//! that validates the Lipschitz bounds on synthetic sparse-recovery data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, columns, numerical_rank, singular_values, IndexSet, Matrix};
use crate::rng::CounterRng;
use crate::sensitivity::{equicorrelation, support, Tolerances};
use crate::solver::{solve_with, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Gaussian,
    Rademacher,
}

/// Description of one random measurement ensemble draw.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub m: usize,
    pub n: usize,
    /// divide entries by sqrt(m)
    pub normalized: bool,
    pub seed: u64,
}

/// Draws the matrix for `spec`. Entries are generated row-major from a
/// generator seeded with `spec.seed`, so equal specs give bit-identical
/// matrices.
pub fn generate_matrix(spec: &EnsembleSpec) -> Matrix {
    let mut rng = CounterRng::new(spec.seed);
    let scale = if spec.normalized { 1.0 / (spec.m as f64).sqrt() } else { 1.0 };
    let entries: Vec<f64> = (0..spec.m * spec.n)
        .map(|_| match spec.kind {
            EnsembleKind::Gaussian => rng.next_normal() * scale,
            EnsembleKind::Rademacher => rng.next_sign() * scale,
        })
        .collect();
    Matrix::new(spec.m, spec.n, entries).expect("generated entries are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RipMode {
    Exhaustive,
    Sampled { count: usize },
}

/// Extremal singular values over s-column submatrices.
#[derive(Debug, Clone, Serialize)]
pub struct RipReport {
    pub s: usize,
    pub mode: RipMode,
    pub min_sigma_min: f64,
    pub max_sigma_max: f64,
    /// `max(1 - min_sigma_min, max_sigma_max - 1)`
    pub delta_hat: f64,
    pub subsets_checked: usize,
}

const EXHAUSTIVE_BUDGET: f64 = 2e6;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
        if acc > 1e18 {
            return acc;
        }
    }
    acc
}

/// Visits all size-`s` subsets of `0..n` in lexicographic order.
fn for_each_subset(n: usize, s: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        f(&idx);
        // advance to the next combination
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - s {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Empirical restricted-isometry verification of order `s`.
///
/// Extremes over submatrices of at most `s` columns are attained at exactly
/// `s` columns (the largest singular value grows and the smallest shrinks
/// under column addition), so only size-`s` subsets are visited. The
/// smallest singular value here includes numerically zero ones: a singular
/// submatrix must drive `min_sigma_min` to zero.
pub fn empirical_rip(a: &Matrix, s: usize, mode: RipMode, seed: u64) -> Result<RipReport> {
    let n = a.cols();
    if s == 0 || s > a.rows().min(n) {
        return Err(Error::Input(format!(
            "RIP order s = {s} must lie in [1, min(m, n) = {}]",
            a.rows().min(n)
        )));
    }

    let mut min_sigma_min = f64::INFINITY;
    let mut max_sigma_max: f64 = 0.0;
    let mut subsets_checked = 0usize;
    let mut visit = |subset: &[usize]| {
        let set = IndexSet::new(subset.to_vec()).expect("subsets are sorted");
        let sub = columns(a, &set).expect("subset indices validated");
        let sv = singular_values(&sub);
        max_sigma_max = max_sigma_max.max(sv[0]);
        min_sigma_min = min_sigma_min.min(sv[sv.len() - 1]);
        subsets_checked += 1;
    };

    match mode {
        RipMode::Exhaustive => {
            let total = binomial(n, s);
            if total > EXHAUSTIVE_BUDGET {
                return Err(Error::Budget(format!(
                    "C({n}, {s}) = {total:.3e} subsets exceed the exhaustive budget \
                     {EXHAUSTIVE_BUDGET:.0e}; use sampled mode"
                )));
            }
            for_each_subset(n, s, &mut visit);
        }
        RipMode::Sampled { count } => {
            if count == 0 {
                return Err(Error::Input("sampled mode needs count >= 1".into()));
            }
            let mut rng = CounterRng::new(seed);
            for _ in 0..count {
                // rejection-sample s distinct indices
                let mut subset: Vec<usize> = Vec::with_capacity(s);
                while subset.len() < s {
                    let cand = rng.next_below(n);
                    if !subset.contains(&cand) {
                        subset.push(cand);
                    }
                }
                subset.sort_unstable();
                visit(&subset);
            }
        }
    }

    Ok(RipReport {
        s,
        mode,
        min_sigma_min,
        max_sigma_max,
        delta_hat: (1.0 - min_sigma_min).max(max_sigma_max - 1.0),
        subsets_checked,
    })
}

/// Inputs for the probabilistic bound calculators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundInputs {
    pub s: usize,
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// subgaussian norm bound; the Gaussian case is sqrt(8/3)
    pub beta: f64,
    /// unspecified absolute constant in the measurement thresholds
    #[serde(default = "default_c_abs")]
    pub c_abs: f64,
}

fn default_c_abs() -> f64 {
    1.0
}

/// Closed-form quantities from the subgaussian sensitivity analysis.
#[derive(Debug, Clone, Serialize)]
pub struct BoundOutputs {
    /// measurement threshold under the solution-sparsity hypothesis
    pub m_min_sparse: f64,
    /// measurement threshold without the sparsity hypothesis
    pub m_min_no_sparsity: f64,
    /// RIP order needed by the sparsity-free route: floor(36 gamma^2 s) + 1
    pub t_foucart: u64,
    /// Lipschitz bound sqrt(s) / (1 - delta)^2
    pub l_sparse: f64,
    /// Lipschitz bound 6 (1 + delta) sqrt(s) / (1 - delta)^3
    pub l_no_sparsity: f64,
    /// lambda must exceed this multiple of the noise norm: 2 (1 + delta)
    pub lambda_threshold_factor: f64,
    pub c_abs: f64,
}

pub fn bound_calculators(inputs: &BoundInputs) -> Result<BoundOutputs> {
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(Error::Input(format!("delta must lie in (0,1), got {}", inputs.delta)));
    }
    if !(inputs.epsilon > 0.0 && inputs.epsilon < 1.0) {
        return Err(Error::Input(format!("epsilon must lie in (0,1), got {}", inputs.epsilon)));
    }
    let beta_floor = (1.0f64 / std::f64::consts::LN_2).sqrt();
    if inputs.beta < beta_floor {
        return Err(Error::Input(format!(
            "beta must be at least sqrt(1/ln 2) ~= {beta_floor:.4}, got {}",
            inputs.beta
        )));
    }
    if inputs.s == 0 || inputs.n == 0 {
        return Err(Error::Input("s and n must be positive".into()));
    }
    let (s, n) = (inputs.s as f64, inputs.n as f64);
    let delta = inputs.delta;
    let gamma = (1.0 + delta) / (1.0 - delta);
    let log_term = s * (std::f64::consts::E * n / s).ln() + (3.0 / inputs.epsilon).ln();
    let beta_term = inputs.beta * inputs.beta * inputs.beta.ln();
    Ok(BoundOutputs {
        m_min_sparse: inputs.c_abs * delta.powi(-2) * beta_term * log_term,
        m_min_no_sparsity: 37.0
            * inputs.c_abs
            * ((1.0 + delta) / (delta * (1.0 - delta))).powi(2)
            * beta_term
            * log_term,
        t_foucart: (36.0 * gamma * gamma * s).floor() as u64 + 1,
        l_sparse: s.sqrt() / ((1.0 - delta) * (1.0 - delta)),
        l_no_sparsity: 6.0 * (1.0 + delta) * s.sqrt() / (1.0 - delta).powi(3),
        lambda_threshold_factor: 2.0 * (1.0 + delta),
        c_abs: inputs.c_abs,
    })
}

/// Signal model for the sweep ground truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModel {
    /// entries `m + sqrt(m) W_j`, `W_j` standard normal, on support `{0..s-1}`
    ShiftedGaussian,
    /// entries 1.0 on support `{0..s-1}`
    Unit,
    /// caller-provided full-length vector
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaGrid {
    #[serde(default = "default_grid_count")]
    pub count: usize,
    /// geometric center; `None` selects `gamma * sqrt(2 ln n)`
    #[serde(default)]
    pub center: Option<f64>,
    /// ratio between the largest and smallest grid value
    #[serde(default = "default_log_span")]
    pub log_span: f64,
}

fn default_grid_count() -> usize {
    501
}

fn default_log_span() -> f64 {
    100.0
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid { count: 501, center: None, log_span: 100.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: EnsembleSpec,
    pub s: usize,
    /// noise level multiplying the standard-normal noise vector
    pub gamma: f64,
    #[serde(default)]
    pub lambda_grid: LambdaGrid,
    pub trial_seed: u64,
    #[serde(default = "default_signal_model")]
    pub signal_model: SignalModel,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_signal_model() -> SignalModel {
    SignalModel::ShiftedGaussian
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    400_000
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// `||x(lambda) - x(lambda_star)||`
    pub error: f64,
    /// `L * |lambda - lambda_star|`; absent when `L` is unavailable
    #[serde(serialize_with = "io::serialize_opt_extended")]
    pub bound: Option<f64>,
    /// bound / error, `+inf` at the reference point
    #[serde(serialize_with = "io::serialize_opt_extended")]
    pub ratio: Option<f64>,
    /// support size of the solution at this grid point
    pub support_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub lambda_star: f64,
    pub support_size_star: usize,
    #[serde(rename = "sigma_min_I", serialize_with = "io::serialize_opt_extended")]
    pub sigma_min_support: Option<f64>,
    /// `sqrt(s_star) / sigma_min(A_I)^2`; unavailable when `A_I` is rank
    /// deficient
    #[serde(rename = "L", serialize_with = "io::serialize_opt_extended")]
    pub l_bound: Option<f64>,
    pub strong_holds_at_star: bool,
    /// `||A_{I^C}^T (b - A_I x_I)||_inf` at the selected lambda
    pub off_support_infnorm: f64,
    /// Euclidean norm of the realized noise `gamma * w`
    pub noise_norm: f64,
    /// whether the realized noise satisfied `||h|| <= ||b|| / 3`
    pub noise_within_bound: bool,
    /// symmetric grid interval around `lambda_star` on which the bound
    /// dominates the observed error
    pub validity_lo: f64,
    pub validity_hi: f64,
    pub matrix_seed: u64,
    pub trial_seed: u64,
    /// distance of the selected solution to the ground truth
    pub ground_truth_error: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with header `lambda,error,bound,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,error,bound,ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                io::format_sig17(row.lambda),
                io::format_sig17(row.error),
                io::csv_cell(row.bound),
                io::csv_cell(row.ratio),
            ));
        }
        out
    }
}

/// Runs the sweep pipeline: draw data, solve across the grid with ascending
/// warm starts, select the ground-truth-optimal lambda, and emit error/bound
/// rows around it.
pub fn run_lambda_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let ExperimentConfig { spec, s, gamma, lambda_grid, trial_seed, .. } = config;
    if *s == 0 || *s > spec.n {
        return Err(Error::Input(format!("sparsity {s} out of range for n = {}", spec.n)));
    }
    if lambda_grid.count < 3 {
        return Err(Error::Input("lambda grid needs at least 3 points".into()));
    }
    let a = generate_matrix(spec);
    let mut rng = CounterRng::new(*trial_seed);

    let mut x0 = vec![0.0; spec.n];
    match &config.signal_model {
        SignalModel::ShiftedGaussian => {
            let mf = spec.m as f64;
            for item in x0.iter_mut().take(*s) {
                *item = mf + mf.sqrt() * rng.next_normal();
            }
        }
        SignalModel::Unit => {
            for item in x0.iter_mut().take(*s) {
                *item = 1.0;
            }
        }
        SignalModel::Custom(v) => {
            if v.len() != spec.n {
                return Err(Error::Dimension(format!(
                    "custom signal length {} != n = {}",
                    v.len(),
                    spec.n
                )));
            }
            x0.copy_from_slice(v);
        }
    }
    let noise: Vec<f64> = (0..spec.m).map(|_| rng.next_normal()).collect();
    let mut b = a.matvec(&x0);
    for (bi, w) in b.iter_mut().zip(&noise) {
        *bi += gamma * w;
    }
    let noise_norm = gamma * linalg::nrm2(&noise);
    let noise_within_bound = noise_norm <= linalg::nrm2(&b) / 3.0;

    let center = lambda_grid
        .center
        .unwrap_or_else(|| gamma * (2.0 * (spec.n as f64).ln()).sqrt());
    if !(center > 0.0) {
        return Err(Error::Input("lambda grid center must be positive".into()));
    }
    let half_span = lambda_grid.log_span.sqrt();
    let count = lambda_grid.count;
    let grid: Vec<f64> = (0..count)
        .map(|k| {
            let t = k as f64 / (count - 1) as f64; // 0..1
            center / half_span * lambda_grid.log_span.powf(t)
        })
        .collect();

    let tols = Tolerances { solver_tol: config.solver_tol, ..Tolerances::default() };
    let mut solutions: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in &grid {
        let inst = ProblemInstance::new(a.clone(), b.clone(), lambda)?;
        let sol = solve_with(&inst, config.solver_tol, config.max_iter, warm.as_deref(), &tols)
            .map_err(|e| match e {
                Error::NonConvergence { iterations, gap, .. } => Error::NonConvergence {
                    iterations,
                    gap,
                    best: vec![lambda], // name the offending lambda
                },
                other => other,
            })?;
        warm = Some(sol.x.clone());
        solutions.push(sol.x);
    }

    // lambda_star: minimal ground-truth error, ties to the smallest lambda
    let mut star = 0usize;
    let mut best = f64::INFINITY;
    for (k, x) in solutions.iter().enumerate() {
        let err = linalg::nrm2(&linalg::sub(x, &x0));
        if err < best - 1e-15 {
            best = err;
            star = k;
        }
    }
    let lambda_star = grid[star];
    let x_star = &solutions[star];
    let inst_star = ProblemInstance::new(a.clone(), b.clone(), lambda_star)?;

    let supp = support(x_star, tols.eps_supp);
    let equi = equicorrelation(&inst_star, x_star, tols.eps_eq);
    let a_i = columns(&a, &supp)?;
    let full_rank = supp.is_empty() || numerical_rank(&a_i) == supp.len();

    let x_i: Vec<f64> = supp.iter().map(|i| x_star[i]).collect();
    let r_supp = linalg::sub(&b, &a_i.matvec(&x_i));
    let comp = supp.complement(spec.n);
    let off: Vec<f64> = comp.iter().map(|i| a.col_dot(i, &r_supp)).collect();
    let off_support_infnorm = linalg::nrm_inf(&off);
    let strong_holds_at_star = full_rank
        && lambda_star - off_support_infnorm > tols.eps_strict * lambda_star
        && supp == equi;

    let (sigma_min_support, l_bound) = if full_rank && !supp.is_empty() {
        let (smin, _) = linalg::svd_extremes(&a_i)?;
        (Some(smin), Some((supp.len() as f64).sqrt() / (smin * smin)))
    } else {
        (None, None)
    };

    let rows: Vec<SweepRow> = grid
        .iter()
        .zip(&solutions)
        .map(|(&lambda, x)| {
            let error = linalg::nrm2(&linalg::sub(x, x_star));
            let bound = l_bound.map(|l| l * (lambda - lambda_star).abs());
            let ratio = bound.map(|bd| if error > 0.0 { bd / error } else { f64::INFINITY });
            SweepRow { lambda, error, bound, ratio, support_size: support(x, tols.eps_supp).len() }
        })
        .collect();

    // largest symmetric index interval around the star on which the bound
    // dominates the error
    let dominated = |k: usize| -> bool {
        match rows[k].bound {
            Some(bd) => rows[k].error <= bd + 1e-12 * bd.max(1.0),
            None => false,
        }
    };
    let mut radius = 0usize;
    if l_bound.is_some() {
        loop {
            let next = radius + 1;
            let lo_ok = star < next || dominated(star - next);
            let hi_ok = star + next >= count || dominated(star + next);
            if (star >= next || star + next < count) && lo_ok && hi_ok {
                radius = next;
            } else {
                break;
            }
        }
    }
    let validity_lo = grid[star.saturating_sub(radius)];
    let validity_hi = grid[(star + radius).min(count - 1)];

    Ok(SweepResult {
        lambda_star,
        support_size_star: supp.len(),
        sigma_min_support,
        l_bound,
        strong_holds_at_star,
        off_support_infnorm,
        noise_norm,
        noise_within_bound,
        validity_lo,
        validity_hi,
        matrix_seed: spec.seed,
        trial_seed: *trial_seed,
        ground_truth_error: best,
        rows,
    })
}

/// Sparsity-cap verdict for one solved instance.
#[derive(Debug, Clone, Serialize)]
pub struct FoucartReport {
    pub observed_sparsity: usize,
    /// `floor(36 gamma^2 s)` with `gamma = (1 + delta) / (1 - delta)`
    pub predicted_cap: usize,
    pub satisfied: bool,
}

/// Solves the instance and tests the sparsity cap `floor(36 gamma^2 s)`.
pub fn foucart_sparsity_check(
    a: &Matrix,
    b: &[f64],
    lambda: f64,
    s: usize,
    delta: f64,
) -> Result<FoucartReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta must lie in (0,1), got {delta}")));
    }
    let tols = Tolerances::default();
    let inst = ProblemInstance::new(a.clone(), b.to_vec(), lambda)?;
    let sol = solve_with(&inst, tols.solver_tol, 400_000, None, &tols)?;
    let observed = support(&sol.x, tols.eps_supp).len();
    let gamma = (1.0 + delta) / (1.0 - delta);
    let cap = (36.0 * gamma * gamma * s as f64).floor() as usize;
    Ok(FoucartReport {
        observed_sparsity: observed,
        predicted_cap: cap,
        satisfied: observed <= cap,
    })
}
