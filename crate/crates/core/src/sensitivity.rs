//! Sensitivity analysis at a computed LASSO solution.
//!
//! Given a certified solution, this module classifies the instance into the
//! assumption tiers that govern uniqueness and differentiability of the
//! solution map, evaluates the value-function gradient, computes directional
//! and full derivatives of the solution in `(b, lambda)`, and evaluates
//! Lipschitz-modulus bounds for perturbations of `b`, `lambda`, and `A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, coherence, columns, dot, gram_solve, nrm1, nrm2, nrm_inf, numerical_rank,
    nullspace_of_transpose, svd_extremes, IndexSet, Matrix,
};
use crate::simplex::minimax_affine;
use crate::solver::{optimality_residual, LassoSolution, ProblemInstance};

/// Classification thresholds. Defaults sit two or more orders above the
/// solver gap tolerance so index-set classification is stable.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// absolute threshold deciding membership in the support
    pub eps_supp: f64,
    /// relative threshold deciding membership in the equicorrelation set
    pub eps_eq: f64,
    /// relative strictness margin for the strong and weak verdicts
    pub eps_strict: f64,
    /// solver duality-gap tolerance assumed for preconditions
    pub solver_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_supp: 1e-8, eps_eq: 1e-6, eps_strict: 1e-8, solver_tol: 1e-10 }
    }
}

/// Indices with `|x_i| > eps_supp`.
pub fn support(x: &[f64], eps_supp: f64) -> IndexSet {
    IndexSet::from_unsorted(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > eps_supp)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Indices where the residual correlation attains `lambda`:
/// `| |A_i^T (b - Ax)| - lambda | <= eps_eq * lambda`.
pub fn equicorrelation(inst: &ProblemInstance, x: &[f64], eps_eq: f64) -> IndexSet {
    let r = linalg::sub(inst.rhs(), &inst.matrix().matvec(x));
    let corr = inst.matrix().matvec_t(&r);
    let lambda = inst.lambda();
    IndexSet::from_unsorted(
        corr.iter()
            .enumerate()
            .filter(|(_, c)| (c.abs() - lambda).abs() <= eps_eq * lambda)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Verdict for the weak (uniqueness-characterizing) assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakVerdict {
    Holds,
    Fails,
    BoundaryInconclusive,
}

/// Verdicts for the three assumption tiers plus certificates.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub weak: WeakVerdict,
    pub intermediate: bool,
    pub strong: bool,
    /// dual vector `y` with `A_I^T y = sgn(x_I)` witnessing the weak tier
    pub weak_certificate: Option<Vec<f64>>,
    /// optimal value of the minimax program deciding the weak tier
    pub weak_optimum: Option<f64>,
    /// `lambda - ||A_{I^C}^T (b - A_I x_I)||_inf`
    pub strong_margin: f64,
    pub rank_support: usize,
    pub rank_equicorrelation: usize,
    pub support: IndexSet,
    pub equicorrelation: IndexSet,
}

/// Classifies the instance at `sol` into the assumption tiers.
///
/// The strong verdict additionally requires the computed equicorrelation
/// set to coincide with the support; this keeps the implication chain
/// strong => intermediate => weak intact under any tolerance configuration.
pub fn check_assumptions(
    inst: &ProblemInstance,
    sol: &LassoSolution,
    tols: &Tolerances,
) -> Result<AssumptionReport> {
    let resid = optimality_residual(inst, &sol.x);
    if resid > 100.0 * tols.solver_tol {
        return Err(Error::Precondition(format!(
            "solution is not optimal enough for assumption checking \
             (optimality residual {resid:.3e})"
        )));
    }

    let a = inst.matrix();
    let lambda = inst.lambda();
    let supp = support(&sol.x, tols.eps_supp);
    let equi = equicorrelation(inst, &sol.x, tols.eps_eq);

    let a_i = columns(a, &supp)?;
    let a_j = columns(a, &equi)?;
    let rank_support = if supp.is_empty() { 0 } else { numerical_rank(&a_i) };
    let rank_equicorrelation = if equi.is_empty() { 0 } else { numerical_rank(&a_j) };
    let support_rank_ok = rank_support == supp.len();
    let intermediate = rank_equicorrelation == equi.len();

    // residual of the support-restricted representation b - A_I x_I
    let x_i: Vec<f64> = supp.iter().map(|i| sol.x[i]).collect();
    let r_supp = linalg::sub(inst.rhs(), &a_i.matvec(&x_i));
    let comp = supp.complement(a.cols());
    let off_corr: Vec<f64> = comp.iter().map(|i| a.col_dot(i, &r_supp)).collect();
    let strong_margin = lambda - nrm_inf(&off_corr);

    let strong = support_rank_ok && strong_margin > tols.eps_strict * lambda && supp == equi;

    let (weak, weak_certificate, weak_optimum) = if !support_rank_ok {
        (WeakVerdict::Fails, None, None)
    } else if supp.is_empty() {
        // no sign constraints: y = 0 realizes optimum 0
        (WeakVerdict::Holds, Some(vec![0.0; a.rows()]), Some(0.0))
    } else if strong {
        // the scaled residual is already a strictly interior certificate
        let y: Vec<f64> = r_supp.iter().map(|v| v / lambda).collect();
        let opt = nrm_inf(&off_corr) / lambda;
        (WeakVerdict::Holds, Some(y), Some(opt))
    } else {
        let signs: Vec<f64> = x_i.iter().map(|v| v.signum()).collect();
        // minimum-norm solution of A_I^T y = sgn(x_I)
        let y0 = a_i.matvec(&gram_solve(&a_i, &signs)?);
        let nullspace = nullspace_of_transpose(&a_i);
        let c0: Vec<f64> = comp.iter().map(|i| a.col_dot(i, &y0)).collect();
        let g: Vec<Vec<f64>> = comp
            .iter()
            .map(|i| {
                let ai = a.col(i);
                nullspace.iter().map(|w| dot(&ai, w)).collect()
            })
            .collect();
        let (opt, z) = minimax_affine(&c0, &g)?;
        let mut y = y0;
        for (w, zk) in nullspace.iter().zip(&z) {
            for (yi, wi) in y.iter_mut().zip(w) {
                *yi += zk * wi;
            }
        }
        let verdict = if opt < 1.0 - tols.eps_strict {
            WeakVerdict::Holds
        } else if opt > 1.0 + tols.eps_strict {
            WeakVerdict::Fails
        } else {
            WeakVerdict::BoundaryInconclusive
        };
        let cert = if verdict == WeakVerdict::Fails { None } else { Some(y) };
        (verdict, cert, Some(opt))
    };

    Ok(AssumptionReport {
        weak,
        intermediate,
        strong,
        weak_certificate,
        weak_optimum,
        strong_margin,
        rank_support,
        rank_equicorrelation,
        support: supp,
        equicorrelation: equi,
    })
}

/// Gradient of the optimal value `p(b, lambda)`: `(b - A x_bar, ||x_bar||_1)`.
pub fn value_gradient(inst: &ProblemInstance, sol: &LassoSolution) -> (Vec<f64>, f64) {
    let grad_b = linalg::sub(inst.rhs(), &inst.matrix().matvec(&sol.x));
    (grad_b, nrm1(&sol.x))
}

/// Ridge-regularized least squares `min 0.5||Ax-b||^2 + (lambda/2)||x||^2`,
/// solved through the stationarity system `(A^T A + lambda I) x = A^T b`
/// evaluated in the SVD basis of `A`.
pub fn tikhonov_solution(a: &Matrix, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} != {} rows",
            b.len(),
            a.rows()
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::Input(format!("lambda must be positive, got {lambda}")));
    }
    let dec = linalg::svd(a);
    let mut x = vec![0.0; a.cols()];
    for k in 0..dec.sigma.len() {
        let s = dec.sigma[k];
        if s == 0.0 {
            continue;
        }
        let uk = dec.u.col(k);
        let coeff = s * dot(&uk, b) / (s * s + lambda);
        let vk = dec.v.col(k);
        for (xi, vki) in x.iter_mut().zip(&vk) {
            *xi += coeff * vki;
        }
    }
    Ok(x)
}

/// Directional derivative of the solution map together with the active
/// index set that realizes it.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalDerivativeResult {
    pub w: Vec<f64>,
    #[serde(rename = "K")]
    pub k: IndexSet,
}

/// Enumeration cap on `|J \ I|`; the candidate count is `2^{|J\I|}`.
pub const MAX_ENUMERATION_GAP: usize = 20;

/// Directional derivative `S'((b, lambda); (q, alpha))` of the solution map.
///
/// Candidates `K` with `I subseteq K subseteq J` are enumerated in order of
/// cardinality; each candidate's derivative is accepted or rejected by the
/// tangent-cone sign conditions. For indices in `K \ I` the derivative entry
/// must be nonzero with the sign of the equicorrelated residual correlation
/// `A_i^T (b - A x_bar)`; for indices in `J \ K` the stationarity slack must
/// take the opposite sign. Exactly one derivative vector may survive.
pub fn directional_derivative(
    inst: &ProblemInstance,
    sol: &LassoSolution,
    q: &[f64],
    alpha: f64,
    tols: &Tolerances,
) -> Result<DirectionalDerivativeResult> {
    let a = inst.matrix();
    let lambda = inst.lambda();
    if q.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "direction length {} != {} rows",
            q.len(),
            a.rows()
        )));
    }

    let supp = support(&sol.x, tols.eps_supp);
    let equi = equicorrelation(inst, &sol.x, tols.eps_eq);
    let a_j = columns(a, &equi)?;
    if !equi.is_empty() && numerical_rank(&a_j) < equi.len() {
        return Err(Error::UnsupportedRegime(
            "directional derivative needs A_J with full column rank".into(),
        ));
    }
    if !supp.subset_of(&equi) {
        return Err(Error::Internal(
            "support escapes the equicorrelation set; check tolerances".into(),
        ));
    }

    let free: Vec<usize> = equi.iter().filter(|i| !supp.contains(*i)).collect();
    if free.len() > MAX_ENUMERATION_GAP {
        return Err(Error::UnsupportedRegime(format!(
            "|J \\ I| = {} exceeds the enumeration cap {MAX_ENUMERATION_GAP}",
            free.len()
        )));
    }

    // u = q + (alpha / lambda) (A x_bar - b)
    let ax_minus_b = linalg::sub(&a.matvec(&sol.x), inst.rhs());
    let u: Vec<f64> = q
        .iter()
        .zip(&ax_minus_b)
        .map(|(qi, ri)| qi + alpha / lambda * ri)
        .collect();
    let residual = ax_minus_b.iter().map(|v| -v).collect::<Vec<f64>>();
    // signs of the equicorrelated correlations A_i^T (b - A x_bar), i in J\I
    let eq_signs: Vec<f64> = free.iter().map(|&i| a.col_dot(i, &residual).signum()).collect();

    let atu = a.matvec_t(&u);
    let slack_tol = 1e-9 * nrm_inf(&atu).max(1.0);

    // masks ordered by cardinality, then value: ties resolve to smaller K
    let mut masks: Vec<u32> = (0..(1u32 << free.len())).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));

    let mut accepted: Vec<(IndexSet, Vec<f64>)> = Vec::new();
    for mask in masks {
        let mut k_indices: Vec<usize> = supp.iter().collect();
        for (bit, &i) in free.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                k_indices.push(i);
            }
        }
        let k_set = IndexSet::from_unsorted(k_indices);
        let a_k = columns(a, &k_set)?;
        let w_k = match gram_solve(&a_k, &a_k.matvec_t(&u)) {
            Ok(w) => w,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut w = vec![0.0; a.cols()];
        for (j, i) in k_set.iter().enumerate() {
            w[i] = w_k[j];
        }

        // sign feasibility on K \ I
        let mut feasible = true;
        for (bit, &i) in free.iter().enumerate() {
            if mask & (1 << bit) != 0
                && (w[i].abs() <= tols.eps_supp || w[i].signum() != eq_signs[bit])
            {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        // slack feasibility on J \ K
        let aw = a.matvec(&w);
        for (bit, &i) in free.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                let slack = a.col_dot(i, &linalg::sub(&u, &aw));
                if slack * eq_signs[bit] > slack_tol {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            accepted.push((k_set, w));
        }
    }

    match accepted.len() {
        0 => Err(Error::Internal(
            "no index set satisfies the tangent-cone sign conditions; \
             tolerances are likely misconfigured"
                .into(),
        )),
        _ => {
            let (k0, w0) = &accepted[0];
            let scale = nrm2(w0).max(1.0);
            for (_, w) in &accepted[1..] {
                let diff = nrm_inf(&linalg::sub(w, w0));
                if diff > 1e-8 * scale {
                    return Err(Error::Internal(format!(
                        "{} distinct directional derivatives passed the sign \
                         conditions (max deviation {diff:.3e})",
                        accepted.len()
                    )));
                }
            }
            Ok(DirectionalDerivativeResult { w: w0.clone(), k: k0.clone() })
        }
    }
}

/// Derivative of the solution map under the strong assumption:
/// `DS(b, lambda)(q, alpha) = L_I ((A_I^T A_I)^{-1} A_I^T (q + (alpha/lambda)(A x_bar - b)))`.
pub fn derivative_strong(
    inst: &ProblemInstance,
    sol: &LassoSolution,
    q: &[f64],
    alpha: f64,
    tols: &Tolerances,
) -> Result<Vec<f64>> {
    let a = inst.matrix();
    let lambda = inst.lambda();
    if q.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "direction length {} != {} rows",
            q.len(),
            a.rows()
        )));
    }
    let supp = support(&sol.x, tols.eps_supp);
    let equi = equicorrelation(inst, &sol.x, tols.eps_eq);
    let a_i = columns(a, &supp)?;
    let rank_ok = supp.is_empty() || numerical_rank(&a_i) == supp.len();
    let x_i: Vec<f64> = supp.iter().map(|i| sol.x[i]).collect();
    let r_supp = linalg::sub(inst.rhs(), &a_i.matvec(&x_i));
    let comp = supp.complement(a.cols());
    let off: Vec<f64> = comp.iter().map(|i| a.col_dot(i, &r_supp)).collect();
    let margin = lambda - nrm_inf(&off);
    if !(rank_ok && margin > tols.eps_strict * lambda && supp == equi) {
        return Err(Error::Precondition(
            "strong assumption not verified at this solution".into(),
        ));
    }
    if supp.is_empty() {
        return Ok(vec![0.0; a.cols()]);
    }
    let ax_minus_b = linalg::sub(&a.matvec(&sol.x), inst.rhs());
    let u: Vec<f64> = q
        .iter()
        .zip(&ax_minus_b)
        .map(|(qi, ri)| qi + alpha / lambda * ri)
        .collect();
    let w_i = gram_solve(&a_i, &a_i.matvec_t(&u))?;
    let mut w = vec![0.0; a.cols()];
    for (j, i) in supp.iter().enumerate() {
        w[i] = w_i[j];
    }
    Ok(w)
}

/// Lipschitz-modulus bounds for the three parameter modes plus the extremal
/// singular values they are built from.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub assumptions: AssumptionReport,
    /// bound for joint `(b, lambda)` perturbations
    pub lipschitz_bl: f64,
    /// bound for `lambda`-only perturbations
    pub lipschitz_lambda: f64,
    /// bound when the matrix `A` itself is perturbed (Frobenius norm)
    #[serde(rename = "lipschitz_A")]
    pub lipschitz_a: f64,
    #[serde(rename = "sigma_min_I")]
    pub sigma_min_support: Option<f64>,
    #[serde(rename = "sigma_max_I")]
    pub sigma_max_support: Option<f64>,
    #[serde(rename = "sigma_min_J")]
    pub sigma_min_equicorrelation: Option<f64>,
    #[serde(rename = "sigma_max_J")]
    pub sigma_max_equicorrelation: Option<f64>,
}

/// Evaluates the Lipschitz bounds using the support when the strong tier
/// holds and the equicorrelation set otherwise.
pub fn lipschitz_bounds(
    inst: &ProblemInstance,
    sol: &LassoSolution,
    report: &AssumptionReport,
) -> Result<SensitivityReport> {
    if !report.intermediate {
        return Err(Error::UnsupportedRegime(
            "Lipschitz bounds require the intermediate assumption".into(),
        ));
    }
    let a = inst.matrix();
    let lambda = inst.lambda();

    let sigmas = |set: &IndexSet| -> Result<Option<(f64, f64)>> {
        if set.is_empty() {
            return Ok(None);
        }
        let sub = columns(a, set)?;
        Ok(Some(svd_extremes(&sub)?))
    };
    let sig_i = sigmas(&report.support)?;
    let sig_j = sigmas(&report.equicorrelation)?;

    let active = if report.strong { &report.support } else { &report.equicorrelation };
    let sig_active = if report.strong { sig_i } else { sig_j };

    let (lipschitz_bl, lipschitz_lambda, lipschitz_a) = match sig_active {
        None => (0.0, 0.0, 0.0), // empty active set: the solution map is locally constant
        Some((smin, smax)) => {
            let a_m = columns(a, active)?;
            let ax_minus_b = linalg::sub(&a.matvec(&sol.x), inst.rhs());
            let v: Vec<f64> = a_m.matvec_t(&ax_minus_b).iter().map(|c| c / lambda).collect();
            let vnorm = nrm2(&v);
            let card = (active.len() as f64).sqrt();
            let denom = smin * smin;
            let bl = (smax + vnorm) / denom;
            let ll = card / denom;
            let mid = if report.strong { card } else { vnorm };
            let la = (smax * (1.0 + nrm2(&sol.x)) + mid + nrm2(&ax_minus_b)) / denom;
            (bl, ll, la)
        }
    };

    Ok(SensitivityReport {
        assumptions: report.clone(),
        lipschitz_bl,
        lipschitz_lambda,
        lipschitz_a,
        sigma_min_support: sig_i.map(|s| s.0),
        sigma_max_support: sig_i.map(|s| s.1),
        sigma_min_equicorrelation: sig_j.map(|s| s.0),
        sigma_max_equicorrelation: sig_j.map(|s| s.1),
    })
}

/// Explicit LASSO solution in the unit-column coherence regime.
#[derive(Debug, Clone, Serialize)]
pub struct FuchsResult {
    pub x_bar: Vec<f64>,
    /// supremum of tuning parameters preserving the sign pattern; +inf when
    /// the sign pattern never flips
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub lambda_max: f64,
    /// sparsity-versus-coherence condition `||x0||_0 < (1 + 1/mu(A)) / 2`
    /// together with full column rank of `A_{I0}`
    pub condition_ok: bool,
    pub support: IndexSet,
    /// `||(A_{I0}^T A_{I0})^{-1} sgn(s0)||`, the exact derivative magnitude
    /// of the solution path in `lambda`
    pub derivative_norm: f64,
    /// `||A_{I0^C}^T A_{I0} (A_{I0}^T A_{I0})^{-1} sgn(s0)||_inf`; values
    /// below 1 certify optimality of the explicit formula
    pub dual_infnorm: f64,
}

/// Explicit solution `x_bar(lambda)` for measurements `b = A x0` with a
/// sparse representation `x0`, following the coherence-based construction.
pub fn fuchs_explicit(a: &Matrix, x0: &[f64], lambda: f64) -> Result<FuchsResult> {
    if x0.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "signal length {} != {} columns",
            x0.len(),
            a.cols()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Input(format!("lambda must be nonnegative, got {lambda}")));
    }
    let mu = coherence(a)?;
    let i0 = IndexSet::from_unsorted(
        x0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect(),
    );
    if i0.is_empty() {
        return Err(Error::Input("signal x0 must be nonzero".into()));
    }
    let s0: Vec<f64> = i0.iter().map(|i| x0[i]).collect();
    let signs: Vec<f64> = s0.iter().map(|v| v.signum()).collect();
    let a_i0 = columns(a, &i0)?;
    let d = gram_solve(&a_i0, &signs)?;

    let mut x_bar = vec![0.0; a.cols()];
    for (j, i) in i0.iter().enumerate() {
        x_bar[i] = s0[j] - lambda * d[j];
    }

    let lambda_max = s0
        .iter()
        .zip(&d)
        .filter_map(|(s, di)| {
            let ratio = s / di;
            (di != &0.0 && ratio > 0.0).then_some(ratio)
        })
        .fold(f64::INFINITY, f64::min);

    let sparsity_ok = if mu == 0.0 {
        true
    } else {
        (i0.len() as f64) < 0.5 * (1.0 + 1.0 / mu)
    };

    let a_i0_d = a_i0.matvec(&d);
    let comp = i0.complement(a.cols());
    let dual: Vec<f64> = comp.iter().map(|i| a.col_dot(i, &a_i0_d)).collect();

    Ok(FuchsResult {
        x_bar,
        lambda_max,
        condition_ok: sparsity_ok,
        support: i0,
        derivative_norm: nrm2(&d),
        dual_infnorm: nrm_inf(&dual),
    })
}
