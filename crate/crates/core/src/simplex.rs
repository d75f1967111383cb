//! Dense two-phase primal simplex with Bland's rule.
//!
//! Sized for the small feasibility LPs this crate produces (a few hundred
//! rows). Bland's rule keeps the method cycle-free; speed is secondary.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

/// `min c^T x  s.t.  A x = b, x >= 0`, dense rows.
pub struct StandardLp {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    rows: usize,
    cols: usize, // structural + artificial
    n_struct: usize,
    t: Vec<Vec<f64>>, // rows x (cols + 1), last column is rhs
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f != 0.0 {
                for j in 0..=self.cols {
                    self.t[i][j] -= f * self.t[r][j];
                }
            }
        }
        self.basis[r] = c;
    }

    /// One simplex phase over the given cost vector (length `cols`).
    /// Artificial columns are barred from entering when `bar_artificial`.
    fn optimize(&mut self, cost: &[f64], bar_artificial: bool) -> Result<f64> {
        let max_iter = 2000 + 200 * (self.rows + self.cols);
        for _ in 0..max_iter {
            // reduced costs from scratch: c_j - c_B^T B^{-1} a_j; the tableau
            // already stores B^{-1} a_j, so this is a plain column sweep.
            let limit = if bar_artificial { self.n_struct } else { self.cols };
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j];
                for i in 0..self.rows {
                    red -= cost[self.basis[i]] * self.t[i][j];
                }
                if red < -COST_TOL {
                    entering = Some(j); // Bland: first improving index
                    break;
                }
            }
            let Some(col) = entering else {
                let mut obj = 0.0;
                for i in 0..self.rows {
                    obj += cost[self.basis[i]] * self.t[i][self.cols];
                }
                return Ok(obj);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.cols] / a;
                    match leaving {
                        None => leaving = Some((i, ratio)),
                        Some((li, lr)) => {
                            // Bland tie-break: smallest basic index leaves
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                leaving = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(Error::Internal("unbounded linear program".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::Internal("simplex iteration cap exceeded".into()))
    }
}

pub fn solve_standard(lp: &StandardLp) -> Result<LpSolution> {
    let rows = lp.b.len();
    let n = lp.c.len();
    if lp.a.len() != rows || lp.a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("inconsistent LP dimensions".into()));
    }

    let cols = n + rows; // one artificial per row
    let mut t = vec![vec![0.0; cols + 1]; rows];
    for i in 0..rows {
        let flip = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        for (tj, aj) in t[i].iter_mut().zip(&lp.a[i]) {
            *tj = flip * aj;
        }
        t[i][n + i] = 1.0;
        t[i][cols] = flip * lp.b[i];
    }
    let basis: Vec<usize> = (n..n + rows).collect();
    let mut tab = Tableau { rows, cols, n_struct: n, t, basis };

    // Phase I: minimize the artificial sum.
    let mut phase1 = vec![0.0; cols];
    for p in phase1.iter_mut().skip(n) {
        *p = 1.0;
    }
    let infeas = tab.optimize(&phase1, false)?;
    if infeas > 1e-7 {
        return Err(Error::Internal(format!("LP infeasible (phase-1 value {infeas:.3e})")));
    }
    // Drive leftover artificial basics out where possible.
    for r in 0..rows {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
            }
        }
    }

    // Phase II over the real costs, artificials barred.
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(&lp.c);
    let objective = tab.optimize(&phase2, true)?;

    let mut x = vec![0.0; n];
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[i][tab.cols];
        }
    }
    Ok(LpSolution { objective, x })
}

/// Minimizes `max_i |c0[i] + g[i]^T z|` over `z` in R^d via the epigraph LP.
/// Returns the optimal value and a minimizing `z`.
pub fn minimax_affine(c0: &[f64], g: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let k = c0.len();
    if g.len() != k {
        return Err(Error::Dimension("minimax row count mismatch".into()));
    }
    if k == 0 {
        return Ok((0.0, Vec::new()));
    }
    let d = g[0].len();
    if g.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("ragged minimax rows".into()));
    }
    if d == 0 {
        return Ok((c0.iter().fold(0.0f64, |m, v| m.max(v.abs())), Vec::new()));
    }

    // variables: z+ (d), z- (d), t+ , t-, slacks (2k)
    let n = 2 * d + 2 + 2 * k;
    let mut a = vec![vec![0.0; n]; 2 * k];
    let mut b = vec![0.0; 2 * k];
    for i in 0..k {
        //  g_i^T z - t <= -c_i
        for j in 0..d {
            a[i][j] = g[i][j];
            a[i][d + j] = -g[i][j];
        }
        a[i][2 * d] = -1.0;
        a[i][2 * d + 1] = 1.0;
        a[i][2 * d + 2 + i] = 1.0;
        b[i] = -c0[i];
        // -g_i^T z - t <= c_i
        let r = k + i;
        for j in 0..d {
            a[r][j] = -g[i][j];
            a[r][d + j] = g[i][j];
        }
        a[r][2 * d] = -1.0;
        a[r][2 * d + 1] = 1.0;
        a[r][2 * d + 2 + k + i] = 1.0;
        b[r] = c0[i];
    }
    let mut c = vec![0.0; n];
    c[2 * d] = 1.0;
    c[2 * d + 1] = -1.0;

    let sol = solve_standard(&StandardLp { a, b, c })?;
    let z: Vec<f64> = (0..d).map(|j| sol.x[j] - sol.x[d + j]).collect();
    Ok((sol.objective, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_form_basic() {
        // min -x1 - 2x2 s.t. x1 + x2 + s1 = 4, x1 + 3x2 + s2 = 6; opt at (3,1)
        let lp = StandardLp {
            a: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
            c: vec![-1.0, -2.0, 0.0, 0.0],
        };
        let sol = solve_standard(&lp).unwrap();
        assert!((sol.objective + 5.0).abs() < 1e-9);
        assert!((sol.x[0] - 3.0).abs() < 1e-9);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_goes_through_phase_one() {
        // x1 - x2 = -1, x1 + x2 = 3, minimize x1 -> (1, 2)
        let lp = StandardLp {
            a: vec![vec![1.0, -1.0], vec![1.0, 1.0]],
            b: vec![-1.0, 3.0],
            c: vec![1.0, 0.0],
        };
        let sol = solve_standard(&lp).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x1 = 1 and x1 = 2 simultaneously
        let lp = StandardLp {
            a: vec![vec![1.0], vec![1.0]],
            b: vec![1.0, 2.0],
            c: vec![0.0],
        };
        assert!(solve_standard(&lp).is_err());
    }

    #[test]
    fn minimax_scalar_balance() {
        // min over y1 of max(|y1|, |2 y1 - 1|): optimum 1/3 at y1 = 1/3
        let (val, z) = minimax_affine(&[0.0, -1.0], &[vec![1.0], vec![2.0]]).unwrap();
        assert!((val - 1.0 / 3.0).abs() < 1e-9, "val {val}");
        assert!((z[0] - 1.0 / 3.0).abs() < 1e-9, "z {z:?}");
    }

    #[test]
    fn minimax_no_freedom() {
        let (val, z) = minimax_affine(&[0.5, -2.0], &[vec![], vec![]]).unwrap();
        assert!((val - 2.0).abs() < 1e-12);
        assert!(z.is_empty());
    }

    #[test]
    fn minimax_two_dims() {
        // rows: c + Gz with G = I: minimize max(|1 + z1|, |-3 + z2|) -> 0
        let (val, z) = minimax_affine(&[1.0, -3.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(val.abs() < 1e-9);
        assert!((z[0] + 1.0).abs() < 1e-9);
        assert!((z[1] - 3.0).abs() < 1e-9);
    }
}
