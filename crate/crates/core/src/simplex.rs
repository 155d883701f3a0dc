//! Dense primal simplex for small linear programs in the form
//!
//! ```text
//! maximize  c·x   subject to  A x ≤ b,  x ≥ 0,  b ≥ 0
//! ```
//!
//! The origin is feasible, so no phase one is needed. The tableau is kept
//! in condensed (dictionary) form: one row per constraint and one column per
//! nonbasic variable, which keeps memory at `rows × vars` rather than
//! `rows × (vars + rows)`. Pivoting follows Bland's rule, so degenerate
//! problems terminate.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-12;
const RATIO_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row {row} has {got} coefficients, expected {expected}")]
    Shape {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("right-hand side {value} of row {row} is negative or not finite")]
    InfeasibleStart { row: usize, value: f64 },
    #[error("objective is unbounded along variable {0}")]
    Unbounded(usize),
    #[error("no convergence after {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row · x ≤ bound`.
    pub fn add_le(&mut self, row: Vec<f64>, bound: f64) {
        self.rows.push(row);
        self.rhs.push(bound);
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        let m = self.rows.len();
        for (i, (row, &b)) in self.rows.iter().zip(&self.rhs).enumerate() {
            if row.len() != n {
                return Err(LpError::Shape {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            if !(b >= 0.0) || !b.is_finite() {
                return Err(LpError::InfeasibleStart { row: i, value: b });
            }
        }

        // x_B = b - T x_N ; z = z0 + c·x_N
        let mut t: Vec<f64> = self.rows.iter().flatten().copied().collect();
        let mut b = self.rhs.clone();
        let mut c = self.objective.clone();
        let mut z0 = 0.0;
        let mut nonbasic: Vec<usize> = (0..n).collect();
        let mut basic: Vec<usize> = (n..n + m).collect();

        let limit = 50 * (n + m).max(10);
        let mut pivots = 0;
        loop {
            // Bland: smallest variable id with positive reduced cost.
            let entering = (0..n)
                .filter(|&j| c[j] > PIVOT_EPS)
                .min_by_key(|&j| nonbasic[j]);
            let Some(j) = entering else { break };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = t[i * n + j];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = b[i] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - RATIO_EPS
                            || (ratio <= br + RATIO_EPS && basic[i] < basic[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded(nonbasic[j]));
            };

            pivot(&mut t, &mut b, &mut c, &mut z0, n, r, j);
            std::mem::swap(&mut basic[r], &mut nonbasic[j]);
            pivots += 1;
            if pivots > limit {
                return Err(LpError::IterationLimit(pivots));
            }
        }

        let mut x = vec![0.0; n];
        for (i, &var) in basic.iter().enumerate() {
            if var < n {
                x[var] = b[i].max(0.0);
            }
        }
        Ok(LpSolution {
            x,
            value: z0,
            pivots,
        })
    }
}

fn pivot(
    t: &mut [f64],
    b: &mut [f64],
    c: &mut [f64],
    z0: &mut f64,
    n: usize,
    r: usize,
    j: usize,
) {
    let m = b.len();
    let p = t[r * n + j];
    let inv = 1.0 / p;
    {
        let row = &mut t[r * n..(r + 1) * n];
        for (k, v) in row.iter_mut().enumerate() {
            if k != j {
                *v *= inv;
            }
        }
        row[j] = inv;
    }
    b[r] *= inv;

    let pivot_row: Vec<f64> = t[r * n..(r + 1) * n].to_vec();
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * n + j];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[i * n..(i + 1) * n];
        for (k, v) in row.iter_mut().enumerate() {
            if k != j {
                *v -= f * pivot_row[k];
            }
        }
        row[j] = -f * inv;
        b[i] -= f * b[r];
        if b[i] < 0.0 && b[i] > -1e-11 {
            b[i] = 0.0;
        }
    }

    let cj = c[j];
    for k in 0..n {
        if k != j {
            c[k] -= cj * pivot_row[k];
        }
    }
    c[j] = -cj * inv;
    *z0 += cj * b[r];
}
