//! Dense two-phase simplex for small box-bounded linear programs.
//!
//! Solves `max cᵀx  s.t.  A x = b,  0 ≤ x ≤ upper` where `upper` entries
//! may be `f64::INFINITY`. Problems here have at most a few dozen columns,
//! so a full tableau with Bland's rule is both exact enough and fast enough.

use nalgebra::DMatrix;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

struct Tableau {
    t: DMatrix<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        for j in 0..self.t.ncols() {
            self.t[(row, j)] /= p;
        }
        self.rhs[row] /= p;
        for i in 0..self.t.nrows() {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..self.t.ncols() {
                let v = self.t[(row, j)];
                self.t[(i, j)] -= f * v;
            }
            self.rhs[i] -= f * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// Maximises `cost·x` over the current basis. Columns `>= allowed` never
    /// enter. Returns false when unbounded.
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> bool {
        let rows = self.t.nrows();
        let max_iter = 50 * (rows + self.t.ncols()) + 1000;
        for _ in 0..max_iter {
            // Bland: first improving column.
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for i in 0..rows {
                    reduced -= cost[self.basis[i]] * self.t[(i, j)];
                }
                if reduced > 1e-11 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..rows {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[i] < self.basis[r]) {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
        true
    }
}

/// Solves the bounded LP. Without an objective only feasibility is decided
/// and any feasible point is returned (with `value = 0`).
pub fn solve(a: &DMatrix<f64>, b: &[f64], upper: &[f64], objective: Option<&[f64]>) -> LpOutcome {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "rhs length");
    assert_eq!(upper.len(), n, "bound length");
    if let Some(c) = objective {
        assert_eq!(c.len(), n, "objective length");
    }

    let bounded: Vec<usize> = (0..n).filter(|&j| upper[j].is_finite()).collect();
    let nb = bounded.len();
    let rows = m + nb;
    let art0 = n + nb;
    let cols = art0 + m;

    let mut t = DMatrix::zeros(rows, cols);
    let mut rhs = vec![0.0; rows];
    let mut basis = vec![0; rows];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, art0 + i)] = 1.0;
        rhs[i] = sign * b[i];
        basis[i] = art0 + i;
    }
    for (k, &j) in bounded.iter().enumerate() {
        let r = m + k;
        t[(r, j)] = 1.0;
        t[(r, n + k)] = 1.0;
        rhs[r] = upper[j];
        basis[r] = n + k;
    }
    let mut tab = Tableau { t, rhs, basis };

    // Phase 1: drive artificials to zero.
    let mut cost1 = vec![0.0; cols];
    for c in cost1.iter_mut().skip(art0) {
        *c = -1.0;
    }
    tab.optimise(&cost1, cols);
    let infeasibility: f64 = (0..rows).filter(|&i| tab.basis[i] >= art0).map(|i| tab.rhs[i]).sum();
    let scale = 1.0 + b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    for i in 0..rows {
        if tab.basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| tab.t[(i, j)].abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }

    let mut value = 0.0;
    if let Some(c) = objective {
        let mut cost2 = vec![0.0; cols];
        cost2[..n].copy_from_slice(c);
        if !tab.optimise(&cost2, art0) {
            return LpOutcome::Unbounded;
        }
        value = (0..rows)
            .filter(|&i| tab.basis[i] < n)
            .map(|i| c[tab.basis[i]] * tab.rhs[i])
            .sum();
    }

    let mut x = vec![0.0; n];
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs[i];
        }
    }
    for j in 0..n {
        x[j] = x[j].clamp(0.0, upper[j]);
    }
    LpOutcome::Optimal { x, value }
}
