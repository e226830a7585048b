//! Dense dictionary-form simplex with Bland's rule for `max c·x, Ax ≤ b, x ≥ 0, b ≥ 0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tableau kept between objectives; feasibility does not depend on `c`, so a solved
/// basis is a valid starting point for the next objective.
#[derive(Debug, Clone)]
pub struct Simplex<T> {
    n: usize,
    m: usize,
    /// Row-major `m × n`: `x_B[i] = b[i] − Σ_j a[i][j] x_N[j]`.
    a: Vec<T>,
    b: Vec<T>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    tol: T,
    pub max_iterations: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> Simplex<T> {
    /// Rows of `a` have length `n`; every `b[i]` must be nonnegative.
    pub fn new(n: usize, rows: &[Vec<T>], b: &[T]) -> Result<Self> {
        if rows.len() != b.len() || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams("constraint matrix shape mismatch".into()));
        }
        if b.iter().any(|&v| v < T::zero() || !v.is_finite()) {
            return Err(Error::LpInfeasible);
        }
        let m = rows.len();
        let mut a = Vec::with_capacity(m * n);
        for r in rows {
            a.extend_from_slice(r);
        }
        Ok(Self {
            n,
            m,
            a,
            b: b.to_vec(),
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
            tol: T::tolerance(),
            max_iterations: 50_000,
            pivots: 0,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Maximizes `c·x` from the current basis.
    pub fn maximize(&mut self, c: &[T]) -> Result<LpSolution<T>> {
        let (n, m) = (self.n, self.m);
        let cost = |label: usize| if label < n { c[label] } else { T::zero() };
        let mut red: Vec<T> = self.nonbasic.iter().map(|&l| cost(l)).collect();
        for i in 0..m {
            let cb = cost(self.basic[i]);
            if cb != T::zero() {
                let row = &self.a[i * n..(i + 1) * n];
                for j in 0..n {
                    red[j] = red[j] - cb * row[j];
                }
            }
        }
        let mut iterations = 0;
        loop {
            let mut enter: Option<usize> = None;
            for j in 0..n {
                if red[j] > self.tol && enter.is_none_or(|e| self.nonbasic[j] < self.nonbasic[e]) {
                    enter = Some(j);
                }
            }
            let Some(s) = enter else { break };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..m {
                let aij = self.a[i * n + s];
                if aij > self.tol {
                    let ratio = self.b[i].max(T::zero()) / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best || (ratio == best && self.basic[i] < self.basic[r]) {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::InvalidParams("linear program is unbounded".into()));
            };
            iterations += 1;
            if iterations > self.max_iterations {
                return Err(Error::LpNotConverged { iterations });
            }
            self.pivot(r, s, &mut red);
        }
        self.pivots += iterations;
        let mut x = vec![T::zero(); n];
        for i in 0..m {
            if self.basic[i] < n {
                x[self.basic[i]] = self.b[i].max(T::zero());
            }
        }
        let value = c.iter().zip(&x).map(|(&ci, &xi)| ci * xi).sum();
        Ok(LpSolution { value, x, iterations })
    }

    fn pivot(&mut self, r: usize, s: usize, red: &mut [T]) {
        let n = self.n;
        let piv = self.a[r * n + s];
        let inv = T::one() / piv;
        self.b[r] = self.b[r] * inv;
        for j in 0..n {
            if j != s {
                self.a[r * n + j] = self.a[r * n + j] * inv;
            }
        }
        self.a[r * n + s] = inv;
        let (br, row_r): (T, Vec<T>) = (self.b[r], self.a[r * n..(r + 1) * n].to_vec());
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + s];
            if f == T::zero() {
                continue;
            }
            self.b[i] = self.b[i] - f * br;
            let row = &mut self.a[i * n..(i + 1) * n];
            for j in 0..n {
                if j != s {
                    row[j] = row[j] - f * row_r[j];
                }
            }
            row[s] = -f * row_r[s];
        }
        let cs = red[s];
        for j in 0..n {
            if j != s {
                red[j] = red[j] - cs * row_r[j];
            }
        }
        red[s] = -cs * row_r[s];
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[s]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_program() {
        // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, x ≤ 3.
        let rows = vec![vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]];
        let mut lp = Simplex::<f64>::new(2, &rows, &[4.0, 6.0, 3.0]).unwrap();
        let s = lp.maximize(&[3.0, 2.0]).unwrap();
        assert!((s.value - 11.0).abs() < 1e-12);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        let t = lp.maximize(&[0.0, 1.0]).unwrap();
        assert!((t.value - 2.0).abs() < 1e-12);
        let u = lp.maximize(&[-1.0, -1.0]).unwrap();
        assert_eq!(u.value, 0.0);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        let rows = vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0]];
        let mut lp = Simplex::<f64>::new(2, &rows, &[0.0, 0.0, 2.0]).unwrap();
        let s = lp.maximize(&[1.0, 1.0]).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = Simplex::new(2, &[vec![1.0, -1.0]], &[1.0]).unwrap();
        assert!(lp.maximize(&[0.0, 1.0]).is_err());
    }
}
