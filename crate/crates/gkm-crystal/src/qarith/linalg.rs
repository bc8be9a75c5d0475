//! Dense exact linear algebra over the rational-function field and over the
//! rationals.
//!
//! Elimination uses a fixed deterministic pivot rule: columns are processed
//! left to right and the pivot for each column is the unused row of lowest
//! index with a nonzero entry. Kernel bases use the standard convention that
//! each free column contributes one basis vector with coefficient 1 there.

use super::poly::Rat;
use super::scalar::ScalarQ;
use crate::{Error, Result};
use num_traits::Zero;

/// A dense matrix over the rational-function field `Q(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ScalarQ>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ScalarQ::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ScalarQ::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ScalarQ>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_cols(cols: Vec<Vec<ScalarQ>>, rows: usize) -> Self {
        let c = cols.len();
        let mut m = Self::zeros(rows, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &ScalarQ {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: ScalarQ) {
        self.data[r * self.cols + c] = v;
    }

    pub fn col(&self, j: usize) -> Vec<ScalarQ> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(ScalarQ::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &ScalarQ) -> Self {
        let data = self.data.iter().map(|a| a.mul(c)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[ScalarQ]) -> Vec<ScalarQ> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = ScalarQ::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&a.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    /// Reduced row-echelon form; returns the reduced matrix and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in 0..m.cols {
            let Some(pr) = (next_row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if pr != next_row {
                for j in 0..m.cols {
                    let a = m.get(next_row, j).clone();
                    let b = m.get(pr, j).clone();
                    m.set(next_row, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = m.get(next_row, col).inv();
            for j in 0..m.cols {
                let v = m.get(next_row, j).mul(&inv);
                m.set(next_row, j, v);
            }
            for r in 0..m.rows {
                if r == next_row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in 0..m.cols {
                    let v = m.get(r, j).sub(&factor.mul(m.get(next_row, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            next_row += 1;
            if next_row == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space `{x : Ax = 0}`.
    pub fn kernel_basis(&self) -> Vec<Vec<ScalarQ>> {
        let (r, pivots) = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![ScalarQ::zero(); self.cols];
            vec[free] = ScalarQ::one();
            for (col, row) in pivot_set.iter().enumerate() {
                if let Some(row) = row {
                    vec[col] = r.get(*row, free).neg();
                }
            }
            basis.push(vec);
        }
        basis
    }

    /// Solve `Ax = b`; free variables are set to zero. `None` if inconsistent.
    pub fn solve(&self, b: &[ScalarQ]) -> Option<Vec<ScalarQ>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![ScalarQ::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Exact inverse of a square matrix.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, ScalarQ::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(k, &c)| c != k) {
            return Err(Error::Internal("matrix is singular".into()));
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(out)
    }

    /// Rank of the matrix specialized at a rational point.
    pub fn rank_at(&self, x: &Rat) -> Result<usize> {
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                row.push(self.get(i, j).eval_rat(x)?);
            }
            rows.push(row);
        }
        Ok(rat_rank(rows))
    }

    /// Entry-wise evaluation at `q = 0`; errors if any entry has a pole.
    pub fn eval0(&self) -> Result<Vec<Vec<Rat>>> {
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut row = Vec::with_capacity(self.cols);
            for j in 0..self.cols {
                row.push(self.get(i, j).eval0()?);
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

// ---------------------------------------------------------------------------
// Dense linear algebra over the rationals.
// ---------------------------------------------------------------------------

/// Reduced row echelon form in place; returns pivot columns.
pub fn rat_rref(m: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut next_row = 0;
    for col in 0..cols {
        let Some(pr) = (next_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, pr);
        let inv = m[next_row][col].clone().recip();
        for j in 0..cols {
            let v = &m[next_row][j] * &inv;
            m[next_row][j] = v;
        }
        for r in 0..rows {
            if r == next_row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..cols {
                let v = &m[r][j] - &f * &m[next_row][j];
                m[r][j] = v;
            }
        }
        pivots.push(col);
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    pivots
}

pub fn rat_rank(mut m: Vec<Vec<Rat>>) -> usize {
    rat_rref(&mut m).len()
}

/// Solve `Ax = b` over the rationals; free variables zero; `None` if
/// inconsistent.
pub fn rat_solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    assert_eq!(b.len(), rows);
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rat_rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (row, &col) in pivots.iter().enumerate() {
        x[col] = aug[row][cols].clone();
    }
    Some(x)
}

/// Basis of the right null space over the rationals.
pub fn rat_kernel(a: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let pivots = rat_rref(&mut m);
    let mut pivot_of_col = vec![None; cols];
    for (row, &col) in pivots.iter().enumerate() {
        pivot_of_col[col] = Some(row);
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::from_integer(1.into());
        for (col, row) in pivot_of_col.iter().enumerate() {
            if let Some(row) = row {
                v[col] = -m[*row][free].clone();
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::poly::{rat, rat_frac, LaurentPoly};

    fn s(n: i64) -> ScalarQ {
        ScalarQ::from_int(n)
    }

    fn q() -> ScalarQ {
        ScalarQ::q_pow(1)
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        // [[1, q], [q, q^2]] has kernel spanned by (q, -1) up to scale.
        let m = QMatrix::from_rows(vec![vec![s(1), q()], vec![q(), q().mul(&q())]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // The implemented free-variable convention yields (-q, 1).
        assert_eq!(k[0][0], q().neg());
        assert_eq!(k[0][1], s(1));
        // Same line as (q, -1): cross-multiplication check.
        let quoted = [q(), s(-1)];
        assert_eq!(k[0][0].mul(&quoted[1]), k[0][1].mul(&quoted[0]));
        // Kernel vectors annihilate the matrix.
        assert!(m.apply(&k[0]).iter().all(ScalarQ::is_zero));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = QMatrix::from_rows(vec![
            vec![s(1), q(), s(0)],
            vec![s(0), s(1), q().pow(2)],
            vec![q(), s(0), s(1)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(3));
        let b = vec![s(1), q(), s(3)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
    }

    #[test]
    fn inconsistent_system_returns_none() {
        let m = QMatrix::from_rows(vec![vec![s(1), s(1)], vec![s(2), s(2)]]);
        assert!(m.solve(&[s(0), s(1)]).is_none());
        assert!(m.solve(&[s(1), s(2)]).is_some());
    }

    #[test]
    fn rank_specialization_agrees_generically() {
        let m = QMatrix::from_rows(vec![
            vec![s(1), q()],
            vec![q(), q().pow(2).add(&ScalarQ::from_laurent(&LaurentPoly::q_pow(5)))],
        ]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.rank_at(&rat_frac(2, 5)).unwrap(), 2);
        assert_eq!(m.rank_at(&rat_frac(1, 3)).unwrap(), 2);
    }

    #[test]
    fn rational_helpers() {
        let a = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert_eq!(rat_rank(a.clone()), 1);
        let k = rat_kernel(&a);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![rat(-2), rat(1)]);
        let x = rat_solve(&a, &[rat(3), rat(6)]).unwrap();
        assert_eq!(x, vec![rat(3), rat(0)]);
        assert!(rat_solve(&a, &[rat(3), rat(5)]).is_none());
    }
}
