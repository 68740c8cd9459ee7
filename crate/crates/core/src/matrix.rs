//! Dense exact matrices over `Q(zeta_{4r})[eta]` with Gaussian elimination.

use crate::scalars::{CycloField, CycloScalar};
use crate::Result;
use crate::SkeinError;

/// Square or rectangular matrix of exact scalars, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<CycloScalar>,
}

impl Mat {
    pub fn zero(fld: &CycloField, rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![fld.zero(); rows * cols],
        }
    }

    pub fn identity(fld: &CycloField, n: usize) -> Self {
        let mut m = Mat::zero(fld, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = fld.one();
        }
        m
    }

    pub fn from_fn(
        fld: &CycloField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> CycloScalar,
    ) -> Self {
        let mut m = Mat::zero(fld, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                *m.at_mut(i, j) = f(i, j);
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

    pub fn at(&self, i: usize, j: usize) -> &CycloScalar {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut CycloScalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, fld: &CycloField, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Mat::zero(fld, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let t = fld.mul(a, b);
                    *out.at_mut(i, j) = fld.add(out.at(i, j), &t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, fld: &CycloField, v: &[CycloScalar]) -> Vec<CycloScalar> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![fld.zero(); self.rows];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() || v[k].is_zero() {
                    continue;
                }
                let t = fld.mul(a, &v[k]);
                out[i] = fld.add(&out[i], &t);
            }
        }
        out
    }

    pub fn scale(&self, fld: &CycloField, c: &CycloScalar) -> Mat {
        let mut out = self.clone();
        for x in &mut out.data {
            *x = fld.mul(x, c);
        }
        out
    }

    pub fn sub(&self, fld: &CycloField, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x = fld.sub(x, y);
        }
        out
    }

    pub fn transpose(&self, fld: &CycloField) -> Mat {
        Mat::from_fn(fld, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && !self.at(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn commutator(&self, fld: &CycloField, other: &Mat) -> Mat {
        self.mul(fld, other).sub(fld, &other.mul(fld, self))
    }

    /// First nonzero entry in row-major order.
    pub fn first_nonzero(&self) -> Option<&CycloScalar> {
        self.data.iter().find(|x| !x.is_zero())
    }

    /// Divide by the first nonzero entry; projective normal form.
    pub fn projective_normalize(&self, fld: &CycloField) -> Result<Mat> {
        match self.first_nonzero() {
            None => Ok(self.clone()),
            Some(p) => {
                let inv = fld.inv(p)?;
                Ok(self.scale(fld, &inv))
            }
        }
    }

    /// Exact row reduction; returns (rank, echelon form).
    pub fn rank(&self, fld: &CycloField) -> Result<usize> {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            // find an invertible pivot
            let mut pivot = None;
            for row in rank..m.rows {
                if !m.at(row, col).is_zero() && fld.inv(m.at(row, col)).is_ok() {
                    pivot = Some(row);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let pinv = fld.inv(m.at(rank, col))?;
            for j in col..m.cols {
                *m.at_mut(rank, j) = fld.mul(m.at(rank, j), &pinv);
            }
            for row in 0..m.rows {
                if row != rank && !m.at(row, col).is_zero() {
                    let factor = m.at(row, col).clone();
                    for j in col..m.cols {
                        let t = fld.mul(&factor, m.at(rank, j));
                        *m.at_mut(row, j) = fld.sub(m.at(row, j), &t);
                    }
                }
            }
            rank += 1;
        }
        Ok(rank)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Solve `self * x = rhs` for square invertible `self`.
    pub fn solve(&self, fld: &CycloField, rhs: &[CycloScalar]) -> Result<Vec<CycloScalar>> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.len());
        let n = self.rows;
        let mut m = self.clone();
        let mut b: Vec<CycloScalar> = rhs.to_vec();
        for col in 0..n {
            let mut pivot = None;
            for row in col..n {
                if !m.at(row, col).is_zero() && fld.inv(m.at(row, col)).is_ok() {
                    pivot = Some(row);
                    break;
                }
            }
            let p = pivot.ok_or(SkeinError::DimensionMismatch(
                "singular matrix in solve".into(),
            ))?;
            m.swap_rows(col, p);
            b.swap(col, p);
            let pinv = fld.inv(m.at(col, col))?;
            for j in col..n {
                *m.at_mut(col, j) = fld.mul(m.at(col, j), &pinv);
            }
            b[col] = fld.mul(&b[col], &pinv);
            for row in 0..n {
                if row != col && !m.at(row, col).is_zero() {
                    let factor = m.at(row, col).clone();
                    for j in col..n {
                        let t = fld.mul(&factor, m.at(col, j));
                        *m.at_mut(row, j) = fld.sub(m.at(row, j), &t);
                    }
                    let t = fld.mul(&factor, &b[col]);
                    b[row] = fld.sub(&b[row], &t);
                }
            }
        }
        Ok(b)
    }

    pub fn inverse(&self, fld: &CycloField) -> Result<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut out = Mat::zero(fld, n, n);
        for j in 0..n {
            let mut e = vec![fld.zero(); n];
            e[j] = fld.one();
            let col = self.solve(fld, &e)?;
            for i in 0..n {
                *out.at_mut(i, j) = col[i].clone();
            }
        }
        Ok(out)
    }

    pub fn det(&self, fld: &CycloField) -> Result<CycloScalar> {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = fld.one();
        for col in 0..n {
            let mut pivot = None;
            for row in col..n {
                if !m.at(row, col).is_zero() && fld.inv(m.at(row, col)).is_ok() {
                    pivot = Some(row);
                    break;
                }
            }
            let Some(p) = pivot else {
                return Ok(fld.zero());
            };
            if p != col {
                m.swap_rows(col, p);
                det = fld.neg(&det);
            }
            det = fld.mul(&det, m.at(col, col));
            let pinv = fld.inv(m.at(col, col))?;
            for row in col + 1..n {
                if !m.at(row, col).is_zero() {
                    let factor = fld.mul(m.at(row, col), &pinv);
                    for j in col..n {
                        let t = fld.mul(&factor, m.at(col, j));
                        *m.at_mut(row, j) = fld.sub(m.at(row, j), &t);
                    }
                }
            }
        }
        Ok(det)
    }

    /// Basis of the right nullspace of `self`, exact reduced echelon form.
    pub fn nullspace(&self, fld: &CycloField) -> Result<Vec<Vec<CycloScalar>>> {
        let mut m = self.clone();
        let n = self.cols;
        let mut pivot_col_of_row: Vec<usize> = Vec::new();
        let mut rank = 0usize;
        for col in 0..n {
            if rank == m.rows {
                break;
            }
            let mut pivot = None;
            for row in rank..m.rows {
                if !m.at(row, col).is_zero() && fld.inv(m.at(row, col)).is_ok() {
                    pivot = Some(row);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            m.swap_rows(rank, p);
            let pinv = fld.inv(m.at(rank, col))?;
            for j in col..n {
                *m.at_mut(rank, j) = fld.mul(m.at(rank, j), &pinv);
            }
            for row in 0..m.rows {
                if row != rank && !m.at(row, col).is_zero() {
                    let factor = m.at(row, col).clone();
                    for j in col..n {
                        let t = fld.mul(&factor, m.at(rank, j));
                        *m.at_mut(row, j) = fld.sub(m.at(row, j), &t);
                    }
                }
            }
            pivot_col_of_row.push(col);
            rank += 1;
        }
        let pivot_cols: std::collections::HashSet<usize> =
            pivot_col_of_row.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![fld.zero(); n];
            v[free] = fld.one();
            for (row, &pc) in pivot_col_of_row.iter().enumerate() {
                v[pc] = fld.neg(m.at(row, free));
            }
            basis.push(v);
        }
        Ok(basis)
    }
}

/// Echelon accumulator for incremental exact rank computations.
pub struct RowSpace<'f> {
    fld: &'f CycloField,
    dim: usize,
    /// Reduced rows, each with its pivot column.
    rows: Vec<(usize, Vec<CycloScalar>)>,
}

impl<'f> RowSpace<'f> {
    pub fn new(fld: &'f CycloField, dim: usize) -> Self {
        RowSpace {
            fld,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Insert a vector; returns true if it increased the rank.
    pub fn insert(&mut self, v: &[CycloScalar]) -> Result<bool> {
        assert_eq!(v.len(), self.dim);
        let fld = self.fld;
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let factor = v[*pivot].clone();
                for j in 0..self.dim {
                    if !row[j].is_zero() {
                        let t = fld.mul(&factor, &row[j]);
                        v[j] = fld.sub(&v[j], &t);
                    }
                }
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return Ok(false);
        };
        let pinv = fld.inv(&v[pivot])?;
        for x in &mut v {
            *x = fld.mul(x, &pinv);
        }
        // back-substitute into existing rows
        for (_, row) in &mut self.rows {
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for j in 0..self.dim {
                    if !v[j].is_zero() {
                        let t = fld.mul(&factor, &v[j]);
                        row[j] = fld.sub(&row[j], &t);
                    }
                }
            }
        }
        self.rows.push((pivot, v));
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Level;

    fn fld() -> CycloField {
        CycloField::new(Level::new(5).unwrap())
    }

    #[test]
    fn solve_and_inverse() {
        let f = fld();
        let m = Mat::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 0) => f.one(),
            (0, 1) => f.int(-1),
            (1, 0) => f.one(),
            (1, 1) => f.pow_a(3),
            _ => unreachable!(),
        });
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&f, &inv), Mat::identity(&f, 2));
        let rhs = vec![f.int(2), f.int(3)];
        let x = m.solve(&f, &rhs).unwrap();
        let back = m.mul_vec(&f, &x);
        assert_eq!(back, rhs);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let f = fld();
        // [[1, 2], [2, 4]] has nullspace spanned by (-2, 1)
        let m = Mat::from_fn(&f, 2, 2, |i, j| f.int([[1, 2], [2, 4]][i][j]));
        let ns = m.nullspace(&f).unwrap();
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        let out = m.mul_vec(&f, v);
        assert!(out.iter().all(|x| x.is_zero()));
        assert_eq!(m.rank(&f).unwrap(), 1);
    }

    #[test]
    fn det_values() {
        let f = fld();
        let m = Mat::from_fn(&f, 2, 2, |i, j| f.int([[1, 2], [3, 4]][i][j]));
        assert_eq!(m.det(&f).unwrap(), f.int(-2));
        let id = Mat::identity(&f, 4);
        assert_eq!(id.det(&f).unwrap(), f.one());
    }

    #[test]
    fn row_space_rank() {
        let f = fld();
        let mut rs = RowSpace::new(&f, 3);
        assert!(rs.insert(&[f.one(), f.int(2), f.int(3)]).unwrap());
        assert!(!rs.insert(&[f.int(2), f.int(4), f.int(6)]).unwrap());
        assert!(rs.insert(&[f.one(), f.zero(), f.zero()]).unwrap());
        assert_eq!(rs.rank(), 2);
    }
}
