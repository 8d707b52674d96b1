//! Small dense linear algebra over `T: Real` and `Complex<T>`.
//!
//! Dimensions here are tiny (d ≤ 8), so plain loops beat any dependency.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{lit, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Copy + Zero + One> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows);
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..o.cols {
                    out[(i, j)] = out[(i, j)] + a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Max-abs entry.
pub fn max_abs<T: Real>(m: &Mat<T>) -> T {
    m.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigenvalues<T: Real>(m: &Mat<T>) -> Vec<T> {
    let n = m.rows;
    let mut a = m.clone();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off + a[(i, j)] * a[(i, j)];
                }
            }
        }
        let scale = max_abs(&a).max(T::min_positive_value());
        if off.sqrt() <= T::epsilon() * scale * lit(1e-2) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Largest and smallest singular values.
pub fn singular_extremes<T: Real>(m: &Mat<T>) -> (T, T) {
    let g = m.transpose().mul(m);
    let ev = sym_eigenvalues(&g);
    let hi = ev.iter().fold(T::zero(), |a, &b| a.max(b));
    let lo = ev.iter().fold(T::infinity(), |a, &b| a.min(b));
    (hi.max(T::zero()).sqrt(), lo.max(T::zero()).sqrt())
}

/// Spectral norm.
pub fn spectral_norm<T: Real>(m: &Mat<T>) -> T {
    if m.rows == 1 && m.cols == 1 {
        return m[(0, 0)].abs();
    }
    singular_extremes(m).0
}

/// Inverse by Gauss–Jordan with partial pivoting; `None` if singular.
pub fn inverse<T: Real>(m: &Mat<T>) -> Option<Mat<T>> {
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = Mat::identity(n);
    let scale = max_abs(m);
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[(x, col)].abs().partial_cmp(&a[(y, col)].abs()).unwrap())?;
        if a[(p, col)].abs() <= T::epsilon() * scale {
            return None;
        }
        for c in 0..n {
            a.data.swap(col * n + c, p * n + c);
            inv.data.swap(col * n + c, p * n + c);
        }
        let piv = a[(col, col)];
        for c in 0..n {
            a[(col, c)] = a[(col, c)] / piv;
            inv[(col, c)] = inv[(col, c)] / piv;
        }
        for r in 0..n {
            if r != col {
                let f = a[(r, col)];
                for c in 0..n {
                    a[(r, c)] = a[(r, c)] - f * a[(col, c)];
                    inv[(r, c)] = inv[(r, c)] - f * inv[(col, c)];
                }
            }
        }
    }
    Some(inv)
}

/// Modified Gram–Schmidt; drops vectors below `tol` after projection.
pub fn orthonormalize<T: Real>(vs: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let p = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = *wi - p * *qi;
                }
            }
        }
        let nw = norm(&w);
        if nw > tol {
            out.push(w.into_iter().map(|x| x / nw).collect());
        }
    }
    out
}

/// Basis of the null space of a complex matrix by Gaussian elimination with
/// complete pivoting; pivots below `tol` count as zero.
pub fn complex_null_space<T: Real>(m: &Mat<Complex<T>>, tol: T) -> Vec<Vec<Complex<T>>> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, T::zero());
        for i in rank..rows {
            for j in rank..cols {
                let x = a[(i, j)].norm();
                if x > best.2 {
                    best = (i, j, x);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (bi, bj, _) = best;
        for c in 0..cols {
            a.data.swap(rank * cols + c, bi * cols + c);
        }
        for r in 0..rows {
            a.data.swap(r * cols + rank, r * cols + bj);
        }
        perm.swap(rank, bj);
        let piv = a[(rank, rank)];
        for c in 0..cols {
            a[(rank, c)] = a[(rank, c)] / piv;
        }
        for r in 0..rows {
            if r != rank {
                let f = a[(r, rank)];
                if f != Complex::zero() {
                    for c in 0..cols {
                        let v = a[(rank, c)];
                        a[(r, c)] = a[(r, c)] - f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in rank..cols {
        let mut y = vec![Complex::zero(); cols];
        y[free] = Complex::one();
        for r in 0..rank {
            y[r] = -a[(r, free)];
        }
        let mut x = vec![Complex::zero(); cols];
        for (k, &p) in perm.iter().enumerate() {
            x[p] = y[k];
        }
        basis.push(x);
    }
    basis
}
