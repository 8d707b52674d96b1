//! Exact integer matrices: products, determinants, Smith and Hermite forms,
//! and rational solutions of `Bx ≡ 0 mod ℤᵈ`.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

/// `U·M·V = diag(divisors)` with `U`, `V` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Elementary divisors, nonnegative, each dividing the next.
    pub divisors: Vec<i128>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i128>) -> Self {
        assert_eq!(rows * cols, data.len(), "shape/data mismatch");
        IntMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from row vectors; `None` if ragged.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return None;
            }
            data.extend(row.iter().map(|&v| v as i128));
        }
        Some(IntMatrix::new(r, c, data))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i128) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[i128] {
        &self.data
    }

    pub fn to_rows_i64(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as i64).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc = acc.checked_add(self.get(r, k).checked_mul(other.get(k, c))?)?;
                }
                out.set(r, c, acc);
            }
        }
        Some(out)
    }

    pub fn checked_sub(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix::new(self.rows, self.cols, data))
    }

    pub fn checked_add(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix::new(self.rows, self.cols, data))
    }

    pub fn scale(&self, s: i128) -> Option<IntMatrix> {
        let data = self
            .data
            .iter()
            .map(|a| a.checked_mul(s))
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix::new(self.rows, self.cols, data))
    }

    /// `self − I`.
    pub fn minus_identity(&self) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.set(i, i, m.get(i, i) - 1);
        }
        m
    }

    pub fn checked_pow(&self, mut e: u64) -> Option<IntMatrix> {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = IntMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Some(acc)
    }

    pub fn mul_vec(&self, v: &[i128]) -> Vec<i128> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Option<i128> {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Some(1);
        }
        let mut a = self.data.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                    return Some(0);
                };
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = a[i * n + j]
                        .checked_mul(a[k * n + k])?
                        .checked_sub(a[i * n + k].checked_mul(a[k * n + j])?)?;
                    a[i * n + j] = t / prev;
                }
            }
            prev = a[k * n + k];
        }
        Some(sign * a[n * n - 1])
    }

    /// Inverse of a unimodular matrix; `None` if `|det| ≠ 1`.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix> {
        let n = self.rows;
        let d = self.det()?;
        if d.abs() != 1 {
            return None;
        }
        let mut a: Vec<Ratio<i128>> = self.data.iter().map(|&v| Ratio::from_integer(v)).collect();
        let mut inv: Vec<Ratio<i128>> = IntMatrix::identity(n)
            .data
            .iter()
            .map(|&v| Ratio::from_integer(v))
            .collect();
        for col in 0..n {
            let p = (col..n).find(|&r| a[r * n + col] != Ratio::from_integer(0))?;
            for c in 0..n {
                a.swap(col * n + c, p * n + c);
                inv.swap(col * n + c, p * n + c);
            }
            let piv = a[col * n + col];
            for c in 0..n {
                a[col * n + c] /= piv;
                inv[col * n + c] /= piv;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r * n + col];
                    if f != Ratio::from_integer(0) {
                        for c in 0..n {
                            let (ac, ic) = (a[col * n + c], inv[col * n + c]);
                            a[r * n + c] -= f * ac;
                            inv[r * n + c] -= f * ic;
                        }
                    }
                }
            }
        }
        let data = inv
            .iter()
            .map(|q| q.is_integer().then(|| q.to_integer()))
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix::new(n, n, data))
    }

    /// Integer characteristic polynomial coefficients, lowest degree first,
    /// monic (Faddeev–LeVerrier, exact division).
    pub fn charpoly(&self) -> Option<Vec<i128>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![0i128; n + 1];
        coeffs[n] = 1;
        let mut m = IntMatrix::zeros(n, n);
        for k in 1..=n {
            // M_k = A·M_{k−1} + c_{n−k+1} I
            let mut next = self.checked_mul(&m)?;
            for i in 0..n {
                next.set(i, i, next.get(i, i).checked_add(coeffs[n - k + 1])?);
            }
            let am = self.checked_mul(&next)?;
            let tr: i128 = (0..n).map(|i| am.get(i, i)).sum();
            coeffs[n - k] = -tr / k as i128;
            m = next;
        }
        Some(coeffs)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// row_dst += f·row_src
    fn add_row(&mut self, dst: usize, src: usize, f: i128) {
        for c in 0..self.cols {
            let v = self.get(src, c);
            self.data[dst * self.cols + c] += f * v;
        }
    }

    /// col_dst += f·col_src
    fn add_col(&mut self, dst: usize, src: usize, f: i128) {
        for r in 0..self.rows {
            let v = self.get(r, src);
            self.data[r * self.cols + dst] += f * v;
        }
    }

    /// Smith normal form with transforms.
    pub fn smith(&self) -> SmithForm {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut u = IntMatrix::identity(m);
        let mut v = IntMatrix::identity(n);
        let mut divisors = Vec::with_capacity(m.min(n));
        for t in 0..m.min(n) {
            loop {
                let mut best: Option<(usize, usize, i128)> = None;
                for i in t..m {
                    for j in t..n {
                        let x = a.get(i, j).abs();
                        if x != 0 && best.map_or(true, |(_, _, b)| x < b) {
                            best = Some((i, j, x));
                        }
                    }
                }
                let Some((bi, bj, _)) = best else {
                    break;
                };
                a.swap_rows(t, bi);
                u.swap_rows(t, bi);
                a.swap_cols(t, bj);
                v.swap_cols(t, bj);
                let p = a.get(t, t);
                let mut clean = true;
                for i in t + 1..m {
                    let q = Integer::div_floor(&a.get(i, t), &p);
                    if q != 0 {
                        a.add_row(i, t, -q);
                        u.add_row(i, t, -q);
                    }
                    clean &= a.get(i, t) == 0;
                }
                for j in t + 1..n {
                    let q = Integer::div_floor(&a.get(t, j), &p);
                    if q != 0 {
                        a.add_col(j, t, -q);
                        v.add_col(j, t, -q);
                    }
                    clean &= a.get(t, j) == 0;
                }
                if !clean {
                    continue;
                }
                let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| a.get(i, j) % p != 0));
                match bad {
                    Some(i) => {
                        a.add_row(t, i, 1);
                        u.add_row(t, i, 1);
                    }
                    None => break,
                }
            }
            if a.get(t, t) < 0 {
                for c in 0..n {
                    a.set(t, c, -a.get(t, c));
                }
                for c in 0..m {
                    u.set(t, c, -u.get(t, c));
                }
            }
            divisors.push(a.get(t, t));
        }
        SmithForm { u, v, divisors }
    }

    /// Column Hermite form: lower-triangular basis (positive diagonal,
    /// reduced off-diagonal) of the lattice spanned by the columns.
    pub fn column_hermite(&self) -> IntMatrix {
        let (d, n) = (self.rows, self.cols);
        let mut a = self.clone();
        let mut piv = 0usize;
        for r in 0..d {
            if piv >= n {
                break;
            }
            for c in piv + 1..n {
                let (x, y) = (a.get(r, piv), a.get(r, c));
                if y == 0 {
                    continue;
                }
                let e = x.extended_gcd(&y);
                let (g, s, t) = (e.gcd, e.x, e.y);
                let (xg, yg) = (x / g, y / g);
                for rr in 0..d {
                    let (p, q) = (a.get(rr, piv), a.get(rr, c));
                    a.set(rr, piv, s * p + t * q);
                    a.set(rr, c, yg * p - xg * q);
                }
            }
            let p = a.get(r, piv);
            if p == 0 {
                continue;
            }
            if p < 0 {
                for rr in 0..d {
                    a.set(rr, piv, -a.get(rr, piv));
                }
            }
            let p = a.get(r, piv);
            for c in 0..piv {
                let q = Integer::div_floor(&a.get(r, c), &p);
                if q != 0 {
                    a.add_col(c, piv, -q);
                }
            }
            piv += 1;
        }
        let mut basis = IntMatrix::zeros(d, piv);
        for r in 0..d {
            for c in 0..piv {
                basis.set(r, c, a.get(r, c));
            }
        }
        basis
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut m = IntMatrix::zeros(self.rows, cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                m.set(r, self.cols + c, other.get(r, c));
            }
        }
        m
    }
}

/// All `x ∈ [0,1)ᵈ` with `Bx ∈ ℤᵈ`; `None` if `B` is singular.
pub fn torsion_points(b: &IntMatrix) -> Option<Vec<Vec<Ratio<i128>>>> {
    assert!(b.is_square());
    let n = b.rows();
    let snf = b.smith();
    if snf.divisors.len() < n || snf.divisors.iter().any(|&d| d == 0) {
        return None;
    }
    let total: i128 = snf.divisors.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut w = vec![0i128; n];
    loop {
        let y: Vec<Ratio<i128>> = (0..n).map(|i| Ratio::new(w[i], snf.divisors[i])).collect();
        let x: Vec<Ratio<i128>> = (0..n)
            .map(|r| {
                let s = (0..n).fold(Ratio::from_integer(0), |acc, c| {
                    acc + y[c] * Ratio::from_integer(snf.v.get(r, c))
                });
                s - s.floor()
            })
            .collect();
        out.push(x);
        let mut i = 0;
        loop {
            if i == n {
                return Some(out);
            }
            w[i] += 1;
            if w[i] < snf.divisors[i] {
                break;
            }
            w[i] = 0;
            i += 1;
        }
    }
}
