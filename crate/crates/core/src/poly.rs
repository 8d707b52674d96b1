//! Integer and rational polynomials: exact squarefree tests and numeric roots.
//!
//! Coefficients are stored lowest degree first.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::integer::IntMatrix;
use crate::scalar::{int, lit, Real};

type RPoly = Vec<BigRational>;

fn trim(p: &mut RPoly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn to_rational(p: &[i128]) -> RPoly {
    p.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
}

fn derivative(p: &RPoly) -> RPoly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

/// Quotient and remainder.
fn divmod(a: &RPoly, b: &RPoly) -> (RPoly, RPoly) {
    let mut r = a.clone();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &f * c;
        }
        q[shift] = f;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

fn is_zero_poly(p: &RPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn gcd(a: &RPoly, b: &RPoly) -> RPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    trim(&mut x);
    trim(&mut y);
    while !is_zero_poly(&y) {
        let (_, r) = divmod(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().unwrap().clone();
    x.iter().map(|c| c / &lead).collect()
}

/// Whether the squarefree part of the characteristic polynomial kills `a`,
/// i.e. whether `a` is diagonalizable over ℂ. Exact.
pub fn is_semisimple(a: &IntMatrix) -> bool {
    let Some(cp) = a.charpoly() else {
        return false;
    };
    let p = to_rational(&cp);
    let g = gcd(&p, &derivative(&p));
    let (q, _) = divmod(&p, &g);
    let n = a.rows();
    let mat: Vec<BigRational> = a
        .data()
        .iter()
        .map(|&v| BigRational::from_integer(BigInt::from(v)))
        .collect();
    // Horner: acc = acc·A + q_i I
    let mut acc = vec![BigRational::zero(); n * n];
    for c in q.iter().rev() {
        let mut next = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for k in 0..n {
                    if !acc[i * n + k].is_zero() && !mat[k * n + j].is_zero() {
                        s += &acc[i * n + k] * &mat[k * n + j];
                    }
                }
                next[i * n + j] = s;
            }
            next[i * n + i] += c;
        }
        acc = next;
    }
    acc.iter().all(|c| c.is_zero())
}

/// Evaluates a real-coefficient polynomial and its derivative at `z`.
fn eval_with_derivative<T: Real>(p: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut v = Complex::zero();
    let mut d = Complex::zero();
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + Complex::new(c, T::zero());
    }
    (v, d)
}

/// All complex roots of an integer polynomial (Aberth–Ehrlich iteration
/// followed by Newton polishing).
pub fn roots<T: Real>(coeffs: &[i128]) -> Vec<Complex<T>> {
    let mut c: Vec<i128> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead: T = int(*c.last().unwrap());
    let p: Vec<T> = c.iter().map(|&x| int::<T>(x) / lead).collect();
    let radius = p[..n]
        .iter()
        .fold(T::zero(), |m, x| m.max(x.abs()))
        .max(lit(0.5));
    let start = (p[0].abs().powf(T::one() / int(n as i128))).max(lit(0.1)).min(radius + T::one());
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let ang = T::TAU() * int::<T>(k as i128) / int(n as i128) + lit(0.4);
            Complex::from_polar(start, ang)
        })
        .collect();
    for _ in 0..2000 {
        let mut worst = T::zero();
        for k in 0..n {
            let (v, d) = eval_with_derivative(&p, z[k]);
            if v.norm() == T::zero() {
                continue;
            }
            let ratio = v / d;
            let mut s = Complex::zero();
            for j in 0..n {
                if j != k {
                    s = s + Complex::<T>::one() / (z[k] - z[j]);
                }
            }
            let w = ratio / (Complex::<T>::one() - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] = z[k] - w;
                worst = worst.max(w.norm() / z[k].norm().max(T::one()));
            }
        }
        if worst <= T::epsilon() * lit(4.0) {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval_with_derivative(&p, *zk);
            if d.norm() > T::zero() {
                let step = v / d;
                if step.norm() < zk.norm().max(T::one()) * lit(1e-6) {
                    *zk = *zk - step;
                }
            }
        }
        if zk.im.abs() <= T::epsilon() * lit(1e3) * zk.norm().max(T::one()) {
            zk.im = T::zero();
        }
    }
    z.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap().then(b.im.partial_cmp(&a.im).unwrap()));
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quadratic() {
        // x² − 3x + 1
        let r = roots::<f64>(&[1, -3, 1]);
        let s5 = 5f64.sqrt();
        assert!((r[0].re - (3.0 + s5) / 2.0).abs() < 1e-14);
        assert!((r[1].re - (3.0 - s5) / 2.0).abs() < 1e-14);
        assert_eq!(r[0].im, 0.0);
    }

    #[test]
    fn cubic_roots_trig_oracle() {
        // x³ − 3x − 1 has roots 2cos(2π(3j+1)/9)... i.e. 2cos(π/9), 2cos(7π/9), 2cos(13π/9)
        let r = roots::<f64>(&[-1, -3, 0, 1]);
        let mut want: Vec<f64> = [1.0, 7.0, 13.0]
            .iter()
            .map(|k| 2.0 * (k * std::f64::consts::PI / 9.0).cos())
            .collect();
        want.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
        for (z, w) in r.iter().zip(&want) {
            assert!((z.re - w).abs() < 1e-13, "{z} vs {w}");
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn complex_pair() {
        // x² + 1
        let r = roots::<f64>(&[1, 0, 1]);
        assert!((r[0] - Complex::new(0.0, 1.0)).norm() < 1e-14);
        assert!((r[1] - Complex::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn semisimple_exact() {
        let jordan = IntMatrix::from_rows(&[[1i64, 1], [0, 1]]).unwrap();
        assert!(!is_semisimple(&jordan));
        assert!(is_semisimple(&IntMatrix::identity(3)));
        let cat = IntMatrix::from_rows(&[[2i64, 1], [1, 1]]).unwrap();
        assert!(is_semisimple(&cat));
        // cat ⊕ cat: repeated eigenvalues, still diagonalizable
        let cc = IntMatrix::from_rows(&[[2i64, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]).unwrap();
        assert!(is_semisimple(&cc));
        // Jordan block of the cat map
        let jb = IntMatrix::from_rows(&[[2i64, 1, 1, 0], [1, 1, 0, 1], [0, 0, 2, 1], [0, 0, 1, 1]]).unwrap();
        assert!(!is_semisimple(&jb));
    }
}
