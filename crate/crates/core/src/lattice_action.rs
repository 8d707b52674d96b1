//! ℤᵏ actions by commuting unimodular integer matrices on 𝕋ᵈ: validation,
//! joint Lyapunov spectrum and the polynomial-deviation growth bound.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense::{self, complex_null_space, orthonormalize, spectral_norm, Mat};
use crate::integer::IntMatrix;
use crate::poly;
use crate::scalar::{int, lit, to_f64, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("generator set is empty")]
    Empty,
    #[error("generator {0} is not square")]
    NonSquare(usize),
    #[error("generator {0} has dimension {1}, expected {2}")]
    DimensionMismatch(usize, usize, usize),
    #[error("generators {i} and {j} do not commute (entry {row},{col} of the commutator is {value})")]
    NonCommuting { i: usize, j: usize, row: usize, col: usize, value: i128 },
    #[error("generator {0} is not unimodular")]
    NotUnimodular(usize),
    #[error("no Anosov element with sup-norm at most {0}")]
    NoAnosovWitness(i64),
    #[error("generator {0} is not semisimple")]
    NonSemisimple(usize),
    #[error("joint eigenspaces could not be separated at working precision")]
    SpectrumAmbiguous,
    #[error("growth bound violated at a = {a:?} on Lyapunov space {i}")]
    BoundViolated { a: Vec<i64>, i: usize },
    #[error("subspace is not invariant under the element")]
    NotInvariant,
    #[error("integer overflow forming the element matrix for {0:?}")]
    Overflow(Vec<i64>),
}

/// The ℤᵏ action: k commuting unimodular d×d integer matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    gens: Vec<IntMatrix>,
    inverses: Vec<Option<IntMatrix>>,
}

impl GeneratorSet {
    /// Checks shapes only; algebraic conditions are checked by [`validate_action`].
    pub fn new(gens: Vec<IntMatrix>) -> Result<Self, ActionError> {
        let first = gens.first().ok_or(ActionError::Empty)?;
        let dim = first.rows();
        for (j, g) in gens.iter().enumerate() {
            if !g.is_square() {
                return Err(ActionError::NonSquare(j));
            }
            if g.rows() != dim {
                return Err(ActionError::DimensionMismatch(j, g.rows(), dim));
            }
        }
        let inverses = gens.iter().map(|g| g.unimodular_inverse()).collect();
        Ok(GeneratorSet { dim, gens, inverses })
    }

    pub fn from_rows(gens: &[Vec<Vec<i64>>]) -> Result<Self, ActionError> {
        let mats = gens
            .iter()
            .enumerate()
            .map(|(j, g)| IntMatrix::from_rows(g).ok_or(ActionError::NonSquare(j)))
            .collect::<Result<Vec<_>, _>>()?;
        GeneratorSet::new(mats)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.gens
    }

    pub fn generator(&self, j: usize) -> &IntMatrix {
        &self.gens[j]
    }

    pub fn inverse(&self, j: usize) -> Result<&IntMatrix, ActionError> {
        self.inverses[j].as_ref().ok_or(ActionError::NotUnimodular(j))
    }

    /// `Aⱼ^p`, negative powers through the inverse.
    pub fn generator_power(&self, j: usize, p: i64) -> Result<IntMatrix, ActionError> {
        let base = if p >= 0 { &self.gens[j] } else { self.inverse(j)? };
        base.checked_pow(p.unsigned_abs()).ok_or_else(|| {
            let mut a = vec![0; self.rank()];
            a[j] = p;
            ActionError::Overflow(a)
        })
    }

    /// `∏ Aⱼ^{aⱼ}`.
    pub fn element_matrix(&self, a: &[i64]) -> Result<IntMatrix, ActionError> {
        assert_eq!(a.len(), self.rank(), "lattice element has wrong rank");
        let mut m = IntMatrix::identity(self.dim);
        for (j, &p) in a.iter().enumerate() {
            if p != 0 {
                let g = self.generator_power(j, p)?;
                m = m.checked_mul(&g).ok_or_else(|| ActionError::Overflow(a.to_vec()))?;
            }
        }
        Ok(m)
    }

    /// Exact commutativity check; first failing pair with a witness entry.
    pub fn check_commuting(&self) -> Result<(), ActionError> {
        for i in 0..self.rank() {
            for j in i + 1..self.rank() {
                let ab = self.gens[i].checked_mul(&self.gens[j]).ok_or(ActionError::Overflow(vec![]))?;
                let ba = self.gens[j].checked_mul(&self.gens[i]).ok_or(ActionError::Overflow(vec![]))?;
                for row in 0..self.dim {
                    for col in 0..self.dim {
                        let value = ab.get(row, col) - ba.get(row, col);
                        if value != 0 {
                            return Err(ActionError::NonCommuting { i, j, row, col, value });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_unimodular(&self) -> Result<(), ActionError> {
        for (j, g) in self.gens.iter().enumerate() {
            if g.det().map(|d| d.abs()) != Some(1) {
                return Err(ActionError::NotUnimodular(j));
            }
        }
        Ok(())
    }
}

/// All lattice points with `‖a‖∞ ≤ bound`, lexicographic order.
pub fn lattice_cube(k: usize, bound: i64) -> Vec<Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(k as u32);
    (0..total)
        .map(|mut idx| {
            let mut a = vec![0i64; k];
            for slot in a.iter_mut().rev() {
                *slot = (idx % side) as i64 - bound;
                idx /= side;
            }
            a
        })
        .collect()
}

/// Joint eigenvalue cluster of the action with a real basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EigenBlock<T> {
    /// Real eigenvalue: unit eigenvectors. Complex: (Re v, Im v) pairs with
    /// Re v ⟂ Im v.
    pub basis: Vec<Vec<T>>,
    /// Joint eigenvalue per generator (the one with positive imaginary part
    /// for complex blocks).
    pub eigenvalues: Vec<Complex<T>>,
    pub complex: bool,
}

impl<T: Real> EigenBlock<T> {
    /// Matrix of `M(a)` in the block basis coordinates.
    pub fn action(&self, a: &[T]) -> Mat<T> {
        let n = self.basis.len();
        let mut m = Mat::zeros(n, n);
        let log_mod: T = self.eigenvalues.iter().zip(a).map(|(mu, &aj)| mu.norm().ln() * aj).sum();
        let rho = log_mod.exp();
        if self.complex {
            let psi: T = self.eigenvalues.iter().zip(a).map(|(mu, &aj)| mu.arg() * aj).sum();
            let (s, c) = psi.sin_cos();
            for p in 0..n / 2 {
                let (i, j) = (2 * p, 2 * p + 1);
                m[(i, i)] = rho * c;
                m[(i, j)] = rho * s;
                m[(j, i)] = -rho * s;
                m[(j, j)] = rho * c;
            }
        } else {
            // integer exponents only make sense for negative real eigenvalues
            let neg: i64 = self
                .eigenvalues
                .iter()
                .zip(a)
                .filter(|(mu, _)| mu.re < T::zero())
                .map(|(_, &aj)| aj.round().to_i64().unwrap_or(0))
                .sum();
            let sign = if neg.rem_euclid(2) == 1 { -T::one() } else { T::one() };
            for i in 0..n {
                m[(i, i)] = sign * rho;
            }
        }
        m
    }
}

/// Lyapunov space `Eᵢ` with its functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LyapunovSpace<T> {
    /// `χᵢ(eⱼ)` for each generator.
    pub functional: Vec<T>,
    pub dim: usize,
    /// Orthonormal basis of `Eᵢ`.
    pub directions: Vec<Vec<T>>,
    pub blocks: Vec<EigenBlock<T>>,
    /// Condition number of the eigenbasis of this space.
    pub kappa: T,
}

impl<T: Real> LyapunovSpace<T> {
    pub fn chi(&self, a: &[T]) -> T {
        self.functional.iter().zip(a).map(|(c, x)| *c * *x).sum()
    }

    /// Block eigenbasis columns (d × dim).
    pub fn eigenbasis(&self) -> Vec<Vec<T>> {
        self.blocks.iter().flat_map(|b| b.basis.iter().cloned()).collect()
    }

    /// `M(a)` restricted to this space, in eigenbasis coordinates.
    pub fn action(&self, a: &[T]) -> Mat<T> {
        let mut m = Mat::zeros(self.dim, self.dim);
        let mut off = 0;
        for b in &self.blocks {
            let bm = b.action(a);
            for i in 0..bm.rows {
                for j in 0..bm.cols {
                    m[(off + i, off + j)] = bm[(i, j)];
                }
            }
            off += bm.rows;
        }
        m
    }

    /// Real eigenvalue of generator `j` on a one-dimensional space.
    pub fn real_eigenvalue(&self, j: usize) -> Option<T> {
        (self.dim == 1).then(|| self.blocks[0].eigenvalues[j].re)
    }
}

/// Joint Lyapunov spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LyapunovSpectrum<T> {
    pub rank: usize,
    pub dim: usize,
    pub spaces: Vec<LyapunovSpace<T>>,
    pub growth_constant: T,
    pub deviation_exponent: u32,
}

impl<T: Real> LyapunovSpectrum<T> {
    pub fn functionals(&self) -> Vec<Vec<T>> {
        self.spaces.iter().map(|s| s.functional.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim).collect()
    }

    pub fn chi(&self, i: usize, a: &[i64]) -> T {
        let af: Vec<T> = a.iter().map(|&x| int(x as i128)).collect();
        self.spaces[i].chi(&af)
    }

    /// Indices of spaces with `χᵢ(a) > 0`.
    pub fn unstable(&self, a: &[i64]) -> Vec<usize> {
        (0..self.spaces.len()).filter(|&i| self.chi(i, a) > T::zero()).collect()
    }

    /// `Σ dᵢχᵢ`, zero for unimodular actions.
    pub fn weighted_sum(&self) -> Vec<T> {
        (0..self.rank)
            .map(|j| self.spaces.iter().map(|s| s.functional[j] * int(s.dim as i128)).sum())
            .collect()
    }
}

/// Outcome of [`validate_action`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ActionReport<T> {
    pub commuting: bool,
    pub unimodular: bool,
    pub anosov_witnesses: Vec<Vec<i64>>,
    pub spectrum: LyapunovSpectrum<T>,
}

/// Whether `M` has no eigenvalue on the unit circle.
pub fn is_hyperbolic(m: &IntMatrix) -> bool {
    let Some(cp) = m.charpoly() else {
        return false;
    };
    // eigenvalue ±1 shows up exactly
    let at = |x: i128| cp.iter().rev().fold(0i128, |acc, &c| acc * x + c);
    if at(1) == 0 || at(-1) == 0 {
        return false;
    }
    poly::roots::<f64>(&cp).iter().all(|z| (z.norm() - 1.0).abs() > 1e-9)
}

/// Validates the action and computes its spectrum.
pub fn validate_action<T: Real>(gens: &GeneratorSet, witness_bound: i64) -> Result<ActionReport<T>, ActionError> {
    gens.check_commuting()?;
    gens.check_unimodular()?;
    let anosov_witnesses: Vec<Vec<i64>> = lattice_cube(gens.rank(), witness_bound)
        .into_par_iter()
        .filter(|a| a.iter().any(|&x| x != 0))
        .filter(|a| gens.element_matrix(a).map(|m| is_hyperbolic(&m)).unwrap_or(false))
        .collect();
    if anosov_witnesses.is_empty() {
        return Err(ActionError::NoAnosovWitness(witness_bound));
    }
    let spectrum = lyapunov_spectrum(gens)?;
    Ok(ActionReport { commuting: true, unimodular: true, anosov_witnesses, spectrum })
}

fn to_complex_mat<T: Real>(m: &IntMatrix) -> Mat<Complex<T>> {
    Mat {
        rows: m.rows(),
        cols: m.cols(),
        data: m.data().iter().map(|&v| Complex::new(int(v), T::zero())).collect(),
    }
}

/// Candidate integer combinations for separating joint eigenvalues.
fn combinations(k: usize) -> Vec<Vec<i128>> {
    let mut out = Vec::new();
    let primes = [1i128, 3, 7, 13, 2, 5, 11, 17, 19, 23];
    out.push((0..k).map(|j| primes[j % primes.len()]).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..40 {
        out.push((0..k).map(|_| rng.gen_range(-9i128..=9)).collect());
    }
    out
}

/// Joint Lyapunov spectrum of a validated semisimple action.
pub fn lyapunov_spectrum<T: Real>(gens: &GeneratorSet) -> Result<LyapunovSpectrum<T>, ActionError> {
    for (j, g) in gens.generators().iter().enumerate() {
        if !poly::is_semisimple(g) {
            return Err(ActionError::NonSemisimple(j));
        }
    }
    let d = gens.dim();
    let k = gens.rank();
    let gmats: Vec<Mat<Complex<T>>> = gens.generators().iter().map(to_complex_mat).collect();
    let gnorms: Vec<T> = gens
        .generators()
        .iter()
        .map(|g| g.data().iter().fold(T::one(), |m, &v| m.max(int::<T>(v).abs())))
        .collect();
    for c in combinations(k) {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let mut g = IntMatrix::zeros(d, d);
        for (j, &cj) in c.iter().enumerate() {
            let Some(term) = gens.generator(j).scale(cj) else { continue };
            g = g.checked_add(&term).ok_or(ActionError::SpectrumAmbiguous)?;
        }
        if let Some(blocks) = try_blocks::<T>(&g, &gmats, &gnorms) {
            return Ok(assemble(blocks, k, d));
        }
    }
    Err(ActionError::SpectrumAmbiguous)
}

/// `max(floor, factor·ε)`: tolerances that stay meaningful for `f32`.
fn tol<T: Real>(floor: f64, factor: f64) -> T {
    lit::<T>(floor).max(T::epsilon() * lit(factor))
}

fn try_blocks<T: Real>(g: &IntMatrix, gmats: &[Mat<Complex<T>>], gnorms: &[T]) -> Option<Vec<EigenBlock<T>>> {
    let d = g.rows();
    let cp = g.charpoly()?;
    let roots = poly::roots::<T>(&cp);
    let gscale = g.data().iter().fold(T::one(), |m, &v| m.max(int::<T>(v).abs()));
    // cluster numerically repeated roots
    let mut clusters: Vec<Vec<Complex<T>>> = Vec::new();
    for z in roots {
        let tol = tol::<T>(1e-6, 1e4) * z.norm().max(T::one());
        match clusters.iter_mut().find(|cl| (cl[0] - z).norm() <= tol) {
            Some(cl) => cl.push(z),
            None => clusters.push(vec![z]),
        }
    }
    let mut blocks = Vec::new();
    for cl in clusters {
        let n = int::<T>(cl.len() as i128);
        let mut center = cl.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b) / n;
        let real = center.im.abs() <= tol::<T>(1e-9, 1e3) * center.norm().max(T::one());
        if real {
            center.im = T::zero();
        } else if center.im < T::zero() {
            continue;
        }
        let mut shifted = to_complex_mat::<T>(g);
        for i in 0..d {
            shifted[(i, i)] = shifted[(i, i)] - center;
        }
        let null = complex_null_space(&shifted, tol::<T>(1e-6, 1e4) * gscale);
        if null.len() != cl.len() {
            return None;
        }
        let mut eigenvalues: Option<Vec<Complex<T>>> = None;
        let mut basis = Vec::new();
        for v in null {
            let v = normalize_phase(v);
            let mut mus = Vec::with_capacity(gmats.len());
            for (gm, &gn) in gmats.iter().zip(gnorms) {
                let av = gm.mul_vec(&v);
                let num: Complex<T> = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
                let den: T = v.iter().map(|x| x.norm_sqr()).sum();
                let mu = num / den;
                let res: T = av.iter().zip(&v).map(|(y, x)| (y - x * mu).norm_sqr()).sum::<T>().sqrt();
                if res > tol::<T>(1e-8, 1e3) * gn * den.sqrt() {
                    return None;
                }
                mus.push(mu);
            }
            match &eigenvalues {
                None => eigenvalues = Some(mus),
                Some(prev) => {
                    let same = prev.iter().zip(&mus).all(|(p, m)| (p - m).norm() <= tol::<T>(1e-8, 1e3) * p.norm().max(T::one()));
                    if !same {
                        return None;
                    }
                }
            }
            if real {
                let re: Vec<T> = v.iter().map(|x| x.re).collect();
                basis.push(re);
            } else {
                let (p, q) = orthogonal_pair(&v);
                basis.push(p);
                basis.push(q);
            }
        }
        let mut eigenvalues = eigenvalues?;
        if real {
            for e in eigenvalues.iter_mut() {
                e.im = T::zero();
            }
            basis = orthonormalize(&basis, lit(1e-12));
        }
        blocks.push(EigenBlock { basis, eigenvalues, complex: !real });
    }
    let total: usize = blocks.iter().map(|b| b.basis.len()).sum();
    (total == d).then_some(blocks)
}

/// Unit length, largest component real and positive.
fn normalize_phase<T: Real>(v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
    let big = v.iter().fold(Complex::new(T::zero(), T::zero()), |m, x| if x.norm() > m.norm() { *x } else { m });
    let ph = big.conj() / (big.norm() * n);
    v.into_iter().map(|x| x * ph).collect()
}

/// Real basis (p, q) of the plane of a complex eigenvector with p ⟂ q and
/// `|p|·|q| = 1`.
fn orthogonal_pair<T: Real>(v: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    let a: Vec<T> = v.iter().map(|x| x.re).collect();
    let b: Vec<T> = v.iter().map(|x| x.im).collect();
    let ab = dense::dot(&a, &b);
    let theta = (-(ab + ab)).atan2(dense::dot(&a, &a) - dense::dot(&b, &b)) / lit(2.0);
    let (s, c) = theta.sin_cos();
    let p: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| x * c - y * s).collect();
    let q: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| x * s + y * c).collect();
    let scale = (dense::norm(&p) * dense::norm(&q)).sqrt();
    (p.iter().map(|&x| x / scale).collect(), q.iter().map(|&x| x / scale).collect())
}

fn condition_number<T: Real>(cols: &[Vec<T>]) -> T {
    if cols.len() == 1 {
        return T::one();
    }
    let (hi, lo) = dense::singular_extremes(&Mat::from_cols(cols));
    hi / lo
}

fn assemble<T: Real>(blocks: Vec<EigenBlock<T>>, k: usize, d: usize) -> LyapunovSpectrum<T> {
    let mut spaces: Vec<LyapunovSpace<T>> = Vec::new();
    for b in blocks {
        let functional: Vec<T> = b.eigenvalues.iter().map(|mu| mu.norm().ln()).collect();
        let found = spaces.iter_mut().find(|s| {
            s.functional
                .iter()
                .zip(&functional)
                .all(|(x, y)| (*x - *y).abs() <= tol::<T>(1e-9, 1e3) * (T::one() + x.abs()))
        });
        match found {
            Some(s) => s.blocks.push(b),
            None => spaces.push(LyapunovSpace { functional, dim: 0, directions: vec![], blocks: vec![b], kappa: T::one() }),
        }
    }
    for s in spaces.iter_mut() {
        let basis = s.eigenbasis();
        s.dim = basis.len();
        s.directions = if s.dim == 1 { basis.clone() } else { orthonormalize(&basis, lit(1e-12)) };
        s.kappa = condition_number(&basis);
    }
    spaces.sort_by(|a, b| {
        for (x, y) in a.functional.iter().zip(&b.functional) {
            if (*x - *y).abs() > lit::<T>(1e-12) {
                return y.partial_cmp(x).unwrap();
            }
        }
        std::cmp::Ordering::Equal
    });
    let growth_constant = spaces.iter().fold(T::one(), |m, s| m.max(s.kappa));
    LyapunovSpectrum { rank: k, dim: d, spaces, growth_constant, deviation_exponent: 0 }
}

/// Verifies the two-sided growth bound on `‖a‖∞ ≤ sample_bound` with 100
/// random unit vectors per space and returns `(C, L)`.
pub fn growth_constants<T: Real>(
    spectrum: &LyapunovSpectrum<T>,
    sample_bound: i64,
    seed: u64,
) -> Result<(T, u32), ActionError> {
    let c = spectrum.growth_constant;
    let l = spectrum.deviation_exponent;
    let slack: T = lit(1e-10);
    let elements = lattice_cube(spectrum.rank, sample_bound);
    let prepared: Vec<(Mat<T>, Mat<T>, Mat<T>)> = spectrum
        .spaces
        .iter()
        .map(|s| {
            let b = Mat::from_cols(&s.eigenbasis());
            let q = Mat::from_cols(&s.directions);
            // coordinates: c = (QᵀB)⁻¹ Qᵀ v
            let r = q.transpose().mul(&b);
            let rinv = dense::inverse(&r).expect("eigenbasis is a basis");
            (b, q, rinv)
        })
        .collect();
    elements.par_iter().enumerate().try_for_each(|(idx, a)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let af: Vec<T> = a.iter().map(|&x| int(x as i128)).collect();
        let anorm = dense::norm(&af);
        for (i, s) in spectrum.spaces.iter().enumerate() {
            let (b, q, rinv) = &prepared[i];
            let act = s.action(&af);
            let e = s.chi(&af).exp();
            let upper = c * if l == 0 { T::one() } else { anorm.powi(l as i32) } * e;
            let lower = e / c;
            for _ in 0..100 {
                let w: Vec<T> = (0..s.dim).map(|_| lit(rng.gen_range(-1.0..1.0))).collect();
                let v = q.mul_vec(&w);
                let nv = dense::norm(&v);
                if nv < lit(1e-6) {
                    continue;
                }
                let v: Vec<T> = v.iter().map(|&x| x / nv).collect();
                let coords = rinv.mul_vec(&q.transpose().mul_vec(&v));
                let image = b.mul_vec(&act.mul_vec(&coords));
                let g = dense::norm(&image);
                if g < lower * (T::one() - slack) || g > upper * (T::one() + slack) {
                    return Err(ActionError::BoundViolated { a: a.clone(), i });
                }
            }
        }
        Ok(())
    })?;
    Ok((c, l))
}

/// Direction set for [`derivative_norm`].
#[derive(Clone, Debug, PartialEq)]
pub enum Subspace<T> {
    /// Sum of the listed Lyapunov spaces.
    Lyapunov(Vec<usize>),
    /// Span of arbitrary vectors; invariance is checked.
    Span(Vec<Vec<T>>),
}

/// Operator norm of `M(a)` (or its inverse) restricted to an invariant subspace.
pub fn derivative_norm<T: Real>(
    gens: &GeneratorSet,
    spectrum: &LyapunovSpectrum<T>,
    a: &[i64],
    subspace: &Subspace<T>,
    inverted: bool,
) -> Result<T, ActionError> {
    match subspace {
        Subspace::Lyapunov(idx) => {
            let af: Vec<T> = a.iter().map(|&x| int::<T>(x as i128) * if inverted { -T::one() } else { T::one() }).collect();
            let mut cols = Vec::new();
            let mut blocks = Vec::new();
            for &i in idx {
                cols.extend(spectrum.spaces[i].eigenbasis());
                blocks.push(spectrum.spaces[i].action(&af));
            }
            let n = cols.len();
            if n == 0 {
                return Ok(T::one());
            }
            let mut lam = Mat::zeros(n, n);
            let mut off = 0;
            for bm in blocks {
                for i in 0..bm.rows {
                    for j in 0..bm.cols {
                        lam[(off + i, off + j)] = bm[(i, j)];
                    }
                }
                off += bm.rows;
            }
            let q = Mat::from_cols(&orthonormalize(&cols, lit(1e-12)));
            let r = q.transpose().mul(&Mat::from_cols(&cols));
            let rinv = dense::inverse(&r).ok_or(ActionError::NotInvariant)?;
            Ok(spectral_norm(&r.mul(&lam).mul(&rinv)))
        }
        Subspace::Span(vs) => {
            let m = gens.element_matrix(a)?;
            let d = gens.dim();
            let mf: Mat<T> = Mat { rows: d, cols: d, data: m.data().iter().map(|&v| int(v)).collect() };
            let q = Mat::from_cols(&orthonormalize(vs, lit(1e-12)));
            if q.cols == 0 {
                return Ok(T::one());
            }
            let mq = mf.mul(&q);
            let restricted = q.transpose().mul(&mq);
            let back = q.mul(&restricted);
            let defect = mq.data.iter().zip(&back.data).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()));
            let scale = dense::max_abs(&mf).max(T::one());
            if defect > lit::<T>(1e-9) * scale {
                return Err(ActionError::NotInvariant);
            }
            if inverted {
                let inv = dense::inverse(&restricted).ok_or(ActionError::NotInvariant)?;
                Ok(spectral_norm(&inv))
            } else {
                Ok(spectral_norm(&restricted))
            }
        }
    }
}

/// Sup-norm of a lattice element.
pub fn sup_norm(a: &[i64]) -> i64 {
    a.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Report helper.
pub fn functionals_f64<T: Real>(s: &LyapunovSpectrum<T>) -> Vec<Vec<f64>> {
    s.spaces.iter().map(|sp| sp.functional.iter().map(|&x| to_f64(x)).collect()).collect()
}
