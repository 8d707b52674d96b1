//! Reference actions and cocycles used by tests, the acceptance suite and
//! the CLI recipes.

use std::f64::consts::TAU;

use crate::cocycle::{coboundary_construct, CircleCocycle, FieldTerm, FourierField};
use crate::integer::IntMatrix;
use crate::lattice_action::GeneratorSet;
use crate::scalar::{lit, Real};

fn mat(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_rows(rows).expect("fixture matrix is rectangular")
}

fn block_diag(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.rows() + b.rows();
    let mut m = IntMatrix::zeros(n, n);
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            m.set(r, c, a.get(r, c));
        }
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            m.set(a.rows() + r, a.cols() + c, b.get(r, c));
        }
    }
    m
}

pub fn cat_matrix() -> IntMatrix {
    mat(&[&[2, 1], &[1, 1]])
}

/// Companion matrix of x³ − 3x − 1.
pub fn cubic_companion() -> IntMatrix {
    mat(&[&[0, 0, 1], &[1, 0, 3], &[0, 1, 0]])
}

/// ℤ action of the cat map on 𝕋².
pub fn cat_map() -> GeneratorSet {
    GeneratorSet::new(vec![cat_matrix()]).unwrap()
}

/// ℤ² action on 𝕋³ generated by `A` and `B = A² − 2I`.
pub fn cubic_pair() -> GeneratorSet {
    let a = cubic_companion();
    let b = a.checked_mul(&a).unwrap().checked_sub(&IntMatrix::identity(3).scale(2).unwrap()).unwrap();
    GeneratorSet::new(vec![a, b]).unwrap()
}

/// ℤ² action generated by `A` and `B²`; its cover lattice has index 3.
pub fn cubic_cover_pair() -> GeneratorSet {
    let g = cubic_pair();
    let b2 = g.generator(1).checked_pow(2).unwrap();
    GeneratorSet::new(vec![g.generator(0).clone(), b2]).unwrap()
}

/// ℤ² action on 𝕋⁴ generated by `A ⊕ I` and `I ⊕ A` (cat map `A`).
pub fn cat_product() -> GeneratorSet {
    let a = cat_matrix();
    let i = IntMatrix::identity(2);
    GeneratorSet::new(vec![block_diag(&a, &i), block_diag(&i, &a)]).unwrap()
}

/// ℤ action of `A ⊕ A` on 𝕋⁴: two-dimensional joint eigenspaces.
pub fn cat_product_diagonal() -> GeneratorSet {
    let a = cat_matrix();
    GeneratorSet::new(vec![block_diag(&a, &a)]).unwrap()
}

/// Companion of x³ − x − 1: one real and one complex Lyapunov space.
pub fn complex_cubic() -> GeneratorSet {
    GeneratorSet::new(vec![mat(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]])]).unwrap()
}

/// `y ↦ y + ε·sin(2πy)/(2π)`, independent of x.
pub fn sine_field<T: Real>(eps: f64, dim: usize) -> FourierField<T> {
    FourierField {
        shift: T::zero(),
        twist: Vec::new(),
        terms: vec![FieldTerm { m: vec![0; dim], n: 1, re: T::zero(), im: lit(-eps / TAU) }],
    }
}

/// `φ(x): y ↦ y + ε·sin(2πy)·sin(2πx₁)/(2π)`; `φ(0) = id`.
pub fn phi_field<T: Real>(eps: f64, dim: usize) -> FourierField<T> {
    // sin a·sin b = Re(e^{i(a−b)} − e^{i(a+b)})/2
    let c = eps / (2.0 * TAU);
    let mut plus = vec![0; dim];
    plus[0] = 1;
    let mut minus = vec![0; dim];
    minus[0] = -1;
    FourierField {
        shift: T::zero(),
        twist: Vec::new(),
        terms: vec![
            FieldTerm { m: minus, n: 1, re: lit(c), im: T::zero() },
            FieldTerm { m: plus, n: 1, re: lit(-c), im: T::zero() },
        ],
    }
}

/// Fixed-point-trivial coboundary `φ(α(a)x)∘φ(x)⁻¹` over the cubic pair.
pub fn coboundary_fixture<T: Real>(eps: f64) -> CircleCocycle<T> {
    coboundary_construct(phi_field(eps, 3), vec![FourierField::identity(); 2], cubic_pair()).unwrap()
}

/// Constant rotation by `θ` on every generator of the cubic pair.
pub fn rotation_cocycle<T: Real>(theta: f64) -> CircleCocycle<T> {
    CircleCocycle::new(cubic_pair(), vec![FourierField::rotation(lit(theta)); 2]).unwrap()
}

/// `φ(α(a)x)∘R_θ∘φ(x)⁻¹` over the cubic pair, rotation `θ` on every generator.
pub fn conjugated_rotation<T: Real>(eps: f64, theta: f64) -> CircleCocycle<T> {
    coboundary_construct(phi_field(eps, 3), vec![FourierField::rotation(lit(theta)); 2], cubic_pair()).unwrap()
}

/// `v` with `(Aⱼᵀ − I)v ∈ ℤ³` for both generators of [`cubic_cover_pair`].
pub const COVER_TWIST: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

/// Coboundary of `h(x) = φ(x)∘R_{⟨v,x⟩}` over [`cubic_cover_pair`]. Fixed-point
/// trivial, but `h` is only periodic under the index-3 cover lattice.
pub fn twisted_coboundary<T: Real>(eps: f64) -> CircleCocycle<T> {
    let core = |w: [i64; 3]| FourierField { shift: T::zero(), twist: w.to_vec(), terms: Vec::new() };
    CircleCocycle::conjugated(cubic_cover_pair(), phi_field(eps, 3), vec![core([0, 0, 1]), core([1, 0, 1])]).unwrap()
}

/// Constant cocycle `y ↦ y + ε·sin(2πy)/(2π)` on every generator of the
/// cubic pair; for `ε = 0.9` it expands at the fixed fiber point 0 faster
/// than the weakest unstable rate of most elements.
pub fn expanding_constant<T: Real>(eps: f64) -> CircleCocycle<T> {
    CircleCocycle::new(cubic_pair(), vec![sine_field(eps, 3); 2]).unwrap()
}
