//! Cocycles over the lattice action with values in circle diffeomorphisms.
//!
//! Each generator carries a field `x ↦ β(eⱼ, x)` given by finite Fourier data
//! in `(x, y)`, optionally conjugated by a field `φ`:
//! `β(eⱼ, x) = φ(Aⱼx) ∘ coreⱼ(x) ∘ φ(x)⁻¹`.

pub mod bunching;
pub mod circle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense::Mat;
use crate::integer::torsion_points;
use crate::lattice_action::{ActionError, GeneratorSet};
use crate::scalar::{circle_dist, frac, int, lit, to_f64, Real};

pub use bunching::{
    bunching_check, derivative_bounds, ph_probe, ph_robustness, BunchingCertificate, ChamberMembership,
    DerivativeBounds, PHRobustnessCertificate, PhProbe, ProductGrid, RobustnessOptions,
};
pub use circle::{CircleMap, Jet, JetMap, JetPiece, Piece, RotationNumber, TrigPoly, MAX_HARMONIC};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("expected {expected} generator fields, found {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("field has base dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Fourier index {found} exceeds the degree cap {cap}")]
    DegreeCap { cap: i64, found: i64 },
    #[error("field {field} is not certified monotone (slope bound {slope})")]
    NotDiffeomorphism { field: usize, slope: f64 },
    #[error("generators {i} and {j} are incompatible (distance {distance:e})")]
    CompatibilityViolated { i: usize, j: usize, distance: f64 },
    #[error("constant cocycle field {0} depends on x")]
    NotConstant(usize),
    #[error("element {0:?} is not regular")]
    NotRegular(Vec<i64>),
    #[error("no bunching certificate for k ≤ {0}")]
    NotBunchedWithin(u32),
    #[error("generator {0} has eigenvalue 1")]
    NotHyperbolic(usize),
    #[error("robustness sample {0:?} is not in PH")]
    SampleFailed(Vec<i64>),
    #[error(transparent)]
    Action(#[from] ActionError),
}

/// Default Fourier degree cap in each variable.
pub const DEGREE_CAP: i64 = 8;

/// `c·e^{2πi(⟨m, x⟩ + n y)}`; the field uses the real part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FieldTerm<T> {
    pub m: Vec<i64>,
    pub n: i64,
    pub re: T,
    pub im: T,
}

/// `(x, y) ↦ y + shift + ⟨twist, x⟩ + Re Σ terms`. The integer twist keeps
/// the map well defined on 𝕋ᵈ while letting the mean rotation wind with x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FourierField<T> {
    pub shift: T,
    #[serde(default)]
    pub twist: Vec<i64>,
    #[serde(default)]
    pub terms: Vec<FieldTerm<T>>,
}

impl<T: Real> FourierField<T> {
    pub fn identity() -> Self {
        FourierField { shift: T::zero(), twist: Vec::new(), terms: Vec::new() }
    }

    pub fn rotation(theta: T) -> Self {
        FourierField { shift: theta, ..Self::identity() }
    }

    pub fn is_identity(&self) -> bool {
        self.shift == T::zero()
            && self.twist.iter().all(|&w| w == 0)
            && self.terms.iter().all(|t| t.re == T::zero() && t.im == T::zero())
    }

    /// Whether the field does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        self.twist.iter().all(|&w| w == 0) && self.terms.iter().all(|t| t.m.iter().all(|&c| c == 0))
    }

    pub fn validate(&self, dim: usize, cap: i64) -> Result<(), CocycleError> {
        if !self.twist.is_empty() && self.twist.len() != dim {
            return Err(CocycleError::DimensionMismatch { expected: dim, found: self.twist.len() });
        }
        for t in &self.terms {
            if t.m.len() != dim {
                return Err(CocycleError::DimensionMismatch { expected: dim, found: t.m.len() });
            }
            let worst = t.m.iter().map(|c| c.abs()).chain([t.n.abs()]).max().unwrap_or(0);
            if worst > cap.min(MAX_HARMONIC as i64) {
                return Err(CocycleError::DegreeCap { cap, found: worst });
            }
        }
        Ok(())
    }

    /// Coefficient bound on `sup |∂y (field − y)|`.
    pub fn slope_bound(&self) -> T {
        self.terms
            .iter()
            .map(|t| T::TAU() * int::<T>(t.n.abs() as i128) * t.re.hypot(t.im))
            .sum()
    }

    fn twist_dot(&self, x: &[T]) -> T {
        self.twist.iter().zip(x).map(|(&w, &xi)| int::<T>(w as i128) * xi).sum()
    }

    /// The fiber map at `x` as a trigonometric polynomial (identity part dropped).
    pub fn at(&self, x: &[T]) -> TrigPoly<T> {
        let mut p = TrigPoly::constant(self.shift + self.twist_dot(x));
        for t in &self.terms {
            let phase = T::TAU() * t.m.iter().zip(x).map(|(&m, &xi)| int::<T>(m as i128) * xi).sum::<T>();
            let (s, c) = phase.sin_cos();
            let (cr, ci) = (t.re * c - t.im * s, t.re * s + t.im * c);
            accumulate(&mut p, t.n, cr, ci);
        }
        p
    }

    /// Fiber map at `x` and its derivative along `dir`.
    pub fn at_jet(&self, x: &[T], dir: &[T]) -> (TrigPoly<T>, TrigPoly<T>) {
        let mut p = TrigPoly::constant(self.shift + self.twist_dot(x));
        let mut dp = TrigPoly::constant(self.twist_dot(dir));
        for t in &self.terms {
            let dot = |v: &[T]| t.m.iter().zip(v).map(|(&m, &vi)| int::<T>(m as i128) * vi).sum::<T>();
            let (s, c) = (T::TAU() * dot(x)).sin_cos();
            let (cr, ci) = (t.re * c - t.im * s, t.re * s + t.im * c);
            accumulate(&mut p, t.n, cr, ci);
            let k = T::TAU() * dot(dir);
            accumulate(&mut dp, t.n, -k * ci, k * cr);
        }
        (p, dp)
    }
}

/// Adds `Re(z·e^{2πiny})` with `z = cr + i·ci`.
fn accumulate<T: Real>(p: &mut TrigPoly<T>, n: i64, cr: T, ci: T) {
    match n.signum() {
        0 => p.shift = p.shift + cr,
        1 => p.add_harmonic(n as usize, cr, -ci),
        _ => p.add_harmonic((-n) as usize, cr, ci),
    }
}

/// A `Diff(S¹)`-valued cocycle over a [`GeneratorSet`].
#[derive(Clone, Debug)]
pub struct CircleCocycle<T> {
    gens: GeneratorSet,
    mats: Vec<Mat<T>>,
    inv_mats: Vec<Mat<T>>,
    conjugator: Option<FourierField<T>>,
    cores: Vec<FourierField<T>>,
}

impl<T: Real> CircleCocycle<T> {
    /// Cocycle with `β(eⱼ, x) = coreⱼ(x)`.
    pub fn new(gens: GeneratorSet, cores: Vec<FourierField<T>>) -> Result<Self, CocycleError> {
        Self::build(gens, None, cores)
    }

    /// Cocycle with `β(eⱼ, x) = φ(Aⱼx) ∘ coreⱼ(x) ∘ φ(x)⁻¹`.
    pub fn conjugated(gens: GeneratorSet, phi: FourierField<T>, cores: Vec<FourierField<T>>) -> Result<Self, CocycleError> {
        Self::build(gens, Some(phi), cores)
    }

    pub fn identity(gens: GeneratorSet) -> Self {
        let k = gens.rank();
        Self::build(gens, None, vec![FourierField::identity(); k]).expect("identity cocycle is valid")
    }

    fn build(gens: GeneratorSet, conjugator: Option<FourierField<T>>, cores: Vec<FourierField<T>>) -> Result<Self, CocycleError> {
        let (d, k) = (gens.dim(), gens.rank());
        if cores.len() != k {
            return Err(CocycleError::GeneratorCount { expected: k, found: cores.len() });
        }
        for (j, f) in conjugator.iter().chain(&cores).enumerate() {
            f.validate(d, DEGREE_CAP)?;
            let slope = f.slope_bound();
            if slope >= T::one() {
                return Err(CocycleError::NotDiffeomorphism { field: j, slope: to_f64(slope) });
            }
        }
        let to_mat = |m: &crate::integer::IntMatrix| Mat { rows: d, cols: d, data: m.data().iter().map(|&v| int::<T>(v)).collect() };
        let mats = gens.generators().iter().map(to_mat).collect();
        let mut inv_mats = Vec::with_capacity(k);
        for j in 0..k {
            inv_mats.push(to_mat(gens.inverse(j)?));
        }
        let c = CircleCocycle { gens, mats, inv_mats, conjugator, cores };
        c.check_compatibility()?;
        Ok(c)
    }

    pub fn action(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.dim()
    }

    pub fn rank(&self) -> usize {
        self.gens.rank()
    }

    pub fn conjugator(&self) -> Option<&FourierField<T>> {
        self.conjugator.as_ref()
    }

    pub fn cores(&self) -> &[FourierField<T>] {
        &self.cores
    }

    /// `α(eⱼ)x` reduced mod 1 (or `α(−eⱼ)x` when `inverse`).
    pub fn step(&self, j: usize, x: &[T], inverse: bool) -> Vec<T> {
        let m = if inverse { &self.inv_mats[j] } else { &self.mats[j] };
        m.mul_vec(x).into_iter().map(frac).collect()
    }

    /// `α(a)x` on the universal cover (no reduction).
    pub fn act_cover(&self, a: &[i64], x: &[T]) -> Vec<T> {
        let mut p = x.to_vec();
        for (j, &aj) in a.iter().enumerate() {
            let m = if aj >= 0 { &self.mats[j] } else { &self.inv_mats[j] };
            for _ in 0..aj.unsigned_abs() {
                p = m.mul_vec(&p);
            }
        }
        p
    }

    /// Appends `β(eⱼ, x)` (or its inverse); `image` is `Aⱼx` as the caller
    /// holds it, so that conjugator pieces of adjacent steps cancel exactly.
    fn push_generator(&self, out: &mut CircleMap<T>, j: usize, x: &[T], image: &[T], inverted: bool) {
        let mut seg = CircleMap::identity();
        if let Some(phi) = &self.conjugator {
            seg.push(Piece { poly: phi.at(x), inverted: true });
            seg.push(Piece { poly: self.cores[j].at(x), inverted: false });
            seg.push(Piece { poly: phi.at(image), inverted: false });
        } else {
            seg.push(Piece { poly: self.cores[j].at(x), inverted: false });
        }
        if inverted {
            seg = seg.inverse();
        }
        for p in seg.pieces {
            out.push(p);
        }
    }

    fn push_generator_jet(&self, out: &mut JetMap<T>, j: usize, x: &[T], dir: &[T], inverted: bool) {
        let mut seg: Vec<JetPiece<T>> = Vec::with_capacity(3);
        let piece = |f: &FourierField<T>, x: &[T], dir: &[T], inverted| {
            let (poly, dpoly) = f.at_jet(x, dir);
            JetPiece { poly, dpoly, inverted }
        };
        if let Some(phi) = &self.conjugator {
            seg.push(piece(phi, x, dir, true));
            seg.push(piece(&self.cores[j], x, dir, false));
            let (x2, d2) = (self.step(j, x, false), self.mats[j].mul_vec(dir));
            seg.push(piece(phi, &x2, &d2, false));
        } else {
            seg.push(piece(&self.cores[j], x, dir, false));
        }
        if inverted {
            seg.reverse();
            for p in seg.iter_mut() {
                p.inverted = !p.inverted;
            }
        }
        for p in seg {
            out.push(p);
        }
    }

    /// `β(eⱼ, x)`.
    pub fn generator_map(&self, j: usize, x: &[T]) -> CircleMap<T> {
        let mut out = CircleMap::identity();
        self.push_generator(&mut out, j, x, &self.step(j, x, false), false);
        out
    }

    /// `β(a, x)` along the word that runs through the generators in index order.
    pub fn evaluate(&self, a: &[i64], x: &[T]) -> CircleMap<T> {
        self.evaluate_tracked(a, x, None).0
    }

    /// `β(a, x)` and the reduced end point `α(a)x`. If `end` is given it
    /// replaces the computed end point (it must agree up to rounding), so that
    /// a chain continued from `end` cancels against this one.
    pub fn evaluate_tracked(&self, a: &[i64], x: &[T], end: Option<&[T]>) -> (CircleMap<T>, Vec<T>) {
        assert_eq!(a.len(), self.rank());
        let mut out = CircleMap::identity();
        let mut p: Vec<T> = x.iter().map(|&v| frac(v)).collect();
        let mut remaining: u64 = a.iter().map(|v| v.unsigned_abs()).sum();
        for (j, &aj) in a.iter().enumerate() {
            for _ in 0..aj.unsigned_abs() {
                remaining -= 1;
                let last = remaining == 0;
                if aj > 0 {
                    let next = match end {
                        Some(e) if last => e.to_vec(),
                        _ => self.step(j, &p, false),
                    };
                    self.push_generator(&mut out, j, &p, &next, false);
                    p = next;
                } else {
                    let prev = match end {
                        Some(e) if last => e.to_vec(),
                        _ => self.step(j, &p, true),
                    };
                    self.push_generator(&mut out, j, &prev, &p, true);
                    p = prev;
                }
            }
        }
        (out, p)
    }

    /// `β(a, ·)` near `x` with derivatives in `y` and along the base direction `dir`.
    pub fn evaluate_jet(&self, a: &[i64], x: &[T], dir: &[T]) -> JetMap<T> {
        assert_eq!(a.len(), self.rank());
        let mut out = JetMap::default();
        let mut p: Vec<T> = x.iter().map(|&v| frac(v)).collect();
        let mut v = dir.to_vec();
        for (j, &aj) in a.iter().enumerate() {
            for _ in 0..aj.unsigned_abs() {
                if aj > 0 {
                    self.push_generator_jet(&mut out, j, &p, &v, false);
                    p = self.step(j, &p, false);
                    v = self.mats[j].mul_vec(&v);
                } else {
                    p = self.step(j, &p, true);
                    v = self.inv_mats[j].mul_vec(&v);
                    self.push_generator_jet(&mut out, j, &p, &v, true);
                }
            }
        }
        out
    }

    /// Sampled check of `β(eᵢ, Aⱼx)∘β(eⱼ, x) = β(eⱼ, Aᵢx)∘β(eᵢ, x)`.
    fn check_compatibility(&self) -> Result<(), CocycleError> {
        let k = self.rank();
        if k < 2 {
            return Ok(());
        }
        let tol = lit::<T>(1e-10).max(T::epsilon() * lit(1e3));
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..16 {
            let x: Vec<T> = (0..self.dim()).map(|_| lit(rng.gen::<f64>())).collect();
            for i in 0..k {
                for j in i + 1..k {
                    let left = self.generator_map(j, &x).then(&self.generator_map(i, &self.step(j, &x, false)));
                    let right = self.generator_map(i, &x).then(&self.generator_map(j, &self.step(i, &x, false)));
                    let dist = left.c0_distance(&right, 32);
                    if !(dist < tol) {
                        return Err(CocycleError::CompatibilityViolated { i, j, distance: to_f64(dist) });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `β(eⱼ, x) = φ(Aⱼx) ∘ β₀(eⱼ) ∘ φ(x)⁻¹` for a constant cocycle `β₀`.
pub fn coboundary_construct<T: Real>(
    phi: FourierField<T>,
    base: Vec<FourierField<T>>,
    gens: GeneratorSet,
) -> Result<CircleCocycle<T>, CocycleError> {
    if let Some(j) = base.iter().position(|f| !f.is_constant()) {
        return Err(CocycleError::NotConstant(j));
    }
    CircleCocycle::conjugated(gens, phi, base)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub trivial: bool,
    /// Per generator: the best fixed point and its distance from the identity.
    pub witnesses: Vec<FixedPointWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointWitness {
    pub generator: usize,
    pub fixed_points: usize,
    pub point: Vec<f64>,
    pub distance: f64,
}

/// Distance below which `β(eⱼ, xⱼ)` counts as the identity.
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// For every generator, looks for a fixed point `xⱼ` of `Aⱼ` with `β(eⱼ, xⱼ) = id`.
pub fn fixed_point_trivial_check<T: Real>(beta: &CircleCocycle<T>) -> Result<FixedPointReport, CocycleError> {
    let k = beta.rank();
    let mut witnesses = Vec::with_capacity(k);
    for j in 0..k {
        let b = beta.action().generator(j).minus_identity();
        let pts = torsion_points(&b).ok_or(CocycleError::NotHyperbolic(j))?;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for p in &pts {
            let x: Vec<T> = p.iter().map(|r| int::<T>(*r.numer()) / int(*r.denom())).collect();
            let e = unit(k, j);
            let dist = to_f64(beta.evaluate(&e, &x).distance_to_identity(64));
            if best.as_ref().map_or(true, |b| dist < b.1) {
                best = Some((x.iter().map(|&v| to_f64(v)).collect(), dist));
            }
        }
        let (point, distance) = best.expect("torsion points include the origin");
        witnesses.push(FixedPointWitness { generator: j, fixed_points: pts.len(), point, distance });
    }
    Ok(FixedPointReport { trivial: witnesses.iter().all(|w| w.distance < FIXED_POINT_TOL), witnesses })
}

/// Unit lattice vector.
pub fn unit(k: usize, j: usize) -> Vec<i64> {
    let mut e = vec![0; k];
    e[j] = 1;
    e
}

/// Sup over `samples` fiber points of the circle distance between two maps'
/// images, used in tests and reports.
pub fn fiber_distance<T: Real>(f: &CircleMap<T>, g: &CircleMap<T>, samples: usize) -> T {
    (0..samples).fold(T::zero(), |m, i| {
        let y = int::<T>(i as i128) / int(samples as i128);
        m.max(circle_dist(f.apply(y), g.apply(y)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    #[test]
    fn identity_cocycle_is_identity() {
        let b = CircleCocycle::<f64>::identity(fixtures::cubic_pair());
        let m = b.evaluate(&[3, -2], &pt(&[0.1, 0.2, 0.3]));
        assert!(m.is_empty());
        assert_eq!(m.apply(0.4), 0.4);
    }

    #[test]
    fn constant_rotations_add() {
        let b = CircleCocycle::new(
            fixtures::cubic_pair(),
            vec![FourierField::rotation(0.3), FourierField::rotation(0.07)],
        )
        .unwrap();
        let m = b.evaluate(&[2, -3], &pt(&[0.5, 0.1, 0.9]));
        assert!((m.apply(0.25) - (0.25 + 0.6 - 0.21)).abs() < 1e-14);
    }

    // Oracle: the composition φ(α(a)x)∘φ(x)⁻¹ computed directly from φ.
    #[test]
    fn coboundary_matches_direct_composition() {
        let b = fixtures::coboundary_fixture::<f64>(0.05);
        let phi = fixtures::phi_field::<f64>(0.05, 3);
        for (a, x) in [
            (vec![1i64, 0], pt(&[0.1, 0.7, 0.3])),
            (vec![2, -1], pt(&[0.45, 0.2, 0.8])),
            (vec![-3, 2], pt(&[0.9, 0.05, 0.6])),
        ] {
            let ax: Vec<f64> = b.act_cover(&a, &x).into_iter().map(frac).collect();
            let direct = CircleMap::from_poly(phi.at(&x)).inverse().then(&CircleMap::from_poly(phi.at(&ax)));
            let got = b.evaluate(&a, &x);
            assert!(got.c0_distance(&direct, 64) < 1e-10);
        }
    }

    #[test]
    fn incompatible_generators_rejected() {
        let mut f = FourierField::<f64>::identity();
        f.terms.push(FieldTerm { m: vec![1, 0, 0], n: 1, re: 0.01, im: 0.0 });
        let err = CircleCocycle::new(fixtures::cubic_pair(), vec![f, FourierField::identity()]).unwrap_err();
        assert!(matches!(err, CocycleError::CompatibilityViolated { i: 0, j: 1, .. }));
    }

    #[test]
    fn degree_cap_and_monotonicity_enforced() {
        let mut f = FourierField::<f64>::identity();
        f.terms.push(FieldTerm { m: vec![9, 0, 0], n: 1, re: 0.01, im: 0.0 });
        let err = CircleCocycle::new(fixtures::cubic_pair(), vec![f.clone(), f]).unwrap_err();
        assert!(matches!(err, CocycleError::DegreeCap { found: 9, .. }));
        let g = fixtures::sine_field::<f64>(1.2, 3);
        let err = CircleCocycle::new(fixtures::cubic_pair(), vec![g.clone(), g]).unwrap_err();
        assert!(matches!(err, CocycleError::NotDiffeomorphism { .. }));
    }

    #[test]
    fn fixed_point_trivial_cases() {
        let b = fixtures::coboundary_fixture::<f64>(0.05);
        let r = fixed_point_trivial_check(&b).unwrap();
        assert!(r.trivial);
        assert!(r.witnesses.iter().all(|w| w.distance < 1e-15));
        let rot = fixtures::rotation_cocycle::<f64>(0.3);
        assert!(!fixed_point_trivial_check(&rot).unwrap().trivial);
        // cat map: |det(A − I)| = 1, so only the origin is fixed
        let cat = CircleCocycle::<f64>::identity(fixtures::cat_map());
        let r = fixed_point_trivial_check(&cat).unwrap();
        assert_eq!(r.witnesses[0].fixed_points, 1);
        assert_eq!(r.witnesses[0].point, vec![0.0, 0.0]);
    }

    #[test]
    fn twisted_coboundary_is_compatible_and_fixed_point_trivial() {
        let b = fixtures::twisted_coboundary::<f64>(0.05);
        assert!(fixed_point_trivial_check(&b).unwrap().trivial);
    }

    // Oracle: central differences of evaluate in x.
    #[test]
    fn jet_derivative_matches_finite_differences() {
        let b = fixtures::coboundary_fixture::<f64>(0.05);
        let dir = pt(&[0.3, -0.5, 0.8]);
        let (x, y, h) = (pt(&[0.21, 0.33, 0.71]), 0.4, 1e-6);
        for a in [vec![1i64, 0], vec![1, 1], vec![-1, 2]] {
            let j = b.evaluate_jet(&a, &x, &dir).apply(y);
            let shifted = |s: f64| {
                let xs: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + s * di).collect();
                b.evaluate(&a, &xs).apply(y)
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            assert!((j.dx - fd).abs() < 1e-6, "{a:?}: {} vs {}", j.dx, fd);
            assert!((j.value - b.evaluate(&a, &x).apply(y)).abs() < 1e-14);
        }
    }

    #[test]
    fn f32_evaluation() {
        let b = fixtures::coboundary_fixture::<f32>(0.05);
        let m = b.evaluate(&[1, 1], &[0.2f32, 0.3, 0.4]);
        let inv = b.evaluate(&[-1, -1], &b.act_cover(&[1, 1], &[0.2f32, 0.3, 0.4]));
        assert!((inv.apply(m.apply(0.3)) - 0.3).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn cocycle_identity(a0 in -2i64..=2, a1 in -2i64..=2, b0 in -2i64..=2, b1 in -2i64..=2,
                            x in proptest::collection::vec(0.0f64..1.0, 3)) {
            let beta = fixtures::conjugated_rotation::<f64>(0.05, 0.3);
            let (a, b) = ([a0, a1], [b0, b1]);
            let sum = [a0 + b0, a1 + b1];
            let lhs = beta.evaluate(&sum, &x);
            let bx = beta.act_cover(&b, &x);
            let rhs = beta.evaluate(&b, &x).then(&beta.evaluate(&a, &bx));
            prop_assert!(lhs.c0_distance(&rhs, 16) < 1e-9);
        }

        #[test]
        fn inverse_consistency(a0 in -3i64..=3, a1 in -3i64..=3, x in proptest::collection::vec(0.0f64..1.0, 3)) {
            let beta = fixtures::coboundary_fixture::<f64>(0.05);
            let a = [a0, a1];
            let ax = beta.act_cover(&a, &x);
            let round = beta.evaluate(&a, &x).then(&beta.evaluate(&[-a0, -a1], &ax));
            prop_assert!(round.distance_to_identity(16) < 1e-9);
        }
    }
}
