//! Lifts of circle diffeomorphisms as chains of trigonometric pieces.
//!
//! A piece is `y ↦ y + p(y)` with `p` a real trigonometric polynomial, or the
//! inverse of such a map. Chains compose left to right: the first piece is
//! applied first.

use serde::{Deserialize, Serialize};

use crate::scalar::{circle_dist, int, lit, Real};

/// Highest harmonic a [`TrigPoly`] can carry.
pub const MAX_HARMONIC: usize = 8;

/// `p(y) = shift + Σₙ cosₙ·cos(2πny) + sinₙ·sin(2πny)`, `n = 1..=len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrigPoly<T> {
    pub shift: T,
    pub len: usize,
    pub cos: [T; MAX_HARMONIC],
    pub sin: [T; MAX_HARMONIC],
}

impl<T: Real> TrigPoly<T> {
    pub fn zero() -> Self {
        TrigPoly { shift: T::zero(), len: 0, cos: [T::zero(); MAX_HARMONIC], sin: [T::zero(); MAX_HARMONIC] }
    }

    pub fn constant(c: T) -> Self {
        TrigPoly { shift: c, ..Self::zero() }
    }

    /// Adds `a·cos(2πny) + b·sin(2πny)`.
    pub fn add_harmonic(&mut self, n: usize, a: T, b: T) {
        assert!((1..=MAX_HARMONIC).contains(&n), "harmonic {n} out of range");
        self.cos[n - 1] = self.cos[n - 1] + a;
        self.sin[n - 1] = self.sin[n - 1] + b;
        self.len = self.len.max(n);
    }

    pub fn is_zero(&self) -> bool {
        self.shift == T::zero() && self.cos[..self.len].iter().chain(&self.sin[..self.len]).all(|c| *c == T::zero())
    }

    fn amplitude(&self, n: usize) -> T {
        self.cos[n].hypot(self.sin[n])
    }

    /// `sup |p − shift|`.
    pub fn oscillation_bound(&self) -> T {
        (0..self.len).map(|n| self.amplitude(n)).sum()
    }

    /// `sup |p′| ≤ Σ 2πn·|p̂ₙ|`.
    pub fn slope_bound(&self) -> T {
        (0..self.len).map(|n| T::TAU() * int::<T>(n as i128 + 1) * self.amplitude(n)).sum()
    }

    /// `sup |p″| ≤ Σ (2πn)²·|p̂ₙ|`.
    pub fn curvature_bound(&self) -> T {
        (0..self.len)
            .map(|n| {
                let w = T::TAU() * int::<T>(n as i128 + 1);
                w * w * self.amplitude(n)
            })
            .sum()
    }

    #[inline]
    pub fn eval(&self, y: T) -> T {
        self.eval2(y).0
    }

    /// Value and first derivative.
    #[inline]
    pub fn eval2(&self, y: T) -> (T, T) {
        if self.len == 0 {
            return (self.shift, T::zero());
        }
        let (s1, c1) = (T::TAU() * y).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut v = self.shift;
        let mut d = T::zero();
        for n in 0..self.len {
            let (a, b) = (self.cos[n], self.sin[n]);
            v = v + a * c + b * s;
            d = d + T::TAU() * int::<T>(n as i128 + 1) * (b * c - a * s);
            let next_c = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = next_c;
        }
        (v, d)
    }
}

/// One factor of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Piece<T> {
    pub poly: TrigPoly<T>,
    pub inverted: bool,
}

impl<T: Real> Piece<T> {
    /// Lower and upper bounds for the derivative of the forward map `y + p(y)`.
    fn forward_derivative_range(&self) -> (T, T) {
        let s = self.poly.slope_bound();
        (T::one() - s, T::one() + s)
    }

    #[inline]
    fn apply(&self, y: T) -> T {
        if self.inverted {
            solve(&self.poly, y)
        } else {
            y + self.poly.eval(y)
        }
    }

    /// Value and derivative of the piece at `y`.
    #[inline]
    fn apply2(&self, y: T) -> (T, T) {
        if self.inverted {
            let z = solve(&self.poly, y);
            let g = T::one() + self.poly.eval2(z).1;
            (z, T::one() / g)
        } else {
            let (p, dp) = self.poly.eval2(y);
            (y + p, T::one() + dp)
        }
    }

    fn inverse(&self) -> Piece<T> {
        Piece { poly: self.poly, inverted: !self.inverted }
    }
}

/// Solves `z + p(z) = w` by Newton's method safeguarded with bisection.
pub fn solve<T: Real>(p: &TrigPoly<T>, w: T) -> T {
    if p.len == 0 {
        return w - p.shift;
    }
    let osc = p.oscillation_bound();
    let mut lo = w - p.shift - osc;
    let mut hi = w - p.shift + osc;
    let mut z = (w - p.eval(w)).max(lo).min(hi);
    let tol = T::epsilon() * lit(4.0);
    for _ in 0..100 {
        let (v, d) = p.eval2(z);
        let f = z + v - w;
        if f == T::zero() {
            break;
        }
        if f > T::zero() {
            hi = z;
        } else {
            lo = z;
        }
        let mut next = z - f / (T::one() + d);
        if !(next > lo && next < hi) {
            next = (lo + hi) * lit(0.5);
        }
        let done = (next - z).abs() <= tol * (T::one() + z.abs());
        z = next;
        if done || hi - lo <= tol * (T::one() + z.abs()) {
            break;
        }
    }
    z
}

/// Lift of an orientation-preserving circle diffeomorphism.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CircleMap<T> {
    pub pieces: Vec<Piece<T>>,
}

impl<T: Real> CircleMap<T> {
    pub fn identity() -> Self {
        CircleMap { pieces: Vec::new() }
    }

    pub fn rotation(theta: T) -> Self {
        CircleMap::from_poly(TrigPoly::constant(theta))
    }

    pub fn from_poly(poly: TrigPoly<T>) -> Self {
        CircleMap { pieces: vec![Piece { poly, inverted: false }] }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Appends a piece, cancelling it against an adjacent inverse and
    /// merging adjacent translations.
    pub fn push(&mut self, piece: Piece<T>) {
        if piece.poly.is_zero() {
            return;
        }
        if let Some(last) = self.pieces.last() {
            if last.inverted != piece.inverted && last.poly == piece.poly {
                self.pieces.pop();
                return;
            }
            if last.poly.len == 0 && piece.poly.len == 0 {
                let signed = |p: &Piece<T>| if p.inverted { -p.poly.shift } else { p.poly.shift };
                let total = signed(last) + signed(&piece);
                self.pieces.pop();
                self.push(Piece { poly: TrigPoly::constant(total), inverted: false });
                return;
            }
        }
        self.pieces.push(piece);
    }

    /// Appends `other`, so that the result is `other ∘ self`.
    pub fn then(mut self, other: &CircleMap<T>) -> Self {
        for p in &other.pieces {
            self.push(*p);
        }
        self
    }

    pub fn inverse(&self) -> Self {
        CircleMap { pieces: self.pieces.iter().rev().map(Piece::inverse).collect() }
    }

    #[inline]
    pub fn apply(&self, y: T) -> T {
        self.pieces.iter().fold(y, |z, p| p.apply(z))
    }

    /// Value and derivative.
    #[inline]
    pub fn apply2(&self, y: T) -> (T, T) {
        self.pieces.iter().fold((y, T::one()), |(z, d), p| {
            let (z2, g) = p.apply2(z);
            (z2, d * g)
        })
    }

    #[inline]
    pub fn derivative(&self, y: T) -> T {
        self.apply2(y).1
    }

    /// Bounds on the derivative from coefficient estimates; `min > 0` means
    /// every piece is certified to be a diffeomorphism.
    pub fn derivative_range(&self) -> (T, T) {
        self.pieces.iter().fold((T::one(), T::one()), |(lo, hi), p| {
            let (a, b) = p.forward_derivative_range();
            if p.inverted {
                (lo / b, hi / a.max(T::min_positive_value()))
            } else {
                (lo * a.max(T::zero()), hi * b)
            }
        })
    }

    pub fn is_valid(&self) -> bool {
        self.pieces.iter().all(|p| p.forward_derivative_range().0 > T::zero())
    }

    /// Bound on the Lipschitz constant of `y ↦ log (F′(y))`.
    pub fn log_derivative_lipschitz(&self) -> T {
        let mut total = T::zero();
        let mut stretch = T::one();
        for p in &self.pieces {
            let (lo, hi) = p.forward_derivative_range();
            let lo = lo.max(T::min_positive_value());
            let curv = p.poly.curvature_bound();
            if p.inverted {
                total = total + stretch * curv / (lo * lo);
                stretch = stretch / lo;
            } else {
                total = total + stretch * curv / lo;
                stretch = stretch * hi;
            }
        }
        total
    }

    /// Sup of the circle distance to `other` over `samples` equally spaced points.
    pub fn c0_distance(&self, other: &CircleMap<T>, samples: usize) -> T {
        (0..samples).fold(T::zero(), |m, i| {
            let y = int::<T>(i as i128) / int(samples as i128);
            m.max(circle_dist(self.apply(y), other.apply(y)))
        })
    }

    /// Sup of the circle distance to the identity over `samples` points.
    pub fn distance_to_identity(&self, samples: usize) -> T {
        self.c0_distance(&CircleMap::identity(), samples)
    }

    /// Rotation number estimate from `iterations` forward iterates.
    pub fn rotation_number(&self, iterations: usize) -> RotationNumber<T> {
        let m = int::<T>(iterations as i128);
        let starts = [T::zero(), lit(0.25), lit(0.5), lit(0.75)];
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &y0 in &starts {
            let mut y = y0;
            for _ in 0..iterations {
                y = self.apply(y);
            }
            let r = (y - y0) / m;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        RotationNumber { value: (lo + hi) * lit(0.5), spread: hi - lo, iterations }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RotationNumber<T> {
    /// Midpoint of the sampled displacement averages (a lift value, not reduced).
    pub value: T,
    /// Spread of the sampled averages; the true value is within `spread + 1/iterations`.
    pub spread: T,
    pub iterations: usize,
}

/// A piece together with the derivative of its polynomial in a base direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetPiece<T> {
    pub poly: TrigPoly<T>,
    pub dpoly: TrigPoly<T>,
    pub inverted: bool,
}

/// Value and first derivatives of a chain in the fiber and one base direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub dy: T,
    pub dx: T,
}

/// A chain whose pieces also carry base-direction derivatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JetMap<T> {
    pub pieces: Vec<JetPiece<T>>,
}

impl<T: Real> JetMap<T> {
    pub fn push(&mut self, piece: JetPiece<T>) {
        if !(piece.poly.is_zero() && piece.dpoly.is_zero()) {
            self.pieces.push(piece);
        }
    }

    pub fn apply(&self, y: T) -> Jet<T> {
        let mut j = Jet { value: y, dy: T::one(), dx: T::zero() };
        for p in &self.pieces {
            if p.inverted {
                let z = solve(&p.poly, j.value);
                let g = T::one() + p.poly.eval2(z).1;
                let q = p.dpoly.eval(z);
                j = Jet { value: z, dy: j.dy / g, dx: (j.dx - q) / g };
            } else {
                let (v, dv) = p.poly.eval2(j.value);
                let g = T::one() + dv;
                let q = p.dpoly.eval(j.value);
                j = Jet { value: j.value + v, dy: g * j.dy, dx: q + g * j.dx };
            }
        }
        j
    }

    pub fn map(&self) -> CircleMap<T> {
        CircleMap { pieces: self.pieces.iter().map(|p| Piece { poly: p.poly, inverted: p.inverted }).collect() }
    }
}
