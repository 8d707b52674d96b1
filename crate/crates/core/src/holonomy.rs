//! Unstable holonomies of the skew extension as backward limit products,
//! the transfer map `h` they assemble into, the cover lattice
//! `Λ* = Σⱼ (Aⱼ − I)ℤᵈ`, and the checks that `h` trivializes the cocycle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::{derivative_bounds, fixed_point_trivial_check, unit, CircleCocycle, CircleMap, CocycleError, ProductGrid};
use crate::dense::{self, Mat};
use crate::integer::{torsion_points, IntMatrix};
use crate::lattice_action::{derivative_norm, ActionError, GeneratorSet, LyapunovSpectrum, Subspace};
use crate::scalar::{circle_dist, frac, int, lit, to_f64, Real};
use crate::weyl::{full_chamber, WeylChamberDecomposition, WeylError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    #[error("q − p leaves the unstable leaf (stable component {component:e})")]
    NotOnUnstableLeaf { component: f64 },
    #[error("holonomy did not converge in {n_max} steps (last change {last_delta:e})")]
    NoConvergence { n_max: usize, last_delta: f64 },
    #[error("path orders disagree by {defect:e}")]
    PathDependence { defect: f64 },
    #[error("Σ(Aⱼ − I)ℤᵈ has rank {rank} < {dim}")]
    DegenerateLattice { rank: usize, dim: usize },
    #[error("coarse class {0} has no chamber where it alone expands")]
    NotFull(usize),
    #[error("generator {generator} has no fixed point with trivial fiber map (best distance {distance:e})")]
    NotFixedPointTrivial { generator: usize, distance: f64 },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

/// Coordinates in the joint eigenbasis, grouped by Lyapunov space.
#[derive(Clone, Debug)]
pub struct EigenCoordinates<T> {
    basis: Mat<T>,
    inverse: Mat<T>,
    /// Column range of each space.
    ranges: Vec<(usize, usize)>,
}

impl<T: Real> EigenCoordinates<T> {
    pub fn new(spectrum: &LyapunovSpectrum<T>) -> Self {
        let mut cols = Vec::new();
        let mut ranges = Vec::new();
        for sp in &spectrum.spaces {
            let start = cols.len();
            cols.extend(sp.eigenbasis());
            ranges.push((start, cols.len()));
        }
        let basis = Mat::from_cols(&cols);
        let inverse = dense::inverse(&basis).expect("eigenbasis spans ℝᵈ");
        EigenCoordinates { basis, inverse, ranges }
    }

    pub fn coords(&self, v: &[T]) -> Vec<T> {
        self.inverse.mul_vec(v)
    }

    pub fn vector(&self, c: &[T]) -> Vec<T> {
        self.basis.mul_vec(c)
    }

    /// Keeps only the coordinates of the listed spaces.
    pub fn mask(&self, c: &[T], spaces: &[usize]) -> Vec<T> {
        let mut out = vec![T::zero(); c.len()];
        for &s in spaces {
            let (a, b) = self.ranges[s];
            out[a..b].copy_from_slice(&c[a..b]);
        }
        out
    }

    /// Coordinates of `M(a)v` given those of `v`.
    pub fn advance(&self, spectrum: &LyapunovSpectrum<T>, c: &[T], a: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); c.len()];
        for (s, &(lo, hi)) in self.ranges.iter().enumerate() {
            let m = spectrum.spaces[s].action(a);
            let block = m.mul_vec(&c[lo..hi]);
            out[lo..hi].copy_from_slice(&block);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyOptions {
    pub tol: f64,
    pub n_max: usize,
    /// Fiber points on which successive products are compared. Iteration
    /// stops once the geometric tail estimate is below `tol/4`.
    pub probes: usize,
}

impl Default for HolonomyOptions {
    fn default() -> Self {
        HolonomyOptions { tol: 1e-8, n_max: 200, probes: 16 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Holonomy<T> {
    pub map: CircleMap<T>,
    pub steps: usize,
    /// Sup change between successive products on the probes.
    pub deltas: Vec<T>,
}

impl<T: Real> Holonomy<T> {
    /// Least-squares geometric rate of the deltas, skipping the first two
    /// and anything below `floor`.
    pub fn fitted_rate(&self, floor: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .deltas
            .iter()
            .enumerate()
            .skip(2)
            .map(|(n, &d)| (n as f64, to_f64(d)))
            .filter(|&(_, d)| d > floor)
            .map(|(n, d)| (n, d.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        Some((num / den).exp())
    }
}

/// Geometric rate fitted to the mean log-delta across several holonomies.
pub fn pooled_rate<T: Real>(runs: &[Holonomy<T>], floor: f64) -> Option<f64> {
    let len = runs.iter().map(|h| h.deltas.len()).min()?;
    let mean: Vec<T> = (0..len)
        .map(|n| {
            let logs: f64 = runs.iter().map(|h| to_f64(h.deltas[n]).max(floor * 1e-3).ln()).sum();
            lit((logs / runs.len() as f64).exp())
        })
        .collect();
    Holonomy { map: CircleMap::identity(), steps: len, deltas: mean }.fitted_rate(floor)
}

fn negated(a: &[i64]) -> Vec<i64> {
    a.iter().map(|&v| -v).collect()
}

/// Holonomy from `p` to `p + δ` along `Eᵘ_a`, where `dc` are the eigen
/// coordinates of `δ` (only unstable spaces nonzero).
fn leaf_holonomy<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    ec: &EigenCoordinates<T>,
    a: &[i64],
    p: &[T],
    dc: Vec<T>,
    opts: &HolonomyOptions,
) -> Result<Holonomy<T>, HolonomyError> {
    if dc.iter().all(|&c| c == T::zero()) {
        return Ok(Holonomy { map: CircleMap::identity(), steps: 0, deltas: Vec::new() });
    }
    let back = negated(a);
    let back_t: Vec<T> = back.iter().map(|&v| int(v as i128)).collect();
    let tol: T = lit(opts.tol);
    let probes: Vec<T> = (0..opts.probes).map(|k| int::<T>(k as i128) / int(opts.probes as i128)).collect();
    let mut prev = probes.clone();
    let mut pp: Vec<T> = p.iter().map(|&v| frac(v)).collect();
    let mut dc = dc;
    let mut q: Vec<T> = pp.iter().zip(ec.vector(&dc)).map(|(&u, v)| frac(u + v)).collect();
    let mut pchain = CircleMap::identity();
    let mut qchain = CircleMap::identity();
    let mut deltas = Vec::new();
    for n in 1..=opts.n_max {
        let (seg_p, pend) = beta.evaluate_tracked(&back, &pp, None);
        dc = ec.advance(spectrum, &dc, &back_t);
        let qend: Vec<T> = pend.iter().zip(ec.vector(&dc)).map(|(&u, v)| frac(u + v)).collect();
        let (seg_q, _) = beta.evaluate_tracked(&back, &q, Some(&qend));
        pchain = pchain.then(&seg_p);
        qchain = qchain.then(&seg_q);
        pp = pend;
        q = qend;
        let h = pchain.clone().then(&qchain.inverse());
        let cur: Vec<T> = probes.iter().map(|&y| h.apply(y)).collect();
        let delta = cur.iter().zip(&prev).fold(T::zero(), |m, (u, v)| m.max((*u - *v).abs()));
        // geometric tail estimate from the last two changes, ratio clamped to [1/2, 9/10]
        let ratio = match deltas.last() {
            Some(&d0) if d0 > T::zero() => (delta / d0).max(lit(0.5)).min(lit(0.9)),
            _ => lit(0.9),
        };
        deltas.push(delta);
        prev = cur;
        if delta * ratio / (T::one() - ratio) < tol * lit(0.25) {
            return Ok(Holonomy { map: h, steps: n, deltas });
        }
    }
    Err(HolonomyError::NoConvergence { n_max: opts.n_max, last_delta: to_f64(deltas.last().copied().unwrap_or(T::nan())) })
}

/// `H_{p→q} = lim β(na, A⁻ⁿq)∘β(na, A⁻ⁿp)⁻¹` for `q − p ∈ Eᵘ_a`, with `p`, `q`
/// points of the universal cover.
pub fn unstable_holonomy<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    a: &[i64],
    p: &[T],
    q: &[T],
    opts: &HolonomyOptions,
) -> Result<Holonomy<T>, HolonomyError> {
    let ec = EigenCoordinates::new(spectrum);
    let delta: Vec<T> = q.iter().zip(p).map(|(&u, &v)| u - v).collect();
    let c = ec.coords(&delta);
    let unstable = spectrum.unstable(a);
    let stable: Vec<usize> = (0..spectrum.spaces.len()).filter(|i| !unstable.contains(i)).collect();
    let off = dense::norm(&ec.vector(&ec.mask(&c, &stable)));
    if off > lit::<T>(1e-9) * (T::one() + dense::norm(&delta)) {
        return Err(HolonomyError::NotOnUnstableLeaf { component: to_f64(off) });
    }
    leaf_holonomy(beta, spectrum, &ec, a, p, ec.mask(&c, &unstable), opts)
}

/// `‖Dα(a)|Eᵘ⁻¹‖·sup‖Dβ(a,·)‖`, the per-step rate the bunching certificate predicts.
pub fn predicted_rate<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    a: &[i64],
    grid: &ProductGrid,
) -> Result<T, HolonomyError> {
    let u = derivative_norm(beta.action(), spectrum, a, &Subspace::Lyapunov(spectrum.unstable(a)), true)?;
    Ok(u * derivative_bounds(beta, a, grid).sup)
}

/// `Λ*` with a Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverLattice {
    /// Columns span `Λ*`.
    pub basis: IntMatrix,
    pub index: i128,
    /// Elementary divisors of `[(A₁−I) | … | (A_k−I)]`.
    pub divisors: Vec<i128>,
}

impl CoverLattice {
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// `B·t`.
    pub fn point<T: Real>(&self, t: &[T]) -> Vec<T> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| int::<T>(self.basis.get(r, c)) * t[c]).sum()).collect()
    }

    /// Representative of `x + Λ*` in the fundamental domain `B·[0,1)ᵈ`.
    pub fn reduce<T: Real>(&self, x: &[T]) -> Vec<T> {
        let d = self.dim();
        let b = Mat { rows: d, cols: d, data: self.basis.data().iter().map(|&v| int::<T>(v)).collect() };
        let t: Vec<T> = dense::inverse(&b).expect("Λ* has full rank").mul_vec(x).into_iter().map(frac).collect();
        self.point(&t)
    }
}

pub fn cover_lattice(gens: &GeneratorSet) -> Result<CoverLattice, HolonomyError> {
    let d = gens.dim();
    let stacked = gens.generators().iter().map(|g| g.minus_identity()).reduce(|acc, m| acc.hcat(&m)).expect("at least one generator");
    let smith = stacked.smith();
    let basis = stacked.column_hermite();
    if basis.cols() < d {
        return Err(HolonomyError::DegenerateLattice { rank: basis.cols(), dim: d });
    }
    let index = basis.det().expect("square basis").abs();
    debug_assert_eq!(index, smith.divisors.iter().product::<i128>().abs());
    Ok(CoverLattice { basis, index, divisors: smith.divisors })
}

/// Per coarse class, an element whose unstable space is exactly that class.
#[derive(Clone, Debug)]
pub struct HolonomyFrame<T> {
    spectrum: LyapunovSpectrum<T>,
    coords: EigenCoordinates<T>,
    /// `(members, element)` per coarse class.
    classes: Vec<(Vec<usize>, Vec<i64>)>,
    pub options: HolonomyOptions,
}

/// Class order along the path from 0 to x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathOrder {
    Ascending,
    Descending,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferValue<T> {
    pub map: CircleMap<T>,
    pub steps: usize,
    pub last_delta: T,
}

impl<T: Real> HolonomyFrame<T> {
    /// Requires a full action: each coarse class is the unstable space of
    /// the representative of its chamber.
    pub fn new(
        spectrum: &LyapunovSpectrum<T>,
        decomposition: &WeylChamberDecomposition<T>,
        options: HolonomyOptions,
    ) -> Result<Self, HolonomyError> {
        let mut classes = Vec::new();
        for (c, class) in decomposition.coarse_classes.iter().enumerate() {
            let ch = full_chamber(decomposition, c).ok_or(HolonomyError::NotFull(c))?;
            let rep = decomposition.chambers[ch].representative.clone().ok_or(HolonomyError::NotFull(c))?;
            classes.push((class.members.clone(), rep));
        }
        Ok(HolonomyFrame { spectrum: spectrum.clone(), coords: EigenCoordinates::new(spectrum), classes, options })
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        self.classes.iter().map(|c| c.1.clone()).collect()
    }

    /// `h(x)`: holonomies along the coarse components of `x`, from 0.
    pub fn transfer(&self, beta: &CircleCocycle<T>, x: &[T], order: PathOrder) -> Result<TransferValue<T>, HolonomyError> {
        let c = self.coords.coords(x);
        let mut idx: Vec<usize> = (0..self.classes.len()).collect();
        if order == PathOrder::Descending {
            idx.reverse();
        }
        let mut p = vec![T::zero(); x.len()];
        let mut map = CircleMap::identity();
        let mut steps = 0;
        let mut last_delta = T::zero();
        for ci in idx {
            let (members, a) = &self.classes[ci];
            let dc = self.coords.mask(&c, members);
            let u = self.coords.vector(&dc);
            let h = leaf_holonomy(beta, &self.spectrum, &self.coords, a, &p, dc, &self.options)?;
            map = map.then(&h.map);
            steps += h.steps;
            last_delta = last_delta.max(h.deltas.last().copied().unwrap_or(T::zero()));
            for (pi, ui) in p.iter_mut().zip(u) {
                *pi = *pi + ui;
            }
        }
        Ok(TransferValue { map, steps, last_delta })
    }
}

/// `h` sampled on `B·(i/N)` × `{k/M}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TransferMap<T> {
    pub dim: usize,
    pub grid: ProductGrid,
    pub cover: CoverLattice,
    /// Lifts `h(x)(y_k)`, base node major.
    pub samples: Vec<T>,
    /// Total holonomy steps per node.
    pub steps: Vec<u32>,
    /// Final successive-product change per node.
    pub last_delta: Vec<T>,
    pub tol: f64,
    /// Ascending vs descending path orders on sampled nodes.
    pub path_defect: T,
    pub path_samples: usize,
}

impl<T: Real> TransferMap<T> {
    pub fn node_point(&self, flat: usize) -> Vec<T> {
        let t = self.grid.base_point::<T>(flat, self.dim);
        self.cover.point(&t)
    }

    /// Sup circle distance between the samples and `f(x, y)`.
    pub fn distance_to(&self, f: impl Fn(&[T], T) -> T + Sync) -> T {
        let m = self.grid.fiber;
        (0..self.grid.base_nodes(self.dim))
            .into_par_iter()
            .map(|node| {
                let x = self.node_point(node);
                (0..m).fold(T::zero(), |acc, k| {
                    let y = self.grid.fiber_point::<T>(k);
                    acc.max(circle_dist(self.samples[node * m + k], f(&x, y)))
                })
            })
            .reduce(T::zero, |a, b| a.max(b))
    }
}

/// Builds `h` on the grid over the fundamental domain of `Λ*` and measures
/// path independence on `path_samples` random nodes.
pub fn transfer_map<T: Real>(
    beta: &CircleCocycle<T>,
    frame: &HolonomyFrame<T>,
    cover: &CoverLattice,
    grid: &ProductGrid,
    path_samples: usize,
    seed: u64,
) -> Result<TransferMap<T>, HolonomyError> {
    let d = beta.dim();
    let m = grid.fiber;
    let nodes = grid.base_nodes(d);
    let point = |flat: usize| cover.point(&grid.base_point::<T>(flat, d));
    let values: Vec<(Vec<T>, u32, T)> = (0..nodes)
        .into_par_iter()
        .map(|node| {
            let v = frame.transfer(beta, &point(node), PathOrder::Ascending)?;
            let lifts = (0..m).map(|k| v.map.apply(grid.fiber_point(k))).collect();
            Ok((lifts, v.steps as u32, v.last_delta))
        })
        .collect::<Result<_, HolonomyError>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..path_samples).map(|_| rng.gen_range(0..nodes)).collect();
    let path_defect = picks
        .par_iter()
        .map(|&node| {
            let x = point(node);
            let down = frame.transfer(beta, &x, PathOrder::Descending)?;
            let up = &values[node].0;
            Ok((0..m).fold(T::zero(), |acc, k| acc.max(circle_dist(up[k], down.map.apply(grid.fiber_point(k))))))
        })
        .collect::<Result<Vec<T>, HolonomyError>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b));
    let tol = frame.options.tol;
    if to_f64(path_defect) > 10.0 * tol {
        return Err(HolonomyError::PathDependence { defect: to_f64(path_defect) });
    }
    let mut samples = Vec::with_capacity(nodes * m);
    let mut steps = Vec::with_capacity(nodes);
    let mut last_delta = Vec::with_capacity(nodes);
    for (lifts, s, ld) in values {
        samples.extend(lifts);
        steps.push(s);
        last_delta.push(ld);
    }
    Ok(TransferMap { dim: d, grid: *grid, cover: cover.clone(), samples, steps, last_delta, tol, path_defect, path_samples })
}

/// Random points `B·t`, `t ∈ [0,1)ᵈ`.
fn domain_samples<T: Real>(cover: &CoverLattice, samples: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let t: Vec<T> = (0..cover.dim()).map(|_| lit(rng.gen::<f64>())).collect();
            cover.point(&t)
        })
        .collect()
}

const FIBER_SAMPLES: usize = 64;

/// `h(α(a)x)⁻¹ ∘ β(a, x) ∘ h(x)` with `α(a)x` reduced into the fundamental domain.
fn reduced_generator<T: Real>(
    beta: &CircleCocycle<T>,
    frame: &HolonomyFrame<T>,
    cover: &CoverLattice,
    j: usize,
    x: &[T],
) -> Result<CircleMap<T>, HolonomyError> {
    let e = unit(beta.rank(), j);
    let hx = frame.transfer(beta, x, PathOrder::Ascending)?.map;
    let image = cover.reduce(&beta.act_cover(&e, x));
    let himg = frame.transfer(beta, &image, PathOrder::Ascending)?.map;
    Ok(hx.then(&beta.evaluate(&e, x)).then(&himg.inverse()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConstantReduction<T> {
    /// `β₀(eⱼ)` per generator.
    pub generators: Vec<CircleMap<T>>,
    /// Rotation number of each `β₀(eⱼ)` in `[0, 1)`.
    pub rotation_numbers: Vec<T>,
    /// Sup over samples of the C⁰ distance to `β₀(eⱼ)`.
    pub defect: T,
    pub samples: usize,
}

pub fn reduce_to_constant<T: Real>(
    beta: &CircleCocycle<T>,
    frame: &HolonomyFrame<T>,
    cover: &CoverLattice,
    samples: usize,
    seed: u64,
) -> Result<ConstantReduction<T>, HolonomyError> {
    let k = beta.rank();
    let origin = vec![T::zero(); beta.dim()];
    let mut generators = Vec::with_capacity(k);
    for j in 0..k {
        generators.push(reduced_generator(beta, frame, cover, j, &origin)?);
    }
    let points = domain_samples::<T>(cover, samples, seed);
    let defect = points
        .par_iter()
        .map(|x| {
            let mut worst = T::zero();
            for (j, g0) in generators.iter().enumerate() {
                worst = worst.max(reduced_generator(beta, frame, cover, j, x)?.c0_distance(g0, FIBER_SAMPLES));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<T>, HolonomyError>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b));
    let rotation_numbers = generators.iter().map(|g| frac(g.rotation_number(512).value)).collect();
    Ok(ConstantReduction { generators, rotation_numbers, defect, samples })
}

/// Sup of `d_C⁰(h(x + ω), h(x))` over sample points and the columns `ω` of `lattice`.
pub fn periodicity_defect<T: Real>(
    beta: &CircleCocycle<T>,
    frame: &HolonomyFrame<T>,
    cover: &CoverLattice,
    lattice: &IntMatrix,
    samples: usize,
    seed: u64,
) -> Result<T, HolonomyError> {
    let points = domain_samples::<T>(cover, samples, seed);
    let d = beta.dim();
    Ok(points
        .par_iter()
        .map(|x| {
            let hx = frame.transfer(beta, x, PathOrder::Ascending)?.map;
            let mut worst = T::zero();
            for c in 0..lattice.cols() {
                let shifted: Vec<T> = (0..d).map(|r| x[r] + int::<T>(lattice.get(r, c))).collect();
                let hs = frame.transfer(beta, &shifted, PathOrder::Ascending)?.map;
                worst = worst.max(hs.c0_distance(&hx, FIBER_SAMPLES));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<T>, HolonomyError>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoboundaryReport<T> {
    pub periodicity_defect: T,
    /// Sup distance of `h(α(a)x)⁻¹∘β(a,x)∘h(x)` from the identity.
    pub identity_residual: T,
    pub samples: usize,
}

pub fn coboundary_verify<T: Real>(
    beta: &CircleCocycle<T>,
    frame: &HolonomyFrame<T>,
    cover: &CoverLattice,
    samples: usize,
    seed: u64,
) -> Result<CoboundaryReport<T>, HolonomyError> {
    let fp = fixed_point_trivial_check(beta)?;
    if let Some(w) = fp.witnesses.iter().find(|w| w.distance >= crate::cocycle::FIXED_POINT_TOL) {
        return Err(HolonomyError::NotFixedPointTrivial { generator: w.generator, distance: w.distance });
    }
    let periodicity = periodicity_defect(beta, frame, cover, &cover.basis, samples, seed)?;
    let points = domain_samples::<T>(cover, samples, seed ^ 0xc0b0);
    let residual = points
        .par_iter()
        .map(|x| {
            let mut worst = T::zero();
            for j in 0..beta.rank() {
                worst = worst.max(reduced_generator(beta, frame, cover, j, x)?.distance_to_identity(FIBER_SAMPLES));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<T>, HolonomyError>>()?
        .into_iter()
        .fold(T::zero(), |a, b| a.max(b));
    Ok(CoboundaryReport { periodicity_defect: periodicity, identity_residual: residual, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionRow {
    pub period: u32,
    /// `|det(Aⁿ − I)|`.
    pub points: usize,
    /// Rotation numbers of `β(na, x)` in `[0, 1)`, one per periodic point.
    pub rotation_numbers: Vec<f64>,
    /// Largest circle distance of a rotation number from 0.
    pub max_rotation: f64,
}

/// Rotation numbers of the return maps `β(na, x)` at the points with `α(na)x = x`.
pub fn periodic_obstruction<T: Real>(
    beta: &CircleCocycle<T>,
    a: &[i64],
    max_period: u32,
) -> Result<Vec<ObstructionRow>, HolonomyError> {
    let mut rows = Vec::new();
    for n in 1..=max_period {
        let na: Vec<i64> = a.iter().map(|&v| v * n as i64).collect();
        let m = beta.action().element_matrix(&na)?.minus_identity();
        let pts = torsion_points(&m).ok_or(HolonomyError::Cocycle(CocycleError::NotHyperbolic(0)))?;
        let rots: Vec<f64> = pts
            .par_iter()
            .map(|p| {
                let x: Vec<T> = p.iter().map(|r| int::<T>(*r.numer()) / int(*r.denom())).collect();
                to_f64(frac(beta.evaluate(&na, &x).rotation_number(256).value))
            })
            .collect();
        let max_rotation = rots.iter().fold(0.0f64, |m, &r| m.max(circle_dist(r, 0.0)));
        rows.push(ObstructionRow { period: n, points: pts.len(), rotation_numbers: rots, max_rotation });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FourierField;
    use crate::fixtures;
    use crate::lattice_action::lyapunov_spectrum;
    use crate::weyl::chambers;

    type Setup = (CircleCocycle<f64>, LyapunovSpectrum<f64>, WeylChamberDecomposition<f64>);

    fn setup(beta: CircleCocycle<f64>) -> Setup {
        let s = lyapunov_spectrum(beta.action()).unwrap();
        let d = chambers(&s, 8).unwrap();
        (beta, s, d)
    }

    fn phi_map(phi: &FourierField<f64>, x: &[f64]) -> CircleMap<f64> {
        CircleMap::from_poly(phi.at(x))
    }

    #[test]
    fn identity_and_trivial_holonomy() {
        let (b, s, _) = setup(CircleCocycle::identity(fixtures::cubic_pair()));
        let a = [1, 1];
        let u = s.spaces[s.unstable(&a)[0]].directions[0].clone();
        let p = [0.1, 0.2, 0.3];
        let q: Vec<f64> = p.iter().zip(&u).map(|(x, v)| x + 0.4 * v).collect();
        let h = unstable_holonomy(&b, &s, &a, &p, &q, &HolonomyOptions::default()).unwrap();
        assert_eq!(h.map.distance_to_identity(32), 0.0);
        let (b, s, _) = setup(fixtures::coboundary_fixture(0.05));
        let h = unstable_holonomy(&b, &s, &a, &p, &p, &HolonomyOptions::default()).unwrap();
        assert_eq!(h.steps, 0);
    }

    #[test]
    fn off_leaf_rejected() {
        let (b, s, _) = setup(fixtures::coboundary_fixture(0.05));
        let r = unstable_holonomy(&b, &s, &[1, 1], &[0.0, 0.0, 0.0], &[0.1, 0.0, 0.0], &HolonomyOptions::default());
        assert!(matches!(r, Err(HolonomyError::NotOnUnstableLeaf { .. })));
    }

    #[test]
    fn coboundary_holonomy_telescopes() {
        let (b, s, d) = setup(fixtures::coboundary_fixture(0.05));
        let phi = b.conjugator().unwrap().clone();
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for a in frame.elements() {
            let u = s.spaces[s.unstable(&a)[0]].directions[0].clone();
            for _ in 0..5 {
                let p: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                let t = rng.gen_range(-0.7..0.7);
                let q: Vec<f64> = p.iter().zip(&u).map(|(x, v)| x + t * v).collect();
                let h = unstable_holonomy(&b, &s, &a, &p, &q, &frame.options).unwrap();
                let oracle = phi_map(&phi, &p).inverse().then(&phi_map(&phi, &q));
                assert!(h.map.c0_distance(&oracle, 64) < 1e-7);
            }
        }
    }

    #[test]
    fn rate_matches_prediction() {
        let (b, s, d) = setup(fixtures::coboundary_fixture(0.05));
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let grid = ProductGrid::new(8, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for a in frame.elements() {
            let rho = predicted_rate(&b, &s, &a, &grid).unwrap();
            let u = s.spaces[s.unstable(&a)[0]].directions[0].clone();
            let runs: Vec<Holonomy<f64>> = (0..12)
                .map(|_| {
                    let p: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                    let q: Vec<f64> = p.iter().zip(&u).map(|(x, v)| x + 0.5 * v).collect();
                    unstable_holonomy(&b, &s, &a, &p, &q, &frame.options).unwrap()
                })
                .collect();
            let fit = pooled_rate(&runs, 1e-13).unwrap();
            assert!(fit <= rho * 1.2 && fit >= rho * 0.8, "{a:?}: fit {fit} predicted {rho}");
        }
    }

    #[test]
    fn cover_lattices() {
        let c = cover_lattice(&fixtures::cat_map()).unwrap();
        assert_eq!(c.index, 1);
        let single = GeneratorSet::new(vec![fixtures::cubic_companion()]).unwrap();
        let c = cover_lattice(&single).unwrap();
        assert_eq!(c.index, 3);
        assert_eq!(fixtures::cubic_companion().minus_identity().det().unwrap().abs(), 3);
        assert_eq!(cover_lattice(&fixtures::cubic_pair()).unwrap().index, 1);
        assert_eq!(cover_lattice(&fixtures::cubic_cover_pair()).unwrap().index, 3);
        let id = GeneratorSet::new(vec![IntMatrix::identity(2)]).unwrap();
        assert!(matches!(cover_lattice(&id), Err(HolonomyError::DegenerateLattice { .. })));
    }

    #[test]
    fn identity_transfer() {
        let (b, s, d) = setup(CircleCocycle::identity(fixtures::cubic_pair()));
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        let t = transfer_map(&b, &frame, &cover, &ProductGrid::new(4, 16), 8, 1).unwrap();
        assert_eq!(t.distance_to(|_, y| y), 0.0);
        let r = reduce_to_constant(&b, &frame, &cover, 8, 2).unwrap();
        assert_eq!(r.defect, 0.0);
        assert!(r.generators.iter().all(|g| g.is_empty()));
    }

    #[test]
    fn coboundary_recovery() {
        let (b, s, d) = setup(fixtures::coboundary_fixture(0.05));
        let phi = b.conjugator().unwrap().clone();
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        let t = transfer_map(&b, &frame, &cover, &ProductGrid::new(4, 32), 16, 1).unwrap();
        assert!(t.distance_to(|x, y| phi_map(&phi, x).apply(y)) < 1e-7);
        assert!(t.path_defect < 1e-7);
        let h0 = frame.transfer(&b, &[0.0; 3], PathOrder::Ascending).unwrap();
        assert!(h0.map.is_empty());
        let r = reduce_to_constant(&b, &frame, &cover, 8, 2).unwrap();
        assert!(r.defect < 1e-7);
        assert!(r.generators.iter().all(|g| g.distance_to_identity(64) < 1e-12));
        let c = coboundary_verify(&b, &frame, &cover, 8, 3).unwrap();
        assert!(c.periodicity_defect < 1e-7 && c.identity_residual < 1e-7, "{c:?}");
    }

    #[test]
    fn conjugated_rotation_reduces() {
        let theta = 0.3;
        let (b, s, d) = setup(fixtures::conjugated_rotation(0.05, theta));
        let phi = b.conjugator().unwrap().clone();
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        let x = [0.3, 0.6, 0.2];
        let h = frame.transfer(&b, &x, PathOrder::Ascending).unwrap();
        assert!(h.map.c0_distance(&phi_map(&phi, &x), 64) < 1e-7);
        let r = reduce_to_constant(&b, &frame, &cover, 8, 4).unwrap();
        assert!(r.defect < 1e-7);
        for rot in &r.rotation_numbers {
            assert!(circle_dist(*rot, theta) < 1e-9);
        }
        assert!(matches!(coboundary_verify(&b, &frame, &cover, 4, 1), Err(HolonomyError::NotFixedPointTrivial { .. })));
    }

    #[test]
    fn shifted_conjugator_still_trivializes() {
        // φ(0) is the rotation by 0.2
        let mut phi = fixtures::phi_field::<f64>(0.05, 3);
        phi.shift = 0.2;
        let beta = crate::cocycle::coboundary_construct(phi.clone(), vec![FourierField::identity(); 2], fixtures::cubic_pair()).unwrap();
        let (b, s, d) = setup(beta);
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        let c = coboundary_verify(&b, &frame, &cover, 6, 5).unwrap();
        assert!(c.identity_residual < 1e-7 && c.periodicity_defect < 1e-7);
        let x = [0.7, 0.1, 0.45];
        let h = frame.transfer(&b, &x, PathOrder::Ascending).unwrap();
        let oracle = CircleMap::rotation(-0.2).then(&phi_map(&phi, &x));
        assert!(h.map.c0_distance(&oracle, 64) < 1e-7);
    }

    #[test]
    fn twisted_coboundary_needs_the_cover() {
        let (b, s, d) = setup(fixtures::twisted_coboundary(0.05));
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        assert_eq!(cover.index, 3);
        let c = coboundary_verify(&b, &frame, &cover, 6, 5).unwrap();
        assert!(c.identity_residual < 1e-7 && c.periodicity_defect < 1e-7, "{c:?}");
        let integer = periodicity_defect(&b, &frame, &cover, &IntMatrix::identity(3), 4, 6).unwrap();
        assert!(integer > 0.01);
        // h(x) = φ(x)∘R_{⟨v,x⟩} on the cover
        let phi = b.conjugator().unwrap().clone();
        let x = [0.4, -0.3, 1.2];
        let twist: f64 = x.iter().zip(fixtures::COVER_TWIST).map(|(a, v)| a * v).sum();
        let h = frame.transfer(&b, &x, PathOrder::Ascending).unwrap();
        let oracle = CircleMap::rotation(twist).then(&phi_map(&phi, &x));
        assert!(h.map.c0_distance(&oracle, 64) < 1e-7);
    }

    #[test]
    fn obstructions() {
        let cat = CircleCocycle::<f64>::identity(fixtures::cat_map());
        let rows = periodic_obstruction(&cat, &[1], 3).unwrap();
        assert_eq!(rows[0].points, 1);
        assert_eq!(rows[1].points, 5);
        let b = fixtures::coboundary_fixture::<f64>(0.05);
        for row in periodic_obstruction(&b, &[1, 1], 4).unwrap() {
            assert!(row.max_rotation < 1e-8);
        }
        let theta = 0.3;
        let r = fixtures::rotation_cocycle::<f64>(theta);
        for row in periodic_obstruction(&r, &[1, 1], 4).unwrap() {
            let want = frac(row.period as f64 * 2.0 * theta);
            assert!(row.rotation_numbers.iter().all(|&v| circle_dist(v, want) < 1e-9));
        }
    }

    #[test]
    fn transfer_roundtrip() {
        let (b, s, d) = setup(fixtures::coboundary_fixture(0.05));
        let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
        let cover = cover_lattice(b.action()).unwrap();
        let t = transfer_map(&b, &frame, &cover, &ProductGrid::new(2, 16), 4, 1).unwrap();
        let back: TransferMap<f64> = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
