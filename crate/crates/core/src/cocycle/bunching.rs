//! Grid suprema of fiber derivatives, r-bunching certificates and the PH
//! membership tests built on them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{unit, CircleCocycle, CocycleError};
use crate::lattice_action::{derivative_norm, lattice_cube, LyapunovSpectrum, Subspace};
use crate::scalar::{int, lit, to_f64, Real};
use crate::weyl::WeylChamberDecomposition;

/// Uniform product grid on 𝕋ᵈ × S¹.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductGrid {
    /// Nodes per base coordinate.
    pub base: usize,
    /// Nodes on the fiber circle.
    pub fiber: usize,
}

impl ProductGrid {
    pub fn new(base: usize, fiber: usize) -> Self {
        ProductGrid { base, fiber }
    }

    pub fn base_nodes(&self, dim: usize) -> usize {
        self.base.pow(dim as u32)
    }

    /// Multi-index of a flat base node, first coordinate slowest.
    pub fn base_index(&self, mut flat: usize, dim: usize) -> Vec<usize> {
        let mut idx = vec![0; dim];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.base;
            flat /= self.base;
        }
        idx
    }

    pub fn base_flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.base + i)
    }

    pub fn base_point<T: Real>(&self, flat: usize, dim: usize) -> Vec<T> {
        self.base_index(flat, dim).into_iter().map(|i| int::<T>(i as i128) / int(self.base as i128)).collect()
    }

    pub fn fiber_point<T: Real>(&self, i: usize) -> T {
        int::<T>(i as i128) / int(self.fiber as i128)
    }
}

/// Inflated maximum of node values: each node adds half its largest jump
/// to a periodic neighbour, summed over axes. `values` is laid out like
/// [`ProductGrid::base_index`].
pub(crate) fn inflated_max<T: Real>(values: &[T], side: usize, dim: usize) -> T {
    let mut best = T::neg_infinity();
    for (flat, &v) in values.iter().enumerate() {
        let mut extra = T::zero();
        let mut stride = 1;
        for _axis in 0..dim {
            let coord = (flat / stride) % side;
            let up = if coord + 1 == side { flat - coord * stride } else { flat + stride };
            let down = if coord == 0 { flat + (side - 1) * stride } else { flat - stride };
            extra = extra + (v - values[up]).abs().max((v - values[down]).abs()) * lit(0.5);
            stride *= side;
        }
        best = best.max(v + extra);
    }
    best
}

/// `sup‖Dβ(a,·)‖` and `sup‖Dβ(a,·)⁻¹‖` over the grid with inflation margins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DerivativeBounds<T> {
    pub element: Vec<i64>,
    pub sup: T,
    pub sup_inv: T,
    /// Largest node values before inflation.
    pub raw_sup: T,
    pub raw_sup_inv: T,
    /// Total inflation added to each supremum (fiber plus base).
    pub margin: T,
    pub margin_inv: T,
    /// Largest coefficient bound on the y-Lipschitz constant of `log ∂yβ`.
    pub coefficient_lipschitz: T,
    pub grid: ProductGrid,
}

struct NodeStats<T> {
    max_d: T,
    max_inv: T,
    /// Node maxima inflated over the adjacent fiber cells.
    cell_d: T,
    cell_inv: T,
    lip: T,
}

/// Grid suprema of `∂yβ(a, x)(y)` and its reciprocal.
pub fn derivative_bounds<T: Real>(beta: &CircleCocycle<T>, a: &[i64], grid: &ProductGrid) -> DerivativeBounds<T> {
    let d = beta.dim();
    let stats: Vec<NodeStats<T>> = (0..grid.base_nodes(d))
        .into_par_iter()
        .map(|flat| {
            let x = grid.base_point::<T>(flat, d);
            let map = beta.evaluate(a, &x);
            let ds: Vec<T> = (0..grid.fiber).map(|i| map.derivative(grid.fiber_point(i))).collect();
            let inv: Vec<T> = ds.iter().map(|v| v.recip()).collect();
            NodeStats {
                max_d: ds.iter().fold(T::zero(), |m, &v| m.max(v)),
                max_inv: inv.iter().fold(T::zero(), |m, &v| m.max(v)),
                cell_d: inflated_max(&ds, ds.len(), 1),
                cell_inv: inflated_max(&inv, inv.len(), 1),
                lip: map.log_derivative_lipschitz(),
            }
        })
        .collect();
    let cell_d: Vec<T> = stats.iter().map(|s| s.cell_d).collect();
    let cell_inv: Vec<T> = stats.iter().map(|s| s.cell_inv).collect();
    let fold = |f: &dyn Fn(&NodeStats<T>) -> T| stats.iter().fold(T::zero(), |m, s| m.max(f(s)));
    let raw_sup = fold(&|s| s.max_d);
    let raw_sup_inv = fold(&|s| s.max_inv);
    let sup = inflated_max(&cell_d, grid.base, d);
    let sup_inv = inflated_max(&cell_inv, grid.base, d);
    DerivativeBounds {
        element: a.to_vec(),
        sup,
        sup_inv,
        raw_sup,
        raw_sup_inv,
        margin: sup - raw_sup,
        margin_inv: sup_inv - raw_sup_inv,
        coefficient_lipschitz: fold(&|s| s.lip),
        grid: *grid,
    }
}

/// Evidence that `β` is r-bunched over `α(a)` at iterate `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BunchingCertificate<T> {
    pub element: Vec<i64>,
    pub k: u32,
    /// Bunching exponent; `None` stands for r = ∞.
    pub r: Option<f64>,
    /// Largest of the checked suprema; strictly below 1.
    pub margin: T,
    /// `‖Dα(ka)|_{Eᵘ}⁻¹‖`.
    pub unstable_inverse_norm: T,
    pub sup: T,
    pub sup_inv: T,
    pub grid: ProductGrid,
}

pub(crate) fn is_regular<T: Real>(spectrum: &LyapunovSpectrum<T>, a: &[i64]) -> bool {
    let an = a.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    spectrum.spaces.iter().enumerate().all(|(i, sp)| {
        let scale = to_f64(sp.functional.iter().map(|&c| c * c).sum::<T>().sqrt()) * an;
        to_f64(spectrum.chi(i, a)).abs() > 1e-9 * scale.max(1e-300)
    })
}

/// Checks both r-bunching inequalities at the single iterate `k`.
pub fn bunching_at<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    a: &[i64],
    k: u32,
    r: Option<f64>,
    grid: &ProductGrid,
) -> Result<Option<BunchingCertificate<T>>, CocycleError> {
    let ka: Vec<i64> = a.iter().map(|&v| v * k as i64).collect();
    let unstable = spectrum.unstable(a);
    let u = derivative_norm(beta.action(), spectrum, &ka, &Subspace::Lyapunov(unstable), true)?;
    let b = derivative_bounds(beta, &ka, grid);
    let first = u * b.sup;
    let second = match r {
        Some(r) if r == 0.0 => None,
        Some(r) => Some(first * b.sup_inv.powf(lit(r))),
        None => Some(if b.sup_inv <= T::one() + T::epsilon() * lit(16.0) { first } else { T::infinity() }),
    };
    let margin = second.map_or(first, |s| first.max(s));
    Ok((margin < T::one()).then(|| BunchingCertificate {
        element: a.to_vec(),
        k,
        r,
        margin,
        unstable_inverse_norm: u,
        sup: b.sup,
        sup_inv: b.sup_inv,
        grid: *grid,
    }))
}

/// Scans `k = 1..=k_max` for the first iterate certifying r-bunching.
pub fn bunching_check<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    a: &[i64],
    r: Option<f64>,
    k_max: u32,
    grid: &ProductGrid,
) -> Result<BunchingCertificate<T>, CocycleError> {
    if !is_regular(spectrum, a) {
        return Err(CocycleError::NotRegular(a.to_vec()));
    }
    for k in 1..=k_max {
        if let Some(c) = bunching_at(beta, spectrum, a, k, r, grid)? {
            return Ok(c);
        }
    }
    Err(CocycleError::NotBunchedWithin(k_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChamberMembership<T> {
    pub chamber: usize,
    pub representative: Vec<i64>,
    pub certificate: Option<BunchingCertificate<T>>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PhProbe<T> {
    pub chambers: Vec<ChamberMembership<T>>,
    /// Every chamber has a representative in PH.
    pub all_certified: bool,
}

/// 0-bunching at every chamber representative.
pub fn ph_probe<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    decomposition: &WeylChamberDecomposition<T>,
    grid: &ProductGrid,
    k_max: u32,
) -> Result<PhProbe<T>, CocycleError> {
    let mut chambers = Vec::with_capacity(decomposition.chambers.len());
    for (c, ch) in decomposition.chambers.iter().enumerate() {
        let rep = ch.representative.clone().ok_or_else(|| CocycleError::NotRegular(Vec::new()))?;
        let (certificate, failure) = match bunching_check(beta, spectrum, &rep, Some(0.0), k_max, grid) {
            Ok(cert) => (Some(cert), None),
            Err(e @ CocycleError::NotBunchedWithin(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        chambers.push(ChamberMembership { chamber: c, representative: rep, certificate, failure });
    }
    let all_certified = chambers.iter().all(|c| c.certificate.is_some());
    Ok(PhProbe { chambers, all_certified })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessOptions {
    pub sample_count: usize,
    /// Euclidean norm cap for sampled lattice points.
    pub norm_cap: i64,
    /// `ε = safety·λ/((D₁ + D₂)k₀)`.
    pub safety: f64,
    pub k_max: u32,
    pub grid: ProductGrid,
    pub seed: u64,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        RobustnessOptions { sample_count: 50, norm_cap: 60, safety: 0.1, k_max: 4, grid: ProductGrid::new(16, 32), seed: 7 }
    }
}

/// Quantities of the PH robustness argument plus the verified samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PHRobustnessCertificate<T> {
    pub element: Vec<i64>,
    pub k0: u32,
    pub lambda: T,
    /// Bound `|χ(m)| ≤ D₁‖m‖`.
    pub d1: T,
    /// Bound `‖Dβ(m,x)‖ ≤ e^{D₂‖m‖}`.
    pub d2: T,
    pub epsilon: T,
    /// Smallest norm of a lattice point within angle `ε` of `a` that is not a
    /// multiple of `a` (`norm_cap + 1` if none).
    pub cutoff: T,
    /// Largest `n₀` with `n₀k₀a` closest to a sample.
    pub n0: i64,
    /// Weakest unstable exponent `min_{χᵢ(a)>0} χᵢ(a)`.
    pub chi0: T,
    /// Growth constant `C` of the polynomial-deviation bound.
    pub c0: T,
    /// Largest remainder distortion `e^{(D₁+D₂)‖b − n₀k₀a‖}` over samples.
    pub c1: T,
    pub samples: Vec<Vec<i64>>,
    /// Multiples `na`, `n = 2..=10`, always checked.
    pub forced: Vec<Vec<i64>>,
    /// Worst certified margin among all checked points.
    pub worst_margin: T,
}

fn l2(a: &[i64]) -> f64 {
    a.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}

fn parallel(a: &[i64], b: &[i64]) -> bool {
    let dot: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot > 0 && (0..a.len()).all(|i| (0..a.len()).all(|j| a[i] * b[j] == a[j] * b[i]))
}

/// Robustness of PH around a certified element `a`.
pub fn ph_robustness<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    cert: &BunchingCertificate<T>,
    opts: &RobustnessOptions,
) -> Result<PHRobustnessCertificate<T>, CocycleError> {
    let a = &cert.element;
    let k = beta.rank();
    let d1 = spectrum
        .spaces
        .iter()
        .fold(T::zero(), |m, sp| m.max(sp.functional.iter().map(|&c| c * c).sum::<T>().sqrt()));
    let mut gen_log = T::zero();
    for j in 0..k {
        let b = derivative_bounds(beta, &unit(k, j), &opts.grid);
        gen_log = gen_log.max(b.sup.ln()).max(b.sup_inv.ln());
    }
    // ‖m‖₁ ≤ √k‖m‖₂
    let d2 = gen_log * int::<T>(k as i128).sqrt();
    let lambda = -cert.margin.ln();
    let epsilon = lit::<T>(opts.safety) * lambda / ((d1 + d2) * int::<T>(cert.k as i128));
    let eps = to_f64(epsilon);
    let an = l2(a);
    let dir: Vec<f64> = a.iter().map(|&v| v as f64 / an).collect();
    let mut candidates: Vec<Vec<i64>> = lattice_cube(k, opts.norm_cap)
        .into_iter()
        .filter(|b| {
            let bn = l2(b);
            if bn == 0.0 || bn > opts.norm_cap as f64 || parallel(a, b) {
                return false;
            }
            let dist = b.iter().zip(&dir).map(|(&x, d)| (x as f64 / bn - d).powi(2)).sum::<f64>().sqrt();
            dist < eps
        })
        .collect();
    let cutoff = candidates.iter().map(|b| l2(b)).fold(opts.norm_cap as f64 + 1.0, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(opts.sample_count);
    candidates.sort_by(|x, y| l2(x).partial_cmp(&l2(y)).unwrap().then(x.cmp(y)));
    let forced: Vec<Vec<i64>> = (2..=10).map(|n| a.iter().map(|&v| v * n).collect()).collect();
    let mut worst = cert.margin;
    for b in forced.iter().chain(&candidates) {
        match bunching_check(beta, spectrum, b, Some(0.0), opts.k_max, &opts.grid) {
            Ok(c) => worst = worst.max(c.margin),
            Err(CocycleError::NotBunchedWithin(_)) | Err(CocycleError::NotRegular(_)) => {
                return Err(CocycleError::SampleFailed(b.clone()))
            }
            Err(e) => return Err(e),
        }
    }
    let step = cert.k as f64 * an;
    let mut n0 = 0i64;
    let mut c1 = T::one();
    for b in &candidates {
        let proj: f64 = b.iter().zip(&dir).map(|(&x, d)| x as f64 * d).sum();
        let n = (proj / step).round() as i64;
        n0 = n0.max(n);
        let rem: Vec<i64> = b.iter().zip(a).map(|(&x, &y)| x - n * cert.k as i64 * y).collect();
        c1 = c1.max(((d1 + d2) * lit(l2(&rem))).exp());
    }
    let chi0 = (0..spectrum.spaces.len())
        .map(|i| spectrum.chi(i, a))
        .filter(|&c| c > T::zero())
        .fold(T::infinity(), |m, c| m.min(c));
    Ok(PHRobustnessCertificate {
        element: a.clone(),
        k0: cert.k,
        lambda,
        d1,
        d2,
        epsilon,
        cutoff: lit(cutoff),
        n0,
        chi0,
        c0: spectrum.growth_constant,
        c1,
        samples: candidates,
        forced,
        worst_margin: worst,
    })
}
