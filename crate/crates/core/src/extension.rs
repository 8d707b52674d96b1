//! The skew extension `α̃(a)(x, y) = (α(a)x, β(a, x)y)` along a Lyapunov
//! line `Eᵢ`: derivative blocks, invariant cones, the invariant line field
//! `Ẽᵢ` as a slope field over `Eᵢ`, and domination rates.
//!
//! A vector `(u·eᵢ, v)` with `eᵢ` the unit direction of `Eᵢ` is written
//! `(u, v)`; `Dα̃(na)` acts on it by `(Aₙu, Cₙu + Dₙv)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::bunching::{inflated_max, is_regular};
use crate::cocycle::{CircleCocycle, ProductGrid};
use crate::lattice_action::{ActionError, LyapunovSpectrum};
use crate::scalar::{frac, int, lit, to_f64, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("element {0:?} is not regular")]
    NotRegular(Vec<i64>),
    #[error("Lyapunov space {i} has dimension {dim}, only lines are supported")]
    NotLine { i: usize, dim: usize },
    #[error("space {i} is not expanded by {a:?}")]
    NotExpanding { i: usize, a: Vec<i64> },
    #[error("space {i} does not dominate the fiber under {a:?} (ratio {ratio})")]
    NotDominated { i: usize, a: Vec<i64>, ratio: f64 },
    #[error("cone image escapes at x = {x:?}, y = {y} (ratio {ratio})")]
    ConeEscape { x: Vec<f64>, y: f64, ratio: f64 },
    #[error("no convergence after {max_iter} iterations (last change {last_delta:e})")]
    NoConvergence { max_iter: usize, last_delta: f64 },
    #[error("growth bound violated for b = {b:?} at {point:?}")]
    GrowthViolated { b: Vec<i64>, point: Vec<f64> },
    #[error(transparent)]
    Action(#[from] ActionError),
}

fn line<T: Real>(spectrum: &LyapunovSpectrum<T>, i: usize) -> Result<Vec<T>, ExtensionError> {
    let sp = &spectrum.spaces[i];
    if sp.dim != 1 {
        return Err(ExtensionError::NotLine { i, dim: sp.dim });
    }
    Ok(sp.directions[0].clone())
}

/// Signed eigenvalue of `α(a)` on the line `Eᵢ`.
pub fn multiplier<T: Real>(spectrum: &LyapunovSpectrum<T>, i: usize, a: &[i64]) -> T {
    let af: Vec<T> = a.iter().map(|&v| int(v as i128)).collect();
    spectrum.spaces[i].action(&af)[(0, 0)]
}

fn scaled(a: &[i64], n: i64) -> Vec<i64> {
    a.iter().map(|&v| v * n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlockDerivative<T> {
    pub space: usize,
    pub element: Vec<i64>,
    pub n: u32,
    pub x: Vec<T>,
    pub y: T,
    /// `α̃(na)(x, y)` with the base reduced mod 1 and the fiber as a lift.
    pub image: (Vec<T>, T),
    /// `Aₙ`, the eigenvalue of `α(na)` on the line.
    pub a_block: T,
    /// `Cₙ`, derivative of `β(na, ·)(y)` along the unit direction of the line.
    pub c_block: T,
    /// `Dₙ = ∂yβ(na, x)(y)`.
    pub d_block: T,
}

impl<T: Real> BlockDerivative<T> {
    /// Blocks of the composite: `self` first, then `next` (taken at `self.image`).
    pub fn compose(&self, next: &BlockDerivative<T>) -> (T, T, T) {
        (
            next.a_block * self.a_block,
            next.c_block * self.a_block + next.d_block * self.c_block,
            next.d_block * self.d_block,
        )
    }
}

pub fn block_derivative<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    i: usize,
    a: &[i64],
    x: &[T],
    y: T,
    n: u32,
) -> Result<BlockDerivative<T>, ExtensionError> {
    if !is_regular(spectrum, a) {
        return Err(ExtensionError::NotRegular(a.to_vec()));
    }
    let dir = line(spectrum, i)?;
    let na = scaled(a, n as i64);
    let jet = beta.evaluate_jet(&na, x, &dir).apply(y);
    let image_x = beta.act_cover(&na, x).into_iter().map(frac).collect();
    Ok(BlockDerivative {
        space: i,
        element: a.to_vec(),
        n,
        x: x.to_vec(),
        y,
        image: (image_x, jet.value),
        a_block: multiplier(spectrum, i, &na),
        c_block: jet.dx,
        d_block: jet.dy,
    })
}

/// Per base node, `|C|` and `D` of `β(a, ·)` inflated over the fiber cells.
fn jet_cells<T: Real>(beta: &CircleCocycle<T>, a: &[i64], dir: &[T], grid: &ProductGrid) -> (Vec<T>, Vec<T>) {
    let d = beta.dim();
    (0..grid.base_nodes(d))
        .into_par_iter()
        .map(|flat| {
            let x = grid.base_point::<T>(flat, d);
            let jm = beta.evaluate_jet(a, &x, dir);
            let (cs, ds): (Vec<T>, Vec<T>) = (0..grid.fiber)
                .map(|k| {
                    let j = jm.apply(grid.fiber_point(k));
                    (j.dx.abs(), j.dy)
                })
                .unzip();
            (inflated_max(&cs, cs.len(), 1), inflated_max(&ds, ds.len(), 1))
        })
        .unzip()
}

/// Cone data for `𝒞_{i,γ} = {(u, v): |v| ≤ γ|u|}` under `α̃(la)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConeParams<T> {
    pub space: usize,
    pub element: Vec<i64>,
    pub l: u32,
    pub gamma: T,
    pub epsilon: T,
    /// Norm comparability constant; 1 on a line.
    pub c: T,
    /// Polynomial deviation exponent `L`.
    pub deviation: u32,
    /// Per-step domination margin, `λᵢˡ = sup D_l / |A_l|`.
    pub lambda: T,
    /// `A_l`.
    pub multiplier: T,
    pub sup_c: T,
    pub sup_d: T,
    pub grid: ProductGrid,
}

impl<T: Real> ConeParams<T> {
    /// `c⁻¹ − λᵢˡ·c·lᴸ`.
    pub fn construction_margin(&self) -> T {
        self.c.recip() - self.lambda.powi(self.l as i32) * self.c * int::<T>(self.l as i128).powi(self.deviation as i32)
    }

    pub fn inequalities_hold(&self) -> bool {
        let m = self.construction_margin();
        m > T::zero() && self.gamma > self.sup_c / m && self.epsilon > T::zero() && self.epsilon < T::one()
    }

    /// Certified contraction factor of the graph transform, `λᵢˡ`.
    pub fn contraction(&self) -> T {
        self.lambda.powi(self.l as i32)
    }
}

/// Smallest `l ≤ l_max` with `sup D_l < |A_l|`; `γ` is twice the lower bound
/// and `ε` is read off the worst boundary image.
pub fn cone_params<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    i: usize,
    a: &[i64],
    grid: &ProductGrid,
    l_max: u32,
) -> Result<ConeParams<T>, ExtensionError> {
    if !is_regular(spectrum, a) {
        return Err(ExtensionError::NotRegular(a.to_vec()));
    }
    let dir = line(spectrum, i)?;
    if spectrum.chi(i, a) <= T::zero() {
        return Err(ExtensionError::NotExpanding { i, a: a.to_vec() });
    }
    let d = beta.dim();
    let mut first_ratio = None;
    for l in 1..=l_max.max(1) {
        let la = scaled(a, l as i64);
        let (cells_c, cells_d) = jet_cells(beta, &la, &dir, grid);
        let sup_d = inflated_max(&cells_d, grid.base, d);
        let mult = multiplier(spectrum, i, &la);
        let ratio = sup_d / mult.abs();
        first_ratio.get_or_insert(ratio);
        if ratio >= T::one() {
            continue;
        }
        let sup_c = inflated_max(&cells_c, grid.base, d).max(T::zero());
        let gamma = if sup_c == T::zero() { T::one() } else { lit::<T>(2.0) * sup_c / (T::one() - ratio) };
        let epsilon = T::one() - (sup_c / (gamma * mult.abs()) + ratio);
        return Ok(ConeParams {
            space: i,
            element: a.to_vec(),
            l,
            gamma,
            epsilon,
            c: T::one(),
            deviation: 0,
            lambda: ratio.powf(int::<T>(l as i128).recip()),
            multiplier: mult,
            sup_c,
            sup_d,
            grid: *grid,
        });
    }
    Err(ExtensionError::NotDominated { i, a: a.to_vec(), ratio: to_f64(first_ratio.unwrap_or(T::infinity())) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConeCheck<T> {
    pub samples: usize,
    pub worst_ratio: T,
    /// `1 − ε`.
    pub bound: T,
}

/// Pushes random cone-boundary vectors `(1, ±γ)` through `Dα̃(la)` and
/// checks `|ṽ| ≤ (1−ε)γ|ũ|`.
pub fn cone_contraction_verify<T: Real>(
    params: &ConeParams<T>,
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    samples: usize,
    seed: u64,
) -> Result<ConeCheck<T>, ExtensionError> {
    let dir = line(spectrum, params.space)?;
    let la = scaled(&params.element, params.l as i64);
    let bound = T::one() - params.epsilon;
    let slack = T::one() + lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let x: Vec<T> = (0..beta.dim()).map(|_| lit(rng.gen::<f64>())).collect();
        let y: T = lit(rng.gen::<f64>());
        let v = if rng.gen::<bool>() { params.gamma } else { -params.gamma };
        let j = beta.evaluate_jet(&la, &x, &dir).apply(y);
        let ratio = (j.dx + j.dy * v).abs() / (params.gamma * params.multiplier.abs());
        worst = worst.max(ratio);
        if ratio > bound * slack {
            return Err(ExtensionError::ConeEscape { x: x.iter().map(|&v| to_f64(v)).collect(), y: to_f64(y), ratio: to_f64(ratio) });
        }
    }
    Ok(ConeCheck { samples, worst_ratio: worst, bound })
}

/// `Ẽᵢ(x, y) = span{(1, s(x, y))}` on a product grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SectionGrid<T> {
    pub space: usize,
    pub element: Vec<i64>,
    pub l: u32,
    pub dim: usize,
    pub grid: ProductGrid,
    /// Base node major, fiber index minor.
    pub slopes: Vec<T>,
    pub iterations: usize,
    /// Sup change of each sweep.
    pub deltas: Vec<T>,
    /// Sup over the grid of `|transform(s) − s|` for the returned field.
    pub residual: T,
    pub contraction_bound: T,
    /// Estimated error of linear fiber interpolation carried through the iteration.
    pub interpolation_error: T,
    /// Largest `|s|` over every iterate.
    pub sup_slope: T,
    /// `C′`.
    pub growth_constant: T,
    /// `C″`.
    pub transversality: T,
}

impl<T: Real> SectionGrid<T> {
    /// Slope at base node `node`, fiber point `y` (linear in `y`).
    pub fn slope_at(&self, node: usize, y: T) -> T {
        let m = self.grid.fiber;
        interpolate(&self.slopes[node * m..(node + 1) * m], y)
    }

    /// Ratios of successive sweep changes.
    pub fn observed_ratios(&self) -> Vec<T> {
        self.deltas.windows(2).filter(|w| w[0] > T::zero()).map(|w| w[1] / w[0]).collect()
    }
}

fn interpolate<T: Real>(row: &[T], y: T) -> T {
    let m = row.len();
    let t = frac(y) * int(m as i128);
    let f = t.floor();
    let w = t - f;
    let k0 = f.to_usize().unwrap_or(0) % m;
    row[k0] * (T::one() - w) + row[(k0 + 1) % m] * w
}

/// `x ↦ Mx mod N` on base node indices for an integer matrix `M`.
fn node_map(m: &crate::integer::IntMatrix, grid: &ProductGrid, dim: usize) -> Vec<usize> {
    let n = grid.base as i128;
    (0..grid.base_nodes(dim))
        .map(|flat| {
            let c: Vec<i128> = grid.base_index(flat, dim).into_iter().map(|v| v as i128).collect();
            let img: Vec<usize> = m.mul_vec(&c).into_iter().map(|v| v.rem_euclid(n) as usize).collect();
            grid.base_flat(&img)
        })
        .collect()
}

struct Pull<T> {
    k0: u32,
    w: T,
    c: T,
    d: T,
}

/// Graph transform `s ↦ (C_l + D_l·s∘α̃(−la))/A_l` iterated from `s ≡ 0`.
/// The base grid is invariant under `α(±la)`, so only the fiber is
/// interpolated.
pub fn invariant_distribution<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    params: &ConeParams<T>,
    grid: &ProductGrid,
    tol: T,
    max_iter: usize,
) -> Result<SectionGrid<T>, ExtensionError> {
    let i = params.space;
    let dir = line(spectrum, i)?;
    let dim = beta.dim();
    let la = scaled(&params.element, params.l as i64);
    let back = beta.action().element_matrix(&scaled(&la, -1))?;
    let src = node_map(&back, grid, dim);
    let m = grid.fiber;
    let mult = params.multiplier;
    let pulls: Vec<Pull<T>> = src
        .par_iter()
        .flat_map_iter(|&s| {
            let x = grid.base_point::<T>(s, dim);
            let jm = beta.evaluate_jet(&la, &x, &dir);
            let inv = jm.map().inverse();
            (0..m).map(move |k| {
                let yp = inv.apply(grid.fiber_point(k));
                let j = jm.apply(yp);
                let t = frac(yp) * int(m as i128);
                let f = t.floor();
                Pull { k0: (f.to_usize().unwrap_or(0) % m) as u32, w: t - f, c: j.dx, d: j.dy }
            })
        })
        .collect();
    let sweep = |s: &[T], out: &mut [T]| {
        out.par_chunks_mut(m).enumerate().for_each(|(b, row)| {
            let from = &s[src[b] * m..(src[b] + 1) * m];
            for (k, slot) in row.iter_mut().enumerate() {
                let p = &pulls[b * m + k];
                let k0 = p.k0 as usize;
                let v = from[k0] * (T::one() - p.w) + from[(k0 + 1) % m] * p.w;
                *slot = (p.c + p.d * v) / mult;
            }
        });
    };
    let sup_diff = |u: &[T], v: &[T]| u.par_iter().zip(v).map(|(a, b)| (*a - *b).abs()).reduce(T::zero, |a, b| a.max(b));
    let mut s = vec![T::zero(); src.len() * m];
    let mut next = s.clone();
    let mut deltas = Vec::new();
    let mut converged = false;
    let mut sup_slope = T::zero();
    while deltas.len() < max_iter {
        sweep(&s, &mut next);
        let delta = sup_diff(&s, &next);
        sup_slope = sup_slope.max(next.par_iter().map(|v| v.abs()).reduce(T::zero, |a, b| a.max(b)));
        std::mem::swap(&mut s, &mut next);
        deltas.push(delta);
        if delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ExtensionError::NoConvergence { max_iter, last_delta: to_f64(deltas.last().copied().unwrap_or(T::nan())) });
    }
    sweep(&s, &mut next);
    let residual = sup_diff(&s, &next);
    let bound = params.contraction();
    let curvature = s
        .par_chunks(m)
        .map(|row| {
            (0..m).fold(T::zero(), |acc, k| {
                let dd = row[(k + 1) % m] - lit::<T>(2.0) * row[k] + row[(k + m - 1) % m];
                acc.max(dd.abs())
            })
        })
        .reduce(T::zero, |a, b| a.max(b));
    let mut section = SectionGrid {
        space: i,
        element: params.element.clone(),
        l: params.l,
        dim,
        grid: *grid,
        iterations: deltas.len(),
        slopes: s,
        deltas,
        residual,
        contraction_bound: bound,
        interpolation_error: curvature / (lit::<T>(8.0) * (T::one() - bound)),
        sup_slope,
        growth_constant: T::one(),
        transversality: T::one(),
    };
    let (measured, _) = growth_ratios(&section, beta, spectrum, &growth_sample_set(beta.rank()), 8, 0x5ec7)?;
    let theory = (T::one() + sup_slope * sup_slope).sqrt();
    section.transversality = measured;
    section.growth_constant = if measured <= theory { theory * lit(1.0 + 1e-6) } else { measured * lit(1.01) };
    Ok(section)
}

/// Nonzero `b` with `‖b‖∞ ≤ 3`.
pub fn growth_sample_set(k: usize) -> Vec<Vec<i64>> {
    crate::lattice_action::lattice_cube(k, 3).into_iter().filter(|b| b.iter().any(|&v| v != 0)).collect()
}

/// `‖Dα̃(b)v‖·e^{−χᵢ(b)}` for unit `v ∈ Ẽᵢ` at base node `node`, fiber `y`.
fn growth_ratio<T: Real>(
    section: &SectionGrid<T>,
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    dir: &[T],
    b: &[i64],
    node: usize,
    y: T,
) -> T {
    let x = section.grid.base_point::<T>(node, section.dim);
    let s = section.slope_at(node, y);
    let j = beta.evaluate_jet(b, &x, dir).apply(y);
    let mu = multiplier(spectrum, section.space, b);
    let image = (mu * mu + (j.dx + j.dy * s).powi(2)).sqrt() / (T::one() + s * s).sqrt();
    image / spectrum.chi(section.space, b).exp()
}

/// Largest `max(r, 1/r)` over sampled ratios, with the worst witness.
fn growth_ratios<T: Real>(
    section: &SectionGrid<T>,
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    b_set: &[Vec<i64>],
    samples: usize,
    seed: u64,
) -> Result<(T, Option<(Vec<i64>, Vec<f64>)>), ExtensionError> {
    let dir = line(spectrum, section.space)?;
    let nodes = section.grid.base_nodes(section.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::one();
    let mut witness = None;
    for b in b_set {
        for _ in 0..samples {
            let node = rng.gen_range(0..nodes);
            let y: T = lit(rng.gen::<f64>());
            let r = growth_ratio(section, beta, spectrum, &dir, b, node, y);
            let dev = r.max(r.recip());
            if dev > worst {
                worst = dev;
                let mut point: Vec<f64> = section.grid.base_point::<T>(node, section.dim).iter().map(|&v| to_f64(v)).collect();
                point.push(to_f64(y));
                witness = Some((b.clone(), point));
            }
        }
    }
    Ok((worst, witness))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GrowthReport<T> {
    pub checked: usize,
    /// Largest `max(r, 1/r)` seen, to compare with `C′`.
    pub worst: T,
    pub constant: T,
}

/// Checks `C′⁻¹e^{χᵢ(b)} ≤ ‖Dα̃(b)v‖ ≤ C′e^{χᵢ(b)}` for unit `v ∈ Ẽᵢ`.
pub fn growth_verify<T: Real>(
    section: &SectionGrid<T>,
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    b_set: &[Vec<i64>],
    samples: usize,
    seed: u64,
) -> Result<GrowthReport<T>, ExtensionError> {
    let (worst, witness) = growth_ratios(section, beta, spectrum, b_set, samples, seed)?;
    if worst > section.growth_constant {
        let (b, point) = witness.expect("a deviation above 1 has a witness");
        return Err(ExtensionError::GrowthViolated { b, point });
    }
    Ok(GrowthReport { checked: b_set.len() * samples, worst, constant: section.growth_constant })
}

/// The bundle playing `E²` in [`dominated_rates`]; `E¹` is the fiber.
#[derive(Clone, Copy, Debug)]
pub enum Bundle<'a, T> {
    /// `Eᵢ × {0}`.
    Horizontal,
    Section(&'a SectionGrid<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DominatedSplittingReport<T> {
    pub element: Vec<i64>,
    pub e1: String,
    pub e2: String,
    pub sup_k: T,
    pub sup_alpha: T,
    pub sup_k_alpha_r: T,
    pub r: f64,
}

/// Grid suprema of `kₓ = ‖Dα̃|E¹‖/‖Dα̃|E²‖`, `αₓ = ‖(Dα̃|E¹)⁻¹‖` and
/// `kₓαₓʳ` for `α̃(a)`, with `E¹` the fiber and `E²` over the line `Eᵢ`.
pub fn dominated_rates<T: Real>(
    beta: &CircleCocycle<T>,
    spectrum: &LyapunovSpectrum<T>,
    i: usize,
    a: &[i64],
    e2: Bundle<'_, T>,
    r: f64,
    grid: &ProductGrid,
) -> Result<DominatedSplittingReport<T>, ExtensionError> {
    let dir = line(spectrum, i)?;
    let dim = beta.dim();
    let grid = match e2 {
        Bundle::Section(s) => s.grid,
        Bundle::Horizontal => *grid,
    };
    let mu = multiplier(spectrum, i, a);
    let rr: T = lit(r);
    let cells: Vec<(T, T, T)> = (0..grid.base_nodes(dim))
        .into_par_iter()
        .map(|flat| {
            let x = grid.base_point::<T>(flat, dim);
            let jm = beta.evaluate_jet(a, &x, &dir);
            let mut ks = Vec::with_capacity(grid.fiber);
            let mut als = Vec::with_capacity(grid.fiber);
            let mut kas = Vec::with_capacity(grid.fiber);
            for k in 0..grid.fiber {
                let y = grid.fiber_point::<T>(k);
                let j = jm.apply(y);
                let s = match e2 {
                    Bundle::Section(sec) => sec.slopes[flat * grid.fiber + k],
                    Bundle::Horizontal => T::zero(),
                };
                let g = (mu * mu + (j.dx + j.dy * s).powi(2)).sqrt() / (T::one() + s * s).sqrt();
                let kx = j.dy / g;
                let ax = j.dy.recip();
                ks.push(kx);
                als.push(ax);
                kas.push(kx * ax.powf(rr));
            }
            (inflated_max(&ks, ks.len(), 1), inflated_max(&als, als.len(), 1), inflated_max(&kas, kas.len(), 1))
        })
        .collect();
    let pick = |f: fn(&(T, T, T)) -> T| inflated_max(&cells.iter().map(f).collect::<Vec<T>>(), grid.base, dim);
    Ok(DominatedSplittingReport {
        element: a.to_vec(),
        e1: "fiber".into(),
        e2: match e2 {
            Bundle::Section(_) => "section".into(),
            Bundle::Horizontal => "horizontal".into(),
        },
        sup_k: pick(|c| c.0),
        sup_alpha: pick(|c| c.1),
        sup_k_alpha_r: pick(|c| c.2),
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::circle::solve;
    use crate::cocycle::FourierField;
    use crate::fixtures;
    use crate::lattice_action::lyapunov_spectrum;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn setup(eps: f64) -> (CircleCocycle<f64>, LyapunovSpectrum<f64>) {
        let b = if eps == 0.0 { CircleCocycle::identity(fixtures::cubic_pair()) } else { fixtures::coboundary_fixture(eps) };
        let s = lyapunov_spectrum(b.action()).unwrap();
        (b, s)
    }

    /// Space with the largest exponent under `a`.
    fn top(s: &LyapunovSpectrum<f64>, a: &[i64]) -> usize {
        (0..s.spaces.len()).max_by(|&i, &j| s.chi(i, a).partial_cmp(&s.chi(j, a)).unwrap()).unwrap()
    }

    #[test]
    fn identity_blocks() {
        let (b, s) = setup(0.0);
        let i = top(&s, &[1, 0]);
        for n in 0..4 {
            let bd = block_derivative(&b, &s, i, &[1, 0], &[0.1, 0.2, 0.3], 0.4, n).unwrap();
            assert_eq!(bd.c_block, 0.0);
            assert_eq!(bd.d_block, 1.0);
            if n == 0 {
                assert_eq!(bd.a_block, 1.0);
            }
        }
    }

    #[test]
    fn one_step_matches_chain_rule() {
        let eps = 0.05;
        let (b, s) = setup(eps);
        let a = [1, 0];
        let i = top(&s, &a);
        let e = s.spaces[i].directions[0].clone();
        let m = b.action().generator(0).to_f64();
        let mat = |v: &[f64]| -> Vec<f64> { (0..3).map(|r| (0..3).map(|c| m[r * 3 + c] * v[c]).sum()).collect() };
        // φ(x)(z) = z + ε sin(2πz) sin(2πx₁)/2π
        let phi = |x: &[f64], z: f64| z + eps * (TAU * z).sin() * (TAU * x[0]).sin() / TAU;
        let phi_z = |x: &[f64], z: f64| 1.0 + eps * (TAU * z).cos() * (TAU * x[0]).sin();
        let phi_x = |x: &[f64], z: f64, v: &[f64]| eps * (TAU * z).sin() * (TAU * x[0]).cos() * v[0];
        for &(x, y) in &[([0.1, 0.7, 0.3], 0.25), ([0.61, 0.05, 0.9], 0.8), ([0.33, 0.33, 0.5], 0.01)] {
            let mut z = y;
            for _ in 0..60 {
                z -= (phi(&x, z) - y) / phi_z(&x, z);
            }
            let ax = mat(&x);
            let d = phi_z(&ax, z) / phi_z(&x, z);
            let dz = -phi_x(&x, z, &e) / phi_z(&x, z);
            let c = phi_x(&ax, z, &mat(&e)) + phi_z(&ax, z) * dz;
            let bd = block_derivative(&b, &s, i, &a, &x, y, 1).unwrap();
            assert!((bd.d_block - d).abs() < 1e-10, "{} {}", bd.d_block, d);
            assert!((bd.c_block - c).abs() < 1e-10, "{} {}", bd.c_block, c);
        }
    }

    #[test]
    fn composition_law() {
        let (b, s) = setup(0.05);
        let a = [1, -1];
        let i = top(&s, &a);
        let x = [0.27, 0.61, 0.05];
        for total in 1..=6u32 {
            for n in 0..=total {
                let whole = block_derivative(&b, &s, i, &a, &x, 0.37, total).unwrap();
                let first = block_derivative(&b, &s, i, &a, &x, 0.37, n).unwrap();
                let second = block_derivative(&b, &s, i, &a, &first.image.0, first.image.1, total - n).unwrap();
                let (aa, cc, dd) = first.compose(&second);
                let scale = 1.0 + whole.c_block.abs() + whole.a_block.abs();
                assert!((aa - whole.a_block).abs() < 1e-9 * scale);
                assert!((cc - whole.c_block).abs() < 1e-9 * scale, "{total} {n}: {cc} {}", whole.c_block);
                assert!((dd - whole.d_block).abs() < 1e-9 * (1.0 + whole.d_block));
            }
        }
    }

    #[test]
    fn identity_cone() {
        let (b, s) = setup(0.0);
        let a = [1, 0];
        let i = top(&s, &a);
        let p = cone_params(&b, &s, i, &a, &ProductGrid::new(4, 16), 4).unwrap();
        assert_eq!(p.l, 1);
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.sup_c, 0.0);
        assert!((p.epsilon - (1.0 - (-s.chi(i, &a)).exp())).abs() < 1e-12);
        assert!(p.inequalities_hold());
        let check = cone_contraction_verify(&p, &b, &s, 200, 1).unwrap();
        assert!((check.worst_ratio - (-s.chi(i, &a)).exp()).abs() < 1e-12);
    }

    #[test]
    fn fixture_cone_and_oracle() {
        let (b, s) = setup(0.05);
        let a = [1, 0];
        let i = top(&s, &a);
        assert!((s.chi(i, &a) - 0.6310).abs() < 1e-3);
        let p = cone_params(&b, &s, i, &a, &ProductGrid::new(8, 32), 4).unwrap();
        assert!(p.inequalities_hold());
        assert!(p.sup_c > 0.0 && p.gamma.is_finite());
        // denser grid oracle for sup|C_l|
        let dir = s.spaces[i].directions[0].clone();
        let la = scaled(&a, p.l as i64);
        let (cells, _) = jet_cells(&b, &la, &dir, &ProductGrid::new(16, 64));
        let dense = cells.iter().fold(0.0f64, |m, &v| m.max(v));
        assert!(dense <= p.sup_c * (1.0 + 1e-3), "{dense} {}", p.sup_c);
        assert!(dense >= 0.8 * p.sup_c);
        let check = cone_contraction_verify(&p, &b, &s, 500, 2).unwrap();
        assert!(check.worst_ratio <= 1.0 - p.epsilon);
    }

    #[test]
    fn adversarial_cases() {
        let b = fixtures::expanding_constant::<f64>(0.9);
        let s = lyapunov_spectrum::<f64>(b.action()).unwrap();
        let a = [1, 0];
        let weak = (0..3).filter(|&i| s.chi(i, &a) > 0.0).min_by(|&i, &j| s.chi(i, &a).partial_cmp(&s.chi(j, &a)).unwrap()).unwrap();
        let grid = ProductGrid::new(4, 32);
        assert!(matches!(cone_params(&b, &s, weak, &a, &grid, 4), Err(ExtensionError::NotDominated { .. })));
        let (id, _) = setup(0.0);
        let p = cone_params(&id, &s, weak, &a, &grid, 4).unwrap();
        assert!(matches!(cone_contraction_verify(&p, &b, &s, 500, 3), Err(ExtensionError::ConeEscape { .. })));
    }

    #[test]
    fn identity_section_is_flat() {
        let (b, s) = setup(0.0);
        let a = [1, 0];
        let i = top(&s, &a);
        let grid = ProductGrid::new(4, 16);
        let p = cone_params(&b, &s, i, &a, &grid, 4).unwrap();
        let sec = invariant_distribution(&b, &s, &p, &grid, 1e-12, 10).unwrap();
        assert_eq!(sec.iterations, 1);
        assert!(sec.slopes.iter().all(|&v| v == 0.0));
        assert!((sec.growth_constant - 1.0).abs() < 1e-5);
        let g = growth_verify(&sec, &b, &s, &growth_sample_set(2), 4, 9).unwrap();
        assert!((g.worst - 1.0).abs() < 1e-12);
    }

    /// `s(x, y) = ∂ₑφ(x)(φ(x)⁻¹y)`: pushforward of the horizontal line field.
    fn pushforward(phi: &FourierField<f64>, e: &[f64], x: &[f64], y: f64) -> f64 {
        let (p, dp) = phi.at_jet(x, e);
        dp.eval(solve(&p, y))
    }

    #[test]
    fn coboundary_section_is_pushforward() {
        let (b, s) = setup(0.05);
        let phi = b.conjugator().unwrap().clone();
        let a = [1, 0];
        let i = top(&s, &a);
        let grid = ProductGrid::new(4, 512);
        let p = cone_params(&b, &s, i, &a, &grid, 4).unwrap();
        let tol = 1e-10;
        let sec = invariant_distribution(&b, &s, &p, &grid, tol, 200).unwrap();
        assert!(sec.residual < tol);
        assert!(sec.sup_slope <= p.gamma);
        let e = &s.spaces[i].directions[0];
        let mut worst: f64 = 0.0;
        for node in 0..grid.base_nodes(3) {
            let x = grid.base_point::<f64>(node, 3);
            for k in 0..grid.fiber {
                let y = grid.fiber_point::<f64>(k);
                worst = worst.max((sec.slopes[node * grid.fiber + k] - pushforward(&phi, e, &x, y)).abs());
            }
        }
        assert!(worst < 10.0 * tol + sec.interpolation_error, "{worst} {}", sec.interpolation_error);
        assert!(sec.interpolation_error < 1e-4);
        // contraction after burn-in
        for (w, r) in sec.deltas.windows(2).zip(sec.observed_ratios()).skip(3) {
            if w[0] > 1e-12 {
                assert!(r <= sec.contraction_bound, "{r} {}", sec.contraction_bound);
            }
        }
        let g = growth_verify(&sec, &b, &s, &growth_sample_set(2), 8, 11).unwrap();
        assert!(g.worst <= sec.growth_constant);
        let mut shrunk = sec.clone();
        shrunk.growth_constant = 1.0;
        assert!(matches!(growth_verify(&shrunk, &b, &s, &growth_sample_set(2), 8, 11), Err(ExtensionError::GrowthViolated { .. })));
    }

    #[test]
    fn joint_invariance() {
        let (b, s) = setup(0.05);
        let grid = ProductGrid::new(4, 256);
        let tol = 1e-10;
        let i = top(&s, &[1, 0]);
        let mut sections = Vec::new();
        for a in [[1, 0], [1, 1]] {
            assert!(s.chi(i, &a) > 0.0);
            let p = cone_params(&b, &s, i, &a, &grid, 4).unwrap();
            sections.push(invariant_distribution(&b, &s, &p, &grid, tol, 200).unwrap());
        }
        let allowance = 10.0 * tol + sections[0].interpolation_error + sections[1].interpolation_error;
        let diff = sections[0].slopes.iter().zip(&sections[1].slopes).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(diff < allowance, "{diff} {allowance}");
    }

    #[test]
    fn rates() {
        let (id, s) = setup(0.0);
        let a = [1, 0];
        let i = top(&s, &a);
        let grid = ProductGrid::new(4, 16);
        let rep = dominated_rates(&id, &s, i, &a, Bundle::Horizontal, 0.0, &grid).unwrap();
        assert!((rep.sup_k - (-s.chi(i, &a)).exp()).abs() < 1e-12);
        assert!((rep.sup_alpha - 1.0).abs() < 1e-12);
        assert_eq!(rep.sup_k, rep.sup_k_alpha_r);

        let (b, _) = setup(0.05);
        let p = cone_params(&b, &s, i, &a, &grid, 4).unwrap();
        let sec = invariant_distribution(&b, &s, &p, &grid, 1e-10, 200).unwrap();
        let rep = dominated_rates(&b, &s, i, &a, Bundle::Section(&sec), 1.0, &grid).unwrap();
        assert!(rep.sup_k_alpha_r < 1.0);
        assert!(rep.sup_k < 1.0);
    }

    #[test]
    fn section_roundtrip() {
        let (b, s) = setup(0.05);
        let a = [1, 0];
        let i = top(&s, &a);
        let grid = ProductGrid::new(4, 16);
        let p = cone_params(&b, &s, i, &a, &grid, 4).unwrap();
        let sec = invariant_distribution(&b, &s, &p, &grid, 1e-10, 200).unwrap();
        let text = serde_json::to_string(&sec).unwrap();
        let back: SectionGrid<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sec);
        assert!(back.slopes.iter().zip(&sec.slopes).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn f32_cone() {
        let b = fixtures::coboundary_fixture::<f32>(0.05);
        let s = lyapunov_spectrum::<f32>(b.action()).unwrap();
        let a = [1, 0];
        let i = (0..3).find(|&i| s.chi(i, &a) > 0.5).unwrap();
        let p = cone_params(&b, &s, i, &a, &ProductGrid::new(4, 16), 4).unwrap();
        assert!(p.inequalities_hold());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn composition_law_random(x in proptest::collection::vec(0.0f64..1.0, 3), y in 0.0f64..1.0, n in 0u32..4, m in 0u32..3) {
            let (b, s) = setup(0.05);
            let a = [1, 1];
            let i = top(&s, &a);
            let whole = block_derivative(&b, &s, i, &a, &x, y, n + m).unwrap();
            let first = block_derivative(&b, &s, i, &a, &x, y, n).unwrap();
            let second = block_derivative(&b, &s, i, &a, &first.image.0, first.image.1, m).unwrap();
            let (aa, cc, dd) = first.compose(&second);
            let scale = 1.0 + whole.c_block.abs() + whole.a_block.abs();
            prop_assert!((aa - whole.a_block).abs() < 1e-9 * scale);
            prop_assert!((cc - whole.c_block).abs() < 1e-9 * scale);
            prop_assert!((dd - whole.d_block).abs() < 1e-9 * (1.0 + dd.abs()));
        }

        #[test]
        fn cone_image_stays_inside(seed in 0u64..1000) {
            let (b, s) = setup(0.05);
            let a = [1, 0];
            let i = top(&s, &a);
            let p = cone_params(&b, &s, i, &a, &ProductGrid::new(4, 32), 4).unwrap();
            let check = cone_contraction_verify(&p, &b, &s, 20, seed).unwrap();
            prop_assert!(check.worst_ratio <= 1.0 - p.epsilon);
        }
    }
}
