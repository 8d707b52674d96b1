//! Lyapunov hyperplane arrangement: coarse classes, Weyl chambers with
//! lattice representatives, and the structural predicates.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense::{dot, norm, orthonormalize};
use crate::lattice_action::{sup_norm, LyapunovSpectrum};
use crate::scalar::{int, lit, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error("every Lyapunov functional vanishes")]
    Degenerate,
    #[error("no lattice representative for chamber {chamber} with sup-norm at most {bound}")]
    RepresentativeNotFound { chamber: usize, bound: i64 },
    #[error("implication violated by corpus member {0}")]
    ImplicationViolated(usize),
}

/// Angle tolerance for proportionality tests.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoarseClass<T> {
    /// Indices into the spectrum's spaces.
    pub members: Vec<usize>,
    /// Unit normal pointing into the positive side.
    pub normal: Vec<T>,
    /// Index of `ker` in the hyperplane list.
    pub hyperplane: usize,
    /// `+1` if `normal` equals the canonical hyperplane normal, `−1` otherwise.
    pub orientation: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chamber {
    /// Sign of each canonical hyperplane normal on the chamber.
    pub signs: Vec<i8>,
    pub representative: Option<Vec<i64>>,
    pub sup_norm: Option<i64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicates {
    pub maximal: bool,
    pub cartan: bool,
    pub tns: bool,
    pub full: bool,
    pub resonance_free: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeylChamberDecomposition<T> {
    pub rank: usize,
    pub coarse_classes: Vec<CoarseClass<T>>,
    /// Sign-canonical unit normals (first nonzero coordinate positive).
    pub hyperplanes: Vec<Vec<T>>,
    pub chambers: Vec<Chamber>,
    pub predicates: Predicates,
}

fn unit<T: Real>(v: &[T]) -> Option<Vec<T>> {
    let n = norm(v);
    (n > T::zero()).then(|| v.iter().map(|&x| x / n).collect())
}

fn angle<T: Real>(u: &[T], v: &[T]) -> T {
    // robust for tiny angles: 2·asin(|u−v|/2)
    let d: T = u.iter().zip(v).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
    lit::<T>(2.0) * (d / lit(2.0)).min(T::one()).asin()
}

/// `u = c·v` with `c > 0`, up to the angle tolerance.
pub fn positively_proportional<T: Real>(u: &[T], v: &[T]) -> bool {
    match (unit(u), unit(v)) {
        (Some(a), Some(b)) => angle(&a, &b) < lit(ANGLE_TOL),
        _ => false,
    }
}

/// `u = c·v` with `c ≠ 0`.
pub fn proportional<T: Real>(u: &[T], v: &[T]) -> bool {
    let neg: Vec<T> = v.iter().map(|&x| -x).collect();
    positively_proportional(u, v) || positively_proportional(u, &neg)
}

fn canonical<T: Real>(n: &[T]) -> (Vec<T>, i8) {
    let first = n.iter().find(|x| x.abs() > lit(1e-12)).copied().unwrap_or(T::one());
    if first < T::zero() {
        (n.iter().map(|&x| -x).collect(), -1)
    } else {
        (n.to_vec(), 1)
    }
}

/// Partition of the nonzero functionals into positive-proportionality classes.
pub fn coarse_classes<T: Real>(spectrum: &LyapunovSpectrum<T>) -> Vec<Vec<usize>> {
    let f = spectrum.functionals();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, chi) in f.iter().enumerate() {
        if unit(chi).is_none() {
            continue;
        }
        match classes.iter_mut().find(|c| positively_proportional(&f[c[0]], chi)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

fn arrangement<T: Real>(spectrum: &LyapunovSpectrum<T>) -> Result<(Vec<CoarseClass<T>>, Vec<Vec<T>>), WeylError> {
    let f = spectrum.functionals();
    let groups = coarse_classes(spectrum);
    if groups.is_empty() {
        return Err(WeylError::Degenerate);
    }
    let mut hyperplanes: Vec<Vec<T>> = Vec::new();
    let mut classes = Vec::new();
    for members in groups {
        let normal = unit(&f[members[0]]).unwrap();
        let (canon, orientation) = canonical(&normal);
        let h = match hyperplanes.iter().position(|h| angle(h, &canon) < lit(ANGLE_TOL)) {
            Some(h) => h,
            None => {
                hyperplanes.push(canon);
                hyperplanes.len() - 1
            }
        };
        classes.push(CoarseClass { members, normal, hyperplane: h, orientation });
    }
    Ok((classes, hyperplanes))
}

/// Witness vectors, one per chamber of the arrangement restricted to the
/// subspace spanned by the orthonormal `basis`.
fn chamber_witnesses<T: Real>(basis: &[Vec<T>], normals: &[Vec<T>]) -> Vec<Vec<T>> {
    let tol: T = lit(1e-9);
    let project = |v: &[T]| -> Vec<T> {
        let mut p = vec![T::zero(); v.len()];
        for b in basis {
            let c = dot(v, b);
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi = *pi + c * *bi;
            }
        }
        p
    };
    let relevant: Vec<Vec<T>> = normals
        .iter()
        .map(|n| project(n))
        .filter(|p| norm(p) > tol)
        .map(|p| unit(&p).unwrap())
        .collect();
    if relevant.is_empty() {
        return vec![basis[0].clone()];
    }
    // restrict to the essential part
    let span = orthonormalize(&relevant, tol);
    if span.len() < basis.len() {
        return chamber_witnesses(&span, &relevant);
    }
    if span.len() == 1 {
        let e = span[0].clone();
        return vec![e.iter().map(|&x| -x).collect(), e];
    }
    let r = span.len();
    // rays: intersections of r−1 independent hyperplanes inside the span
    let mut rays: Vec<Vec<T>> = Vec::new();
    let m = relevant.len();
    let mut subset: Vec<usize> = (0..r - 1).collect();
    loop {
        let picked: Vec<Vec<T>> = subset.iter().map(|&i| relevant[i].clone()).collect();
        let q = orthonormalize(&picked, tol);
        if q.len() == r - 1 {
            // complement of q inside span
            let mut cand = orthonormalize(&[q.clone(), span.clone()].concat(), tol);
            let u = cand.split_off(r - 1).remove(0);
            for s in [T::one(), -T::one()] {
                let su: Vec<T> = u.iter().map(|&x| x * s).collect();
                if !rays.iter().any(|w| angle(w, &su) < lit(1e-7)) {
                    rays.push(su);
                }
            }
        }
        // next subset
        let mut i = r - 1;
        loop {
            if i == 0 {
                return finish_witnesses(rays, &relevant, &span);
            }
            i -= 1;
            if subset[i] < m - (r - 1 - i) {
                subset[i] += 1;
                for j in i + 1..r - 1 {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn finish_witnesses<T: Real>(rays: Vec<Vec<T>>, relevant: &[Vec<T>], span: &[Vec<T>]) -> Vec<Vec<T>> {
    let tol: T = lit(1e-9);
    let mut out = Vec::new();
    for u in rays {
        let through: Vec<Vec<T>> = relevant.iter().filter(|n| dot(n, &u).abs() <= tol).cloned().collect();
        let away = relevant
            .iter()
            .map(|n| dot(n, &u).abs())
            .filter(|&x| x > tol)
            .fold(T::one(), |a, b| a.min(b));
        // orthonormal basis of span ∩ u⊥
        let mut sub = orthonormalize(&[vec![u.clone()], span.to_vec()].concat(), tol);
        sub.remove(0);
        for w in chamber_witnesses(&sub, &through) {
            let w = unit(&w).unwrap();
            let delta = away * lit(0.5);
            out.push(u.iter().zip(&w).map(|(&a, &b)| a + delta * b).collect());
        }
    }
    out
}

fn signs_of<T: Real>(hyperplanes: &[Vec<T>], x: &[T]) -> Option<Vec<i8>> {
    let scale = norm(x);
    hyperplanes
        .iter()
        .map(|h| {
            let v = dot(h, x);
            if v.abs() <= lit::<T>(ANGLE_TOL) * scale {
                None
            } else if v > T::zero() {
                Some(1)
            } else {
                Some(-1)
            }
        })
        .collect()
}

fn standard_basis<T: Real>(k: usize) -> Vec<Vec<T>> {
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

/// Chambers as sign vectors with witnesses, without lattice representatives.
pub fn enumerate_chambers<T: Real>(spectrum: &LyapunovSpectrum<T>) -> Result<WeylChamberDecomposition<T>, WeylError> {
    let (coarse_classes, hyperplanes) = arrangement(spectrum)?;
    let k = spectrum.rank;
    let mut seen: Vec<Vec<i8>> = Vec::new();
    for w in chamber_witnesses(&standard_basis::<T>(k), &hyperplanes) {
        if let Some(s) = signs_of(&hyperplanes, &w) {
            if !seen.contains(&s) {
                seen.push(s);
            }
        }
    }
    seen.sort();
    seen.reverse();
    let chambers = seen.into_iter().map(|signs| Chamber { signs, representative: None, sup_norm: None }).collect();
    let mut d = WeylChamberDecomposition { rank: k, coarse_classes, hyperplanes, chambers, predicates: Predicates::default() };
    d.predicates = check_properties(spectrum, &d);
    Ok(d)
}

/// Visits the lattice points with sup-norm exactly `s` in lexicographic
/// order until `f` returns `true`; reports whether it stopped early.
fn visit_shell(k: usize, s: i64, f: &mut impl FnMut(&[i64]) -> bool) -> bool {
    fn rec(prefix: &mut Vec<i64>, k: usize, s: i64, on_shell: bool, f: &mut impl FnMut(&[i64]) -> bool) -> bool {
        if prefix.len() == k {
            return on_shell && f(prefix);
        }
        let left = k - prefix.len();
        for x in -s..=s {
            let hit = on_shell || x.abs() == s;
            // the remaining coordinates must reach the shell themselves
            if !hit && left == 1 {
                continue;
            }
            prefix.push(x);
            let stop = rec(prefix, k, s, hit, f);
            prefix.pop();
            if stop {
                return true;
            }
        }
        false
    }
    rec(&mut Vec::with_capacity(k), k, s, false, f)
}

/// Visits nonzero lattice points by increasing sup-norm, lexicographic
/// within a shell.
fn visit_lattice(k: usize, bound: i64, mut f: impl FnMut(&[i64]) -> bool) {
    for s in 1..=bound {
        if visit_shell(k, s, &mut f) {
            return;
        }
    }
}

fn lattice_signs<T: Real>(hyperplanes: &[Vec<T>], a: &[i64]) -> Option<Vec<i8>> {
    let af: Vec<T> = a.iter().map(|&x| int(x as i128)).collect();
    signs_of(hyperplanes, &af)
}

/// Enumerates chambers and attaches minimal sup-norm representatives.
pub fn chambers<T: Real>(spectrum: &LyapunovSpectrum<T>, search_bound: i64) -> Result<WeylChamberDecomposition<T>, WeylError> {
    let mut d = enumerate_chambers(spectrum)?;
    let index: HashMap<Vec<i8>, usize> = d.chambers.iter().enumerate().map(|(i, c)| (c.signs.clone(), i)).collect();
    let mut remaining = d.chambers.len();
    let hyperplanes = d.hyperplanes.clone();
    visit_lattice(d.rank, search_bound, |a| {
        if let Some(&i) = lattice_signs(&hyperplanes, a).and_then(|s| index.get(&s)) {
            let c = &mut d.chambers[i];
            if c.representative.is_none() {
                c.sup_norm = Some(sup_norm(a));
                c.representative = Some(a.to_vec());
                remaining -= 1;
            }
        }
        remaining == 0
    });
    if let Some(i) = d.chambers.iter().position(|c| c.representative.is_none()) {
        return Err(WeylError::RepresentativeNotFound { chamber: i, bound: search_bound });
    }
    Ok(d)
}

/// Minimal sup-norm lattice point in a chamber, ties lexicographic.
pub fn regular_representative<T: Real>(
    decomposition: &WeylChamberDecomposition<T>,
    chamber: usize,
    bound: i64,
) -> Result<Vec<i64>, WeylError> {
    let want = &decomposition.chambers[chamber].signs;
    let mut found = None;
    visit_lattice(decomposition.rank, bound, |a| {
        if lattice_signs(&decomposition.hyperplanes, a).as_ref() == Some(want) {
            found = Some(a.to_vec());
        }
        found.is_some()
    });
    found.ok_or(WeylError::RepresentativeNotFound { chamber, bound })
}

/// Upper bound on the number of chambers of `m` central hyperplanes in ℝᵏ.
pub fn max_chambers(m: usize, k: usize) -> usize {
    fn binom(n: usize, r: usize) -> usize {
        if r > n {
            return 0;
        }
        (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
    }
    if m == 0 {
        return 1;
    }
    2 * (0..k).map(|i| binom(m - 1, i)).sum::<usize>()
}

fn rank_of<T: Real>(vs: &[Vec<T>]) -> usize {
    orthonormalize(vs, lit(1e-9)).len()
}

/// The five structural flags, decided from the finite arrangement data.
pub fn check_properties<T: Real>(spectrum: &LyapunovSpectrum<T>, d: &WeylChamberDecomposition<T>) -> Predicates {
    let f = spectrum.functionals();
    let k = spectrum.rank;
    let nclass = d.coarse_classes.len();
    let nh = d.hyperplanes.len();

    let general_position = k < 3
        || (0..nh).all(|i| {
            (i + 1..nh).all(|j| (j + 1..nh).all(|l| rank_of(&[d.hyperplanes[i].clone(), d.hyperplanes[j].clone(), d.hyperplanes[l].clone()]) == 3))
        });
    let maximal = nclass == k + 1 && nh == k + 1 && general_position;

    let cartan = d
        .coarse_classes
        .iter()
        .all(|c| c.members.iter().map(|&i| spectrum.spaces[i].dim).sum::<usize>() == 1);

    let nonzero: Vec<usize> = (0..f.len()).filter(|&i| unit(&f[i]).is_some()).collect();
    let tns = nonzero.iter().all(|&i| {
        nonzero.iter().all(|&j| {
            let neg: Vec<T> = f[j].iter().map(|&x| -x).collect();
            !positively_proportional(&f[i], &neg)
        })
    });

    let resonance_free = nonzero.iter().all(|&i| {
        nonzero.iter().all(|&j| {
            if positively_proportional(&f[i], &f[j]) {
                return true;
            }
            let diff: Vec<T> = f[i].iter().zip(&f[j]).map(|(a, b)| *a - *b).collect();
            nonzero.iter().all(|&l| !proportional(&diff, &f[l]))
        })
    });

    let full = nh >= 2
        && (0..nclass).all(|c| {
            d.chambers.iter().any(|ch| {
                d.coarse_classes.iter().enumerate().all(|(o, cl)| {
                    let s = ch.signs[cl.hyperplane] * cl.orientation;
                    if o == c {
                        s > 0
                    } else {
                        s < 0
                    }
                })
            })
        });

    Predicates { maximal, cartan, tns, full, resonance_free }
}

/// Chamber where class `c` is the only positive class, if any.
pub fn full_chamber<T: Real>(d: &WeylChamberDecomposition<T>, c: usize) -> Option<usize> {
    d.chambers.iter().position(|ch| {
        d.coarse_classes.iter().enumerate().all(|(o, cl)| {
            let s = ch.signs[cl.hyperplane] * cl.orientation;
            if o == c {
                s > 0
            } else {
                s < 0
            }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub flags: Vec<Predicates>,
    pub chamber_counts: Vec<usize>,
    pub violations: Vec<usize>,
}

/// Checks maximal ⇒ full and full ⇒ (TNS ∧ resonance-free) on every member.
pub fn implication_suite<T: Real>(corpus: &[LyapunovSpectrum<T>]) -> Result<ImplicationReport, WeylError> {
    let results: Vec<Result<(Predicates, usize), WeylError>> = corpus
        .par_iter()
        .map(|s| enumerate_chambers(s).map(|d| (d.predicates, d.chambers.len())))
        .collect();
    let mut flags = Vec::new();
    let mut chamber_counts = Vec::new();
    let mut violations = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (p, n) = r?;
        if (p.maximal && !p.full) || (p.full && !(p.tns && p.resonance_free)) {
            violations.push(i);
        }
        flags.push(p);
        chamber_counts.push(n);
    }
    if let Some(&i) = violations.first() {
        return Err(WeylError::ImplicationViolated(i));
    }
    Ok(ImplicationReport { flags, chamber_counts, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice_action::{lyapunov_spectrum, LyapunovSpace};
    use proptest::prelude::*;

    fn synthetic(functionals: &[Vec<f64>]) -> LyapunovSpectrum<f64> {
        LyapunovSpectrum {
            rank: functionals[0].len(),
            dim: functionals.len(),
            spaces: functionals
                .iter()
                .map(|f| LyapunovSpace { functional: f.clone(), dim: 1, directions: vec![], blocks: vec![], kappa: 1.0 })
                .collect(),
            growth_constant: 1.0,
            deviation_exponent: 0,
        }
    }

    // Oracle: brute-force sign vectors on a fine angular sweep (k = 2).
    fn sweep_count(f: &[Vec<f64>]) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        for t in 0..200_000 {
            let th = t as f64 / 200_000.0 * std::f64::consts::TAU;
            let x = [th.cos(), th.sin()];
            let s: Vec<i8> = f.iter().map(|c| if c[0] * x[0] + c[1] * x[1] > 0.0 { 1 } else { -1 }).collect();
            if f.iter().all(|c| (c[0] * x[0] + c[1] * x[1]).abs() > 1e-9) {
                seen.insert(s);
            }
        }
        seen.len()
    }

    #[test]
    fn cubic_pair_is_maximal_with_six_chambers() {
        let s = lyapunov_spectrum::<f64>(&fixtures::cubic_pair()).unwrap();
        assert_eq!(coarse_classes(&s).len(), 3);
        let d = chambers(&s, 4).unwrap();
        assert_eq!(d.chambers.len(), 6);
        assert_eq!(sweep_count(&s.functionals()), 6);
        let p = d.predicates;
        assert!(p.maximal && p.cartan && p.tns && p.full && p.resonance_free, "{p:?}");
        for c in &d.chambers {
            let a = c.representative.as_ref().unwrap();
            assert_eq!(lattice_signs(&d.hyperplanes, a).as_ref(), Some(&c.signs));
            assert_eq!(c.sup_norm, Some(1));
        }
        let ch = d
            .chambers
            .iter()
            .position(|c| Some(&c.signs) == lattice_signs(&d.hyperplanes, &[1, 0]).as_ref())
            .unwrap();
        // (1,−1) shares the chamber of (1,0) and precedes it lexicographically
        assert_eq!(lattice_signs(&d.hyperplanes, &[1, -1]), lattice_signs(&d.hyperplanes, &[1, 0]));
        assert_eq!(regular_representative(&d, ch, 3).unwrap(), vec![1, -1]);
        let only_10 = d.chambers.iter().position(|c| c.representative == Some(vec![0, 1])).unwrap();
        assert_eq!(regular_representative(&d, only_10, 1).unwrap(), vec![0, 1]);
    }

    #[test]
    fn proportionality_classes() {
        let s = synthetic(&[vec![1.0, 0.5], vec![2.0, 1.0]]);
        assert_eq!(coarse_classes(&s), vec![vec![0, 1]]);
        let s = synthetic(&[vec![1.0, 0.5], vec![-1.0, -0.5]]);
        assert_eq!(coarse_classes(&s).len(), 2);
    }

    #[test]
    fn single_functional_two_chambers() {
        let s = lyapunov_spectrum::<f64>(&fixtures::cat_map()).unwrap();
        let d = chambers(&s, 2).unwrap();
        assert_eq!(d.chambers.len(), 2);
        let pos = d.chambers.iter().position(|c| c.signs == vec![1]).unwrap();
        assert_eq!(regular_representative(&d, pos, 2).unwrap(), vec![1]);
        // one hyperplane only
        assert!(!d.predicates.full);
        assert!(!d.predicates.tns);
    }

    #[test]
    fn cat_product_flags() {
        let s = lyapunov_spectrum::<f64>(&fixtures::cat_product()).unwrap();
        let d = chambers(&s, 3).unwrap();
        assert_eq!(d.hyperplanes.len(), 2);
        assert_eq!(d.chambers.len(), 4);
        assert!(!d.predicates.tns);
        assert!(!d.predicates.full);
        let rep = implication_suite(&[s]).unwrap();
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn irrational_wall_needs_larger_bound() {
        // walls at slopes near 1: the thin chamber between them has no small lattice point
        let s = synthetic(&[vec![1.0, -1.0], vec![-1.0, 1.0 + 1e-2], vec![0.3, 0.7]]);
        let d = enumerate_chambers(&s).unwrap();
        let thin = (0..d.chambers.len())
            .find(|&c| regular_representative(&d, c, 1).is_err())
            .expect("a thin chamber exists");
        assert_eq!(
            regular_representative(&d, thin, 1),
            Err(WeylError::RepresentativeNotFound { chamber: thin, bound: 1 })
        );
        assert!(regular_representative(&d, thin, 200).is_ok());
    }

    #[test]
    fn rank_three_product_counts() {
        // three independent coordinate functionals and their negatives: octants
        let s = synthetic(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![-1.0, -1.0, -1.0],
        ]);
        let d = enumerate_chambers(&s).unwrap();
        // k + 1 hyperplanes in general position in ℝ³
        assert_eq!(d.chambers.len(), 14);
        assert!(d.predicates.maximal && d.predicates.full);
    }

    #[test]
    fn max_chamber_formula() {
        assert_eq!(max_chambers(3, 2), 6);
        assert_eq!(max_chambers(4, 3), 14);
        assert_eq!(max_chambers(1, 1), 2);
        assert_eq!(max_chambers(2, 2), 4);
    }

    fn functional_set(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, k), 2..6)
            .prop_filter("nonzero", |fs| fs.iter().all(|f| f.iter().map(|x| x * x).sum::<f64>() > 0.1))
    }

    // Spectra of actual unimodular actions satisfy Σχᵢ = 0 (unit dimensions).
    fn conserved_set(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        functional_set(k)
            .prop_map(move |mut fs| {
                let last: Vec<f64> = (0..k).map(|j| -fs.iter().map(|f| f[j]).sum::<f64>()).collect();
                fs.push(last);
                fs
            })
            .prop_filter("nonzero", |fs| fs.last().unwrap().iter().map(|x| x * x).sum::<f64>() > 0.1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chamber_count_within_bound(fs in functional_set(2)) {
            let s = synthetic(&fs);
            let d = enumerate_chambers(&s).unwrap();
            prop_assert!(d.chambers.len() <= max_chambers(d.hyperplanes.len(), 2));
            prop_assert_eq!(d.chambers.len(), sweep_count(&s.functionals()));
        }

        #[test]
        fn implications_hold_rank_two(fs in conserved_set(2)) {
            let s = synthetic(&fs);
            prop_assert!(implication_suite(&[s]).is_ok());
        }

        #[test]
        fn chamber_count_rank_three(fs in functional_set(3)) {
            let s = synthetic(&fs);
            let d = enumerate_chambers(&s).unwrap();
            prop_assert!(d.chambers.len() <= max_chambers(d.hyperplanes.len(), 3));
            if d.predicates.maximal {
                prop_assert_eq!(d.chambers.len(), 14);
            }
        }

        #[test]
        fn properties_invariant_under_scaling_and_relabeling(fs in functional_set(2), c in 0.1f64..10.0, rot in 0usize..5) {
            let s = synthetic(&fs);
            let mut g = fs.clone();
            g[0] = g[0].iter().map(|x| x * c).collect();
            let r = rot % g.len();
            g.rotate_left(r);
            let t = synthetic(&g);
            let p = enumerate_chambers(&s).unwrap().predicates;
            let q = enumerate_chambers(&t).unwrap().predicates;
            prop_assert_eq!(p, q);
        }

        #[test]
        fn implications_hold(fs in conserved_set(3)) {
            let s = synthetic(&fs);
            prop_assert!(implication_suite(&[s]).is_ok());
        }
    }
}
