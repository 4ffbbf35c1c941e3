//! Step generation from uniformly random permutations.
//!
//! A step of length `n` draws a uniform permutation `a_1..a_n` of `1..=n`
//! and sums `a_i · (cos 2πi/n, sin 2πi/n)`. The exhaustive routines at the
//! bottom walk all `n!` permutations for `n <= 8` and give the exact
//! support and moments that sampled output is checked against.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::rng::RngStream;

/// Largest `n` for which all `n!` permutations are enumerated.
pub const MAX_ENUMERATION_N: u32 = 8;

/// Coordinates are rounded to this many decimals when deduplicating support.
pub const SUPPORT_DECIMALS: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepVector {
    pub vx: f64,
    pub vy: f64,
}

impl StepVector {
    pub const ZERO: StepVector = StepVector { vx: 0.0, vy: 0.0 };

    pub fn new(vx: f64, vy: f64) -> Self {
        StepVector { vx, vy }
    }

    pub fn norm(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn scaled(self, a: f64) -> Self {
        StepVector::new(self.vx * a, self.vy * a)
    }
}

/// Unit directions `(cos 2πi/n, sin 2πi/n)` for `i = 1..=n`, each computed
/// directly from its angle.
#[derive(Debug, Clone)]
pub struct Directions {
    unit: Vec<(f64, f64)>,
}

impl Directions {
    pub fn new(n: u32) -> Self {
        let unit = (1..=n)
            .map(|i| {
                let theta = TAU * i as f64 / n as f64;
                (theta.cos(), theta.sin())
            })
            .collect();
        Directions { unit }
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    /// The step for a permutation already known to be valid.
    fn combine(&self, perm: &[u32]) -> StepVector {
        let mut x = NeumaierSum::default();
        let mut y = NeumaierSum::default();
        for (&a, &(c, s)) in perm.iter().zip(&self.unit) {
            x.add(a as f64 * c);
            y.add(a as f64 * s);
        }
        StepVector::new(x.value(), y.value())
    }
}

/// Cached direction tables for every length `1..=max_len`.
#[derive(Debug, Clone)]
pub struct StepGenerator {
    tables: Vec<Directions>,
    scratch: Vec<u32>,
}

impl StepGenerator {
    pub fn new(max_len: u32) -> Self {
        StepGenerator {
            tables: (1..=max_len).map(Directions::new).collect(),
            scratch: Vec::with_capacity(max_len as usize),
        }
    }

    pub fn sample(&mut self, n: u32, rng: &mut RngStream) -> Result<StepVector> {
        if n == 0 {
            return Err(Error::Domain("step length must be at least 1".into()));
        }
        if n as usize > self.tables.len() {
            self.tables
                .extend((self.tables.len() as u32 + 1..=n).map(Directions::new));
        }
        shuffle_into(n, rng, &mut self.scratch);
        Ok(self.tables[n as usize - 1].combine(&self.scratch))
    }
}

fn shuffle_into(n: u32, rng: &mut RngStream, out: &mut Vec<u32>) {
    out.clear();
    out.extend(1..=n);
    for i in (1..n as usize).rev() {
        let j = rng.index_up_to(i);
        out.swap(i, j);
    }
}

/// A uniformly random ordering of `1..=n` (Fisher–Yates).
pub fn uniform_permutation(n: u32, rng: &mut RngStream) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::Domain(
            "permutation length must be at least 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(n as usize);
    shuffle_into(n, rng, &mut out);
    Ok(out)
}

pub fn step_from_permutation(perm: &[u32]) -> Result<StepVector> {
    let n = perm.len();
    if n == 0 {
        return Err(Error::Validation("empty permutation".into()));
    }
    let mut seen = vec![false; n + 1];
    for &a in perm {
        let a = a as usize;
        if a == 0 || a > n || std::mem::replace(&mut seen[a], true) {
            return Err(Error::Validation(format!(
                "{perm:?} is not a permutation of 1..={n}"
            )));
        }
    }
    Ok(Directions::new(n as u32).combine(perm))
}

pub fn sample_step(n: u32, rng: &mut RngStream) -> Result<StepVector> {
    let perm = uniform_permutation(n, rng)?;
    Ok(Directions::new(n).combine(&perm))
}

/// Length one has a single fixed step `(1, 0)`; its mean is not zero.
pub fn is_degenerate(n: u32) -> bool {
    n == 1
}

/// Closed-form per-component step moments `(mean_x, var_x, var_y)`.
///
/// For `n >= 3` both variances equal `n²(n+1)/24`; small `n` are special
/// because the directions do not span the plane evenly.
pub fn closed_form_moments(n: u32) -> (f64, f64, f64) {
    match n {
        0 => (0.0, 0.0, 0.0),
        1 => (1.0, 0.0, 0.0),
        2 => (0.0, 1.0, 0.0),
        _ => {
            let n = n as f64;
            let v = n * n * (n + 1.0) / 24.0;
            (0.0, v, v)
        }
    }
}

fn check_enumerable(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    Ok(())
}

/// Calls `f` on every permutation of `1..=n` in lexicographic order.
pub fn for_each_permutation(n: u32, mut f: impl FnMut(&[u32])) {
    let mut p: Vec<u32> = (1..=n).collect();
    loop {
        f(&p);
        // Next lexicographic permutation.
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub vx: f64,
    pub vy: f64,
    pub count: u64,
}

/// Distinct step values for one length, with how many of the `n!`
/// permutations produce each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportTable {
    pub n: u32,
    pub entries: Vec<SupportEntry>,
}

impl SupportTable {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry a step rounds onto, if any.
    pub fn find(&self, step: StepVector) -> Option<usize> {
        let key = support_key(step);
        self.entries
            .binary_search_by(|e| support_key(StepVector::new(e.vx, e.vy)).cmp(&key))
            .ok()
    }
}

/// Rounded integer coordinates used as the dedupe key.
pub fn support_key(step: StepVector) -> (i64, i64) {
    let scale = 10f64.powi(SUPPORT_DECIMALS);
    (
        (step.vx * scale).round() as i64,
        (step.vy * scale).round() as i64,
    )
}

pub fn enumerate_support(n: u32) -> Result<SupportTable> {
    check_enumerable(n)?;
    let dirs = Directions::new(n);
    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for_each_permutation(n, |p| {
        *counts.entry(support_key(dirs.combine(p))).or_insert(0) += 1;
    });
    let scale = 10f64.powi(SUPPORT_DECIMALS);
    Ok(SupportTable {
        n,
        entries: counts
            .into_iter()
            .map(|((kx, ky), count)| SupportEntry {
                vx: kx as f64 / scale,
                vy: ky as f64 / scale,
                count,
            })
            .collect(),
    })
}

/// Exact step moments under the uniform distribution over permutations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u32,
    pub mean: StepVector,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
    pub degenerate: bool,
}

pub fn exact_moments(n: u32) -> Result<Moments> {
    check_enumerable(n)?;
    let dirs = Directions::new(n);
    let mut steps = Vec::new();
    for_each_permutation(n, |p| steps.push(dirs.combine(p)));
    let count = steps.len() as f64;
    let mx = steps.iter().map(|s| s.vx).collect::<NeumaierSum>().value() / count;
    let my = steps.iter().map(|s| s.vy).collect::<NeumaierSum>().value() / count;
    let central = |f: &dyn Fn(&StepVector) -> f64| {
        steps.iter().map(f).collect::<NeumaierSum>().value() / count
    };
    Ok(Moments {
        n,
        mean: StepVector::new(mx, my),
        var_x: central(&|s| (s.vx - mx) * (s.vx - mx)),
        var_y: central(&|s| (s.vy - my) * (s.vy - my)),
        cov_xy: central(&|s| (s.vx - mx) * (s.vy - my)),
        degenerate: is_degenerate(n),
    })
}

/// Average coefficient placed on each direction `i = 1..=n` over all
/// permutations.
pub fn direction_coefficient_means(n: u32) -> Result<Vec<f64>> {
    check_enumerable(n)?;
    let mut totals = vec![0u64; n as usize];
    let mut count = 0u64;
    for_each_permutation(n, |p| {
        count += 1;
        for (t, &a) in totals.iter_mut().zip(p) {
            *t += a as u64;
        }
    });
    Ok(totals
        .into_iter()
        .map(|t| t as f64 / count as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: StepVector, b: StepVector) -> bool {
        (a.vx - b.vx).abs() < 1e-12 && (a.vy - b.vy).abs() < 1e-12
    }

    #[test]
    fn hand_evaluated_steps() {
        assert!(close(
            step_from_permutation(&[1]).unwrap(),
            StepVector::new(1.0, 0.0)
        ));
        assert!(close(
            step_from_permutation(&[1, 2]).unwrap(),
            StepVector::new(1.0, 0.0)
        ));
        assert!(close(
            step_from_permutation(&[2, 1]).unwrap(),
            StepVector::new(-1.0, 0.0)
        ));
        let s = step_from_permutation(&[1, 2, 3]).unwrap();
        assert!(close(s, StepVector::new(1.5, -(3f64.sqrt()) / 2.0)));
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(step_from_permutation(&[]).is_err());
        assert!(step_from_permutation(&[1, 1]).is_err());
        assert!(step_from_permutation(&[0, 1]).is_err());
        assert!(step_from_permutation(&[1, 3]).is_err());
        assert!(uniform_permutation(0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn permutations_are_valid_and_deterministic() {
        let mut a = RngStream::new(11, 2);
        let mut b = RngStream::new(11, 2);
        for n in 1..=12 {
            let p = uniform_permutation(n, &mut a).unwrap();
            assert_eq!(p, uniform_permutation(n, &mut b).unwrap());
            let mut sorted = p.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (1..=n).collect::<Vec<_>>());
        }
        assert_eq!(uniform_permutation(1, &mut a).unwrap(), vec![1]);
    }

    #[test]
    fn lexicographic_enumeration() {
        let mut all = Vec::new();
        for_each_permutation(3, |p| all.push(p.to_vec()));
        assert_eq!(
            all,
            vec![
                vec![1, 2, 3],
                vec![1, 3, 2],
                vec![2, 1, 3],
                vec![2, 3, 1],
                vec![3, 1, 2],
                vec![3, 2, 1]
            ]
        );
    }

    #[test]
    fn small_supports() {
        let counts: Vec<usize> = (1..=4)
            .map(|n| enumerate_support(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 6, 16]);
        for n in 1..=6 {
            let t = enumerate_support(n).unwrap();
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(t.total(), fact);
        }
        assert!(matches!(enumerate_support(9), Err(Error::Capacity(_))));
    }

    #[test]
    fn small_moments() {
        let m2 = exact_moments(2).unwrap();
        assert!(close(m2.mean, StepVector::ZERO));
        assert!((m2.var_x - 1.0).abs() < 1e-12 && m2.var_y.abs() < 1e-12);
        assert!(m2.cov_xy.abs() < 1e-12);

        let m3 = exact_moments(3).unwrap();
        assert!((m3.var_x - 1.5).abs() < 1e-12 && (m3.var_y - 1.5).abs() < 1e-12);
        assert!(m3.cov_xy.abs() < 1e-12);

        let m4 = exact_moments(4).unwrap();
        assert!((m4.var_x - 10.0 / 3.0).abs() < 1e-12);
        assert!((m4.var_y - 10.0 / 3.0).abs() < 1e-12);

        let m1 = exact_moments(1).unwrap();
        assert!(m1.degenerate);
        assert!(close(m1.mean, StepVector::new(1.0, 0.0)));
    }

    #[test]
    fn closed_form_agrees_with_enumeration() {
        for n in 1..=8 {
            let m = exact_moments(n).unwrap();
            let (mx, vx, vy) = closed_form_moments(n);
            assert!((m.mean.vx - mx).abs() < 1e-9, "n = {n}");
            assert!((m.var_x - vx).abs() <= 1e-9 * vx.max(1.0), "n = {n}");
            assert!((m.var_y - vy).abs() <= 1e-9 * vy.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn generator_matches_free_function() {
        let mut gen = StepGenerator::new(3);
        let mut a = RngStream::new(9, 0);
        let mut b = RngStream::new(9, 0);
        for n in [1, 3, 5, 2, 7] {
            let s1 = gen.sample(n, &mut a).unwrap();
            let s2 = sample_step(n, &mut b).unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn magnitude_bound() {
        let mut rng = RngStream::new(3, 0);
        for n in 1..=20u32 {
            let bound = (n * (n + 1) / 2) as f64;
            for _ in 0..50 {
                let s = sample_step(n, &mut rng).unwrap();
                assert!(s.vx.is_finite() && s.vy.is_finite());
                assert!(s.norm() <= bound + 1e-9);
            }
        }
    }
}
