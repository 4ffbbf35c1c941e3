//! Ensemble statistics and goodness-of-fit measures.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum};
use crate::rng::RngStream;
use crate::rvg::StepVector;
use crate::walk::{Point, WalkPath};

/// Coefficient of the asymptotic one-sample KS critical value at α = 0.01.
pub const KS_COEFF_ALPHA_01: f64 = 1.63;

pub const SUMMARY_CSV_HEADER: &str = "t,mean_x,mean_y,var_x,var_y";

/// Per-time mean and unbiased variance across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_y: Vec<f64>,
    pub path_count: usize,
}

impl EnsembleSummary {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(SUMMARY_CSV_HEADER);
        out.push('\n');
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.times[k], self.mean_x[k], self.mean_y[k], self.var_x[k], self.var_y[k]
            )
            .unwrap();
        }
        out
    }

    /// Multiplies every variance by `a²`, as if every path were scaled by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        let a2 = a * a;
        EnsembleSummary {
            times: self.times.clone(),
            mean_x: self.mean_x.iter().map(|m| m * a).collect(),
            mean_y: self.mean_y.iter().map(|m| m * a).collect(),
            var_x: self.var_x.iter().map(|v| v * a2).collect(),
            var_y: self.var_y.iter().map(|v| v * a2).collect(),
            path_count: self.path_count,
        }
    }
}

/// Sample mean and unbiased sample variance, two-pass with compensated sums.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = numeric::sum(values.iter().copied()) / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = numeric::sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, ss / (m - 1.0))
}

pub fn moment_series(paths: &[WalkPath]) -> Result<EnsembleSummary> {
    if paths.len() < 2 {
        return Err(Error::Domain(format!(
            "moment series needs at least 2 paths, got {}",
            paths.len()
        )));
    }
    let len = paths[0].len();
    if paths.iter().any(|p| p.len() != len) {
        return Err(Error::Validation("paths differ in length".into()));
    }
    let mut s = EnsembleSummary {
        times: paths[0].times.clone(),
        mean_x: Vec::with_capacity(len),
        mean_y: Vec::with_capacity(len),
        var_x: Vec::with_capacity(len),
        var_y: Vec::with_capacity(len),
        path_count: paths.len(),
    };
    let mut xs = vec![0.0; paths.len()];
    let mut ys = vec![0.0; paths.len()];
    for k in 0..len {
        for (j, p) in paths.iter().enumerate() {
            xs[j] = p.positions[k].x;
            ys[j] = p.positions[k].y;
        }
        let (mx, vx) = mean_and_variance(&xs);
        let (my, vy) = mean_and_variance(&ys);
        s.mean_x.push(mx);
        s.mean_y.push(my);
        s.var_x.push(vx);
        s.var_y.push(vy);
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub r2: f64,
}

/// Least squares `y = slope · t` through the origin. `r2` uses the
/// uncentered total sum of squares, the usual convention for a model
/// without intercept.
pub fn fit_through_origin(t: &[f64], y: &[f64]) -> Result<LinearFit> {
    if t.len() != y.len() {
        return Err(Error::Validation("series lengths differ".into()));
    }
    let stt = numeric::sum(t.iter().map(|a| a * a));
    let syy = numeric::sum(y.iter().map(|a| a * a));
    if stt == 0.0 {
        return Err(Error::Domain("all time points are zero".into()));
    }
    let slope = numeric::sum(t.iter().zip(y).map(|(a, b)| a * b)) / stt;
    if syy == 0.0 {
        return Ok(LinearFit { slope, r2: 1.0 });
    }
    let sse = numeric::sum(t.iter().zip(y).map(|(a, b)| {
        let r = b - slope * a;
        r * r
    }));
    Ok(LinearFit {
        slope,
        r2: 1.0 - sse / syy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceLinearity {
    pub slope_x: f64,
    pub slope_y: f64,
    pub r2_x: f64,
    pub r2_y: f64,
}

/// How well `var(t)` follows a line through the origin, per component.
pub fn variance_linearity(summary: &EnsembleSummary) -> Result<VarianceLinearity> {
    if summary.len() < 10 {
        return Err(Error::Domain(format!(
            "variance linearity needs at least 10 time points, got {}",
            summary.len()
        )));
    }
    let all_zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
    if all_zero(&summary.var_x) && all_zero(&summary.var_y) {
        return Err(Error::Domain("variance is zero everywhere".into()));
    }
    let fx = fit_through_origin(&summary.times, &summary.var_x)?;
    let fy = fit_through_origin(&summary.times, &summary.var_y)?;
    Ok(VarianceLinearity {
        slope_x: fx.slope,
        slope_y: fy.slope,
        r2_x: fx.r2,
        r2_y: fy.r2,
    })
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::Domain(
            "correlation needs two equally long samples of at least 3 values".into(),
        ));
    }
    let (ma, va) = mean_and_variance(a);
    let (mb, vb) = mean_and_variance(b);
    if va == 0.0 || vb == 0.0 {
        return Err(Error::Domain("correlation of a constant sample".into()));
    }
    let n = a.len() as f64;
    let cov = numeric::sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb))) / (n - 1.0);
    Ok(cov / (va * vb).sqrt())
}

/// Largest absolute correlation between adjacent, non-overlapping increment
/// blocks.
///
/// For each lag `L`, a path is cut into blocks `[2jL, (2j+1)L)` and
/// `[(2j+1)L, (2j+2)L)`; the increment over each block is paired with the
/// next one. Pairs from all paths are pooled and one Pearson correlation is
/// computed per lag and component.
pub fn increment_independence(paths: &[WalkPath], lags: &[usize]) -> Result<f64> {
    if paths.is_empty() || lags.is_empty() {
        return Err(Error::Domain("need at least one path and one lag".into()));
    }
    let steps = paths
        .iter()
        .map(|p| p.len().saturating_sub(1))
        .min()
        .unwrap();
    let mut worst: f64 = 0.0;
    for &lag in lags {
        if lag == 0 || 2 * lag > steps {
            return Err(Error::Domain(format!(
                "lag {lag} does not fit two blocks into {steps} steps"
            )));
        }
        let pairs_per_path = steps / (2 * lag);
        let mut first = [Vec::new(), Vec::new()];
        let mut second = [Vec::new(), Vec::new()];
        for p in paths {
            for j in 0..pairs_per_path {
                let a = 2 * j * lag;
                let d1 = diff(p.positions[a + lag], p.positions[a]);
                let d2 = diff(p.positions[a + 2 * lag], p.positions[a + lag]);
                first[0].push(d1.vx);
                first[1].push(d1.vy);
                second[0].push(d2.vx);
                second[1].push(d2.vy);
            }
        }
        let mut informative = false;
        for c in 0..2 {
            let var_a = mean_and_variance(&first[c]).1;
            let var_b = mean_and_variance(&second[c]).1;
            if var_a == 0.0 && var_b == 0.0 {
                // A component that never moves carries no information,
                // e.g. y for walks whose steps all lie on the x axis.
                continue;
            }
            informative = true;
            worst = worst.max(pearson(&first[c], &second[c])?.abs());
        }
        if !informative {
            return Err(Error::Domain(format!(
                "increments over lag {lag} have no variance"
            )));
        }
    }
    Ok(worst)
}

fn diff(a: Point, b: Point) -> StepVector {
    StepVector::new(a.x - b.x, a.y - b.y)
}

/// One-sample Kolmogorov–Smirnov distance of `samples / known_sd` from the
/// standard normal.
pub fn increment_normality(samples: &[f64], known_sd: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS statistic of an empty sample".into()));
    }
    if !(known_sd > 0.0 && known_sd.is_finite()) {
        return Err(Error::Domain(format!(
            "standard deviation must be positive, got {known_sd}"
        )));
    }
    let mut z: Vec<f64> = samples.iter().map(|s| s / known_sd).collect();
    z.sort_by(f64::total_cmp);
    Ok(ks_statistic_sorted(&z, numeric::normal_cdf))
}

/// KS distance of a sorted sample from a continuous CDF.
pub fn ks_statistic_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_critical_value_01(m: usize) -> f64 {
    KS_COEFF_ALPHA_01 / (m as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.max - self.min) / self.counts.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        if self.max == self.min {
            return self.min;
        }
        self.min + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Equal-width bins over `[min, max]`; the maximum lands in the last bin.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Domain("histogram of an empty sample".into()));
    }
    if bin_count < 1 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("histogram input is not finite".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0u64; bin_count];
    let width = (max - min) / bin_count as f64;
    for &v in values {
        let i = if width > 0.0 {
            (((v - min) / width) as usize).min(bin_count - 1)
        } else {
            0
        };
        counts[i] += 1;
    }
    Ok(Histogram { min, max, counts })
}

/// Mean and variance summaries over growing windows `[0, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub end: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    /// Largest per-time variance inside the window.
    pub max_var_x: f64,
    pub max_var_y: f64,
}

/// For each window end `w`, averages the per-time means and variances over
/// time indices `0..w`.
pub fn cumulative_windows(summary: &EnsembleSummary, ends: &[usize]) -> Result<Vec<WindowSummary>> {
    ends.iter()
        .map(|&w| {
            if w == 0 || w > summary.len() {
                return Err(Error::Domain(format!(
                    "window [0, {w}) does not fit a series of {} points",
                    summary.len()
                )));
            }
            let avg = |v: &[f64]| numeric::sum(v[..w].iter().copied()) / w as f64;
            let peak = |v: &[f64]| v[..w].iter().copied().fold(0.0, f64::max);
            Ok(WindowSummary {
                end: w,
                mean_x: avg(&summary.mean_x),
                mean_y: avg(&summary.mean_y),
                var_x: avg(&summary.var_x),
                var_y: avg(&summary.var_y),
                max_var_x: peak(&summary.var_x),
                max_var_y: peak(&summary.var_y),
            })
        })
        .collect()
}

/// Walks with i.i.d. standard normal increments in each component, scaled to
/// unit variance at `t = 1`. Reference ensemble for the Wiener checks.
pub fn gaussian_ensemble(paths: usize, steps: usize, seed: u64) -> Vec<WalkPath> {
    let scale = 1.0 / (steps as f64).sqrt();
    (0..paths)
        .map(|j| {
            let mut rng = RngStream::new(seed, j as u64);
            let mut positions = Vec::with_capacity(steps + 1);
            let mut increments = Vec::with_capacity(steps);
            let mut here = Point::default();
            positions.push(here);
            for _ in 0..steps {
                let d =
                    StepVector::new(rng.standard_normal() * scale, rng.standard_normal() * scale);
                here = Point {
                    x: here.x + d.vx,
                    y: here.y + d.vy,
                };
                increments.push(d);
                positions.push(here);
            }
            WalkPath {
                positions,
                increments,
                step_lengths: vec![0; steps],
                times: (0..=steps).map(|k| k as f64 / steps as f64).collect(),
            }
        })
        .collect()
}

/// Endpoint coordinates of every path.
pub fn endpoints(paths: &[WalkPath]) -> (Vec<f64>, Vec<f64>) {
    paths
        .iter()
        .map(|p| {
            let e = p.endpoint();
            (e.x, e.y)
        })
        .unzip()
}

/// Compensated mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_from_xs(xs: &[f64]) -> WalkPath {
        WalkPath {
            positions: xs.iter().map(|&x| Point { x, y: 0.0 }).collect(),
            increments: xs
                .windows(2)
                .map(|w| StepVector::new(w[1] - w[0], 0.0))
                .collect(),
            step_lengths: vec![1; xs.len() - 1],
            times: (0..xs.len()).map(|k| k as f64).collect(),
        }
    }

    #[test]
    fn identical_paths_have_zero_variance() {
        let p = path_from_xs(&[0.0, 1.0, 3.0]);
        let s = moment_series(&[p.clone(), p]).unwrap();
        assert_eq!(s.var_x, vec![0.0; 3]);
        assert_eq!(s.mean_x, vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn plus_minus_first_step() {
        let paths: Vec<WalkPath> = (0..200)
            .map(|j| path_from_xs(&[0.0, if j % 2 == 0 { 1.0 } else { -1.0 }]))
            .collect();
        let s = moment_series(&paths).unwrap();
        assert_eq!(s.mean_x[1], 0.0);
        assert!((s.var_x[1] - 200.0 / 199.0).abs() < 1e-12);
        assert!((s.var_x[1] - 1.00503).abs() < 1e-5);
    }

    #[test]
    fn moment_series_errors() {
        assert!(moment_series(&[path_from_xs(&[0.0, 1.0])]).is_err());
        assert!(moment_series(&[path_from_xs(&[0.0, 1.0]), path_from_xs(&[0.0])]).is_err());
    }

    #[test]
    fn exact_linear_variance() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x).collect();
        let s = EnsembleSummary {
            times: t.clone(),
            mean_x: vec![0.0; 20],
            mean_y: vec![0.0; 20],
            var_x: v.clone(),
            var_y: v,
            path_count: 2,
        };
        let fit = variance_linearity(&s).unwrap();
        assert!((fit.slope_x - 3.0).abs() < 1e-12);
        assert!((fit.r2_x - 1.0).abs() < 1e-12);

        let zero = EnsembleSummary {
            var_x: vec![0.0; 20],
            var_y: vec![0.0; 20],
            ..s.clone()
        };
        assert!(variance_linearity(&zero).is_err());
        let short = EnsembleSummary {
            times: t[..5].to_vec(),
            ..s
        };
        assert!(variance_linearity(&short).is_err());
    }

    #[test]
    fn ks_of_constant_sample_is_large() {
        let d = increment_normality(&[0.3; 50], 1.0).unwrap();
        assert!(d >= 0.5);
        assert!(increment_normality(&[], 1.0).is_err());
        assert!(increment_normality(&[1.0], 0.0).is_err());
    }

    #[test]
    fn ks_of_normal_sample_is_small() {
        let mut rng = RngStream::new(2024, 0);
        let s: Vec<f64> = (0..500).map(|_| rng.standard_normal()).collect();
        assert!(increment_normality(&s, 1.0).unwrap() <= ks_critical_value_01(500));
    }

    #[test]
    fn ks_matches_uniform_hand_computation() {
        // {0.1, 0.5, 0.9} against U(0,1): largest gap is 1/3 - 0.1 = 7/30.
        let d = ks_statistic_sorted(&[0.1, 0.5, 0.9], |x| x);
        assert!((d - 7.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_basics() {
        let h = histogram(&[2.5; 7], 1).unwrap();
        assert_eq!(h.counts, vec![7]);
        let h = histogram(&[0.0, 1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(h.counts, vec![1, 1, 2]);
        assert_eq!(h.total(), 4);
        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    #[test]
    fn independence_rejects_degenerate_input() {
        let p = path_from_xs(&(0..21).map(|k| k as f64).collect::<Vec<_>>());
        let paths = vec![p.clone(), p.clone(), p];
        assert!(increment_independence(&paths, &[1]).is_err());
        assert!(increment_independence(&paths, &[20]).is_err());
        assert!(increment_independence(&paths, &[]).is_err());
    }

    #[test]
    fn independence_of_gaussian_reference() {
        let paths = gaussian_ensemble(500, 200, 99);
        let stat = increment_independence(&paths, &[1, 10, 50]).unwrap();
        assert!(stat <= 0.15, "{stat}");
    }

    #[test]
    fn windows() {
        let s = EnsembleSummary {
            times: vec![0.0, 1.0, 2.0, 3.0],
            mean_x: vec![0.0; 4],
            mean_y: vec![0.0; 4],
            var_x: vec![0.0, 1.0, 2.0, 3.0],
            var_y: vec![0.0, 2.0, 4.0, 6.0],
            path_count: 10,
        };
        let w = cumulative_windows(&s, &[2, 4]).unwrap();
        assert_eq!(w[0].var_x, 0.5);
        assert_eq!(w[1].var_y, 3.0);
        assert_eq!(w[1].max_var_x, 3.0);
        assert!(cumulative_windows(&s, &[5]).is_err());
    }
}
