//! Walk generation.
//!
//! A walk of `t` steps first draws `t` step lengths from a
//! [`LengthDistribution`], then turns each length into a step vector and
//! accumulates from the origin. The scaled form multiplies every step by
//! `sqrt(rho) / (N sqrt(N)) / sqrt(t)` and places position `k` at time
//! `k / t`, which maps the walk onto `[0, 1]`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::length_dist::{DistKind, LengthDistribution};
use crate::rng::RngStream;
use crate::rvg::{self, Moments, StepGenerator, StepVector};

/// Default variance control factor.
pub const DEFAULT_RHO: f64 = 24.0;

/// Version tag written into ensemble manifests.
pub const FORMAT_VERSION: u32 = 1;

pub const PATH_CSV_HEADER: &str = "t,x,y,n_step";

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_kind() -> DistKind {
    DistKind::Rps
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub steps: u32,
    pub max_len: u32,
    #[serde(default = "default_kind")]
    pub dist_kind: DistKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub scaled: bool,
}

impl WalkConfig {
    pub fn new(steps: u32, max_len: u32) -> Self {
        WalkConfig {
            steps,
            max_len,
            dist_kind: DistKind::Rps,
            seed: 0,
            rho: DEFAULT_RHO,
            scaled: false,
        }
    }

    pub fn scaled(mut self, scaled: bool) -> Self {
        self.scaled = scaled;
        self
    }

    pub fn with_kind(mut self, kind: DistKind) -> Self {
        self.dist_kind = kind;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Domain("walk needs at least one step".into()));
        }
        if self.max_len < 2 {
            return Err(Error::Domain(format!(
                "maximum step length must be at least 2, got {}",
                self.max_len
            )));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::Domain(format!(
                "rho must be finite and positive, got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Multiplier applied to every raw step; 1 for unscaled walks.
    pub fn step_scale(&self) -> f64 {
        if self.scaled {
            let big_n = self.max_len as f64;
            self.rho.sqrt() / (big_n * big_n.sqrt()) / (self.steps as f64).sqrt()
        } else {
            1.0
        }
    }

    pub fn time_of(&self, k: usize) -> f64 {
        if self.scaled {
            k as f64 / self.steps as f64
        } else {
            k as f64
        }
    }

    pub fn distribution(&self) -> Result<LengthDistribution> {
        LengthDistribution::new(self.dist_kind, self.max_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    /// `steps + 1` positions starting at the origin.
    pub positions: Vec<Point>,
    /// Step vectors as applied, after scaling.
    pub increments: Vec<StepVector>,
    pub step_lengths: Vec<u32>,
    pub times: Vec<f64>,
}

impl WalkPath {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn endpoint(&self) -> Point {
        *self.positions.last().expect("non-empty path")
    }

    /// CSV with header `t,x,y,n_step`. The origin row has `n_step = 0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.positions.len() * 48);
        out.push_str(PATH_CSV_HEADER);
        out.push('\n');
        for (k, (p, t)) in self.positions.iter().zip(&self.times).enumerate() {
            let n = if k == 0 { 0 } else { self.step_lengths[k - 1] };
            writeln!(out, "{},{},{},{}", t, p.x, p.y, n).unwrap();
        }
        out
    }

    /// Parses the format written by [`WalkPath::to_csv`]. Increments are
    /// recovered as position differences.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == PATH_CSV_HEADER => {}
            Some(h) => {
                return Err(Error::Validation(format!(
                    "unexpected path header {h:?}, expected {PATH_CSV_HEADER:?}"
                )))
            }
            None => return Err(Error::Validation("empty path CSV".into())),
        }
        let mut path = WalkPath {
            positions: Vec::new(),
            increments: Vec::new(),
            step_lengths: Vec::new(),
            times: Vec::new(),
        };
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Validation(format!(
                    "row {}: expected 4 fields, got {}",
                    row + 1,
                    fields.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Validation(format!("row {}: {s:?}: {e}", row + 1)))
            };
            let t = num(fields[0])?;
            let p = Point {
                x: num(fields[1])?,
                y: num(fields[2])?,
            };
            let n: u32 = fields[3]
                .parse()
                .map_err(|e| Error::Validation(format!("row {}: n_step: {e}", row + 1)))?;
            if let Some(prev) = path.positions.last() {
                path.increments
                    .push(StepVector::new(p.x - prev.x, p.y - prev.y));
                path.step_lengths.push(n);
            }
            path.positions.push(p);
            path.times.push(t);
        }
        if path.positions.is_empty() {
            return Err(Error::Validation("path CSV has no rows".into()));
        }
        Ok(path)
    }
}

/// `t` independent step lengths.
pub fn generate_lengths(dist: &LengthDistribution, t: usize, rng: &mut RngStream) -> Vec<u32> {
    (0..t).map(|_| dist.sample_length(rng)).collect()
}

/// One walk. Lengths are drawn first, then one step per length, all from
/// the same stream.
pub fn generate_walk(config: &WalkConfig, rng: &mut RngStream) -> Result<WalkPath> {
    config.validate()?;
    let dist = config.distribution()?;
    walk_with(config, &dist, rng)
}

/// [`generate_walk`] with `scaled` forced on.
pub fn scaled_walk(config: &WalkConfig, rng: &mut RngStream) -> Result<WalkPath> {
    generate_walk(&config.scaled(true), rng)
}

fn walk_with(
    config: &WalkConfig,
    dist: &LengthDistribution,
    rng: &mut RngStream,
) -> Result<WalkPath> {
    let t = config.steps as usize;
    let lengths = generate_lengths(dist, t, rng);
    let scale = config.step_scale();
    let mut gen = StepGenerator::new(config.max_len);
    let mut positions = Vec::with_capacity(t + 1);
    let mut increments = Vec::with_capacity(t);
    let mut here = Point::default();
    positions.push(here);
    for &n in &lengths {
        let step = gen.sample(n, rng)?.scaled(scale);
        here = Point {
            x: here.x + step.vx,
            y: here.y + step.vy,
        };
        increments.push(step);
        positions.push(here);
    }
    Ok(WalkPath {
        positions,
        increments,
        step_lengths: lengths,
        times: (0..=t).map(|k| config.time_of(k)).collect(),
    })
}

/// `paths` walks; walk `j` uses stream `(master_seed, j)`, so the result
/// does not depend on scheduling.
pub fn generate_ensemble(
    config: &WalkConfig,
    paths: usize,
    master_seed: u64,
) -> Result<Vec<WalkPath>> {
    if paths < 1 {
        return Err(Error::Domain("ensemble needs at least one path".into()));
    }
    config.validate()?;
    let dist = config.distribution()?;
    (0..paths)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::new(master_seed, j as u64);
            walk_with(config, &dist, &mut rng)
        })
        .collect()
}

/// [`generate_ensemble`] on a dedicated pool of `workers` threads.
pub fn generate_ensemble_with_workers(
    config: &WalkConfig,
    paths: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<WalkPath>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Capacity(format!("cannot start worker pool: {e}")))?;
    pool.install(|| generate_ensemble(config, paths, master_seed))
}

/// Manifest written next to an ensemble's per-path CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub format_version: u32,
    pub config: WalkConfig,
    pub master_seed: u64,
    pub path_count: usize,
    pub files: Vec<String>,
}

impl EnsembleManifest {
    pub fn new(config: WalkConfig, master_seed: u64, files: Vec<String>) -> Self {
        EnsembleManifest {
            format_version: FORMAT_VERSION,
            config,
            master_seed,
            path_count: files.len(),
            files,
        }
    }
}

pub fn path_file_name(index: usize) -> String {
    format!("path_{index:05}.csv")
}

fn enumerated_moments() -> &'static [Moments] {
    static TABLE: OnceLock<Vec<Moments>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=rvg::MAX_ENUMERATION_N)
            .map(|n| rvg::exact_moments(n).expect("enumerable"))
            .collect()
    })
}

/// Per-length step moments `(mean_x, mean_y, var_x, var_y)`: enumerated
/// for small lengths, closed form beyond.
pub fn step_moments(n: u32) -> (f64, f64, f64, f64) {
    if (1..=rvg::MAX_ENUMERATION_N).contains(&n) {
        let m = enumerated_moments()[n as usize - 1];
        (m.mean.vx, m.mean.vy, m.var_x, m.var_y)
    } else {
        let (mx, vx, vy) = rvg::closed_form_moments(n);
        (mx, 0.0, vx, vy)
    }
}

/// Per-component variance `(var_x, var_y)` of one raw step whose length is
/// drawn from `dist`.
pub fn mixture_step_variance(dist: &LengthDistribution) -> (f64, f64) {
    let ex = dist.expectation(|n| step_moments(n).0);
    let ey = dist.expectation(|n| step_moments(n).1);
    let ex2 = dist.expectation(|n| {
        let (mx, _, vx, _) = step_moments(n);
        vx + mx * mx
    });
    let ey2 = dist.expectation(|n| {
        let (_, my, _, vy) = step_moments(n);
        vy + my * my
    });
    (ex2 - ex * ex, ey2 - ey * ey)
}

/// Expected per-component variance of the walk position after `k` steps.
pub fn predicted_variance_at(config: &WalkConfig, k: usize) -> Result<(f64, f64)> {
    config.validate()?;
    let (vx, vy) = mixture_step_variance(&config.distribution()?);
    let s2 = config.step_scale().powi(2) * k as f64;
    Ok((vx * s2, vy * s2))
}

/// Expected per-component variance at the final step. For scaled walks this
/// is `rho / N³ · sigma²_mix`, independent of the step count.
pub fn predicted_endpoint_variance(config: &WalkConfig) -> Result<(f64, f64)> {
    predicted_variance_at(config, config.steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(WalkConfig::new(0, 5).validate().is_err());
        assert!(WalkConfig::new(5, 1).validate().is_err());
        assert!(WalkConfig::new(5, 5).with_rho(0.0).validate().is_err());
        assert!(WalkConfig::new(5, 5).with_rho(f64::NAN).validate().is_err());
        assert!(WalkConfig::new(1, 2).validate().is_ok());
        assert_eq!(WalkConfig::new(1, 2).rho, 24.0);
    }

    #[test]
    fn single_step_walk() {
        let cfg = WalkConfig::new(1, 6);
        let p = generate_walk(&cfg, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.positions[0], Point::default());
        assert_eq!(p.times, vec![0.0, 1.0]);
    }

    #[test]
    fn length_two_walk_stays_on_axis() {
        let cfg = WalkConfig::new(500, 2);
        let p = generate_walk(&cfg, &mut RngStream::new(4, 0)).unwrap();
        assert!(p.positions.iter().all(|q| q.y.abs() < 1e-12));
        assert!(p.step_lengths.iter().all(|&n| n == 1 || n == 2));
    }

    #[test]
    fn walk_determinism_and_csv() {
        let cfg = WalkConfig::new(200, 10).scaled(true);
        let a = generate_walk(&cfg, &mut RngStream::new(77, 0)).unwrap();
        let b = generate_walk(&cfg, &mut RngStream::new(77, 0)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let back = WalkPath::from_csv(&a.to_csv()).unwrap();
        assert_eq!(back.positions, a.positions);
        assert_eq!(back.times, a.times);
        assert_eq!(back.step_lengths, a.step_lengths);
        assert!(a.to_csv().starts_with("t,x,y,n_step\n0,0,0,0\n"));
    }

    #[test]
    fn csv_errors() {
        assert!(WalkPath::from_csv("").is_err());
        assert!(WalkPath::from_csv("t,x,y,n_step\n").is_err());
        assert!(WalkPath::from_csv("a,b\n1,2\n").is_err());
        assert!(WalkPath::from_csv("t,x,y,n_step\n0,0,zero,0\n").is_err());
    }

    #[test]
    fn scaled_times_and_factor() {
        let cfg = WalkConfig::new(100, 30).scaled(true);
        let p = scaled_walk(&WalkConfig::new(100, 30), &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(p.times[0], 0.0);
        assert_eq!(*p.times.last().unwrap(), 1.0);
        assert_eq!(p.times[50], 0.5);
        let expected = 24f64.sqrt() / (30.0 * 30f64.sqrt()) / 10.0;
        assert!((cfg.step_scale() - expected).abs() < 1e-16);
    }

    #[test]
    fn ensemble_first_path_matches_single_walk() {
        let cfg = WalkConfig::new(50, 8);
        let ens = generate_ensemble(&cfg, 1, 123).unwrap();
        let single = generate_walk(&cfg, &mut RngStream::new(123, 0)).unwrap();
        assert_eq!(ens[0], single);
        assert!(generate_ensemble(&cfg, 0, 1).is_err());
    }

    #[test]
    fn mixture_variance_small_cases() {
        // N = 2 under the RPS rule: p_1 = 2/10, p_2 = 8/10. Length 1 gives
        // (1, 0) always, length 2 gives (±1, 0). E[x] = 0.2, E[x²] = 1.
        let d = LengthDistribution::new(DistKind::Rps, 2).unwrap();
        let (vx, vy) = mixture_step_variance(&d);
        assert!((vx - (1.0 - 0.04)).abs() < 1e-12);
        assert!(vy.abs() < 1e-12);
    }
}
