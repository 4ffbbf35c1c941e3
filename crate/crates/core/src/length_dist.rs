//! Step-length distributions over `1..=N`.
//!
//! Two selection rules are provided. The RPS rule weights length `n` by the
//! number of length-`n` arrangements times the maximum-entropy mass of each,
//! `P(N,n)(F(n)-1)`. The permutation rule weights length `n` by `P(N,n)`
//! alone. Probabilities are exact big-integer ratios rounded once to `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{self, ratio_to_f64, BigCount};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Rps,
    Per,
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistKind::Rps => "rps",
            DistKind::Per => "per",
        })
    }
}

impl FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rps" => Ok(DistKind::Rps),
            "per" => Ok(DistKind::Per),
            other => Err(Error::Domain(format!(
                "unknown distribution kind {other:?} (expected rps or per)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthDistribution {
    max_len: u32,
    kind: DistKind,
    numerators: Vec<BigCount>,
    denominator: BigCount,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl LengthDistribution {
    pub fn new(kind: DistKind, max_len: u32) -> Result<Self> {
        match kind {
            DistKind::Rps => rps_length_distribution(max_len),
            DistKind::Per => per_length_distribution(max_len),
        }
    }

    fn from_weights(kind: DistKind, max_len: u32, numerators: Vec<BigCount>) -> Self {
        let denominator: BigCount = numerators.iter().sum();
        let probs = numerators
            .iter()
            .map(|w| ratio_to_f64(w, &denominator))
            .collect();
        let mut running = BigCount::default();
        let cumulative = numerators
            .iter()
            .map(|w| {
                running += w;
                ratio_to_f64(&running, &denominator)
            })
            .collect();
        LengthDistribution {
            max_len,
            kind,
            numerators,
            denominator,
            probs,
            cumulative,
        }
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    /// `p_1..=p_N`; index 0 holds length 1.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Probability of length `n`, zero outside `1..=N`.
    pub fn prob(&self, n: u32) -> f64 {
        if n == 0 || n > self.max_len {
            0.0
        } else {
            self.probs[n as usize - 1]
        }
    }

    /// Exact `(numerator, denominator)` of the probability of length `n`.
    pub fn exact(&self, n: u32) -> Option<(&BigCount, &BigCount)> {
        if n == 0 || n > self.max_len {
            None
        } else {
            Some((&self.numerators[n as usize - 1], &self.denominator))
        }
    }

    /// Inverse-CDF lookup: the smallest length whose cumulative probability
    /// reaches `u`.
    pub fn length_for_uniform(&self, u: f64) -> u32 {
        let idx = self.cumulative.partition_point(|&c| c < u);
        idx.min(self.cumulative.len() - 1) as u32 + 1
    }

    pub fn sample_length(&self, rng: &mut RngStream) -> u32 {
        self.length_for_uniform(rng.uniform())
    }

    /// `sum_n p_n · g(n)` evaluated from the exact weights.
    pub fn expectation(&self, mut g: impl FnMut(u32) -> f64) -> f64 {
        crate::numeric::sum(self.probs.iter().enumerate().map(|(i, &p)| {
            if p == 0.0 {
                0.0
            } else {
                p * g(i as u32 + 1)
            }
        }))
    }
}

fn check_max_len(max_len: u32) -> Result<()> {
    if max_len == 0 {
        Err(Error::Domain(
            "length distribution requires N >= 1".to_string(),
        ))
    } else {
        Ok(())
    }
}

/// `P_RPS(n|N) = P(N,n)(F(n)-1) / sum_i P(N,i)(F(i)-1)`.
pub fn rps_length_distribution(max_len: u32) -> Result<LengthDistribution> {
    check_max_len(max_len)?;
    Ok(LengthDistribution::from_weights(
        DistKind::Rps,
        max_len,
        combinatorics::weighted_terms(max_len as u64),
    ))
}

/// `P_Per(n|N) = P(N,n) / (F(N)-1)`.
pub fn per_length_distribution(max_len: u32) -> Result<LengthDistribution> {
    check_max_len(max_len)?;
    let n = max_len as u64;
    let weights = (1..=n)
        .map(|i| combinatorics::permutation_count(n, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthDistribution::from_weights(
        DistKind::Per,
        max_len,
        weights,
    ))
}

/// Limit of `P_Per(N-k|N)` as `N` grows: `1 / (e · k!)`.
pub fn per_limit_probability(k: u32) -> f64 {
    (2..=k).fold((-1.0f64).exp(), |p, j| p / j as f64)
}
