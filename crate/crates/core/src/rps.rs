//! Permutation event spaces, permutation mass functions and their entropy.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{self, log2_big, ratio_to_f64, BigCount};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Largest frame size for which the full event space is materialized.
pub const MAX_ENUMERATION_N: u32 = 8;

/// Tolerance on the total mass of a mass function.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// An ordered selection of distinct elements from `1..=n`. The empty
/// sequence is the empty event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PermutationEvent(Vec<u32>);

impl PermutationEvent {
    pub fn empty() -> Self {
        PermutationEvent(Vec::new())
    }

    /// Builds an event, checking distinctness and the `1..=n` range.
    pub fn new(elements: Vec<u32>, n: u32) -> Result<Self> {
        let event = PermutationEvent(elements);
        event.validate(n)?;
        Ok(event)
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn cardinality(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn validate(&self, n: u32) -> Result<()> {
        if self.0.len() > n as usize {
            return Err(Error::Validation(format!(
                "event {self} is longer than the frame size {n}"
            )));
        }
        let mut seen = vec![false; n as usize + 1];
        for &e in &self.0 {
            if e == 0 || e > n {
                return Err(Error::Validation(format!(
                    "event {self} has element {e} outside 1..={n}"
                )));
            }
            if std::mem::replace(&mut seen[e as usize], true) {
                return Err(Error::Validation(format!(
                    "event {self} repeats element {e}"
                )));
            }
        }
        Ok(())
    }
}

/// Canonical order: by cardinality, then lexicographic.
impl Ord for PermutationEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for PermutationEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PermutationEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Every event over a frame of size `n`, in canonical order.
pub fn enumerate_pes(n: u32) -> Result<Vec<PermutationEvent>> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity(format!(
            "event space enumeration is limited to n <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let mut out = Vec::new();
    for k in 0..=n as usize {
        let mut used = vec![false; n as usize + 1];
        let mut current = Vec::with_capacity(k);
        push_arrangements(n, k, &mut used, &mut current, &mut out);
    }
    Ok(out)
}

fn push_arrangements(
    n: u32,
    k: usize,
    used: &mut [bool],
    current: &mut Vec<u32>,
    out: &mut Vec<PermutationEvent>,
) {
    if current.len() == k {
        out.push(PermutationEvent(current.clone()));
        return;
    }
    for e in 1..=n {
        if used[e as usize] {
            continue;
        }
        used[e as usize] = true;
        current.push(e);
        push_arrangements(n, k, used, current, out);
        current.pop();
        used[e as usize] = false;
    }
}

#[derive(Serialize, Deserialize)]
struct MassEntry {
    event: PermutationEvent,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct PmfFile {
    n: u32,
    masses: Vec<MassEntry>,
}

/// A normalized mass assignment over the events of a frame of size `n`.
/// Events not present carry zero mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationMassFunction {
    n: u32,
    masses: BTreeMap<PermutationEvent, f64>,
}

impl PermutationMassFunction {
    pub fn new<I>(n: u32, masses: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PermutationEvent, f64)>,
    {
        let mut map = BTreeMap::new();
        for (event, mass) in masses {
            event.validate(n)?;
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::Validation(format!(
                    "mass {mass} on event {event} is not a finite nonnegative number"
                )));
            }
            if event.is_empty() && mass != 0.0 {
                return Err(Error::Validation(
                    "the empty event must carry zero mass".to_string(),
                ));
            }
            if map.insert(event.clone(), mass).is_some() {
                return Err(Error::Validation(format!("event {event} listed twice")));
            }
        }
        let total: f64 = map.values().copied().collect::<NeumaierSum>().value();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Validation(format!(
                "masses sum to {total}, expected 1 within {MASS_TOLERANCE:e}"
            )));
        }
        Ok(PermutationMassFunction { n, masses: map })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PermutationEvent, f64)> {
        self.masses.iter().map(|(e, &m)| (e, m))
    }

    pub fn mass(&self, event: &PermutationEvent) -> f64 {
        self.masses.get(event).copied().unwrap_or(0.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PmfFile = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("malformed mass function JSON: {e}")))?;
        Self::new(file.n, file.masses.into_iter().map(|m| (m.event, m.mass)))
    }

    pub fn to_json(&self) -> String {
        let file = PmfFile {
            n: self.n,
            masses: self
                .masses
                .iter()
                .map(|(event, &mass)| MassEntry {
                    event: event.clone(),
                    mass,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

/// Entropy of a permutation mass function,
/// `-sum M(A) log(M(A) / (F(|A|) - 1))`, in the given logarithm base.
/// Zero-mass events contribute nothing.
pub fn rps_entropy(pmf: &PermutationMassFunction, base: f64) -> Result<f64> {
    check_base(base)?;
    let ln_base = base.ln();
    let ln2 = std::f64::consts::LN_2;
    let mut weight_logs: Vec<Option<f64>> = Vec::new();
    let mut acc = NeumaierSum::default();
    for (event, mass) in pmf.iter() {
        if mass == 0.0 {
            continue;
        }
        let k = event.cardinality();
        if weight_logs.len() <= k {
            weight_logs.resize(k + 1, None);
        }
        let ln_weight = *weight_logs[k].get_or_insert_with(|| {
            let w: BigCount = combinatorics::f_function(k as u64) - 1u32;
            log2_big(&w) * ln2
        });
        acc.add(-mass * (mass.ln() - ln_weight));
    }
    Ok(acc.value() / ln_base)
}

/// The entropy-maximizing mass function over a frame of size `n`:
/// `M(A) = (F(|A|) - 1) / sum_i P(n, i)(F(i) - 1)`.
pub fn max_entropy_pmf(n: u32) -> Result<PermutationMassFunction> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::Capacity(format!(
            "maximum-entropy mass function requires 1 <= N <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let normalizer = combinatorics::max_entropy_normalizer(n as u64)?;
    let f = combinatorics::f_table(n as u64);
    let by_card: Vec<f64> = f
        .iter()
        .enumerate()
        .map(|(k, fk)| {
            if k == 0 {
                0.0
            } else {
                ratio_to_f64(&(fk - 1u32), &normalizer)
            }
        })
        .collect();
    let events = enumerate_pes(n)?;
    Ok(PermutationMassFunction {
        n,
        masses: events
            .into_iter()
            .map(|e| {
                let m = by_card[e.cardinality()];
                (e, m)
            })
            .collect(),
    })
}

/// `log(sum_i P(n, i)(F(i) - 1))`, the largest attainable entropy.
pub fn max_rps_entropy(n: u32, base: f64) -> Result<f64> {
    check_base(base)?;
    let normalizer = combinatorics::max_entropy_normalizer(n as u64)?;
    combinatorics::log_of_bigcount(&normalizer, base)
}

fn check_base(base: f64) -> Result<()> {
    if base.is_finite() && base > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "logarithm base must be finite and > 1, got {base}"
        )))
    }
}
