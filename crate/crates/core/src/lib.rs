//! Random walks driven by random permutation sets.
//!
//! The crate is organized bottom-up:
//!
//! - [`combinatorics`]: exact permutation counts, `F(n)`, `floor(e·n!)`.
//! - [`rps`]: permutation event spaces, mass functions and their entropy.
//! - [`length_dist`]: the two step-length distributions and inverse-CDF sampling.
//! - [`rng`]: seeded, splittable random streams.
//! - [`rvg`]: step vectors from uniform permutations, plus exhaustive oracles.
//! - [`walk`]: walks, Wiener-scaled walks and parallel ensembles.
//! - [`stats`]: ensemble summaries and goodness-of-fit measures.
//! - [`verify`]: named verification suites and their reports.
//! - [`plot`]: minimal SVG rendering of paths, histograms and series.

pub mod combinatorics;
pub mod error;
pub mod length_dist;
pub mod numeric;
pub mod plot;
pub mod rng;
pub mod rps;
pub mod rvg;
pub mod stats;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
