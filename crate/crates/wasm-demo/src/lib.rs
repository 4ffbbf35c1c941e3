//! Browser bindings for three interactive views: a step-length
//! distribution table, sampled steps over their exact support, and a
//! single walk rendered as SVG.

use serde_json::json;
use wasm_bindgen::prelude::*;

use rpst_walk::length_dist::{DistKind, LengthDistribution};
use rpst_walk::plot;
use rpst_walk::rng::RngStream;
use rpst_walk::rvg::{self, StepGenerator};
use rpst_walk::walk::{self, WalkConfig};

/// Largest inputs accepted from the page, to keep the tab responsive.
pub const MAX_DEMO_LEN: u32 = 60;
pub const MAX_DEMO_STEPS: u32 = 20_000;
pub const MAX_DEMO_SAMPLES: usize = 200_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn bounded(name: &str, value: u32, max: u32) -> Result<u32, String> {
    if value > max {
        Err(format!("{name} is limited to {max} in the demo"))
    } else {
        Ok(value)
    }
}

/// `{"kind", "max_len", "probs": [p_1, ..], "expected_len"}` as JSON.
#[wasm_bindgen]
pub fn length_distribution(kind: &str, max_len: u32) -> Result<String, String> {
    let kind: DistKind = kind.parse().map_err(err)?;
    let d =
        LengthDistribution::new(kind, bounded("max_len", max_len, MAX_DEMO_LEN)?).map_err(err)?;
    Ok(json!({
        "kind": kind,
        "max_len": max_len,
        "probs": d.probs(),
        "expected_len": d.expectation(|n| n as f64),
    })
    .to_string())
}

/// `count` steps of `n` directions as a flat `[vx0, vy0, vx1, vy1, ..]`.
#[wasm_bindgen]
pub fn sample_steps(n: u32, count: usize, seed: u64) -> Result<Vec<f64>, String> {
    bounded("n", n, MAX_DEMO_LEN)?;
    if count > MAX_DEMO_SAMPLES {
        return Err(format!(
            "count is limited to {MAX_DEMO_SAMPLES} in the demo"
        ));
    }
    let mut rng = RngStream::new(seed, 0);
    let mut gen = StepGenerator::new(n);
    let mut out = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let s = gen.sample(n, &mut rng).map_err(err)?;
        out.push(s.vx);
        out.push(s.vy);
    }
    Ok(out)
}

/// Exact support for small `n`: `{"n", "distinct", "points": [[vx, vy, count], ..]}`.
#[wasm_bindgen]
pub fn step_support(n: u32) -> Result<String, String> {
    let table = rvg::enumerate_support(n).map_err(err)?;
    let points: Vec<_> = table
        .entries
        .iter()
        .map(|e| json!([e.vx, e.vy, e.count]))
        .collect();
    Ok(json!({ "n": n, "distinct": table.len(), "points": points }).to_string())
}

/// One walk drawn as an SVG polyline coloured by time.
#[wasm_bindgen]
pub fn walk_svg(
    steps: u32,
    max_len: u32,
    kind: &str,
    scaled: bool,
    seed: u64,
) -> Result<String, String> {
    let config = WalkConfig::new(
        bounded("steps", steps, MAX_DEMO_STEPS)?,
        bounded("max_len", max_len, MAX_DEMO_LEN)?,
    )
    .with_kind(kind.parse().map_err(err)?)
    .scaled(scaled);
    let path = walk::generate_walk(&config, &mut RngStream::new(seed, 0)).map_err(err)?;
    let xs: Vec<f64> = path.positions.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = path.positions.iter().map(|p| p.y).collect();
    let title = format!("{kind} walk, N = {max_len}, {steps} steps, seed {seed}");
    plot::path_svg(&xs, &ys, &title).map_err(err)
}
