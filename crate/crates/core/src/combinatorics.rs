//! Exact counting over ordered arrangements.
//!
//! Everything here is computed with arbitrary-precision integers so that the
//! downstream distributions and entropy identities can be checked exactly.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact nonnegative count.
pub type BigCount = BigUint;

/// `n! / (n - i)!`, the number of ordered selections of `i` out of `n`.
pub fn permutation_count(n: u64, i: u64) -> Result<BigCount> {
    if i > n {
        return Err(Error::Domain(format!(
            "permutation_count: i = {i} exceeds n = {n}"
        )));
    }
    Ok(falling_product(n, i))
}

fn falling_product(n: u64, i: u64) -> BigCount {
    let mut acc = BigCount::one();
    for k in (n - i + 1)..=n {
        acc *= k;
    }
    acc
}

pub fn factorial(n: u64) -> BigCount {
    falling_product(n, n)
}

/// Number of ordered arrangements of every subset of an `i`-element frame,
/// i.e. `sum_{j=0..=i} P(i, j)`. Includes the empty arrangement.
pub fn f_function(i: u64) -> BigCount {
    // F(i) = i·F(i-1) + 1
    let mut acc = BigCount::one();
    for k in 1..=i {
        acc = acc * k + 1u32;
    }
    acc
}

/// `F(i)` for every `i` in `0..=n`.
pub fn f_table(n: u64) -> Vec<BigCount> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = BigCount::one();
    out.push(acc.clone());
    for k in 1..=n {
        acc = acc * k + 1u32;
        out.push(acc.clone());
    }
    out
}

/// `floor(e * n!)`, evaluated from a truncated series for `e` whose
/// truncation error is bounded above and below; the precision is raised
/// until both bounds agree on the floor.
pub fn floor_e_factorial(n: u64) -> Result<BigCount> {
    if n == 0 {
        return Err(Error::Domain(
            "floor_e_factorial: n must be at least 1".to_string(),
        ));
    }
    let nf = factorial(n);
    let mut digits = nf.to_string().len() as u32 + 10;
    loop {
        let (lo, hi) = e_bounds_scaled(digits);
        let scale = BigCount::from(10u32).pow(digits);
        let floor_lo = (&lo * &nf).div_floor(&scale);
        let floor_hi = (&hi * &nf).div_floor(&scale);
        if floor_lo == floor_hi {
            return Ok(floor_lo);
        }
        digits += 16;
    }
}

/// Integers `lo <= e * 10^digits <= hi`.
fn e_bounds_scaled(digits: u32) -> (BigCount, BigCount) {
    let scale = BigCount::from(10u32).pow(digits);
    let mut lo = BigCount::zero();
    let mut term = scale.clone();
    let mut k: u64 = 0;
    // Each truncated division loses less than one unit.
    while !term.is_zero() {
        lo += &term;
        k += 1;
        term /= k;
    }
    // term is now floor(scale / k!) == 0, so scale/k! < 1 and the tail
    // sum_{j>=k} scale/j! < 2 · scale/k! < 2.
    let hi = &lo + BigCount::from(k + 2);
    (lo, hi)
}

/// `sum_{i=1..=n} P(n, i) · (F(i) - 1)`, the normalizer of the maximum-entropy
/// mass function.
pub fn max_entropy_normalizer(n: u64) -> Result<BigCount> {
    if n == 0 {
        return Err(Error::Domain(
            "max_entropy_normalizer: N must be at least 1".to_string(),
        ));
    }
    Ok(weighted_terms(n).into_iter().sum())
}

/// The individual terms `P(n, i) · (F(i) - 1)` for `i = 1..=n`.
pub(crate) fn weighted_terms(n: u64) -> Vec<BigCount> {
    let f = f_table(n);
    let mut out = Vec::with_capacity(n as usize);
    let mut perm = BigCount::one();
    for i in 1..=n {
        perm *= n - i + 1;
        out.push(&perm * (&f[i as usize] - 1u32));
    }
    out
}

/// `log_base(x)` for an exact count. Works far beyond the `f64` range.
pub fn log_of_bigcount(x: &BigCount, base: f64) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::Domain("log_of_bigcount: x must be positive".into()));
    }
    if base.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) || !base.is_finite() {
        return Err(Error::Domain(format!(
            "log_of_bigcount: base must be finite and > 1, got {base}"
        )));
    }
    Ok(log2_big(x) / base.log2())
}

pub(crate) fn log2_big(x: &BigCount) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().expect("fits in u64").to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits");
    (top as f64).log2() + shift as f64
}

/// `num / den` rounded to `f64`, correct for magnitudes well outside the
/// `f64` range of the operands themselves.
pub fn ratio_to_f64(num: &BigCount, den: &BigCount) -> f64 {
    assert!(!den.is_zero(), "ratio_to_f64: zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient carries at least 64 significant bits.
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let qb = q.bits() as i64;
    let drop = (qb - 64).max(0);
    let top = (q >> drop as u64).to_u64().unwrap() as f64;
    top * 2f64.powi((drop - shift) as i32)
}
