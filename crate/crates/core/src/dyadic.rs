//! Dyadic blocks `2^t <= q < 2^(t+1)` and the open windows used by every
//! block construction. All constructions (and their test oracles) compute
//! window endpoints through [`window`], so a box is the same set of doubles
//! everywhere.

use crate::approx_fn::ApproxFn;
use crate::error::{Error, Result};

/// Largest supported block exponent.
pub const MAX_T: u32 = 40;

pub fn check_t(t: u32) -> Result<()> {
    if (1..=MAX_T).contains(&t) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("block exponent t must lie in [1, {MAX_T}], got {t}")))
    }
}

/// `2^t`.
pub fn block_start(t: u32) -> u64 {
    1u64 << t
}

/// Denominators of block `t`.
pub fn block_range(t: u32) -> std::ops::Range<u64> {
    block_start(t)..block_start(t + 1)
}

/// `ψ(2^t)`, the value frozen over block `t`.
pub fn psi_at_block(psi: &ApproxFn, t: u32) -> Result<f64> {
    psi.eval(block_start(t))
}

/// `γ_t = sqrt(2 ψ(2^t)) / 2^t`.
pub fn gamma_t(psi: &ApproxFn, t: u32) -> Result<f64> {
    Ok(gamma_from_value(psi_at_block(psi, t)?, t))
}

pub fn gamma_from_value(psi_t: f64, t: u32) -> f64 {
    (2.0 * psi_t).sqrt() / block_start(t) as f64
}

/// `2^k · x`, exact in binary floating point.
#[inline]
pub fn scale_pow2(x: f64, k: i32) -> f64 {
    x * 2f64.powi(k)
}

/// Open window `(p/q - half, p/q + half)`.
#[inline]
pub fn window(p: i64, q: u64, half: f64) -> (f64, f64) {
    let c = p as f64 / q as f64;
    (c - half, c + half)
}

/// Integers `p` whose window of half-width `half` around `p/q` can meet the
/// open interval `(lo, hi)`. A superset by at most one on each side.
#[inline]
pub fn candidate_range(lo: f64, hi: f64, q: u64, half: f64) -> std::ops::RangeInclusive<i64> {
    let qf = q as f64;
    let first = ((lo - half) * qf).floor() as i64;
    let last = ((hi + half) * qf).ceil() as i64;
    first..=last
}
