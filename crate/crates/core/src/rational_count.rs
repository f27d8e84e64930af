//! Counting rational points `(p1/q, p2/q)` near a curve.
//!
//! * [`count_near_curve`]: the vertical-neighbourhood count `N_f(Q, ψ, I)`.
//! * [`count_block_mult`]: triples of block `t` whose box
//!   `|x - p1/q| < 2^m γ_t`, `|y - p2/q| < 2^-m γ_t` meets the curve.
//! * [`count_block_sim`]: triples of block `t` whose box
//!   `|x - p1/q| < ψ(2^t)/2^t`, `|y - p2/q| < φ(2^t)/2^t` meets the curve.
//!
//! Each report carries the matching bound without its implied constant and
//! the ratio between the two.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx_fn::ApproxFn;
use crate::curve::{big_of_f64, big_of_i128, ratio_ceil, ratio_floor, Curve, Decision, BOUNDARY_TOL};
use crate::dyadic::{block_range, block_start, candidate_range, check_t, gamma_t, psi_at_block, scale_pow2, window};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Every triple `(q, p1, p2)`.
    Triples,
    /// Only triples with `gcd(p1, q) = 1`.
    ReducedOnly,
}

impl CountMode {
    #[inline]
    pub fn admits(self, p1: i64, q: u64) -> bool {
        match self {
            CountMode::Triples => true,
            CountMode::ReducedOnly => (p1.unsigned_abs()).gcd(&q) == 1,
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Triples => "triples",
            CountMode::ReducedOnly => "reduced_only",
        })
    }
}

impl FromStr for CountMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triples" => Ok(CountMode::Triples),
            "reduced" | "reduced_only" | "reduced-only" => Ok(CountMode::ReducedOnly),
            other => Err(Error::parse(other, "expected `triples` or `reduced`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub count: u64,
    pub predicted_bound: f64,
    pub ratio: f64,
    pub mode: CountMode,
    /// Decisions within the floating tolerance of a strict boundary; never
    /// included in `count`.
    pub boundary_ambiguous: u64,
}

impl CountReport {
    pub fn new(count: u64, predicted_bound: f64, mode: CountMode, boundary_ambiguous: u64) -> Self {
        CountReport {
            count,
            predicted_bound,
            ratio: count as f64 / predicted_bound,
            mode,
            boundary_ambiguous,
        }
    }
}

/// Is `lhs < delta · scale` (exactly)? `lhs >= 0`, `scale > 0`.
fn lt_scaled(lhs: i128, delta: f64, scale: i128) -> bool {
    let a = lhs as f64;
    let b = delta * scale as f64;
    if a < b * (1.0 - 1e-12) {
        true
    } else if a > b * (1.0 + 1e-12) {
        false
    } else {
        big_of_i128(lhs) < big_of_f64(delta) * big_of_i128(scale)
    }
}

/// Does `ψ(Q) = delta·Q` satisfy the lower bound `ψ(Q) >= Q^(-2/3)` under
/// which the counting bound is known?
pub fn counting_condition_holds(q_max: u64, delta: f64) -> bool {
    let q = q_max as f64;
    delta * q >= q.powf(-2.0 / 3.0)
}

/// Counts triples `(q, p1, p2)` with `1 <= q <= Q`, `p1/q ∈ I` (closed) and
/// `|f(p1/q) - p2/q| < delta`. The predicted bound is `ψ(Q)·Q²` with
/// `ψ(Q) = delta·Q`.
pub fn count_near_curve(curve: &Curve, q_max: u64, delta: f64, mode: CountMode) -> Result<CountReport> {
    if q_max == 0 {
        return Err(Error::Precondition("Q must be at least 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Precondition(format!("delta must be positive and finite, got {delta}")));
    }
    let (count, ambiguous) = (1..=q_max)
        .into_par_iter()
        .map(|q| count_near_curve_q(curve, q, delta, mode))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let qf = q_max as f64;
    Ok(CountReport::new(count, delta * qf * qf * qf, mode, ambiguous))
}

/// `p1` range with `p1/q ∈ [a, b]`, exact.
pub(crate) fn p1_range_closed(curve: &Curve, q: u64) -> std::ops::RangeInclusive<i64> {
    let (lo, hi) = curve.interval_exact();
    let q = q as i128;
    let first = ratio_ceil(*lo.numer() as i128 * q, *lo.denom() as i128);
    let last = ratio_floor(*hi.numer() as i128 * q, *hi.denom() as i128);
    first as i64..=last as i64
}

fn count_near_curve_q(curve: &Curve, q: u64, delta: f64, mode: CountMode) -> (u64, u64) {
    let mut count = 0;
    let mut ambiguous = 0;
    let qf = q as f64;
    let reach = qf * delta;
    for p1 in p1_range_closed(curve, q) {
        if !mode.admits(p1, q) {
            continue;
        }
        match curve.exact_poly().map(|p| p.scaled_numerator(p1, q as i64)) {
            Some(Some((n, m))) => {
                // q f(p1/q) = n/m; the condition is |n - p2 m| < delta · m · q.
                let centre = n as f64 / m as f64;
                let scale = m * q as i128;
                let first = (centre - reach).floor() as i64 - 1;
                let last = (centre + reach).ceil() as i64 + 1;
                for p2 in first..=last {
                    let lhs = (n - p2 as i128 * m).abs();
                    if lt_scaled(lhs, delta, scale) {
                        count += 1;
                    }
                }
            }
            Some(None) => {
                let poly = curve.exact_poly().expect("polynomial curve");
                let x = BigRational::new((p1 as i128).into(), (q as i128).into());
                let y = poly.eval_exact(&x);
                let centre = qf * curve.f(p1 as f64 / qf);
                let d = big_of_f64(delta);
                let qb = big_of_i128(q as i128);
                let first = (centre - reach).floor() as i64 - 1;
                let last = (centre + reach).ceil() as i64 + 1;
                for p2 in first..=last {
                    let diff = (&y - big_of_i128(p2 as i128) / &qb).abs();
                    if diff < d {
                        count += 1;
                    }
                }
            }
            None => {
                let y = curve.f(p1 as f64 / qf);
                let centre = qf * y;
                let first = (centre - reach).floor() as i64 - 1;
                let last = (centre + reach).ceil() as i64 + 1;
                for p2 in first..=last {
                    let dist = (y - p2 as f64 / qf).abs();
                    if (dist - delta).abs() <= BOUNDARY_TOL {
                        ambiguous += 1;
                    } else if dist < delta {
                        count += 1;
                    }
                }
            }
        }
    }
    (count, ambiguous)
}

/// One box of a block construction that meets (or may meet) the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxHit {
    pub p1: i64,
    pub p2: i64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub decision: Decision,
}

/// Visits, in `(p1, p2)` order, every box of denominator `q` with half-widths
/// `(wx, wy)` whose intersection with the curve is nonempty or ambiguous.
pub fn for_each_box<F>(curve: &Curve, q: u64, wx: f64, wy: f64, mode: CountMode, mut visit: F)
where
    F: FnMut(BoxHit),
{
    let (a, b) = (curve.a(), curve.b());
    let qf = q as f64;
    for p1 in candidate_range(a, b, q, wx) {
        if !mode.admits(p1, q) {
            continue;
        }
        let (x_lo, x_hi) = window(p1, q, wx);
        let l = x_lo.max(a);
        let h = x_hi.min(b);
        if !(l < h) {
            continue;
        }
        let (fl, fh) = (curve.f(l), curve.f(h));
        let first = ((fl - wy) * qf).floor() as i64;
        let last = ((fh + wy) * qf).ceil() as i64;
        for p2 in first..=last {
            let (y_lo, y_hi) = window(p2, q, wy);
            let decision = curve.box_meets(x_lo, x_hi, y_lo, y_hi);
            if decision != Decision::No {
                visit(BoxHit {
                    p1,
                    p2,
                    x_lo,
                    x_hi,
                    y_lo,
                    y_hi,
                    decision,
                });
            }
        }
    }
}

fn count_boxes_in_block(curve: &Curve, t: u32, wx: f64, wy: f64, mode: CountMode) -> (u64, u64) {
    block_range(t)
        .into_par_iter()
        .map(|q| {
            let mut yes = 0;
            let mut amb = 0;
            for_each_box(curve, q, wx, wy, mode, |hit| match hit.decision {
                Decision::Yes => yes += 1,
                _ => amb += 1,
            });
            (yes, amb)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Half-widths `(2^m γ_t, 2^-m γ_t)` of the multiplicative boxes.
pub fn mult_half_widths(psi: &ApproxFn, t: u32, m: i32) -> Result<(f64, f64)> {
    let gamma = gamma_t(psi, t)?;
    Ok((scale_pow2(gamma, m), scale_pow2(gamma, -m)))
}

/// `N(t, m)`: triples of block `t` whose multiplicative box at index `m`
/// meets the curve. Predicted bound `2^(2t) 2^|m| sqrt(ψ(2^t))`.
pub fn count_block_mult(curve: &Curve, psi: &ApproxFn, t: u32, m: i32, mode: CountMode) -> Result<CountReport> {
    check_t(t)?;
    let (wx, wy) = mult_half_widths(psi, t, m)?;
    let (count, ambiguous) = count_boxes_in_block(curve, t, wx, wy, mode);
    let psi_t = psi_at_block(psi, t)?;
    let predicted = scale_pow2(1.0, 2 * t as i32 + m.abs()) * psi_t.sqrt();
    Ok(CountReport::new(count, predicted, mode, ambiguous))
}

/// Fails unless `ψ(q) >= φ(q)` on the whole block.
pub fn check_dominates(psi: &ApproxFn, phi: &ApproxFn, t: u32) -> Result<()> {
    for q in block_range(t) {
        let (a, b) = (psi.eval(q)?, phi.eval(q)?);
        if a < b {
            return Err(Error::Precondition(format!(
                "psi({q}) = {a} < phi({q}) = {b}; swap the two functions \
                 (cover with max(psi, phi) in x and min(psi, phi) in y)"
            )));
        }
    }
    Ok(())
}

/// Half-widths `(ψ(2^t)/2^t, φ(2^t)/2^t)` of the simultaneous boxes.
pub fn sim_half_widths(psi: &ApproxFn, phi: &ApproxFn, t: u32) -> Result<(f64, f64)> {
    let scale = block_start(t) as f64;
    Ok((psi_at_block(psi, t)? / scale, psi_at_block(phi, t)? / scale))
}

/// `N(t)`: triples of block `t` whose simultaneous box meets the curve.
/// Predicted bound `2^(2t) ψ(2^t)`.
pub fn count_block_sim(curve: &Curve, psi: &ApproxFn, phi: &ApproxFn, t: u32, mode: CountMode) -> Result<CountReport> {
    check_t(t)?;
    check_dominates(psi, phi, t)?;
    let (wx, wy) = sim_half_widths(psi, phi, t)?;
    let (count, ambiguous) = count_boxes_in_block(curve, t, wx, wy, mode);
    let predicted = scale_pow2(psi_at_block(psi, t)?, 2 * t as i32);
    Ok(CountReport::new(count, predicted, mode, ambiguous))
}
