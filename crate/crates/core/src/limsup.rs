//! Hit detection for simultaneous and multiplicative approximation, the
//! m-index of a multiplicative hit, tail-measure estimates on the curve and
//! Monte Carlo runs of the classical independent-variable theorems.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx_fn::{check_s, ApproxFn};
use crate::curve::Curve;
use crate::dyadic::{block_range, gamma_from_value, psi_at_block, scale_pow2};
use crate::error::{Error, Result};

/// `‖x‖`, the distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HitMode {
    /// `‖qx‖ < ψ1(q)` and `‖qy‖ < ψ2(q)`.
    Simultaneous,
    /// `‖qx‖ · ‖qy‖ < ψ(q)`.
    Multiplicative,
}

impl fmt::Display for HitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HitMode::Simultaneous => "simultaneous",
            HitMode::Multiplicative => "multiplicative",
        })
    }
}

impl FromStr for HitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim" | "simultaneous" => Ok(HitMode::Simultaneous),
            "mult" | "multiplicative" => Ok(HitMode::Multiplicative),
            other => Err(Error::parse(other, "expected `sim` or `mult`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitRecord {
    pub q: u64,
    pub p1: i64,
    pub p2: i64,
    /// `|x - p1/q|`.
    pub err_x: f64,
    /// `|y - p2/q|`.
    pub err_y: f64,
    /// `err_x · err_y`.
    pub product_err: f64,
    pub mode: HitMode,
}

/// Nearest-integer data of `q·v`: `(p, ‖q v‖)`.
#[inline]
fn nearest(q: u64, v: f64) -> (i64, f64) {
    let qv = q as f64 * v;
    let p = qv.round();
    (p as i64, (qv - p).abs())
}

/// The hit test at one `q` against the thresholds `(a, b)`.
///
/// Simultaneous: `‖qx‖ < a` and `‖qy‖ < b`. Multiplicative: `‖qx‖‖qy‖ < a`
/// (`b` unused).
#[inline]
fn hit_at(q: u64, x: f64, y: f64, mode: HitMode, a: f64, b: f64) -> Option<HitRecord> {
    let (p1, dx) = nearest(q, x);
    let (p2, dy) = nearest(q, y);
    let hit = match mode {
        HitMode::Simultaneous => dx < a && dy < b,
        HitMode::Multiplicative => dx * dy < a,
    };
    hit.then(|| {
        let qf = q as f64;
        let (err_x, err_y) = (dx / qf, dy / qf);
        HitRecord {
            q,
            p1,
            p2,
            err_x,
            err_y,
            product_err: err_x * err_y,
            mode,
        }
    })
}

/// Thresholds of the hit test for every `q` of a range, evaluated once.
struct Thresholds {
    q_min: u64,
    a: Vec<f64>,
    b: Vec<f64>,
    mode: HitMode,
}

impl Thresholds {
    fn new(q_min: u64, q_max: u64, mode: HitMode, psi1: &ApproxFn, psi2: Option<&ApproxFn>) -> Result<Self> {
        let psi2 = match (mode, psi2) {
            (HitMode::Simultaneous, None) => {
                return Err(Error::Precondition("simultaneous hits need a second approximation function".into()))
            }
            (_, p) => p,
        };
        let qs = q_min..=q_max;
        let a = qs.clone().map(|q| psi1.eval(q)).collect::<Result<Vec<_>>>()?;
        let b = match (mode, psi2) {
            (HitMode::Simultaneous, Some(p)) => qs.map(|q| p.eval(q)).collect::<Result<Vec<_>>>()?,
            _ => vec![0.0; a.len()],
        };
        Ok(Thresholds { q_min, a, b, mode })
    }

    fn hits(&self, x: f64, y: f64) -> impl Iterator<Item = HitRecord> + '_ {
        (0..self.a.len()).filter_map(move |i| hit_at(self.q_min + i as u64, x, y, self.mode, self.a[i], self.b[i]))
    }
}

fn check_in_interval(curve: &Curve, x: f64) -> Result<()> {
    if x >= curve.a() && x <= curve.b() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} lies outside I = [{}, {}]", curve.a(), curve.b())))
    }
}

/// All `q ∈ [q_min, q_max]` at which `(x, f(x))` is approximable, in
/// increasing `q`, with `p1`, `p2` the nearest integers to `qx`, `qy`.
///
/// In multiplicative mode `psi1` is `ψ` and `psi2` is ignored.
pub fn find_hits(
    curve: &Curve,
    x: f64,
    q_min: u64,
    q_max: u64,
    mode: HitMode,
    psi1: &ApproxFn,
    psi2: Option<&ApproxFn>,
) -> Result<Vec<HitRecord>> {
    check_in_interval(curve, x)?;
    if q_min == 0 || q_min > q_max {
        return Err(Error::Precondition(format!("need 1 <= q_min <= q_max, got [{q_min}, {q_max}]")));
    }
    let th = Thresholds::new(q_min, q_max, mode, psi1, psi2)?;
    Ok(th.hits(x, curve.f(x)).collect())
}

/// Hits at the dyadic level of block `t`: `q ∈ [2^t, 2^(t+1))` with
///
/// * multiplicative: `|x - p1/q| · |y - p2/q| < ψ(2^t) / 2^(2t)`;
/// * simultaneous: `|x - p1/q| < ψ(2^t)/2^t` and `|y - p2/q| < φ(2^t)/2^t`.
///
/// These are the inequalities the block covers are built from; they are
/// implied by the plain inequalities with `ψ(q)` for decreasing `ψ`.
pub fn find_dyadic_hits(
    curve: &Curve,
    x: f64,
    t: u32,
    mode: HitMode,
    psi: &ApproxFn,
    phi: Option<&ApproxFn>,
) -> Result<Vec<HitRecord>> {
    check_in_interval(curve, x)?;
    let y = curve.f(x);
    let psi_t = psi_at_block(psi, t)?;
    let phi_t = match (mode, phi) {
        (HitMode::Simultaneous, Some(p)) => psi_at_block(p, t)?,
        (HitMode::Simultaneous, None) => {
            return Err(Error::Precondition("simultaneous hits need a second approximation function".into()))
        }
        (HitMode::Multiplicative, _) => 0.0,
    };
    let scale = 1.0 / block_range(t).start as f64;
    Ok(block_range(t)
        .filter_map(|q| {
            let qf = q as f64;
            // ‖qx‖ thresholds that match the dyadic inequalities.
            let (a, b) = match mode {
                HitMode::Multiplicative => (psi_t * (qf * scale) * (qf * scale), 0.0),
                HitMode::Simultaneous => (psi_t * qf * scale, phi_t * qf * scale),
            };
            let rec = hit_at(q, x, y, mode, a, b)?;
            // Confirm on the unscaled errors, the form the covers use.
            let ok = match mode {
                HitMode::Multiplicative => rec.product_err < psi_t * scale * scale,
                HitMode::Simultaneous => rec.err_x < psi_t * scale && rec.err_y < phi_t * scale,
            };
            ok.then_some(rec)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MCase {
    /// `2^-|m| >= t sqrt(ψ(2^t))`: balanced rectangle.
    CaseA,
    /// `2^-|m| < t sqrt(ψ(2^t))`: one side is thin, covered by a strip.
    CaseB,
    /// `err_x = 0`: the bracket has no solution.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MIndex {
    /// `None` exactly when `case` is `Exact`.
    pub m: Option<i32>,
    pub t: u32,
    pub gamma_t: f64,
    pub case: MCase,
}

/// The unique `m` with `2^(m-1) γ_t <= err_x < 2^m γ_t`, and its case.
pub fn m_index(err_x: f64, t: u32, psi: &ApproxFn) -> Result<MIndex> {
    if !(err_x >= 0.0 && err_x.is_finite()) {
        return Err(Error::Precondition(format!("err_x must be finite and >= 0, got {err_x}")));
    }
    let psi_t = psi_at_block(psi, t)?;
    let gamma_t = gamma_from_value(psi_t, t);
    if err_x == 0.0 {
        return Ok(MIndex {
            m: None,
            t,
            gamma_t,
            case: MCase::Exact,
        });
    }
    let mut m = 1 + (err_x / gamma_t).log2().floor() as i32;
    // Scaling by powers of two is exact, so the bracket is checked exactly.
    while scale_pow2(gamma_t, m - 1) > err_x {
        m -= 1;
    }
    while err_x >= scale_pow2(gamma_t, m) {
        m += 1;
    }
    let case = if scale_pow2(1.0, -m.abs()) >= t as f64 * psi_t.sqrt() {
        MCase::CaseA
    } else {
        MCase::CaseB
    };
    Ok(MIndex {
        m: Some(m),
        t,
        gamma_t,
        case,
    })
}

/// `t (2 - s)/(2s) + log2(t)/(2s)`, the largest `|m|` of a case-(a) hit once
/// `ψ` sits above the auxiliary floor.
pub fn m_bound_case_a(t: u32, s: f64) -> Result<f64> {
    check_s(s)?;
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    let t = t as f64;
    Ok(t * (2.0 - s) / (2.0 * s) + t.log2() / (2.0 * s))
}

/// Fraction of `grid_size` equispaced `x ∈ I` with at least one hit for
/// `q ∈ [2^n, Q]`.
pub fn empirical_tail_measure(
    curve: &Curve,
    psi1: &ApproxFn,
    psi2: Option<&ApproxFn>,
    mode: HitMode,
    grid_size: usize,
    n: u32,
    q_max: u64,
) -> Result<f64> {
    if grid_size == 0 {
        return Err(Error::Precondition("grid_size must be positive".into()));
    }
    if n >= 63 || (1u64 << n) > q_max {
        return Ok(0.0);
    }
    let th = Thresholds::new(1u64 << n, q_max, mode, psi1, psi2)?;
    let hits: usize = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let x = curve.grid_point(i, grid_size);
            usize::from(th.hits(x, curve.f(x)).next().is_some())
        })
        .sum();
    Ok(hits as f64 / grid_size as f64)
}

/// The independent-variable systems sampled by [`mc_classical`].
#[derive(Debug, Clone)]
pub enum Classical {
    /// `‖q x_i‖ < ψ_i(q)` for every `i`.
    Khintchine(Vec<ApproxFn>),
    /// `∏ ‖q x_i‖ < ψ(q)^n`, the normalization matching `Σ ψ^n ln^(n-1)`.
    Gallagher(ApproxFn),
}

/// Per-sample seed, a SplitMix64 finalizer over `(seed, index)`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of `samples` uniform points of `[0,1]^n` with at least one
/// `q ∈ [q_min, q_max]` solving the system. Each sample draws from its own
/// PCG64 stream seeded by [`sub_seed`], so results do not depend on
/// scheduling.
pub fn mc_classical(n: usize, system: &Classical, samples: usize, q_min: u64, q_max: u64, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    if samples == 0 {
        return Err(Error::Precondition("samples must be positive".into()));
    }
    if q_min == 0 || q_min > q_max {
        return Err(Error::Precondition(format!("need 1 <= q_min <= q_max, got [{q_min}, {q_max}]")));
    }
    let len = (q_max - q_min + 1) as usize;
    // thresholds[i * n + j]: bound for coordinate j at q = q_min + i; the
    // Gallagher system has a single bound per q.
    let (thresholds, per_q) = match system {
        Classical::Khintchine(psis) => {
            if psis.len() != n {
                return Err(Error::Precondition(format!(
                    "Khintchine system needs {n} functions, got {}",
                    psis.len()
                )));
            }
            let mut v = Vec::with_capacity(len * n);
            for q in q_min..=q_max {
                for p in psis {
                    v.push(p.eval(q)?);
                }
            }
            (v, n)
        }
        Classical::Gallagher(psi) => {
            let v = (q_min..=q_max)
                .map(|q| psi.eval(q).map(|p| p.powi(n as i32)))
                .collect::<Result<Vec<_>>>()?;
            (v, 1)
        }
    };
    let hits: usize = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = Pcg64::seed_from_u64(sub_seed(seed, i as u64));
            let point: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let hit = (0..len).any(|k| {
                let q = (q_min + k as u64) as f64;
                let th = &thresholds[k * per_q..(k + 1) * per_q];
                match system {
                    Classical::Khintchine(_) => point.iter().zip(th).all(|(&x, &b)| dist_to_int(q * x) < b),
                    Classical::Gallagher(_) => point.iter().map(|&x| dist_to_int(q * x)).product::<f64>() < th[0],
                }
            });
            usize::from(hit)
        })
        .sum();
    Ok(hits as f64 / samples as f64)
}
