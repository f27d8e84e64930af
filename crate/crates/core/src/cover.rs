//! The coverings behind the convergence proofs, made explicit.
//!
//! Multiplicative block `t` (with `γ_t = sqrt(2ψ(2^t))/2^t`):
//!
//! * case (a): rectangles `|x - p1/q| < 2^m γ_t`, `|y - p2/q| < 2^-m γ_t` for
//!   every `m` with `|m| <= m_bound_case_a(t, s) + 2` and
//!   `2^-|m| >= t sqrt(ψ(2^t))`;
//! * case (b): vertical strips `|x - p1/q| < 2tψ(2^t)/2^t` and horizontal
//!   strips `|y - p2/q| < 2tψ(2^t)/2^t`, the latter pulled back to `x`.
//!
//! Simultaneous block `t`: rectangles `|x - p1/q| < ψ(2^t)/2^t`,
//! `|y - p2/q| < φ(2^t)/2^t`.
//!
//! Every element is stored as the x-projection of the curve piece it covers,
//! with the chord bound as its diameter. Boxes are tested with
//! [`Curve::box_meets`] over the open interval `(a, b)`; boxes whose test is
//! ambiguous in floating point are kept (a cover may only grow).

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::approx_fn::{check_s, mult_floor, tilde_psi_mult, ApproxFn, CompensatedSum};
use crate::curve::{Curve, Decision, XInterval};
use crate::dyadic::{block_range, block_start, candidate_range, check_t, gamma_from_value, psi_at_block, scale_pow2, window};
use crate::error::{Error, Result};
use crate::limsup::m_bound_case_a;
use crate::rational_count::{check_dominates, for_each_box, sim_half_widths, CountMode};

/// Largest predicted element count a materialized block may have.
pub const BUILD_LIMIT: f64 = 1e8;
/// Largest predicted element count a streamed block may have.
pub const STREAM_LIMIT: f64 = 1e10;
/// Extra `|m|` allowed beyond the case-(a) bound.
pub const M_SLACK: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    RectA { p1: i64, p2: i64, m: i32 },
    StripX { p1: i64 },
    StripY { p2: i64 },
    RectSim { p1: i64, p2: i64 },
}

impl Source {
    fn rank(&self) -> u8 {
        match self {
            Source::RectA { .. } => 0,
            Source::StripX { .. } => 1,
            Source::StripY { .. } => 2,
            Source::RectSim { .. } => 3,
        }
    }

    pub fn p1(&self) -> Option<i64> {
        match *self {
            Source::RectA { p1, .. } | Source::StripX { p1 } | Source::RectSim { p1, .. } => Some(p1),
            Source::StripY { .. } => None,
        }
    }

    pub fn p2(&self) -> Option<i64> {
        match *self {
            Source::RectA { p2, .. } | Source::StripY { p2 } | Source::RectSim { p2, .. } => Some(p2),
            Source::StripX { .. } => None,
        }
    }

    pub fn m(&self) -> Option<i32> {
        match *self {
            Source::RectA { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Source::RectA { .. } => "rect_a",
            Source::StripX { .. } => "strip_x",
            Source::StripY { .. } => "strip_y",
            Source::RectSim { .. } => "rect_sim",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverElement {
    pub t: u32,
    pub q: u64,
    pub source: Source,
    pub x_interval: XInterval,
    pub diameter: f64,
}

impl CoverElement {
    fn new(curve: &Curve, t: u32, q: u64, source: Source, x_interval: XInterval) -> Self {
        CoverElement {
            t,
            q,
            source,
            x_interval,
            diameter: curve.chord_diameter(&x_interval),
        }
    }

    /// Canonical order: `(q, source, p1, p2, m)` with rectangles of case (a)
    /// before vertical strips, horizontal strips and simultaneous rectangles.
    pub fn sort_key(&self) -> (u32, u64, u8, i64, i64, i32) {
        let s = &self.source;
        (
            self.t,
            self.q,
            s.rank(),
            s.p1().unwrap_or(0),
            s.p2().unwrap_or(0),
            s.m().unwrap_or(0),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerT {
    pub t: u32,
    pub count: u64,
    pub hausdorff_sum: f64,
    pub lebesgue_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSummary {
    /// `[n, T]`; `None` for an empty element list.
    pub t_range: Option<(u32, u32)>,
    pub element_count: u64,
    pub s: f64,
    /// `Σ diameter^s`.
    pub hausdorff_sum: f64,
    /// `Σ diameter`.
    pub lebesgue_sum: f64,
    pub per_t: Vec<PerT>,
}

impl CoverSummary {
    fn from_blocks(t_range: Option<(u32, u32)>, s: f64, per_t: Vec<PerT>) -> Self {
        let mut h = CompensatedSum::default();
        let mut l = CompensatedSum::default();
        for b in &per_t {
            h.add(b.hausdorff_sum);
            l.add(b.lebesgue_sum);
        }
        CoverSummary {
            t_range,
            element_count: per_t.iter().map(|b| b.count).sum(),
            s,
            hausdorff_sum: h.value(),
            lebesgue_sum: l.value(),
            per_t,
        }
    }
}

/// Running `(count, Σ d^s for each s, Σ d)` of one block.
#[derive(Debug, Clone)]
struct Acc<'a> {
    ss: &'a [f64],
    count: u64,
    h: Vec<CompensatedSum>,
    l: CompensatedSum,
}

#[inline]
fn pow_s(d: f64, s: f64) -> f64 {
    if s == 1.0 {
        d
    } else if s == 0.5 {
        d.sqrt()
    } else {
        d.powf(s)
    }
}

impl<'a> Acc<'a> {
    fn new(ss: &'a [f64]) -> Self {
        Acc {
            ss,
            count: 0,
            h: vec![CompensatedSum::default(); ss.len()],
            l: CompensatedSum::default(),
        }
    }

    #[inline]
    fn add(&mut self, d: f64) {
        self.count += 1;
        for (h, &s) in self.h.iter_mut().zip(self.ss) {
            h.add(pow_s(d, s));
        }
        self.l.add(d);
    }

    #[inline]
    fn add_many(&mut self, n: u64, d: f64) {
        if n == 0 {
            return;
        }
        self.count += n;
        for (h, &s) in self.h.iter_mut().zip(self.ss) {
            h.add(n as f64 * pow_s(d, s));
        }
        self.l.add(n as f64 * d);
    }

    fn merge(&mut self, other: &Acc) {
        self.count += other.count;
        for (h, o) in self.h.iter_mut().zip(&other.h) {
            h.add(o.value());
        }
        self.l.add(other.l.value());
    }

    fn per_t(&self, t: u32, i: usize) -> PerT {
        PerT {
            t,
            count: self.count,
            hausdorff_sum: self.h[i].value(),
            lebesgue_sum: self.l.value(),
        }
    }
}

/// `Σ_t Σ_elements`, per block and in total.
pub fn summarize(elements: &[CoverElement], s: f64) -> Result<CoverSummary> {
    check_s(s)?;
    let mut sorted: Vec<&CoverElement> = elements.iter().collect();
    sorted.sort_by_key(|e| e.sort_key());
    let ss = [s];
    let mut per_t: Vec<PerT> = Vec::new();
    let mut acc = Acc::new(&ss);
    let mut current: Option<u32> = None;
    for e in sorted {
        if current != Some(e.t) {
            if let Some(t) = current {
                per_t.push(acc.per_t(t, 0));
            }
            acc = Acc::new(&ss);
            current = Some(e.t);
        }
        acc.add(e.diameter);
    }
    if let Some(t) = current {
        per_t.push(acc.per_t(t, 0));
    }
    let t_range = per_t.first().map(|f| (f.t, per_t.last().map_or(f.t, |l| l.t)));
    Ok(CoverSummary::from_blocks(t_range, s, per_t))
}

/// Frozen data of a multiplicative block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultBlock {
    pub t: u32,
    pub s: f64,
    pub psi_t: f64,
    pub gamma_t: f64,
    /// Half-width `2tψ(2^t)/2^t` of the case-(b) strips.
    pub strip_half_width: f64,
    /// Case-(a) indices: `-k..=k`, possibly empty.
    pub case_a_ms: Vec<i32>,
}

impl MultBlock {
    /// Fails if `ψ(2^t)` lies below the auxiliary floor for `s`.
    pub fn new(psi: &ApproxFn, s: f64, t: u32, m_slack: i32) -> Result<Self> {
        check_t(t)?;
        let psi_t = psi_at_block(psi, t)?;
        let floor = mult_floor(s)?.eval(block_start(t))?;
        if psi_t < floor {
            return Err(Error::Precondition(format!(
                "psi(2^{t}) = {psi_t:e} lies below the floor {floor:e} for s = {s}; \
                 replace psi by tilde_psi_mult(psi, s)"
            )));
        }
        let cap = m_bound_case_a(t, s)?.floor() as i32 + m_slack;
        let threshold = t as f64 * psi_t.sqrt();
        let k = (0..=cap.max(-1)).take_while(|&m| scale_pow2(1.0, -m) >= threshold).last();
        let case_a_ms = match k {
            Some(k) => (-k..=k).collect(),
            None => Vec::new(),
        };
        Ok(MultBlock {
            t,
            s,
            psi_t,
            gamma_t: gamma_from_value(psi_t, t),
            strip_half_width: 2.0 * t as f64 * psi_t / block_start(t) as f64,
            case_a_ms,
        })
    }

    /// Same boxes and strips (the exponent only enters through the m-range).
    fn same_cover(&self, other: &MultBlock) -> bool {
        self.t == other.t && self.psi_t == other.psi_t && self.case_a_ms == other.case_a_ms
    }

    fn k(&self) -> Option<i32> {
        self.case_a_ms.last().copied()
    }
}

fn curve_extent(curve: &Curve) -> (f64, f64) {
    let (ya, yb) = curve.y_range();
    (curve.b() - curve.a(), yb - ya)
}

/// `Σ_q q^2` and block size for block `t`.
fn block_moments(t: u32) -> (f64, f64) {
    let r = block_range(t);
    let (lo, hi) = (r.start as f64, (r.end - 1) as f64);
    let s2 = (hi * (hi + 1.0) * (2.0 * hi + 1.0) - (lo - 1.0) * lo * (2.0 * lo - 1.0)) / 6.0;
    (s2, hi - lo + 1.0)
}

/// Expected number of boxes of half-widths `(wx, wy)` around lattice points
/// of a block that meet the curve: the lattice count of the neighbourhood.
fn expected_boxes(curve: &Curve, t: u32, wx: f64, wy: f64) -> f64 {
    let (len, rise) = curve_extent(curve);
    let (s2, count) = block_moments(t);
    s2 * (2.0 * wy * len + 2.0 * wx * rise + 4.0 * wx * wy) + count
}

/// Predicted element count of a multiplicative block, for the resource guard.
pub fn predicted_mult_elements(curve: &Curve, block: &MultBlock) -> f64 {
    let (len, rise) = curve_extent(curve);
    let t = block.t;
    let rects: f64 = block
        .case_a_ms
        .iter()
        .map(|&m| expected_boxes(curve, t, scale_pow2(block.gamma_t, m), scale_pow2(block.gamma_t, -m)))
        .sum();
    let (_, count) = block_moments(t);
    let top = block_range(t).end as f64;
    let strips = count * (top * (len + rise + 4.0 * block.strip_half_width) + 4.0);
    rects + strips
}

/// Predicted element count of a simultaneous block, for the resource guard.
pub fn predicted_sim_elements(curve: &Curve, psi: &ApproxFn, phi: &ApproxFn, t: u32) -> Result<f64> {
    let (wx, wy) = sim_half_widths(psi, phi, t)?;
    Ok(expected_boxes(curve, t, wx, wy))
}

fn guard(predicted: f64, limit: f64) -> Result<()> {
    if predicted > limit {
        Err(Error::ResourceGuard { predicted, limit })
    } else {
        Ok(())
    }
}

/// Case-(b) elements of denominator `q`, in canonical order.
fn strips_q(curve: &Curve, block: &MultBlock, q: u64, out: &mut Vec<CoverElement>) {
    let (a, b) = (curve.a(), curve.b());
    let w = block.strip_half_width;
    for p1 in candidate_range(a, b, q, w) {
        let (lo, hi) = window(p1, q, w);
        let (lo, hi) = (lo.max(a), hi.min(b));
        if lo < hi {
            out.push(CoverElement::new(curve, block.t, q, Source::StripX { p1 }, XInterval { lo, hi }));
        }
    }
    let (ya, yb) = curve.y_range();
    for p2 in candidate_range(ya, yb, q, w) {
        let (y_lo, y_hi) = window(p2, q, w);
        if let Some(x) = curve.invert_on_interval(y_lo, y_hi) {
            out.push(CoverElement::new(curve, block.t, q, Source::StripY { p2 }, x));
        }
    }
}

fn push_box(curve: &Curve, t: u32, q: u64, source: Source, hit: &crate::rational_count::BoxHit, out: &mut Vec<CoverElement>) {
    let x = curve.box_piece(hit.x_lo, hit.x_hi, hit.y_lo, hit.y_hi);
    out.push(CoverElement::new(curve, t, q, source, x));
}

/// All elements of denominator `q`, in canonical order, by direct
/// enumeration of every case-(a) index.
fn mult_elements_q(curve: &Curve, block: &MultBlock, q: u64) -> Vec<CoverElement> {
    let mut out = Vec::new();
    for &m in &block.case_a_ms {
        let wx = scale_pow2(block.gamma_t, m);
        let wy = scale_pow2(block.gamma_t, -m);
        for_each_box(curve, q, wx, wy, CountMode::Triples, |hit| {
            push_box(curve, block.t, q, Source::RectA { p1: hit.p1, p2: hit.p2, m }, &hit, &mut out);
        });
    }
    strips_q(curve, block, q, &mut out);
    out.sort_by_key(|e| e.sort_key());
    out
}

fn sim_elements_q(curve: &Curve, t: u32, q: u64, wx: f64, wy: f64) -> Vec<CoverElement> {
    let mut out = Vec::new();
    for_each_box(curve, q, wx, wy, CountMode::Triples, |hit| {
        push_box(curve, t, q, Source::RectSim { p1: hit.p1, p2: hit.p2 }, &hit, &mut out);
    });
    out
}

/// The multiplicative cover of block `t`, in canonical order.
///
/// `psi` must already sit above the auxiliary floor (see
/// [`tilde_psi_mult`]).
pub fn build_cover_mult(curve: &Curve, psi: &ApproxFn, s: f64, t: u32) -> Result<Vec<CoverElement>> {
    build_cover_mult_with_slack(curve, psi, s, t, M_SLACK)
}

/// [`build_cover_mult`] with a custom allowance beyond the case-(a) bound.
pub fn build_cover_mult_with_slack(curve: &Curve, psi: &ApproxFn, s: f64, t: u32, m_slack: i32) -> Result<Vec<CoverElement>> {
    let block = MultBlock::new(psi, s, t, m_slack)?;
    guard(predicted_mult_elements(curve, &block), BUILD_LIMIT)?;
    let per_q: Vec<Vec<CoverElement>> = block_range(t)
        .into_par_iter()
        .map(|q| mult_elements_q(curve, &block, q))
        .collect();
    Ok(per_q.into_iter().flatten().collect())
}

/// The simultaneous cover of block `t`, in canonical order.
pub fn build_cover_sim(curve: &Curve, psi: &ApproxFn, phi: &ApproxFn, t: u32) -> Result<Vec<CoverElement>> {
    check_t(t)?;
    check_dominates(psi, phi, t)?;
    guard(predicted_sim_elements(curve, psi, phi, t)?, BUILD_LIMIT)?;
    let (wx, wy) = sim_half_widths(psi, phi, t)?;
    let per_q: Vec<Vec<CoverElement>> = block_range(t)
        .into_par_iter()
        .map(|q| sim_elements_q(curve, t, q, wx, wy))
        .collect();
    Ok(per_q.into_iter().flatten().collect())
}

/// Which cover a tail sum runs over.
#[derive(Debug, Clone)]
pub enum TailMode {
    /// Multiplicative cover with `tilde_psi_mult(psi, s)`; sums of `d^s`.
    Mult { psi: ApproxFn, s: f64 },
    /// Simultaneous cover (`psi >= phi` on every block); sums with `s = 1`.
    Sim { psi: ApproxFn, phi: ApproxFn },
}

impl TailMode {
    pub fn s(&self) -> f64 {
        match self {
            TailMode::Mult { s, .. } => *s,
            TailMode::Sim { .. } => 1.0,
        }
    }
}

/// Summary of one block, without materializing its elements.
pub fn tail_block(curve: &Curve, mode: &TailMode, t: u32) -> Result<PerT> {
    check_t(t)?;
    match mode {
        TailMode::Mult { psi, s } => Ok(mult_blocks(curve, psi, &[*s], t)?.remove(0)),
        TailMode::Sim { psi, phi } => {
            check_dominates(psi, phi, t)?;
            guard(predicted_sim_elements(curve, psi, phi, t)?, STREAM_LIMIT)?;
            let (wx, wy) = sim_half_widths(psi, phi, t)?;
            let ss = [1.0];
            let parts: Vec<Acc> = block_range(t)
                .into_par_iter()
                .map(|q| {
                    let mut acc = Acc::new(&ss);
                    for e in sim_elements_q(curve, t, q, wx, wy) {
                        acc.add(e.diameter);
                    }
                    acc
                })
                .collect();
            Ok(fold(&ss, &parts).per_t(t, 0))
        }
    }
}

/// Multiplicative block summaries of block `t` for several exponents, one per
/// entry of `ss`, each over the cover built from `tilde_psi_mult(psi, s)`.
/// Exponents whose covers coincide share one enumeration.
fn mult_blocks(curve: &Curve, psi: &ApproxFn, ss: &[f64], t: u32) -> Result<Vec<PerT>> {
    let blocks = ss
        .iter()
        .map(|&s| MultBlock::new(&tilde_psi_mult(psi, s)?, s, t, M_SLACK))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<Option<PerT>> = vec![None; ss.len()];
    for i in 0..ss.len() {
        if out[i].is_some() {
            continue;
        }
        let same: Vec<usize> = (i..ss.len())
            .filter(|&j| out[j].is_none() && blocks[j].same_cover(&blocks[i]))
            .collect();
        let group_ss: Vec<f64> = same.iter().map(|&j| ss[j]).collect();
        let block = &blocks[i];
        guard(predicted_mult_elements(curve, block), STREAM_LIMIT)?;
        let parts: Vec<Acc> = block_range(t)
            .into_par_iter()
            .map(|q| mult_summary_q(curve, block, q, &group_ss))
            .collect();
        let total = fold(&group_ss, &parts);
        for (k, &j) in same.iter().enumerate() {
            out[j] = Some(total.per_t(t, k));
        }
    }
    Ok(out.into_iter().map(|p| p.expect("every exponent summarized")).collect())
}

fn fold<'a>(ss: &'a [f64], parts: &[Acc]) -> Acc<'a> {
    let mut total = Acc::new(ss);
    for p in parts {
        total.merge(p);
    }
    total
}

/// Cover sums over the blocks `t ∈ [n, T]`.
pub fn tail_sum(curve: &Curve, mode: &TailMode, n: u32, t_max: u32) -> Result<CoverSummary> {
    if n > t_max {
        return Err(Error::Precondition(format!("need n <= T, got n = {n}, T = {t_max}")));
    }
    let per_t = (n..=t_max).map(|t| tail_block(curve, mode, t)).collect::<Result<Vec<_>>>()?;
    Ok(CoverSummary::from_blocks(Some((n, t_max)), mode.s(), per_t))
}

/// Multiplicative block summaries for several exponents at once:
/// `result[i][t - n]` is block `t` of the cover for `ss[i]`. Identical to
/// calling [`tail_block`] per exponent, but blocks whose covers coincide
/// across exponents are enumerated once.
pub fn mult_block_table(curve: &Curve, psi: &ApproxFn, ss: &[f64], n: u32, t_max: u32) -> Result<Vec<Vec<PerT>>> {
    if n > t_max {
        return Err(Error::Precondition(format!("need n <= T, got n = {n}, T = {t_max}")));
    }
    let mut table = vec![Vec::new(); ss.len()];
    for t in n..=t_max {
        for (i, p) in mult_blocks(curve, psi, ss, t)?.into_iter().enumerate() {
            table[i].push(p);
        }
    }
    Ok(table)
}

/// Sums blocks `[n, T]` of a per-block table starting at `first`.
pub fn window_summary(blocks: &[PerT], first: u32, n: u32, t_max: u32, s: f64) -> Result<CoverSummary> {
    let lo = n.checked_sub(first).map(|i| i as usize);
    let hi = t_max.checked_sub(first).map(|i| i as usize);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi && hi < blocks.len() => {
            Ok(CoverSummary::from_blocks(Some((n, t_max)), s, blocks[lo..=hi].to_vec()))
        }
        _ => Err(Error::Precondition(format!("blocks [{n}, {t_max}] are not all in the table"))),
    }
}

/// Streaming summary of the multiplicative elements of denominator `q`.
///
/// Interior vertical strips all have the same width and are counted in
/// bulk. Case-(a) rectangles are screened per `(p1, p2)`: with `e` the
/// distance from `p1/q` to `I`, `x_c` the nearest point of `I` and
/// `d = |f(x_c) - p2/q|`, the box at index `m` can only meet the curve if
/// `d < 2^-m γ + c1 (2^m γ - e)^+`. That solves to a few ranges of `m`; only
/// those are decided exactly.
fn mult_summary_q<'a>(curve: &Curve, block: &MultBlock, q: u64, ss: &'a [f64]) -> Acc<'a> {
    let mut acc = Acc::new(ss);
    let (a, b) = (curve.a(), curve.b());
    let qf = q as f64;

    if let Some(k) = block.k() {
        let g = block.gamma_t;
        let c1 = curve.c1() * (1.0 + 1e-9);
        let reach = |m: i32, e: f64| scale_pow2(g, -m) + c1 * (scale_pow2(g, m) - e).max(0.0);
        let wx_max = scale_pow2(g, k);
        for p1 in candidate_range(a, b, q, wx_max) {
            let c = p1 as f64 / qf;
            let xc = c.clamp(a, b);
            let e = (c - xc).abs();
            if e >= wx_max {
                continue;
            }
            let fc = curve.f(xc);
            let rmax = reach(-k, e).max(reach(k, e)) * (1.0 + 1e-9) + 1e-15;
            let first = ((fc - rmax) * qf).floor() as i64;
            let last = ((fc + rmax) * qf).ceil() as i64;
            for p2 in first..=last {
                let d = ((fc - p2 as f64 / qf).abs() - 1e-13 * (1.0 + fc.abs())).max(0.0);
                if d >= rmax {
                    continue;
                }
                let (lo_cut, hi_cut) = m_cuts(d, e, g, c1);
                let mut visit = |m: i32| {
                    let wx = scale_pow2(g, m);
                    let wy = scale_pow2(g, -m);
                    let (x_lo, x_hi) = window(p1, q, wx);
                    let (y_lo, y_hi) = window(p2, q, wy);
                    if curve.box_meets(x_lo, x_hi, y_lo, y_hi) != Decision::No {
                        let x = curve.box_piece(x_lo, x_hi, y_lo, y_hi);
                        acc.add(curve.chord_diameter(&x));
                    }
                };
                let low_end = lo_cut.min(k);
                for m in -k..=low_end {
                    visit(m);
                }
                for m in hi_cut.max(low_end + 1).max(-k)..=k {
                    visit(m);
                }
            }
        }
    }

    // Vertical strips: the bulk of them lie inside I and share one width.
    let w = block.strip_half_width;
    let interior_d = curve.chord_diameter(&XInterval { lo: 0.0, hi: 2.0 * w });
    let mut interior = 0u64;
    for p1 in candidate_range(a, b, q, w) {
        let (lo, hi) = window(p1, q, w);
        if lo > a && hi < b {
            interior += 1;
        } else {
            let (lo, hi) = (lo.max(a), hi.min(b));
            if lo < hi {
                acc.add(curve.chord_diameter(&XInterval { lo, hi }));
            }
        }
    }
    acc.add_many(interior, interior_d);

    let (ya, yb) = curve.y_range();
    for p2 in candidate_range(ya, yb, q, w) {
        let (y_lo, y_hi) = window(p2, q, w);
        if let Some(x) = curve.invert_on_interval(y_lo, y_hi) {
            acc.add(curve.chord_diameter(&x));
        }
    }
    acc
}

/// `floor(log2 x)` for positive normal `x`, read off the exponent bits.
#[inline]
fn floor_log2(x: f64) -> i32 {
    ((x.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

/// Bounds `(lo, hi)` such that only `m <= lo` or `m >= hi` can satisfy
/// `d < 2^-m g + c1 (2^m g - e)^+`, with a relative margin of `1e-9`.
#[inline]
fn m_cuts(d: f64, e: f64, g: f64, c1: f64) -> (i32, i32) {
    const ALL: (i32, i32) = (i32::MAX / 2, i32::MAX / 2);
    if d <= 0.0 {
        return ALL;
    }
    // With the slope term: c1 g z^2 - (d + c1 e) z + g > 0, z = 2^m.
    let bq = d + c1 * e;
    let disc = bq * bq - 4.0 * c1 * g * g;
    if disc <= 0.0 {
        return ALL;
    }
    let z_hi = (bq + disc.sqrt()) / (2.0 * c1 * g);
    let z_lo = 1.0 / (c1 * z_hi);
    // Without it: 2^m < g/d.
    let low = (g / d).max(z_lo) * (1.0 + 1e-9);
    (floor_log2(low), floor_log2(z_hi * (1.0 - 1e-9)) + 1)
}

/// Writes elements as CSV with columns
/// `t,q,p1,p2,m,source,x_lo,x_hi,diameter`; absent indices are empty.
pub fn write_csv<W: Write>(elements: &[CoverElement], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Domain(format!("csv output failed: {e}"));
    w.write_record(["t", "q", "p1", "p2", "m", "source", "x_lo", "x_hi", "diameter"])
        .map_err(io)?;
    let opt = |v: Option<i64>| v.map(|v| v.to_string()).unwrap_or_default();
    for e in elements {
        w.write_record([
            e.t.to_string(),
            e.q.to_string(),
            opt(e.source.p1()),
            opt(e.source.p2()),
            opt(e.source.m().map(i64::from)),
            e.source.name().to_string(),
            format!("{:?}", e.x_interval.lo),
            format!("{:?}", e.x_interval.hi),
            format!("{:?}", e.diameter),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv output failed: {e}")))?;
    Ok(())
}
