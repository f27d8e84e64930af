//! Brute-force oracles shared by the integration tests. They enumerate every
//! candidate with generous margins and decide membership in exact rational
//! arithmetic on the parabola `y = x^2`, without touching the library's
//! pruning, interval arithmetic or float fast paths.

#![allow(dead_code)]

use dioph::dyadic::window;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};

pub fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn big(r: Ratio<i64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `delta = mant / 2^shift` exactly, for positive `delta < 1`.
fn dyadic_parts(delta: f64) -> (i128, u32) {
    let bits = delta.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1 << 52) - 1)) as i128;
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    assert!(e < 0 && -e <= 100, "delta outside the oracle's range");
    (mant, (-e) as u32)
}

/// Triples `(q, p1, p2)` with `q <= q_max`, `p1/q` in the closed interval
/// `[lo_num/lo_den, hi_num/hi_den]` and `|p1^2/q^2 - p2/q| < delta`, for every
/// `p2` with `|p2| <= q (1 + ceil(delta)) + 2`. Returns `(triples, reduced)`.
pub fn parabola_count_oracle(q_max: u64, delta: f64, lo: (i64, i64), hi: (i64, i64)) -> (u64, u64) {
    let (mant, shift) = dyadic_parts(delta);
    let mut all = 0;
    let mut reduced = 0;
    let reach = 1 + delta.ceil() as i128;
    for q in 1..=q_max as i128 {
        let rhs = mant * q * q;
        let (lo_n, lo_d, hi_n, hi_d) = (lo.0 as i128, lo.1 as i128, hi.0 as i128, hi.1 as i128);
        for p1 in -1..=q + 1 {
            if p1 * lo_d < lo_n * q || p1 * hi_d > hi_n * q {
                continue;
            }
            for p2 in -(reach * q + 2)..=reach * q + 2 {
                // |p1^2/q^2 - p2/q| < mant/2^shift  <=>  |p1^2 - p2 q| 2^shift < mant q^2
                let n = (p1 * p1 - p2 * q).abs();
                if n << shift < rhs {
                    all += 1;
                    if p1.gcd(&q) == 1 {
                        reduced += 1;
                    }
                }
            }
        }
    }
    (all, reduced)
}

/// Whether the open box meets the parabola over the open interval `(a, b)`.
pub fn parabola_box_meets(a: &BigRational, b: &BigRational, x: (f64, f64), y: (f64, f64)) -> bool {
    let l = rat(x.0).max(a.clone());
    let h = rat(x.1).min(b.clone());
    // x in (l, h) maps onto (l^2, h^2) since x^2 is increasing on I >= 0.
    l < h && &l * &l < rat(y.1) && rat(y.0) < &h * &h
}

/// [`parabola_box_meets`], skipping the exact evaluation when every
/// comparison is decided by a margin far above double rounding.
pub fn parabola_box_meets_fast(p: &Parabola, x: (f64, f64), y: (f64, f64)) -> bool {
    const MARGIN: f64 = 1e-9;
    let clear = |u: f64, v: f64| (u - v).abs() > MARGIN;
    let (l, h) = (x.0.max(p.af), x.1.min(p.bf));
    let decided = clear(x.0, p.af) && clear(x.1, p.bf) && clear(l, h) && clear(l * l, y.1) && clear(h * h, y.0);
    if decided {
        l < h && l * l < y.1 && y.0 < h * h
    } else {
        parabola_box_meets(&p.a, &p.b, x, y)
    }
}

/// One oracle cover element: `(q, kind, p1, p2, m, x_lo, x_hi)` with kind
/// ranked like the library (rect_a 0, strip_x 1, strip_y 2, rect_sim 3).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleElement {
    pub q: u64,
    pub rank: u8,
    pub p1: i64,
    pub p2: i64,
    pub m: i32,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl OracleElement {
    pub fn key(&self) -> (u64, u8, i64, i64, i32) {
        (self.q, self.rank, self.p1, self.p2, self.m)
    }
}

pub struct Parabola {
    pub a: BigRational,
    pub b: BigRational,
    pub af: f64,
    pub bf: f64,
}

impl Parabola {
    pub fn new(a: Ratio<i64>, b: Ratio<i64>) -> Self {
        let (af, bf) = (
            *a.numer() as f64 / *a.denom() as f64,
            *b.numer() as f64 / *b.denom() as f64,
        );
        Parabola { a: big(a), b: big(b), af, bf }
    }

    pub fn standard() -> Self {
        Parabola::new(Ratio::new(1, 10), Ratio::new(1, 1))
    }

    fn p_range(lo: f64, hi: f64, q: u64, w: f64) -> std::ops::RangeInclusive<i64> {
        let qf = q as f64;
        (((lo - w) * qf).floor() as i64 - 2)..=(((hi + w) * qf).ceil() as i64 + 2)
    }

    /// Every `(p1, p2)` whose open box of half-widths `(wx, wy)` around
    /// `(p1/q, p2/q)` meets the curve.
    pub fn boxes(&self, q: u64, wx: f64, wy: f64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for p1 in Self::p_range(self.af, self.bf, q, wx) {
            for p2 in Self::p_range(self.af * self.af, self.bf * self.bf, q, wy) {
                if parabola_box_meets_fast(self, window(p1, q, wx), window(p2, q, wy)) {
                    out.push((p1, p2));
                }
            }
        }
        out
    }

    /// `(triples, reduced)` box counts over block `t`.
    pub fn block_count(&self, t: u32, wx: f64, wy: f64) -> (u64, u64) {
        let mut all = 0;
        let mut reduced = 0;
        for q in (1u64 << t)..(2u64 << t) {
            for (p1, _) in self.boxes(q, wx, wy) {
                all += 1;
                if p1.gcd(&(q as i64)) == 1 {
                    reduced += 1;
                }
            }
        }
        (all, reduced)
    }

    /// x-extent of the curve inside a box known to meet it.
    fn piece(&self, x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
        let lo = x.0.max(self.af).max(y.0.max(0.0).sqrt());
        let hi = x.1.min(self.bf).min(y.1.sqrt());
        (lo, hi)
    }

    /// The simultaneous cover of block `t`, sorted.
    pub fn sim_cover(&self, t: u32, wx: f64, wy: f64) -> Vec<OracleElement> {
        let mut out = Vec::new();
        for q in (1u64 << t)..(2u64 << t) {
            for (p1, p2) in self.boxes(q, wx, wy) {
                let (x_lo, x_hi) = self.piece(window(p1, q, wx), window(p2, q, wy));
                out.push(OracleElement { q, rank: 3, p1, p2, m: 0, x_lo, x_hi });
            }
        }
        out.sort_by_key(|e| e.key());
        out
    }

    /// The multiplicative cover of block `t` for the frozen value `psi_t`:
    /// rectangles for every `|m| <= 30` passing both case-(a) tests, plus
    /// both families of strips. Sorted.
    pub fn mult_cover(&self, t: u32, psi_t: f64, s: f64) -> Vec<OracleElement> {
        let scale = (1u64 << t) as f64;
        let gamma = (2.0 * psi_t).sqrt() / scale;
        let bound = t as f64 * (2.0 - s) / (2.0 * s) + (t as f64).log2() / (2.0 * s);
        let threshold = t as f64 * psi_t.sqrt();
        let strip = 2.0 * t as f64 * psi_t / scale;
        let mut out = Vec::new();
        for q in (1u64 << t)..(2u64 << t) {
            for m in -30i32..=30 {
                if m.abs() as f64 > bound + 2.0 || 2f64.powi(-m.abs()) < threshold {
                    continue;
                }
                let (wx, wy) = (gamma * 2f64.powi(m), gamma * 2f64.powi(-m));
                for (p1, p2) in self.boxes(q, wx, wy) {
                    let (x_lo, x_hi) = self.piece(window(p1, q, wx), window(p2, q, wy));
                    out.push(OracleElement { q, rank: 0, p1, p2, m, x_lo, x_hi });
                }
            }
            for p1 in Self::p_range(self.af, self.bf, q, strip) {
                let (lo, hi) = window(p1, q, strip);
                let (lo, hi) = (lo.max(self.af), hi.min(self.bf));
                if lo < hi {
                    out.push(OracleElement { q, rank: 1, p1, p2: 0, m: 0, x_lo: lo, x_hi: hi });
                }
            }
            for p2 in Self::p_range(self.af * self.af, self.bf * self.bf, q, strip) {
                let (y_lo, y_hi) = window(p2, q, strip);
                let lo = self.af.max(y_lo.max(0.0).sqrt());
                let hi = self.bf.min(y_hi.max(0.0).sqrt());
                if lo < hi {
                    out.push(OracleElement { q, rank: 2, p1: 0, p2, m: 0, x_lo: lo, x_hi: hi });
                }
            }
        }
        out.sort_by_key(|e| e.key());
        out
    }
}

/// Converts a library element into the oracle's shape.
pub fn from_library(e: &dioph::cover::CoverElement) -> OracleElement {
    use dioph::cover::Source;
    let (rank, p1, p2, m) = match e.source {
        Source::RectA { p1, p2, m } => (0, p1, p2, m),
        Source::StripX { p1 } => (1, p1, 0, 0),
        Source::StripY { p2 } => (2, 0, p2, 0),
        Source::RectSim { p1, p2 } => (3, p1, p2, 0),
    };
    OracleElement { q: e.q, rank, p1, p2, m, x_lo: e.x_interval.lo, x_hi: e.x_interval.hi }
}

/// Compares two covers: identical keys in identical order, x-intervals
/// equal to within `tol`. Returns a description of the first difference.
pub fn compare_covers(library: &[OracleElement], oracle: &[OracleElement], tol: f64) -> Result<(), String> {
    if library.len() != oracle.len() {
        let lk: std::collections::BTreeSet<_> = library.iter().map(|e| e.key()).collect();
        let ok: std::collections::BTreeSet<_> = oracle.iter().map(|e| e.key()).collect();
        let extra: Vec<_> = lk.difference(&ok).take(3).collect();
        let missing: Vec<_> = ok.difference(&lk).take(3).collect();
        return Err(format!(
            "{} library vs {} oracle elements; extra {extra:?}, missing {missing:?}",
            library.len(),
            oracle.len()
        ));
    }
    for (l, o) in library.iter().zip(oracle) {
        if l.key() != o.key() {
            return Err(format!("key mismatch: {:?} vs {:?}", l.key(), o.key()));
        }
        if (l.x_lo - o.x_lo).abs() > tol || (l.x_hi - o.x_hi).abs() > tol {
            return Err(format!("interval mismatch at {:?}: {l:?} vs {o:?}", l.key()));
        }
    }
    Ok(())
}
