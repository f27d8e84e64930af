//! Non-degenerate planar curves `y = f(x)` over a closed interval `I = [a, b]`.
//!
//! Every curve carries declared slope bounds `c1 > f' > c2 > 0`; they are
//! checked by [`Curve::verify_nondegeneracy`], never inferred silently.
//! Polynomial curves with rational coefficients additionally support exact
//! comparisons, so decisions on them are never boundary-ambiguous.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance on `x` for bisection, and the width of the band around a
/// strict-inequality boundary inside which floating decisions are ambiguous.
pub const BOUNDARY_TOL: f64 = 1.0 / (1u64 << 50) as f64;


/// Outcome of a strict comparison that may be too close to call in floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Ambiguous,
}

impl Decision {
    fn and(self, other: Decision) -> Decision {
        match (self, other) {
            (Decision::No, _) | (_, Decision::No) => Decision::No,
            (Decision::Ambiguous, _) | (_, Decision::Ambiguous) => Decision::Ambiguous,
            _ => Decision::Yes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XInterval {
    pub lo: f64,
    pub hi: f64,
}

impl XInterval {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Polynomial `Σ a_k x^k` with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPoly {
    coeffs: Vec<Ratio<i64>>,
    float_coeffs: Vec<f64>,
    /// `denom · a_k`, all integral.
    int_coeffs: Vec<i128>,
    denom: i128,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Ratio<i64>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Ratio::zero());
        }
        let denom = coeffs
            .iter()
            .fold(1i128, |acc, c| acc.lcm(&(*c.denom() as i128)));
        let int_coeffs = coeffs
            .iter()
            .map(|c| *c.numer() as i128 * (denom / *c.denom() as i128))
            .collect();
        let float_coeffs = coeffs
            .iter()
            .map(|c| *c.numer() as f64 / *c.denom() as f64)
            .collect();
        RationalPoly {
            coeffs,
            float_coeffs,
            int_coeffs,
            denom,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Ratio<i64>] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.float_coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `p(x)` together with a bound on the rounding error of the Horner
    /// evaluation (coefficient rounding included), with a safety factor of 4.
    #[inline]
    pub fn eval_with_error(&self, x: f64) -> (f64, f64) {
        let ax = x.abs();
        let (v, mag) = self
            .float_coeffs
            .iter()
            .rev()
            .fold((0.0, 0.0), |(v, m), &c| (v * x + c, m * ax + c.abs()));
        let n = self.float_coeffs.len() as f64;
        (v, 8.0 * (n + 1.0) * f64::EPSILON * mag)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.float_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        self.float_coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + (k * (k - 1)) as f64 * c)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * x + BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
        })
    }

    /// `(N, M)` with `q · f(p/q) = N / M`, where `M = denom · q^(deg-1)` for
    /// `deg >= 1`. `None` on i128 overflow.
    pub(crate) fn scaled_numerator(&self, p: i64, q: i64) -> Option<(i128, i128)> {
        let d = self.degree();
        let (p, q) = (p as i128, q as i128);
        // N = Σ c_k p^k q^(d-k), then q f(p/q) = N / (denom q^(d-1)).
        let mut n: i128 = 0;
        let mut p_pow: i128 = 1;
        for (k, &c) in self.int_coeffs.iter().enumerate() {
            let q_pow = q.checked_pow((d - k) as u32)?;
            n = n.checked_add(c.checked_mul(p_pow)?.checked_mul(q_pow)?)?;
            if k < d {
                p_pow = p_pow.checked_mul(p)?;
            }
        }
        if d == 0 {
            // q f = q a_0 = (denom a_0) q / denom.
            return Some((n.checked_mul(q)?, self.denom));
        }
        let m = self.denom.checked_mul(q.checked_pow((d - 1) as u32)?)?;
        Some((n, m))
    }
}

/// User-supplied analytic curve.
pub trait AnalyticFn: Send + Sync {
    fn f(&self, x: f64) -> f64;
    fn df(&self, x: f64) -> f64;
    fn d2f(&self, x: f64) -> f64;
    /// Closed-form inverse of `f` on the curve's interval, when one exists.
    fn inverse(&self, _y: f64) -> Option<f64> {
        None
    }
}

struct ClosureCurve<F, D, D2> {
    f: F,
    df: D,
    d2f: D2,
}

impl<F, D, D2> AnalyticFn for ClosureCurve<F, D, D2>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
    D2: Fn(f64) -> f64 + Send + Sync,
{
    fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }
    fn d2f(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}

#[derive(Clone)]
pub enum Shape {
    Polynomial(RationalPoly),
    /// Lower-left arc of the unit circle centred at (0, 1): `1 - sqrt(1 - x²)`.
    CircleArc,
    /// Hyperbola branch `x / (x + 1)`.
    Hyperbola,
    Custom(Arc<dyn AnalyticFn>),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Polynomial(p) => f.debug_tuple("Polynomial").field(&p.coeffs).finish(),
            Shape::CircleArc => write!(f, "CircleArc"),
            Shape::Hyperbola => write!(f, "Hyperbola"),
            Shape::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    RationalPolynomial,
    Analytic,
}

#[derive(Debug, Clone)]
pub struct Curve {
    name: String,
    lo: Ratio<i64>,
    hi: Ratio<i64>,
    a: f64,
    b: f64,
    c1: f64,
    c2: f64,
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub samples: usize,
    pub min_slope: f64,
    pub max_slope: f64,
    pub min_abs_f2: f64,
    pub c1: f64,
    pub c2: f64,
    pub ok: bool,
}

fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Curve {
    pub fn new(
        name: impl Into<String>,
        lo: Ratio<i64>,
        hi: Ratio<i64>,
        c1: f64,
        c2: f64,
        shape: Shape,
    ) -> Result<Self> {
        if lo >= hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        if !(c1 > c2) {
            return Err(Error::Domain(format!("slope bounds need c1 > c2, got c1={c1}, c2={c2}")));
        }
        Ok(Curve {
            name: name.into(),
            a: ratio_to_f64(&lo),
            b: ratio_to_f64(&hi),
            lo,
            hi,
            c1,
            c2,
            shape,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn analytic<F, D, D2>(
        name: impl Into<String>,
        lo: Ratio<i64>,
        hi: Ratio<i64>,
        c1: f64,
        c2: f64,
        f: F,
        df: D,
        d2f: D2,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let shape = Shape::Custom(Arc::new(ClosureCurve { f, df, d2f }));
        Curve::new(name, lo, hi, c1, c2, shape)
    }

    /// `x²` on `[0.1, 1]`.
    pub fn parabola() -> Self {
        let poly = RationalPoly::new(vec![Ratio::zero(), Ratio::zero(), Ratio::one()]);
        Curve::new("parabola", Ratio::new(1, 10), Ratio::one(), 2.5, 0.1, Shape::Polynomial(poly))
            .expect("catalog curve")
    }

    /// `1 - sqrt(1 - x²)` on `[0.3, 0.8]`; slopes run from 0.3145 to 1.3333.
    pub fn circle_arc() -> Self {
        Curve::new("circle-arc", Ratio::new(3, 10), Ratio::new(4, 5), 1.4, 0.3, Shape::CircleArc)
            .expect("catalog curve")
    }

    /// `x / (x + 1)` on `[0.1, 1]`; slopes run from 0.25 to 0.8264.
    pub fn hyperbola() -> Self {
        Curve::new("hyperbola", Ratio::new(1, 10), Ratio::one(), 0.9, 0.2, Shape::Hyperbola)
            .expect("catalog curve")
    }

    /// `x³ + x` on `[0.1, 1]`; slopes run from 1.03 to 4.
    pub fn cubic() -> Self {
        let poly = RationalPoly::new(vec![Ratio::zero(), Ratio::one(), Ratio::zero(), Ratio::one()]);
        Curve::new("cubic", Ratio::new(1, 10), Ratio::one(), 4.5, 1.0, Shape::Polynomial(poly))
            .expect("catalog curve")
    }

    /// Same curve and slope bounds over a different interval. The bounds are
    /// not re-checked; use [`Curve::verify_nondegeneracy`].
    pub fn with_interval(&self, lo: Ratio<i64>, hi: Ratio<i64>) -> Result<Self> {
        Curve::new(self.name.clone(), lo, hi, self.c1, self.c2, self.shape.clone())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn interval_exact(&self) -> (Ratio<i64>, Ratio<i64>) {
        (self.lo, self.hi)
    }
    pub fn interval_len(&self) -> f64 {
        self.b - self.a
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> CurveKind {
        match self.shape {
            Shape::Polynomial(_) => CurveKind::RationalPolynomial,
            _ => CurveKind::Analytic,
        }
    }

    pub fn exact_poly(&self) -> Option<&RationalPoly> {
        match &self.shape {
            Shape::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Polynomial(p) => p.eval(x),
            Shape::CircleArc => 1.0 - (1.0 - x * x).sqrt(),
            Shape::Hyperbola => x / (x + 1.0),
            Shape::Custom(c) => c.f(x),
        }
    }

    pub fn df(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Polynomial(p) => p.deriv(x),
            Shape::CircleArc => x / (1.0 - x * x).sqrt(),
            Shape::Hyperbola => 1.0 / ((x + 1.0) * (x + 1.0)),
            Shape::Custom(c) => c.df(x),
        }
    }

    pub fn d2f(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Polynomial(p) => p.second_deriv(x),
            Shape::CircleArc => (1.0 - x * x).powf(-1.5),
            Shape::Hyperbola => -2.0 / (x + 1.0).powi(3),
            Shape::Custom(c) => c.d2f(x),
        }
    }

    /// `f(a)` and `f(b)`.
    pub fn y_range(&self) -> (f64, f64) {
        (self.f(self.a), self.f(self.b))
    }

    /// `f^{-1}(y)` clamped to `[a, b]`.
    pub fn inverse(&self, y: f64) -> f64 {
        let (ya, yb) = self.y_range();
        if y <= ya {
            return self.a;
        }
        if y >= yb {
            return self.b;
        }
        let closed = match &self.shape {
            Shape::Polynomial(p) if is_monomial_square(p) => Some(y.sqrt()),
            Shape::CircleArc => {
                let u = 1.0 - y;
                Some((1.0 - u * u).sqrt())
            }
            Shape::Hyperbola => Some(y / (1.0 - y)),
            Shape::Custom(c) => c.inverse(y),
            Shape::Polynomial(_) => None,
        };
        let x = match closed {
            Some(x) => x,
            None => self.newton_bisect(y),
        };
        x.clamp(self.a, self.b)
    }

    /// Safeguarded Newton iteration inside a shrinking bisection bracket.
    fn newton_bisect(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (self.a, self.b);
        let mut x = lo + (hi - lo) * 0.5;
        for _ in 0..200 {
            let fx = self.f(x) - y;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.df(x);
            let newton = x - fx / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                lo + (hi - lo) * 0.5
            };
            if (next - x).abs() <= BOUNDARY_TOL * 0.25 || hi - lo <= BOUNDARY_TOL {
                return next;
            }
            x = next;
        }
        x
    }

    /// Checks `c1 > f' > c2 > 0` and `f'' != 0` on an equispaced grid.
    pub fn verify_nondegeneracy(&self, samples: usize) -> Result<NondegeneracyReport> {
        if samples < 2 {
            return Err(Error::Precondition("verification needs at least 2 samples".into()));
        }
        let mut min_slope = f64::INFINITY;
        let mut max_slope = f64::NEG_INFINITY;
        let mut min_abs_f2 = f64::INFINITY;
        let mut ok = self.c2 > 0.0;
        for i in 0..samples {
            let x = self.grid_point(i, samples);
            let d1 = self.df(x);
            let d2 = self.d2f(x);
            if !d1.is_finite() || !d2.is_finite() || !self.f(x).is_finite() {
                return Err(Error::Evaluation {
                    x,
                    what: "non-finite value of f, f' or f''".into(),
                });
            }
            min_slope = min_slope.min(d1);
            max_slope = max_slope.max(d1);
            min_abs_f2 = min_abs_f2.min(d2.abs());
            ok &= self.c1 > d1 && d1 > self.c2 && d2 != 0.0;
        }
        Ok(NondegeneracyReport {
            samples,
            min_slope,
            max_slope,
            min_abs_f2,
            c1: self.c1,
            c2: self.c2,
            ok,
        })
    }

    /// `i`-th of `n` equispaced points of `I`, endpoints included.
    pub fn grid_point(&self, i: usize, n: usize) -> f64 {
        if n <= 1 {
            return self.a;
        }
        if i + 1 == n {
            return self.b;
        }
        self.a + (self.b - self.a) * (i as f64 / (n - 1) as f64)
    }

    /// `{x ∈ I : y_lo < f(x) < y_hi}` as an interval, or `None` if empty.
    pub fn invert_on_interval(&self, y_lo: f64, y_hi: f64) -> Option<XInterval> {
        if !(y_lo < y_hi) {
            return None;
        }
        let (ya, yb) = self.y_range();
        if y_hi <= ya || y_lo >= yb {
            return None;
        }
        let lo = if y_lo < ya { self.a } else { self.inverse(y_lo) };
        let hi = if y_hi > yb { self.b } else { self.inverse(y_hi) };
        (lo < hi).then_some(XInterval { lo, hi })
    }

    /// Upper bound on the Euclidean diameter of the curve piece over `x`.
    pub fn chord_diameter(&self, x: &XInterval) -> f64 {
        x.width() * (1.0 + self.c1 * self.c1).sqrt()
    }

    /// Exact ordering of `f(x)` against `y`, for polynomial curves.
    fn cmp_exact(&self, poly: &RationalPoly, x: f64, y: f64) -> Ordering {
        let xr = BigRational::from_f64(x).expect("finite");
        let yr = BigRational::from_f64(y).expect("finite");
        poly.eval_exact(&xr).cmp(&yr)
    }

    /// Is `f(x) < y`?
    pub fn f_below(&self, x: f64, y: f64) -> Decision {
        self.strict_cmp(x, y, Ordering::Less)
    }

    /// Is `f(x) > y`?
    pub fn f_above(&self, x: f64, y: f64) -> Decision {
        self.strict_cmp(x, y, Ordering::Greater)
    }

    #[inline]
    fn strict_cmp(&self, x: f64, y: f64, want: Ordering) -> Decision {
        let decide = |ord: Ordering| if ord == want { Decision::Yes } else { Decision::No };
        match &self.shape {
            Shape::Polynomial(p) => {
                let (v, err) = p.eval_with_error(x);
                let gap = y - v;
                if gap.abs() > err + 4.0 * f64::EPSILON * y.abs() + f64::MIN_POSITIVE {
                    decide(if gap > 0.0 { Ordering::Less } else { Ordering::Greater })
                } else {
                    decide(self.cmp_exact(p, x, y))
                }
            }
            _ => {
                let gap = y - self.f(x);
                if gap.abs() <= BOUNDARY_TOL {
                    Decision::Ambiguous
                } else {
                    decide(if gap > 0.0 { Ordering::Less } else { Ordering::Greater })
                }
            }
        }
    }

    /// Does the open box `(x_lo, x_hi) × (y_lo, y_hi)` meet the curve over the
    /// open interval `(a, b)`?
    ///
    /// `f` is increasing, so with `L = max(x_lo, a)`, `H = min(x_hi, b)` the
    /// piece is nonempty iff `L < H`, `f(L) < y_hi` and `f(H) > y_lo`.
    #[inline]
    pub fn box_meets(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Decision {
        let l = x_lo.max(self.a);
        let h = x_hi.min(self.b);
        if !(l < h) || !(y_lo < y_hi) {
            return Decision::No;
        }
        let first = self.f_below(l, y_hi);
        if first == Decision::No {
            return Decision::No;
        }
        first.and(self.f_above(h, y_lo))
    }

    /// Projection onto the x-axis of the curve piece inside the box. Only
    /// meaningful when [`Curve::box_meets`] returned `Yes`; never degenerate.
    pub fn box_piece(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> XInterval {
        let l = x_lo.max(self.a);
        let h = x_hi.min(self.b);
        let lo = if self.f(l) > y_lo { l } else { self.inverse(y_lo).max(l) };
        let mut hi = if self.f(h) < y_hi { h } else { self.inverse(y_hi).min(h) };
        if hi <= lo {
            hi = lo.next_up();
        }
        XInterval { lo, hi }
    }
}

fn is_monomial_square(p: &RationalPoly) -> bool {
    p.coeffs.len() == 3 && p.coeffs[0].is_zero() && p.coeffs[1].is_zero() && p.coeffs[2].is_one()
}

/// Parses `1`, `-0.25`, `3/7` into an exact rational.
pub fn parse_rational(token: &str) -> Result<Ratio<i64>> {
    let t = token.trim();
    let bad = |why: &str| Error::parse(t, why);
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: i64 = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d == 0 {
            return Err(bad("zero denominator"));
        }
        return Ok(Ratio::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("empty number"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad("expected a decimal or p/q rational"));
    }
    if frac_part.len() > 15 {
        return Err(bad("too many decimal places"));
    }
    let scale = 10i64.pow(frac_part.len() as u32);
    let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad("overflow"))? };
    let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad("overflow"))? };
    let numer = int_val
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or_else(|| bad("overflow"))?;
    Ok(Ratio::new(if neg { -numer } else { numer }, scale))
}

/// Parses an interval `[a,b]` (brackets optional).
pub fn parse_interval(token: &str) -> Result<(Ratio<i64>, Ratio<i64>)> {
    let t = token.trim();
    let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(t);
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| Error::parse(t, "expected an interval `[a,b]`"))?;
    Ok((parse_rational(a)?, parse_rational(b)?))
}

/// Slope bounds for a user polynomial: the sampled range of `f'` widened by 5%.
fn derived_slope_bounds(poly: &RationalPoly, a: f64, b: f64) -> (f64, f64) {
    const N: usize = 10_001;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..N {
        let x = a + (b - a) * (i as f64 / (N - 1) as f64);
        let d = poly.deriv(x);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let c2 = if lo > 0.0 { lo * 0.95 } else { lo };
    let c1 = hi.abs() * 1.05 + 1e-9;
    (c1.max(c2 + 1e-9), c2)
}

impl FromStr for Curve {
    type Err = Error;

    /// Catalog names `parabola`, `circle-arc`, `hyperbola`, `cubic`, or a
    /// rational polynomial `poly:a0,a1,...@[a,b]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "parabola" => return Ok(Curve::parabola()),
            "circle-arc" => return Ok(Curve::circle_arc()),
            "hyperbola" => return Ok(Curve::hyperbola()),
            "cubic" => return Ok(Curve::cubic()),
            _ => {}
        }
        let body = s
            .strip_prefix("poly:")
            .ok_or_else(|| Error::parse(s, "unknown curve"))?;
        let (coeffs, interval) = body
            .split_once('@')
            .ok_or_else(|| Error::parse(s, "expected poly:a0,a1,...@[a,b]"))?;
        let coeffs = coeffs.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        let (lo, hi) = parse_interval(interval)?;
        let poly = RationalPoly::new(coeffs);
        let (c1, c2) = derived_slope_bounds(&poly, ratio_to_f64(&lo), ratio_to_f64(&hi));
        Curve::new(s, lo, hi, c1, c2, Shape::Polynomial(poly))
    }
}

/// `ceil(r)` for a positive-denominator rational.
pub(crate) fn ratio_ceil(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    n.div_euclid(d) + i128::from(n.rem_euclid(d) != 0)
}

/// `floor(r)` for a positive-denominator rational.
pub(crate) fn ratio_floor(n: i128, d: i128) -> i128 {
    debug_assert!(d > 0);
    n.div_euclid(d)
}

/// `BigRational` view of an `f64` (exact: every finite double is dyadic).
pub(crate) fn big_of_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite value")
}

pub(crate) fn big_of_i128(x: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}
