//! Approximating functions and the convergence series built from them.
//!
//! An [`ApproxFn`] is a positive, eventually non-increasing function of the
//! denominator `q`. Three families are supported: a power-log law
//! `c · q^(-tau) · ln(q+1)^(-beta)`, a finite table with a tail rule, and the
//! pointwise maximum of two functions (used by both auxiliary-function
//! reductions).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `q` scanned when certifying where monotonicity starts.
pub const Q0_SCAN_CAP: u64 = 10_000;

/// Tolerance used when comparing exponents against a convergence borderline.
const BORDERLINE_EPS: f64 = 1e-12;

/// How a [`Family::Table`] continues past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// `last · (len / q)`: continuous at the last index and strictly decreasing.
    Reciprocal,
    /// Keep the last value.
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    PowerLog { c: f64, tau: f64, beta: f64 },
    /// `values[i]` is ψ(i + 1).
    Table {
        values: Vec<f64>,
        tail: Option<TailRule>,
    },
    MaxOf(Box<ApproxFn>, Box<ApproxFn>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxFn {
    family: Family,
    q0: u64,
}

impl ApproxFn {
    fn from_family(family: Family) -> Result<Self> {
        let mut psi = ApproxFn { family, q0: 1 };
        psi.q0 = psi.scan_q0()?;
        Ok(psi)
    }

    pub fn power_log(c: f64, tau: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("power-log constant must be positive, got {c}")));
        }
        if !(tau.is_finite() && tau >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "power-log exponents must be finite with tau >= 0, got tau={tau}, beta={beta}"
            )));
        }
        Self::from_family(Family::PowerLog { c, tau, beta })
    }

    /// `q^(-tau)`.
    pub fn power(tau: f64) -> Result<Self> {
        Self::power_log(1.0, tau, 0.0)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::power_log(c, 0.0, 0.0)
    }

    /// Table with the default reciprocal tail.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        Self::table_with_tail(values, Some(TailRule::Reciprocal))
    }

    /// Zero entries are accepted so that the degenerate ψ ≡ 0 can be expressed.
    pub fn table_with_tail(values: Vec<f64>, tail: Option<TailRule>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("table must have at least one entry".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("table entries must be finite and >= 0, got {v}")));
        }
        Self::from_family(Family::Table { values, tail })
    }

    pub fn max_of(a: ApproxFn, b: ApproxFn) -> Self {
        let q0 = a.q0.max(b.q0);
        ApproxFn {
            family: Family::MaxOf(Box::new(a), Box::new(b)),
            q0,
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// First index from which the function is certified non-increasing.
    pub fn q0(&self) -> u64 {
        self.q0
    }

    /// `(c, tau, beta)` when this is a power-log function.
    pub fn power_log_params(&self) -> Option<(f64, f64, f64)> {
        match self.family {
            Family::PowerLog { c, tau, beta } => Some((c, tau, beta)),
            _ => None,
        }
    }

    pub fn eval(&self, q: u64) -> Result<f64> {
        if q == 0 {
            return Err(Error::Domain("approximating functions are defined for q >= 1".into()));
        }
        match &self.family {
            Family::PowerLog { c, tau, beta } => Ok(power_log_value(*c, *tau, *beta, q as f64)),
            Family::Table { values, tail } => {
                let len = values.len() as u64;
                if q <= len {
                    return Ok(values[(q - 1) as usize]);
                }
                let last = values[values.len() - 1];
                match tail {
                    Some(TailRule::Reciprocal) => Ok(last * (len as f64 / q as f64)),
                    Some(TailRule::Constant) => Ok(last),
                    None => Err(Error::Domain(format!(
                        "q = {q} is beyond the table (length {len}) and no tail rule is set"
                    ))),
                }
            }
            Family::MaxOf(a, b) => Ok(a.eval(q)?.max(b.eval(q)?)),
        }
    }

    fn scan_q0(&self) -> Result<u64> {
        match &self.family {
            Family::PowerLog { tau, beta, .. } => {
                if *tau == 0.0 && *beta < 0.0 {
                    return Err(Error::Domain(
                        "power-log with tau = 0 and beta < 0 is increasing for all q".into(),
                    ));
                }
                // Unimodal: once a step is non-increasing, all later steps are.
                let mut q = 1;
                while self.eval(q + 1)? > self.eval(q)? {
                    q += 1;
                    if q > Q0_SCAN_CAP {
                        return Err(Error::Domain(format!(
                            "no monotone start found below q = {Q0_SCAN_CAP}"
                        )));
                    }
                }
                Ok(q)
            }
            Family::Table { values, .. } => {
                let last_rise = values.windows(2).rposition(|w| w[1] > w[0]);
                Ok(last_rise.map_or(1, |i| i as u64 + 2))
            }
            Family::MaxOf(a, b) => Ok(a.q0.max(b.q0)),
        }
    }
}

#[inline]
fn power_log_value(c: f64, tau: f64, beta: f64, q: f64) -> f64 {
    let mut v = c;
    if tau != 0.0 {
        v *= q.powf(-tau);
    }
    if beta != 0.0 {
        v *= (q + 1.0).ln().powf(-beta);
    }
    v
}

/// The floor `q^(1-2/s) · ln(q+1)^(-2-1/s)` below which the multiplicative
/// cover argument cannot go.
pub fn mult_floor(s: f64) -> Result<ApproxFn> {
    check_s(s)?;
    ApproxFn::power_log(1.0, 2.0 / s - 1.0, 2.0 + 1.0 / s)
}

/// `max(ψ, floor_s)`: approximates at least as many points as ψ and satisfies
/// the floor needed by the case-(a) m-bound.
pub fn tilde_psi_mult(psi: &ApproxFn, s: f64) -> Result<ApproxFn> {
    let floor = mult_floor(s)?;
    Ok(ApproxFn::max_of(psi.clone(), floor))
}

/// `max(ψ, q^(-2/3))`, the reduction used by the simultaneous argument.
pub fn tilde_psi_sim(psi: &ApproxFn) -> ApproxFn {
    let floor = ApproxFn::power(2.0 / 3.0).expect("q^(-2/3) is a valid power law");
    ApproxFn::max_of(psi.clone(), floor)
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("s must lie in (0, 1], got {s}")))
    }
}

impl fmt::Display for ApproxFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::PowerLog { c, tau, beta } => write!(f, "powerlog:{c},{tau},{beta}"),
            Family::Table { values, tail } => {
                write!(f, "table:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                match tail {
                    Some(TailRule::Reciprocal) => Ok(()),
                    Some(TailRule::Constant) => write!(f, ";tail=constant"),
                    None => write!(f, ";tail=none"),
                }
            }
            Family::MaxOf(a, b) => write!(f, "max:({a}),({b})"),
        }
    }
}

fn parse_f64(token: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(token.trim(), e.to_string()))
}

/// Splits `(A),(B)` at the top-level comma.
fn split_max_args(body: &str) -> Option<(&str, &str)> {
    let bytes = body.as_bytes();
    if bytes.first() != Some(&b'(') {
        return None;
    }
    let mut depth = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    let first = &body[1..i];
                    let rest = body[i + 1..].strip_prefix(',')?;
                    let second = rest.strip_prefix('(')?.strip_suffix(')')?;
                    return Some((first, second));
                }
            }
            _ => {}
        }
    }
    None
}

impl FromStr for ApproxFn {
    type Err = Error;

    /// Accepts `powerlog:c,tau,beta`, `pow:tau`, `const:c`,
    /// `table:v1,v2,...[;tail=reciprocal|constant|none]` and `max:(A),(B)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `<family>:<params>`"))?;
        match kind {
            "powerlog" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::parse(s, "powerlog takes exactly c,tau,beta"));
                }
                ApproxFn::power_log(parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?)
            }
            "pow" => ApproxFn::power(parse_f64(body)?),
            "const" => ApproxFn::constant(parse_f64(body)?),
            "table" => {
                let (list, tail) = match body.split_once(';') {
                    Some((list, opt)) => {
                        let tail = match opt.trim() {
                            "tail=reciprocal" => Some(TailRule::Reciprocal),
                            "tail=constant" => Some(TailRule::Constant),
                            "tail=none" => None,
                            other => return Err(Error::parse(other, "unknown table tail rule")),
                        };
                        (list, tail)
                    }
                    None => (body, Some(TailRule::Reciprocal)),
                };
                let values = list.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
                ApproxFn::table_with_tail(values, tail)
            }
            "max" => {
                let (a, b) = split_max_args(body)
                    .ok_or_else(|| Error::parse(s, "expected max:(A),(B)"))?;
                Ok(ApproxFn::max_of(a.parse()?, b.parse()?))
            }
            other => Err(Error::parse(other, "unknown approximating-function family")),
        }
    }
}

/// One of the three convergence series.
#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    /// `Σ ψ_1(h) ··· ψ_n(h)`.
    Khintchine(Vec<ApproxFn>),
    /// `Σ ψ(h)^n ln(h)^(n-1)`.
    Gallagher { psi: ApproxFn, n: u32 },
    /// `Σ h^(1-s) ln(h)^s ψ(h)^s`.
    Theorem2 { psi: ApproxFn, s: f64 },
}

impl Series {
    /// Term at index `h`. Terms carrying a positive power of `ln h` vanish at h = 1.
    pub fn term(&self, h: u64) -> Result<f64> {
        let hf = h as f64;
        match self {
            Series::Khintchine(psis) => {
                let mut prod = 1.0;
                for psi in psis {
                    prod *= psi.eval(h)?;
                }
                Ok(prod)
            }
            Series::Gallagher { psi, n } => {
                let v = psi.eval(h)?.powi(*n as i32);
                if *n <= 1 {
                    Ok(v)
                } else if h == 1 {
                    Ok(0.0)
                } else {
                    Ok(v * hf.ln().powi(*n as i32 - 1))
                }
            }
            Series::Theorem2 { psi, s } => {
                if h == 1 {
                    return Ok(0.0);
                }
                Ok(hf.powf(1.0 - s) * hf.ln().powf(*s) * psi.eval(h)?.powf(*s))
            }
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Σ_{h=from}^{to} term(h)`; zero for an empty range.
pub fn range_sum(series: &Series, from: u64, to: u64) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for h in from.max(1)..=to {
        acc.add(series.term(h)?);
    }
    Ok(acc.value())
}

pub fn partial_sum(series: &Series, h_max: u64) -> Result<f64> {
    if h_max == 0 {
        return Err(Error::Domain("partial sums need H >= 1".into()));
    }
    range_sum(series, 1, h_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesVerdict {
    pub kind: Convergence,
    pub reason: String,
    /// Borderline parameter: the critical `s` for the Hausdorff series, the
    /// critical common `tau` for the Khintchine and Gallagher series.
    pub critical_exponent: f64,
    /// Power of `h` in the asymptotic term.
    pub term_exponent: f64,
    /// Power of `ln h` in the asymptotic term.
    pub log_exponent: f64,
}

fn power_log_of(psi: &ApproxFn) -> Result<(f64, f64)> {
    psi.power_log_params()
        .map(|(_, tau, beta)| (tau, beta))
        .ok_or_else(|| Error::UnsupportedFamily(psi.to_string()))
}

/// `Σ h^e (ln h)^l` converges iff `e < -1`, or `e = -1` and `l < -1`.
fn verdict_from_exponents(term_exponent: f64, log_exponent: f64, critical: f64) -> SeriesVerdict {
    let (kind, reason) = if term_exponent < -1.0 - BORDERLINE_EPS {
        (
            Convergence::Converges,
            format!("power exponent {term_exponent} < -1"),
        )
    } else if term_exponent > -1.0 + BORDERLINE_EPS {
        (
            Convergence::Diverges,
            format!("power exponent {term_exponent} > -1"),
        )
    } else if log_exponent < -1.0 - BORDERLINE_EPS {
        (
            Convergence::Converges,
            format!("power exponent -1 and log exponent {log_exponent} < -1"),
        )
    } else {
        (
            Convergence::Diverges,
            format!("power exponent -1 and log exponent {log_exponent} >= -1"),
        )
    };
    SeriesVerdict {
        kind,
        reason,
        critical_exponent: critical,
        term_exponent,
        log_exponent,
    }
}

/// Closed-form verdict for series whose functions are all power-log.
pub fn classify(series: &Series) -> Result<SeriesVerdict> {
    match series {
        Series::Khintchine(psis) => {
            if psis.is_empty() {
                return Err(Error::Domain("Khintchine series needs at least one function".into()));
            }
            let mut tau_sum = 0.0;
            let mut beta_sum = 0.0;
            for psi in psis {
                let (tau, beta) = power_log_of(psi)?;
                tau_sum += tau;
                beta_sum += beta;
            }
            Ok(verdict_from_exponents(-tau_sum, -beta_sum, 1.0 / psis.len() as f64))
        }
        Series::Gallagher { psi, n } => {
            let (tau, beta) = power_log_of(psi)?;
            let n = *n as f64;
            Ok(verdict_from_exponents(-n * tau, (n - 1.0) - n * beta, 1.0 / n))
        }
        Series::Theorem2 { psi, s } => {
            check_s(*s)?;
            let (tau, beta) = power_log_of(psi)?;
            Ok(verdict_from_exponents(
                1.0 - s - s * tau,
                s - s * beta,
                2.0 / (1.0 + tau),
            ))
        }
    }
}

/// Verdict for the series of kind `kind` built from `powerlog:1,tau,beta`.
/// `s_or_n` is `s` for [`SeriesKindTag::Theorem2`] and the dimension otherwise.
pub fn classify_powerlaw(kind: SeriesKindTag, tau: f64, beta: f64, s_or_n: f64) -> Result<SeriesVerdict> {
    let psi = ApproxFn::power_log(1.0, tau, beta)?;
    let series = kind.build(psi, s_or_n)?;
    classify(&series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKindTag {
    Khintchine,
    Gallagher,
    Theorem2,
}

impl SeriesKindTag {
    /// Series of this kind with a single shared ψ (Khintchine repeats it `n` times).
    pub fn build(self, psi: ApproxFn, s_or_n: f64) -> Result<Series> {
        let as_dim = || -> Result<u32> {
            if s_or_n >= 1.0 && s_or_n.fract() == 0.0 {
                Ok(s_or_n as u32)
            } else {
                Err(Error::Domain(format!("dimension must be a positive integer, got {s_or_n}")))
            }
        };
        match self {
            SeriesKindTag::Khintchine => Ok(Series::Khintchine(vec![psi; as_dim()? as usize])),
            SeriesKindTag::Gallagher => Ok(Series::Gallagher { psi, n: as_dim()? }),
            SeriesKindTag::Theorem2 => {
                check_s(s_or_n)?;
                Ok(Series::Theorem2 { psi, s: s_or_n })
            }
        }
    }
}

impl FromStr for SeriesKindTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "khintchine" => Ok(SeriesKindTag::Khintchine),
            "gallagher" => Ok(SeriesKindTag::Gallagher),
            "theorem2" => Ok(SeriesKindTag::Theorem2),
            other => Err(Error::parse(other, "unknown series kind")),
        }
    }
}
