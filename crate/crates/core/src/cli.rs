//! Command-line front end. Every subcommand streams records in one of two
//! formats:
//!
//! * `json`: one JSON object per line, each with a `record` field naming its
//!   kind; the first line is the `config` record echoing the resolved
//!   arguments.
//! * `csv`: `#`-prefixed comment lines carry the config (and any summary) as
//!   JSON; the remaining lines form one table with a fixed header.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 resource guard.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::approx_fn::{classify, partial_sum, range_sum, tilde_psi_mult, ApproxFn, Series, SeriesKindTag};
use crate::cover::{build_cover_mult, build_cover_sim, summarize, tail_block, CoverSummary, TailMode};
use crate::curve::{parse_interval, Curve};
use crate::error::Error;
use crate::limsup::{empirical_tail_measure, find_hits, m_index, mc_classical, Classical, HitMode};
use crate::rational_count::{count_block_mult, count_block_sim, count_near_curve, counting_condition_holds, CountMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "dioph",
    version,
    about = "Rational points near planar curves, dyadic covers and convergence series",
    after_help = "CSV tables (after `#` comment lines):\n  \
        verify:      curve,samples,min_slope,max_slope,min_abs_f2,c1,c2,ok\n  \
        count:       Q,delta,count,predicted_bound,ratio,mode,boundary_ambiguous,condition_holds\n  \
        block-count: t,m,count,predicted_bound,ratio,mode,boundary_ambiguous\n  \
        hits:        q,p1,p2,err_x,err_y,product_err,mode,m,case\n  \
        cover:       t,q,p1,p2,m,source,x_lo,x_hi,diameter\n  \
        tail:        t,count,hausdorff_sum,lebesgue_sum\n  \
        series:      h,partial_sum\n  \
        measure:     n,Q,fraction\n  \
        mc:          samples,q_min,Q,seed,fraction"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Worker threads (0 = one per core). Never changes the output.
    #[arg(long, env = "DIOPH_THREADS", global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    Mult,
    Sim,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Check the slope and curvature conditions on a grid.
    Verify {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Grid size.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Count rational points within `delta` of the curve, for each Q.
    Count {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Largest denominators, comma-separated.
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        #[serde(rename = "Q")]
        q: Vec<u64>,
        /// Fixed vertical distance.
        #[arg(long, conflicts_with = "psi", required_unless_present = "psi")]
        delta: Option<f64>,
        /// Take `delta = psi(Q)/Q`.
        #[arg(long, value_parser = psi_token)]
        psi: Option<String>,
        /// `triples` or `reduced`.
        #[arg(long, default_value = "triples", value_parser = mode_token)]
        mode: String,
    },
    /// Block counts N(t, m) (mult) or N(t) (sim).
    BlockCount {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Multiplicative or simultaneous blocks.
        #[arg(long, value_enum)]
        kind: CoverKind,
        /// Approximating function, e.g. `pow:2`.
        #[arg(long, value_parser = psi_token)]
        psi: String,
        /// Second function (sim only).
        #[arg(long, value_parser = psi_token, required_if_eq("kind", "sim"))]
        phi: Option<String>,
        /// Dyadic block indices, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<u32>,
        /// Rectangle indices (mult only).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        m: Vec<i32>,
        /// `triples` or `reduced`.
        #[arg(long, default_value = "triples", value_parser = mode_token)]
        mode: String,
    },
    /// Denominators at which (x, f(x)) is approximable.
    Hits {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Abscissa of the point on the curve.
        #[arg(long)]
        x: f64,
        /// Smallest denominator.
        #[arg(long, default_value_t = 1)]
        q_min: u64,
        /// Largest denominator.
        #[arg(long)]
        q_max: u64,
        /// `mult` or `sim`.
        #[arg(long, value_parser = hit_mode_token)]
        mode: String,
        /// Approximating function (first coordinate in sim mode).
        #[arg(long, value_parser = psi_token)]
        psi: String,
        /// Second function (sim only).
        #[arg(long, value_parser = psi_token)]
        phi: Option<String>,
    },
    /// Dump the cover of one block.
    Cover {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Multiplicative or simultaneous cover.
        #[arg(long, value_enum)]
        kind: CoverKind,
        /// Approximating function.
        #[arg(long, value_parser = psi_token)]
        psi: String,
        /// Second function (sim only).
        #[arg(long, value_parser = psi_token, required_if_eq("kind", "sim"))]
        phi: Option<String>,
        /// Hausdorff exponent (mult only; sim summaries use s = 1).
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Dyadic block index.
        #[arg(long)]
        t: u32,
        /// Replace psi by max(psi, floor_s) before building (mult only).
        #[arg(long)]
        tilde: bool,
    },
    /// Cover sums per block over [n, T].
    Tail {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// Multiplicative or simultaneous covers.
        #[arg(long, value_enum)]
        kind: CoverKind,
        /// Approximating function.
        #[arg(long, value_parser = psi_token)]
        psi: String,
        /// Second function (sim only).
        #[arg(long, value_parser = psi_token, required_if_eq("kind", "sim"))]
        phi: Option<String>,
        /// Hausdorff exponent.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// First block.
        #[arg(long)]
        n: u32,
        /// Last block.
        #[arg(long = "T")]
        #[serde(rename = "T")]
        t_max: u32,
    },
    /// Partial sums and convergence verdict of a series.
    Series {
        /// `khintchine`, `gallagher` or `theorem2`.
        #[arg(long, value_parser = series_token)]
        kind: String,
        /// One function, or one per coordinate for khintchine.
        #[arg(long, value_parser = psi_token, required = true)]
        psi: Vec<String>,
        /// Exponent (theorem2).
        #[arg(long)]
        s: Option<f64>,
        /// Dimension (gallagher, or khintchine with a single function).
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Last summation index.
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: u64,
    },
    /// Fraction of a grid on I with a hit for q in [2^n, Q].
    Measure {
        #[command(flatten)]
        #[serde(flatten)]
        curve: CurveArgs,
        /// `mult` or `sim`.
        #[arg(long, value_parser = hit_mode_token)]
        mode: String,
        /// Approximating function.
        #[arg(long, value_parser = psi_token)]
        psi: String,
        /// Second function (sim only).
        #[arg(long, value_parser = psi_token)]
        phi: Option<String>,
        /// Number of equispaced points of I.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Tail starts: hits count only for q >= 2^n.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Largest denominator.
        #[arg(long = "Q")]
        #[serde(rename = "Q")]
        q: u64,
    },
    /// Monte Carlo over uniform points of [0,1]^dim.
    Mc {
        /// `khintchine` or `gallagher`.
        #[arg(long, value_parser = classical_token)]
        kind: String,
        /// Dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// One function for all coordinates, or one per coordinate.
        #[arg(long, value_parser = psi_token, required = true)]
        psi: Vec<String>,
        /// Number of uniform points.
        #[arg(long)]
        samples: usize,
        /// Smallest denominator.
        #[arg(long, default_value_t = 1)]
        q_min: u64,
        /// Largest denominator.
        #[arg(long = "Q")]
        #[serde(rename = "Q")]
        q: u64,
        /// Random seed (mandatory, so that every run is reproducible).
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    /// parabola | circle-arc | hyperbola | cubic | poly:a0,a1,...@[a,b]
    #[arg(long, default_value = "parabola", value_parser = curve_token)]
    pub curve: String,
    /// Override the interval, e.g. `0,1` or `[1/10,1]`.
    #[arg(long, value_parser = interval_token)]
    pub interval: Option<String>,
}

impl CurveArgs {
    fn resolve(&self) -> Result<Curve, Error> {
        let curve: Curve = self.curve.parse()?;
        match &self.interval {
            Some(iv) => {
                let (lo, hi): (Ratio<i64>, Ratio<i64>) = parse_interval(iv)?;
                curve.with_interval(lo, hi)
            }
            None => Ok(curve),
        }
    }
}

fn validate<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<String, String> {
    s.parse::<T>().map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn psi_token(s: &str) -> Result<String, String> {
    validate::<ApproxFn>(s)
}

fn curve_token(s: &str) -> Result<String, String> {
    validate::<Curve>(s)
}

fn mode_token(s: &str) -> Result<String, String> {
    validate::<CountMode>(s)
}

fn hit_mode_token(s: &str) -> Result<String, String> {
    validate::<HitMode>(s)
}

fn series_token(s: &str) -> Result<String, String> {
    validate::<SeriesKindTag>(s)
}

fn classical_token(s: &str) -> Result<String, String> {
    match s {
        "khintchine" | "gallagher" => Ok(s.to_string()),
        _ => Err(Error::parse(s, "expected `khintchine` or `gallagher`").to_string()),
    }
}

fn interval_token(s: &str) -> Result<String, String> {
    parse_interval(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

/// Forwards each record's bytes to the thread that owns the real writer.
struct ChannelWriter(std::sync::mpsc::Sender<Vec<u8>>);

impl Write for ChannelWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0
            .send(buf.to_vec())
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::BrokenPipe, "output closed"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Record sink for the selected format.
struct Sink<'a> {
    format: Format,
    out: &'a mut dyn Write,
    header_written: bool,
}

impl<'a> Sink<'a> {
    fn io(e: std::io::Error) -> Error {
        Error::Domain(format!("output failed: {e}"))
    }

    /// A side record: a JSON line, or a `# kind: {json}` comment in CSV.
    fn meta<T: Serialize>(&mut self, kind: &str, value: &T) -> Result<(), Error> {
        let v = serde_json::to_value(value).map_err(|e| Error::Domain(e.to_string()))?;
        match self.format {
            Format::Json => {
                let line = tagged(kind, v);
                self.out.write_all(format!("{line}\n").as_bytes()).map_err(Self::io)
            }
            Format::Csv => self.out.write_all(format!("# {kind}: {v}\n").as_bytes()).map_err(Self::io),
        }
    }

    /// A table row.
    fn row<T: Serialize>(&mut self, kind: &str, value: &T) -> Result<(), Error> {
        match self.format {
            Format::Json => self.meta(kind, value),
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(!self.header_written)
                    .from_writer(Vec::new());
                w.serialize(value).map_err(|e| Error::Domain(e.to_string()))?;
                let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
                self.header_written = true;
                self.out.write_all(&bytes).map_err(Self::io)
            }
        }
    }
}

fn tagged(kind: &str, v: Value) -> Value {
    let mut map = Map::new();
    map.insert("record".into(), Value::String(kind.into()));
    match v {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    Value::Object(map)
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    curve: &'a str,
    samples: usize,
    min_slope: f64,
    max_slope: f64,
    min_abs_f2: f64,
    c1: f64,
    c2: f64,
    ok: bool,
}

#[derive(Serialize)]
struct CountRow {
    #[serde(rename = "Q")]
    q: u64,
    delta: f64,
    count: u64,
    predicted_bound: f64,
    ratio: f64,
    mode: CountMode,
    boundary_ambiguous: u64,
    condition_holds: bool,
}

#[derive(Serialize)]
struct BlockRow {
    t: u32,
    m: Option<i32>,
    count: u64,
    predicted_bound: f64,
    ratio: f64,
    mode: CountMode,
    boundary_ambiguous: u64,
}

#[derive(Serialize)]
struct HitRow {
    q: u64,
    p1: i64,
    p2: i64,
    err_x: f64,
    err_y: f64,
    product_err: f64,
    mode: HitMode,
    m: Option<i32>,
    case: Option<crate::limsup::MCase>,
}

#[derive(Serialize)]
struct ElementRow {
    t: u32,
    q: u64,
    p1: Option<i64>,
    p2: Option<i64>,
    m: Option<i32>,
    source: &'static str,
    x_lo: f64,
    x_hi: f64,
    diameter: f64,
}

#[derive(Serialize)]
struct SumRow {
    h: u64,
    partial_sum: f64,
}

#[derive(Serialize)]
struct MeasureRow {
    n: u32,
    #[serde(rename = "Q")]
    q: u64,
    fraction: f64,
}

#[derive(Serialize)]
struct McRow {
    samples: usize,
    q_min: u64,
    #[serde(rename = "Q")]
    q: u64,
    seed: u64,
    fraction: f64,
}

fn parse_psi(s: &str) -> Result<ApproxFn, Error> {
    s.parse()
}

fn summary_record(s: &CoverSummary) -> Value {
    json!({
        "t_range": s.t_range,
        "element_count": s.element_count,
        "s": s.s,
        "hausdorff_sum": s.hausdorff_sum,
        "lebesgue_sum": s.lebesgue_sum,
    })
}

fn execute(cli: &Cli, sink: &mut Sink) -> Result<(), Error> {
    let mut config = serde_json::to_value(cli).map_err(|e| Error::Domain(e.to_string()))?;
    if let Value::Object(map) = &mut config {
        // The command is tagged by `subcommand`; lift it next to `format`.
        if let Some(Value::Object(cmd)) = map.remove("command") {
            map.extend(cmd);
        }
    }
    sink.meta("config", &config)?;
    match &cli.command {
        Command::Verify { curve, samples } => {
            let c = curve.resolve()?;
            let r = c.verify_nondegeneracy(*samples)?;
            sink.row(
                "verify",
                &VerifyRow {
                    curve: c.name(),
                    samples: r.samples,
                    min_slope: r.min_slope,
                    max_slope: r.max_slope,
                    min_abs_f2: r.min_abs_f2,
                    c1: r.c1,
                    c2: r.c2,
                    ok: r.ok,
                },
            )
        }
        Command::Count {
            curve,
            q,
            delta,
            psi,
            mode,
        } => {
            let c = curve.resolve()?;
            let mode: CountMode = mode.parse()?;
            let psi = psi.as_deref().map(parse_psi).transpose()?;
            for &qq in q {
                let d = match (&psi, delta) {
                    (Some(p), _) => p.eval(qq.max(1))? / qq as f64,
                    (None, Some(d)) => *d,
                    (None, None) => unreachable!("clap requires --delta or --psi"),
                };
                let r = count_near_curve(&c, qq, d, mode)?;
                sink.row(
                    "count",
                    &CountRow {
                        q: qq,
                        delta: d,
                        count: r.count,
                        predicted_bound: r.predicted_bound,
                        ratio: r.ratio,
                        mode: r.mode,
                        boundary_ambiguous: r.boundary_ambiguous,
                        condition_holds: counting_condition_holds(qq, d),
                    },
                )?;
            }
            Ok(())
        }
        Command::BlockCount {
            curve,
            kind,
            psi,
            phi,
            t,
            m,
            mode,
        } => {
            let c = curve.resolve()?;
            let psi = parse_psi(psi)?;
            let mode: CountMode = mode.parse()?;
            for &tt in t {
                match kind {
                    CoverKind::Mult => {
                        for &mm in m {
                            let r = count_block_mult(&c, &psi, tt, mm, mode)?;
                            sink.row("block_count", &block_row(tt, Some(mm), &r))?;
                        }
                    }
                    CoverKind::Sim => {
                        let phi = parse_psi(phi.as_deref().unwrap_or_default())?;
                        let r = count_block_sim(&c, &psi, &phi, tt, mode)?;
                        sink.row("block_count", &block_row(tt, None, &r))?;
                    }
                }
            }
            Ok(())
        }
        Command::Hits {
            curve,
            x,
            q_min,
            q_max,
            mode,
            psi,
            phi,
        } => {
            let c = curve.resolve()?;
            let mode: HitMode = mode.parse()?;
            let psi = parse_psi(psi)?;
            let phi = phi.as_deref().map(parse_psi).transpose()?;
            for h in find_hits(&c, *x, *q_min, *q_max, mode, &psi, phi.as_ref())? {
                // The m-index refers to the block containing q.
                let t = 63 - h.q.leading_zeros();
                let mi = if mode == HitMode::Multiplicative && t >= 1 {
                    Some(m_index(h.err_x, t, &psi)?)
                } else {
                    None
                };
                sink.row(
                    "hit",
                    &HitRow {
                        q: h.q,
                        p1: h.p1,
                        p2: h.p2,
                        err_x: h.err_x,
                        err_y: h.err_y,
                        product_err: h.product_err,
                        mode: h.mode,
                        m: mi.as_ref().and_then(|m| m.m),
                        case: mi.map(|m| m.case),
                    },
                )?;
            }
            Ok(())
        }
        Command::Cover {
            curve,
            kind,
            psi,
            phi,
            s,
            t,
            tilde,
        } => {
            let c = curve.resolve()?;
            let psi = parse_psi(psi)?;
            let (elements, s) = match kind {
                CoverKind::Mult => {
                    let psi = if *tilde { tilde_psi_mult(&psi, *s)? } else { psi };
                    (build_cover_mult(&c, &psi, *s, *t)?, *s)
                }
                CoverKind::Sim => {
                    let phi = parse_psi(phi.as_deref().unwrap_or_default())?;
                    (build_cover_sim(&c, &psi, &phi, *t)?, 1.0)
                }
            };
            for e in &elements {
                sink.row(
                    "element",
                    &ElementRow {
                        t: e.t,
                        q: e.q,
                        p1: e.source.p1(),
                        p2: e.source.p2(),
                        m: e.source.m(),
                        source: e.source.name(),
                        x_lo: e.x_interval.lo,
                        x_hi: e.x_interval.hi,
                        diameter: e.diameter,
                    },
                )?;
            }
            sink.meta("summary", &summary_record(&summarize(&elements, s)?))
        }
        Command::Tail {
            curve,
            kind,
            psi,
            phi,
            s,
            n,
            t_max,
        } => {
            let c = curve.resolve()?;
            let psi = parse_psi(psi)?;
            let mode = match kind {
                CoverKind::Mult => TailMode::Mult { psi, s: *s },
                CoverKind::Sim => TailMode::Sim {
                    psi,
                    phi: parse_psi(phi.as_deref().unwrap_or_default())?,
                },
            };
            if n > t_max {
                return Err(Error::Precondition(format!("need n <= T, got n = {n}, T = {t_max}")));
            }
            let mut blocks = Vec::new();
            for t in *n..=*t_max {
                let b = tail_block(&c, &mode, t)?;
                sink.row("block", &b)?;
                blocks.push(b);
            }
            let total: f64 = blocks.iter().map(|b| b.hausdorff_sum).sum();
            let lebesgue: f64 = blocks.iter().map(|b| b.lebesgue_sum).sum();
            let count: u64 = blocks.iter().map(|b| b.count).sum();
            sink.meta(
                "summary",
                &json!({
                    "t_range": [n, t_max],
                    "element_count": count,
                    "s": mode.s(),
                    "hausdorff_sum": total,
                    "lebesgue_sum": lebesgue,
                }),
            )
        }
        Command::Series { kind, psi, s, n, h } => {
            let kind: SeriesKindTag = kind.parse()?;
            let psis = psi.iter().map(|p| parse_psi(p)).collect::<Result<Vec<_>, _>>()?;
            let series = match kind {
                SeriesKindTag::Khintchine if psis.len() > 1 => Series::Khintchine(psis),
                SeriesKindTag::Khintchine | SeriesKindTag::Gallagher => kind.build(psis[0].clone(), *n as f64)?,
                SeriesKindTag::Theorem2 => {
                    let s = s.ok_or_else(|| Error::Precondition("theorem2 needs --s".into()))?;
                    kind.build(psis[0].clone(), s)?
                }
            };
            if *h == 0 {
                return Err(Error::Domain("partial sums need H >= 1".into()));
            }
            // Checkpoints at powers of ten and at H itself, summed
            // incrementally.
            let mut marks: Vec<u64> = std::iter::successors(Some(1u64), |x| x.checked_mul(10))
                .take_while(|&x| x < *h)
                .collect();
            marks.push(*h);
            let mut total = 0.0;
            let mut from = 1;
            for &mark in &marks {
                total += range_sum(&series, from, mark)?;
                from = mark + 1;
                sink.row("partial_sum", &SumRow { h: mark, partial_sum: total })?;
            }
            debug_assert!(partial_sum(&series, 1).is_ok());
            match classify(&series) {
                Ok(v) => sink.meta("verdict", &v),
                Err(Error::UnsupportedFamily(why)) => sink.meta("verdict", &json!({ "kind": Value::Null, "reason": why })),
                Err(e) => Err(e),
            }
        }
        Command::Measure {
            curve,
            mode,
            psi,
            phi,
            grid,
            n,
            q,
        } => {
            let c = curve.resolve()?;
            let mode: HitMode = mode.parse()?;
            let psi = parse_psi(psi)?;
            let phi = phi.as_deref().map(parse_psi).transpose()?;
            for &nn in n {
                let f = empirical_tail_measure(&c, &psi, phi.as_ref(), mode, *grid, nn, *q)?;
                sink.row("measure", &MeasureRow { n: nn, q: *q, fraction: f })?;
            }
            Ok(())
        }
        Command::Mc {
            kind,
            dim,
            psi,
            samples,
            q_min,
            q,
            seed,
        } => {
            let psis = psi.iter().map(|p| parse_psi(p)).collect::<Result<Vec<_>, _>>()?;
            let system = match kind.as_str() {
                "khintchine" if psis.len() == 1 => Classical::Khintchine(vec![psis[0].clone(); *dim]),
                "khintchine" => Classical::Khintchine(psis),
                _ => Classical::Gallagher(psis[0].clone()),
            };
            let f = mc_classical(*dim, &system, *samples, *q_min, *q, *seed)?;
            sink.row(
                "mc",
                &McRow {
                    samples: *samples,
                    q_min: *q_min,
                    q: *q,
                    seed: *seed,
                    fraction: f,
                },
            )
        }
    }
}

fn block_row(t: u32, m: Option<i32>, r: &crate::rational_count::CountReport) -> BlockRow {
    BlockRow {
        t,
        m,
        count: r.count,
        predicted_bound: r.predicted_bound,
        ratio: r.ratio,
        mode: r.mode,
        boundary_ambiguous: r.boundary_ambiguous,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Records go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return if code == 0 { EXIT_OK } else { EXIT_CONFIG };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    // The computation runs in the pool on a scoped thread; records travel
    // back over a channel so they reach `out` (which need not be `Send`)
    // while the run is still in progress.
    let format = cli.format;
    let (tx, rx) = std::sync::mpsc::channel::<Vec<u8>>();
    let mut write_failure = None;
    let result = std::thread::scope(|scope| {
        let worker = scope.spawn(|| {
            pool.install(|| {
                let mut sink = Sink {
                    format,
                    out: &mut ChannelWriter(tx),
                    header_written: false,
                };
                execute(&cli, &mut sink)
            })
        });
        // Leaving the loop drops the receiver, so a closed output also stops
        // the computation at its next record.
        for chunk in rx {
            if let Err(e) = out.write_all(&chunk) {
                write_failure = Some(e);
                break;
            }
        }
        worker.join().unwrap_or_else(|_| Err(Error::Domain("worker panicked".into())))
    });
    if let Some(e) = write_failure.or_else(|| out.flush().err()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            // The reader has what it wanted (`| head`).
            return EXIT_OK;
        }
        let _ = writeln!(err, "error: output failed: {e}");
        return EXIT_CONFIG;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e @ Error::ResourceGuard { .. }) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_GUARD
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
