//! Structural properties of the block covers: they contain every hit, their
//! diameters and sizes obey the expected bounds, and truncations are safe.

use dioph::approx_fn::{tilde_psi_mult, ApproxFn};
use dioph::cover::{
    build_cover_mult, build_cover_mult_with_slack, build_cover_sim, summarize, tail_block, tail_sum, CoverElement, Source,
    TailMode, M_SLACK,
};
use dioph::curve::Curve;
use dioph::dyadic::{block_range, psi_at_block};
use dioph::limsup::{find_dyadic_hits, HitMode};
use dioph::Error;

fn pow(tau: f64) -> ApproxFn {
    ApproxFn::power(tau).unwrap()
}

/// Elements sorted by `x_lo`, with running maxima of `x_hi`, for fast
/// point-in-union queries.
struct Union {
    lo: Vec<f64>,
    max_hi: Vec<f64>,
}

impl Union {
    fn new(elements: &[CoverElement]) -> Self {
        let mut iv: Vec<(f64, f64)> = elements.iter().map(|e| (e.x_interval.lo, e.x_interval.hi)).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut max_hi = Vec::with_capacity(iv.len());
        let mut m = f64::NEG_INFINITY;
        for &(_, h) in &iv {
            m = m.max(h);
            max_hi.push(m);
        }
        Union { lo: iv.into_iter().map(|p| p.0).collect(), max_hi }
    }

    fn contains(&self, x: f64) -> bool {
        let k = self.lo.partition_point(|&l| l <= x);
        k > 0 && self.max_hi[k - 1] >= x
    }
}

/// Checks that every grid point with a dyadic hit lies in the cover, and
/// returns the number of hit-bearing grid points.
fn containment(curve: &Curve, elements: &[CoverElement], t: u32, mode: HitMode, psi: &ApproxFn, phi: Option<&ApproxFn>, grid: usize) -> usize {
    let union = Union::new(elements);
    let mut hit_points = 0;
    for i in 0..grid {
        let x = curve.grid_point(i, grid);
        if find_dyadic_hits(curve, x, t, mode, psi, phi).unwrap().is_empty() {
            continue;
        }
        hit_points += 1;
        assert!(union.contains(x), "{}: x = {x} has a hit at block {t} but is uncovered", curve.name());
    }
    hit_points
}

#[test]
fn mult_covers_contain_every_hit() {
    for curve in [Curve::parabola(), Curve::cubic(), Curve::circle_arc(), Curve::hyperbola()] {
        for (psi, s, t) in [(pow(2.0), 0.8, 6), (tilde_psi_mult(&pow(1.5), 1.0).unwrap(), 1.0, 7), (pow(1.0), 0.5, 5)] {
            let elements = build_cover_mult(&curve, &psi, s, t).unwrap();
            let hits = containment(&curve, &elements, t, HitMode::Multiplicative, &psi, None, 20_000);
            assert!(hits >= 1000, "{}: only {hits} hit-bearing grid points", curve.name());
        }
    }
}

#[test]
fn sim_covers_contain_every_hit() {
    for curve in [Curve::parabola(), Curve::cubic(), Curve::circle_arc(), Curve::hyperbola()] {
        for (psi, phi, t) in [(pow(0.8), pow(0.8), 7), (pow(0.5), pow(0.7), 6)] {
            let elements = build_cover_sim(&curve, &psi, &phi, t).unwrap();
            let hits = containment(&curve, &elements, t, HitMode::Simultaneous, &psi, Some(&phi), 20_000);
            assert!(hits >= 1000, "{}: only {hits} hit-bearing grid points", curve.name());
        }
    }
}

#[test]
fn sim_diameters_obey_the_block_bound() {
    for curve in [Curve::parabola(), Curve::cubic(), Curve::circle_arc()] {
        let (psi, phi) = (pow(0.6), pow(0.9));
        // The curve crosses the y-window (full height 2φ(2^t)/2^t) over an
        // x-extent of at most 2φ(2^t)/(c2 2^t); the chord bound scales that
        // by sqrt(1 + c1^2). Hence K = 2 (1/c2 + 1) sqrt(1 + c1^2) suffices.
        let chord = (1.0 + curve.c1() * curve.c1()).sqrt();
        let k = 2.0 * (1.0 / curve.c2() + 1.0) * chord;
        for t in 2..=8 {
            let phi_t = psi_at_block(&phi, t).unwrap() / (1u64 << t) as f64;
            let sharp = 2.0 * phi_t / curve.c2() * chord;
            for e in build_cover_sim(&curve, &psi, &phi, t).unwrap() {
                assert!(e.diameter <= sharp * (1.0 + 1e-12), "{}: {} > {sharp}", curve.name(), e.diameter);
                assert!(e.diameter <= k * phi_t);
            }
        }
    }
}

#[test]
fn every_element_has_positive_diameter_and_matching_chord() {
    let curve = Curve::cubic();
    let factor = (1.0 + curve.c1() * curve.c1()).sqrt();
    let mut all = build_cover_mult(&curve, &pow(2.0), 0.8, 6).unwrap();
    all.extend(build_cover_sim(&curve, &pow(0.8), &pow(0.8), 6).unwrap());
    for e in &all {
        assert!(e.diameter > 0.0);
        assert!(e.x_interval.lo >= curve.a() && e.x_interval.hi <= curve.b());
        assert_eq!(e.diameter, curve.chord_diameter(&e.x_interval));
        assert!((e.diameter - e.x_interval.width() * factor).abs() <= 1e-15);
    }
}

#[test]
fn extra_m_slack_adds_no_case_a_rectangles() {
    for curve in [Curve::parabola(), Curve::cubic()] {
        for (tau, s) in [(2.0, 0.8), (3.0, 1.0), (1.0, 0.5), (5.0, 0.9)] {
            let psi = tilde_psi_mult(&pow(tau), s).unwrap();
            for t in 2..=7 {
                let base = build_cover_mult(&curve, &psi, s, t).unwrap();
                let wide = build_cover_mult_with_slack(&curve, &psi, s, t, M_SLACK + 4).unwrap();
                assert_eq!(base, wide, "{}: tau = {tau}, s = {s}, t = {t}", curve.name());
            }
        }
    }
}

#[test]
fn rect_a_indices_respect_the_truncation() {
    let curve = Curve::parabola();
    let psi = tilde_psi_mult(&pow(2.0), 0.8).unwrap();
    for t in 2..=7 {
        let bound = dioph::limsup::m_bound_case_a(t, 0.8).unwrap();
        for e in build_cover_mult(&curve, &psi, 0.8, t).unwrap() {
            if let Source::RectA { m, .. } = e.source {
                assert!(m.abs() as f64 <= bound + 2.0);
            }
        }
    }
}

#[test]
fn large_psi_leaves_only_strips() {
    // t·sqrt(ψ(2^t)) > 1 makes every m a case-(b) index.
    let curve = Curve::parabola();
    let psi = ApproxFn::constant(0.2).unwrap();
    let elements = build_cover_mult(&curve, &psi, 1.0, 3).unwrap();
    assert!(!elements.is_empty());
    assert!(elements.iter().all(|e| !matches!(e.source, Source::RectA { .. })));
}

#[test]
fn strip_count_is_linear_in_q() {
    for curve in [Curve::parabola(), Curve::cubic(), Curve::circle_arc()] {
        let (ya, yb) = curve.y_range();
        let extent = (curve.b() - curve.a()) + (yb - ya);
        let psi = pow(2.0);
        for t in 2..=8 {
            let elements = build_cover_mult(&curve, &psi, 0.8, t).unwrap();
            for q in block_range(t) {
                let strips = elements
                    .iter()
                    .filter(|e| e.q == q && matches!(e.source, Source::StripX { .. } | Source::StripY { .. }))
                    .count();
                assert!(strips as f64 <= extent * q as f64 + 4.0, "{}: q = {q}, {strips} strips", curve.name());
            }
        }
    }
}

#[test]
fn s_sums_decrease_in_s_for_small_diameters() {
    let curve = Curve::parabola();
    let elements = build_cover_mult(&curve, &pow(2.0), 0.5, 6).unwrap();
    assert!(elements.iter().all(|e| e.diameter <= 1.0));
    let mut last = f64::INFINITY;
    for s in [0.3, 0.5, 0.7, 0.9, 1.0] {
        let sum = summarize(&elements, s).unwrap().hausdorff_sum;
        assert!(sum <= last);
        last = sum;
    }
}

#[test]
fn summary_totals_match_per_block_breakdown() {
    let curve = Curve::parabola();
    let mode = TailMode::Mult { psi: pow(2.0), s: 0.8 };
    let total = tail_sum(&curve, &mode, 3, 8).unwrap();
    assert_eq!(total.t_range, Some((3, 8)));
    assert_eq!(total.per_t.len(), 6);
    let count: u64 = total.per_t.iter().map(|b| b.count).sum();
    let h: f64 = total.per_t.iter().map(|b| b.hausdorff_sum).sum();
    assert_eq!(count, total.element_count);
    assert!((h - total.hausdorff_sum).abs() <= 1e-12 * h);
}

#[test]
fn single_block_tail_equals_its_summary() {
    let curve = Curve::cubic();
    let (psi, phi) = (pow(0.8), pow(0.8));
    let mode = TailMode::Sim { psi: psi.clone(), phi: phi.clone() };
    let tail = tail_sum(&curve, &mode, 6, 6).unwrap();
    let direct = summarize(&build_cover_sim(&curve, &psi, &phi, 6).unwrap(), 1.0).unwrap();
    assert_eq!(tail.element_count, direct.element_count);
    assert!((tail.lebesgue_sum - direct.lebesgue_sum).abs() <= 1e-12 * direct.lebesgue_sum);
    assert_eq!(tail_block(&curve, &mode, 6).unwrap().count, direct.element_count);
}

#[test]
fn resource_guard_reports_the_predicted_size() {
    let curve = Curve::parabola();
    match build_cover_mult(&curve, &pow(0.1), 1.0, 30) {
        Err(Error::ResourceGuard { predicted, limit }) => assert!(predicted > limit),
        other => panic!("expected a resource guard refusal, got {other:?}"),
    }
}

#[test]
fn floor_violation_directs_to_the_auxiliary_function() {
    let curve = Curve::parabola();
    let err = build_cover_mult(&curve, &pow(6.0), 0.5, 8).unwrap_err();
    assert!(err.to_string().contains("tilde_psi_mult"));
}

#[test]
fn cover_csv_is_canonically_ordered_and_round_trips() {
    let curve = Curve::parabola();
    let elements = build_cover_mult(&curve, &pow(2.0), 0.8, 4).unwrap();
    let mut keys: Vec<_> = elements.iter().map(|e| e.sort_key()).collect();
    let sorted = {
        let mut k = keys.clone();
        k.sort();
        k
    };
    assert_eq!(keys, sorted);
    keys.dedup();
    assert_eq!(keys.len(), elements.len());

    let mut buf = Vec::new();
    dioph::cover::write_csv(&elements, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "q", "p1", "p2", "m", "source", "x_lo", "x_hi", "diameter"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), elements.len());
    for (row, e) in rows.iter().zip(&elements) {
        assert_eq!(row[1].parse::<u64>().unwrap(), e.q);
        assert_eq!(&row[5], e.source.name());
        assert_eq!(row[6].parse::<f64>().unwrap(), e.x_interval.lo);
        assert_eq!(row[8].parse::<f64>().unwrap(), e.diameter);
    }
}
