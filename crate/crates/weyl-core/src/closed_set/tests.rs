use super::*;


pub(crate) fn spec_reals() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("reals")
}

/// `R \ (-1, 1)`: the whole line minus a bounded open set.
pub(crate) fn spec_example_a() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("example-a").with_gaps(vec![Gap::bounded(-1.0, 1.0)])
}

/// `[0, 1]`.
pub(crate) fn spec_unit_interval() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("unit-interval").with_gaps(vec![Gap::below(0.0), Gap::above(1.0)])
}

/// The naturals: gap `(-inf, 0)` plus unit gaps `(k-1, k)` touching at the
/// integers.
pub(crate) fn spec_naturals() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("naturals")
        .with_gaps(vec![Gap::below(0.0)])
        .with_tail(TailRule {
            direction: TailDirection::Pos,
            center: CenterRule {
                alpha: 1.0,
                beta: -0.5,
                k0: 1,
            },
            radius: RadiusRule::Constant { rho: 0.5 },
        })
}

/// Gaps `(k - 1/k, k + 1/k)`: the first two merge into one finite gap, the
/// tail starts at k = 3 where the family is disjoint.
pub(crate) fn spec_example_b() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("example-b")
        .with_gaps(vec![Gap::bounded(0.0, 2.5)])
        .with_tail(TailRule {
            direction: TailDirection::Pos,
            center: CenterRule {
                alpha: 1.0,
                beta: 0.0,
                k0: 3,
            },
            radius: RadiusRule::Harmonic { rho: 1.0 },
        })
}

/// `R \ U (k - 1/4, k + 1/4)` over both directions: d_M = 1/4.
pub(crate) fn spec_quarter_gaps() -> ClosedSetSpec<f64> {
    let tail = |direction| TailRule {
        direction,
        center: CenterRule {
            alpha: 1.0,
            beta: 0.0,
            k0: 1,
        },
        radius: RadiusRule::Constant { rho: 0.25 },
    };
    ClosedSetSpec::new("quarter-gaps")
        .with_gaps(vec![Gap::bounded(-0.25, 0.25)])
        .with_tail(tail(TailDirection::Pos))
        .with_tail(tail(TailDirection::Neg))
}

/// Gaps `(2k - 1/2, 2k + 1/2)` toward +inf: d_M = 1/2.
pub(crate) fn spec_half_gaps() -> ClosedSetSpec<f64> {
    ClosedSetSpec::new("half-gaps").with_tail(TailRule {
        direction: TailDirection::Pos,
        center: CenterRule {
            alpha: 2.0,
            beta: 0.0,
            k0: 1,
        },
        radius: RadiusRule::Constant { rho: 0.5 },
    })
}

#[test]
fn validate_disjoint_list() {
    let m = validate(
        ClosedSetSpec::new("two-gaps").with_gaps(vec![Gap::bounded(0.0, 1.0), Gap::bounded(2.0, 3.0)]),
    )
    .unwrap();
    assert!(m.contains(-5.0));
    assert!(m.contains(1.5));
    assert!(m.contains(3.0));
    assert!(!m.contains(0.5));
    assert!(!m.contains(2.5));
}

#[test]
fn validate_rejects_full_line() {
    let err = validate(ClosedSetSpec::<f64>::new("empty").with_gaps(vec![Gap {
        lo: Extended::NegInf,
        hi: Extended::PosInf,
    }]))
    .unwrap_err();
    assert_eq!(err, SetError::EmptySet);
}

#[test]
fn validate_rejects_overlap() {
    let err = validate(
        ClosedSetSpec::new("overlap").with_gaps(vec![Gap::bounded(0.0, 2.0), Gap::bounded(1.0, 3.0)]),
    )
    .unwrap_err();
    assert!(matches!(err, SetError::OverlappingGaps { .. }));
}

#[test]
fn validate_rejects_overlapping_constant_tail() {
    // c(k) = k with r = 0.6: k + 0.6 > (k+1) - 0.6.
    let err = validate(ClosedSetSpec::new("bad-tail").with_tail(TailRule {
        direction: TailDirection::Pos,
        center: CenterRule {
            alpha: 1.0,
            beta: 0.0,
            k0: 1,
        },
        radius: RadiusRule::Constant { rho: 0.6 },
    }))
    .unwrap_err();
    assert!(matches!(err, SetError::MalformedTailRule(_)));
}

#[test]
fn validate_rejects_tail_inside_finite_gap() {
    let err = validate(
        ClosedSetSpec::new("tail-clash")
            .with_gaps(vec![Gap::bounded(0.0, 10.0)])
            .with_tail(TailRule {
                direction: TailDirection::Pos,
                center: CenterRule {
                    alpha: 1.0,
                    beta: 0.0,
                    k0: 2,
                },
                radius: RadiusRule::Constant { rho: 0.25 },
            }),
    )
    .unwrap_err();
    assert!(matches!(err, SetError::MalformedTailRule(_)));
}

#[test]
fn contains_endpoints() {
    let m = validate(ClosedSetSpec::new("one-gap").with_gaps(vec![Gap::bounded(0.0, 1.0)])).unwrap();
    assert!(m.contains(0.0));
    assert!(!m.contains(0.5));
    assert!(m.contains(1.0));
}

#[test]
fn contains_on_naturals() {
    let m = validate(spec_naturals()).unwrap();
    assert!(m.contains(3.0));
    assert!(m.contains(0.0));
    assert!(!m.contains(3.5));
    assert!(!m.contains(-0.5));
    assert!(!m.contains(1e6 + 0.5));
    assert!(m.contains(1e6));
}

#[test]
fn distance_examples() {
    let m = validate(ClosedSetSpec::new("gap04").with_gaps(vec![Gap::bounded(0.0, 4.0)])).unwrap();
    assert_eq!(m.distance_to_set(1.0), 1.0);
    assert_eq!(m.distance_to_set(2.0), 2.0);
    assert_eq!(m.distance_to_set(0.0), 0.0);

    let half_line = validate(ClosedSetSpec::new("ray").with_gaps(vec![Gap::below(0.0)])).unwrap();
    assert_eq!(half_line.distance_to_set(-7.0), 7.0);
}

#[test]
fn distance_inside_tail_gap() {
    let m = validate(spec_quarter_gaps()).unwrap();
    assert_eq!(m.distance_to_set(7.0), 0.25);
    assert!((m.distance_to_set(7.1) - 0.15_f64).abs() < 1e-12);
    assert_eq!(m.distance_to_set(-3.0), 0.25);
    assert_eq!(m.distance_to_set(3.3), 0.0);
}

#[test]
fn distance_matches_grid_oracle() {
    // Brute-force oracle: min |x - p| over sampled membership-tested points.
    let sets = [
        validate(spec_example_b()).unwrap(),
        validate(spec_quarter_gaps()).unwrap(),
        validate(spec_naturals()).unwrap(),
        validate(spec_unit_interval()).unwrap(),
    ];
    let step = 1e-3;
    for m in &sets {
        for i in -800..800 {
            let x = i as f64 * 2.5e-2 + 1e-4;
            let mut best = f64::INFINITY;
            let mut p = x - 3.0;
            while p <= x + 3.0 {
                if m.contains(p) {
                    best = best.min((x - p).abs());
                }
                p += step;
            }
            let d = m.distance_to_set(x);
            if best.is_finite() && d < 2.5 {
                assert!(
                    (d - best).abs() <= step,
                    "{}: dist({x}) = {d}, grid oracle {best}",
                    m.name()
                );
            }
        }
    }
}

#[test]
fn truncated_defect_on_reals_is_zero() {
    let m = validate(spec_reals()).unwrap();
    for n in [0.0, 1.0, 17.0, 1e6] {
        assert_eq!(m.truncated_defect(n), 0.0);
    }
}

#[test]
fn truncated_defect_single_gap() {
    let m = validate(ClosedSetSpec::new("g").with_gaps(vec![Gap::bounded(10.0, 12.0)])).unwrap();
    assert_eq!(m.truncated_defect(0.0), 1.0);
    assert_eq!(m.truncated_defect(20.0), 0.0);
    assert_eq!(m.truncated_defect(11.0), 1.0);

    let narrow =
        validate(ClosedSetSpec::new("n").with_gaps(vec![Gap::bounded(10.0, 10.4)])).unwrap();
    assert!((narrow.truncated_defect(10.3) - 0.1_f64).abs() < 1e-12);
}

#[test]
fn truncated_defect_monotone_and_converges() {
    for spec in [
        spec_example_a(),
        spec_example_b(),
        spec_naturals(),
        spec_quarter_gaps(),
        spec_half_gaps(),
    ] {
        let m = validate(spec).unwrap();
        let d = m.compute_d_m().d_m;
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let n = 0.37 * 1.5_f64.powi(i);
            let t = m.truncated_defect(n);
            assert!(t <= prev + 1e-12, "{}: defect not monotone at n={n}", m.name());
            assert!(t >= d - 1e-12, "{}: defect dips below d_M at n={n}", m.name());
            prev = t;
        }
        let bound = m.settle_bound(1e-9);
        for factor in [1.0, 3.0, 10.0] {
            assert!((m.truncated_defect(bound * factor + 1.0) - d).abs() < 1e-9);
        }
    }
}

#[test]
fn d_m_classification() {
    assert_eq!(
        validate(spec_reals()).unwrap().compute_d_m(),
        WvnVerdict {
            d_m: 0.0,
            exact: true,
            holds: true
        }
    );
    let naturals = validate(spec_naturals()).unwrap().compute_d_m();
    assert_eq!(naturals.d_m, 1.0);
    assert!(!naturals.holds);

    let b = validate(spec_example_b()).unwrap().compute_d_m();
    assert_eq!(b.d_m, 0.0);
    assert!(b.holds && b.exact);

    let q = validate(spec_quarter_gaps()).unwrap().compute_d_m();
    assert_eq!(q.d_m, 0.25);
    assert!(!q.holds);

    let h = validate(spec_half_gaps()).unwrap().compute_d_m();
    assert_eq!(h.d_m, 0.5);
}

#[test]
fn d_m_geometric_and_table_tails() {
    let g = validate(ClosedSetSpec::new("geom").with_tail(TailRule {
        direction: TailDirection::Pos,
        center: CenterRule {
            alpha: 1.0,
            beta: 0.0,
            k0: 1,
        },
        radius: RadiusRule::Geometric { rho: 0.4, q: 0.5 },
    }))
    .unwrap();
    assert_eq!(g.compute_d_m().d_m, 0.0);
    assert!(g.compute_d_m().holds);

    let t = validate(ClosedSetSpec::new("table").with_tail(TailRule {
        direction: TailDirection::Pos,
        center: CenterRule {
            alpha: 1.0,
            beta: 0.0,
            k0: 1,
        },
        radius: RadiusRule::Table {
            table: vec![0.4, 0.35, 0.3],
            limit: 0.3,
        },
    }))
    .unwrap();
    assert_eq!(t.compute_d_m().d_m, 0.3);
}

#[test]
fn dense_sequence_singleton() {
    let m = validate(
        ClosedSetSpec::new("point").with_gaps(vec![Gap::below(5.0), Gap::above(5.0)]),
    )
    .unwrap();
    assert_eq!(m.dense_sequence(3), vec![5.0, 5.0, 5.0]);
}

#[test]
fn dense_sequence_unit_interval() {
    let m = validate(spec_unit_interval()).unwrap();
    assert_eq!(m.dense_sequence(3), vec![0.0, 1.0, 0.5]);
    let more = m.dense_sequence(7);
    assert_eq!(more, vec![0.0, 1.0, 0.5, 0.25, 0.75, 0.125, 0.375]);
}

#[test]
fn dense_sequence_naturals() {
    let m = validate(spec_naturals()).unwrap();
    assert_eq!(m.dense_sequence(4), vec![0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn dense_sequence_accumulates_at_gap_endpoints() {
    for spec in [spec_example_b(), spec_unit_interval(), spec_example_a()] {
        let m = validate(spec).unwrap();
        let vals = m.dense_sequence(4000);
        for v in &vals {
            assert!(m.contains(*v), "{}: emitted {v} outside the set", m.name());
        }
        let mut endpoints = Vec::new();
        for g in m.finite_gaps() {
            endpoints.extend(g.lo.finite());
            endpoints.extend(g.hi.finite());
        }
        for p in endpoints {
            let eps = 1e-3;
            assert!(
                vals.iter().any(|v| (v - p).abs() < eps),
                "{}: no dense point within {eps} of endpoint {p}",
                m.name()
            );
        }
    }
}

#[test]
fn dense_sequence_is_dense_in_window() {
    let m = validate(spec_example_a()).unwrap();
    let vals = m.dense_sequence(3000);
    for i in 0..200 {
        let x = 1.0 + i as f64 * 0.02;
        let nearest = vals
            .iter()
            .map(|v| (v - x).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.05, "no dense point near {x} (closest {nearest})");
    }
}

#[test]
fn window_intervals_examples() {
    let m = validate(spec_unit_interval()).unwrap();
    assert_eq!(m.window_intervals(-2.0, 3.0), vec![(0.0, 1.0)]);

    let n = validate(spec_naturals()).unwrap();
    let w = n.window_intervals(-1.0, 2.5);
    assert_eq!(w, vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]);

    let r = validate(spec_reals()).unwrap();
    assert_eq!(r.window_intervals(-1.0, 1.0), vec![(-1.0, 1.0)]);
}

#[test]
fn negation_mirrors_geometry() {
    let m = validate(spec_naturals()).unwrap();
    let neg = m.negated();
    assert!(neg.contains(-3.0));
    assert!(!neg.contains(0.5));
    assert!(!neg.contains(-2.5));
    assert_eq!(neg.compute_d_m().d_m, 1.0);
    assert_eq!(neg.distance_to_set(7.0), 7.0);
}

#[test]
fn spec_json_round_trip() {
    for spec in [
        spec_reals(),
        spec_example_a(),
        spec_example_b(),
        spec_naturals(),
        spec_quarter_gaps(),
    ] {
        let json = serde_json::to_string(&spec).unwrap();
        let back: ClosedSetSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        // Serialization is deterministic.
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }
}

#[test]
fn spec_json_shape() {
    let json = serde_json::to_string(&spec_naturals()).unwrap();
    assert!(json.contains(r#""finite_gaps":[["-inf",0.0]]"#));
    assert!(json.contains(r#""direction":"+inf""#));
    assert!(json.contains(r#""kind":"constant""#));
}

#[test]
fn generic_core_instantiates_at_f32() {
    let spec: ClosedSetSpec<f32> =
        ClosedSetSpec::new("f32").with_gaps(vec![Gap::bounded(0.0f32, 4.0f32)]);
    let m = validate(spec).unwrap();
    assert_eq!(m.distance_to_set(1.0f32), 1.0f32);
    assert!(m.compute_d_m().holds);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_bounded_gaps() -> impl Strategy<Value = Vec<Gap<f64>>> {
        // Build disjoint gaps from an increasing sequence of breakpoints.
        proptest::collection::vec(0.01..1.5f64, 2..12).prop_map(|steps| {
            let mut gaps = Vec::new();
            let mut x = -3.0;
            for pair in steps.chunks(2) {
                if pair.len() < 2 {
                    break;
                }
                let lo = x + pair[0];
                let hi = lo + pair[1];
                gaps.push(Gap::bounded(lo, hi));
                x = hi;
            }
            gaps
        })
    }

    proptest! {
        #[test]
        fn distance_zero_iff_contains(gaps in arb_bounded_gaps(), x in -12.0..12.0f64) {
            let m = validate(ClosedSetSpec::new("prop").with_gaps(gaps)).unwrap();
            let d = m.distance_to_set(x);
            prop_assert_eq!(d == 0.0, m.contains(x));
            prop_assert!(d >= 0.0);
        }

        #[test]
        fn truncated_defect_non_increasing(gaps in arb_bounded_gaps(), a in 0.0..20.0f64, b in 0.0..20.0f64) {
            let m = validate(ClosedSetSpec::new("prop").with_gaps(gaps)).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.truncated_defect(hi) <= m.truncated_defect(lo) + 1e-12);
        }

        #[test]
        fn dense_points_lie_in_set(gaps in arb_bounded_gaps(), count in 1usize..200) {
            let m = validate(ClosedSetSpec::new("prop").with_gaps(gaps)).unwrap();
            for v in m.dense_sequence(count) {
                prop_assert!(m.contains(v));
            }
        }
    }
}
