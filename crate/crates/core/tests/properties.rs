//! Property tests for the invariants of the measure, rearrangement, norm,
//! Riesz and experiment layers.

use herzlab::experiments::{classify_params, Theorem, TraceParams};
use herzlab::measure::ball_growth_report;
use herzlab::norms::{
    herz_norm, lorentz_herz_norm, lorentz_norm, lp_norm, LorentzVariant, NormSpec, TruncationPolicy,
};
use herzlab::rearrange::Distribution;
use herzlab::riesz::{riesz_potential_1d, RieszParams};
use herzlab::{Ball, Measure, PiecewisePowerFunction, PowerPiece};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn measure() -> impl Strategy<Value = Measure> {
    prop_oneof![
        Just(Measure::lebesgue(1).unwrap()),
        (0.6f64..=1.0).prop_map(|b| Measure::power_weight(b).unwrap()),
    ]
}

/// Up to two radial power pieces on disjoint intervals away from the origin,
/// each on a random side.
fn function() -> impl Strategy<Value = PiecewisePowerFunction> {
    (
        prop::collection::btree_set(1u32..600, 4),
        prop::collection::vec((any::<bool>(), 0.1f64..5.0, -0.45f64..0.5), 2),
        1usize..=2,
    )
        .prop_map(|(radii, shapes, count)| {
            let r: Vec<f64> = radii.into_iter().map(|k| k as f64 / 20.0).collect();
            let pieces = (0..count)
                .map(|i| {
                    let (neg, coef, e) = shapes[i];
                    let (lo, hi) = (r[2 * i], r[2 * i + 1]);
                    if neg {
                        PowerPiece::new(-hi, -lo, coef, e)
                    } else {
                        PowerPiece::new(lo, hi, coef, e)
                    }
                })
                .collect();
            PiecewisePowerFunction::new(pieces).unwrap()
        })
}

fn step_function() -> impl Strategy<Value = PiecewisePowerFunction> {
    (
        prop::collection::btree_set(-200i32..200, 2..6),
        prop::collection::vec(0.0f64..3.0, 5),
    )
        .prop_map(|(pts, coefs)| {
            let x: Vec<f64> = pts.into_iter().map(|k| k as f64 / 40.0).collect();
            let pieces = x
                .windows(2)
                .zip(&coefs)
                .filter(|(w, _)| !(w[0] < 0.0 && w[1] > 0.0))
                .map(|(w, &c)| PowerPiece::constant(w[0], w[1], c))
                .collect();
            PiecewisePowerFunction::new(pieces).unwrap()
        })
}

/// Every implemented norm of `f`, with the star and maximal Lorentz norms.
fn all_norms(f: &PiecewisePowerFunction, m: &Measure, p: f64, r: f64, q: f64, lambda: f64) -> Vec<f64> {
    vec![
        lp_norm(f, m, p).unwrap(),
        lorentz_norm(f, m, p, r, LorentzVariant::Star).unwrap(),
        lorentz_norm(f, m, p, r, LorentzVariant::DoubleStar).unwrap(),
        herz_norm(f, &NormSpec::herz(p, q, lambda, *m).unwrap()).unwrap().value,
        herz_norm(f, &NormSpec::herz_inhomogeneous(p, q, lambda, *m).unwrap()).unwrap().value,
        lorentz_herz_norm(f, &NormSpec::lorentz_herz(p, r, q, lambda, *m).unwrap())
            .unwrap()
            .value,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_is_additive(
        m in measure(),
        a in -20.0f64..20.0,
        len in 0.01f64..30.0,
        frac in 0.0f64..1.0,
    ) {
        let b = a + len;
        let c = a + frac * len;
        let whole = m.interval_mass(a, b);
        prop_assert!(rel(m.interval_mass(a, c) + m.interval_mass(c, b), whole) <= 1e-12);
        let center = 0.5 * (a + b);
        let ball = m.ball_mass(&Ball::interval(center, 0.5 * len).unwrap()).unwrap();
        prop_assert!(rel(ball, whole) <= 1e-12);
    }

    #[test]
    fn unit_power_weight_is_half_line_lebesgue(a in 0.0f64..50.0, len in 0.0f64..50.0) {
        let pw = Measure::power_weight(1.0).unwrap();
        let leb = Measure::lebesgue(1).unwrap();
        prop_assert_eq!(pw.interval_mass(a, a + len), leb.interval_mass(a, a + len));
    }

    #[test]
    fn ball_growth_bounded_by_inverse_beta(
        beta in 0.05f64..=1.0,
        balls in prop::collection::vec((-1e3f64..1e3, -12i32..12), 1..40),
    ) {
        let m = Measure::power_weight(beta).unwrap();
        let sample: Vec<Ball> = balls
            .into_iter()
            .map(|(c, k)| Ball::interval(c, 2f64.powi(k)).unwrap())
            .collect();
        let rep = ball_growth_report(&m, beta, &sample).unwrap();
        prop_assert!(rep.sup_ratio <= (1.0 + 1e-12) / beta, "{} > 1/{}", rep.sup_ratio, beta);
    }

    #[test]
    fn rearrangement_scales_and_decreases(
        f in function(),
        m in measure(),
        c in -4.0f64..4.0,
        ts in prop::collection::vec(0.001f64..200.0, 2..12),
    ) {
        let d = Distribution::new(&f, &m).unwrap();
        let dc = Distribution::new(&f.scaled(c), &m).unwrap();
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        let mut prev = f64::INFINITY;
        for &t in &ts {
            let v = d.rearrangement(t);
            prop_assert!(v >= 0.0 && v <= prev);
            prev = v;
            prop_assert!(rel(dc.rearrangement(t), c.abs() * v) <= 1e-12);
            prop_assert!(v <= d.maximal_average(t).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn norms_are_homogeneous(
        f in function(),
        m in measure(),
        c in 0.01f64..100.0,
        p in 1.2f64..4.0,
        r in 1.0f64..4.0,
        q in 1.0f64..3.0,
        lambda in -0.3f64..0.3,
    ) {
        let base = all_norms(&f, &m, p, r, q, lambda);
        let scaled = all_norms(&f.scaled(c), &m, p, r, q, lambda);
        for (i, (a, b)) in base.iter().zip(&scaled).enumerate() {
            prop_assert!(rel(*b, c * a) <= 1e-9, "norm {}: {} vs {}", i, b, c * a);
        }
    }

    #[test]
    fn norms_are_monotone_under_domination(
        f in function(),
        boost in prop::collection::vec(1.0f64..3.0, 2),
        m in measure(),
        p in 1.2f64..4.0,
        r in 1.0f64..4.0,
        q in 1.0f64..3.0,
        lambda in -0.3f64..0.3,
    ) {
        // g agrees with f up to a factor >= 1 on each piece, so |f| <= |g|.
        let g = PiecewisePowerFunction::new(
            f.pieces()
                .iter()
                .zip(&boost)
                .map(|(pc, k)| PowerPiece { coef: pc.coef * k, ..*pc })
                .collect(),
        )
        .unwrap();
        let nf = all_norms(&f, &m, p, r, q, lambda);
        let ng = all_norms(&g, &m, p, r, q, lambda);
        for (i, (a, b)) in nf.iter().zip(&ng).enumerate() {
            prop_assert!(*a <= b * (1.0 + 1e-9), "norm {}: {} > {}", i, a, b);
        }
    }

    #[test]
    fn lorentz_sandwich(
        f in function(),
        m in measure(),
        p in 1.2f64..4.0,
        r in prop_oneof![1.0f64..6.0, Just(f64::INFINITY)],
    ) {
        let star = lorentz_norm(&f, &m, p, r, LorentzVariant::Star).unwrap();
        let dstar = lorentz_norm(&f, &m, p, r, LorentzVariant::DoubleStar).unwrap();
        prop_assert!(star <= dstar * (1.0 + 1e-9), "{} > {}", star, dstar);
        prop_assert!(dstar <= p / (p - 1.0) * star * (1.0 + 1e-9), "{} > p' {}", dstar, star);
    }

    #[test]
    fn widening_the_window_is_sound(
        e in 0.0f64..2.0,
        outward in any::<bool>(),
        p in 1.2f64..4.0,
        q in 1.0f64..3.0,
        lambda in -0.4f64..0.4,
        edge in 6i32..15,
        extra in 1i32..20,
    ) {
        // |x|^{-e} on (1, ∞) has a tail toward +∞ only, on (0, 1) toward −∞.
        let f = if outward {
            PiecewisePowerFunction::radial_power(1.0, -e, 1.0, f64::INFINITY).unwrap()
        } else {
            PiecewisePowerFunction::radial_power(1.0, -e, 0.0, 1.0).unwrap()
        };
        let m = Measure::lebesgue(1).unwrap();
        let window = |k: i32| {
            let tp = if outward {
                TruncationPolicy::new(-60, k, 1e-8)
            } else {
                TruncationPolicy::new(-k, 60, 1e-8)
            };
            NormSpec::herz(p, q, lambda, m).unwrap().with_truncation(tp.unwrap()).unwrap()
        };
        let rate = lambda + 1.0 / p - e;
        let decays = if outward { rate < -0.05 } else { rate > 0.05 && e < 1.0 / p };
        let narrow = herz_norm(&f, &window(edge));
        let wide = herz_norm(&f, &window(edge + extra));
        if decays {
            prop_assert!(narrow.is_ok() && wide.is_ok(), "{:?} {:?}", narrow, wide);
        }
        if let (Ok(narrow), Ok(wide)) = (narrow, wide) {
            let (a, b) = (narrow.ledger.value(), wide.ledger.value());
            prop_assert!(b >= a * (1.0 - 1e-12), "window value fell: {} -> {}", a, b);
            if decays {
                prop_assert!(narrow.ledger.tail_estimate.is_finite());
                prop_assert!(b - a <= narrow.ledger.tail_estimate * (1.0 + 1e-6) + 1e-12 * a,
                    "change {} exceeds tail estimate {}", b - a, narrow.ledger.tail_estimate);
            }
        }
    }

    #[test]
    fn riesz_potential_is_positive(f in step_function(), gamma in 0.1f64..0.9, x in -8.0f64..8.0) {
        let params = RieszParams::new(gamma, 1).unwrap();
        prop_assert!(riesz_potential_1d(&f, &params, x).unwrap() >= 0.0);
    }

    #[test]
    fn riesz_potential_is_translation_equivariant(
        f in step_function(),
        gamma in 0.1f64..0.9,
        x in -8.0f64..8.0,
        shift in -5.0f64..5.0,
    ) {
        let params = RieszParams::new(gamma, 1).unwrap();
        let base = riesz_potential_1d(&f, &params, x).unwrap();
        let moved = riesz_potential_1d(&f.translated(shift).unwrap(), &params, x + shift).unwrap();
        prop_assert!((moved - base).abs() <= 1e-10 * base.abs().max(1.0), "{} vs {}", moved, base);
    }

    #[test]
    fn riesz_potential_dilation_law(
        f in step_function(),
        gamma in 0.1f64..0.9,
        x in -8.0f64..8.0,
        s in 0.1f64..10.0,
    ) {
        let params = RieszParams::new(gamma, 1).unwrap();
        let lhs = riesz_potential_1d(&f.dilated(s).unwrap(), &params, x).unwrap();
        let rhs = s.powf(-gamma) * riesz_potential_1d(&f, &params, s * x).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-8 || (lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn classification_ignores_grid_order(
        grid in prop::collection::vec(
            (0.05f64..1.0, 1.0f64..5.0, 1.0f64..6.0, 0.5f64..3.0, 0.5f64..3.0, -1.0f64..1.0, 0.2f64..1.2),
            1..12,
        )
        .prop_shuffle(),
        seed in any::<u64>(),
    ) {
        let params: Vec<TraceParams> = grid
            .iter()
            .map(|&(g, p1, p2, q1, q2, l, beta)| {
                TraceParams::new(g, p1, p2, q1, q2, l, Measure::power_weight(beta).unwrap()).with_lorentz(1.0, 2.0)
            })
            .collect();
        let mut order: Vec<usize> = (0..params.len()).collect();
        // deterministic permutation driven by the seed
        order.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        for theorem in [Theorem::Mt, Theorem::MtLh, Theorem::Limiting] {
            let forward: Vec<_> = params.iter().map(|p| classify_params(p, theorem)).collect();
            for &i in &order {
                prop_assert_eq!(&classify_params(&params[i], theorem), &forward[i]);
            }
        }
    }
}
