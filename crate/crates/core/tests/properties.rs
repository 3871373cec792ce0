use proptest::prelude::*;

use ldproj::rates::{linear_grid, rate_v};
use ldproj::sampling::{generate_values, Method, PExponent, QuantityConfig, ScheduleRule};
use ldproj::verify::{clopper_pearson, ks_two_sample, Interval};
use ldproj::Extended;

fn p_exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![(1.0f64..8.0).prop_map(PExponent::Finite), Just(PExponent::Infinity)]
}

proptest! {
    #[test]
    fn clopper_pearson_brackets_the_point_estimate(trials in 1u64..5000, frac in 0.0f64..=1.0, level in 0.5f64..0.999) {
        let hits = ((trials as f64) * frac).round() as u64;
        let (lo, hi) = clopper_pearson(hits, trials, level).unwrap();
        let p_hat = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p_hat && p_hat <= hi && hi <= 1.0, "{lo} {p_hat} {hi}");
    }

    #[test]
    fn ks_statistic_is_symmetric_and_bounded(
        a in prop::collection::vec(-10.0f64..10.0, 1..60),
        b in prop::collection::vec(-10.0f64..10.0, 1..60),
    ) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert!((ab.statistic - ba.statistic).abs() < 1e-15);
        prop_assert!(ks_two_sample(&a, &a).unwrap().statistic == 0.0);
    }

    #[test]
    fn rate_v_is_nonnegative_and_vanishes_at_the_typical_value(lambda in 0.01f64..0.99, y in -0.5f64..1.5) {
        let r = rate_v(lambda, y).unwrap();
        prop_assert!(r >= Extended::Finite(0.0));
        prop_assert!(rate_v(lambda, lambda.sqrt()).unwrap().to_f64().abs() < 1e-12);
    }

    #[test]
    fn linear_grid_hits_endpoints(lo in -100.0f64..100.0, width in 1e-3f64..100.0, count in 2usize..500) {
        let hi = lo + width;
        let g = linear_grid(lo, hi, count).unwrap();
        prop_assert_eq!(g.len(), count);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[count - 1], hi);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interval_and_extended_round_trip(lo in -1e6f64..1e6, width in 1e-6f64..1e6, unbounded: bool) {
        let hi = if unbounded { Extended::PosInf } else { Extended::Finite(lo + width) };
        let i = Interval::new(lo, hi).unwrap();
        let json = serde_json::to_string(&i).unwrap();
        prop_assert_eq!(serde_json::from_str::<Interval>(&json).unwrap(), i);
        let parsed: Interval = format!("{}:{}", lo, hi).parse().unwrap();
        prop_assert_eq!(parsed, i);
        prop_assert_eq!(hi.to_string().parse::<Extended>().unwrap(), hi);
    }

    #[test]
    fn p_exponent_round_trips(p in p_exponent()) {
        prop_assert_eq!(p.to_string().parse::<PExponent>().unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<PExponent>(&json).unwrap(), p);
    }

    #[test]
    fn schedule_rules_stay_inside_the_dimension(n in 2usize..100_000, lambda in 0.0f64..=1.0, e in 0.05f64..0.95, c in 0usize..200_000) {
        for rule in [
            ScheduleRule::ProportionalFloor { lambda },
            ScheduleRule::Constant { k: c },
            ScheduleRule::Power { exponent: e },
            ScheduleRule::ComplementPower { exponent: e },
        ] {
            let k = rule.k_for(n).unwrap();
            prop_assert!(1 <= k && k < n, "{rule:?} n={n} k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sampling_ignores_the_worker_count(seed: u64, count in 1usize..20_000, workers in 2usize..6, p in p_exponent(), product: bool) {
        let method = if product { Method::Product } else { Method::Direct };
        let cfg = QuantityConfig::scaled_norm(12, 5, p, method);
        let one = generate_values(&cfg, seed, count, 1).unwrap();
        let many = generate_values(&cfg, seed, count, workers).unwrap();
        prop_assert_eq!(one.len(), count);
        prop_assert!(one.iter().zip(&many).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
