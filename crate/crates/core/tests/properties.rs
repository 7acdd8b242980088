mod common;

use common::{random_mac_any, rng};
use covertmac::infodiv::{chi2_mixture, mi_identity_gap, FactorizedLaw};
use covertmac::region::{convex_mix, corner, upper_hull, CovertParams, SingleUser};
use covertmac::simulator::build_multiplex;
use covertmac::units::Unit;
use proptest::prelude::*;
use rand::Rng;

fn random_params(r: &mut impl Rng, x3: usize, beta: [f64; 2]) -> CovertParams {
    CovertParams::single(common::pmf(r, x3, 0.0), [r.gen_range(0.0..2.0), r.gen_range(0.0..2.0)], beta)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chi2_depends_on_direction_only(seed in any::<u64>(), c in prop_oneof![Just(0.1), Just(2.0), Just(1e6), 1e-3f64..1e3]) {
        let mut r = rng(seed);
        let ch = random_mac_any(&mut r, 0.2);
        let (a, b) = (r.gen_range(0.0..1.0), r.gen_range(0.01..1.0));
        let x3 = r.gen_range(0..ch.x3_size());
        let base = chi2_mixture(a, b, x3, &ch).unwrap();
        let scaled = chi2_mixture(c * a, c * b, x3, &ch).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn identity_holds_on_factorizing_laws(seed in any::<u64>(), phases in 1usize..4) {
        let mut r = rng(seed);
        let ch = random_mac_any(&mut r, 0.1);
        let law = FactorizedLaw {
            p_t: common::pmf(&mut r, phases, 0.0),
            p1: (0..phases).map(|_| r.gen()).collect(),
            p2: (0..phases).map(|_| r.gen()).collect(),
            p_x3_given_t: (0..phases).map(|_| common::pmf(&mut r, ch.x3_size(), 0.0)).collect(),
        };
        prop_assert!(mi_identity_gap(&law, &ch).unwrap().max() <= 1e-12);
    }

    #[test]
    fn mixing_interpolates_corners(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let ch = random_mac_any(&mut r, 0.1);
        let beta = [r.gen(), r.gen()];
        let (a, b) = (random_params(&mut r, ch.x3_size(), beta), random_params(&mut r, ch.x3_size(), beta));
        prop_assume!(a.rho[0].iter().sum::<f64>() > 1e-3 && b.rho[0].iter().sum::<f64>() > 1e-3);
        let (ca, cb) = (corner(&a, &ch).unwrap(), corner(&b, &ch).unwrap());
        let cm = corner(&convex_mix(&a, &b, lambda, &ch).unwrap(), &ch).unwrap();
        let mix = |x: f64, y: f64| lambda * x + (1.0 - lambda) * y;
        for l in 0..2 {
            prop_assert!((cm.r[l] - mix(ca.r[l], cb.r[l])).abs() <= 1e-9);
            prop_assert!((cm.k_signed[l] - mix(ca.k_signed[l], cb.k_signed[l])).abs() <= 1e-9);
            prop_assert!(cm.k[l] <= mix(ca.k[l], cb.k[l]) + 1e-9);
        }
        prop_assert!((cm.r_nc[0] - mix(ca.r_nc[0], cb.r_nc[0])).abs() <= 1e-9);
    }

    #[test]
    fn multiplex_counts_round_the_type(seed in any::<u64>(), phases in 1usize..6, n in 1usize..5000) {
        let mut r = rng(seed);
        let p = common::pmf(&mut r, phases, 0.0);
        let m = build_multiplex(&p, n);
        prop_assert_eq!(m.t_seq.len(), n);
        prop_assert_eq!(m.counts.iter().sum::<usize>(), n);
        for (c, q) in m.counts.iter().zip(&p) {
            prop_assert!((*c as f64 - q * n as f64).abs() < 1.0);
        }
        prop_assert!(m.t_seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hull_dominates_its_input(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..40)) {
        let idx = upper_hull(&pts);
        prop_assert!(!idx.is_empty());
        let h: Vec<(f64, f64)> = idx.iter().map(|&i| pts[i]).collect();
        prop_assert!(h.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
        // every support value is attained on the hull
        for k in 0..=16 {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / 16.0;
            let s = |v: &[(f64, f64)]| v.iter().map(|p| th.cos() * p.0 + th.sin() * p.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((s(&pts) - s(&h)).abs() <= 1e-9);
        }
    }

    #[test]
    fn tradeoff_is_concave_and_nondecreasing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let su = SingleUser::from_dmmac(&common::random_single_user(&mut r, 4, 4, 0.1), false).unwrap();
        let ks: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let v: Vec<f64> = ks.iter().map(|&k| su.rate(k)).collect();
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(v.windows(3).all(|w| w[0] + w[2] <= 2.0 * w[1] + 1e-12));
        prop_assert!(v.iter().all(|x| *x <= su.capacity() + 1e-12));
    }

    #[test]
    fn bits_roundtrip(x in -1e6f64..1e6) {
        let b = Unit::Bits.from_nats(x);
        prop_assert!((b - x / std::f64::consts::LN_2).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert!((Unit::Bits.to_nats(b) - x).abs() <= 1e-9 * x.abs().max(1.0));
    }
}
