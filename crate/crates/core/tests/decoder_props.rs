use lpdecode::decoder::{decode, lp_objective, smoothed_objective, weighted_least_squares, DecoderConfig};
use lpdecode::ensemble::{make_instance, recovered, ErrorSpec, DEFAULT_SUCCESS_TOL};
use lpdecode::{Error, SeedSpec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[test]
fn one_dimensional_outlier_matches_brute_force() {
    let a = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]);
    let y = DVector::from_vec(vec![7.0, 2.0, 2.0]);
    let objective = |x: f64| (7.0 - x).abs().sqrt() + 2.0 * (2.0 - x).abs().sqrt();
    let best = (-2000..=12000).map(|i| i as f64 * 1e-3).min_by(|u, v| objective(*u).total_cmp(&objective(*v))).unwrap();
    let res = decode(&a, &y, &DecoderConfig::with_p(0.5), SeedSpec::new(0, 1)).unwrap();
    assert!((best - 2.0).abs() < 1e-9);
    assert!((res.x_hat[0] - best).abs() < 1e-4, "{}", res.x_hat[0]);
}

#[test]
fn clean_observations_are_fixed_points() {
    for p in [0.2, 0.5, 0.9, 1.0] {
        let inst = make_instance(60, 6, &ErrorSpec::gaussian(0.0), SeedSpec::new(21, 0)).unwrap();
        let res = decode(&inst.a, &inst.y, &DecoderConfig::with_p(p), SeedSpec::new(21, 1)).unwrap();
        assert!(recovered(&res.x_hat, inst.f.as_slice(), 1e-6), "p={p}");
    }
}

#[test]
fn returned_objective_is_exact() {
    let inst = make_instance(80, 8, &ErrorSpec::gaussian(0.2), SeedSpec::new(3, 0)).unwrap();
    let res = decode(&inst.a, &inst.y, &DecoderConfig::with_p(0.6), SeedSpec::new(3, 1)).unwrap();
    let r = &inst.y - &inst.a * DVector::from_column_slice(&res.x_hat);
    assert_eq!(res.objective, lp_objective(r.as_slice(), 0.6));
}

#[test]
fn restarts_never_worsen_the_objective() {
    let inst = make_instance(80, 8, &ErrorSpec::gaussian(0.35), SeedSpec::new(13, 0)).unwrap();
    let single = decode(&inst.a, &inst.y, &DecoderConfig::with_p(0.5), SeedSpec::new(13, 1)).unwrap();
    let many = decode(&inst.a, &inst.y, &DecoderConfig::thorough(0.5), SeedSpec::new(13, 1)).unwrap();
    assert!(many.objective <= single.objective);
}

#[test]
fn p1_recovers_easy_instances() {
    let mut hits = 0;
    for t in 0..100u64 {
        let inst = make_instance(200, 20, &ErrorSpec::gaussian(0.15), SeedSpec::new(400 + t, 0)).unwrap();
        let res = decode(&inst.a, &inst.y, &DecoderConfig::with_p(1.0), SeedSpec::new(400 + t, 1)).unwrap();
        hits += recovered(&res.x_hat, inst.f.as_slice(), DEFAULT_SUCCESS_TOL) as usize;
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn rank_deficient_system_is_singular() {
    let a = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, -1.0, -2.0]);
    let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    let w = DVector::from_element(4, 1.0);
    assert!(matches!(weighted_least_squares(&a, &y, &w), Err(Error::Singular(_))));
    assert!(matches!(decode(&a, &y, &DecoderConfig::default(), SeedSpec::new(0, 0)), Err(Error::Singular(_))));
}

#[test]
fn bad_configs_are_rejected() {
    let a = DMatrix::identity(3, 2);
    let y = DVector::zeros(3);
    let s = SeedSpec::new(0, 0);
    for cfg in [
        DecoderConfig::with_p(0.0),
        DecoderConfig::with_p(1.5),
        DecoderConfig { eps_min: 2.0, ..Default::default() },
        DecoderConfig { eps_shrink: 1.0, ..Default::default() },
        DecoderConfig { restarts: 0, ..Default::default() },
    ] {
        assert!(decode(&a, &y, &cfg, s).is_err());
    }
    assert!(decode(&a, &DVector::from_vec(vec![1.0, f64::NAN, 0.0]), &DecoderConfig::default(), s).is_err());
}

#[test]
fn weighted_least_squares_matches_normal_equations() {
    let inst = make_instance(30, 4, &ErrorSpec::gaussian(0.0), SeedSpec::new(2, 0)).unwrap();
    let w = DVector::from_iterator(30, (0..30).map(|i| 0.5 + (i % 7) as f64));
    let x = weighted_least_squares(&inst.a, &inst.y, &w).unwrap();
    let aw = DMatrix::from_fn(30, 4, |i, j| w[i] * inst.a[(i, j)]);
    let lhs = inst.a.transpose() * &aw;
    let rhs = aw.transpose() * &inst.y;
    let x_ne = lhs.lu().solve(&rhs).unwrap();
    assert!((x - x_ne).amax() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn smoothed_objective_descends_within_phases(seed in any::<u64>(), p in 0.2f64..=1.0, rho in 0.0f64..0.5) {
        let inst = make_instance(60, 6, &ErrorSpec::gaussian(rho), SeedSpec::new(seed, 0)).unwrap();
        let res = decode(&inst.a, &inst.y, &DecoderConfig::with_p(p), SeedSpec::new(seed, 1)).unwrap();
        for w in res.trace.windows(2) {
            if w[0].phase == w[1].phase {
                prop_assert!(w[1].smoothed <= w[0].smoothed * (1.0 + 1e-12), "{} -> {}", w[0].smoothed, w[1].smoothed);
            }
        }
    }

    #[test]
    fn decode_is_scale_equivariant(seed in any::<u64>(), p in 0.3f64..=1.0, c in prop::sample::select(vec![1e-3, 0.5, 3.0, 1e4])) {
        let inst = make_instance(50, 5, &ErrorSpec::gaussian(0.2), SeedSpec::new(seed, 0)).unwrap();
        let cfg = DecoderConfig::with_p(p);
        let base = decode(&inst.a, &inst.y, &cfg, SeedSpec::new(seed, 1)).unwrap();
        let scaled = decode(&inst.a, &(&inst.y * c), &cfg, SeedSpec::new(seed, 1)).unwrap();
        let norm = base.x_hat.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (x, xs) in base.x_hat.iter().zip(&scaled.x_hat) {
            prop_assert!((c * x - xs).abs() <= 1e-8 * c * norm, "{} vs {}", c * x, xs);
        }
    }

    #[test]
    fn decode_is_deterministic(seed in any::<u64>(), p in 0.3f64..=1.0) {
        let inst = make_instance(40, 4, &ErrorSpec::gaussian(0.3), SeedSpec::new(seed, 0)).unwrap();
        let cfg = DecoderConfig { restarts: 3, ..DecoderConfig::with_p(p) };
        prop_assert_eq!(
            decode(&inst.a, &inst.y, &cfg, SeedSpec::new(seed, 1)).unwrap(),
            decode(&inst.a, &inst.y, &cfg, SeedSpec::new(seed, 1)).unwrap()
        );
    }

    #[test]
    fn smoothing_upper_bounds_the_objective(r in prop::collection::vec(-5.0f64..5.0, 1..20), p in 0.1f64..=1.0, eps in 1e-12f64..1.0) {
        prop_assert!(smoothed_objective(&r, p, eps) >= lp_objective(&r, p));
    }
}
