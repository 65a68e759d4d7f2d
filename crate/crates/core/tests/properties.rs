use mdir_core::logrank::bound_holds;
use mdir_core::numerics::linalg::{matmul, rank_tolerance};
use mdir_core::numerics::{chi2_cdf, chi2_quantile, chi2_sf, eigen_sym, pseudo_inverse, SymMatrix};
use mdir_core::permute::{exhaustive_permutation_test, permutation_test, PermConfig};
use mdir_core::weights::{
    check_independence, make_crossing, make_rg, rg, select_independent_subset, WeightFn, WeightSet,
};
use mdir_core::{build_risk_table, compute_sn, LogrankEngine, LogrankError, TwoSampleData};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn sample() -> impl Strategy<Value = Sample> {
    // integer-valued times so ties are common
    prop::collection::vec((1u32..15, any::<bool>()), 2..25)
        .prop_map(|v| v.into_iter().map(|(t, e)| (t as f64, e)).collect())
}

type Sample = Vec<(f64, bool)>;

fn two_samples() -> impl Strategy<Value = (Sample, Sample)> {
    (sample(), sample())
}

fn pool() -> Vec<WeightFn> {
    vec![
        rg(0, 0),
        make_crossing(),
        rg(1, 1),
        rg(1, 3),
        rg(1, 5),
        rg(0, 5),
        rg(2, 0),
    ]
}

fn menu() -> impl Strategy<Value = WeightSet> {
    prop::sample::subsequence((0..7).collect::<Vec<usize>>(), 1..5)
        .prop_map(|idx| WeightSet::new(idx.into_iter().map(|i| pool()[i].clone()).collect()).unwrap())
}

/// Ratio of the largest to the smallest retained eigenvalue.
fn condition(a: &SymMatrix) -> f64 {
    let values = eigen_sym(a).unwrap().values;
    let tol = rank_tolerance(&values);
    let kept: Vec<f64> = values.iter().map(|l| l.abs()).filter(|&l| l > tol).collect();
    match kept.iter().copied().reduce(f64::min) {
        Some(min) => kept.iter().copied().fold(0.0, f64::max) / min,
        None => 1.0,
    }
}

/// S and the rounding tolerance implied by the conditioning of its covariance.
fn s_value(g1: &[(f64, bool)], g2: &[(f64, bool)], ws: &WeightSet) -> Option<(f64, f64)> {
    let data = TwoSampleData::from_samples(g1, g2).unwrap();
    match compute_sn(&build_risk_table(&data), ws) {
        Ok(st) => Some((st.s_n, rel_tol(condition(&st.sigma_hat)))),
        Err(LogrankError::NoEvents) => None,
        Err(e) => panic!("{e}"),
    }
}

fn rel_tol(kappa: f64) -> f64 {
    1e-9_f64.max(256.0 * f64::EPSILON * kappa)
}

fn close((a, ta): (f64, f64), (b, tb): (f64, f64)) -> bool {
    (a - b).abs() <= ta.max(tb) * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn risk_table_accounting((g1, g2) in two_samples()) {
        let data = TwoSampleData::from_samples(&g1, &g2).unwrap();
        let rt = build_risk_table(&data);
        let events = g1.iter().chain(&g2).filter(|s| s.1).count();
        prop_assert_eq!(rt.n_events(), events);
        for w in rt.rows.windows(2) {
            prop_assert!(w[0].time < w[1].time);
            prop_assert!(w[0].at_risk >= w[1].at_risk + w[0].events);
        }
        for r in &rt.rows {
            prop_assert!(r.events1 <= r.at_risk1 && r.events <= r.at_risk);
            prop_assert!((0.0..1.0).contains(&r.km_left));
        }
    }

    #[test]
    fn group_swap_leaves_s_unchanged((g1, g2) in two_samples(), ws in menu()) {
        if let (Some(a), Some(b)) = (s_value(&g1, &g2, &ws), s_value(&g2, &g1, &ws)) {
            prop_assert!(close(a, b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn monotone_time_transform_leaves_s_unchanged((g1, g2) in two_samples(), ws in menu()) {
        let f = |v: &[(f64, bool)]| v.iter().map(|&(t, e)| ((t * 0.3).exp() + 2.0 * t, e)).collect::<Vec<_>>();
        if let (Some(a), Some(b)) = (s_value(&g1, &g2, &ws), s_value(&f(&g1), &f(&g2), &ws)) {
            prop_assert!(close(a, b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn weight_order_and_scale_do_not_matter((g1, g2) in two_samples(), ws in menu(), k in 1i64..7) {
        let mut rev: Vec<WeightFn> = ws.weights().to_vec();
        rev.reverse();
        rev[0] = rev[0].scaled(-k).unwrap();
        let other = WeightSet::new(rev).unwrap();
        if let (Some(a), Some(b)) = (s_value(&g1, &g2, &ws), s_value(&g1, &g2, &other)) {
            prop_assert!(close(a, b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn s_bounds_each_direction((g1, g2) in two_samples(), ws in menu()) {
        let data = TwoSampleData::from_samples(&g1, &g2).unwrap();
        if let Ok(st) = compute_sn(&build_risk_table(&data), &ws) {
            prop_assert!(bound_holds(st.s_n, &st.per_direction));
            prop_assert!(st.s_n >= 0.0);
            if ws.verified_independent() {
                prop_assert_eq!(st.df_used as usize, ws.len());
            } else {
                prop_assert!((st.df_used as usize) <= ws.len());
            }
        }
    }

    #[test]
    fn engine_agrees_with_direct_computation((g1, g2) in two_samples(), ws in menu()) {
        let data = TwoSampleData::from_samples(&g1, &g2).unwrap();
        if let Ok(engine) = LogrankEngine::new(&data, &ws) {
            let direct = compute_sn(&build_risk_table(&data), &ws).unwrap();
            let tol = rel_tol(condition(&direct.sigma_hat));
            let fast = engine.s_value(engine.observed_mask()).unwrap();
            prop_assert!(close((direct.s_n, tol), (fast, tol)), "{} vs {}", direct.s_n, fast);
        }
    }

    #[test]
    fn permutation_p_value_range((g1, g2) in two_samples(), seed in any::<u64>()) {
        let data = TwoSampleData::from_samples(&g1, &g2).unwrap();
        let ws = WeightSet::two_direction();
        let cfg = PermConfig { n_perm: 99, seed, ..PermConfig::default() };
        if let Ok(r) = permutation_test(&data, &ws, &cfg) {
            prop_assert!(r.p_perm >= 0.01 - 1e-15 && r.p_perm <= 1.0);
            let again = permutation_test(&data, &ws, &cfg).unwrap();
            prop_assert_eq!(r.p_perm, again.p_perm);
        }
    }

    #[test]
    fn rg_matches_direct_formula(r in 0u32..8, g in 0u32..8, u in 0.0f64..=1.0) {
        let w = make_rg(r, g).unwrap();
        let direct = u.powi(r as i32) * (1.0 - u).powi(g as i32);
        let v = w.eval(u).unwrap();
        prop_assert!((v - direct).abs() <= 8.0 * f64::EPSILON * direct.abs().max(f64::MIN_POSITIVE));
        // the expanded polynomial agrees to rounding of its coefficient sum
        let poly: f64 = w.coeffs().iter().rev().fold(0.0, |acc, &c| acc * u + c as f64);
        let bound = w.coeffs().iter().map(|c| c.abs() as f64).sum::<f64>() * 64.0 * f64::EPSILON;
        prop_assert!((poly - v).abs() <= bound);
    }

    #[test]
    fn pruning_keeps_an_independent_spanning_subset(idx in prop::collection::vec(0usize..7, 1..9)) {
        let ws = WeightSet::new(idx.iter().map(|&i| pool()[i].clone()).collect()).unwrap();
        let (kept, dropped) = select_independent_subset(&ws);
        prop_assert!(check_independence(&kept));
        prop_assert_eq!(kept.len() + dropped.len(), ws.len());
        prop_assert_eq!(ws.verified_independent(), dropped.is_empty());
        // every dropped weight lies in the span of the kept ones
        for &d in &dropped {
            let mut extended = kept.weights().to_vec();
            extended.push(ws.weights()[d].clone());
            prop_assert!(!check_independence(&WeightSet::new(extended).unwrap()));
        }
    }

    #[test]
    fn penrose_conditions(m in 1usize..8, k in 1usize..8, entries in prop::collection::vec(-3.0f64..3.0, 64)) {
        let k = k.min(m);
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = (0..k).map(|l| entries[i * 8 + l] * entries[j * 8 + l]).sum();
            }
        }
        let na = a.iter().fold(0.0f64, |x, y| x.max(y.abs()));
        prop_assume!(na > 1e-6);
        let p = pseudo_inverse(&SymMatrix::new(m, a.clone()).unwrap()).unwrap();
        let ap = p.matrix.as_slice().to_vec();
        let np = ap.iter().fold(0.0f64, |x, y| x.max(y.abs()));
        // products with A⁻ lose about ε·κ to rounding whatever the algorithm
        let tol = 1e-8_f64.max(64.0 * f64::EPSILON * condition(&SymMatrix::new(m, a.clone()).unwrap()));
        let aapa = matmul(&matmul(&a, &ap, m), &a, m);
        let apaap = matmul(&matmul(&ap, &a, m), &ap, m);
        for i in 0..m * m {
            prop_assert!((aapa[i] - a[i]).abs() <= tol * na);
            prop_assert!((apaap[i] - ap[i]).abs() <= tol * np.max(1.0));
        }
        prop_assert!(p.rank <= k);
    }

    #[test]
    fn chi2_round_trip(p in 1e-8f64..(1.0 - 1e-8), df in 1u32..15) {
        let x = chi2_quantile(p, df);
        prop_assert!((chi2_cdf(x, df) - p).abs() <= 1e-9);
    }

    #[test]
    fn chi2_matches_independent_oracle(x in 0.0f64..80.0, df in 1u32..15) {
        let oracle = ChiSquared::new(df as f64).unwrap();
        prop_assert!((chi2_cdf(x, df) - oracle.cdf(x)).abs() <= 1e-10);
        prop_assert!((chi2_cdf(x, df) + chi2_sf(x, df) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn exhaustive_p_is_a_fraction_of_assignments() {
    let g1 = [(1.0, true), (3.0, true), (4.0, false), (6.0, true)];
    let g2 = [(2.0, true), (5.0, true), (7.0, true)];
    let data = TwoSampleData::from_samples(&g1, &g2).unwrap();
    let r = exhaustive_permutation_test(&data, &WeightSet::two_direction()).unwrap();
    assert_eq!(r.n_perm_used, 35);
    let hits = (r.p_perm * 35.0).round();
    assert!((r.p_perm - hits / 35.0).abs() < 1e-15);
    assert!(hits >= 1.0);
}
