use proptest::prelude::*;

use pcmkit_core::analysis::{coverage, energy_error, error_distribution, EnergyConfig};
use pcmkit_core::evaluate::{mape, mse, r2};
use pcmkit_core::learners::gbrt::{fit_gbrt, BoostedTrees, GbrtParams};
use pcmkit_core::learners::tree::fit_tree;
use pcmkit_core::matrix::Matrix;
use pcmkit_core::sample::split_indices;
use pcmkit_core::{SplitMode, SplitSpec};

fn pairs(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..max).prop_flat_map(|n| {
        (
            prop::collection::vec(1.0f64..1000.0, n),
            prop::collection::vec(-100.0f64..1100.0, n),
        )
    })
}

fn table(max_rows: usize, cols: usize) -> impl Strategy<Value = (Matrix, Vec<f64>)> {
    (4..max_rows).prop_flat_map(move |m| {
        (
            prop::collection::vec(prop::sample::select(vec![-2.0, -1.0, -0.5, 0.0, 0.25, 1.0, 3.0]), m * cols),
            prop::collection::vec(-50.0f64..50.0, m),
        )
            .prop_map(move |(data, y)| (Matrix::new(m, cols, data).unwrap(), y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_ignore_row_order((y, p) in pairs(60), rot in 0usize..60) {
        let k = rot % y.len();
        let mut y2 = y.clone();
        let mut p2 = p.clone();
        y2.rotate_left(k);
        p2.rotate_left(k);
        y2.reverse();
        p2.reverse();
        let tol = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(tol(mse(&y, &p).unwrap(), mse(&y2, &p2).unwrap()));
        prop_assert!(tol(mape(&y, &p).unwrap(), mape(&y2, &p2).unwrap()));
        prop_assert!(tol(r2(&y, &p).unwrap(), r2(&y2, &p2).unwrap()));
    }

    #[test]
    fn metric_ranges((y, p) in pairs(60)) {
        prop_assert!(mse(&y, &p).unwrap() >= 0.0);
        prop_assert!(mape(&y, &p).unwrap() >= 0.0);
        if let Ok(r) = r2(&y, &p) {
            prop_assert!(r <= 1.0);
        }
        prop_assert_eq!(mse(&y, &y).unwrap(), 0.0);
        prop_assert_eq!(mape(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn coverage_is_a_direct_count((y, p) in pairs(200)) {
        let d = error_distribution(&y, &p, 10).unwrap();
        for (k, got) in [(1.0, d.within_1_sigma), (2.0, d.within_2_sigma)] {
            let n = d.errors.iter().filter(|e| (*e - d.mean).abs() <= k * d.std).count();
            prop_assert_eq!(got, n as f64 / d.errors.len() as f64);
            prop_assert_eq!(got, coverage(&d.errors, d.mean, d.std, k));
        }
        prop_assert_eq!(d.histogram.counts.iter().sum::<usize>(), y.len());
        prop_assert!(d.within_1_sigma <= d.within_2_sigma);
    }

    #[test]
    fn energy_error_is_the_ordered_sum((y, p) in pairs(300), dt in 0.1f64..2.0) {
        let cfg = EnergyConfig { dt_s: dt, ..EnergyConfig::default() };
        let e = energy_error("f", &y, &p, &cfg).unwrap();
        let mut s = 0.0;
        for i in 0..y.len() {
            s += p[i] - y[i];
        }
        prop_assert_eq!(e.error_j, s * dt);
        prop_assert_eq!(e.capacity_fraction, e.error_j / cfg.capacity_j);
        prop_assert_eq!(e.samples, y.len());
    }

    #[test]
    fn tree_respects_depth_and_leaf_size((x, y) in table(80, 3), depth in 1usize..6, min_leaf in 1usize..6) {
        let t = fit_tree(&x, &y, depth, min_leaf, 1.0, 0).unwrap();
        prop_assert!(t.depth() <= depth);
        let mut total = 0;
        for (_, count, _) in t.leaves() {
            if !t.is_leaf() {
                prop_assert!(count >= min_leaf);
            }
            total += count;
        }
        prop_assert_eq!(total, y.len());
        // Each leaf predicts the mean of the rows that reach it.
        let pred = t.predict(&x);
        for (v, _, _) in t.leaves() {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| pred[i] == v).collect();
            let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
            prop_assert!((mean - v).abs() <= 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn boosted_trees_rebuild_from_json((x, y) in table(60, 3), n in 1usize..8, seed in 0u64..1000) {
        let model = fit_gbrt(&x, &y, &GbrtParams::new(n, 3, 0.3, 1.0), seed).unwrap();
        let back: BoostedTrees = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        prop_assert_eq!(&back, &model);
        for i in 0..x.rows() {
            let mut f = back.base_score;
            for t in &back.trees {
                f += back.learning_rate * t.predict_row(x.row(i));
            }
            prop_assert!((f - model.predict_row(x.row(i))).abs() <= 1e-9 * (1.0 + f.abs()));
        }
    }

    #[test]
    fn splits_partition_rows(flights in prop::collection::vec(0u8..12, 2..200), frac in 0.05f64..0.95, seed: u64) {
        let ids: Vec<String> = flights.iter().map(|f| format!("f{f}")).collect();
        for mode in [SplitMode::RandomBySample, SplitMode::RandomByFlight] {
            let spec = SplitSpec { train_fraction: frac, seed, mode };
            let Ok(s) = split_indices(&ids, &spec) else {
                prop_assert_eq!(mode, SplitMode::RandomByFlight);
                continue;
            };
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ids.len()).collect::<Vec<_>>());
            prop_assert!(!s.train.is_empty() && !s.test.is_empty());
            if mode == SplitMode::RandomByFlight {
                for &i in &s.test {
                    prop_assert!(s.train.iter().all(|&j| ids[j] != ids[i]));
                }
            }
        }
    }
}
