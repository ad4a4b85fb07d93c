//! Property-based invariants over randomized inputs.

use proptest::prelude::*;

use ima::augment::{hflip, jitter, mixup_apply, permutation, sample_mixup_draw, vflip, window_slide, window_warp};
use ima::data::{apply_scaler, fit_scaler, parse_csv, to_csv, RawSeries, Scaler};
use ima::numerics::{Matrix, Rng, Tensor3};
use ima::report::sci3;

fn tensor_strategy() -> impl Strategy<Value = (Tensor3, u64)> {
    (1usize..4, 2usize..12, 1usize..4, any::<u64>()).prop_map(|(b, t, n, seed)| {
        let mut rng = Rng::new(seed);
        let values = (0..b * t * n)
            .map(|_| rng.sample_uniform() * 4.0 - 2.0)
            .collect();
        (Tensor3::from_vec(b, t, n, values).unwrap(), seed)
    })
}

proptest! {
    #[test]
    fn augmentations_preserve_shape((x, seed) in tensor_strategy()) {
        let mut rng = Rng::new(seed ^ 0xA5A5);
        let shape = x.shape();
        prop_assert_eq!(hflip(&x).shape(), shape);
        prop_assert_eq!(vflip(&x).shape(), shape);
        prop_assert_eq!(jitter(&x, 0.03, &mut rng).unwrap().shape(), shape);
        prop_assert_eq!(window_warp(&x, 0.5, &[0.5, 2.0], &mut rng).unwrap().shape(), shape);
        prop_assert_eq!(window_slide(&x, 0.9, &mut rng).unwrap().shape(), shape);
        let k = 3.min(x.time());
        prop_assert_eq!(permutation(&x, k, &mut rng).unwrap().shape(), shape);
        let draw = sample_mixup_draw(x.batch(), 0.2, true, &mut rng).unwrap();
        prop_assert_eq!(mixup_apply(&x, &draw).shape(), shape);
    }

    #[test]
    fn jitter_stays_within_five_sigma((x, seed) in tensor_strategy()) {
        let mut rng = Rng::new(seed ^ 0x5A5A);
        let sigma = 0.03;
        let out = jitter(&x, sigma, &mut rng).unwrap();
        for (a, b) in out.values().iter().zip(x.values()) {
            // Not a hard distribution bound, but 5 sigma over these few
            // draws fails with negligible probability and catches
            // scale errors outright.
            prop_assert!((a - b).abs() <= 5.0 * sigma);
        }
    }

    #[test]
    fn scaler_round_trips(
        rows in 2usize..40,
        cols in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| rng.sample_uniform() * 10.0 - 5.0)
            .collect();
        let raw = RawSeries {
            timestamps: (0..rows).map(|i| format!("2020-01-01 {:02}:00:00", i % 24)).collect(),
            values: Matrix::from_vec(rows, cols, values).unwrap(),
            feature_names: (0..cols).map(|c| format!("ch{c}")).collect(),
        };
        let scaler: Scaler = fit_scaler(&raw).unwrap();
        let std = apply_scaler(&scaler, &raw).unwrap();
        for r in 0..rows {
            for c in 0..cols {
                let back = scaler.destandardize(c, std.get(r, c));
                prop_assert!((back - raw.values.get(r, c)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn csv_round_trips(
        rows in 2usize..30,
        cols in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| rng.sample_uniform() * 2.0 - 1.0)
            .collect();
        let raw = RawSeries {
            timestamps: (0..rows).map(|i| format!("2021-02-0{} 00:00:00", 1 + i % 9)).collect(),
            values: Matrix::from_vec(rows, cols, values).unwrap(),
            feature_names: (0..cols).map(|c| format!("f{c}")).collect(),
        };
        let parsed = parse_csv(&to_csv(&raw)).unwrap();
        prop_assert_eq!(parsed.values.values(), raw.values.values());
        prop_assert_eq!(parsed.timestamps, raw.timestamps);
        prop_assert_eq!(parsed.feature_names, raw.feature_names);
    }

    #[test]
    fn sci3_parses_back_close(x in -1e6f64..1e6) {
        let s = sci3(x);
        let parsed: f64 = s.parse().unwrap();
        // 3 significant digits: half-ulp of the mantissa.
        let tol = if x == 0.0 { 0.0 } else { x.abs() * 5.1e-3 };
        prop_assert!((parsed - x).abs() <= tol, "{} -> {} -> {}", x, s, parsed);
    }

    #[test]
    fn arbitrary_config_text_never_panics(text in ".{0,200}") {
        let _ = ima::config::config_from_json(&text);
    }
}
