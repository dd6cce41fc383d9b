mod common;

use angleheads::circmath::{circular_distance, normalize, signed_difference};
use angleheads::codecs::{bin_index, circular_gaussian, CodecSpec};
use angleheads::geometry::{largest_inscribed_rect, rotate_image, rotated_canvas_size};
use angleheads::metrics::report_from_errors;
use angleheads::{Angle, Method, RasterImage};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = Angle> {
    (0.0..360.0f64).prop_map(|d| Angle::new(d).unwrap())
}

fn codec() -> impl Strategy<Value = CodecSpec> {
    prop_oneof![
        Just(CodecSpec::default_for(Method::Da)),
        (0.0..1.0f64).prop_map(|lambda| CodecSpec::UnitVector { lambda }),
        (3usize..8).prop_map(|phases| CodecSpec::PhaseShift { phases, omega: 1.0 }),
        (4usize..720).prop_map(|bins| CodecSpec::Classification { bins }),
        ((4usize..720), (1.0..30.0f64))
            .prop_map(|(bins, sigma)| CodecSpec::CircularGaussian { bins, sigma }),
    ]
}

fn round_trip_tolerance(codec: &CodecSpec) -> f64 {
    match codec {
        CodecSpec::Classification { bins } | CodecSpec::CircularGaussian { bins, .. } => {
            180.0 / *bins as f64 + 1e-9
        }
        _ => 1e-6,
    }
}

proptest! {
    #[test]
    fn normalize_lands_in_range_and_is_idempotent(raw in -1e6..1e6f64) {
        let a = normalize(raw).unwrap();
        prop_assert!((0.0..360.0).contains(&a.degrees()));
        prop_assert_eq!(normalize(a.degrees()).unwrap(), a);
    }

    #[test]
    fn distance_is_a_bounded_metric(a in angle(), b in angle(), c in angle()) {
        let ab = circular_distance(a, b);
        prop_assert!((0.0..=180.0).contains(&ab));
        prop_assert_eq!(ab, circular_distance(b, a));
        prop_assert_eq!(circular_distance(a, a), 0.0);
        prop_assert!(circular_distance(a, c) <= ab + circular_distance(b, c) + 1e-9);
    }

    #[test]
    fn distance_matches_wrapped_oracle(a in angle(), b in angle()) {
        let oracle = common::wrap_distance(a.degrees(), b.degrees());
        prop_assert!((circular_distance(a, b) - oracle).abs() < 1e-9);
        prop_assert!((signed_difference(a, b).abs() - oracle).abs() < 1e-9);
    }

    #[test]
    fn codecs_round_trip(codec in codec(), theta in angle()) {
        let enc = codec.encode(theta);
        prop_assert_eq!(enc.values.len(), codec.output_dim());
        let back = codec.decode(&enc.values).unwrap();
        prop_assert!(circular_distance(back, theta) <= round_trip_tolerance(&codec));
    }

    #[test]
    fn encoding_is_periodic(codec in codec(), theta in 0.0..360.0f64, k in -3i32..4) {
        let a = codec.encode(Angle::new(theta).unwrap());
        let b = codec.encode(Angle::new(theta + 360.0 * k as f64).unwrap());
        if let CodecSpec::Direct { .. } = codec {
            prop_assert!(circular_distance(
                Angle::new(a.values[0]).unwrap(),
                Angle::new(b.values[0]).unwrap()) < 1e-9);
        } else {
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn regression_losses_vanish_at_the_target(theta in angle(), lambda in 0.0..1.0f64) {
        for codec in [
            CodecSpec::default_for(Method::Da),
            CodecSpec::UnitVector { lambda },
            CodecSpec::default_for(Method::Psc),
        ] {
            let target = codec.encode(theta);
            let lv = codec.loss_and_grad(&target.values, &target).unwrap();
            prop_assert!(lv.loss.abs() < 1e-9, "{}: {}", codec, lv.loss);
        }
    }

    #[test]
    fn losses_are_nonnegative(
        codec in codec(), theta in angle(), seed in 0u64..1000
    ) {
        let target = codec.encode(theta);
        let pred: Vec<f64> = (0..codec.output_dim())
            .map(|i| ((seed as f64 + 1.0) * (i as f64 + 0.37)).sin() * 3.0)
            .collect();
        prop_assert!(codec.loss_and_grad(&pred, &target).unwrap().loss >= 0.0);
    }

    #[test]
    fn soft_labels_are_normalized_and_peak_at_theta(
        bins in 8usize..720, sigma in 0.05..20.0f64, theta in angle()
    ) {
        let t = circular_gaussian(theta, bins, sigma);
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(t.iter().all(|&v| v >= 0.0));
        let max = t.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!((t[bin_index(theta, bins)] - max).abs() < 1e-12);
    }

    #[test]
    fn report_invariants(errors in prop::collection::vec(0.0..180.0f64, 1..200)) {
        let r = report_from_errors(&errors).unwrap();
        prop_assert!(r.mae <= r.rmse + 1e-12);
        prop_assert!(r.median <= r.p90 + 1e-12 && r.p90 <= r.p95 + 1e-12);
        for k in [2u32, 5, 10] {
            prop_assert!(r.auc_at[&k] <= r.acc_at[&k] + 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.acc_at[&k]));
        }
        prop_assert!(r.acc_at[&2] <= r.acc_at[&5] && r.acc_at[&5] <= r.acc_at[&10]);
        prop_assert_eq!(r.n, errors.len());
    }

    #[test]
    fn inscribed_rect_is_symmetric_under_half_turns_and_reflection(
        w in 2.0..300.0f64, h in 2.0..300.0f64, deg in 0.0..360.0f64
    ) {
        let base = largest_inscribed_rect(w, h, Angle::new(deg).unwrap()).unwrap();
        let half = largest_inscribed_rect(w, h, Angle::new(deg + 180.0).unwrap()).unwrap();
        let mirror = largest_inscribed_rect(w, h, Angle::new(-deg).unwrap()).unwrap();
        for other in [half, mirror] {
            prop_assert!((other.crop_width - base.crop_width).abs() < 1e-6);
            prop_assert!((other.crop_height - base.crop_height).abs() < 1e-6);
        }
        // Swapping the sides and adding a quarter turn gives the same footprint.
        let swapped = largest_inscribed_rect(h, w, Angle::new(deg + 90.0).unwrap()).unwrap();
        prop_assert!((swapped.crop_width - base.crop_width).abs() < 1e-6);
        prop_assert!((swapped.crop_height - base.crop_height).abs() < 1e-6);
        prop_assert!(base.area() <= w * h + 1e-6);
    }

    #[test]
    fn canvas_covers_rotated_footprint(w in 1usize..200, h in 1usize..200, deg in 0.0..360.0f64) {
        let (cw, ch) = rotated_canvas_size(w, h, Angle::new(deg).unwrap());
        let (s, c) = deg.to_radians().sin_cos();
        let (bw, bh) = (w as f64 * c.abs() + h as f64 * s.abs(), w as f64 * s.abs() + h as f64 * c.abs());
        prop_assert!(cw as f64 >= bw - 1e-6 && (cw as f64) < bw + 1.0);
        prop_assert!(ch as f64 >= bh - 1e-6 && (ch as f64) < bh + 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn four_quarter_turns_are_identity(w in 2usize..20, h in 2usize..20, seed in 0usize..1000) {
        let img = RasterImage::from_fn(w, h, |x, y| {
            ((x * 31 + y * 17 + seed) % 97) as f32 / 96.0
        }).unwrap();
        let quarter = Angle::new(90.0).unwrap();
        let once = rotate_image(&img, quarter).unwrap();
        prop_assert_eq!((once.width(), once.height()), (h, w));
        let mut r = once;
        for _ in 0..3 {
            r = rotate_image(&r, quarter).unwrap();
        }
        prop_assert_eq!(r, img);
    }
}
