use std::f64::consts::PI;

use proptest::prelude::*;
use spherelut::{
    bilinear_sample, build_lut, circle_points, conv2d_strided, dir_to_erp, fuse, pixel_to_dir,
    resample, rotation_to_center, FusionInput, KernelSpec, ProjectionConfig, SeededRng,
    SpacingMode, Tensor, UnitVec, WeightSet,
};

fn column_distance(a: f64, b: f64, w: f64) -> f64 {
    let d = (a - b).rem_euclid(w);
    d.min(w - d)
}

fn spacing() -> impl Strategy<Value = SpacingMode> {
    prop_oneof![
        Just(SpacingMode::Uniform),
        Just(SpacingMode::AzimuthMatched)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_any_pixel(h in 1usize..200, fi in 0.0f64..1.0, fj in 0.0f64..1.0) {
        let cfg = ProjectionConfig::new(2 * h, h).unwrap();
        let i = (fi * h as f64).floor();
        let j = (fj * 2.0 * h as f64).floor();
        let e = dir_to_erp(&cfg, &pixel_to_dir(&cfg, i, j).unwrap());
        prop_assert!(column_distance(e.u, j, 2.0 * h as f64) < 1e-9);
        prop_assert!((e.v - i).abs() < 1e-9);
    }

    #[test]
    fn rotation_maps_pole_to_center(theta in 0.0f64..PI, phi in -PI..PI) {
        let c = UnitVec::from_angles(theta, phi);
        let r = rotation_to_center(&c);
        let n = r.apply(&UnitVec::NORTH_POLE);
        for (a, b) in n.to_array().iter().zip(c.to_array()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        let m = r.matrix();
        for p in 0..3 {
            for q in 0..3 {
                let dot: f64 = (0..3).map(|s| m[s][p] * m[s][q]).sum();
                prop_assert!((dot - (p == q) as u8 as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn longitude_rotation_shifts_columns(
        theta in 0.01f64..PI - 0.01,
        phi in -PI..PI,
        steps in 1usize..64,
    ) {
        let cfg = ProjectionConfig::new(64, 32).unwrap();
        let d = UnitVec::from_angles(theta, phi);
        let a = dir_to_erp(&cfg, &d);
        let b = dir_to_erp(&cfg, &d.rotate_z(steps as f64 * cfg.pitch()));
        prop_assert!(column_distance(b.u, a.u + steps as f64, 64.0) < 1e-9);
        prop_assert!((a.v - b.v).abs() < 1e-9);
    }

    #[test]
    fn circle_is_equally_spaced(radius in 0.01f64..1.5, n in 3usize..40, offset in 0.0f64..PI) {
        let pts = circle_points(radius, n, offset).unwrap();
        let first = pts[0].angle_to(&pts[1]);
        for (a, b) in pts.iter().zip(pts.iter().cycle().skip(1)) {
            prop_assert!((UnitVec::NORTH_POLE.angle_to(a) - radius).abs() < 1e-12);
            prop_assert!((a.angle_to(b) - first).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_survive_resampling(value in -10.0f32..10.0, k in prop::sample::select(vec![2usize, 4, 7]), mode in spacing()) {
        let cfg = ProjectionConfig::new(28 * 2, 28).unwrap();
        let lut = build_lut(&cfg, &KernelSpec::new(k, mode).unwrap()).unwrap();
        let out = resample(&Tensor::filled(2, 28, 56, value), &lut).unwrap();
        prop_assert!(out.data().iter().all(|&v| v == value));
    }

    #[test]
    fn bilinear_stays_in_range(seed in any::<u64>(), u in -100.0f64..100.0, v in -3.0f64..12.0) {
        let img = SeededRng::new(seed).tensor(1, 8, 16);
        let (lo, hi) = img.min_max().unwrap();
        let s = bilinear_sample(&img, 0, u, v).unwrap();
        prop_assert!(s >= lo && s <= hi);
    }

    #[test]
    fn conv_is_linear(seed in any::<u64>(), alpha in -2.0f32..2.0) {
        let mut rng = SeededRng::new(seed);
        let x = rng.tensor(2, 8, 8);
        let y = rng.tensor(2, 8, 8);
        let w = rng.weights(3, 2, 4, false);
        let mix = Tensor::new(
            2, 8, 8,
            x.data().iter().zip(y.data()).map(|(a, b)| a + alpha * b).collect(),
        ).unwrap();
        let fx = conv2d_strided(&x, &w, 4).unwrap();
        let fy = conv2d_strided(&y, &w, 4).unwrap();
        let fm = conv2d_strided(&mix, &w, 4).unwrap();
        for ((m, a), b) in fm.data().iter().zip(fx.data()).zip(fy.data()) {
            prop_assert!((m - (a + alpha * b)).abs() < 1e-4);
        }
    }

    #[test]
    fn fusion_is_monotone_in_mask(s in -5.0f32..5.0, m1 in -3.0f32..3.0, m2 in -3.0f32..3.0) {
        let one = |v: f32| Tensor::new(1, 1, 1, vec![v]).unwrap();
        let f = |m: f32| fuse(&FusionInput::new(one(s), one(m)).unwrap()).data()[0];
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(f(lo) >= 0.0);
        if s >= 0.0 {
            prop_assert!(f(hi) >= f(lo));
        }
    }
}

#[test]
fn rotation_over_many_random_centers() {
    let mut rng = SeededRng::new(11);
    for _ in 0..1000 {
        let theta = rng.unit_f64() * PI;
        let phi = (rng.unit_f64() * 2.0 - 1.0) * PI;
        let c = UnitVec::from_angles(theta, phi);
        let n = rotation_to_center(&c).apply(&UnitVec::NORTH_POLE);
        assert!(n.angle_to(&c) < 1e-12, "theta {theta} phi {phi}");
    }
}

#[test]
fn fusion_enhances_masked_channel() {
    let sem = Tensor::new(2, 1, 1, vec![0.5, 0.6]).unwrap();
    let masks = Tensor::new(2, 1, 1, vec![0.5, 0.0]).unwrap();
    let fused = fuse(&FusionInput::new(sem.clone(), masks).unwrap());
    assert_eq!(spherelut::argmax_labels(&sem).unwrap().get(0, 0), 1);
    assert_eq!(spherelut::argmax_labels(&fused).unwrap().get(0, 0), 0);
}

#[test]
fn resample_follows_column_shift() {
    let cfg = ProjectionConfig::new(64, 32).unwrap();
    for k in [2, 4, 7] {
        let lut = build_lut(
            &cfg,
            &KernelSpec::new(k, SpacingMode::AzimuthMatched).unwrap(),
        )
        .unwrap();
        let stride = lut.spec().input_stride();
        let img = SeededRng::new(k as u64).tensor(1, 32, 64);
        let base = resample(&img, &lut).unwrap();
        let shifted = resample(&img.roll_columns(stride as isize), &lut).unwrap();
        assert!(
            shifted.max_abs_diff(&base.roll_columns(k as isize)) < 1e-4,
            "k={k}"
        );
    }
}

#[test]
fn weights_from_fn_layout() {
    let w = WeightSet::from_fn(2, 1, 2, |o, _, a, b| (o * 4 + a * 2 + b) as f32).unwrap();
    assert_eq!(w.data(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
}
