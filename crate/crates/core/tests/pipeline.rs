use spherelut::diffusion::{polar_disc, run_demo, top_row_support};
use spherelut::{
    build_lut, cascade_downsample, gather_dot_oracle, spherical_conv, KernelSpec, ProjectionConfig,
    SamplingLut, SeededRng, SpacingMode, Tensor, UnitVec, WeightSet,
};

#[test]
fn oracle_matches_planar_path_on_32x64() {
    let cfg = ProjectionConfig::new(64, 32).unwrap();
    let lut = build_lut(
        &cfg,
        &KernelSpec::new(4, SpacingMode::AzimuthMatched).unwrap(),
    )
    .unwrap();
    let mut rng = SeededRng::new(7);
    let img = rng.tensor(2, 32, 64);
    let w = rng.weights(3, 2, 4, true);
    let planar = spherical_conv(&img, &lut, &w).unwrap();
    let oracle = gather_dot_oracle(&img, &lut, &w).unwrap();
    assert_eq!(planar.dims(), (3, 8, 16));
    for (a, b) in planar.data().iter().zip(oracle.data()) {
        assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn delta_on_pole_tap_returns_image() {
    let cfg = ProjectionConfig::new(16, 8).unwrap();
    for mode in [SpacingMode::Uniform, SpacingMode::AzimuthMatched] {
        let lut = build_lut(&cfg, &KernelSpec::new(7, mode).unwrap()).unwrap();
        let img = SeededRng::new(1).tensor(1, 8, 16);
        let w = WeightSet::from_fn(1, 1, 7, |_, _, a, b| (a == 3 && b == 3) as u8 as f32).unwrap();
        let out = spherical_conv(&img, &lut, &w).unwrap();
        assert!(out.max_abs_diff(&img) < 1e-6);
    }
}

#[test]
fn cascade_keeps_constants_with_averaging_weights() {
    let cfg = ProjectionConfig::new(64, 32).unwrap();
    let avg = |k: usize| WeightSet::from_fn(1, 1, k, |_, _, _, _| 1.0 / (k * k) as f32).unwrap();
    let weights = vec![avg(4), avg(2), avg(2)];
    let feats = cascade_downsample(
        &Tensor::filled(1, 32, 64, 0.25),
        &cfg,
        &weights,
        SpacingMode::AzimuthMatched,
    )
    .unwrap();
    assert_eq!(feats.len(), 3);
    for f in &feats {
        assert!(f.data().iter().all(|v| (v - 0.25).abs() < 1e-6));
    }
}

#[test]
fn cascade_rejects_wrong_stem() {
    let cfg = ProjectionConfig::new(64, 32).unwrap();
    let w = WeightSet::from_fn(1, 1, 2, |_, _, _, _| 1.0).unwrap();
    let img = Tensor::zeros(1, 32, 64);
    assert!(cascade_downsample(&img, &cfg, &[w], SpacingMode::Uniform).is_err());
}

#[test]
fn lut_bytes_do_not_depend_on_thread_count() {
    let cfg = ProjectionConfig::new(128, 64).unwrap();
    let spec = KernelSpec::new(7, SpacingMode::Uniform).unwrap();
    let build = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| build_lut(&cfg, &spec).unwrap().to_bytes())
    };
    assert_eq!(build(1), build(4));
}

#[test]
fn lut_file_roundtrip_through_disk() {
    let cfg = ProjectionConfig::new(32, 16).unwrap();
    let lut = build_lut(&cfg, &KernelSpec::new(2, SpacingMode::Uniform).unwrap()).unwrap();
    let mut buf = Vec::new();
    lut.write_to(&mut buf).unwrap();
    assert_eq!(buf.len(), 40 + 8 * 16 * 4 * 8);
    let back = SamplingLut::from_bytes(&buf).unwrap();
    assert!(back.first_mismatch(&lut).is_none());
    assert!(SamplingLut::from_bytes(&buf[..buf.len() - 1]).is_err());
}

#[test]
fn pole_cap_support_never_shrinks() {
    let cfg = ProjectionConfig::new(128, 64).unwrap();
    let img = polar_disc(&cfg, &UnitVec::from_angles(0.3, 1.0), 0.25);
    for mode in [SpacingMode::Uniform, SpacingMode::AzimuthMatched] {
        let support: Vec<f64> = run_demo(&img, 3, mode)
            .unwrap()
            .iter()
            .map(|t| top_row_support(t, 0))
            .collect();
        assert!(
            support.windows(2).all(|w| w[1] >= w[0]),
            "{mode}: {support:?}"
        );
    }
}
