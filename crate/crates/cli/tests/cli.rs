use std::path::Path;
use std::process::{Command, Output};

use spherelut::pnm;
use spherelut::{SeededRng, Tensor};

fn spherelut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spherelut"))
        .args(args)
        .output()
        .expect("spawn spherelut")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen_lut(dir: &Path, name: &str, w: usize, k: usize) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = spherelut(&[
        "gen-lut",
        "--width",
        &w.to_string(),
        "--kernel",
        &k.to_string(),
        "--out",
        p(&path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn gen_lut_k7_file_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_lut(dir.path(), "k7.slut", 512, 7);
    let len = std::fs::metadata(&path).unwrap().len();
    assert_eq!(len, 40 + 256 * 512 * 49 * 8);
}

#[test]
fn gen_lut_k4_header_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k4.slut");
    let out = spherelut(&[
        "gen-lut",
        "--width",
        "512",
        "--height",
        "256",
        "--kernel",
        "4",
        "--spacing-mode",
        "uniform",
        "--out",
        p(&path),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("grid=64x128"), "{}", stdout(&out));
    let lut = spherelut::SamplingLut::from_bytes(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!((lut.out_h(), lut.out_w()), (64, 128));
}

#[test]
fn gen_lut_rejects_bad_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.slut");
    for args in [
        ["--width", "100", "--height", "40", "--kernel", "4"],
        ["--width", "60", "--height", "30", "--kernel", "4"],
        ["--width", "64", "--height", "32", "--kernel", "5"],
    ] {
        let mut full = vec!["gen-lut"];
        full.extend(args);
        full.extend(["--out", p(&out_path)]);
        assert_eq!(spherelut(&full).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(spherelut(&["gen-lut"]).status.code(), Some(2));
}

#[test]
fn resample_constant_image_stays_constant() {
    let dir = tempfile::tempdir().unwrap();
    let lut = gen_lut(dir.path(), "k4.slut", 64, 4);
    let input = dir.path().join("in.ppm");
    std::fs::write(
        &input,
        pnm::encode(&Tensor::filled(3, 32, 64, 128.0 / 255.0)).unwrap(),
    )
    .unwrap();
    let output = dir.path().join("out.ppm");
    let out = spherelut(&[
        "resample",
        "--input",
        p(&input),
        "--lut",
        p(&lut),
        "--out",
        p(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let img = pnm::load_tensor(&output).unwrap();
    assert_eq!(img.dims(), (3, 32, 64));
    assert!(img.data().iter().all(|&v| v == 128.0 / 255.0));
}

#[test]
fn resample_k7_expands_sevenfold() {
    let dir = tempfile::tempdir().unwrap();
    let lut = gen_lut(dir.path(), "k7.slut", 512, 7);
    let input = dir.path().join("in.pgm");
    std::fs::write(
        &input,
        pnm::encode(&SeededRng::new(1).tensor(1, 256, 512)).unwrap(),
    )
    .unwrap();
    let output = dir.path().join("out.ten");
    let out = spherelut(&[
        "resample",
        "--input",
        p(&input),
        "--lut",
        p(&lut),
        "--out",
        p(&output),
    ]);
    assert!(out.status.success());
    let t = Tensor::from_bytes(&std::fs::read(&output).unwrap()).unwrap();
    assert_eq!(t.dims(), (1, 1792, 3584));
}

#[test]
fn resample_is_seam_free_on_images() {
    let dir = tempfile::tempdir().unwrap();
    let lut = gen_lut(dir.path(), "k4.slut", 64, 4);
    let img = Tensor::from_fn(1, 32, 64, |_, y, x| ((x * 7 + y * 3) % 23) as f32 / 22.0);
    let a_in = dir.path().join("a.pgm");
    let b_in = dir.path().join("b.pgm");
    std::fs::write(&a_in, pnm::encode(&img).unwrap()).unwrap();
    std::fs::write(&b_in, pnm::encode(&img.roll_columns(4)).unwrap()).unwrap();
    let (a_out, b_out) = (dir.path().join("a_out.pgm"), dir.path().join("b_out.pgm"));
    for (i, o) in [(&a_in, &a_out), (&b_in, &b_out)] {
        assert!(
            spherelut(&["resample", "--input", p(i), "--lut", p(&lut), "--out", p(o)])
                .status
                .success()
        );
    }
    let a = pnm::load_tensor(&a_out).unwrap();
    let b = pnm::load_tensor(&b_out).unwrap();
    assert!(b.max_abs_diff(&a.roll_columns(4)) <= 1.0 / 255.0 + 1e-6);
}

#[test]
fn resample_rejects_mismatched_image() {
    let dir = tempfile::tempdir().unwrap();
    let lut = gen_lut(dir.path(), "k2.slut", 64, 2);
    let input = dir.path().join("in.pgm");
    std::fs::write(&input, pnm::encode(&Tensor::zeros(1, 16, 32)).unwrap()).unwrap();
    let out = spherelut(&[
        "resample",
        "--input",
        p(&input),
        "--lut",
        p(&lut),
        "--out",
        p(&dir.path().join("o.pgm")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_default_passes() {
    let out = spherelut(&["verify", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(
        text.lines()
            .all(|l| l.ends_with("PASS") || l.contains(": PASS")),
        "{text}"
    );
    assert!(text.contains("oracle k=7 W=64"));
}

#[test]
fn verify_pole_tap_on_tiny_grid() {
    let out = spherelut(&["verify", "--kernel", "7", "--width", "16", "--height", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("pole-tap identity k=7 W=16"));
}

#[test]
fn verify_reports_corrupted_tap() {
    let dir = tempfile::tempdir().unwrap();
    let lut = gen_lut(dir.path(), "k2.slut", 16, 2);
    let mut bytes = std::fs::read(&lut).unwrap();
    // Low mantissa byte of the first tap's u coordinate.
    bytes[40] ^= 0x01;
    std::fs::write(&lut, bytes).unwrap();
    let out = spherelut(&["verify", "--width", "16", "--lut", p(&lut), "--trials", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("mismatch at output (0, 0) tap (0, 0)"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn fuse_writes_scores_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let sem = Tensor::new(2, 1, 2, vec![0.5, -1.0, 0.6, 0.2]).unwrap();
    let masks = Tensor::new(2, 1, 2, vec![0.5, 0.0, 0.0, 0.0]).unwrap();
    let (s, m) = (dir.path().join("sem.ten"), dir.path().join("masks.ten"));
    std::fs::write(&s, sem.to_bytes()).unwrap();
    std::fs::write(&m, masks.to_bytes()).unwrap();
    let (o, l) = (dir.path().join("fused.ten"), dir.path().join("labels.pgm"));
    let out = spherelut(&[
        "fuse",
        "--input",
        p(&s),
        "--masks",
        p(&m),
        "--out",
        p(&o),
        "--labels",
        p(&l),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fused = Tensor::from_bytes(&std::fs::read(&o).unwrap()).unwrap();
    assert_eq!(fused.data(), &[0.75, 0.0, 0.6, 0.2]);
    let labels = pnm::load_tensor(&l).unwrap();
    assert_eq!(labels.data(), &[0.0, 1.0 / 255.0]);
}

#[test]
fn fuse_rejects_shape_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (s, m) = (dir.path().join("s.ten"), dir.path().join("m.ten"));
    std::fs::write(&s, Tensor::zeros(2, 2, 2).to_bytes()).unwrap();
    std::fs::write(&m, Tensor::zeros(3, 2, 2).to_bytes()).unwrap();
    let out = spherelut(&[
        "fuse",
        "--input",
        p(&s),
        "--masks",
        p(&m),
        "--out",
        p(&dir.path().join("o.ten")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diffusion_demo_stage_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = spherelut(&["diffusion-demo", "--width", "128", "--out", p(dir.path())]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for (s, dims) in [(1, (16, 32)), (2, (8, 16)), (3, (4, 8)), (4, (2, 4))] {
        let t = pnm::load_tensor(&dir.path().join(format!("stage{s}.pgm"))).unwrap();
        assert_eq!((t.height(), t.width()), dims);
    }
}

#[test]
fn diffusion_demo_constant_input_gives_constant_stages() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.pgm");
    std::fs::write(
        &input,
        pnm::encode(&Tensor::filled(1, 64, 128, 0.5)).unwrap(),
    )
    .unwrap();
    let out = spherelut(&[
        "diffusion-demo",
        "--input",
        p(&input),
        "--out",
        p(dir.path()),
    ]);
    assert!(out.status.success());
    for s in 1..=4 {
        let t = pnm::load_tensor(&dir.path().join(format!("stage{s}.pgm"))).unwrap();
        let first = t.data()[0];
        assert!(t.data().iter().all(|&v| v == first), "stage {s}");
    }
}

#[test]
fn diffusion_demo_rejects_indivisible_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = spherelut(&["diffusion-demo", "--width", "48", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}
