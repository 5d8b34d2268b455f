//! Self-checks run by `spherelut verify`.
//!
//! Every check reports the measured worst-case error alongside its
//! tolerance so failures come with a number attached.

use std::fmt;

use crate::conv::{gather_dot_oracle, spherical_conv, WeightSet};
use crate::geometry::{dir_to_erp, pixel_to_dir, ProjectionConfig};
use crate::kernel::{build_lut, KernelSize, KernelSpec, SamplingLut, SpacingMode, TapIndex};
use crate::rng::SeededRng;

pub const ROUNDTRIP_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-4;
pub const EQUIVARIANCE_TOL: f64 = 1e-4;
pub const POLE_TAP_TOL: f64 = 1e-6;

/// Distance between two column coordinates on a ring of `width` columns.
pub fn column_distance(a: f64, b: f64, width: f64) -> f64 {
    let d = (a - b).rem_euclid(width);
    d.min(width - d)
}

/// Worst pixel-index error of `pixel -> direction -> ERP` over all pixel
/// centers.
pub fn roundtrip_error(cfg: &ProjectionConfig) -> f64 {
    let w = cfg.width() as f64;
    let mut worst = 0f64;
    for i in 0..cfg.height() {
        for j in 0..cfg.width() {
            let d = pixel_to_dir(cfg, i as f64, j as f64).expect("finite");
            let e = dir_to_erp(cfg, &d);
            worst = worst
                .max(column_distance(e.u, j as f64, w))
                .max((e.v - i as f64).abs());
        }
    }
    worst
}

/// Worst deviation of `LUT(I, J+1)` from `LUT(I, J)` shifted by the input
/// stride (mod W), including the wrap from the last column to the first.
pub fn lut_shift_error(lut: &SamplingLut) -> (f64, Option<TapIndex>) {
    let w = lut.config().width() as f64;
    let stride = lut.spec().input_stride() as f64;
    let k = lut.k();
    let mut worst = 0f64;
    let mut at = None;
    for i in 0..lut.out_h() {
        for j in 0..lut.out_w() {
            let here = lut.position(i, j);
            let next = lut.position(i, (j + 1) % lut.out_w());
            for (t, (a, b)) in here.iter().zip(next).enumerate() {
                let err = column_distance(a[0] as f64 + stride, b[0] as f64, w)
                    .max((a[1] as f64 - b[1] as f64).abs());
                if err > worst {
                    worst = err;
                    at = Some(TapIndex {
                        out_row: i,
                        out_col: j,
                        kernel_row: t / k,
                        kernel_col: t % k,
                    });
                }
            }
        }
    }
    (worst, at)
}

/// Worst `|conv(resample(img)) - gather_dot(img)|` over `trials` random
/// image/weight pairs with values in `[-1, 1)`.
pub fn oracle_error(lut: &SamplingLut, rng: &mut SeededRng, trials: usize) -> f64 {
    let cfg = lut.config();
    let mut worst = 0f64;
    for _ in 0..trials {
        let img = rng.tensor(2, cfg.height(), cfg.width());
        let w = rng.weights(3, 2, lut.k(), true);
        let planar = spherical_conv(&img, lut, &w).expect("dims consistent");
        let oracle = gather_dot_oracle(&img, lut, &w).expect("dims consistent");
        worst = worst.max(planar.max_abs_diff(&oracle) as f64);
    }
    worst
}

/// Shifting the input by one stride must shift the output by one column.
pub fn shift_equivariance_error(lut: &SamplingLut, rng: &mut SeededRng) -> f64 {
    let cfg = lut.config();
    let img = rng.tensor(2, cfg.height(), cfg.width());
    let w = rng.weights(2, 2, lut.k(), true);
    let base = spherical_conv(&img, lut, &w).expect("dims consistent");
    let shifted_in = img.roll_columns(lut.spec().input_stride() as isize);
    let shifted = spherical_conv(&shifted_in, lut, &w).expect("dims consistent");
    shifted.max_abs_diff(&base.roll_columns(1)) as f64
}

/// For 7x7 LUTs: a delta weight on the pole tap must return the image.
pub fn pole_tap_error(lut: &SamplingLut, rng: &mut SeededRng) -> f64 {
    let cfg = lut.config();
    let img = rng.tensor(1, cfg.height(), cfg.width());
    let c = lut.k() / 2;
    let w = WeightSet::from_fn(1, 1, lut.k(), |_, _, a, b| (a == c && b == c) as u8 as f32)
        .expect("valid kernel");
    let out = gather_dot_oracle(&img, lut, &w).expect("dims consistent");
    out.max_abs_diff(&img) as f64
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

impl CheckOutcome {
    fn within(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: None,
        }
    }

    fn failed(name: impl Into<String>, detail: String) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            tolerance: 0.0,
            passed: false,
            detail: Some(detail),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.measured.is_nan() {
            write!(f, "{}: {verdict}", self.name)?;
        } else {
            write!(
                f,
                "{} max abs err {:.3e} <= {:.0e}: {verdict}",
                self.name, self.measured, self.tolerance
            )?;
        }
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub cfg: ProjectionConfig,
    pub kernels: Vec<KernelSize>,
    pub spacing: SpacingMode,
    pub seed: u64,
    pub trials: usize,
}

pub fn run_suites(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut rng = SeededRng::new(opts.seed);
    let (w, h) = (opts.cfg.width(), opts.cfg.height());

    out.push(CheckOutcome::within(
        format!("round-trip {w}x{h}"),
        roundtrip_error(&opts.cfg),
        ROUNDTRIP_TOL,
    ));

    for &size in &opts.kernels {
        let k = size.k();
        let spec = KernelSpec {
            size,
            spacing: opts.spacing,
        };
        let lut = match build_lut(&opts.cfg, &spec) {
            Ok(lut) => lut,
            Err(e) => {
                out.push(CheckOutcome::failed(format!("k={k} W={w}"), e.to_string()));
                continue;
            }
        };
        out.push(CheckOutcome::within(
            format!("oracle k={k} W={w} ({} trials)", opts.trials),
            oracle_error(&lut, &mut rng, opts.trials),
            ORACLE_TOL,
        ));
        let (shift_err, at) = lut_shift_error(&lut);
        let mut lut_check = CheckOutcome::within(
            format!("LUT longitude shift k={k} W={w}"),
            shift_err,
            EQUIVARIANCE_TOL,
        );
        if !lut_check.passed {
            lut_check.detail = at.map(|t| format!("worst at {t}"));
        }
        out.push(lut_check);
        out.push(CheckOutcome::within(
            format!("seam equivariance k={k} W={w}"),
            shift_equivariance_error(&lut, &mut rng),
            EQUIVARIANCE_TOL,
        ));
        if size == KernelSize::Seven {
            out.push(CheckOutcome::within(
                format!("pole-tap identity k=7 W={w}"),
                pole_tap_error(&lut, &mut rng),
                POLE_TAP_TOL,
            ));
        }
    }
    out
}

/// Parses a stored LUT and compares it bit-for-bit with a fresh build of
/// the same geometry.
pub fn check_lut_file(bytes: &[u8]) -> CheckOutcome {
    const NAME: &str = "LUT file matches rebuild";
    let stored = match SamplingLut::from_bytes(bytes) {
        Ok(l) => l,
        Err(e) => return CheckOutcome::failed(NAME, e.to_string()),
    };
    let fresh = match build_lut(stored.config(), stored.spec()) {
        Ok(l) => l,
        Err(e) => return CheckOutcome::failed(NAME, e.to_string()),
    };
    match stored.first_mismatch(&fresh) {
        None => CheckOutcome {
            name: NAME.into(),
            measured: f64::NAN,
            tolerance: 0.0,
            passed: true,
            detail: Some(format!(
                "W={} k={} {}",
                stored.config().width(),
                stored.k(),
                stored.spec().spacing
            )),
        },
        Some(tap) => {
            let [u, v] = stored.tap(tap);
            let [fu, fv] = fresh.tap(tap);
            CheckOutcome::failed(
                NAME,
                format!("mismatch at {tap}: stored ({u}, {v}), expected ({fu}, {fv})"),
            )
        }
    }
}
