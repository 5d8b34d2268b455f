//! Spherical kernel templates and the sampling lookup tables baked from them.
//!
//! A template is the set of `k * k` directions around the north pole that
//! replaces the planar `k x k` footprint. Taps are grouped into rings by the
//! Chebyshev distance of their planar offset from the kernel center; ring
//! `r` sits at angular radius `r * pitch` (half-integer `r` for even `k`).
//! The LUT rotates the template onto every output center and records where
//! each tap lands in the panorama, so a stock strided convolution over the
//! resampled image samples on the sphere.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::codec::{checked_u32, put_u32, ByteReader};
use crate::error::{invalid, malformed, Result};
use crate::geometry::{dir_to_erp, pixel_to_dir, rotation_to_center, ProjectionConfig, UnitVec};

/// Supported kernel sizes: the 2x2 and 4x4 stride-equals-kernel convolutions
/// and the 7x7 stride-1 convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelSize {
    Two,
    Four,
    Seven,
}

impl KernelSize {
    pub fn from_k(k: usize) -> Result<Self> {
        match k {
            2 => Ok(Self::Two),
            4 => Ok(Self::Four),
            7 => Ok(Self::Seven),
            _ => Err(invalid(format!(
                "unsupported kernel size {k} (expected 2, 4 or 7)"
            ))),
        }
    }

    pub fn k(self) -> usize {
        match self {
            Self::Two => 2,
            Self::Four => 4,
            Self::Seven => 7,
        }
    }

    pub fn taps(self) -> usize {
        self.k() * self.k()
    }

    /// Step between neighbouring output centers, in input pixels. The 7x7
    /// kernel slides one pixel at a time; its resampled image is then
    /// convolved with stride 7.
    pub fn input_stride(self) -> usize {
        match self {
            Self::Two => 2,
            Self::Four => 4,
            Self::Seven => 1,
        }
    }
}

/// How ring points are spread around their circle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SpacingMode {
    /// `n` points with equal angular spacing `2 pi / n`.
    Uniform,
    /// Each point sits at the azimuth of the planar offset it replaces.
    #[default]
    AzimuthMatched,
}

impl SpacingMode {
    pub fn code(self) -> u8 {
        match self {
            Self::Uniform => 0,
            Self::AzimuthMatched => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Uniform),
            1 => Some(Self::AzimuthMatched),
            _ => None,
        }
    }
}

impl fmt::Display for SpacingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::AzimuthMatched => "azimuth-matched",
        })
    }
}

impl FromStr for SpacingMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "azimuth-matched" | "azimuth_matched" => Ok(Self::AzimuthMatched),
            _ => Err(invalid(format!("unknown spacing mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    pub size: KernelSize,
    pub spacing: SpacingMode,
}

impl KernelSpec {
    pub fn new(k: usize, spacing: SpacingMode) -> Result<Self> {
        Ok(Self {
            size: KernelSize::from_k(k)?,
            spacing,
        })
    }

    pub fn k(&self) -> usize {
        self.size.k()
    }

    pub fn input_stride(&self) -> usize {
        self.size.input_stride()
    }
}

/// One circle of the template. A radius of zero is the lone pole tap of an
/// odd-sized kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelTemplate {
    k: usize,
    points: Vec<UnitVec>,
    rings: Vec<Ring>,
    ring_of: Vec<usize>,
}

impl KernelTemplate {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Tap directions in row-major kernel order.
    pub fn points(&self) -> &[UnitVec] {
        &self.points
    }

    /// Rings ordered by increasing radius.
    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// Ring index of each tap, row-major.
    pub fn ring_of(&self) -> &[usize] {
        &self.ring_of
    }

    pub fn tap_radius(&self, tap: usize) -> f64 {
        self.rings[self.ring_of[tap]].radius
    }
}

/// Planar offset `(row, col)` of tap `(a, b)` from the kernel center.
fn planar_offset(k: usize, a: usize, b: usize) -> (f64, f64) {
    let c = (k as f64 - 1.0) / 2.0;
    (a as f64 - c, b as f64 - c)
}

/// Azimuth of a planar offset in `[0, 2 pi)`; local `+x` is the row axis.
fn offset_azimuth(dr: f64, dc: f64) -> f64 {
    let a = dc.atan2(dr);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

pub fn build_template(cfg: &ProjectionConfig, spec: &KernelSpec) -> KernelTemplate {
    let k = spec.k();
    let pitch = cfg.pitch();
    // Chebyshev distances are integers for odd k and half-integers for even k.
    let base = if k.is_multiple_of(2) { 0.5 } else { 0.0 };
    let ring_count = k.div_ceil(2);

    let radius_of = |level: f64| match spec.size {
        KernelSize::Two => FRAC_1_SQRT_2 * pitch,
        KernelSize::Four | KernelSize::Seven => level * pitch,
    };

    let mut ring_of = vec![0usize; k * k];
    let mut members: Vec<Vec<(usize, f64, f64, f64)>> = vec![Vec::new(); ring_count];
    for a in 0..k {
        for b in 0..k {
            let (dr, dc) = planar_offset(k, a, b);
            let level = dr.abs().max(dc.abs());
            let ring = (level - base).round() as usize;
            ring_of[a * k + b] = ring;
            members[ring].push((a * k + b, dr, dc, offset_azimuth(dr, dc)));
        }
    }

    let mut points = vec![UnitVec::NORTH_POLE; k * k];
    let mut rings = Vec::with_capacity(ring_count);
    for (ring, taps) in members.iter_mut().enumerate() {
        let radius = radius_of(base + ring as f64);
        rings.push(Ring {
            radius,
            count: taps.len(),
        });
        if radius == 0.0 {
            continue;
        }
        match spec.spacing {
            SpacingMode::AzimuthMatched => {
                for &(tap, _, _, az) in taps.iter() {
                    points[tap] = UnitVec::from_angles(radius, az);
                }
            }
            SpacingMode::Uniform => {
                // Rank-match planar taps (sorted by azimuth) onto evenly spaced
                // points. The spacing starts on the +x axis when a planar tap
                // sits there, otherwise half a step off it, so the ring stays
                // mirror-symmetric about both kernel axes.
                let n = taps.len();
                let on_axis = taps.iter().any(|&(_, dr, dc, _)| dc == 0.0 && dr > 0.0);
                let offset = if on_axis { 0.0 } else { PI / n as f64 };
                taps.sort_by(|x, y| x.3.total_cmp(&y.3));
                for (m, &(tap, ..)) in taps.iter().enumerate() {
                    points[tap] = UnitVec::from_angles(radius, offset + TAU * m as f64 / n as f64);
                }
            }
        }
    }

    KernelTemplate {
        k,
        points,
        rings,
        ring_of,
    }
}

/// Location of one tap inside a LUT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TapIndex {
    pub out_row: usize,
    pub out_col: usize,
    pub kernel_row: usize,
    pub kernel_col: usize,
}

impl fmt::Display for TapIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "output ({}, {}) tap ({}, {})",
            self.out_row, self.out_col, self.kernel_row, self.kernel_col
        )
    }
}

pub const SLUT_MAGIC: &[u8; 4] = b"SLUT";
pub const SLUT_VERSION: u32 = 1;
pub const SLUT_HEADER_LEN: usize = 40;

/// Precomputed ERP pixel-index coordinates `(u, v)` of every tap of every
/// output position, row-major over (output row, output col, kernel row,
/// kernel col).
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingLut {
    cfg: ProjectionConfig,
    spec: KernelSpec,
    out_w: usize,
    out_h: usize,
    coords: Vec<[f32; 2]>,
}

/// Output grid `(out_h, out_w)` of a kernel over a panorama.
pub fn output_grid(cfg: &ProjectionConfig, spec: &KernelSpec) -> Result<(usize, usize)> {
    let s = spec.input_stride();
    if !cfg.width().is_multiple_of(s) || !cfg.height().is_multiple_of(s) {
        return Err(invalid(format!(
            "{}x{} panorama is not divisible into {}x{} blocks",
            cfg.width(),
            cfg.height(),
            s,
            s
        )));
    }
    Ok((cfg.height() / s, cfg.width() / s))
}

/// Center direction of output position `(out_row, out_col)`. For block
/// kernels it is the middle of the block, e.g. offset 1.5 inside a 4x4 block.
pub fn output_center(
    cfg: &ProjectionConfig,
    spec: &KernelSpec,
    out_row: usize,
    out_col: usize,
) -> UnitVec {
    let s = spec.input_stride();
    let half = (s as f64 - 1.0) / 2.0;
    pixel_to_dir(
        cfg,
        (s * out_row) as f64 + half,
        (s * out_col) as f64 + half,
    )
    .expect("grid positions are finite")
}

/// Full-precision tap directions of one output position, row-major.
pub fn tap_directions(
    cfg: &ProjectionConfig,
    spec: &KernelSpec,
    template: &KernelTemplate,
    out_row: usize,
    out_col: usize,
) -> Vec<UnitVec> {
    let rot = rotation_to_center(&output_center(cfg, spec, out_row, out_col));
    template.points().iter().map(|p| rot.apply(p)).collect()
}

fn quantize_u(u: f64, width: usize) -> f32 {
    let q = u as f32;
    if q >= width as f32 {
        0.0
    } else {
        q
    }
}

pub fn build_lut(cfg: &ProjectionConfig, spec: &KernelSpec) -> Result<SamplingLut> {
    let (out_h, out_w) = output_grid(cfg, spec)?;
    let template = build_template(cfg, spec);
    let taps = spec.size.taps();
    let mut coords = vec![[0f32; 2]; out_h * out_w * taps];

    coords
        .par_chunks_mut(out_w * taps)
        .enumerate()
        .for_each(|(out_row, row)| {
            for (out_col, cell) in row.chunks_exact_mut(taps).enumerate() {
                let rot = rotation_to_center(&output_center(cfg, spec, out_row, out_col));
                for (slot, p) in cell.iter_mut().zip(template.points()) {
                    let e = dir_to_erp(cfg, &rot.apply(p));
                    *slot = [quantize_u(e.u, cfg.width()), e.v as f32];
                }
            }
        });

    Ok(SamplingLut {
        cfg: *cfg,
        spec: *spec,
        out_w,
        out_h,
        coords,
    })
}

impl SamplingLut {
    pub fn config(&self) -> &ProjectionConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn out_w(&self) -> usize {
        self.out_w
    }

    pub fn out_h(&self) -> usize {
        self.out_h
    }

    pub fn coords(&self) -> &[[f32; 2]] {
        &self.coords
    }

    /// The `k * k` taps of one output position, row-major.
    pub fn position(&self, out_row: usize, out_col: usize) -> &[[f32; 2]] {
        let taps = self.spec.size.taps();
        let start = (out_row * self.out_w + out_col) * taps;
        &self.coords[start..start + taps]
    }

    pub fn tap(&self, idx: TapIndex) -> [f32; 2] {
        self.position(idx.out_row, idx.out_col)[idx.kernel_row * self.k() + idx.kernel_col]
    }

    pub fn tap_index(&self, flat: usize) -> TapIndex {
        let k = self.k();
        let taps = k * k;
        let pos = flat / taps;
        let t = flat % taps;
        TapIndex {
            out_row: pos / self.out_w,
            out_col: pos % self.out_w,
            kernel_row: t / k,
            kernel_col: t % k,
        }
    }

    /// First tap whose stored coordinates differ bitwise from `other`'s.
    /// Both tables must share geometry.
    pub fn first_mismatch(&self, other: &SamplingLut) -> Option<TapIndex> {
        self.coords
            .iter()
            .zip(&other.coords)
            .position(|(a, b)| a[0].to_bits() != b[0].to_bits() || a[1].to_bits() != b[1].to_bits())
            .map(|i| self.tap_index(i))
    }

    pub fn same_geometry(&self, other: &SamplingLut) -> bool {
        self.cfg == other.cfg
            && self.spec == other.spec
            && self.out_w == other.out_w
            && self.out_h == other.out_h
    }

    pub fn encoded_len(&self) -> usize {
        SLUT_HEADER_LEN + self.coords.len() * 8
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(SLUT_MAGIC);
        out.extend_from_slice(&SLUT_VERSION.to_le_bytes());
        put_u32(&mut out, self.cfg.width());
        put_u32(&mut out, self.cfg.height());
        put_u32(&mut out, self.k());
        put_u32(&mut out, self.spec.input_stride());
        put_u32(&mut out, self.out_w);
        put_u32(&mut out, self.out_h);
        out.push(self.spec.spacing.code());
        out.extend_from_slice(&[0u8; 7]);
        for [u, v] in &self.coords {
            out.extend_from_slice(&u.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        checked_u32("SLUT", self.cfg.width())?;
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    /// Parses an SLUT file, checking that the header is self-consistent and
    /// every coordinate lies in its documented range.
    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        const KIND: &str = "SLUT";
        let mut r = ByteReader::new(KIND, buf);
        r.expect_magic(SLUT_MAGIC)?;
        let version = r.u32()?;
        if version != SLUT_VERSION {
            return Err(malformed(KIND, format!("unsupported version {version}")));
        }
        let width = r.u32_as_usize()?;
        let height = r.u32_as_usize()?;
        let k = r.u32_as_usize()?;
        let stride = r.u32_as_usize()?;
        let out_w = r.u32_as_usize()?;
        let out_h = r.u32_as_usize()?;
        let mode = r.u8()?;
        r.zeros(7)?;

        let cfg =
            ProjectionConfig::new(width, height).map_err(|e| malformed(KIND, e.to_string()))?;
        let spacing = SpacingMode::from_code(mode)
            .ok_or_else(|| malformed(KIND, format!("unknown spacing mode {mode}")))?;
        let spec = KernelSpec::new(k, spacing).map_err(|e| malformed(KIND, e.to_string()))?;
        if stride != spec.input_stride() {
            return Err(malformed(
                KIND,
                format!("stride {stride} invalid for k={k}"),
            ));
        }
        let grid = output_grid(&cfg, &spec).map_err(|e| malformed(KIND, e.to_string()))?;
        if grid != (out_h, out_w) {
            return Err(malformed(
                KIND,
                format!(
                    "output grid {out_h}x{out_w} does not match {}x{}",
                    grid.0, grid.1
                ),
            ));
        }

        let n = out_h * out_w * k * k;
        let flat = r.f32_vec(n * 2)?;
        r.finish()?;
        let w = width as f32;
        let v_max = height as f32 - 0.5;
        let mut coords = Vec::with_capacity(n);
        for (i, pair) in flat.chunks_exact(2).enumerate() {
            let (u, v) = (pair[0], pair[1]);
            if !(0.0..w).contains(&u) || !(-0.5..=v_max).contains(&v) {
                return Err(malformed(
                    KIND,
                    format!("coordinate ({u}, {v}) out of range at record {i}"),
                ));
            }
            coords.push([u, v]);
        }
        Ok(Self {
            cfg,
            spec,
            out_w,
            out_h,
            coords,
        })
    }
}
