//! Binary PGM (`P5`) and PPM (`P6`) import/export with maxval 255.
//!
//! Samples are scaled to `[0, 1]` on load; on save they are clamped to
//! `[0, 1]`, multiplied by 255 and rounded.

use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};

use crate::error::{invalid, malformed, Error, Result};
use crate::tensor::Tensor;

const KIND: &str = "PNM";

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    match bytes.get(..2) {
        Some(b"P5") | Some(b"P6") => {}
        _ => return Err(malformed(KIND, "only binary P5/P6 images are supported")),
    }
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Pnm)
        .map_err(|e| malformed(KIND, e.to_string()))?;
    let (channels, width, height, raw) = match img {
        DynamicImage::ImageLuma8(g) => (1, g.width(), g.height(), g.into_raw()),
        DynamicImage::ImageRgb8(c) => (3, c.width(), c.height(), c.into_raw()),
        other => {
            return Err(malformed(
                KIND,
                format!(
                    "unsupported sample layout {:?} (need maxval 255)",
                    other.color()
                ),
            ))
        }
    };
    let (w, h) = (width as usize, height as usize);
    // interleaved -> channel-major
    let data = (0..channels)
        .flat_map(|c| {
            let raw = &raw;
            (0..w * h).map(move |p| raw[p * channels + c] as f32 / 255.0)
        })
        .collect();
    Ok(Tensor::from_parts(channels, h, w, data))
}

fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode_raw(width: usize, height: usize, channels: usize, raw: &[u8]) -> Result<Vec<u8>> {
    let (subtype, color) = match channels {
        1 => (
            PnmSubtype::Graymap(SampleEncoding::Binary),
            ExtendedColorType::L8,
        ),
        3 => (
            PnmSubtype::Pixmap(SampleEncoding::Binary),
            ExtendedColorType::Rgb8,
        ),
        n => return Err(invalid(format!("cannot store {n} channels as PGM/PPM"))),
    };
    let mut out = Vec::new();
    PnmEncoder::new(Cursor::new(&mut out))
        .with_subtype(subtype)
        .write_image(raw, width as u32, height as u32, color)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(out)
}

/// Encodes a 1-channel tensor as PGM or a 3-channel tensor as PPM.
pub fn encode(t: &Tensor) -> Result<Vec<u8>> {
    let (c, h, w) = t.dims();
    if c != 1 && c != 3 {
        return Err(invalid(format!("cannot store {c} channels as PGM/PPM")));
    }
    let plane = h * w;
    let mut raw = vec![0u8; c * plane];
    for ch in 0..c {
        for (p, &v) in t.channel(ch).iter().enumerate() {
            raw[p * c + ch] = quantize(v);
        }
    }
    encode_raw(w, h, c, &raw)
}

/// Encodes gray levels directly (label maps, normalized feature maps).
pub fn encode_gray_u8(width: usize, height: usize, levels: &[u8]) -> Result<Vec<u8>> {
    if levels.len() != width * height {
        return Err(invalid("gray buffer size does not match dimensions"));
    }
    encode_raw(width, height, 1, levels)
}

/// Chooses the on-disk format from the extension: `.pgm`/`.ppm` are PNM,
/// anything else is `TEN1`.
pub fn is_pnm_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if e == "pgm" || e == "ppm" || e == "pnm"
    )
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode(&bytes)
    } else {
        Tensor::from_bytes(&bytes)
    }
}

pub fn save_tensor(path: &Path, t: &Tensor) -> Result<()> {
    let bytes = if is_pnm_path(path) {
        encode(t)?
    } else {
        t.to_bytes()
    };
    std::fs::write(path, bytes)?;
    Ok(())
}
