//! 8-bit PNG input and output.
//!
//! Loading maps integer value `v` to `v/255`; saving maps `x` to
//! `round(255*x)` clamped to `[0,255]`, so a save/load round trip moves each
//! pixel by at most half a quantization step (1/510). Grayscale PNGs load as
//! [`GrayPlane`], RGB PNGs as [`RgbImage`]; alpha channels are dropped,
//! anything deeper than 8 bits is rejected.

use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::color::rgb_to_ycrcb;
use crate::error::{Error, Result};
use crate::plane::{GrayPlane, RgbImage};

/// What a PNG decoded into.
#[derive(Debug, Clone)]
pub enum LoadedImage {
    Gray(GrayPlane),
    Rgb(RgbImage),
}

impl LoadedImage {
    /// The luma view of the image: grayscale planes pass through, RGB images
    /// are reduced to their Y channel.
    pub fn into_gray(self) -> GrayPlane {
        match self {
            LoadedImage::Gray(p) => p,
            LoadedImage::Rgb(rgb) => rgb_to_ycrcb(&rgb).y,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            LoadedImage::Gray(p) => p.height(),
            LoadedImage::Rgb(i) => i.height(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            LoadedImage::Gray(p) => p.width(),
            LoadedImage::Rgb(i) => i.width(),
        }
    }
}

fn byte_to_unit(v: u8) -> f64 {
    v as f64 / 255.0
}

fn unit_to_byte(x: f64) -> u8 {
    (x * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Loads an 8-bit PNG from `path`.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::NotPng {
            path: path.to_path_buf(),
        });
    }
    let decoded = reader.decode().map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;

    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().into_iter().map(byte_to_unit).collect();
            Ok(LoadedImage::Gray(GrayPlane::from_vec(h, w, data)?))
        }
        DynamicImage::ImageLumaA8(buf) => {
            let data = buf.pixels().map(|p| byte_to_unit(p.0[0])).collect();
            Ok(LoadedImage::Gray(GrayPlane::from_vec(h, w, data)?))
        }
        DynamicImage::ImageRgb8(buf) => {
            let mut r = Vec::with_capacity(h * w);
            let mut g = Vec::with_capacity(h * w);
            let mut b = Vec::with_capacity(h * w);
            for px in buf.pixels() {
                r.push(byte_to_unit(px.0[0]));
                g.push(byte_to_unit(px.0[1]));
                b.push(byte_to_unit(px.0[2]));
            }
            Ok(LoadedImage::Rgb(RgbImage::new(
                GrayPlane::from_vec(h, w, r)?,
                GrayPlane::from_vec(h, w, g)?,
                GrayPlane::from_vec(h, w, b)?,
            )?))
        }
        DynamicImage::ImageRgba8(buf) => {
            let mut r = Vec::with_capacity(h * w);
            let mut g = Vec::with_capacity(h * w);
            let mut b = Vec::with_capacity(h * w);
            for px in buf.pixels() {
                r.push(byte_to_unit(px.0[0]));
                g.push(byte_to_unit(px.0[1]));
                b.push(byte_to_unit(px.0[2]));
            }
            Ok(LoadedImage::Rgb(RgbImage::new(
                GrayPlane::from_vec(h, w, r)?,
                GrayPlane::from_vec(h, w, g)?,
                GrayPlane::from_vec(h, w, b)?,
            )?))
        }
        other => Err(Error::UnsupportedPixelFormat {
            path: path.to_path_buf(),
            layout: format!("{:?}", other.color()),
        }),
    }
}

/// Writes a plane as an 8-bit grayscale PNG.
pub fn save_gray(path: impl AsRef<Path>, img: &GrayPlane) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = img.as_slice().iter().map(|&x| unit_to_byte(x)).collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches plane dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes an RGB image as an 8-bit color PNG.
pub fn save_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(img.r.len() * 3);
    for i in 0..img.r.len() {
        bytes.push(unit_to_byte(img.r.as_slice()[i]));
        bytes.push(unit_to_byte(img.g.as_slice()[i]));
        bytes.push(unit_to_byte(img.b.as_slice()[i]));
    }
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches image dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Encode {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_png(name: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().unwrap();
        // Keep the directory alive for the process.
        let path = dir.path().join(name);
        std::mem::forget(dir);
        path
    }

    #[test]
    fn gray_round_trip_stays_within_quantization() {
        let img = GrayPlane::from_fn(7, 9, |r, c| ((r * 9 + c) as f64 / 62.0).min(1.0));
        let path = temp_png("gray.png");
        save_gray(&path, &img).unwrap();
        let LoadedImage::Gray(back) = load_image(&path).unwrap() else {
            panic!("expected grayscale");
        };
        for i in 0..img.len() {
            assert!((back.as_slice()[i] - img.as_slice()[i]).abs() <= 1.0 / 510.0 + 1e-12);
        }
    }

    #[test]
    fn rgb_round_trip_stays_within_quantization() {
        let img = RgbImage {
            r: GrayPlane::from_fn(4, 5, |r, c| (r + c) as f64 / 7.0),
            g: GrayPlane::from_fn(4, 5, |r, c| (r * c) as f64 / 12.0),
            b: GrayPlane::filled(4, 5, 0.9),
        };
        let path = temp_png("rgb.png");
        save_rgb(&path, &img).unwrap();
        let LoadedImage::Rgb(back) = load_image(&path).unwrap() else {
            panic!("expected rgb");
        };
        for i in 0..img.r.len() {
            assert!((back.r.as_slice()[i] - img.r.as_slice()[i]).abs() <= 1.0 / 510.0 + 1e-12);
            assert!((back.g.as_slice()[i] - img.g.as_slice()[i]).abs() <= 1.0 / 510.0 + 1e-12);
            assert!((back.b.as_slice()[i] - img.b.as_slice()[i]).abs() <= 1.0 / 510.0 + 1e-12);
        }
    }

    #[test]
    fn constant_128_loads_as_128_over_255() {
        let img = GrayPlane::filled(3, 3, 128.0 / 255.0);
        let path = temp_png("mid.png");
        save_gray(&path, &img).unwrap();
        let back = load_image(&path).unwrap().into_gray();
        for &v in back.as_slice() {
            assert_eq!(v, 128.0 / 255.0);
        }
    }

    #[test]
    fn missing_file_error_names_the_path() {
        let err = load_image("/no/such/file.png").unwrap_err();
        assert!(err.to_string().contains("/no/such/file.png"));
    }

    #[test]
    fn non_png_is_rejected_with_path() {
        let path = temp_png("fake.png");
        std::fs::write(&path, b"not a png at all").unwrap();
        let err = load_image(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fake.png"), "{msg}");
    }

    // Fixture produced and decoded by an independent decoder (Pillow); the
    // expected bytes are frozen here.
    #[test]
    fn rgb_fixture_matches_reference_decoder() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/rgb_fixture.png");
        let LoadedImage::Rgb(img) = load_image(path).unwrap() else {
            panic!("expected rgb fixture");
        };
        let expected: [[u8; 3]; 20] = include!("../tests/data/rgb_fixture_pixels.in");
        assert_eq!((img.height(), img.width()), (4, 5));
        for (i, exp) in expected.iter().enumerate() {
            assert_eq!(img.r.as_slice()[i], exp[0] as f64 / 255.0);
            assert_eq!(img.g.as_slice()[i], exp[1] as f64 / 255.0);
            assert_eq!(img.b.as_slice()[i], exp[2] as f64 / 255.0);
        }
    }
}
