//! Image containers: single-channel planes and the RGB / YCrCb triples built
//! from them.
//!
//! `GrayPlane` is the universal currency of the crate. Image intensities live
//! in `[0,1]`; the same container also carries signed data (Sobel responses,
//! loss gradients), which is why the constructor checks finiteness and shape
//! but not range.

use crate::error::{Error, Result};

/// Minimum plane side length. Sobel needs a full 3x3 neighborhood.
pub const MIN_SIDE: usize = 3;

/// A row-major single-channel plane of `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayPlane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl GrayPlane {
    /// Builds a plane from row-major data, validating shape and finiteness.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height < MIN_SIDE || width < MIN_SIDE {
            return Err(Error::TooSmall {
                height,
                width,
                min_height: MIN_SIDE,
                min_width: MIN_SIDE,
            });
        }
        if data.len() != height * width {
            return Err(Error::BadLength {
                height,
                width,
                len: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// All-zero plane. Panics if the requested size is below 3x3.
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Constant plane. Panics if the requested size is below 3x3.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(
            height >= MIN_SIDE && width >= MIN_SIDE,
            "plane {height}x{width} is below the {MIN_SIDE}x{MIN_SIDE} minimum"
        );
        assert!(value.is_finite(), "plane fill value must be finite");
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Builds a plane by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(
            height >= MIN_SIDE && width >= MIN_SIDE,
            "plane {height}x{width} is below the {MIN_SIDE}x{MIN_SIDE} minimum"
        );
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.height && col < self.width);
        self.data[row * self.width + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Errors with both shapes when the planes differ in size.
    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_height: self.height,
                left_width: self.width,
                right_height: other.height,
                right_width: other.width,
            })
        }
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// New plane with every sample transformed by `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two same-shaped planes.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Clamps every sample into `[0,1]`.
    pub fn clamp01(&self) -> Self {
        self.map(|v| v.clamp(0.0, 1.0))
    }
}

/// Three-channel RGB image; all channels share one shape, values in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: GrayPlane,
    pub g: GrayPlane,
    pub b: GrayPlane,
}

impl RgbImage {
    pub fn new(r: GrayPlane, g: GrayPlane, b: GrayPlane) -> Result<Self> {
        r.ensure_same_dims(&g)?;
        r.ensure_same_dims(&b)?;
        Ok(Self { r, g, b })
    }

    pub fn height(&self) -> usize {
        self.r.height()
    }

    pub fn width(&self) -> usize {
        self.r.width()
    }
}

/// Luma/chroma image. `cr` and `cb` store offset chroma so that 0.5 is
/// the neutral (achromatic) value.
#[derive(Debug, Clone, PartialEq)]
pub struct YCrCbImage {
    pub y: GrayPlane,
    pub cr: GrayPlane,
    pub cb: GrayPlane,
}

impl YCrCbImage {
    pub fn new(y: GrayPlane, cr: GrayPlane, cb: GrayPlane) -> Result<Self> {
        y.ensure_same_dims(&cr)?;
        y.ensure_same_dims(&cb)?;
        Ok(Self { y, cr, cb })
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    pub fn width(&self) -> usize {
        self.y.width()
    }
}
