//! Sobel directional gradients, their adjoint, and the L1 magnitude map.
//!
//! Kernels are applied as cross-correlation (no flip), producing same-size
//! responses: an image increasing left-to-right yields positive `gx` in the
//! interior, one increasing top-to-bottom yields positive `gy`. Boundary
//! samples come from the selected [`PaddingMode`].
//!
//! The adjoint scatters through the identical taps the forward pass gathers
//! from, so `<sobel(u), v> == <u, sobel_adjoint(v)>` holds to rounding for
//! both padding modes; the backward passes of all gradient losses rely on it.

use crate::error::Result;
use crate::plane::GrayPlane;

/// Horizontal-derivative kernel, indexed `[dy][dx]`.
pub const KERNEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];

/// Vertical-derivative kernel; the transpose of [`KERNEL_X`].
pub const KERNEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Boundary handling for the 3x3 correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaddingMode {
    /// Out-of-range samples read as 0. The default everywhere.
    #[default]
    Zero,
    /// Out-of-range samples mirror without repeating the edge pixel
    /// (index -1 reads row/column 1).
    Reflect,
}

impl std::str::FromStr for PaddingMode {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(PaddingMode::Zero),
            "reflect" => Ok(PaddingMode::Reflect),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown padding '{other}' (expected zero|reflect)"
            ))),
        }
    }
}

impl PaddingMode {
    pub fn name(self) -> &'static str {
        match self {
            PaddingMode::Zero => "zero",
            PaddingMode::Reflect => "reflect",
        }
    }

    /// Maps a possibly out-of-range index into the plane, or `None` when the
    /// sample is a zero pad.
    #[inline]
    fn map_index(self, i: isize, len: usize) -> Option<usize> {
        if (0..len as isize).contains(&i) {
            return Some(i as usize);
        }
        match self {
            PaddingMode::Zero => None,
            PaddingMode::Reflect => {
                let reflected = if i < 0 { -i } else { 2 * (len as isize - 1) - i };
                debug_assert!((0..len as isize).contains(&reflected));
                Some(reflected as usize)
            }
        }
    }
}

/// Paired signed Sobel responses of one image. Both planes share the source
/// image's shape; for intensities in `[0,1]` every response lies in `[-4,4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: GrayPlane,
    pub gy: GrayPlane,
}

impl GradientField {
    pub fn new(gx: GrayPlane, gy: GrayPlane) -> Result<Self> {
        gx.ensure_same_dims(&gy)?;
        Ok(Self { gx, gy })
    }

    pub fn height(&self) -> usize {
        self.gx.height()
    }

    pub fn width(&self) -> usize {
        self.gx.width()
    }
}

/// Tap pairs opposite under 180-degree rotation, plus the center tap. Both
/// Sobel kernels are antisymmetric (`K[t] = -K[-t]`, zero center), so each
/// pair's contribution on a constant input is an exact floating-point zero,
/// and the pair list maps onto itself under transposition — which makes the
/// zero-mean and transpose-symmetry properties hold bitwise, not just to
/// rounding.
const TAP_PAIRS: [((usize, usize), (usize, usize)); 4] = [
    ((0, 0), (2, 2)),
    ((0, 2), (2, 0)),
    ((0, 1), (2, 1)),
    ((1, 0), (1, 2)),
];

/// Same-size 3x3 cross-correlation (gather).
fn correlate3(img: &GrayPlane, kernel: &[[f64; 3]; 3], pad: PaddingMode) -> GrayPlane {
    let (h, w) = (img.height(), img.width());
    let sample = |r: isize, c: isize| -> f64 {
        match (pad.map_index(r, h), pad.map_index(c, w)) {
            (Some(rr), Some(cc)) => img.get(rr, cc),
            _ => 0.0,
        }
    };
    let mut out = GrayPlane::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let (ri, ci) = (r as isize, c as isize);
            let mut acc = 0.0;
            for &((ay, ax), (by, bx)) in &TAP_PAIRS {
                let va = sample(ri + ay as isize - 1, ci + ax as isize - 1);
                let vb = sample(ri + by as isize - 1, ci + bx as isize - 1);
                acc += kernel[ay][ax] * va + kernel[by][bx] * vb;
            }
            acc += kernel[1][1] * sample(ri, ci);
            out.set(r, c, acc);
        }
    }
    out
}

/// Transpose of [`correlate3`]: scatters each response back through its taps.
fn correlate3_adjoint(v: &GrayPlane, kernel: &[[f64; 3]; 3], pad: PaddingMode) -> GrayPlane {
    let (h, w) = (v.height(), v.width());
    let mut out = GrayPlane::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let g = v.get(r, c);
            for (dy, krow) in kernel.iter().enumerate() {
                let Some(rr) = pad.map_index(r as isize + dy as isize - 1, h) else {
                    continue;
                };
                for (dx, &k) in krow.iter().enumerate() {
                    let Some(cc) = pad.map_index(c as isize + dx as isize - 1, w) else {
                        continue;
                    };
                    let buf = out.as_mut_slice();
                    buf[rr * w + cc] += k * g;
                }
            }
        }
    }
    out
}

/// Signed directional gradients of `img` under the given padding.
pub fn sobel(img: &GrayPlane, pad: PaddingMode) -> GradientField {
    GradientField {
        gx: correlate3(img, &KERNEL_X, pad),
        gy: correlate3(img, &KERNEL_Y, pad),
    }
}

/// Adjoint of [`sobel`]: pulls a cotangent field back to image space.
pub fn sobel_adjoint(field: &GradientField, pad: PaddingMode) -> GrayPlane {
    let ax = correlate3_adjoint(&field.gx, &KERNEL_X, pad);
    let ay = correlate3_adjoint(&field.gy, &KERNEL_Y, pad);
    ax.zip_map(&ay, |a, b| a + b)
        .expect("adjoint components share the field's shape")
}

/// Per-pixel `|gx| + |gy|`, the scalar edge strength of the magnitude losses.
pub fn l1_magnitude(field: &GradientField) -> GrayPlane {
    field
        .gx
        .zip_map(&field.gy, |x, y| x.abs() + y.abs())
        .expect("field components share one shape")
}
