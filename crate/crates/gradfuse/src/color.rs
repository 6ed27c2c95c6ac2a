//! RGB <-> YCrCb conversion (full-range BT.601).
//!
//! Fusion runs on the Y plane only; chroma is carried through untouched and
//! reattached for display. The matrix choice is the full-range BT.601
//! convention of the common image libraries.

use crate::plane::{GrayPlane, RgbImage, YCrCbImage};

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Converts an RGB image to YCrCb. Chroma planes are stored offset so that
/// 0.5 is the neutral value; all outputs are clamped to `[0,1]`.
pub fn rgb_to_ycrcb(img: &RgbImage) -> YCrCbImage {
    let n = img.r.len();
    let (h, w) = (img.height(), img.width());
    let mut y = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    for i in 0..n {
        let r = img.r.as_slice()[i];
        let g = img.g.as_slice()[i];
        let b = img.b.as_slice()[i];
        let luma = KR * r + KG * g + KB * b;
        y.push(luma.clamp(0.0, 1.0));
        cr.push((0.5 + 0.5 * (r - luma) / (1.0 - KR)).clamp(0.0, 1.0));
        cb.push((0.5 + 0.5 * (b - luma) / (1.0 - KB)).clamp(0.0, 1.0));
    }
    YCrCbImage {
        y: GrayPlane::from_vec(h, w, y).expect("shape preserved"),
        cr: GrayPlane::from_vec(h, w, cr).expect("shape preserved"),
        cb: GrayPlane::from_vec(h, w, cb).expect("shape preserved"),
    }
}

/// Algebraic inverse of [`rgb_to_ycrcb`], clamped to `[0,1]`.
///
/// Arbitrary (Y, Cr, Cb) triples — e.g. a fused Y plane with source chroma —
/// can fall outside the RGB gamut; clamping maps them to the nearest
/// representable color.
pub fn ycrcb_to_rgb(img: &YCrCbImage) -> RgbImage {
    let n = img.y.len();
    let (h, w) = (img.height(), img.width());
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let y = img.y.as_slice()[i];
        let cr = img.cr.as_slice()[i] - 0.5;
        let cb = img.cb.as_slice()[i] - 0.5;
        let red = y + 2.0 * (1.0 - KR) * cr;
        let blue = y + 2.0 * (1.0 - KB) * cb;
        let green = (y - KR * red - KB * blue) / KG;
        r.push(red.clamp(0.0, 1.0));
        g.push(green.clamp(0.0, 1.0));
        b.push(blue.clamp(0.0, 1.0));
    }
    RgbImage {
        r: GrayPlane::from_vec(h, w, r).expect("shape preserved"),
        g: GrayPlane::from_vec(h, w, g).expect("shape preserved"),
        b: GrayPlane::from_vec(h, w, b).expect("shape preserved"),
    }
}
