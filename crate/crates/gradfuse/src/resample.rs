//! Bilinear downsampling and its exact adjoint.
//!
//! Sampling uses the half-pixel-center convention: output pixel `i` reads the
//! input at `(i + 0.5) / scale - 0.5`, with source coordinates clamped at the
//! borders. The adjoint scatters through the identical tap weights, so
//! `<resize(u), v> == <u, resize_adjoint(v)>` up to rounding.

use crate::error::{Error, Result};
use crate::plane::{GrayPlane, MIN_SIDE};

/// One axis of bilinear sampling: the two source indices and their weights.
#[derive(Debug, Clone, Copy)]
struct Taps {
    lo: usize,
    hi: usize,
    w_lo: f64,
    w_hi: f64,
}

fn axis_taps(out_index: usize, scale: f64, in_len: usize) -> Taps {
    let src = ((out_index as f64 + 0.5) / scale - 0.5).clamp(0.0, (in_len - 1) as f64);
    let lo = src.floor() as usize;
    let hi = (lo + 1).min(in_len - 1);
    let frac = src - lo as f64;
    Taps {
        lo,
        hi,
        w_lo: 1.0 - frac,
        w_hi: frac,
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !scale.is_finite() || scale <= 0.0 || scale > 1.0 {
        return Err(Error::InvalidScale { scale });
    }
    Ok(())
}

/// Output size for one axis, or an error when the scale would shrink the
/// plane below the 3-pixel minimum.
pub fn scaled_len(in_len: usize, scale: f64) -> Result<usize> {
    check_scale(scale)?;
    let out = (scale * in_len as f64).round() as usize;
    if out < MIN_SIDE {
        return Err(Error::ScaleTooAggressive {
            scale,
            height: in_len,
            width: in_len,
        });
    }
    Ok(out)
}

/// Bilinear resampling to `round(scale * dim)` per axis, `scale` in `(0, 1]`.
///
/// Output samples are convex combinations of input samples, so values stay
/// inside the input's range. `scale = 1` reproduces the input exactly.
pub fn resize_bilinear(img: &GrayPlane, scale: f64) -> Result<GrayPlane> {
    check_scale(scale)?;
    let (h, w) = (img.height(), img.width());
    let oh = (scale * h as f64).round() as usize;
    let ow = (scale * w as f64).round() as usize;
    if oh < MIN_SIDE || ow < MIN_SIDE {
        return Err(Error::ScaleTooAggressive {
            scale,
            height: h,
            width: w,
        });
    }

    let row_taps: Vec<Taps> = (0..oh).map(|i| axis_taps(i, scale, h)).collect();
    let col_taps: Vec<Taps> = (0..ow).map(|j| axis_taps(j, scale, w)).collect();

    let mut out = GrayPlane::zeros(oh, ow);
    for (i, rt) in row_taps.iter().enumerate() {
        for (j, ct) in col_taps.iter().enumerate() {
            let v = rt.w_lo * (ct.w_lo * img.get(rt.lo, ct.lo) + ct.w_hi * img.get(rt.lo, ct.hi))
                + rt.w_hi * (ct.w_lo * img.get(rt.hi, ct.lo) + ct.w_hi * img.get(rt.hi, ct.hi));
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Exact transpose of [`resize_bilinear`]: scatters each output sample back
/// to its four source taps with the forward weights.
///
/// `grad` must have the shape `resize_bilinear` would produce for a
/// `orig_height x orig_width` input at `scale`.
pub fn resize_bilinear_adjoint(
    grad: &GrayPlane,
    orig_height: usize,
    orig_width: usize,
    scale: f64,
) -> Result<GrayPlane> {
    check_scale(scale)?;
    let oh = (scale * orig_height as f64).round() as usize;
    let ow = (scale * orig_width as f64).round() as usize;
    if oh < MIN_SIDE || ow < MIN_SIDE {
        return Err(Error::ScaleTooAggressive {
            scale,
            height: orig_height,
            width: orig_width,
        });
    }
    if grad.height() != oh || grad.width() != ow {
        return Err(Error::DimensionMismatch {
            left_height: grad.height(),
            left_width: grad.width(),
            right_height: oh,
            right_width: ow,
        });
    }

    let row_taps: Vec<Taps> = (0..oh).map(|i| axis_taps(i, scale, orig_height)).collect();
    let col_taps: Vec<Taps> = (0..ow).map(|j| axis_taps(j, scale, orig_width)).collect();

    let mut out = GrayPlane::zeros(orig_height, orig_width);
    for (i, rt) in row_taps.iter().enumerate() {
        for (j, ct) in col_taps.iter().enumerate() {
            let g = grad.get(i, j);
            let buf = out.as_mut_slice();
            buf[rt.lo * orig_width + ct.lo] += rt.w_lo * ct.w_lo * g;
            buf[rt.lo * orig_width + ct.hi] += rt.w_lo * ct.w_hi * g;
            buf[rt.hi * orig_width + ct.lo] += rt.w_hi * ct.w_lo * g;
            buf[rt.hi * orig_width + ct.hi] += rt.w_hi * ct.w_hi * g;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scale_is_exact() {
        let img = GrayPlane::from_fn(5, 7, |r, c| (r * 7 + c) as f64 / 34.0);
        let out = resize_bilinear(&img, 1.0).unwrap();
        assert_eq!(img, out);
    }

    #[test]
    fn constant_plane_stays_constant() {
        let img = GrayPlane::filled(8, 6, 0.37);
        for &s in &[1.0, 0.75, 0.5] {
            let out = resize_bilinear(&img, s).unwrap();
            for &v in out.as_slice() {
                assert_eq!(v, 0.37);
            }
        }
    }

    #[test]
    fn rejects_too_aggressive_scale() {
        let img = GrayPlane::zeros(4, 4);
        assert!(matches!(
            resize_bilinear(&img, 0.5),
            Err(Error::ScaleTooAggressive { .. })
        ));
        assert!(matches!(
            resize_bilinear(&img, 0.0),
            Err(Error::InvalidScale { .. })
        ));
        assert!(matches!(
            resize_bilinear(&img, 1.5),
            Err(Error::InvalidScale { .. })
        ));
    }

    // 8x8 ramp at scale 0.5: output pixel i reads source 2i + 0.5, the mean
    // of rows/cols (2i, 2i+1). Expected values hand-evaluated from that rule.
    #[test]
    fn ramp_halving_matches_hand_samples() {
        let img = GrayPlane::from_fn(8, 8, |r, c| (8 * r + c) as f64 / 64.0);
        let out = resize_bilinear(&img, 0.5).unwrap();
        assert_eq!((out.height(), out.width()), (4, 4));
        for i in 0..4 {
            for j in 0..4 {
                let expect = (8.0 * (2.0 * i as f64 + 0.5) + (2.0 * j as f64 + 0.5)) / 64.0;
                assert!((out.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn output_range_is_bounded_by_input() {
        let img = GrayPlane::from_fn(9, 11, |r, c| ((r * 31 + c * 17) % 13) as f64 / 12.0);
        for &s in &[0.9, 0.61, 0.4] {
            let out = resize_bilinear(&img, s).unwrap();
            assert!(out.min_value() >= img.min_value() - 1e-15);
            assert!(out.max_value() <= img.max_value() + 1e-15);
        }
    }

    #[test]
    fn adjoint_identity_holds() {
        let img = GrayPlane::from_fn(7, 9, |r, c| ((r * 13 + c * 7) % 11) as f64 / 10.0);
        for &s in &[1.0, 0.7, 0.5] {
            let fwd = resize_bilinear(&img, s).unwrap();
            let probe = GrayPlane::from_fn(fwd.height(), fwd.width(), |r, c| {
                ((r * 5 + c * 3) % 7) as f64 / 6.0 - 0.4
            });
            let back = resize_bilinear_adjoint(&probe, 7, 9, s).unwrap();
            let lhs: f64 = fwd
                .as_slice()
                .iter()
                .zip(probe.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            let rhs: f64 = img
                .as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0),
                "scale {s}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn adjoint_rejects_wrong_grad_shape() {
        let grad = GrayPlane::zeros(4, 4);
        assert!(matches!(
            resize_bilinear_adjoint(&grad, 8, 8, 0.9),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
