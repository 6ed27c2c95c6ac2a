//! The three gradient-domain loss terms and their analytic backward passes.
//!
//! All three compare the fused image's Sobel responses against a target
//! assembled from the two sources, but differ in what they collapse:
//!
//! * [`baseline_grad_loss`] matches the scalar magnitude `|gx| + |gy|`
//!   against the element-wise max of the source magnitudes — all sign and
//!   orientation information is discarded.
//! * [`tcmoa_grad_loss`] keeps signs but sums the two axes into `gx + gy`
//!   before gating, so responses of opposite sign cancel: a plane linear in
//!   `(col - row)` has zero summed response despite edge energy `2|a|`.
//! * [`direction_aware_grad_loss`] gates each axis independently with the
//!   winner's sign kept, at every scale of a bilinear pyramid. This is the
//!   `ours` variant of the comparison tooling.
//!
//! Ties in all winner-take-all masks select the visible source. Masks are
//! constants during the backward pass; `sign(0) = 0` at the L1 kinks.

use crate::error::Result;
use crate::gradients::{l1_magnitude, sobel, sobel_adjoint, GradientField, PaddingMode};
use crate::losses::{sign, LossResult};
use crate::plane::GrayPlane;
use crate::resample::{resize_bilinear, resize_bilinear_adjoint};

/// Magnitude-matching loss: `mean | |grad f|_1 - max(|grad vis|_1, |grad ir|_1) |`.
pub fn baseline_grad_loss(
    fused: &GrayPlane,
    vis_y: &GrayPlane,
    ir: &GrayPlane,
    pad: PaddingMode,
) -> Result<LossResult> {
    fused.ensure_same_dims(vis_y)?;
    fused.ensure_same_dims(ir)?;

    let field_f = sobel(fused, pad);
    let mag_f = l1_magnitude(&field_f);
    let mag_v = l1_magnitude(&sobel(vis_y, pad));
    let mag_i = l1_magnitude(&sobel(ir, pad));

    let n = fused.len() as f64;
    let mut value = 0.0;
    let mut vx = GrayPlane::zeros(fused.height(), fused.width());
    let mut vy = GrayPlane::zeros(fused.height(), fused.width());
    for i in 0..fused.len() {
        let target = mag_v.as_slice()[i].max(mag_i.as_slice()[i]);
        let d = mag_f.as_slice()[i] - target;
        value += d.abs();
        // d|mag|/dgx = sign(gx), chained with the outer sign.
        let outer = sign(d) / n;
        vx.as_mut_slice()[i] = outer * sign(field_f.gx.as_slice()[i]);
        vy.as_mut_slice()[i] = outer * sign(field_f.gy.as_slice()[i]);
    }
    let grad = sobel_adjoint(&GradientField::new(vx, vy)?, pad);
    Ok(LossResult {
        value: value / n,
        grad,
    })
}

/// Signed summed-response loss: `mean |(gx_f + gy_f) - G*|` where `G*` is the
/// per-pixel winner (by `|gx + gy|`) of the two sources, sign kept.
pub fn tcmoa_grad_loss(
    fused: &GrayPlane,
    vis_y: &GrayPlane,
    ir: &GrayPlane,
    pad: PaddingMode,
) -> Result<LossResult> {
    fused.ensure_same_dims(vis_y)?;
    fused.ensure_same_dims(ir)?;

    let field_f = sobel(fused, pad);
    let field_v = sobel(vis_y, pad);
    let field_i = sobel(ir, pad);

    let n = fused.len() as f64;
    let mut value = 0.0;
    let mut delta = GrayPlane::zeros(fused.height(), fused.width());
    for i in 0..fused.len() {
        let g_f = field_f.gx.as_slice()[i] + field_f.gy.as_slice()[i];
        let g_v = field_v.gx.as_slice()[i] + field_v.gy.as_slice()[i];
        let g_i = field_i.gx.as_slice()[i] + field_i.gy.as_slice()[i];
        let target = if g_v.abs() >= g_i.abs() { g_v } else { g_i };
        let d = g_f - target;
        value += d.abs();
        delta.as_mut_slice()[i] = sign(d) / n;
    }
    // dG/dgx = dG/dgy = 1, so the same cotangent flows into both components.
    let grad = sobel_adjoint(&GradientField::new(delta.clone(), delta)?, pad);
    Ok(LossResult {
        value: value / n,
        grad,
    })
}

/// Per-pixel, per-axis winner-take-all targets for one scale: the source with
/// the larger absolute response wins, sign kept, ties to the visible source.
fn select_axis(vis: &GrayPlane, ir: &GrayPlane) -> GrayPlane {
    vis.zip_map(ir, |v, i| if v.abs() >= i.abs() { v } else { i })
        .expect("source fields share one shape")
}

/// Direction-aware multi-scale gradient loss (the `ours` variant).
///
/// For every scale the three planes are bilinearly resampled, Sobel fields
/// computed, per-axis sign-preserving targets selected, and the two axis MAEs
/// summed; scale contributions are combined with `scale_weights`. The
/// backward pass chains `sign -> sobel adjoint -> resize adjoint`.
pub fn direction_aware_grad_loss(
    fused: &GrayPlane,
    vis_y: &GrayPlane,
    ir: &GrayPlane,
    scales: &[f64],
    scale_weights: &[f64],
    pad: PaddingMode,
) -> Result<LossResult> {
    fused.ensure_same_dims(vis_y)?;
    fused.ensure_same_dims(ir)?;
    if scales.is_empty() || scales.len() != scale_weights.len() {
        return Err(crate::error::Error::InvalidConfig(format!(
            "scales ({}) and scale_weights ({}) must be non-empty and equal-length",
            scales.len(),
            scale_weights.len()
        )));
    }

    let (h, w) = (fused.height(), fused.width());
    let mut value = 0.0;
    let mut grad = GrayPlane::zeros(h, w);

    for (&scale, &weight) in scales.iter().zip(scale_weights) {
        let f_s = resize_bilinear(fused, scale)?;
        let v_s = resize_bilinear(vis_y, scale)?;
        let i_s = resize_bilinear(ir, scale)?;

        let field_f = sobel(&f_s, pad);
        let field_v = sobel(&v_s, pad);
        let field_i = sobel(&i_s, pad);

        let sel_x = select_axis(&field_v.gx, &field_i.gx);
        let sel_y = select_axis(&field_v.gy, &field_i.gy);

        let n = f_s.len() as f64;
        let mut scale_value = 0.0;
        let mut vx = GrayPlane::zeros(f_s.height(), f_s.width());
        let mut vy = GrayPlane::zeros(f_s.height(), f_s.width());
        for i in 0..f_s.len() {
            let dx = field_f.gx.as_slice()[i] - sel_x.as_slice()[i];
            let dy = field_f.gy.as_slice()[i] - sel_y.as_slice()[i];
            scale_value += dx.abs() + dy.abs();
            vx.as_mut_slice()[i] = sign(dx) / n;
            vy.as_mut_slice()[i] = sign(dy) / n;
        }
        value += weight * (scale_value / n);

        let back = sobel_adjoint(&GradientField::new(vx, vy)?, pad);
        let full = resize_bilinear_adjoint(&back, h, w, scale)?;
        let buf = grad.as_mut_slice();
        for (g, &b) in buf.iter_mut().zip(full.as_slice()) {
            *g += weight * b;
        }
    }

    Ok(LossResult { value, grad })
}
