//! Intensity reconstruction loss: L1 distance to the per-pixel maximum of
//! the two sources.

use crate::error::Result;
use crate::losses::{sign, LossResult};
use crate::plane::GrayPlane;

/// `mean |fused - max(vis_y, ir)|` with its subgradient.
///
/// The gradient is `sign(fused - target)/N` per pixel, with `sign(0) = 0`.
pub fn intensity_loss(fused: &GrayPlane, vis_y: &GrayPlane, ir: &GrayPlane) -> Result<LossResult> {
    fused.ensure_same_dims(vis_y)?;
    fused.ensure_same_dims(ir)?;

    let n = fused.len() as f64;
    let mut value = 0.0;
    let mut grad = GrayPlane::zeros(fused.height(), fused.width());
    let buf = grad.as_mut_slice();
    for i in 0..fused.len() {
        let target = vis_y.as_slice()[i].max(ir.as_slice()[i]);
        let d = fused.as_slice()[i] - target;
        value += d.abs();
        buf[i] = sign(d) / n;
    }
    Ok(LossResult {
        value: value / n,
        grad,
    })
}
