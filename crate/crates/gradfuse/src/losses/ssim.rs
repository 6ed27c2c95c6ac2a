//! SSIM structural loss with an analytic backward pass.
//!
//! SSIM uses the standard 11x11 Gaussian window (sigma 1.5) and constants
//! C1 = 0.01^2, C2 = 0.03^2 on the `[0,1]` intensity range. Statistics are
//! taken over valid window positions only, so no padding convention enters.
//!
//! The derivative of the mean SSIM map with respect to the first image
//! decomposes per window into `c1 + c2*x_p + c3*y_p` with window-constant
//! coefficients; the gradient is then three Gaussian scatters. The grouping
//! of terms inside the coefficients is chosen so that bitwise-identical
//! inputs produce an exactly zero gradient, which the fixed-point behavior
//! of the optimizer relies on.

use crate::error::{Error, Result};
use crate::losses::LossResult;
use crate::plane::GrayPlane;

pub const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

fn gaussian_window() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let half = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        *v = (-((i as f64 - half).powi(2)) / (2.0 * SIGMA * SIGMA)).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid correlation with the window: H x W -> (H-10) x (W-10).
fn gauss_valid(data: &[f64], h: usize, w: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for j in 0..ow {
            let mut acc = 0.0;
            for (t, &kv) in k.iter().enumerate() {
                acc += kv * data[r * w + j + t];
            }
            rows[r * ow + j] = acc;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for i in 0..oh {
        for j in 0..ow {
            let mut acc = 0.0;
            for (t, &kv) in k.iter().enumerate() {
                acc += kv * rows[(i + t) * ow + j];
            }
            out[i * ow + j] = acc;
        }
    }
    out
}

/// Transpose of [`gauss_valid`]: scatters window coefficients back onto the
/// image support.
fn gauss_valid_adjoint(map: &[f64], h: usize, w: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut rows = vec![0.0; h * ow];
    for i in 0..oh {
        for j in 0..ow {
            let g = map[i * ow + j];
            for (t, &kv) in k.iter().enumerate() {
                rows[(i + t) * ow + j] += kv * g;
            }
        }
    }
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for j in 0..ow {
            let g = rows[r * ow + j];
            for (t, &kv) in k.iter().enumerate() {
                out[r * w + j + t] += kv * g;
            }
        }
    }
    out
}

/// Mean SSIM of `x` against `y` plus `d(mean SSIM)/dx`.
fn ssim_pair(x: &GrayPlane, y: &GrayPlane) -> (f64, Vec<f64>) {
    let (h, w) = (x.height(), x.width());
    let k = gaussian_window();
    let xs = x.as_slice();
    let ys = y.as_slice();

    let xx: Vec<f64> = xs.iter().map(|&v| v * v).collect();
    let yy: Vec<f64> = ys.iter().map(|&v| v * v).collect();
    let xy: Vec<f64> = xs.iter().zip(ys).map(|(&a, &b)| a * b).collect();

    let mx = gauss_valid(xs, h, w, &k);
    let my = gauss_valid(ys, h, w, &k);
    let mxx = gauss_valid(&xx, h, w, &k);
    let myy = gauss_valid(&yy, h, w, &k);
    let mxy = gauss_valid(&xy, h, w, &k);

    let n_win = mx.len();
    let mut ssim_sum = 0.0;
    let mut c1m = vec![0.0; n_win];
    let mut c2m = vec![0.0; n_win];
    let mut c3m = vec![0.0; n_win];
    for i in 0..n_win {
        let mu_x = mx[i];
        let mu_y = my[i];
        let var_x = mxx[i] - mu_x * mu_x;
        let var_y = myy[i] - mu_y * mu_y;
        let cov = mxy[i] - mu_x * mu_y;

        let a1 = 2.0 * (mu_x * mu_y) + C1;
        let a2 = 2.0 * cov + C2;
        let b1 = mu_x * mu_x + (mu_y * mu_y + C1);
        let b2 = var_x + (var_y + C2);
        let d = b1 * b2;
        let s = (a1 * a2) / d;
        ssim_sum += s;

        // Pairing fused-vs-reference terms keeps these exactly zero when
        // x and y are bitwise identical (then s == 1.0 exactly).
        c1m[i] = 2.0 * ((mu_y * a2 - s * (mu_x * b2)) + (s * (b1 * mu_x) - a1 * mu_y)) / d;
        c2m[i] = -(2.0 * (s * b1)) / d;
        c3m[i] = 2.0 * a1 / d;
    }

    let z1 = gauss_valid_adjoint(&c1m, h, w, &k);
    let z2 = gauss_valid_adjoint(&c2m, h, w, &k);
    let z3 = gauss_valid_adjoint(&c3m, h, w, &k);

    let nw = n_win as f64;
    let mut grad = vec![0.0; h * w];
    for p in 0..grad.len() {
        grad[p] = (z1[p] + xs[p] * z2[p] + ys[p] * z3[p]) / nw;
    }
    (ssim_sum / nw, grad)
}

/// Mean SSIM index of two planes over valid 11x11 windows.
pub fn ssim_index(a: &GrayPlane, b: &GrayPlane) -> Result<f64> {
    a.ensure_same_dims(b)?;
    check_window(a)?;
    Ok(ssim_pair(a, b).0)
}

/// `1 - (SSIM(fused, vis_y) + SSIM(fused, ir)) / 2` with its analytic
/// gradient with respect to the fused plane.
pub fn ssim_loss(fused: &GrayPlane, vis_y: &GrayPlane, ir: &GrayPlane) -> Result<LossResult> {
    fused.ensure_same_dims(vis_y)?;
    fused.ensure_same_dims(ir)?;
    check_window(fused)?;

    let (s_vis, g_vis) = ssim_pair(fused, vis_y);
    let (s_ir, g_ir) = ssim_pair(fused, ir);

    let mut grad = GrayPlane::zeros(fused.height(), fused.width());
    let buf = grad.as_mut_slice();
    for i in 0..buf.len() {
        buf[i] = -0.5 * (g_vis[i] + g_ir[i]);
    }
    Ok(LossResult {
        value: 1.0 - 0.5 * (s_vis + s_ir),
        grad,
    })
}

fn check_window(img: &GrayPlane) -> Result<()> {
    if img.height() < WINDOW || img.width() < WINDOW {
        return Err(Error::TooSmall {
            height: img.height(),
            width: img.width(),
            min_height: WINDOW,
            min_width: WINDOW,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(h: usize, w: usize, salt: u64) -> GrayPlane {
        let mut state = salt.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        GrayPlane::from_fn(h, w, |r, c| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = (state >> 11) as f64 / (1u64 << 53) as f64;
            0.5 + 0.3 * ((r as f64 / 5.0).sin() * (c as f64 / 7.0).cos()) + 0.1 * (noise - 0.5)
        })
    }

    #[test]
    fn identical_planes_have_unit_ssim_and_zero_loss() {
        let img = textured(16, 16, 5);
        assert_eq!(ssim_index(&img, &img).unwrap(), 1.0);
        let res = ssim_loss(&img, &img, &img).unwrap();
        assert_eq!(res.value, 0.0);
        assert!(res.grad.as_slice().iter().all(|&g| g == 0.0 || g == -0.0));
        assert!(res.grad.as_slice().iter().all(|&g| g.abs() == 0.0));
    }

    // Independent reference: a direct per-window 121-tap SSIM written from
    // the definition, no separable shortcuts.
    fn reference_ssim(x: &GrayPlane, y: &GrayPlane) -> f64 {
        let mut k2 = vec![0.0; WINDOW * WINDOW];
        let mut sum = 0.0;
        for i in 0..WINDOW {
            for j in 0..WINDOW {
                let di = i as f64 - 5.0;
                let dj = j as f64 - 5.0;
                let v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
                k2[i * WINDOW + j] = v;
                sum += v;
            }
        }
        for v in k2.iter_mut() {
            *v /= sum;
        }
        let (h, w) = (x.height(), x.width());
        let mut acc = 0.0;
        let mut count = 0usize;
        for r in 0..=h - WINDOW {
            for c in 0..=w - WINDOW {
                let (mut mx, mut my, mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..WINDOW {
                    for j in 0..WINDOW {
                        let kv = k2[i * WINDOW + j];
                        let xv = x.get(r + i, c + j);
                        let yv = y.get(r + i, c + j);
                        mx += kv * xv;
                        my += kv * yv;
                        mxx += kv * xv * xv;
                        myy += kv * yv * yv;
                        mxy += kv * xv * yv;
                    }
                }
                let vx = mxx - mx * mx;
                let vy = myy - my * my;
                let cov = mxy - mx * my;
                let s = ((2.0 * mx * my + C1) * (2.0 * cov + C2))
                    / ((mx * mx + my * my + C1) * (vx + vy + C2));
                acc += s;
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn shifted_plane_matches_reference_implementation() {
        let x = textured(32, 32, 9);
        let y = x.map(|v| (v + 0.07).min(1.0));
        let ours = ssim_index(&x, &y).unwrap();
        let reference = reference_ssim(&x, &y);
        assert!(ours < 1.0);
        assert!(
            (ours - reference).abs() < 1e-10,
            "ours {ours} vs reference {reference}"
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let fused = textured(16, 16, 1);
        let vis = textured(16, 16, 2);
        let ir = textured(16, 16, 3);
        let res = ssim_loss(&fused, &vis, &ir).unwrap();
        let step = 1e-5;
        let mut checked = 0;
        for idx in (0..fused.len()).step_by(7) {
            let mut plus = fused.clone();
            plus.as_mut_slice()[idx] += step;
            let mut minus = fused.clone();
            minus.as_mut_slice()[idx] -= step;
            let numeric = (ssim_loss(&plus, &vis, &ir).unwrap().value
                - ssim_loss(&minus, &vis, &ir).unwrap().value)
                / (2.0 * step);
            let analytic = res.grad.as_slice()[idx];
            let denom = numeric.abs().max(analytic.abs());
            if denom > 1e-8 {
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "idx {idx}: analytic {analytic} vs numeric {numeric}"
                );
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn too_small_images_are_rejected() {
        let img = GrayPlane::zeros(10, 16);
        assert!(matches!(
            ssim_loss(&img, &img, &img),
            Err(Error::TooSmall { .. })
        ));
    }
}
