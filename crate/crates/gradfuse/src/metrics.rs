//! The six standard fusion-quality metrics: EN, MI, SD, SCD, VIF, Qabf.
//!
//! Conventions (pinned here and verified against independent loop oracles in
//! the test suite):
//! * Histogram metrics (EN, MI) bin `round(255*x)` into 256 bins, log base 2.
//! * SD is the population standard deviation on the 0-255 scale.
//! * SCD sums the Pearson correlations `corr(fused - ir, vis)` and
//!   `corr(fused - vis, ir)`; a zero-variance argument contributes 0.
//! * VIF is the pixel-domain variant: four scales, Gaussian windows of 17,
//!   9, 5, 3 taps (sigma = taps/5) with down-sampling by two between scales,
//!   noise variance 2 on the 0-255 scale, variance floor 1e-10, averaged
//!   over the two sources. Scales too small to fit a window are skipped.
//! * Qabf is the Xydeas-Petrovic edge-preservation measure with the standard
//!   sigmoid constants and edge-strength weighting.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::gradients::{sobel, PaddingMode};
use crate::plane::GrayPlane;

/// The six scalar metrics for one (fused, ir, vis) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Entropy, bits, in [0, 8].
    pub en: f64,
    /// Summed mutual information with both sources, bits, >= 0.
    pub mi: f64,
    /// Standard deviation on the 0-255 scale, >= 0.
    pub sd: f64,
    /// Sum of correlations of differences, in [-2, 2].
    pub scd: f64,
    /// Visual information fidelity ratio, >= 0.
    pub vif: f64,
    /// Edge preservation, in [0, 1].
    pub qabf: f64,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "path,en,mi,sd,scd,vif,qabf";

    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            label, self.en, self.mi, self.sd, self.scd, self.vif, self.qabf
        )
    }

    pub fn values(&self) -> [f64; 6] {
        [self.en, self.mi, self.sd, self.scd, self.vif, self.qabf]
    }

    /// Every metric rounded to three decimals, the presentation convention
    /// for averaged tables.
    pub fn rounded3(&self) -> MetricReport {
        let r = |v: f64| (v * 1000.0).round() / 1000.0;
        MetricReport {
            en: r(self.en),
            mi: r(self.mi),
            sd: r(self.sd),
            scd: r(self.scd),
            vif: r(self.vif),
            qabf: r(self.qabf),
        }
    }
}

/// Arithmetic mean of a non-empty set of reports.
pub fn mean_report(reports: &[MetricReport]) -> MetricReport {
    assert!(!reports.is_empty(), "cannot average zero reports");
    let n = reports.len() as f64;
    let mut acc = [0.0; 6];
    for r in reports {
        for (a, v) in acc.iter_mut().zip(r.values()) {
            *a += v;
        }
    }
    MetricReport {
        en: acc[0] / n,
        mi: acc[1] / n,
        sd: acc[2] / n,
        scd: acc[3] / n,
        vif: acc[4] / n,
        qabf: acc[5] / n,
    }
}

/// Computes all six metrics for one triple.
pub fn metric_report(fused: &GrayPlane, ir: &GrayPlane, vis_y: &GrayPlane) -> Result<MetricReport> {
    Ok(MetricReport {
        en: entropy(fused),
        mi: mutual_information(fused, ir, vis_y)?,
        sd: std_dev(fused),
        scd: scd(fused, ir, vis_y)?,
        vif: vif(fused, ir, vis_y)?,
        qabf: qabf(fused, ir, vis_y)?,
    })
}

#[inline]
fn bin256(x: f64) -> usize {
    (x * 255.0).round().clamp(0.0, 255.0) as usize
}

/// Shannon entropy of the 256-bin histogram of `round(255*x)`, in bits.
pub fn entropy(img: &GrayPlane) -> f64 {
    let mut hist = [0u64; 256];
    for &v in img.as_slice() {
        hist[bin256(v)] += 1;
    }
    let n = img.len() as f64;
    let mut h = 0.0;
    for &count in &hist {
        if count > 0 {
            let p = count as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Mutual information of two planes via a 256x256 joint histogram, in bits.
pub fn mutual_information_pair(a: &GrayPlane, b: &GrayPlane) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let mut joint = vec![0u64; 256 * 256];
    let mut ha = [0u64; 256];
    let mut hb = [0u64; 256];
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        let (i, j) = (bin256(x), bin256(y));
        joint[i * 256 + j] += 1;
        ha[i] += 1;
        hb[j] += 1;
    }
    let n = a.len() as f64;
    let mut mi = 0.0;
    for i in 0..256 {
        if ha[i] == 0 {
            continue;
        }
        for j in 0..256 {
            let c = joint[i * 256 + j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / n;
            let px = ha[i] as f64 / n;
            let py = hb[j] as f64 / n;
            mi += p * (p / (px * py)).log2();
        }
    }
    Ok(mi.max(0.0))
}

/// `MI(fused, ir) + MI(fused, vis_y)`.
pub fn mutual_information(fused: &GrayPlane, ir: &GrayPlane, vis_y: &GrayPlane) -> Result<f64> {
    Ok(mutual_information_pair(fused, ir)? + mutual_information_pair(fused, vis_y)?)
}

/// Population standard deviation of `255*x`.
pub fn std_dev(img: &GrayPlane) -> f64 {
    let n = img.len() as f64;
    let mean = img.as_slice().iter().sum::<f64>() / n * 255.0;
    let var = img
        .as_slice()
        .iter()
        .map(|&v| {
            let d = v * 255.0 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    var.sqrt()
}

/// Pearson correlation; 0 when either argument has zero variance.
fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Sum of correlations of differences:
/// `corr(fused - ir, vis_y) + corr(fused - vis_y, ir)`.
pub fn scd(fused: &GrayPlane, ir: &GrayPlane, vis_y: &GrayPlane) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vis_y)?;
    let d_ir: Vec<f64> = fused
        .as_slice()
        .iter()
        .zip(ir.as_slice())
        .map(|(&f, &i)| f - i)
        .collect();
    let d_vis: Vec<f64> = fused
        .as_slice()
        .iter()
        .zip(vis_y.as_slice())
        .map(|(&f, &v)| f - v)
        .collect();
    Ok(pearson(&d_ir, vis_y.as_slice()) + pearson(&d_vis, ir.as_slice()))
}

// ---------------------------------------------------------------------------
// VIF (pixel domain)
// ---------------------------------------------------------------------------

const VIF_MIN_SIDE: usize = 32;
const VIF_SIGMA_NSQ: f64 = 2.0;
const VIF_EPS: f64 = 1e-10;

struct Grid {
    h: usize,
    w: usize,
    v: Vec<f64>,
}

fn gaussian_1d(taps: usize, sigma: f64) -> Vec<f64> {
    let half = (taps as f64 - 1.0) / 2.0;
    let mut k: Vec<f64> = (0..taps)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid correlation with a symmetric Gaussian window.
fn filter_valid(g: &Grid, k: &[f64]) -> Grid {
    let taps = k.len();
    let oh = g.h - taps + 1;
    let ow = g.w - taps + 1;
    let mut rows = vec![0.0; g.h * ow];
    for r in 0..g.h {
        for j in 0..ow {
            let mut acc = 0.0;
            for (t, &kv) in k.iter().enumerate() {
                acc += kv * g.v[r * g.w + j + t];
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
    Grid {
        h: oh,
        w: ow,
        v: out,
    }
}

fn subsample2(g: &Grid) -> Grid {
    let oh = g.h.div_ceil(2);
    let ow = g.w.div_ceil(2);
    let mut v = Vec::with_capacity(oh * ow);
    for r in (0..g.h).step_by(2) {
        for c in (0..g.w).step_by(2) {
            v.push(g.v[r * g.w + c]);
        }
    }
    Grid { h: oh, w: ow, v }
}

/// Pixel-domain VIF of `dist` against the reference `reference`.
fn vif_pair(dist: &GrayPlane, reference: &GrayPlane) -> f64 {
    let to_grid = |p: &GrayPlane| Grid {
        h: p.height(),
        w: p.width(),
        v: p.as_slice().iter().map(|&x| x * 255.0).collect(),
    };
    let mut r = to_grid(reference);
    let mut d = to_grid(dist);

    let mut num = 0.0;
    let mut den = 0.0;
    for scale in 1..=4u32 {
        let taps = (1usize << (4 - scale + 1)) + 1; // 17, 9, 5, 3
        let k = gaussian_1d(taps, taps as f64 / 5.0);
        if scale > 1 {
            if r.h < taps || r.w < taps {
                break;
            }
            r = subsample2(&filter_valid(&r, &k));
            d = subsample2(&filter_valid(&d, &k));
        }
        if r.h < taps || r.w < taps {
            continue;
        }

        let mu1 = filter_valid(&r, &k);
        let mu2 = filter_valid(&d, &k);
        let rr = Grid {
            h: r.h,
            w: r.w,
            v: r.v.iter().map(|&x| x * x).collect(),
        };
        let dd = Grid {
            h: d.h,
            w: d.w,
            v: d.v.iter().map(|&x| x * x).collect(),
        };
        let rd = Grid {
            h: r.h,
            w: r.w,
            v: r.v.iter().zip(&d.v).map(|(&a, &b)| a * b).collect(),
        };
        let m_rr = filter_valid(&rr, &k);
        let m_dd = filter_valid(&dd, &k);
        let m_rd = filter_valid(&rd, &k);

        for i in 0..mu1.v.len() {
            let m1 = mu1.v[i];
            let m2 = mu2.v[i];
            let mut sigma1_sq = (m_rr.v[i] - m1 * m1).max(0.0);
            let sigma2_sq = (m_dd.v[i] - m2 * m2).max(0.0);
            let sigma12 = m_rd.v[i] - m1 * m2;

            let mut g = sigma12 / (sigma1_sq + VIF_EPS);
            let mut sv_sq = sigma2_sq - g * sigma12;
            if sigma1_sq < VIF_EPS {
                g = 0.0;
                sv_sq = sigma2_sq;
                sigma1_sq = 0.0;
            }
            if sigma2_sq < VIF_EPS {
                g = 0.0;
                sv_sq = 0.0;
            }
            if g < 0.0 {
                sv_sq = sigma2_sq;
                g = 0.0;
            }
            if sv_sq < VIF_EPS {
                sv_sq = VIF_EPS;
            }
            num += (1.0 + g * g * sigma1_sq / (sv_sq + VIF_SIGMA_NSQ)).ln();
            den += (1.0 + sigma1_sq / VIF_SIGMA_NSQ).ln();
        }
    }
    if den > 0.0 {
        num / den
    } else {
        // A reference with no information (flat plane) has nothing to
        // preserve; report zero fidelity rather than 0/0.
        0.0
    }
}

/// Pixel-domain visual information fidelity, averaged over the two sources.
pub fn vif(fused: &GrayPlane, ir: &GrayPlane, vis_y: &GrayPlane) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vis_y)?;
    if fused.height() < VIF_MIN_SIDE || fused.width() < VIF_MIN_SIDE {
        return Err(Error::TooSmall {
            height: fused.height(),
            width: fused.width(),
            min_height: VIF_MIN_SIDE,
            min_width: VIF_MIN_SIDE,
        });
    }
    Ok(0.5 * (vif_pair(fused, ir) + vif_pair(fused, vis_y)))
}

// ---------------------------------------------------------------------------
// Qabf (Xydeas-Petrovic edge preservation)
// ---------------------------------------------------------------------------

const QABF_GAMMA_G: f64 = 0.9994;
const QABF_KAPPA_G: f64 = -15.0;
const QABF_SIGMA_G: f64 = 0.5;
const QABF_GAMMA_A: f64 = 0.9879;
const QABF_KAPPA_A: f64 = -22.0;
const QABF_SIGMA_A: f64 = 0.8;

struct EdgeMap {
    strength: Vec<f64>,
    orientation: Vec<f64>,
}

// Reflect padding: zero padding would read every image border as a strong
// artificial edge and dominate the strength weighting.
fn edge_map(img: &GrayPlane) -> EdgeMap {
    let f = sobel(img, PaddingMode::Reflect);
    let mut strength = Vec::with_capacity(img.len());
    let mut orientation = Vec::with_capacity(img.len());
    for (&gx, &gy) in f.gx.as_slice().iter().zip(f.gy.as_slice()) {
        strength.push((gx * gx + gy * gy).sqrt());
        orientation.push(if gx == 0.0 { FRAC_PI_2 } else { (gy / gx).atan() });
    }
    EdgeMap {
        strength,
        orientation,
    }
}

/// Per-pixel preservation of one source's edges in the fused image.
fn edge_preservation(src: &EdgeMap, fused: &EdgeMap, i: usize) -> f64 {
    let gs = src.strength[i];
    let gf = fused.strength[i];
    let relative = if gs > gf {
        gf / gs
    } else if gs < gf {
        gs / gf
    } else if gs == 0.0 {
        0.0
    } else {
        1.0
    };
    let alignment = 1.0 - (src.orientation[i] - fused.orientation[i]).abs() / FRAC_PI_2;
    let qg = QABF_GAMMA_G / (1.0 + (QABF_KAPPA_G * (relative - QABF_SIGMA_G)).exp());
    let qa = QABF_GAMMA_A / (1.0 + (QABF_KAPPA_A * (alignment - QABF_SIGMA_A)).exp());
    qg * qa
}

/// Edge-based fusion quality in `[0,1]`: sigmoid-weighted preservation of
/// each source's edge strength and orientation, weighted by source strength.
pub fn qabf(fused: &GrayPlane, ir: &GrayPlane, vis_y: &GrayPlane) -> Result<f64> {
    fused.ensure_same_dims(ir)?;
    fused.ensure_same_dims(vis_y)?;

    let ef = edge_map(fused);
    let ea = edge_map(ir);
    let eb = edge_map(vis_y);

    let mut weighted = 0.0;
    let mut weights = 0.0;
    for i in 0..fused.len() {
        let qaf = edge_preservation(&ea, &ef, i);
        let qbf = edge_preservation(&eb, &ef, i);
        weighted += qaf * ea.strength[i] + qbf * eb.strength[i];
        weights += ea.strength[i] + eb.strength[i];
    }
    if weights > 0.0 {
        Ok(weighted / weights)
    } else {
        // No edges in either source: nothing to preserve.
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(h: usize, w: usize, salt: u64) -> GrayPlane {
        let mut state = salt.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        GrayPlane::from_fn(h, w, |r, c| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = (state >> 11) as f64 / (1u64 << 53) as f64;
            (0.5 + 0.35 * ((r as f64 / 6.0).sin() + (c as f64 / 9.0).cos()) / 2.0
                + 0.15 * (noise - 0.5))
                .clamp(0.0, 1.0)
        })
    }

    #[test]
    fn entropy_of_constant_plane_is_zero() {
        assert_eq!(entropy(&GrayPlane::filled(8, 8, 0.3)), 0.0);
    }

    #[test]
    fn entropy_of_two_equal_bins_is_one() {
        let img = GrayPlane::from_fn(8, 8, |r, _| if r < 4 { 0.2 } else { 0.8 });
        assert!((entropy(&img) - 1.0).abs() < 1e-12);
    }

    // 64 distinct bins with equal mass: entropy log2(64) = 6.
    #[test]
    fn entropy_of_64_distinct_bins_is_six() {
        let img = GrayPlane::from_fn(8, 8, |r, c| (4 * (8 * r + c)) as f64 / 255.0);
        assert!((entropy(&img) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn self_mi_equals_entropy() {
        let img = textured(16, 16, 3);
        let mi = mutual_information_pair(&img, &img).unwrap();
        assert!((mi - entropy(&img)).abs() < 1e-10);
    }

    #[test]
    fn constant_fused_has_zero_mi() {
        let flat = GrayPlane::filled(16, 16, 0.5);
        let a = textured(16, 16, 5);
        let b = textured(16, 16, 6);
        assert_eq!(mutual_information(&flat, &a, &b).unwrap(), 0.0);
    }

    #[test]
    fn mi_is_symmetric_in_the_sources() {
        let f = textured(16, 16, 7);
        let a = textured(16, 16, 8);
        let b = textured(16, 16, 9);
        let ab = mutual_information(&f, &a, &b).unwrap();
        let ba = mutual_information(&f, &b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn std_dev_pinned_cases() {
        assert!(std_dev(&GrayPlane::filled(8, 8, 0.77)) < 1e-9);
        let half = GrayPlane::from_fn(8, 8, |r, _| if r < 4 { 0.0 } else { 1.0 });
        assert!((std_dev(&half) - 127.5).abs() < 1e-12);
    }

    #[test]
    fn scd_is_two_for_additive_fusion() {
        // fused = ir + vis with values kept in range.
        let vis = textured(16, 16, 11).map(|v| v * 0.4);
        let ir = textured(16, 16, 12).map(|v| v * 0.4);
        let fused = vis.zip_map(&ir, |a, b| a + b).unwrap();
        let s = scd(&fused, &ir, &vis).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scd_zero_variance_term_contributes_nothing() {
        let vis = textured(16, 16, 13);
        let ir = textured(16, 16, 14);
        // fused == ir: the (fused - ir) term has zero variance and drops.
        let fused = ir.clone();
        let s = scd(&fused, &ir, &vis).unwrap();
        let d_vis: Vec<f64> = fused
            .as_slice()
            .iter()
            .zip(vis.as_slice())
            .map(|(&f, &v)| f - v)
            .collect();
        let expect = pearson(&d_vis, ir.as_slice());
        assert!((s - expect).abs() < 1e-12);
    }

    #[test]
    fn scd_is_symmetric_in_the_sources() {
        let f = textured(16, 16, 20);
        let a = textured(16, 16, 21);
        let b = textured(16, 16, 22);
        let ab = scd(&f, &a, &b).unwrap();
        let ba = scd(&f, &b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn vif_of_identical_planes_is_one() {
        let img = textured(64, 64, 31);
        let v = vif(&img, &img, &img).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "vif {v}");
    }

    #[test]
    fn vif_drops_under_blur() {
        let img = textured(64, 64, 33);
        // 3x3 box blur as the degradation.
        let blurred = GrayPlane::from_fn(64, 64, |r, c| {
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = (r as i64 + dr).clamp(0, 63) as usize;
                    let cc = (c as i64 + dc).clamp(0, 63) as usize;
                    acc += img.get(rr, cc);
                    cnt += 1.0;
                }
            }
            acc / cnt
        });
        let v = vif(&blurred, &img, &img).unwrap();
        assert!(v < 1.0, "vif {v}");
        assert!(v >= 0.0);
    }

    #[test]
    fn vif_rejects_small_images() {
        let img = GrayPlane::zeros(16, 16);
        assert!(matches!(
            vif(&img, &img, &img),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn qabf_self_fusion_reaches_the_measure_maximum() {
        let img = textured(32, 32, 41);
        let q = qabf(&img, &img, &img).unwrap();
        let qg_max = QABF_GAMMA_G / (1.0 + (QABF_KAPPA_G * (1.0 - QABF_SIGMA_G)).exp());
        let qa_max = QABF_GAMMA_A / (1.0 + (QABF_KAPPA_A * (1.0 - QABF_SIGMA_A)).exp());
        assert!((q - qg_max * qa_max).abs() < 1e-3, "qabf {q}");
    }

    #[test]
    fn qabf_of_constant_fused_is_near_zero() {
        let vis = textured(32, 32, 43);
        let ir = textured(32, 32, 44);
        let flat = GrayPlane::filled(32, 32, 0.5);
        let q = qabf(&flat, &ir, &vis).unwrap();
        assert!(q < 0.01, "qabf {q}");
    }

    #[test]
    fn qabf_stays_in_unit_interval() {
        for salt in 0..5 {
            let f = textured(16, 16, 100 + salt);
            let a = textured(16, 16, 200 + salt);
            let b = textured(16, 16, 300 + salt);
            let q = qabf(&f, &a, &b).unwrap();
            assert!((0.0..=1.0).contains(&q));
        }
    }

    #[test]
    fn report_rounding_is_three_decimals() {
        let r = MetricReport {
            en: 6.18849,
            mi: 3.09151,
            sd: 33.28449,
            scd: 1.4355,
            vif: 0.7605,
            qabf: 0.53949,
        };
        let rounded = r.rounded3();
        assert_eq!(rounded.en, 6.188);
        assert_eq!(rounded.mi, 3.092);
        assert_eq!(rounded.sd, 33.284);
        assert_eq!(rounded.qabf, 0.539);
    }
}
