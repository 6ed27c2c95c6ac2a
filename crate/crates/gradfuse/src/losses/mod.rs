//! Loss terms, the composite objective, and its configuration.
//!
//! The composite objective is `w_ssim * L_ssim + w_int * L_int + w_grad *
//! L_grad`, where the gradient term is selected by [`LossVariant`]:
//!
//! * `Ori`    — no gradient term (structural + intensity only, weights 3:7)
//! * `Grad`   — magnitude-matching baseline
//! * `Tcmoa`  — signed summed-response loss
//! * `Ours`   — direction-aware multi-scale loss
//!
//! Every loss returns its value together with the analytic gradient with
//! respect to the fused plane, so the optimizer needs no autodiff.

mod gradient;
mod intensity;
mod ssim;

pub use gradient::{baseline_grad_loss, direction_aware_grad_loss, tcmoa_grad_loss};
pub use intensity::intensity_loss;
pub use ssim::{ssim_index, ssim_loss};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gradients::PaddingMode;
use crate::plane::GrayPlane;

/// Subgradient convention shared by all L1 terms: `sign(0) = 0`.
#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Which gradient term the composite objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossVariant {
    /// Structural + intensity only (weights 3:7), no gradient term.
    Ori,
    /// Magnitude-matching gradient baseline.
    Grad,
    /// Signed summed-response gradient loss.
    Tcmoa,
    /// Direction-aware multi-scale gradient loss.
    #[default]
    Ours,
}

impl LossVariant {
    pub const ALL: [LossVariant; 4] = [
        LossVariant::Ori,
        LossVariant::Grad,
        LossVariant::Tcmoa,
        LossVariant::Ours,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossVariant::Ori => "ori",
            LossVariant::Grad => "grad",
            LossVariant::Tcmoa => "tcmoa",
            LossVariant::Ours => "ours",
        }
    }
}

impl fmt::Display for LossVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ori" => Ok(LossVariant::Ori),
            "grad" => Ok(LossVariant::Grad),
            "tcmoa" => Ok(LossVariant::Tcmoa),
            "ours" => Ok(LossVariant::Ours),
            other => Err(Error::InvalidConfig(format!(
                "unknown loss variant '{other}' (expected ori|grad|tcmoa|ours)"
            ))),
        }
    }
}

/// Scalar loss plus the gradient plane `dL/d(fused)`.
#[derive(Debug, Clone)]
pub struct LossResult {
    pub value: f64,
    pub grad: GrayPlane,
}

/// Composite-loss configuration: variant, term weights, scale pyramid, and
/// Sobel padding.
#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    pub variant: LossVariant,
    pub w_ssim: f64,
    pub w_int: f64,
    pub w_grad: f64,
    /// Pyramid scales, each in `(0,1]`, distinct, containing 1.0.
    pub scales: Vec<f64>,
    /// Per-scale weights, positive, summing to 1.
    pub scale_weights: Vec<f64>,
    pub pad: PaddingMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            variant: LossVariant::Ours,
            w_ssim: 1.5,
            w_int: 7.0,
            w_grad: 1.5,
            scales: vec![1.0, 0.5, 0.25],
            scale_weights: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            pad: PaddingMode::Zero,
        }
    }
}

impl LossConfig {
    /// The standard configuration for a variant: `Ori` runs structural +
    /// intensity at 3:7, the gradient variants run at 1.5:7:1.5.
    pub fn for_variant(variant: LossVariant) -> Self {
        let mut cfg = Self {
            variant,
            ..Self::default()
        };
        if variant == LossVariant::Ori {
            cfg.w_ssim = 3.0;
            cfg.w_grad = 0.0;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w_ssim", self.w_ssim),
            ("w_int", self.w_int),
            ("w_grad", self.w_grad),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a nonnegative finite number, got {v}"
                )));
            }
        }
        if self.scales.is_empty() {
            return Err(Error::InvalidConfig("scales must be non-empty".into()));
        }
        if self.scales.len() != self.scale_weights.len() {
            return Err(Error::InvalidConfig(format!(
                "{} scales but {} scale_weights",
                self.scales.len(),
                self.scale_weights.len()
            )));
        }
        for &s in &self.scales {
            if !s.is_finite() || s <= 0.0 || s > 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "scale {s} out of range (0, 1]"
                )));
            }
        }
        for (i, &a) in self.scales.iter().enumerate() {
            if self.scales[i + 1..].iter().any(|&b| a == b) {
                return Err(Error::InvalidConfig(format!("duplicate scale {a}")));
            }
        }
        if !self.scales.contains(&1.0) {
            return Err(Error::InvalidConfig(
                "scales must include the native scale 1.0".into(),
            ));
        }
        for &w in &self.scale_weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "scale weight {w} must be positive"
                )));
            }
        }
        let sum: f64 = self.scale_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "scale weights sum to {sum}, expected 1 within 1e-12"
            )));
        }
        Ok(())
    }

    /// Parses the plain-text key-value config format. Unknown keys error;
    /// missing keys keep the chosen variant's standard values.
    ///
    /// ```text
    /// variant = ours
    /// w_ssim = 1.5
    /// w_int = 7
    /// w_grad = 1.5
    /// scales = 1,0.5,0.25
    /// scale_weights = 0.5,0.309,0.191
    /// padding = zero
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        LossConfigOverrides::parse(text)?.resolve()
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_config_str(&text)
    }

    /// The config serialized back into the key-value format.
    pub fn to_config_string(&self) -> String {
        let join = |xs: &[f64]| {
            xs.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "variant = {}\nw_ssim = {}\nw_int = {}\nw_grad = {}\nscales = {}\nscale_weights = {}\npadding = {}\n",
            self.variant,
            self.w_ssim,
            self.w_int,
            self.w_grad,
            join(&self.scales),
            join(&self.scale_weights),
            self.pad.name()
        )
    }
}

/// Presence-aware loss settings: `None` means "not specified here". A
/// config file and CLI flags each produce one of these; [`merge`] layers
/// them and [`resolve`] fills the gaps from the variant's standard values.
///
/// [`merge`]: LossConfigOverrides::merge
/// [`resolve`]: LossConfigOverrides::resolve
#[derive(Debug, Clone, Default)]
pub struct LossConfigOverrides {
    pub variant: Option<LossVariant>,
    pub w_ssim: Option<f64>,
    pub w_int: Option<f64>,
    pub w_grad: Option<f64>,
    pub scales: Option<Vec<f64>>,
    pub scale_weights: Option<Vec<f64>>,
    pub pad: Option<PaddingMode>,
}

impl LossConfigOverrides {
    /// Parses the key-value config format, recording which keys appeared.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "variant" => o.variant = Some(value.parse()?),
                "w_ssim" => o.w_ssim = Some(parse_number(key, value)?),
                "w_int" => o.w_int = Some(parse_number(key, value)?),
                "w_grad" => o.w_grad = Some(parse_number(key, value)?),
                "scales" => o.scales = Some(parse_list(key, value)?),
                "scale_weights" => o.scale_weights = Some(parse_list(key, value)?),
                "padding" => o.pad = Some(value.parse()?),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Layers `stronger` on top of `self`: its `Some` fields win.
    pub fn merge(self, stronger: Self) -> Self {
        Self {
            variant: stronger.variant.or(self.variant),
            w_ssim: stronger.w_ssim.or(self.w_ssim),
            w_int: stronger.w_int.or(self.w_int),
            w_grad: stronger.w_grad.or(self.w_grad),
            scales: stronger.scales.or(self.scales),
            scale_weights: stronger.scale_weights.or(self.scale_weights),
            pad: stronger.pad.or(self.pad),
        }
    }

    /// Builds the final config. Unspecified fields take the variant's
    /// standard values; scales given without weights get equal weights.
    pub fn resolve(self) -> Result<LossConfig> {
        let mut cfg = LossConfig::for_variant(self.variant.unwrap_or_default());
        if let Some(v) = self.w_ssim {
            cfg.w_ssim = v;
        }
        if let Some(v) = self.w_int {
            cfg.w_int = v;
        }
        if let Some(v) = self.w_grad {
            cfg.w_grad = v;
        }
        match (self.scales, self.scale_weights) {
            (Some(scales), Some(weights)) => {
                cfg.scales = scales;
                cfg.scale_weights = weights;
            }
            (Some(scales), None) => {
                let k = scales.len().max(1);
                cfg.scale_weights = vec![1.0 / k as f64; k];
                cfg.scales = scales;
            }
            (None, Some(weights)) => {
                cfg.scale_weights = weights;
            }
            (None, None) => {}
        }
        if let Some(p) = self.pad {
            cfg.pad = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::InvalidConfig(format!("{key}: '{value}' is not a number")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_number(key, part.trim()))
        .collect()
}

/// The full objective: weighted SSIM + intensity + selected gradient term,
/// with the matching weighted gradient plane.
pub fn composite_loss(
    fused: &GrayPlane,
    vis_y: &GrayPlane,
    ir: &GrayPlane,
    cfg: &LossConfig,
) -> Result<LossResult> {
    cfg.validate()?;

    let ssim = ssim_loss(fused, vis_y, ir)?;
    let int = intensity_loss(fused, vis_y, ir)?;
    let grad_term = match cfg.variant {
        LossVariant::Ori => None,
        LossVariant::Grad => Some(baseline_grad_loss(fused, vis_y, ir, cfg.pad)?),
        LossVariant::Tcmoa => Some(tcmoa_grad_loss(fused, vis_y, ir, cfg.pad)?),
        LossVariant::Ours => Some(direction_aware_grad_loss(
            fused,
            vis_y,
            ir,
            &cfg.scales,
            &cfg.scale_weights,
            cfg.pad,
        )?),
    };

    let mut value = cfg.w_ssim * ssim.value + cfg.w_int * int.value;
    let mut grad = GrayPlane::zeros(fused.height(), fused.width());
    {
        let buf = grad.as_mut_slice();
        for i in 0..buf.len() {
            buf[i] = cfg.w_ssim * ssim.grad.as_slice()[i] + cfg.w_int * int.grad.as_slice()[i];
        }
    }
    if let Some(g) = grad_term {
        value += cfg.w_grad * g.value;
        let buf = grad.as_mut_slice();
        for i in 0..buf.len() {
            buf[i] += cfg.w_grad * g.grad.as_slice()[i];
        }
    }
    Ok(LossResult { value, grad })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(h: usize, w: usize, salt: u64) -> GrayPlane {
        let mut state = salt.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        GrayPlane::from_fn(h, w, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn defaults_follow_the_standard_weighting() {
        let cfg = LossConfig::default();
        assert_eq!(cfg.variant, LossVariant::Ours);
        assert_eq!((cfg.w_ssim, cfg.w_int, cfg.w_grad), (1.5, 7.0, 1.5));
        assert_eq!(cfg.scales, vec![1.0, 0.5, 0.25]);
        assert!(cfg.validate().is_ok());

        let ori = LossConfig::for_variant(LossVariant::Ori);
        assert_eq!((ori.w_ssim, ori.w_int, ori.w_grad), (3.0, 7.0, 0.0));
    }

    #[test]
    fn golden_ratio_weights_are_accepted() {
        let cfg = LossConfig {
            scale_weights: vec![0.500, 0.309, 0.191],
            ..LossConfig::default()
        };
        assert!(cfg.validate().is_ok());
        let sum: f64 = cfg.scale_weights.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = LossConfig::default();
        cfg.scale_weights = vec![0.5, 0.5];
        assert!(cfg.validate().is_err()); // length mismatch

        let mut cfg = LossConfig::default();
        cfg.scales = vec![0.5, 0.25, 0.125];
        cfg.scale_weights = vec![1.0 / 3.0; 3];
        assert!(cfg.validate().is_err()); // missing native scale

        let mut cfg = LossConfig::default();
        cfg.scale_weights = vec![0.5, 0.3, 0.3];
        assert!(cfg.validate().is_err()); // weights don't normalize

        let mut cfg = LossConfig::default();
        cfg.w_int = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_text_round_trips() {
        let cfg = LossConfig {
            variant: LossVariant::Tcmoa,
            w_ssim: 2.0,
            w_int: 6.0,
            w_grad: 2.0,
            scales: vec![1.0, 0.5],
            scale_weights: vec![0.5, 0.5],
            pad: PaddingMode::Reflect,
        };
        let text = cfg.to_config_string();
        let back = LossConfig::from_config_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn config_parse_reports_unknown_keys_and_bad_values() {
        assert!(LossConfig::from_config_str("nonsense = 3").is_err());
        assert!(LossConfig::from_config_str("w_ssim = not_a_number").is_err());
        assert!(LossConfig::from_config_str("padding = wrap").is_err());
        let partial = LossConfig::from_config_str("w_int = 5\n# comment\n").unwrap();
        assert_eq!(partial.w_int, 5.0);
        assert_eq!(partial.w_ssim, 1.5);
    }

    #[test]
    fn ori_ignores_the_gradient_term() {
        let fused = textured(16, 16, 1);
        let vis = textured(16, 16, 2);
        let ir = textured(16, 16, 3);
        let mut cfg = LossConfig::for_variant(LossVariant::Ori);
        let a = composite_loss(&fused, &vis, &ir, &cfg).unwrap();
        // Changing padding (which only affects the gradient term) is a no-op.
        cfg.pad = PaddingMode::Reflect;
        let b = composite_loss(&fused, &vis, &ir, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        // And the value decomposes into ssim + intensity alone.
        let s = ssim_loss(&fused, &vis, &ir).unwrap();
        let i = intensity_loss(&fused, &vis, &ir).unwrap();
        assert!((a.value - (3.0 * s.value + 7.0 * i.value)).abs() < 1e-12);
    }

    #[test]
    fn composite_vanishes_on_identical_planes_for_all_variants() {
        let img = textured(16, 16, 9);
        for variant in LossVariant::ALL {
            let cfg = LossConfig::for_variant(variant);
            let res = composite_loss(&img, &img, &img, &cfg).unwrap();
            assert_eq!(res.value, 0.0, "{variant}");
            assert!(res.grad.as_slice().iter().all(|&g| g.abs() == 0.0));
        }
    }

    #[test]
    fn composite_gradient_matches_finite_differences() {
        let fused = textured(16, 16, 31);
        let vis = textured(16, 16, 32);
        let ir = textured(16, 16, 33);
        for variant in LossVariant::ALL {
            let mut cfg = LossConfig::for_variant(variant);
            cfg.scales = vec![1.0, 0.5];
            cfg.scale_weights = vec![0.5, 0.5];
            let res = composite_loss(&fused, &vis, &ir, &cfg).unwrap();
            let step = 1e-5;
            let mut agree = 0usize;
            let mut total = 0usize;
            for idx in (0..fused.len()).step_by(11) {
                let mut plus = fused.clone();
                plus.as_mut_slice()[idx] += step;
                let mut minus = fused.clone();
                minus.as_mut_slice()[idx] -= step;
                let numeric = (composite_loss(&plus, &vis, &ir, &cfg).unwrap().value
                    - composite_loss(&minus, &vis, &ir, &cfg).unwrap().value)
                    / (2.0 * step);
                let analytic = res.grad.as_slice()[idx];
                let denom = numeric.abs().max(analytic.abs());
                if denom < 1e-8 {
                    continue;
                }
                total += 1;
                if (numeric - analytic).abs() / denom < 1e-4 {
                    agree += 1;
                }
            }
            assert!(total > 5, "{variant}: too few checkable coordinates");
            // Subgradient kinks can spoil isolated coordinates.
            assert!(
                agree as f64 >= 0.95 * total as f64,
                "{variant}: {agree}/{total} coordinates agree"
            );
        }
    }
}
