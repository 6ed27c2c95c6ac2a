//! Deterministic synthetic IR/VIS pairs for experiments and tests.
//!
//! Each generator isolates one failure mode of scalar gradient losses:
//!
//! * `CrossEdge` — a vertical step in the visible plane and a horizontal step
//!   in the infrared plane; a fused result must keep both.
//! * `AntiDiagonalRamp` — a visible plane linear in `(col - row)` whose Sobel
//!   responses satisfy `gx = -gy`, so the summed response cancels exactly
//!   while the per-axis energy is `2|a|`; paired with a flat infrared plane.
//! * `OpposingPolarity` — step edges of opposite sign at the same location,
//!   the infrared one stronger; per-axis magnitude gating must keep the
//!   stronger edge's negative sign.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::plane::GrayPlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    CrossEdge,
    AntiDiagonalRamp,
    OpposingPolarity,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] = [
        SyntheticKind::CrossEdge,
        SyntheticKind::AntiDiagonalRamp,
        SyntheticKind::OpposingPolarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::CrossEdge => "cross_edge",
            SyntheticKind::AntiDiagonalRamp => "anti_diagonal_ramp",
            SyntheticKind::OpposingPolarity => "opposing_polarity",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cross_edge" | "crossedge" => Ok(SyntheticKind::CrossEdge),
            "anti_diagonal_ramp" | "antidiagonalramp" => Ok(SyntheticKind::AntiDiagonalRamp),
            "opposing_polarity" | "opposingpolarity" => Ok(SyntheticKind::OpposingPolarity),
            other => Err(Error::InvalidConfig(format!(
                "unknown synthetic pair '{other}'"
            ))),
        }
    }
}

/// Builds the `(ir, vis_y)` pair for `kind` at `size x size` pixels.
///
/// `size >= 16`, `amplitude` in `(0, 1]`. All outputs lie in `[0,1]` and the
/// generators are fully deterministic.
pub fn make_synthetic_pair(
    kind: SyntheticKind,
    size: usize,
    amplitude: f64,
) -> Result<(GrayPlane, GrayPlane)> {
    if size < 16 {
        return Err(Error::InvalidConfig(format!(
            "synthetic pair size {size} is below the minimum 16"
        )));
    }
    if !amplitude.is_finite() || amplitude <= 0.0 || amplitude > 1.0 {
        return Err(Error::InvalidConfig(format!(
            "amplitude {amplitude} out of range (0, 1]"
        )));
    }

    let half = size / 2;
    match kind {
        SyntheticKind::CrossEdge => {
            let lo = 0.5 - amplitude / 2.0;
            let hi = 0.5 + amplitude / 2.0;
            let vis = GrayPlane::from_fn(size, size, |_, c| if c < half { lo } else { hi });
            let ir = GrayPlane::from_fn(size, size, |r, _| if r < half { lo } else { hi });
            Ok((ir, vis))
        }
        SyntheticKind::AntiDiagonalRamp => {
            let denom = (2 * (size - 1)) as f64;
            let vis = GrayPlane::from_fn(size, size, |r, c| {
                amplitude * (c as f64 - r as f64 + (size - 1) as f64) / denom
            });
            let ir = GrayPlane::filled(size, size, amplitude / 2.0);
            Ok((ir, vis))
        }
        SyntheticKind::OpposingPolarity => {
            // vis steps up by amplitude/2, ir steps down by amplitude at the
            // same column.
            let vis = GrayPlane::from_fn(size, size, |_, c| {
                if c < half {
                    0.5 - amplitude / 4.0
                } else {
                    0.5 + amplitude / 4.0
                }
            });
            let ir = GrayPlane::from_fn(size, size, |_, c| {
                if c < half {
                    0.5 + amplitude / 2.0
                } else {
                    0.5 - amplitude / 2.0
                }
            });
            Ok((ir, vis))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradients::{sobel, PaddingMode};

    #[test]
    fn anti_diagonal_ramp_has_cancelling_axes() {
        let (_, vis) = make_synthetic_pair(SyntheticKind::AntiDiagonalRamp, 16, 0.8).unwrap();
        let f = sobel(&vis, PaddingMode::Zero);
        for r in 1..15 {
            for c in 1..15 {
                assert!((f.gx.get(r, c) + f.gy.get(r, c)).abs() < 1e-13);
                assert!(f.gx.get(r, c).abs() > 0.0);
            }
        }
    }

    #[test]
    fn cross_edge_planes_are_transposes() {
        let (ir, vis) = make_synthetic_pair(SyntheticKind::CrossEdge, 20, 0.6).unwrap();
        for r in 0..20 {
            for c in 0..20 {
                assert_eq!(vis.get(r, c), ir.get(c, r));
            }
        }
    }

    // With magnitudes (0.3, -0.6) the per-axis magnitude gate must select the
    // infrared edge and keep its negative sign.
    #[test]
    fn opposing_polarity_selects_the_stronger_negative_edge() {
        let (ir, vis) = make_synthetic_pair(SyntheticKind::OpposingPolarity, 16, 0.6).unwrap();
        assert!((vis.get(0, 8) - vis.get(0, 7) - 0.3).abs() < 1e-12);
        assert!((ir.get(0, 8) - ir.get(0, 7) + 0.6).abs() < 1e-12);

        let fv = sobel(&vis, PaddingMode::Zero);
        let fi = sobel(&ir, PaddingMode::Zero);
        let mut saw_edge = false;
        for r in 1..15 {
            for c in 1..15 {
                let v = fv.gx.get(r, c);
                let i = fi.gx.get(r, c);
                let sel = if v.abs() >= i.abs() { v } else { i };
                if i.abs() > 1e-12 {
                    // ir's response is twice vis's at the shared edge.
                    assert!(i.abs() > v.abs());
                    assert!(sel < 0.0, "selected gradient must keep ir's sign");
                    saw_edge = true;
                }
            }
        }
        assert!(saw_edge);
    }

    #[test]
    fn generators_validate_arguments() {
        assert!(make_synthetic_pair(SyntheticKind::CrossEdge, 8, 0.5).is_err());
        assert!(make_synthetic_pair(SyntheticKind::CrossEdge, 16, 0.0).is_err());
        assert!(make_synthetic_pair(SyntheticKind::CrossEdge, 16, 1.2).is_err());
    }

    #[test]
    fn outputs_stay_inside_unit_range() {
        for kind in SyntheticKind::ALL {
            let (ir, vis) = make_synthetic_pair(kind, 16, 1.0).unwrap();
            for p in [&ir, &vis] {
                assert!(p.min_value() >= 0.0 && p.max_value() <= 1.0);
            }
        }
    }
}
