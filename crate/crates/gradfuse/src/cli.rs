//! Command front end: fuse, eval, compare, and demo jobs.
//!
//! The thin binary parses flags into a [`JobSpec`] and calls [`run`]; tests
//! and embedders can construct specs directly. Directory inputs are paired
//! by matching filename stem across the ir/vis (and fused) directories;
//! output rows are ordered by stem.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gradients::{sobel, PaddingMode};
use crate::io::{load_image, save_gray, save_rgb, LoadedImage};
use crate::losses::{LossConfig, LossVariant};
use crate::metrics::{mean_report, metric_report, MetricReport};
use crate::optimizer::{direct_fuse, OptimizerConfig};
use crate::plane::GrayPlane;
use crate::synthetic::{make_synthetic_pair, SyntheticKind};
use crate::{color, resample};

pub const METRIC_NAMES: [&str; 6] = ["en", "mi", "sd", "scd", "vif", "qabf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Fuse,
    Eval,
    Compare,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format '{other}' (expected csv|markdown)"
            ))),
        }
    }
}

/// A fully resolved job: command, paths, and both configurations.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub command: CommandKind,
    pub ir_path: Option<PathBuf>,
    pub vis_path: Option<PathBuf>,
    pub fused_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub loss_cfg: LossConfig,
    pub opt_cfg: OptimizerConfig,
    /// Recombine the fused Y plane with the visible chroma and also write a
    /// color PNG (requires an RGB visible input).
    pub color: bool,
    pub format: OutputFormat,
    /// Side length of the synthetic demo pairs.
    pub demo_size: usize,
    /// Step amplitude of the synthetic demo pairs.
    pub demo_amplitude: f64,
}

impl JobSpec {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            ir_path: None,
            vis_path: None,
            fused_path: None,
            out_path: None,
            loss_cfg: LossConfig::default(),
            opt_cfg: OptimizerConfig::default(),
            color: false,
            format: OutputFormat::Csv,
            demo_size: 64,
            demo_amplitude: 0.8,
        }
    }
}

/// Runs the job. Ok(()) means every requested output was produced.
pub fn run(spec: &JobSpec) -> Result<()> {
    match spec.command {
        CommandKind::Fuse => cmd_fuse(spec),
        CommandKind::Eval => cmd_eval(spec),
        CommandKind::Compare => cmd_compare(spec),
        CommandKind::Demo => cmd_demo(spec),
    }
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Cli(format!("missing required path {flag}")))
}

/// One loaded source pair: grayscale ir, visible luma, and the visible
/// chroma planes when the input was RGB.
struct SourcePair {
    ir: GrayPlane,
    vis_y: GrayPlane,
    vis_chroma: Option<(GrayPlane, GrayPlane)>,
}

fn load_pair(ir_path: &Path, vis_path: &Path) -> Result<SourcePair> {
    let ir = load_image(ir_path)?.into_gray();
    let (vis_y, vis_chroma) = match load_image(vis_path)? {
        LoadedImage::Gray(p) => (p, None),
        LoadedImage::Rgb(rgb) => {
            let ycc = color::rgb_to_ycrcb(&rgb);
            (ycc.y, Some((ycc.cr, ycc.cb)))
        }
    };
    ir.ensure_same_dims(&vis_y)?;
    Ok(SourcePair {
        ir,
        vis_y,
        vis_chroma,
    })
}

/// PNG files in a directory, keyed by filename stem (sorted).
fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| Error::Read {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Pairs of same-stem files across the ir and vis directories. Unmatched
/// stems are reported on stderr and skipped.
fn paired_inputs(ir_dir: &Path, vis_dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let ir = png_stems(ir_dir)?;
    let mut vis = png_stems(vis_dir)?;
    let mut pairs = Vec::new();
    for (stem, ir_path) in ir {
        match vis.remove(&stem) {
            Some(vis_path) => pairs.push((stem, ir_path, vis_path)),
            None => eprintln!("warning: {}: no matching visible image, skipped", stem),
        }
    }
    for stem in vis.keys() {
        eprintln!("warning: {}: no matching infrared image, skipped", stem);
    }
    Ok(pairs)
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Fuses one loaded pair and writes the PNG(s) and the trace CSV.
fn fuse_to_files(pair: &SourcePair, out_png: &Path, spec: &JobSpec) -> Result<()> {
    let (fused, trace) = direct_fuse(&pair.ir, &pair.vis_y, &spec.loss_cfg, &spec.opt_cfg)?;
    if let Some(parent) = out_png.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    save_gray(out_png, &fused)?;
    trace.write_csv(out_png.with_extension("trace.csv"))?;
    if spec.color {
        let Some((cr, cb)) = &pair.vis_chroma else {
            return Err(Error::Cli(
                "--color requires an RGB visible input".to_string(),
            ));
        };
        let rgb = color::ycrcb_to_rgb(&crate::plane::YCrCbImage {
            y: fused.clone(),
            cr: cr.clone(),
            cb: cb.clone(),
        });
        let mut name = out_png
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("fused")
            .to_string();
        name.push_str("_color.png");
        save_rgb(out_png.with_file_name(name), &rgb)?;
    }
    Ok(())
}

fn cmd_fuse(spec: &JobSpec) -> Result<()> {
    let ir_path = require(&spec.ir_path, "--ir")?;
    let vis_path = require(&spec.vis_path, "--vis")?;
    let out_path = require(&spec.out_path, "--out")?;

    if ir_path.is_dir() {
        ensure_dir(out_path)?;
        for (stem, ir_file, vis_file) in paired_inputs(ir_path, vis_path)? {
            let pair = load_pair(&ir_file, &vis_file)?;
            fuse_to_files(&pair, &out_path.join(format!("{stem}.png")), spec)?;
        }
        Ok(())
    } else {
        let pair = load_pair(ir_path, vis_path)?;
        fuse_to_files(&pair, out_path, spec)
    }
}

/// Formats eval rows; directory runs get a full-precision `mean` row plus a
/// three-decimal `mean_3dp` presentation row.
fn eval_table(rows: &[(String, MetricReport)], format: OutputFormat) -> String {
    let with_mean = rows.len() > 1;
    let mean = if with_mean {
        Some(mean_report(&rows.iter().map(|(_, r)| *r).collect::<Vec<_>>()))
    } else {
        None
    };
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(MetricReport::CSV_HEADER);
            out.push('\n');
            for (label, report) in rows {
                out.push_str(&report.csv_row(label));
                out.push('\n');
            }
            if let Some(m) = mean {
                out.push_str(&m.csv_row("mean"));
                out.push('\n');
                out.push_str(&m.rounded3().csv_row("mean_3dp"));
                out.push('\n');
            }
            out
        }
        OutputFormat::Markdown => {
            let mut out = String::from("| path | en | mi | sd | scd | vif | qabf |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            let fmt_row = |label: &str, r: &MetricReport| {
                let v = r.rounded3();
                format!(
                    "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |\n",
                    label, v.en, v.mi, v.sd, v.scd, v.vif, v.qabf
                )
            };
            for (label, report) in rows {
                out.push_str(&fmt_row(label, report));
            }
            if let Some(m) = mean {
                out.push_str(&fmt_row("mean", &m));
            }
            out
        }
    }
}

fn cmd_eval(spec: &JobSpec) -> Result<()> {
    let fused_path = require(&spec.fused_path, "--fused")?;
    let ir_path = require(&spec.ir_path, "--ir")?;
    let vis_path = require(&spec.vis_path, "--vis")?;

    let mut rows = Vec::new();
    if fused_path.is_dir() {
        let fused_stems = png_stems(fused_path)?;
        let ir_stems = png_stems(ir_path)?;
        let vis_stems = png_stems(vis_path)?;
        for (stem, fused_file) in &fused_stems {
            let (Some(ir_file), Some(vis_file)) = (ir_stems.get(stem), vis_stems.get(stem))
            else {
                eprintln!("warning: {stem}: missing ir or vis counterpart, skipped");
                continue;
            };
            let fused = load_image(fused_file)?.into_gray();
            let pair = load_pair(ir_file, vis_file)?;
            fused.ensure_same_dims(&pair.ir)?;
            rows.push((stem.clone(), metric_report(&fused, &pair.ir, &pair.vis_y)?));
        }
    } else {
        let fused = load_image(fused_path)?.into_gray();
        let pair = load_pair(ir_path, vis_path)?;
        fused.ensure_same_dims(&pair.ir)?;
        let label = fused_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("fused")
            .to_string();
        rows.push((label, metric_report(&fused, &pair.ir, &pair.vis_y)?));
    }

    let table = eval_table(&rows, spec.format);
    print!("{table}");
    if let Some(out) = &spec.out_path {
        write_text(out, &table)?;
    }
    Ok(())
}

/// Metric rows per variant plus the per-metric winner.
pub struct CompareOutcome {
    pub rows: Vec<(LossVariant, MetricReport)>,
    pub failures: Vec<(LossVariant, String)>,
}

impl CompareOutcome {
    /// The winning variant per metric column (all six metrics are
    /// higher-is-better).
    pub fn best_per_metric(&self) -> [Option<LossVariant>; 6] {
        let mut best = [None; 6];
        for col in 0..6 {
            let mut top = f64::NEG_INFINITY;
            for (variant, report) in &self.rows {
                let v = report.values()[col];
                if v > top {
                    top = v;
                    best[col] = Some(*variant);
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,en,mi,sd,scd,vif,qabf\n");
        for (variant, report) in &self.rows {
            out.push_str(&report.csv_row(variant.name()));
            out.push('\n');
        }
        let best = self.best_per_metric();
        out.push_str("best");
        for b in best {
            let _ = write!(out, ",{}", b.map_or("-", |v| v.name()));
        }
        out.push('\n');
        out
    }

    pub fn to_markdown(&self) -> String {
        let best = self.best_per_metric();
        let mut out = String::from("| variant | en | mi | sd | scd | vif | qabf |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for (variant, report) in &self.rows {
            let vals = report.rounded3().values();
            let _ = write!(out, "| {} |", variant.name());
            for (col, v) in vals.iter().enumerate() {
                if best[col] == Some(*variant) {
                    let _ = write!(out, " **{v:.3}** |");
                } else {
                    let _ = write!(out, " {v:.3} |");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Fuses every input pair with each variant, scores the results, and
/// averages the rows. Fused images land in `out_dir/<variant>/`.
pub fn compare_pairs(
    pairs: &[(String, SourcePairOwned)],
    out_dir: &Path,
    spec: &JobSpec,
) -> Result<CompareOutcome> {
    ensure_dir(out_dir)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for variant in LossVariant::ALL {
        let mut cfg = LossConfig::for_variant(variant);
        // Carry the user's pyramid and padding choices into every variant;
        // term weights stay at each variant's standard values.
        cfg.scales = spec.loss_cfg.scales.clone();
        cfg.scale_weights = spec.loss_cfg.scale_weights.clone();
        cfg.pad = spec.loss_cfg.pad;

        let variant_dir = out_dir.join(variant.name());
        let attempt = || -> Result<MetricReport> {
            ensure_dir(&variant_dir)?;
            let mut reports = Vec::new();
            for (stem, pair) in pairs {
                let (fused, trace) = direct_fuse(&pair.ir, &pair.vis_y, &cfg, &spec.opt_cfg)?;
                let png = variant_dir.join(format!("{stem}.png"));
                save_gray(&png, &fused)?;
                trace.write_csv(png.with_extension("trace.csv"))?;
                reports.push(metric_report(&fused, &pair.ir, &pair.vis_y)?);
            }
            Ok(mean_report(&reports))
        };
        match attempt() {
            Ok(report) => rows.push((variant, report)),
            Err(err) => {
                eprintln!("warning: variant {variant} failed: {err}");
                failures.push((variant, err.to_string()));
            }
        }
    }
    Ok(CompareOutcome { rows, failures })
}

/// Owned copy of a source pair (used by compare/demo fixtures).
pub struct SourcePairOwned {
    pub ir: GrayPlane,
    pub vis_y: GrayPlane,
}

fn write_compare_table(outcome: &CompareOutcome, out_dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    let (name, text) = match format {
        OutputFormat::Csv => ("compare.csv", outcome.to_csv()),
        OutputFormat::Markdown => ("compare.md", outcome.to_markdown()),
    };
    let path = out_dir.join(name);
    write_text(&path, &text)?;
    Ok(path)
}

fn cmd_compare(spec: &JobSpec) -> Result<()> {
    let ir_path = require(&spec.ir_path, "--ir")?;
    let vis_path = require(&spec.vis_path, "--vis")?;
    let out_dir = require(&spec.out_path, "--out")?;

    let mut pairs = Vec::new();
    if ir_path.is_dir() {
        for (stem, ir_file, vis_file) in paired_inputs(ir_path, vis_path)? {
            let pair = load_pair(&ir_file, &vis_file)?;
            pairs.push((
                stem,
                SourcePairOwned {
                    ir: pair.ir,
                    vis_y: pair.vis_y,
                },
            ));
        }
    } else {
        let pair = load_pair(ir_path, vis_path)?;
        let stem = ir_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("pair")
            .to_string();
        pairs.push((
            stem,
            SourcePairOwned {
                ir: pair.ir,
                vis_y: pair.vis_y,
            },
        ));
    }
    if pairs.is_empty() {
        return Err(Error::Cli("no input pairs found".to_string()));
    }

    let outcome = compare_pairs(&pairs, out_dir, spec)?;
    let table_path = write_compare_table(&outcome, out_dir, spec.format)?;
    println!("wrote {}", table_path.display());
    print!(
        "{}",
        match spec.format {
            OutputFormat::Csv => outcome.to_csv(),
            OutputFormat::Markdown => outcome.to_markdown(),
        }
    );
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Cli(format!(
            "{} variant(s) failed",
            outcome.failures.len()
        )))
    }
}

/// Interior target responses on the anti-diagonal ramp: the summed-response
/// (tcmoa) target magnitude against the per-axis (ours) target energy.
pub struct CancellationFigures {
    /// Largest interior |gx + gy| of the winning source — the tcmoa target.
    pub tcmoa_max_abs: f64,
    /// Smallest interior per-axis target energy |gx_sel| + |gy_sel|.
    pub ours_min_energy: f64,
    /// Largest interior deviation of that energy from 2|a_px|.
    pub max_energy_deviation: f64,
}

/// Measures the cancellation counterexample on an anti-diagonal-ramp pair.
pub fn cancellation_figures(ir: &GrayPlane, vis: &GrayPlane, pad: PaddingMode) -> CancellationFigures {
    let fv = sobel(vis, pad);
    let fi = sobel(ir, pad);
    let (h, w) = (vis.height(), vis.width());
    let mut tcmoa_max_abs: f64 = 0.0;
    let mut ours_min_energy = f64::INFINITY;
    let mut max_energy_deviation: f64 = 0.0;
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let gv = fv.gx.get(r, c) + fv.gy.get(r, c);
            let gi = fi.gx.get(r, c) + fi.gy.get(r, c);
            let target = if gv.abs() >= gi.abs() { gv } else { gi };
            tcmoa_max_abs = tcmoa_max_abs.max(target.abs());

            let sel_x = if fv.gx.get(r, c).abs() >= fi.gx.get(r, c).abs() {
                fv.gx.get(r, c)
            } else {
                fi.gx.get(r, c)
            };
            let sel_y = if fv.gy.get(r, c).abs() >= fi.gy.get(r, c).abs() {
                fv.gy.get(r, c)
            } else {
                fi.gy.get(r, c)
            };
            let energy = sel_x.abs() + sel_y.abs();
            ours_min_energy = ours_min_energy.min(energy);
            let a_px = fv.gx.get(r, c).abs();
            max_energy_deviation = max_energy_deviation.max((energy - 2.0 * a_px).abs());
        }
    }
    CancellationFigures {
        tcmoa_max_abs,
        ours_min_energy,
        max_energy_deviation,
    }
}

fn cmd_demo(spec: &JobSpec) -> Result<()> {
    let out_dir = require(&spec.out_path, "--out")?;
    if spec.demo_size < 32 {
        return Err(Error::Cli(format!(
            "demo size {} is below the metric minimum of 32",
            spec.demo_size
        )));
    }
    ensure_dir(out_dir)?;

    for kind in SyntheticKind::ALL {
        let (ir, vis) = make_synthetic_pair(kind, spec.demo_size, spec.demo_amplitude)?;
        let kind_dir = out_dir.join(kind.name());
        ensure_dir(&kind_dir)?;
        save_gray(kind_dir.join("ir.png"), &ir)?;
        save_gray(kind_dir.join("vis.png"), &vis)?;

        if kind == SyntheticKind::AntiDiagonalRamp {
            let figures = cancellation_figures(&ir, &vis, spec.loss_cfg.pad);
            println!(
                "{}: interior tcmoa target magnitude max = {:.3e} (cancels to zero); \
                 per-axis target energy min = {:.6} (= 2|a| within {:.3e})",
                kind.name(),
                figures.tcmoa_max_abs,
                figures.ours_min_energy,
                figures.max_energy_deviation
            );
        }

        let pairs = vec![(
            "demo".to_string(),
            SourcePairOwned {
                ir: ir.clone(),
                vis_y: vis.clone(),
            },
        )];
        let outcome = compare_pairs(&pairs, &kind_dir, spec)?;
        write_compare_table(&outcome, &kind_dir, spec.format)?;
        if !outcome.failures.is_empty() {
            return Err(Error::Cli(format!(
                "{}: {} variant(s) failed",
                kind.name(),
                outcome.failures.len()
            )));
        }
        println!("{}: wrote images and comparison table", kind.name());
    }
    Ok(())
}

/// Resolves a job's loss configuration from an optional config file plus
/// flag overrides; flags beat the file, the file beats defaults, and
/// unspecified weights follow the chosen variant's standard weighting.
pub fn resolve_loss_config(
    config_path: Option<&Path>,
    flags: crate::losses::LossConfigOverrides,
) -> Result<LossConfig> {
    let from_file = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
                path: path.to_path_buf(),
                source,
            })?;
            crate::losses::LossConfigOverrides::parse(&text)?
        }
        None => crate::losses::LossConfigOverrides::default(),
    };
    from_file.merge(flags).resolve()
}

/// Scale-aware check used by examples/tests to confirm a plane can run a
/// given pyramid.
pub fn pyramid_fits(plane: &GrayPlane, scales: &[f64]) -> bool {
    scales.iter().all(|&s| {
        resample::scaled_len(plane.height(), s).is_ok()
            && resample::scaled_len(plane.width(), s).is_ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_table_appends_mean_rows_in_dir_mode() {
        let r1 = MetricReport {
            en: 6.0,
            mi: 3.0,
            sd: 30.0,
            scd: 1.5,
            vif: 0.8,
            qabf: 0.6,
        };
        let r2 = MetricReport {
            en: 7.0,
            mi: 4.0,
            sd: 40.0,
            scd: 1.7,
            vif: 0.9,
            qabf: 0.7,
        };
        let table = eval_table(
            &[("a".to_string(), r1), ("b".to_string(), r2)],
            OutputFormat::Csv,
        );
        let mean_line = table
            .lines()
            .find(|l| l.starts_with("mean,"))
            .expect("mean row present");
        assert!(mean_line.starts_with("mean,6.5,3.5,35,"));
        assert!(table.lines().any(|l| l.starts_with("mean_3dp,")));
    }

    #[test]
    fn single_row_has_no_mean() {
        let r = MetricReport {
            en: 6.0,
            mi: 3.0,
            sd: 30.0,
            scd: 1.5,
            vif: 0.8,
            qabf: 0.6,
        };
        let table = eval_table(&[("only".to_string(), r)], OutputFormat::Csv);
        assert!(!table.contains("mean"));
    }

    #[test]
    fn compare_outcome_marks_the_best_variant() {
        let low = MetricReport {
            en: 6.0,
            mi: 3.0,
            sd: 30.0,
            scd: 1.5,
            vif: 0.8,
            qabf: 0.6,
        };
        let high = MetricReport {
            en: 7.0,
            mi: 4.0,
            sd: 31.0,
            scd: 1.6,
            vif: 0.9,
            qabf: 0.7,
        };
        let outcome = CompareOutcome {
            rows: vec![(LossVariant::Grad, low), (LossVariant::Ours, high)],
            failures: vec![],
        };
        assert!(outcome
            .best_per_metric()
            .iter()
            .all(|b| *b == Some(LossVariant::Ours)));
        let csv = outcome.to_csv();
        assert!(csv.lines().last().unwrap().starts_with("best,ours,"));
        let md = outcome.to_markdown();
        assert!(md.contains("**7.000**"));
    }

    #[test]
    fn missing_paths_are_reported_by_flag_name() {
        let spec = JobSpec::new(CommandKind::Fuse);
        let err = run(&spec).unwrap_err();
        assert!(err.to_string().contains("--ir"));
    }
}
