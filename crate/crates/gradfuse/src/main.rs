use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gradfuse::cli::{self, CommandKind, JobSpec, OutputFormat};
use gradfuse::{InitMode, LossConfigOverrides, LossVariant, OptimizerConfig, PaddingMode};

/// Infrared-visible image fusion via gradient-domain losses.
#[derive(Parser)]
#[command(name = "gradfuse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse an ir/vis pair (or paired directories) by direct optimization.
    Fuse(FuseArgs),
    /// Score fused images against their sources with the six metrics.
    Eval(EvalArgs),
    /// Fuse with all four loss variants and tabulate the metrics.
    Compare(CompareArgs),
    /// Generate the synthetic pairs and run the full comparison on them.
    Demo(DemoArgs),
}

#[derive(Args)]
struct LossFlags {
    /// Loss variant: ori|grad|tcmoa|ours.
    #[arg(long)]
    loss: Option<LossVariant>,
    /// Composite weights as w_ssim,w_int,w_grad.
    #[arg(long)]
    weights: Option<String>,
    /// Pyramid scales, e.g. 1,0.5,0.25.
    #[arg(long)]
    scales: Option<String>,
    /// Per-scale weights (default: equal).
    #[arg(long = "scale-weights")]
    scale_weights: Option<String>,
    /// Sobel boundary handling: zero|reflect.
    #[arg(long)]
    padding: Option<PaddingMode>,
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OptFlags {
    /// Optimizer iterations.
    #[arg(long)]
    steps: Option<usize>,
    /// Optimizer step size.
    #[arg(long)]
    lr: Option<f64>,
    /// Fused-plane initialization: max|mean|visible.
    #[arg(long)]
    init: Option<InitMode>,
}

#[derive(Args)]
struct FuseArgs {
    /// Infrared image (PNG file or directory).
    #[arg(long)]
    ir: PathBuf,
    /// Visible image (PNG file or directory).
    #[arg(long)]
    vis: PathBuf,
    /// Output PNG file (or directory for directory inputs).
    #[arg(long)]
    out: PathBuf,
    /// Also write a color fusion (fused Y + visible chroma).
    #[arg(long)]
    color: bool,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    opt: OptFlags,
}

#[derive(Args)]
struct EvalArgs {
    /// Fused image (PNG file or directory).
    #[arg(long)]
    fused: PathBuf,
    /// Infrared source (PNG file or directory).
    #[arg(long)]
    ir: PathBuf,
    /// Visible source (PNG file or directory).
    #[arg(long)]
    vis: PathBuf,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format: csv|markdown.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct CompareArgs {
    /// Infrared image (PNG file or directory).
    #[arg(long)]
    ir: PathBuf,
    /// Visible image (PNG file or directory).
    #[arg(long)]
    vis: PathBuf,
    /// Output directory for fused images and the table.
    #[arg(long)]
    out: PathBuf,
    /// Table format: csv|markdown.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    opt: OptFlags,
}

#[derive(Args)]
struct DemoArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Side length of the synthetic pairs (>= 32).
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Edge amplitude of the synthetic pairs, in (0, 1].
    #[arg(long, default_value_t = 0.8)]
    amplitude: f64,
    /// Table format: csv|markdown.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[command(flatten)]
    loss: LossFlags,
    #[command(flatten)]
    opt: OptFlags,
}

fn parse_triple(raw: &str) -> Result<[f64; 3], gradfuse::Error> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(gradfuse::Error::InvalidConfig(format!(
            "--weights expects w_ssim,w_int,w_grad, got '{raw}'"
        )));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|_| {
            gradfuse::Error::InvalidConfig(format!("'{part}' is not a number"))
        })?;
    }
    Ok(out)
}

fn parse_numbers(flag: &str, raw: &str) -> Result<Vec<f64>, gradfuse::Error> {
    raw.split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                gradfuse::Error::InvalidConfig(format!("{flag}: '{part}' is not a number"))
            })
        })
        .collect()
}

fn loss_overrides(flags: &LossFlags) -> Result<LossConfigOverrides, gradfuse::Error> {
    let mut o = LossConfigOverrides {
        variant: flags.loss,
        pad: flags.padding,
        ..LossConfigOverrides::default()
    };
    if let Some(raw) = &flags.weights {
        let [w_ssim, w_int, w_grad] = parse_triple(raw)?;
        o.w_ssim = Some(w_ssim);
        o.w_int = Some(w_int);
        o.w_grad = Some(w_grad);
    }
    if let Some(raw) = &flags.scales {
        o.scales = Some(parse_numbers("--scales", raw)?);
    }
    if let Some(raw) = &flags.scale_weights {
        o.scale_weights = Some(parse_numbers("--scale-weights", raw)?);
    }
    Ok(o)
}

fn optimizer_config(flags: &OptFlags) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::default();
    if let Some(steps) = flags.steps {
        cfg.steps = steps;
    }
    if let Some(lr) = flags.lr {
        cfg.step_size = lr;
    }
    if let Some(init) = flags.init {
        cfg.init = init;
    }
    cfg
}

fn build_spec(cli: Cli) -> Result<JobSpec, gradfuse::Error> {
    match cli.command {
        Command::Fuse(args) => {
            let mut spec = JobSpec::new(CommandKind::Fuse);
            spec.loss_cfg =
                cli::resolve_loss_config(args.loss.config.as_deref(), loss_overrides(&args.loss)?)?;
            spec.opt_cfg = optimizer_config(&args.opt);
            spec.ir_path = Some(args.ir);
            spec.vis_path = Some(args.vis);
            spec.out_path = Some(args.out);
            spec.color = args.color;
            Ok(spec)
        }
        Command::Eval(args) => {
            let mut spec = JobSpec::new(CommandKind::Eval);
            spec.fused_path = Some(args.fused);
            spec.ir_path = Some(args.ir);
            spec.vis_path = Some(args.vis);
            spec.out_path = args.out;
            spec.format = args.format;
            Ok(spec)
        }
        Command::Compare(args) => {
            let mut spec = JobSpec::new(CommandKind::Compare);
            spec.loss_cfg =
                cli::resolve_loss_config(args.loss.config.as_deref(), loss_overrides(&args.loss)?)?;
            spec.opt_cfg = optimizer_config(&args.opt);
            spec.ir_path = Some(args.ir);
            spec.vis_path = Some(args.vis);
            spec.out_path = Some(args.out);
            spec.format = args.format;
            Ok(spec)
        }
        Command::Demo(args) => {
            let mut spec = JobSpec::new(CommandKind::Demo);
            spec.loss_cfg =
                cli::resolve_loss_config(args.loss.config.as_deref(), loss_overrides(&args.loss)?)?;
            spec.opt_cfg = optimizer_config(&args.opt);
            spec.out_path = Some(args.out);
            spec.format = args.format;
            spec.demo_size = args.size;
            spec.demo_amplitude = args.amplitude;
            Ok(spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match build_spec(cli) {
        Ok(spec) => spec,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::FAILURE;
        }
    };
    match cli::run(&spec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
