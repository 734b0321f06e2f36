use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fading_core::fit::{fit_akm_nakagami_variant, select_k_variant};
use fading_core::sweep::{
    self, McSettings, MetricArgs, MetricKind, SweepAxis, SweepSpec, ValidateSpec,
};
use fading_core::{db_to_linear, DoubleShadowedAkm, Error, ExponentVariant, MetricResult, MgsDistribution, Mode, SamplerModel};
use serde::Serialize;

/// Fit double-shadowed α-κ-μ channels to Mixture-Gamma-Shadowed models and
/// evaluate outage, bit-error, capacity, effective-capacity and AUC metrics.
#[derive(Parser)]
#[command(name = "fading-perf", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Gamma mixture and print the report as JSON.
    Fit(FitArgs),
    /// Evaluate one metric at a single average SNR, JSON output.
    #[command(alias = "metric")]
    Eval(EvalArgs),
    /// Sweep a metric over average SNR (or threshold) and write CSV.
    Sweep(SweepArgs),
    /// Compare analytic metrics against the Monte Carlo simulator.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct ChannelArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    m: f64,
    /// Inverse-Nakagami-m shadowing index m_s (> 1).
    #[arg(long = "ms")]
    m_s: f64,
    /// Average SNR in dB (10·log10).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
}

impl ChannelArgs {
    fn channel(&self) -> Result<DoubleShadowedAkm, Error> {
        DoubleShadowedAkm::new(self.alpha, self.kappa, self.mu, self.m, self.m_s, db_to_linear(self.snr_db))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Derived,
    Printed,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Number of mixture terms.
    #[arg(long, conflicts_with = "mse_target", required_unless_present = "mse_target")]
    k: Option<usize>,
    /// Smallest K whose MSE meets this target.
    #[arg(long)]
    mse_target: Option<f64>,
    #[arg(long, default_value_t = 64)]
    k_max: usize,
    #[arg(long, value_enum, default_value = "derived")]
    variant: VariantArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Op,
    Abep,
    Acc,
    Ec,
    Auc,
    Cauc,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Op => MetricKind::Op,
            MetricArg::Abep => MetricKind::Abep,
            MetricArg::Acc => MetricKind::Acc,
            MetricArg::Ec => MetricKind::Ec,
            MetricArg::Auc => MetricKind::Auc,
            MetricArg::Cauc => MetricKind::Cauc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Asymptotic,
    Integral,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Asymptotic => Mode::Asymptotic,
            ModeArg::Integral => Mode::Integral,
        }
    }
}

#[derive(Args, Clone)]
struct MetricFlags {
    /// Outage threshold in dB.
    #[arg(long, allow_negative_numbers = true)]
    threshold_db: Option<f64>,
    /// Modulation coefficient (1 BPSK, 0.5 BFSK, 0.715 BFSK with minimum correlation).
    #[arg(long)]
    rho: Option<f64>,
    /// Delay exponent A of the effective capacity.
    #[arg(long = "a")]
    a: Option<f64>,
    /// Time-bandwidth product of the energy detector.
    #[arg(long)]
    u: Option<u32>,
}

impl MetricFlags {
    fn args(&self) -> MetricArgs {
        MetricArgs {
            threshold_db: self.threshold_db,
            rho: self.rho,
            a: self.a,
            u: self.u,
        }
    }

    /// Flags given on the command line override the figure defaults.
    fn args_or_defaults(&self) -> MetricArgs {
        let d = MetricArgs::figure_defaults();
        MetricArgs {
            threshold_db: self.threshold_db.or(d.threshold_db),
            rho: self.rho.or(d.rho),
            a: self.a.or(d.a),
            u: self.u.or(d.u),
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum)]
    metric: MetricArg,
    #[command(flatten)]
    metric_args: MetricFlags,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact")]
    modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 15)]
    k: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep specification; replaces the channel and metric flags.
    #[arg(long, conflicts_with_all = ["alpha", "kappa", "mu", "m", "m_s", "metric"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long = "ms")]
    m_s: Option<f64>,
    /// Fixed average SNR in dB for the threshold axis.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[command(flatten)]
    metric_args: MetricFlags,
    #[arg(long = "from", default_value_t = 0.0, allow_negative_numbers = true)]
    start: f64,
    #[arg(long = "to", default_value_t = 40.0, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "exact")]
    modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Fit once and scale the rates with 1/γ̄ instead of re-fitting.
    #[arg(long)]
    rescale_zeta: bool,
    #[arg(long, value_enum, default_value = "snr")]
    axis: AxisArg,
    /// Monte Carlo samples per grid point; enables the mc columns.
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    streams: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Snr,
    Threshold,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Multiplicative,
    DominantComponent,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Metrics to compare; all five by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    metrics: Vec<MetricArg>,
    /// Defaults: threshold 5 dB, rho 1, A 3.5, u 3.
    #[command(flatten)]
    metric_args: MetricFlags,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    streams: usize,
    #[arg(long, value_enum, default_value = "multiplicative")]
    sampler: SamplerArg,
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::TargetUnreachable { .. } => 2,
        Error::Numeric { .. } => 3,
        _ => 1,
    }
}

fn variant(v: VariantArg) -> ExponentVariant {
    match v {
        VariantArg::Derived => ExponentVariant::Derived,
        VariantArg::Printed => ExponentVariant::Printed,
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> Result<(), Error> {
    let ch = a.channel.channel()?;
    let report = match (a.k, a.mse_target) {
        (Some(k), _) => fit_akm_nakagami_variant(&ch, k, variant(a.variant))?,
        (None, Some(target)) => match select_k_variant(&ch, target, a.k_max, variant(a.variant)) {
            Ok(r) => r,
            Err(Error::TargetUnreachable { target, k_max, best }) => {
                print_json(&*best)?;
                return Err(Error::TargetUnreachable { target, k_max, best });
            }
            Err(e) => return Err(e),
        },
        (None, None) => unreachable!("clap requires --k or --mse-target"),
    };
    print_json(&report)
}

#[derive(Serialize)]
struct EvalOutput {
    metric: MetricKind,
    gamma_bar_db: f64,
    k: usize,
    results: Vec<MetricResult>,
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Error> {
    let ch = a.channel.channel()?;
    let d = MgsDistribution::from_channel(&ch, a.k)?;
    let kind: MetricKind = a.metric.into();
    let args = a.metric_args.args();
    let results = a
        .modes
        .iter()
        .map(|&m| sweep::evaluate(&d, kind, &args, m.into()))
        .collect::<Result<Vec<_>, _>>()?;
    print_json(&EvalOutput {
        metric: kind,
        gamma_bar_db: a.channel.snr_db,
        k: a.k,
        results,
    })
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec, Error> {
    if let Some(path) = &a.spec {
        let text = std::fs::read_to_string(path)?;
        let mut spec: SweepSpec = serde_json::from_str(&text)?;
        // explicit switches still apply on top of a spec file
        spec.rescale_zeta |= a.rescale_zeta;
        if matches!(a.axis, AxisArg::Threshold) {
            spec.axis = SweepAxis::Threshold;
        }
        return Ok(spec);
    }
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::Domain {
            op: "sweep",
            msg: format!("--{name} is required without --spec"),
        })
    };
    let channel = DoubleShadowedAkm::new(
        need(a.alpha, "alpha")?,
        need(a.kappa, "kappa")?,
        need(a.mu, "mu")?,
        need(a.m, "m")?,
        need(a.m_s, "ms")?,
        db_to_linear(a.snr_db),
    )?;
    let metric = a.metric.ok_or_else(|| Error::Domain {
        op: "sweep",
        msg: "--metric is required without --spec".into(),
    })?;
    Ok(SweepSpec {
        channel,
        metric: metric.into(),
        metric_args: a.metric_args.args(),
        gamma_bar_db: (a.start, a.stop, a.step),
        modes: a.modes.iter().map(|&m| m.into()).collect(),
        mc: a.mc_samples.map(|n| McSettings {
            n_samples: n,
            seed: a.seed,
            streams: a.streams,
            sampler: SamplerModel::Multiplicative,
        }),
        k: a.k,
        rescale_zeta: a.rescale_zeta,
        axis: match a.axis {
            AxisArg::Snr => SweepAxis::Snr,
            AxisArg::Threshold => SweepAxis::Threshold,
        },
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Error> {
    let spec = sweep_spec(a)?;
    let rows = sweep::run_sweep(&spec)?;
    for r in &rows {
        for n in &r.notes {
            eprintln!("warning: {n}");
        }
    }
    match &a.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            sweep::write_csv(&spec, &rows, &mut w)?;
            w.flush()?;
        }
        None => sweep::write_csv(&spec, &rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<(), Error> {
    let channel = a.channel.channel()?;
    let metrics: Vec<MetricKind> = if a.metrics.is_empty() {
        MetricKind::PRIMARY.to_vec()
    } else {
        a.metrics.iter().map(|&m| m.into()).collect()
    };
    let spec = ValidateSpec {
        channel,
        metrics,
        metric_args: a.metric_args.args_or_defaults(),
        mc: McSettings {
            n_samples: a.samples,
            seed: a.seed,
            streams: a.streams,
            sampler: match a.sampler {
                SamplerArg::Multiplicative => SamplerModel::Multiplicative,
                SamplerArg::DominantComponent => SamplerModel::DominantComponent,
            },
        },
        k: a.k,
    };
    let rows = sweep::run_validation(&spec)?;
    if a.json {
        print_json(&rows)?;
    } else {
        sweep::write_validation_csv(&rows, io::stdout().lock())?;
    }
    let flagged = rows.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} metric(s) with |z| > 3");
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FADING_PERF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("FADING_PERF_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match &cli.cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
