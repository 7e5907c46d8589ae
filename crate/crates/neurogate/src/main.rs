//! Command-line entry point; a dispatcher over the experiment runners.
//!
//! Flag values override config-file values, which override the built-in
//! desk-scale defaults. Every run echoes its fully resolved config to
//! `config.txt` in the run directory, and that echo parses back in via
//! `--config`.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use neurogate::error::{NetError, RunError, WeightsError};
use neurogate::experiments::{
    self, ChainConfig, ChainNets, GateRunConfig, MetricSummary, OrderSwapConfig,
    QuantumnessConfig, RunOutput, SweepConfig,
};
use neurogate::net::OptimizerKind;
use neurogate::quantum::GateId;
use neurogate::sampler::{self, DatasetKind, DatasetSpec};

#[derive(Parser)]
#[command(
    name = "neurogate",
    version,
    about = "Two-qubit gate emulation with dense real-valued networks",
    after_help = "Exit codes: 0 success, 2 config error, 3 training diverged, \
                  4 missing weight file, 5 corrupt weight file, 1 other failure.\n\
                  Environment: NEUROGATE_OUT sets the default output directory \
                  (fallback: ./runs)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one 64-m-64 linear gate net, recording probe metrics per epoch
    TrainGate(TrainGateArgs),
    /// Train the quantumness net under the growing-batch schedule
    TrainQuantumness(TrainQuantumnessArgs),
    /// Train one gate net per bottleneck width, recording at checkpoints
    Sweep(SweepArgs),
    /// Iterate gate nets and compare against the exact chain at powers of two
    Chain(ChainArgs),
    /// Evaluate both layer orders (hr,cnot vs cnot,hr) and their exact gap
    OrderSwap(OrderSwapArgs),
    /// Load a weight file and report output metrics on fresh probe batches
    Verify(VerifyArgs),
    /// Write a dataset as CSV
    ExportDataset(ExportDatasetArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory [default: $NEUROGATE_OUT, else ./runs]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file with `key = value` lines; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed; dataset, init and shuffle streams derive from it [default: 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OptimizerArgs {
    /// adagrad or adadelta [default: subcommand-specific]
    #[arg(long)]
    optimizer: Option<String>,
    /// Adagrad learning rate [default: 0.09]
    #[arg(long)]
    lr: Option<f64>,
    /// AdaDelta decay rate [default: 0.95]
    #[arg(long)]
    rho: Option<f64>,
    /// Denominator regularizer [default: 1e-8 adagrad, 1e-6 adadelta]
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct TrainGateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gate to learn: cnot, hr, h1 or r2 [default: cnot]
    #[arg(long)]
    gate: Option<GateId>,
    /// Bottleneck width m [default: 15]
    #[arg(long)]
    m: Option<usize>,
    /// Dataset size including the held-out part [default: 10000]
    #[arg(long)]
    samples: Option<usize>,
    /// Held-out fraction of the dataset [default: 0.1]
    #[arg(long)]
    heldout_frac: Option<f64>,
    /// Mini-batch size [default: 1000]
    #[arg(long)]
    batch: Option<usize>,
    /// Training epochs [default: 500]
    #[arg(long)]
    epochs: Option<usize>,
    /// Use the original dataset size (100000 samples) instead of desk scale
    #[arg(long)]
    paper_scale: bool,
    #[command(flatten)]
    optim: OptimizerArgs,
}

#[derive(Args)]
struct TrainQuantumnessArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dataset size including the held-out part [default: 100000]
    #[arg(long)]
    samples: Option<usize>,
    /// Held-out fraction of the dataset [default: 0.1]
    #[arg(long)]
    heldout_frac: Option<f64>,
    /// Hidden layer widths, comma-separated [default: 256,256]
    #[arg(long)]
    hidden: Option<String>,
    /// Batch sizes, one training phase each [default: 32,64,128,256,512]
    #[arg(long)]
    batch_schedule: Option<String>,
    /// Epochs per batch-size phase [default: 12]
    #[arg(long)]
    epochs_per_batch: Option<usize>,
    /// Use the original dataset size (1000000 samples); no loss bound promised
    #[arg(long)]
    paper_scale: bool,
    #[command(flatten)]
    optim: OptimizerArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gate to learn [default: cnot]
    #[arg(long)]
    gate: Option<GateId>,
    /// Bottleneck widths: `12..20` (inclusive) or `12,14,16` [default: 12..20]
    #[arg(long)]
    m_list: Option<String>,
    /// Recording epochs, ascending; the last one ends training [default: 500,1000,3000]
    #[arg(long)]
    checkpoints: Option<String>,
    /// Dataset size including the held-out part [default: 10000]
    #[arg(long)]
    samples: Option<usize>,
    /// Held-out fraction of the dataset [default: 0.1]
    #[arg(long)]
    heldout_frac: Option<f64>,
    /// Mini-batch size [default: 1000]
    #[arg(long)]
    batch: Option<usize>,
    #[command(flatten)]
    optim: OptimizerArgs,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Per-layer gates in application order [default: hr,cnot]
    #[arg(long)]
    order: Option<String>,
    /// Largest layer count; records at every power of two up to it [default: 1024]
    #[arg(long)]
    n_max: Option<usize>,
    /// Fresh evaluation states per record [default: 1000]
    #[arg(long)]
    eval_batch: Option<usize>,
    /// Use analytically constructed exact nets (persisted with the records)
    #[arg(long)]
    oracle: bool,
    /// Weight file per gate, aligned with --order (repeat per gate)
    #[arg(long = "net", value_name = "PATH")]
    nets: Vec<PathBuf>,
}

#[derive(Args)]
struct OrderSwapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest layer count; records at every power of two up to it [default: 1024]
    #[arg(long)]
    n_max: Option<usize>,
    /// Fresh evaluation states per record [default: 1000]
    #[arg(long)]
    eval_batch: Option<usize>,
    /// Use analytically constructed exact nets
    #[arg(long)]
    oracle: bool,
    /// Weight files for (hr, cnot), shared by both orders (repeat per gate)
    #[arg(long = "net", value_name = "PATH")]
    nets: Vec<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Weight file to inspect
    #[arg(long)]
    weights: PathBuf,
    /// Probe batch size [default: 1000]
    #[arg(long)]
    probe: Option<usize>,
    /// Probe RNG seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ExportDatasetArgs {
    /// quantumness or gate
    #[arg(long)]
    kind: String,
    /// Gate (required for --kind gate): cnot, hr, h1 or r2
    #[arg(long)]
    gate: Option<GateId>,
    /// Dataset size including the held-out part [default: 10000]
    #[arg(long)]
    count: Option<usize>,
    /// Held-out fraction [default: 0.1]
    #[arg(long)]
    heldout_frac: Option<f64>,
    /// Base RNG seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path
    #[arg(long)]
    path: PathBuf,
}

enum CliError {
    Config(String),
    Run(RunError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Run(RunError::Net(NetError::BadShape { .. })) => "config",
            CliError::Run(RunError::Net(NetError::Diverged { .. })) => "diverged",
            CliError::Run(RunError::Weights(WeightsError::Missing { .. })) => "missing-weights",
            CliError::Run(RunError::Weights(WeightsError::Corrupt { .. })) => "corrupt-weights",
            CliError::Run(RunError::Weights(WeightsError::Io { .. })) => "io",
            CliError::Run(RunError::Io(_)) => "io",
            CliError::Run(RunError::Quantum(_)) => "quantum",
        }
    }

    fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "diverged" => 3,
            "missing-weights" => 4,
            "corrupt-weights" => 5,
            _ => 1,
        }
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Run(e)
    }
}

/// Parsed `key = value` config file; every key must be consumed (flags take
/// precedence but still consume), leftovers are config errors.
struct FileCfg(HashMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(CliError::Config(format!(
                        "config line {}: expected `key = value`, got {line:?}",
                        i + 1
                    )));
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            // Echoed configs carry their experiment label; accept them as-is.
            map.remove("experiment");
        }
        Ok(Self(map))
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key {key} = {v:?}: {e}"))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        let mut leftover: Vec<&String> = self.0.keys().collect();
        leftover.sort();
        match leftover.first() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("unknown config key {k:?}"))),
        }
    }
}

fn pick<T: FromStr>(
    flag: Option<T>,
    file: &mut FileCfg,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    let from_file = file.take(key)?;
    Ok(flag.or(from_file).unwrap_or(default))
}

/// `a..b` (inclusive) or a comma-separated list.
fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |e: std::num::ParseIntError| CliError::Config(format!("bad list {s:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(bad)?;
        let b: usize = b.trim().parse().map_err(bad)?;
        if a > b {
            return Err(CliError::Config(format!("empty range {a}..{b}")));
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(bad)).collect()
    }
}

fn parse_gate_list(s: &str) -> Result<Vec<GateId>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|e| CliError::Config(format!("bad gate list {s:?}: {e}")))
        })
        .collect()
}

fn pick_list(
    flag: Option<String>,
    file: &mut FileCfg,
    key: &str,
    default: &[usize],
) -> Result<Vec<usize>, CliError> {
    let from_file = file.take::<String>(key)?;
    match flag.or(from_file) {
        Some(s) => parse_usize_list(&s),
        None => Ok(default.to_vec()),
    }
}

fn resolve_optimizer(
    optim: &OptimizerArgs,
    file: &mut FileCfg,
    default_name: &str,
) -> Result<OptimizerKind, CliError> {
    let name = match &optim.optimizer {
        Some(n) => {
            file.take::<String>("optimizer")?;
            n.clone()
        }
        None => file
            .take::<String>("optimizer")?
            .unwrap_or_else(|| default_name.to_string()),
    };
    let lr = optim.lr.or(file.take("lr")?);
    let rho = optim.rho.or(file.take("rho")?);
    let eps = optim.eps.or(file.take("eps")?);
    match name.as_str() {
        "adagrad" => {
            if rho.is_some() {
                return Err(CliError::Config("rho applies to adadelta only".to_string()));
            }
            Ok(OptimizerKind::Adagrad {
                lr: lr.unwrap_or(0.09),
                eps: eps.unwrap_or(1e-8),
            })
        }
        "adadelta" => {
            if lr.is_some() {
                return Err(CliError::Config("lr applies to adagrad only".to_string()));
            }
            Ok(OptimizerKind::Adadelta {
                rho: rho.unwrap_or(0.95),
                eps: eps.unwrap_or(1e-6),
            })
        }
        other => Err(CliError::Config(format!(
            "unknown optimizer {other:?} (expected adagrad or adadelta)"
        ))),
    }
}

fn resolve_nets(
    oracle: bool,
    nets: &[PathBuf],
    file: &mut FileCfg,
    expected: usize,
) -> Result<ChainNets, CliError> {
    let from_file = file.take::<String>("nets")?;
    if oracle && !nets.is_empty() {
        return Err(CliError::Config(
            "--oracle and --net are mutually exclusive".to_string(),
        ));
    }
    let resolved = if oracle {
        ChainNets::Oracle
    } else if !nets.is_empty() {
        ChainNets::Trained(nets.to_vec())
    } else {
        match from_file.as_deref() {
            Some("oracle") | None => ChainNets::Oracle,
            Some(list) => ChainNets::Trained(list.split(',').map(PathBuf::from).collect()),
        }
    };
    if let ChainNets::Trained(paths) = &resolved {
        if paths.len() != expected {
            return Err(CliError::Config(format!(
                "expected {expected} weight files (one per gate in order), got {}",
                paths.len()
            )));
        }
    }
    Ok(resolved)
}

fn resolve_out(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("NEUROGATE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn print_record_line(r: &experiments::ExperimentRecord) {
    println!(
        "{} index {}: loss {:.16e}, trace_residual max {:.3e} mean {:.3e}, \
         antiherm max {:.3e} mean {:.3e}, min_eig {:.3e}",
        r.experiment,
        r.index,
        r.loss,
        r.trace_residual_max,
        r.trace_residual_mean,
        r.antiherm_max,
        r.antiherm_mean,
        r.min_eig
    );
}

/// Prints the run dir, the last record of every record stream, and any
/// diverged sweep points.
fn print_run_summary(run: &RunOutput) {
    if let Some(dir) = &run.dir {
        println!("run dir: {}", dir.display());
    }
    let mut labels: Vec<&str> = Vec::new();
    for r in &run.records {
        if !labels.contains(&r.experiment.as_str()) {
            labels.push(&r.experiment);
        }
    }
    for label in labels {
        let last = run
            .records
            .iter()
            .rev()
            .find(|r| r.experiment == label)
            .unwrap();
        print_record_line(last);
    }
    for (label, epoch) in &run.diverged {
        println!("diverged: {label} at epoch {epoch}");
    }
}

fn cmd_train_gate(args: TrainGateArgs) -> Result<(), CliError> {
    let mut file = FileCfg::load(args.common.config.as_deref())?;
    let gate = pick(args.gate, &mut file, "gate", GateId::Cnot)?;
    let mut cfg = GateRunConfig::desk(gate);
    if args.paper_scale {
        cfg.samples = 100_000;
    }
    cfg.hidden = pick(args.m, &mut file, "hidden", cfg.hidden)?;
    cfg.samples = pick(args.samples, &mut file, "samples", cfg.samples)?;
    cfg.heldout_frac = pick(args.heldout_frac, &mut file, "heldout_frac", cfg.heldout_frac)?;
    cfg.batch = pick(args.batch, &mut file, "batch", cfg.batch)?;
    cfg.epochs = pick(args.epochs, &mut file, "epochs", cfg.epochs)?;
    cfg.optimizer = resolve_optimizer(&args.optim, &mut file, "adagrad")?;
    cfg.seed = pick(args.common.seed, &mut file, "seed", cfg.seed)?;
    file.finish()?;
    let out = resolve_out(args.common.out);
    let run = experiments::run_gate_training(&cfg, Some(&out))?;
    print_run_summary(&run);
    Ok(())
}

fn cmd_train_quantumness(args: TrainQuantumnessArgs) -> Result<(), CliError> {
    let mut file = FileCfg::load(args.common.config.as_deref())?;
    let mut cfg = if args.paper_scale {
        QuantumnessConfig::paper_scale()
    } else {
        QuantumnessConfig::desk()
    };
    cfg.samples = pick(args.samples, &mut file, "samples", cfg.samples)?;
    cfg.heldout_frac = pick(args.heldout_frac, &mut file, "heldout_frac", cfg.heldout_frac)?;
    cfg.hidden = pick_list(args.hidden, &mut file, "hidden", &cfg.hidden)?;
    cfg.batch_schedule = pick_list(
        args.batch_schedule,
        &mut file,
        "batch_schedule",
        &cfg.batch_schedule,
    )?;
    cfg.epochs_per_batch = pick(
        args.epochs_per_batch,
        &mut file,
        "epochs_per_batch",
        cfg.epochs_per_batch,
    )?;
    cfg.optimizer = resolve_optimizer(&args.optim, &mut file, "adadelta")?;
    cfg.seed = pick(args.common.seed, &mut file, "seed", cfg.seed)?;
    file.finish()?;
    let out = resolve_out(args.common.out);
    let run = experiments::run_quantumness(&cfg, Some(&out))?;
    print_run_summary(&run);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut file = FileCfg::load(args.common.config.as_deref())?;
    let gate = pick(args.gate, &mut file, "gate", GateId::Cnot)?;
    let mut cfg = SweepConfig::desk(gate);
    cfg.m_list = pick_list(args.m_list, &mut file, "m_list", &cfg.m_list)?;
    cfg.checkpoints = pick_list(args.checkpoints, &mut file, "checkpoints", &cfg.checkpoints)?;
    if !cfg.checkpoints.windows(2).all(|w| w[0] < w[1]) || cfg.checkpoints.is_empty() {
        return Err(CliError::Config(
            "checkpoints must be strictly ascending and nonempty".to_string(),
        ));
    }
    cfg.samples = pick(args.samples, &mut file, "samples", cfg.samples)?;
    cfg.heldout_frac = pick(args.heldout_frac, &mut file, "heldout_frac", cfg.heldout_frac)?;
    cfg.batch = pick(args.batch, &mut file, "batch", cfg.batch)?;
    cfg.optimizer = resolve_optimizer(&args.optim, &mut file, "adagrad")?;
    cfg.seed = pick(args.common.seed, &mut file, "seed", cfg.seed)?;
    file.finish()?;
    let out = resolve_out(args.common.out);
    let run = experiments::run_sweep(&cfg, Some(&out))?;
    print_run_summary(&run);
    Ok(())
}

fn cmd_chain(args: ChainArgs) -> Result<(), CliError> {
    let mut file = FileCfg::load(args.common.config.as_deref())?;
    let mut cfg = ChainConfig::desk_oracle();
    let order_text = args.order.or(file.take::<String>("order")?);
    if let Some(s) = order_text {
        cfg.order = parse_gate_list(&s)?;
        if cfg.order.is_empty() {
            return Err(CliError::Config("empty gate order".to_string()));
        }
    }
    cfg.n_max = pick(args.n_max, &mut file, "n_max", cfg.n_max)?;
    if cfg.n_max == 0 {
        return Err(CliError::Config("n_max must be at least 1".to_string()));
    }
    cfg.eval_batch = pick(args.eval_batch, &mut file, "eval_batch", cfg.eval_batch)?;
    cfg.seed = pick(args.common.seed, &mut file, "seed", cfg.seed)?;
    cfg.nets = resolve_nets(args.oracle, &args.nets, &mut file, cfg.order.len())?;
    file.finish()?;
    let out = resolve_out(args.common.out);
    let run = experiments::run_chain(&cfg, Some(&out))?;
    if let Some(dir) = &run.dir {
        println!("run dir: {}", dir.display());
    }
    for r in &run.records {
        print_record_line(r);
    }
    Ok(())
}

fn cmd_order_swap(args: OrderSwapArgs) -> Result<(), CliError> {
    let mut file = FileCfg::load(args.common.config.as_deref())?;
    let mut cfg = OrderSwapConfig::desk_oracle();
    cfg.n_max = pick(args.n_max, &mut file, "n_max", cfg.n_max)?;
    if cfg.n_max == 0 {
        return Err(CliError::Config("n_max must be at least 1".to_string()));
    }
    cfg.eval_batch = pick(args.eval_batch, &mut file, "eval_batch", cfg.eval_batch)?;
    cfg.seed = pick(args.common.seed, &mut file, "seed", cfg.seed)?;
    cfg.nets = resolve_nets(args.oracle, &args.nets, &mut file, 2)?;
    file.finish()?;
    let out = resolve_out(args.common.out);
    let run = experiments::run_order_swap(&cfg, Some(&out))?;
    if let Some(dir) = &run.dir {
        println!("run dir: {}", dir.display());
    }
    for r in &run.records {
        print_record_line(r);
    }
    Ok(())
}

fn print_metric_summary(name: &str, s: &MetricSummary) {
    println!(
        "{name}: trace_residual max {:.3e} mean {:.3e}; antiherm max {:.3e} \
         mean {:.3e}; complex_residual max {:.3e} mean {:.3e}; min_eig {:.3e}",
        s.trace_residual_max,
        s.trace_residual_mean,
        s.antiherm_max,
        s.antiherm_mean,
        s.complex_residual_max,
        s.complex_residual_mean,
        s.min_eig
    );
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let probe = args.probe.unwrap_or(1000);
    let seed = args.seed.unwrap_or(1);
    let report = experiments::verify_weights(&args.weights, probe, seed)?;
    let dims = report
        .dims
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("-");
    println!("{}: dims {dims}, probe batch {probe}", args.weights.display());
    print_metric_summary("density inputs", &report.density_probe);
    print_metric_summary("raw uniform inputs", &report.raw_probe);
    let interior = &report.dims[1..report.dims.len().saturating_sub(1)];
    if interior.contains(&15) {
        println!(
            "note: a 15-wide linear bottleneck maps even arbitrary inputs onto \
             the trace-one hermitian subspace; the raw-input row above shows \
             how closely this net does."
        );
    }
    Ok(())
}

fn cmd_export_dataset(args: ExportDatasetArgs) -> Result<(), CliError> {
    let kind = match args.kind.as_str() {
        "quantumness" => DatasetKind::Quantumness,
        "gate" => {
            let gate = args.gate.ok_or_else(|| {
                CliError::Config("--kind gate needs --gate".to_string())
            })?;
            DatasetKind::Gate(gate)
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown dataset kind {other:?} (expected quantumness or gate)"
            )))
        }
    };
    let spec = DatasetSpec {
        kind,
        count: args.count.unwrap_or(10_000),
        seed: args.seed.unwrap_or(1),
        heldout_frac: args.heldout_frac.unwrap_or(0.1),
    };
    let split = match spec.kind {
        DatasetKind::Quantumness => sampler::make_quantumness_dataset(&spec),
        DatasetKind::Gate(_) => sampler::make_gate_dataset(&spec),
    };
    sampler::export_csv(&args.path, &spec, &split)
        .map_err(|e| CliError::Run(RunError::Io(e)))?;
    println!(
        "wrote {} samples ({} held out) to {}",
        spec.count,
        split.heldout.len(),
        args.path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::TrainGate(args) => cmd_train_gate(args),
        Cmd::TrainQuantumness(args) => cmd_train_quantumness(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Chain(args) => cmd_chain(args),
        Cmd::OrderSwap(args) => cmd_order_swap(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::ExportDataset(args) => cmd_export_dataset(args),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            std::process::exit(e.exit_code());
        }
    }
}
