//! `beinit` — experiment harness CLI.
//!
//! Subcommands: `qubit-sweep`, `layer-sweep`, `init-compare`, `fit-hist`,
//! `train`, `haar-check`. Every run writes a CSV to `--out` plus a `.json`
//! sidecar with the fully resolved spec. Flag defaults may come from an
//! optional `--config` key=value file; explicit flags always win, and
//! `BEINIT_SEED` supplies the seed when neither flag nor config does.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use beinit_cli::experiments::{
    haar_rows_to_csv, histogram_rows_to_csv, run_fit_histograms, run_haar_check,
    run_init_comparison, run_layer_sweep, run_qubit_sweep, InitCompareSpec, Scenario, SweepAxis,
    SweepSpec, ALL_SCENARIOS, DEFAULT_LAYER_AXIS, DEFAULT_QUBIT_AXIS, DEFAULT_TRIALS,
};
use beinit_cli::output::write_outputs;
use beinit_cli::pipeline::{prepare, DataOptions, PreparedData};
use beinit_core::ansatz::AnsatzConfig;
use beinit_core::distributions::DistributionSpec;
use beinit_core::trainer::{
    beinit_train, InitStrategy, PerturbationConfig, TrainConfig, DEFAULT_GAMMA,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const SEED_ENV_VAR: &str = "BEINIT_SEED";
const DEFAULT_SEED: u64 = 42;
const DEFAULT_ETA: f64 = 0.01;

#[derive(Parser)]
#[command(
    name = "beinit",
    version,
    about = "Gradient-variance experiments for beta-initialized quantum neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance of the first cost partial vs qubit count, per scenario
    QubitSweep(SweepArgs),
    /// Variance of the first cost partial vs layer count, per scenario
    LayerSweep(SweepArgs),
    /// Data-free variance comparison of Unif(0,2π), Beta(1,2π), N(0,2π)
    InitCompare(InitCompareArgs),
    /// Fit beta/uniform/normal to the normalized data; emit histogram pairs
    FitHist(FitHistArgs),
    /// Run the full training loop and emit its per-iteration history
    Train(TrainArgs),
    /// Monte-Carlo check of the Haar first and second moment formulas
    HaarCheck(HaarCheckArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV path
    #[arg(long)]
    dataset: PathBuf,
    /// Label column index (default: last column)
    #[arg(long)]
    label_column: Option<usize>,
    /// Treat the first row as data instead of a header
    #[arg(long)]
    no_header: bool,
    /// Class mapped to +1 (default: first distinct label)
    #[arg(long)]
    class_a: Option<String>,
    /// Class mapped to -1 (default: second distinct label)
    #[arg(long)]
    class_b: Option<String>,
    /// Reduce to this many PCA components before normalization
    #[arg(long)]
    pca: Option<usize>,
}

impl DataArgs {
    fn options(&self) -> DataOptions {
        let mut options = DataOptions::new(self.dataset.clone());
        options.label_column = self.label_column;
        options.has_header = !self.no_header;
        options.class_a = self.class_a.clone();
        options.class_b = self.class_b.clone();
        options.pca_dim = self.pca;
        options
    }

    fn sidecar_fields(&self, data: &PreparedData) -> serde_json::Value {
        json!({
            "dataset": self.dataset.display().to_string(),
            "label_column": self.label_column,
            "has_header": !self.no_header,
            "class_a": data.class_a,
            "class_b": data.class_b,
            "pca": self.pca,
            "samples": data.dataset.num_samples(),
            "feature_dim": data.dataset.feature_dim(),
            "beta_alpha": data.beta.params.alpha,
            "beta_beta": data.beta.params.beta,
            "beta_fit_converged": data.beta.converged,
            "uniform_lo": uniform_bounds(&data.uniform).0,
            "uniform_hi": uniform_bounds(&data.uniform).1,
            "normal_mean": normal_params(&data.normal).0,
            "normal_variance": normal_params(&data.normal).1,
        })
    }
}

fn uniform_bounds(spec: &DistributionSpec) -> (f64, f64) {
    match spec {
        DistributionSpec::Uniform { lo, hi } => (*lo, *hi),
        _ => unreachable!("pipeline always fits a uniform"),
    }
}

fn normal_params(spec: &DistributionSpec) -> (f64, f64) {
    match spec {
        DistributionSpec::Normal { mean, variance } => (*mean, *variance),
        _ => unreachable!("pipeline always fits a normal"),
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Base RNG seed (default: $BEINIT_SEED, then 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; the .json sidecar is written beside it
    #[arg(long)]
    out: PathBuf,
    /// Optional key=value file supplying defaults for the other flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated qubit counts: the axis for qubit-sweep, one fixed
    /// value for layer-sweep
    #[arg(long, value_delimiter = ',')]
    qubits: Vec<usize>,
    /// Comma-separated layer counts: one fixed value for qubit-sweep, the
    /// axis for layer-sweep
    #[arg(long, value_delimiter = ',')]
    layers: Vec<usize>,
    /// Scenario subset (uniform-no-perturb, uniform-perturb, beta-perturb)
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<String>,
    /// Initializations per sweep point
    #[arg(long)]
    trials: Option<usize>,
    /// Noise scale for the perturbed scenarios
    #[arg(long)]
    eta: Option<f64>,
    /// Decay bias of the noise schedule
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct InitCompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated qubit counts to compare at
    #[arg(long, value_delimiter = ',')]
    qubits: Vec<usize>,
    /// Circuit depth
    #[arg(long, value_delimiter = ',')]
    layers: Vec<usize>,
    /// Initializations per point
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct FitHistArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Histogram bin count
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Register width
    #[arg(long, value_delimiter = ',')]
    qubits: Vec<usize>,
    /// Circuit depth
    #[arg(long, value_delimiter = ',')]
    layers: Vec<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    /// Train fraction of the shuffled split
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Noise scale; omit to disable the perturbation entirely
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// eb-beta | uniform:LO:HI | beta:A:B | normal:MEAN:VAR
    #[arg(long)]
    init: Option<String>,
}

#[derive(Args)]
struct HaarCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Unitary dimension
    #[arg(long)]
    dim: Option<usize>,
    /// Monte-Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
}

/// key=value defaults file; `#` starts a comment.
struct ConfigFile(HashMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let content = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (number, line) in content.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!(
                        "config {}:{}: expected key=value, got {line:?}",
                        path.display(),
                        number + 1
                    );
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}={raw}: {e}")),
        }
    }

    fn get_usize_list(&self, key: &str) -> anyhow::Result<Option<Vec<usize>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|cell| {
                    cell.trim()
                        .parse()
                        .map_err(|e| anyhow::anyhow!("config key {key}={raw}: {e}"))
                })
                .collect::<anyhow::Result<Vec<usize>>>()
                .map(Some),
        }
    }
}

fn resolve<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

fn resolve_seed(flag: Option<u64>, config: &ConfigFile) -> anyhow::Result<u64> {
    if let Some(seed) = flag.or(config.get("seed")?) {
        return Ok(seed);
    }
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        return raw
            .parse()
            .with_context(|| format!("{SEED_ENV_VAR}={raw} is not a valid seed"));
    }
    Ok(DEFAULT_SEED)
}

fn resolve_list(flag: &[usize], config: Option<Vec<usize>>, default: &[usize]) -> Vec<usize> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        config.unwrap_or_else(|| default.to_vec())
    }
}

fn single_value(values: &[usize], what: &str) -> anyhow::Result<usize> {
    match values {
        [value] => Ok(*value),
        _ => bail!("expected exactly one {what}, got {values:?}"),
    }
}

fn parse_scenarios(names: &[String]) -> anyhow::Result<Vec<Scenario>> {
    if names.is_empty() {
        return Ok(ALL_SCENARIOS.to_vec());
    }
    names
        .iter()
        .map(|name| {
            Scenario::parse(name).ok_or_else(|| {
                anyhow::anyhow!(
                    "unknown scenario {name:?}; expected one of {}",
                    ALL_SCENARIOS
                        .iter()
                        .map(|s| s.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
        })
        .collect()
}

fn parse_init(text: &str) -> anyhow::Result<InitStrategy> {
    if text == "eb-beta" {
        return Ok(InitStrategy::EmpiricalBayesBeta);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let two_floats = |name: &str| -> anyhow::Result<(f64, f64)> {
        if parts.len() != 3 {
            bail!("init {text:?}: expected {name}:A:B");
        }
        Ok((parts[1].parse()?, parts[2].parse()?))
    };
    let spec = match parts[0] {
        "uniform" => {
            let (lo, hi) = two_floats("uniform")?;
            DistributionSpec::Uniform { lo, hi }
        }
        "beta" => {
            let (alpha, beta) = two_floats("beta")?;
            DistributionSpec::Beta { alpha, beta }
        }
        "normal" => {
            let (mean, variance) = two_floats("normal")?;
            DistributionSpec::Normal { mean, variance }
        }
        other => bail!("unknown init kind {other:?}; expected eb-beta, uniform, beta, or normal"),
    };
    Ok(InitStrategy::Explicit(spec))
}

fn init_label(init: &InitStrategy) -> String {
    match init {
        InitStrategy::EmpiricalBayesBeta => "eb-beta".to_string(),
        InitStrategy::Explicit(DistributionSpec::Uniform { lo, hi }) => {
            format!("uniform:{lo}:{hi}")
        }
        InitStrategy::Explicit(DistributionSpec::Beta { alpha, beta }) => {
            format!("beta:{alpha}:{beta}")
        }
        InitStrategy::Explicit(DistributionSpec::Normal { mean, variance }) => {
            format!("normal:{mean}:{variance}")
        }
    }
}

fn run_sweep_command(args: &SweepArgs, axis: SweepAxis) -> anyhow::Result<()> {
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let qubits = resolve_list(&args.qubits, config.get_usize_list("qubits")?, &[]);
    let layers = resolve_list(&args.layers, config.get_usize_list("layers")?, &[]);
    let (axis_values, fixed_qubits, fixed_layers) = match axis {
        SweepAxis::Qubits => {
            let axis_values = if qubits.is_empty() {
                DEFAULT_QUBIT_AXIS.to_vec()
            } else {
                qubits
            };
            let fixed = if layers.is_empty() {
                2
            } else {
                single_value(&layers, "--layers value for a qubit sweep")?
            };
            (axis_values, 0, fixed)
        }
        SweepAxis::Layers => {
            let axis_values = if layers.is_empty() {
                DEFAULT_LAYER_AXIS.to_vec()
            } else {
                layers
            };
            let fixed = if qubits.is_empty() {
                4
            } else {
                single_value(&qubits, "--qubits value for a layer sweep")?
            };
            (axis_values, fixed, 0)
        }
    };

    let spec = SweepSpec {
        axis,
        axis_values,
        fixed_layers,
        fixed_qubits,
        scenarios: parse_scenarios(&args.scenarios)?,
        trials: resolve(args.trials, config.get("trials")?, DEFAULT_TRIALS),
        seed: resolve_seed(args.common.seed, &config)?,
        eta: resolve(args.eta, config.get("eta")?, DEFAULT_ETA),
        gamma: resolve(args.gamma, config.get("gamma")?, DEFAULT_GAMMA),
    };

    let data = prepare(&args.data.options())?;
    let result = match axis {
        SweepAxis::Qubits => run_qubit_sweep(&spec, &data)?,
        SweepAxis::Layers => run_layer_sweep(&spec, &data)?,
    };

    let mut sidecar = args.data.sidecar_fields(&data);
    let fields = sidecar.as_object_mut().expect("sidecar is an object");
    fields.insert("command".into(), json!(format!("{}-sweep", axis.name())));
    fields.insert("axis".into(), json!(axis.name()));
    fields.insert("axis_values".into(), json!(spec.axis_values));
    match axis {
        SweepAxis::Qubits => fields.insert("fixed_layers".into(), json!(spec.fixed_layers)),
        SweepAxis::Layers => fields.insert("fixed_qubits".into(), json!(spec.fixed_qubits)),
    };
    fields.insert(
        "scenarios".into(),
        json!(spec.scenarios.iter().map(|s| s.name()).collect::<Vec<_>>()),
    );
    fields.insert("trials".into(), json!(spec.trials));
    fields.insert("seed".into(), json!(spec.seed));
    fields.insert("eta".into(), json!(spec.eta));
    fields.insert("gamma".into(), json!(spec.gamma));

    write_outputs(&args.common.out, &result.to_csv(), &sidecar)
}

fn run_init_compare_command(args: &InitCompareArgs) -> anyhow::Result<()> {
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let qubit_values = resolve_list(
        &args.qubits,
        config.get_usize_list("qubits")?,
        &DEFAULT_QUBIT_AXIS,
    );
    let layer_values = resolve_list(&args.layers, config.get_usize_list("layers")?, &[2]);
    let spec = InitCompareSpec {
        qubit_values,
        layers: single_value(&layer_values, "--layers value")?,
        trials: resolve(args.trials, config.get("trials")?, DEFAULT_TRIALS),
        seed: resolve_seed(args.common.seed, &config)?,
    };
    let result = run_init_comparison(&spec)?;
    let sidecar = json!({
        "command": "init-compare",
        "axis": "qubits",
        "axis_values": spec.qubit_values,
        "layers": spec.layers,
        "trials": spec.trials,
        "seed": spec.seed,
        "distributions": ["uniform-0-2pi", "beta-1-2pi", "normal-0-2pi"],
    });
    write_outputs(&args.common.out, &result.to_csv(), &sidecar)
}

fn run_fit_hist_command(args: &FitHistArgs) -> anyhow::Result<()> {
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let bins = resolve(args.bins, config.get("bins")?, 30);
    let seed = resolve_seed(args.common.seed, &config)?;
    let data = prepare(&args.data.options())?;
    let rows = run_fit_histograms(&data, bins, seed)?;

    let mut sidecar = args.data.sidecar_fields(&data);
    let fields = sidecar.as_object_mut().expect("sidecar is an object");
    fields.insert("command".into(), json!("fit-hist"));
    fields.insert("bins".into(), json!(bins));
    fields.insert("seed".into(), json!(seed));

    write_outputs(&args.common.out, &histogram_rows_to_csv(&rows), &sidecar)
}

fn run_train_command(args: &TrainArgs) -> anyhow::Result<()> {
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let qubits = resolve_list(&args.qubits, config.get_usize_list("qubits")?, &[2]);
    let layers = resolve_list(&args.layers, config.get_usize_list("layers")?, &[1]);
    let ansatz_config = AnsatzConfig::new(
        single_value(&qubits, "--qubits value")?,
        single_value(&layers, "--layers value")?,
    )?;

    let eta = args.eta.or(config.get("eta")?);
    let gamma = resolve(args.gamma, config.get("gamma")?, DEFAULT_GAMMA);
    let perturbation = eta
        .map(|eta| PerturbationConfig::new(eta, gamma))
        .transpose()?;
    let init = parse_init(&resolve(
        args.init.clone(),
        config.get("init")?,
        "eb-beta".to_string(),
    ))?;

    let train_config = TrainConfig {
        learning_rate: resolve(args.learning_rate, config.get("learning_rate")?, 0.1),
        momentum: resolve(args.momentum, config.get("momentum")?, 0.9),
        iterations: resolve(args.iterations, config.get("iterations")?, 50),
        perturbation,
        init: init.clone(),
        split_ratio: resolve(args.split_ratio, config.get("split_ratio")?, 0.8),
        seed: resolve_seed(args.common.seed, &config)?,
    };

    let data = prepare(&args.data.options())?;
    let outcome = beinit_train(&data.dataset, &ansatz_config, &train_config)?;

    let mut sidecar = args.data.sidecar_fields(&data);
    let fields = sidecar.as_object_mut().expect("sidecar is an object");
    fields.insert("command".into(), json!("train"));
    fields.insert("qubits".into(), json!(ansatz_config.num_qubits));
    fields.insert("layers".into(), json!(ansatz_config.num_layers));
    fields.insert("iterations".into(), json!(train_config.iterations));
    fields.insert("learning_rate".into(), json!(train_config.learning_rate));
    fields.insert("momentum".into(), json!(train_config.momentum));
    fields.insert("split_ratio".into(), json!(train_config.split_ratio));
    fields.insert("eta".into(), json!(eta));
    fields.insert("gamma".into(), json!(gamma));
    fields.insert("init".into(), json!(init_label(&init)));
    fields.insert("seed".into(), json!(train_config.seed));
    fields.insert(
        "init_beta_alpha".into(),
        json!(outcome.beta_fit.map(|f| f.params.alpha)),
    );
    fields.insert(
        "init_beta_beta".into(),
        json!(outcome.beta_fit.map(|f| f.params.beta)),
    );
    fields.insert("train_samples".into(), json!(outcome.train_samples));
    fields.insert("test_samples".into(), json!(outcome.test_samples));

    write_outputs(&args.common.out, &outcome.history.to_csv(), &sidecar)
}

fn run_haar_check_command(args: &HaarCheckArgs) -> anyhow::Result<()> {
    let config = ConfigFile::load(args.common.config.as_deref())?;
    let dim = resolve(args.dim, config.get("dim")?, 2);
    let samples = resolve(args.samples, config.get("samples")?, 10_000);
    let seed = resolve_seed(args.common.seed, &config)?;
    let estimates = run_haar_check(dim, samples, seed)?;
    let sidecar = json!({
        "command": "haar-check",
        "dim": dim,
        "samples": samples,
        "seed": seed,
    });
    write_outputs(&args.common.out, &haar_rows_to_csv(dim, &estimates), &sidecar)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::QubitSweep(args) => run_sweep_command(&args, SweepAxis::Qubits),
        Command::LayerSweep(args) => run_sweep_command(&args, SweepAxis::Layers),
        Command::InitCompare(args) => run_init_compare_command(&args),
        Command::FitHist(args) => run_fit_hist_command(&args),
        Command::Train(args) => run_train_command(&args),
        Command::HaarCheck(args) => run_haar_check_command(&args),
    }
}
