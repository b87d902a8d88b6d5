//! The variance studies: qubit sweep, layer sweep, fixed-hyperparameter
//! initialization comparison, distribution-fit histograms, and the Haar
//! moment battery.
//!
//! Every trial draws from its own derived seed stream keyed by
//! (scenario, axis value, trial), so adding or removing scenarios, resizing
//! the axis, or running trials in parallel never changes another row.
//! Sweeps measure the variance of ∂cost/∂θ₀ across `trials` fresh
//! initializations; perturbed scenarios apply one noise step at iteration 0
//! before measuring. The data-free comparison differentiates the raw circuit
//! output instead, since no labels exist there.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use beinit_core::ansatz::{AnsatzConfig, ParameterTensor};
use beinit_core::data::Dataset;
use beinit_core::distributions::DistributionSpec;
use beinit_core::error::Error;
use beinit_core::gradient::{expectation_partial, parameter_shift_partial, sample_variance};
use beinit_core::haar::{estimate_m1, estimate_m2, M2Indices, MomentEstimate};
use beinit_core::rng::derive_seed;
use beinit_core::trainer::{perturb, perturbation_sigma};
use beinit_core::Result;
use rayon::prelude::*;

use crate::pipeline::PreparedData;

/// Initialization scenarios of the data-driven sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    UniformNoPerturb,
    UniformPerturb,
    BetaPerturb,
}

pub const ALL_SCENARIOS: [Scenario; 3] = [
    Scenario::UniformNoPerturb,
    Scenario::UniformPerturb,
    Scenario::BetaPerturb,
];

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::UniformNoPerturb => "uniform-no-perturb",
            Scenario::UniformPerturb => "uniform-perturb",
            Scenario::BetaPerturb => "beta-perturb",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        ALL_SCENARIOS.iter().copied().find(|s| s.name() == text)
    }

    /// Stable stream id; independent of which scenarios a run selects.
    fn stream_id(self) -> u64 {
        match self {
            Scenario::UniformNoPerturb => 0,
            Scenario::UniformPerturb => 1,
            Scenario::BetaPerturb => 2,
        }
    }

    fn perturbed(self) -> bool {
        !matches!(self, Scenario::UniformNoPerturb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Qubits,
    Layers,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Qubits => "qubits",
            SweepAxis::Layers => "layers",
        }
    }
}

pub const DEFAULT_QUBIT_AXIS: [usize; 7] = [4, 5, 6, 7, 8, 9, 10];
pub const DEFAULT_LAYER_AXIS: [usize; 9] = [2, 4, 6, 8, 10, 15, 20, 25, 30];
pub const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub axis_values: Vec<usize>,
    /// Depth used at every point of a qubit sweep.
    pub fixed_layers: usize,
    /// Width used at every point of a layer sweep.
    pub fixed_qubits: usize,
    pub scenarios: Vec<Scenario>,
    pub trials: usize,
    pub seed: u64,
    pub eta: f64,
    pub gamma: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis_values.is_empty() {
            return Err(Error::EmptyInput("axis values"));
        }
        if !self.axis_values.windows(2).all(|w| w[0] < w[1]) || self.axis_values[0] == 0 {
            return Err(Error::InvalidParameter(
                "axis values must be positive and strictly increasing".into(),
            ));
        }
        if self.scenarios.is_empty() {
            return Err(Error::EmptyInput("scenarios"));
        }
        if self.trials < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.trials,
            });
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(
                "eta must be positive and gamma finite".into(),
            ));
        }
        Ok(())
    }
}

/// One measured sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis_value: usize,
    pub scenario: String,
    pub variance: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis_value,scenario,variance,trials,seed\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.axis_value, row.scenario, row.variance, row.trials, row.seed
            );
        }
        out
    }

    pub fn variance_at(&self, axis_value: usize, scenario: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.scenario == scenario)
            .map(|r| r.variance)
    }
}

/// Per-trial first-parameter cost partials for one scenario at one sweep
/// point. Trials run in parallel on derived per-trial streams.
fn scenario_partials(
    dataset: &Dataset,
    config: &AnsatzConfig,
    init: &DistributionSpec,
    scenario: Scenario,
    axis_value: usize,
    spec: &SweepSpec,
) -> Result<Vec<f64>> {
    let point_seed = derive_seed(spec.seed, scenario.stream_id(), axis_value as u64);
    let count = config.parameter_count();
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let draw_seed = derive_seed(point_seed, 0, trial as u64);
            let values = init.sample(count, draw_seed)?;
            let mut theta =
                ParameterTensor::from_values(config.num_layers, config.num_qubits, values)?;
            if scenario.perturbed() {
                // One noise step at iteration 0, where (1+0)^(γ+σ²ᵢ) ≡ 1 and
                // the applied variance is exactly η for any gradient variance.
                let sigma2_noise = perturbation_sigma(spec.eta, spec.gamma, 0, 0.0);
                let perturb_seed = derive_seed(point_seed, 1, trial as u64);
                theta = perturb(&theta, sigma2_noise, perturb_seed)?;
            }
            parameter_shift_partial(dataset, &theta, 0, config)
        })
        .collect()
}

fn run_sweep(spec: &SweepSpec, data: &PreparedData) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut scenarios = spec.scenarios.clone();
    scenarios.sort_by_key(|s| s.stream_id());
    scenarios.dedup();

    let mut rows = Vec::new();
    for &axis_value in &spec.axis_values {
        let (num_qubits, num_layers) = match spec.axis {
            SweepAxis::Qubits => (axis_value, spec.fixed_layers),
            SweepAxis::Layers => (spec.fixed_qubits, axis_value),
        };
        let config = AnsatzConfig::new(num_qubits, num_layers)?;
        for &scenario in &scenarios {
            let init = match scenario {
                Scenario::UniformNoPerturb | Scenario::UniformPerturb => data.uniform,
                Scenario::BetaPerturb => data.beta_spec(),
            };
            let partials =
                scenario_partials(&data.dataset, &config, &init, scenario, axis_value, spec)?;
            rows.push(ResultRow {
                axis_value,
                scenario: scenario.name().to_string(),
                variance: sample_variance(&partials),
                trials: spec.trials,
                seed: spec.seed,
            });
        }
    }
    Ok(ExperimentResult { rows })
}

/// Gradient variance across initializations as the register grows.
pub fn run_qubit_sweep(spec: &SweepSpec, data: &PreparedData) -> Result<ExperimentResult> {
    if spec.axis != SweepAxis::Qubits {
        return Err(Error::InvalidParameter("expected a qubit-axis spec".into()));
    }
    run_sweep(spec, data)
}

/// Gradient variance across initializations as the circuit deepens.
pub fn run_layer_sweep(spec: &SweepSpec, data: &PreparedData) -> Result<ExperimentResult> {
    if spec.axis != SweepAxis::Layers {
        return Err(Error::InvalidParameter("expected a layer-axis spec".into()));
    }
    run_sweep(spec, data)
}

/// Fixed-hyperparameter comparison on the fixed |0…0⟩ input: Unif(0, 2π),
/// Beta(1, 2π), and N(0, 2π), differentiating the raw circuit output.
#[derive(Debug, Clone)]
pub struct InitCompareSpec {
    pub qubit_values: Vec<usize>,
    pub layers: usize,
    pub trials: usize,
    pub seed: u64,
}

const INIT_COMPARE_DISTS: [(&str, DistributionSpec, u64); 3] = [
    (
        "uniform-0-2pi",
        DistributionSpec::Uniform { lo: 0.0, hi: TAU },
        10,
    ),
    (
        "beta-1-2pi",
        DistributionSpec::Beta {
            alpha: 1.0,
            beta: TAU,
        },
        11,
    ),
    (
        "normal-0-2pi",
        DistributionSpec::Normal {
            mean: 0.0,
            variance: TAU,
        },
        12,
    ),
];

pub fn run_init_comparison(spec: &InitCompareSpec) -> Result<ExperimentResult> {
    if spec.qubit_values.is_empty() {
        return Err(Error::EmptyInput("qubit values"));
    }
    if spec.trials < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: spec.trials,
        });
    }
    let mut rows = Vec::new();
    for &q in &spec.qubit_values {
        let config = AnsatzConfig::new(q, spec.layers)?;
        let count = config.parameter_count();
        for (name, dist, stream) in INIT_COMPARE_DISTS {
            let point_seed = derive_seed(spec.seed, stream, q as u64);
            let partials: Vec<f64> = (0..spec.trials)
                .into_par_iter()
                .map(|trial| {
                    let draw_seed = derive_seed(point_seed, 0, trial as u64);
                    let values = dist.sample(count, draw_seed)?;
                    let theta =
                        ParameterTensor::from_values(spec.layers, q, values)?;
                    expectation_partial(&[0.0], &theta, 0, &config)
                })
                .collect::<Result<_>>()?;
            rows.push(ResultRow {
                axis_value: q,
                scenario: name.to_string(),
                variance: sample_variance(&partials),
                trials: spec.trials,
                seed: spec.seed,
            });
        }
    }
    Ok(ExperimentResult { rows })
}

/// Histogram comparison of the normalized data against equal-size samples
/// from each fitted distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub dist: String,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count_data: usize,
    pub count_sampled: usize,
}

pub fn histogram_rows_to_csv(rows: &[HistogramRow]) -> String {
    let mut out = String::from("dist,bin_lo,bin_hi,count_data,count_sampled\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.dist, row.bin_lo, row.bin_hi, row.count_data, row.count_sampled
        );
    }
    out
}

pub fn run_fit_histograms(
    data: &PreparedData,
    bins: usize,
    seed: u64,
) -> Result<Vec<HistogramRow>> {
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let pooled = data.dataset.flat_features();
    let mut rows = Vec::new();
    let fitted = [
        ("beta", data.beta_spec(), 20u64),
        ("uniform", data.uniform, 21),
        ("normal", data.normal, 22),
    ];
    for (name, dist, stream) in fitted {
        let sampled = dist.sample(pooled.len(), derive_seed(seed, stream, 0))?;
        let lo = pooled
            .iter()
            .chain(&sampled)
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = pooled
            .iter()
            .chain(&sampled)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        let bin_of = |value: f64| -> usize {
            if width == 0.0 {
                return 0;
            }
            (((value - lo) / width) as usize).min(bins - 1)
        };
        let mut count_data = vec![0usize; bins];
        let mut count_sampled = vec![0usize; bins];
        for &v in pooled {
            count_data[bin_of(v)] += 1;
        }
        for &v in &sampled {
            count_sampled[bin_of(v)] += 1;
        }
        for b in 0..bins {
            rows.push(HistogramRow {
                dist: name.to_string(),
                bin_lo: lo + b as f64 * width,
                bin_hi: if b + 1 == bins {
                    hi
                } else {
                    lo + (b + 1) as f64 * width
                },
                count_data: count_data[b],
                count_sampled: count_sampled[b],
            });
        }
    }
    Ok(rows)
}

/// Standard battery of Haar moment checks: both M₁ delta cases and the four
/// characteristic M₂ index patterns.
pub fn run_haar_check(d: usize, samples: usize, seed: u64) -> Result<Vec<MomentEstimate>> {
    if d < 2 {
        return Err(Error::InvalidParameter(
            "haar check needs dimension >= 2".into(),
        ));
    }
    let mut estimates = vec![
        estimate_m1(d, 0, 0, 0, 0, samples, seed)?,
        estimate_m1(d, 0, 0, 1, 1, samples, seed)?,
    ];
    let m2_cases = [
        // E[|U₀₀|⁴]
        M2Indices {
            i1: 0,
            j1: 0,
            i2: 0,
            j2: 0,
            i1p: 0,
            j1p: 0,
            i2p: 0,
            j2p: 0,
        },
        // E[|U₀₀|²|U₀₁|²]
        M2Indices {
            i1: 0,
            j1: 0,
            i2: 0,
            j2: 1,
            i1p: 0,
            j1p: 0,
            i2p: 0,
            j2p: 1,
        },
        // E[|U₀₀|²|U₁₁|²]
        M2Indices {
            i1: 0,
            j1: 0,
            i2: 1,
            j2: 1,
            i1p: 0,
            j1p: 0,
            i2p: 1,
            j2p: 1,
        },
        // no surviving delta term
        M2Indices {
            i1: 0,
            j1: 0,
            i2: 0,
            j2: 1,
            i1p: 1,
            j1p: 0,
            i2p: 0,
            j2p: 0,
        },
    ];
    for idx in m2_cases {
        estimates.push(estimate_m2(d, idx, samples, seed)?);
    }
    Ok(estimates)
}

pub fn haar_rows_to_csv(d: usize, estimates: &[MomentEstimate]) -> String {
    let mut out = String::from("d,indices,empirical_re,empirical_im,reference,abs_err,samples\n");
    for est in estimates {
        let indices = est
            .indices
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("-");
        let _ = writeln!(
            out,
            "{},m{}-{},{},{},{},{},{}",
            d,
            est.moment_order,
            indices,
            est.empirical.re,
            est.empirical.im,
            est.reference,
            est.abs_error(),
            est.sample_count
        );
    }
    out
}
