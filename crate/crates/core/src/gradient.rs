//! Exact parameter-shift gradients of the squared-error cost, a central
//! finite-difference oracle, and gradient-variance estimation across random
//! initializations.
//!
//! For rotation gates under the half-angle convention the shift rule is
//! exact: `∂⟨Z⟩/∂θₖ = (f(θₖ+π/2) − f(θₖ−π/2)) / 2`. The cost partial chains
//! this through the squared loss: `∂C/∂θₖ = meanᵢ 2(f(xᵢ) − yᵢ)·∂f/∂θₖ`.
//! Only ansatz slots are differentiated; encoding angles carry data, not
//! trainable parameters.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::ansatz::{build_layer_schedule, encode_input, run_schedule, AnsatzConfig, ParameterTensor};
use crate::data::Dataset;
use crate::distributions::DistributionSpec;
use crate::error::Error;
use crate::rng::derive_seed;
use crate::Result;

/// Stream tag for per-trial seeds of variance estimation.
const VARIANCE_STREAM: u64 = 0x7661_7269;

/// Flat cost gradient, ordered like [`ParameterTensor`]'s values.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    values: Vec<f64>,
}

impl GradientVector {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Unbiased variance across the gradient's entries.
    pub fn entry_variance(&self) -> f64 {
        sample_variance(&self.values)
    }
}

/// Unbiased (divisor n−1) sample variance; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn check_inputs(
    dataset: &Dataset,
    theta: &ParameterTensor,
    k: usize,
    config: &AnsatzConfig,
) -> Result<()> {
    if dataset.num_samples() == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    if !theta.matches(config) {
        return Err(Error::DimensionMismatch {
            expected: config.parameter_count(),
            actual: theta.len(),
        });
    }
    if k >= theta.len() {
        return Err(Error::ParameterIndex {
            index: k,
            len: theta.len(),
        });
    }
    Ok(())
}

/// Parameter-shift partial of the cost with respect to flat slot `k`.
pub fn parameter_shift_partial(
    dataset: &Dataset,
    theta: &ParameterTensor,
    k: usize,
    config: &AnsatzConfig,
) -> Result<f64> {
    check_inputs(dataset, theta, k, config)?;
    let schedule = build_layer_schedule(config)?;
    let mut shifted = theta.values().to_vec();
    let center = shifted[k];
    let mut acc = 0.0;
    for (x, y) in dataset.iter() {
        let encoded = encode_input(x, config.num_qubits)?;
        let output = run_schedule(&encoded, &schedule, &shifted)?;
        shifted[k] = center + FRAC_PI_2;
        let plus = run_schedule(&encoded, &schedule, &shifted)?;
        shifted[k] = center - FRAC_PI_2;
        let minus = run_schedule(&encoded, &schedule, &shifted)?;
        shifted[k] = center;
        acc += 2.0 * (output - y) * (plus - minus) / 2.0;
    }
    Ok(acc / dataset.num_samples() as f64)
}

/// Parameter-shift partial of the raw circuit output ⟨Z⟩ for one input,
/// without the loss chain rule. Used by the data-free initialization study.
pub fn expectation_partial(
    x: &[f64],
    theta: &ParameterTensor,
    k: usize,
    config: &AnsatzConfig,
) -> Result<f64> {
    if !theta.matches(config) {
        return Err(Error::DimensionMismatch {
            expected: config.parameter_count(),
            actual: theta.len(),
        });
    }
    if k >= theta.len() {
        return Err(Error::ParameterIndex {
            index: k,
            len: theta.len(),
        });
    }
    let schedule = build_layer_schedule(config)?;
    let encoded = encode_input(x, config.num_qubits)?;
    let mut shifted = theta.values().to_vec();
    let center = shifted[k];
    shifted[k] = center + FRAC_PI_2;
    let plus = run_schedule(&encoded, &schedule, &shifted)?;
    shifted[k] = center - FRAC_PI_2;
    let minus = run_schedule(&encoded, &schedule, &shifted)?;
    Ok((plus - minus) / 2.0)
}

/// Central finite difference of the cost: `(C(θₖ+h) − C(θₖ−h)) / 2h`.
/// Verification oracle for the shift rule; independent of it.
pub fn finite_diff_partial(
    dataset: &Dataset,
    theta: &ParameterTensor,
    k: usize,
    config: &AnsatzConfig,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    check_inputs(dataset, theta, k, config)?;
    let mut plus = theta.clone();
    plus.values_mut()[k] += h;
    let mut minus = theta.clone();
    minus.values_mut()[k] -= h;
    let cost_plus = crate::ansatz::cost(dataset, &plus, config)?;
    let cost_minus = crate::ansatz::cost(dataset, &minus, config)?;
    Ok((cost_plus - cost_minus) / (2.0 * h))
}

/// Shift-rule partials for every parameter slot.
pub fn full_gradient(
    dataset: &Dataset,
    theta: &ParameterTensor,
    config: &AnsatzConfig,
) -> Result<GradientVector> {
    check_inputs(dataset, theta, 0, config)?;
    let schedule = build_layer_schedule(config)?;
    let count = theta.len();
    let mut sums = vec![0.0; count];
    let mut shifted = theta.values().to_vec();
    for (x, y) in dataset.iter() {
        let encoded = encode_input(x, config.num_qubits)?;
        let output = run_schedule(&encoded, &schedule, &shifted)?;
        let residual_factor = 2.0 * (output - y);
        for (k, sum) in sums.iter_mut().enumerate() {
            let center = shifted[k];
            shifted[k] = center + FRAC_PI_2;
            let plus = run_schedule(&encoded, &schedule, &shifted)?;
            shifted[k] = center - FRAC_PI_2;
            let minus = run_schedule(&encoded, &schedule, &shifted)?;
            shifted[k] = center;
            *sum += residual_factor * (plus - minus) / 2.0;
        }
    }
    let m = dataset.num_samples() as f64;
    for sum in &mut sums {
        *sum /= m;
    }
    Ok(GradientVector { values: sums })
}

/// Draws `trials` independent parameter tensors from `dist`, evaluates the
/// cost partial at slot `k` for each, and returns the unbiased sample
/// variance. Trials run in parallel on per-trial seed streams, so the result
/// does not depend on scheduling.
pub fn gradient_variance_over_inits(
    dataset: &Dataset,
    config: &AnsatzConfig,
    dist: &DistributionSpec,
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: trials,
        });
    }
    let partials = partials_over_inits(dataset, config, dist, trials, k, seed)?;
    Ok(sample_variance(&partials))
}

/// The per-trial cost partials behind [`gradient_variance_over_inits`].
pub fn partials_over_inits(
    dataset: &Dataset,
    config: &AnsatzConfig,
    dist: &DistributionSpec,
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    config.validate()?;
    dist.validate()?;
    let count = config.parameter_count();
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, VARIANCE_STREAM, trial as u64);
            let values = dist.sample(count, trial_seed)?;
            let theta = ParameterTensor::from_values(config.num_layers, config.num_qubits, values)?;
            parameter_shift_partial(dataset, &theta, k, config)
        })
        .collect()
}
