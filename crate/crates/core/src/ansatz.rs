//! Layered QNN ansatz: angle encoding followed by L layers of per-qubit
//! rotation triples with linear-chain CNOT entanglement, measured as ⟨Z⟩ on
//! one qubit.
//!
//! The encoding stage maps feature `x` to the full-angle gate `exp(−ixσₓ)`;
//! under the simulator's half-angle convention that is `RX(2x)`. When the
//! register has more qubits than features, qubit `k` receives feature
//! `k mod d`.

use crate::data::Dataset;
use crate::error::Error;
use crate::statevector::{RotationAxis, StateVector};
use crate::Result;

/// Rotation slots per qubit per layer.
pub const SLOTS_PER_QUBIT: usize = 3;

/// Entanglement pattern applied after each layer's rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Entangler {
    /// CNOT(k → k+1) for k = 0..q−2.
    #[default]
    LinearChain,
}

/// Circuit shape: qubit count, depth, per-layer rotation axes, entangler,
/// and the measured qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzConfig {
    pub num_qubits: usize,
    pub num_layers: usize,
    pub rotation_axes: [RotationAxis; SLOTS_PER_QUBIT],
    pub entangler: Entangler,
    pub observable_qubit: usize,
}

impl AnsatzConfig {
    /// Standard layout: (RX, RY, RZ) per qubit per layer, linear-chain
    /// entanglement, ⟨Z⟩ read out on qubit 0.
    pub fn new(num_qubits: usize, num_layers: usize) -> Result<Self> {
        let config = Self {
            num_qubits,
            num_layers,
            rotation_axes: [RotationAxis::X, RotationAxis::Y, RotationAxis::Z],
            entangler: Entangler::LinearChain,
            observable_qubit: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 {
            return Err(Error::InvalidParameter(format!(
                "ansatz needs at least 2 qubits, got {}",
                self.num_qubits
            )));
        }
        if self.num_layers < 1 {
            return Err(Error::InvalidParameter(
                "ansatz needs at least 1 layer".into(),
            ));
        }
        if self.observable_qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                qubit: self.observable_qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Number of trainable parameters, `L·q·3`.
    pub fn parameter_count(&self) -> usize {
        self.num_layers * self.num_qubits * SLOTS_PER_QUBIT
    }
}

/// Trainable angles of shape L × q × 3, stored flat in layer-major order:
/// flat index 0 is (layer 0, qubit 0, slot 0).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTensor {
    num_layers: usize,
    num_qubits: usize,
    values: Vec<f64>,
}

impl ParameterTensor {
    pub fn zeros(num_layers: usize, num_qubits: usize) -> Self {
        Self {
            num_layers,
            num_qubits,
            values: vec![0.0; num_layers * num_qubits * SLOTS_PER_QUBIT],
        }
    }

    pub fn from_values(num_layers: usize, num_qubits: usize, values: Vec<f64>) -> Result<Self> {
        let expected = num_layers * num_qubits * SLOTS_PER_QUBIT;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            num_layers,
            num_qubits,
            values,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn flat_index(&self, layer: usize, qubit: usize, slot: usize) -> usize {
        (layer * self.num_qubits + qubit) * SLOTS_PER_QUBIT + slot
    }

    pub fn get(&self, layer: usize, qubit: usize, slot: usize) -> f64 {
        self.values[self.flat_index(layer, qubit, slot)]
    }

    pub fn set(&mut self, layer: usize, qubit: usize, slot: usize, value: f64) {
        let index = self.flat_index(layer, qubit, slot);
        self.values[index] = value;
    }

    /// Shape agreement with a circuit config.
    pub fn matches(&self, config: &AnsatzConfig) -> bool {
        self.num_layers == config.num_layers && self.num_qubits == config.num_qubits
    }
}

/// Gate template: a parameterized rotation bound to a flat parameter slot, or
/// a fixed CNOT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduledOp {
    Rotation {
        axis: RotationAxis,
        qubit: usize,
        param_index: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Ordered gate templates for all layers of a config.
#[derive(Debug, Clone)]
pub struct LayerSchedule {
    ops: Vec<ScheduledOp>,
    num_qubits: usize,
    parameter_count: usize,
    observable_qubit: usize,
}

impl LayerSchedule {
    pub fn ops(&self) -> &[ScheduledOp] {
        &self.ops
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn observable_qubit(&self) -> usize {
        self.observable_qubit
    }

    pub fn rotation_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ScheduledOp::Rotation { .. }))
            .count()
    }

    pub fn cnot_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, ScheduledOp::Cnot { .. }))
            .count()
    }
}

/// Expands a config into its gate templates: per layer, three rotations per
/// qubit referencing slots (l, k, 0..2), then the entangling CNOTs.
pub fn build_layer_schedule(config: &AnsatzConfig) -> Result<LayerSchedule> {
    config.validate()?;
    let q = config.num_qubits;
    let mut ops = Vec::with_capacity(config.num_layers * (q * SLOTS_PER_QUBIT + q - 1));
    for layer in 0..config.num_layers {
        for qubit in 0..q {
            for (slot, &axis) in config.rotation_axes.iter().enumerate() {
                ops.push(ScheduledOp::Rotation {
                    axis,
                    qubit,
                    param_index: (layer * q + qubit) * SLOTS_PER_QUBIT + slot,
                });
            }
        }
        match config.entangler {
            Entangler::LinearChain => {
                for k in 0..q - 1 {
                    ops.push(ScheduledOp::Cnot {
                        control: k,
                        target: k + 1,
                    });
                }
            }
        }
    }
    Ok(LayerSchedule {
        ops,
        num_qubits: q,
        parameter_count: config.parameter_count(),
        observable_qubit: config.observable_qubit,
    })
}

/// Prepares |ψ(x)⟩ from |0…0⟩: qubit k gets the full-angle X rotation
/// `exp(−i·x_{k mod d}·σₓ)`, i.e. simulator angle `2·x_{k mod d}`.
pub fn encode_input(x: &[f64], num_qubits: usize) -> Result<StateVector> {
    if x.is_empty() {
        return Err(Error::EmptyInput("feature vector"));
    }
    let mut state = StateVector::zero_state(num_qubits)?;
    for qubit in 0..num_qubits {
        let feature = x[qubit % x.len()];
        state.apply_rotation(RotationAxis::X, qubit, 2.0 * feature)?;
    }
    Ok(state)
}

/// Applies the scheduled gates with the given parameter values and reads out
/// ⟨Z⟩ on the schedule's observable qubit. `encoded` is left untouched.
pub(crate) fn run_schedule(
    encoded: &StateVector,
    schedule: &LayerSchedule,
    theta: &[f64],
) -> Result<f64> {
    debug_assert_eq!(theta.len(), schedule.parameter_count);
    let mut state = encoded.clone();
    for op in &schedule.ops {
        match *op {
            ScheduledOp::Rotation {
                axis,
                qubit,
                param_index,
            } => state.apply_rotation(axis, qubit, theta[param_index])?,
            ScheduledOp::Cnot { control, target } => state.apply_cnot(control, target)?,
        }
    }
    state.expect_z(schedule.observable_qubit)
}

/// Classifier output: ⟨Z⟩ on the observable qubit after encoding `x` and
/// applying every layer. Deterministic in its inputs; lies in [−1, 1].
pub fn forward(x: &[f64], theta: &ParameterTensor, config: &AnsatzConfig) -> Result<f64> {
    if !theta.matches(config) {
        return Err(Error::DimensionMismatch {
            expected: config.parameter_count(),
            actual: theta.len(),
        });
    }
    let schedule = build_layer_schedule(config)?;
    let encoded = encode_input(x, config.num_qubits)?;
    run_schedule(&encoded, &schedule, theta.values())
}

/// Mean squared deviation between labels and circuit outputs:
/// `mean_i (y_i − forward(x_i))²`.
pub fn cost(dataset: &Dataset, theta: &ParameterTensor, config: &AnsatzConfig) -> Result<f64> {
    if dataset.num_samples() == 0 {
        return Err(Error::EmptyInput("dataset"));
    }
    if !theta.matches(config) {
        return Err(Error::DimensionMismatch {
            expected: config.parameter_count(),
            actual: theta.len(),
        });
    }
    let schedule = build_layer_schedule(config)?;
    let mut total = 0.0;
    for (x, y) in dataset.iter() {
        let encoded = encode_input(x, config.num_qubits)?;
        let output = run_schedule(&encoded, &schedule, theta.values())?;
        let residual = y - output;
        total += residual * residual;
    }
    Ok(total / dataset.num_samples() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn encode_half_pi_flips_single_qubit() {
        // feature π/2 ⇒ exp(−i(π/2)σₓ) = −iσₓ, so ⟨Z⟩ = −1.
        let state = encode_input(&[PI / 2.0], 1).unwrap();
        assert!((state.expect_z(0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn encode_zero_features_is_identity() {
        let state = encode_input(&[0.0, 0.0], 4).unwrap();
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn encode_full_period_rotation_leaves_z_unchanged() {
        // exp(−iπσₓ) = −I up to global phase; all ⟨Z⟩ stay +1.
        let state = encode_input(&[PI, 0.0], 4).unwrap();
        for qubit in 0..4 {
            assert!((state.expect_z(qubit).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn encode_cycles_features_over_qubits() {
        let a = encode_input(&[0.3, 0.7], 4).unwrap();
        let b = encode_input(&[0.3, 0.7, 0.3, 0.7], 4).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn encode_rejects_empty_features() {
        assert!(matches!(
            encode_input(&[], 2),
            Err(Error::EmptyInput("feature vector"))
        ));
    }

    #[test]
    fn schedule_counts_small() {
        let config = AnsatzConfig::new(2, 1).unwrap();
        let schedule = build_layer_schedule(&config).unwrap();
        assert_eq!(schedule.rotation_count(), 6);
        assert_eq!(schedule.cnot_count(), 1);
    }

    #[test]
    fn schedule_counts_two_layers() {
        let config = AnsatzConfig::new(4, 2).unwrap();
        let schedule = build_layer_schedule(&config).unwrap();
        assert_eq!(schedule.rotation_count(), 24);
        assert_eq!(schedule.cnot_count(), 6);
        assert_eq!(schedule.parameter_count(), 24);
    }

    #[test]
    fn zero_layers_rejected() {
        assert!(AnsatzConfig::new(2, 0).is_err());
    }

    #[test]
    fn single_qubit_config_rejected() {
        assert!(AnsatzConfig::new(1, 1).is_err());
    }

    #[test]
    fn forward_identity_circuit_returns_one() {
        let config = AnsatzConfig::new(3, 2).unwrap();
        let theta = ParameterTensor::zeros(2, 3);
        let out = forward(&[0.0], &theta, &config).unwrap();
        assert!((out - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_single_pi_x_slot_flips_observable() {
        // Hand statevector check on 4 amplitudes: RX(π) on qubit 0 yields
        // −i|10⟩; the CNOT maps it to −i|11⟩; ⟨Z₀⟩ = −1.
        let config = AnsatzConfig::new(2, 1).unwrap();
        let mut theta = ParameterTensor::zeros(1, 2);
        theta.set(0, 0, 0, PI);
        let out = forward(&[0.0], &theta, &config).unwrap();
        assert!((out + 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_is_deterministic() {
        let config = AnsatzConfig::new(3, 2).unwrap();
        let values: Vec<f64> = (0..config.parameter_count())
            .map(|i| (i as f64) * 0.137)
            .collect();
        let theta = ParameterTensor::from_values(2, 3, values).unwrap();
        let x = [0.4, 0.9];
        let first = forward(&x, &theta, &config).unwrap();
        let second = forward(&x, &theta, &config).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn forward_rejects_shape_mismatch() {
        let config = AnsatzConfig::new(3, 2).unwrap();
        let theta = ParameterTensor::zeros(1, 3);
        assert!(forward(&[0.0], &theta, &config).is_err());
    }

    #[test]
    fn cost_examples() {
        let config = AnsatzConfig::new(2, 1).unwrap();
        let theta = ParameterTensor::zeros(1, 2);

        // zeros circuit on x = 0 outputs +1, so a +1 label costs nothing …
        let fit = Dataset::from_rows(vec![vec![0.0, 0.0]], vec![1.0]).unwrap();
        assert!(cost(&fit, &theta, &config).unwrap().abs() < 1e-15);

        // … and a −1 label costs (−1 − 1)² = 4.
        let miss = Dataset::from_rows(vec![vec![0.0, 0.0]], vec![-1.0]).unwrap();
        assert!((cost(&miss, &theta, &config).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cost_is_invariant_under_sample_permutation() {
        let config = AnsatzConfig::new(2, 1).unwrap();
        let values: Vec<f64> = (0..6).map(|i| 0.3 + 0.2 * i as f64).collect();
        let theta = ParameterTensor::from_values(1, 2, values).unwrap();
        let rows = vec![vec![0.1, 0.9], vec![0.8, 0.2], vec![0.5, 0.5]];
        let labels = vec![1.0, -1.0, 1.0];
        let forwardly = Dataset::from_rows(rows.clone(), labels.clone()).unwrap();
        let reversed = Dataset::from_rows(
            rows.into_iter().rev().collect(),
            labels.into_iter().rev().collect(),
        )
        .unwrap();
        let a = cost(&forwardly, &theta, &config).unwrap();
        let b = cost(&reversed, &theta, &config).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn cost_rejects_empty_dataset() {
        let config = AnsatzConfig::new(2, 1).unwrap();
        let theta = ParameterTensor::zeros(1, 2);
        let empty = Dataset::from_rows(Vec::new(), Vec::new()).unwrap();
        assert!(cost(&empty, &theta, &config).is_err());
    }
}
