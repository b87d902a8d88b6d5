//! Dense statevector simulation kernel.
//!
//! A register of `q` qubits is stored as `2^q` complex amplitudes. Qubit 0 is
//! the **most significant bit** of the basis index: for q = 2 the basis order
//! is |00⟩, |01⟩, |10⟩, |11⟩ and |10⟩ (qubit 0 set) sits at index 2.
//!
//! Rotations follow the half-angle convention `R_A(θ) = exp(−iθA/2)` for
//! Pauli generator `A`; callers that want the full-angle gate `exp(−ixA)`
//! pass `2x`.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Memory guard: 2^24 amplitudes (256 MiB of complex doubles).
pub const MAX_QUBITS: usize = 24;

/// Pauli rotation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// A concrete gate instance: parameterized rotations and CNOT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rotation {
        axis: RotationAxis,
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Dense amplitude vector over the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `q` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCapacity {
                requested: num_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// L2 norm of the amplitude vector.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Index stride between the |0⟩ and |1⟩ halves of `qubit`.
    #[inline]
    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies `R_axis(angle) = exp(−i·angle·σ_axis/2)` to one qubit.
    pub fn apply_rotation(&mut self, axis: RotationAxis, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let c = (angle / 2.0).cos();
        let s = (angle / 2.0).sin();
        let stride = self.stride(qubit);
        match axis {
            RotationAxis::X => {
                // [[c, -is], [-is, c]]
                let is = Complex64::new(0.0, -s);
                self.for_each_pair(stride, |a0, a1| {
                    let new0 = c * a0 + is * a1;
                    let new1 = is * a0 + c * a1;
                    (new0, new1)
                });
            }
            RotationAxis::Y => {
                // [[c, -s], [s, c]]
                self.for_each_pair(stride, |a0, a1| {
                    let new0 = c * a0 - s * a1;
                    let new1 = s * a0 + c * a1;
                    (new0, new1)
                });
            }
            RotationAxis::Z => {
                // diag(e^{-iθ/2}, e^{iθ/2})
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                self.for_each_pair(stride, |a0, a1| (p0 * a0, p1 * a1));
            }
        }
        Ok(())
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::EqualControlTarget { qubit: control });
        }
        let c_mask = self.stride(control);
        let t_mask = self.stride(target);
        for base in 0..self.amplitudes.len() {
            // Visit each swap pair once: control set, target clear.
            if base & c_mask != 0 && base & t_mask == 0 {
                self.amplitudes.swap(base, base | t_mask);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        match *gate {
            GateOp::Rotation { axis, qubit, angle } => self.apply_rotation(axis, qubit, angle),
            GateOp::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }

    /// ⟨Z⟩ on one qubit: Σ |amp_b|² · (+1 if the qubit's bit is 0, else −1).
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.stride(qubit);
        let mut value = 0.0;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            if index & mask == 0 {
                value += p;
            } else {
                value -= p;
            }
        }
        Ok(value)
    }

    #[inline]
    fn for_each_pair<F>(&mut self, stride: usize, mut update: F)
    where
        F: FnMut(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for offset in base..base + stride {
                let i0 = offset;
                let i1 = offset + stride;
                let (new0, new1) = update(self.amplitudes[i0], self.amplitudes[i1]);
                self.amplitudes[i0] = new0;
                self.amplitudes[i1] = new1;
            }
            base += 2 * stride;
        }
    }
}

/// Dense matrix–vector product `U · v` for a row-major square `matrix`.
///
/// Supports the brute-force circuit oracle and the Haar diagnostics, where
/// explicit d×d unitaries are multiplied into small vectors.
pub fn apply_dense_unitary(matrix: &[Complex64], vector: &[Complex64]) -> Result<Vec<Complex64>> {
    let dim = vector.len();
    if dim == 0 {
        return Err(Error::EmptyInput("vector"));
    }
    if matrix.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: matrix.len(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (row, out_elem) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (col, v) in vector.iter().enumerate() {
            acc += matrix[row * dim + col] * v;
        }
        *out_elem = acc;
    }
    Ok(out)
}
