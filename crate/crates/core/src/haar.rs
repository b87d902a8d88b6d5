//! Monte-Carlo checks of Haar-measure moment identities on U(d).
//!
//! Unitaries are sampled by QR-factoring a matrix of i.i.d. standard complex
//! Gaussians. The Gram–Schmidt factorization used here yields the unique R
//! with positive real diagonal, which is exactly the diagonal-phase
//! correction that makes Q Haar-distributed.
//!
//! Reference values follow the Haar closed forms
//! `M₁ = δ_{i1 i1'} δ_{j1 j1'} / d` and
//! `M₂ = (δ-direct + δ-swapped)/(d²−1) − (δ-mixed pair)/(d(d²−1))`.

use num_complex::Complex64;
use rand_distr::{Distribution as _, StandardNormal};

use crate::error::Error;
use crate::rng::{derive_seed, seeded_rng};
use crate::Result;

const HAAR_STREAM: u64 = 0x6861_6172;

/// Row-major d×d unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// Matrix product `self · rhs`.
    pub fn multiply(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                for j in 0..d {
                    entries[i * d + j] += a * rhs.entries[k * d + j];
                }
            }
        }
        Ok(UnitaryMatrix { dim: d, entries })
    }

    /// Largest entrywise deviation of U†U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.entries[k * d + i].conj() * self.entries[k * d + j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }
}

/// Draws one Haar-random unitary.
pub fn sample_haar_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    // Ginibre ensemble, column-major so orthogonalization walks columns.
    let mut columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    Complex64::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    )
                })
                .collect()
        })
        .collect();

    for j in 0..dim {
        // Modified Gram–Schmidt with one re-orthogonalization pass keeps
        // orthogonality at machine precision.
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = columns.split_at_mut(j);
                let q = &head[i];
                let v = &mut tail[0];
                let mut proj = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    proj += q[k].conj() * v[k];
                }
                for k in 0..dim {
                    v[k] -= proj * q[k];
                }
            }
        }
        let norm = columns[j]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        for z in &mut columns[j] {
            *z /= norm;
        }
    }

    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (j, column) in columns.iter().enumerate() {
        for (i, &z) in column.iter().enumerate() {
            entries[i * dim + j] = z;
        }
    }
    Ok(UnitaryMatrix { dim, entries })
}

/// One estimated moment with its Haar closed-form reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub moment_order: usize,
    /// (i1, j1, i1', j1') for M₁; (i1, j1, i2, j2, i1', j1', i2', j2') for M₂.
    pub indices: Vec<usize>,
    pub sample_count: usize,
    pub empirical: Complex64,
    pub reference: f64,
}

impl MomentEstimate {
    pub fn abs_error(&self) -> f64 {
        (self.empirical - self.reference).norm()
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Haar first moment: `δ_{i1 i1'} δ_{j1 j1'} / d`.
pub fn m1_reference(d: usize, i1: usize, j1: usize, i1p: usize, j1p: usize) -> f64 {
    delta(i1, i1p) * delta(j1, j1p) / d as f64
}

/// Index tuple of a second-moment entry
/// `E[U_{i1 j1} U_{i2 j2} conj(U_{i1' j1'}) conj(U_{i2' j2'})]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct M2Indices {
    pub i1: usize,
    pub j1: usize,
    pub i2: usize,
    pub j2: usize,
    pub i1p: usize,
    pub j1p: usize,
    pub i2p: usize,
    pub j2p: usize,
}

impl M2Indices {
    pub fn as_array(&self) -> [usize; 8] {
        [
            self.i1, self.j1, self.i2, self.j2, self.i1p, self.j1p, self.i2p, self.j2p,
        ]
    }
}

/// Haar second moment for one index tuple.
pub fn m2_reference(d: usize, idx: &M2Indices) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(
            "second-moment closed form needs d >= 2".into(),
        ));
    }
    let df = d as f64;
    let direct_rows = delta(idx.i1, idx.i1p) * delta(idx.i2, idx.i2p);
    let swapped_rows = delta(idx.i1, idx.i2p) * delta(idx.i2, idx.i1p);
    let direct_cols = delta(idx.j1, idx.j1p) * delta(idx.j2, idx.j2p);
    let swapped_cols = delta(idx.j1, idx.j2p) * delta(idx.j2, idx.j1p);
    let positive = (direct_rows * direct_cols + swapped_rows * swapped_cols) / (df * df - 1.0);
    let mixed =
        (direct_rows * swapped_cols + swapped_rows * direct_cols) / (df * (df * df - 1.0));
    Ok(positive - mixed)
}

fn check_indices(d: usize, indices: &[usize]) -> Result<()> {
    for &index in indices {
        if index >= d {
            return Err(Error::QubitIndex {
                qubit: index,
                num_qubits: d,
            });
        }
    }
    Ok(())
}

/// Empirical mean of `U_{i1 j1} · conj(U_{i1' j1'})` over Haar samples.
pub fn estimate_m1(
    d: usize,
    i1: usize,
    j1: usize,
    i1p: usize,
    j1p: usize,
    samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    check_indices(d, &[i1, j1, i1p, j1p])?;
    if samples == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..samples {
        let u = sample_haar_unitary(d, derive_seed(seed, HAAR_STREAM, s as u64))?;
        acc += u.get(i1, j1) * u.get(i1p, j1p).conj();
    }
    Ok(MomentEstimate {
        moment_order: 1,
        indices: vec![i1, j1, i1p, j1p],
        sample_count: samples,
        empirical: acc / samples as f64,
        reference: m1_reference(d, i1, j1, i1p, j1p),
    })
}

/// Empirical mean of
/// `U_{i1 j1} U_{i2 j2} · conj(U_{i1' j1'}) · conj(U_{i2' j2'})`.
pub fn estimate_m2(d: usize, idx: M2Indices, samples: usize, seed: u64) -> Result<MomentEstimate> {
    check_indices(d, &idx.as_array())?;
    if samples == 0 {
        return Err(Error::EmptyInput("sample count"));
    }
    let reference = m2_reference(d, &idx)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..samples {
        let u = sample_haar_unitary(d, derive_seed(seed, HAAR_STREAM, s as u64))?;
        acc += u.get(idx.i1, idx.j1)
            * u.get(idx.i2, idx.j2)
            * u.get(idx.i1p, idx.j1p).conj()
            * u.get(idx.i2p, idx.j2p).conj();
    }
    Ok(MomentEstimate {
        moment_order: 2,
        indices: idx.as_array().to_vec(),
        sample_count: samples,
        empirical: acc / samples as f64,
        reference,
    })
}
