//! Dense pure and mixed multiqubit states.
//!
//! Basis index `b` is read with qubit 0 as the most significant bit, so qubit
//! `q` of an `n`-qubit register lives at bit position `n - 1 - q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::util;

/// Relative tolerance on the squared norm of a pure state.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Eigenvalues at or below this are dropped from a density state's eigen pairs.
pub const RANK_CUTOFF: f64 = 1e-10;

/// A normalized pure state on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector, rejecting bad lengths and unnormalized input.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = util::norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Normalizes `amplitudes` first. Fails on the zero vector.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let norm = util::norm_sqr(&amplitudes).sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::BadLength(0));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// `|0…0⟩`.
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    fn renormalized(mut self) -> Self {
        let n = util::norm_sqr(&self.amplitudes).sqrt();
        for a in self.amplitudes.iter_mut() {
            *a /= n;
        }
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        PureState::from_raw(self.num_qubits + other.num_qubits, amplitudes)
    }

    /// Trace distance ‖ψ − φ‖₁ between the two projectors, `2√(1 − |⟨ψ|φ⟩|²)`.
    pub fn trace_norm_distance(&self, other: &PureState) -> Result<f64> {
        let f = self.fidelity(other)?.min(1.0);
        Ok(2.0 * (1.0 - f).max(0.0).sqrt())
    }

    /// Projector `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn projector(&self) -> DMatrix<Complex64> {
        let v = DVector::from_column_slice(&self.amplitudes);
        &v * v.adjoint()
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::BadLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// A mixed state with a cached spectral decomposition.
#[derive(Clone, Debug)]
pub struct DensityState {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
    eigen_pairs: Vec<(f64, DVector<Complex64>)>,
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity, then diagonalizes.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let num_qubits = qubits_for_len(dim)?;
        let mut asym = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                asym = asym.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if asym > 1e-10 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (asymmetry {asym:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensity(format!("trace is {trace}, not 1")));
        }
        // symmetrize away the residual before diagonalizing
        let herm = (&matrix + matrix.adjoint()).scale(0.5);
        let eig = herm.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidDensity(format!(
                "not positive semidefinite (smallest eigenvalue {min:e})"
            )));
        }
        let mut eigen_pairs: Vec<(f64, DVector<Complex64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > RANK_CUTOFF)
            .map(|(k, &l)| (l, eig.eigenvectors.column(k).into_owned()))
            .collect();
        eigen_pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(Self {
            num_qubits,
            matrix: herm,
            eigen_pairs,
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = DVector::from_column_slice(state.amplitudes());
        Self {
            num_qubits: state.num_qubits(),
            matrix: &v * v.adjoint(),
            eigen_pairs: vec![(1.0, v)],
        }
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|`; weights must sum to one.
    pub fn mixture(terms: &[(f64, PureState)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidDensity("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, s) in terms {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.dim(),
                });
            }
            if *w < 0.0 {
                return Err(Error::InvalidDensity(format!("negative weight {w}")));
            }
            matrix += s.projector().scale(*w);
        }
        Self::new(matrix)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::BadLength(0));
        }
        let dim = 1usize << num_qubits;
        Self::new(DMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Eigenvalues above [`RANK_CUTOFF`] with eigenvectors, largest first.
    pub fn eigen_pairs(&self) -> &[(f64, DVector<Complex64>)] {
        &self.eigen_pairs
    }

    pub fn rank(&self) -> usize {
        self.eigen_pairs.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen_pairs.first().map_or(0.0, |p| p.0)
    }

    /// Max-entry distance between the matrix and its eigen reconstruction.
    pub fn reconstruction_error(&self) -> f64 {
        let mut rec = DMatrix::<Complex64>::zeros(self.dim(), self.dim());
        for (l, v) in &self.eigen_pairs {
            rec += (v * v.adjoint()).scale(*l);
        }
        max_entry_distance(&rec, &self.matrix)
    }

    /// The dominant eigenvector as a pure state; meaningful when rank is one.
    pub fn principal_state(&self) -> PureState {
        let v = &self.eigen_pairs[0].1;
        PureState::from_raw(self.num_qubits, v.as_slice().to_vec())
            .renormalized()
    }
}

/// Largest entrywise modulus of `a - b`.
pub fn max_entry_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
