//! Pure states and density matrices on small qubit registers.
//!
//! Qubit 1 is the most significant bit of the basis index, so for n = 2 the
//! basis order is |00>, |01>, |10>, |11>.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::{C64, CMat, CVec, MAX_DIM};

pub const NORM_TOL: f64 = 1e-12;

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVec,
    n: usize,
}

impl StateVector {
    /// Wraps an amplitude vector, requiring it to already be normalized
    /// within `NORM_TOL`.
    pub fn new(amps: CVec) -> Result<Self> {
        let state = Self::from_dim(amps)?;
        let norm = state.amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state not normalized: |psi| = {norm}"
            )));
        }
        Ok(state)
    }

    /// Normalizes an arbitrary nonzero amplitude vector.
    pub fn normalized(amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if norm < 1e-14 {
            return Err(Error::InvalidState("cannot normalize a null vector".into()));
        }
        Self::from_dim(amps / C64::new(norm, 0.0))
    }

    fn from_dim(amps: CVec) -> Result<Self> {
        let dim = amps.len();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        Ok(Self { amps, n })
    }

    /// The computational basis state |j> on `n` qubits.
    pub fn basis(n: usize, j: usize) -> Self {
        let dim = 1 << n;
        assert!(j < dim, "basis index out of range");
        let mut amps = CVec::zeros(dim);
        amps[j] = C64::new(1.0, 0.0);
        Self { amps, n }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// |self><self| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix { mat: m }
    }

    /// Tensor product, with `self` on the more significant qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim() * other.dim();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let mut amps = CVec::zeros(dim);
        for i in 0..self.dim() {
            for j in 0..other.dim() {
                amps[i * other.dim() + j] = self.amps[i] * other.amps[j];
            }
        }
        Ok(Self {
            amps,
            n: self.n + other.n,
        })
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Wraps a matrix, checking Hermiticity and unit trace within 1e-12 and
    /// eigenvalues >= -1e-10.
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        if mat.nrows() > MAX_DIM {
            return Err(Error::DimensionTooLarge(mat.nrows()));
        }
        let herm_dev = (&mat - mat.adjoint()).norm();
        if herm_dev > 1e-12 {
            return Err(Error::InvalidState(format!(
                "not Hermitian: deviation {herm_dev:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {} is not 1", tr)));
        }
        let rho = Self { mat };
        let min_eig = rho.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(rho)
    }

    /// Wraps without validity checks; for internal use where the invariants
    /// hold by construction.
    pub(crate) fn from_matrix_unchecked(mat: CMat) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0);
        let eigs = herm.symmetric_eigenvalues();
        eigs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// <psi| rho |psi>.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        let v = &self.mat * psi.amplitudes();
        psi.amplitudes().dotc(&v).re
    }
}

/// Dense identity matrix of the given dimension.
pub fn identity(dim: usize) -> CMat {
    DMatrix::identity(dim, dim)
}

/// Kronecker product helper for complex matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Real vector -> complex diagonal matrix.
pub fn diag_real(d: &DVector<f64>) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| {
        if i == j {
            C64::new(d[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
