//! Completely positive trace-preserving maps in Kraus form, with a
//! superoperator view and Pauli-transfer diagnostics.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::states::{identity, kron, DensityMatrix};
use crate::{C64, CMat, MAX_DIM};

const COMPLETENESS_TOL: f64 = 1e-10;

/// A CPTP map given by a Kraus set {K_i} with sum_i K_i^dag K_i = I.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMat>,
    dim: usize,
}

impl QuantumChannel {
    /// Builds a channel from a Kraus set, verifying trace preservation
    /// within 1e-10.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let chan = Self::new_unchecked(kraus)?;
        let dev = chan.completeness_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        Ok(chan)
    }

    fn new_unchecked(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let dim = first.nrows();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows().max(k.ncols()),
                });
            }
        }
        Ok(Self { kraus, dim })
    }

    /// || sum K^dag K - I ||_F.
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            acc += k.adjoint() * k;
        }
        (acc - identity(self.dim)).norm()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![identity(dim)],
            dim,
        }
    }

    /// Conjugation by a unitary, checked to 1e-10.
    pub fn from_unitary(u: CMat) -> Result<Self> {
        let dev = (u.adjoint() * &u - identity(u.nrows())).norm();
        if dev > 1e-10 {
            return Err(Error::NonUnitary(dev));
        }
        Self::new_unchecked(vec![u])
    }

    /// Single-qubit phase flip: rho -> (1-p) rho + p Z rho Z.
    pub fn phase_flip(p: f64) -> Self {
        let z = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        Self {
            kraus: vec![
                identity(2) * C64::new((1.0 - p).sqrt(), 0.0),
                z * C64::new(p.sqrt(), 0.0),
            ],
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus
    }

    /// sum_i K_i rho K_i^dag.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let mut out = CMat::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Kraus set {A_i B_j}; the result applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Self {
            kraus,
            dim: self.dim,
        })
    }

    /// Column-stacking superoperator: vec(K rho K^dag) = (conj(K) ⊗ K) vec(rho).
    pub fn superoperator(&self) -> CMat {
        let d2 = self.dim * self.dim;
        let mut s = CMat::zeros(d2, d2);
        for k in &self.kraus {
            let kc = k.map(|x| x.conj());
            s += kron(&kc, k);
        }
        s
    }

    /// F_e = sum_i |tr K_i / d|^2, for a channel on the logical qubit (d = 2).
    pub fn entanglement_fidelity(&self) -> Result<f64> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim,
            });
        }
        Ok(self
            .kraus
            .iter()
            .map(|k| (k.trace() / C64::new(2.0, 0.0)).norm_sqr())
            .sum())
    }
}

/// Frobenius distance between the superoperators of two channels.
pub fn superoperator_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok((a.superoperator() - b.superoperator()).norm())
}

/// The 4^k x 4^k real Pauli-transfer matrix of a k-qubit channel,
/// R_ab = tr(P_a E(P_b)) / d over the tensor-product Pauli basis.
#[derive(Debug, Clone)]
pub struct PauliTransferMatrix {
    entries: DMatrix<f64>,
}

fn pauli_1q(idx: usize) -> CMat {
    let (a, b, c, d) = match idx {
        0 => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)),
        1 => ((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)),
        2 => ((0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)),
        3 => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)),
        _ => unreachable!(),
    };
    CMat::from_row_slice(
        2,
        2,
        &[
            C64::new(a.0, a.1),
            C64::new(b.0, b.1),
            C64::new(c.0, c.1),
            C64::new(d.0, d.1),
        ],
    )
}

/// Tensor-product Pauli string for index `a` in base-4 digits, qubit 1 first.
fn pauli_string(k: usize, a: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for q in (0..k).rev() {
        let digit = (a >> (2 * q)) & 3;
        m = kron(&m, &pauli_1q(digit));
    }
    m
}

impl PauliTransferMatrix {
    pub fn new(channel: &QuantumChannel) -> Result<Self> {
        let d = channel.dim();
        if !d.is_power_of_two() {
            return Err(Error::InvalidChannel(format!(
                "dimension {d} is not a power of two"
            )));
        }
        let k = d.trailing_zeros() as usize;
        let nb = 1usize << (2 * k);
        let mut entries = DMatrix::zeros(nb, nb);
        for b in 0..nb {
            let pb = pauli_string(k, b);
            // E(P_b) via Kraus ops
            let mut out = CMat::zeros(d, d);
            for kk in channel.kraus_ops() {
                out += kk * &pb * kk.adjoint();
            }
            for a in 0..nb {
                let pa = pauli_string(k, a);
                let val = (pa * &out).trace() / C64::new(d as f64, 0.0);
                entries[(a, b)] = val.re;
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// First row must be (1, 0, ..., 0) for a trace-preserving channel.
    pub fn first_row_deviation(&self) -> f64 {
        let mut dev: f64 = (self.entries[(0, 0)] - 1.0).abs();
        for j in 1..self.entries.ncols() {
            dev = dev.max(self.entries[(0, j)].abs());
        }
        dev
    }

    /// Largest |entry| off the diagonal.
    pub fn max_offdiagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.entries.nrows() {
            for j in 0..self.entries.ncols() {
                if i != j {
                    m = m.max(self.entries[(i, j)].abs());
                }
            }
        }
        m
    }
}
