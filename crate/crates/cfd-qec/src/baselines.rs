//! Reference strategies: the unencoded physical qubit and phase-flip
//! repetition codes with majority-vote recovery.

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::states::StateVector;
use crate::{C64, CMat, CVec};

/// Phase-flip repetition code on an odd number of qubits:
/// |0_L> = |+>^n, |1_L> = |->^n.
#[derive(Debug, Clone)]
pub struct RepetitionCode {
    pub n: usize,
    pub zero_logical: StateVector,
    pub one_logical: StateVector,
}

/// |s_1 ... s_n> in the |+/-> basis, where bit b_k of `pattern` (qubit 1 as
/// the most significant bit) selects |-> when set.
fn sign_basis_state(n: usize, pattern: usize) -> StateVector {
    let dim = 1usize << n;
    let norm = (dim as f64).sqrt().recip();
    let amps = CVec::from_fn(dim, |j, _| {
        // <j| (x)_k |s_k> picks up -1 for each qubit where both the pattern
        // and the computational bit are 1
        let minus_signs = (j & pattern).count_ones();
        let sign = if minus_signs.is_multiple_of(2) { 1.0 } else { -1.0 };
        C64::new(sign * norm, 0.0)
    });
    StateVector::new(amps).expect("sign basis state is normalized")
}

impl RepetitionCode {
    pub fn new(n: usize) -> Result<Self> {
        if n.is_multiple_of(2) {
            return Err(Error::InvalidCoupling(format!(
                "repetition code needs odd n, got {n}"
            )));
        }
        if n > 5 {
            return Err(Error::InvalidCoupling(format!(
                "repetition code supported up to n = 5, got {n}"
            )));
        }
        Ok(Self {
            n,
            zero_logical: sign_basis_state(n, 0),
            one_logical: sign_basis_state(n, (1 << n) - 1),
        })
    }

    /// Encode isometry with the codewords as columns.
    pub fn isometry(&self) -> CMat {
        let dim = 1usize << self.n;
        CMat::from_fn(dim, 2, |i, j| {
            if j == 0 {
                self.zero_logical.amplitudes()[i]
            } else {
                self.one_logical.amplitudes()[i]
            }
        })
    }
}

/// Z-string operator for the qubit subset given by `pattern`.
pub fn z_string(n: usize, pattern: usize) -> CMat {
    let dim = 1usize << n;
    CMat::from_fn(dim, dim, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else {
            let flips = (i & pattern).count_ones();
            C64::new(if flips.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0)
        }
    })
}

/// [OP] repetition_recovery: Kraus set {C_s P_s} over the 2^(n-1) syndrome
/// subspaces spanned by complementary sign patterns, with C_s the
/// minimal-weight Z-correction under majority vote.
pub fn repetition_recovery(n: usize) -> Result<QuantumChannel> {
    RepetitionCode::new(n)?;
    let mut kraus = Vec::with_capacity(1 << (n - 1));
    for pattern in 0..(1usize << n) {
        let weight = pattern.count_ones() as usize;
        if weight > n / 2 {
            // the complementary pattern owns this subspace
            continue;
        }
        let lo = sign_basis_state(n, pattern);
        let hi = sign_basis_state(n, ((1 << n) - 1) ^ pattern);
        let projector = lo.amplitudes() * lo.amplitudes().adjoint()
            + hi.amplitudes() * hi.amplitudes().adjoint();
        let correction = z_string(n, pattern);
        kraus.push(correction * projector);
    }
    debug_assert_eq!(kraus.len(), 1 << (n - 1));
    QuantumChannel::new(kraus)
}

/// [OP] physical_qubit_p: error probability of the effective phase-flip
/// channel on a single qubit with coupling g.
///
/// For Gaussian theta the coherence factor is exp(-2 sigma^2 g^2), so
/// p = (1 - exp(-2 sigma^2 g^2)) / 2. For the telegraph model the factor
/// is the sampled characteristic function at 2g.
pub fn physical_qubit_p(g: f64, noise: &NoiseModel) -> Result<f64> {
    if !g.is_finite() {
        return Err(Error::InvalidCoupling("non-finite coupling".into()));
    }
    noise.validate()?;
    match noise {
        NoiseModel::Gaussian { sigma } => Ok((1.0 - (-2.0 * sigma * sigma * g * g).exp()) / 2.0),
        NoiseModel::Telegraph { .. } => {
            let thetas = crate::noise::telegraph_phases(noise)?;
            let mean_cos: f64 =
                thetas.iter().map(|t| (2.0 * g * t).cos()).sum::<f64>() / thetas.len() as f64;
            Ok((1.0 - mean_cos) / 2.0)
        }
    }
}
