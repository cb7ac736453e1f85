//! Dephasing channels for the common-fluctuator model.
//!
//! A random collective phase theta applied through U(theta) = exp(-i theta H_E)
//! damps the coherence rho_jk by the characteristic function of theta
//! evaluated at E_j - E_k. The Gaussian model is the benchmark default; the
//! telegraph sampler realizes the underlying two-state fluctuator and feeds
//! the empirical channel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::code::DephasingGenerator;
use crate::error::{Error, Result};
use crate::{C64, CMat, CVec};

/// Distribution of the accumulated phase between recoveries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// theta ~ N(0, sigma).
    Gaussian { sigma: f64 },
    /// Symmetric two-state Markov jump process with fluctuator eigenvalues
    /// lambda_plus/lambda_minus, integrated over [0, duration].
    Telegraph {
        lambda_plus: f64,
        lambda_minus: f64,
        jump_rate: f64,
        duration: f64,
        samples: usize,
        seed: u64,
    },
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma.is_nan() || sigma < 0.0 {
            return Err(Error::InvalidNoise(format!("sigma = {sigma} must be >= 0")));
        }
        Ok(Self::Gaussian { sigma })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { sigma } => {
                if sigma.is_nan() || *sigma < 0.0 {
                    return Err(Error::InvalidNoise("sigma must be >= 0".into()));
                }
            }
            Self::Telegraph {
                jump_rate,
                duration,
                samples,
                ..
            } => {
                if jump_rate.is_nan() || *jump_rate <= 0.0 {
                    return Err(Error::InvalidNoise("jump_rate must be > 0".into()));
                }
                if duration.is_nan() || *duration < 0.0 {
                    return Err(Error::InvalidNoise("duration must be >= 0".into()));
                }
                if *samples == 0 {
                    return Err(Error::InvalidNoise("need at least one sample".into()));
                }
            }
        }
        Ok(())
    }
}

/// [OP] gaussian_dephasing_channel: rho_jk -> exp(-sigma^2 (E_j - E_k)^2 / 2) rho_jk.
pub fn gaussian_dephasing_channel(gen: &DephasingGenerator, sigma: f64) -> Result<QuantumChannel> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidNoise(format!("sigma = {sigma} must be >= 0")));
    }
    let dim = gen.dim();
    let mask = CMat::from_fn(dim, dim, |j, k| {
        let delta = gen.diagonal()[j] - gen.diagonal()[k];
        C64::new((-0.5 * sigma * sigma * delta * delta).exp(), 0.0)
    });
    mask_channel(mask)
}

/// [OP] sample_telegraph_phase: theta = integral of lambda_{l(s)} ds over a
/// symmetric two-state jump trajectory on [0, t].
pub fn sample_telegraph_phase(model: &NoiseModel, rng: &mut impl Rng) -> Result<f64> {
    let NoiseModel::Telegraph {
        lambda_plus,
        lambda_minus,
        jump_rate,
        duration,
        ..
    } = model
    else {
        return Err(Error::InvalidNoise("not a telegraph model".into()));
    };
    model.validate()?;
    // equal stationary populations (high-temperature fluctuator)
    let mut state_plus = rng.gen_bool(0.5);
    let mut t = 0.0f64;
    let mut theta = 0.0f64;
    while t < *duration {
        let hold = -rng.gen::<f64>().ln() / jump_rate;
        let stay = hold.min(duration - t);
        theta += stay * if state_plus { *lambda_plus } else { *lambda_minus };
        t += hold;
        state_plus = !state_plus;
    }
    Ok(theta)
}

/// Reproducible sample set for a telegraph model, derived from its seed.
pub fn telegraph_phases(model: &NoiseModel) -> Result<Vec<f64>> {
    let NoiseModel::Telegraph { samples, seed, .. } = model else {
        return Err(Error::InvalidNoise("not a telegraph model".into()));
    };
    model.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(*seed);
    (0..*samples)
        .map(|_| sample_telegraph_phase(model, &mut rng))
        .collect()
}

/// [OP] empirical_dephasing_channel: the sample average of the unitary
/// conjugations U(theta_s), represented through the coherence mask
/// M_jk = mean_s exp(-i theta_s (E_j - E_k)).
pub fn empirical_dephasing_channel(
    gen: &DephasingGenerator,
    thetas: &[f64],
) -> Result<QuantumChannel> {
    if thetas.is_empty() {
        return Err(Error::EmptySamples);
    }
    let dim = gen.dim();
    let inv = 1.0 / thetas.len() as f64;
    let mask = CMat::from_fn(dim, dim, |j, k| {
        let delta = gen.diagonal()[j] - gen.diagonal()[k];
        let mut acc = C64::new(0.0, 0.0);
        for th in thetas {
            acc += C64::from_polar(1.0, -th * delta);
        }
        acc * inv
    });
    mask_channel(mask)
}

/// Channel for a noise model on the given register.
pub fn channel_for(gen: &DephasingGenerator, model: &NoiseModel) -> Result<QuantumChannel> {
    match model {
        NoiseModel::Gaussian { sigma } => gaussian_dephasing_channel(gen, *sigma),
        NoiseModel::Telegraph { .. } => {
            let thetas = telegraph_phases(model)?;
            empirical_dephasing_channel(gen, &thetas)
        }
    }
}

/// Kraus decomposition of a diagonal-superoperator channel from its
/// Hermitian PSD coherence mask: K_a = sqrt(lambda_a) diag(w_a).
fn mask_channel(mask: CMat) -> Result<QuantumChannel> {
    let dim = mask.nrows();
    let herm_dev = (&mask - mask.adjoint()).norm();
    if herm_dev > 1e-10 {
        return Err(Error::InvalidNoise(format!(
            "mask not Hermitian: {herm_dev:.3e}"
        )));
    }
    // pivoted Cholesky: M = sum_a b_a b_a^dag. Any such factorization gives
    // the same channel, and this one keeps trace preservation at machine
    // precision even when the mask spectrum is badly clustered.
    let mut residual = mask;
    let tol = 1e-14 * residual.diagonal().iter().map(|d| d.re.abs()).fold(1.0, f64::max);
    let mut kraus = Vec::new();
    for _ in 0..dim {
        let (pivot, pd) = residual
            .diagonal()
            .iter()
            .map(|d| d.re)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        if pd < -1e-8 {
            return Err(Error::InvalidNoise(format!(
                "mask not positive semidefinite: pivot {pd:.3e}"
            )));
        }
        if pd <= tol {
            break;
        }
        let b: CVec = CVec::from(residual.column(pivot)) / C64::new(pd.sqrt(), 0.0);
        residual -= &b * b.adjoint();
        kraus.push(CMat::from_diagonal(&b));
    }
    QuantumChannel::new(kraus)
}
