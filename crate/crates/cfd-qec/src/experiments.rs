//! Benchmarks: logical-error-probability extraction, sigma sweeps averaged
//! over couplings, scaling-exponent fits, pseudothreshold search, and
//! miscalibration robustness.
//!
//! All Monte Carlo draws derive from (master seed, task index) so repeated
//! runs with the same configuration are bit-identical, independent of
//! parallel scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{repetition_recovery, RepetitionCode};
use crate::channel::{PauliTransferMatrix, QuantumChannel};
use crate::code::{build_code, build_generator, build_recovery, CouplingVector, DephasingGenerator};
use crate::error::{Error, Result};
use crate::noise::gaussian_dephasing_channel;
use crate::CMat;

/// A benchmark strategy from the Fig.-1-style legend set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Physical,
    Repetition(usize),
    HardwareEfficient(usize),
}

impl Strategy {
    pub fn n(&self) -> usize {
        match self {
            Strategy::Physical => 1,
            Strategy::Repetition(n) | Strategy::HardwareEfficient(n) => *n,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Strategy::Physical => "physical".into(),
            Strategy::Repetition(n) => format!("repetition-{n}"),
            Strategy::HardwareEfficient(n) => format!("hardware-efficient-{n}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_lowercase();
        if t == "physical" {
            return Ok(Strategy::Physical);
        }
        for (prefix, make) in [
            ("repetition-", Strategy::Repetition as fn(usize) -> Strategy),
            ("rep", Strategy::Repetition as fn(usize) -> Strategy),
            (
                "hardware-efficient-",
                Strategy::HardwareEfficient as fn(usize) -> Strategy,
            ),
            ("he", Strategy::HardwareEfficient as fn(usize) -> Strategy),
        ] {
            if let Some(num) = t.strip_prefix(prefix) {
                let n: usize = num
                    .parse()
                    .map_err(|_| Error::InvalidCoupling(format!("bad strategy '{s}'")))?;
                let strat = make(n);
                strat.validate()?;
                return Ok(strat);
            }
        }
        Err(Error::InvalidCoupling(format!("unknown strategy '{s}'")))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::Physical => Ok(()),
            Strategy::Repetition(n) => {
                if *n == 3 || *n == 5 {
                    Ok(())
                } else {
                    Err(Error::InvalidCoupling(format!(
                        "repetition code supports n = 3 or 5, got {n}"
                    )))
                }
            }
            Strategy::HardwareEfficient(n) => {
                if (2..=5).contains(n) {
                    Ok(())
                } else {
                    Err(Error::InvalidCoupling(format!(
                        "hardware-efficient code supports n = 2..5, got {n}"
                    )))
                }
            }
        }
    }
}

/// p and the largest off-diagonal Pauli-transfer entry of the logical
/// channel (a diagnostic of the effective phase/bit-flip form).
#[derive(Debug, Clone, Copy)]
pub struct LogicalErrorEstimate {
    pub p: f64,
    pub ptm_offdiag_max: f64,
}

/// A strategy with its recovery fixed, ready to be evaluated at any sigma.
enum Prepared {
    Physical {
        g: f64,
    },
    Encoded {
        gen: DephasingGenerator,
        isometry: CMat,
        recovery: QuantumChannel,
    },
}

fn prepare(strategy: &Strategy, g: &[f64]) -> Result<Prepared> {
    match strategy {
        Strategy::Physical => {
            if g.len() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: g.len(),
                });
            }
            Ok(Prepared::Physical { g: g[0] })
        }
        Strategy::Repetition(n) => {
            if g.len() != *n {
                return Err(Error::DimensionMismatch {
                    expected: *n,
                    found: g.len(),
                });
            }
            let code = RepetitionCode::new(*n)?;
            let gv = CouplingVector::new(g.to_vec())?;
            Ok(Prepared::Encoded {
                gen: build_generator(&gv),
                isometry: code.isometry(),
                recovery: repetition_recovery(*n)?,
            })
        }
        Strategy::HardwareEfficient(n) => {
            if g.len() != *n {
                return Err(Error::DimensionMismatch {
                    expected: *n,
                    found: g.len(),
                });
            }
            let gv = CouplingVector::new(g.to_vec())?;
            let code = build_code(&gv)?;
            let gen = build_generator(&gv);
            let recovery = build_recovery(&code, &gen)?;
            Ok(Prepared::Encoded {
                gen,
                isometry: code.isometry(),
                recovery: recovery.channel().clone(),
            })
        }
    }
}

/// The channel seen by the logical qubit: encode, dephase, recover, decode.
fn logical_channel(prepared: &Prepared, sigma: f64) -> Result<QuantumChannel> {
    match prepared {
        Prepared::Physical { g } => {
            let p = (1.0 - (-2.0 * sigma * sigma * g * g).exp()) / 2.0;
            Ok(QuantumChannel::phase_flip(p))
        }
        Prepared::Encoded {
            gen,
            isometry,
            recovery,
        } => {
            let noise = gaussian_dephasing_channel(gen, sigma)?;
            let total = recovery.compose(&noise)?;
            let logical: Vec<CMat> = total
                .kraus_ops()
                .iter()
                .map(|k| isometry.adjoint() * k * isometry)
                .collect();
            QuantumChannel::new(logical)
        }
    }
}

/// p = 1 - F_e from the logical Kraus directly. Population leaked outside
/// the codespace (possible when a near-singular error subspace was dropped
/// from the recovery) counts as error rather than failing the strict
/// channel validation.
fn p_of(prepared: &Prepared, sigma: f64) -> Result<f64> {
    match prepared {
        Prepared::Physical { g } => Ok((1.0 - (-2.0 * sigma * sigma * g * g).exp()) / 2.0),
        Prepared::Encoded {
            gen,
            isometry,
            recovery,
        } => {
            let noise = gaussian_dephasing_channel(gen, sigma)?;
            let total = recovery.compose(&noise)?;
            let mut fe = 0.0;
            for k in total.kraus_ops() {
                let kl = isometry.adjoint() * k * isometry;
                let tr = kl[(0, 0)] + kl[(1, 1)];
                fe += (tr * 0.5).norm_sqr();
            }
            Ok(1.0 - fe)
        }
    }
}

/// [OP] logical_error_probability for explicit couplings.
pub fn logical_error_probability(
    strategy: &Strategy,
    g: &[f64],
    sigma: f64,
) -> Result<LogicalErrorEstimate> {
    strategy.validate()?;
    let prepared = prepare(strategy, g)?;
    let chan = logical_channel(&prepared, sigma)?;
    let p = 1.0 - chan.entanglement_fidelity()?;
    let ptm = PauliTransferMatrix::new(&chan)?;
    Ok(LogicalErrorEstimate {
        p,
        ptm_offdiag_max: ptm.max_offdiagonal(),
    })
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic per-task seed from (master seed, strategy index, sample
/// index).
fn derive_seed(master: u64, strategy_idx: usize, sample_idx: usize) -> u64 {
    let a = splitmix(master ^ GOLDEN.wrapping_mul(strategy_idx as u64 + 1));
    splitmix(a ^ GOLDEN.wrapping_mul(sample_idx as u64 + 3))
}

/// Redraw guard: the null-space construction is ambiguous when two |E_i|
/// over the first q+1 spectrum entries nearly coincide.
fn spectrum_guarded(gen: &DephasingGenerator, q: usize, band: f64) -> bool {
    for i in 0..=q {
        for j in (i + 1)..=q {
            if (gen.diagonal()[i].abs() - gen.diagonal()[j].abs()).abs() < band {
                return false;
            }
        }
    }
    true
}

const DEGENERACY_BAND: f64 = 1e-8;

/// Draws couplings uniformly from [0,1]^n, redrawing hardware-efficient
/// draws inside the degeneracy guard band. Returns the couplings and the
/// number of redraws.
fn draw_couplings(strategy: &Strategy, rng: &mut ChaCha12Rng) -> (Vec<f64>, usize) {
    let n = strategy.n();
    let mut redraws = 0usize;
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        if let Strategy::HardwareEfficient(_) = strategy {
            let gv = CouplingVector::new(g.clone()).expect("valid draw");
            let gen = build_generator(&gv);
            let q = (1usize << (n - 1)) - 1;
            if !spectrum_guarded(&gen, q, DEGENERACY_BAND) {
                redraws += 1;
                continue;
            }
        }
        return (g, redraws);
    }
}

/// One row of a sweep: Monte Carlo mean and SEM of p at one noise strength.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub strategy: String,
    pub n: usize,
    pub sigma: f64,
    pub mean_p: f64,
    pub sem_p: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Coupling draws rejected by the degeneracy guard band.
    pub degenerate_redraws: usize,
}

fn mean_sem(ps: &[f64]) -> (f64, f64) {
    let n = ps.len() as f64;
    let mean = ps.iter().sum::<f64>() / n;
    if ps.len() < 2 {
        return (mean, 0.0);
    }
    let var = ps.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// [OP] sweep: mean p over couplings drawn uniformly from [0,1]^n, for
/// each strategy and sigma. Coupling draws depend on (seed, strategy,
/// sample) only, so the same register is reused across the sigma grid.
pub fn sweep(
    strategies: &[Strategy],
    sigmas: &[f64],
    g_samples: usize,
    seed: u64,
) -> Result<SweepResult> {
    if g_samples < 2 {
        return Err(Error::InvalidNoise("need at least 2 coupling samples".into()));
    }
    if sigmas.iter().any(|s| s.is_nan() || *s < 0.0) {
        return Err(Error::InvalidNoise("sigma grid must be non-negative".into()));
    }
    let mut rows = Vec::new();
    let mut total_redraws = 0usize;
    for (si, strategy) in strategies.iter().enumerate() {
        strategy.validate()?;
        let prepared: Vec<(Prepared, usize)> = (0..g_samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, si, k));
                let (g, redraws) = draw_couplings(strategy, &mut rng);
                prepare(strategy, &g).map(|p| (p, redraws))
            })
            .collect::<Result<_>>()?;
        total_redraws += prepared.iter().map(|(_, r)| r).sum::<usize>();
        for sigma in sigmas {
            let ps: Vec<f64> = prepared
                .par_iter()
                .map(|(inst, _)| p_of(inst, *sigma))
                .collect::<Result<_>>()?;
            let (mean_p, sem_p) = mean_sem(&ps);
            rows.push(SweepRow {
                strategy: strategy.name(),
                n: strategy.n(),
                sigma: *sigma,
                mean_p,
                sem_p,
                samples: g_samples,
                seed,
            });
        }
    }
    Ok(SweepResult {
        rows,
        degenerate_redraws: total_redraws,
    })
}

/// Default sigma grid: log-spaced points matching the qualitative Fig.-1
/// range.
pub fn log_spaced(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    (0..points)
        .map(|i| (lmin + (lmax - lmin) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Error probabilities below this are double-precision rounding noise, not
/// signal, and are censored in serialized output.
pub const P_FLOOR: f64 = 1e-14;

impl SweepRow {
    fn is_censored(&self) -> bool {
        self.sigma > 0.0 && self.mean_p < P_FLOOR
    }
}

impl SweepResult {
    /// CSV with 17-significant-digit floats; byte-identical for identical
    /// (config, seed). Means at the double-precision floor are censored as
    /// `<1e-14` rather than reported as rounding noise.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,n,sigma,mean_p,sem_p,samples,seed\n");
        for r in &self.rows {
            let mean = if r.is_censored() {
                "<1e-14".to_string()
            } else {
                format!("{:.16e}", r.mean_p)
            };
            out.push_str(&format!(
                "{},{},{:.16e},{mean},{:.16e},{},{}\n",
                r.strategy, r.n, r.sigma, r.sem_p, r.samples, r.seed
            ));
        }
        out
    }

    /// Long-format table (one value per row) for plotting tools; censored
    /// rows are omitted so every value is numeric.
    pub fn to_plot_csv(&self) -> String {
        let mut out = String::from("strategy,n,sigma,series,value\n");
        for r in &self.rows {
            if r.is_censored() {
                continue;
            }
            for (series, value) in [
                ("mean_p", r.mean_p),
                ("mean_p_minus_sem", r.mean_p - r.sem_p),
                ("mean_p_plus_sem", r.mean_p + r.sem_p),
            ] {
                out.push_str(&format!(
                    "{},{},{:.16e},{},{:.16e}\n",
                    r.strategy, r.n, r.sigma, series, value
                ));
            }
        }
        out
    }
}

/// [OP] fit_scaling_exponent: least-squares slope of log p vs log sigma
/// for fixed couplings over a sigma window.
pub fn fit_scaling_exponent(
    strategy: &Strategy,
    g: &[f64],
    window: (f64, f64),
    points: usize,
) -> Result<f64> {
    strategy.validate()?;
    let prepared = prepare(strategy, g)?;
    let sigmas = log_spaced(window.0, window.1, points.max(2));
    let mut xs = Vec::with_capacity(sigmas.len());
    let mut ys = Vec::with_capacity(sigmas.len());
    for sigma in &sigmas {
        let p = p_of(&prepared, *sigma)?;
        if p < 1e-14 {
            return Err(Error::UnderflowWindow(p));
        }
        xs.push(sigma.ln());
        ys.push(p.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Mean p over coupling draws at one sigma, with the same per-sample
/// registers for every sigma (common random numbers).
fn mean_p_at(strategy: &Strategy, strategy_idx: usize, sigma: f64, g_samples: usize, seed: u64) -> Result<(f64, f64)> {
    let ps: Vec<f64> = (0..g_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, strategy_idx, k));
            let (g, _) = draw_couplings(strategy, &mut rng);
            let prepared = prepare(strategy, &g)?;
            p_of(&prepared, sigma)
        })
        .collect::<Result<_>>()?;
    Ok(mean_sem(&ps))
}

/// Bisection to relative bracket width 1e-3; requires a sign change.
fn bisect_sign_change(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while (hi - lo) / (0.5 * (hi + lo)) > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// [OP] find_pseudothreshold: bisection on the crossing of the mean-p
/// curves of a strategy and the physical qubit, to relative width 1e-3.
/// Both curves use common coupling draws per sample index, so the
/// difference is smooth in sigma.
///
/// Note: under this noise model the encoded strategies stay below the
/// physical baseline in mean p for every tested sigma (the fluctuator
/// noise never loses its structure), so a bracket with a genuine sign
/// change may not exist; the error is then the honest answer.
pub fn find_pseudothreshold(
    strategy: &Strategy,
    g_samples: usize,
    seed: u64,
    bracket: (f64, f64),
) -> Result<f64> {
    strategy.validate()?;
    bisect_sign_change(
        |sigma| {
            let (code_p, _) = mean_p_at(strategy, 0, sigma, g_samples, seed)?;
            let (phys_p, _) = mean_p_at(&Strategy::Physical, 1, sigma, g_samples, seed)?;
            Ok(code_p - phys_p)
        },
        bracket.0,
        bracket.1,
    )
}

/// One row of a miscalibration study.
#[derive(Debug, Clone, Serialize)]
pub struct MiscalibrationRow {
    pub delta: f64,
    pub mean_p: f64,
    pub sem_p: f64,
}

/// [OP] miscalibration_study: the code and recovery are built from
/// g_true * (1 + delta * eps) with eps uniform on [-1,1]^n per sample,
/// while the noise acts with g_true.
pub fn miscalibration_study(
    g_true: &[f64],
    deltas: &[f64],
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<MiscalibrationRow>> {
    if deltas.iter().any(|d| *d < 0.0) {
        return Err(Error::InvalidNoise("delta must be >= 0".into()));
    }
    let n = g_true.len();
    let gv_true = CouplingVector::new(g_true.to_vec())?;
    let gen_true = build_generator(&gv_true);
    let q = (1usize << (n - 1)) - 1;
    let mut rows = Vec::with_capacity(deltas.len());
    for (di, delta) in deltas.iter().enumerate() {
        let ps: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, di, k));
                let g_build: Vec<f64> = loop {
                    let cand: Vec<f64> = g_true
                        .iter()
                        .map(|g| g * (1.0 + delta * rng.gen_range(-1.0..1.0)))
                        .collect();
                    let gv = CouplingVector::new(cand.clone())?;
                    if spectrum_guarded(&build_generator(&gv), q, DEGENERACY_BAND) {
                        break cand;
                    }
                };
                let gv_build = CouplingVector::new(g_build)?;
                let code = build_code(&gv_build)?;
                let gen_build = build_generator(&gv_build);
                let recovery = build_recovery(&code, &gen_build)?;
                let noise = gaussian_dephasing_channel(&gen_true, sigma)?;
                let total = recovery.channel().compose(&noise)?;
                let iso = code.isometry();
                let mut fe = 0.0;
                for kk in total.kraus_ops() {
                    let kl = iso.adjoint() * kk * &iso;
                    fe += ((kl[(0, 0)] + kl[(1, 1)]) * 0.5).norm_sqr();
                }
                Ok(1.0 - fe)
            })
            .collect::<Result<_>>()?;
        let (mean_p, sem_p) = mean_sem(&ps);
        rows.push(MiscalibrationRow {
            delta: *delta,
            mean_p,
            sem_p,
        });
    }
    Ok(rows)
}
