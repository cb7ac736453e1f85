//! Construction of hardware-efficient codes for common-fluctuator dephasing.
//!
//! For n register qubits with couplings g, the noise generator is the
//! diagonal operator H_E = sum_j g_j Z_j. A code correcting the error span
//! {I, H_E, ..., H_E^q} with q = 2^(n-1) - 1 is obtained from a real vector
//! z orthogonal to the odd moment vectors v_m of the spectrum of H_E; the
//! codeword amplitudes are square roots of |z| placed on disjoint supports.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::states::StateVector;
use crate::{C64, CMat, CVec, MAX_DIM};

/// Device couplings g in angular-frequency units; normalized to [0,1] for
/// benchmark sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingVector {
    g: Vec<f64>,
}

impl CouplingVector {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if g.len() < 2 {
            return Err(Error::InvalidCoupling(format!(
                "need at least 2 qubits, got {}",
                g.len()
            )));
        }
        if (1usize << g.len()) > MAX_DIM {
            return Err(Error::DimensionTooLarge(1 << g.len()));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCoupling("non-finite entry".into()));
        }
        Ok(Self { g })
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }
}

/// Diagonal of H_E = sum_j g_j Z_j, with qubit 1 as the most significant
/// bit and Z|0> = +|0>.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingGenerator {
    diagonal: DVector<f64>,
    n: usize,
}

/// [OP] build_generator: entry j is E_j = sum_k (-1)^bit_k(j) g_k.
pub fn build_generator(g: &CouplingVector) -> DephasingGenerator {
    let n = g.n();
    let dim = 1usize << n;
    let diagonal = DVector::from_fn(dim, |j, _| {
        g.as_slice()
            .iter()
            .enumerate()
            .map(|(k, gk)| {
                let bit = (j >> (n - 1 - k)) & 1;
                if bit == 0 { *gk } else { -*gk }
            })
            .sum()
    });
    DephasingGenerator { diagonal, n }
}

impl DephasingGenerator {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &DVector<f64> {
        &self.diagonal
    }

    /// max_j |E_j|, the operator norm of H_E.
    pub fn norm(&self) -> f64 {
        self.diagonal.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// Dense matrix of H_E.
    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                C64::new(self.diagonal[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Applies H_E^m elementwise to an amplitude vector.
    pub fn apply_power(&self, amps: &CVec, m: u32) -> CVec {
        CVec::from_fn(amps.len(), |j, _| {
            amps[j] * C64::new(self.diagonal[j].powi(m as i32), 0.0)
        })
    }
}

/// Intermediates of the null-space construction: the odd-moment matrix V,
/// the unit eigenvector u of I - V V^+, and z = u / ||u||_1.
#[derive(Debug, Clone)]
pub struct ConstructionWorkspace {
    pub v: DMatrix<f64>,
    pub u: DVector<f64>,
    pub z: DVector<f64>,
}

/// [OP] build_v_matrix: the (q+1) x q matrix whose column for odd m in
/// [1, 2q-1] has entries E_i^m for i = 0..q.
pub fn build_v_matrix(gen: &DephasingGenerator, q: usize) -> Result<DMatrix<f64>> {
    if q != (1usize << (gen.n_qubits() - 1)) - 1 {
        return Err(Error::InvalidCoupling(format!(
            "q = {q} inconsistent with n = {}",
            gen.n_qubits()
        )));
    }
    Ok(DMatrix::from_fn(q + 1, q, |i, col| {
        let m = (2 * col + 1) as i32;
        gen.diagonal()[i].powi(m)
    }))
}

/// [OP] find_z: a unit-eigenvalue eigenvector of I - V V^+, sign-fixed so
/// the last nonzero entry is positive, and normalized to unit 1-norm.
///
/// Columns of V are rescaled to unit norm before the pseudoinverse (the
/// span, and hence the projector, is unchanged); singular values below
/// 1e-12 of the largest are truncated.
pub fn find_z(v: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let rows = v.nrows();
    let mut vn = v.clone();
    for mut col in vn.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= nrm;
        }
    }
    let svd = vn.svd(true, false);
    let u_svd = svd.u.as_ref().expect("svd with u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let kept: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 1e-12 * smax)
        .map(|(i, _)| i)
        .collect();
    // orthonormal basis Q of col(V); V V^+ = Q Q^T
    let q_basis = DMatrix::from_fn(rows, kept.len(), |i, j| u_svd[(i, kept[j])]);
    let projector =
        DMatrix::<f64>::identity(rows, rows) - &q_basis * q_basis.transpose();
    let eig = nalgebra::SymmetricEigen::new(projector);
    let mut best: Option<(usize, f64)> = None;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam > 1.0 - 1e-9 {
            let last = eig.eigenvectors[(rows - 1, i)].abs();
            if best.is_none_or(|(_, b)| last > b) {
                best = Some((i, last));
            }
        }
    }
    let (idx, _) = best.ok_or_else(|| {
        Error::Internal("no unit eigenvector of I - VV+ found".into())
    })?;
    let mut u: DVector<f64> = eig.eigenvectors.column(idx).into();
    // two refinement sweeps against col(V)
    for _ in 0..2 {
        let coeffs = q_basis.transpose() * &u;
        u -= &q_basis * coeffs;
    }
    let nrm = u.norm();
    if nrm < 1e-12 {
        return Err(Error::Internal("null-space candidate vanished".into()));
    }
    u /= nrm;
    // sign convention: last nonzero entry positive
    if let Some(last) = u.iter().rev().find(|x| x.abs() > 1e-12) {
        if *last < 0.0 {
            u = -u;
        }
    }
    let one_norm: f64 = u.iter().map(|x| x.abs()).sum();
    let z = &u / one_norm;
    Ok((u, z))
}

/// Phase assignment for the codeword amplitudes. The paper leaves the
/// phases free; `Zero` sets them all to zero, `TwoQubitTheta` applies the
/// n = 2 convention theta_0 = phi_1 + pi = -theta_2 = -phi_3 = theta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseConvention {
    Zero,
    TwoQubitTheta(f64),
}

impl PhaseConvention {
    /// (theta_j, phi_j) for basis index j.
    fn phases(&self, j: usize) -> (f64, f64) {
        match self {
            PhaseConvention::Zero => (0.0, 0.0),
            PhaseConvention::TwoQubitTheta(t) => {
                let theta = match j {
                    0 => *t,
                    2 => -*t,
                    _ => 0.0,
                };
                let phi = match j {
                    1 => *t - std::f64::consts::PI,
                    3 => -*t,
                    _ => 0.0,
                };
                (theta, phi)
            }
        }
    }
}

/// A pair of orthonormal logical codewords on n qubits correcting
/// {I, H_E, ..., H_E^q}, q = 2^(n-1) - 1.
#[derive(Debug, Clone)]
pub struct LogicalCode {
    pub zero_logical: StateVector,
    pub one_logical: StateVector,
    pub n: usize,
    pub q: usize,
    pub phases: PhaseConvention,
    pub workspace: ConstructionWorkspace,
    pub g: CouplingVector,
}

/// Eq.-style overhead: qubits needed to correct to order q is
/// ceil(1 + log2(q + 1)).
pub fn overhead_qubits(q: usize) -> usize {
    1 + (((q + 1) as f64).log2().ceil() as usize)
}

/// [OP] build_code with the default phase convention (the n = 2 theta
/// convention at theta = 0 for two qubits, zero phases otherwise).
pub fn build_code(g: &CouplingVector) -> Result<LogicalCode> {
    let convention = if g.n() == 2 {
        PhaseConvention::TwoQubitTheta(0.0)
    } else {
        PhaseConvention::Zero
    };
    build_code_with(g, convention)
}

/// [OP] build_code with an explicit phase convention.
pub fn build_code_with(g: &CouplingVector, phases: PhaseConvention) -> Result<LogicalCode> {
    let n = g.n();
    let q = (1usize << (n - 1)) - 1;
    let dim = 1usize << n;
    let gen = build_generator(g);
    let v = build_v_matrix(&gen, q)?;
    let (u, z) = find_z(&v)?;

    // amplitude assignment on disjoint supports
    let mut r = vec![0.0f64; dim];
    for i in 0..=q {
        let mirror = dim - 1 - i;
        if z[i] >= 0.0 {
            r[i] = 0.0;
            r[mirror] = z[i].sqrt();
        } else {
            r[i] = (-z[i]).sqrt();
            r[mirror] = 0.0;
        }
    }
    let amp0 = CVec::from_fn(dim, |j, _| {
        let (theta, _) = phases.phases(j);
        C64::from_polar(r[j], theta)
    });
    let amp1 = CVec::from_fn(dim, |j, _| {
        let (_, phi) = phases.phases(j);
        C64::from_polar(r[dim - 1 - j], phi)
    });
    let zero_logical = StateVector::normalized(amp0)?;
    let one_logical = StateVector::normalized(amp1)?;
    Ok(LogicalCode {
        zero_logical,
        one_logical,
        n,
        q,
        phases,
        workspace: ConstructionWorkspace { v, u, z },
        g: g.clone(),
    })
}

impl LogicalCode {
    /// Encode isometry with the codewords as columns (2^n x 2).
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

    /// alpha |0_L> + beta |1_L>.
    pub fn encode_logical(&self, alpha: C64, beta: C64) -> Result<StateVector> {
        let amps = self.zero_logical.amplitudes() * alpha + self.one_logical.amplitudes() * beta;
        StateVector::normalized(amps)
    }
}

/// Result of checking the Knill-Laflamme conditions for {H_E^m}, m <= 2q.
///
/// Violations are reported relative to ||H_E||^m (with ||H_E|| floored at
/// 1) so the tolerance is meaningful across moment orders.
#[derive(Debug, Clone, Serialize)]
pub struct KlReport {
    pub max_violation: f64,
    pub pass: bool,
    pub tol: f64,
}

/// [OP] verify_kl: checks <0|H^m|0> = <1|H^m|1> and <0|H^m|1> = 0 for
/// 0 <= m <= 2q.
pub fn verify_kl(
    code: &LogicalCode,
    gen: &DephasingGenerator,
    q: usize,
    tol: f64,
) -> KlReport {
    let a0 = code.zero_logical.amplitudes();
    let a1 = code.one_logical.amplitudes();
    let scale = gen.norm().max(1.0);
    let mut max_violation = 0.0f64;
    for m in 0..=(2 * q as u32) {
        let mut diag0 = 0.0f64;
        let mut diag1 = 0.0f64;
        let mut cross = C64::new(0.0, 0.0);
        for j in 0..gen.dim() {
            let em = gen.diagonal()[j].powi(m as i32);
            diag0 += a0[j].norm_sqr() * em;
            diag1 += a1[j].norm_sqr() * em;
            cross += a0[j].conj() * a1[j] * em;
        }
        let s = scale.powi(m as i32);
        let v = ((diag0 - diag1).abs() / s).max(cross.norm() / s);
        max_violation = max_violation.max(v);
    }
    KlReport {
        max_violation,
        pass: max_violation < tol,
        tol,
    }
}

/// Orthogonal two-dimensional subspaces C_0..C_q and the Kraus recovery
/// mapping each back to the codespace.
#[derive(Debug, Clone)]
pub struct RecoveryChannel {
    /// Orthonormal bases of the retained subspaces; index 0 is the
    /// codespace itself.
    pub subspace_bases: Vec<CMat>,
    /// Number of error subspaces dropped because the projected error
    /// action was numerically singular (near-DFS couplings).
    pub dropped: usize,
    channel: QuantumChannel,
}

impl RecoveryChannel {
    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }
}

const SINGULAR_SUBSPACE_TOL: f64 = 1e-8;

/// [OP] build_recovery: canonical recovery for the span {I, H_E, ..., H_E^q}.
///
/// For m = 1..q the images H_E^m |mu_L> are projected orthogonal to all
/// previously constructed subspaces and polar-decomposed, so the decode of
/// each error subspace is an isometry. Singular subspaces are dropped and
/// the recovery acts as identity on the untiled remainder.
pub fn build_recovery(code: &LogicalCode, gen: &DephasingGenerator) -> Result<RecoveryChannel> {
    let q = code.q;
    let report = verify_kl(code, gen, q, 1e-9);
    if !report.pass {
        return Err(Error::KlViolation {
            max_violation: report.max_violation,
            tol: report.tol,
        });
    }
    let dim = gen.dim();
    let scale = gen.norm().max(1.0);
    let hdiag: DVector<f64> = gen.diagonal() / scale;
    let logical = code.isometry();
    let mut bases: Vec<CMat> = vec![logical.clone()];
    let mut dropped = 0usize;

    for m in 1..=q {
        let pow = |a: &CVec| -> CVec {
            CVec::from_fn(dim, |j, _| a[j] * C64::new(hdiag[j].powi(m as i32), 0.0))
        };
        let mut c0 = pow(code.zero_logical.amplitudes());
        let mut c1 = pow(code.one_logical.amplitudes());
        for _ in 0..2 {
            for b in &bases {
                c0 -= b * (b.adjoint() * &c0);
                c1 -= b * (b.adjoint() * &c1);
            }
        }
        let mut mat = CMat::zeros(dim, 2);
        mat.set_column(0, &c0);
        mat.set_column(1, &c1);
        let svd = mat.svd(true, true);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if smin < SINGULAR_SUBSPACE_TOL {
            dropped += 1;
            continue;
        }
        let u = svd.u.as_ref().expect("svd u");
        let v_t = svd.v_t.as_ref().expect("svd v_t");
        let w = u * v_t; // polar isometry, dim x 2
        bases.push(w);
    }

    // Kraus ops: P_L on the codespace, decode isometries on each error
    // subspace, identity on any untiled remainder.
    let mut kraus: Vec<CMat> = Vec::with_capacity(bases.len() + 1);
    kraus.push(&logical * logical.adjoint());
    for b in bases.iter().skip(1) {
        kraus.push(&logical * b.adjoint());
    }
    let mut tiled = CMat::zeros(dim, dim);
    for b in &bases {
        tiled += b * b.adjoint();
    }
    let remainder = CMat::identity(dim, dim) - tiled;
    if remainder.norm() > 1e-8 {
        // project onto the exact orthocomplement
        let herm = (&remainder + remainder.adjoint()) * C64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        let cols: Vec<usize> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| **l > 0.5)
            .map(|(i, _)| i)
            .collect();
        let qm = CMat::from_fn(dim, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
        kraus.push(&qm * qm.adjoint());
    }
    let channel = QuantumChannel::new(kraus)?;
    Ok(RecoveryChannel {
        subspace_bases: bases,
        dropped,
        channel,
    })
}

/// [OP] correctable_span_check: worst fidelity deficit over random errors
/// E = sum_m c_m H_E^m applied to random logical states and recovered.
pub fn correctable_span_check(
    recovery: &RecoveryChannel,
    code: &LogicalCode,
    gen: &DephasingGenerator,
    q: usize,
    trials: usize,
    rng: &mut impl rand::Rng,
) -> Result<f64> {
    let scale = gen.norm().max(1.0);
    let hdiag: DVector<f64> = gen.diagonal() / scale;
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < trials {
        let coeffs: Vec<f64> = (0..=q).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let beta = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < 1e-6 {
            continue;
        }
        let psi = code.encode_logical(alpha / norm, beta / norm)?;
        let corrupted = CVec::from_fn(gen.dim(), |j, _| {
            let factor: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c * hdiag[j].powi(m as i32))
                .sum();
            psi.amplitudes()[j] * C64::new(factor, 0.0)
        });
        if corrupted.norm() < 1e-10 {
            continue;
        }
        let phi = StateVector::normalized(corrupted)?;
        let out = recovery.channel().apply(&phi.density())?;
        let fidelity = out.fidelity_with_pure(&psi);
        worst = worst.max(1.0 - fidelity);
        done += 1;
    }
    Ok(worst)
}

/// JSON-facing document for a [`LogicalCode`]; amplitudes are [re, im]
/// pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeDocument {
    pub n: usize,
    pub q: usize,
    pub g: Vec<f64>,
    pub phase_convention: PhaseConvention,
    pub zero_logical: Vec<[f64; 2]>,
    pub one_logical: Vec<[f64; 2]>,
}

impl LogicalCode {
    pub fn to_document(&self) -> CodeDocument {
        let pack = |s: &StateVector| s.amplitudes().iter().map(|c| [c.re, c.im]).collect();
        CodeDocument {
            n: self.n,
            q: self.q,
            g: self.g.as_slice().to_vec(),
            phase_convention: self.phases,
            zero_logical: pack(&self.zero_logical),
            one_logical: pack(&self.one_logical),
        }
    }

    /// Rebuilds a code from its document form, re-validating normalization,
    /// orthogonality, and consistency of n, q, and the amplitude count.
    pub fn from_document(doc: &CodeDocument) -> Result<Self> {
        let g = CouplingVector::new(doc.g.clone())?;
        if g.n() != doc.n {
            return Err(Error::InvalidCoupling(format!(
                "n = {} does not match {} couplings",
                doc.n,
                g.n()
            )));
        }
        if doc.q != (1usize << (doc.n - 1)) - 1 {
            return Err(Error::InvalidCoupling(format!(
                "q = {} inconsistent with n = {}",
                doc.q, doc.n
            )));
        }
        let dim = 1usize << doc.n;
        if doc.zero_logical.len() != dim || doc.one_logical.len() != dim {
            return Err(Error::InvalidState(format!(
                "expected {dim} amplitudes per codeword"
            )));
        }
        let unpack = |v: &[[f64; 2]]| -> Result<StateVector> {
            StateVector::new(CVec::from_fn(dim, |j, _| C64::new(v[j][0], v[j][1])))
        };
        let zero_logical = unpack(&doc.zero_logical)?;
        let one_logical = unpack(&doc.one_logical)?;
        let overlap = zero_logical.inner(&one_logical).norm();
        if overlap > 1e-10 {
            return Err(Error::InvalidState(format!(
                "codewords not orthogonal: |<0|1>| = {overlap:.3e}"
            )));
        }
        let gen = build_generator(&g);
        let v = build_v_matrix(&gen, doc.q)?;
        let (u, z) = find_z(&v)?;
        Ok(Self {
            zero_logical,
            one_logical,
            n: doc.n,
            q: doc.q,
            phases: doc.phase_convention,
            workspace: ConstructionWorkspace { v, u, z },
            g,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn gv(g: &[f64]) -> CouplingVector {
        CouplingVector::new(g.to_vec()).unwrap()
    }

    /// Independent closed-form null vector: z_i proportional to
    /// 1 / (E_i * prod_{j != i} (E_i^2 - E_j^2)), from divided differences
    /// over the nodes y_i = E_i^2.
    fn closed_form_z(gen: &DephasingGenerator, q: usize) -> DVector<f64> {
        let e = gen.diagonal();
        let mut w = DVector::zeros(q + 1);
        for i in 0..=q {
            let mut denom = e[i];
            for j in 0..=q {
                if j != i {
                    denom *= e[i] * e[i] - e[j] * e[j];
                }
            }
            w[i] = 1.0 / denom;
        }
        let last = w
            .iter()
            .rev()
            .find(|x| x.abs() > 1e-12)
            .copied()
            .unwrap_or(1.0);
        if last < 0.0 {
            w = -w;
        }
        let one_norm: f64 = w.iter().map(|x| x.abs()).sum();
        w / one_norm
    }

    #[test]
    fn generator_examples() {
        let gen = build_generator(&gv(&[1.0, 0.5]));
        let d: Vec<f64> = gen.diagonal().iter().copied().collect();
        assert_eq!(d, vec![1.5, 0.5, -0.5, -1.5]);

        let gen = build_generator(&gv(&[1.0, 1.0]));
        let d: Vec<f64> = gen.diagonal().iter().copied().collect();
        assert_eq!(d, vec![2.0, 0.0, 0.0, -2.0]);

        let gen = build_generator(&gv(&[0.8, 0.5, 0.2]));
        // |011> = index 3
        assert!((gen.diagonal()[3] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn generator_spectrum_bit_complement_symmetry() {
        let gen = build_generator(&gv(&[0.9, 0.5, 0.2]));
        let dim = gen.dim();
        for j in 0..dim {
            assert!((gen.diagonal()[dim - 1 - j] + gen.diagonal()[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn v_matrix_examples() {
        let gen = build_generator(&gv(&[1.0, 0.5]));
        let v = build_v_matrix(&gen, 1).unwrap();
        assert_eq!(v.nrows(), 2);
        assert_eq!(v.ncols(), 1);
        assert!((v[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((v[(1, 0)] - 0.5).abs() < 1e-15);

        let gen = build_generator(&gv(&[1.0, 1.0]));
        let v = build_v_matrix(&gen, 1).unwrap();
        assert_eq!((v[(0, 0)], v[(1, 0)]), (2.0, 0.0));

        let gen = build_generator(&gv(&[0.9, 0.5, 0.2]));
        let v = build_v_matrix(&gen, 3).unwrap();
        let e = [1.6f64, 1.2, 0.6, 0.2];
        for i in 0..4 {
            assert!((v[(i, 0)] - e[i]).abs() < 1e-12);
            assert!((v[(i, 1)] - e[i].powi(3)).abs() < 1e-12);
            assert!((v[(i, 2)] - e[i].powi(5)).abs() < 1e-12);
        }
    }

    #[test]
    fn v_matrix_rejects_bad_q() {
        let gen = build_generator(&gv(&[1.0, 0.5]));
        assert!(build_v_matrix(&gen, 3).is_err());
    }

    #[test]
    fn find_z_two_qubit_closed_form() {
        let gen = build_generator(&gv(&[1.0, 0.5]));
        let v = build_v_matrix(&gen, 1).unwrap();
        let (_, z) = find_z(&v).unwrap();
        assert!((z[0] + 0.25).abs() < 1e-12);
        assert!((z[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn find_z_dfs_couplings() {
        let gen = build_generator(&gv(&[1.0, 1.0]));
        let v = build_v_matrix(&gen, 1).unwrap();
        let (_, z) = find_z(&v).unwrap();
        assert!(z[0].abs() < 1e-12);
        assert!((z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn find_z_three_qubit_orthogonality_and_oracle() {
        let gen = build_generator(&gv(&[0.9, 0.5, 0.2]));
        let v = build_v_matrix(&gen, 3).unwrap();
        let (_, z) = find_z(&v).unwrap();
        for col in v.column_iter() {
            let dot: f64 = z.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            assert!(dot.abs() / col.norm() < 1e-10, "z not orthogonal: {dot}");
        }
        let one_norm: f64 = z.iter().map(|x| x.abs()).sum();
        assert!((one_norm - 1.0).abs() < 1e-12);
        let oracle = closed_form_z(&gen, 3);
        assert!((z - oracle).norm() < 1e-9);
    }

    #[test]
    fn build_code_two_qubit_amplitudes() {
        let code = build_code(&gv(&[1.0, 0.5])).unwrap();
        let a0 = code.zero_logical.amplitudes();
        let a1 = code.one_logical.amplitudes();
        // c = 1/sqrt(2): r0 = c sqrt(g1-g2) = 0.5, r2 = c sqrt(g1+g2)
        assert!((a0[0].re - 0.5).abs() < 1e-12);
        assert!((a0[2].re - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(a0[1].norm() < 1e-15 && a0[3].norm() < 1e-15);
        assert!((a1[1].norm() - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((a1[3].norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn build_code_dfs_pair() {
        let code = build_code(&gv(&[1.0, 1.0])).unwrap();
        assert!((code.zero_logical.amplitudes()[2].norm() - 1.0).abs() < 1e-12);
        assert!((code.one_logical.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn build_code_three_qubit_passes_kl() {
        let g = gv(&[0.9, 0.5, 0.2]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let report = verify_kl(&code, &gen, code.q, 1e-9);
        assert!(report.pass, "violation {}", report.max_violation);
    }

    #[test]
    fn verify_kl_two_qubit_hand_check() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        // <0_L| H |0_L> = 0.25 * 1.5 + 0.75 * (-0.5) = 0
        let report = verify_kl(&code, &gen, 1, 1e-12);
        assert!(report.pass, "violation {}", report.max_violation);
    }

    #[test]
    fn verify_kl_detects_corruption() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let mut amps = code.zero_logical.amplitudes().clone();
        amps.swap_rows(0, 2);
        let corrupted = LogicalCode {
            zero_logical: StateVector::new(amps).unwrap(),
            ..code
        };
        let report = verify_kl(&corrupted, &gen, 1, 1e-9);
        assert!(!report.pass);
        assert!(report.max_violation > 0.1);
    }

    #[test]
    fn recovery_fixes_codespace_pointwise() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let rec = build_recovery(&code, &gen).unwrap();
        let rho = code.zero_logical.density();
        let out = rec.channel().apply(&rho).unwrap();
        assert!((out.matrix() - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn recovery_corrects_single_error_state() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let rec = build_recovery(&code, &gen).unwrap();
        let err = gen.apply_power(code.zero_logical.amplitudes(), 1);
        // proportionality constant magnitude sqrt(g1^2 - g2^2)
        assert!((err.norm() - 0.75f64.sqrt()).abs() < 1e-12);
        let phi = StateVector::normalized(err).unwrap();
        let out = rec.channel().apply(&phi.density()).unwrap();
        assert!((out.fidelity_with_pure(&code.zero_logical) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn recovery_subspaces_tile_space() {
        let g = gv(&[0.9, 0.5, 0.2]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let rec = build_recovery(&code, &gen).unwrap();
        assert_eq!(rec.subspace_bases.len(), code.q + 1);
        assert_eq!(rec.dropped, 0);
        let dim = gen.dim();
        let mut total = CMat::zeros(dim, dim);
        for (i, a) in rec.subspace_bases.iter().enumerate() {
            for (j, b) in rec.subspace_bases.iter().enumerate() {
                if i != j {
                    assert!((a.adjoint() * b).norm() < 1e-10);
                }
            }
            total += a * a.adjoint();
        }
        assert!((total - CMat::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn recovery_refuses_bad_code() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let mut amps = code.zero_logical.amplitudes().clone();
        amps.swap_rows(0, 2);
        let corrupted = LogicalCode {
            zero_logical: StateVector::new(amps).unwrap(),
            ..code
        };
        assert!(matches!(
            build_recovery(&corrupted, &gen),
            Err(Error::KlViolation { .. })
        ));
    }

    #[test]
    fn span_check_identity_and_combination() {
        let g = gv(&[1.0, 0.5]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let rec = build_recovery(&code, &gen).unwrap();
        // E = I - 0.3 H_E (real combination), arbitrary logical state
        let psi = code
            .encode_logical(C64::new(0.6, 0.0), C64::new(0.0, 0.8))
            .unwrap();
        let corrupted = CVec::from_fn(4, |j, _| {
            psi.amplitudes()[j] * C64::new(1.0 - 0.3 * gen.diagonal()[j], 0.0)
        });
        let phi = StateVector::normalized(corrupted).unwrap();
        let out = rec.channel().apply(&phi.density()).unwrap();
        assert!((out.fidelity_with_pure(&psi) - 1.0).abs() < 1e-10);

        let mut rng = StdRng::seed_from_u64(42);
        let worst = correctable_span_check(&rec, &code, &gen, 1, 50, &mut rng).unwrap();
        assert!(worst < 1e-10, "worst deficit {worst}");
    }

    #[test]
    fn span_check_three_qubit() {
        let g = gv(&[0.9, 0.5, 0.2]);
        let code = build_code(&g).unwrap();
        let gen = build_generator(&g);
        let rec = build_recovery(&code, &gen).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let worst = correctable_span_check(&rec, &code, &gen, 3, 100, &mut rng).unwrap();
        assert!(worst < 1e-9, "worst deficit {worst}");
    }

    #[test]
    fn even_moment_parity_holds_for_any_reversal_ansatz() {
        // X^n conjugation flips the sign of H_E^m for odd m, so the even-m
        // diagonal KL condition holds for arbitrary reversed amplitudes.
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 3usize;
            let dim = 1usize << n;
            let g = gv(&[rng.gen(), rng.gen(), rng.gen()]);
            let gen = build_generator(&g);
            let r: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
            let norm: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let a0 = CVec::from_fn(dim, |j, _| C64::new(r[j] / norm, 0.0));
            let a1 = CVec::from_fn(dim, |j, _| C64::new(r[dim - 1 - j] / norm, 0.0));
            for m in [0u32, 2, 4, 6] {
                let mut diff = 0.0f64;
                for j in 0..dim {
                    let em = gen.diagonal()[j].powi(m as i32);
                    diff += (a0[j].norm_sqr() - a1[j].norm_sqr()) * em;
                }
                assert!(diff.abs() < 1e-12 * gen.norm().max(1.0).powi(m as i32));
            }
        }
    }

    #[test]
    fn random_codes_pass_kl_across_sizes() {
        let mut rng = StdRng::seed_from_u64(123);
        for n in 2..=5usize {
            let mut count = 0;
            while count < 25 {
                let g: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let gen = build_generator(&gv(&g));
                let q = (1usize << (n - 1)) - 1;
                if spectrum_degenerate(&gen, q, 1e-6) {
                    continue;
                }
                let code = build_code(&gv(&g)).unwrap();
                let report = verify_kl(&code, &gen, q, 1e-9);
                assert!(
                    report.pass,
                    "n={n} g={g:?} violation {}",
                    report.max_violation
                );
                count += 1;
            }
        }
    }

    fn spectrum_degenerate(gen: &DephasingGenerator, q: usize, tol: f64) -> bool {
        for i in 0..=q {
            for j in (i + 1)..=q {
                if (gen.diagonal()[i].abs() - gen.diagonal()[j].abs()).abs() < tol {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn overhead_formula() {
        assert_eq!(overhead_qubits(1), 2);
        assert_eq!(overhead_qubits(3), 3);
        assert_eq!(overhead_qubits(7), 4);
        assert_eq!(overhead_qubits(15), 5);
        assert_eq!(overhead_qubits(2), 3);
    }

    #[test]
    fn code_document_round_trip() {
        let code = build_code(&gv(&[0.9, 0.5, 0.2])).unwrap();
        let doc = code.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: CodeDocument = serde_json::from_str(&json).unwrap();
        let code2 = LogicalCode::from_document(&back).unwrap();
        assert!(
            (code.zero_logical.amplitudes() - code2.zero_logical.amplitudes()).norm() < 1e-14
        );
    }

    #[test]
    fn code_document_rejects_corruption() {
        let code = build_code(&gv(&[1.0, 0.5])).unwrap();
        let mut doc = code.to_document();
        doc.zero_logical[0][0] += 0.2;
        assert!(LogicalCode::from_document(&doc).is_err());
        let mut doc2 = code.to_document();
        doc2.q = 2;
        assert!(LogicalCode::from_document(&doc2).is_err());
    }
}
