//! Monte-Carlo run of the entanglement-assisted discrimination protocol.
//!
//! A referee picks `P_U` or `P_V` with probability 1/2 each and applies it
//! to part A of `|psi_AB>`. Seeing outcome `i`, the player measures part B
//! with the binary Helstrom test `R_i` between the (unnormalized) ancilla
//! states the two hypotheses leave behind, and guesses `U` on `R_i`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ZERO};
use crate::quantum::{purify, DensityMatrix, Purification, VonNeumannMeasurement};

/// Ancilla states and the binary test for one outcome.
#[derive(Clone, Debug)]
pub struct OutcomeBranch {
    /// `Tr_A[(|u_i><u_i| ⊗ 1) |psi><psi|]`.
    pub ancilla_u: ComplexMatrix,
    pub ancilla_v: ComplexMatrix,
    /// Projector onto the positive eigenspace of `ancilla_u - ancilla_v`.
    pub guess_u: ComplexMatrix,
    pub prob_u: f64,
    pub prob_v: f64,
    /// `Tr(R_i sigma_i^H)`.
    pub guess_u_given_u: f64,
    pub guess_u_given_v: f64,
}

#[derive(Clone, Debug)]
pub struct Protocol {
    pub input: Purification,
    pub branches: Vec<OutcomeBranch>,
    /// `1/2 + 1/4 sum_i ||sigma_i^U - sigma_i^V||_1`.
    pub theoretical_success: f64,
}

fn ancilla_state(psi: &Purification, h: &[Complex64]) -> ComplexMatrix {
    let (d, k) = (psi.system_dim, psi.ancilla_dim);
    let w: Vec<Complex64> =
        (0..k).map(|j| (0..d).fold(ZERO, |acc, a| acc + h[a].conj() * psi.vector[a * k + j])).collect();
    ComplexMatrix::outer(&w, &w)
}

/// Protocol for the pair `(U, V)` with the discriminator reported for it:
/// the input state is the purification of `V rho^T V^dagger`.
pub fn build_protocol(
    u: &VonNeumannMeasurement,
    v: &VonNeumannMeasurement,
    discriminator: &DensityMatrix,
) -> Result<Protocol> {
    let d = u.dim();
    if v.dim() != d {
        return Err(Error::DimensionMismatch(d, v.dim()));
    }
    if discriminator.dim() != d {
        return Err(Error::DimensionMismatch(d, discriminator.dim()));
    }
    let rotated = &(v.unitary() * &discriminator.matrix().transpose()) * &v.unitary().adjoint();
    let input = purify(&DensityMatrix::new(rotated)?);
    let mut success = 0.5;
    let branches = (0..d)
        .map(|i| {
            let su = ancilla_state(&input, &u.vector(i));
            let sv = ancilla_state(&input, &v.vector(i));
            let diff = (&su - &sv).hermitian_part();
            let sys = linalg::hermitian_eig_unchecked(&diff);
            let scale = su.trace().re.abs().max(sv.trace().re.abs()).max(1e-300);
            let positive: Vec<usize> =
                (0..sys.eigenvalues.len()).filter(|&k| sys.eigenvalues[k] > 1e-13 * scale).collect();
            let p = sys.eigenvectors.select_columns(&positive);
            let guess_u = &p * &p.adjoint();
            success += 0.25 * sys.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
            OutcomeBranch {
                prob_u: su.trace().re,
                prob_v: sv.trace().re,
                guess_u_given_u: guess_u.hs_inner(&su).re,
                guess_u_given_v: guess_u.hs_inner(&sv).re,
                ancilla_u: su,
                ancilla_v: sv,
                guess_u,
            }
        })
        .collect();
    Ok(Protocol { input, branches, theoretical_success: success.min(1.0) })
}

impl Protocol {
    /// Success probability of the constructed tests,
    /// `1/2 sum_i [Tr(R_i sigma_i^U) + Tr((1 - R_i) sigma_i^V)]`.
    pub fn attained_success(&self) -> f64 {
        0.5 * self.branches.iter().map(|b| b.guess_u_given_u + b.prob_v - b.guess_u_given_v).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    pub truth_is_u: bool,
    pub outcome: usize,
    pub guessed_u: bool,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.truth_is_u == self.guessed_u
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub trials: usize,
    pub seed: u64,
    pub empirical_success: f64,
    pub theoretical_success: f64,
    /// `sqrt(p (1 - p) / trials)` at the theoretical `p`.
    pub standard_error: f64,
    pub transcript: Vec<TrialRecord>,
}

impl ProtocolRun {
    /// SHA-256 over `(truth, outcome, guess)` per trial.
    pub fn transcript_digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.transcript {
            h.update([t.truth_is_u as u8]);
            h.update((t.outcome as u64).to_le_bytes());
            h.update([t.guessed_u as u8]);
        }
        hex::encode(h.finalize())
    }

    pub fn within_three_sigma(&self) -> bool {
        (self.empirical_success - self.theoretical_success).abs() <= 3.0 * self.standard_error + 1e-12
    }
}

fn sample_index(weights: &[f64], r: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if r < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Runs `trials` rounds. Trial `t` draws from the ChaCha8 stream `t` of the
/// seed, so the transcript does not depend on scheduling.
pub fn simulate(protocol: &Protocol, trials: usize, seed: u64) -> Result<ProtocolRun> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let pu: Vec<f64> = protocol.branches.iter().map(|b| b.prob_u.max(0.0)).collect();
    let pv: Vec<f64> = protocol.branches.iter().map(|b| b.prob_v.max(0.0)).collect();
    let transcript: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let truth_is_u = rng.random::<bool>();
            let outcome = sample_index(if truth_is_u { &pu } else { &pv }, rng.random::<f64>());
            let b = &protocol.branches[outcome];
            let (hit, mass) = if truth_is_u { (b.guess_u_given_u, b.prob_u) } else { (b.guess_u_given_v, b.prob_v) };
            let q = if mass > 0.0 { (hit / mass).clamp(0.0, 1.0) } else { 0.0 };
            let guessed_u = rng.random::<f64>() < q;
            TrialRecord { truth_is_u, outcome, guessed_u }
        })
        .collect();
    let correct = transcript.iter().filter(|t| t.correct()).count();
    let p = protocol.theoretical_success;
    Ok(ProtocolRun {
        trials,
        seed,
        empirical_success: correct as f64 / trials as f64,
        theoretical_success: p,
        standard_error: (p * (1.0 - p) / trials as f64).max(0.0).sqrt(),
        transcript,
    })
}
