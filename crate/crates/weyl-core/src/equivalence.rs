//! Turns matchings into certificates. The perturbation that a permutation
//! unitary induces between two diagonal operators is itself diagonal; its
//! entries are the matched eigenvalue differences. Decay of the tail entries
//! across growing truncations is the desk-scale stand-in for compactness,
//! and the exact bottleneck staying above d_M/4 is the obstruction.

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::closed_set::ValidatedClosedSet;
use crate::matching::{
    bottleneck_match, tail_matching_profile, MatchMethod, MatchingError, MatchingResult,
    TailProfileEntry,
};
use crate::scalar::Real;
use crate::spectra::{ess_spectrum_estimate, hausdorff_distance, DiagonalOperator, SpectraError};

#[derive(Debug, Error)]
pub enum EquivalenceError {
    #[error("matching result covers {match_len} pairs but the truncations have {data_len}")]
    LengthMismatch { match_len: usize, data_len: usize },
    #[error("no checkpoints supplied")]
    NoCheckpoints,
    #[error("checkpoints must be strictly increasing")]
    UnsortedCheckpoints,
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Diagonal entries of `B - uAu*` for the permutation unitary behind a
/// matching: entry n is the B-eigenvalue minus its matched A-eigenvalue.
pub fn perturbation_entries<F: Real>(
    a: &DiagonalOperator<F>,
    b: &DiagonalOperator<F>,
    matching: &MatchingResult<F>,
) -> Result<Vec<F>, EquivalenceError> {
    let n = matching.permutation.len();
    let xs = a.truncation(n).map_err(MatchingError::from)?;
    let ys = b.truncation(n).map_err(MatchingError::from)?;
    if xs.len() != n || ys.len() != n {
        return Err(EquivalenceError::LengthMismatch {
            match_len: n,
            data_len: xs.len().min(ys.len()),
        });
    }
    Ok(matching
        .permutation
        .iter()
        .zip(&ys)
        .map(|(&i, y)| *y - xs[i])
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceVerdict {
    EquivalentEvidence,
    Inconclusive,
}

/// Content hashes of the compared truncations, for reproducibility.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct InputHashes {
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceCertificate<F> {
    pub set_name: String,
    pub verdict: EquivalenceVerdict,
    pub epsilon: F,
    pub decay_factor: F,
    pub checkpoints: Vec<usize>,
    pub bottlenecks: Vec<F>,
    /// Tail sup of the perturbation entries per checkpoint.
    pub perturbation_tail: Vec<F>,
    pub methods: Vec<MatchMethod>,
    /// Hausdorff disagreement of the two spectrum estimates when it exceeds
    /// the tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_mismatch: Option<f64>,
    pub input_hashes: InputHashes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstructionVerdict {
    Obstructed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionCertificate<F> {
    pub set_name: String,
    pub verdict: ObstructionVerdict,
    #[serde(rename = "d_M")]
    pub d_m: F,
    /// `d_M / 4`.
    pub bound: F,
    pub checkpoints: Vec<usize>,
    pub bottlenecks: Vec<F>,
    pub input_hashes: InputHashes,
}

/// Data emitted when neither certificate can be issued honestly.
#[derive(Clone, Debug, Serialize)]
pub struct InconclusiveReport<F> {
    pub set_name: String,
    #[serde(rename = "d_M")]
    pub d_m: F,
    pub checkpoints: Vec<usize>,
    pub bottlenecks: Vec<F>,
    pub reason: String,
    pub input_hashes: InputHashes,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "certificate", rename_all = "lowercase")]
pub enum Certificate<F> {
    Equivalence(EquivalenceCertificate<F>),
    Obstruction(ObstructionCertificate<F>),
    Inconclusive(InconclusiveReport<F>),
}

impl<F: Real + Serialize> Certificate<F> {
    pub fn is_conclusive(&self) -> bool {
        match self {
            Certificate::Equivalence(c) => c.verdict == EquivalenceVerdict::EquivalentEvidence,
            Certificate::Obstruction(_) => true,
            Certificate::Inconclusive(_) => false,
        }
    }

    /// Tabular `(N, bottleneck, tail_bottleneck)` export; the tail column is
    /// empty where the certificate has no tail data.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,bottleneck,tail_bottleneck\n");
        match self {
            Certificate::Equivalence(c) => {
                for ((n, b), t) in c
                    .checkpoints
                    .iter()
                    .zip(&c.bottlenecks)
                    .zip(&c.perturbation_tail)
                {
                    out.push_str(&format!("{n},{b},{t}\n"));
                }
            }
            Certificate::Obstruction(c) => {
                for (n, b) in c.checkpoints.iter().zip(&c.bottlenecks) {
                    out.push_str(&format!("{n},{b},\n"));
                }
            }
            Certificate::Inconclusive(c) => {
                for (n, b) in c.checkpoints.iter().zip(&c.bottlenecks) {
                    out.push_str(&format!("{n},{b},\n"));
                }
            }
        }
        out
    }
}

/// Options for [`certify_equivalence`].
#[derive(Clone, Debug)]
pub struct CertifyConfig<F> {
    pub checkpoints: Vec<usize>,
    pub epsilon: F,
    pub decay_factor: F,
    pub spectrum_tolerance: F,
}

impl<F: Real> Default for CertifyConfig<F> {
    fn default() -> Self {
        CertifyConfig {
            checkpoints: vec![256, 1024, 4096],
            epsilon: F::of(0.05),
            decay_factor: F::of(2.0),
            spectrum_tolerance: F::of(0.2),
        }
    }
}

/// SHA-256 over the little-endian bit patterns of a truncation.
pub fn content_hash<F: Real>(values: &[F]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.as_f64().to_bits().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

fn estimate_window<F: Real>(xs: &[F], ys: &[F]) -> (F, F) {
    let mut all: Vec<F> = xs.iter().chain(ys).copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
    let n = all.len();
    let lo = all[n / 10];
    let hi = all[n - 1 - n / 10];
    (lo - F::one(), hi + F::one())
}

/// Decides between the two certificate kinds for a pair of operators whose
/// essential spectrum is expected to be `set`.
///
/// When `d_M = 0` the tail of the matched perturbation must decay (by the
/// configured factor from first to last checkpoint, below `epsilon` at the
/// last) to earn `equivalent-evidence`; insufficient decay is reported as
/// `inconclusive`, never upgraded. When `d_M > 0`, exact optimal bottlenecks
/// at or above `d_M/4` at every checkpoint yield an obstruction certificate;
/// a shortfall would falsify the construction and is reported as
/// inconclusive with the measured data.
pub fn certify_equivalence<F: Real>(
    a: &DiagonalOperator<F>,
    b: &DiagonalOperator<F>,
    set: &ValidatedClosedSet<F>,
    config: &CertifyConfig<F>,
) -> Result<Certificate<F>, EquivalenceError> {
    if config.checkpoints.is_empty() {
        return Err(EquivalenceError::NoCheckpoints);
    }
    if config.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EquivalenceError::UnsortedCheckpoints);
    }
    let coarsest = config.checkpoints[0];
    let largest = *config.checkpoints.last().unwrap();

    let xs_large = a.truncation(largest).map_err(MatchingError::from)?;
    let ys_large = b.truncation(largest).map_err(MatchingError::from)?;
    let input_hashes = InputHashes {
        a: content_hash(&xs_large),
        b: content_hash(&ys_large),
    };

    // Sanity: the spectrum estimates of both operators should agree with the
    // target set at the coarsest checkpoint. Disagreement only warns; the
    // verdict logic below separately refuses equivalent-evidence when the
    // estimates of A and B drift apart at the largest checkpoint.
    let eps_est = F::of(0.05);
    let threshold = 8;
    let window = estimate_window(&xs_large, &ys_large);
    let m_window = set.window_intervals(window.0, window.1);
    let est_a_coarse = ess_spectrum_estimate(&xs_large[..coarsest], eps_est, threshold);
    let est_b_coarse = ess_spectrum_estimate(&ys_large[..coarsest], eps_est, threshold);
    let coarse_mismatch = hausdorff_distance(&est_a_coarse, &m_window, window)
        .max(hausdorff_distance(&est_b_coarse, &m_window, window));
    let spectrum_mismatch = (coarse_mismatch > config.spectrum_tolerance)
        .then(|| coarse_mismatch.as_f64());

    let est_a_large = ess_spectrum_estimate(&xs_large, eps_est, threshold);
    let est_b_large = ess_spectrum_estimate(&ys_large, eps_est, threshold);
    let ab_disagreement = hausdorff_distance(&est_a_large, &est_b_large, window);
    let necessity_ok = ab_disagreement <= config.spectrum_tolerance;

    let verdict_data = set.compute_d_m();
    if verdict_data.holds {
        let profile: Vec<TailProfileEntry<F>> =
            tail_matching_profile(a, b, &config.checkpoints)?;
        let bottlenecks: Vec<F> = profile.iter().map(|e| e.bottleneck).collect();
        let tails: Vec<F> = profile.iter().map(|e| e.tail_bottleneck).collect();
        let methods: Vec<MatchMethod> = profile.iter().map(|e| e.method).collect();
        let first = tails[0];
        let last = *tails.last().unwrap();
        let decays = last * config.decay_factor <= first && last < config.epsilon;
        let verdict = if decays && necessity_ok {
            EquivalenceVerdict::EquivalentEvidence
        } else {
            EquivalenceVerdict::Inconclusive
        };
        return Ok(Certificate::Equivalence(EquivalenceCertificate {
            set_name: set.name().to_string(),
            verdict,
            epsilon: config.epsilon,
            decay_factor: config.decay_factor,
            checkpoints: config.checkpoints.clone(),
            bottlenecks,
            perturbation_tail: tails,
            methods,
            spectrum_mismatch,
            input_hashes,
        }));
    }

    // d_M > 0: measure exact optima.
    let bound = verdict_data.d_m / F::of(4.0);
    let slack = F::of(1e-12);
    let mut bottlenecks = Vec::with_capacity(config.checkpoints.len());
    for &n in &config.checkpoints {
        let r = bottleneck_match(&xs_large[..n], &ys_large[..n])?;
        bottlenecks.push(r.bottleneck);
    }
    if bottlenecks.iter().all(|b| *b >= bound - slack) {
        Ok(Certificate::Obstruction(ObstructionCertificate {
            set_name: set.name().to_string(),
            verdict: ObstructionVerdict::Obstructed,
            d_m: verdict_data.d_m,
            bound,
            checkpoints: config.checkpoints.clone(),
            bottlenecks,
            input_hashes,
        }))
    } else {
        Ok(Certificate::Inconclusive(InconclusiveReport {
            set_name: set.name().to_string(),
            d_m: verdict_data.d_m,
            checkpoints: config.checkpoints.clone(),
            bottlenecks,
            reason: format!(
                "an optimal bottleneck fell below d_M/4 = {}",
                bound.as_f64()
            ),
            input_hashes,
        }))
    }
}
