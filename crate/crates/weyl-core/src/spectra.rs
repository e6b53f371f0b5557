//! Diagonal self-adjoint operator models: an operator is a deterministic
//! rule index -> eigenvalue. Synthesis interleaves a dense enumeration of a
//! target set with optional outlier slots through the pairing bijection, so
//! the accumulation set of the eigenvalue sequence is exactly the target set.

use std::sync::Arc;

use thiserror::Error;

use crate::closed_set::ValidatedClosedSet;
use crate::pairing;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("outlier {value} at column {column} lies inside the set")]
    OutlierInsideM { value: f64, column: u64 },
    #[error("outlier rule anchor {anchor} is not an endpoint of the gap holding its first value")]
    BadAnchor { anchor: f64 },
    #[error("explicit operator has {len} eigenvalues, index {index} requested")]
    TruncationBeyondData { len: usize, index: u64 },
    #[error(transparent)]
    Pairing(#[from] pairing::PairingError),
}

/// Values for the outlier slots `<k,1>`; columns without a value fall back
/// to the dense part.
#[derive(Clone, Debug)]
pub enum OutlierRule<F> {
    /// Every outlier slot falls back to the dense value of its row.
    None,
    /// Explicit values for columns `1..=len`.
    Values(Vec<F>),
    /// `anchor + scale * k^(-exponent)`: distance to the anchor decays
    /// polynomially in the column index.
    PowerDecay { anchor: F, scale: F, exponent: i32 },
    /// `anchor + scale * ratio^(k-1)`: the value at column k sits at distance
    /// `|scale| * ratio^(k-1)` from the anchor, i.e. the defect halves (say)
    /// per column and so decays like 1/slot across the pairing grid.
    GeometricDecay { anchor: F, scale: F, ratio: F },
}

impl<F: Real> OutlierRule<F> {
    pub fn value(&self, column: u64) -> Option<F> {
        debug_assert!(column >= 1);
        match self {
            OutlierRule::None => None,
            OutlierRule::Values(vs) => vs.get(column as usize - 1).copied(),
            OutlierRule::PowerDecay {
                anchor,
                scale,
                exponent,
            } => Some(*anchor + *scale * F::of(column as f64).powi(-exponent)),
            OutlierRule::GeometricDecay {
                anchor,
                scale,
                ratio,
            } => Some(*anchor + *scale * ratio.powi(column as i32 - 1)),
        }
    }

}

#[derive(Clone, Debug)]
enum OperatorKind<F: Real> {
    Explicit(Vec<F>),
    Synth {
        set: Arc<ValidatedClosedSet<F>>,
        outliers: OutlierRule<F>,
        negated: bool,
    },
}

/// A diagonal operator model. Evaluation is pure: the same index always
/// yields the identical eigenvalue.
#[derive(Clone, Debug)]
pub struct DiagonalOperator<F: Real> {
    name: String,
    kind: OperatorKind<F>,
}

impl<F: Real> DiagonalOperator<F> {
    /// Wraps an explicit eigenvalue list (an imported truncation).
    pub fn from_eigenvalues(name: impl Into<String>, eigenvalues: Vec<F>) -> Self {
        DiagonalOperator {
            name: name.into(),
            kind: OperatorKind::Explicit(eigenvalues),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source_set(&self) -> Option<&Arc<ValidatedClosedSet<F>>> {
        match &self.kind {
            OperatorKind::Synth { set, .. } => Some(set),
            OperatorKind::Explicit(_) => None,
        }
    }

    /// The operator `-A` (every eigenvalue negated).
    pub fn negated(&self) -> Self {
        let kind = match &self.kind {
            OperatorKind::Explicit(vs) => {
                OperatorKind::Explicit(vs.iter().map(|v| -*v).collect())
            }
            OperatorKind::Synth {
                set,
                outliers,
                negated,
            } => OperatorKind::Synth {
                set: set.clone(),
                outliers: outliers.clone(),
                negated: !negated,
            },
        };
        DiagonalOperator {
            name: format!("neg({})", self.name),
            kind,
        }
    }

    /// Eigenvalue at 1-based index `n`.
    pub fn eigenvalue(&self, n: u64) -> Result<F, SpectraError> {
        match &self.kind {
            OperatorKind::Explicit(vs) => {
                vs.get(n as usize - 1)
                    .copied()
                    .ok_or(SpectraError::TruncationBeyondData {
                        len: vs.len(),
                        index: n,
                    })
            }
            OperatorKind::Synth { set, .. } => {
                let idx = pairing::decode(n)?;
                let dense = set.dense_sequence(idx.k as usize);
                Ok(self.synth_value(idx, &dense))
            }
        }
    }

    fn synth_value(&self, idx: pairing::PairingIndex, dense: &[F]) -> F {
        let OperatorKind::Synth {
            outliers, negated, ..
        } = &self.kind
        else {
            unreachable!()
        };
        let base = if idx.m == 1 {
            outliers
                .value(idx.k)
                .unwrap_or_else(|| dense[idx.k as usize - 1])
        } else {
            dense[idx.k as usize - 1]
        };
        if *negated {
            -base
        } else {
            base
        }
    }

    /// The first `n` eigenvalues in index order.
    pub fn truncation(&self, n: usize) -> Result<Vec<F>, SpectraError> {
        match &self.kind {
            OperatorKind::Explicit(vs) => {
                if n > vs.len() {
                    return Err(SpectraError::TruncationBeyondData {
                        len: vs.len(),
                        index: n as u64,
                    });
                }
                Ok(vs[..n].to_vec())
            }
            OperatorKind::Synth { set, .. } => {
                // Row k only appears at slots >= 2^(k-1), so the dense prefix
                // stays logarithmic in n.
                let k_max = 64 - (n as u64).max(1).leading_zeros() as usize + 1;
                let dense = set.dense_sequence(k_max);
                (1..=n as u64)
                    .map(|i| Ok(self.synth_value(pairing::decode(i)?, &dense)))
                    .collect()
            }
        }
    }
}

/// Builds the diagonal model whose eigenvalue at slot `<k,1>` is the k-th
/// outlier (falling back to the dense value when the rule has none) and at
/// `<k,m>`, `m >= 2`, the k-th term of the fixed dense enumeration of `set`.
/// Every outlier must lie outside the set.
pub fn synth_with_ess_spectrum<F: Real>(
    set: &Arc<ValidatedClosedSet<F>>,
    outliers: OutlierRule<F>,
    name: impl Into<String>,
) -> Result<DiagonalOperator<F>, SpectraError> {
    match &outliers {
        OutlierRule::None => {}
        OutlierRule::Values(vs) => {
            for (i, v) in vs.iter().enumerate() {
                if set.contains(*v) {
                    return Err(SpectraError::OutlierInsideM {
                        value: v.as_f64(),
                        column: i as u64 + 1,
                    });
                }
            }
        }
        rule => {
            // Decay rules produce values strictly between the anchor and the
            // first value, so it is enough that the half-open segment from
            // the anchor to the first value avoids the set.
            let v1 = rule.value(1).expect("decay rules are total");
            if set.contains(v1) {
                return Err(SpectraError::OutlierInsideM {
                    value: v1.as_f64(),
                    column: 1,
                });
            }
            let anchor = match rule {
                OutlierRule::PowerDecay { anchor, .. }
                | OutlierRule::GeometricDecay { anchor, .. } => *anchor,
                _ => unreachable!(),
            };
            if !set.contains(anchor) {
                return Err(SpectraError::BadAnchor {
                    anchor: anchor.as_f64(),
                });
            }
            let (lo, hi) = if anchor <= v1 { (anchor, v1) } else { (v1, anchor) };
            let inside = set.window_intervals(lo, hi);
            if inside != vec![(anchor, anchor)] {
                return Err(SpectraError::BadAnchor {
                    anchor: anchor.as_f64(),
                });
            }
        }
    }
    Ok(DiagonalOperator {
        name: name.into(),
        kind: OperatorKind::Synth {
            set: set.clone(),
            outliers,
            negated: false,
        },
    })
}

/// The defect sequence `a_n = dist(eig_n, M)` with its tail suprema at
/// dyadic checkpoints.
#[derive(Clone, Debug)]
pub struct DefectProfile<F> {
    pub values: Vec<F>,
    /// `(m, sup of values[m-1..])` for m in 1, 2, 4, ...
    pub tail_sup: Vec<(usize, F)>,
}

pub fn defect_sequence<F: Real>(
    op: &DiagonalOperator<F>,
    set: &ValidatedClosedSet<F>,
    n: usize,
) -> Result<DefectProfile<F>, SpectraError> {
    let values: Vec<F> = op
        .truncation(n)?
        .into_iter()
        .map(|v| set.distance_to_set(v))
        .collect();
    let mut tail_sup = Vec::new();
    let mut m = 1usize;
    while m <= n {
        let sup = values[m - 1..]
            .iter()
            .copied()
            .fold(F::zero(), |a, b| a.max(b));
        tail_sup.push((m, sup));
        m *= 2;
    }
    Ok(DefectProfile { values, tail_sup })
}

/// Finite-truncation stand-in for the accumulation set: the union of
/// `eps`-intervals around points where at least `threshold` eigenvalues fall
/// within `eps`, merged into disjoint closed intervals.
pub fn ess_spectrum_estimate<F: Real>(eigs: &[F], eps: F, threshold: usize) -> Vec<(F, F)> {
    assert!(eps > F::zero() && threshold >= 2);
    let mut sorted: Vec<F> = eigs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
    let mut marked: Vec<(F, F)> = Vec::new();
    let mut lo = 0usize;
    let mut hi = 0usize;
    for (i, &x) in sorted.iter().enumerate() {
        while sorted[lo] < x - eps {
            lo += 1;
        }
        if hi < i {
            hi = i;
        }
        while hi + 1 < sorted.len() && sorted[hi + 1] <= x + eps {
            hi += 1;
        }
        if hi - lo + 1 >= threshold {
            marked.push((x - eps, x + eps));
        }
    }
    merge_intervals(marked)
}

fn merge_intervals<F: Real>(mut intervals: Vec<(F, F)>) -> Vec<(F, F)> {
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN interval"));
    let mut out: Vec<(F, F)> = Vec::new();
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Hausdorff distance between two unions of closed intervals, both clipped
/// to `window`. Infinite when exactly one side is empty after clipping.
pub fn hausdorff_distance<F: Real>(a: &[(F, F)], b: &[(F, F)], window: (F, F)) -> F {
    let ca = clip(a, window);
    let cb = clip(b, window);
    match (ca.is_empty(), cb.is_empty()) {
        (true, true) => F::zero(),
        (true, false) | (false, true) => F::infinity(),
        _ => directed_hausdorff(&ca, &cb).max(directed_hausdorff(&cb, &ca)),
    }
}

fn clip<F: Real>(intervals: &[(F, F)], window: (F, F)) -> Vec<(F, F)> {
    intervals
        .iter()
        .filter_map(|&(a, b)| {
            let lo = a.max(window.0);
            let hi = b.min(window.1);
            (lo <= hi).then_some((lo, hi))
        })
        .collect()
}

/// `max over x in a of dist(x, b)`; the maximum is attained at an endpoint
/// of `a` or at a midpoint of a hole of `b` inside `a`.
fn directed_hausdorff<F: Real>(a: &[(F, F)], b: &[(F, F)]) -> F {
    let dist_to_b = |x: F| -> F {
        b.iter()
            .map(|&(lo, hi)| {
                if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    F::zero()
                }
            })
            .fold(F::infinity(), |m, d| m.min(d))
    };
    let mut candidates: Vec<F> = Vec::new();
    for &(lo, hi) in a {
        candidates.push(lo);
        candidates.push(hi);
    }
    for w in b.windows(2) {
        let mid = (w[0].1 + w[1].0) / F::of(2.0);
        if a.iter().any(|&(lo, hi)| lo <= mid && mid <= hi) {
            candidates.push(mid);
        }
    }
    candidates
        .into_iter()
        .map(dist_to_b)
        .fold(F::zero(), |m, d| m.max(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_set::tests::{spec_example_a, spec_reals, spec_unit_interval};
    use crate::closed_set::{validate, ClosedSetSpec, Gap};

    fn unit_interval() -> Arc<ValidatedClosedSet<f64>> {
        Arc::new(validate(spec_unit_interval()).unwrap())
    }

    #[test]
    fn synth_truncation_follows_pairing_grid() {
        let m = unit_interval();
        let op = synth_with_ess_spectrum(&m, OutlierRule::None, "dense").unwrap();
        let mu = m.dense_sequence(3);
        // Slots 1..6 decode to (1,1) (2,1) (1,2) (3,1) (1,3) (2,2); with no
        // outliers every row-k slot carries mu_k.
        assert_eq!(
            op.truncation(6).unwrap(),
            vec![mu[0], mu[1], mu[0], mu[2], mu[0], mu[1]]
        );
    }

    #[test]
    fn synth_single_point_set_with_power_outliers() {
        let point = Arc::new(
            validate(
                ClosedSetSpec::new("zero").with_gaps(vec![Gap::below(0.0), Gap::above(0.0)]),
            )
            .unwrap(),
        );
        let outliers = OutlierRule::Values((1..=5).map(|k| (2.0f64).powi(k)).collect());
        let op = synth_with_ess_spectrum(&point, outliers, "spiked").unwrap();
        for k in 1..=5u64 {
            let slot = 1u64 << (k - 1);
            assert_eq!(op.eigenvalue(slot).unwrap(), (2.0f64).powi(k as i32));
        }
        assert_eq!(op.eigenvalue(3).unwrap(), 0.0);
        assert_eq!(op.eigenvalue(6).unwrap(), 0.0);
    }

    #[test]
    fn synth_over_reals_has_zero_defects() {
        let reals = Arc::new(validate(spec_reals()).unwrap());
        let op = synth_with_ess_spectrum(&reals, OutlierRule::None, "r").unwrap();
        let profile = defect_sequence(&op, &reals, 512).unwrap();
        assert!(profile.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn outlier_inside_set_rejected() {
        let m = unit_interval();
        let err = synth_with_ess_spectrum(&m, OutlierRule::Values(vec![2.0, 0.5]), "bad");
        assert!(matches!(
            err.unwrap_err(),
            SpectraError::OutlierInsideM { column: 2, .. }
        ));
    }

    #[test]
    fn defect_sequence_records_outlier_distances() {
        let ray = Arc::new(
            validate(ClosedSetSpec::new("ray").with_gaps(vec![Gap::below(0.0)])).unwrap(),
        );
        let outliers = OutlierRule::Values((1..=6).map(|k| -(k as f64)).collect());
        let op = synth_with_ess_spectrum(&ray, outliers, "below").unwrap();
        let profile = defect_sequence(&op, &ray, 64).unwrap();
        for k in 1..=6u64 {
            let slot = (1usize << (k - 1)) - 1;
            assert_eq!(profile.values[slot], k as f64);
        }
        for w in profile.tail_sup.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
    }

    #[test]
    fn tail_sup_tracks_decaying_defects() {
        let m = unit_interval();
        let a = synth_with_ess_spectrum(
            &m,
            OutlierRule::GeometricDecay {
                anchor: 1.0,
                scale: 1.0,
                ratio: 0.5,
            },
            "a",
        )
        .unwrap();
        let profile = defect_sequence(&a, &m, 4096).unwrap();
        // Defect at slot 2^(k-1) is 2^(1-k), i.e. ~1/slot.
        let last = profile.tail_sup.last().unwrap();
        assert_eq!(last.0, 4096);
        assert!(last.1 <= 2.0 / 4096.0 + 1e-12);
        let first = profile.tail_sup[0];
        assert_eq!(first, (1, 1.0));
    }

    #[test]
    fn ess_estimate_single_cluster() {
        let eigs = vec![0.0f64; 100];
        assert_eq!(ess_spectrum_estimate(&eigs, 0.1, 3), vec![(-0.1, 0.1)]);
    }

    #[test]
    fn ess_estimate_isolated_points_empty() {
        let eigs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert!(ess_spectrum_estimate(&eigs, 0.1, 2).is_empty());
    }

    #[test]
    fn ess_estimate_covers_unit_interval() {
        let m = unit_interval();
        let op = synth_with_ess_spectrum(&m, OutlierRule::None, "d").unwrap();
        let eigs = op.truncation(1 << 12).unwrap();
        let est = ess_spectrum_estimate(&eigs, 0.05, 8);
        let d = hausdorff_distance(&est, &[(0.0, 1.0)], (-2.0, 3.0));
        assert!(d < 0.1, "Hausdorff distance {d}");
    }

    #[test]
    fn ess_estimate_ignores_sparse_outliers() {
        let m = unit_interval();
        let op =
            synth_with_ess_spectrum(&m, OutlierRule::Values(vec![5.0, 7.0, 11.0]), "sp").unwrap();
        let eigs = op.truncation(1 << 12).unwrap();
        let est = ess_spectrum_estimate(&eigs, 0.05, 8);
        assert!(est.iter().all(|&(_, hi)| hi < 2.0));
    }

    #[test]
    fn negated_operator_mirrors_spectrum() {
        let a = Arc::new(validate(spec_example_a()).unwrap());
        let op = synth_with_ess_spectrum(&a, OutlierRule::None, "a").unwrap();
        let neg = op.negated();
        let t = op.truncation(32).unwrap();
        let tn = neg.truncation(32).unwrap();
        for (x, y) in t.iter().zip(&tn) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn explicit_operator_bounds_checked() {
        let op = DiagonalOperator::from_eigenvalues("x", vec![1.0, 2.0]);
        assert_eq!(op.truncation(2).unwrap(), vec![1.0, 2.0]);
        assert!(matches!(
            op.truncation(3),
            Err(SpectraError::TruncationBeyondData { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let a = [(0.0, 1.0)];
        let b = [(0.0, 0.4), (0.6, 1.0)];
        let d = hausdorff_distance(&a, &b, (-1.0, 2.0));
        assert!((d - 0.1_f64).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&a, &a, (-1.0, 2.0)), 0.0);
    }
}
