//! Closed subsets of the real line, encoded by their complement.
//!
//! A set `M` is described by finitely many explicit open gaps plus up to two
//! parametric tail families of gaps marching toward an infinity. This keeps
//! the hole-at-infinity defect `d_M` exactly computable from the rule
//! parameters: no limit is ever approximated numerically.

mod dense;

pub use dense::DenseSequence;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::extended::Extended;
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetError {
    #[error("gaps overlap: {a} and {b}")]
    OverlappingGaps { a: String, b: String },
    #[error("the gaps cover the whole line; the set is empty")]
    EmptySet,
    #[error("malformed tail rule: {0}")]
    MalformedTailRule(String),
    #[error("malformed gap: {0}")]
    MalformedGap(String),
    #[error("invalid number: {0}")]
    InvalidNumber(String),
}

/// An open interval of the complement, `lo < hi`. Endpoints belong to the set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap<F> {
    pub lo: Extended<F>,
    pub hi: Extended<F>,
}

impl<F: Real> Gap<F> {
    pub fn bounded(lo: F, hi: F) -> Self {
        Gap {
            lo: Extended::Finite(lo),
            hi: Extended::Finite(hi),
        }
    }

    /// `(-inf, hi)`
    pub fn below(hi: F) -> Self {
        Gap {
            lo: Extended::NegInf,
            hi: Extended::Finite(hi),
        }
    }

    /// `(lo, +inf)`
    pub fn above(lo: F) -> Self {
        Gap {
            lo: Extended::Finite(lo),
            hi: Extended::PosInf,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Half the gap length for bounded gaps, `+inf` otherwise.
    pub fn half_width(&self) -> Extended<F> {
        match (self.lo.finite(), self.hi.finite()) {
            (Some(a), Some(b)) => Extended::Finite((b - a) / F::of(2.0)),
            _ => Extended::PosInf,
        }
    }

    pub fn contains(&self, x: F) -> bool {
        let above_lo = match self.lo {
            Extended::NegInf => true,
            Extended::Finite(a) => a < x,
            Extended::PosInf => false,
        };
        let below_hi = match self.hi {
            Extended::PosInf => true,
            Extended::Finite(b) => x < b,
            Extended::NegInf => false,
        };
        above_lo && below_hi
    }

    fn neg(self) -> Self {
        Gap {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }
}

impl<F: Real> fmt::Display for Gap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

impl<F: Real + Serialize> Serialize for Gap<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.lo, &self.hi).serialize(serializer)
    }
}

impl<'de, F: Real> Deserialize<'de> for Gap<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (lo, hi) = <(Extended<F>, Extended<F>)>::deserialize(deserializer)?;
        Ok(Gap { lo, hi })
    }
}

/// Which infinity a tail family walks toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailDirection {
    #[serde(rename = "+inf")]
    Pos,
    #[serde(rename = "-inf")]
    Neg,
}

impl TailDirection {
    pub fn flip(self) -> Self {
        match self {
            TailDirection::Pos => TailDirection::Neg,
            TailDirection::Neg => TailDirection::Pos,
        }
    }
}

impl fmt::Display for TailDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailDirection::Pos => write!(f, "+inf"),
            TailDirection::Neg => write!(f, "-inf"),
        }
    }
}

/// Gap centers `c(k) = alpha*k + beta` for `k >= k0`, `alpha > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterRule<F> {
    pub alpha: F,
    pub beta: F,
    pub k0: u64,
}

/// Radius law of a tail family.
///
/// A `table` stores an explicit prefix and a declared limit; past the prefix
/// the radius continues at the limit (when positive) or keeps halving from
/// the last stored value (when the declared limit is zero), so the declared
/// limit is the true limit of the realized radii in both cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadiusRule<F> {
    Constant { rho: F },
    Harmonic { rho: F },
    Geometric { rho: F, q: F },
    Table { table: Vec<F>, limit: F },
}

/// One family of gaps `(c(k) - r(k), c(k) + r(k))`, `k >= k0`, mirrored to
/// the negative axis when `direction` is `-inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRule<F> {
    pub direction: TailDirection,
    pub center: CenterRule<F>,
    pub radius: RadiusRule<F>,
}

impl<F: Real> TailRule<F> {
    pub fn first_k(&self) -> u128 {
        self.center.k0 as u128
    }

    /// Center in outward coordinates (positive axis regardless of direction).
    pub fn center_at(&self, k: u128) -> F {
        self.center.alpha * F::of(k as f64) + self.center.beta
    }

    pub fn radius_at(&self, k: u128) -> F {
        let k0 = self.first_k();
        debug_assert!(k >= k0);
        match &self.radius {
            RadiusRule::Constant { rho } => *rho,
            RadiusRule::Harmonic { rho } => *rho / F::of(k as f64),
            RadiusRule::Geometric { rho, q } => *rho * q.powf(F::of(k as f64)),
            RadiusRule::Table { table, limit } => {
                let i = (k - k0) as usize;
                if i < table.len() {
                    table[i]
                } else if *limit > F::zero() {
                    *limit
                } else {
                    let last = *table.last().expect("validated table is nonempty");
                    last * F::of(0.5).powf(F::of((i - table.len() + 1) as f64))
                }
            }
        }
    }

    /// The declared limit superior of the radii.
    pub fn limsup_radius(&self) -> F {
        match &self.radius {
            RadiusRule::Constant { rho } => *rho,
            RadiusRule::Harmonic { .. } | RadiusRule::Geometric { .. } => F::zero(),
            RadiusRule::Table { limit, .. } => *limit,
        }
    }

    /// `sup { r(j) : j >= k }`, in closed form.
    pub fn sup_radius_from(&self, k: u128) -> F {
        match &self.radius {
            RadiusRule::Constant { .. }
            | RadiusRule::Harmonic { .. }
            | RadiusRule::Geometric { .. } => self.radius_at(k.max(self.first_k())),
            RadiusRule::Table { table, limit } => {
                let k0 = self.first_k();
                let i = k.saturating_sub(k0) as usize;
                if i < table.len() {
                    let prefix_max = table[i..]
                        .iter()
                        .copied()
                        .fold(F::zero(), |a, b| a.max(b));
                    prefix_max.max(*limit)
                } else if *limit > F::zero() {
                    *limit
                } else {
                    self.radius_at(k.max(k0))
                }
            }
        }
    }

    /// `sup { r(j) : a <= j <= b }`.
    fn sup_radius_range(&self, a: u128, b: u128) -> F {
        debug_assert!(a <= b);
        match &self.radius {
            RadiusRule::Constant { .. }
            | RadiusRule::Harmonic { .. }
            | RadiusRule::Geometric { .. } => self.radius_at(a.max(self.first_k())),
            RadiusRule::Table { .. } => {
                let mut best = F::zero();
                let mut k = a;
                // Past the stored prefix the radii are monotone, one probe is enough.
                let prefix_end = self.first_k() + self.table_len() as u128;
                loop {
                    best = best.max(self.radius_at(k));
                    if k >= b || k >= prefix_end {
                        break;
                    }
                    k += 1;
                }
                best
            }
        }
    }

    fn table_len(&self) -> usize {
        match &self.radius {
            RadiusRule::Table { table, .. } => table.len(),
            _ => 0,
        }
    }

    fn inner_edge(&self, k: u128) -> F {
        self.center_at(k) - self.radius_at(k)
    }

    fn outer_edge(&self, k: u128) -> F {
        self.center_at(k) + self.radius_at(k)
    }

    /// Gap edges consistent with the centered membership test `|u - c| < r`:
    /// `c - r` and `c + r` can round to the inside, so nudge outward until
    /// the edge point itself lies in the set.
    fn realized_inner_edge(&self, k: u128) -> F {
        let c = self.center_at(k);
        let r = self.radius_at(k);
        let mut x = c - r;
        while (x - c).abs() < r {
            x = step_down(x);
        }
        x
    }

    fn realized_outer_edge(&self, k: u128) -> F {
        let c = self.center_at(k);
        let r = self.radius_at(k);
        let mut x = c + r;
        while (x - c).abs() < r {
            x = step_up(x);
        }
        x
    }

    /// The k-th gap in x-space coordinates, with membership-consistent edges.
    fn realized_gap(&self, k: u128) -> Gap<F> {
        let (inner, outer) = (self.realized_inner_edge(k), self.realized_outer_edge(k));
        match self.direction {
            TailDirection::Pos => Gap::bounded(inner, outer),
            TailDirection::Neg => Gap::bounded(-outer, -inner),
        }
    }

    /// Rough index whose center is near `u`, clamped to the valid range.
    fn k_near(&self, u: F) -> u128 {
        let est = ((u - self.center.beta) / self.center.alpha).as_f64();
        let est = est.max(self.first_k() as f64).min(3.0e38);
        est.round() as u128
    }

    /// Smallest `k` with `c(k) + r(k) > t`. Outer edges are strictly
    /// increasing for any validated rule, so a jump plus a short scan is exact.
    fn first_k_outer_beyond(&self, t: F) -> u128 {
        let k0 = self.first_k();
        let r_bound = self.sup_radius_from(k0);
        let mut k = self
            .k_near(t - r_bound)
            .saturating_sub(2 + self.table_len() as u128)
            .max(k0);
        while self.outer_edge(k) <= t {
            k += 1;
        }
        // Back up in case the jump overshot.
        while k > k0 && self.outer_edge(k - 1) > t {
            k -= 1;
        }
        k
    }

    /// Largest `k` with `c(k) - r(k) < t`, if any.
    fn last_k_inner_below(&self, t: F) -> Option<u128> {
        let k0 = self.first_k();
        if self.inner_edge(k0) >= t {
            return None;
        }
        let mut k = self.k_near(t).max(k0) + 2 + self.table_len() as u128;
        while k > k0 && self.inner_edge(k) >= t {
            k -= 1;
        }
        while self.inner_edge(k + 1) < t {
            k += 1;
        }
        Some(k)
    }

    fn validate(&self) -> Result<(), SetError> {
        let err = |msg: String| Err(SetError::MalformedTailRule(msg));
        let CenterRule { alpha, beta, k0 } = self.center;
        if !(alpha.is_finite() && beta.is_finite()) || alpha <= F::zero() {
            return err(format!("center rule needs finite beta and alpha > 0, got alpha={alpha}, beta={beta}"));
        }
        if k0 == 0 {
            return err("start index k0 must be >= 1".into());
        }
        let k0 = k0 as u128;
        let two = F::of(2.0);
        // Consecutive gaps may touch (the point between them stays in the
        // set) but must not overlap: r(k) + r(k+1) <= alpha for all k.
        match &self.radius {
            RadiusRule::Constant { rho } => {
                if !rho.is_finite() || *rho <= F::zero() {
                    return err(format!("constant radius must be positive, got {rho}"));
                }
                if two * *rho > alpha {
                    return err(format!(
                        "constant-radius gaps overlap: 2*rho = {} > alpha = {alpha}",
                        two * *rho
                    ));
                }
            }
            RadiusRule::Harmonic { rho } => {
                if !rho.is_finite() || *rho <= F::zero() {
                    return err(format!("harmonic radius must be positive, got {rho}"));
                }
                let worst = self.radius_at(k0) + self.radius_at(k0 + 1);
                if worst > alpha {
                    return err(format!(
                        "harmonic gaps overlap at k0={k0}: r(k0)+r(k0+1) = {worst} > alpha = {alpha}"
                    ));
                }
            }
            RadiusRule::Geometric { rho, q } => {
                if !rho.is_finite() || *rho <= F::zero() {
                    return err(format!("geometric radius must be positive, got {rho}"));
                }
                if !q.is_finite() || *q <= F::zero() || *q >= F::one() {
                    return err(format!("geometric ratio must satisfy 0 < q < 1, got {q}"));
                }
                let worst = self.radius_at(k0) + self.radius_at(k0 + 1);
                if worst > alpha {
                    return err(format!(
                        "geometric gaps overlap at k0={k0}: r(k0)+r(k0+1) = {worst} > alpha = {alpha}"
                    ));
                }
            }
            RadiusRule::Table { table, limit } => {
                if table.is_empty() {
                    return err("table radius needs at least one stored value".into());
                }
                if !limit.is_finite() || *limit < F::zero() {
                    return err(format!("table limit must be finite and >= 0, got {limit}"));
                }
                for (i, r) in table.iter().enumerate() {
                    if !r.is_finite() || *r <= F::zero() {
                        return err(format!("table radius #{i} must be positive, got {r}"));
                    }
                }
                for w in table.windows(2) {
                    if w[0] + w[1] > alpha {
                        return err(format!(
                            "table gaps overlap: r+r' = {} > alpha = {alpha}",
                            w[0] + w[1]
                        ));
                    }
                }
                let last = *table.last().unwrap();
                let cont = if *limit > F::zero() { *limit } else { last / two };
                if last + cont > alpha || two * cont > alpha {
                    return err(format!(
                        "table continuation overlaps: last = {last}, continuation = {cont}, alpha = {alpha}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A closed-set description before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Real + Serialize", deserialize = "F: Real + Deserialize<'de>"))]
pub struct ClosedSetSpec<F> {
    pub name: String,
    #[serde(default = "Vec::new")]
    pub finite_gaps: Vec<Gap<F>>,
    #[serde(default = "Vec::new")]
    pub tails: Vec<TailRule<F>>,
}

impl<F: Real> ClosedSetSpec<F> {
    pub fn new(name: impl Into<String>) -> Self {
        ClosedSetSpec {
            name: name.into(),
            finite_gaps: Vec::new(),
            tails: Vec::new(),
        }
    }

    pub fn with_gaps(mut self, gaps: Vec<Gap<F>>) -> Self {
        self.finite_gaps = gaps;
        self
    }

    pub fn with_tail(mut self, tail: TailRule<F>) -> Self {
        self.tails.push(tail);
        self
    }

    /// The mirror image `-M`: gaps reflect, tail directions flip.
    pub fn negated(&self) -> Self {
        let mut gaps: Vec<Gap<F>> = self.finite_gaps.iter().map(|g| g.neg()).collect();
        gaps.reverse();
        let tails = self
            .tails
            .iter()
            .map(|t| TailRule {
                direction: t.direction.flip(),
                center: t.center.clone(),
                radius: t.radius.clone(),
            })
            .collect();
        ClosedSetSpec {
            name: format!("neg({})", self.name),
            finite_gaps: gaps,
            tails,
        }
    }
}

/// Classification of a set: the defect `d_M` and whether the equivalence
/// property holds on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WvnVerdict<F> {
    #[serde(rename = "d_M")]
    pub d_m: F,
    pub exact: bool,
    pub holds: bool,
}

/// One floating-point step outward; at most a couple of steps bridge the
/// rounding of `c -+ r`.
fn step_down<F: Real>(x: F) -> F {
    let ulp = (x.abs() * F::epsilon()).max(F::min_positive_value());
    x - ulp
}

fn step_up<F: Real>(x: F) -> F {
    let ulp = (x.abs() * F::epsilon()).max(F::min_positive_value());
    x + ulp
}

/// Where a point of the complement sits.
#[derive(Clone, Copy, Debug)]
enum GapAt<F> {
    Finite(Gap<F>),
    /// Outward coordinates plus the realized x-space bounds.
    Tail {
        direction: TailDirection,
        center: F,
        radius: F,
        bounds: Gap<F>,
    },
}

/// A validated, immutable closed set. Safe to share across threads.
#[derive(Clone, Debug)]
pub struct ValidatedClosedSet<F> {
    spec: ClosedSetSpec<F>,
    gaps: Vec<Gap<F>>,
    pos_tail: Option<TailRule<F>>,
    neg_tail: Option<TailRule<F>>,
}

/// Checks gap disjointness, tail disjointness and nonemptiness, and returns
/// the canonical (sorted) set.
pub fn validate<F: Real>(spec: ClosedSetSpec<F>) -> Result<ValidatedClosedSet<F>, SetError> {
    let mut gaps = spec.finite_gaps.clone();
    for g in &gaps {
        for e in [g.lo, g.hi] {
            if let Extended::Finite(x) = e {
                if !x.is_finite() {
                    return Err(SetError::MalformedGap(format!(
                        "{g} has a non-finite numeric endpoint; use the string sentinels"
                    )));
                }
            }
        }
        if g.lo.cmp_total(&g.hi) != Ordering::Less {
            return Err(SetError::MalformedGap(format!("{g} needs lo < hi")));
        }
    }
    gaps.sort_by(|a, b| a.lo.cmp_total(&b.lo).then(a.hi.cmp_total(&b.hi)));
    if let Some(g) = gaps.iter().find(|g| !g.lo.is_finite() && !g.hi.is_finite()) {
        debug_assert_eq!(g.lo, Extended::NegInf);
        return Err(SetError::EmptySet);
    }
    for w in gaps.windows(2) {
        if w[0].hi.cmp_total(&w[1].lo) == Ordering::Greater {
            return Err(SetError::OverlappingGaps {
                a: w[0].to_string(),
                b: w[1].to_string(),
            });
        }
    }

    let mut pos_tail = None;
    let mut neg_tail = None;
    for tail in &spec.tails {
        tail.validate()?;
        let slot = match tail.direction {
            TailDirection::Pos => &mut pos_tail,
            TailDirection::Neg => &mut neg_tail,
        };
        if slot.is_some() {
            return Err(SetError::MalformedTailRule(format!(
                "more than one tail rule toward {}",
                tail.direction
            )));
        }
        *slot = Some(tail.clone());
    }

    if let Some(t) = &pos_tail {
        let inner = t.inner_edge(t.first_k());
        if let Some(last) = gaps.last() {
            match last.hi {
                Extended::PosInf => {
                    return Err(SetError::MalformedTailRule(
                        "a +inf tail rule clashes with an unbounded gap toward +inf".into(),
                    ))
                }
                Extended::Finite(h) if h > inner => {
                    return Err(SetError::MalformedTailRule(format!(
                        "tail toward +inf starts at {inner}, inside or before finite gap {last}"
                    )))
                }
                _ => {}
            }
        }
    }
    if let Some(t) = &neg_tail {
        let inner = -t.inner_edge(t.first_k());
        if let Some(first) = gaps.first() {
            match first.lo {
                Extended::NegInf => {
                    return Err(SetError::MalformedTailRule(
                        "a -inf tail rule clashes with an unbounded gap toward -inf".into(),
                    ))
                }
                Extended::Finite(l) if l < inner => {
                    return Err(SetError::MalformedTailRule(format!(
                        "tail toward -inf starts at {inner}, inside or before finite gap {first}"
                    )))
                }
                _ => {}
            }
        }
    }
    if let (Some(p), Some(n)) = (&pos_tail, &neg_tail) {
        if -n.inner_edge(n.first_k()) > p.inner_edge(p.first_k()) {
            return Err(SetError::MalformedTailRule(
                "the two tail families overlap each other".into(),
            ));
        }
    }

    Ok(ValidatedClosedSet {
        spec,
        gaps,
        pos_tail,
        neg_tail,
    })
}

impl<F: Real> ValidatedClosedSet<F> {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &ClosedSetSpec<F> {
        &self.spec
    }

    pub fn finite_gaps(&self) -> &[Gap<F>] {
        &self.gaps
    }

    pub fn tail(&self, direction: TailDirection) -> Option<&TailRule<F>> {
        match direction {
            TailDirection::Pos => self.pos_tail.as_ref(),
            TailDirection::Neg => self.neg_tail.as_ref(),
        }
    }

    /// The mirror image `-M`, revalidated.
    pub fn negated(&self) -> Self {
        validate(self.spec.negated()).expect("negation preserves validity")
    }

    fn locate(&self, x: F) -> Option<GapAt<F>> {
        debug_assert!(x.is_finite());
        let probe = Extended::Finite(x);
        let idx = self
            .gaps
            .partition_point(|g| g.lo.cmp_total(&probe) == Ordering::Less);
        if idx > 0 && self.gaps[idx - 1].contains(x) {
            return Some(GapAt::Finite(self.gaps[idx - 1]));
        }
        for tail in [&self.pos_tail, &self.neg_tail].into_iter().flatten() {
            let u = match tail.direction {
                TailDirection::Pos => x,
                TailDirection::Neg => -x,
            };
            let k_mid = tail.k_near(u);
            let lo = k_mid.saturating_sub(2).max(tail.first_k());
            for k in lo..=k_mid + 2 {
                let c = tail.center_at(k);
                let r = tail.radius_at(k);
                if (u - c).abs() < r {
                    return Some(GapAt::Tail {
                        direction: tail.direction,
                        center: c,
                        radius: r,
                        bounds: tail.realized_gap(k),
                    });
                }
            }
        }
        None
    }

    /// Gap endpoints belong to the set: gaps are open.
    pub fn contains(&self, x: F) -> bool {
        self.locate(x).is_none()
    }

    /// Distance from `x` to the set; zero iff `contains(x)`.
    ///
    /// Inside a tail gap the distance is computed in centered form
    /// `r - |u - c|`, which stays exact even when `c +- r` is not
    /// representable at large magnitudes.
    pub fn distance_to_set(&self, x: F) -> F {
        match self.locate(x) {
            None => F::zero(),
            Some(GapAt::Finite(g)) => match (g.lo.finite(), g.hi.finite()) {
                (Some(a), Some(b)) => (x - a).min(b - x),
                (Some(a), None) => x - a,
                (None, Some(b)) => b - x,
                (None, None) => unreachable!("empty set is rejected at validation"),
            },
            Some(GapAt::Tail {
                direction,
                center,
                radius,
                ..
            }) => {
                let u = match direction {
                    TailDirection::Pos => x,
                    TailDirection::Neg => -x,
                };
                radius - (u - center).abs()
            }
        }
    }

    /// `min { sup dist(x, M) over x outside both M and [-n, n], 1 }`, with
    /// `sup over the empty region = 0`. Each gap's share is a closed-form
    /// piecewise-linear maximum; no sampling.
    pub fn truncated_defect(&self, n: F) -> F {
        assert!(n >= F::zero() && n.is_finite(), "truncation radius must be a finite nonnegative number");
        let one = F::one();
        let mut best = F::zero();

        for g in &self.gaps {
            if !g.is_bounded() {
                // Unbounded gaps always stick out of [-n, n] and their sup is
                // unbounded, which the cap turns into 1.
                return one;
            }
            let (a, b) = (g.lo.finite().unwrap(), g.hi.finite().unwrap());
            let mid = (a + b) / F::of(2.0);
            let half = (b - a) / F::of(2.0);
            if a < -n {
                let q = b.min(-n);
                best = best.max(if q >= mid { half } else { q - a });
            }
            if b > n {
                let p = a.max(n);
                best = best.max(if p <= mid { half } else { b - p });
            }
            if best >= one {
                return one;
            }
        }

        for tail in [&self.pos_tail, &self.neg_tail].into_iter().flatten() {
            best = best.max(tail_defect_beyond(tail, n));
            if best >= one {
                return one;
            }
        }
        best.min(one)
    }

    /// The defect `d_M`, computed exactly from the rules: an unbounded gap in
    /// a direction contributes 1, a tail family its declared radius limit
    /// capped at 1, a direction with finitely many gaps contributes 0.
    pub fn compute_d_m(&self) -> WvnVerdict<F> {
        let one = F::one();
        let pos = if self.gaps.iter().any(|g| g.hi == Extended::PosInf) {
            one
        } else if let Some(t) = &self.pos_tail {
            t.limsup_radius().min(one)
        } else {
            F::zero()
        };
        let neg = if self.gaps.iter().any(|g| g.lo == Extended::NegInf) {
            one
        } else if let Some(t) = &self.neg_tail {
            t.limsup_radius().min(one)
        } else {
            F::zero()
        };
        let d_m = pos.max(neg);

        // Cross-check the rule-level value against the per-gap closed forms
        // on a sampled grid beyond the settle bound.
        let eps = F::of(1e-9).max(F::epsilon() * F::of(100.0));
        let n0 = self.settle_bound(eps);
        let mut prev = F::infinity();
        for factor in [1.0, 2.0, 4.0] {
            let n = n0 * F::of(factor) + F::of(factor - 1.0);
            let t = self.truncated_defect(n);
            assert!(
                (t - d_m).abs() < eps,
                "defect grid disagrees with d_M at n={n}: {t} vs {d_m}"
            );
            assert!(t <= prev, "truncated defect must be non-increasing");
            prev = t;
        }

        WvnVerdict {
            d_m,
            exact: true,
            holds: d_m == F::zero(),
        }
    }

    /// A truncation radius beyond which `|truncated_defect(n) - d_M| < eps`
    /// for every `n >=` the bound, derived from the rule parameters.
    pub fn settle_bound(&self, eps: F) -> F {
        assert!(eps > F::zero());
        let mut n = F::zero();
        for g in &self.gaps {
            if let (Some(a), Some(b)) = (g.lo.finite(), g.hi.finite()) {
                n = n.max(a.abs()).max(b.abs());
            }
        }
        for tail in [&self.pos_tail, &self.neg_tail].into_iter().flatten() {
            let k0 = tail.first_k();
            n = n.max(tail.inner_edge(k0).abs());
            let cap_target = tail.limsup_radius().min(F::one());
            let k_star = match &tail.radius {
                RadiusRule::Constant { .. } => k0,
                RadiusRule::Harmonic { rho } => {
                    let k = (*rho / eps).as_f64().ceil() as u128 + 1;
                    k.max(k0)
                }
                RadiusRule::Geometric { rho, q } => {
                    if *rho < eps {
                        k0
                    } else {
                        let k = ((eps / *rho).ln() / q.ln()).as_f64().ceil() as u128 + 1;
                        k.max(k0)
                    }
                }
                RadiusRule::Table { table, limit } => {
                    if cap_target >= F::one() {
                        k0
                    } else {
                        let mut k = k0;
                        for (i, r) in table.iter().enumerate() {
                            if *r >= *limit + eps {
                                k = k0 + i as u128 + 1;
                            }
                        }
                        if *limit == F::zero() {
                            let last = *table.last().unwrap();
                            if last >= eps {
                                let extra = (last / eps).as_f64().log2().ceil() as u128 + 1;
                                k = k.max(k0 + table.len() as u128 + extra);
                            }
                        }
                        k
                    }
                }
            };
            n = n.max(tail.outer_edge(k_star));
        }
        n.max(F::zero())
    }

    /// The first `count` terms of the fixed dense enumeration of the set.
    pub fn dense_sequence(&self, count: usize) -> Vec<F> {
        DenseSequence::new(self).take(count).collect()
    }

    pub fn dense_iter(&self) -> DenseSequence<'_, F> {
        DenseSequence::new(self)
    }

    /// The realized gap with the smallest `lo >= x`, if any.
    pub(crate) fn next_gap_right(&self, x: F) -> Option<Gap<F>> {
        let probe = Extended::Finite(x);
        let mut best: Option<Gap<F>> = None;
        let mut consider = |g: Gap<F>| {
            if g.lo.cmp_total(&probe) != Ordering::Less {
                match &best {
                    Some(b) if b.lo.cmp_total(&g.lo) != Ordering::Greater => {}
                    _ => best = Some(g),
                }
            }
        };
        let idx = self
            .gaps
            .partition_point(|g| g.lo.cmp_total(&probe) == Ordering::Less);
        if idx < self.gaps.len() {
            consider(self.gaps[idx]);
        }
        if let Some(t) = &self.pos_tail {
            // Smallest k whose realized gap starts at or after x; inner
            // edges increase, and the realized edge differs from the raw one
            // by at most a couple of float steps, so probe a small range.
            let k0 = t.first_k();
            let from = t.last_k_inner_below(x).map_or(k0, |k| k.max(k0 + 1) - 1);
            for k in from..from + 3 {
                if k >= k0 {
                    consider(t.realized_gap(k));
                }
            }
        }
        if let Some(t) = &self.neg_tail {
            // Mirrored gaps (-(c+r), -(c-r)): the candidate is the largest k
            // with c(k) + r(k) <= -x.
            let k0 = t.first_k();
            if t.outer_edge(k0) <= -x {
                let k = t.first_k_outer_beyond(-x).saturating_sub(1).max(k0);
                for probe in k.saturating_sub(1).max(k0)..=k {
                    consider(t.realized_gap(probe));
                }
            }
        }
        best
    }

    /// The realized gap with the largest `hi <= x`, if any.
    pub(crate) fn next_gap_left(&self, x: F) -> Option<Gap<F>> {
        let probe = Extended::Finite(x);
        let mut best: Option<Gap<F>> = None;
        let mut consider = |g: Gap<F>| {
            if g.hi.cmp_total(&probe) != Ordering::Greater {
                match &best {
                    Some(b) if b.hi.cmp_total(&g.hi) != Ordering::Less => {}
                    _ => best = Some(g),
                }
            }
        };
        let idx = self
            .gaps
            .partition_point(|g| g.hi.cmp_total(&probe) != Ordering::Greater);
        if idx > 0 {
            consider(self.gaps[idx - 1]);
        }
        if let Some(t) = &self.neg_tail {
            // Mirrored: hi = -(c(k) - r(k)) <= x means c(k) - r(k) >= -x.
            let k0 = t.first_k();
            let from = t.last_k_inner_below(-x).map_or(k0, |k| k.max(k0 + 1) - 1);
            for k in from..from + 3 {
                if k >= k0 {
                    consider(t.realized_gap(k));
                }
            }
        }
        if let Some(t) = &self.pos_tail {
            let k0 = t.first_k();
            if t.outer_edge(k0) <= x {
                let k = t.first_k_outer_beyond(x).saturating_sub(1).max(k0);
                for probe in k.saturating_sub(1).max(k0)..=k + 1 {
                    consider(t.realized_gap(probe));
                }
            }
        }
        best
    }

    /// The maximal closed intervals of `M` meeting `[lo, hi]`, clipped to it.
    pub fn window_intervals(&self, lo: F, hi: F) -> Vec<(F, F)> {
        assert!(lo <= hi);
        let mut out = Vec::new();
        let mut cur = match self.locate(lo) {
            Some(GapAt::Finite(g)) => match g.hi.finite() {
                Some(h) => h,
                None => return out,
            },
            Some(GapAt::Tail { bounds, .. }) => bounds.hi.finite().expect("tail gaps are bounded"),
            None => lo,
        };
        while cur <= hi {
            match self.next_gap_right(cur) {
                Some(g) => {
                    let glo = match g.lo.finite() {
                        Some(v) => v,
                        None => break,
                    };
                    out.push((cur, glo.min(hi)));
                    if glo >= hi {
                        break;
                    }
                    match g.hi.finite() {
                        Some(h) => cur = h,
                        None => break,
                    }
                }
                None => {
                    out.push((cur, hi));
                    break;
                }
            }
        }
        out
    }
}

/// Sup of `dist(x, M)` over the part of a tail family outside `[-n, n]`,
/// in closed form. At most one gap straddles each window edge because the
/// realized gap edges are strictly monotone.
fn tail_defect_beyond<F: Real>(tail: &TailRule<F>, n: F) -> F {
    let k0 = tail.first_k();
    let mut best = F::zero();

    // Outward side: x > n in normalized coordinates.
    let k1 = tail.first_k_outer_beyond(n);
    let c = tail.center_at(k1);
    let r = tail.radius_at(k1);
    if c - r >= n {
        best = best.max(tail.sup_radius_from(k1));
    } else {
        let clip = if c >= n { r } else { (c + r) - n };
        best = best.max(clip).max(tail.sup_radius_from(k1 + 1));
    }

    // Inward side: x < -n. Only possible when the family starts below -n.
    if let Some(k_last) = tail.last_k_inner_below(-n) {
        let k_fb = tail.first_k_outer_beyond(-n);
        if k_fb > k0 {
            best = best.max(tail.sup_radius_range(k0, k_fb - 1));
        }
        let mut k = k_fb.max(k0);
        while k <= k_last {
            let c = tail.center_at(k);
            let r = tail.radius_at(k);
            let q = (c + r).min(-n);
            let clip = if q >= c { r } else { q - (c - r) };
            best = best.max(clip);
            k += 1;
        }
    }
    best
}

#[cfg(test)]
pub(crate) mod tests;
