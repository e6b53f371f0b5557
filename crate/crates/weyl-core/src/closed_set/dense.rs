//! The fixed dense enumeration of a validated set.
//!
//! The set splits into maximal closed intervals (components). Components are
//! ordered by distance from the origin, positive side first on ties, and the
//! sequence interleaves them diagonally: stage `j` emits the depth `j - i`
//! dyadic points of component `i`. Every gap endpoint appears (it is a depth
//! zero point of its component) and every point of the set is approached at
//! the dyadic rate. Repetitions are allowed; a set consisting of finitely
//! many isolated points cycles through them forever.

use std::collections::VecDeque;

use crate::extended::Extended;
use crate::scalar::Real;

use super::{GapAt, ValidatedClosedSet};

#[derive(Clone, Copy, Debug)]
struct Component<F> {
    lo: Extended<F>,
    hi: Extended<F>,
}

impl<F: Real> Component<F> {
    fn is_degenerate(&self) -> bool {
        match (self.lo.finite(), self.hi.finite()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// New dyadic points of this component at the given depth, in order.
    ///
    /// Bounded components refine by midpoints. Unbounded components grow
    /// their window by one unit per depth while the grid halves, so depth `d`
    /// has covered `[anchor, anchor + d]` at resolution `2^(1-d)`.
    fn dyadic_points(&self, depth: u32, out: &mut Vec<F>) {
        let two = F::of(2.0);
        match (self.lo.finite(), self.hi.finite()) {
            (Some(a), Some(b)) => {
                if a == b {
                    if depth == 0 {
                        out.push(a);
                    }
                } else if depth == 0 {
                    out.push(a);
                    out.push(b);
                } else {
                    let step = (b - a) / two.powi(depth as i32);
                    for t in 0..(1u64 << (depth - 1)) {
                        out.push(a + F::of((2 * t + 1) as f64) * step);
                    }
                }
            }
            (Some(a), None) => Self::half_line(a, F::one(), depth, out),
            (None, Some(b)) => Self::half_line(b, -F::one(), depth, out),
            (None, None) => {
                if depth == 0 {
                    out.push(F::zero());
                } else {
                    let mut buf = Vec::new();
                    Self::half_line(F::zero(), F::one(), depth, &mut buf);
                    for v in buf {
                        out.push(v);
                        out.push(-v);
                    }
                }
            }
        }
    }

    fn half_line(anchor: F, sign: F, depth: u32, out: &mut Vec<F>) {
        if depth == 0 {
            out.push(anchor);
            return;
        }
        let grid = F::of(2.0).powi(1 - depth as i32);
        let prev_window = F::of((depth - 1) as f64);
        let count = (depth as u64) << (depth - 1);
        for m in 1..=count {
            let offset = F::of(m as f64) * grid;
            if m % 2 == 1 || offset > prev_window {
                out.push(anchor + sign * offset);
            }
        }
    }
}

/// Yields the components ordered by distance from the origin.
struct ComponentWalker<'a, F: Real> {
    set: &'a ValidatedClosedSet<F>,
    started: bool,
    /// Left endpoint of the next component on the right side.
    right_cursor: Option<F>,
    /// Right endpoint of the next component on the left side.
    left_cursor: Option<F>,
    pending_right: Option<Component<F>>,
    pending_left: Option<Component<F>>,
    origin: Option<Component<F>>,
}

impl<'a, F: Real> ComponentWalker<'a, F> {
    fn new(set: &'a ValidatedClosedSet<F>) -> Self {
        ComponentWalker {
            set,
            started: false,
            right_cursor: None,
            left_cursor: None,
            pending_right: None,
            pending_left: None,
            origin: None,
        }
    }

    fn start(&mut self) {
        self.started = true;
        let zero = F::zero();
        match self.set.locate(zero) {
            None => {
                let left_gap = self.set.next_gap_left(zero);
                let right_gap = self.set.next_gap_right(zero);
                let lo = left_gap.map_or(Extended::NegInf, |g| g.hi);
                let hi = right_gap.map_or(Extended::PosInf, |g| g.lo);
                self.origin = Some(Component { lo, hi });
                self.left_cursor = left_gap.and_then(|g| g.lo.finite());
                self.right_cursor = right_gap.and_then(|g| g.hi.finite());
            }
            Some(at) => {
                let (lo, hi) = realize(at);
                self.left_cursor = lo.finite();
                self.right_cursor = hi.finite();
            }
        }
    }

    fn fill_right(&mut self) {
        if self.pending_right.is_some() {
            return;
        }
        let Some(x) = self.right_cursor else { return };
        match self.set.next_gap_right(x) {
            Some(g) => {
                self.pending_right = Some(Component {
                    lo: Extended::Finite(x),
                    hi: g.lo,
                });
                self.right_cursor = g.hi.finite();
            }
            None => {
                self.pending_right = Some(Component {
                    lo: Extended::Finite(x),
                    hi: Extended::PosInf,
                });
                self.right_cursor = None;
            }
        }
    }

    fn fill_left(&mut self) {
        if self.pending_left.is_some() {
            return;
        }
        let Some(x) = self.left_cursor else { return };
        match self.set.next_gap_left(x) {
            Some(g) => {
                self.pending_left = Some(Component {
                    lo: g.hi,
                    hi: Extended::Finite(x),
                });
                self.left_cursor = g.lo.finite();
            }
            None => {
                self.pending_left = Some(Component {
                    lo: Extended::NegInf,
                    hi: Extended::Finite(x),
                });
                self.left_cursor = None;
            }
        }
    }
}

impl<F: Real> Iterator for ComponentWalker<'_, F> {
    type Item = Component<F>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.started {
            self.start();
            if let Some(c) = self.origin.take() {
                return Some(c);
            }
        }
        self.fill_right();
        self.fill_left();
        match (&self.pending_right, &self.pending_left) {
            (None, None) => None,
            (Some(_), None) => self.pending_right.take(),
            (None, Some(_)) => self.pending_left.take(),
            (Some(r), Some(l)) => {
                let dr = r.lo.finite().expect("right components have finite lo");
                let dl = l.hi.finite().expect("left components have finite hi").abs();
                if dr <= dl {
                    self.pending_right.take()
                } else {
                    self.pending_left.take()
                }
            }
        }
    }
}

fn realize<F: Real>(at: GapAt<F>) -> (Extended<F>, Extended<F>) {
    match at {
        GapAt::Finite(g) => (g.lo, g.hi),
        GapAt::Tail { bounds, .. } => (bounds.lo, bounds.hi),
    }
}

/// Iterator form of the dense enumeration. See the module docs for the order.
pub struct DenseSequence<'a, F: Real> {
    walker: ComponentWalker<'a, F>,
    walker_done: bool,
    components: Vec<Component<F>>,
    stage: usize,
    batch: VecDeque<F>,
    emitted: Vec<F>,
    cycle_at: usize,
    cycling: bool,
}

impl<'a, F: Real> DenseSequence<'a, F> {
    pub fn new(set: &'a ValidatedClosedSet<F>) -> Self {
        DenseSequence {
            walker: ComponentWalker::new(set),
            walker_done: false,
            components: Vec::new(),
            stage: 0,
            batch: VecDeque::new(),
            emitted: Vec::new(),
            cycle_at: 0,
            cycling: false,
        }
    }
}

impl<F: Real> Iterator for DenseSequence<'_, F> {
    type Item = F;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.cycling {
                let v = self.emitted[self.cycle_at % self.emitted.len()];
                self.cycle_at += 1;
                return Some(v);
            }
            if let Some(v) = self.batch.pop_front() {
                self.emitted.push(v);
                return Some(v);
            }
            while !self.walker_done && self.components.len() <= self.stage {
                match self.walker.next() {
                    Some(c) => self.components.push(c),
                    None => self.walker_done = true,
                }
            }
            if self.walker_done
                && self.stage >= self.components.len()
                && self.components.iter().all(Component::is_degenerate)
            {
                assert!(
                    !self.emitted.is_empty(),
                    "a validated set has at least one component"
                );
                self.cycling = true;
                continue;
            }
            let mut buf = Vec::new();
            for i in 0..=self.stage.min(self.components.len().saturating_sub(1)) {
                if i < self.components.len() {
                    self.components[i].dyadic_points((self.stage - i) as u32, &mut buf);
                }
            }
            self.batch.extend(buf);
            self.stage += 1;
        }
    }
}
