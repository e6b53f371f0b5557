//! Decides whether the Weyl-von Neumann property holds on a closed set
//! `M` of reals given by an explicit gap description, and exhibits the
//! answer constructively: diagonal operator models with prescribed essential
//! spectrum, exact bottleneck matchings between truncated spectra, and
//! machine-checkable equivalence or obstruction certificates.
//!
//! The numeric core is generic over the scalar type; the `*64` aliases at the
//! crate root fix the default `f64` instantiation used by the CLI and the
//! file formats.

pub mod closed_set;
pub mod equivalence;
pub mod jacobi;
pub mod matching;
pub mod spectra;
pub mod pairing;
pub mod scalar;

mod extended;

pub use extended::Extended;
pub use scalar::Real;

pub use closed_set::{
    validate, ClosedSetSpec, Gap, RadiusRule, SetError, TailDirection, TailRule,
    ValidatedClosedSet, WvnVerdict,
};

/// Default double-precision instantiations.
pub type ClosedSetSpec64 = ClosedSetSpec<f64>;
pub type ClosedSet64 = ValidatedClosedSet<f64>;
pub type Gap64 = Gap<f64>;
pub type WvnVerdict64 = WvnVerdict<f64>;
