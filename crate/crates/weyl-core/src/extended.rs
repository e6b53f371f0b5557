//! The extended real line. Gap endpoints may be one of the two infinities;
//! these are explicit sentinels and are never produced by arithmetic.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Real;

/// A point of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended<F> {
    NegInf,
    Finite(F),
    PosInf,
}

impl<F: Real> Extended<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<F> {
        match self {
            Extended::Finite(x) => Some(*x),
            _ => None,
        }
    }

    /// Total order. Panics on NaN, which validation rejects up front.
    pub fn cmp_total(&self, other: &Self) -> Ordering {
        use Extended::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("NaN endpoint"),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Extended::NegInf => Extended::PosInf,
            Extended::PosInf => Extended::NegInf,
            Extended::Finite(x) => Extended::Finite(-x),
        }
    }
}

impl<F: Real> fmt::Display for Extended<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => write!(f, "-inf"),
            Extended::PosInf => write!(f, "+inf"),
            Extended::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl<F: Real + Serialize> Serialize for Extended<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::NegInf => serializer.serialize_str("-inf"),
            Extended::PosInf => serializer.serialize_str("+inf"),
            Extended::Finite(x) => x.serialize(serializer),
        }
    }
}

struct ExtendedVisitor<F>(std::marker::PhantomData<F>);

impl<'de, F: Real> Visitor<'de> for ExtendedVisitor<F> {
    type Value = Extended<F>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a number, \"-inf\" or \"+inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        if !v.is_finite() {
            return Err(E::custom("endpoint must be finite; use the string sentinels"));
        }
        Ok(Extended::Finite(F::of(v)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        self.visit_f64(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        match v {
            "-inf" => Ok(Extended::NegInf),
            "+inf" => Ok(Extended::PosInf),
            other => Err(E::custom(format!("unknown endpoint sentinel {other:?}"))),
        }
    }
}

impl<'de, F: Real> Deserialize<'de> for Extended<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtendedVisitor(std::marker::PhantomData))
    }
}
