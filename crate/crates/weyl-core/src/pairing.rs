//! The slot-interleaving bijection between index pairs `(k, m)` and single
//! indices `n`, given by `n = 2^(k-1) * (2m - 1)`. Column `m = 1` holds the
//! outlier slots, columns `m >= 2` carry the dense part.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairingError {
    #[error("pairing index ({k},{m}) overflows the u64 index range")]
    Overflow { k: u64, m: u64 },
    #[error("pairing arguments must be >= 1 (got k={k}, m={m})")]
    NotPositive { k: u64, m: u64 },
    #[error("operator indices start at 1")]
    ZeroIndex,
}

/// A decoded pair position: row `k`, column `m`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingIndex {
    pub k: u64,
    pub m: u64,
}

/// `2^(k-1) * (2m - 1)`. Overflow is reported, never wrapped.
pub fn encode(k: u64, m: u64) -> Result<u64, PairingError> {
    if k == 0 || m == 0 {
        return Err(PairingError::NotPositive { k, m });
    }
    let odd = m
        .checked_mul(2)
        .and_then(|x| x.checked_sub(1))
        .ok_or(PairingError::Overflow { k, m })?;
    if k - 1 >= 64 {
        return Err(PairingError::Overflow { k, m });
    }
    1u64
        .checked_shl((k - 1) as u32)
        .and_then(|p| p.checked_mul(odd))
        .ok_or(PairingError::Overflow { k, m })
}

/// Inverse of [`encode`]: `k` is one plus the number of trailing zero bits,
/// `m` recovers from the odd part.
pub fn decode(n: u64) -> Result<PairingIndex, PairingError> {
    if n == 0 {
        return Err(PairingError::ZeroIndex);
    }
    let tz = n.trailing_zeros() as u64;
    let k = tz + 1;
    let m = ((n >> tz) + 1) / 2;
    Ok(PairingIndex { k, m })
}
