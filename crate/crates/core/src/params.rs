//! Derived parameters and the circular (Lee) distance on `Z_n`.

use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{Error, Result};

/// Largest modulus accepted anywhere in the crate.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Circular distance between two residues modulo `n`.
///
/// Inputs are reduced first, so any `u64` values are accepted.
#[inline]
pub fn circ_dist(i: u64, j: u64, n: u64) -> u64 {
    debug_assert!(n >= 1);
    let d = (i % n + n - j % n) % n;
    d.min(n - d)
}

/// The parameter bundle for a modulus `n` and rectangle height `k`.
///
/// `s = ⌊(n−1)/k⌋` is the extremal rectangle width and `n = s·k + r` with
/// `1 ≤ r ≤ k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub n: u64,
    pub k: u64,
    pub s: u64,
    pub r: u64,
    pub d_s: u64,
    pub d_k: u64,
}

impl Params {
    pub fn derive(n: u64, k: u64) -> Result<Self> {
        if n > MAX_MODULUS {
            return Err(Error::ParamDomain(format!(
                "n = {n} exceeds the supported maximum {MAX_MODULUS}"
            )));
        }
        if k < 1 || k >= n {
            return Err(Error::ParamDomain(format!(
                "need 1 <= k < n, got n = {n}, k = {k}"
            )));
        }
        let s = (n - 1) / k;
        let r = n - s * k;
        Ok(Params {
            n,
            k,
            s,
            r,
            d_s: gcd(n, s),
            d_k: gcd(n, k),
        })
    }

    /// `d_s · d_k`.
    pub fn block_size(&self) -> u64 {
        self.d_s * self.d_k
    }

    /// `r < s` and `r < k`: the regime where the packing is rigid.
    pub fn small_remainder(&self) -> bool {
        self.r < self.s && self.r < self.k
    }

    pub fn block_divides_n(&self) -> bool {
        self.n % self.block_size() == 0
    }

    /// Fails unless `r < s`, `r < k` and `d_s·d_k | n`.
    pub fn require_lattice_regime(&self) -> Result<()> {
        if !self.small_remainder() {
            return Err(Error::Precondition(format!(
                "need r < s and r < k, got r = {}, s = {}, k = {}",
                self.r, self.s, self.k
            )));
        }
        if !self.block_divides_n() {
            return Err(Error::Precondition(format!(
                "d_s*d_k = {} does not divide n = {}",
                self.block_size(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`Params::derive`].
pub fn derive_params(n: u64, k: u64) -> Result<Params> {
    Params::derive(n, k)
}

/// Checks `1 ≤ s < n` and `1 ≤ k < n`.
pub(crate) fn check_width_height(n: u64, s: u64, k: u64) -> Result<()> {
    if s < 1 || s >= n || k < 1 || k >= n {
        return Err(Error::ParamDomain(format!(
            "need 1 <= s, k < n, got n = {n}, s = {s}, k = {k}"
        )));
    }
    Ok(())
}
