//! Small modular-arithmetic helpers shared by the constructions.

use num_integer::Integer;

/// Reduces a signed value into the canonical range `[0, n)`.
#[inline]
pub fn reduce(value: i128, n: u64) -> u64 {
    value.rem_euclid(n as i128) as u64
}

/// Inverse of `a` modulo `m`, or `None` when `gcd(a, m) != 1`.
///
/// Every residue is its own inverse modulo 1, so `Some(0)` is returned there.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let eg = (a as i128).extended_gcd(&(m as i128));
    if eg.gcd != 1 {
        return None;
    }
    Some(reduce(eg.x, m))
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
