//! Explicit extremal construction for `r < s`, `r < k`, `d_s·d_k | n`.
//!
//! Every `x ∈ Z_n` is written uniquely as `x ≡ (α·d_k + i)·s + j (mod n)` with
//! `0 ≤ j < d_s`, `0 ≤ i < d_k`, `0 ≤ α < n/(d_s·d_k)`, and mapped to
//! `π(x) = j·k − i − α·d_s·d_k`. The rectangles then sit on the translates of a
//! single `d_k × d_s` block by the lattice spanned by `u` and `v`.

use serde::Serialize;

use crate::arith::{mod_inverse, reduce};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::permutation::Permutation;

/// The unique coordinates of a residue `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub alpha: u64,
    pub i: u64,
    pub j: u64,
    /// `x = q·d_s + j (mod n)`.
    pub q: u64,
    /// `q·d_s ≡ f·s (mod n)`, `f = α·d_k + i`.
    pub f: u64,
}

/// Solves `x ≡ f·s + offset (mod n)` for `f ∈ [0, n/d_s)`, given an offset
/// congruent to `x` mod `d_s`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StrideSolver {
    n: u64,
    d_s: u64,
    d_k: u64,
    /// inverse of `s/d_s` modulo `n/d_s`
    inv: u64,
}

impl StrideSolver {
    pub(crate) fn new(p: &Params) -> Self {
        let m = p.n / p.d_s;
        let inv = mod_inverse((p.s / p.d_s) % m, m)
            .expect("s/d_s is a unit modulo n/d_s by definition of d_s");
        StrideSolver {
            n: p.n,
            d_s: p.d_s,
            d_k: p.d_k,
            inv,
        }
    }

    /// Returns `(q, f)` for `x − offset`, which must be divisible by `d_s`.
    #[inline]
    pub(crate) fn solve(&self, x: u64, offset: u64) -> (u64, u64) {
        let diff = reduce(x as i128 - offset as i128, self.n);
        debug_assert_eq!(diff % self.d_s, 0);
        let q = diff / self.d_s;
        let m = self.n / self.d_s;
        let f = ((q as u128 * self.inv as u128) % m as u128) as u64;
        (q, f)
    }

    /// Splits `f = α·d_k + ℓ`.
    #[inline]
    pub(crate) fn split(&self, f: u64) -> (u64, u64) {
        (f / self.d_k, f % self.d_k)
    }
}

pub fn decompose(x: u64, params: &Params) -> Result<Decomposition> {
    params.require_lattice_regime()?;
    Ok(decompose_with(
        &StrideSolver::new(params),
        x % params.n,
        params,
    ))
}

fn decompose_with(solver: &StrideSolver, x: u64, p: &Params) -> Decomposition {
    let j = x % p.d_s;
    let (q, f) = solver.solve(x, j);
    let (alpha, i) = solver.split(f);
    Decomposition { alpha, i, j, q, f }
}

/// `(α·d_k + i)·s + j mod n`.
pub fn recompose(d: &Decomposition, p: &Params) -> u64 {
    let f = d.alpha as u128 * p.d_k as u128 + d.i as u128;
    ((f * p.s as u128 + d.j as u128) % p.n as u128) as u64
}

/// The lattice permutation `π(x) = j·k − i − α·d_s·d_k`.
pub fn construct_thm31(params: &Params) -> Result<Permutation> {
    params.require_lattice_regime()?;
    let p = *params;
    let solver = StrideSolver::new(&p);
    let images = (0..p.n)
        .map(|x| {
            let d = decompose_with(&solver, x, &p);
            let y =
                d.j as i128 * p.k as i128 - d.i as i128 - d.alpha as i128 * p.block_size() as i128;
            reduce(y, p.n)
        })
        .collect();
    Permutation::from_images(images).map_err(|e| Error::Structure {
        property: "lattice construction injectivity",
        detail: e.to_string(),
    })
}

/// Generators `u`, `v` of the block lattice and the integer coordinates of
/// the torus periods `(n, 0)` and `(0, n)` in that basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeBasis {
    pub u: (i64, i64),
    pub v: (i64, i64),
    /// `(n, 0) = c0·u + c1·v`.
    pub horizontal: (i64, i64),
    /// `(0, n) = c0·u + c1·v`.
    pub vertical: (i64, i64),
    /// Width of the gaps above the top row of a block.
    pub a: u64,
    /// Height of the gaps above the left column of a block.
    pub b: u64,
}

impl LatticeBasis {
    pub fn combine(&self, coeffs: (i64, i64)) -> (i64, i64) {
        (
            coeffs.0 * self.u.0 + coeffs.1 * self.v.0,
            coeffs.0 * self.u.1 + coeffs.1 * self.v.1,
        )
    }
}

pub fn lattice_basis(params: &Params) -> Result<LatticeBasis> {
    params.require_lattice_regime()?;
    let p = *params;
    let a = p.r - (p.d_s - 1);
    let b = p.block_size() - (p.d_k - 1);
    if !(0 < a && a < p.s && 0 < b && b < p.k) {
        return Err(Error::Structure {
            property: "lattice gap bounds",
            detail: format!("a = {a}, b = {b} outside (0, s) x (0, k)"),
        });
    }
    let to_i = |v: u64| -> Result<i64> {
        i64::try_from(v).map_err(|_| Error::ParamDomain(format!("{v} overflows i64")))
    };
    let u = (
        to_i(p.d_k.checked_mul(p.s).ok_or_else(overflow)?)?,
        -to_i(p.block_size())?,
    );
    let v = (
        to_i(p.r)?,
        to_i(p.d_s.checked_mul(p.k).ok_or_else(overflow)?)?,
    );
    let basis = LatticeBasis {
        u,
        v,
        horizontal: (to_i(p.k / p.d_k)?, 1),
        vertical: (-to_i(p.r / p.block_size())?, to_i(p.s / p.d_s)?),
        a,
        b,
    };
    let n = to_i(p.n)?;
    debug_assert_eq!(basis.combine(basis.horizontal), (n, 0));
    debug_assert_eq!(basis.combine(basis.vertical), (0, n));
    Ok(basis)
}

fn overflow() -> Error {
    Error::ParamDomain("product overflows u64".into())
}
