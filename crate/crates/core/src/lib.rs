//! Clash-free permutations of `Z_n` and their rectangle packings on the
//! discrete `n × n` torus.
//!
//! A permutation `π` of `Z_n` is `(s,k)`-clash-free when any two indices at
//! circular distance less than `s` are sent to images at circular distance at
//! least `k`. Equivalently, the `n` rectangles of `s × k` cells anchored at the
//! dots `(x, π(x))` do not overlap on the torus.
//!
//! The crate provides:
//!
//! - [`sigma`]: the closed form for `σ(n,k)`, the largest feasible `s`.
//! - [`construct`]: an explicit lattice construction for the extremal case.
//! - [`jumper`]: the gap-sequence calculus classifying extremal clockwise
//!   permutations with `π(0) = 0`.
//! - [`threads`]: warp/weft thread analysis of extremal packings.
//! - [`verify`] and [`search`]: independent checkers and a brute-force oracle.
//! - [`render`]: ASCII and SVG pictures of packings.

pub mod arith;
pub mod construct;
pub mod error;
pub mod jumper;
pub mod params;
pub mod permutation;
pub mod render;
pub mod search;
pub mod sigma;
pub mod threads;
pub mod verify;

pub use error::{Error, Result};
pub use params::{circ_dist, Params};
pub use permutation::Permutation;
