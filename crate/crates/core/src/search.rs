//! Exhaustive backtracking over permutations of `Z_n`, used as an oracle
//! for the closed forms and for the jumper census.
//!
//! Positions are filled in index order. A residue is available at position
//! `x` unless it is used or lies within circular distance `k − 1` of the
//! image of an index closer than `s` to `x`, wrapping around `n`. Translating
//! all images preserves clash-freeness, so `π(0) = 0` is fixed throughout.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{check_width_height, circ_dist, Params};
use crate::permutation::Permutation;

/// Hard limit from the 64-bit residue masks.
pub const MASK_LIMIT: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest `n` accepted.
    pub max_n: u64,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_n: 40,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Existence {
    Witness {
        #[serde(serialize_with = "serialize_images")]
        permutation: Permutation,
    },
    /// Every branch was refuted.
    Exhausted { nodes: u64 },
}

fn serialize_images<S: serde::Serializer>(
    p: &Permutation,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(p.images())
}

impl Existence {
    pub fn witness(&self) -> Option<&Permutation> {
        match self {
            Existence::Witness { permutation } => Some(permutation),
            Existence::Exhausted { .. } => None,
        }
    }
}

struct Problem {
    n: u64,
    s: u64,
    /// `balls[v]`: residues within distance `k − 1` of `v`.
    balls: Vec<u64>,
    full: u64,
    deadline: Option<Instant>,
    nodes: AtomicU64,
}

const DEADLINE_POLL: u64 = 1 << 14;

impl Problem {
    fn new(n: u64, k: u64, s: u64, config: &SearchConfig) -> Result<Self> {
        check_width_height(n, s, k)?;
        let limit = config.max_n.min(MASK_LIMIT);
        if n > limit {
            return Err(Error::BudgetExceeded(format!(
                "search supports n <= {limit}, got {n}"
            )));
        }
        let balls = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&w| circ_dist(v, w, n) < k)
                    .fold(0u64, |m, w| m | (1 << w))
            })
            .collect();
        Ok(Problem {
            n,
            s,
            balls,
            full: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            deadline: config.time_limit.map(|d| Instant::now() + d),
            nodes: AtomicU64::new(0),
        })
    }

    /// Residues excluded at position `x` given `images[..x]`.
    #[inline]
    fn forbidden(&self, images: &[u64], used: u64, x: u64) -> u64 {
        let mut mask = used;
        let lo = (x + 1).saturating_sub(self.s);
        for y in lo..x {
            mask |= self.balls[images[y as usize] as usize];
        }
        // indices past n − 1 wrap onto the start
        if x + self.s > self.n {
            let hi = (x + self.s - 1 - self.n).min(x.saturating_sub(1));
            for y in 0..=hi {
                mask |= self.balls[images[y as usize] as usize];
            }
        }
        mask
    }

    fn tick(&self) -> Result<()> {
        let count = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if count % DEADLINE_POLL == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() > deadline {
                    return Err(Error::BudgetExceeded("search time limit reached".into()));
                }
            }
        }
        Ok(())
    }

    /// Depth-first completion of `images[..x]`; `leaf` returns `true` to stop.
    fn extend(
        &self,
        images: &mut Vec<u64>,
        used: u64,
        leaf: &mut dyn FnMut(&[u64]) -> bool,
    ) -> Result<bool> {
        self.tick()?;
        let x = images.len() as u64;
        if x == self.n {
            return Ok(leaf(images));
        }
        let mut avail = !self.forbidden(images, used, x) & self.full;
        while avail != 0 {
            let v = avail.trailing_zeros() as u64;
            avail &= avail - 1;
            images.push(v);
            let stop = self.extend(images, used | (1 << v), leaf)?;
            images.pop();
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Candidates for `π(1)` once `π(0) = 0`.
    fn first_level(&self) -> Vec<u64> {
        let mask = !self.forbidden(&[0], 1, 1) & self.full;
        (0..self.n).filter(|v| mask & (1 << v) != 0).collect()
    }

    fn count_branch(&self, second: u64, keep: &(dyn Fn(&[u64]) -> bool + Sync)) -> Result<u64> {
        let mut images = vec![0, second];
        let mut count = 0u64;
        self.extend(&mut images, 1 | (1 << second), &mut |leaf| {
            if keep(leaf) {
                count += 1;
            }
            false
        })?;
        Ok(count)
    }
}

/// Lexicographically first `(s,k)`-clash-free permutation with `π(0) = 0`,
/// or a certificate that none exists.
pub fn brute_force_exists(n: u64, k: u64, s: u64, config: &SearchConfig) -> Result<Existence> {
    let problem = Problem::new(n, k, s, config)?;
    if n == 1 {
        return Ok(Existence::Witness {
            permutation: Permutation::identity(1),
        });
    }
    let found = problem
        .first_level()
        .into_par_iter()
        .find_map_first(|second| {
            let mut images = vec![0, second];
            let mut witness = None;
            match problem.extend(&mut images, 1 | (1 << second), &mut |leaf| {
                witness = Some(leaf.to_vec());
                true
            }) {
                Err(e) => Some(Err(e)),
                Ok(_) => witness.map(Ok),
            }
        })
        .transpose()?;
    Ok(match found {
        Some(images) => Existence::Witness {
            permutation: Permutation::from_images_unchecked(images),
        },
        None => Existence::Exhausted {
            nodes: problem.nodes.load(Ordering::Relaxed),
        },
    })
}

/// Number of `(s,k)`-clash-free permutations with `π(0) = 0`.
///
/// `π ↦ −π` fixes `π(0) = 0` and swaps the branches `π(1) = v` and
/// `π(1) = n − v`, so only `v ≤ n/2` is searched. Inversion fixes `π(0) = 0`
/// too and exchanges `(s,k)` with `(k,s)`; the search runs on whichever side
/// has the narrower window, since a tall Lee ball prunes far more.
pub fn count_fixed0(n: u64, k: u64, s: u64, config: &SearchConfig) -> Result<u64> {
    check_width_height(n, s, k)?;
    let problem = Problem::new(n, k.max(s), s.min(k), config)?;
    let branches: Vec<u64> = problem
        .first_level()
        .into_iter()
        .filter(|&v| 2 * v <= n)
        .collect();
    let counts = branches
        .par_iter()
        .map(|&v| {
            problem
                .count_branch(v, &|_| true)
                .map(|c| if 2 * v == n { c } else { 2 * c })
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(counts.into_iter().sum())
}

/// Number of clockwise `(s,k)`-clash-free permutations with `π(0) = 0`,
/// where clockwise means the rectangle on top of `R_0` is shifted right.
pub fn count_clockwise_fixed0(n: u64, k: u64, s: u64, config: &SearchConfig) -> Result<u64> {
    let params = Params::derive(n, k)?;
    if s != params.s {
        return Err(Error::Precondition(format!(
            "clockwise census needs s = floor((n-1)/k) = {}, got {s}",
            params.s
        )));
    }
    params.require_lattice_regime()?;
    let dual = s > k;
    let problem = if dual {
        Problem::new(n, s, k, config)?
    } else {
        Problem::new(n, k, s, config)?
    };
    // the top neighbour of R_0 is π⁻¹(k); on the dual side that is σ(k)
    let clockwise = |images: &[u64]| {
        let top = if dual {
            images[k as usize]
        } else {
            images.iter().position(|&y| y == k).expect("bijection") as u64
        };
        (1..s).contains(&top)
    };
    let counts = problem
        .first_level()
        .par_iter()
        .map(|&v| problem.count_branch(v, &clockwise))
        .collect::<Result<Vec<u64>>>()?;
    Ok(counts.into_iter().sum())
}
