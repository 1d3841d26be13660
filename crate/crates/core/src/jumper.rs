//! Jumpers: pairs of cyclic gap sequences that classify the clockwise
//! extremal clash-free permutations with `π(0) = 0`.
//!
//! For a jumper `(a, b)` the rectangle in position `(ℓ, m)` of the plane
//! packing has its lower-left corner at `(ℓ·s + A_m, m·k − B_ℓ)` where `A_m`
//! and `B_ℓ` are prefix sums of `a` and `b`. So `a_m` is the horizontal shift
//! between a rectangle and the one on top of it, and `b_ℓ` is the drop to the
//! rectangle touching its right edge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, reduce};
use crate::construct::StrideSolver;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::permutation::Permutation;
use crate::threads::{orientation, Orientation};
use crate::verify::is_clash_free;

/// One period of each sequence: `a` has length `d_s`, `b` has length `d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jumper {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl Jumper {
    pub fn new(a: Vec<u64>, b: Vec<u64>) -> Self {
        Jumper { a, b }
    }

    pub fn sigma_a(&self) -> u64 {
        self.a.iter().sum()
    }

    pub fn sigma_b(&self) -> u64 {
        self.b.iter().sum()
    }
}

impl fmt::Display for Jumper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={:?} b={:?}", self.a, self.b)
    }
}

/// JSON shape `{"n": …, "k": …, "a": […], "b": […]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumperRecord {
    pub n: u64,
    pub k: u64,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl JumperRecord {
    pub fn new(params: &Params, j: &Jumper) -> Self {
        JumperRecord {
            n: params.n,
            k: params.k,
            a: j.a.clone(),
            b: j.b.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text.trim()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializing integers cannot fail")
    }

    pub fn jumper(&self) -> Jumper {
        Jumper::new(self.a.clone(), self.b.clone())
    }
}

/// Outcome of checking the five jumper conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid { condition: u8, detail: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    fn fail(condition: u8, detail: String) -> Self {
        Verdict::Invalid { condition, detail }
    }
}

fn prefix_sums(seq: &[u64]) -> Vec<u64> {
    let mut acc = 0;
    seq.iter()
        .map(|&v| {
            let before = acc;
            acc += v;
            before
        })
        .collect()
}

fn prefix_sums_distinct(seq: &[u64], modulus: u64) -> bool {
    let mut seen = vec![false; modulus as usize];
    prefix_sums(seq)
        .into_iter()
        .all(|p| !std::mem::replace(&mut seen[(p % modulus) as usize], true))
}

fn check_shape(seq: &[u64], name: &str, period: u64, bound: u64) -> Option<Verdict> {
    if seq.len() as u64 != period {
        return Some(Verdict::fail(
            1,
            format!(
                "{name} has length {}, expected one period of {period}",
                seq.len()
            ),
        ));
    }
    seq.iter()
        .find(|&&v| v < 1 || v >= bound)
        .map(|v| Verdict::fail(2, format!("{name} entry {v} outside [1, {bound})")))
}

/// Checks the five conditions in order and reports the first failure.
pub fn validate(a: &[u64], b: &[u64], params: &Params) -> Result<Verdict> {
    params.require_lattice_regime()?;
    let p = params;
    let block = p.block_size();
    let a_shape = check_shape(a, "a", p.d_s, p.s);
    let b_shape = check_shape(b, "b", p.d_k, p.k);
    let mut shape: Vec<Verdict> = a_shape.into_iter().chain(b_shape).collect();
    shape.sort_by_key(|v| match v {
        Verdict::Invalid { condition, .. } => *condition,
        Verdict::Valid => 0,
    });
    if let Some(v) = shape.into_iter().next() {
        return Ok(v);
    }
    let (sigma_a, sigma_b): (u64, u64) = (a.iter().sum(), b.iter().sum());
    if !prefix_sums_distinct(b, p.d_k) {
        return Ok(Verdict::fail(
            3,
            "prefix sums of b collide modulo d_k".into(),
        ));
    }
    if sigma_b % block != 0 {
        return Ok(Verdict::fail(
            3,
            format!("d_s*d_k = {block} does not divide sigma_b = {sigma_b}"),
        ));
    }
    if !prefix_sums_distinct(a, p.d_s) {
        return Ok(Verdict::fail(
            4,
            "prefix sums of a collide modulo d_s".into(),
        ));
    }
    if sigma_a % block != 0 {
        return Ok(Verdict::fail(
            4,
            format!("d_s*d_k = {block} does not divide sigma_a = {sigma_a}"),
        ));
    }
    if sigma_a.checked_mul(sigma_b) != Some(block * p.r) {
        return Ok(Verdict::fail(
            5,
            format!(
                "sigma_a * sigma_b = {sigma_a} * {sigma_b}, expected {}",
                block * p.r
            ),
        ));
    }
    Ok(Verdict::Valid)
}

fn require_valid(j: &Jumper, params: &Params) -> Result<()> {
    match validate(&j.a, &j.b, params)? {
        Verdict::Valid => Ok(()),
        Verdict::Invalid { condition, detail } => Err(Error::Precondition(format!(
            "not a jumper (condition {condition}): {detail}"
        ))),
    }
}

/// `a = (σ_a − (d_s−1), 1, …, 1)`, `b = (σ_b − (d_k−1), 1, …, 1)` with
/// `σ_a = d_s·d_k·r_a` and `σ_b = d_s·d_k·r_b`.
pub fn canonical_jumper(params: &Params, r_a: u64, r_b: u64) -> Result<Jumper> {
    params.require_lattice_regime()?;
    let block = params.block_size();
    let expected = params.r / block;
    let product = r_a.saturating_mul(r_b);
    if product != expected {
        return Err(Error::Factorization { product, expected });
    }
    let leading = |sigma: u64, len: u64| {
        let mut seq = vec![1; len as usize];
        seq[0] = sigma - (len - 1);
        seq
    };
    let j = Jumper::new(
        leading(block * r_a, params.d_s),
        leading(block * r_b, params.d_k),
    );
    match validate(&j.a, &j.b, params)? {
        Verdict::Valid => Ok(j),
        Verdict::Invalid { condition, detail } => Err(Error::Structure {
            property: "canonical jumper",
            detail: format!("condition {condition}: {detail}"),
        }),
    }
}

/// `gcd(n/(d_s·d_k), σ_b/(d_s·d_k)) = 1`.
pub fn check_coprime(j: &Jumper, params: &Params) -> bool {
    let block = params.block_size();
    gcd(params.n / block, j.sigma_b() / block) == 1
}

/// The clockwise clash-free permutation with `π(0) = 0` whose gap sequences
/// are `j`.
///
/// `x` is written as `(α·d_k + ℓ)·s + A_m (mod n)` and sent to
/// `m·k − B_ℓ − α·σ_b`.
pub fn jumper_to_perm(j: &Jumper, params: &Params) -> Result<Permutation> {
    require_valid(j, params)?;
    if !check_coprime(j, params) {
        return Err(Error::Structure {
            property: "coprime block sums",
            detail: format!("gcd(n/(d_s d_k), sigma_b/(d_s d_k)) != 1 for {j}"),
        });
    }
    let p = *params;
    let a_prefix = prefix_sums(&j.a);
    let b_prefix = prefix_sums(&j.b);
    let mut m_of_residue = vec![0u64; p.d_s as usize];
    for (m, &sum) in a_prefix.iter().enumerate() {
        m_of_residue[(sum % p.d_s) as usize] = m as u64;
    }
    let solver = StrideSolver::new(&p);
    let sigma_b = j.sigma_b() as i128;
    let images = (0..p.n)
        .map(|x| {
            let m = m_of_residue[(x % p.d_s) as usize];
            let (_, f) = solver.solve(x, a_prefix[m as usize]);
            let (alpha, ell) = solver.split(f);
            let y =
                m as i128 * p.k as i128 - b_prefix[ell as usize] as i128 - alpha as i128 * sigma_b;
            reduce(y, p.n)
        })
        .collect();
    Permutation::from_images(images).map_err(|e| Error::Structure {
        property: "jumper injectivity",
        detail: e.to_string(),
    })
}

/// Reads the gap sequences of a clockwise clash-free permutation with
/// `π(0) = 0`.
///
/// `a_m` is the shift from the `m`-th rectangle above `R_0` to the next one
/// up; `b_ℓ` is the drop from the `ℓ`-th rectangle right of `R_0` to the next
/// one right.
pub fn perm_to_jumper(p: &Permutation, params: &Params) -> Result<Jumper> {
    params.require_lattice_regime()?;
    if p.n() != params.n {
        return Err(Error::Precondition(format!(
            "permutation has n = {}, parameters have n = {}",
            p.n(),
            params.n
        )));
    }
    if p.image(0) != 0 {
        return Err(Error::Precondition(format!(
            "pi(0) = {}, expected 0",
            p.image(0)
        )));
    }
    let (n, s, k) = (params.n, params.s, params.k);
    if !is_clash_free(p, s, k)? {
        return Err(Error::Structure {
            property: "clash-free",
            detail: format!("permutation is not ({s},{k})-clash-free"),
        });
    }
    if orientation(p, params)? == Orientation::Anticlockwise {
        return Err(Error::Orientation);
    }
    let inv = p.invert();
    let mut a = Vec::with_capacity(params.d_s as usize);
    let mut x = 0;
    for _ in 0..params.d_s {
        let up = inv.image(p.image(x) + k);
        a.push((up + n - x) % n);
        x = up;
    }
    let b = (0..params.d_k)
        .map(|l| {
            let here = p.image(l * s);
            let right = p.image((l + 1) * s);
            (here + n - right) % n
        })
        .collect();
    let j = Jumper::new(a, b);
    match validate(&j.a, &j.b, params)? {
        Verdict::Valid => Ok(j),
        Verdict::Invalid { condition, detail } => Err(Error::Structure {
            property: "gap sequences form a jumper",
            detail: format!("condition {condition}: {detail}"),
        }),
    }
}

/// Default cap on search nodes visited by [`enumerate_jumpers`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

/// Every jumper, in lexicographic order of `(a, b)`.
pub fn enumerate_jumpers(params: &Params) -> Result<Vec<Jumper>> {
    enumerate_jumpers_with_budget(params, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_jumpers_with_budget(params: &Params, budget: u64) -> Result<Vec<Jumper>> {
    params.require_lattice_regime()?;
    let p = *params;
    let block = p.block_size();
    // σ_a = block·r_a with r_a | r/block, so every sum is at most r
    let quotient = p.r / block;
    let allowed: Vec<u64> = (1..=quotient)
        .filter(|t| quotient % t == 0)
        .map(|t| t * block)
        .collect();
    let mut nodes = 0u64;
    let a_seqs = sequences(p.d_s, p.s - 1, &allowed, p.d_s, &mut nodes, budget)?;
    let b_seqs = sequences(p.d_k, p.k - 1, &allowed, p.d_k, &mut nodes, budget)?;
    let target = block * p.r;
    let mut out = Vec::new();
    for a in &a_seqs {
        let sa: u64 = a.iter().sum();
        for b in &b_seqs {
            if sa * b.iter().sum::<u64>() == target {
                out.push(Jumper::new(a.clone(), b.clone()));
            }
        }
    }
    debug_assert!(out
        .iter()
        .all(|j| validate(&j.a, &j.b, &p).unwrap().is_valid()));
    Ok(out)
}

/// Lexicographically ordered sequences of `len` entries in `[1, max_entry]`
/// whose sum lies in `allowed` and whose prefix sums are distinct mod
/// `modulus`.
fn sequences(
    len: u64,
    max_entry: u64,
    allowed: &[u64],
    modulus: u64,
    nodes: &mut u64,
    budget: u64,
) -> Result<Vec<Vec<u64>>> {
    struct Walk<'a> {
        len: usize,
        max_entry: u64,
        allowed: &'a [u64],
        max_sum: u64,
        modulus: u64,
        nodes: &'a mut u64,
        budget: u64,
        seq: Vec<u64>,
        used: Vec<bool>,
        out: Vec<Vec<u64>>,
    }

    impl Walk<'_> {
        fn go(&mut self, sum: u64) -> Result<()> {
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Err(Error::BudgetExceeded(format!(
                    "jumper enumeration visited more than {} nodes",
                    self.budget
                )));
            }
            if self.seq.len() == self.len {
                if self.allowed.contains(&sum) {
                    self.out.push(self.seq.clone());
                }
                return Ok(());
            }
            // the prefix sum before the next entry must be a fresh residue
            let slot = (sum % self.modulus) as usize;
            if self.used[slot] {
                return Ok(());
            }
            self.used[slot] = true;
            let remaining = (self.len - self.seq.len() - 1) as u64;
            let mut v = 1;
            while v <= self.max_entry && sum + v + remaining <= self.max_sum {
                self.seq.push(v);
                self.go(sum + v)?;
                self.seq.pop();
                v += 1;
            }
            self.used[slot] = false;
            Ok(())
        }
    }

    let mut walk = Walk {
        len: len as usize,
        max_entry,
        allowed,
        max_sum: allowed.iter().copied().max().unwrap_or(0),
        modulus,
        nodes,
        budget,
        seq: Vec::with_capacity(len as usize),
        used: vec![false; modulus as usize],
        out: Vec::new(),
    };
    walk.go(0)?;
    Ok(walk.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::construct_thm31;

    fn params(n: u64, k: u64) -> Params {
        Params::derive(n, k).unwrap()
    }

    /// Oracle: every tuple in the full box, filtered by `validate`.
    fn enumerate_by_box(p: &Params) -> Vec<Jumper> {
        fn tuples(len: u64, max: u64) -> Vec<Vec<u64>> {
            let mut out = vec![vec![]];
            for _ in 0..len {
                out = out
                    .into_iter()
                    .flat_map(|t| {
                        (1..=max).map(move |v| {
                            let mut t = t.clone();
                            t.push(v);
                            t
                        })
                    })
                    .collect();
            }
            out
        }
        let mut out = Vec::new();
        for a in tuples(p.d_s, p.s - 1) {
            for b in tuples(p.d_k, p.k - 1) {
                if validate(&a, &b, p).unwrap().is_valid() {
                    out.push(Jumper::new(a.clone(), b));
                }
            }
        }
        out
    }

    #[test]
    fn validate_examples() {
        let p = params(216, 21);
        for a in [vec![1, 5], vec![3, 3]] {
            for b in [vec![1, 1, 4], vec![1, 4, 1]] {
                assert_eq!(validate(&a, &b, &p).unwrap(), Verdict::Valid, "{a:?} {b:?}");
            }
        }
        let p = params(14, 3);
        assert!(matches!(
            validate(&[1, 1], &[1], &p).unwrap(),
            Verdict::Invalid { condition: 3, .. }
        ));
        assert_eq!(validate(&[1, 1], &[2], &p).unwrap(), Verdict::Valid);
        assert!(matches!(
            validate(&[1], &[2], &p).unwrap(),
            Verdict::Invalid { condition: 1, .. }
        ));
        assert!(matches!(
            validate(&[1, 4], &[2], &p).unwrap(),
            Verdict::Invalid { condition: 2, .. }
        ));
        assert!(matches!(
            validate(&[2, 2], &[2], &p).unwrap(),
            Verdict::Invalid { condition: 4, .. }
        ));
        assert!(validate(&[1, 1], &[2], &params(18, 4)).is_err());
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(
            canonical_jumper(&params(14, 3), 1, 1).unwrap(),
            Jumper::new(vec![1, 1], vec![2])
        );
        assert_eq!(
            canonical_jumper(&params(40, 6), 1, 1).unwrap(),
            Jumper::new(vec![3, 1], vec![3, 1])
        );
        assert_eq!(
            canonical_jumper(&params(216, 21), 1, 1).unwrap(),
            Jumper::new(vec![5, 1], vec![4, 1, 1])
        );
        assert_eq!(
            canonical_jumper(&params(40, 6), 2, 1).unwrap_err(),
            Error::Factorization {
                product: 2,
                expected: 1
            }
        );
    }

    #[test]
    fn jumper_to_perm_examples() {
        let p = params(14, 3);
        let perm = jumper_to_perm(&Jumper::new(vec![1, 1], vec![2]), &p).unwrap();
        assert_eq!(
            perm.images(),
            &[0, 3, 6, 9, 12, 1, 4, 7, 10, 13, 2, 5, 8, 11]
        );
        assert_eq!(
            perm_to_jumper(&perm, &p).unwrap(),
            Jumper::new(vec![1, 1], vec![2])
        );

        let p = params(40, 6);
        let perm = jumper_to_perm(&canonical_jumper(&p, 1, 1).unwrap(), &p).unwrap();
        assert_eq!(perm.image(0), 0);
        assert!(is_clash_free(&perm, 6, 6).unwrap());
        assert!(jumper_to_perm(&Jumper::new(vec![1, 1], vec![1]), &params(14, 3)).is_err());
    }

    #[test]
    fn perm_to_jumper_errors() {
        let p = params(14, 3);
        let perm = Permutation::from_fn(14, |x| 3 * x).unwrap();
        assert_eq!(
            perm_to_jumper(&perm.negate(), &p).unwrap_err(),
            Error::Orientation
        );
        assert!(matches!(
            perm_to_jumper(&perm.shift_images(1), &p),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            perm_to_jumper(&Permutation::identity(14), &p),
            Err(Error::Structure { .. })
        ));
    }

    #[test]
    fn lattice_construction_has_trailing_jumper() {
        for (n, k) in [(40, 6), (216, 21), (14, 3), (62, 12)] {
            let p = params(n, k);
            if p.require_lattice_regime().is_err() {
                continue;
            }
            let j = perm_to_jumper(&construct_thm31(&p).unwrap(), &p).unwrap();
            let mut a = vec![1; p.d_s as usize];
            *a.last_mut().unwrap() = p.r - (p.d_s - 1);
            let mut b = vec![1; p.d_k as usize];
            *b.last_mut().unwrap() = p.block_size() - (p.d_k - 1);
            assert_eq!(j, Jumper::new(a, b), "n={n} k={k}");
        }
    }

    #[test]
    fn enumeration_examples() {
        let p = params(14, 3);
        assert_eq!(
            enumerate_jumpers(&p).unwrap(),
            vec![Jumper::new(vec![1, 1], vec![2])]
        );
        let p = params(216, 21);
        let all = enumerate_jumpers(&p).unwrap();
        for a in [vec![1, 5], vec![3, 3]] {
            for b in [vec![1, 1, 4], vec![1, 4, 1]] {
                assert!(all.contains(&Jumper::new(a.clone(), b)));
            }
        }
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn enumeration_matches_box_scan() {
        for n in 2..=70u64 {
            for k in 1..n {
                let p = params(n, k);
                if p.require_lattice_regime().is_err() {
                    continue;
                }
                if (p.s - 1).pow(p.d_s as u32) * (p.k - 1).pow(p.d_k as u32) > 200_000 {
                    continue;
                }
                assert_eq!(
                    enumerate_jumpers(&p).unwrap(),
                    enumerate_by_box(&p),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn enumeration_budget() {
        assert!(matches!(
            enumerate_jumpers_with_budget(&params(216, 21), 3),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn coprime_examples() {
        let p = params(216, 21);
        assert!(check_coprime(&Jumper::new(vec![1, 5], vec![1, 1, 4]), &p));
        assert!(check_coprime(
            &Jumper::new(vec![1, 1], vec![2]),
            &params(14, 3)
        ));
        for j in enumerate_jumpers(&p).unwrap() {
            assert!(check_coprime(&j, &p));
        }
    }

    #[test]
    fn json_record() {
        let p = params(14, 3);
        let rec = JumperRecord::new(&p, &Jumper::new(vec![1, 1], vec![2]));
        assert_eq!(rec.to_json(), r#"{"n":14,"k":3,"a":[1,1],"b":[2]}"#);
        assert_eq!(JumperRecord::parse(&rec.to_json()).unwrap(), rec);
    }
}
