//! Closed form for `σ(n,k)`, the largest `s` admitting an `(s,k)`-clash-free
//! permutation of `Z_n`.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::params::Params;

/// Which regime of the closed form decides `σ(n,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case")]
pub enum SigmaCase {
    /// `r ≥ s`.
    RemainderLarge,
    /// `k = r`, i.e. `k | n`.
    KDividesN,
    /// `r < s`, `r < k` and `d_s·d_k | n`.
    Divisible { d_s: u64, d_k: u64, residue: u64 },
    /// `r < s`, `r < k` and `d_s·d_k ∤ n`; no extremal permutation exists.
    NotDivisible { d_s: u64, d_k: u64, residue: u64 },
}

impl SigmaCase {
    pub fn name(&self) -> &'static str {
        match self {
            SigmaCase::RemainderLarge => "RemainderLarge",
            SigmaCase::KDividesN => "KDividesN",
            SigmaCase::Divisible { .. } => "Divisible",
            SigmaCase::NotDivisible { .. } => "NotDivisible",
        }
    }

    /// Whether `σ(n,k)` reaches `⌊(n−1)/k⌋`.
    pub fn attains_bound(&self) -> bool {
        !matches!(self, SigmaCase::NotDivisible { .. })
    }
}

impl fmt::Display for SigmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn sigma_case(n: u64, k: u64) -> Result<SigmaCase> {
    Ok(case_of(&Params::derive(n, k)?))
}

pub fn case_of(p: &Params) -> SigmaCase {
    if p.k == p.r {
        return SigmaCase::KDividesN;
    }
    if p.r >= p.s {
        return SigmaCase::RemainderLarge;
    }
    let residue = p.n % p.block_size();
    if residue == 0 {
        SigmaCase::Divisible {
            d_s: p.d_s,
            d_k: p.d_k,
            residue,
        }
    } else {
        SigmaCase::NotDivisible {
            d_s: p.d_s,
            d_k: p.d_k,
            residue,
        }
    }
}

pub fn sigma(n: u64, k: u64) -> Result<u64> {
    let p = Params::derive(n, k)?;
    Ok(if case_of(&p).attains_bound() {
        p.s
    } else {
        p.s - 1
    })
}

/// One line of the `σ` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub k: u64,
    pub bound: u64,
    pub sigma: u64,
    #[serde(serialize_with = "serialize_case_name")]
    pub case: SigmaCase,
}

fn serialize_case_name<S: serde::Serializer>(
    c: &SigmaCase,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(c.name())
}

/// Rows for every `1 ≤ k < n ≤ max_n`, ordered by `n` then `k`.
pub fn table(max_n: u64) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for n in 2..=max_n {
        for k in 1..n {
            let p = Params::derive(n, k).expect("1 <= k < n");
            let case = case_of(&p);
            rows.push(TableRow {
                n,
                k,
                bound: p.s,
                sigma: if case.attains_bound() { p.s } else { p.s - 1 },
                case,
            });
        }
    }
    rows
}

/// Tab-separated rendering of [`table`] with a header line.
pub fn table_tsv(max_n: u64) -> String {
    let mut out = String::from("n\tk\tfloor\tsigma\tcase\n");
    for row in table(max_n) {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            row.n, row.k, row.bound, row.sigma, row.case
        ));
    }
    out
}

/// A member `(n, k, s)` of the infinite family with `σ(n,k) = s − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FamilyMember {
    pub n: u64,
    pub k: u64,
    pub s: u64,
}

/// The first `count` triples, ordered by `n` then `k`, with `k ≡ 2 (mod 4)`,
/// `k ≥ 10`, `s ≡ 2 (mod 4)`, `6 ≤ s < k` and `n = s·k + s − 4`.
///
/// Both `d_s` and `d_k` are even while `n ≡ 2 (mod 4)`, so `d_s·d_k ∤ n`.
pub fn corollary_family(count: usize) -> Vec<FamilyMember> {
    let mut limit = 64u64;
    loop {
        let mut members = Vec::new();
        // n >= 6(k+1) - 4 bounds k for a given limit
        let mut k = 10;
        while 6 * (k + 1) - 4 <= limit {
            let mut s = 6;
            while s < k {
                let n = s * k + s - 4;
                if n <= limit {
                    members.push(FamilyMember { n, k, s });
                }
                s += 4;
            }
            k += 4;
        }
        if members.len() >= count {
            members.sort();
            members.truncate(count);
            return members;
        }
        limit *= 2;
    }
}
