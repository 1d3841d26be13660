//! Clash detection, two ways: a distance-pair scan and a torus occupancy grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{check_width_height, circ_dist};
use crate::permutation::Permutation;

/// Largest torus side accepted by grid-based operations.
pub const MAX_GRID_SIDE: u64 = 4096;

/// An unordered clashing pair, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Clash {
    pub i: u64,
    pub j: u64,
}

impl Clash {
    fn new(a: u64, b: u64) -> Self {
        Clash {
            i: a.min(b),
            j: a.max(b),
        }
    }
}

/// Every unordered `(s,k)`-clash of `p`, sorted.
///
/// A clash of `π` under `(s,k)` is a clash of `π⁻¹` under `(k,s)` with the
/// roles of indices and images exchanged, so the scan runs over offsets
/// below `min(s, k)`.
pub fn find_clashes(p: &Permutation, s: u64, k: u64) -> Result<Vec<Clash>> {
    let n = p.n();
    check_width_height(n, s, k)?;
    let mut out = if s <= k {
        scan_offsets(p, s, k)
    } else {
        let inv = p.invert();
        scan_offsets(&inv, k, s)
            .into_iter()
            .map(|c| Clash::new(inv.image(c.i), inv.image(c.j)))
            .collect()
    };
    out.sort_unstable();
    Ok(out)
}

/// Pairs `(x, x+d)` with `1 ≤ d < width`, `d ≤ n/2`, whose images are closer
/// than `height`.
fn scan_offsets(p: &Permutation, width: u64, height: u64) -> Vec<Clash> {
    let n = p.n();
    let mut out = Vec::new();
    for d in 1..=(width - 1).min(n / 2) {
        // offset n/2 reaches each pair from both ends
        let starts = if 2 * d == n { n / 2 } else { n };
        for x in 0..starts {
            let y = (x + d) % n;
            if circ_dist(p.image(x), p.image(y), n) < height {
                out.push(Clash::new(x, y));
            }
        }
    }
    out
}

pub fn is_clash_free(p: &Permutation, s: u64, k: u64) -> Result<bool> {
    let n = p.n();
    check_width_height(n, s, k)?;
    if s <= k {
        Ok(offsets_clear(p, s, k))
    } else {
        Ok(offsets_clear(&p.invert(), k, s))
    }
}

fn offsets_clear(p: &Permutation, width: u64, height: u64) -> bool {
    let n = p.n();
    let img = p.images();
    let far = |a: u64, b: u64| {
        let d = a.abs_diff(b);
        d >= height && n - d >= height
    };
    (1..=(width - 1).min(n / 2) as usize).all(|d| {
        let (head, tail) = img.split_at(img.len() - d);
        head.iter().zip(&img[d..]).all(|(&a, &b)| far(a, b))
            && tail.iter().zip(img).all(|(&a, &b)| far(a, b))
    })
}

/// The `n` rectangles of a clash-free permutation laid out on the torus.
///
/// Cells are stored line by line along the longer rectangle side so that a
/// rectangle touches `min(s, k)` lines.
#[derive(Debug, Clone)]
pub struct Packing {
    perm: Permutation,
    s: u64,
    k: u64,
    /// Lines are columns (indexed by x) instead of rows.
    by_column: bool,
    covered: Bits,
}

impl Packing {
    pub fn n(&self) -> u64 {
        self.perm.n()
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    /// The dot cells `(x, π(x))`.
    pub fn dots(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.perm
            .images()
            .iter()
            .enumerate()
            .map(|(x, &y)| (x as u64, y))
    }

    #[inline]
    fn bit_index(&self, x: u64, y: u64) -> usize {
        let n = self.n();
        let (x, y) = (x % n, y % n);
        if self.by_column {
            (x * n + y) as usize
        } else {
            (y * n + x) as usize
        }
    }

    #[inline]
    pub fn is_covered(&self, x: u64, y: u64) -> bool {
        self.covered.get(self.bit_index(x, y))
    }

    pub fn covered_count(&self) -> u64 {
        self.covered.count_ones()
    }

    /// Free cells in every row and every column, checked against `n − s·k`.
    pub fn free_cells_per_line(&self) -> Result<(Vec<u64>, Vec<u64>)> {
        let n = self.n();
        let expected = n.saturating_sub(self.s * self.k);
        let mut rows = vec![n; n as usize];
        let mut cols = vec![n; n as usize];
        for idx in self.covered.iter_ones() {
            let (line, pos) = (idx / n as usize, idx % n as usize);
            let (x, y) = if self.by_column {
                (line, pos)
            } else {
                (pos, line)
            };
            rows[y] -= 1;
            cols[x] -= 1;
        }
        for (axis, counts) in [("row", &rows), ("column", &cols)] {
            if let Some((index, &found)) = counts.iter().enumerate().find(|(_, &c)| c != expected) {
                return Err(Error::FreeCellCount {
                    axis,
                    index,
                    found: found as usize,
                    expected: expected as usize,
                });
            }
        }
        Ok((rows, cols))
    }
}

/// Marks every rectangle on an occupancy grid, failing at the first cell
/// claimed twice.
pub fn build_packing(p: &Permutation, s: u64, k: u64) -> Result<Packing> {
    let n = p.n();
    check_width_height(n, s, k)?;
    if n > MAX_GRID_SIDE {
        return Err(Error::SizeLimit(format!(
            "grid operations support n <= {MAX_GRID_SIDE}, got {n}"
        )));
    }
    let by_column = k > s;
    // (lines per rectangle, run length along a line)
    let (lines, run) = if by_column { (s, k) } else { (k, s) };
    let mut covered = Bits::zeros((n * n) as usize);
    let nu = n as usize;

    // Placing rectangles in order of their first line keeps the lines being
    // written within a window of `lines` consecutive lines.
    let inv;
    let along = if by_column {
        p.images()
    } else {
        inv = p.invert();
        inv.images()
    };
    for (line0, &pos0) in along.iter().enumerate() {
        let (line0, x) = (line0 as u64, if by_column { line0 as u64 } else { pos0 });
        let mut line = line0 as usize;
        for _ in 0..lines {
            let base = line * nu;
            let start = pos0 as usize;
            let end = start + run as usize;
            let segments = if end <= nu {
                [(start, end), (0, 0)]
            } else {
                [(start, nu), (0, end - nu)]
            };
            for (a, b) in segments {
                if let Err(idx) = covered.claim(base + a, base + b) {
                    let pos = (idx - base) as u64;
                    let (cx, cy) = if by_column {
                        (line as u64, pos)
                    } else {
                        (pos, line as u64)
                    };
                    return Err(Error::Overlap {
                        x: cx as usize,
                        y: cy as usize,
                        rect: x as usize,
                    });
                }
            }
            line += 1;
            if line == nu {
                line = 0;
            }
        }
    }

    Ok(Packing {
        perm: p.clone(),
        s,
        k,
        by_column,
        covered,
    })
}

/// Flat bitset with word-at-a-time range operations; a grid of up to
/// `4096²` cells sees `n·min(s,k)` range calls, so per-bit work is too slow.
#[derive(Debug, Clone)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    wi * 64 + b
                })
            })
        })
    }

    /// Sets bits `a..b`, or returns the first of them that was already set.
    /// On failure the range may be left partly filled.
    #[inline]
    fn claim(&mut self, a: usize, b: usize) -> std::result::Result<(), usize> {
        if a >= b {
            return Ok(());
        }
        let (first, last) = (a / 64, (b - 1) / 64);
        let head = !0u64 << (a % 64);
        let tail = !0u64 >> (63 - (b - 1) % 64);
        for w in first..=last {
            let mut m = !0u64;
            if w == first {
                m &= head;
            }
            if w == last {
                m &= tail;
            }
            let hit = self.words[w] & m;
            if hit != 0 {
                return Err(w * 64 + hit.trailing_zeros() as usize);
            }
            self.words[w] |= m;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn reference_40_6() -> Permutation {
        Permutation::from_images(vec![
            0, 6, 27, 33, 12, 18, 39, 5, 24, 30, 11, 17, 36, 2, 23, 29, 8, 14, 35, 1, 20, 26, 7,
            13, 32, 38, 19, 25, 4, 10, 31, 37, 16, 22, 3, 9, 28, 34, 15, 21,
        ])
        .unwrap()
    }

    /// All-pairs oracle straight from the definition.
    fn clashes_all_pairs(p: &Permutation, s: u64, k: u64) -> Vec<Clash> {
        let n = p.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if circ_dist(i, j, n) < s && circ_dist(p.image(i), p.image(j), n) < k {
                    out.push(Clash { i, j });
                }
            }
        }
        out
    }

    #[test]
    fn reference_40_6_is_clash_free() {
        let p = reference_40_6();
        assert!(find_clashes(&p, 6, 6).unwrap().is_empty());
        assert!(is_clash_free(&p, 6, 6).unwrap());
        assert!(!is_clash_free(&p, 7, 6).unwrap());
        assert_eq!(find_clashes(&p, 7, 6).unwrap(), clashes_all_pairs(&p, 7, 6));
    }

    #[test]
    fn identity_adjacent_pairs() {
        let id = Permutation::identity(10);
        let clashes = find_clashes(&id, 2, 2).unwrap();
        assert_eq!(clashes.len(), 10);
        let mut expected: Vec<Clash> = (0..10).map(|i| Clash::new(i, (i + 1) % 10)).collect();
        expected.sort();
        assert_eq!(clashes, expected);
        assert!(is_clash_free(&id, 1, 1).unwrap());
    }

    #[test]
    fn times_three_mod_fourteen() {
        let p = Permutation::from_fn(14, |x| 3 * x).unwrap();
        assert!(clashes_all_pairs(&p, 4, 3).is_empty());
        assert!(find_clashes(&p, 4, 3).unwrap().is_empty());
        let pk = build_packing(&p, 4, 3).unwrap();
        let (rows, cols) = pk.free_cells_per_line().unwrap();
        assert!(rows.iter().chain(&cols).all(|&c| c == 2));
    }

    #[test]
    fn packing_counts() {
        let pk = build_packing(&reference_40_6(), 6, 6).unwrap();
        assert_eq!(pk.covered_count(), 1440);
        let (rows, cols) = pk.free_cells_per_line().unwrap();
        assert!(rows.iter().chain(&cols).all(|&c| c == 4));

        let pk = build_packing(&Permutation::identity(2), 1, 1).unwrap();
        assert_eq!(pk.covered_count(), 2);
        assert!(pk.is_covered(0, 0) && pk.is_covered(1, 1));
        assert!(!pk.is_covered(0, 1) && !pk.is_covered(1, 0));
    }

    #[test]
    fn packing_overlap_reports_cell() {
        let err = build_packing(&Permutation::identity(10), 2, 2).unwrap_err();
        // R_1 covers (1,1),(2,1),(1,2),(2,2); (1,1) already belongs to R_0
        assert_eq!(
            err,
            Error::Overlap {
                x: 1,
                y: 1,
                rect: 1
            }
        );
    }

    #[test]
    fn free_cell_mismatch_is_reported() {
        // clash-free but far from extremal: 10 - 1*1 = 9 free per line
        let pk = build_packing(&Permutation::identity(10), 1, 1).unwrap();
        let (rows, _) = pk.free_cells_per_line().unwrap();
        assert!(rows.iter().all(|&c| c == 9));
    }

    #[test]
    fn parameter_domain() {
        let id = Permutation::identity(5);
        assert!(matches!(
            find_clashes(&id, 0, 2),
            Err(Error::ParamDomain(_))
        ));
        assert!(matches!(
            find_clashes(&id, 2, 5),
            Err(Error::ParamDomain(_))
        ));
        assert!(matches!(
            build_packing(&id, 5, 1),
            Err(Error::ParamDomain(_))
        ));
    }

    fn perm_and_dims() -> impl Strategy<Value = (Vec<u64>, u64, u64)> {
        (2u64..40).prop_flat_map(|n| (Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 1..n, 1..n))
    }

    proptest! {
        #[test]
        fn scan_matches_all_pairs((images, s, k) in perm_and_dims()) {
            let p = Permutation::from_images(images).unwrap();
            prop_assert_eq!(find_clashes(&p, s, k).unwrap(), clashes_all_pairs(&p, s, k));
        }

        #[test]
        fn scan_agrees_with_grid((images, s, k) in perm_and_dims()) {
            let p = Permutation::from_images(images).unwrap();
            let free = is_clash_free(&p, s, k).unwrap();
            prop_assert_eq!(free, build_packing(&p, s, k).is_ok());
        }

        #[test]
        fn duality_reflection_monotonicity((images, s, k) in perm_and_dims()) {
            let p = Permutation::from_images(images).unwrap();
            let free = is_clash_free(&p, s, k).unwrap();
            prop_assert_eq!(free, is_clash_free(&p.invert(), k, s).unwrap());
            prop_assert_eq!(free, is_clash_free(&p.negate(), s, k).unwrap());
            if free {
                for s2 in 1..=s {
                    for k2 in 1..=k {
                        prop_assert!(is_clash_free(&p, s2, k2).unwrap());
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bitset_ranges_match_bool_model(
            len in 1usize..300,
            ops in prop::collection::vec((0usize..300, 0usize..300), 0..20),
        ) {
            let mut bits = Bits::zeros(len);
            let mut model = vec![false; len];
            for (a, b) in ops {
                let (a, b) = (a.min(b) % (len + 1), a.max(b).min(len));
                let (a, b) = (a.min(b), b);
                let expected = (a..b).find(|&i| model[i]);
                match bits.claim(a, b) {
                    Ok(()) => prop_assert_eq!(expected, None),
                    Err(i) => {
                        prop_assert_eq!(Some(i), expected);
                        // finish the range so the model stays in sync
                        (a..b).for_each(|j| bits.words[j / 64] |= 1 << (j % 64));
                    }
                }
                model[a..b].iter_mut().for_each(|c| *c = true);
            }
            let ones: Vec<usize> = (0..len).filter(|&i| model[i]).collect();
            prop_assert_eq!(bits.iter_ones().collect::<Vec<_>>(), ones.clone());
            prop_assert_eq!(bits.count_ones(), ones.len() as u64);
            prop_assert!((0..len).all(|i| bits.get(i) == model[i]));
        }
    }
}
