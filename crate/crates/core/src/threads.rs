//! Warp/weft structure of an extremal clash-free packing (`r < s`, `r < k`).
//!
//! Rectangles touching left to right form warp threads and rectangles
//! touching bottom to top form weft threads. `τ` sends a warp thread to the
//! one resting on it, `ρ` sends a weft thread to the one on its right. Every
//! property listed on [`ThreadDecomposition`] is checked while building it;
//! a failure is reported as [`Error::Structure`].

use serde::Serialize;

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::params::{circ_dist, Params};
use crate::permutation::Permutation;
use crate::verify::{build_packing, is_clash_free, Packing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// The rectangle on top is shifted right, the one on the right is lower.
    Clockwise,
    /// Mirror image of [`Orientation::Clockwise`].
    Anticlockwise,
}

impl Orientation {
    pub fn opposite(self) -> Self {
        match self {
            Orientation::Clockwise => Orientation::Anticlockwise,
            Orientation::Anticlockwise => Orientation::Clockwise,
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Orientation::Clockwise => "clockwise",
            Orientation::Anticlockwise => "anticlockwise",
        })
    }
}

/// The free rectangle resting on a rectangle's top edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gap {
    /// Lower-left free cell.
    pub x: u64,
    pub y: u64,
    pub width: u64,
    pub height: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreadDecomposition {
    /// Each warp thread, left to right, starting from its smallest index.
    pub warps: Vec<Vec<u64>>,
    /// Each weft thread, bottom to top, starting from its smallest index.
    pub wefts: Vec<Vec<u64>>,
    pub warp_of: Vec<usize>,
    pub weft_of: Vec<usize>,
    /// `tau[u]` is the warp thread resting on warp thread `u`.
    pub tau: Vec<usize>,
    /// `rho[v]` is the weft thread to the right of weft thread `v`.
    pub rho: Vec<usize>,
    pub orientation: Orientation,
    /// Gap of every rectangle `R_x`, indexed by `x`.
    pub gaps: Vec<Gap>,
    /// Common gap width of each warp thread.
    pub warp_gap_width: Vec<u64>,
    /// Common gap height of each weft thread.
    pub weft_gap_height: Vec<u64>,
}

impl ThreadDecomposition {
    /// `δ = τ⁻¹`: the warp thread directly below.
    pub fn delta(&self) -> Vec<usize> {
        inverse(&self.tau)
    }

    /// `λ = ρ⁻¹`: the weft thread directly to the left.
    pub fn lambda(&self) -> Vec<usize> {
        inverse(&self.rho)
    }
}

fn inverse(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (i, &j) in map.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn violation(property: &'static str, detail: String) -> Error {
    Error::Structure { property, detail }
}

fn require_extremal(p: &Permutation, params: &Params) -> Result<()> {
    if p.n() != params.n {
        return Err(Error::Precondition(format!(
            "permutation has n = {}, parameters have n = {}",
            p.n(),
            params.n
        )));
    }
    if !params.small_remainder() {
        return Err(Error::Precondition(format!(
            "thread analysis needs r < s and r < k, got r = {}, s = {}, k = {}",
            params.r, params.s, params.k
        )));
    }
    Ok(())
}

/// Indices of the four rectangles touching `R_x`.
struct Neighbours {
    top: u64,
    bottom: u64,
    right: u64,
    left: u64,
}

fn neighbours(p: &Permutation, inv: &Permutation, params: &Params, x: u64) -> Result<Neighbours> {
    let (n, s, k) = (params.n, params.s, params.k);
    let y = p.image(x);
    let nb = Neighbours {
        top: inv.image(y + k),
        bottom: inv.image(y + n - k),
        right: (x + s) % n,
        left: (x + n - s) % n,
    };
    let touches_vertically = |other: u64| circ_dist(other, x, n) < s;
    let touches_sideways = |other: u64| circ_dist(p.image(other), y, n) < k;
    if !touches_vertically(nb.top) || !touches_vertically(nb.bottom) {
        return Err(violation(
            "unique touching neighbour",
            format!("no rectangle touches the top or bottom edge of R_{x}"),
        ));
    }
    if !touches_sideways(nb.right) || !touches_sideways(nb.left) {
        return Err(violation(
            "unique touching neighbour",
            format!("no rectangle touches the left or right edge of R_{x}"),
        ));
    }
    Ok(nb)
}

fn classify(params: &Params, p: &Permutation, x: u64, nb: &Neighbours) -> Result<Orientation> {
    let (n, s, k) = (params.n, params.s, params.k);
    let y = p.image(x);
    let in_range = |d: u64, bound: u64| (1..bound).contains(&d);
    let top_shift = (nb.top + n - x) % n;
    let bottom_shift = (x + n - nb.bottom) % n;
    let right_drop = (y + n - p.image(nb.right)) % n;
    let left_rise = (p.image(nb.left) + n - y) % n;
    let clockwise = [
        in_range(top_shift, s),
        in_range(bottom_shift, s),
        in_range(right_drop, k),
        in_range(left_rise, k),
    ];
    let anticlockwise = [
        in_range(n - top_shift, s),
        in_range(n - bottom_shift, s),
        in_range(n - right_drop, k),
        in_range(n - left_rise, k),
    ];
    if clockwise.iter().all(|&c| c) {
        Ok(Orientation::Clockwise)
    } else if anticlockwise.iter().all(|&c| c) {
        Ok(Orientation::Anticlockwise)
    } else {
        Err(violation(
            "neighbour arrangement",
            format!("neighbours of R_{x} are neither clockwise nor anticlockwise"),
        ))
    }
}

/// Classifies `p` by the four rectangles touching `R_0`.
pub fn orientation(p: &Permutation, params: &Params) -> Result<Orientation> {
    require_extremal(p, params)?;
    if !is_clash_free(p, params.s, params.k)? {
        return Err(violation(
            "clash-free",
            format!("permutation is not ({},{})-clash-free", params.s, params.k),
        ));
    }
    let inv = p.invert();
    let nb = neighbours(p, &inv, params, 0)?;
    classify(params, p, 0, &nb)
}

/// Maximal free rectangle on the top edge of `R_x`, checked to be a whole
/// connected free region.
fn gap_above(pk: &Packing, x: u64) -> Result<Gap> {
    let (n, s) = (pk.n(), pk.s());
    let row = (pk.permutation().image(x) + pk.k()) % n;
    let free: Vec<bool> = (0..s).map(|dx| !pk.is_covered(x + dx, row)).collect();
    let start = free
        .iter()
        .position(|&f| f)
        .ok_or_else(|| violation("gap shape", format!("no free cell above R_{x}")))?
        as u64;
    let width = free[start as usize..].iter().take_while(|&&f| f).count() as u64;
    if free[(start + width) as usize..].iter().any(|&f| f) {
        return Err(violation(
            "gap shape",
            format!("free cells above R_{x} are not contiguous"),
        ));
    }
    let gx = (x + start) % n;
    let height = (0..n)
        .take_while(|&dy| !pk.is_covered(gx, row + dy))
        .count() as u64;
    let free_region = (0..width).all(|dx| (0..height).all(|dy| !pk.is_covered(gx + dx, row + dy)));
    let closed_top = (0..width).all(|dx| pk.is_covered(gx + dx, row + height));
    let closed_sides = (0..height)
        .all(|dy| pk.is_covered(gx + n - 1, row + dy) && pk.is_covered(gx + width, row + dy));
    if height == 0 || height >= n || !(free_region && closed_top && closed_sides) {
        return Err(violation(
            "gap shape",
            format!("gap above R_{x} is not a rectangle"),
        ));
    }
    Ok(Gap {
        x: gx,
        y: row,
        width,
        height,
    })
}

/// Cycles of `next`, each listed from its smallest element.
fn cycles(n: u64, next: impl Fn(u64) -> u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut owner = vec![usize::MAX; n as usize];
    let mut out = Vec::new();
    for start in 0..n {
        if owner[start as usize] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut cycle = Vec::new();
        let mut x = start;
        while owner[x as usize] == usize::MAX {
            owner[x as usize] = id;
            cycle.push(x);
            x = next(x);
        }
        out.push(cycle);
    }
    (out, owner)
}

/// Induced action on threads; every member must agree on the image thread.
fn thread_map(
    threads: &[Vec<u64>],
    owner: &[usize],
    step: impl Fn(u64) -> u64,
    property: &'static str,
) -> Result<Vec<usize>> {
    threads
        .iter()
        .enumerate()
        .map(|(id, members)| {
            let target = owner[step(members[0]) as usize];
            if members.iter().any(|&m| owner[step(m) as usize] != target) {
                return Err(violation(
                    property,
                    format!("neighbours of thread {id} span several threads"),
                ));
            }
            Ok(target)
        })
        .collect()
}

fn is_single_cycle(map: &[usize]) -> bool {
    let mut x = 0;
    for step in 1..=map.len() {
        x = map[x];
        if x == 0 {
            return step == map.len();
        }
    }
    false
}

pub fn build_threads(p: &Permutation, params: &Params) -> Result<ThreadDecomposition> {
    require_extremal(p, params)?;
    let (n, s, k) = (params.n, params.s, params.k);
    let pk = build_packing(p, s, k).map_err(|e| match e {
        Error::Overlap { .. } => violation("clash-free", e.to_string()),
        other => other,
    })?;
    pk.free_cells_per_line()
        .map_err(|e| violation("free cells per line", e.to_string()))?;

    let inv = p.invert();
    let nbs = (0..n)
        .map(|x| neighbours(p, &inv, params, x))
        .collect::<Result<Vec<_>>>()?;

    let orientation = classify(params, p, 0, &nbs[0])?;
    for x in 1..n {
        if classify(params, p, x, &nbs[x as usize])? != orientation {
            return Err(violation(
                "neighbour arrangement",
                format!("R_{x} disagrees with the orientation of R_0"),
            ));
        }
    }

    let (warps, warp_of) = cycles(n, |x| nbs[x as usize].right);
    let (wefts, weft_of) = cycles(n, |x| nbs[x as usize].top);
    if warps.len() as u64 != params.d_s || warps.iter().any(|w| w.len() as u64 != n / params.d_s) {
        return Err(violation(
            "thread size",
            format!("expected {} warp threads of {}", params.d_s, n / params.d_s),
        ));
    }
    if wefts.len() as u64 != params.d_k || wefts.iter().any(|w| w.len() as u64 != n / params.d_k) {
        return Err(violation(
            "thread size",
            format!("expected {} weft threads of {}", params.d_k, n / params.d_k),
        ));
    }
    for (id, w) in warps.iter().enumerate() {
        if w.iter().any(|&x| x % params.d_s != w[0] % params.d_s) {
            return Err(violation(
                "thread congruence class",
                format!("warp thread {id} mixes residues mod d_s"),
            ));
        }
    }
    for (id, w) in wefts.iter().enumerate() {
        let class = p.image(w[0]) % params.d_k;
        if w.iter().any(|&x| p.image(x) % params.d_k != class) {
            return Err(violation(
                "thread congruence class",
                format!("weft thread {id} mixes image residues mod d_k"),
            ));
        }
    }

    let tau = thread_map(&warps, &warp_of, |x| nbs[x as usize].top, "warp above warp")?;
    let delta = thread_map(
        &warps,
        &warp_of,
        |x| nbs[x as usize].bottom,
        "warp below warp",
    )?;
    let rho = thread_map(
        &wefts,
        &weft_of,
        |x| nbs[x as usize].right,
        "weft beside weft",
    )?;
    let lambda = thread_map(
        &wefts,
        &weft_of,
        |x| nbs[x as usize].left,
        "weft beside weft",
    )?;
    if inverse(&tau) != delta || inverse(&rho) != lambda {
        return Err(violation(
            "thread maps invert",
            "the below/left maps are not inverse to the above/right maps".into(),
        ));
    }
    if !is_single_cycle(&tau) {
        return Err(violation("tau single cycle", format!("tau = {tau:?}")));
    }
    if !is_single_cycle(&rho) {
        return Err(violation("rho single cycle", format!("rho = {rho:?}")));
    }

    let gaps = (0..n)
        .map(|x| gap_above(&pk, x))
        .collect::<Result<Vec<_>>>()?;
    let mut warp_gap_width = vec![0; warps.len()];
    for (id, w) in warps.iter().enumerate() {
        warp_gap_width[id] = gaps[w[0] as usize].width;
        if w.iter()
            .any(|&x| gaps[x as usize].width != warp_gap_width[id])
        {
            return Err(violation(
                "gap width constant along warp",
                format!("warp thread {id} has gaps of differing widths"),
            ));
        }
    }
    let mut weft_gap_height = vec![0; wefts.len()];
    for (id, w) in wefts.iter().enumerate() {
        weft_gap_height[id] = gaps[w[0] as usize].height;
        if w.iter()
            .any(|&x| gaps[x as usize].height != weft_gap_height[id])
        {
            return Err(violation(
                "gap height constant along weft",
                format!("weft thread {id} has gaps of differing heights"),
            ));
        }
    }

    Ok(ThreadDecomposition {
        warps,
        wefts,
        warp_of,
        weft_of,
        tau,
        rho,
        orientation,
        gaps,
        warp_gap_width,
        weft_gap_height,
    })
}

/// Verdict of the divisibility check, with the thread walk that backs it.
#[derive(Debug, Clone, Serialize)]
pub struct DivisibilityCertificate {
    /// Warp threads met while climbing the weft thread through `R_0`.
    pub warp_sequence: Vec<usize>,
    /// Exact period of `warp_sequence`.
    pub period: u64,
    pub weft_length: u64,
    pub holds: bool,
}

/// Climbs the weft thread through `R_0`: the warp threads met repeat with
/// period `d_s` and the climb closes after `n/d_k` steps, so `d_s | n/d_k`.
pub fn divisibility_certificate(
    p: &Permutation,
    params: &Params,
) -> Result<DivisibilityCertificate> {
    let td = build_threads(p, params)?;
    let climb = &td.wefts[td.weft_of[0]];
    // wefts are listed from their smallest index, which is 0 here
    debug_assert_eq!(climb[0], 0);
    let warp_sequence: Vec<usize> = climb.iter().map(|&x| td.warp_of[x as usize]).collect();
    for pair in warp_sequence.windows(2) {
        if td.tau[pair[0]] != pair[1] {
            return Err(violation(
                "climb follows tau",
                "consecutive warp threads on a weft are not related by tau".into(),
            ));
        }
    }
    let len = warp_sequence.len() as u64;
    let period = (1..=len)
        .find(|&q| {
            (0..len).all(|i| warp_sequence[i as usize] == warp_sequence[((i + q) % len) as usize])
        })
        .unwrap_or(len);
    if period != params.d_s {
        return Err(violation(
            "climb period",
            format!(
                "warp sequence has period {period}, expected d_s = {}",
                params.d_s
            ),
        ));
    }
    let holds = len % period == 0 && params.n % (params.d_s * params.d_k) == 0;
    Ok(DivisibilityCertificate {
        warp_sequence,
        period,
        weft_length: len,
        holds,
    })
}

/// `d_s·d_k | n` for a clash-free extremal `p`, re-derived from its threads.
pub fn check_theorem26(p: &Permutation, params: &Params) -> Result<bool> {
    let cert = divisibility_certificate(p, params)?;
    debug_assert_eq!(gcd(cert.weft_length, cert.period), cert.period);
    Ok(cert.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::construct_thm31;
    use crate::jumper::{jumper_to_perm, Jumper};

    fn params(n: u64, k: u64) -> Params {
        Params::derive(n, k).unwrap()
    }

    /// Oracle: flood fill of the free region through the gap's corner cell.
    fn flood_fill_size(pk: &Packing, x: u64, y: u64) -> usize {
        let n = pk.n();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![(x % n, y % n)];
        while let Some((cx, cy)) = stack.pop() {
            if pk.is_covered(cx, cy) || !seen.insert((cx, cy)) {
                continue;
            }
            for (dx, dy) in [(1, 0), (n - 1, 0), (0, 1), (0, n - 1)] {
                stack.push(((cx + dx) % n, (cy + dy) % n));
            }
        }
        seen.len()
    }

    #[test]
    fn reference_40_6_threads() {
        let p = params(40, 6);
        let perm = construct_thm31(&p).unwrap();
        let td = build_threads(&perm, &p).unwrap();
        assert_eq!(td.warps.len(), 2);
        assert!(td.warps.iter().all(|w| w.len() == 20));
        assert_eq!(td.wefts.len(), 2);
        assert!(td.wefts.iter().all(|w| w.len() == 20));
        assert_eq!(td.orientation, Orientation::Clockwise);
        assert!(check_theorem26(&perm, &p).unwrap());
    }

    #[test]
    fn times_three_threads() {
        let p = params(14, 3);
        let perm = Permutation::from_fn(14, |x| 3 * x).unwrap();
        let td = build_threads(&perm, &p).unwrap();
        assert_eq!((td.warps.len(), td.warps[0].len()), (2, 7));
        assert_eq!((td.wefts.len(), td.wefts[0].len()), (1, 14));
        assert_eq!(orientation(&perm, &p).unwrap(), Orientation::Clockwise);
        assert_eq!(
            orientation(&perm.negate(), &p).unwrap(),
            Orientation::Anticlockwise
        );
        assert_eq!(
            build_threads(&perm.negate(), &p).unwrap().orientation,
            Orientation::Anticlockwise
        );
    }

    #[test]
    fn large_construction_threads() {
        let p = params(216, 21);
        let td = build_threads(&construct_thm31(&p).unwrap(), &p).unwrap();
        assert_eq!(td.warps.len(), 2);
        assert!(td.warps.iter().all(|w| w.len() == 108));
        assert_eq!(td.wefts.len(), 3);
        assert!(td.wefts.iter().all(|w| w.len() == 72));
        assert_eq!(td.delta(), inverse(&td.tau));
        assert_eq!(td.lambda(), inverse(&td.rho));
    }

    #[test]
    fn gaps_match_flood_fill() {
        for (n, k) in [(40, 6), (14, 3), (216, 21), (62, 12)] {
            let p = params(n, k);
            if p.require_lattice_regime().is_err() {
                continue;
            }
            let perm = construct_thm31(&p).unwrap();
            for variant in [perm.clone(), perm.negate()] {
                let pk = build_packing(&variant, p.s, p.k).unwrap();
                let td = build_threads(&variant, &p).unwrap();
                for g in &td.gaps {
                    assert_eq!(flood_fill_size(&pk, g.x, g.y) as u64, g.width * g.height);
                }
                let area: u64 = td.gaps.iter().map(|g| g.width * g.height).sum();
                assert_eq!(area, p.n * p.r);
            }
        }
    }

    #[test]
    fn jumper_gap_pattern() {
        let p = params(216, 21);
        let perm = jumper_to_perm(&Jumper::new(vec![3, 3], vec![1, 4, 1]), &p).unwrap();
        let td = build_threads(&perm, &p).unwrap();
        assert!(td.gaps.iter().all(|g| g.width == 3));
        assert!(td.gaps.iter().all(|g| g.height == 1 || g.height == 4));
        assert!(td.gaps.iter().any(|g| g.height == 4));
    }

    #[test]
    fn rejects_clashing_and_non_extremal() {
        let p = params(14, 3);
        assert!(matches!(
            build_threads(&Permutation::identity(14), &p),
            Err(Error::Structure {
                property: "clash-free",
                ..
            })
        ));
        assert!(matches!(
            orientation(&Permutation::identity(14), &p),
            Err(Error::Structure { .. })
        ));
        // k | n: r = k, outside the rigid regime
        let p = params(12, 3);
        assert!(matches!(
            build_threads(&Permutation::identity(12), &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn single_cycle_detection() {
        assert!(is_single_cycle(&[0]));
        assert!(is_single_cycle(&[1, 2, 0]));
        assert!(!is_single_cycle(&[1, 0, 2]));
        assert!(!is_single_cycle(&[0, 2, 1]));
    }
}
