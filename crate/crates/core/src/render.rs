//! ASCII and SVG pictures of the rectangle packing of a permutation.
//!
//! Both renderings use the cartesian convention: cell `(0, 0)` sits in the
//! lower-left corner. Rectangles crossing the torus edge are cut into
//! fragments.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::params::{check_width_height, Params};
use crate::permutation::Permutation;
use crate::threads::build_threads;

pub const MAX_ASCII_SIDE: u64 = 200;
pub const MAX_SVG_SIDE: u64 = 1000;

/// Covered-cell mask, row-major with row `y` at `y * n`. Overlaps are allowed.
fn coverage(p: &Permutation, s: u64, k: u64) -> Vec<bool> {
    let n = p.n() as usize;
    let mut grid = vec![false; n * n];
    for (x, &y) in p.images().iter().enumerate() {
        for dy in 0..k as usize {
            let row = (y as usize + dy) % n;
            for dx in 0..s as usize {
                grid[row * n + (x + dx) % n] = true;
            }
        }
    }
    grid
}

fn check_size(n: u64, max: u64) -> Result<()> {
    if n > max {
        return Err(Error::SizeLimit(format!(
            "rendering supports n <= {max}, got {n}"
        )));
    }
    Ok(())
}

/// `n` lines of `n` glyphs, top row first: `@` dot, `#` covered, `.` free.
pub fn render_ascii(p: &Permutation, s: u64, k: u64) -> Result<String> {
    let n = p.n();
    check_width_height(n, s, k)?;
    check_size(n, MAX_ASCII_SIDE)?;
    let grid = coverage(p, s, k);
    let inv = p.invert();
    let nu = n as usize;
    let mut out = String::with_capacity(nu * (nu + 1));
    for y in (0..n).rev() {
        let dot_x = inv.image(y);
        for x in 0..n {
            out.push(if x == dot_x {
                '@'
            } else if grid[y as usize * nu + x as usize] {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvgOptions {
    /// Side of one cell in SVG user units.
    pub cell: u32,
    /// Colour rectangles by their (warp, weft) position within a block and
    /// outline the gaps, when the packing has thread structure.
    pub highlight_blocks: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            cell: 10,
            highlight_blocks: false,
        }
    }
}

/// Splits `[start, start + len)` on the torus edge into at most two spans.
fn spans(start: u64, len: u64, n: u64) -> Vec<(u64, u64)> {
    if start + len <= n {
        vec![(start, len)]
    } else {
        vec![(start, n - start), (0, start + len - n)]
    }
}

/// Block colouring and gap outlines derived from the thread structure.
struct Highlight {
    /// Per rectangle, index of its class in `0..d_s*d_k`.
    class: Vec<usize>,
    classes: usize,
    gaps: Vec<(u64, u64, u64, u64)>,
}

fn highlight(p: &Permutation, s: u64, k: u64) -> Option<Highlight> {
    let params = Params::derive(p.n(), k).ok()?;
    if params.s != s {
        return None;
    }
    let td = build_threads(p, &params).ok()?;
    // positions along the tau and rho orbits, anchored at R_0
    let orbit_index = |map: &[usize], start: usize| {
        let mut pos = vec![0usize; map.len()];
        let mut t = start;
        for (i, _) in map.iter().enumerate() {
            pos[t] = i;
            t = map[t];
        }
        pos
    };
    let warp_pos = orbit_index(&td.tau, td.warp_of[0]);
    let weft_pos = orbit_index(&td.rho, td.weft_of[0]);
    let d_k = td.rho.len();
    let class = (0..p.n() as usize)
        .map(|x| warp_pos[td.warp_of[x]] * d_k + weft_pos[td.weft_of[x]])
        .collect();
    Some(Highlight {
        class,
        classes: td.tau.len() * d_k,
        gaps: td
            .gaps
            .iter()
            .map(|g| (g.x, g.y, g.width, g.height))
            .collect(),
    })
}

/// SVG document with one `rect` per torus-clipped rectangle fragment and one
/// `circle` per dot. Fragments of the same rectangle share `data-rect`.
pub fn render_svg(p: &Permutation, s: u64, k: u64, options: &SvgOptions) -> Result<String> {
    let n = p.n();
    check_width_height(n, s, k)?;
    check_size(n, MAX_SVG_SIDE)?;
    if options.cell == 0 {
        return Err(Error::ParamDomain("cell size must be positive".into()));
    }
    let c = options.cell as u64;
    let side = n * c;
    let hl = if options.highlight_blocks {
        highlight(p, s, k)
    } else {
        None
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{side}" height="{side}" fill="white" stroke="black"/>"#
    );

    // flip y so that row 0 is at the bottom
    let place = |x: u64, y: u64, w: u64, h: u64| (x * c, (n - y - h) * c, w * c, h * c);

    out.push_str("<g id=\"rectangles\" stroke=\"black\" stroke-width=\"0.5\">\n");
    for (x, &y) in p.images().iter().enumerate() {
        let fill = match &hl {
            Some(h) => {
                let hue = h.class[x] * 360 / h.classes.max(1);
                format!("hsl({hue},60%,70%)")
            }
            None => "#bbbbbb".to_string(),
        };
        for (cx, w) in spans(x as u64, s, n) {
            for (cy, h) in spans(y, k, n) {
                let (px, py, pw, ph) = place(cx, cy, w, h);
                let _ = writeln!(
                    out,
                    r#"<rect data-rect="{x}" x="{px}" y="{py}" width="{pw}" height="{ph}" fill="{fill}"/>"#
                );
            }
        }
    }
    out.push_str("</g>\n");

    if let Some(h) = &hl {
        out.push_str("<g id=\"gaps\" fill=\"none\" stroke=\"red\" stroke-dasharray=\"2,2\">\n");
        for (owner, &(gx, gy, gw, gh)) in h.gaps.iter().enumerate() {
            for (cx, w) in spans(gx, gw, n) {
                for (cy, hh) in spans(gy, gh, n) {
                    let (px, py, pw, ph) = place(cx, cy, w, hh);
                    let _ = writeln!(
                        out,
                        r#"<rect data-gap="{owner}" x="{px}" y="{py}" width="{pw}" height="{ph}"/>"#
                    );
                }
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g id=\"dots\" fill=\"black\">\n");
    let half = c as f64 / 2.0;
    let radius = (c as f64 / 3.0).max(0.5);
    for (x, &y) in p.images().iter().enumerate() {
        let (px, py, _, _) = place(x as u64, y, 1, 1);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="{radius:.1}"/>"#,
            px as f64 + half,
            py as f64 + half
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::construct_thm31;

    fn census(text: &str) -> (usize, usize, usize) {
        let count = |g| text.chars().filter(|&c| c == g).count();
        (count('@'), count('#'), count('.'))
    }

    #[test]
    fn tiny_identity() {
        let id = Permutation::identity(2);
        let art = render_ascii(&id, 1, 1).unwrap();
        assert_eq!(art, ".@\n@.\n");
        let svg = render_svg(&id, 1, 1, &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches("data-rect=").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn reference_40_6_census() {
        let p = construct_thm31(&Params::derive(40, 6).unwrap()).unwrap();
        let art = render_ascii(&p, 6, 6).unwrap();
        assert_eq!(census(&art), (40, 1400, 160));
        for line in art.lines() {
            assert_eq!(line.len(), 40);
            assert_eq!(line.chars().filter(|&c| c == '.').count(), 4);
        }
        // R_0 anchors the bottom-left corner
        assert!(art.lines().last().unwrap().starts_with('@'));
    }

    #[test]
    fn wrapping_fragments() {
        // R_4 at (4, 4) on Z_5 wraps both ways into four fragments
        let id = Permutation::identity(5);
        let svg = render_svg(&id, 2, 2, &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches(r#"data-rect="4""#).count(), 4);
        assert_eq!(svg.matches(r#"data-rect="0""#).count(), 1);
    }

    #[test]
    fn highlight_adds_gaps() {
        let p = construct_thm31(&Params::derive(40, 6).unwrap()).unwrap();
        let opts = SvgOptions {
            cell: 8,
            highlight_blocks: true,
        };
        let svg = render_svg(&p, 6, 6, &opts).unwrap();
        assert!(svg.contains("data-gap=\"39\""));
        assert!(svg.contains("hsl("));
        // no structure to highlight: falls back to plain fill
        let plain = render_svg(&Permutation::identity(10), 2, 2, &opts).unwrap();
        assert!(!plain.contains("data-gap"));
    }

    #[test]
    fn size_limits() {
        let big = Permutation::identity(201);
        assert!(matches!(render_ascii(&big, 1, 1), Err(Error::SizeLimit(_))));
        let big = Permutation::identity(1001);
        assert!(matches!(
            render_svg(&big, 1, 1, &SvgOptions::default()),
            Err(Error::SizeLimit(_))
        ));
    }
}
