//! Bijections of `Z_n` stored by their image sequence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MAX_MODULUS;

/// A permutation `π` of `Z_n`, with `images[x] = π(x)`.
///
/// Construction validates bijectivity; a `Permutation` value is always a
/// bijection of `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u64>,
}

/// JSON shape `{"n": …, "images": […]}`.
#[derive(Debug, Serialize, Deserialize)]
struct PermutationJson {
    n: u64,
    images: Vec<u64>,
}

impl Permutation {
    pub fn from_images(images: Vec<u64>) -> Result<Self> {
        let n = images.len() as u64;
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image sequence".into()));
        }
        if n > MAX_MODULUS {
            return Err(Error::InvalidPermutation(format!("n = {n} too large")));
        }
        let mut seen = vec![false; images.len()];
        for (x, &y) in images.iter().enumerate() {
            if y >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {y} of {x} is not a residue mod {n}"
                )));
            }
            if std::mem::replace(&mut seen[y as usize], true) {
                return Err(Error::InvalidPermutation(format!(
                    "residue {y} appears more than once"
                )));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: u64) -> Self {
        assert!(n >= 1, "identity needs n >= 1");
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds `x ↦ f(x) mod n` and validates the result.
    pub fn from_fn(n: u64, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::from_images((0..n).map(|x| f(x) % n).collect())
    }

    /// Skips validation; callers guarantee bijectivity.
    pub(crate) fn from_images_unchecked(images: Vec<u64>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Permutation { images }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.images.len() as u64
    }

    #[inline]
    pub fn image(&self, x: u64) -> u64 {
        self.images[(x % self.n()) as usize]
    }

    pub fn images(&self) -> &[u64] {
        &self.images
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0u64; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u64;
        }
        Permutation { images: inv }
    }

    /// `x ↦ −π(x) mod n`.
    pub fn negate(&self) -> Permutation {
        let n = self.n();
        Permutation {
            images: self.images.iter().map(|&y| (n - y) % n).collect(),
        }
    }

    /// `x ↦ π(x) + delta mod n`.
    pub fn shift_images(&self, delta: u64) -> Permutation {
        let n = self.n();
        let delta = delta % n;
        Permutation {
            images: self.images.iter().map(|&y| (y + delta) % n).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PermutationJson {
            n: self.n(),
            images: self.images.clone(),
        })
        .expect("serializing integers cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PermutationJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.n != raw.images.len() as u64 {
            return Err(Error::Parse(format!(
                "n = {} but {} images given",
                raw.n,
                raw.images.len()
            )));
        }
        Self::from_images(raw.images)
    }

    /// Parses either the line format `n: v0,v1,…` or the JSON object form.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return Self::from_json(text);
        }
        let (head, body) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse("expected `n: v0,v1,...`".into()))?;
        let n: u64 = head
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus `{}`", head.trim())))?;
        let images = body
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad residue `{}`", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if images.len() as u64 != n {
            return Err(Error::Parse(format!(
                "n = {n} but {} images given",
                images.len()
            )));
        }
        Self::from_images(images)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.n())?;
        for (x, y) in self.images.iter().enumerate() {
            if x > 0 {
                f.write_str(",")?;
            }
            write!(f, "{y}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Permutation::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: `π⁻¹(y)` is the position of `y` in the image list.
    fn invert_by_scan(p: &[u64]) -> Vec<u64> {
        (0..p.len() as u64)
            .map(|y| p.iter().position(|&v| v == y).unwrap() as u64)
            .collect()
    }

    fn perm_strategy() -> impl Strategy<Value = Vec<u64>> {
        (1usize..60).prop_flat_map(|n| Just((0..n as u64).collect::<Vec<_>>()).prop_shuffle())
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_images(vec![]).is_err());
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_images(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn invert_examples() {
        let id = Permutation::identity(5);
        assert_eq!(id.invert(), id);

        let p = vec![0, 3, 6, 9, 12, 1, 4, 7, 10, 13, 2, 5, 8, 11];
        let expected = invert_by_scan(&p);
        assert_eq!(expected, vec![0, 5, 10, 1, 6, 11, 2, 7, 12, 3, 8, 13, 4, 9]);
        assert_eq!(
            Permutation::from_images(p).unwrap().invert().images(),
            &expected[..]
        );

        let p = vec![0, 2, 4, 1, 3];
        assert_eq!(invert_by_scan(&p), vec![0, 3, 1, 4, 2]);
        assert_eq!(
            Permutation::from_images(p).unwrap().invert().images(),
            &[0, 3, 1, 4, 2]
        );
    }

    #[test]
    fn negate_examples() {
        assert_eq!(Permutation::identity(4).negate().images(), &[0, 3, 2, 1]);
        let p = Permutation::from_fn(40, |x| x).unwrap();
        assert_eq!(p.negate().negate(), p);
    }

    #[test]
    fn text_format() {
        let p = Permutation::from_images(vec![0, 2, 4, 1, 3]).unwrap();
        assert_eq!(p.to_string(), "5: 0,2,4,1,3");
        assert_eq!("5: 0, 2,4,1,3\n".parse::<Permutation>().unwrap(), p);
        assert_eq!(p.to_json(), r#"{"n":5,"images":[0,2,4,1,3]}"#);
        assert_eq!(Permutation::parse(&p.to_json()).unwrap(), p);
        assert!(Permutation::parse("4: 0,1,2").is_err());
        assert!(Permutation::parse(r#"{"n":3,"images":[0,1]}"#).is_err());
        assert!(Permutation::parse("0,1,2").is_err());
    }

    proptest! {
        #[test]
        fn invert_negate_involutions(images in perm_strategy()) {
            let p = Permutation::from_images(images.clone()).unwrap();
            prop_assert_eq!(p.invert().images().to_vec(), invert_by_scan(&images));
            prop_assert_eq!(p.invert().invert(), p.clone());
            prop_assert_eq!(p.negate().negate(), p.clone());
            prop_assert!(Permutation::from_images(p.negate().images().to_vec()).is_ok());
            prop_assert_eq!(Permutation::parse(&p.to_string()).unwrap(), p);
        }
    }
}
