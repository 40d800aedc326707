//! Permutations of `{0, .., n-1}` acting on the right.
//!
//! `p.then(&q)` is the product `pq` in right-action notation: first `p`, then `q`.

use std::fmt;

use crate::error::ParseError;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// Builds a permutation from its image array, rejecting non-bijections.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        Some(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_some());
        Permutation { images }
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Option<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n || touched[x] {
                    return None;
                }
                touched[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Some(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in product");
        Permutation { images: self.images.iter().map(|&x| other.images[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// Disjoint cycles of length at least two, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles
            .iter()
            .map(|c| {
                let body: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", body.join(" "))
            })
            .collect()
    }

    /// Parses cycle notation such as `(0 1 2)(3 4)` for a permutation of degree `n`.
    /// Entries may be separated by spaces or commas; `()` is the identity.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Self, ParseError> {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let Some(body_start) = rest.strip_prefix('(') else {
                return Err(ParseError::syntax(1, format!("expected '(' at {rest:?}")));
            };
            let Some(close) = body_start.find(')') else {
                return Err(ParseError::syntax(1, "unclosed cycle"));
            };
            let body = &body_start[..close];
            let mut cycle = Vec::new();
            for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                let x: usize = tok
                    .parse()
                    .map_err(|_| ParseError::syntax(1, format!("bad point {tok:?}")))?;
                if x >= n {
                    return Err(ParseError::OutOfRange { line: 1, vertex: x, n });
                }
                cycle.push(x);
            }
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = body_start[close + 1..].trim_start();
        }
        let refs: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
        Permutation::from_cycles(n, &refs)
            .ok_or_else(|| ParseError::syntax(1, "cycles are not disjoint"))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_is_right_action() {
        let p = Permutation::from_cycles(3, &[&[0, 1]]).unwrap();
        let q = Permutation::from_cycles(3, &[&[1, 2]]).unwrap();
        // 0 -p-> 1 -q-> 2
        assert_eq!(p.then(&q).apply(0), 2);
        assert!(p.then(&p.inverse()).is_identity());
    }

    #[test]
    fn cycle_notation_round_trip() {
        let p = Permutation::parse_cycles(6, "(0 3 1)(4,5)").unwrap();
        assert_eq!(p.to_cycle_string(), "(0 3 1)(4 5)");
        assert_eq!(Permutation::parse_cycles(6, &p.to_cycle_string()).unwrap(), p);
        assert!(Permutation::parse_cycles(3, "()").unwrap().is_identity());
    }

    #[test]
    fn rejects_bad_cycles() {
        assert!(Permutation::parse_cycles(3, "(0 1)(1 2)").is_err());
        assert!(Permutation::parse_cycles(3, "(0 5)").is_err());
        assert!(Permutation::parse_cycles(3, "0 1").is_err());
        assert!(Permutation::from_images(vec![0, 0]).is_none());
    }
}
