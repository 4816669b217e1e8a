//! Partitions, contents and hook lengths.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weakly decreasing sequence of positive integers; `[]` is the empty
/// partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|p| *p == 0) {
            return Err(Error::config(format!("partition {parts:?} has a zero part")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::config(format!("partition {parts:?} is not weakly decreasing")));
        }
        Ok(Self(parts))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// `|λ|`.
    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `l(λ)`.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Boxes `(i, j)`, 1-based, row by row.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (1..=p as usize).map(move |j| (i + 1, j)))
    }

    pub fn conjugate(&self) -> Self {
        let width = self.0.first().copied().unwrap_or(0);
        Self((1..=width).map(|j| self.0.iter().filter(|&&p| p >= j).count() as u32).collect())
    }

    /// Contents `j - i` of all boxes.
    pub fn contents(&self) -> Vec<i64> {
        self.boxes().map(|(i, j)| j as i64 - i as i64).collect()
    }

    /// `κ(λ) = 2 Σ (j - i)` over boxes.
    pub fn kappa(&self) -> i64 {
        2 * self.contents().iter().sum::<i64>()
    }

    /// `Σ λ_i (λ_i - 2i + 1)`.
    pub fn kappa_from_parts(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &p)| p as i64 * (p as i64 - 2 * (i as i64 + 1) + 1))
            .sum()
    }

    /// Hook length `arm + leg + 1` of every box.
    pub fn hooks(&self) -> BTreeMap<(usize, usize), u32> {
        let conj = self.conjugate();
        self.boxes()
            .map(|(i, j)| {
                let arm = self.0[i - 1] as usize - j;
                let leg = conj.0[j - 1] as usize - i;
                ((i, j), (arm + leg + 1) as u32)
            })
            .collect()
    }

    /// `Some((arm, leg))` iff `λ = (arm + 1, 1^leg)`; `∅` is not a hook.
    pub fn hook_shape(&self) -> Option<(u32, u32)> {
        let (&first, rest) = self.0.split_first()?;
        if rest.iter().all(|&p| p == 1) {
            Some((first - 1, rest.len() as u32))
        } else {
            None
        }
    }

    pub fn is_hook(&self) -> bool {
        self.hook_shape().is_some()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// All partitions of `n`, largest first part first.
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn rec(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if left == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=max.min(left)).rev() {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Every partition with `|λ| <= max_size`, ordered by size and then
/// lexicographically descending within a size.
pub fn enumerate(max_size: u32) -> Vec<Partition> {
    (0..=max_size).flat_map(partitions_of).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate(0), vec![Partition::empty()]);
        assert_eq!(enumerate(2), vec![Partition::empty(), p(&[1]), p(&[2]), p(&[1, 1])]);
        assert_eq!(enumerate(4).len(), 12);
    }

    #[test]
    fn enumeration_matches_partition_counts() {
        // p(n) via Euler's pentagonal recurrence, independent of the generator
        let mut pn = vec![1i64];
        for n in 1..=12i64 {
            let mut s = 0;
            let mut k = 1i64;
            loop {
                let g1 = k * (3 * k - 1) / 2;
                let g2 = k * (3 * k + 1) / 2;
                if g1 > n {
                    break;
                }
                let sign = if k % 2 == 1 { 1 } else { -1 };
                s += sign * pn[(n - g1) as usize];
                if g2 <= n {
                    s += sign * pn[(n - g2) as usize];
                }
                k += 1;
            }
            pn.push(s);
        }
        for n in 0..=12u32 {
            let parts = partitions_of(n);
            assert_eq!(parts.len() as i64, pn[n as usize], "n = {n}");
            let mut dedup = parts.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), parts.len());
            assert!(parts.iter().all(|l| l.size() == n));
        }
    }

    #[test]
    fn invalid_partitions_are_rejected() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(Partition::empty().kappa(), 0);
        assert_eq!(p(&[2, 1]).kappa(), 0);
        assert_eq!(p(&[3]).kappa(), 6);
    }

    #[test]
    fn kappa_routes_and_conjugation() {
        for l in enumerate(8) {
            assert_eq!(l.kappa(), l.kappa_from_parts(), "{l}");
            assert_eq!(l.kappa(), -l.conjugate().kappa(), "{l}");
            assert_eq!(l.conjugate().conjugate(), l);
        }
    }

    #[test]
    fn hook_examples() {
        let h = p(&[1]).hooks();
        assert_eq!(h, BTreeMap::from([((1, 1), 1)]));
        let h = p(&[2, 1]).hooks();
        assert_eq!(h, BTreeMap::from([((1, 1), 3), ((1, 2), 1), ((2, 1), 1)]));
        let h = p(&[2, 2]).hooks();
        assert_eq!(h, BTreeMap::from([((1, 1), 3), ((1, 2), 2), ((2, 1), 2), ((2, 2), 1)]));
    }

    #[test]
    fn hooks_are_conjugation_invariant() {
        for l in enumerate(8) {
            let mut a: Vec<u32> = l.hooks().into_values().collect();
            let mut b: Vec<u32> = l.conjugate().hooks().into_values().collect();
            assert_eq!(a.len() as u32, l.size());
            a.sort();
            b.sort();
            assert_eq!(a, b, "{l}");
        }
    }

    #[test]
    fn hook_shapes() {
        assert_eq!(p(&[3, 1, 1]).hook_shape(), Some((2, 2)));
        assert_eq!(p(&[2, 2]).hook_shape(), None);
        assert_eq!(Partition::empty().hook_shape(), None);
        assert_eq!(p(&[1, 1, 1]).hook_shape(), Some((0, 2)));
    }
}
