//! Canonical r-sets and their colex ranks.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Vertex identifier; vertices of an `n`-vertex structure are `0..n`.
pub type Vertex = u32;

/// A strictly increasing tuple of vertices. Used both for hyperedges and for
/// candidate cliques; equality is sequence equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RSet(SmallVec<[Vertex; 8]>);

impl RSet {
    /// Builds an r-set from arbitrary vertices, sorting them. Fails on
    /// repeated vertices or vertices `>= n`.
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, n: usize) -> Result<Self> {
        let mut v: SmallVec<[Vertex; 8]> = vertices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams(format!("repeated vertex in {v:?}")));
        }
        if let Some(&last) = v.last() {
            if last as usize >= n {
                return Err(Error::InvalidParams(format!("vertex {last} out of range 0..{n}")));
            }
        }
        Ok(RSet(v))
    }

    /// Caller guarantees `v` is strictly increasing.
    pub(crate) fn from_sorted(v: SmallVec<[Vertex; 8]>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        RSet(v)
    }

    pub fn from_slice_sorted(v: &[Vertex]) -> Self {
        Self::from_sorted(SmallVec::from_slice(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn intersection_size(&self, other: &RSet) -> usize {
        let (mut i, mut j, mut c) = (0, 0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }

    /// All unordered vertex pairs `(x, y)` with `x < y`.
    pub fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        let v = &self.0;
        (0..v.len()).flat_map(move |i| (i + 1..v.len()).map(move |j| (v[i], v[j])))
    }
}

impl fmt::Debug for RSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for RSet {
    /// Space-separated vertex ids, the hypergraph text format's edge line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Exact binomial coefficient as `u128`, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Falling factorial `n (n-1) ... (n-k+1)`, `None` on overflow.
pub fn falling_factorial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    (0..k).try_fold(1u128, |acc, i| acc.checked_mul((n - i) as u128))
}

pub fn factorial(k: u64) -> Option<u128> {
    falling_factorial(k, k)
}

/// Colex ranking of `r`-subsets of `0..n` onto `0..C(n, r)`.
#[derive(Clone, Debug)]
pub struct Ranker {
    n: usize,
    r: usize,
    /// `table[k][a] = C(a, k)` for `k <= r`, `a <= n`.
    table: Vec<Vec<u64>>,
    total: u64,
}

impl Ranker {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        let total =
            binomial(n as u64, r as u64).and_then(|c| u64::try_from(c).ok()).ok_or(Error::Overflow("C(n, r)"))?;
        let mut table = vec![vec![0u64; n + 1]; r + 1];
        for (k, row) in table.iter_mut().enumerate() {
            for (a, cell) in row.iter_mut().enumerate() {
                *cell = binomial(a as u64, k as u64)
                    .and_then(|c| u64::try_from(c).ok())
                    .ok_or(Error::Overflow("binomial table"))?;
            }
        }
        Ok(Ranker { n, r, table, total })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `C(n, r)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn rank(&self, s: &[Vertex]) -> u64 {
        debug_assert_eq!(s.len(), self.r);
        s.iter().enumerate().map(|(i, &x)| self.table[i + 1][x as usize]).sum()
    }

    pub fn unrank(&self, mut rank: u64) -> RSet {
        let mut out: SmallVec<[Vertex; 8]> = SmallVec::from_elem(0, self.r);
        let mut hi = self.n;
        for k in (1..=self.r).rev() {
            // largest x < hi with C(x, k) <= rank
            let row = &self.table[k];
            let x = row[..hi].partition_point(|&c| c <= rank) - 1;
            out[k - 1] = x as Vertex;
            rank -= row[x];
            hi = x;
        }
        RSet::from_sorted(out)
    }
}

/// Calls `f` with every `k`-subset of `items` (in lexicographic position order).
pub fn for_each_subset<T: Copy>(items: &[T], k: usize, mut f: impl FnMut(&[T])) {
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, buf: &mut Vec<T>, f: &mut impl FnMut(&[T])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let need = k - buf.len();
        for i in start..=items.len().saturating_sub(need) {
            if items.len() < need {
                break;
            }
            buf.push(items[i]);
            rec(items, k, i + 1, buf, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(k);
    rec(items, k, 0, &mut buf, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rset_is_canonical() {
        let a = RSet::new([3, 1, 2], 5).unwrap();
        let b = RSet::new([1, 2, 3], 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vertices(), &[1, 2, 3]);
        assert!(RSet::new([1, 1, 2], 5).is_err());
        assert!(RSet::new([1, 2, 5], 5).is_err());
        assert_eq!(a.to_string(), "1 2 3");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), Some(20));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(falling_factorial(7, 3), Some(210));
        assert_eq!(factorial(5), Some(120));
    }

    #[test]
    fn subsets_enumeration() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        let mut empty = 0;
        for_each_subset(&[1, 2], 3, |_| empty += 1);
        assert_eq!(empty, 0);
        let mut zero = 0;
        for_each_subset::<u32>(&[], 0, |_| zero += 1);
        assert_eq!(zero, 1);
    }

    #[test]
    fn rank_is_a_bijection_small() {
        let rk = Ranker::new(9, 4).unwrap();
        let mut seen = vec![false; rk.total() as usize];
        let all: Vec<u32> = (0..9).collect();
        for_each_subset(&all, 4, |s| {
            let r = rk.rank(s);
            assert!(!seen[r as usize]);
            seen[r as usize] = true;
            assert_eq!(rk.unrank(r).vertices(), s);
        });
        assert!(seen.into_iter().all(|b| b));
    }

    proptest! {
        #[test]
        fn unrank_rank_roundtrip(n in 5usize..60, r in 3usize..6, seed in any::<u64>()) {
            prop_assume!(r <= n);
            let rk = Ranker::new(n, r).unwrap();
            let idx = seed % rk.total();
            let s = rk.unrank(idx);
            prop_assert_eq!(s.len(), r);
            prop_assert_eq!(rk.rank(s.vertices()), idx);
        }
    }
}
