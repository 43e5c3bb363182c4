//! Linear r-uniform hypergraphs, their host graphs, loose paths and linear girth.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rset::{RSet, Vertex};

const UNCOVERED: u32 = u32::MAX;

/// The evolving hypergraph `H(i)`: an edge list with per-vertex incidence and a
/// pair index that enforces linearity.
#[derive(Clone, Debug)]
pub struct LinearHypergraph {
    n: usize,
    r: usize,
    edges: Vec<RSet>,
    incidence: Vec<Vec<usize>>,
    /// Dense `n * n` table indexed by `x * n + y` for `x < y`.
    pair_cover: Vec<u32>,
    covered: usize,
}

impl LinearHypergraph {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r < 3 || n < r {
            return Err(Error::InvalidParams(format!("need n >= r >= 3, got n={n}, r={r}")));
        }
        if n >= UNCOVERED as usize {
            return Err(Error::InvalidParams(format!("n={n} too large")));
        }
        Ok(LinearHypergraph {
            n,
            r,
            edges: Vec::new(),
            incidence: vec![Vec::new(); n],
            pair_cover: vec![UNCOVERED; n * n],
            covered: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> &[RSet] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &RSet {
        &self.edges[idx]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Indices of edges containing `x`.
    pub fn incident(&self, x: Vertex) -> &[usize] {
        &self.incidence[x as usize]
    }

    pub fn degree(&self, x: Vertex) -> usize {
        self.incidence[x as usize].len()
    }

    #[inline]
    fn pair_slot(&self, x: Vertex, y: Vertex) -> usize {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        a as usize * self.n + b as usize
    }

    /// Index of the edge covering `{x, y}`, if any.
    pub fn pair_edge(&self, x: Vertex, y: Vertex) -> Option<usize> {
        match self.pair_cover[self.pair_slot(x, y)] {
            UNCOVERED => None,
            e => Some(e as usize),
        }
    }

    pub fn is_covered(&self, x: Vertex, y: Vertex) -> bool {
        self.pair_edge(x, y).is_some()
    }

    /// Number of covered vertex pairs; equals `C(r,2) * |edges|`.
    pub fn covered_pair_count(&self) -> usize {
        self.covered
    }

    pub fn contains_edge(&self, f: &RSet) -> bool {
        let v = f.vertices();
        v.len() == self.r && self.pair_edge(v[0], v[1]).is_some_and(|e| self.edges[e] == *f)
    }

    fn check_rset(&self, f: &RSet) -> Result<()> {
        if f.len() != self.r {
            return Err(Error::InvalidParams(format!("{f:?} is not an {}-set", self.r)));
        }
        if f.vertices().iter().any(|&x| x as usize >= self.n) {
            return Err(Error::InvalidParams(format!("{f:?} has a vertex outside 0..{}", self.n)));
        }
        Ok(())
    }

    /// Appends `f` as a new edge. Fails if any pair of `f` is already covered.
    pub fn add_edge(&mut self, f: RSet) -> Result<usize> {
        self.check_rset(&f)?;
        for (x, y) in f.pairs() {
            if let Some(e) = self.pair_edge(x, y) {
                return Err(Error::LinearityViolation(x, y, e));
            }
        }
        let idx = self.edges.len();
        for (x, y) in f.pairs() {
            let slot = self.pair_slot(x, y);
            self.pair_cover[slot] = idx as u32;
            self.covered += 1;
        }
        for &x in f.vertices() {
            self.incidence[x as usize].push(idx);
        }
        self.edges.push(f);
        Ok(idx)
    }

    /// Removes the edge at `idx`; the last edge takes its index.
    pub fn remove_edge(&mut self, idx: usize) -> RSet {
        let last = self.edges.len() - 1;
        let f = self.edges.swap_remove(idx);
        for (x, y) in f.pairs() {
            let slot = self.pair_slot(x, y);
            self.pair_cover[slot] = UNCOVERED;
            self.covered -= 1;
        }
        for &x in f.vertices() {
            self.incidence[x as usize].retain(|&e| e != idx);
        }
        if idx != last {
            let moved = self.edges[idx].clone();
            for (x, y) in moved.pairs() {
                let slot = self.pair_slot(x, y);
                self.pair_cover[slot] = idx as u32;
            }
            for &x in moved.vertices() {
                for e in self.incidence[x as usize].iter_mut() {
                    if *e == last {
                        *e = idx;
                    }
                }
            }
        }
        f
    }

    /// Parses the hypergraph text format: a header `n r`, then one edge per line.
    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let nums = parse_numbers(header)?;
        if nums.len() != 2 {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let mut h = LinearHypergraph::new(nums[0] as usize, nums[1] as usize)?;
        for line in lines {
            let v = parse_numbers(line)?;
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse(format!("edge not strictly increasing: {line:?}")));
            }
            let f = RSet::new(v, h.n)?;
            h.add_edge(f)?;
        }
        Ok(h)
    }

    /// Writes the hypergraph text format (newline-terminated lines, single spaces).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.r).unwrap();
        for e in &self.edges {
            writeln!(out, "{e}").unwrap();
        }
        out
    }

    /// Edge list scan for the linearity invariant; independent of `pair_cover`.
    pub fn is_linear_by_scan(&self) -> bool {
        self.edges.iter().enumerate().all(|(i, a)| self.edges[i + 1..].iter().all(|b| a.intersection_size(b) <= 1))
    }
}

fn parse_numbers(line: &str) -> Result<Vec<u32>> {
    line.split(' ')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

/// The host graph `G(i)`: pairs covered by no hyperedge. Rows are bitsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: usize,
}

impl HostGraph {
    pub fn complete(n: usize) -> Self {
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    rows[x * words + y / 64] |= 1 << (y % 64);
                }
            }
        }
        HostGraph { n, words, rows, edge_count: n * n.saturating_sub(1) / 2 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn adjacent(&self, x: Vertex, y: Vertex) -> bool {
        let (x, y) = (x as usize, y as usize);
        self.rows[x * self.words + y / 64] >> (y % 64) & 1 == 1
    }

    pub fn row(&self, x: Vertex) -> &[u64] {
        let x = x as usize;
        &self.rows[x * self.words..(x + 1) * self.words]
    }

    fn clear(&mut self, x: Vertex, y: Vertex) {
        let (xu, yu) = (x as usize, y as usize);
        if self.adjacent(x, y) {
            self.rows[xu * self.words + yu / 64] &= !(1 << (yu % 64));
            self.rows[yu * self.words + xu / 64] &= !(1 << (xu % 64));
            self.edge_count -= 1;
        }
    }

    /// Deletes all pairs of `f` from the graph.
    pub fn remove_clique(&mut self, f: &RSet) {
        for (x, y) in f.pairs() {
            self.clear(x, y);
        }
    }

    /// Re-inserts all pairs of `f`; the inverse of [`HostGraph::remove_clique`]
    /// when those pairs were present before.
    pub(crate) fn restore_clique(&mut self, f: &RSet) {
        for (x, y) in f.pairs() {
            let (xu, yu) = (x as usize, y as usize);
            if !self.adjacent(x, y) {
                self.rows[xu * self.words + yu / 64] |= 1 << (yu % 64);
                self.rows[yu * self.words + xu / 64] |= 1 << (xu % 64);
                self.edge_count += 1;
            }
        }
    }

    pub fn is_clique(&self, s: &[Vertex]) -> bool {
        s.iter().enumerate().all(|(i, &x)| s[i + 1..].iter().all(|&y| self.adjacent(x, y)))
    }

    /// Common neighbourhood of all vertices in `s`, ascending.
    pub fn common_neighbors(&self, s: &[Vertex]) -> Vec<Vertex> {
        let mut acc: Vec<u64> = match s.first() {
            Some(&x) => self.row(x).to_vec(),
            None => {
                let mut all = vec![u64::MAX; self.words];
                if !self.n.is_multiple_of(64) {
                    all[self.words - 1] = (1u64 << (self.n % 64)) - 1;
                }
                all
            }
        };
        for &x in s.iter().skip(1) {
            for (a, b) in acc.iter_mut().zip(self.row(x)) {
                *a &= b;
            }
        }
        bits_to_vec(&acc)
    }

    /// All adjacent pairs `(x, y)`, `x < y`.
    pub fn pairs(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for x in 0..self.n as Vertex {
            for y in bits_to_vec(self.row(x)) {
                if y > x {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

pub(crate) fn bits_to_vec(words: &[u64]) -> Vec<Vertex> {
    let mut out = Vec::new();
    for (w, &bits) in words.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            let t = b.trailing_zeros();
            out.push((w * 64) as Vertex + t);
            b &= b - 1;
        }
    }
    out
}

/// Host graph determined by `h`: the complete graph minus every covered pair.
pub fn host_graph(h: &LinearHypergraph) -> HostGraph {
    let mut g = HostGraph::complete(h.n());
    for e in h.edges() {
        g.remove_clique(e);
    }
    g
}

/// Linear girth relative to a search cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn is_infinite(self) -> bool {
        self == Girth::Infinite
    }
}

/// A loose path given by edge indices into the hypergraph, ordered from the
/// start vertex to the end vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPath {
    pub edges: Vec<usize>,
}

/// Walks every loose path from `u` to `v` with length in `min_len..=max_len`.
///
/// A path is a sequence of distinct edges `e_1..e_s` with `u` in `e_1` only, `v` in
/// `e_s` only, consecutive edges meeting in exactly one vertex and non-consecutive
/// edges disjoint. Vertices in `avoid` may not appear on the path (other than `u`
/// and `v`), and edge `skip` is treated as absent.
#[allow(clippy::too_many_arguments)]
pub fn visit_linear_paths<B>(
    h: &LinearHypergraph,
    u: Vertex,
    v: Vertex,
    min_len: usize,
    max_len: usize,
    avoid: &[Vertex],
    skip: Option<usize>,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> Option<B> {
    if u == v || min_len == 0 || min_len > max_len {
        return None;
    }
    let mut path = Vec::with_capacity(max_len);
    let mut used: Vec<Vertex> = Vec::with_capacity(max_len * h.r() + 1);
    struct Ctx<'a> {
        h: &'a LinearHypergraph,
        v: Vertex,
        min_len: usize,
        max_len: usize,
        avoid: &'a [Vertex],
        skip: Option<usize>,
    }
    fn edge_ok(ctx: &Ctx<'_>, e: &RSet, junction: Vertex, used: &[Vertex]) -> bool {
        e.vertices().iter().all(|&x| x == junction || (!used.contains(&x) && (x == ctx.v || !ctx.avoid.contains(&x))))
    }
    fn rec<B>(
        ctx: &Ctx<'_>,
        junction: Vertex,
        path: &mut Vec<usize>,
        used: &mut Vec<Vertex>,
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        for &ei in ctx.h.incident(junction) {
            if Some(ei) == ctx.skip || path.contains(&ei) {
                continue;
            }
            let e = ctx.h.edge(ei);
            if !edge_ok(ctx, e, junction, used) {
                continue;
            }
            path.push(ei);
            if e.contains(ctx.v) {
                if path.len() >= ctx.min_len {
                    visit(path)?;
                }
            } else if path.len() < ctx.max_len {
                let mark = used.len();
                used.extend(e.vertices().iter().copied().filter(|&x| x != junction));
                for &w in e.vertices() {
                    if w != junction {
                        rec(ctx, w, path, used, visit)?;
                    }
                }
                used.truncate(mark);
            }
            path.pop();
        }
        ControlFlow::Continue(())
    }
    let ctx = Ctx { h, v, min_len, max_len, avoid, skip };
    used.push(u);
    match rec(&ctx, u, &mut path, &mut used, &mut visit) {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    }
}

/// Every loose path from `u` to `v` with length in `min_len..=max_len` avoiding
/// `avoid`. Each path is reported once, oriented from `u` to `v`.
pub fn find_linear_paths(
    h: &LinearHypergraph,
    u: Vertex,
    v: Vertex,
    min_len: usize,
    max_len: usize,
    avoid: &[Vertex],
) -> Vec<LinearPath> {
    find_linear_paths_skipping(h, u, v, min_len, max_len, avoid, None)
}

/// As [`find_linear_paths`] in `h` with the edge `skip` removed.
pub fn find_linear_paths_skipping(
    h: &LinearHypergraph,
    u: Vertex,
    v: Vertex,
    min_len: usize,
    max_len: usize,
    avoid: &[Vertex],
    skip: Option<usize>,
) -> Vec<LinearPath> {
    let mut out = Vec::new();
    visit_linear_paths::<()>(h, u, v, min_len, max_len, avoid, skip, |p| {
        out.push(LinearPath { edges: p.to_vec() });
        ControlFlow::Continue(())
    });
    out
}

/// Whether some loose path of length in `min_len..=max_len` joins `u` and `v`.
pub fn has_linear_path(
    h: &LinearHypergraph,
    u: Vertex,
    v: Vertex,
    min_len: usize,
    max_len: usize,
    avoid: &[Vertex],
    skip: Option<usize>,
) -> bool {
    visit_linear_paths(h, u, v, min_len, max_len, avoid, skip, |_| ControlFlow::Break(())).is_some()
}

fn shortest_closure(h: &LinearHypergraph, idx: usize, max_len: usize) -> Option<usize> {
    let f = h.edge(idx).vertices();
    let mut best: Option<usize> = None;
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            let upper = best.map_or(max_len, |b| b - 1);
            if upper < 2 {
                return best;
            }
            let avoid: Vec<Vertex> = f.iter().copied().filter(|&x| x != f[i] && x != f[j]).collect();
            visit_linear_paths::<()>(h, f[i], f[j], 2, upper, &avoid, Some(idx), |p| {
                if best.is_none_or(|b| p.len() < b) {
                    best = Some(p.len());
                }
                ControlFlow::Continue(())
            });
        }
    }
    best
}

/// Smallest `j` in `3..=cap` such that `h` contains a linear cycle of length `j`.
pub fn linear_girth(h: &LinearHypergraph, cap: usize) -> Girth {
    if cap < 3 {
        return Girth::Infinite;
    }
    let mut best: Option<usize> = None;
    for idx in 0..h.len() {
        let limit = best.map_or(cap - 1, |b| b - 2);
        if limit < 2 {
            break;
        }
        if let Some(len) = shortest_closure(h, idx, limit) {
            best = Some(len + 1);
        }
    }
    best.map_or(Girth::Infinite, Girth::Finite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(v: &[u32], n: usize) -> RSet {
        RSet::new(v.iter().copied(), n).unwrap()
    }

    pub(crate) fn loose_cycle(len: usize, r: usize) -> LinearHypergraph {
        let n = (r - 1) * len;
        let mut h = LinearHypergraph::new(n, r).unwrap();
        for i in 0..len {
            let start = (i * (r - 1)) as u32;
            let mut v: Vec<u32> = (start..start + r as u32 - 1).collect();
            v.push((((i + 1) % len) * (r - 1)) as u32);
            h.add_edge(rs(&v, n)).unwrap();
        }
        h
    }

    #[test]
    fn new_hypergraph_examples() {
        let h = LinearHypergraph::new(6, 3).unwrap();
        assert!(h.is_empty());
        assert_eq!(host_graph(&h).edge_count(), 15);
        let h = LinearHypergraph::new(10, 4).unwrap();
        assert_eq!(host_graph(&h).edge_count(), 45);
        assert!(matches!(LinearHypergraph::new(2, 3), Err(Error::InvalidParams(_))));
        assert!(matches!(LinearHypergraph::new(5, 2), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn add_edge_examples() {
        let mut h = LinearHypergraph::new(8, 3).unwrap();
        h.add_edge(rs(&[1, 2, 3], 8)).unwrap();
        assert!(h.is_covered(1, 2) && h.is_covered(1, 3) && h.is_covered(2, 3));
        assert_eq!(h.covered_pair_count(), 3);
        assert!(matches!(h.add_edge(rs(&[1, 2, 4], 8)), Err(Error::LinearityViolation(1, 2, 0))));
        h.add_edge(rs(&[3, 4, 5], 8)).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.edge(0).intersection_size(h.edge(1)), 1);
        assert_eq!(h.incident(3), &[0, 1]);
    }

    #[test]
    fn host_graph_examples() {
        let mut h = LinearHypergraph::new(4, 3).unwrap();
        h.add_edge(rs(&[1, 2, 3], 4)).unwrap();
        let g = host_graph(&h);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.pairs(), vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn remove_edge_keeps_indices_consistent() {
        let mut h = LinearHypergraph::new(9, 3).unwrap();
        h.add_edge(rs(&[0, 1, 2], 9)).unwrap();
        h.add_edge(rs(&[2, 3, 4], 9)).unwrap();
        h.add_edge(rs(&[4, 5, 6], 9)).unwrap();
        h.remove_edge(0);
        assert_eq!(h.len(), 2);
        assert!(!h.is_covered(0, 1));
        assert_eq!(h.pair_edge(5, 6), Some(0));
        assert_eq!(h.incident(4).len(), 2);
        assert_eq!(h.covered_pair_count(), 6);
        h.add_edge(rs(&[0, 1, 7], 9)).unwrap();
    }

    #[test]
    fn path_examples() {
        let mut h = LinearHypergraph::new(6, 3).unwrap();
        assert!(find_linear_paths(&h, 1, 5, 1, 2, &[]).is_empty());
        h.add_edge(rs(&[1, 2, 3], 6)).unwrap();
        let p = find_linear_paths(&h, 1, 2, 1, 2, &[]);
        assert_eq!(p, vec![LinearPath { edges: vec![0] }]);
        h.add_edge(rs(&[3, 4, 5], 6)).unwrap();
        let p = find_linear_paths(&h, 1, 5, 1, 2, &[]);
        assert_eq!(p, vec![LinearPath { edges: vec![0, 1] }]);
        assert!(find_linear_paths(&h, 1, 5, 1, 2, &[2]).is_empty());
        // the junction may not be an endpoint
        assert!(find_linear_paths(&h, 3, 5, 2, 2, &[]).is_empty());
    }

    #[test]
    fn girth_examples() {
        let c4 = loose_cycle(4, 3);
        assert_eq!(c4.n(), 8);
        assert_eq!(c4.len(), 4);
        assert_eq!(linear_girth(&c4, 10), Girth::Finite(4));
        assert_eq!(linear_girth(&c4, 3), Girth::Infinite);

        let mut single = LinearHypergraph::new(5, 3).unwrap();
        single.add_edge(rs(&[0, 1, 2], 5)).unwrap();
        assert_eq!(linear_girth(&single, 8), Girth::Infinite);

        // C_3^3 plus a pendant edge
        let mut h = LinearHypergraph::new(9, 3).unwrap();
        for e in [[0, 1, 2], [2, 3, 4], [4, 5, 0], [5, 6, 7]] {
            h.add_edge(rs(&e, 9)).unwrap();
        }
        assert_eq!(linear_girth(&h, 6), Girth::Finite(3));
    }

    #[test]
    fn star_is_not_a_cycle() {
        let mut h = LinearHypergraph::new(7, 3).unwrap();
        for e in [[0, 1, 2], [0, 3, 4], [0, 5, 6]] {
            h.add_edge(rs(&e, 7)).unwrap();
        }
        assert_eq!(linear_girth(&h, 5), Girth::Infinite);
    }

    #[test]
    fn text_format_roundtrip() {
        let c = loose_cycle(3, 4);
        let text = c.to_text();
        assert!(text.starts_with("9 4\n"));
        assert!(text.ends_with('\n'));
        let back = LinearHypergraph::from_text(&text).unwrap();
        assert_eq!(back.edges(), c.edges());
        assert!(LinearHypergraph::from_text("5 3\n2 1 0\n").is_err());
        assert!(LinearHypergraph::from_text("5 3\n0 1 2\n0 1 3\n").is_err());
    }
}
