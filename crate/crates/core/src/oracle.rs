//! Brute-force ground truth: a second `Q` implementation, the destroyer
//! inclusion-exclusion, overcount sets, exact linear Turán numbers and
//! `Forb` counts, automorphism counts, and the deletion-method baseline.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::availability::{
    count_w, count_y, enumerate_q, is_available, CycleCopy, CycleSearch, EdgeSource, EdgeStatus, ForbiddenFamily,
};
use crate::error::{Error, Result};
use crate::hypergraph::{find_linear_paths_skipping, host_graph, HostGraph, LinearHypergraph};
use crate::rng::process_rng;
use crate::rset::{binomial, for_each_subset, RSet, Ranker, Vertex};

/// Whether `edges` (as a set) forms a linear cycle: pairwise intersections of size
/// at most one, every edge meeting exactly two others, connected, and spanning
/// `(r-1) * len` vertices.
pub fn is_linear_cycle(edges: &[RSet]) -> bool {
    let len = edges.len();
    if len < 3 {
        return false;
    }
    let r = edges[0].len();
    let mut adj = vec![Vec::new(); len];
    for i in 0..len {
        for j in i + 1..len {
            match edges[i].intersection_size(&edges[j]) {
                0 => {}
                1 => {
                    adj[i].push(j);
                    adj[j].push(i);
                }
                _ => return false,
            }
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return false;
    }
    let mut seen = vec![false; len];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return false;
    }
    let verts: BTreeSet<Vertex> = edges.iter().flat_map(|e| e.vertices().iter().copied()).collect();
    verts.len() == (r - 1) * len
}

/// `W_{f,L,k}` by picking unordered `(L-1)`-sets from `H ∪ Q` and testing
/// each together with `f` with [`is_linear_cycle`].
pub fn count_w_by_scan(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    f: &RSet,
    len: usize,
    k: usize,
) -> Result<usize> {
    if !is_available(h, g, f, fam) {
        return Err(Error::NotAvailable(f.vertices().to_vec()));
    }
    let mut pool: Vec<(RSet, bool)> = h.edges().iter().map(|e| (e.clone(), true)).collect();
    pool.extend(enumerate_q(h, g, fam).into_iter().filter(|e| e != f).map(|e| (e, false)));
    fn rec(
        pool: &[(RSet, bool)],
        start: usize,
        need: usize,
        chosen: &mut Vec<RSet>,
        hs: usize,
        k: usize,
        count: &mut usize,
    ) {
        if need == 0 {
            if hs == k && is_linear_cycle(chosen) {
                *count += 1;
            }
            return;
        }
        for idx in start..pool.len() {
            let (e, in_h) = &pool[idx];
            if hs + usize::from(*in_h) > k || chosen.iter().any(|c| c.intersection_size(e) > 1) {
                continue;
            }
            chosen.push(e.clone());
            rec(pool, idx + 1, need - 1, chosen, hs + usize::from(*in_h), k, count);
            chosen.pop();
        }
    }
    let mut count = 0;
    rec(&pool, 0, len - 1, &mut vec![f.clone()], 0, k, &mut count);
    Ok(count)
}

/// Whether `h + f` has a linear cycle of length `3..=ell` through `f`, found by
/// chaining edges from a scan of the full edge list and testing each closed
/// chain with [`is_linear_cycle`].
fn closes_cycle_by_scan(h: &LinearHypergraph, f: &RSet, ell: usize) -> bool {
    fn rec(h: &LinearHypergraph, chain: &mut Vec<RSet>, ell: usize) -> bool {
        let last = chain.last().unwrap().clone();
        for e in h.edges() {
            if chain.contains(e) || e.intersection_size(&last) != 1 {
                continue;
            }
            // the new edge may touch only its predecessor and, when closing, the first edge
            let inner_clash = chain.get(1..chain.len() - 1).unwrap_or(&[]).iter().any(|c| c.intersection_size(e) > 0);
            if inner_clash {
                continue;
            }
            chain.push(e.clone());
            let closing = chain.len() >= 3 && chain[0].intersection_size(e) == 1;
            let open = chain.len() == 2 || chain[0].intersection_size(e) == 0;
            if closing && is_linear_cycle(chain) {
                return true;
            }
            if !closing && open && chain.len() < ell && rec(h, chain, ell) {
                return true;
            }
            chain.pop();
        }
        false
    }
    let mut chain = vec![f.clone()];
    rec(h, &mut chain, ell)
}

/// `Q(i)` recomputed from scratch, independently of the availability module:
/// r-sets are visited by descending colex rank, and cycles are found by
/// chaining edges from a scan of the edge list.
pub fn naive_q(h: &LinearHypergraph, g: &HostGraph, fam: ForbiddenFamily) -> Vec<RSet> {
    let ranker = Ranker::new(h.n(), h.r()).expect("valid hypergraph dimensions");
    let mut out = Vec::new();
    for rank in (0..ranker.total()).rev() {
        let f = ranker.unrank(rank);
        let v = f.vertices();
        let clique = (0..v.len()).all(|i| (i + 1..v.len()).all(|j| g.adjacent(v[i], v[j])));
        if clique && !closes_cycle_by_scan(h, &f, fam.ell()) {
            out.push(f);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DestroyerMethod {
    Direct,
    InclusionExclusion,
}

/// `Σ_{j=2}^{s} (-1)^{s-j} C(s, j)`, which equals `(-1)^s (s-1)`.
pub fn destroyer_coefficient(s: u64) -> i128 {
    (2..=s)
        .map(|j| {
            let sign = if (s - j).is_multiple_of(2) { 1 } else { -1 };
            sign * binomial(s, j).unwrap() as i128
        })
        .sum()
}

/// Members of `Q(i)` whose selection stops the clique `f` from being a clique:
/// those sharing at least two vertices with `f` (including `f` itself when
/// available). With `f_m ⊆ f` given, only members meeting `f_m` in at most one
/// vertex are counted.
pub fn count_q_destroyers(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    f: &RSet,
    f_m: Option<&[Vertex]>,
    method: DestroyerMethod,
) -> Result<i128> {
    if !g.is_clique(f.vertices()) {
        return Err(Error::NotAClique(f.vertices().to_vec()));
    }
    if let Some(fm) = f_m {
        if fm.iter().any(|v| !f.contains(*v)) {
            return Err(Error::PreconditionViolated("f_m must be a subset of f".into()));
        }
    }
    let meets_fm = |s: &[Vertex]| f_m.map_or(0, |fm| s.iter().filter(|v| fm.contains(v)).count());
    match method {
        DestroyerMethod::Direct => Ok(enumerate_q(h, g, fam)
            .iter()
            .filter(|q| q.intersection_size(f) >= 2 && meets_fm(q.vertices()) <= 1)
            .count() as i128),
        DestroyerMethod::InclusionExclusion => {
            let y = |s: &[Vertex]| -> Result<i128> { Ok(count_y(h, g, fam, &RSet::from_slice_sorted(s))?.0 as i128) };
            let mut total = 0i128;
            let mut err = None;
            for s in 2..=f.len() {
                for_each_subset(f.vertices(), s, |gbar| {
                    if err.is_some() {
                        return;
                    }
                    let res = if f_m.is_none() {
                        let sign = if s % 2 == 0 { 1 } else { -1 };
                        y(gbar).map(|v| sign * (s as i128 - 1) * v)
                    } else if meets_fm(gbar) <= 1 {
                        exact_intersection(f, gbar, &y)
                    } else {
                        Ok(0)
                    };
                    match res {
                        Ok(v) => total += v,
                        Err(e) => err = Some(e),
                    }
                });
            }
            match err {
                Some(e) => Err(e),
                None => Ok(total),
            }
        }
    }
}

/// Members meeting `f` in exactly `gbar`: `Σ_j (-1)^j Σ_{t ⊆ f \ gbar, |t| = j} |Y_{gbar ∪ t}|`.
fn exact_intersection(f: &RSet, gbar: &[Vertex], y: &impl Fn(&[Vertex]) -> Result<i128>) -> Result<i128> {
    let rest: Vec<Vertex> = f.vertices().iter().copied().filter(|v| !gbar.contains(v)).collect();
    let mut total = 0i128;
    let mut err = None;
    for j in 0..=rest.len() {
        for_each_subset(&rest, j, |t| {
            if err.is_some() {
                return;
            }
            let mut s: Vec<Vertex> = gbar.iter().chain(t).copied().collect();
            s.sort_unstable();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            match y(&s) {
                Ok(v) => total += sign * v,
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Anchors for [`count_overlap_sets`].
#[derive(Clone, Debug)]
pub enum OverlapKind {
    /// Members `g ≠ f` such that `H + {f, g}` has several forbidden cycles through both.
    Upsilon { f: RSet },
    /// Members `h ≠ f` whose addition makes at least two other available edges
    /// of the cycle copy `cycle` (which contains `f`) unavailable.
    Psi { f: RSet, cycle: Vec<RSet> },
    /// Members `h ≠ f` lying on some `L' ∈ W_{f,len,k}` whose addition makes
    /// another available edge of that `L'` unavailable.
    Lambda { f: RSet, len: usize, k: usize },
}

fn with_edge(h: &LinearHypergraph, g: &HostGraph, e: &RSet) -> Option<(LinearHypergraph, HostGraph)> {
    let mut h2 = h.clone();
    h2.add_edge(e.clone()).ok()?;
    let mut g2 = g.clone();
    g2.remove_clique(e);
    Some((h2, g2))
}

pub fn count_overlap_sets(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    kind: &OverlapKind,
) -> Result<usize> {
    let q = enumerate_q(h, g, fam);
    let in_q = |e: &RSet| q.binary_search(e).is_ok();
    match kind {
        OverlapKind::Upsilon { f } => {
            if !in_q(f) {
                return Err(Error::InvalidAnchor(format!("{f:?} is not available")));
            }
            let mut count = 0;
            for other in q.iter().filter(|x| *x != f && x.intersection_size(f) <= 1) {
                let (h2, g2) = with_edge(h, g, other).expect("available sets keep H linear");
                let search = CycleSearch {
                    h: &h2,
                    g: &g2,
                    in_q: |_: &RSet| false,
                    source: EdgeSource::HOrQ,
                    max_h: fam.ell(),
                    max_q: 0,
                };
                let mut closures = 0;
                for len in fam.members() {
                    search.visit_cycles(f, EdgeStatus::InQ, len, &mut |c| {
                        if c.edges.contains(other) {
                            closures += 1;
                        }
                    });
                }
                if closures >= 2 {
                    count += 1;
                }
            }
            Ok(count)
        }
        OverlapKind::Psi { f, cycle } => {
            if !cycle.contains(f) || !is_linear_cycle(cycle) || cycle.len() > fam.ell() {
                return Err(Error::InvalidAnchor("cycle must be a forbidden linear cycle containing f".into()));
            }
            if !in_q(f) {
                return Err(Error::InvalidAnchor(format!("{f:?} is not available")));
            }
            let live: Vec<&RSet> = cycle.iter().filter(|e| in_q(e)).collect();
            let mut count = 0;
            for other in q.iter().filter(|x| *x != f) {
                let Some((h2, g2)) = with_edge(h, g, other) else { continue };
                let lost = live.iter().filter(|e| **e != other && !is_available(&h2, &g2, e, fam)).count();
                if lost >= 2 {
                    count += 1;
                }
            }
            Ok(count)
        }
        OverlapKind::Lambda { f, len, k } => {
            if !fam.members().contains(len) || k + 2 > *len {
                return Err(Error::InvalidAnchor(format!("need 3 <= L <= ell and k <= L-2, got L={len}, k={k}")));
            }
            if !in_q(f) {
                return Err(Error::InvalidAnchor(format!("{f:?} is not available")));
            }
            let (_, copies) = count_w(h, g, fam, f, *len, *k)?;
            let mut hits: BTreeSet<RSet> = BTreeSet::new();
            for copy in &copies {
                let live: Vec<&RSet> = copy.edges.iter().filter(|e| in_q(e)).collect();
                for other in live.iter().filter(|x| **x != f) {
                    if hits.contains(*other) {
                        continue;
                    }
                    let Some((h2, g2)) = with_edge(h, g, other) else { continue };
                    if live.iter().any(|e| e != other && !is_available(&h2, &g2, e, fam)) {
                        hits.insert((*other).clone());
                    }
                }
            }
            Ok(hits.len())
        }
    }
}

/// `Γ` counted without any cycle traversal: every set of `len - |U|` further
/// r-sets is tested with [`is_linear_cycle`]. Only usable for very small `n`.
pub fn count_gamma_by_subsets(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    u: &[RSet],
    f_m: &[Vertex],
    len: usize,
    k: usize,
) -> usize {
    let ranker = Ranker::new(h.n(), h.r()).unwrap();
    let others: Vec<RSet> = (0..ranker.total()).map(|x| ranker.unrank(x)).filter(|e| !u.contains(e)).collect();
    let mut count = 0;
    let idx: Vec<usize> = (0..others.len()).collect();
    for_each_subset(&idx, len - u.len(), |pick| {
        let mut edges: Vec<RSet> = u.to_vec();
        edges.extend(pick.iter().map(|&i| others[i].clone()));
        if !is_linear_cycle(&edges) {
            return;
        }
        let in_h = edges.iter().filter(|e| h.contains_edge(e)).count();
        let covers = f_m.iter().all(|v| edges.iter().any(|e| e.contains(*v)));
        let u_ok = u.iter().all(|e| is_available(h, g, e, fam));
        if in_h >= k && covers && u_ok {
            count += 1;
        }
    });
    count
}

/// Loose cycle `C_len^r` on vertices `0..(r-1)len`.
pub fn loose_cycle_edges(len: usize, r: usize) -> Vec<RSet> {
    let nv = (r - 1) * len;
    (0..len)
        .map(|i| {
            let start = i * (r - 1);
            let mut v: Vec<Vertex> = (0..r).map(|j| ((start + j) % nv) as Vertex).collect();
            v.sort_unstable();
            RSet::from_slice_sorted(&v)
        })
        .collect()
}

/// `|Aut(C_len^r)|` by testing every permutation of the `(r-1) len` vertices.
pub fn aut_count_brute(r: usize, len: usize) -> u64 {
    let edges: BTreeSet<RSet> = loose_cycle_edges(len, r).into_iter().collect();
    let nv = (r - 1) * len;
    let mut perm: Vec<Vertex> = (0..nv as Vertex).collect();
    let mut count = 0u64;
    let mut check = |p: &[Vertex]| {
        let ok = edges.iter().all(|e| {
            let mut img: Vec<Vertex> = e.vertices().iter().map(|&v| p[v as usize]).collect();
            img.sort_unstable();
            edges.contains(&RSet::from_slice_sorted(&img))
        });
        if ok {
            count += 1;
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; nv];
    check(&perm);
    let mut i = 0;
    while i < nv {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            check(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchOrder {
    Colex,
    ReverseColex,
}

fn candidates(n: usize, r: usize, order: SearchOrder) -> Result<Vec<RSet>> {
    let ranker = Ranker::new(n, r)?;
    let mut c: Vec<RSet> = (0..ranker.total()).map(|x| ranker.unrank(x)).collect();
    if order == SearchOrder::ReverseColex {
        c.reverse();
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct TuranResult {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub max_edges: usize,
    pub witness: LinearHypergraph,
    pub node_count: u64,
}

struct Search {
    cands: Vec<RSet>,
    fam: ForbiddenFamily,
    h: LinearHypergraph,
    g: HostGraph,
    nodes: u64,
    budget: u64,
    pairs_per_edge: usize,
}

impl Search {
    fn new(n: usize, r: usize, ell: usize, order: SearchOrder, budget: u64) -> Result<Self> {
        Ok(Search {
            cands: candidates(n, r, order)?,
            fam: ForbiddenFamily::new(ell)?,
            h: LinearHypergraph::new(n, r)?,
            g: HostGraph::complete(n),
            nodes: 0,
            budget,
            pairs_per_edge: r * (r - 1) / 2,
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        Ok(())
    }

    fn push(&mut self, j: usize) -> bool {
        let c = &self.cands[j];
        if !is_available(&self.h, &self.g, c, self.fam) {
            return false;
        }
        self.h.add_edge(c.clone()).expect("available sets keep H linear");
        self.g.remove_clique(c);
        true
    }

    fn pop(&mut self, j: usize) {
        self.h.remove_edge(self.h.len() - 1);
        self.g.restore_clique(&self.cands[j]);
    }

    fn max_edges(&mut self, from: usize, best: &mut (usize, LinearHypergraph)) -> Result<()> {
        self.tick()?;
        if self.h.len() > best.0 {
            *best = (self.h.len(), self.h.clone());
        }
        for j in from..self.cands.len() {
            if self.h.len() + self.g.edge_count() / self.pairs_per_edge <= best.0 {
                return Ok(());
            }
            if self.push(j) {
                let res = self.max_edges(j + 1, best);
                self.pop(j);
                res?;
            }
        }
        Ok(())
    }

    fn count(&mut self, from: usize) -> Result<u128> {
        self.tick()?;
        let mut total = 1u128;
        for j in from..self.cands.len() {
            if self.push(j) {
                let res = self.count(j + 1);
                self.pop(j);
                total += res?;
            }
        }
        Ok(total)
    }
}

/// Exact `ex_L(n, r, ell)` by branch and bound over r-sets in the given order.
pub fn ex_l_exact(n: usize, r: usize, ell: usize, order: SearchOrder, budget: u64) -> Result<TuranResult> {
    let mut s = Search::new(n, r, ell, order, budget)?;
    let mut best = (0, LinearHypergraph::new(n, r)?);
    s.max_edges(0, &mut best)?;
    Ok(TuranResult { n, r, ell, max_edges: best.0, witness: best.1, node_count: s.nodes })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbCount {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub count: u128,
    pub node_count: u64,
}

/// Number of labelled linear r-graphs on `[n]` with linear girth above `ell`,
/// the empty one included.
pub fn forb_count_exact(n: usize, r: usize, ell: usize, order: SearchOrder, budget: u64) -> Result<ForbCount> {
    let mut s = Search::new(n, r, ell, order, budget)?;
    let count = s.count(0)?;
    Ok(ForbCount { n, r, ell, count, node_count: s.nodes })
}

#[derive(Clone, Debug)]
pub struct DeletionReport {
    pub hypergraph: LinearHypergraph,
    pub base_edges: usize,
    pub keep_probability: f64,
    pub retained: usize,
    pub short_cycles: usize,
    pub deleted: usize,
}

/// Every linear cycle of length `3..=ell` in `h`, as sorted edge-index lists.
pub fn short_cycles(h: &LinearHypergraph, ell: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for idx in 0..h.len() {
        let f = h.edge(idx).vertices();
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let avoid: Vec<Vertex> = f.iter().copied().filter(|&x| x != f[i] && x != f[j]).collect();
                for p in find_linear_paths_skipping(h, f[i], f[j], 2, ell - 1, &avoid, Some(idx)) {
                    let mut c = p.edges;
                    c.push(idx);
                    c.sort_unstable();
                    out.insert(c);
                }
            }
        }
    }
    out
}

/// Deletion-method baseline: a greedy maximal linear packing in uniformly
/// random order, thinned at rate `n^{-(1-1/ell)}`, then one edge (the
/// lexicographically smallest) removed from every remaining short cycle.
pub fn deletion_construct(n: usize, r: usize, ell: usize, seed: u64) -> Result<DeletionReport> {
    ForbiddenFamily::new(ell)?;
    let ranker = Ranker::new(n, r)?;
    if ranker.total() > u32::MAX as u64 {
        return Err(Error::InvalidParams(format!("C({n}, {r}) r-sets do not fit 32-bit ranks")));
    }
    let mut rng = process_rng(seed);
    let mut base = LinearHypergraph::new(n, r)?;
    // Random-order greedy packing. Uniform draws with rejection pick the next
    // fitting r-set with the right law while most draws fit; once they mostly
    // fail, the fitting sets that remain are shuffled and scanned instead.
    let mut misses = 0u32;
    while misses < 64 {
        let e = ranker.unrank(rng.random_range(0..ranker.total()));
        if e.pairs().all(|(x, y)| !base.is_covered(x, y)) {
            base.add_edge(e)?;
            misses = 0;
        } else {
            misses += 1;
        }
    }
    let mut rest = crate::availability::enumerate_k_m(&host_graph(&base), r);
    rest.shuffle(&mut rng);
    for e in rest {
        if e.pairs().all(|(x, y)| !base.is_covered(x, y)) {
            base.add_edge(e)?;
        }
    }
    let base_edges = base.len();
    let keep_probability = (n as f64).powf(-(1.0 - 1.0 / ell as f64));
    let mut thinned = LinearHypergraph::new(n, r)?;
    for e in base.edges() {
        if rng.random::<f64>() < keep_probability {
            thinned.add_edge(e.clone())?;
        }
    }
    let retained = thinned.len();
    let cycles = short_cycles(&thinned, ell);
    let mut dead = vec![false; thinned.len()];
    for c in &cycles {
        if c.iter().any(|&i| dead[i]) {
            continue;
        }
        let smallest = *c.iter().min_by_key(|&&i| thinned.edge(i)).unwrap();
        dead[smallest] = true;
    }
    let mut out = LinearHypergraph::new(n, r)?;
    for (i, e) in thinned.edges().iter().enumerate() {
        if !dead[i] {
            out.add_edge(e.clone())?;
        }
    }
    let deleted = dead.iter().filter(|d| **d).count();
    Ok(DeletionReport { hypergraph: out, base_edges, keep_probability, retained, short_cycles: cycles.len(), deleted })
}

/// Cycle copies through `f` found by [`count_w`], restated as witness lines.
pub fn witness_dump(copies: &[CycleCopy]) -> String {
    copies.iter().map(|c| c.witness_line() + "\n").collect()
}
