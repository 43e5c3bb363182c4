//! Reference (non-incremental) semantics: availability and exact enumeration of
//! `Q`, `K_m`, `Y`, `W`, `N`, `Γ` and extension counts on a frozen state.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hypergraph::{has_linear_path, HostGraph, LinearHypergraph};
use crate::rset::{binomial, for_each_subset, RSet, Vertex};

/// Forbidden linear cycles `C_3^r, ..., C_ell^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenFamily {
    ell: usize,
}

impl ForbiddenFamily {
    pub fn new(ell: usize) -> Result<Self> {
        if ell < 3 {
            return Err(Error::InvalidParams(format!("ell must be >= 3, got {ell}")));
        }
        Ok(ForbiddenFamily { ell })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn members(&self) -> std::ops::RangeInclusive<usize> {
        3..=self.ell
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeStatus {
    InH,
    InQ,
    Other,
}

impl EdgeStatus {
    fn letter(self) -> char {
        match self {
            EdgeStatus::InH => 'H',
            EdgeStatus::InQ => 'Q',
            EdgeStatus::Other => 'O',
        }
    }
}

/// A copy of a linear cycle, edges in cyclic order, with each edge's status.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCopy {
    pub edges: Vec<RSet>,
    pub status: Vec<EdgeStatus>,
}

impl CycleCopy {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn count(&self, s: EdgeStatus) -> usize {
        self.status.iter().filter(|&&x| x == s).count()
    }

    /// Edge set in sorted order; identifies the copy as a sub-hypergraph.
    pub fn canonical(&self) -> Vec<RSet> {
        let mut e = self.edges.clone();
        e.sort();
        e
    }

    /// Witness dump line: `len; e_1 | e_2 | ...; status`.
    pub fn witness_line(&self) -> String {
        let mut s = format!("{}; ", self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            write!(s, "{e}").unwrap();
        }
        s.push_str("; ");
        s.extend(self.status.iter().map(|st| st.letter()));
        s
    }
}

/// Every unordered pair of `f` is joined by no loose path of length `2..=ell-1`
/// avoiding the rest of `f`.
fn closes_no_cycle(h: &LinearHypergraph, f: &[Vertex], fam: ForbiddenFamily) -> bool {
    let mut avoid: SmallVec<[Vertex; 8]> = SmallVec::new();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            avoid.clear();
            avoid.extend(f.iter().copied().filter(|&x| x != f[i] && x != f[j]));
            if has_linear_path(h, f[i], f[j], 2, fam.ell() - 1, &avoid, None) {
                return false;
            }
        }
    }
    true
}

/// `f` is an `r`-clique of `g` whose addition to `h` closes no forbidden cycle.
pub fn is_available(h: &LinearHypergraph, g: &HostGraph, f: &RSet, fam: ForbiddenFamily) -> bool {
    f.len() == h.r() && g.is_clique(f.vertices()) && closes_no_cycle(h, f.vertices(), fam)
}

/// Calls `visit` for every clique of size `m` in `g` that contains `base`
/// (which must itself be a clique), drawing new vertices from `pool` (ascending).
pub(crate) fn for_each_clique_extension(
    g: &HostGraph,
    base: &[Vertex],
    pool: &[Vertex],
    m: usize,
    mut visit: impl FnMut(&[Vertex]),
) {
    fn rec(
        g: &HostGraph,
        pool: &[Vertex],
        start: usize,
        need: usize,
        chosen: &mut Vec<Vertex>,
        visit: &mut impl FnMut(&[Vertex]),
    ) {
        if need == 0 {
            visit(chosen);
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < need {
                break;
            }
            let x = pool[i];
            if chosen.iter().all(|&y| g.adjacent(x, y)) {
                chosen.push(x);
                rec(g, pool, i + 1, need - 1, chosen, visit);
                chosen.pop();
            }
        }
    }
    let mut chosen: Vec<Vertex> = Vec::with_capacity(m);
    let need = m - base.len();
    // extension vertices first; base vertices are adjacent to all of the pool
    rec(g, pool, 0, need, &mut chosen, &mut |ext| {
        let mut all: SmallVec<[Vertex; 8]> = SmallVec::new();
        all.extend_from_slice(base);
        all.extend_from_slice(ext);
        all.sort_unstable();
        visit(&all);
    });
}

/// All `m`-cliques of `g`, lexicographically ordered.
pub fn enumerate_k_m(g: &HostGraph, m: usize) -> Vec<RSet> {
    let all: Vec<Vertex> = (0..g.n() as Vertex).collect();
    let mut out = Vec::new();
    for_each_clique_extension(g, &[], &all, m, |c| out.push(RSet::from_slice_sorted(c)));
    out.sort();
    out
}

/// `Q(i)`: all available r-sets, lexicographically ordered.
pub fn enumerate_q(h: &LinearHypergraph, g: &HostGraph, fam: ForbiddenFamily) -> Vec<RSet> {
    enumerate_k_m(g, h.r()).into_iter().filter(|f| closes_no_cycle(h, f.vertices(), fam)).collect()
}

/// Available `(r-m)`-codegree of the clique `f_m`, with its witness completions.
/// For `m = r` this is the availability indicator of `f_m`.
pub fn count_y(h: &LinearHypergraph, g: &HostGraph, fam: ForbiddenFamily, f_m: &RSet) -> Result<(usize, Vec<RSet>)> {
    let m = f_m.len();
    if m < 2 || m > h.r() {
        return Err(Error::PreconditionViolated(format!("need 2 <= m <= r, got m={m}")));
    }
    if !g.is_clique(f_m.vertices()) {
        return Err(Error::NotAClique(f_m.vertices().to_vec()));
    }
    let pool = g.common_neighbors(f_m.vertices());
    let mut witnesses = Vec::new();
    for_each_clique_extension(g, &[], &pool, h.r() - m, |ext| {
        let mut all: SmallVec<[Vertex; 8]> = SmallVec::from_slice(f_m.vertices());
        all.extend_from_slice(ext);
        all.sort_unstable();
        if closes_no_cycle(h, &all, fam) {
            witnesses.push(RSet::from_slice_sorted(ext));
        }
    });
    Ok((witnesses.len(), witnesses))
}

/// Source of non-fixed cycle edges during enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum EdgeSource {
    /// Edges of `H` or available r-sets.
    HOrQ,
    /// Any r-set of the complete r-graph.
    Any,
}

pub(crate) struct CycleSearch<'a, F: Fn(&RSet) -> bool> {
    pub h: &'a LinearHypergraph,
    pub g: &'a HostGraph,
    pub in_q: F,
    pub source: EdgeSource,
    /// Maximum number of non-fixed edges with status `InH` / `InQ`.
    pub max_h: usize,
    pub max_q: usize,
}

impl<F: Fn(&RSet) -> bool> CycleSearch<'_, F> {
    fn status(&self, e: &RSet) -> EdgeStatus {
        if self.h.contains_edge(e) {
            EdgeStatus::InH
        } else if (self.in_q)(e) {
            EdgeStatus::InQ
        } else {
            EdgeStatus::Other
        }
    }

    /// Candidate edges containing all of `base` whose remaining vertices avoid `used`.
    fn candidates(&self, base: &[Vertex], used: &[Vertex], h_left: bool, q_left: bool) -> Vec<(RSet, EdgeStatus)> {
        let r = self.h.r();
        let mut out = Vec::new();
        match self.source {
            EdgeSource::HOrQ => {
                if h_left {
                    for &ei in self.h.incident(base[0]) {
                        let e = self.h.edge(ei);
                        if base.iter().all(|&b| e.contains(b))
                            && e.vertices().iter().all(|x| base.contains(x) || !used.contains(x))
                        {
                            out.push((e.clone(), EdgeStatus::InH));
                        }
                    }
                }
                if q_left {
                    let pool: Vec<Vertex> = self
                        .g
                        .common_neighbors(base)
                        .into_iter()
                        .filter(|x| !used.contains(x) && !base.contains(x))
                        .collect();
                    for_each_clique_extension(self.g, base, &pool, r, |c| {
                        let e = RSet::from_slice_sorted(c);
                        if (self.in_q)(&e) {
                            out.push((e, EdgeStatus::InQ));
                        }
                    });
                }
            }
            EdgeSource::Any => {
                let pool: Vec<Vertex> =
                    (0..self.h.n() as Vertex).filter(|x| !used.contains(x) && !base.contains(x)).collect();
                for_each_subset(&pool, r - base.len(), |ext| {
                    let mut all: SmallVec<[Vertex; 8]> = SmallVec::from_slice(base);
                    all.extend_from_slice(ext);
                    all.sort_unstable();
                    let e = RSet::from_sorted(all);
                    let st = self.status(&e);
                    let ok = match st {
                        EdgeStatus::InH => h_left,
                        EdgeStatus::InQ => q_left,
                        EdgeStatus::Other => true,
                    };
                    if ok {
                        out.push((e, st));
                    }
                });
            }
        }
        out
    }

    /// Visits every copy of `C_len^r` containing `f` (as its first edge),
    /// each copy once.
    pub fn visit_cycles(&self, f: &RSet, f_status: EdgeStatus, len: usize, visit: &mut impl FnMut(&CycleCopy)) {
        let fv = f.vertices();
        for &b in fv {
            for &a in fv {
                if a == b {
                    continue;
                }
                let mut used: Vec<Vertex> = fv.to_vec();
                let mut edges = vec![(f.clone(), f_status)];
                self.extend(b, a, len, &mut used, &mut edges, visit);
            }
        }
    }

    fn extend(
        &self,
        x: Vertex,
        a: Vertex,
        len: usize,
        used: &mut Vec<Vertex>,
        edges: &mut Vec<(RSet, EdgeStatus)>,
        visit: &mut impl FnMut(&CycleCopy),
    ) {
        let hs = edges[1..].iter().filter(|e| e.1 == EdgeStatus::InH).count();
        let qs = edges[1..].iter().filter(|e| e.1 == EdgeStatus::InQ).count();
        let h_left = hs < self.max_h;
        let q_left = qs < self.max_q;
        let closing = edges.len() == len - 1;
        if closing {
            // last edge meets `used` in exactly {x, a}
            let base = if x < a { [x, a] } else { [a, x] };
            for (e, st) in self.candidates(&base, used, h_left, q_left) {
                if e.vertices().iter().any(|v| *v != x && *v != a && used.contains(v)) {
                    continue;
                }
                // each copy is met twice, once per direction; keep one
                if edges[1].0 >= e {
                    continue;
                }
                edges.push((e, st));
                let copy = CycleCopy {
                    edges: edges.iter().map(|e| e.0.clone()).collect(),
                    status: edges.iter().map(|e| e.1).collect(),
                };
                visit(&copy);
                edges.pop();
            }
            return;
        }
        let remaining_after = len - edges.len() - 1;
        for (e, st, y) in self.middle_steps(x, a, used, h_left, q_left, qs + 1 == self.max_q, remaining_after) {
            let mark = used.len();
            used.extend(e.vertices().iter().copied().filter(|&v| v != x));
            edges.push((e, st));
            self.extend(y, a, len, used, edges, visit);
            edges.pop();
            used.truncate(mark);
        }
    }

    /// Whether `a` can be reached from `y` along `steps` edges of `H`, each
    /// entered and left through distinct vertices. Necessary for a loose path.
    fn h_walk_exists(&self, y: Vertex, a: Vertex, steps: usize) -> bool {
        if steps == 1 {
            return self.h.pair_edge(y, a).is_some();
        }
        self.h.incident(y).iter().any(|&ei| {
            self.h.edge(ei).vertices().iter().any(|&z| z != y && z != a && self.h_walk_exists(z, a, steps - 1))
        })
    }

    /// Non-closing edges through `x` avoiding `used` and `a`, each paired with
    /// the vertex the path leaves by. When the remaining `remaining_after`
    /// edges must all come from `H`, exits that cannot continue are skipped
    /// before the rest of the edge is enumerated.
    #[allow(clippy::too_many_arguments)]
    fn middle_steps(
        &self,
        x: Vertex,
        a: Vertex,
        used: &[Vertex],
        h_left: bool,
        q_left: bool,
        h_only_after_q: bool,
        remaining_after: usize,
    ) -> Vec<(RSet, EdgeStatus, Vertex)> {
        let mut out = Vec::new();
        let push_exits = |e: RSet, st: EdgeStatus, out: &mut Vec<(RSet, EdgeStatus, Vertex)>| {
            for &y in e.vertices() {
                if y != x {
                    out.push((e.clone(), st, y));
                }
            }
        };
        let free = |v: &Vertex| *v != a && !used.contains(v);
        match self.source {
            EdgeSource::Any => {
                let tmp_used: Vec<Vertex> = used.iter().copied().filter(|&v| v != x).collect();
                for (e, st) in self.candidates(&[x], &tmp_used, h_left, q_left) {
                    if !e.contains(a) {
                        push_exits(e, st, &mut out);
                    }
                }
            }
            EdgeSource::HOrQ => {
                if h_left {
                    for &ei in self.h.incident(x) {
                        let e = self.h.edge(ei);
                        if e.vertices().iter().all(|v| *v == x || free(v)) {
                            push_exits(e.clone(), EdgeStatus::InH, &mut out);
                        }
                    }
                }
                if q_left {
                    let r = self.h.r();
                    let nbrs: Vec<Vertex> = self.g.common_neighbors(&[x]).into_iter().filter(free).collect();
                    for &y in &nbrs {
                        if h_only_after_q && !self.h_walk_exists(y, a, remaining_after) {
                            continue;
                        }
                        let pool: Vec<Vertex> =
                            nbrs.iter().copied().filter(|&z| z != y && self.g.adjacent(y, z)).collect();
                        let base = if x < y { [x, y] } else { [y, x] };
                        for_each_clique_extension(self.g, &base, &pool, r, |c| {
                            let e = RSet::from_slice_sorted(c);
                            if (self.in_q)(&e) {
                                out.push((e, EdgeStatus::InQ, y));
                            }
                        });
                    }
                }
            }
        }
        out
    }
}

/// `W_{f,L,k}`: copies of `C_len^r` through `f` with exactly `k` edges in `H`
/// and all remaining edges (including `f`) available.
pub fn count_w(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    f: &RSet,
    len: usize,
    k: usize,
) -> Result<(usize, Vec<CycleCopy>)> {
    if len < 3 || len > fam.ell() || k + 2 > len {
        return Err(Error::PreconditionViolated(format!("need 3 <= L <= ell and k <= L-2, got L={len}, k={k}")));
    }
    if !is_available(h, g, f, fam) {
        return Err(Error::NotAvailable(f.vertices().to_vec()));
    }
    let in_q = |e: &RSet| is_available(h, g, e, fam);
    count_w_with(h, g, in_q, f, len, k)
}

/// [`count_w`] with an externally supplied `Q` membership test; `f` must be in `Q`.
pub fn count_w_with(
    h: &LinearHypergraph,
    g: &HostGraph,
    in_q: impl Fn(&RSet) -> bool,
    f: &RSet,
    len: usize,
    k: usize,
) -> Result<(usize, Vec<CycleCopy>)> {
    let search = CycleSearch { h, g, in_q, source: EdgeSource::HOrQ, max_h: k, max_q: len - 1 - k };
    let mut out = Vec::new();
    search.visit_cycles(f, EdgeStatus::InQ, len, &mut |c| {
        if c.count(EdgeStatus::InH) == k {
            out.push(c.clone());
        }
    });
    Ok((out.len(), out))
}

/// Number of copies of `C_len^r` in the complete `n`-vertex r-graph that contain
/// a fixed r-set.
pub fn count_n_fl(n: usize, r: usize, len: usize) -> Result<u128> {
    if r < 3 || len < 3 {
        return Err(Error::InvalidParams(format!("need r, L >= 3, got r={r}, L={len}")));
    }
    let (n, r, len) = (n as u64, r as u64, len as u64);
    if n < (r - 1) * len {
        return Ok(0);
    }
    // pick the two junctions on f, the ordered inner junctions of the path
    // back round, then the fillers of each path edge in order
    let mut acc = binomial(r, 2).ok_or(Error::Overflow("count_n_fl"))?;
    let mut free = n - r;
    for _ in 0..len - 2 {
        acc = acc.checked_mul(free as u128).ok_or(Error::Overflow("count_n_fl"))?;
        free -= 1;
    }
    for _ in 0..len - 1 {
        let c = binomial(free, r - 2).ok_or(Error::Overflow("count_n_fl"))?;
        acc = acc.checked_mul(c).ok_or(Error::Overflow("count_n_fl"))?;
        free = free.saturating_sub(r - 2);
    }
    Ok(acc)
}

/// `Γ_{U, f_m, L, k}`: copies `L'` of `C_len^r` with `U ⊆ L' ∩ Q`,
/// `f_m ⊆ V(L')` and at least `k` edges of `L'` in `H`.
pub fn count_gamma(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    u: &[RSet],
    f_m: &[Vertex],
    len: usize,
    k: usize,
) -> Result<usize> {
    let m = f_m.len();
    let first = u.first().ok_or_else(|| Error::PreconditionViolated("U must be non-empty".into()))?;
    if u.len() + usize::from(m >= 1) + k > len {
        return Err(Error::PreconditionViolated(format!(
            "|U| + 1[m>=1] = {} exceeds L - k = {}",
            u.len() + usize::from(m >= 1),
            len as isize - k as isize
        )));
    }
    if len < 3 {
        return Err(Error::PreconditionViolated(format!("L must be >= 3, got {len}")));
    }
    if let Some(bad) = u.iter().find(|e| !is_available(h, g, e, fam)) {
        return Err(Error::PreconditionViolated(format!("{bad:?} is not in Q")));
    }
    if m >= 1 && !has_available_superset(h, g, fam, f_m, u) {
        return Err(Error::PreconditionViolated(format!("{f_m:?} lies in no available r-set outside U")));
    }
    let in_q = |e: &RSet| is_available(h, g, e, fam);
    let search = CycleSearch { h, g, in_q, source: EdgeSource::Any, max_h: len, max_q: len };
    let mut count = 0;
    search.visit_cycles(first, EdgeStatus::InQ, len, &mut |c| {
        let ok = c.count(EdgeStatus::InH) >= k
            && u.iter().all(|x| c.edges.contains(x))
            && f_m.iter().all(|&v| c.edges.iter().any(|e| e.contains(v)));
        if ok {
            count += 1;
        }
    });
    Ok(count)
}

fn has_available_superset(
    h: &LinearHypergraph,
    g: &HostGraph,
    fam: ForbiddenFamily,
    f_m: &[Vertex],
    exclude: &[RSet],
) -> bool {
    let mut base: Vec<Vertex> = f_m.to_vec();
    base.sort_unstable();
    if !g.is_clique(&base) || base.len() > h.r() {
        return false;
    }
    let pool = g.common_neighbors(&base);
    let mut found = false;
    for_each_clique_extension(g, &base, &pool, h.r(), |c| {
        if !found {
            let e = RSet::from_slice_sorted(c);
            found = !exclude.contains(&e) && closes_no_cycle(h, c, fam);
        }
    });
    found
}

/// An abstract r-graph on pattern vertices `0..vertices`.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub vertices: usize,
    pub edges: Vec<Vec<usize>>,
}

/// `|Ψ_{θ,Ĥ,H}|`: injections extending `theta` (pattern vertex → host vertex) that
/// map every pattern edge not wholly inside the anchored vertices onto an edge
/// of `h`.
pub fn count_extensions(h: &LinearHypergraph, theta: &[(usize, Vertex)], pattern: &Pattern) -> Result<u128> {
    let nv = pattern.vertices;
    let mut image: Vec<Option<Vertex>> = vec![None; nv];
    let mut taken: HashSet<Vertex> = HashSet::new();
    for &(p, x) in theta {
        if p >= nv || x as usize >= h.n() {
            return Err(Error::InvalidParams(format!("bad anchor {p} -> {x}")));
        }
        if image[p].is_some() || !taken.insert(x) {
            return Err(Error::InvalidParams("theta is not an injection".into()));
        }
        image[p] = Some(x);
    }
    if pattern.edges.iter().any(|e| e.len() != h.r() || e.iter().any(|&p| p >= nv)) {
        return Err(Error::InvalidParams("pattern edges must be r-sets of pattern vertices".into()));
    }
    let free_edges: Vec<&Vec<usize>> = pattern.edges.iter().filter(|e| e.iter().any(|&p| image[p].is_none())).collect();
    // free vertices touched by a free edge are placed by search; the rest by count
    let mut searched: Vec<usize> = Vec::new();
    for e in &free_edges {
        for &p in e.iter() {
            if image[p].is_none() && !searched.contains(&p) {
                searched.push(p);
            }
        }
    }
    let isolated = (0..nv).filter(|p| image[*p].is_none() && !searched.contains(p)).count();

    struct Ctx<'a> {
        h: &'a LinearHypergraph,
        free_edges: &'a [&'a Vec<usize>],
        order: &'a [usize],
    }
    fn edges_ok(ctx: &Ctx<'_>, p: usize, image: &[Option<Vertex>]) -> bool {
        ctx.free_edges.iter().filter(|e| e.contains(&p)).all(|e| {
            let imgs: Option<Vec<Vertex>> = e.iter().map(|&q| image[q]).collect();
            match imgs {
                None => true,
                Some(mut v) => {
                    v.sort_unstable();
                    ctx.h.contains_edge(&RSet::from_slice_sorted(&v))
                }
            }
        })
    }
    fn rec(
        ctx: &Ctx<'_>,
        depth: usize,
        image: &mut Vec<Option<Vertex>>,
        taken: &mut HashSet<Vertex>,
        count: &mut u128,
    ) {
        if depth == ctx.order.len() {
            *count += 1;
            return;
        }
        let p = ctx.order[depth];
        // restrict candidates through an already-placed neighbour in a free edge
        let anchor = ctx.free_edges.iter().filter(|e| e.contains(&p)).find_map(|e| e.iter().find_map(|&q| image[q]));
        let candidates: Vec<Vertex> = match anchor {
            Some(x) => {
                let mut c: Vec<Vertex> = ctx
                    .h
                    .incident(x)
                    .iter()
                    .flat_map(|&ei| ctx.h.edge(ei).vertices().iter().copied())
                    .filter(|&y| y != x)
                    .collect();
                c.sort_unstable();
                c.dedup();
                c
            }
            None => (0..ctx.h.n() as Vertex).collect(),
        };
        for y in candidates {
            if taken.contains(&y) {
                continue;
            }
            image[p] = Some(y);
            taken.insert(y);
            if edges_ok(ctx, p, image) {
                rec(ctx, depth + 1, image, taken, count);
            }
            taken.remove(&y);
            image[p] = None;
        }
    }
    let ctx = Ctx { h, free_edges: &free_edges, order: &searched };
    let mut count = 0u128;
    // anchored-only free edges (all vertices anchored) are excluded by construction
    rec(&ctx, 0, &mut image, &mut taken, &mut count);
    let remaining = h.n() as u64 - theta.len() as u64 - searched.len() as u64;
    let tail = crate::rset::falling_factorial(remaining, isolated as u64).ok_or(Error::Overflow("count_extensions"))?;
    count.checked_mul(tail).ok_or(Error::Overflow("count_extensions"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::host_graph;

    fn rs(v: &[u32], n: usize) -> RSet {
        RSet::new(v.iter().copied(), n).unwrap()
    }

    fn state(n: usize, r: usize, edges: &[&[u32]]) -> (LinearHypergraph, HostGraph) {
        let mut h = LinearHypergraph::new(n, r).unwrap();
        for e in edges {
            h.add_edge(rs(e, n)).unwrap();
        }
        let g = host_graph(&h);
        (h, g)
    }

    #[test]
    fn availability_examples() {
        let fam = ForbiddenFamily::new(3).unwrap();
        let (h, g) = state(7, 3, &[]);
        assert!(is_available(&h, &g, &rs(&[0, 4, 6], 7), fam));
        let (h, g) = state(7, 3, &[&[1, 2, 3], &[3, 4, 5]]);
        assert!(!is_available(&h, &g, &rs(&[1, 5, 6], 7), fam));
        assert!(!is_available(&h, &g, &rs(&[1, 2, 6], 7), fam));
        assert!(!is_available(&h, &g, &rs(&[1, 4, 6], 7), fam));
    }

    #[test]
    fn enumerate_q_examples() {
        let fam = ForbiddenFamily::new(3).unwrap();
        let (h, g) = state(6, 3, &[]);
        assert_eq!(enumerate_q(&h, &g, fam).len(), 20);
        let (h, g) = state(5, 3, &[&[0, 1, 2]]);
        let q = enumerate_q(&h, &g, fam);
        assert_eq!(q, vec![rs(&[0, 3, 4], 5), rs(&[1, 3, 4], 5), rs(&[2, 3, 4], 5)]);
    }

    #[test]
    fn k_m_examples() {
        let g = HostGraph::complete(5);
        assert_eq!(enumerate_k_m(&g, 2).len(), 10);
        let g = HostGraph::complete(6);
        assert_eq!(enumerate_k_m(&g, 3).len(), 20);
        let (_, g) = state(5, 3, &[&[0, 1, 2]]);
        assert!(!enumerate_k_m(&g, 2).contains(&rs(&[0, 1], 5)));
    }

    #[test]
    fn count_y_examples() {
        let fam = ForbiddenFamily::new(4).unwrap();
        let (h, g) = state(8, 3, &[]);
        assert_eq!(count_y(&h, &g, fam, &rs(&[0, 1], 8)).unwrap().0, 6);
        let (h, g) = state(9, 4, &[]);
        assert_eq!(count_y(&h, &g, fam, &rs(&[0, 1], 9)).unwrap().0, 21);
        assert_eq!(count_y(&h, &g, fam, &rs(&[0, 1, 2, 3], 9)).unwrap().0, 1);

        let fam3 = ForbiddenFamily::new(3).unwrap();
        let (h, g) = state(5, 3, &[&[0, 1, 2]]);
        let (c, w) = count_y(&h, &g, fam3, &rs(&[3, 4], 5)).unwrap();
        assert_eq!(c, 3);
        assert_eq!(w.len(), 3);
        assert!(matches!(count_y(&h, &g, fam3, &rs(&[0, 1], 5)), Err(Error::NotAClique(_))));
        assert_eq!(count_y(&h, &g, fam3, &rs(&[0, 1, 2], 5)).map(|x| x.0).ok(), None);
    }

    #[test]
    fn n_fl_small_values() {
        // triangle through a fixed triple: 3 pairs * (n-3) * C(n-4, 1) * C(n-5, 1)
        assert_eq!(count_n_fl(9, 3, 3).unwrap(), 3 * 6 * 5 * 4);
        assert_eq!(count_n_fl(5, 3, 3).unwrap(), 0);
        assert_eq!(count_n_fl(6, 3, 3).unwrap(), 3 * 3 * 2);
    }

    #[test]
    fn count_w_initial_state() {
        let fam = ForbiddenFamily::new(4).unwrap();
        let (h, g) = state(9, 3, &[]);
        let f = rs(&[0, 1, 2], 9);
        assert_eq!(count_w(&h, &g, fam, &f, 3, 0).unwrap().0 as u128, count_n_fl(9, 3, 3).unwrap());
        assert_eq!(count_w(&h, &g, fam, &f, 3, 1).unwrap().0, 0);
        assert_eq!(count_w(&h, &g, fam, &f, 4, 2).unwrap().0, 0);
        assert!(count_w(&h, &g, fam, &f, 4, 3).is_err());
        assert!(count_w(&h, &g, fam, &f, 5, 0).is_err());
    }

    #[test]
    fn witness_line_format() {
        let c = CycleCopy {
            edges: vec![rs(&[0, 1, 2], 9), rs(&[2, 3, 4], 9), rs(&[4, 5, 0], 9)],
            status: vec![EdgeStatus::InQ, EdgeStatus::InH, EdgeStatus::Other],
        };
        assert_eq!(c.witness_line(), "3; 0 1 2 | 2 3 4 | 0 4 5; QHO");
    }

    #[test]
    fn extension_examples() {
        let (h, _) = state(6, 3, &[&[0, 1, 2]]);
        // one free edge {v, a, b} with v anchored at 0
        let pat = Pattern { vertices: 3, edges: vec![vec![0, 1, 2]] };
        assert_eq!(count_extensions(&h, &[(0, 0)], &pat).unwrap(), 2);
        // no free edges: falling factorial over the free vertices
        let pat = Pattern { vertices: 4, edges: vec![] };
        assert_eq!(count_extensions(&h, &[(0, 0)], &pat).unwrap(), 5 * 4 * 3);
        // empty hypergraph with a free edge
        let (e, _) = state(6, 3, &[]);
        let pat = Pattern { vertices: 3, edges: vec![vec![0, 1, 2]] };
        assert_eq!(count_extensions(&e, &[(0, 0)], &pat).unwrap(), 0);
        assert!(count_extensions(&h, &[(0, 0), (1, 0)], &pat).is_err());
    }

    #[test]
    fn gamma_initial_state() {
        let fam = ForbiddenFamily::new(4).unwrap();
        let (h, g) = state(9, 3, &[]);
        let f = rs(&[0, 1, 2], 9);
        assert_eq!(
            count_gamma(&h, &g, fam, std::slice::from_ref(&f), &[], 3, 0).unwrap() as u128,
            count_n_fl(9, 3, 3).unwrap()
        );
        assert_eq!(count_gamma(&h, &g, fam, std::slice::from_ref(&f), &[], 3, 1).unwrap(), 0);
        assert!(matches!(
            count_gamma(&h, &g, fam, std::slice::from_ref(&f), &[3, 4], 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(count_gamma(&h, &g, fam, &[], &[], 3, 0).is_err());
    }
}
