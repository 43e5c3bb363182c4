//! The random greedy process: available-set maintenance, one-step updates and
//! full trial runs with checkpointed measurements.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::availability::{count_w_with, for_each_clique_extension, is_available, ForbiddenFamily};
use crate::error::{Error, Result};
use crate::hypergraph::{HostGraph, LinearHypergraph};
use crate::oracle::naive_q;
use crate::rng::{process_rng, sampling_rng};
use crate::rset::{RSet, Ranker, Vertex};
use crate::trajectory::ModelParams;

const ABSENT: u32 = u32::MAX;

/// `Q(i)` as a dense array of colex ranks with a rank → slot table, plus the
/// number of members through each vertex pair.
#[derive(Clone, Debug)]
pub struct AvailableSet {
    ranker: Ranker,
    dense: Vec<u32>,
    pos: Vec<u32>,
    pair_count: Vec<u32>,
}

impl AvailableSet {
    fn check_size(ranker: &Ranker) -> Result<()> {
        if ranker.total() >= ABSENT as u64 {
            return Err(Error::InvalidParams(format!(
                "C({}, {}) = {} r-sets do not fit 32-bit ranks",
                ranker.n(),
                ranker.r(),
                ranker.total()
            )));
        }
        Ok(())
    }

    /// Every r-set of `[n]`.
    pub fn full(n: usize, r: usize) -> Result<Self> {
        let ranker = Ranker::new(n, r)?;
        Self::check_size(&ranker)?;
        let total = ranker.total() as u32;
        let per_pair = crate::rset::binomial(n as u64 - 2, r as u64 - 2).unwrap() as u32;
        let mut pair_count = vec![per_pair; n * n];
        for x in 0..n {
            pair_count[x * n + x] = 0;
        }
        Ok(AvailableSet { ranker, dense: (0..total).collect(), pos: (0..total).collect(), pair_count })
    }

    pub fn from_sets<'a>(n: usize, r: usize, sets: impl IntoIterator<Item = &'a RSet>) -> Result<Self> {
        let ranker = Ranker::new(n, r)?;
        Self::check_size(&ranker)?;
        let mut q = AvailableSet {
            pos: vec![ABSENT; ranker.total() as usize],
            ranker,
            dense: Vec::new(),
            pair_count: vec![0; n * n],
        };
        for s in sets {
            q.insert(s);
        }
        Ok(q)
    }

    fn insert(&mut self, s: &RSet) {
        let rank = self.ranker.rank(s.vertices()) as usize;
        if self.pos[rank] != ABSENT {
            return;
        }
        self.pos[rank] = self.dense.len() as u32;
        self.dense.push(rank as u32);
        self.bump(s.vertices(), true);
    }

    fn bump(&mut self, v: &[Vertex], up: bool) {
        let n = self.ranker.n();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let (a, b) = (v[i] as usize, v[j] as usize);
                for idx in [a * n + b, b * n + a] {
                    if up {
                        self.pair_count[idx] += 1;
                    } else {
                        self.pair_count[idx] -= 1;
                    }
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.dense.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dense.is_empty()
    }

    pub fn ranker(&self) -> &Ranker {
        &self.ranker
    }

    /// `vertices` must be sorted.
    pub fn contains(&self, vertices: &[Vertex]) -> bool {
        self.pos[self.ranker.rank(vertices) as usize] != ABSENT
    }

    /// Removes the set with the given sorted vertices; returns whether it was present.
    pub fn remove(&mut self, vertices: &[Vertex]) -> bool {
        let rank = self.ranker.rank(vertices) as usize;
        let slot = self.pos[rank];
        if slot == ABSENT {
            return false;
        }
        let last = *self.dense.last().unwrap();
        self.dense[slot as usize] = last;
        self.pos[last as usize] = slot;
        self.dense.pop();
        self.pos[rank] = ABSENT;
        self.bump(vertices, false);
        true
    }

    /// Number of members containing both `x` and `y`.
    pub fn pair_count(&self, x: Vertex, y: Vertex) -> u32 {
        self.pair_count[x as usize * self.ranker.n() + y as usize]
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Option<RSet> {
        if self.dense.is_empty() {
            return None;
        }
        let slot = rng.random_range(0..self.dense.len() as u64) as usize;
        Some(self.ranker.unrank(self.dense[slot] as u64))
    }

    pub fn iter(&self) -> impl Iterator<Item = RSet> + '_ {
        self.dense.iter().map(|&rk| self.ranker.unrank(rk as u64))
    }

    /// Members in lexicographic order.
    pub fn to_sorted_vec(&self) -> Vec<RSet> {
        let mut v: Vec<RSet> = self.iter().collect();
        v.sort();
        v
    }

    /// `|Y_{f_m}|` read off the stored set: members containing the clique `f_m`.
    pub fn count_containing(&self, g: &HostGraph, f_m: &[Vertex]) -> u64 {
        let r = self.ranker.r();
        if f_m.len() >= 2 && self.pair_count(f_m[0], f_m[1]) == 0 {
            return 0;
        }
        if f_m.len() == r {
            return u64::from(self.contains(f_m));
        }
        if f_m.len() == 2 && g.adjacent(f_m[0], f_m[1]) {
            return self.pair_count(f_m[0], f_m[1]) as u64;
        }
        let pool = g.common_neighbors(f_m);
        let mut count = 0;
        for_each_clique_extension(g, f_m, &pool, r, |c| {
            if self.contains(c) {
                count += 1;
            }
        });
        count
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub chosen: RSet,
    /// Members sharing at least two vertices with `chosen`, sorted.
    pub destroyed_clique: Vec<RSet>,
    /// Members that are still cliques but now close a forbidden cycle, sorted.
    pub cycle_blocked: Vec<RSet>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EngineMode {
    #[default]
    Incremental,
    /// Full recomputation of `Q` after every step.
    Naive,
    /// Incremental, checked against the independent oracle after every step.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum UpdateStrategy {
    /// Remove exactly the sets closed by a new loose path through the chosen edge.
    #[default]
    PathClosure,
    /// Re-test every member meeting the ball of the given radius around the chosen edge.
    Ball { radius: usize },
}

#[derive(Clone, Debug)]
pub struct ProcessState {
    h: LinearHypergraph,
    g: HostGraph,
    q: AvailableSet,
    fam: ForbiddenFamily,
    rng: ChaCha8Rng,
    mode: EngineMode,
    strategy: UpdateStrategy,
}

impl ProcessState {
    pub fn new(n: usize, r: usize, fam: ForbiddenFamily, seed: u64) -> Result<Self> {
        Ok(ProcessState {
            h: LinearHypergraph::new(n, r)?,
            g: HostGraph::complete(n),
            q: AvailableSet::full(n, r)?,
            fam,
            rng: process_rng(seed),
            mode: EngineMode::Incremental,
            strategy: UpdateStrategy::PathClosure,
        })
    }

    /// A state built from an arbitrary linear hypergraph, with `Q` computed from scratch.
    pub fn from_hypergraph(h: LinearHypergraph, fam: ForbiddenFamily, seed: u64) -> Result<Self> {
        let g = crate::hypergraph::host_graph(&h);
        let q_list = crate::availability::enumerate_q(&h, &g, fam);
        let q = AvailableSet::from_sets(h.n(), h.r(), &q_list)?;
        Ok(ProcessState {
            h,
            g,
            q,
            fam,
            rng: process_rng(seed),
            mode: EngineMode::Incremental,
            strategy: UpdateStrategy::PathClosure,
        })
    }

    pub fn with_mode(mut self, mode: EngineMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_strategy(mut self, strategy: UpdateStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn h(&self) -> &LinearHypergraph {
        &self.h
    }

    pub fn g(&self) -> &HostGraph {
        &self.g
    }

    pub fn q(&self) -> &AvailableSet {
        &self.q
    }

    pub fn fam(&self) -> ForbiddenFamily {
        self.fam
    }

    /// The step counter `i`.
    pub fn i(&self) -> usize {
        self.h.len()
    }

    pub fn is_terminal(&self) -> bool {
        self.q.is_empty()
    }

    /// Chooses a uniformly random member of `Q` and applies it.
    pub fn step(&mut self) -> Result<RemovalReport> {
        let chosen = self.q.sample(&mut self.rng).ok_or(Error::Terminated)?;
        self.incremental_update(&chosen)
    }

    /// Adds `chosen` (which must be in `Q`) as the next edge and updates `Q`.
    pub fn incremental_update(&mut self, chosen: &RSet) -> Result<RemovalReport> {
        if self.q.is_empty() {
            return Err(Error::Terminated);
        }
        if !self.q.contains(chosen.vertices()) {
            return Err(Error::NotAvailable(chosen.vertices().to_vec()));
        }
        let reference = match self.mode {
            EngineMode::Verify => Some(classify_removals(self, chosen)),
            _ => None,
        };
        let report = match self.mode {
            EngineMode::Naive => self.naive_update(chosen)?,
            _ => self.fast_update(chosen)?,
        };
        if let Some(reference) = reference {
            self.verify(&report, &reference)?;
        }
        Ok(report)
    }

    fn verify(&self, report: &RemovalReport, reference: &RemovalReport) -> Result<()> {
        let step = self.i();
        let oracle = naive_q(&self.h, &self.g, self.fam);
        let ours = self.q.to_sorted_vec();
        if ours != oracle {
            let missing = oracle.iter().filter(|x| ours.binary_search(x).is_err()).count();
            let extra = ours.iter().filter(|x| oracle.binary_search(x).is_err()).count();
            return Err(Error::ConsistencyFailure {
                step,
                detail: format!("incremental Q has {extra} extra and {missing} missing sets"),
            });
        }
        if report != reference {
            return Err(Error::ConsistencyFailure {
                step,
                detail: format!(
                    "removal report differs: {}/{} destroyed, {}/{} blocked",
                    report.destroyed_clique.len(),
                    reference.destroyed_clique.len(),
                    report.cycle_blocked.len(),
                    reference.cycle_blocked.len()
                ),
            });
        }
        Ok(())
    }

    fn add_edge(&mut self, chosen: &RSet) -> Result<usize> {
        let idx = self.h.add_edge(chosen.clone())?;
        self.g.remove_clique(chosen);
        Ok(idx)
    }

    fn remove_destroyed(&mut self, chosen: &RSet) -> Vec<RSet> {
        let e = chosen.vertices();
        let r = self.h.r();
        let mut hits: Vec<RSet> = Vec::new();
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let (a, b) = (e[i], e[j]);
                if self.q.pair_count(a, b) == 0 {
                    continue;
                }
                let pool = self.g.common_neighbors(&[a, b]);
                for_each_clique_extension(&self.g, &[a, b], &pool, r, |c| {
                    // count each set once, from the first two vertices it shares with e
                    let mut shared = c.iter().filter(|v| chosen.contains(**v));
                    if shared.next() == Some(&a) && shared.next() == Some(&b) && c != e {
                        hits.push(RSet::from_slice_sorted(c));
                    }
                });
            }
        }
        hits.retain(|g| self.q.remove(g.vertices()));
        hits.sort();
        hits
    }

    fn fast_update(&mut self, chosen: &RSet) -> Result<RemovalReport> {
        self.q.remove(chosen.vertices());
        let destroyed = self.remove_destroyed(chosen);
        let idx = self.add_edge(chosen)?;
        let mut blocked = match self.strategy {
            UpdateStrategy::PathClosure => self.remove_path_closures(idx),
            UpdateStrategy::Ball { radius } => self.remove_in_ball(idx, radius),
        };
        blocked.sort();
        Ok(RemovalReport { chosen: chosen.clone(), destroyed_clique: destroyed, cycle_blocked: blocked })
    }

    fn naive_update(&mut self, chosen: &RSet) -> Result<RemovalReport> {
        let before = self.q.to_sorted_vec();
        self.add_edge(chosen)?;
        let after = crate::availability::enumerate_q(&self.h, &self.g, self.fam);
        let (mut destroyed, mut blocked) = (Vec::new(), Vec::new());
        for g in before {
            if g == *chosen || after.binary_search(&g).is_ok() {
                continue;
            }
            if g.intersection_size(chosen) >= 2 {
                destroyed.push(g);
            } else {
                blocked.push(g);
            }
        }
        self.q = AvailableSet::from_sets(self.h.n(), self.h.r(), &after)?;
        Ok(RemovalReport { chosen: chosen.clone(), destroyed_clique: destroyed, cycle_blocked: blocked })
    }

    /// Vertices on walks of at most `radius` edges of `H` starting with edge `idx`.
    fn ball(&self, idx: usize, radius: usize) -> Vec<bool> {
        let mut seen = vec![false; self.h.n()];
        if radius == 0 {
            return seen;
        }
        let mut edge_seen = vec![false; self.h.len()];
        edge_seen[idx] = true;
        let mut frontier = vec![idx];
        for v in self.h.edge(idx).vertices() {
            seen[*v as usize] = true;
        }
        for _ in 1..radius {
            let mut next = Vec::new();
            for &ei in &frontier {
                for &v in self.h.edge(ei).vertices() {
                    for &fi in self.h.incident(v) {
                        if !edge_seen[fi] {
                            edge_seen[fi] = true;
                            next.push(fi);
                            for w in self.h.edge(fi).vertices() {
                                seen[*w as usize] = true;
                            }
                        }
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    fn remove_in_ball(&mut self, idx: usize, radius: usize) -> Vec<RSet> {
        let ball = self.ball(idx, radius);
        let stale: Vec<RSet> = self
            .q
            .iter()
            .filter(|q| q.vertices().iter().any(|v| ball[*v as usize]))
            .filter(|q| !is_available(&self.h, &self.g, q, self.fam))
            .collect();
        for q in &stale {
            self.q.remove(q.vertices());
        }
        stale
    }

    /// Removes every member `g` with `g ∩ V(P) = {u, v}` for a loose path `P`
    /// of length `2..ell-1` through edge `idx` with ends `u`, `v`.
    fn remove_path_closures(&mut self, idx: usize) -> Vec<RSet> {
        let max_len = self.fam.ell() - 1;
        let mut walker = PathWalker {
            h: &self.h,
            g: &self.g,
            q: &mut self.q,
            max_len,
            used: self.h.edge(idx).vertices().to_vec(),
            right: Vec::new(),
            left: Vec::new(),
            found: Vec::new(),
        };
        walker.right_states(idx);
        walker.found
    }
}

/// One side of a path: edges leaving the chosen edge, each with the vertex
/// through which it was entered.
type Side = Vec<(usize, Vertex)>;

struct PathWalker<'a> {
    h: &'a LinearHypergraph,
    g: &'a HostGraph,
    q: &'a mut AvailableSet,
    max_len: usize,
    used: Vec<Vertex>,
    right: Side,
    left: Side,
    found: Vec<RSet>,
}

impl PathWalker<'_> {
    fn right_states(&mut self, e: usize) {
        // left side for the current right side
        self.left_states(e);
        if self.right.len() + 1 >= self.max_len {
            return;
        }
        let (tail, entry) = match self.right.last() {
            Some(&(ei, v)) => (ei, Some(v)),
            None => (e, None),
        };
        self.extend(tail, entry, true, e);
    }

    fn left_states(&mut self, e: usize) {
        self.emit(e);
        if self.right.len() + self.left.len() + 1 >= self.max_len {
            return;
        }
        let (tail, entry) = match self.left.last() {
            Some(&(ei, v)) => (ei, Some(v)),
            None => (e, self.right.first().map(|x| x.1)),
        };
        self.extend(tail, entry, false, e);
    }

    /// Appends every admissible edge through a vertex of `tail` other than `entry`.
    fn extend(&mut self, tail: usize, entry: Option<Vertex>, right: bool, e: usize) {
        let exits: Vec<Vertex> = self.h.edge(tail).vertices().iter().copied().filter(|&v| Some(v) != entry).collect();
        for z in exits {
            if !right && self.left.is_empty() && self.right.first().is_some_and(|x| x.1 == z) {
                continue;
            }
            for k in 0..self.h.incident(z).len() {
                let fi = self.h.incident(z)[k];
                let f = self.h.edge(fi);
                if f.vertices().iter().any(|&w| w != z && self.used.contains(&w)) {
                    continue;
                }
                let mark = self.used.len();
                self.used.extend(f.vertices().iter().copied().filter(|&w| w != z));
                if right {
                    self.right.push((fi, z));
                    self.right_states(e);
                    self.right.pop();
                } else {
                    self.left.push((fi, z));
                    self.left_states(e);
                    self.left.pop();
                }
                self.used.truncate(mark);
            }
        }
    }

    fn emit(&mut self, e: usize) {
        let len = 1 + self.left.len() + self.right.len();
        if len < 2 {
            return;
        }
        // each path is met once per orientation; keep one
        if let (Some(l), Some(r)) = (self.left.first(), self.right.first()) {
            if l.0 < r.0 {
                return;
            }
        } else if self.right.is_empty() {
            return;
        }
        let (first, first_in) = match self.left.last() {
            Some(&(ei, v)) => (ei, v),
            None => (e, self.right[0].1),
        };
        let (last, last_in) = match self.right.last() {
            Some(&(ei, v)) => (ei, v),
            None => (e, self.left[0].1),
        };
        let ends_u: Vec<Vertex> = self.h.edge(first).vertices().iter().copied().filter(|&v| v != first_in).collect();
        let ends_v: Vec<Vertex> = self.h.edge(last).vertices().iter().copied().filter(|&v| v != last_in).collect();
        let r = self.h.r();
        for &u in &ends_u {
            for &v in &ends_v {
                if !self.g.adjacent(u, v) || self.q.pair_count(u, v) == 0 {
                    continue;
                }
                let (a, b) = if u < v { (u, v) } else { (v, u) };
                let pool: Vec<Vertex> =
                    self.g.common_neighbors(&[a, b]).into_iter().filter(|w| !self.used.contains(w)).collect();
                let mut hits: Vec<RSet> = Vec::new();
                let q = &*self.q;
                for_each_clique_extension(self.g, &[a, b], &pool, r, |c| {
                    if q.contains(c) {
                        hits.push(RSet::from_slice_sorted(c));
                    }
                });
                for g in hits {
                    if self.q.remove(g.vertices()) {
                        self.found.push(g);
                    }
                }
            }
        }
    }
}

/// Reference classification of `Q(i) \ Q(i+1) \ {chosen}`; does not touch `state`.
pub fn classify_removals(state: &ProcessState, chosen: &RSet) -> RemovalReport {
    let mut h = state.h.clone();
    let mut g = state.g.clone();
    let (mut destroyed, mut blocked) = (Vec::new(), Vec::new());
    let members = state.q.to_sorted_vec();
    if h.add_edge(chosen.clone()).is_ok() {
        g.remove_clique(chosen);
    }
    for f in members {
        if f == *chosen {
            continue;
        }
        if f.intersection_size(chosen) >= 2 {
            destroyed.push(f);
        } else if !is_available(&h, &g, &f, state.fam) {
            blocked.push(f);
        }
    }
    RemovalReport { chosen: chosen.clone(), destroyed_clique: destroyed, cycle_blocked: blocked }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    Termination,
    StepCap(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    /// `i = 0`, every `ceil(ratio^k)` and the final step.
    Geometric { ratio: f64 },
    /// Every `every`-th step and the final step.
    Every { every: u64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Geometric { ratio: 1.25 }
    }
}

impl Schedule {
    /// The first checkpoint strictly after `i`.
    pub fn next_after(&self, i: u64) -> u64 {
        match *self {
            Schedule::Every { every } => (i / every.max(1) + 1) * every.max(1),
            Schedule::Geometric { ratio } => {
                let mut x = 1.0f64;
                loop {
                    let c = x.ceil() as u64;
                    if c > i {
                        return c;
                    }
                    x *= ratio;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Uniform `f_m` per checkpoint, for each `m = 2..r-1`.
    pub y_per_checkpoint: usize,
    /// Uniform `f ∈ Q` per checkpoint.
    pub w_per_checkpoint: usize,
    /// `(L, k)` pairs measured on each sampled `f`.
    pub w_pairs: Vec<(usize, usize)>,
}

impl Sampling {
    pub fn none() -> Self {
        Sampling { y_per_checkpoint: 0, w_per_checkpoint: 0, w_pairs: vec![] }
    }

    /// 32 codegree and 16 cycle samples per checkpoint, cycles with `k = L-2`.
    pub fn standard(ell: usize) -> Self {
        Sampling { y_per_checkpoint: 32, w_per_checkpoint: 16, w_pairs: (3..=ell).map(|l| (l, l - 2)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YSample {
    pub m: usize,
    pub value: u64,
    /// Value one step later, if `f_m` is still a clique.
    pub next: Option<u64>,
    #[serde(skip)]
    vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WSample {
    #[serde(rename = "L")]
    pub len: usize,
    pub k: usize,
    #[serde(rename = "v")]
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub i: u64,
    pub q: u64,
    /// `|Q(i+1)|`, absent at the last checkpoint of a run.
    pub q_next: Option<u64>,
    pub y: Vec<YSample>,
    pub w: Vec<WSample>,
}

impl Checkpoint {
    pub fn y_mean(&self, m: usize) -> Option<(f64, usize)> {
        let v: Vec<f64> = self.y.iter().filter(|s| s.m == m).map(|s| s.value as f64).collect();
        (!v.is_empty()).then(|| (v.iter().sum::<f64>() / v.len() as f64, v.len()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub params: ModelParams,
    pub trial: u64,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Number of steps performed.
    pub m_final: u64,
    pub terminated: bool,
}

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub mode: EngineMode,
    pub strategy: UpdateStrategy,
}

pub struct TrialOutcome {
    pub trace: Trace,
    pub hypergraph: LinearHypergraph,
}

fn sample_clique(state: &ProcessState, m: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vertex>> {
    let n = state.h.n() as u32;
    if state.g.edge_count() == 0 {
        return None;
    }
    for _ in 0..100_000 {
        let mut v: Vec<Vertex> = Vec::with_capacity(m);
        while v.len() < m {
            let x = rng.random_range(0..n);
            if !v.contains(&x) {
                v.push(x);
            }
        }
        v.sort_unstable();
        if state.g.is_clique(&v) {
            return Some(v);
        }
    }
    None
}

fn measure(state: &ProcessState, sampling: &Sampling, rng: &mut ChaCha8Rng) -> (Vec<YSample>, Vec<WSample>) {
    let mut ys = Vec::new();
    for m in 2..state.h.r() {
        for _ in 0..sampling.y_per_checkpoint {
            if let Some(v) = sample_clique(state, m, rng) {
                let value = state.q.count_containing(&state.g, &v);
                ys.push(YSample { m, value, next: None, vertices: v });
            }
        }
    }
    let mut ws = Vec::new();
    if !sampling.w_pairs.is_empty() {
        for _ in 0..sampling.w_per_checkpoint {
            let Some(f) = state.q.sample(rng) else { break };
            for &(len, k) in &sampling.w_pairs {
                let in_q = |e: &RSet| state.q.contains(e.vertices());
                if let Ok((value, _)) = count_w_with(&state.h, &state.g, in_q, &f, len, k) {
                    ws.push(WSample { len, k, value: value as u64 });
                }
            }
        }
    }
    (ys, ws)
}

/// Runs one trial from the empty hypergraph.
pub fn run_trial(
    params: &ModelParams,
    trial: u64,
    seed: u64,
    schedule: &Schedule,
    stop: StopRule,
    sampling: &Sampling,
    options: &EngineOptions,
) -> Result<TrialOutcome> {
    let fam = ForbiddenFamily::new(params.ell)?;
    let mut state =
        ProcessState::new(params.n, params.r, fam, seed)?.with_mode(options.mode).with_strategy(options.strategy);
    let mut srng = sampling_rng(seed);
    let cap = match stop {
        StopRule::Termination => u64::MAX,
        StopRule::StepCap(c) => c,
    };
    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    let mut next_cp = 0u64;
    let mut pending: Option<usize> = None;
    let mut i = 0u64;
    loop {
        let done = state.is_terminal() || i >= cap;
        if i == next_cp || done {
            let (y, w) = measure(&state, sampling, &mut srng);
            checkpoints.push(Checkpoint { i, q: state.q.len() as u64, q_next: None, y, w });
            pending = Some(checkpoints.len() - 1);
            next_cp = schedule.next_after(i);
        }
        if done {
            break;
        }
        state.step()?;
        i += 1;
        if let Some(idx) = pending.take() {
            let cp = &mut checkpoints[idx];
            cp.q_next = Some(state.q.len() as u64);
            for s in &mut cp.y {
                if state.g.is_clique(&s.vertices) {
                    s.next = Some(state.q.count_containing(&state.g, &s.vertices));
                }
            }
        }
    }
    let terminated = state.is_terminal();
    Ok(TrialOutcome {
        trace: Trace { params: params.clone(), trial, seed, checkpoints, m_final: i, terminated },
        hypergraph: state.h,
    })
}
