//! Exact k-clique counting, enumeration, uniform sampling, and per-edge /
//! per-triple containment counts.
//!
//! The workhorse is an ordered DFS over degeneracy-ordered candidates with
//! bitset intersection pruning; in the dense near-maximal regime the branch
//! factor collapses after a few levels.

mod index;

pub use index::{CliqueIndex, RemovalReport, DEFAULT_INDEX_CAP};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphState;

/// A k-clique: strictly increasing vertex ids, all pairs adjacent in the
/// host graph at creation time.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clique(Vec<u32>);

impl Clique {
    /// Wraps a vertex list, sorting it and rejecting duplicates. Adjacency in
    /// a host graph is the caller's concern (see `verify_packing`).
    pub fn from_vertices(mut vertices: Vec<u32>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "repeated vertex in clique {vertices:?}"
            )));
        }
        Ok(Clique(vertices))
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Clique(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The C(k, 2) vertex pairs of this clique, each with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let k = self.0.len();
        let mut out = Vec::with_capacity(k * (k.saturating_sub(1)) / 2);
        for i in 0..k {
            for j in (i + 1)..k {
                out.push((self.0[i], self.0[j]));
            }
        }
        out
    }
}

impl std::fmt::Display for Clique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Counting / enumeration kernel
// ---------------------------------------------------------------------------

#[inline]
fn count_ones(words: &[u64]) -> u64 {
    words.iter().map(|w| u64::from(w.count_ones())).sum()
}

#[inline]
fn for_each_bit<F: FnMut(usize)>(words: &[u64], mut f: F) {
    for (wi, &w) in words.iter().enumerate() {
        let mut word = w;
        while word != 0 {
            f(wi * 64 + word.trailing_zeros() as usize);
            word &= word - 1;
        }
    }
}

/// Smallest-last (degeneracy) ordering. Deterministic for a fixed graph.
fn degeneracy_order(g: &GraphState) -> Vec<u32> {
    let n = g.n();
    let mut deg: Vec<u32> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let max_deg = deg.iter().copied().max().unwrap_or(0) as usize;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v] as usize].push(v as u32);
    }
    let mut order = Vec::with_capacity(n);
    let mut floor = 0usize;
    while order.len() < n {
        while floor < buckets.len() && buckets[floor].is_empty() {
            floor += 1;
        }
        let cand = buckets[floor].remove(0);
        // stale bucket entry: vertex already taken or re-filed lower
        if removed[cand as usize] || deg[cand as usize] as usize != floor {
            continue;
        }
        removed[cand as usize] = true;
        order.push(cand);
        for_each_bit(g.row(cand as usize), |u| {
            if !removed[u] {
                deg[u] -= 1;
                let d = deg[u] as usize;
                buckets[d].push(u as u32);
                if d < floor {
                    floor = d;
                }
            }
        });
    }
    order
}

/// Forward adjacency in degeneracy positions: `fwd[i]` holds positions j > i
/// adjacent to the vertex at position i.
struct OrderedView {
    words: usize,
    fwd: Vec<u64>,
    order: Vec<u32>,
}

impl OrderedView {
    fn build(g: &GraphState) -> Self {
        let n = g.n();
        let order = degeneracy_order(g);
        let mut pos = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let words = n.div_ceil(64);
        let mut fwd = vec![0u64; n * words];
        g.for_each_edge(|u, v| {
            let (pu, pv) = (pos[u as usize] as usize, pos[v as usize] as usize);
            let (lo, hi) = if pu < pv { (pu, pv) } else { (pv, pu) };
            fwd[lo * words + hi / 64] |= 1u64 << (hi % 64);
        });
        OrderedView { words, fwd, order }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.fwd[i * self.words..(i + 1) * self.words]
    }
}

struct DfsCtx<'a, F> {
    view: &'a OrderedView,
    scratch: Vec<u64>,
    stack: Vec<u32>,
    count: u64,
    cap: Option<u64>,
    visitor: F,
}

impl<'a, F: FnMut(&[u32])> DfsCtx<'a, F> {
    /// Extends the current stack by every clique of `need` more vertices
    /// drawn from the candidate set at scratch level `level`.
    fn descend(&mut self, level: usize, need: usize) -> Result<()> {
        let words = self.view.words;
        if need == 0 {
            self.emit()?;
            return Ok(());
        }
        let cand_start = level * words;
        if need == 1 {
            // Leaf level: every candidate completes a clique.
            let cand: Vec<u64> = self.scratch[cand_start..cand_start + words].to_vec();
            let mut out = Ok(());
            for_each_bit(&cand, |i| {
                if out.is_ok() {
                    self.stack.push(i as u32);
                    out = self.emit();
                    self.stack.pop();
                }
            });
            return out;
        }
        let mut choices = Vec::new();
        for_each_bit(&self.scratch[cand_start..cand_start + words], |i| {
            choices.push(i)
        });
        for i in choices {
            self.stack.push(i as u32);
            let next_start = (level + 1) * words;
            for w in 0..words {
                self.scratch[next_start + w] =
                    self.scratch[cand_start + w] & self.view.row(i)[w];
            }
            // prune branches that cannot reach depth k
            if count_ones(&self.scratch[next_start..next_start + words]) >= (need - 1) as u64 {
                self.descend(level + 1, need - 1)?;
            }
            self.stack.pop();
        }
        Ok(())
    }

    fn emit(&mut self) -> Result<()> {
        self.count += 1;
        if let Some(cap) = self.cap {
            if self.count > cap {
                return Err(Error::EnumerationCap {
                    cap,
                    seen: self.count,
                });
            }
        }
        (self.visitor)(&self.stack);
        Ok(())
    }
}

/// Visits every k-clique exactly once as sorted original vertex ids, in a
/// deterministic order for a fixed graph. Internal building block for the
/// public operations.
pub(crate) fn visit_cliques<F: FnMut(&[u32])>(
    g: &GraphState,
    k: usize,
    cap: Option<u64>,
    mut visitor: F,
) -> Result<u64> {
    let n = g.n();
    assert!(k >= 1 && k <= n, "clique size {k} out of range 1..={n}");
    let view = OrderedView::build(g);
    let words = view.words;
    let order = view.order.clone();
    let mut verts: Vec<u32> = Vec::with_capacity(k);
    let translate = move |positions: &[u32]| {
        verts.clear();
        verts.extend(positions.iter().map(|&p| order[p as usize]));
        verts.sort_unstable();
        visitor(&verts);
    };
    let mut ctx = DfsCtx {
        view: &view,
        scratch: vec![0u64; (k + 1) * words],
        stack: Vec::with_capacity(k),
        count: 0,
        cap,
        visitor: translate,
    };
    if k == 1 {
        for i in 0..n {
            ctx.stack.push(i as u32);
            ctx.emit()?;
            ctx.stack.pop();
        }
        return Ok(ctx.count);
    }
    for i in 0..n {
        ctx.stack.push(i as u32);
        let row = ctx.view.row(i).to_vec();
        ctx.scratch[words..2 * words].copy_from_slice(&row);
        if count_ones(&row) >= (k - 1) as u64 {
            ctx.descend(1, k - 1)?;
        }
        ctx.stack.pop();
    }
    Ok(ctx.count)
}

/// Exact number of k-vertex complete subgraphs of `g`.
pub fn count_cliques(g: &GraphState, k: usize) -> u64 {
    visit_cliques(g, k, None, |_| {}).expect("uncapped visit cannot fail")
}

/// Emits each k-clique exactly once as sorted original vertex ids,
/// lexicographically ordered. Errors once more than `cap` cliques are seen.
pub fn enumerate_cliques(g: &GraphState, k: usize, cap: u64) -> Result<Vec<Clique>> {
    let mut out = Vec::new();
    visit_cliques(g, k, Some(cap), |verts| {
        out.push(Clique::from_sorted_unchecked(verts.to_vec()));
    })?;
    out.sort_unstable();
    Ok(out)
}

/// Brute-force k-clique count by testing every k-subset. Independent oracle
/// for the DFS kernel; refuses when C(n, k) exceeds the guard (1e7).
pub fn brute_force_count(g: &GraphState, k: usize) -> Result<u64> {
    const GUARD: u64 = 10_000_000;
    let n = g.n();
    if k == 0 || k > n {
        return Ok(if k == 0 { 1 } else { 0 });
    }
    let subsets = checked_binomial(n as u64, k as u64);
    match subsets {
        Some(s) if s <= GUARD => {}
        _ => {
            return Err(Error::BruteForceGuard {
                n: n as u64,
                k: k as u64,
                subsets: subsets.unwrap_or(u64::MAX),
                guard: GUARD,
            })
        }
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut count = 0u64;
    loop {
        let mut complete = true;
        'pairs: for i in 0..k {
            for j in (i + 1)..k {
                if !g.has_edge(idx[i] as u32, idx[j] as u32) {
                    complete = false;
                    break 'pairs;
                }
            }
        }
        if complete {
            count += 1;
        }
        // next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(count);
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// C(n, k) with overflow detection.
pub fn checked_binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Counts j-cliques of `g` whose vertices all lie inside the bitset `mask`.
fn count_cliques_within(g: &GraphState, mask: &[u64], j: usize) -> u64 {
    if j == 0 {
        return 1;
    }
    if j == 1 {
        return count_ones(mask);
    }
    let words = g.words_per_row();
    let mut scratch = vec![0u64; (j + 1) * words];
    scratch[..words].copy_from_slice(mask);
    fn rec(g: &GraphState, scratch: &mut Vec<u64>, level: usize, j: usize) -> u64 {
        let words = g.words_per_row();
        let start = level * words;
        if j == 1 {
            return count_ones(&scratch[start..start + words]);
        }
        let mut members = Vec::new();
        for_each_bit(&scratch[start..start + words], |v| members.push(v));
        let mut total = 0u64;
        for v in members {
            let next = (level + 1) * words;
            let row = g.row(v);
            for w in 0..words {
                scratch[next + w] = scratch[start + w] & row[w];
            }
            // keep only ids above v to avoid double counting
            let wv = v / 64;
            scratch[next + wv] &= (!0u64).checked_shl((v % 64 + 1) as u32).unwrap_or(0);
            for w in 0..wv {
                scratch[next + w] = 0;
            }
            if count_ones(&scratch[next..next + words]) >= (j - 1) as u64 {
                total += rec(g, scratch, level + 1, j - 1);
            }
        }
        total
    }
    rec(g, &mut scratch, 0, j)
}

fn neighborhood_mask(g: &GraphState, anchor: &[u32]) -> Vec<u64> {
    let words = g.words_per_row();
    let mut mask = vec![!0u64; words];
    // clear bits beyond n
    let n = g.n();
    if !n.is_multiple_of(64) {
        mask[words - 1] = (1u64 << (n % 64)) - 1;
    }
    for &v in anchor {
        let row = g.row(v as usize);
        for w in 0..words {
            mask[w] &= row[w];
        }
    }
    for &v in anchor {
        mask[(v / 64) as usize] &= !(1u64 << (v % 64));
    }
    mask
}

/// Y_e: the number of k-cliques of `g ∪ {e}` that contain both endpoints of
/// `e`. The pair need not be a current edge; it is force-added.
pub fn y_edge(g: &GraphState, k: usize, e: (u32, u32)) -> u64 {
    let (u, v) = e;
    assert!(u != v, "y_edge endpoints must be distinct");
    assert!((u as usize) < g.n() && (v as usize) < g.n());
    if k < 2 {
        return 0;
    }
    let mask = neighborhood_mask(g, &[u, v]);
    count_cliques_within(g, &mask, k - 2)
}

/// Y_S for |S| = 3: the number of k-cliques of `g ∪ pairs(S)` containing S.
pub fn y_set(g: &GraphState, k: usize, s: [u32; 3]) -> u64 {
    assert!(s[0] != s[1] && s[0] != s[2] && s[1] != s[2], "S must have 3 distinct vertices");
    assert!(s.iter().all(|&v| (v as usize) < g.n()));
    if k < 3 {
        return 0;
    }
    let mask = neighborhood_mask(g, &s);
    count_cliques_within(g, &mask, k - 3)
}

/// Draws a k-clique exactly uniformly from all k-cliques of `g`, or returns
/// `None` when the graph has no k-clique. Two-phase: enumerate under `cap`,
/// then draw an index.
pub fn sample_uniform_clique<R: Rng>(
    g: &GraphState,
    k: usize,
    rng: &mut R,
    cap: u64,
) -> Result<Option<Clique>> {
    let all = enumerate_cliques(g, k, cap)?;
    if all.is_empty() {
        return Ok(None);
    }
    let i = rng.random_range(0..all.len());
    Ok(Some(all[i].clone()))
}
