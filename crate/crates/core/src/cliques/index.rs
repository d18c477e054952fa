//! Explicit k-clique store with an edge -> clique inverted index.
//!
//! Supports O(1) uniform draws from the live cliques and the removal
//! cascade: retiring one clique's edges kills every clique sharing an edge
//! with it. Deletions are lazy (dead flags); stale references are purged
//! once they outnumber live ones.

use std::collections::HashMap;

use rand::Rng;

use crate::cliques::{self, Clique};
use crate::error::{Error, Result};
use crate::graph::GraphState;

/// Default guard on total clique-id references (Q * C(k,2)) held by an index.
pub const DEFAULT_INDEX_CAP: u64 = 50_000_000;

/// Outcome of one removal cascade.
#[derive(Clone, Debug)]
pub struct RemovalReport {
    /// Decrease of the live count; at least 1 (the removed clique itself).
    pub destroyed: u64,
    /// The C(k, 2) retired edges, each with u < v.
    pub removed_edges: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct CliqueIndex {
    k: usize,
    verts: Vec<u32>,
    alive: Vec<bool>,
    live_ids: Vec<u32>,
    live_pos: Vec<u32>,
    edge_map: HashMap<(u32, u32), Vec<u32>>,
    total_refs: u64,
}

const NOT_LIVE: u32 = u32::MAX;

impl CliqueIndex {
    /// Materializes all k-cliques of `g`. Errors before allocating past the
    /// reference cap (`Q * C(k,2) <= cap`).
    pub fn build(g: &GraphState, k: usize, cap: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(
                "clique index requires k >= 2".into(),
            ));
        }
        if k > g.n() {
            return Err(Error::InvalidParameter(format!(
                "k={k} exceeds vertex count {}",
                g.n()
            )));
        }
        let refs_per_clique = (k * (k - 1) / 2) as u64;
        let clique_cap = cap / refs_per_clique;
        let mut verts: Vec<u32> = Vec::new();
        let visit = cliques::visit_cliques(g, k, Some(clique_cap), |vs| {
            verts.extend_from_slice(vs);
        });
        if let Err(Error::EnumerationCap { .. }) = visit {
            return Err(Error::IndexCap {
                cap,
                refs: (clique_cap + 1) * refs_per_clique,
            });
        }
        visit?;

        let total = verts.len() / k;
        let mut edge_map: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for id in 0..total {
            let vs = &verts[id * k..(id + 1) * k];
            for i in 0..k {
                for j in (i + 1)..k {
                    edge_map
                        .entry((vs[i], vs[j]))
                        .or_default()
                        .push(id as u32);
                }
            }
        }
        Ok(CliqueIndex {
            k,
            verts,
            alive: vec![true; total],
            live_ids: (0..total as u32).collect(),
            live_pos: (0..total as u32).collect(),
            edge_map,
            total_refs: total as u64 * refs_per_clique,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn live_count(&self) -> u64 {
        self.live_ids.len() as u64
    }

    #[inline]
    pub fn is_live(&self, id: u32) -> bool {
        (id as usize) < self.alive.len() && self.alive[id as usize]
    }

    /// Sorted vertex ids of the clique record `id` (live or dead).
    pub fn clique_vertices(&self, id: u32) -> &[u32] {
        let id = id as usize;
        &self.verts[id * self.k..(id + 1) * self.k]
    }

    /// Y_e readout: live cliques through a current edge. Pairs without an
    /// entry (or with only dead references) read as zero.
    pub fn y_edge_live(&self, e: (u32, u32)) -> u64 {
        let key = normalize(e);
        match self.edge_map.get(&key) {
            Some(list) => list.iter().filter(|&&id| self.alive[id as usize]).count() as u64,
            None => 0,
        }
    }

    /// Uniform draw among live clique ids; `None` iff none are left.
    pub fn sample_live<R: Rng>(&self, rng: &mut R) -> Option<u32> {
        if self.live_ids.is_empty() {
            return None;
        }
        Some(self.live_ids[rng.random_range(0..self.live_ids.len())])
    }

    /// Iterates over live clique ids in an unspecified but deterministic order.
    pub fn live_ids(&self) -> &[u32] {
        &self.live_ids
    }

    fn kill(&mut self, id: u32) {
        debug_assert!(self.alive[id as usize]);
        self.alive[id as usize] = false;
        let pos = self.live_pos[id as usize] as usize;
        let last = *self.live_ids.last().unwrap();
        self.live_ids.swap_remove(pos);
        if (last != id) && pos < self.live_ids.len() {
            self.live_pos[last as usize] = pos as u32;
        }
        self.live_pos[id as usize] = NOT_LIVE;
    }

    /// Retires all C(k, 2) edges of the live clique `id`. Every live clique
    /// containing any retired edge is marked dead exactly once.
    pub fn remove_clique(&mut self, id: u32) -> Result<RemovalReport> {
        if !self.is_live(id) {
            return Err(Error::BadCliqueId { id: id as u64 });
        }
        let vs: Vec<u32> = self.clique_vertices(id).to_vec();
        let mut removed_edges = Vec::with_capacity(self.k * (self.k - 1) / 2);
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                removed_edges.push((vs[i], vs[j]));
            }
        }
        let mut destroyed = 0u64;
        for &e in &removed_edges {
            if let Some(list) = self.edge_map.remove(&e) {
                self.total_refs -= list.len() as u64;
                for cid in list {
                    if self.alive[cid as usize] {
                        self.kill(cid);
                        destroyed += 1;
                    }
                }
            }
        }
        debug_assert!(destroyed >= 1);

        let live_refs = self.live_count() * (self.k * (self.k - 1) / 2) as u64;
        if self.total_refs > 2 * live_refs {
            self.purge();
        }
        Ok(RemovalReport {
            destroyed,
            removed_edges,
        })
    }

    /// Drops stale references from every edge list.
    fn purge(&mut self) {
        let alive = &self.alive;
        self.edge_map.retain(|_, list| {
            list.retain(|&id| alive[id as usize]);
            !list.is_empty()
        });
        self.total_refs = self.edge_map.values().map(|l| l.len() as u64).sum();
    }

    /// Sum of Y_e over the current edges of `g`; equals C(k,2) * live_count
    /// whenever `g` is the graph this index has been tracking.
    pub fn sum_y_over_edges(&self, g: &GraphState) -> u64 {
        let mut sum = 0u64;
        g.for_each_edge(|u, v| sum += self.y_edge_live((u, v)));
        sum
    }

    /// From-scratch recount oracle: checks the live count and every current
    /// edge's Y_e readout against fresh counts on `g`.
    pub fn recount_check(&self, g: &GraphState) -> std::result::Result<(), String> {
        let fresh = cliques::count_cliques(g, self.k);
        if fresh != self.live_count() {
            return Err(format!(
                "live count {} but recount gives {fresh}",
                self.live_count()
            ));
        }
        let mut bad = None;
        g.for_each_edge(|u, v| {
            if bad.is_some() {
                return;
            }
            let idx = self.y_edge_live((u, v));
            let fresh = cliques::y_edge(g, self.k, (u, v));
            if idx != fresh {
                bad = Some(format!("Y_({u},{v}) index {idx} != recount {fresh}"));
            }
        });
        match bad {
            Some(msg) => Err(msg),
            None => Ok(()),
        }
    }

    /// Structural identity: every live clique appears under exactly C(k,2)
    /// edges. Intended for tests.
    pub fn live_reference_identity_holds(&self) -> bool {
        let live_sum: u64 = self
            .edge_map
            .values()
            .map(|l| l.iter().filter(|&&id| self.alive[id as usize]).count() as u64)
            .sum();
        live_sum == self.live_count() * (self.k * (self.k - 1) / 2) as u64
    }

    /// The live clique records, as sorted vertex lists, in id order.
    pub fn live_cliques(&self) -> Vec<Clique> {
        let mut ids: Vec<u32> = self.live_ids.to_vec();
        ids.sort_unstable();
        ids.into_iter()
            .map(|id| Clique::from_sorted_unchecked(self.clique_vertices(id).to_vec()))
            .collect()
    }
}

#[inline]
fn normalize(e: (u32, u32)) -> (u32, u32) {
    if e.0 <= e.1 {
        e
    } else {
        (e.1, e.0)
    }
}
